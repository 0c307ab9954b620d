//! Design and analysis of XX spin chains for quantum state transfer.
//!
//! The usual workflow: pick a [`Spectrum`](spectrum::Spectrum) (optionally
//! shifted to add nearly zero eigenvalues), reconstruct the chain with
//! [`iep::solve`], then study its transfer dynamics ([`dynamics`]) and its
//! robustness to coupling disorder ([`disorder`]).

pub mod beta;
pub mod disorder;
pub mod dynamics;
pub mod effective;
pub mod eigen;
pub mod error;
pub mod iep;
pub mod presets;
pub mod spectrum;

pub use beta::{fit_beta, BetaFit, FitMethod};
pub use disorder::{
    histogram, perturb_couplings, run_experiment, run_experiment_with, DisorderConfig,
    DisorderReport, Histogram, RunOptions,
};
pub use dynamics::{
    average_fidelity, eigendecompose, evolve, overlap_trace, transfer_overlap, EigenSystem,
    StateVector,
};
pub use effective::{effective_model, EffectiveModel, Parity};
pub use error::{Error, ErrorKind, Result};
pub use iep::{compute_weights, forward_eigenvalues, solve, ChainCouplings};
pub use presets::{reference_chains, ReferenceChain};
pub use spectrum::{
    band_condition, boundary_metric, generate, generate_cosine, generate_inverted_quadratic,
    generate_linear, shift_spectrum, verify_pst, BandModel, Family, PstReport, Spectrum,
};
