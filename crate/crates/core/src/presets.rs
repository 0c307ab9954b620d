//! The four reference chains: N = 31 with linear (A = 7) and inverted
//! quadratic spectra, each with and without boundary states.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::iep::{solve, ChainCouplings};
use crate::spectrum::{generate_inverted_quadratic, generate_linear, shift_spectrum, Spectrum};

pub const REFERENCE_N: usize = 31;
pub const REFERENCE_A: u32 = 7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceChain {
    pub id: String,
    pub description: String,
    pub spectrum: Spectrum,
    pub couplings: ChainCouplings,
    /// Transfer time of the unperturbed chain.
    pub tau: f64,
}

fn build(id: &str, description: &str, spectrum: Spectrum, tau: f64) -> Result<ReferenceChain> {
    let couplings = solve(&spectrum)?;
    Ok(ReferenceChain {
        id: id.to_owned(),
        description: description.to_owned(),
        spectrum,
        couplings,
        tau,
    })
}

/// Linear, linear shifted by `A − 1`, inverted quadratic, inverted quadratic
/// shifted by `N − 3`, in that order.
pub fn reference_chains() -> Result<Vec<ReferenceChain>> {
    let n = REFERENCE_N;
    let a = REFERENCE_A;
    let linear = generate_linear(n, a)?;
    let quadratic = generate_inverted_quadratic(n)?;
    Ok(vec![
        build(
            "linear",
            "linear spectrum, N = 31, A = 7",
            linear.clone(),
            PI / a as f64,
        )?,
        build(
            "linear_shifted",
            "linear spectrum shifted by C = A - 1 = 6",
            shift_spectrum(&linear, (a - 1) as f64)?,
            PI,
        )?,
        build(
            "inverted_quadratic",
            "inverted quadratic spectrum, N = 31",
            quadratic.clone(),
            PI,
        )?,
        build(
            "inverted_quadratic_shifted",
            "inverted quadratic spectrum shifted by C = N - 3 = 28",
            shift_spectrum(&quadratic, (n - 3) as f64)?,
            PI,
        )?,
    ])
}
