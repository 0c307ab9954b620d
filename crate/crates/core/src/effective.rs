//! Weak end-coupling picture of state transfer.
//!
//! The chain is split as `H = H0 + V`, where `V` carries only the two end
//! couplings `b_1` and `b_{N−1}`. Sites 1 and N are zero modes of `H0`; for
//! odd N the inner chain contributes a third zero mode `ξ0`. Transfer then
//! reduces to a three-level (odd N, frequency ν) or two-level (even N, Rabi
//! frequency Ω) problem.
//!
//! Ω is evaluated as `−2 Σ_k V_{1k} V_{kN} / ξ_k²`. For a symmetric inner
//! chain the terms of that sum cancel pairwise, so the model also carries a
//! cross-check against exact diagonalisation of the full chain.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eigen::{tridiagonal_eigen, tridiagonal_eigenvalues};
use crate::error::{Error, Result};
use crate::iep::ChainCouplings;

/// ν and Ω must stay below this fraction of ξ_min for the model to apply.
pub const VALIDITY_RATIO: f64 = 0.1;
/// Relative tolerance for "equal end couplings" and "no local fields".
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    OddN,
    EvenN,
}

/// Exact-diagonalisation reference for the effective model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplittingCheck {
    /// Half-width of the central triplet (odd N) or gap of the central doublet (even N).
    pub exact_splitting: f64,
    /// Transfer time implied by `exact_splitting`.
    pub exact_tau: f64,
    /// `|predicted_tau − exact_tau| / exact_tau`.
    pub tau_discrepancy: f64,
    /// `log2(split(b) / split(b/2))` with both end couplings halved.
    pub splitting_exponent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveModel {
    pub nu: f64,
    pub omega: f64,
    /// (Δ_1, Δ_N); identically zero by symmetry.
    pub detunings: [f64; 2],
    pub parity: Parity,
    pub predicted_tau: f64,
    /// Smallest nonzero |ξ_k| of the decoupled inner chain.
    pub xi_min: f64,
    /// `(V_{01}, V_{0N})` for odd N.
    pub zero_mode_couplings: Option<[f64; 2]>,
    pub check: SplittingCheck,
    pub warnings: Vec<String>,
}

impl EffectiveModel {
    pub fn is_perturbative(&self) -> bool {
        self.warnings.is_empty()
    }

    /// Amplitude on site N at time `t` when starting from site 1, from the
    /// closed-form solution of the reduced model.
    pub fn end_amplitude(&self, t: f64) -> Complex64 {
        match self.parity {
            Parity::OddN => {
                let sign = match self.zero_mode_couplings {
                    Some([v1, vn]) if v1 * vn < 0.0 => -1.0,
                    _ => 1.0,
                };
                let s = (self.nu * t / 2.0).sin();
                Complex64::new(-sign * s * s, 0.0)
            }
            Parity::EvenN => Complex64::new(0.0, -(self.omega * t / 2.0).sin()),
        }
    }
}

fn central_splitting(c_a: &[f64], c_b: &[f64]) -> Result<f64> {
    let n = c_a.len();
    let vals = tridiagonal_eigenvalues(c_a, c_b)?;
    let mid = n / 2;
    Ok(if n % 2 == 1 {
        (vals[mid + 1] - vals[mid - 1]) / 2.0
    } else {
        vals[mid] - vals[mid - 1]
    })
}

/// Builds the reduced model of a chain with equal end couplings and no fields.
pub fn effective_model(c: &ChainCouplings) -> Result<EffectiveModel> {
    let n = c.len();
    if n < 3 {
        return Err(Error::InvalidArgument(
            "effective model needs at least 3 sites".into(),
        ));
    }
    let b = c.b();
    let (b_first, b_last) = (b[0], b[n - 2]);
    let scale = c.max_coupling();
    if (b_first - b_last).abs() > SYMMETRY_TOLERANCE * b_first.max(b_last) {
        return Err(Error::InvalidArgument(format!(
            "end couplings must be equal, got b_1 = {b_first} and b_(N-1) = {b_last}"
        )));
    }
    if c.a().iter().any(|a| a.abs() > SYMMETRY_TOLERANCE * scale) {
        return Err(Error::InvalidArgument(
            "effective model assumes vanishing local fields".into(),
        ));
    }

    // H0 without the end couplings: isolated sites 1, N plus the inner chain.
    let inner_a = c.a()[1..n - 1].to_vec();
    let inner_b = &b[1..n - 2];
    let (xi, modes) = tridiagonal_eigen(&inner_a, inner_b)?;
    let inner_norm = inner_b
        .iter()
        .copied()
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let parity = if n % 2 == 1 {
        Parity::OddN
    } else {
        Parity::EvenN
    };

    let zero_index = match parity {
        Parity::OddN => {
            let (k, _) = xi
                .iter()
                .enumerate()
                .min_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
                .expect("inner chain is non-empty");
            debug_assert!(xi[k].abs() <= 1e-10 * inner_norm);
            Some(k)
        }
        Parity::EvenN => None,
    };

    let v_first = |k: usize| b_first * modes[k][0];
    let v_last = |k: usize| b_last * modes[k][n - 3];

    let mut omega = 0.0;
    let mut xi_min = f64::INFINITY;
    for k in 0..xi.len() {
        if Some(k) == zero_index {
            continue;
        }
        omega += v_first(k) * v_last(k) / (xi[k] * xi[k]);
        xi_min = xi_min.min(xi[k].abs());
    }
    omega *= -2.0;

    let (nu, zero_mode_couplings) = match zero_index {
        Some(k) => {
            let (v1, vn) = (v_first(k), v_last(k));
            (2f64.sqrt() * v1.abs(), Some([v1, vn]))
        }
        None => (0.0, None),
    };

    let predicted_tau = match parity {
        Parity::OddN => PI / nu,
        Parity::EvenN => PI / omega.abs(),
    };

    let mut warnings = Vec::new();
    if nu >= VALIDITY_RATIO * xi_min {
        warnings.push(format!(
            "nu = {nu} is not small compared with xi_min = {xi_min}; perturbation theory unreliable"
        ));
    }
    if omega.abs() >= VALIDITY_RATIO * xi_min {
        warnings.push(format!(
            "omega = {omega} is not small compared with xi_min = {xi_min}; perturbation theory unreliable"
        ));
    }

    let exact_splitting = central_splitting(c.a(), b)?;
    let mut halved = b.to_vec();
    halved[0] /= 2.0;
    halved[n - 2] /= 2.0;
    let halved_splitting = central_splitting(c.a(), &halved)?;
    let exact_tau = PI / exact_splitting;
    let check = SplittingCheck {
        exact_splitting,
        exact_tau,
        tau_discrepancy: (predicted_tau - exact_tau).abs() / exact_tau,
        splitting_exponent: (exact_splitting / halved_splitting).log2(),
    };
    if check.tau_discrepancy > 0.05 {
        warnings.push(format!(
            "predicted transfer time {predicted_tau} differs from exact {exact_tau} by {:.1}%",
            100.0 * check.tau_discrepancy
        ));
    }

    Ok(EffectiveModel {
        nu,
        omega,
        detunings: [0.0, 0.0],
        parity,
        predicted_tau,
        xi_min,
        zero_mode_couplings,
        check,
        warnings,
    })
}
