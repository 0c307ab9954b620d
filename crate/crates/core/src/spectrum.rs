//! Target spectra for spin-chain design.
//!
//! A [`Spectrum`] is the ordered list of single-excitation energies the
//! engineered chain must reproduce. Three families support state transfer
//! directly or after shifting (linear, inverted quadratic) or serve as the
//! uniform-chain reference (cosine). Arbitrary spectra enter as `custom`.
//!
//! Energies are dimensionless with ħ = 1, so a spectrum of integers with
//! alternating parity transfers perfectly at τ = π.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::iep::normalized_weights;

/// Minimum adjacent gap, relative to the spectral width.
pub const DISTINCTNESS_TOLERANCE: f64 = 1e-12;

/// Absolute tolerance for the symmetry of the named families.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Default residual-phase tolerance for [`verify_pst`], in radians.
pub const PST_PHASE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Linear,
    InvertedQuadratic,
    Cosine,
    #[default]
    Custom,
}

/// Provenance of a generated spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SpectrumParams {
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<u32>,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
}

/// Strictly increasing list of distinct eigenvalues.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpectrumRepr")]
pub struct Spectrum {
    values: Vec<f64>,
    family: Family,
    #[serde(skip_serializing_if = "Option::is_none")]
    params: Option<SpectrumParams>,
}

#[derive(Deserialize)]
struct SpectrumRepr {
    values: Vec<f64>,
    #[serde(default)]
    family: Family,
    #[serde(default)]
    params: Option<SpectrumParams>,
}

impl TryFrom<SpectrumRepr> for Spectrum {
    type Error = Error;

    fn try_from(repr: SpectrumRepr) -> Result<Self> {
        Spectrum::with_family(repr.values, repr.family, repr.params)
    }
}

impl Spectrum {
    /// Custom spectrum from arbitrary values. Values are sorted before validation.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::with_family(values, Family::Custom, None)
    }

    pub fn with_family(
        mut values: Vec<f64>,
        family: Family,
        params: Option<SpectrumParams>,
    ) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidSpectrum(format!(
                "need at least 2 eigenvalues, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSpectrum(format!(
                "eigenvalue {i} is not finite"
            )));
        }
        values.sort_by(f64::total_cmp);
        let width = values[values.len() - 1] - values[0];
        let min_gap = DISTINCTNESS_TOLERANCE * width;
        for (i, pair) in values.windows(2).enumerate() {
            if pair[1] - pair[0] <= min_gap {
                return Err(Error::InvalidSpectrum(format!(
                    "eigenvalues {i} and {} are not distinct ({} vs {})",
                    i + 1,
                    pair[0],
                    pair[1]
                )));
            }
        }
        let spectrum = Spectrum {
            values,
            family,
            params,
        };
        if family != Family::Custom && !spectrum.is_symmetric() {
            return Err(Error::InvalidSpectrum(format!(
                "{family:?} spectrum must be symmetric about zero"
            )));
        }
        Ok(spectrum)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn params(&self) -> Option<&SpectrumParams> {
        self.params.as_ref()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.values.len();
        (0..n / 2 + 1)
            .all(|i| (self.values[i] + self.values[n - 1 - i]).abs() <= SYMMETRY_TOLERANCE)
    }

    /// Every eigenvalue multiplied by `factor > 0`; the result is custom.
    pub fn scaled(&self, factor: f64) -> Result<Spectrum> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "scale factor must be positive, got {factor}"
            )));
        }
        Spectrum::new(self.values.iter().map(|v| v * factor).collect())
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Index offsets `j - (n-1)/2`, half-integers for even `n`.
fn centered_indices(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |j| (2.0 * j as f64 - (n as f64 - 1.0)) / 2.0)
}

/// Equally spaced spectrum `A·k`, symmetric about zero.
pub fn generate_linear(n: usize, a: u32) -> Result<Spectrum> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "N must be at least 2, got {n}"
        )));
    }
    if a == 0 || a.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "A must be an odd positive integer, got {a}"
        )));
    }
    let values = centered_indices(n).map(|k| a as f64 * k).collect();
    Spectrum::with_family(
        values,
        Family::Linear,
        Some(SpectrumParams {
            a: Some(a),
            c: None,
            n: Some(n),
        }),
    )
}

/// `λ_k = k(N−1−|k|)` for `k = −(N−1)/2 … (N−1)/2`; odd `N` only.
pub fn generate_inverted_quadratic(n: usize) -> Result<Spectrum> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "inverted quadratic spectrum needs odd N >= 3, got {n}"
        )));
    }
    let half = (n as i64 - 1) / 2;
    let values = (-half..=half)
        .map(|k| (k * (n as i64 - 1 - k.abs())) as f64)
        .collect();
    Spectrum::with_family(
        values,
        Family::InvertedQuadratic,
        Some(SpectrumParams {
            a: None,
            c: None,
            n: Some(n),
        }),
    )
}

/// Spectrum of the uniform chain with unit couplings: `2cos(πk/(N+1))`.
pub fn generate_cosine(n: usize) -> Result<Spectrum> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "N must be at least 2, got {n}"
        )));
    }
    // Mirror the upper half so the set is exactly symmetric.
    let upper: Vec<f64> = (1..=n / 2)
        .map(|k| 2.0 * (PI * k as f64 / (n as f64 + 1.0)).cos())
        .collect();
    let mut values: Vec<f64> = upper.iter().map(|v| -v).collect();
    if n % 2 == 1 {
        values.push(0.0);
    }
    values.extend(upper.iter().copied());
    Spectrum::with_family(
        values,
        Family::Cosine,
        Some(SpectrumParams {
            a: None,
            c: None,
            n: Some(n),
        }),
    )
}

/// Named family by tag; `a` is required for the linear family only.
pub fn generate(family: Family, n: usize, a: Option<u32>) -> Result<Spectrum> {
    match family {
        Family::Linear => {
            let a = a.ok_or_else(|| {
                Error::InvalidArgument("linear family needs the spacing A".into())
            })?;
            generate_linear(n, a)
        }
        Family::InvertedQuadratic => generate_inverted_quadratic(n),
        Family::Cosine => generate_cosine(n),
        Family::Custom => Err(Error::InvalidArgument(
            "custom spectra are given by their values".into(),
        )),
    }
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Moves every nonzero eigenvalue towards zero by `c`: `λ − sgn(λ)·c`.
pub fn shift_spectrum(s: &Spectrum, c: f64) -> Result<Spectrum> {
    if !(c.is_finite() && c >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "shift must be a nonnegative real, got {c}"
        )));
    }
    if c == 0.0 {
        return Ok(s.clone());
    }
    let min_nonzero = s
        .values
        .iter()
        .filter(|v| **v != 0.0)
        .map(|v| v.abs())
        .fold(f64::INFINITY, f64::min);
    if c >= min_nonzero {
        return Err(Error::InvalidSpectrum(format!(
            "shift {c} must be smaller than the smallest nonzero |eigenvalue| {min_nonzero}"
        )));
    }
    let values = s.values.iter().map(|&v| v - sgn(v) * c).collect();
    let mut params = s.params.unwrap_or_default();
    params.c = Some(params.c.unwrap_or(0.0) + c);
    params.n = Some(s.len());
    Spectrum::with_family(values, Family::Custom, Some(params))
}

/// Result of checking the perfect-transfer phase condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PstReport {
    pub is_pst: bool,
    pub tau: f64,
    /// Best global phase, in (−π, π].
    pub phi: f64,
    pub max_phase_error: f64,
}

fn wrap_phase(x: f64) -> f64 {
    let w = (x + PI).rem_euclid(2.0 * PI) - PI;
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}

/// Checks `exp(−iλ_kτ) = (−1)^k exp(iΦ)` for all k with the default tolerance.
pub fn verify_pst(s: &Spectrum, tau: f64) -> Result<PstReport> {
    verify_pst_with_tolerance(s, tau, PST_PHASE_TOLERANCE)
}

/// Φ is chosen to minimise the largest residual phase; this is the centre of
/// the shortest arc covering all residual phases on the circle.
pub fn verify_pst_with_tolerance(s: &Spectrum, tau: f64, tolerance: f64) -> Result<PstReport> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "transfer time must be positive, got {tau}"
        )));
    }
    let two_pi = 2.0 * PI;
    let mut angles: Vec<f64> = s
        .values
        .iter()
        .enumerate()
        .map(|(k, &lambda)| {
            let parity = if k % 2 == 0 { 0.0 } else { PI };
            (-lambda * tau - parity).rem_euclid(two_pi)
        })
        .collect();
    angles.sort_by(f64::total_cmp);

    let n = angles.len();
    // gap after index i runs from angles[i] to angles[i+1] (cyclically)
    let (mut best_gap, mut best_i) = (angles[0] + two_pi - angles[n - 1], n - 1);
    for i in 0..n - 1 {
        let gap = angles[i + 1] - angles[i];
        if gap > best_gap {
            best_gap = gap;
            best_i = i;
        }
    }
    let arc = two_pi - best_gap;
    let start = angles[(best_i + 1) % n];
    let phi = wrap_phase(start + arc / 2.0);
    let max_phase_error = arc / 2.0;
    Ok(PstReport {
        is_pst: max_phase_error < tolerance,
        tau,
        phi,
        max_phase_error,
    })
}

/// `Σ w_k λ_k² / Σ w_k` with the orthogonality weights of the spectrum.
pub fn weighted_variance(s: &Spectrum) -> Result<f64> {
    let w = normalized_weights(s.values())?;
    let mut num = 0.0;
    let mut den = 0.0;
    for (wk, lk) in w.iter().zip(s.values()) {
        num += wk * lk * lk;
        den += wk;
    }
    Ok(num / den)
}

/// Ratio of the weighted variance to `λ_min²`; values far below one signal
/// boundary states.
///
/// Exact zeros never count towards `λ_min`. Of the remaining eigenvalues the
/// `central_count` smallest in magnitude are treated as "nearly zero" and
/// excluded as well.
pub fn boundary_metric(s: &Spectrum, central_count: usize) -> Result<f64> {
    let n = s.len();
    if central_count >= n {
        return Err(Error::InvalidArgument(format!(
            "central_count {central_count} must be below N = {n}"
        )));
    }
    let zero_cut = SYMMETRY_TOLERANCE * s.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut magnitudes: Vec<f64> = s
        .values
        .iter()
        .map(|v| v.abs())
        .filter(|m| *m > zero_cut)
        .collect();
    magnitudes.sort_by(f64::total_cmp);
    let lambda_min = *magnitudes.get(central_count).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "all eigenvalues are zero or designated central (central_count = {central_count})"
        ))
    })?;
    Ok(weighted_variance(s)? / (lambda_min * lambda_min))
}

/// Stepwise three-band spectrum: central band of `m` levels with spacing
/// `delta`, gap `gamma`, and two peripheral bands of `big_m` levels with spacing
/// `big_delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandModel {
    pub delta: f64,
    pub gamma: f64,
    #[serde(rename = "Delta")]
    pub big_delta: f64,
    pub m: u32,
    #[serde(rename = "M")]
    pub big_m: u32,
}

impl BandModel {
    pub fn new(delta: f64, gamma: f64, big_delta: f64, m: u32, big_m: u32) -> Result<Self> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !(positive(delta) && positive(gamma) && positive(big_delta)) {
            return Err(Error::InvalidArgument(
                "band spacings and gap must be positive".into(),
            ));
        }
        if m == 0 || big_m == 0 {
            return Err(Error::InvalidArgument(
                "band level counts must be at least 1".into(),
            ));
        }
        Ok(BandModel {
            delta,
            gamma,
            big_delta,
            m,
            big_m,
        })
    }
}

/// `(δ/Γ)^m · (Γ/Δ)^M`; small values mean the central band yields boundary states.
pub fn band_condition(b: &BandModel) -> f64 {
    (b.delta / b.gamma).powi(b.m as i32) * (b.gamma / b.big_delta).powi(b.big_m as i32)
}
