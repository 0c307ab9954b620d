//! Exact single-excitation dynamics.
//!
//! Time evolution goes through the spectral decomposition of the chain
//! Hamiltonian, `ψ(t) = Σ_k e^{−iλ_k t} |λ_k⟩⟨λ_k|ψ(0)⟩`, which is unitary to
//! machine precision for any `t`.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::eigen::{ql_implicit, tridiagonal_eigen};
use crate::error::{Error, Result};
use crate::iep::ChainCouplings;

/// Components below this magnitude are skipped when fixing eigenvector signs.
const SIGN_THRESHOLD: f64 = 1e-12;

/// Eigenvalues in increasing order with orthonormal real eigenvectors.
///
/// Each eigenvector is normalised so that its first component above
/// `1e-12` in magnitude is positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[k][j]` is the amplitude of eigenstate `k` on site `j`.
    pub eigenvectors: Vec<Vec<f64>>,
}

impl EigenSystem {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Parity of each eigenvector under site reversal: `+1` symmetric,
    /// `−1` antisymmetric, `0` if the vector has no definite parity.
    pub fn parities(&self, tol: f64) -> Vec<i8> {
        self.eigenvectors
            .iter()
            .map(|v| {
                let n = v.len();
                if (0..n).all(|j| (v[j] - v[n - 1 - j]).abs() <= tol) {
                    1
                } else if (0..n).all(|j| (v[j] + v[n - 1 - j]).abs() <= tol) {
                    -1
                } else {
                    0
                }
            })
            .collect()
    }
}

/// Full spectral decomposition of the chain Hamiltonian.
pub fn eigendecompose(c: &ChainCouplings) -> Result<EigenSystem> {
    let (eigenvalues, mut eigenvectors) = tridiagonal_eigen(c.a(), c.b())?;
    for v in eigenvectors.iter_mut() {
        if let Some(first) = v.iter().find(|x| x.abs() > SIGN_THRESHOLD) {
            if *first < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
        }
    }
    Ok(EigenSystem {
        eigenvalues,
        eigenvectors,
    })
}

/// Single-excitation state in the site basis. Serialises as `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Rejects vectors whose squared norm differs from one by more than 1e-10.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidArgument("state vector is empty".into()));
        }
        let norm2: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum();
        if !((norm2 - 1.0).abs() <= 1e-10) {
            return Err(Error::InvalidArgument(format!(
                "state vector norm² is {norm2}, expected 1"
            )));
        }
        Ok(StateVector { amplitudes })
    }

    /// Excitation localised on `site` (0-based).
    pub fn site(n: usize, site: usize) -> Result<Self> {
        if site >= n {
            return Err(Error::InvalidArgument(format!(
                "site {site} outside chain of length {n}"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); n];
        amplitudes[site] = Complex64::new(1.0, 0.0);
        Ok(StateVector { amplitudes })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

impl Serialize for StateVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.amplitudes.iter().map(|c| [c.re, c.im]).collect();
        pairs.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for StateVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(deserializer)?;
        StateVector::new(
            pairs
                .into_iter()
                .map(|[re, im]| Complex64::new(re, im))
                .collect(),
        )
        .map_err(serde::de::Error::custom)
    }
}

/// `e^{−iHt} ψ0`.
pub fn evolve(es: &EigenSystem, psi0: &StateVector, t: f64) -> Result<StateVector> {
    if !t.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "time must be finite, got {t}"
        )));
    }
    let n = es.len();
    if psi0.len() != n {
        return Err(Error::InvalidArgument(format!(
            "state has {} sites, chain has {n}",
            psi0.len()
        )));
    }
    if t == 0.0 {
        return Ok(psi0.clone());
    }
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (lambda, v) in es.eigenvalues.iter().zip(&es.eigenvectors) {
        let overlap: Complex64 = v.iter().zip(psi0.amplitudes()).map(|(x, c)| c * x).sum();
        let coeff = overlap * Complex64::from_polar(1.0, -lambda * t);
        for (o, x) in out.iter_mut().zip(v) {
            *o += coeff * x;
        }
    }
    Ok(StateVector { amplitudes: out })
}

/// `⟨to| e^{−iHt} |from⟩`.
pub fn propagator_element(es: &EigenSystem, from: usize, to: usize, t: f64) -> Complex64 {
    if t == 0.0 {
        let delta = if from == to { 1.0 } else { 0.0 };
        return Complex64::new(delta, 0.0);
    }
    es.eigenvalues
        .iter()
        .zip(&es.eigenvectors)
        .map(|(lambda, v)| Complex64::from_polar(v[to] * v[from], -lambda * t))
        .sum()
}

/// `|⟨to| e^{−iHt} |from⟩|`, clamped to [0, 1].
pub fn site_overlap(es: &EigenSystem, from: usize, to: usize, t: f64) -> f64 {
    propagator_element(es, from, to, t).norm().min(1.0)
}

/// End-to-end overlap `f_{1,N}(t) = |⟨N| e^{−iHt} |1⟩|`.
pub fn transfer_overlap(es: &EigenSystem, t: f64) -> f64 {
    site_overlap(es, 0, es.len() - 1, t)
}

/// [`transfer_overlap`] at every point of `t_grid`.
pub fn overlap_trace(es: &EigenSystem, t_grid: &[f64]) -> Result<Vec<f64>> {
    if t_grid.is_empty() {
        return Err(Error::InvalidArgument("time grid is empty".into()));
    }
    if t_grid.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::InvalidArgument("time grid must be sorted".into()));
    }
    Ok(t_grid.iter().map(|&t| transfer_overlap(es, t)).collect())
}

/// `points` equally spaced times covering `[0, t_max]`.
pub fn uniform_grid(t_max: f64, points: usize) -> Result<Vec<f64>> {
    if !(t_max.is_finite() && t_max >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "t_max must be >= 0, got {t_max}"
        )));
    }
    match points {
        0 => Err(Error::InvalidArgument(
            "need at least one time point".into(),
        )),
        1 => Ok(vec![0.0]),
        _ => Ok((0..points)
            .map(|i| t_max * i as f64 / (points - 1) as f64)
            .collect()),
    }
}

/// Overlap at `t` straight from the couplings, accumulating only the two
/// end rows of the eigenvector matrix.
pub fn end_to_end_overlap(c: &ChainCouplings, t: f64) -> Result<f64> {
    let n = c.len();
    if t == 0.0 {
        return Ok(0.0);
    }
    let eig = ql_implicit(c.a(), c.b(), &[0, n - 1])?;
    let amp: Complex64 = eig
        .values
        .iter()
        .enumerate()
        .map(|(k, lambda)| Complex64::from_polar(eig.rows[0][k] * eig.rows[1][k], -lambda * t))
        .sum();
    Ok(amp.norm().min(1.0))
}

/// Fidelity averaged over the Bloch sphere, `F = 1/2 + f/3 + f²/6`.
pub fn average_fidelity(f: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::InvalidArgument(format!(
            "overlap must lie in [0, 1], got {f}"
        )));
    }
    Ok((3.0 + 2.0 * f + f * f) / 6.0)
}

/// CSV with columns `t,f`.
pub fn write_trace_csv<W: Write>(t_grid: &[f64], overlaps: &[f64], out: W) -> Result<()> {
    #[derive(Serialize)]
    struct Row {
        t: f64,
        f: f64,
    }
    let mut w = csv::Writer::from_writer(out);
    for (&t, &f) in t_grid.iter().zip(overlaps) {
        w.serialize(Row { t, f })?;
    }
    w.flush().map_err(|e| Error::Export(e.to_string()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iep::solve;
    use crate::spectrum::generate_linear;
    use std::f64::consts::PI;

    #[test]
    fn two_site_eigensystem_signs() {
        let es = eigendecompose(&ChainCouplings::new(vec![0.0, 0.0], vec![1.0]).unwrap()).unwrap();
        let h = 0.5f64.sqrt();
        assert!((es.eigenvalues[0] + 1.0).abs() < 1e-15);
        assert!((es.eigenvectors[0][0] - h).abs() < 1e-15);
        assert!((es.eigenvectors[0][1] + h).abs() < 1e-15);
        assert!((es.eigenvectors[1][0] - h).abs() < 1e-15);
        assert!((es.eigenvectors[1][1] - h).abs() < 1e-15);
    }

    #[test]
    fn uniform_five_chain() {
        let es = eigendecompose(&ChainCouplings::uniform(5, 1.0).unwrap()).unwrap();
        for (k, lambda) in es.eigenvalues.iter().enumerate() {
            let expected = 2.0 * (PI * (5 - k) as f64 / 6.0).cos();
            assert!((lambda - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn evolve_identity_at_zero() {
        let es =
            eigendecompose(&ChainCouplings::new(vec![0.0, 0.3, -0.2], vec![1.0, 0.5]).unwrap())
                .unwrap();
        let psi0 = StateVector::new(vec![
            Complex64::new(0.6, 0.0),
            Complex64::new(0.0, 0.8),
            Complex64::new(0.0, 0.0),
        ])
        .unwrap();
        let psi = evolve(&es, &psi0, 0.0).unwrap();
        for (a, b) in psi.amplitudes().iter().zip(psi0.amplitudes()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn two_site_rabi_flop() {
        let es = eigendecompose(&ChainCouplings::new(vec![0.0, 0.0], vec![1.0]).unwrap()).unwrap();
        let psi = evolve(&es, &StateVector::site(2, 0).unwrap(), PI / 2.0).unwrap();
        assert!(psi.amplitudes()[0].norm() < 1e-15);
        assert!((psi.amplitudes()[1] - Complex64::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn linear_chain_transfers_perfectly() {
        let es = eigendecompose(&solve(&generate_linear(5, 1).unwrap()).unwrap()).unwrap();
        let psi = evolve(&es, &StateVector::site(5, 0).unwrap(), PI).unwrap();
        assert!((psi.amplitudes()[4].norm() - 1.0).abs() < 1e-10);
        assert!((transfer_overlap(&es, PI) - 1.0).abs() < 1e-10);
        assert_eq!(transfer_overlap(&es, 0.0), 0.0);
    }

    #[test]
    fn trace_examples() {
        let es = eigendecompose(&solve(&generate_linear(5, 1).unwrap()).unwrap()).unwrap();
        assert_eq!(overlap_trace(&es, &[0.0]).unwrap(), vec![0.0]);
        let tr = overlap_trace(&es, &[0.0, PI]).unwrap();
        assert!(tr[0] == 0.0 && (tr[1] - 1.0).abs() < 1e-10);
        assert!(overlap_trace(&es, &[]).is_err());
        assert!(overlap_trace(&es, &[1.0, 0.0]).is_err());
    }

    #[test]
    fn fast_overlap_matches_full() {
        let c = ChainCouplings::new(vec![0.1, 0.0, -0.3, 0.2], vec![1.0, 1.7, 0.4]).unwrap();
        let es = eigendecompose(&c).unwrap();
        for t in [0.0, 0.7, 3.1, 12.0] {
            assert!((end_to_end_overlap(&c, t).unwrap() - transfer_overlap(&es, t)).abs() < 1e-13);
        }
    }

    #[test]
    fn fidelity_examples() {
        assert_eq!(average_fidelity(1.0).unwrap(), 1.0);
        assert_eq!(average_fidelity(0.0).unwrap(), 0.5);
        assert!((average_fidelity(0.5).unwrap() - (0.5 + 1.0 / 6.0 + 1.0 / 24.0)).abs() < 1e-15);
        assert!(average_fidelity(1.5).is_err());
        assert!(average_fidelity(-0.1).is_err());
    }

    #[test]
    fn state_vector_json() {
        let psi =
            StateVector::new(vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, -0.8)]).unwrap();
        let json = serde_json::to_string(&psi).unwrap();
        assert_eq!(json, "[[0.6,0.0],[0.0,-0.8]]");
        let back: StateVector = serde_json::from_str(&json).unwrap();
        assert_eq!(back, psi);
        assert!(serde_json::from_str::<StateVector>("[[1.0,1.0]]").is_err());
    }

    #[test]
    fn grid_and_csv() {
        assert_eq!(uniform_grid(2.0, 3).unwrap(), vec![0.0, 1.0, 2.0]);
        assert_eq!(uniform_grid(2.0, 1).unwrap(), vec![0.0]);
        assert!(uniform_grid(2.0, 0).is_err());
        let mut buf = Vec::new();
        write_trace_csv(&[0.0, 0.5], &[0.0, 0.25], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,f\n0.0,0.0\n0.5,0.25\n");
    }
}
