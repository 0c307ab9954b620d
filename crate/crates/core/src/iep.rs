//! Inverse eigenvalue problem for persymmetric Jacobi matrices.
//!
//! Given distinct eigenvalues λ_k, the characteristic polynomials
//! `p_j(x) = det(x − H_j)` of the leading principal submatrices are
//! orthogonal under the discrete scalar product
//!
//! ```text
//! <f, g> = Σ_k w_k f(λ_k) g(λ_k),    w_k = |Π_{p≠k} (λ_k − λ_p)|⁻¹
//! ```
//!
//! and obey `p_j = (x − a_j) p_{j−1} − b_{j−1}² p_{j−2}`. Hence
//! `a_j = <x p_{j−1}, p_{j−1}> / <p_{j−1}, p_{j−1}>` and
//! `b_j = ‖p_j‖ / ‖p_{j−1}‖`. For a persymmetric matrix only the first half
//! of the coefficients is needed; the rest follow by reflection.
//!
//! The spectrum is mapped onto [−1, 1] before the recursion and the
//! coefficients are mapped back afterwards.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::eigen::tridiagonal_eigenvalues;
use crate::error::{Error, Result};
use crate::spectrum::Spectrum;

/// Diagonal fields `a` (N entries) and nearest-neighbour couplings `b`
/// (N−1 entries, all positive): the single-excitation Hamiltonian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CouplingsRepr")]
pub struct ChainCouplings {
    a: Vec<f64>,
    b: Vec<f64>,
    #[serde(skip)]
    persymmetric: bool,
}

#[derive(Deserialize)]
struct CouplingsRepr {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl TryFrom<CouplingsRepr> for ChainCouplings {
    type Error = Error;

    fn try_from(repr: CouplingsRepr) -> Result<Self> {
        ChainCouplings::new(repr.a, repr.b)
    }
}

impl ChainCouplings {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() < 2 {
            return Err(Error::InvalidCouplings(format!(
                "chain needs at least 2 sites, got {}",
                a.len()
            )));
        }
        if b.len() + 1 != a.len() {
            return Err(Error::InvalidCouplings(format!(
                "expected {} couplings for {} sites, got {}",
                a.len() - 1,
                a.len(),
                b.len()
            )));
        }
        if let Some(j) = a.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidCouplings(format!(
                "field a[{j}] is not finite"
            )));
        }
        if let Some(j) = b.iter().position(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::InvalidCouplings(format!(
                "coupling b[{j}] = {} must be positive and finite",
                b[j]
            )));
        }
        let n = a.len();
        let persymmetric =
            (0..n).all(|j| a[j] == a[n - 1 - j]) && (0..n - 1).all(|j| b[j] == b[n - 2 - j]);
        Ok(ChainCouplings { a, b, persymmetric })
    }

    /// Uniform chain: zero fields, every coupling equal to `coupling`.
    pub fn uniform(n: usize, coupling: f64) -> Result<Self> {
        Self::new(vec![0.0; n], vec![coupling; n.saturating_sub(1)])
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// Number of sites.
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// Exact mirror symmetry about the antidiagonal. Perturbed chains
    /// generally lose it.
    pub fn is_persymmetric(&self) -> bool {
        self.persymmetric
    }

    pub fn max_coupling(&self) -> f64 {
        self.b.iter().copied().fold(0.0, f64::max)
    }

    /// CSV with columns `index,a,b`; `b` is empty on the last site.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        #[derive(Serialize)]
        struct Row {
            index: usize,
            a: f64,
            b: Option<f64>,
        }
        let mut w = csv::Writer::from_writer(out);
        for (j, &a) in self.a.iter().enumerate() {
            w.serialize(Row {
                index: j + 1,
                a,
                b: self.b.get(j).copied(),
            })?;
        }
        w.flush().map_err(|e| Error::Export(e.to_string()))?;
        Ok(())
    }
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
    }
    sum + comp
}

/// Affine map of the spectrum onto [−1, 1]: `x = (λ − midpoint) / scale`.
fn rescale(values: &[f64]) -> (Vec<f64>, f64, f64) {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let midpoint = (hi + lo) / 2.0;
    let shifted: Vec<f64> = values.iter().map(|v| v - midpoint).collect();
    let scale = shifted.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scaled = shifted.iter().map(|v| v / scale).collect();
    (scaled, midpoint, scale)
}

/// Orthogonality weights `w_k = |Π_{p≠k}(x_k − x_p)|⁻¹` of the spectrum
/// rescaled onto [−1, 1].
pub fn compute_weights(s: &Spectrum) -> Result<Vec<f64>> {
    let (x, _, _) = rescale(s.values());
    let n = x.len();
    (0..n)
        .map(|k| {
            let prod: f64 = (0..n).filter(|&p| p != k).map(|p| x[k] - x[p]).product();
            let w = 1.0 / prod.abs();
            if w.is_finite() && w > 0.0 {
                Ok(w)
            } else {
                Err(Error::SolverOverflow {
                    index: k,
                    detail: format!("weight w_{k} is {w}; chain too long for this spectrum"),
                })
            }
        })
        .collect()
}

/// Weights divided by their maximum, evaluated in log space.
///
/// Every quantity derived from the weights is a ratio of scalar products,
/// so the common factor drops out while the range problem disappears.
pub(crate) fn normalized_weights(values: &[f64]) -> Result<Vec<f64>> {
    let n = values.len();
    let logs: Vec<f64> = (0..n)
        .map(|k| {
            -compensated_sum(
                (0..n)
                    .filter(|&p| p != k)
                    .map(|p| (values[k] - values[p]).abs().ln()),
            )
        })
        .collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    logs.iter()
        .enumerate()
        .map(|(k, l)| {
            let w = (l - top).exp();
            if w.is_finite() && w > 0.0 {
                Ok(w)
            } else {
                Err(Error::SolverOverflow {
                    index: k,
                    detail: format!("relative weight w_{k} underflows (log ratio {})", l - top),
                })
            }
        })
        .collect()
}

/// State of the three-term recursion, holding polynomial values for two
/// consecutive degrees only.
#[derive(Debug, Clone)]
pub struct SolverWorkspace {
    /// Rescaled eigenvalues in [−1, 1].
    pub nodes: Vec<f64>,
    /// Relative weights (largest equals 1).
    pub weights: Vec<f64>,
    /// `p_{j−1}(x_k)`
    pub poly_prev: Vec<f64>,
    /// `p_j(x_k)`
    pub poly_curr: Vec<f64>,
    pub scale: f64,
    pub midpoint: f64,
}

impl SolverWorkspace {
    pub fn new(s: &Spectrum) -> Result<Self> {
        let (nodes, midpoint, scale) = rescale(s.values());
        let weights = normalized_weights(&nodes)?;
        let n = nodes.len();
        Ok(SolverWorkspace {
            nodes,
            weights,
            poly_prev: vec![0.0; n],
            poly_curr: vec![1.0; n],
            scale,
            midpoint,
        })
    }

    fn inner(&self, f: impl Fn(usize) -> f64) -> f64 {
        compensated_sum((0..self.nodes.len()).map(|k| self.weights[k] * f(k)))
    }

    /// One recursion step: returns `(a_j, b_j²)` in rescaled units and
    /// advances the buffers from `p_{j−1}` to `p_j`.
    fn step(&mut self, j: usize, prev_b2: f64) -> Result<(f64, f64)> {
        let norm_prev = self.inner(|k| self.poly_curr[k] * self.poly_curr[k]);
        if !(norm_prev.is_finite() && norm_prev > 0.0) {
            return Err(Error::SolverOverflow {
                index: j,
                detail: format!("norm of p_{} is {norm_prev}", j - 1),
            });
        }
        let a = self.inner(|k| self.nodes[k] * self.poly_curr[k] * self.poly_curr[k]) / norm_prev;
        for k in 0..self.nodes.len() {
            self.poly_prev[k] =
                (self.nodes[k] - a) * self.poly_curr[k] - prev_b2 * self.poly_prev[k];
        }
        std::mem::swap(&mut self.poly_prev, &mut self.poly_curr);
        let b2 = self.inner(|k| self.poly_curr[k] * self.poly_curr[k]) / norm_prev;
        if !(b2.is_finite() && b2 > 0.0) {
            return Err(Error::SolverOverflow {
                index: j,
                detail: format!("b_{j}^2 evaluated to {b2}"),
            });
        }
        // The monic norms decay geometrically with the degree. Rescaling both
        // buffers by the same power of two is exact and leaves the recursion
        // coefficients unchanged.
        let norm_curr = b2 * norm_prev;
        let k = -(norm_curr.log2() / 2.0).round() as i32;
        if k != 0 {
            let factor = 2f64.powi(k);
            for p in self.poly_prev.iter_mut().chain(self.poly_curr.iter_mut()) {
                *p *= factor;
            }
        }
        Ok((a, b2))
    }
}

/// Persymmetric chain whose single-excitation spectrum is `s`.
pub fn solve(s: &Spectrum) -> Result<ChainCouplings> {
    let n = s.len();
    let half = n.div_ceil(2);
    let mut ws = SolverWorkspace::new(s)?;

    let mut a = Vec::with_capacity(half);
    let mut b2 = Vec::with_capacity(half);
    let mut prev_b2 = 0.0;
    for j in 1..=half {
        let (aj, bj2) = ws.step(j, prev_b2)?;
        a.push(aj);
        b2.push(bj2);
        prev_b2 = bj2;
    }

    let a: Vec<f64> = a.iter().map(|x| ws.scale * x + ws.midpoint).collect();
    let b: Vec<f64> = b2.iter().map(|x| ws.scale * x.sqrt()).collect();

    let (full_a, full_b) = if n % 2 == 1 {
        // a = [a(1:M-1), fliplr(a)],  b = [b(1:M-1), fliplr(b(1:M-1))]
        let mut fa = a[..half - 1].to_vec();
        fa.extend(a.iter().rev());
        let mut fb = b[..half - 1].to_vec();
        fb.extend(b[..half - 1].iter().rev());
        (fa, fb)
    } else {
        // a = [a(1:M), fliplr(a(1:M))],  b = [b(1:M-1), fliplr(b)]
        let mut fa = a.clone();
        fa.extend(a.iter().rev());
        let mut fb = b[..half - 1].to_vec();
        fb.extend(b.iter().rev());
        (fa, fb)
    };
    ChainCouplings::new(full_a, full_b)
}

/// Eigenvalues of the chain Hamiltonian, as a custom spectrum.
pub fn forward_eigenvalues(c: &ChainCouplings) -> Result<Spectrum> {
    Spectrum::new(tridiagonal_eigenvalues(c.a(), c.b())?)
}
