//! Beta-distribution fits to overlap samples.

use serde::{Deserialize, Serialize};
use statrs::function::beta::ln_beta;
use statrs::function::gamma::digamma;

use crate::error::{Error, Result};

pub const MIN_FIT_SAMPLES: usize = 10;
/// Samples are clamped into `[ε, 1 − ε]` before taking logarithms.
pub const CLAMP_EPSILON: f64 = 1e-9;
pub const MAX_NEWTON_ITERATIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    Mle,
    Moments,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaFit {
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
    pub sigma2: f64,
    pub method: FitMethod,
}

impl BetaFit {
    pub fn from_shape(alpha: f64, beta: f64, method: FitMethod) -> Self {
        let s = alpha + beta;
        BetaFit {
            alpha,
            beta,
            mu: alpha / s,
            sigma2: alpha * beta / (s * s * (s + 1.0)),
            method,
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) {
            return 0.0;
        }
        ((self.alpha - 1.0) * x.ln() + (self.beta - 1.0) * (1.0 - x).ln()
            - ln_beta(self.alpha, self.beta))
        .exp()
    }
}

/// Trigamma function ψ'(x) for x > 0: upward recurrence to x ≥ 10, then the
/// asymptotic series.
pub fn trigamma(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 10.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // 1/x + 1/(2x²) + Σ B_2k / x^(2k+1)
    let tail = inv2
        * (1.0 / 6.0
            + inv2
                * (-1.0 / 30.0 + inv2 * (1.0 / 42.0 + inv2 * (-1.0 / 30.0 + inv2 * (5.0 / 66.0)))));
    acc + inv + 0.5 * inv2 + inv * tail
}

struct Sufficient {
    mean_ln_x: f64,
    mean_ln_1mx: f64,
}

impl Sufficient {
    fn log_likelihood(&self, a: f64, b: f64) -> f64 {
        (a - 1.0) * self.mean_ln_x + (b - 1.0) * self.mean_ln_1mx - ln_beta(a, b)
    }
}

/// Maximum-likelihood fit by damped Newton iteration from the moment
/// estimate; falls back to the moment estimate if Newton does not converge.
pub fn fit_beta(samples: &[f64]) -> Result<BetaFit> {
    let n = samples.len();
    if n < MIN_FIT_SAMPLES {
        return Err(Error::Fit(format!(
            "need at least {MIN_FIT_SAMPLES} samples, got {n}"
        )));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::Fit("samples must be finite".into()));
    }
    let xs: Vec<f64> = samples
        .iter()
        .map(|x| x.clamp(CLAMP_EPSILON, 1.0 - CLAMP_EPSILON))
        .collect();
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        return Err(Error::Fit("sample variance is zero".into()));
    }
    let nf = n as f64;
    let mean = xs.iter().sum::<f64>() / nf;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    if !(var > 0.0) {
        return Err(Error::Fit("sample variance is zero".into()));
    }
    let stats = Sufficient {
        mean_ln_x: xs.iter().map(|x| x.ln()).sum::<f64>() / nf,
        mean_ln_1mx: xs.iter().map(|x| (1.0 - x).ln()).sum::<f64>() / nf,
    };

    let common = mean * (1.0 - mean) / var - 1.0;
    let moments = (common > 0.0).then_some((mean * common, (1.0 - mean) * common));
    let (mut a, mut b) = moments.unwrap_or((mean, 1.0 - mean));

    for _ in 0..MAX_NEWTON_ITERATIONS {
        let ds = digamma(a + b);
        let ts = trigamma(a + b);
        let ga = stats.mean_ln_x - digamma(a) + ds;
        let gb = stats.mean_ln_1mx - digamma(b) + ds;
        let haa = ts - trigamma(a);
        let hbb = ts - trigamma(b);
        let hab = ts;
        let det = haa * hbb - hab * hab;
        if !(det.is_finite() && det != 0.0) {
            break;
        }
        let da = -(hbb * ga - hab * gb) / det;
        let db = -(haa * gb - hab * ga) / det;

        let current = stats.log_likelihood(a, b);
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let (na, nb) = (a + t * da, b + t * db);
            if na > 0.0
                && nb > 0.0
                && stats.log_likelihood(na, nb) >= current - 1e-13 * current.abs()
            {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
        let (na, nb) = (a + t * da, b + t * db);
        let rel = ((na - a) / a).abs().max(((nb - b) / b).abs());
        a = na;
        b = nb;
        if rel < 1e-12 {
            return Ok(BetaFit::from_shape(a, b, FitMethod::Mle));
        }
    }

    match moments {
        Some((a, b)) => Ok(BetaFit::from_shape(a, b, FitMethod::Moments)),
        None => Err(Error::Fit(
            "Newton iteration failed and moments do not define a beta distribution".into(),
        )),
    }
}
