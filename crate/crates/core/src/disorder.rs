//! Monte Carlo transfer statistics under static coupling disorder.
//!
//! Each sample multiplies every coupling by an independent factor `1 + R_j`
//! with `R_j` uniform on `[−r, r]`, rediagonalises the chain, and records
//! `f_{1,N}(τ)` at the transfer time of the unperturbed chain.
//!
//! Random streams: sample `i` draws from ChaCha8 seeded with
//! `seed_from_u64(seed)` and switched to stream `i`. Results therefore do not
//! depend on how samples are scheduled across threads.

use std::io::Write;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};

use rand::distr::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beta::{fit_beta, BetaFit};
use crate::dynamics::end_to_end_overlap;
use crate::error::{Error, Result};
use crate::iep::ChainCouplings;

pub const DEFAULT_BINS: usize = 50;

fn default_bins() -> usize {
    DEFAULT_BINS
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisorderConfig {
    /// Relative disorder level, `0 <= r < 1`.
    pub r: f64,
    pub samples: usize,
    pub seed: u64,
    /// Transfer time of the unperturbed chain.
    pub tau: f64,
    #[serde(default = "default_bins")]
    pub bins: usize,
}

impl DisorderConfig {
    pub fn new(r: f64, samples: usize, seed: u64, tau: f64) -> Self {
        DisorderConfig {
            r,
            samples,
            seed,
            tau,
            bins: DEFAULT_BINS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r.is_finite() && (0.0..1.0).contains(&self.r)) {
            return Err(Error::InvalidArgument(format!(
                "disorder level r must lie in [0, 1), got {}",
                self.r
            )));
        }
        if self.samples == 0 {
            return Err(Error::InvalidArgument("samples must be at least 1".into()));
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tau must be positive, got {}",
                self.tau
            )));
        }
        if self.bins == 0 {
            return Err(Error::InvalidArgument("bins must be at least 1".into()));
        }
        Ok(())
    }
}

/// Equal-width bins over [0, 1]; bins are left-closed, the last one also
/// right-closed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// CSV with columns `lower,upper,count`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        #[derive(Serialize)]
        struct Row {
            lower: f64,
            upper: f64,
            count: u64,
        }
        let mut w = csv::Writer::from_writer(out);
        for (i, &count) in self.counts.iter().enumerate() {
            w.serialize(Row {
                lower: self.edges[i],
                upper: self.edges[i + 1],
                count,
            })?;
        }
        w.flush().map_err(|e| Error::Export(e.to_string()))?;
        Ok(())
    }
}

pub fn histogram(samples: &[f64], bins: usize) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::InvalidArgument("bins must be at least 1".into()));
    }
    let edges: Vec<f64> = (0..=bins).map(|i| i as f64 / bins as f64).collect();
    let mut counts = vec![0u64; bins];
    for &x in samples {
        let x = x.clamp(0.0, 1.0);
        let mut i = ((x * bins as f64).floor() as usize).min(bins - 1);
        // keep the index consistent with the stored edges
        if i > 0 && x < edges[i] {
            i -= 1;
        } else if i + 1 < bins && x >= edges[i + 1] {
            i += 1;
        }
        counts[i] += 1;
    }
    Ok(Histogram { edges, counts })
}

/// `b_j → b_j (1 + R_j)`, `R_j ~ U[−r, r]` independently; fields untouched.
pub fn perturb_couplings<R: Rng + ?Sized>(
    c: &ChainCouplings,
    r: f64,
    rng: &mut R,
) -> Result<ChainCouplings> {
    if !(r.is_finite() && (0.0..1.0).contains(&r)) {
        return Err(Error::InvalidArgument(format!(
            "disorder level r must lie in [0, 1), got {r}"
        )));
    }
    if r == 0.0 {
        return Ok(c.clone());
    }
    let dist = Uniform::new_inclusive(-r, r).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let b = c.b().iter().map(|b| b * (1.0 + dist.sample(rng))).collect();
    ChainCouplings::new(c.a().to_vec(), b)
}

/// Random stream of sample `index`.
pub fn sample_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderReport {
    pub config: DisorderConfig,
    pub overlaps: Vec<f64>,
    pub mean: f64,
    /// Fraction of samples with `f >= 0.98`.
    pub high_fidelity_fraction: f64,
    pub histogram: Histogram,
    /// Absent when the samples cannot be fitted (too few, or no spread).
    pub fit: Option<BetaFit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_error: Option<String>,
}

impl DisorderReport {
    pub fn fraction_at_least(&self, threshold: f64) -> f64 {
        self.overlaps.iter().filter(|f| **f >= threshold).count() as f64
            / self.overlaps.len() as f64
    }

    /// CSV with columns `sample,f`.
    pub fn write_overlaps_csv<W: Write>(&self, out: W) -> Result<()> {
        #[derive(Serialize)]
        struct Row {
            sample: usize,
            f: f64,
        }
        let mut w = csv::Writer::from_writer(out);
        for (sample, &f) in self.overlaps.iter().enumerate() {
            w.serialize(Row { sample, f })?;
        }
        w.flush().map_err(|e| Error::Export(e.to_string()))?;
        Ok(())
    }

    /// One-line summary for scripting.
    pub fn summary(&self) -> FitSummary {
        FitSummary {
            samples: self.overlaps.len(),
            r: self.config.r,
            tau: self.config.tau,
            mean: self.mean,
            high_fidelity_fraction: self.high_fidelity_fraction,
            alpha: self.fit.map(|f| f.alpha),
            beta: self.fit.map(|f| f.beta),
            mu: self.fit.map(|f| f.mu),
            sigma2: self.fit.map(|f| f.sigma2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub samples: usize,
    pub r: f64,
    pub tau: f64,
    pub mean: f64,
    pub high_fidelity_fraction: f64,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub mu: Option<f64>,
    pub sigma2: Option<f64>,
}

/// Execution knobs that do not affect results.
#[derive(Debug, Default, Clone, Copy)]
pub struct RunOptions<'a> {
    /// Worker cap; `None` uses the global rayon pool.
    pub threads: Option<usize>,
    /// Incremented once per finished sample.
    pub progress: Option<&'a AtomicUsize>,
    /// Checked between samples; set to abort the run.
    pub cancel: Option<&'a AtomicBool>,
}

pub fn run_experiment(c: &ChainCouplings, cfg: &DisorderConfig) -> Result<DisorderReport> {
    run_experiment_with(c, cfg, RunOptions::default())
}

pub fn run_experiment_with(
    c: &ChainCouplings,
    cfg: &DisorderConfig,
    opts: RunOptions<'_>,
) -> Result<DisorderReport> {
    cfg.validate()?;
    let overlaps = match opts.threads {
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads.max(1))
                .build()
                .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
            pool.install(|| sample_overlaps(c, cfg, opts))?
        }
        None => sample_overlaps(c, cfg, opts)?,
    };
    summarize(*cfg, overlaps)
}

fn sample_overlaps(
    c: &ChainCouplings,
    cfg: &DisorderConfig,
    opts: RunOptions<'_>,
) -> Result<Vec<f64>> {
    let mut overlaps = Vec::with_capacity(cfg.samples);
    (0..cfg.samples)
        .into_par_iter()
        .map(|i| {
            if opts.cancel.is_some_and(|flag| flag.load(Ordering::Relaxed)) {
                let completed = opts.progress.map_or(0, |p| p.load(Ordering::Relaxed));
                return Err(Error::Cancelled { completed });
            }
            let mut rng = sample_rng(cfg.seed, i);
            let f = perturb_couplings(c, cfg.r, &mut rng)
                .and_then(|pc| end_to_end_overlap(&pc, cfg.tau))
                .map_err(|e| Error::Sample {
                    index: i,
                    source: Box::new(e),
                })?;
            if let Some(p) = opts.progress {
                p.fetch_add(1, Ordering::Relaxed);
            }
            Ok(f)
        })
        .collect_into_vec(&mut overlaps);
    overlaps.into_iter().collect()
}

fn summarize(config: DisorderConfig, overlaps: Vec<f64>) -> Result<DisorderReport> {
    let n = overlaps.len() as f64;
    let mean = overlaps.iter().sum::<f64>() / n;
    let histogram = histogram(&overlaps, config.bins)?;
    let high = overlaps.iter().filter(|f| **f >= 0.98).count() as f64 / n;
    let (fit, fit_error) = match fit_beta(&overlaps) {
        Ok(fit) => (Some(fit), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(DisorderReport {
        config,
        overlaps,
        mean,
        high_fidelity_fraction: high,
        histogram,
        fit,
        fit_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iep::solve;
    use crate::spectrum::generate_linear;
    use std::f64::consts::PI;

    #[test]
    fn zero_disorder_is_identity() {
        let c = ChainCouplings::new(vec![0.0, 0.1, 0.0], vec![1.0, 2.0]).unwrap();
        let mut rng = sample_rng(1, 0);
        assert_eq!(perturb_couplings(&c, 0.0, &mut rng).unwrap(), c);
    }

    #[test]
    fn perturbed_couplings_stay_in_interval() {
        let c = ChainCouplings::uniform(3, 1.0).unwrap();
        let mut rng = sample_rng(7, 0);
        for _ in 0..1000 {
            let p = perturb_couplings(&c, 0.5, &mut rng).unwrap();
            assert!(p.b().iter().all(|b| (0.5..=1.5).contains(b)));
            assert_eq!(p.a(), c.a());
        }
        assert!(perturb_couplings(&c, 1.0, &mut rng).is_err());
    }

    #[test]
    fn histogram_conventions() {
        assert_eq!(histogram(&[0.5], 2).unwrap().counts, vec![0, 1]);
        assert_eq!(histogram(&[0.0, 1.0], 2).unwrap().counts, vec![1, 1]);
        let h = histogram(&[0.1, 0.2, 0.3, 0.7, 0.9, 1.0], 10).unwrap();
        assert_eq!(h.counts, vec![0, 1, 1, 1, 0, 0, 0, 1, 0, 2]);
        assert_eq!(h.edges.len(), 11);
        assert!(histogram(&[0.5], 0).is_err());
    }

    #[test]
    fn perfect_chain_without_disorder() {
        let c = solve(&generate_linear(9, 1).unwrap()).unwrap();
        let report = run_experiment(&c, &DisorderConfig::new(0.0, 10, 5, PI)).unwrap();
        assert!(report.overlaps.iter().all(|f| (f - 1.0).abs() < 1e-8));
        assert!((report.mean - 1.0).abs() < 1e-8);
        assert_eq!(report.histogram.total(), 10);
        assert!(report.fit.is_none() && report.fit_error.is_some());
    }

    #[test]
    fn config_validation() {
        assert!(DisorderConfig::new(1.0, 10, 0, 1.0).validate().is_err());
        assert!(DisorderConfig::new(-0.1, 10, 0, 1.0).validate().is_err());
        assert!(DisorderConfig::new(0.1, 0, 0, 1.0).validate().is_err());
        assert!(DisorderConfig::new(0.1, 1, 0, 0.0).validate().is_err());
        assert!(DisorderConfig::new(0.1, 1, 0, 1.0).validate().is_ok());
    }

    #[test]
    fn cancellation_stops_the_run() {
        let c = solve(&generate_linear(9, 1).unwrap()).unwrap();
        let cancel = AtomicBool::new(true);
        let err = run_experiment_with(
            &c,
            &DisorderConfig::new(0.1, 100, 5, PI),
            RunOptions {
                cancel: Some(&cancel),
                ..Default::default()
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::Cancelled { .. }));
    }

    #[test]
    fn config_json_defaults_bins() {
        let cfg: DisorderConfig =
            serde_json::from_str(r#"{"r":0.05,"samples":100,"seed":42,"tau":3.14}"#).unwrap();
        assert_eq!(cfg.bins, DEFAULT_BINS);
    }
}
