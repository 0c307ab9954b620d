use std::f64::consts::PI;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use chainforge::dynamics::{uniform_grid, write_trace_csv};
use chainforge::{
    effective_model, eigendecompose, forward_eigenvalues, generate, overlap_trace,
    reference_chains, run_experiment_with, shift_spectrum, solve, verify_pst, ChainCouplings,
    DisorderConfig, RunOptions, Spectrum,
};
use chainforge_service::{threads_from_env, ServiceConfig};

use crate::args::{Cli, Command, Format};
use crate::io::{read_json, CliError, CliResult, Output};

pub fn run(cli: Cli) -> CliResult<()> {
    let meta = !cli.no_meta;
    match cli.command {
        Command::Spectrum {
            family,
            n,
            a,
            values,
            shift,
            out,
        } => {
            let base = match (family, values) {
                (Some(family), None) => {
                    let n =
                        n.ok_or_else(|| CliError::Invalid("--n is required with --family".into()))?;
                    generate(family.into(), n, a)?
                }
                (None, Some(values)) => Spectrum::new(values)?,
                _ => unreachable!("clap enforces exactly one of --family and --values"),
            };
            let s = match shift {
                Some(c) => shift_spectrum(&base, c)?,
                None => base,
            };
            Output::new(out).write_json(&s, meta)
        }
        Command::Solve {
            spectrum,
            format,
            out,
        } => {
            let s: Spectrum = read_json(spectrum.as_deref(), "spectrum")?;
            let c = solve(&s)?;
            let out = Output::new(out);
            match format {
                Format::Json => out.write_json(&c, meta),
                Format::Csv => out.write_with(|w| Ok(c.write_csv(w)?)),
            }
        }
        Command::Evolve {
            chain,
            tmax,
            points,
            out,
        } => {
            let c: ChainCouplings = read_json(Some(&chain), "chain")?;
            let es = eigendecompose(&c)?;
            let grid = uniform_grid(tmax, points)?;
            let f = overlap_trace(&es, &grid)?;
            Output::new(out).write_with(|w| Ok(write_trace_csv(&grid, &f, w)?))
        }
        Command::Disorder {
            chain,
            preset,
            r,
            samples,
            seed,
            tau,
            bins,
            out,
            histogram,
            overlaps,
        } => {
            let (couplings, tau) = disorder_target(chain.as_deref(), preset.as_deref(), tau)?;
            let cfg = DisorderConfig {
                r,
                samples,
                seed,
                tau,
                bins,
            };
            let opts = RunOptions {
                threads: threads_from_env(),
                ..Default::default()
            };
            let report = run_experiment_with(&couplings, &cfg, opts)?;
            if let Some(path) = histogram {
                Output::new(Some(path)).write_with(|w| Ok(report.histogram.write_csv(w)?))?;
            }
            if let Some(path) = overlaps {
                Output::new(Some(path)).write_with(|w| Ok(report.write_overlaps_csv(w)?))?;
            }
            let out = Output::new(out);
            if out.is_stdout() {
                out.write_json(&report, meta)
            } else {
                out.write_json(&report, meta)?;
                let line = serde_json::to_string(&report.summary()).expect("serialisable summary");
                Output::new(None).write_with(|w| {
                    writeln!(w, "{line}").map_err(|source| CliError::Write {
                        path: "<stdout>".into(),
                        source,
                    })
                })
            }
        }
        Command::Effective { chain, out } => {
            let c: ChainCouplings = read_json(Some(&chain), "chain")?;
            Output::new(out).write_json(&effective_model(&c)?, meta)
        }
        Command::Presets { out } => Output::new(out).write_json(&reference_chains()?, false),
        Command::Serve {
            port,
            host,
            static_dir,
            sync_limit,
        } => {
            let config = ServiceConfig {
                static_dir,
                sync_limit,
                ..ServiceConfig::from_env()
            };
            chainforge_service::serve_blocking(config, SocketAddr::new(host, port))
                .map_err(CliError::Serve)
        }
    }
}

/// Chain to perturb and its transfer time.
fn disorder_target(
    chain: Option<&Path>,
    preset: Option<&str>,
    tau: Option<f64>,
) -> CliResult<(ChainCouplings, f64)> {
    if let Some(id) = preset {
        let presets = reference_chains()?;
        let found = presets.iter().find(|p| p.id == id).ok_or_else(|| {
            let ids: Vec<&str> = presets.iter().map(|p| p.id.as_str()).collect();
            CliError::Invalid(format!("unknown preset {id:?}; expected one of {ids:?}"))
        })?;
        return Ok((found.couplings.clone(), tau.unwrap_or(found.tau)));
    }
    let path: PathBuf = chain.expect("clap enforces --chain or --preset").to_owned();
    let couplings: ChainCouplings = read_json(Some(&path), "chain")?;
    let tau = match tau {
        Some(t) => t,
        None => {
            let report = verify_pst(&forward_eigenvalues(&couplings)?, PI)?;
            if !report.is_pst {
                return Err(CliError::Invalid(format!(
                    "chain does not transfer perfectly at t = pi (phase error {:.3e}); pass --tau",
                    report.max_phase_error
                )));
            }
            PI
        }
    };
    Ok((couplings, tau))
}
