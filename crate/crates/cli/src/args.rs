use std::net::IpAddr;
use std::path::PathBuf;

use chainforge::Family;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "chainforge",
    version,
    about = "Spin chains for high-fidelity state transfer"
)]
pub struct Cli {
    /// Leave out the `meta` block (tool version, timestamp) from JSON output.
    #[arg(long, global = true)]
    pub no_meta: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Linear,
    InvertedQuadratic,
    Cosine,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Linear => Family::Linear,
            FamilyArg::InvertedQuadratic => Family::InvertedQuadratic,
            FamilyArg::Cosine => Family::Cosine,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a spectrum, optionally shifted towards zero.
    Spectrum {
        #[arg(long, required_unless_present = "values", conflicts_with = "values")]
        family: Option<FamilyArg>,
        #[arg(long, requires = "family")]
        n: Option<usize>,
        /// Level spacing of the linear family (odd).
        #[arg(long)]
        a: Option<u32>,
        /// Explicit eigenvalues instead of a family.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        values: Option<Vec<f64>>,
        /// Move every nonzero eigenvalue towards zero by this amount.
        #[arg(long)]
        shift: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reconstruct the chain couplings of a spectrum.
    Solve {
        /// Spectrum JSON; read from stdin when absent or `-`.
        #[arg(long)]
        spectrum: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// End-to-end overlap f(t) on a uniform time grid, as CSV.
    Evolve {
        /// Couplings JSON; `-` for stdin.
        #[arg(long)]
        chain: PathBuf,
        #[arg(long)]
        tmax: f64,
        #[arg(long, default_value_t = 1000)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Transfer statistics under random coupling disorder.
    Disorder {
        /// Couplings JSON; `-` for stdin.
        #[arg(long, required_unless_present = "preset", conflicts_with = "preset")]
        chain: Option<PathBuf>,
        /// One of the reference chains (`chainforge presets` lists them).
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        r: f64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Transfer time; defaults to π if the chain transfers perfectly at π.
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long, default_value_t = chainforge::disorder::DEFAULT_BINS)]
        bins: usize,
        /// Report JSON; a one-line summary goes to stdout instead.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Histogram CSV (lower,upper,count).
        #[arg(long)]
        histogram: Option<PathBuf>,
        /// Raw overlaps CSV (sample,f).
        #[arg(long)]
        overlaps: Option<PathBuf>,
    },
    /// Weak end-coupling model of a chain.
    Effective {
        /// Couplings JSON; `-` for stdin.
        #[arg(long)]
        chain: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the reference chains.
    Presets {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Start the HTTP service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        /// Directory with the built designer UI.
        #[arg(long = "static")]
        static_dir: Option<PathBuf>,
        /// Largest disorder run answered synchronously.
        #[arg(long, default_value_t = chainforge_service::DEFAULT_SYNC_LIMIT)]
        sync_limit: usize,
    },
}
