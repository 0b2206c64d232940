//! The `subdyn` command line.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod config;
mod report;

pub use config::{AlphaSpec, ExperimentConfig};
pub use report::{Check, RunReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_VERIFICATION: i32 = 3;
pub const EXIT_INCONCLUSIVE: i32 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "subdyn",
    version,
    about = "Substitution subshifts, tiling flows and ergodic experiments"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// theta, eta, theta-tilde, eta-tilde, djr or file:<path>
    #[arg(long, global = true, default_value = "theta")]
    pub family: String,
    /// golden, sqrt2m1 or a positive decimal
    #[arg(long, global = true, default_value = "golden")]
    pub alpha: String,
    #[arg(long, global = true, default_value_t = 5)]
    pub depth: u32,
    #[arg(long, global = true, default_value_t = 100_000)]
    pub window: u64,
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Emit::Json)]
    pub emit: Emit,
    /// Override a named tolerance, e.g. --tolerance joining=0.03
    #[arg(long = "tolerance", global = true, value_name = "K=V")]
    pub tolerances: Vec<String>,
    /// Directory for gnuplot script and data files
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Emit {
    Json,
    Csv,
    Gnuplot,
}

#[derive(Subcommand, Debug, Clone, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Apply the substitution to a word
    Expand {
        #[arg(long)]
        word: String,
        #[arg(long, default_value_t = 1)]
        power: u32,
    },
    /// Block hierarchy levels and their identities
    Blocks,
    /// Unique decomposition of an admissible word
    Parse {
        #[arg(long)]
        word: String,
    },
    /// Structure witness for a seeded pair of non-aligned windows
    Structure {
        #[arg(long, default_value_t = 3)]
        level: u32,
    },
    /// Invariant measure of a flow cylinder
    TilingMeasure {
        #[arg(long)]
        word: String,
        /// a:b
        #[arg(long)]
        interval: String,
    },
    /// Samples (t, tile letter, offset) along a flow orbit
    Orbit {
        #[arg(long, default_value_t = 100.0)]
        t_max: f64,
        #[arg(long, default_value_t = 1.0)]
        step: f64,
    },
    /// Birkhoff frequencies against exact ones
    Freq {
        /// Words to test; all admissible words of length 1 and 2 if omitted
        #[arg(long)]
        word: Vec<String>,
    },
    /// Self-correlation of a cylinder along shifts
    Correlate {
        #[arg(long)]
        word: Option<String>,
        /// Comma-separated shifts
        #[arg(long, value_delimiter = ',')]
        shifts: Vec<i64>,
    },
    /// Weyl-sum scan over candidate eigenfrequencies
    Spectrum {
        #[arg(long, default_value = "0")]
        word: String,
        /// Scan the tiling flow instead of the shift
        #[arg(long)]
        flow: bool,
        /// Largest denominator of the rational grid
        #[arg(long)]
        max_q: Option<u32>,
    },
    /// Return ratios μ(A ∩ T^t A)/μ(A)
    Rigidity {
        #[arg(long)]
        word: Option<String>,
        #[arg(long, value_delimiter = ',')]
        times: Vec<f64>,
        #[arg(long)]
        flow: bool,
    },
    /// Empirical two-fold joining of two windows
    Joining {
        /// Cylinder word length; the cylinders are all admissible words of it
        #[arg(long, default_value_t = 2)]
        length: usize,
        /// Take y = T^k x instead of an independent window
        #[arg(long, allow_hyphen_values = true)]
        shift: Option<i64>,
    },
    /// The DJR weak-mixing experiment
    DjrWm,
    /// Every invariant suite for the family
    VerifyAll,
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
            let _ = e.print();
            return code;
        }
    };
    let mut out = std::io::stdout().lock();
    match execute(&cli, &mut out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("subdyn: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &subdyn::Error) -> i32 {
    match e {
        subdyn::Error::InvalidInput(_) | subdyn::Error::Precondition(_) => EXIT_INVALID,
        subdyn::Error::VerificationFailure(_) => EXIT_VERIFICATION,
        subdyn::Error::Inconclusive(_) => EXIT_INCONCLUSIVE,
    }
}

/// Runs a parsed command line, writing the report to `out`.
pub fn execute<W: std::io::Write>(cli: &Cli, out: &mut W) -> subdyn::Result<i32> {
    let config = ExperimentConfig::from_cli(cli)?;
    let started = std::time::Instant::now();
    let result = commands::dispatch(&cli.command, &config)?;
    let report = RunReport::new(
        &config,
        result.checks,
        result.payload,
        started.elapsed().as_secs_f64(),
    );
    report::emit(&report, &result.table, &config, out)?;
    Ok(if report.all_passed() {
        EXIT_OK
    } else {
        EXIT_VERIFICATION
    })
}
