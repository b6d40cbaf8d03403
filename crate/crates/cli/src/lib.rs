//! `bl`: command-line front end for the Bernoulli-Laplace spectral toolkit.
//!
//! All logic lives here so tests can drive [`run`] with in-memory streams;
//! the binary only forwards the process arguments and exit code.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

mod commands;
pub mod output;

use output::Format;

/// Default ceiling on the exact-arithmetic cost estimate, in rough units of
/// 64-bit limb multiplications.
pub const DEFAULT_EXACT_COST: f64 = 1e7;

#[derive(Debug, Parser)]
#[command(
    name = "bl",
    version,
    about = "Exact spectral computations for the Bernoulli-Laplace urn chain"
)]
pub struct Cli {
    #[command(flatten)]
    pub model: ModelArgs,

    /// Arithmetic backend; `auto` picks exact when the cost estimate allows.
    #[arg(long, global = true, env = "BL_BACKEND", default_value = "auto")]
    pub backend: BackendChoice,

    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: Format,

    /// Write the document here instead of standard output.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// Refuse (or, under `auto`, avoid) exact runs estimated above this cost.
    #[arg(long, global = true, default_value_t = DEFAULT_EXACT_COST)]
    pub max_exact_cost: f64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Balls in urn 1.
    #[arg(long, global = true)]
    pub n1: Option<u32>,

    /// Balls in urn 2.
    #[arg(long, global = true)]
    pub n2: Option<u32>,

    /// White balls in the whole system.
    #[arg(long, global = true)]
    pub nw: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendChoice {
    Auto,
    Exact,
    Float,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EigvecForm {
    /// Eigenvector obtained through the inverse Pascal map.
    Pascal,
    /// Eigenvector from the terminating hypergeometric sum.
    Hypergeometric,
    /// Triangular (Pascal-coordinate) coefficients.
    B,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues lambda_k.
    Spectrum,
    /// Right eigenvector number k.
    Eigvec {
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value = "pascal")]
        form: EigvecForm,
    },
    /// Hypergeometric stationary law.
    Stationary,
    /// The full matrix T^m.
    Power {
        #[arg(long)]
        m: u64,
    },
    /// Total-variation distance to stationarity against m.
    TvCurve {
        #[arg(long, default_value_t = 0)]
        start: usize,
        #[arg(long)]
        m_max: u64,
        #[arg(long, default_value_t = 1)]
        m_step: u64,
    },
    /// Step counts and values of the balanced-case mixing bounds over a c-grid.
    Bounds {
        /// `upper` bounds E_pi[TV]; `lower` bounds 2 TV from state 0.
        #[arg(long)]
        kind: bl_core::mixing::BoundKind,
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            default_value = "0,1,2,3"
        )]
        c: Vec<f64>,
        /// Constant of the bound (A for upper, b for lower).
        #[arg(long, default_value_t = 1.0)]
        constant: f64,
        /// Also evaluate the bounded quantity at each step count.
        #[arg(long)]
        measure: bool,
    },
    /// First m with TV <= epsilon from the start state.
    Cutoff {
        #[arg(long, default_value_t = 0)]
        start: usize,
        #[arg(long, default_value_t = 0.25)]
        epsilon: f64,
    },
    /// Exhaustive exact invariant suite over all canonical models.
    Verify {
        #[arg(long, default_value_t = 12)]
        max_n: u32,
    },
    /// Monte Carlo run of the ball-level chain.
    Simulate {
        #[arg(long, default_value_t = 0)]
        start: usize,
        #[arg(long)]
        m: u64,
        #[arg(long, default_value_t = 100_000)]
        walkers: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Domain(String),
    /// Document was produced but reports failed checks.
    #[error("{0}")]
    Verification(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<bl_core::Error> for Failure {
    fn from(e: bl_core::Error) -> Self {
        Failure::Domain(e.to_string())
    }
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            _ => 1,
        }
    }
}

/// Parses `args` (including the program name), runs the command and writes
/// the document to `out` or the `--output` file. Diagnostics go to `err`.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli, out, err) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "error: {f}");
            f.exit_code()
        }
    }
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let (doc, outcome) = commands::dispatch(cli, err)?;
    match &cli.output {
        Some(path) => {
            let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
            doc.write(cli.format, &mut file)?;
            file.flush()?;
        }
        None => doc.write(cli.format, out)?,
    }
    outcome
}

fn params_json(
    original: (u32, u32, u32),
    canonical: &bl_core::ModelParams,
    map: &bl_core::StateMap,
) -> Value {
    let range = map.original_range();
    let mut v = json!({
        "n1": original.0,
        "n2": original.1,
        "nw": original.2,
        "states": [range.start(), range.end()],
    });
    if !map.is_identity() {
        v["canonical"] = json!({
            "n1": canonical.n1(),
            "n2": canonical.n2(),
            "nw": canonical.nw(),
        });
    }
    v
}

fn backend_name(exact: bool) -> &'static str {
    if exact {
        "exact"
    } else {
        "float"
    }
}
