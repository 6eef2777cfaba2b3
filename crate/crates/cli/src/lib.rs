//! Command-line front end for the `qasmap` library.
//!
//! Exit codes: 0 success, 1 negative verdict, 2 bad input, 3 resource
//! limit, 4 internal invariant violation.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use qasmap::family2::FamilyError;
use qasmap::greenpot::GreenError;
use qasmap::mapiter::MapError;
use qasmap::polycore::{PolyError, DEFAULT_TERM_CAP};
use qasmap::specdeg::SpecError;

mod commands;
mod output;
mod point;

pub use point::{parse_complex, parse_point, parse_range};

/// Environment variable that may override the number of grid workers.
pub const THREADS_ENV: &str = "QASMAP_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error("{0}")]
    Negative(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Negative(_) => 1,
            CliError::Input(_) => 2,
            CliError::Resource(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}

impl From<PolyError> for CliError {
    fn from(e: PolyError) -> Self {
        match e {
            PolyError::ResourceLimit { .. } => CliError::Resource(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<MapError> for CliError {
    fn from(e: MapError) -> Self {
        match e {
            MapError::Poly(p) => p.into(),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<SpecError> for CliError {
    fn from(e: SpecError) -> Self {
        match e {
            SpecError::PrecisionExhausted(_) => CliError::Resource(e.to_string()),
            SpecError::NonPositiveDegree { .. } | SpecError::MultiplicityOutOfRange(_) => {
                CliError::Internal(e.to_string())
            }
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<FamilyError> for CliError {
    fn from(e: FamilyError) -> Self {
        match e {
            FamilyError::Map(m) => m.into(),
            FamilyError::Poly(p) => p.into(),
            FamilyError::Spec(s) => s.into(),
            FamilyError::Invariant(_) => CliError::Internal(e.to_string()),
            FamilyError::GenerationExhausted(_) => CliError::Resource(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<GreenError> for CliError {
    fn from(e: GreenError) -> Self {
        match e {
            GreenError::Spec(s) => s.into(),
            GreenError::AmplificationOverflow { .. } => CliError::Resource(e.to_string()),
            GreenError::Model(_) => CliError::Internal(e.to_string()),
            GreenError::OrbitHitIndeterminacy { .. }
            | GreenError::OrbitHitDivisor { .. }
            | GreenError::NotConverged { .. }
            | GreenError::NonFinite { .. }
            | GreenError::InsufficientOkRegion => CliError::Negative(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "qasmap", version)]
#[command(about = "Degree growth, stability certificates and Green potentials of rational maps of projective space")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print the exact degree sequence d_0 .. d_N of the iterates.
    Degrees(DegreesArgs),
    /// Decide algebraic or quasi-algebraic stability and print the
    /// certificate as JSON.
    InferQas(InferArgs),
    /// Dominant root of t^(n0+1) - d t^n0 + h, as JSON.
    Lambda(LambdaArgs),
    /// Generate a random family instance.
    FamilyGen(FamilyGenArgs),
    /// Run the preflight checks and the stability certificate on a family.
    FamilyCheck(FamilyCheckArgs),
    /// Evaluate the Green potential at one point, as JSON.
    GreenPoint(GreenPointArgs),
    /// Sample the Green potential on a real 2-plane and export CSV/PGM.
    GreenGrid(GreenGridArgs),
    /// Certificate, spectral checks and residual suites in one report.
    VerifyAll(VerifyArgs),
}

#[derive(Args, Debug, Clone)]
pub struct InputArgs {
    /// Map file: a `vars` line and one `map` line per variable.
    #[arg(long, conflicts_with = "family", required_unless_present = "family")]
    pub map: Option<PathBuf>,
    /// Family file; its induced map is analysed.
    #[arg(long)]
    pub family: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Copy)]
pub struct Caps {
    /// Largest number of terms any intermediate polynomial may have.
    #[arg(long, default_value_t = DEFAULT_TERM_CAP)]
    pub max_terms: usize,
    /// Largest symbolic iteration depth accepted.
    #[arg(long, default_value_t = 12)]
    pub max_depth: usize,
}

#[derive(Args, Debug)]
pub struct DegreesArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Iteration depth N.
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub json: bool,
    #[command(flatten)]
    pub caps: Caps,
}

#[derive(Args, Debug)]
pub struct InferArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Depth of the symbolic trace.
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    /// Accepted for symmetry; the certificate is always JSON.
    #[arg(long)]
    pub json: bool,
    #[command(flatten)]
    pub caps: Caps,
}

#[derive(Args, Debug)]
pub struct LambdaArgs {
    #[arg(long)]
    pub d: u64,
    #[arg(long)]
    pub h: u64,
    #[arg(long)]
    pub n0: u64,
    /// Working precision in bits.
    #[arg(long, default_value_t = 128)]
    pub precision: usize,
    /// Also list the degrees d_0 .. d_N of the recurrence.
    #[arg(long)]
    pub n: Option<usize>,
    /// Accepted for symmetry; the report is always JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct FamilyGenArgs {
    #[arg(long, default_value_t = 1)]
    pub deg_p: u32,
    #[arg(long, default_value_t = 2)]
    pub deg_q: u32,
    /// Coefficients are drawn from [-bound, bound].
    #[arg(long, default_value_t = 3)]
    pub coeff_bound: i64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the family file here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the induced map file.
    #[arg(long)]
    pub map_out: Option<PathBuf>,
    /// Print a JSON summary instead of the family file.
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct FamilyCheckArgs {
    #[arg(long)]
    pub family: PathBuf,
    /// Precision in bits for the numeric common-zero check.
    #[arg(long, default_value_t = 128)]
    pub precision: usize,
    /// Random triples for the sampled pencil test.
    #[arg(long, default_value_t = 64)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Depth of the symbolic trace used for the certificate.
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// Write the induced map file.
    #[arg(long)]
    pub map_out: Option<PathBuf>,
    /// Accepted for symmetry; the report is always JSON.
    #[arg(long)]
    pub json: bool,
    #[command(flatten)]
    pub caps: Caps,
}

#[derive(Args, Debug)]
pub struct GreenPointArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Comma separated complex coordinates, e.g. `1,0.5-2i,i`.
    #[arg(long, allow_hyphen_values = true)]
    pub point: String,
    /// Number of orbit steps.
    #[arg(long, default_value_t = 40)]
    pub n: usize,
    /// Evaluate in arbitrary precision with this many bits.
    #[arg(long)]
    pub precision: Option<usize>,
    /// Depth of the symbolic trace used for the certificate.
    #[arg(long, default_value_t = 4)]
    pub depth: usize,
    /// Fail unless the last increment is below this value.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Also report the telescoping residual for this n.
    #[arg(long)]
    pub telescope: Option<usize>,
    /// Accepted for symmetry; the result is always JSON.
    #[arg(long)]
    pub json: bool,
    #[command(flatten)]
    pub caps: Caps,
}

#[derive(Args, Debug)]
pub struct GreenGridArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value = "1,0,0.5", allow_hyphen_values = true)]
    pub base: String,
    #[arg(long, default_value = "0,1,0", allow_hyphen_values = true)]
    pub e1: String,
    #[arg(long, default_value = "0,i,0", allow_hyphen_values = true)]
    pub e2: String,
    #[arg(long, default_value = "-2,2", allow_hyphen_values = true)]
    pub x_range: String,
    #[arg(long, default_value = "-2,2", allow_hyphen_values = true)]
    pub y_range: String,
    #[arg(long, default_value_t = 64)]
    pub resolution: usize,
    #[arg(long, default_value_t = 4096)]
    pub max_resolution: usize,
    /// Number of orbit steps per node.
    #[arg(long, default_value_t = 30)]
    pub n: usize,
    #[arg(long, default_value_t = 4)]
    pub depth: usize,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub pgm: Option<PathBuf>,
    /// Sidecar JSON; defaults to the PGM path with a `.json` extension.
    #[arg(long)]
    pub meta: Option<PathBuf>,
    /// Print the sidecar JSON on stdout.
    #[arg(long)]
    pub json: bool,
    #[command(flatten)]
    pub caps: Caps,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Depth of the symbolic trace.
    #[arg(long, default_value_t = 4)]
    pub depth: usize,
    /// Orbit steps for the potential.
    #[arg(long, default_value_t = 40)]
    pub iters: usize,
    /// Precision in bits for the spectral checks.
    #[arg(long, default_value_t = 128)]
    pub precision: usize,
    /// Number of random points in the residual suites.
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write the report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Accepted for symmetry; the report is always JSON.
    #[arg(long)]
    pub json: bool,
    #[command(flatten)]
    pub caps: Caps,
}

/// What a command produced: text for stdout and whether the analysis came
/// out negative.
pub struct Outcome {
    pub stdout: String,
    pub negative: bool,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome {
            stdout,
            negative: false,
        }
    }
}

fn configure_workers() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        // Fails only if the pool was already built, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

pub fn execute(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Degrees(a) => commands::degrees(a),
        Command::InferQas(a) => commands::infer_qas(a),
        Command::Lambda(a) => commands::lambda(a),
        Command::FamilyGen(a) => commands::family_gen(a),
        Command::FamilyCheck(a) => commands::family_check(a),
        Command::GreenPoint(a) => commands::green_point(a),
        Command::GreenGrid(a) => commands::green_grid(a),
        Command::VerifyAll(a) => commands::verify_all(a),
    }
}

/// Parses `argv`, runs the command and writes its output; returns the exit
/// code.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                2
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    configure_workers();
    match execute(&cli.command) {
        Ok(o) => {
            if out.write_all(o.stdout.as_bytes()).is_err() {
                return 2;
            }
            i32::from(o.negative)
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub(crate) fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}
