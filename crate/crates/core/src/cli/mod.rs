//! Command-line front end: argument model, dispatch, JSON summaries and exit codes.

mod commands;
mod config;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

pub use config::RunConfig;

use crate::corpus;
use crate::error::{Error, Result};
use crate::grid::{
    enumerate_cubes, read_csv, read_dump, write_dump, CubeFamily, GridSpec, SampledFunction,
};

/// Environment variable selecting the worker thread count.
pub const THREADS_VAR: &str = "MORREY_LAB_THREADS";

const SUBCOMMANDS: &[&str] = &[
    "norm",
    "maximal",
    "riesz",
    "layer",
    "solve",
    "sharpness",
    "verify",
    "corpus",
];

/// Process exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exit {
    Pass = 0,
    AssertionFailed = 1,
    ConfigError = 2,
}

#[derive(Debug, Parser)]
#[command(
    name = "morrey-lab",
    version,
    about = "Morrey-Lorentz norms, fractional integrals and half-space layer potentials"
)]
pub struct Cli {
    /// `key = value` file supplying flags not given on the command line.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Also write the JSON summary to this file.
    #[arg(long, global = true)]
    pub summary: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lorentz or Morrey-Lorentz norm of a sampled function.
    Norm(NormArgs),
    /// Fractional, Hardy-Littlewood or sharp maximal function.
    Maximal(MaximalArgs),
    /// Riesz potential or tangential Riesz transform.
    Riesz(RieszArgs),
    /// Layer potentials on a periodic boundary grid.
    Layer(LayerArgs),
    /// Picard iteration for the nonlinear boundary problem.
    Solve(SolveArgs),
    /// Cantor-set counterexample table.
    Sharpness(SharpnessArgs),
    /// Built-in pass/fail suites.
    Verify(VerifyArgs),
    /// Frozen test-function corpus.
    Corpus(CorpusArgs),
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 1.0)]
    pub half_width: f64,
    #[arg(long, default_value_t = 32)]
    pub points: usize,
    #[arg(long)]
    pub periodic: bool,
}

impl GridArgs {
    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.dim, self.half_width, self.points, self.periodic)
    }
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Grid dump or CSV file.
    #[arg(long, conflicts_with = "corpus")]
    pub input: Option<PathBuf>,
    /// Corpus entry sampled on the grid flags.
    #[arg(long)]
    pub corpus: Option<String>,
    #[command(flatten)]
    pub grid: GridArgs,
}

impl InputArgs {
    pub fn load(&self) -> Result<(SampledFunction, Value)> {
        match (&self.input, &self.corpus) {
            (Some(path), _) => Ok((
                read_field(path)?,
                serde_json::json!({ "file": path.display().to_string() }),
            )),
            (None, Some(name)) => {
                let grid = self.grid.grid()?;
                let f = corpus::load(name, &grid)?;
                Ok((
                    f,
                    serde_json::json!({ "corpus": corpus::entry(name)?.name, "version": corpus::CORPUS_VERSION }),
                ))
            }
            (None, None) => Err(Error::InvalidArgument("give --input or --corpus".into())),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct FamilyArgs {
    /// Number of dyadic scales; 0 keeps every scale down to single cells.
    #[arg(long, default_value_t = 0)]
    pub scales: usize,
    #[arg(long, default_value_t = 2)]
    pub translations: usize,
}

impl FamilyArgs {
    pub fn family(&self, grid: &GridSpec) -> Result<CubeFamily> {
        if self.scales == 0 {
            CubeFamily::point_scale(grid, self.translations)
        } else {
            enumerate_cubes(grid, self.scales, self.translations)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Space {
    Lorentz,
    Morrey,
    WeakMorrey,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LorentzKind {
    Rearrangement,
    Natural,
}

#[derive(Debug, Clone, Args)]
pub struct NormArgs {
    #[arg(long, value_enum, default_value_t = Space::Lorentz)]
    pub space: Space,
    #[arg(long)]
    pub p: f64,
    /// Lorentz second exponent; defaults to `p`.
    #[arg(long)]
    pub d: Option<f64>,
    #[arg(long, value_enum, default_value_t = LorentzKind::Rearrangement)]
    pub kind: LorentzKind,
    /// Morrey fineness; defaults to `p`.
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[command(flatten)]
    pub family: FamilyArgs,
    #[command(flatten)]
    pub input: InputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MaximalKind {
    Fractional,
    Sharp,
}

#[derive(Debug, Clone, Args)]
pub struct MaximalArgs {
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = MaximalKind::Fractional)]
    pub kind: MaximalKind,
    #[command(flatten)]
    pub family: FamilyArgs,
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RieszMethod {
    Quadrature,
    HedbergSplit,
    Spectral,
    Pv,
}

#[derive(Debug, Clone, Args)]
pub struct RieszArgs {
    /// Order of the potential.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Compute the transform along this 1-based axis instead of a potential.
    #[arg(long)]
    pub transform: Option<usize>,
    #[arg(long, value_enum)]
    pub method: Option<RieszMethod>,
    /// Source Morrey exponents `(p, κ, λ)` for the boundedness ratio.
    #[arg(long, requires = "lambda")]
    pub p: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long, requires = "p")]
    pub lambda: Option<f64>,
    /// Target fineness `ν`.
    #[arg(long)]
    pub nu: Option<f64>,
    #[command(flatten)]
    pub family: FamilyArgs,
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LayerOp {
    D,
    N,
    GradN,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ZeroMode {
    Strict,
    Drop,
}

#[derive(Debug, Clone, Args)]
pub struct LayerArgs {
    #[arg(long, value_enum, default_value_t = LayerOp::N)]
    pub operator: LayerOp,
    #[arg(
        long = "heights",
        alias = "height",
        value_delimiter = ',',
        required = true
    )]
    pub heights: Vec<f64>,
    #[arg(long, value_enum, default_value_t = ZeroMode::Strict)]
    pub zero_mode: ZeroMode,
    #[command(flatten)]
    pub input: InputArgs,
    /// Table of `height, coordinates…, value(s)`.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CertificateMode {
    Auto,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    FreeSpace,
    Periodic,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub rho: f64,
    /// Gradient Morrey exponent; defaults to the centre of the admissible window.
    #[arg(long)]
    pub mu: Option<f64>,
    /// Boundary data: a number, `bump:AMP[:WIDTH]`, `corpus:NAME[:SCALE]` or a file.
    #[arg(long, default_value = "bump:0.2")]
    pub f: String,
    #[arg(long = "V", default_value = "0")]
    pub v: String,
    #[arg(long, default_value = "0")]
    pub b: String,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
    #[arg(long, value_enum, default_value_t = CertificateMode::Auto)]
    pub certificate: CertificateMode,
    #[arg(long, value_enum, default_value_t = Model::FreeSpace)]
    pub model: Model,
    /// Boundary dimension `n − 1`.
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 2.0)]
    pub half_width: f64,
    #[arg(long, default_value_t = 32)]
    pub points: usize,
    /// Boundary trace of the solution.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Iteration history table.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SharpnessArgs {
    #[arg(long)]
    pub r: f64,
    #[arg(long)]
    pub mu: f64,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub lambda: f64,
    /// Largest depth; rows run from 1.
    #[arg(long, default_value_t = 4)]
    pub depth: usize,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Oracles,
    Layer,
    Lorentz,
    Riesz,
    Corpus,
    All,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CorpusArgs {
    #[command(subcommand)]
    pub action: CorpusAction,
}

#[derive(Debug, Clone, Subcommand)]
pub enum CorpusAction {
    /// Entries with parameters and digests.
    List,
    /// Sample one entry and write it as a grid dump.
    Load {
        name: String,
        #[arg(long, default_value_t = corpus::CORPUS_VERSION)]
        version: u32,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Recompute digests and compare with the frozen table.
    Verify {
        #[arg(long, default_value_t = corpus::CORPUS_VERSION)]
        version: u32,
    },
}

/// Summary object plus the pass/fail verdict of one run.
pub struct Report {
    pub summary: Value,
    pub pass: bool,
}

pub(crate) fn read_field(path: &Path) -> Result<SampledFunction> {
    let file = File::open(path)
        .map_err(|e| Error::Format(format!("cannot open {}: {e}", path.display())))?;
    if path.extension().is_some_and(|e| e == "csv") {
        read_csv(file)
    } else {
        read_dump(file)
    }
}

pub(crate) fn write_field(path: &Path, f: &SampledFunction) -> Result<()> {
    write_dump(BufWriter::new(File::create(path)?), f)
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().map_err(|_| {
        Error::InvalidArgument(format!(
            "{THREADS_VAR} must be a positive integer, got {raw:?}"
        ))
    })?;
    // A pool may already exist when the library is driven in-process more than once.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();
    Ok(())
}

fn exit_for(e: &Error) -> Exit {
    match e {
        Error::Diverged { .. } => Exit::AssertionFailed,
        _ => Exit::ConfigError,
    }
}

/// Dispatches a parsed command line.
pub fn execute(cli: &Cli) -> Result<Report> {
    match &cli.command {
        Command::Norm(a) => commands::norm(a),
        Command::Maximal(a) => commands::maximal(a),
        Command::Riesz(a) => commands::riesz(a),
        Command::Layer(a) => commands::layer(a),
        Command::Solve(a) => commands::solve(a),
        Command::Sharpness(a) => commands::sharpness(a),
        Command::Verify(a) => commands::verify(a),
        Command::Corpus(a) => commands::corpus(a),
    }
}

fn config_path(args: &[String]) -> Option<PathBuf> {
    args.iter().enumerate().find_map(|(i, a)| {
        if a == "--config" {
            args.get(i + 1).map(PathBuf::from)
        } else {
            a.strip_prefix("--config=").map(PathBuf::from)
        }
    })
}

/// Full run: configuration, dispatch, summary emission. Returns the exit code.
pub fn run(args: Vec<String>) -> Exit {
    let fail = |msg: String, code: Exit| {
        eprintln!("error: {msg}");
        code
    };
    if let Err(e) = configure_threads() {
        return fail(e.to_string(), Exit::ConfigError);
    }
    let args = match config_path(&args) {
        Some(path) => match RunConfig::load(&path) {
            Ok(c) => c.merge(&args, SUBCOMMANDS),
            Err(e) => return fail(e.to_string(), Exit::ConfigError),
        },
        None => args,
    };
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                Exit::ConfigError
            } else {
                Exit::Pass
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(report) => {
            let text = serde_json::to_string_pretty(&report.summary).expect("serializable summary");
            println!("{text}");
            if let Some(path) = &cli.summary {
                if let Err(e) = std::fs::write(path, format!("{text}\n")) {
                    return fail(
                        format!("cannot write {}: {e}", path.display()),
                        Exit::ConfigError,
                    );
                }
            }
            if report.pass {
                Exit::Pass
            } else {
                Exit::AssertionFailed
            }
        }
        Err(e) => fail(e.to_string(), exit_for(&e)),
    }
}
