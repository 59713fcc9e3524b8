//! `symcalc`: residues, symbol traces, heat-trace fits, loop-group curvature
//! and verification suites from the command line.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or schema error,
//! 3 numerical failure.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

mod commands;
mod schema;
mod verify;

#[derive(Parser, Debug)]
#[command(name = "symcalc", version, about = "Pseudodifferential symbol calculus on the circle")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(clap::Args, Debug, Clone)]
struct Flags {
    /// Fourier mode cutoff N (matrices act on modes -N..=N).
    #[arg(long, global = true)]
    modes: Option<usize>,
    /// Symbol depth J (number of homogeneous levels below the leading one).
    #[arg(long, global = true)]
    depth: Option<usize>,
    /// Band limit B: truncates input symbols, sets the band of random samples.
    #[arg(long, global = true)]
    band: Option<usize>,
    #[arg(long, global = true)]
    eps_min: Option<f64>,
    #[arg(long, global = true)]
    eps_max: Option<f64>,
    #[arg(long, global = true)]
    eps_count: Option<usize>,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Tolerance override (see each command).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Wodzicki residue of a symbol and the zero modes of its integrand.
    Residue { symbol: PathBuf },
    /// Leading-symbol trace against a cosphere distribution.
    SymbolTrace {
        symbol: PathBuf,
        /// uniform+, uniform-, uniform, delta:X0:+, mode:K:-, d(...)
        #[arg(long, default_value = "uniform+")]
        dist: String,
    },
    /// Heat-trace sweep Tr(A e^{-eps Q}) and the fit of its small-eps expansion.
    /// --tol rejects fits whose RMS residual exceeds it.
    HeatFit {
        symbol: PathBuf,
        /// Q = (Laplacian + projection)^s, of order q = 2s.
        #[arg(long, default_value_t = 1.0)]
        weight_exponent: f64,
        /// Force a log(eps) column.
        #[arg(long)]
        log: bool,
        /// CSV sweep destination; defaults to the report path with a .csv extension.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Curvature symbol of a connection on the loop group, evaluated on two loops.
    LoopCurvature {
        u: PathBuf,
        v: PathBuf,
        /// su2, su(N), or a JSON file with structure constants.
        #[arg(long, default_value = "su2")]
        algebra: String,
        #[arg(long, value_enum, default_value_t = ConnectionArg::LeviCivita)]
        connection: ConnectionArg,
        #[arg(long, default_value_t = 0.5)]
        sobolev: f64,
    },
    /// Weighted first Chern form at s = 1/2 and its conditional operator trace.
    Chern {
        u: PathBuf,
        v: PathBuf,
        #[arg(long, default_value = "su2")]
        algebra: String,
    },
    /// Run a verification suite. --tol overrides the tolerance of exact identities.
    Verify {
        #[arg(value_enum)]
        suite: verify::Suite,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum ConnectionArg {
    LeviCivita,
    Conjugation,
}

/// Why a command stopped; each maps to one exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Numerical(String),
    Verification(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
            Failure::Verification(m) => write!(f, "verification failed: {m}"),
        }
    }
}

impl From<symcalc::Error> for Failure {
    fn from(e: symcalc::Error) -> Self {
        use symcalc::Error::*;
        match e {
            IllConditionedWeight(_) | RankDeficient(_) | ResidualTooLarge { .. } | TooFewSamples { .. } | Divergent(..)
            | GridTooCoarse(_) => Failure::Numerical(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

/// Every parameter a run used, after defaults are applied.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub inputs: Vec<String>,
    pub modes: usize,
    pub depth: usize,
    pub band: Option<usize>,
    pub eps_min: f64,
    pub eps_max: f64,
    pub eps_count: usize,
    pub tol: Option<f64>,
    pub seed: u64,
    pub out: Option<String>,
    pub threads: Option<usize>,
    pub parameters: serde_json::Map<String, serde_json::Value>,
}

impl RunConfig {
    fn resolve(flags: &Flags, command: &str, inputs: Vec<String>, default_modes: usize, threads: Option<usize>) -> Result<Self, Failure> {
        let config = RunConfig {
            command: command.into(),
            inputs,
            modes: flags.modes.unwrap_or(default_modes),
            depth: flags.depth.unwrap_or(3),
            band: flags.band,
            eps_min: flags.eps_min.unwrap_or(1e-4),
            eps_max: flags.eps_max.unwrap_or(1e-2),
            eps_count: flags.eps_count.unwrap_or(40),
            tol: flags.tol,
            seed: flags.seed,
            out: flags.out.as_ref().map(|p| p.display().to_string()),
            threads,
            parameters: serde_json::Map::new(),
        };
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Failure::Usage(format!("--{name} must be positive, got {v}")))
            }
        };
        positive("modes", config.modes as f64)?;
        positive("depth", config.depth as f64)?;
        positive("eps-min", config.eps_min)?;
        positive("eps-max", config.eps_max)?;
        if let Some(b) = config.band {
            positive("band", b as f64)?;
        }
        if let Some(t) = config.tol {
            positive("tol", t)?;
        }
        if config.eps_max <= config.eps_min {
            return Err(Failure::Usage("--eps-max must exceed --eps-min".into()));
        }
        if config.eps_count < 2 {
            return Err(Failure::Usage("--eps-count must be at least 2".into()));
        }
        Ok(config)
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) {
        self.parameters.insert(key.into(), serde_json::to_value(value).expect("parameters serialize"));
    }
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

/// Writes `report` as pretty JSON to `--out`, or to stdout.
pub fn emit<T: Serialize>(report: &T, config: &RunConfig) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(report).expect("reports serialize");
    text.push('\n');
    match &config.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Usage(format!("cannot write {path}: {e}"))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::Usage(e.to_string())),
    }
}

fn thread_cap() -> Result<Option<usize>, Failure> {
    match std::env::var("SYMCALC_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Failure::Usage(format!("SYMCALC_THREADS must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(None),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let threads = thread_cap()?;
    if let Some(n) = threads {
        // Fails only if a pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let path = |p: &PathBuf| p.display().to_string();
    let flags = &cli.flags;
    match &cli.command {
        Command::Residue { symbol } => {
            let config = RunConfig::resolve(flags, "residue", vec![path(symbol)], 2000, threads)?;
            commands::residue(symbol, config)
        }
        Command::SymbolTrace { symbol, dist } => {
            let mut config = RunConfig::resolve(flags, "symbol-trace", vec![path(symbol)], 2000, threads)?;
            config.set("dist", dist);
            commands::symbol_trace(symbol, dist, config)
        }
        Command::HeatFit { symbol, weight_exponent, log, csv } => {
            let mut config = RunConfig::resolve(flags, "heat-fit", vec![path(symbol)], 2000, threads)?;
            let csv = csv.clone().or_else(|| flags.out.as_ref().map(|p| p.with_extension("csv")));
            config.set("weight_exponent", weight_exponent);
            config.set("log", log);
            config.set("csv", csv.as_ref().map(|p| p.display().to_string()));
            commands::heat_fit(symbol, *weight_exponent, *log, csv.as_deref(), config)
        }
        Command::LoopCurvature { u, v, algebra, connection, sobolev } => {
            let mut config = RunConfig::resolve(flags, "loop-curvature", vec![path(u), path(v)], 4096, threads)?;
            config.set("algebra", algebra);
            config.set("connection", connection);
            config.set("sobolev", sobolev);
            let kind = match connection {
                ConnectionArg::LeviCivita => symcalc::loop_geometry::ConnectionKind::LeviCivita,
                ConnectionArg::Conjugation => symcalc::loop_geometry::ConnectionKind::Conjugation,
            };
            commands::loop_curvature(u, v, algebra, kind, *sobolev, config)
        }
        Command::Chern { u, v, algebra } => {
            let mut config = RunConfig::resolve(flags, "chern", vec![path(u), path(v)], 4096, threads)?;
            config.set("algebra", algebra);
            commands::chern(u, v, algebra, config)
        }
        Command::Verify { suite } => {
            let mut config = RunConfig::resolve(flags, "verify", vec![], 2000, threads)?;
            config.set("suite", suite);
            verify::run(*suite, config)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("symcalc: {f}");
            ExitCode::from(f.code())
        }
    }
}
