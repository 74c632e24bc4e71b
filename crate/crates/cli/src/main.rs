//! `qwalks`: simulation, kernel evaluation, frozen boundaries, tiling
//! enumeration and the validation suites.

mod commands;
mod config;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::CommonArgs;

#[derive(Parser, Debug)]
#[command(name = "qwalks", version, about = "Noncolliding q-exchangeable random walks")]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    cmd: Command,
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String> {
    s.split(',')
        .map(|v| v.trim().parse::<T>().map_err(|_| format!("bad list entry '{v}'")))
        .collect()
}

fn parse_pair(s: &str) -> Result<(i64, i64), String> {
    match parse_list::<i64>(s)?.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(format!("expected two integers 'a,b', got '{s}'")),
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample trajectories until absorption and summarize absorption times.
    Simulate(SimulateArgs),
    /// Evaluate a correlation kernel matrix and its determinant.
    Kernel(KernelArgs),
    /// Frozen boundary CSV and SVG, optionally with a liquid-region scan.
    Boundary(BoundaryArgs),
    /// Enumerate interlacing arrays, or compare tiling and walk transitions.
    Tilings(TilingsArgs),
    /// Run validation suites; exits with status 2 if any check fails.
    Validate(ValidateArgs),
}

#[derive(clap::Args, Debug)]
pub struct SimulateArgs {
    /// initial configuration, strictly decreasing, e.g. 7,6,3,1
    #[arg(long, value_delimiter = ',')]
    pub x: Option<Vec<i64>>,
    /// cluster breakpoints 0 = a_1 < ... < a_{L+1} = 1 (used with --m when --x is absent)
    #[arg(long, value_delimiter = ',')]
    pub breakpoints: Option<Vec<f64>>,
    /// cluster offsets C_1 <= ... <= C_L
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub offsets: Option<Vec<f64>>,
    /// number of independent trajectories
    #[arg(long)]
    pub seeds: Option<usize>,
    /// step cap per trajectory
    #[arg(long)]
    pub cap: Option<usize>,
    /// how many trajectories to write out in full
    #[arg(long, default_value_t = 1)]
    pub keep: usize,
    /// absorption-time scaling table over several m instead of a single run
    #[arg(long)]
    pub scaling: bool,
    /// values of m for --scaling
    #[arg(long, value_delimiter = ',', default_value = "25,50,100")]
    pub ms: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KernelKind {
    /// walk kernel, points y,t
    Walks,
    /// finite-N lozenge kernel, points p,n
    Lozenge,
    /// N → ∞ lozenge kernel, points p,t
    Limit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Quadrature,
    Residue,
}

#[derive(clap::Args, Debug)]
pub struct KernelArgs {
    #[arg(long, value_enum, default_value_t = KernelKind::Walks)]
    pub kind: KernelKind,
    #[arg(long, value_delimiter = ',')]
    pub x: Option<Vec<i64>>,
    /// top row for --kind lozenge
    #[arg(long, value_delimiter = ',')]
    pub lambda: Option<Vec<i64>>,
    /// a point "a,b"; repeat for several
    #[arg(long = "point", value_parser = parse_pair, required = true, allow_hyphen_values = true)]
    pub points: Vec<(i64, i64)>,
    #[arg(long, value_enum, default_value_t = Method::Quadrature)]
    pub method: Method,
}

#[derive(clap::Args, Debug)]
pub struct BoundaryArgs {
    #[arg(long, value_delimiter = ',')]
    pub breakpoints: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub offsets: Option<Vec<f64>>,
    /// points of the uniform w grid on [-w-max, w-max]
    #[arg(long, default_value_t = 4000)]
    pub w_points: usize,
    #[arg(long, default_value_t = 20.0)]
    pub w_max: f64,
    #[arg(long, default_value_t = 3.0)]
    pub tau_max: f64,
    /// liquid-region scan resolution per axis (0 disables the scan)
    #[arg(long, default_value_t = 0)]
    pub scan: usize,
}

#[derive(clap::Args, Debug)]
pub struct TilingsArgs {
    /// top row of the arrays to enumerate (N <= 6)
    #[arg(long, value_delimiter = ',')]
    pub lambda: Option<Vec<i64>>,
    /// walk configurations for the convergence table
    #[arg(long, value_delimiter = ',')]
    pub x: Option<Vec<i64>>,
    #[arg(long, value_delimiter = ',')]
    pub y: Option<Vec<i64>>,
    #[arg(long, value_delimiter = ',', default_value = "10,20,40,60")]
    pub n: Vec<usize>,
}

#[derive(clap::Args, Debug)]
pub struct ValidateArgs {
    /// suite name or "all"
    #[arg(default_value = "all")]
    pub suite: String,
    /// Monte Carlo sample size
    #[arg(long, default_value_t = 1_000_000)]
    pub trajectories: usize,
}

/// Failures of a command, each with its exit status.
#[derive(Debug)]
pub enum CliError {
    Lib(qwalks::Error),
    Config(String),
    Io(String),
    ValidationFailed(usize),
}

impl From<qwalks::Error> for CliError {
    fn from(e: qwalks::Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    fn kind(&self) -> &'static str {
        use qwalks::Error as E;
        match self {
            CliError::Lib(E::NonConvergence { .. } | E::TruncationCap { .. } | E::StepCap { .. }) => "non-convergence",
            CliError::Lib(E::RootSolver(_) | E::Singular { .. } | E::Consistency(_)) => "numerical",
            CliError::Lib(_) | CliError::Config(_) => "domain",
            CliError::Io(_) => "io",
            CliError::ValidationFailed(_) => "validation",
        }
    }

    fn code(&self) -> u8 {
        match self.kind() {
            "validation" => 2,
            "domain" => 3,
            "non-convergence" | "numerical" => 4,
            _ => 1,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Lib(e) => e.to_string(),
            CliError::Config(s) | CliError::Io(s) => s.clone(),
            CliError::ValidationFailed(n) => format!("{n} check(s) failed"),
        }
    }
}

pub fn write_output(path: &PathBuf, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(3) } else { ExitCode::SUCCESS };
        }
    };
    let result = config::RunConfig::resolve(&cli.common).and_then(|cfg| {
        if let Some(n) = cfg.threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CliError::Config(e.to_string()))?;
        }
        match &cli.cmd {
            Command::Simulate(a) => commands::simulate(&cfg, a),
            Command::Kernel(a) => commands::kernel(&cfg, a),
            Command::Boundary(a) => commands::boundary(&cfg, a),
            Command::Tilings(a) => commands::tilings(&cfg, a),
            Command::Validate(a) => commands::validate(&cfg, a),
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let doc = serde_json::json!({ "error": e.kind(), "message": e.message() });
            eprintln!("{doc}");
            ExitCode::from(e.code())
        }
    }
}
