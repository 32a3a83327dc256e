//! Command-line harness: JSON problem configurations, built-in demos, and
//! the `solve`, `list`, `certify` and `show-demo` commands.

pub mod commands;
pub mod config;
pub mod demos;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{certify, kinds, solve_config, CertifyReport, KindInfo, Summary};
pub use config::ProblemConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] parsplit::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Parser)]
#[command(name = "parsplit", version, about = "Parallel forward-backward splitting for coupled inclusions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a configured problem and print a JSON summary.
    Solve(SolveArgs),
    /// List the built-in problem kinds and demos.
    List {
        /// Print JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Sample the cocoercivity inequality of a configured coupling.
    Certify(CertifyArgs),
    /// Print a built-in demo configuration.
    ShowDemo { name: String },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Path to a JSON problem configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Name of a built-in demo.
    #[arg(long)]
    demo: Option<String>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    source: Source,
    /// Write the iteration trace as CSV.
    #[arg(long)]
    trace_out: Option<PathBuf>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    /// Seed of the random starting point.
    #[arg(long)]
    seed: Option<u64>,
    /// Constant step size.
    #[arg(long)]
    gamma: Option<f64>,
    /// Constant relaxation.
    #[arg(long)]
    lambda: Option<f64>,
}

#[derive(Debug, Args)]
struct CertifyArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value_t = 10_000)]
    n_pairs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Writes a line to stdout, ignoring a closed pipe.
macro_rules! emit {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_MAX_ITER: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;

fn load(source: &Source) -> Result<ProblemConfig, CliError> {
    match (&source.config, &source.demo) {
        (Some(path), _) => ProblemConfig::from_json(&std::fs::read_to_string(path)?),
        (None, Some(name)) => demos::demo(name).ok_or_else(|| CliError::Config(format!("unknown demo '{name}'"))),
        (None, None) => Err(CliError::Config("need --config or --demo".into())),
    }
}

fn solve_cmd(args: SolveArgs) -> Result<i32, CliError> {
    let mut cfg = load(&args.source)?;
    let s = &mut cfg.solver;
    s.tol = args.tol.or(s.tol);
    s.max_iter = args.max_iter.or(s.max_iter);
    s.workers = args.workers.or(s.workers);
    s.seed = args.seed.or(s.seed);
    s.gamma = args.gamma.or(s.gamma);
    s.lambda = args.lambda.or(s.lambda);
    let (summary, trace) = solve_config(&cfg)?;
    if let Some(path) = &args.trace_out {
        std::fs::write(path, trace.to_csv())?;
    }
    emit!("{}", serde_json::to_string_pretty(&summary).expect("summaries serialize"));
    Ok(match summary.status.as_str() {
        "converged" => EXIT_OK,
        "max_iter" => EXIT_MAX_ITER,
        _ => EXIT_DIVERGED,
    })
}

fn list_cmd(json: bool) -> i32 {
    let kinds = kinds();
    if json {
        let doc = serde_json::json!({ "kinds": kinds, "demos": demos::DEMOS });
        emit!("{}", serde_json::to_string_pretty(&doc).expect("listing serializes"));
    } else {
        for k in &kinds {
            emit!("{:<20} {}  [beta = {}]", k.kind, k.description, k.beta);
        }
        emit!("");
        emit!("demos: {}", demos::DEMOS.join(", "));
    }
    EXIT_OK
}

fn certify_cmd(args: CertifyArgs) -> Result<i32, CliError> {
    let cfg = load(&args.source)?;
    let report = certify(&cfg, args.n_pairs, args.seed)?;
    emit!("{}", serde_json::to_string_pretty(&report).expect("reports serialize"));
    Ok(if report.passes { EXIT_OK } else { EXIT_ERROR })
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Solve(a) => solve_cmd(a),
        Command::List { json } => Ok(list_cmd(json)),
        Command::Certify(a) => certify_cmd(a),
        Command::ShowDemo { name } => match demos::demo(&name) {
            Some(cfg) => {
                emit!("{}", cfg.to_json());
                Ok(EXIT_OK)
            }
            None => Err(CliError::Config(format!("unknown demo '{name}'"))),
        },
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        EXIT_ERROR
    })
}
