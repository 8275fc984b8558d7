use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use tga::cli::{self, BudgetSpec, Format, RunConfig, EXIT_CONFIG, EXIT_OK};
use tga::{Error, Exec, Grid, Method, ScalarMode, Space};

#[derive(Parser)]
#[command(name = "tga", version, about = "Thresholding greedy algorithm and greedy-type basis constants")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SpaceArgs {
    /// `lp:<p>`, `wl1:<w,...>`, `wlp:<p>:<w,...>`, `lorentz:<w,...>` or `plugin:<name>`
    #[arg(long)]
    space: String,
    /// `real` or `complex:<k>` (k-th roots of unity as signs)
    #[arg(long, default_value = "real")]
    field: ScalarMode,
}

#[derive(Args)]
struct BudgetArgs {
    /// Dimensions to run; weighted families default to their weight count
    #[arg(long = "dim", value_delimiter = ',')]
    dims: Vec<usize>,
    #[arg(long, default_value = "fine")]
    grid: Grid,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long = "hillclimb", default_value_t = 200)]
    hillclimb_rounds: usize,
    #[arg(long, default_value_t = 4_000_000)]
    grid_limit: usize,
    #[arg(long, default_value = "auto")]
    method: Method,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "json")]
    format: Format,
    /// Worker threads; `TGA_THREADS` takes precedence
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Greedy ordering, greedy set and residual norm of a vector
    Greedy {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long, allow_hyphen_values = true)]
        vector: String,
        #[arg(long)]
        m: usize,
    },
    /// Best m-term approximation error
    Sigma {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long, allow_hyphen_values = true)]
        vector: String,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value = "auto")]
        method: Method,
    },
    /// Lower-bound estimates of basis constants
    Estimate {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long, value_delimiter = ',', required = true, num_args = 0..)]
        kinds: Vec<String>,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Verification suites
    Verify {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long = "suite", value_delimiter = ',', required = true, num_args = 0..)]
        suites: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        gaps: Vec<usize>,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Run a TOML config file
    Run {
        config: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn config_from(space: SpaceArgs, kinds: Vec<String>, suites: Vec<String>, gaps: Vec<usize>, b: &BudgetArgs) -> RunConfig {
    RunConfig {
        space: space.space,
        dims: b.dims.clone(),
        field: space.field,
        kinds: kinds.into_iter().filter(|k| !k.trim().is_empty()).collect(),
        suites: suites.into_iter().filter(|s| !s.trim().is_empty()).collect(),
        gaps,
        budget: BudgetSpec {
            grid: b.grid,
            samples: b.samples,
            hillclimb_rounds: b.hillclimb_rounds,
            grid_limit: b.grid_limit,
            method: b.method,
        },
        seed: b.seed,
        out: b.out.clone(),
        format: b.format,
    }
}

/// Writes to stdout; a closed pipe is not an error.
fn emit(text: &str) -> Result<(), Error> {
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn print_json<T: serde::Serialize>(v: &T) -> Result<i32, Error> {
    emit(&serde_json::to_string_pretty(v).map_err(|e| Error::Io(e.to_string()))?)?;
    Ok(EXIT_OK)
}

fn vector_command<R: serde::Serialize>(
    space: SpaceArgs,
    vector: &str,
    real: impl FnOnce(&Space, &tga::CoeffVec<f64>) -> Result<R, Error>,
    complex: impl FnOnce(&Space, &tga::CoeffVec<Complex64>) -> Result<serde_json::Value, Error>,
) -> Result<i32, Error> {
    match space.field {
        ScalarMode::Real => {
            let f = cli::parse_vector::<f64>(vector)?;
            let s = Space::parse(&space.space, Some(f.len()), space.field)?;
            print_json(&real(&s, &f)?)
        }
        ScalarMode::Complex { .. } => {
            let f = cli::parse_vector::<Complex64>(vector)?;
            let s = Space::parse(&space.space, Some(f.len()), space.field)?;
            print_json(&complex(&s, &f)?)
        }
    }
}

fn to_value<T: serde::Serialize>(v: T) -> Result<serde_json::Value, Error> {
    serde_json::to_value(v).map_err(|e| Error::Io(e.to_string()))
}

fn run_config(config: RunConfig, threads: Option<usize>) -> Result<i32, Error> {
    let exec = Exec::from_env(threads);
    let report = cli::run(&config, &exec)?;
    match &config.out {
        Some(path) => cli::write_report(&report, path, config.format)?,
        None => emit(&cli::render(&report, config.format)?)?,
    }
    Ok(report.exit_code())
}

fn dispatch(cmd: Command) -> Result<i32, Error> {
    match cmd {
        Command::Greedy { space, vector, m } => vector_command(
            space,
            &vector,
            |s, f| cli::greedy_report(s, f, m),
            |s, f| to_value(cli::greedy_report(s, f, m)?),
        ),
        Command::Sigma {
            space,
            vector,
            m,
            method,
        } => vector_command(
            space,
            &vector,
            |s, f| cli::sigma_report(s, f, m, method),
            |s, f| to_value(cli::sigma_report(s, f, m, method)?),
        ),
        Command::Estimate { space, kinds, budget } => {
            let threads = budget.threads;
            run_config(config_from(space, kinds, Vec::new(), Vec::new(), &budget), threads)
        }
        Command::Verify {
            space,
            suites,
            gaps,
            budget,
        } => {
            let threads = budget.threads;
            run_config(config_from(space, Vec::new(), suites, gaps, &budget), threads)
        }
        Command::Run { config, threads } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| Error::Config(format!("{}: {e}", config.display())))?;
            run_config(RunConfig::from_toml(&text)?, threads)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFIG as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::error_exit_code(&e) as u8)
        }
    }
}
