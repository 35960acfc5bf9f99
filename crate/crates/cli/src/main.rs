use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tracing_subscriber::EnvFilter;

use recexp_core::analytics::CorrelationSource;
use recexp_core::eventlog::{read_log, replay_sessions};
use recexp_core::fuzzy::{FactorSet, WeightVector};
use recexp_core::ingest::load_dataset;
use recexp_core::report::{render, AnalysisOptions, Format, Table};
use recexp_core::setup::StudySetup;
use recexp_core::simulate::{simulate, SimulationProfile};
use recexp_core::Error;

#[derive(Parser)]
#[command(
    name = "recexp",
    version,
    about = "Explanation study toolkit: ingest, simulate, analyze"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Load a ratings file and print dataset counts.
    Ingest {
        #[arg(long)]
        ratings: PathBuf,
        #[arg(long)]
        catalog: Option<PathBuf>,
        #[arg(long)]
        schema: Option<PathBuf>,
    },
    /// Write the event log of N simulated complete sessions.
    Simulate {
        #[arg(long)]
        sessions: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        profile: PathBuf,
        #[command(flatten)]
        setup: SetupArgs,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute a report table from an event log.
    Analyze {
        #[arg(long)]
        log: PathBuf,
        /// 3, 4, 5, 6 or anova (also by name: objective, subjective, ...).
        #[arg(long)]
        table: Table,
        /// Fuzzy evaluation weights document (TOML, `Metric = weight`).
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long, default_value = "text")]
        format: Format,
        /// Vectors correlated in table 5.
        #[arg(long, default_value = "likert")]
        source: CorrelationSource,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
}

#[derive(Args)]
struct SetupArgs {
    /// Ratings file; a synthetic dataset is generated when omitted.
    #[arg(long)]
    ratings: Option<PathBuf>,
    #[arg(long)]
    catalog: Option<PathBuf>,
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Synthetic dataset settings (TOML).
    #[arg(long)]
    synthetic: Option<PathBuf>,
    /// Recommender settings (TOML).
    #[arg(long)]
    recommender: Option<PathBuf>,
}

const EXIT_ERROR: u8 = 1;
const EXIT_INGEST: u8 = 2;
const EXIT_INSUFFICIENT: u8 = 3;

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, e: impl ToString) -> Self {
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn analysis_failure(e: Error) -> Failure {
    let code = match e {
        Error::NoCompleteSessions | Error::TooFewObservations { .. } => EXIT_INSUFFICIENT,
        _ => EXIT_ERROR,
    };
    Failure::new(code, e)
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new(EXIT_ERROR, format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Cmd::Ingest {
            ratings,
            catalog,
            schema,
        } => {
            let loaded = load_dataset(&ratings, catalog.as_deref(), schema.as_deref())
                .map_err(|e| Failure::new(EXIT_INGEST, e))?;
            for d in &loaded.rejected {
                eprintln!("rejected {d}");
            }
            println!("{}", loaded.dataset.stats());
        }
        Cmd::Simulate {
            sessions,
            seed,
            profile,
            setup,
            out,
        } => {
            let profile = SimulationProfile::from_toml(&read(&profile)?).map_err(|e| Failure::new(EXIT_ERROR, e))?;
            let setup = StudySetup {
                ratings: setup.ratings,
                catalog: setup.catalog,
                schema: setup.schema,
                synthetic: setup.synthetic,
                recommender: setup.recommender,
            };
            let ctx = setup.build().map_err(|e| Failure::new(EXIT_INGEST, e))?;
            let records = simulate(&ctx, &profile, sessions, seed).map_err(|e| Failure::new(EXIT_ERROR, e))?;
            let text: String = records.iter().map(|r| r.to_line()).collect();
            match out {
                Some(path) => {
                    fs::write(&path, text).map_err(|e| Failure::new(EXIT_ERROR, format!("{}: {e}", path.display())))?
                }
                None => std::io::stdout()
                    .write_all(text.as_bytes())
                    .map_err(|e| Failure::new(EXIT_ERROR, e))?,
            }
        }
        Cmd::Analyze {
            log,
            table,
            weights,
            format,
            source,
            alpha,
        } => {
            let mut opts = AnalysisOptions {
                correlation_source: source,
                alpha,
                ..AnalysisOptions::default()
            };
            if let Some(path) = weights {
                opts.weights = WeightVector::from_toml(&read(&path)?, &FactorSet::default())
                    .map_err(|e| Failure::new(EXIT_ERROR, e))?;
            }
            let records = read_log(&log).map_err(|e| Failure::new(EXIT_INGEST, e))?;
            let sessions = replay_sessions(&records).map_err(|e| Failure::new(EXIT_INGEST, e))?;
            let report = render(table, &sessions, &opts, format).map_err(analysis_failure)?;
            print!("{report}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("warn")))
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
