//! Command-line runner for perfect-parity mechanism experiments.
//!
//! Exit codes: 0 success; 2 parse or config error; 3 a construction failed
//! (coupling search exhausted); 4 a sandwich ordering was violated — the
//! regression tripwire.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use fairmech_cli::config::{self, Arithmetic, Overrides};
use fairmech_cli::runner;

#[derive(Parser)]
#[command(
    name = "fairmech",
    version,
    about = "Design and audit data representations with perfect demographic parity / perfect privacy"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print every entropy, mutual information, diagram atom, and regime
    /// threshold of a source distribution.
    Info {
        /// Distribution file (JSON; see README for the schema).
        #[arg(long)]
        source: PathBuf,
        /// Exact rational arithmetic (default).
        #[arg(long)]
        exact: bool,
        /// Floating-point arithmetic.
        #[arg(long, conflicts_with = "exact")]
        float: bool,
    },
    /// Build mechanisms over a rate sweep, evaluate them against the
    /// bounds, optionally bracket with the oracle, and write reports.
    Run {
        /// JSON config file; command-line flags override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Distribution file (JSON).
        #[arg(long)]
        source: Option<PathBuf>,
        /// p1, p2, or both.
        #[arg(long)]
        problem: Option<String>,
        /// Rate in bits; repeatable.
        #[arg(long = "rate")]
        rates: Vec<f64>,
        /// Inclusive rate grid MIN:MAX:STEPS.
        #[arg(long)]
        rate_grid: Option<String>,
        /// Design name (A, B, C, HIGHRATE, P2); repeatable. Default: every
        /// design applicable in the rate's regime.
        #[arg(long = "design")]
        designs: Vec<String>,
        /// Run the oracle sandwich for every (problem, rate).
        #[arg(long)]
        oracle: bool,
        /// Oracle search budget (implies --oracle).
        #[arg(long)]
        oracle_budget: Option<usize>,
        /// Seed for every randomized component.
        #[arg(long)]
        seed: Option<u64>,
        /// Exact rational arithmetic (default).
        #[arg(long)]
        exact: bool,
        /// Floating-point arithmetic.
        #[arg(long, conflicts_with = "exact")]
        float: bool,
        /// Output directory for JSON reports and summary.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() {
    std::process::exit(dispatch());
}

fn dispatch() -> i32 {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Info {
            source,
            exact: _,
            float,
        } => {
            let arithmetic = if float {
                Arithmetic::Float
            } else {
                Arithmetic::Exact
            };
            runner::cmd_info(&source, arithmetic).map(|text| {
                print!("{text}");
                0
            })
        }
        Command::Run {
            config,
            source,
            problem,
            rates,
            rate_grid,
            designs,
            oracle,
            oracle_budget,
            seed,
            exact,
            float,
            out,
        } => {
            let overrides = Overrides {
                source,
                problem,
                rates,
                rate_grid,
                designs,
                oracle,
                oracle_budget,
                seed,
                exact,
                float,
                out,
            };
            config::resolve(config.as_deref(), &overrides)
                .and_then(|cfg| runner::cmd_run(&cfg))
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("fairmech: {e}");
            e.exit_code()
        }
    }
}
