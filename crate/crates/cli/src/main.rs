//! `aal`: command-line front end for finite matrices and rule sets.
//!
//! Exit codes: 0 for success or a true verdict, 1 for a false verdict (with
//! its witness), 2 for usage errors, 3 when a cap is exceeded and 4 when a
//! fixture cannot be read.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use aal_core::matrix::Caps;
use aal_core::Error;

#[derive(Parser, Debug)]
#[command(name = "aal", version, about = "Finite logical matrices, congruences and consequence")]
struct Cli {
    /// Valuations enumerated by a single consequence check.
    #[arg(long, global = true)]
    max_valuations: Option<u128>,
    /// Cells of a term-function table (elements × tuples).
    #[arg(long, global = true)]
    max_cells: Option<u128>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide a sequent `A1, ..., An |- B` in a matrix or g-matrix.
    Check { matrix: PathBuf, sequent: String },
    /// List the theorems over p1..pk up to a depth.
    Theorems {
        matrix: PathBuf,
        #[arg(long = "vars", default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 2)]
        depth: usize,
    },
    /// The Leibniz congruence of a matrix.
    Leibniz { matrix: PathBuf },
    /// The Leibniz reduction of a matrix.
    Reduce {
        matrix: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// The term-function algebra F(k) of an algebra.
    Free {
        algebra: PathBuf,
        #[arg(long = "vars", default_value_t = 1)]
        k: usize,
    },
    /// The Lindenbaum–Tarski quotient of F(k) and the canonical valuation check.
    Lt {
        matrix: PathBuf,
        #[arg(long = "vars", default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 3)]
        depth: usize,
    },
    /// Frege, Suszko, Leibniz and Tarski relations on every closed set of F(k).
    Congruences {
        matrix: PathBuf,
        #[arg(long = "vars", default_value_t = 1)]
        k: usize,
    },
    /// Pairs of F(k) that imply each other through `arrow` as tautologies.
    Rasiowa {
        matrix: PathBuf,
        #[arg(long)]
        arrow: String,
        #[arg(long = "vars", default_value_t = 1)]
        k: usize,
    },
    /// Check the five implicative clauses for `arrow` over every S-filter.
    Implicative {
        matrix: PathBuf,
        #[arg(long)]
        arrow: String,
    },
    /// Decide whether two g-matrices define the same consequence relation.
    Equiv { first: PathBuf, second: PathBuf },
    /// Whether a matrix is a model of every rule of a rule set.
    ModelCheck { matrix: PathBuf, rules: PathBuf },
    /// Search for a derivation of a goal from hypotheses.
    Derive {
        rules: PathBuf,
        #[arg(long)]
        goal: String,
        #[arg(long = "hyp")]
        hyps: Vec<String>,
        #[arg(long, default_value_t = 7)]
        depth: usize,
        #[arg(long, default_value_t = 32)]
        max_size: usize,
    },
    /// Search for a matrix showing an axiom independent of the other rules.
    Independence {
        rules: PathBuf,
        #[arg(long)]
        target: String,
        #[arg(long, default_value_t = 3)]
        size_bound: usize,
        #[arg(long, default_value_t = 7)]
        depth: usize,
    },
    /// The closed sets of the reduct consequence on F(k).
    ClosedSets {
        matrix: PathBuf,
        #[arg(long = "vars", default_value_t = 1)]
        k: usize,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::CapExceeded { .. } => 3,
        Error::Fixture(_) => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut caps = Caps::default();
    if let Some(v) = cli.max_valuations {
        caps.max_valuations = v;
    }
    if let Some(v) = cli.max_cells {
        caps.max_cells = v;
    }
    match commands::run(cli.command, &caps) {
        Ok(report) => {
            print!("{}", report.render(cli.format));
            ExitCode::from(if report.verdict { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
