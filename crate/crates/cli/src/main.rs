use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

/// Separability analysis of bipartite quantum states.
#[derive(Debug, Parser)]
#[command(name = "sepscope", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the entanglement criteria and report a classification.
    Analyze {
        #[command(flatten)]
        source: Source,
        /// Comma-separated subset of criteria to report.
        #[arg(long, value_delimiter = ',')]
        criteria: Option<Vec<String>>,
        /// Also run the rank-one search with this seed.
        #[arg(long)]
        search_seed: Option<u64>,
    },
    /// Print the Kraus operators of a state's ensemble.
    Kraus {
        #[command(flatten)]
        source: Source,
        /// Use the spectral ensemble even when the state comes with its own.
        #[arg(long)]
        spectral: bool,
    },
    /// Print a closed-form separable decomposition.
    Decompose {
        #[arg(long)]
        family: Family,
        /// Fidelity for the isotropic family.
        #[arg(long = "F", alias = "fidelity")]
        fidelity: Option<f64>,
    },
    /// Search for a mixing matrix with rank-one transformed operators.
    Search {
        #[command(flatten)]
        source: Source,
        /// Number of rows of the mixing matrix.
        #[arg(long)]
        terms: Option<usize>,
        #[arg(long, default_value_t = 64)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = sepscope::decompose::DEFAULT_MAX_ITERS)]
        max_iters: usize,
    },
    /// Check a decomposition file against a state.
    Verify {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        decomposition: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// List the built-in named states.
    ListStates,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Family {
    Isotropic,
    BellMixture,
}

/// Either a named state with parameters or a JSON state/ensemble file.
#[derive(Debug, Clone, Args)]
struct Source {
    #[arg(long, conflicts_with = "input")]
    state: Option<String>,
    /// JSON state or ensemble file.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long = "F", alias = "fidelity")]
    fidelity: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    sign: Option<String>,
    #[arg(long)]
    dim_a: Option<usize>,
    #[arg(long)]
    dim_b: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok((json, code)) => {
            let mut out = std::io::stdout().lock();
            match writeln!(out, "{json}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
                _ => ExitCode::from(code),
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
