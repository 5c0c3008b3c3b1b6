//! `posiform`: generate hardware graphs, plant QUBO instances with a unique
//! optimum, verify them, run classical samplers and tabulate GSP/TTS.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

/// Exit status for verification and run failures.
const EXIT_FAILURE: u8 = 1;
/// Exit status for bad arguments; matches clap's own.
const EXIT_USAGE: u8 = 2;

/// Number of worker threads when no `--threads` flag is given.
const THREADS_ENV: &str = "POSIFORM_THREADS";

#[derive(Parser)]
#[command(name = "posiform", version, about = "Planted-solution QUBO generator and benchmark harness")]
struct Cli {
    /// Worker threads (default: $POSIFORM_THREADS, else one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a connectivity graph as an edge list.
    Graph(GraphArgs),
    /// Plant instances with a unique optimum.
    Plant(PlantArgs),
    /// Check instance files: planted energy and, when small enough, uniqueness.
    Verify(VerifyArgs),
    /// Run a sampler on an instance.
    Solve(SolveArgs),
    /// Tabulate GSP and TTS from sample-set files.
    Eval(EvalArgs),
    /// Coefficient statistics of instance files as CSV.
    Stats(StatsArgs),
}

#[derive(Args)]
pub struct GraphArgs {
    #[command(subcommand)]
    pub kind: GraphKind,

    /// Dead qubits to remove at random.
    #[arg(long, global = true, default_value_t = 0)]
    pub defect_nodes: usize,

    /// Dead couplers to remove at random after the qubits.
    #[arg(long, global = true, default_value_t = 0)]
    pub defect_edges: usize,

    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Output file; the edge list goes to stdout when absent.
    #[arg(short, long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Clone)]
pub enum GraphKind {
    /// m x m grid of K_{t,t} cells.
    Chimera {
        m: usize,
        #[arg(long, default_value_t = 4)]
        tile: usize,
    },
    /// Pegasus P_m, main fabric.
    Pegasus { m: usize },
    /// Zephyr Z_{m,t}.
    Zephyr {
        m: usize,
        #[arg(long, default_value_t = 4)]
        tile: usize,
    },
    /// Complete graph K_n.
    Complete { n: usize },
    /// Erdos-Renyi G(n, p).
    Random {
        n: usize,
        #[arg(long)]
        density: f64,
    },
    /// A catalogued annealer: its topology thinned to the chip's qubit and
    /// coupler counts.
    Hardware { chip: String },
}

#[derive(Args)]
pub struct PlantArgs {
    /// Number of variables on the complete graph.
    #[arg(short = 'n', long, conflicts_with_all = ["graph", "topology"])]
    pub num_vars: Option<usize>,

    /// Edge-list file restricting the clause pairs.
    #[arg(long, conflicts_with = "topology")]
    pub graph: Option<PathBuf>,

    /// Generated graph: chimera:M, pegasus:M, zephyr:M, complete:N,
    /// random:N:P or hardware:CHIP.
    #[arg(long)]
    pub topology: Option<String>,

    /// `random`, a bitstring such as `101`, or `@FILE` holding one.
    #[arg(long, default_value = "random")]
    pub planted: String,

    /// Clauses sampled before the first uniqueness check (default: n, or
    /// the chip's batch for hardware topologies).
    #[arg(short = 'B', long)]
    pub batch_size: Option<usize>,

    /// Comma-separated positive posiform coefficients to draw from.
    #[arg(long, default_value = "1,2", value_delimiter = ',')]
    pub coeffs: Vec<f64>,

    /// Give up after this many clauses (default 100 n).
    #[arg(long)]
    pub max_clauses: Option<usize>,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, default_value_t = 1)]
    pub count: usize,

    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,

    /// File name stem; files are named PREFIX-0000.json and so on.
    #[arg(long, default_value = "instance")]
    pub prefix: String,

    /// Drop isolated or dead nodes and renumber the rest. The original
    /// index of each variable is written to PREFIX.nodes.
    #[arg(long)]
    pub compact: bool,

    /// Also write the 2-SAT formula as DIMACS CNF next to each instance.
    #[arg(long)]
    pub dimacs: bool,
}

#[derive(Args)]
pub struct VerifyArgs {
    #[arg(required = true)]
    pub instances: Vec<PathBuf>,

    /// Largest instance checked by exhaustive enumeration.
    #[arg(long, default_value_t = posiform::model::DEFAULT_EXHAUSTIVE_CAP)]
    pub exhaustive_cap: usize,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Sampler {
    Sa,
    Greedy,
    Exhaustive,
}

#[derive(Args)]
pub struct SolveArgs {
    pub instance: PathBuf,

    #[arg(value_enum)]
    pub sampler: Sampler,

    #[arg(long, default_value_t = 800)]
    pub reads: usize,

    #[arg(long, default_value_t = 1000)]
    pub sweeps: usize,

    /// Inverse temperatures `LO,HI` (derived from the instance when absent).
    #[arg(long, value_delimiter = ',', num_args = 2)]
    pub beta_range: Option<Vec<f64>>,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Output path: `.csv` writes one row per read, anything else JSON.
    /// CSV goes to stdout when absent.
    #[arg(short, long)]
    pub out: Option<PathBuf>,

    /// `work` leaves wall time out of the file so reruns are byte-identical.
    #[arg(long, default_value = "wall")]
    pub time_source: String,

    #[arg(long, default_value_t = posiform::model::DEFAULT_EXHAUSTIVE_CAP)]
    pub exhaustive_cap: usize,
}

#[derive(Args)]
pub struct EvalArgs {
    /// Sample-set JSON files written by `solve`.
    #[arg(required = true)]
    pub samplesets: Vec<PathBuf>,

    #[arg(short, long)]
    pub out: Option<PathBuf>,

    /// `wall`, `work`, or `auto` (wall time when the file has it).
    #[arg(long, default_value = "auto")]
    pub time_source: String,
}

#[derive(Args)]
pub struct StatsArgs {
    #[arg(required = true)]
    pub instances: Vec<PathBuf>,

    /// One row per coefficient instead of one per instance.
    #[arg(long)]
    pub terms: bool,

    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

/// How a command ended unsuccessfully.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Failed(String),
}

impl From<posiform::Error> for Failure {
    fn from(e: posiform::Error) -> Self {
        use posiform::Error as E;
        match e {
            E::Config(_) | E::Range(_) | E::SizeCap { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Failed(e.to_string()),
        }
    }
}

fn configure_threads(flag: Option<usize>) -> Result<(), Failure> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => Some(v.trim().parse().map_err(|_| {
                Failure::Usage(format!("{THREADS_ENV}={v:?} is not a thread count"))
            })?),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Failed(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads(cli.threads).and_then(|()| match cli.command {
        Command::Graph(a) => commands::graph(a),
        Command::Plant(a) => commands::plant(a),
        Command::Verify(a) => commands::verify(a),
        Command::Solve(a) => commands::solve(a),
        Command::Eval(a) => commands::eval(a),
        Command::Stats(a) => commands::stats(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Failed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}
