//! `sortnet`: encode, solve, search, verify and render comparator networks.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::Status;

#[derive(Debug, Parser)]
#[command(name = "sortnet", version, about = "SAT-based synthesis and verification of comparator networks")]
struct Cli {
    /// More log output on stderr; repeat for more.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    /// Only log errors.
    #[arg(short, long, global = true, conflicts_with = "verbose")]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the DIMACS encoding of a problem and its variable map.
    Encode(EncodeArgs),
    /// Decide a problem and write a certified witness if one exists.
    Solve(SolveArgs),
    /// Certify a network against a class by checking every binary input.
    Verify(VerifyArgs),
    /// Draw a network as ASCII art.
    Render(RenderArgs),
    /// Search the optimal size, depth or (size, depth) combinations.
    Search(SearchArgs),
    /// Reproduce the optimal depth, size and (size, depth) tables.
    Tables(TablesArgs),
    /// List or export the bundled reference networks.
    Figures(FiguresArgs),
    /// Solve a DIMACS file with the embedded solver, in the usual SAT
    /// competition output format and exit codes (10 SAT, 20 UNSAT).
    Sat(SatArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ClassArg {
    Sorting,
    SingleException,
    Halver,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ClauseFormArg {
    Merged,
    PerComparator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OneHotArg {
    Pairwise,
    Ladder,
}

#[derive(Debug, Args)]
struct ClassSpec {
    /// Network class.
    #[arg(long, value_enum)]
    class: ClassArg,

    /// Halver approximation factor as an exact fraction such as 1/4.
    #[arg(long, value_name = "NUM/DEN")]
    eps: Option<String>,
}

#[derive(Debug, Args)]
struct ProblemArgs {
    /// Number of channels.
    #[arg(long)]
    n: usize,

    #[command(flatten)]
    class: ClassSpec,

    /// Number of comparators.
    #[arg(long, conflicts_with = "depth", required_unless_present = "depth")]
    size: Option<usize>,

    /// Number of layers.
    #[arg(long)]
    depth: Option<usize>,

    /// sfwd, sbck, dfwd or dbck. Defaults to the usual choice for the class.
    #[arg(long)]
    encoding: Option<String>,

    /// Upper bound on the comparator count of a fixed-depth problem.
    #[arg(long)]
    size_cap: Option<usize>,

    /// Only allow halver comparators between the two halves.
    #[arg(long)]
    cross_half: bool,

    /// Order adjacent independent comparators (fixed-size problems).
    #[arg(long)]
    canonical_order: bool,

    /// Forbid comparators that could be deleted without leaving the class
    /// (dfwd only).
    #[arg(long)]
    prune_redundant: bool,

    /// Keep only one of each network and its mirror image (fixed-depth
    /// problems).
    #[arg(long)]
    break_reflection: bool,

    #[arg(long, value_enum, default_value = "merged")]
    forward_clauses: ClauseFormArg,

    #[arg(long, value_enum, default_value = "per-comparator")]
    backward_clauses: ClauseFormArg,

    #[arg(long, value_enum, default_value = "pairwise")]
    comparator_one_hot: OneHotArg,

    #[arg(long, value_enum, default_value = "ladder")]
    unsorted_one_hot: OneHotArg,
}

#[derive(Debug, Args)]
struct SolverArgs {
    /// External solver command, for example "kissat -q". The DIMACS path is
    /// appended. "embedded" selects the built-in solver, which is also the
    /// default unless SORTNET_SOLVER is set.
    #[arg(long, value_name = "COMMAND")]
    solver: Option<String>,

    /// Seconds allowed per solver call.
    #[arg(long, value_name = "SECS")]
    time_limit: Option<f64>,

    /// Directory for DIMACS files handed to an external solver.
    #[arg(long)]
    temp_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EncodeArgs {
    #[command(flatten)]
    problem: ProblemArgs,

    /// DIMACS output; standard output if omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,

    /// JSON map from variable names to DIMACS indices.
    #[arg(long)]
    varmap: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,

    #[command(flatten)]
    solver: SolverArgs,

    /// Where the witness network is written when the problem is SAT.
    #[arg(long, default_value = "witness.json")]
    witness: PathBuf,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Network JSON file.
    #[arg(long)]
    network: PathBuf,

    #[command(flatten)]
    class: ClassSpec,
}

#[derive(Debug, Args)]
struct RenderArgs {
    /// Network JSON file.
    #[arg(long)]
    network: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ObjectiveArg {
    Size,
    Depth,
    SizeDepth,
}

#[derive(Debug, Args)]
struct BudgetArgs {
    /// Seconds allowed per solver call.
    #[arg(long, value_name = "SECS", default_value_t = 600.0)]
    per_instance: f64,

    /// Seconds allowed per search.
    #[arg(long, value_name = "SECS")]
    total: Option<f64>,

    /// Largest bound to try.
    #[arg(long)]
    max_bound: Option<usize>,

    /// Solve the full formulas, without the canonical comparator order, the
    /// merged backward clauses, reflection breaking and redundancy pruning.
    #[arg(long)]
    plain: bool,

    /// Do not seed open cases with published bounds.
    #[arg(long)]
    no_reference_hints: bool,

    /// External solver command; see `solve --help`.
    #[arg(long, value_name = "COMMAND")]
    solver: Option<String>,

    #[arg(long)]
    temp_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SearchArgs {
    #[arg(long)]
    n: usize,

    #[command(flatten)]
    class: ClassSpec,

    #[arg(long, value_enum)]
    objective: ObjectiveArg,

    /// Encoding for size or depth searches.
    #[arg(long)]
    encoding: Option<String>,

    #[command(flatten)]
    budget: BudgetArgs,

    /// Where the best witness is written.
    #[arg(long)]
    witness: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TableArg {
    Depth,
    Size,
    SizeDepth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Markdown,
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct TablesArgs {
    /// Smallest channel count.
    #[arg(long, default_value_t = 2)]
    from: usize,

    /// Largest channel count.
    #[arg(long, default_value_t = 6)]
    to: usize,

    /// Tables to produce; all by default.
    #[arg(long, value_enum, value_delimiter = ',')]
    only: Vec<TableArg>,

    #[arg(long, value_enum, default_value = "markdown")]
    format: FormatArg,

    /// Output file; standard output if omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,

    /// Directory receiving one JSON file per witness.
    #[arg(long)]
    witness_dir: Option<PathBuf>,

    /// Concurrent searches.
    #[arg(long, default_value_t = 1)]
    jobs: usize,

    #[command(flatten)]
    budget: BudgetArgs,
}

#[derive(Debug, Args)]
struct FiguresArgs {
    /// Write every network as `<name>.json` into this directory instead of
    /// listing them.
    #[arg(long)]
    export: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SatArgs {
    /// DIMACS CNF file.
    input: PathBuf,

    /// Seconds before giving up with UNKNOWN.
    #[arg(long, value_name = "SECS")]
    time_limit: Option<f64>,
}

fn init_logging(verbose: u8, quiet: bool) {
    let level = match (quiet, verbose) {
        (true, _) => log::LevelFilter::Error,
        (false, 0) => log::LevelFilter::Warn,
        (false, 1) => log::LevelFilter::Info,
        (false, 2) => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .format_timestamp(None)
        .init();
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { Status::Usage } else { Status::Ok };
            // Printing help or a usage error can only fail on a closed pipe.
            let _ = e.print();
            return code.into();
        }
    };
    init_logging(cli.verbose, cli.quiet);
    match commands::run(cli.command) {
        Ok(status) => status.into(),
        Err(e) => {
            let status = commands::classify(&e);
            eprintln!("error: {e:#}");
            status.into()
        }
    }
}
