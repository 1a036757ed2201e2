use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use sortnet::cnf::{self, OneHot};
use sortnet::encodings::{self, ClauseForm, Encoding, EncodingOptions, ProblemSpec, Shape};
use sortnet::render::render_ascii;
use sortnet::search::{self, Budget, Searcher, TableSelection};
use sortnet::solver::{self, cdcl, SolverConfig, SpecVerdict};
use sortnet::{certify, figures, Error, LayeredNetwork, NetworkClass, Ratio};

use crate::{
    BudgetArgs, ClassArg, ClassSpec, ClauseFormArg, Command, EncodeArgs, FiguresArgs, FormatArg, ObjectiveArg,
    OneHotArg, ProblemArgs, RenderArgs, SatArgs, SearchArgs, SolveArgs, TableArg, TablesArgs, VerifyArgs,
};

/// Process outcome, mapped onto the exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    /// SAT, verified, optimum found or plain success.
    Ok,
    Usage,
    Failure,
    Unknown,
    /// UNSAT or refuted.
    Negative,
    /// `sat` subcommand only.
    Satisfiable,
}

impl From<Status> for ExitCode {
    fn from(s: Status) -> Self {
        ExitCode::from(match s {
            Status::Ok => 0,
            Status::Usage => 1,
            Status::Failure => 2,
            Status::Unknown => 3,
            Status::Satisfiable => 10,
            Status::Negative => 20,
        })
    }
}

/// Argument problems are usage errors, everything else is a runtime error.
pub fn classify(e: &anyhow::Error) -> Status {
    match e.downcast_ref::<Error>() {
        Some(Error::InvalidArgument(_) | Error::InvalidProblem(_)) => Status::Usage,
        _ => Status::Failure,
    }
}

pub fn run(command: Command) -> Result<Status> {
    match command {
        Command::Encode(args) => encode(args),
        Command::Solve(args) => solve(args),
        Command::Verify(args) => verify(args),
        Command::Render(args) => render(args),
        Command::Search(args) => search_cmd(args),
        Command::Tables(args) => tables(args),
        Command::Figures(args) => figures_cmd(args),
        Command::Sat(args) => sat(args),
    }
}

fn class_of(spec: &ClassSpec) -> Result<NetworkClass> {
    let class = match (spec.class, &spec.eps) {
        (ClassArg::Halver, Some(eps)) => NetworkClass::Halver { epsilon: eps.parse::<Ratio>()? },
        (ClassArg::Halver, None) => return Err(Error::InvalidArgument("--class halver needs --eps NUM/DEN".into()).into()),
        (_, Some(_)) => return Err(Error::InvalidArgument("--eps applies to --class halver only".into()).into()),
        (ClassArg::Sorting, None) => NetworkClass::Sorting,
        (ClassArg::SingleException, None) => NetworkClass::SingleException,
    };
    Ok(class)
}

fn clause_form(arg: ClauseFormArg) -> ClauseForm {
    match arg {
        ClauseFormArg::Merged => ClauseForm::Merged,
        ClauseFormArg::PerComparator => ClauseForm::PerComparator,
    }
}

fn one_hot(arg: OneHotArg) -> OneHot {
    match arg {
        OneHotArg::Pairwise => OneHot::Pairwise,
        OneHotArg::Ladder => OneHot::Ladder,
    }
}

fn parse_encoding(text: &Option<String>) -> Result<Option<Encoding>> {
    Ok(match text {
        Some(t) => Some(t.parse::<Encoding>()?),
        None => None,
    })
}

fn problem_spec(args: &ProblemArgs) -> Result<ProblemSpec> {
    let class = class_of(&args.class)?;
    let shape = match (args.size, args.depth) {
        (Some(s), None) => Shape::Size(s),
        (None, Some(d)) => Shape::Depth(d),
        _ => return Err(Error::InvalidArgument("give exactly one of --size and --depth".into()).into()),
    };
    let encoding = parse_encoding(&args.encoding)?.unwrap_or_else(|| Encoding::default_for(class, shape.is_depth()));
    let options = EncodingOptions {
        size_cap: args.size_cap,
        cross_half_only: args.cross_half,
        comparator_one_hot: one_hot(args.comparator_one_hot),
        unsorted_one_hot: one_hot(args.unsorted_one_hot),
        forward_clauses: clause_form(args.forward_clauses),
        backward_clauses: clause_form(args.backward_clauses),
        canonical_order: args.canonical_order,
        prune_redundant: args.prune_redundant,
        break_reflection: args.break_reflection,
    };
    let spec = ProblemSpec::new(args.n, class, shape, encoding).with_options(options);
    spec.validate()?;
    Ok(spec)
}

fn seconds(value: f64, flag: &str) -> Result<Duration> {
    Duration::try_from_secs_f64(value)
        .map_err(|_| Error::InvalidArgument(format!("{flag} must be a non-negative number of seconds")).into())
}

fn solver_config(command: &Option<String>, time_limit: Option<f64>, temp_dir: &Option<std::path::PathBuf>) -> Result<SolverConfig> {
    let cfg = match command.as_deref().map(str::trim) {
        Some("embedded") => SolverConfig::embedded(),
        Some(cmd) => SolverConfig::external_from_str(cmd)?,
        None => SolverConfig::from_env()?,
    };
    let limit = time_limit.map(|t| seconds(t, "--time-limit")).transpose()?;
    Ok(cfg.with_time_limit(limit).with_temp_dir(temp_dir.clone()))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn write_output(path: &Option<std::path::PathBuf>, contents: &str) -> Result<()> {
    match path {
        Some(p) => write_file(p, contents),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(contents.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn read_network(path: &Path) -> Result<LayeredNetwork> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    LayeredNetwork::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn encode(args: EncodeArgs) -> Result<Status> {
    let spec = problem_spec(&args.problem)?;
    let enc = encodings::build(&spec)?;
    log::info!(
        "{spec}: {} vars ({} comparator, {} state, {} auxiliary), {} clauses",
        enc.stats.num_vars,
        enc.stats.comparator_vars,
        enc.stats.state_vars,
        enc.stats.aux_vars,
        enc.stats.num_clauses
    );
    write_output(&args.output, &cnf::write_dimacs(&enc.formula))?;
    if let Some(path) = &args.varmap {
        write_file(path, &enc.pool.to_json())?;
    }
    Ok(Status::Ok)
}

fn solve(args: SolveArgs) -> Result<Status> {
    let spec = problem_spec(&args.problem)?;
    let cfg = solver_config(&args.solver.solver, args.solver.time_limit, &args.solver.temp_dir)?;
    log::info!("solving {spec} with {}", cfg.describe());
    let outcome = solver::solve_spec(&spec, &cfg)?;
    let status = match &outcome.verdict {
        SpecVerdict::Sat(w) => {
            // solve_spec only returns SAT with a passing certification.
            if !w.certification.verdict {
                bail!("witness failed certification");
            }
            write_file(&args.witness, &w.network.to_json())?;
            log::info!("witness written to {}", args.witness.display());
            Status::Ok
        }
        SpecVerdict::Unsat => Status::Negative,
        SpecVerdict::Unknown { reason } => {
            log::warn!("no verdict: {reason}");
            Status::Unknown
        }
    };
    print!("{}", to_json(&outcome)?);
    Ok(status)
}

fn verify(args: VerifyArgs) -> Result<Status> {
    let class = class_of(&args.class)?;
    let net = read_network(&args.network)?;
    let record = certify(&net, class)?;
    print!("{}", to_json(&record)?);
    Ok(if record.verdict { Status::Ok } else { Status::Negative })
}

fn render(args: RenderArgs) -> Result<Status> {
    let net = read_network(&args.network)?;
    print!("{}", render_ascii(&net));
    Ok(Status::Ok)
}

fn searcher(args: &BudgetArgs) -> Result<Searcher> {
    let cfg = solver_config(&args.solver, None, &args.temp_dir)?;
    let budget = Budget::unlimited()
        .with_per_instance(Some(seconds(args.per_instance, "--per-instance")?))
        .with_total(args.total.map(|t| seconds(t, "--total")).transpose()?)
        .with_max_bound(args.max_bound);
    let mut s = Searcher::new(cfg, budget).with_compact(!args.plain);
    if !args.no_reference_hints {
        s = s.with_reference_hints();
    }
    Ok(s)
}

fn search_cmd(args: SearchArgs) -> Result<Status> {
    let class = class_of(&args.class)?;
    let encoding = parse_encoding(&args.encoding)?;
    let s = searcher(&args.budget)?;
    let (json, witness, closed) = match args.objective {
        ObjectiveArg::Size | ObjectiveArg::Depth => {
            let r = if args.objective == ObjectiveArg::Size {
                s.optimal_size(args.n, class, encoding)?
            } else {
                s.optimal_depth(args.n, class, encoding)?
            };
            eprintln!("{r}");
            (to_json(&r)?, r.witness.as_ref().map(|w| w.network.clone()), r.optimum().is_some())
        }
        ObjectiveArg::SizeDepth => {
            if encoding.is_some() {
                return Err(Error::InvalidArgument("joint searches always use the backward depth encoding".into()).into());
            }
            let r = s.pareto_size_depth(args.n, class)?;
            eprintln!("{class} (size, depth) n={}: {}", args.n, r.value_label());
            (to_json(&r)?, r.points.first().map(|p| p.witness.network.clone()), r.complete)
        }
    };
    if let (Some(path), Some(net)) = (&args.witness, &witness) {
        write_file(path, &net.to_json())?;
    }
    print!("{json}");
    Ok(if closed { Status::Ok } else { Status::Unknown })
}

fn tables(args: TablesArgs) -> Result<Status> {
    if args.from < 2 || args.from > args.to {
        return Err(Error::InvalidArgument(format!("empty or invalid channel range {}..={}", args.from, args.to)).into());
    }
    let select = if args.only.is_empty() {
        TableSelection::default()
    } else {
        TableSelection {
            depth: args.only.contains(&TableArg::Depth),
            size: args.only.contains(&TableArg::Size),
            pareto: args.only.contains(&TableArg::SizeDepth),
        }
    };
    let s = searcher(&args.budget)?;
    let channels: Vec<usize> = (args.from..=args.to).collect();
    let started = Instant::now();
    let t = search::tables(&s, &channels, select, args.jobs)?;
    log::info!("tables done in {:.1}s", started.elapsed().as_secs_f64());
    let text = match args.format {
        FormatArg::Markdown => t.to_markdown(),
        FormatArg::Csv => t.to_csv()?,
        FormatArg::Json => to_json(&t)?,
    };
    write_output(&args.output, &text)?;
    if let Some(dir) = &args.witness_dir {
        for r in t.depth.iter().chain(&t.size) {
            if let Some(w) = &r.witness {
                let name = match r.objective {
                    search::Objective::Depth => format!("depth_{}_n{}_d{}.json", r.class, r.n, w.network.depth()),
                    search::Objective::Size => format!("size_{}_n{}_s{}.json", r.class, r.n, w.network.size()),
                };
                write_file(&dir.join(name), &w.network.to_json())?;
            }
        }
        for r in &t.pareto {
            for p in &r.points {
                let name = format!("size-depth_{}_n{}_s{}_d{}.json", r.class, r.n, p.size, p.depth);
                write_file(&dir.join(name), &p.witness.network.to_json())?;
            }
        }
    }
    let closed = t.depth.iter().chain(&t.size).all(|r| r.optimum().is_some()) && t.pareto.iter().all(|r| r.complete);
    Ok(if closed { Status::Ok } else { Status::Unknown })
}

fn figures_cmd(args: FiguresArgs) -> Result<Status> {
    for fig in figures::all() {
        match &args.export {
            Some(dir) => write_file(&dir.join(format!("{}.json", fig.name)), fig.json)?,
            None => println!("{}\t{}\tn={}\tdepth={}\tsize={}", fig.name, fig.class, fig.n(), fig.depth, fig.size),
        }
    }
    Ok(Status::Ok)
}

fn sat(args: SatArgs) -> Result<Status> {
    let text = fs::read_to_string(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let formula = cnf::parse_dimacs(&text)?;
    let deadline = args
        .time_limit
        .map(|t| seconds(t, "--time-limit"))
        .transpose()?
        .map(|limit| Instant::now() + limit);
    let (outcome, stats) = cdcl::solve(&formula, deadline);
    log::info!("{stats:?}");
    let mut out = std::io::stdout().lock();
    let status = match outcome {
        cdcl::Outcome::Sat(values) => {
            writeln!(out, "s SATISFIABLE")?;
            let mut line = String::from("v");
            for (i, v) in values.iter().enumerate() {
                let lit = if *v { i as i64 + 1 } else { -(i as i64 + 1) };
                line.push_str(&format!(" {lit}"));
                if line.len() > 72 {
                    writeln!(out, "{line}")?;
                    line = String::from("v");
                }
            }
            writeln!(out, "{line} 0")?;
            Status::Satisfiable
        }
        cdcl::Outcome::Unsat => {
            writeln!(out, "s UNSATISFIABLE")?;
            Status::Negative
        }
        cdcl::Outcome::Interrupted => {
            writeln!(out, "s UNKNOWN")?;
            Status::Ok
        }
    };
    out.flush()?;
    Ok(status)
}
