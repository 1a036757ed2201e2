//! Running formulas through a SAT solver and turning models into networks.
//!
//! Two backends are available. [`SolverMode::External`] writes the formula
//! as DIMACS and runs any solver that follows the SAT-competition output
//! conventions; [`SolverMode::Embedded`] runs the built-in [`cdcl`] solver
//! in process. Every satisfying assignment is checked against the formula,
//! and [`solve_spec`] additionally certifies the decoded network by
//! exhaustive simulation before reporting it.

pub mod cdcl;

use std::fs;
use std::io::{Read as _, Seek as _, Write as _};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::cnf::{parse_solver_output, write_dimacs, CnfFormula, Model, SolverStatus, SolverVerdict, VarKey, VarPool};
use crate::encodings::{self, EncodingStats, ProblemSpec, Shape};
use crate::error::{Error, Result};
use crate::network::{certify, CertificationRecord, Comparator, LayeredNetwork, NetworkClass};

/// Environment variable holding the default external solver command,
/// for example `kissat -q` or `/opt/glucose/glucose`.
pub const SOLVER_ENV: &str = "SORTNET_SOLVER";

/// Default limit on the clause count accepted by the embedded solver.
pub const DEFAULT_EMBEDDED_CLAUSE_CAP: usize = 4_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolverMode {
    Embedded,
    /// Program and leading arguments; the DIMACS path is appended.
    External { command: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverConfig {
    pub mode: SolverMode,
    pub time_limit: Option<Duration>,
    /// Where DIMACS files for the external solver are written. Defaults to
    /// a `sortnet` directory under the system temp directory.
    pub temp_dir: Option<PathBuf>,
    pub max_embedded_clauses: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self::embedded()
    }
}

impl SolverConfig {
    pub fn embedded() -> Self {
        Self {
            mode: SolverMode::Embedded,
            time_limit: None,
            temp_dir: None,
            max_embedded_clauses: DEFAULT_EMBEDDED_CLAUSE_CAP,
        }
    }

    pub fn external(command: Vec<String>) -> Result<Self> {
        if command.is_empty() {
            return Err(Error::InvalidArgument("empty solver command".into()));
        }
        Ok(Self {
            mode: SolverMode::External { command },
            ..Self::embedded()
        })
    }

    /// Parses a whitespace-separated command line.
    pub fn external_from_str(command: &str) -> Result<Self> {
        Self::external(command.split_whitespace().map(str::to_owned).collect())
    }

    /// External mode when [`SOLVER_ENV`] is set and non-empty, embedded
    /// otherwise.
    pub fn from_env() -> Result<Self> {
        match std::env::var(SOLVER_ENV) {
            Ok(cmd) if !cmd.trim().is_empty() => Self::external_from_str(&cmd),
            _ => Ok(Self::embedded()),
        }
    }

    pub fn with_time_limit(mut self, limit: Option<Duration>) -> Self {
        self.time_limit = limit;
        self
    }

    pub fn with_temp_dir(mut self, dir: Option<PathBuf>) -> Self {
        self.temp_dir = dir;
        self
    }

    pub fn describe(&self) -> String {
        match &self.mode {
            SolverMode::Embedded => "embedded".into(),
            SolverMode::External { command } => command.join(" "),
        }
    }
}

/// Solves `formula`. A time-out yields [`SolverVerdict::Unknown`].
pub fn solve(formula: &CnfFormula, cfg: &SolverConfig) -> Result<SolverVerdict> {
    let verdict = match &cfg.mode {
        SolverMode::Embedded => solve_embedded(formula, cfg)?,
        SolverMode::External { command } => solve_external(formula, command, cfg)?,
    };
    if let SolverVerdict::Sat(model) = &verdict {
        if !model.satisfies(formula) {
            return Err(Error::Solver(format!(
                "{} returned an assignment that violates the formula",
                cfg.describe()
            )));
        }
    }
    Ok(verdict)
}

fn solve_embedded(formula: &CnfFormula, cfg: &SolverConfig) -> Result<SolverVerdict> {
    if formula.num_clauses() > cfg.max_embedded_clauses {
        return Err(Error::FormulaTooLarge {
            clauses: formula.num_clauses(),
            cap: cfg.max_embedded_clauses,
        });
    }
    let deadline = cfg.time_limit.map(|t| Instant::now() + t);
    let (outcome, stats) = cdcl::solve(formula, deadline);
    log::debug!("embedded solver: {stats:?}");
    Ok(match outcome {
        cdcl::Outcome::Sat(values) => SolverVerdict::Sat(Model::new(values)),
        cdcl::Outcome::Unsat => SolverVerdict::Unsat,
        cdcl::Outcome::Interrupted => SolverVerdict::Unknown(format!(
            "time limit of {:.1}s reached after {} conflicts",
            cfg.time_limit.unwrap_or_default().as_secs_f64(),
            stats.conflicts
        )),
    })
}

fn resolve_program(program: &str) -> Result<PathBuf> {
    let candidate = Path::new(program);
    if candidate.components().count() > 1 {
        return if candidate.is_file() {
            Ok(candidate.to_path_buf())
        } else {
            Err(Error::SolverNotFound(program.into()))
        };
    }
    std::env::var_os("PATH")
        .iter()
        .flat_map(std::env::split_paths)
        .map(|dir| dir.join(program))
        .find(|p| p.is_file())
        .ok_or_else(|| Error::SolverNotFound(program.into()))
}

/// Writes the DIMACS text of `formula` to `<dir>/<sha256>.cnf`, reusing an
/// existing file with the same name.
pub fn write_content_addressed(formula: &CnfFormula, dir: &Path) -> Result<PathBuf> {
    let text = write_dimacs(formula);
    let digest = hex::encode(Sha256::digest(text.as_bytes()));
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("{digest}.cnf"));
    if !path.is_file() {
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        tmp.write_all(text.as_bytes())?;
        tmp.persist(&path).map_err(|e| e.error)?;
    }
    Ok(path)
}

fn default_temp_dir() -> PathBuf {
    std::env::temp_dir().join("sortnet")
}

fn solve_external(formula: &CnfFormula, command: &[String], cfg: &SolverConfig) -> Result<SolverVerdict> {
    let program = resolve_program(&command[0])?;
    let dir = cfg.temp_dir.clone().unwrap_or_else(default_temp_dir);
    let path = write_content_addressed(formula, &dir)?;
    let mut stdout = tempfile::tempfile_in(&dir)?;
    let mut stderr = tempfile::tempfile_in(&dir)?;
    let mut child = Command::new(&program)
        .args(&command[1..])
        .arg(&path)
        .stdin(Stdio::null())
        .stdout(stdout.try_clone()?)
        .stderr(stderr.try_clone()?)
        .spawn()
        .map_err(|e| Error::Solver(format!("cannot start {}: {e}", program.display())))?;
    let deadline = cfg.time_limit.map(|t| Instant::now() + t);
    let mut pause = Duration::from_millis(1);
    let status = loop {
        if let Some(status) = child.try_wait()? {
            break status;
        }
        if deadline.is_some_and(|d| Instant::now() >= d) {
            let _ = child.kill();
            let _ = child.wait();
            return Ok(SolverVerdict::Unknown(format!(
                "{} killed after the {:.1}s time limit",
                program.display(),
                cfg.time_limit.unwrap_or_default().as_secs_f64()
            )));
        }
        std::thread::sleep(pause);
        pause = (pause * 2).min(Duration::from_millis(50));
    };
    let mut out = String::new();
    stdout.rewind()?;
    stdout.read_to_string(&mut out)?;
    let verdict = parse_solver_output(&out, formula.num_vars())?;
    if let SolverVerdict::Unknown(_) = verdict {
        let mut err = String::new();
        stderr.rewind()?;
        stderr.read_to_string(&mut err)?;
        let tail: String = err.lines().rev().take(5).collect::<Vec<_>>().into_iter().rev().collect::<Vec<_>>().join("\n");
        return Ok(SolverVerdict::Unknown(format!(
            "{} exited with {status} without a verdict{}",
            program.display(),
            if tail.is_empty() { String::new() } else { format!(": {tail}") }
        )));
    }
    Ok(verdict)
}

/// Reads the comparator variables of `model` back into a network.
///
/// For size shapes every position must select exactly one comparator; for
/// depth shapes the selected comparators of a layer must be channel-disjoint.
/// Anything else means the encoding is broken and is an integrity error.
pub fn decode_network(model: &Model, pool: &VarPool, spec: &ProblemSpec) -> Result<LayeredNetwork> {
    let n = spec.n;
    let mut layers = Vec::with_capacity(spec.shape.bound());
    for k in 1..=spec.shape.bound() {
        let mut layer = Vec::new();
        for i in 1..n {
            for j in i + 1..=n {
                let var = pool
                    .get(&VarKey::Comparator { k, i, j })
                    .ok_or_else(|| Error::Integrity(format!("comparator variable g({k},{i},{j}) missing")))?;
                if var.id() > model.num_vars() {
                    return Err(Error::Integrity(format!("model does not cover g({k},{i},{j})")));
                }
                if model.value(var) {
                    layer.push(Comparator::new(i, j)?);
                }
            }
        }
        if let Shape::Size(_) = spec.shape {
            if layer.len() != 1 {
                return Err(Error::Integrity(format!(
                    "position {k} selects {} comparators instead of one",
                    layer.len()
                )));
            }
        }
        layers.push(layer);
    }
    LayeredNetwork::new(n, layers).map_err(|e| Error::Integrity(format!("decoded network is invalid: {e}")))
}

/// A certified witness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub network: LayeredNetwork,
    pub certification: CertificationRecord,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "UPPERCASE")]
pub enum SpecVerdict {
    Sat(Witness),
    Unsat,
    Unknown { reason: String },
}

impl SpecVerdict {
    pub fn status(&self) -> SolverStatus {
        match self {
            SpecVerdict::Sat(_) => SolverStatus::Sat,
            SpecVerdict::Unsat => SolverStatus::Unsat,
            SpecVerdict::Unknown { .. } => SolverStatus::Unknown,
        }
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            SpecVerdict::Sat(w) => Some(w),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpecOutcome {
    pub spec: ProblemSpec,
    pub verdict: SpecVerdict,
    pub stats: EncodingStats,
    pub encode_seconds: f64,
    pub solve_seconds: f64,
}

/// Checks a decoded witness against everything the spec promised.
fn check_witness(net: &LayeredNetwork, spec: &ProblemSpec) -> Result<CertificationRecord> {
    let record = certify(net, spec.class)?;
    if !record.verdict {
        return Err(Error::Integrity(format!(
            "decoded network fails certification as {}: {:?}",
            spec.class, record.evidence
        )));
    }
    let bound = spec.shape.bound();
    let (actual, what) = match spec.shape {
        Shape::Size(_) => (net.size(), "size"),
        Shape::Depth(_) => (net.depth(), "depth"),
    };
    if actual > bound {
        return Err(Error::Integrity(format!("decoded network has {what} {actual} above {bound}")));
    }
    if let Some(cap) = spec.options.size_cap {
        if net.size() > cap {
            return Err(Error::Integrity(format!("decoded network has {} comparators above the cap {cap}", net.size())));
        }
    }
    if spec.options.cross_half_only {
        let h = spec.n / 2;
        if let Some(c) = net.comparators().find(|c| c.j() <= h || c.i() > h) {
            return Err(Error::Integrity(format!("comparator {c} does not cross the halves")));
        }
    }
    if let NetworkClass::Halver { .. } = spec.class {
        debug_assert_eq!(spec.n % 2, 0);
    }
    Ok(record)
}

/// Encodes, solves, decodes and certifies one problem.
pub fn solve_spec(spec: &ProblemSpec, cfg: &SolverConfig) -> Result<SpecOutcome> {
    let started = Instant::now();
    let enc = encodings::build(spec)?;
    let encode_seconds = started.elapsed().as_secs_f64();
    let started = Instant::now();
    let verdict = solve(&enc.formula, cfg)?;
    let solve_seconds = started.elapsed().as_secs_f64();
    let verdict = match verdict {
        SolverVerdict::Sat(model) => {
            let network = decode_network(&model, &enc.pool, spec)?;
            let certification = check_witness(&network, spec)?;
            SpecVerdict::Sat(Witness { network, certification })
        }
        SolverVerdict::Unsat => SpecVerdict::Unsat,
        SolverVerdict::Unknown(reason) => SpecVerdict::Unknown { reason },
    };
    log::info!("{spec}: {} in {solve_seconds:.2}s ({} clauses)", verdict.status(), enc.stats.num_clauses);
    Ok(SpecOutcome { spec: *spec, verdict, stats: enc.stats, encode_seconds, solve_seconds })
}
