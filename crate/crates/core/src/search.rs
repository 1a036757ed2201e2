//! Optimum searches over size, depth and (size, depth).
//!
//! Every search walks a bound upward, solving one instance per value, and
//! keeps the interval `[lower, upper]` that the verdicts so far establish.
//! An optimum is only reported once the interval has closed. Satisfiable
//! instances contribute certified witnesses; unsatisfiable ones are taken on
//! the solver's word and labelled as such.

use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::cnf::SolverStatus;
use crate::encodings::{ClauseForm, Encoding, ProblemSpec, Shape};
use crate::error::{Error, Result};
use crate::network::{certify, LayeredNetwork, NetworkClass};
use crate::reference;
use crate::solver::{solve_spec, SolverConfig, SpecOutcome, SpecVerdict, Witness};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Size,
    Depth,
}

impl Objective {
    fn shape(self, bound: usize) -> Shape {
        match self {
            Objective::Size => Shape::Size(bound),
            Objective::Depth => Shape::Depth(bound),
        }
    }

    fn measure(self, net: &LayeredNetwork) -> usize {
        match self {
            Objective::Size => net.size(),
            Objective::Depth => net.depth(),
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Objective::Size => "size",
            Objective::Depth => "depth",
        })
    }
}

/// Time and range limits for a search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    /// Limit for each solver call.
    pub per_instance: Option<Duration>,
    /// Limit for a whole search, checked between solver calls.
    pub total: Option<Duration>,
    /// Largest bound a search will try.
    pub max_bound: Option<usize>,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            per_instance: Some(Duration::from_secs(600)),
            total: None,
            max_bound: None,
        }
    }
}

impl Budget {
    pub fn unlimited() -> Self {
        Self { per_instance: None, total: None, max_bound: None }
    }

    pub fn with_per_instance(mut self, limit: Option<Duration>) -> Self {
        self.per_instance = limit;
        self
    }

    pub fn with_total(mut self, limit: Option<Duration>) -> Self {
        self.total = limit;
        self
    }

    pub fn with_max_bound(mut self, bound: Option<usize>) -> Self {
        self.max_bound = bound;
        self
    }
}

/// How the lower end of a search interval is justified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LowerBound {
    /// Nothing smaller is possible by construction.
    Trivial,
    /// The solver reported UNSAT one below. No proof was checked.
    SolverAttested,
    /// Taken from the published tables without being re-derived.
    Reference,
}

impl fmt::Display for LowerBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LowerBound::Trivial => "trivial",
            LowerBound::SolverAttested => "solver-attested",
            LowerBound::Reference => "reference",
        })
    }
}

/// One solver call made during a search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEntry {
    pub instance: String,
    pub bound: usize,
    pub size_cap: Option<usize>,
    pub status: SolverStatus,
    pub seconds: f64,
    pub clauses: usize,
    pub vars: usize,
}

impl TraceEntry {
    fn from_outcome(out: &SpecOutcome) -> Self {
        Self {
            instance: out.spec.to_string(),
            bound: out.spec.shape.bound(),
            size_cap: out.spec.options.size_cap,
            status: out.verdict.status(),
            seconds: out.encode_seconds + out.solve_seconds,
            clauses: out.stats.num_clauses,
            vars: out.stats.num_vars,
        }
    }
}

/// Outcome of a single-objective search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResult {
    pub n: usize,
    pub class: NetworkClass,
    pub objective: Objective,
    pub encoding: Encoding,
    /// No network below this value exists.
    pub lower: usize,
    pub lower_bound: LowerBound,
    /// Value of the best witness, if any.
    pub upper: Option<usize>,
    pub witness: Option<Witness>,
    pub trace: Vec<TraceEntry>,
}

impl SearchResult {
    /// The optimum, once the interval has closed on bounds this crate
    /// established itself.
    pub fn optimum(&self) -> Option<usize> {
        (self.upper == Some(self.lower) && self.lower_bound != LowerBound::Reference).then_some(self.lower)
    }

    pub fn seconds(&self) -> f64 {
        self.trace.iter().map(|t| t.seconds).sum()
    }

    /// `5`, `[18, 20]` or `>= 7`.
    pub fn value_label(&self) -> String {
        match (self.optimum(), self.upper) {
            (Some(v), _) => v.to_string(),
            (None, Some(u)) => format!("[{}, {u}]", self.lower),
            (None, None) => format!(">= {}", self.lower),
        }
    }
}

impl fmt::Display for SearchResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} n={}: {}", self.class, self.objective, self.n, self.value_label())?;
        if self.lower > 0 {
            write!(f, " (lower bound {})", self.lower_bound)?;
        }
        Ok(())
    }
}

/// A starting interval supplied from outside the search.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Hint {
    pub lower: Option<usize>,
    /// Must certify for the searched class.
    pub witness: Option<LayeredNetwork>,
}

/// Minimal size for one depth of a joint search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParetoCell {
    pub depth: usize,
    /// No network of this depth with fewer comparators exists.
    pub lower: usize,
    /// Smallest witness found at this depth, possibly carried over from a
    /// smaller depth.
    pub upper: Option<usize>,
}

impl ParetoCell {
    pub fn is_closed(&self) -> bool {
        self.upper == Some(self.lower)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParetoPoint {
    pub size: usize,
    pub depth: usize,
    pub witness: Witness,
}

/// Outcome of a joint (size, depth) search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParetoResult {
    pub n: usize,
    pub class: NetworkClass,
    pub encoding: Encoding,
    /// Non-dominated `(size, depth)` pairs by increasing depth.
    pub points: Vec<ParetoPoint>,
    pub cells: Vec<ParetoCell>,
    /// Every cell closed and the optimal depth and size known.
    pub complete: bool,
    pub trace: Vec<TraceEntry>,
}

impl ParetoResult {
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.points.iter().map(|p| (p.size, p.depth)).collect()
    }

    pub fn seconds(&self) -> f64 {
        self.trace.iter().map(|t| t.seconds).sum()
    }

    /// `(9,5)` or `(31,7),(29,8)`, with a trailing `?` when incomplete.
    pub fn value_label(&self) -> String {
        let mut s: Vec<String> = self.points.iter().map(|p| format!("({},{})", p.size, p.depth)).collect();
        if !self.complete {
            s.push("?".into());
        }
        s.join(",")
    }
}

type CacheKey = (usize, NetworkClass, Objective, Encoding);

/// Runs searches against one solver configuration and budget, remembering
/// finished single-objective results.
#[derive(Debug)]
pub struct Searcher {
    config: SolverConfig,
    budget: Budget,
    compact: bool,
    hints: HashMap<(usize, NetworkClass, Objective), Hint>,
    cache: Mutex<HashMap<CacheKey, SearchResult>>,
}

struct Clock {
    deadline: Option<Instant>,
}

impl Clock {
    fn expired(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}

impl Searcher {
    pub fn new(config: SolverConfig, budget: Budget) -> Self {
        Self {
            config,
            budget,
            compact: true,
            hints: HashMap::new(),
            cache: Mutex::new(HashMap::new()),
        }
    }

    /// Whether size searches add the canonical comparator order and the
    /// merged backward clauses, and depth searches add reflection breaking and,
    /// with dfwd, redundancy pruning.
    /// On by default. Statuses are unaffected.
    pub fn with_compact(mut self, compact: bool) -> Self {
        self.compact = compact;
        self
    }

    pub fn with_hint(mut self, n: usize, class: NetworkClass, objective: Objective, hint: Hint) -> Self {
        self.hints.insert((n, class, objective), hint);
        self
    }

    /// Seeds the open size cases of the reference tables with their
    /// published lower bound and smallest known network.
    pub fn with_reference_hints(mut self) -> Self {
        for n in reference::CHANNELS {
            for class in [NetworkClass::Sorting, NetworkClass::SingleException] {
                if let Some(open) = reference::open_size(n, class) {
                    let hint = Hint { lower: Some(open.lower), witness: Some(open.witness) };
                    self = self.with_hint(n, class, Objective::Size, hint);
                }
            }
        }
        self
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn budget(&self) -> Budget {
        self.budget
    }

    fn clock(&self) -> Clock {
        Clock { deadline: self.budget.total.map(|t| Instant::now() + t) }
    }

    fn base_spec(&self, n: usize, class: NetworkClass, shape: Shape, encoding: Encoding) -> ProblemSpec {
        let mut spec = ProblemSpec::new(n, class, shape, encoding);
        if self.compact && !shape.is_depth() {
            spec.options.canonical_order = true;
            if !encoding.is_forward() {
                spec.options.backward_clauses = ClauseForm::Merged;
            }
        }
        if self.compact && shape.is_depth() {
            spec.options.break_reflection = true;
            spec.options.prune_redundant = encoding == Encoding::Dfwd;
        }
        spec
    }

    /// Solves one instance within the remaining budget. `None` when the
    /// total budget is already spent.
    fn run(&self, spec: &ProblemSpec, clock: &Clock, trace: &mut Vec<TraceEntry>) -> Result<Option<SpecOutcome>> {
        let mut limit = self.budget.per_instance;
        if let Some(deadline) = clock.deadline {
            let left = deadline.saturating_duration_since(Instant::now());
            if left.is_zero() {
                return Ok(None);
            }
            limit = Some(limit.map_or(left, |l| l.min(left)));
        }
        let cfg = self.config.clone().with_time_limit(limit);
        let out = solve_spec(spec, &cfg)?;
        trace.push(TraceEntry::from_outcome(&out));
        Ok(Some(out))
    }

    /// Smallest number of comparators. Sorting searches start at `n - 1`,
    /// single-exception searches at 0.
    pub fn optimal_size(&self, n: usize, class: NetworkClass, encoding: Option<Encoding>) -> Result<SearchResult> {
        if !matches!(class, NetworkClass::Sorting | NetworkClass::SingleException) {
            return Err(Error::InvalidProblem(format!("size search is not defined for {class}")));
        }
        let encoding = encoding.unwrap_or_else(|| Encoding::default_for(class, false));
        if encoding.is_depth() {
            return Err(Error::InvalidProblem(format!("{encoding} is a fixed-depth encoding")));
        }
        let seed = match class {
            NetworkClass::Sorting => n.saturating_sub(1),
            _ => 0,
        };
        self.cached((n, class, Objective::Size, encoding), || self.scan(n, class, Objective::Size, encoding, seed))
    }

    /// Smallest number of layers, starting from 0.
    pub fn optimal_depth(&self, n: usize, class: NetworkClass, encoding: Option<Encoding>) -> Result<SearchResult> {
        let encoding = encoding.unwrap_or_else(|| Encoding::default_for(class, true));
        if !encoding.is_depth() {
            return Err(Error::InvalidProblem(format!("{encoding} is a fixed-size encoding")));
        }
        self.cached((n, class, Objective::Depth, encoding), || self.scan(n, class, Objective::Depth, encoding, 0))
    }

    fn cached(&self, key: CacheKey, search: impl FnOnce() -> Result<SearchResult>) -> Result<SearchResult> {
        if let Some(hit) = self.lock_cache().get(&key) {
            return Ok(hit.clone());
        }
        let result = search()?;
        self.lock_cache().insert(key, result.clone());
        Ok(result)
    }

    fn lock_cache(&self) -> std::sync::MutexGuard<'_, HashMap<CacheKey, SearchResult>> {
        self.cache.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn cached_any(&self, n: usize, class: NetworkClass, objective: Objective) -> Option<SearchResult> {
        let cache = self.lock_cache();
        let mut hits: Vec<&SearchResult> = cache
            .iter()
            .filter(|((kn, kc, ko, _), _)| (*kn, *kc, *ko) == (n, class, objective))
            .map(|(_, r)| r)
            .collect();
        hits.sort_by_key(|r| (r.optimum().is_none(), r.encoding.to_string()));
        hits.first().map(|r| (*r).clone())
    }

    fn scan(&self, n: usize, class: NetworkClass, objective: Objective, encoding: Encoding, seed: usize) -> Result<SearchResult> {
        let base = self.base_spec(n, class, objective.shape(seed), encoding);
        base.validate()?;
        let clock = self.clock();
        let mut trace = Vec::new();

        let hint = self.hints.get(&(n, class, objective)).cloned().unwrap_or_default();
        let (mut lower, mut lower_bound) = match hint.lower {
            Some(l) if l > seed => (l, LowerBound::Reference),
            _ => (seed, LowerBound::Trivial),
        };
        let mut best: Option<Witness> = None;
        if let Some(net) = hint.witness {
            let certification = certify(&net, class)?;
            if !certification.verdict || net.n() != n {
                return Err(Error::InvalidArgument(format!("hinted network is not a {n}-channel {class} network")));
            }
            best = Some(Witness { network: net, certification });
        }
        let upper_of = |w: &Option<Witness>| w.as_ref().map(|w| objective.measure(&w.network));

        let mut v = lower;
        while upper_of(&best).map_or(true, |u| v < u) && self.budget.max_bound.map_or(true, |m| v <= m) {
            let Some(out) = self.run(&base.with_bound(v), &clock, &mut trace)? else { break };
            match out.verdict {
                SpecVerdict::Sat(w) => {
                    best = Some(w);
                    break;
                }
                SpecVerdict::Unsat => {
                    // Both measures are monotone: a smaller network pads out
                    // with a repeated comparator or an empty layer.
                    lower = v + 1;
                    lower_bound = LowerBound::SolverAttested;
                }
                SpecVerdict::Unknown { .. } => {}
            }
            v += 1;
        }
        let upper = upper_of(&best);
        if upper.is_some_and(|u| u < lower) {
            return Err(Error::Integrity(format!(
                "{class} {objective} n={n}: witness of value {} below the lower bound {lower}",
                upper.unwrap_or_default()
            )));
        }

        // A closed interval on a trivial seed still gets its UNSAT below.
        if upper == Some(lower) && lower_bound == LowerBound::Trivial && lower > 0 {
            if let Some(out) = self.run(&base.with_bound(lower - 1), &clock, &mut trace)? {
                match out.verdict {
                    SpecVerdict::Unsat => lower_bound = LowerBound::SolverAttested,
                    SpecVerdict::Sat(_) => {
                        return Err(Error::Integrity(format!("{class} {objective} n={n}: SAT below the seed {lower}")));
                    }
                    SpecVerdict::Unknown { .. } => {}
                }
            }
        }

        let result = SearchResult {
            n,
            class,
            objective,
            encoding,
            lower,
            lower_bound,
            upper,
            witness: best,
            trace,
        };
        log::info!("{result}");
        Ok(result)
    }

    /// Non-dominated (size, depth) pairs, found by capping the size of
    /// fixed-depth instances from the optimal depth upward.
    pub fn pareto_size_depth(&self, n: usize, class: NetworkClass) -> Result<ParetoResult> {
        if !matches!(class, NetworkClass::Sorting | NetworkClass::SingleException) {
            return Err(Error::InvalidProblem(format!("joint search is not defined for {class}")));
        }
        let encoding = Encoding::default_for(class, true);
        let depth = match self.cached_any(n, class, Objective::Depth) {
            Some(r) => r,
            None => self.optimal_depth(n, class, Some(encoding))?,
        };
        let size = match self.cached_any(n, class, Objective::Size) {
            Some(r) => r,
            None => self.optimal_size(n, class, None)?,
        };
        let mut trace = Vec::new();
        let clock = self.clock();
        let mut points: Vec<ParetoPoint> = Vec::new();
        let mut cells = Vec::new();
        let mut complete = depth.optimum().is_some() && size.optimum().is_some();
        let size_floor = size.lower;
        let base = ProblemSpec::new(n, class, Shape::Depth(depth.lower), encoding);
        base.validate()?;

        // Smallest witness seen so far at any depth up to the current one.
        let mut best: Option<Witness> = None;
        let mut d = depth.lower;
        loop {
            if self.budget.max_bound.is_some_and(|m| d > m) || clock.expired() {
                complete = false;
                break;
            }
            let prev = best.as_ref().map(|w| w.network.size());
            if prev.is_some_and(|s| s <= size_floor || s <= d) {
                // Anything smaller would already fit into an earlier depth.
                break;
            }
            let spec = base.with_bound(d);
            let mut cell_upper = prev;
            let mut cell_lower = size_floor;
            let mut found = None;
            // First feasibility at this depth, then tighten the cap.
            let mut cap = prev.map(|s| s - 1);
            loop {
                if cap.is_some_and(|c| c < cell_lower) {
                    break;
                }
                let Some(out) = self.run(&spec.with_size_cap(cap), &clock, &mut trace)? else {
                    complete = false;
                    break;
                };
                match out.verdict {
                    SpecVerdict::Sat(w) => {
                        let s = w.network.size();
                        cell_upper = Some(s);
                        found = Some(w);
                        cap = Some(s.saturating_sub(1));
                        if s == 0 {
                            break;
                        }
                    }
                    SpecVerdict::Unsat => {
                        match cap {
                            Some(c) => cell_lower = c + 1,
                            // No network of this depth at all.
                            None => cell_lower = usize::MAX,
                        }
                        break;
                    }
                    SpecVerdict::Unknown { .. } => {
                        complete = false;
                        break;
                    }
                }
            }
            if cell_lower == usize::MAX {
                // Only reachable below the optimal depth, when the depth
                // search itself stopped early.
                complete = false;
                d += 1;
                continue;
            }
            if let Some(w) = found {
                let size = w.network.size();
                points.push(ParetoPoint { size, depth: d, witness: w.clone() });
                best = Some(w);
            }
            cells.push(ParetoCell { depth: d, lower: cell_lower.min(cell_upper.unwrap_or(cell_lower)), upper: cell_upper });
            if !cells.last().is_some_and(ParetoCell::is_closed) {
                complete = false;
            }
            d += 1;
        }
        // Drop points dominated after the fact, which only happens when a
        // cell was left open.
        let mut kept: Vec<ParetoPoint> = Vec::new();
        for p in points {
            if kept.last().map_or(true, |q| p.size < q.size) {
                kept.push(p);
            }
        }
        let result = ParetoResult { n, class, encoding, points: kept, cells, complete, trace };
        log::info!("{class} (size, depth) n={n}: {}", result.value_label());
        Ok(result)
    }
}

/// Runs `tasks` on up to `jobs` threads and returns the results in task
/// order.
pub fn dispatch<T, R>(tasks: &[T], jobs: usize, run: impl Fn(&T) -> R + Sync) -> Vec<R>
where
    T: Sync,
    R: Send,
{
    let jobs = jobs.clamp(1, tasks.len().max(1));
    if jobs == 1 {
        return tasks.iter().map(&run).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<R>>> = tasks.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(task) = tasks.get(i) else { break };
                let r = run(task);
                *slots[i].lock().unwrap_or_else(|e| e.into_inner()) = Some(r);
            });
        }
    });
    slots
        .into_iter()
        .map(|s| s.into_inner().unwrap_or_else(|e| e.into_inner()).expect("every task ran"))
        .collect()
}

/// Which of the result tables to produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TableSelection {
    pub depth: bool,
    pub size: bool,
    pub pareto: bool,
}

impl Default for TableSelection {
    fn default() -> Self {
        Self { depth: true, size: true, pareto: true }
    }
}

/// Search results for a range of channel counts, for both sorting and
/// single-exception networks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tables {
    pub channels: Vec<usize>,
    pub depth: Vec<SearchResult>,
    pub size: Vec<SearchResult>,
    pub pareto: Vec<ParetoResult>,
}

const CLASSES: [NetworkClass; 2] = [NetworkClass::SingleException, NetworkClass::Sorting];

/// Runs the selected searches for every `n` in `channels`. Independent
/// searches run on up to `jobs` threads; the tables do not depend on the
/// order in which they finish.
pub fn tables(searcher: &Searcher, channels: &[usize], select: TableSelection, jobs: usize) -> Result<Tables> {
    let cells: Vec<(usize, NetworkClass)> = channels.iter().flat_map(|&n| CLASSES.map(|c| (n, c))).collect();
    let mut single = Vec::new();
    if select.depth || select.pareto {
        single.extend(cells.iter().map(|&(n, c)| (n, c, Objective::Depth)));
    }
    if select.size || select.pareto {
        single.extend(cells.iter().map(|&(n, c)| (n, c, Objective::Size)));
    }
    let results = dispatch(&single, jobs, |&(n, class, objective)| match objective {
        Objective::Size => searcher.optimal_size(n, class, None),
        Objective::Depth => searcher.optimal_depth(n, class, None),
    });
    let mut depth = Vec::new();
    let mut size = Vec::new();
    for r in results {
        let r = r?;
        match r.objective {
            Objective::Depth if select.depth => depth.push(r),
            Objective::Size if select.size => size.push(r),
            _ => {}
        }
    }
    let pareto = if select.pareto {
        dispatch(&cells, jobs, |&(n, class)| searcher.pareto_size_depth(n, class))
            .into_iter()
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    Ok(Tables { channels: channels.to_vec(), depth, size, pareto })
}

fn class_symbol(class: NetworkClass, base: &str) -> String {
    match class {
        NetworkClass::SingleException => format!("{base}1(n)"),
        _ => format!("{base}(n)"),
    }
}

fn reference_depth(r: &SearchResult) -> Option<String> {
    reference::depth(r.n, r.class).map(|v| v.to_string())
}

fn reference_size(r: &SearchResult) -> Option<String> {
    reference::size(r.n, r.class).map(|(lo, hi)| if lo == hi { lo.to_string() } else { format!("[{lo}, {hi}]") })
}

fn reference_pareto(r: &ParetoResult) -> Option<String> {
    reference::pareto(r.n, r.class).map(|pts| {
        let mut pts = pts.to_vec();
        pts.sort_by_key(|p| p.1);
        pts.iter().map(|(s, d)| format!("({s},{d})")).collect::<Vec<_>>().join(",")
    })
}

#[derive(Serialize)]
struct Row {
    table: &'static str,
    quantity: String,
    n: usize,
    value: String,
    lower_bound: String,
    reference: String,
    agrees: &'static str,
    seconds: f64,
}

impl Row {
    fn with_agreement(mut self) -> Self {
        self.agrees = if self.reference.is_empty() {
            ""
        } else if self.reference == self.value {
            "yes"
        } else {
            "no"
        };
        self
    }
}

impl Tables {
    fn rows(&self) -> Vec<Row> {
        let mut rows = Vec::new();
        for (table, results, sym, reference) in [
            ("depth", &self.depth, "D", reference_depth as fn(&SearchResult) -> Option<String>),
            ("size", &self.size, "S", reference_size),
        ] {
            for r in results.iter() {
                rows.push(Row {
                    table,
                    quantity: class_symbol(r.class, sym),
                    n: r.n,
                    value: r.value_label(),
                    lower_bound: r.lower_bound.to_string(),
                    reference: reference(r).unwrap_or_default(),
                    agrees: "",
                    seconds: r.seconds(),
                }
                .with_agreement());
            }
        }
        for r in &self.pareto {
            rows.push(Row {
                table: "size-depth",
                quantity: class_symbol(r.class, "(S,D)"),
                n: r.n,
                value: r.value_label(),
                lower_bound: if r.complete { "solver-attested".into() } else { "open".into() },
                reference: reference_pareto(r).unwrap_or_default(),
                agrees: "",
                seconds: r.seconds(),
            }
            .with_agreement());
        }
        rows
    }

    /// One wide table per result kind, one row per quantity and one column
    /// per channel count, followed by a per-cell detail table.
    pub fn to_markdown(&self) -> String {
        let rows = self.rows();
        let mut out = String::new();
        for (table, title) in [
            ("depth", "Optimal depth"),
            ("size", "Optimal size"),
            ("size-depth", "Optimal (size, depth) combinations"),
        ] {
            let mine: Vec<&Row> = rows.iter().filter(|r| r.table == table).collect();
            if mine.is_empty() {
                continue;
            }
            out.push_str(&format!("## {title}\n\n| n |"));
            for n in &self.channels {
                out.push_str(&format!(" {n} |"));
            }
            out.push_str("\n|---|");
            out.push_str(&"---|".repeat(self.channels.len()));
            out.push('\n');
            let mut quantities: Vec<&str> = mine.iter().map(|r| r.quantity.as_str()).collect();
            quantities.dedup();
            for q in quantities {
                out.push_str(&format!("| {q} |"));
                for n in &self.channels {
                    let cell = mine.iter().find(|r| r.quantity == q && r.n == *n).map_or("", |r| r.value.as_str());
                    out.push_str(&format!(" {cell} |"));
                }
                out.push('\n');
            }
            out.push('\n');
        }
        out.push_str("## Details\n\n");
        out.push_str("Lower bounds marked solver-attested rest on UNSAT verdicts that were not proof-checked.\n\n");
        out.push_str("| table | quantity | n | value | lower bound | reference | agrees | seconds |\n");
        out.push_str("|---|---|---|---|---|---|---|---|\n");
        for r in &rows {
            out.push_str(&format!(
                "| {} | {} | {} | {} | {} | {} | {} | {:.2} |\n",
                r.table,
                r.quantity,
                r.n,
                r.value,
                r.lower_bound,
                r.reference,
                r.agrees,
                r.seconds
            ));
        }
        out
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for mut r in self.rows() {
            r.seconds = (r.seconds * 1000.0).round() / 1000.0;
            w.serialize(r).map_err(|e| Error::Io(std::io::Error::other(e)))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}
