//! CNF construction: variables, a keyed variable registry, clause emitters,
//! DIMACS serialization and SAT-competition solver output parsing.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::ops::Not;

use serde::{Deserialize, Serialize};

use crate::error::{invalid_arg, Error, Result};
use crate::network::BinaryVector;

/// A propositional variable, numbered from 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(u32);

impl Var {
    pub fn new(id: u32) -> Result<Self> {
        if id == 0 || id > i32::MAX as u32 {
            return Err(invalid_arg(format!("variable id {id} out of range")));
        }
        Ok(Var(id))
    }

    pub fn id(self) -> u32 {
        self.0
    }

    pub fn pos(self) -> Lit {
        Lit(self.0 as i32)
    }

    pub fn neg(self) -> Lit {
        Lit(-(self.0 as i32))
    }

    pub fn lit(self, positive: bool) -> Lit {
        if positive {
            self.pos()
        } else {
            self.neg()
        }
    }
}

/// A literal in DIMACS convention: `±var`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(i32);

impl Lit {
    pub fn from_dimacs(x: i32) -> Result<Self> {
        if x == 0 || x == i32::MIN {
            return Err(invalid_arg(format!("{x} is not a literal")));
        }
        Ok(Lit(x))
    }

    pub fn to_dimacs(self) -> i32 {
        self.0
    }

    pub fn var(self) -> Var {
        Var(self.0.unsigned_abs())
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }
}

impl Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit(-self.0)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Names of the structured variables of the encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKey {
    /// `g(k,i,j)`: comparator `(i,j)` sits at position (or in layer) `k`.
    Comparator { k: usize, i: usize, j: usize },
    /// `o(k,m)`: vector `m` is reachable after the first `k` comparators.
    Output { k: usize, m: BinaryVector },
    /// `q(k,m)`: vector `m`, entering position `k + 1`, ends up unsorted.
    Unsorted { k: usize, m: BinaryVector },
    /// `p(k,i,m)`: vector `m` is reachable after sublayer `i` of layer `k`.
    ForwardSub { k: usize, i: usize, m: BinaryVector },
    /// `r(k,i,m)`: vector `m`, after sublayer `i` of layer `k`, ends up unsorted.
    BackwardSub { k: usize, i: usize, m: BinaryVector },
}

impl fmt::Display for VarKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            VarKey::Comparator { k, i, j } => write!(f, "g({k},{i},{j})"),
            VarKey::Output { k, m } => write!(f, "o({k},{m})"),
            VarKey::Unsorted { k, m } => write!(f, "q({k},{m})"),
            VarKey::ForwardSub { k, i, m } => write!(f, "p({k},{i},{m})"),
            VarKey::BackwardSub { k, i, m } => write!(f, "r({k},{i},{m})"),
        }
    }
}

/// Allocates variables and remembers which structured key owns each one.
/// Auxiliary variables are anonymous.
#[derive(Debug, Clone, Default)]
pub struct VarPool {
    registry: HashMap<VarKey, Var>,
    // Indexed by var id - 1.
    owners: Vec<Option<VarKey>>,
}

impl VarPool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> u32 {
        self.owners.len() as u32
    }

    pub fn fresh(&mut self) -> Var {
        self.owners.push(None);
        Var(self.owners.len() as u32)
    }

    pub fn register(&mut self, key: VarKey) -> Result<Var> {
        if self.registry.contains_key(&key) {
            return Err(invalid_arg(format!("variable {key} registered twice")));
        }
        self.owners.push(Some(key));
        let var = Var(self.owners.len() as u32);
        self.registry.insert(key, var);
        Ok(var)
    }

    pub fn get(&self, key: &VarKey) -> Option<Var> {
        self.registry.get(key).copied()
    }

    pub fn lookup(&self, key: &VarKey) -> Result<Var> {
        self.get(key)
            .ok_or_else(|| invalid_arg(format!("variable {key} is not registered")))
    }

    pub fn key_of(&self, var: Var) -> Option<VarKey> {
        self.owners.get(var.0 as usize - 1).copied().flatten()
    }

    pub fn registered(&self) -> usize {
        self.registry.len()
    }

    /// Registered keys in variable order.
    pub fn entries(&self) -> impl Iterator<Item = (VarKey, Var)> + '_ {
        self.owners
            .iter()
            .enumerate()
            .filter_map(|(idx, key)| key.map(|k| (k, Var(idx as u32 + 1))))
    }

    /// The `key -> id` sidecar map, in variable order.
    pub fn to_json(&self) -> String {
        let map: serde_json::Map<String, serde_json::Value> = self
            .entries()
            .map(|(k, v)| (k.to_string(), v.0.into()))
            .collect();
        serde_json::to_string_pretty(&map).expect("map serialization cannot fail")
    }
}

/// Clauses over variables `1..=num_vars`, in emission order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CnfFormula {
    num_vars: u32,
    lits: Vec<Lit>,
    ends: Vec<usize>,
}

impl CnfFormula {
    pub fn new(num_vars: u32) -> Self {
        Self {
            num_vars,
            ..Self::default()
        }
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.ends.len()
    }

    pub fn num_literals(&self) -> usize {
        self.lits.len()
    }

    /// Raises the variable count; it never decreases.
    pub fn reserve_vars(&mut self, num_vars: u32) {
        self.num_vars = self.num_vars.max(num_vars);
    }

    pub fn add_clause(&mut self, clause: &[Lit]) -> Result<()> {
        if let Some(l) = clause.iter().find(|l| l.var().0 > self.num_vars) {
            return Err(invalid_arg(format!(
                "literal {l} exceeds the {} declared variables",
                self.num_vars
            )));
        }
        self.push(clause);
        Ok(())
    }

    fn push(&mut self, clause: &[Lit]) {
        self.lits.extend_from_slice(clause);
        self.ends.push(self.lits.len());
    }

    pub fn clause(&self, idx: usize) -> &[Lit] {
        let start = if idx == 0 { 0 } else { self.ends[idx - 1] };
        &self.lits[start..self.ends[idx]]
    }

    pub fn clauses(&self) -> impl ExactSizeIterator<Item = &[Lit]> + '_ {
        (0..self.ends.len()).map(move |idx| self.clause(idx))
    }

    /// Evaluates the formula under `assignment` (indexed by var id - 1).
    pub fn is_satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses().all(|c| {
            c.iter()
                .any(|l| assignment[l.var().0 as usize - 1] == l.is_positive())
        })
    }
}

/// How an exactly-one or at-most-one constraint is spelled out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OneHot {
    /// Every pair of variables is excluded explicitly.
    #[default]
    Pairwise,
    /// Sequential (ladder) encoding with `k - 1` auxiliary variables.
    Ladder,
}

/// A [`VarPool`] and the [`CnfFormula`] being written against it.
#[derive(Debug, Clone, Default)]
pub struct CnfBuilder {
    pool: VarPool,
    formula: CnfFormula,
}

impl CnfBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn pool(&self) -> &VarPool {
        &self.pool
    }

    pub fn formula(&self) -> &CnfFormula {
        &self.formula
    }

    pub fn register(&mut self, key: VarKey) -> Result<Var> {
        let var = self.pool.register(key)?;
        self.formula.reserve_vars(var.0);
        Ok(var)
    }

    pub fn fresh(&mut self) -> Var {
        let var = self.pool.fresh();
        self.formula.reserve_vars(var.0);
        var
    }

    pub fn add_clause(&mut self, clause: &[Lit]) {
        debug_assert!(clause.iter().all(|l| l.var().0 <= self.formula.num_vars));
        self.formula.push(clause);
    }

    /// Under guard `g`: `a <-> rhs[0]` or `a <-> rhs[0] | rhs[1]`.
    /// Emitted verbatim, without simplification.
    pub fn guarded_equiv(&mut self, g: Lit, a: Lit, rhs: &[Lit]) -> Result<()> {
        match *rhs {
            [b] => {
                self.add_clause(&[!g, !a, b]);
                self.add_clause(&[!g, a, !b]);
            }
            [b, c] => {
                self.add_clause(&[!g, !a, b, c]);
                self.add_clause(&[!g, a, !b]);
                self.add_clause(&[!g, a, !c]);
            }
            _ => {
                return Err(invalid_arg(format!(
                    "guarded equivalence takes 1 or 2 right-hand literals, got {}",
                    rhs.len()
                )))
            }
        }
        Ok(())
    }

    /// `g -> u`.
    pub fn guarded_unit(&mut self, g: Lit, u: Lit) {
        self.add_clause(&[!g, u]);
    }

    pub fn at_most_one(&mut self, lits: &[Lit], method: OneHot) {
        if lits.len() < 2 {
            return;
        }
        match method {
            OneHot::Pairwise => {
                for (a, &x) in lits.iter().enumerate() {
                    for &y in &lits[a + 1..] {
                        self.add_clause(&[!x, !y]);
                    }
                }
            }
            OneHot::Ladder => {
                // s[t] is true once one of lits[0..=t] is true.
                let k = lits.len();
                let s: Vec<Var> = (0..k - 1).map(|_| self.fresh()).collect();
                self.add_clause(&[!lits[0], s[0].pos()]);
                for t in 1..k - 1 {
                    self.add_clause(&[!lits[t], s[t].pos()]);
                    self.add_clause(&[!s[t - 1].pos(), s[t].pos()]);
                    self.add_clause(&[!lits[t], !s[t - 1].pos()]);
                }
                self.add_clause(&[!lits[k - 1], !s[k - 2].pos()]);
            }
        }
    }

    pub fn exactly_one(&mut self, lits: &[Lit], method: OneHot) -> Result<()> {
        if lits.is_empty() {
            return Err(invalid_arg("exactly-one over an empty set"));
        }
        self.at_most_one(lits, method);
        self.add_clause(lits);
        Ok(())
    }

    /// At most `bound` of `lits` are true (sequential counter).
    pub fn cardinality_at_most(&mut self, lits: &[Lit], bound: usize) {
        let n = lits.len();
        if bound >= n {
            return;
        }
        if bound == 0 {
            for &x in lits {
                self.add_clause(&[!x]);
            }
            return;
        }
        // reg[t][c] is true when at least c + 1 of lits[0..=t] are true.
        let reg: Vec<Vec<Var>> = (0..n - 1)
            .map(|_| (0..bound).map(|_| self.fresh()).collect())
            .collect();
        self.add_clause(&[!lits[0], reg[0][0].pos()]);
        for r in &reg[0][1..] {
            self.add_clause(&[r.neg()]);
        }
        for t in 1..n - 1 {
            let (x, prev, cur) = (lits[t], &reg[t - 1], &reg[t]);
            self.add_clause(&[!x, cur[0].pos()]);
            self.add_clause(&[prev[0].neg(), cur[0].pos()]);
            for c in 1..bound {
                self.add_clause(&[!x, prev[c - 1].neg(), cur[c].pos()]);
                self.add_clause(&[prev[c].neg(), cur[c].pos()]);
            }
            self.add_clause(&[!x, prev[bound - 1].neg()]);
        }
        self.add_clause(&[!lits[n - 1], reg[n - 2][bound - 1].neg()]);
    }

    pub fn finish(self) -> (CnfFormula, VarPool) {
        (self.formula, self.pool)
    }
}

pub fn write_dimacs(f: &CnfFormula) -> String {
    let mut out = String::with_capacity(16 + f.num_literals() * 7 + f.num_clauses() * 2);
    writeln!(out, "p cnf {} {}", f.num_vars, f.num_clauses()).unwrap();
    for clause in f.clauses() {
        for l in clause {
            write!(out, "{} ", l.0).unwrap();
        }
        out.push_str("0\n");
    }
    out
}

/// Reads DIMACS CNF. Comment lines are skipped and clauses may span lines.
pub fn parse_dimacs(text: &str) -> Result<CnfFormula> {
    let mut formula: Option<CnfFormula> = None;
    let mut declared = 0usize;
    let mut current = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if let Some(header) = line.strip_prefix("p ") {
            let parts: Vec<&str> = header.split_whitespace().collect();
            let (vars, clauses) = match parts[..] {
                ["cnf", v, c] => (v.parse::<u32>(), c.parse::<usize>()),
                _ => return Err(Error::Dimacs(format!("bad header {line:?}"))),
            };
            let (Ok(vars), Ok(clauses)) = (vars, clauses) else {
                return Err(Error::Dimacs(format!("bad header {line:?}")));
            };
            if formula.is_some() {
                return Err(Error::Dimacs("duplicate header".into()));
            }
            formula = Some(CnfFormula::new(vars));
            declared = clauses;
            continue;
        }
        let f = formula
            .as_mut()
            .ok_or_else(|| Error::Dimacs("clause before header".into()))?;
        for tok in line.split_whitespace() {
            let x: i32 = tok
                .parse()
                .map_err(|_| Error::Dimacs(format!("bad literal {tok:?}")))?;
            if x == 0 {
                f.add_clause(&current).map_err(|e| Error::Dimacs(e.to_string()))?;
                current.clear();
            } else {
                current.push(Lit::from_dimacs(x).map_err(|e| Error::Dimacs(e.to_string()))?);
            }
        }
    }
    let f = formula.ok_or_else(|| Error::Dimacs("missing header".into()))?;
    if !current.is_empty() {
        return Err(Error::Dimacs("last clause is not 0-terminated".into()));
    }
    if f.num_clauses() != declared {
        return Err(Error::Dimacs(format!(
            "header declares {declared} clauses, found {}",
            f.num_clauses()
        )));
    }
    Ok(f)
}

/// A total assignment, indexed by variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    values: Vec<bool>,
}

impl Model {
    /// `values[v - 1]` is the value of variable `v`.
    pub fn new(values: Vec<bool>) -> Self {
        Self { values }
    }

    pub fn num_vars(&self) -> u32 {
        self.values.len() as u32
    }

    pub fn value(&self, var: Var) -> bool {
        self.values[var.0 as usize - 1]
    }

    pub fn lit_value(&self, lit: Lit) -> bool {
        self.value(lit.var()) == lit.is_positive()
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    pub fn satisfies(&self, f: &CnfFormula) -> bool {
        self.values.len() >= f.num_vars() as usize && f.is_satisfied_by(&self.values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SolverStatus {
    Sat,
    Unsat,
    Unknown,
}

impl fmt::Display for SolverStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverStatus::Sat => "SAT",
            SolverStatus::Unsat => "UNSAT",
            SolverStatus::Unknown => "UNKNOWN",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolverVerdict {
    Sat(Model),
    Unsat,
    /// No answer; the string says why.
    Unknown(String),
}

impl SolverVerdict {
    pub fn status(&self) -> SolverStatus {
        match self {
            SolverVerdict::Sat(_) => SolverStatus::Sat,
            SolverVerdict::Unsat => SolverStatus::Unsat,
            SolverVerdict::Unknown(_) => SolverStatus::Unknown,
        }
    }

    pub fn model(&self) -> Option<&Model> {
        match self {
            SolverVerdict::Sat(m) => Some(m),
            _ => None,
        }
    }
}

/// Parses SAT-competition style output (`s ...` and `v ...` lines) for a
/// formula over `num_vars` variables.
///
/// A satisfiable answer must assign every variable and end its value list
/// with `0`; otherwise the output is rejected as malformed.
pub fn parse_solver_output(text: &str, num_vars: u32) -> Result<SolverVerdict> {
    let mut status = None;
    let mut values: Vec<Option<bool>> = vec![None; num_vars as usize];
    let mut terminated = false;
    for line in text.lines() {
        let line = line.trim();
        if let Some(s) = line.strip_prefix("s ") {
            let parsed = match s.trim() {
                "SATISFIABLE" => SolverStatus::Sat,
                "UNSATISFIABLE" => SolverStatus::Unsat,
                _ => SolverStatus::Unknown,
            };
            if status.is_some_and(|prev| prev != parsed) {
                return Err(Error::MalformedOutput("conflicting status lines".into()));
            }
            status = Some(parsed);
        } else if let Some(v) = line.strip_prefix("v ").or(if line == "v" { Some("") } else { None }) {
            for tok in v.split_whitespace() {
                let x: i64 = tok
                    .parse()
                    .map_err(|_| Error::MalformedOutput(format!("bad value {tok:?}")))?;
                if x == 0 {
                    terminated = true;
                    continue;
                }
                let var = x.unsigned_abs();
                if var > num_vars as u64 {
                    return Err(Error::MalformedOutput(format!(
                        "value for variable {var} beyond the {num_vars} in the formula"
                    )));
                }
                let slot = &mut values[var as usize - 1];
                if slot.is_some_and(|b| b != (x > 0)) {
                    return Err(Error::MalformedOutput(format!("variable {var} assigned twice")));
                }
                *slot = Some(x > 0);
            }
        }
    }
    match status {
        Some(SolverStatus::Sat) => {
            let missing = values.iter().filter(|v| v.is_none()).count();
            if missing > 0 || !terminated {
                return Err(Error::MalformedOutput(format!(
                    "satisfiable answer with incomplete model ({missing} unassigned variables{})",
                    if terminated { "" } else { ", no terminating 0" }
                )));
            }
            Ok(SolverVerdict::Sat(Model::new(values.into_iter().map(Option::unwrap).collect())))
        }
        Some(SolverStatus::Unsat) => Ok(SolverVerdict::Unsat),
        Some(SolverStatus::Unknown) => Ok(SolverVerdict::Unknown("solver reported unknown".into())),
        None => Ok(SolverVerdict::Unknown("no status line in solver output".into())),
    }
}
