//! CNF encodings of the network existence problems.
//!
//! Four encodings are provided. Two work on fixed-size (sequential)
//! networks, the other two on fixed-depth (layered) networks:
//!
//! | encoding | shape | state variables | tracks |
//! |----------|-------|-----------------|--------|
//! | [`Encoding::Sfwd`] | size `s` | `o(k,m)` | vectors reachable after `k` comparators |
//! | [`Encoding::Sbck`] | size `s` | `q(k,m)` | vectors left unsorted by comparators `k+1..s` |
//! | [`Encoding::Dfwd`] | depth `d` | `p(k,i,m)` | reachable vectors, per sublayer |
//! | [`Encoding::Dbck`] | depth `d` | `r(k,i,m)` | unsorted vectors, per sublayer |
//!
//! A layer of a depth encoding is split into `n - 1` sublayers. Sublayer `i`
//! holds the comparator of that layer whose smaller channel is `i`, if any.
//!
//! Variables are numbered comparator variables first, then state variables
//! level by level, then auxiliaries, so that the output is reproducible.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cnf::{CnfBuilder, CnfFormula, Lit, OneHot, Var, VarKey, VarPool};
use crate::error::{Error, Result};
use crate::network::{self, BinaryVector, Comparator, NetworkClass, Ratio, VectorSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Encoding {
    Sfwd,
    Sbck,
    Dfwd,
    Dbck,
}

impl Encoding {
    pub const ALL: [Encoding; 4] = [Encoding::Sfwd, Encoding::Sbck, Encoding::Dfwd, Encoding::Dbck];

    pub fn is_depth(self) -> bool {
        matches!(self, Encoding::Dfwd | Encoding::Dbck)
    }

    pub fn is_forward(self) -> bool {
        matches!(self, Encoding::Sfwd | Encoding::Dfwd)
    }

    /// The encoding used when none is requested.
    pub fn default_for(class: NetworkClass, depth: bool) -> Encoding {
        match (class, depth) {
            (NetworkClass::Halver { .. }, _) => Encoding::Dfwd,
            (_, false) => Encoding::Sbck,
            (_, true) => Encoding::Dbck,
        }
    }
}

impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Encoding::Sfwd => "sfwd",
            Encoding::Sbck => "sbck",
            Encoding::Dfwd => "dfwd",
            Encoding::Dbck => "dbck",
        })
    }
}

impl FromStr for Encoding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sfwd" => Ok(Encoding::Sfwd),
            "sbck" => Ok(Encoding::Sbck),
            "dfwd" => Ok(Encoding::Dfwd),
            "dbck" => Ok(Encoding::Dbck),
            _ => Err(Error::InvalidArgument(format!(
                "unknown encoding {s:?} (expected sfwd, sbck, dfwd or dbck)"
            ))),
        }
    }
}

/// Fixed number of comparators or fixed number of layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Size(usize),
    Depth(usize),
}

impl Shape {
    pub fn bound(self) -> usize {
        match self {
            Shape::Size(s) | Shape::Depth(s) => s,
        }
    }

    pub fn is_depth(self) -> bool {
        matches!(self, Shape::Depth(_))
    }

    pub fn with_bound(self, bound: usize) -> Shape {
        match self {
            Shape::Size(_) => Shape::Size(bound),
            Shape::Depth(_) => Shape::Depth(bound),
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Size(s) => write!(f, "size {s}"),
            Shape::Depth(d) => write!(f, "depth {d}"),
        }
    }
}

/// Clause form of a transition between two levels of state variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClauseForm {
    /// Clauses shared by all comparators of a position are emitted once per
    /// vector, relying on at most one comparator being selected.
    Merged,
    /// One guarded case per comparator and vector, plus a guarded copy rule
    /// for empty sublayers.
    PerComparator,
    /// Merged, keeping only the implications that carry vectors toward the
    /// checked boundary. The state variables then over-approximate the exact
    /// sets, which leaves satisfiability unchanged. Not available for
    /// single-exception networks, whose boundary counts the unsorted inputs.
    Implication,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default)]
pub struct EncodingOptions {
    /// Upper bound on the total comparator count (depth shapes only).
    pub size_cap: Option<usize>,
    /// Allow only comparators between the two halves (halvers only).
    pub cross_half_only: bool,
    /// One-hot method for comparator selection and channel use.
    pub comparator_one_hot: OneHot,
    /// One-hot method for the single unsorted input.
    pub unsorted_one_hot: OneHot,
    pub forward_clauses: ClauseForm,
    pub backward_clauses: ClauseForm,
    /// Require adjacent comparators on disjoint channels to appear in
    /// increasing order (size shapes only). Any network can be reordered
    /// this way, so satisfiability is unchanged.
    pub canonical_order: bool,
    /// Forbid comparators that could be deleted without leaving the class
    /// (forward fixed-depth encoding only). Deleting them never makes a
    /// network larger or deeper, so satisfiability is unchanged.
    pub prune_redundant: bool,
    /// Keep a network only if it is lexicographically no larger than its
    /// mirror image (fixed-depth shapes only). Every class is closed under
    /// mirroring, so satisfiability is unchanged.
    pub break_reflection: bool,
}

impl Default for EncodingOptions {
    fn default() -> Self {
        Self {
            size_cap: None,
            cross_half_only: false,
            comparator_one_hot: OneHot::Pairwise,
            unsorted_one_hot: OneHot::Ladder,
            forward_clauses: ClauseForm::Merged,
            backward_clauses: ClauseForm::PerComparator,
            canonical_order: false,
            prune_redundant: false,
            break_reflection: false,
        }
    }
}

/// A complete description of one existence question.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub n: usize,
    pub class: NetworkClass,
    pub shape: Shape,
    pub encoding: Encoding,
    #[serde(default)]
    pub options: EncodingOptions,
}

impl ProblemSpec {
    pub fn new(n: usize, class: NetworkClass, shape: Shape, encoding: Encoding) -> Self {
        Self {
            n,
            class,
            shape,
            encoding,
            options: EncodingOptions::default(),
        }
    }

    /// Uses the default encoding for the class and shape.
    pub fn with_default_encoding(n: usize, class: NetworkClass, shape: Shape) -> Self {
        Self::new(n, class, shape, Encoding::default_for(class, shape.is_depth()))
    }

    pub fn with_options(mut self, options: EncodingOptions) -> Self {
        self.options = options;
        self
    }

    pub fn with_size_cap(mut self, cap: Option<usize>) -> Self {
        self.options.size_cap = cap;
        self
    }

    pub fn with_bound(mut self, bound: usize) -> Self {
        self.shape = self.shape.with_bound(bound);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidProblem(msg));
        if self.n < 2 || self.n > network::MAX_CHANNELS {
            return bad(format!("channel count {} outside 2..={}", self.n, network::MAX_CHANNELS));
        }
        if self.encoding.is_depth() != self.shape.is_depth() {
            return bad(format!("{} encodes fixed-{} problems, got {}", self.encoding,
                if self.encoding.is_depth() { "depth" } else { "size" }, self.shape));
        }
        match self.class {
            NetworkClass::Halver { .. } => {
                if self.encoding != Encoding::Dfwd {
                    return bad(format!("halvers are encoded with dfwd only, not {}", self.encoding));
                }
                if self.n % 2 != 0 {
                    return bad(format!("a halver needs an even channel count, got {}", self.n));
                }
            }
            NetworkClass::SingleException if self.encoding.is_forward() => {
                return bad(format!(
                    "single-exception networks are encoded with sbck or dbck only, not {}",
                    self.encoding
                ));
            }
            _ => {}
        }
        if self.options.size_cap.is_some() && !self.shape.is_depth() {
            return bad("a size cap applies to fixed-depth problems only".into());
        }
        let form = if self.encoding.is_forward() { self.options.forward_clauses } else { self.options.backward_clauses };
        if form == ClauseForm::Implication && self.class == NetworkClass::SingleException {
            return bad("implication-only clauses cannot encode single-exception networks".into());
        }
        if self.options.canonical_order && self.shape.is_depth() {
            return bad("canonical comparator order applies to fixed-size problems only".into());
        }
        if self.options.break_reflection && !self.shape.is_depth() {
            return bad("reflection breaking applies to fixed-depth problems only".into());
        }
        if self.options.prune_redundant && self.encoding != Encoding::Dfwd {
            return bad(format!("redundancy pruning needs dfwd, not {}", self.encoding));
        }
        if self.options.cross_half_only && !matches!(self.class, NetworkClass::Halver { .. }) {
            return bad("the cross-half restriction applies to halvers only".into());
        }
        Ok(())
    }
}

impl fmt::Display for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} n={} {} via {}", self.class, self.n, self.shape, self.encoding)?;
        if let Some(cap) = self.options.size_cap {
            write!(f, " cap={cap}")?;
        }
        if self.options.cross_half_only {
            f.write_str(" cross-half")?;
        }
        Ok(())
    }
}

/// Output vectors a network must never produce.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetPredicate {
    pub invalid: VectorSet,
}

impl TargetPredicate {
    /// Every unsorted vector.
    pub fn sorting(n: usize) -> Result<Self> {
        Ok(Self {
            invalid: VectorSet::from_predicate(n, |m| !network::is_sorted_vector(m, n))?,
        })
    }

    pub fn for_class(n: usize, class: NetworkClass) -> Result<Self> {
        match class {
            NetworkClass::Halver { epsilon } => halver_invalid_set(n, epsilon),
            _ => Self::sorting(n),
        }
    }
}

/// Outputs forbidden for an `epsilon`-halver on `n` channels.
///
/// With `h = n/2`, a vector with `p <= h` ones is invalid when more than
/// `floor(epsilon * p)` of them sit in channels `1..=h`; a vector with
/// `z <= h` zeros is invalid when more than `floor(epsilon * z)` of them sit
/// in channels `h+1..=n`.
pub fn halver_invalid_set(n: usize, epsilon: Ratio) -> Result<TargetPredicate> {
    if n % 2 != 0 {
        return Err(Error::InvalidArgument(format!("a halver needs an even channel count, got {n}")));
    }
    let h = n / 2;
    let low: BinaryVector = (1 << h) - 1;
    let high: BinaryVector = low << h;
    let invalid = VectorSet::from_predicate(n, |m| {
        let ones = m.count_ones() as u64;
        let zeros = n as u64 - ones;
        let ones_low = (m & low).count_ones() as u64;
        let zeros_high = (!m & high).count_ones() as u64;
        (ones <= h as u64 && ones_low > epsilon.floor_mul(ones))
            || (zeros <= h as u64 && zeros_high > epsilon.floor_mul(zeros))
    })?;
    Ok(TargetPredicate { invalid })
}

/// Comparator selection variables `g(k,i,j)` for `k = 1..=positions` and
/// every pair `i < j`, numbered consecutively.
#[derive(Debug, Clone)]
pub struct ComparatorVars {
    n: usize,
    positions: usize,
    pairs: Vec<Comparator>,
    first: u32,
}

impl ComparatorVars {
    pub fn register(b: &mut CnfBuilder, n: usize, positions: usize) -> Result<Self> {
        let pairs: Vec<Comparator> = (1..n)
            .flat_map(|i| (i + 1..=n).map(move |j| Comparator::new(i, j)))
            .collect::<Result<_>>()?;
        let first = b.pool().num_vars() + 1;
        for k in 1..=positions {
            for c in &pairs {
                b.register(VarKey::Comparator { k, i: c.i(), j: c.j() })?;
            }
        }
        Ok(Self { n, positions, pairs, first })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Positions (size shapes) or layers (depth shapes).
    pub fn positions(&self) -> usize {
        self.positions
    }

    pub fn pairs(&self) -> &[Comparator] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.positions * self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn pair_index(&self, i: usize, j: usize) -> usize {
        // Pairs are listed by i, then j.
        (i - 1) * (2 * self.n - i) / 2 + (j - i - 1)
    }

    /// `g(k,i,j)`, with `k` 1-based.
    pub fn var(&self, k: usize, c: Comparator) -> Var {
        debug_assert!(1 <= k && k <= self.positions && c.j() <= self.n);
        let offset = (k - 1) * self.pairs.len() + self.pair_index(c.i(), c.j());
        Var::new(self.first + offset as u32).expect("registered variable")
    }

    pub fn at(&self, k: usize) -> impl Iterator<Item = (Comparator, Var)> + '_ {
        self.pairs.iter().map(move |&c| (c, self.var(k, c)))
    }

    pub fn all(&self) -> impl Iterator<Item = Var> + '_ {
        (0..self.len()).map(move |o| Var::new(self.first + o as u32).expect("registered variable"))
    }
}

/// Which family of state variables a [`StateVars`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKind {
    Output,
    Unsorted,
    ForwardSub,
    BackwardSub,
}

/// `levels` consecutive blocks of `2^n` state variables. For size encodings
/// level `k` is position `k`; for depth encodings level 0 is the input level
/// `(0, n-1)` and level `(k-1)(n-1) + i` is sublayer `i` of layer `k`.
#[derive(Debug, Clone)]
pub struct StateVars {
    kind: StateKind,
    n: usize,
    levels: usize,
    first: u32,
}

impl StateVars {
    pub fn register(b: &mut CnfBuilder, kind: StateKind, n: usize, levels: usize) -> Result<Self> {
        let first = b.pool().num_vars() + 1;
        let width = network::vector_count(n) as BinaryVector;
        for level in 0..levels {
            let (k, i) = match kind {
                StateKind::Output | StateKind::Unsorted => (level, 0),
                StateKind::ForwardSub | StateKind::BackwardSub if level == 0 => (0, n - 1),
                _ => ((level - 1) / (n - 1) + 1, (level - 1) % (n - 1) + 1),
            };
            for m in 0..width {
                b.register(match kind {
                    StateKind::Output => VarKey::Output { k, m },
                    StateKind::Unsorted => VarKey::Unsorted { k, m },
                    StateKind::ForwardSub => VarKey::ForwardSub { k, i, m },
                    StateKind::BackwardSub => VarKey::BackwardSub { k, i, m },
                })?;
            }
        }
        Ok(Self { kind, n, levels, first })
    }

    pub fn kind(&self) -> StateKind {
        self.kind
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn len(&self) -> usize {
        self.levels * self.width()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn width(&self) -> usize {
        network::vector_count(self.n)
    }

    pub fn var(&self, level: usize, m: BinaryVector) -> Var {
        debug_assert!(level < self.levels && (m as usize) < self.width());
        Var::new(self.first + (level * self.width()) as u32 + m).expect("registered variable")
    }

    pub fn last(&self) -> usize {
        self.levels - 1
    }
}

fn check_same_n(g: &ComparatorVars, state: &StateVars) {
    assert_eq!(g.n, state.n, "comparator and state variables disagree on n");
}

/// Exactly one comparator at every position.
pub fn valid_size_constraints(b: &mut CnfBuilder, g: &ComparatorVars, method: OneHot) -> Result<()> {
    for k in 1..=g.positions {
        let lits: Vec<Lit> = g.at(k).map(|(_, v)| v.pos()).collect();
        b.exactly_one(&lits, method)?;
    }
    Ok(())
}

/// Every channel is used at most once per layer. Layers may be partial.
pub fn valid_depth_constraints(b: &mut CnfBuilder, g: &ComparatorVars, method: OneHot) {
    for k in 1..=g.positions {
        for ch in 1..=g.n {
            let lits: Vec<Lit> = g
                .at(k)
                .filter(|(c, _)| c.touches(ch))
                .map(|(_, v)| v.pos())
                .collect();
            b.at_most_one(&lits, method);
        }
    }
}

/// How comparator `c` acts on the output vector `m` of a forward step.
enum FwdCase {
    /// `m` has a 0 on channel `i` and a 1 on channel `j`; `w` is the other
    /// preimage of `m`.
    Merge(BinaryVector),
    /// Equal bits on `i` and `j`: `m` passes through.
    Copy,
    /// A 1 on `i` above a 0 on `j`: `m` cannot be an output.
    Impossible,
}

fn fwd_case(c: Comparator, m: BinaryVector) -> FwdCase {
    let (lo, hi) = c.masks();
    match (m & lo != 0, m & hi != 0) {
        (false, true) => FwdCase::Merge(m ^ (lo | hi)),
        (true, false) => FwdCase::Impossible,
        _ => FwdCase::Copy,
    }
}

/// One forward step from level `prev` to level `cur`, selected by the
/// comparator literals `options`. With `allow_none`, no comparator being
/// selected copies the level unchanged.
fn forward_step(
    b: &mut CnfBuilder,
    state: &StateVars,
    prev: usize,
    cur: usize,
    options: &[(Comparator, Var)],
    allow_none: bool,
    form: ClauseForm,
) -> Result<()> {
    let width = state.width() as BinaryVector;
    let mut wide = Vec::new();
    for m in 0..width {
        let a = state.var(cur, m).pos();
        let pm = state.var(prev, m).pos();
        match form {
            ClauseForm::PerComparator => {
                for &(c, g) in options {
                    match fwd_case(c, m) {
                        FwdCase::Merge(w) => b.guarded_equiv(g.pos(), a, &[pm, state.var(prev, w).pos()])?,
                        FwdCase::Copy => b.guarded_equiv(g.pos(), a, &[pm])?,
                        FwdCase::Impossible => b.guarded_unit(g.pos(), !a),
                    }
                }
                if allow_none {
                    wide.clear();
                    wide.extend(options.iter().map(|(_, g)| g.pos()));
                    wide.extend([!a, pm]);
                    b.add_clause(&wide);
                    let len = wide.len();
                    wide[len - 2] = a;
                    wide[len - 1] = !pm;
                    b.add_clause(&wide);
                }
            }
            ClauseForm::Merged | ClauseForm::Implication => {
                // a <- pm unless an impossible-case comparator is selected.
                wide.clear();
                wide.extend([a, !pm]);
                wide.extend(
                    options
                        .iter()
                        .filter(|(c, _)| matches!(fwd_case(*c, m), FwdCase::Impossible))
                        .map(|(_, g)| g.pos()),
                );
                b.add_clause(&wide);
                if form == ClauseForm::Implication {
                    for &(c, g) in options {
                        if let FwdCase::Merge(w) = fwd_case(c, m) {
                            b.add_clause(&[!g.pos(), a, !state.var(prev, w).pos()]);
                        }
                    }
                    continue;
                }
                // a -> pm whenever a copying option is selected.
                wide.clear();
                wide.extend([!a, pm]);
                wide.extend(
                    options
                        .iter()
                        .filter(|(c, _)| !matches!(fwd_case(*c, m), FwdCase::Copy))
                        .map(|(_, g)| g.pos()),
                );
                b.add_clause(&wide);
                for &(c, g) in options {
                    match fwd_case(c, m) {
                        FwdCase::Merge(w) => {
                            let pw = state.var(prev, w).pos();
                            b.add_clause(&[!g.pos(), !a, pm, pw]);
                            b.add_clause(&[!g.pos(), a, !pw]);
                        }
                        FwdCase::Impossible => b.guarded_unit(g.pos(), !a),
                        FwdCase::Copy => {}
                    }
                }
            }
        }
    }
    Ok(())
}

/// One backward step: `state[prev][m] <-> state[cur][c(m)]` under the
/// selected comparator, and a copy when nothing is selected (if allowed).
fn backward_step(
    b: &mut CnfBuilder,
    state: &StateVars,
    prev: usize,
    cur: usize,
    options: &[(Comparator, Var)],
    allow_none: bool,
    form: ClauseForm,
) -> Result<()> {
    let width = state.width() as BinaryVector;
    let mut wide = Vec::new();
    for m in 0..width {
        let before = state.var(prev, m).pos();
        let after = state.var(cur, m).pos();
        match form {
            ClauseForm::PerComparator => {
                for &(c, g) in options {
                    b.guarded_equiv(g.pos(), before, &[state.var(cur, c.apply(m)).pos()])?;
                }
                if allow_none {
                    wide.clear();
                    wide.extend(options.iter().map(|(_, g)| g.pos()));
                    wide.extend([!before, after]);
                    b.add_clause(&wide);
                    let len = wide.len();
                    wide[len - 2] = before;
                    wide[len - 1] = !after;
                    b.add_clause(&wide);
                }
            }
            ClauseForm::Merged | ClauseForm::Implication => {
                // Copy unless a comparator that moves `m` is selected.
                wide.clear();
                wide.extend([!before, after]);
                wide.extend(options.iter().filter(|(c, _)| c.apply(m) != m).map(|(_, g)| g.pos()));
                if form == ClauseForm::Implication {
                    wide[0] = before;
                    wide[1] = !after;
                    b.add_clause(&wide);
                    for &(c, g) in options {
                        let w = c.apply(m);
                        if w != m {
                            b.add_clause(&[!g.pos(), before, !state.var(cur, w).pos()]);
                        }
                    }
                    continue;
                }
                b.add_clause(&wide);
                wide[0] = before;
                wide[1] = !after;
                b.add_clause(&wide);
                for &(c, g) in options {
                    let w = c.apply(m);
                    if w != m {
                        b.guarded_equiv(g.pos(), before, &[state.var(cur, w).pos()])?;
                    }
                }
            }
        }
    }
    Ok(())
}

/// `o(k,·)` is the image of `o(k-1,·)` under the comparator at position `k`.
pub fn forward_size_constraints(
    b: &mut CnfBuilder,
    g: &ComparatorVars,
    o: &StateVars,
    form: ClauseForm,
) -> Result<()> {
    check_same_n(g, o);
    for k in 1..=g.positions {
        let options: Vec<_> = g.at(k).collect();
        forward_step(b, o, k - 1, k, &options, false, form)?;
    }
    Ok(())
}

/// `q(k-1,m) <-> q(k,c(m))` for the comparator `c` at position `k`.
pub fn backward_size_constraints(
    b: &mut CnfBuilder,
    g: &ComparatorVars,
    q: &StateVars,
    form: ClauseForm,
) -> Result<()> {
    check_same_n(g, q);
    for k in 1..=g.positions {
        let options: Vec<_> = g.at(k).collect();
        backward_step(b, q, k - 1, k, &options, false, form)?;
    }
    Ok(())
}

fn sublayers(g: &ComparatorVars) -> impl Iterator<Item = (usize, usize, Vec<(Comparator, Var)>)> + '_ {
    let n = g.n;
    (1..=g.positions).flat_map(move |k| {
        (1..n).map(move |i| {
            let level = (k - 1) * (n - 1) + i;
            let options = g.at(k).filter(|(c, _)| c.i() == i).collect();
            (level - 1, level, options)
        })
    })
}

/// Forward transition through every sublayer of every layer.
pub fn forward_depth_constraints(
    b: &mut CnfBuilder,
    g: &ComparatorVars,
    p: &StateVars,
    form: ClauseForm,
) -> Result<()> {
    check_same_n(g, p);
    for (prev, cur, options) in sublayers(g) {
        forward_step(b, p, prev, cur, &options, true, form)?;
    }
    Ok(())
}

/// Backward transition through every sublayer of every layer.
pub fn backward_depth_constraints(
    b: &mut CnfBuilder,
    g: &ComparatorVars,
    r: &StateVars,
    form: ClauseForm,
) -> Result<()> {
    check_same_n(g, r);
    for (prev, cur, options) in sublayers(g) {
        backward_step(b, r, prev, cur, &options, true, form)?;
    }
    Ok(())
}

/// Forbids comparators with both channels in the same half.
pub fn cross_half_restriction(b: &mut CnfBuilder, g: &ComparatorVars) -> Result<()> {
    if g.n % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "the cross-half restriction needs an even channel count, got {}",
            g.n
        )));
    }
    let h = g.n / 2;
    for k in 1..=g.positions {
        for (c, v) in g.at(k) {
            if (c.j() <= h) || (c.i() > h) {
                b.add_clause(&[v.neg()]);
            }
        }
    }
    Ok(())
}

/// Forbids a comparator at position `k + 1` that shares no channel with the
/// one at position `k` and precedes it lexicographically.
pub fn canonical_order_constraints(b: &mut CnfBuilder, g: &ComparatorVars) {
    for k in 1..g.positions {
        for (first, x) in g.at(k) {
            for (second, y) in g.at(k + 1) {
                let disjoint = !first.touches(second.i()) && !first.touches(second.j());
                if disjoint && (second.i(), second.j()) < (first.i(), first.j()) {
                    b.add_clause(&[x.neg(), y.neg()]);
                }
            }
        }
    }
}

/// Every comparator of a fixed-depth network swaps at least one vector that
/// reaches its sublayer.
pub fn active_comparator_constraints(b: &mut CnfBuilder, g: &ComparatorVars, p: &StateVars) {
    check_same_n(g, p);
    assert_eq!(p.kind, StateKind::ForwardSub, "activity is read off forward states");
    for (prev, _, options) in sublayers(g) {
        if prev == 0 {
            continue;
        }
        for (c, v) in options {
            let (hi, lo) = (1 << (c.i() - 1), 1 << (c.j() - 1));
            let mut clause = vec![v.neg()];
            clause.extend(
                (0..network::vector_count(g.n) as BinaryVector)
                    .filter(|m| m & hi != 0 && m & lo == 0)
                    .map(|m| p.var(prev, m).pos()),
            );
            b.add_clause(&clause);
        }
    }
}

/// Every halver comparator inside one half must feed, possibly through more
/// comparators inside that half, a later comparator between the halves.
/// Otherwise the values it moves never leave their half and it can be
/// deleted.
pub fn half_escape_constraints(b: &mut CnfBuilder, g: &ComparatorVars) -> Result<()> {
    if g.n % 2 != 0 {
        return Err(Error::InvalidArgument(format!("halves need an even channel count, got {}", g.n)));
    }
    let (n, h, d) = (g.n, g.n / 2, g.positions);
    let var = |k: usize, a: usize, e: usize| g.var(k, Comparator::new(a.min(e), a.max(e)).expect("distinct channels"));
    let same_half = |a: usize, e: usize| (a <= h) == (e <= h);
    // esc[k][c - 1], for layers k < d: the values on channel c after layer
    // k reach a cross-half comparator later on.
    let esc: Vec<Vec<Var>> = (0..d).map(|k| if k == 0 { Vec::new() } else { (0..n).map(|_| b.fresh()).collect() }).collect();
    for k in 1..d {
        for c in 1..=n {
            let mut clause = vec![esc[k][c - 1].neg()];
            if k + 1 < d {
                clause.push(esc[k + 1][c - 1].pos());
            }
            for e in (1..=n).filter(|&e| e != c) {
                if !same_half(c, e) {
                    clause.push(var(k + 1, c, e).pos());
                } else if k + 1 < d {
                    let t = b.fresh();
                    b.add_clause(&[t.neg(), var(k + 1, c, e).pos()]);
                    b.add_clause(&[t.neg(), esc[k + 1][e - 1].pos()]);
                    clause.push(t.pos());
                }
            }
            b.add_clause(&clause);
        }
    }
    for k in 1..=d {
        for (cmp, v) in g.at(k) {
            if same_half(cmp.i(), cmp.j()) {
                let mut clause = vec![v.neg()];
                if let Some(after) = esc.get(k) {
                    clause.extend([after[cmp.i() - 1].pos(), after[cmp.j() - 1].pos()]);
                }
                b.add_clause(&clause);
            }
        }
    }
    Ok(())
}

/// The comparator variables, layer by layer, are lexicographically no
/// larger than those of the mirror image, which maps `(i,j)` to
/// `(n+1-j, n+1-i)`.
pub fn reflection_constraints(b: &mut CnfBuilder, g: &ComparatorVars) {
    let n = g.n;
    let pairs: Vec<(Var, Var)> = (1..=g.positions)
        .flat_map(|k| {
            g.at(k).map(move |(c, v)| {
                let m = Comparator::new(n + 1 - c.j(), n + 1 - c.i()).expect("mirror of a comparator");
                (v, g.var(k, m))
            })
        })
        .filter(|(v, w)| v != w)
        .collect();
    // equal: every earlier pair agrees.
    let mut equal: Option<Var> = None;
    for (idx, &(x, y)) in pairs.iter().enumerate() {
        let guard: Vec<Lit> = equal.map(|e| e.neg()).into_iter().collect();
        b.add_clause(&[guard.clone(), vec![x.neg(), y.pos()]].concat());
        if idx + 1 == pairs.len() {
            break;
        }
        let next = b.fresh();
        b.add_clause(&[guard.clone(), vec![x.neg(), y.neg(), next.pos()]].concat());
        b.add_clause(&[guard, vec![x.pos(), y.pos(), next.pos()]].concat());
        equal = Some(next);
    }
}

/// At most `cap` comparator variables are true overall.
pub fn size_cap_constraints(b: &mut CnfBuilder, g: &ComparatorVars, cap: usize) {
    let lits: Vec<Lit> = g.all().map(Var::pos).collect();
    b.cardinality_at_most(&lits, cap);
}

fn unsorted(n: usize) -> impl Iterator<Item = (BinaryVector, bool)> {
    (0..network::vector_count(n) as BinaryVector).map(move |m| (m, !network::is_sorted_vector(m, n)))
}

/// Size breakdown of a built formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodingStats {
    pub comparator_vars: usize,
    pub state_vars: usize,
    pub aux_vars: usize,
    pub num_vars: usize,
    pub num_clauses: usize,
    pub num_literals: usize,
}

/// A built formula together with its variable registry.
#[derive(Debug, Clone)]
pub struct Encoded {
    pub spec: ProblemSpec,
    pub formula: CnfFormula,
    pub pool: VarPool,
    pub stats: EncodingStats,
    pub comparators: ComparatorVars,
}

/// Builds the formula for `spec`.
pub fn build(spec: &ProblemSpec) -> Result<Encoded> {
    spec.validate()?;
    let n = spec.n;
    let bound = spec.shape.bound();
    let opts = spec.options;
    let mut b = CnfBuilder::new();
    let g = ComparatorVars::register(&mut b, n, bound)?;
    let levels = if spec.shape.is_depth() { bound * (n - 1) + 1 } else { bound + 1 };
    let kind = match spec.encoding {
        Encoding::Sfwd => StateKind::Output,
        Encoding::Sbck => StateKind::Unsorted,
        Encoding::Dfwd => StateKind::ForwardSub,
        Encoding::Dbck => StateKind::BackwardSub,
    };
    let state = StateVars::register(&mut b, kind, n, levels)?;
    let registered = b.pool().num_vars() as usize;

    if spec.shape.is_depth() {
        valid_depth_constraints(&mut b, &g, opts.comparator_one_hot);
    } else {
        valid_size_constraints(&mut b, &g, opts.comparator_one_hot)?;
    }
    match spec.encoding {
        Encoding::Sfwd => forward_size_constraints(&mut b, &g, &state, opts.forward_clauses)?,
        Encoding::Sbck => backward_size_constraints(&mut b, &g, &state, opts.backward_clauses)?,
        Encoding::Dfwd => forward_depth_constraints(&mut b, &g, &state, opts.forward_clauses)?,
        Encoding::Dbck => backward_depth_constraints(&mut b, &g, &state, opts.backward_clauses)?,
    }

    let last = state.last();
    if spec.encoding.is_forward() {
        for m in 0..network::vector_count(n) as BinaryVector {
            b.add_clause(&[state.var(0, m).pos()]);
        }
        let target = TargetPredicate::for_class(n, spec.class)?;
        for m in target.invalid.iter() {
            b.add_clause(&[state.var(last, m).neg()]);
        }
    } else {
        for (m, is_unsorted) in unsorted(n) {
            b.add_clause(&[state.var(last, m).lit(is_unsorted)]);
        }
        let inputs: Vec<Lit> = (0..network::vector_count(n) as BinaryVector)
            .map(|m| state.var(0, m).pos())
            .collect();
        match spec.class {
            NetworkClass::SingleException => b.exactly_one(&inputs, opts.unsorted_one_hot)?,
            _ => {
                for l in inputs {
                    b.add_clause(&[!l]);
                }
            }
        }
    }

    if opts.cross_half_only {
        cross_half_restriction(&mut b, &g)?;
    }
    if let Some(cap) = opts.size_cap {
        size_cap_constraints(&mut b, &g, cap);
    }
    if opts.canonical_order {
        canonical_order_constraints(&mut b, &g);
    }
    if opts.break_reflection {
        reflection_constraints(&mut b, &g);
    }
    if opts.prune_redundant {
        active_comparator_constraints(&mut b, &g, &state);
        if let NetworkClass::Halver { .. } = spec.class {
            half_escape_constraints(&mut b, &g)?;
        }
    }

    let (formula, pool) = b.finish();
    let stats = EncodingStats {
        comparator_vars: g.len(),
        state_vars: state.len(),
        aux_vars: pool.num_vars() as usize - registered,
        num_vars: formula.num_vars() as usize,
        num_clauses: formula.num_clauses(),
        num_literals: formula.num_literals(),
    };
    Ok(Encoded { spec: *spec, formula, pool, stats, comparators: g })
}

fn build_as(spec: &ProblemSpec, encoding: Encoding) -> Result<Encoded> {
    if spec.encoding != encoding {
        return Err(Error::InvalidProblem(format!(
            "expected a {encoding} problem, got {}",
            spec.encoding
        )));
    }
    build(spec)
}

/// Forward fixed-size encoding of sorting networks.
pub fn build_sfwd(spec: &ProblemSpec) -> Result<Encoded> {
    if spec.class != NetworkClass::Sorting {
        return Err(Error::InvalidProblem("sfwd encodes sorting networks only".into()));
    }
    build_as(spec, Encoding::Sfwd)
}

/// Backward fixed-size encoding of sorting networks.
pub fn build_sbck(spec: &ProblemSpec) -> Result<Encoded> {
    if spec.class != NetworkClass::Sorting {
        return Err(Error::InvalidProblem("use build_single_size for single-exception networks".into()));
    }
    build_as(spec, Encoding::Sbck)
}

/// Backward fixed-size encoding of single-exception networks.
pub fn build_single_size(spec: &ProblemSpec) -> Result<Encoded> {
    if spec.class != NetworkClass::SingleException {
        return Err(Error::InvalidProblem("expected a single-exception problem".into()));
    }
    build_as(spec, Encoding::Sbck)
}

/// Forward fixed-depth encoding of sorting networks and halvers.
pub fn build_dfwd(spec: &ProblemSpec) -> Result<Encoded> {
    build_as(spec, Encoding::Dfwd)
}

/// Backward fixed-depth encoding of sorting networks.
pub fn build_dbck(spec: &ProblemSpec) -> Result<Encoded> {
    if spec.class != NetworkClass::Sorting {
        return Err(Error::InvalidProblem("use build_single_depth for single-exception networks".into()));
    }
    build_as(spec, Encoding::Dbck)
}

/// Backward fixed-depth encoding of single-exception networks.
pub fn build_single_depth(spec: &ProblemSpec) -> Result<Encoded> {
    if spec.class != NetworkClass::SingleException {
        return Err(Error::InvalidProblem("expected a single-exception problem".into()));
    }
    build_as(spec, Encoding::Dbck)
}
