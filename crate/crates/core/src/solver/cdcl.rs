//! A compact CDCL SAT solver.
//!
//! Two watched literals with blockers, first-UIP learning with recursive
//! minimization, VSIDS with phase saving, restarts driven by moving averages
//! of learnt-clause LBD, and periodic deletion of high-LBD learnt clauses.

use std::time::Instant;

use crate::cnf::CnfFormula;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
struct L(u32);

impl L {
    fn from_dimacs(x: i32) -> L {
        let v = x.unsigned_abs() - 1;
        L(v << 1 | (x < 0) as u32)
    }

    #[inline]
    fn var(self) -> usize {
        (self.0 >> 1) as usize
    }

    #[inline]
    fn idx(self) -> usize {
        self.0 as usize
    }

    #[inline]
    fn neg(self) -> L {
        L(self.0 ^ 1)
    }

    #[inline]
    fn sign(self) -> u8 {
        (self.0 & 1) as u8
    }
}

type CRef = u32;
const NO_REASON: CRef = u32::MAX;

const TRUE: u8 = 0;
const FALSE: u8 = 1;
const UNDEF: u8 = 2;

// Clause header: length, then flags with the LBD above them.
const LEARNT: u32 = 1;
const DELETED: u32 = 2;
const RELOCATED: u32 = 4;
const FLAG_BITS: u32 = 3;
const HEADER: usize = 2;

#[derive(Clone, Copy)]
struct Watcher {
    cref: CRef,
    blocker: L,
}

/// Outcome of [`Cdcl::solve`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    /// `model[v]` is the value of variable `v + 1`.
    Sat(Vec<bool>),
    Unsat,
    /// Deadline reached.
    Interrupted,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub conflicts: u64,
    pub decisions: u64,
    pub propagations: u64,
    pub restarts: u64,
    pub reductions: u64,
    pub learnt_literals: u64,
}

/// Indexed max-heap over variables keyed by activity.
#[derive(Default)]
struct Heap {
    items: Vec<u32>,
    pos: Vec<u32>,
}

const NOT_IN_HEAP: u32 = u32::MAX;

impl Heap {
    fn with_vars(n: usize) -> Self {
        Self {
            items: Vec::with_capacity(n),
            pos: vec![NOT_IN_HEAP; n],
        }
    }

    fn contains(&self, v: usize) -> bool {
        self.pos[v] != NOT_IN_HEAP
    }

    fn insert(&mut self, v: usize, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.pos[v] = self.items.len() as u32;
        self.items.push(v as u32);
        self.sift_up(self.items.len() - 1, act);
    }

    fn pop(&mut self, act: &[f64]) -> Option<usize> {
        let top = *self.items.first()? as usize;
        let last = self.items.pop().expect("non-empty");
        self.pos[top] = NOT_IN_HEAP;
        if !self.items.is_empty() {
            self.items[0] = last;
            self.pos[last as usize] = 0;
            self.sift_down(0, act);
        }
        Some(top)
    }

    fn increased(&mut self, v: usize, act: &[f64]) {
        if self.contains(v) {
            self.sift_up(self.pos[v] as usize, act);
        }
    }

    fn sift_up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.items[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            let p = self.items[parent];
            if act[p as usize] >= act[v as usize] {
                break;
            }
            self.items[i] = p;
            self.pos[p as usize] = i as u32;
            i = parent;
        }
        self.items[i] = v;
        self.pos[v as usize] = i as u32;
    }

    fn sift_down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.items[i];
        let len = self.items.len();
        loop {
            let left = 2 * i + 1;
            if left >= len {
                break;
            }
            let right = left + 1;
            let child = if right < len && act[self.items[right] as usize] > act[self.items[left] as usize] {
                right
            } else {
                left
            };
            let c = self.items[child];
            if act[c as usize] <= act[v as usize] {
                break;
            }
            self.items[i] = c;
            self.pos[c as usize] = i as u32;
            i = child;
        }
        self.items[i] = v;
        self.pos[v as usize] = i as u32;
    }
}

/// Exponential moving average with bias correction during warm-up.
#[derive(Clone, Copy)]
struct Ema {
    value: f64,
    alpha: f64,
    beta: f64,
    wait: u64,
    period: u64,
}

impl Ema {
    fn new(alpha: f64) -> Self {
        Self { value: 0.0, alpha, beta: 1.0, wait: 1, period: 1 }
    }

    fn update(&mut self, x: f64) {
        self.value += self.beta * (x - self.value);
        if self.beta > self.alpha {
            self.wait -= 1;
            if self.wait == 0 {
                self.period *= 2;
                self.wait = self.period;
                self.beta = (self.beta * 0.5).max(self.alpha);
            }
        }
    }
}

pub struct Cdcl {
    num_vars: usize,
    db: Vec<u32>,
    clauses: Vec<CRef>,
    learnts: Vec<CRef>,
    wasted: usize,
    watches: Vec<Vec<Watcher>>,
    assigns: Vec<u8>,
    level: Vec<u32>,
    reason: Vec<CRef>,
    trail: Vec<L>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    var_decay: f64,
    heap: Heap,
    polarity: Vec<u8>,
    seen: Vec<u8>,
    level_stamp: Vec<u64>,
    stamp: u64,
    ok: bool,
    simplified_at: usize,
    lbd_fast: Ema,
    lbd_slow: Ema,
    next_reduce: u64,
    reduce_increment: u64,
    stats: Stats,
}

impl Cdcl {
    pub fn new(formula: &CnfFormula) -> Self {
        let n = formula.num_vars() as usize;
        let mut s = Cdcl {
            num_vars: n,
            db: Vec::with_capacity(formula.num_literals() + HEADER * formula.num_clauses()),
            clauses: Vec::with_capacity(formula.num_clauses()),
            learnts: Vec::new(),
            wasted: 0,
            watches: vec![Vec::new(); 2 * n],
            assigns: vec![UNDEF; n],
            level: vec![0; n],
            reason: vec![NO_REASON; n],
            trail: Vec::with_capacity(n),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: vec![0.0; n],
            var_inc: 1.0,
            var_decay: 0.8,
            heap: Heap::with_vars(n),
            polarity: vec![FALSE; n],
            seen: vec![0; n],
            level_stamp: vec![0; n + 1],
            stamp: 0,
            ok: true,
            simplified_at: 0,
            lbd_fast: Ema::new(1.0 / 32.0),
            lbd_slow: Ema::new(1.0 / 4096.0),
            next_reduce: 2000,
            reduce_increment: 300,
            stats: Stats::default(),
        };
        for v in 0..n {
            s.heap.insert(v, &s.activity);
        }
        let mut buf = Vec::new();
        for clause in formula.clauses() {
            buf.clear();
            buf.extend(clause.iter().map(|l| L::from_dimacs(l.to_dimacs())));
            if !s.add_clause(&mut buf) {
                s.ok = false;
                break;
            }
        }
        s
    }

    pub fn stats(&self) -> Stats {
        self.stats
    }

    #[inline]
    fn value(&self, l: L) -> u8 {
        let a = self.assigns[l.var()];
        if a == UNDEF {
            UNDEF
        } else {
            a ^ l.sign()
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    /// Adds a clause at decision level 0. Returns false once the formula is
    /// known to be unsatisfiable.
    fn add_clause(&mut self, lits: &mut Vec<L>) -> bool {
        debug_assert_eq!(self.decision_level(), 0);
        lits.sort_unstable_by_key(|l| l.0);
        lits.dedup();
        let mut j = 0;
        for i in 0..lits.len() {
            let l = lits[i];
            if i + 1 < lits.len() && lits[i + 1] == l.neg() {
                return true;
            }
            match self.value(l) {
                TRUE => return true,
                FALSE => {}
                _ => {
                    lits[j] = l;
                    j += 1;
                }
            }
        }
        lits.truncate(j);
        match lits.len() {
            0 => false,
            1 => {
                self.enqueue(lits[0], NO_REASON);
                self.propagate() == NO_REASON
            }
            _ => {
                let c = self.alloc(lits, false, 0);
                self.clauses.push(c);
                self.attach(c);
                true
            }
        }
    }

    fn alloc(&mut self, lits: &[L], learnt: bool, lbd: u32) -> CRef {
        let c = self.db.len() as CRef;
        self.db.push(lits.len() as u32);
        self.db.push((lbd << FLAG_BITS) | if learnt { LEARNT } else { 0 });
        self.db.extend(lits.iter().map(|l| l.0));
        c
    }

    #[inline]
    fn clause_len(&self, c: CRef) -> usize {
        self.db[c as usize] as usize
    }

    #[inline]
    fn lit(&self, c: CRef, k: usize) -> L {
        L(self.db[c as usize + HEADER + k])
    }

    fn lbd_of(&self, c: CRef) -> u32 {
        self.db[c as usize + 1] >> FLAG_BITS
    }

    fn attach(&mut self, c: CRef) {
        let (a, b) = (self.lit(c, 0), self.lit(c, 1));
        self.watches[a.neg().idx()].push(Watcher { cref: c, blocker: b });
        self.watches[b.neg().idx()].push(Watcher { cref: c, blocker: a });
    }

    #[inline]
    fn enqueue(&mut self, l: L, reason: CRef) {
        let v = l.var();
        self.assigns[v] = l.sign();
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Unit propagation. Returns the conflicting clause or `NO_REASON`.
    fn propagate(&mut self) -> CRef {
        let mut conflict = NO_REASON;
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = p.neg();
            let mut ws = std::mem::take(&mut self.watches[p.idx()]);
            let (mut i, mut j) = (0, 0);
            'watch: while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.value(w.blocker) == TRUE {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let base = w.cref as usize + HEADER;
                let len = self.db[w.cref as usize] as usize;
                if self.db[base] == false_lit.0 {
                    self.db.swap(base, base + 1);
                }
                let first = L(self.db[base]);
                let nw = Watcher { cref: w.cref, blocker: first };
                if first != w.blocker && self.value(first) == TRUE {
                    ws[j] = nw;
                    j += 1;
                    continue;
                }
                for k in 2..len {
                    let l = L(self.db[base + k]);
                    if self.value(l) != FALSE {
                        self.db[base + 1] = l.0;
                        self.db[base + k] = false_lit.0;
                        self.watches[l.neg().idx()].push(nw);
                        continue 'watch;
                    }
                }
                ws[j] = nw;
                j += 1;
                if self.value(first) == FALSE {
                    conflict = w.cref;
                    self.qhead = self.trail.len();
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.enqueue(first, w.cref);
                }
            }
            ws.truncate(j);
            self.watches[p.idx()] = ws;
            if conflict != NO_REASON {
                break;
            }
        }
        conflict
    }

    fn cancel_until(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let lim = self.trail_lim[level as usize];
        for k in (lim..self.trail.len()).rev() {
            let l = self.trail[k];
            let v = l.var();
            self.polarity[v] = l.sign();
            self.assigns[v] = UNDEF;
            self.reason[v] = NO_REASON;
            self.heap.insert(v, &self.activity);
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(level as usize);
        self.qhead = lim;
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.increased(v, &self.activity);
    }

    fn abstract_level(&self, v: usize) -> u32 {
        1 << (self.level[v] & 31)
    }

    /// First-UIP conflict analysis. Returns the learnt clause (asserting
    /// literal first, highest remaining level second) and the backtrack level.
    fn analyze(&mut self, mut conflict: CRef, learnt: &mut Vec<L>) -> u32 {
        learnt.clear();
        learnt.push(L(0));
        let current = self.decision_level();
        let mut pending = 0usize;
        let mut p: Option<L> = None;
        let mut index = self.trail.len();
        loop {
            let skip = p.is_some() as usize;
            let len = self.clause_len(conflict);
            for k in skip..len {
                let q = self.lit(conflict, k);
                let v = q.var();
                if self.seen[v] == 0 && self.level[v] > 0 {
                    self.bump_var(v);
                    self.seen[v] = 1;
                    if self.level[v] >= current {
                        pending += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].var()] != 0 {
                    break;
                }
            }
            let pl = self.trail[index];
            p = Some(pl);
            conflict = self.reason[pl.var()];
            self.seen[pl.var()] = 0;
            pending -= 1;
            if pending == 0 {
                break;
            }
        }
        learnt[0] = p.expect("conflict at level > 0").neg();

        // Recursive minimization.
        let mut to_clear: Vec<L> = learnt.clone();
        let levels = learnt[1..].iter().fold(0u32, |acc, l| acc | self.abstract_level(l.var()));
        let mut j = 1;
        for i in 1..learnt.len() {
            let l = learnt[i];
            if self.reason[l.var()] == NO_REASON || !self.lit_redundant(l, levels, &mut to_clear) {
                learnt[j] = l;
                j += 1;
            }
        }
        learnt.truncate(j);
        for l in to_clear {
            self.seen[l.var()] = 0;
        }

        if learnt.len() == 1 {
            return 0;
        }
        let mut max_i = 1;
        for i in 2..learnt.len() {
            if self.level[learnt[i].var()] > self.level[learnt[max_i].var()] {
                max_i = i;
            }
        }
        learnt.swap(1, max_i);
        self.level[learnt[1].var()]
    }

    fn lit_redundant(&mut self, p: L, levels: u32, to_clear: &mut Vec<L>) -> bool {
        let mut stack = vec![p];
        let top = to_clear.len();
        while let Some(q) = stack.pop() {
            let c = self.reason[q.var()];
            debug_assert_ne!(c, NO_REASON);
            for k in 1..self.clause_len(c) {
                let l = self.lit(c, k);
                let v = l.var();
                if self.seen[v] == 0 && self.level[v] > 0 {
                    if self.reason[v] != NO_REASON && self.abstract_level(v) & levels != 0 {
                        self.seen[v] = 1;
                        stack.push(l);
                        to_clear.push(l);
                    } else {
                        for l in to_clear.drain(top..) {
                            self.seen[l.var()] = 0;
                        }
                        return false;
                    }
                }
            }
        }
        true
    }

    fn compute_lbd(&mut self, lits: &[L]) -> u32 {
        self.stamp += 1;
        let mut count = 0;
        for l in lits {
            let lv = self.level[l.var()] as usize;
            if self.level_stamp[lv] != self.stamp {
                self.level_stamp[lv] = self.stamp;
                count += 1;
            }
        }
        count
    }

    fn locked(&self, c: CRef) -> bool {
        let first = self.lit(c, 0);
        self.value(first) == TRUE && self.reason[first.var()] == c
    }

    fn reduce(&mut self) {
        self.stats.reductions += 1;
        let mut learnts = std::mem::take(&mut self.learnts);
        learnts.sort_unstable_by_key(|&c| (std::cmp::Reverse(self.lbd_of(c)), std::cmp::Reverse(self.clause_len(c))));
        let target = learnts.len() / 2;
        let mut removed = 0;
        learnts.retain(|&c| {
            if removed < target && self.lbd_of(c) > 2 && !self.locked(c) {
                self.db[c as usize + 1] |= DELETED;
                self.wasted += self.db[c as usize] as usize + HEADER;
                removed += 1;
                false
            } else {
                true
            }
        });
        self.learnts = learnts;
        self.purge_watches();
        self.maybe_collect();
    }

    fn purge_watches(&mut self) {
        let db = &self.db;
        for ws in &mut self.watches {
            ws.retain(|w| db[w.cref as usize + 1] & DELETED == 0);
        }
    }

    fn maybe_collect(&mut self) {
        if self.wasted * 5 > self.db.len() {
            self.collect();
        }
    }

    /// Compacts the clause arena and rebuilds the watch lists.
    fn collect(&mut self) {
        let mut db = Vec::with_capacity(self.db.len() - self.wasted);
        let mut relocate = |old: &mut Vec<CRef>, src: &mut Vec<u32>| {
            old.retain(|&c| src[c as usize + 1] & DELETED == 0);
            for c in old.iter_mut() {
                let start = *c as usize;
                let len = src[start] as usize;
                let new = db.len() as CRef;
                db.extend_from_slice(&src[start..start + HEADER + len]);
                // Forwarding pointer for reason updates.
                src[start + 1] = DELETED | RELOCATED;
                src[start + HEADER] = new;
                *c = new;
            }
        };
        relocate(&mut self.clauses, &mut self.db);
        relocate(&mut self.learnts, &mut self.db);
        for &l in &self.trail {
            let v = l.var();
            let r = self.reason[v];
            if r != NO_REASON {
                self.reason[v] = if self.db[r as usize + 1] & RELOCATED != 0 {
                    self.db[r as usize + HEADER]
                } else {
                    NO_REASON
                };
            }
        }
        self.db = db;
        self.wasted = 0;
        for ws in &mut self.watches {
            ws.clear();
        }
        for k in 0..self.clauses.len() {
            self.attach(self.clauses[k]);
        }
        for k in 0..self.learnts.len() {
            self.attach(self.learnts[k]);
        }
    }

    /// Removes clauses satisfied at level 0 and false literals from the
    /// rest.
    fn simplify(&mut self) {
        debug_assert_eq!(self.decision_level(), 0);
        if self.trail.len() == self.simplified_at {
            return;
        }
        self.simplified_at = self.trail.len();
        let clauses = std::mem::take(&mut self.clauses);
        self.clauses = self.simplify_list(clauses);
        let learnts = std::mem::take(&mut self.learnts);
        self.learnts = self.simplify_list(learnts);
        for k in 0..self.trail.len() {
            let v = self.trail[k].var();
            self.reason[v] = NO_REASON;
        }
        self.collect();
    }

    fn simplify_list(&mut self, mut list: Vec<CRef>) -> Vec<CRef> {
        list.retain(|&c| {
            let start = c as usize;
            let len = self.db[start] as usize;
            let body = start + HEADER;
            if (body..body + len).any(|k| self.value(L(self.db[k])) == TRUE) {
                self.db[start + 1] |= DELETED;
                self.wasted += len + HEADER;
                return false;
            }
            let mut j = 0;
            for k in 0..len {
                let l = self.db[body + k];
                if self.value(L(l)) != FALSE {
                    self.db[body + j] = l;
                    j += 1;
                }
            }
            debug_assert!(j >= 2);
            self.db[start] = j as u32;
            true
        });
        list
    }

    fn pick_branch(&mut self) -> Option<L> {
        while let Some(v) = self.heap.pop(&self.activity) {
            if self.assigns[v] == UNDEF {
                return Some(L((v as u32) << 1 | self.polarity[v] as u32));
            }
        }
        None
    }

    pub fn solve(&mut self, deadline: Option<Instant>) -> Outcome {
        if !self.ok {
            return Outcome::Unsat;
        }
        if self.propagate() != NO_REASON {
            self.ok = false;
            return Outcome::Unsat;
        }
        self.simplify();
        let mut learnt = Vec::new();
        let mut since_restart = 0u64;
        loop {
            let conflict = self.propagate();
            if conflict != NO_REASON {
                self.stats.conflicts += 1;
                since_restart += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return Outcome::Unsat;
                }
                let bt = self.analyze(conflict, &mut learnt);
                let lbd = self.compute_lbd(&learnt);
                self.stats.learnt_literals += learnt.len() as u64;
                self.lbd_fast.update(lbd as f64);
                self.lbd_slow.update(lbd as f64);
                self.cancel_until(bt);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], NO_REASON);
                } else {
                    let c = self.alloc(&learnt, true, lbd);
                    self.learnts.push(c);
                    self.attach(c);
                    self.enqueue(learnt[0], c);
                }
                self.var_inc /= self.var_decay;
                if self.stats.conflicts % 5000 == 0 && self.var_decay < 0.95 {
                    self.var_decay += 0.01;
                }
                if self.stats.conflicts % 256 == 0 && deadline.is_some_and(|d| Instant::now() >= d) {
                    self.cancel_until(0);
                    return Outcome::Interrupted;
                }
            } else {
                let restart = since_restart >= 50 && self.lbd_fast.value > 1.25 * self.lbd_slow.value;
                if restart {
                    self.stats.restarts += 1;
                    since_restart = 0;
                    self.cancel_until(0);
                    if self.propagate() != NO_REASON {
                        self.ok = false;
                        return Outcome::Unsat;
                    }
                    self.simplify();
                }
                if self.stats.conflicts >= self.next_reduce {
                    self.next_reduce = self.stats.conflicts + 2000 + self.reduce_increment * self.stats.reductions;
                    self.reduce();
                }
                match self.pick_branch() {
                    None => {
                        let model = (0..self.num_vars).map(|v| self.assigns[v] == TRUE).collect();
                        self.cancel_until(0);
                        return Outcome::Sat(model);
                    }
                    Some(l) => {
                        self.stats.decisions += 1;
                        if self.stats.decisions % 4096 == 0 && deadline.is_some_and(|d| Instant::now() >= d) {
                            self.cancel_until(0);
                            return Outcome::Interrupted;
                        }
                        self.trail_lim.push(self.trail.len());
                        self.enqueue(l, NO_REASON);
                    }
                }
            }
        }
    }
}

/// Solves `formula` with an optional deadline.
pub fn solve(formula: &CnfFormula, deadline: Option<Instant>) -> (Outcome, Stats) {
    let mut s = Cdcl::new(formula);
    let out = s.solve(deadline);
    (out, s.stats())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::Lit;
    use proptest::prelude::*;

    fn formula(nv: u32, clauses: &[&[i32]]) -> CnfFormula {
        let mut f = CnfFormula::new(nv);
        for c in clauses {
            let lits: Vec<Lit> = c.iter().map(|&x| Lit::from_dimacs(x).unwrap()).collect();
            f.add_clause(&lits).unwrap();
        }
        f
    }

    fn brute_force_sat(f: &CnfFormula) -> bool {
        let n = f.num_vars() as usize;
        let mut a = vec![false; n];
        (0u64..1 << n).any(|bits| {
            for (v, slot) in a.iter_mut().enumerate() {
                *slot = bits >> v & 1 == 1;
            }
            f.is_satisfied_by(&a)
        })
    }

    #[test]
    fn trivial_cases() {
        assert_eq!(solve(&formula(1, &[&[1], &[-1]]), None).0, Outcome::Unsat);
        assert_eq!(solve(&formula(1, &[&[]]), None).0, Outcome::Unsat);
        assert_eq!(solve(&formula(2, &[&[1, -1]]), None).0.clone(), Outcome::Sat(vec![false, false]));
        assert!(matches!(solve(&formula(0, &[]), None).0, Outcome::Sat(m) if m.is_empty()));
    }

    fn pigeonhole(holes: usize) -> CnfFormula {
        let pigeons = holes + 1;
        let var = |p: usize, h: usize| (p * holes + h + 1) as i32;
        let mut f = CnfFormula::new((pigeons * holes) as u32);
        for p in 0..pigeons {
            let c: Vec<Lit> = (0..holes).map(|h| Lit::from_dimacs(var(p, h)).unwrap()).collect();
            f.add_clause(&c).unwrap();
        }
        for h in 0..holes {
            for p in 0..pigeons {
                for q in p + 1..pigeons {
                    f.add_clause(&[Lit::from_dimacs(-var(p, h)).unwrap(), Lit::from_dimacs(-var(q, h)).unwrap()])
                        .unwrap();
                }
            }
        }
        f
    }

    #[test]
    fn pigeonhole_is_unsat() {
        for holes in 1..=7 {
            assert_eq!(solve(&pigeonhole(holes), None).0, Outcome::Unsat, "holes={holes}");
        }
    }

    #[test]
    fn expired_deadline_interrupts_hard_instance() {
        let f = pigeonhole(11);
        let (out, _) = solve(&f, Some(Instant::now()));
        assert_eq!(out, Outcome::Interrupted);
    }

    /// Random 3-SAT around the threshold, big enough to exercise learning,
    /// restarts, reduction and collection.
    fn random_3sat(seed: u64, vars: u32, clauses: usize) -> CnfFormula {
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        let mut f = CnfFormula::new(vars);
        for _ in 0..clauses {
            let c: Vec<Lit> = (0..3)
                .map(|_| {
                    let v = (next() % vars as u64) as i32 + 1;
                    Lit::from_dimacs(if next() & 1 == 0 { v } else { -v }).unwrap()
                })
                .collect();
            f.add_clause(&c).unwrap();
        }
        f
    }

    #[test]
    fn random_instances_are_consistent() {
        let mut sat = 0;
        let mut unsat = 0;
        for seed in 0..30 {
            let f = random_3sat(seed, 150, 640);
            match solve(&f, None).0 {
                Outcome::Sat(m) => {
                    assert!(f.is_satisfied_by(&m));
                    sat += 1;
                }
                Outcome::Unsat => unsat += 1,
                Outcome::Interrupted => unreachable!(),
            }
        }
        assert!(sat > 0 && unsat > 0, "sat={sat} unsat={unsat}");
    }

    fn arb_small_formula() -> impl Strategy<Value = CnfFormula> {
        (1u32..=12).prop_flat_map(|nv| {
            let lit = (1..=nv as i32, any::<bool>()).prop_map(|(v, s)| if s { v } else { -v });
            proptest::collection::vec(proptest::collection::vec(lit, 1..4), 0..60).prop_map(move |cs| {
                let refs: Vec<&[i32]> = cs.iter().map(Vec::as_slice).collect();
                formula(nv, &refs)
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(400))]

        #[test]
        fn agrees_with_truth_table(f in arb_small_formula()) {
            match solve(&f, None).0 {
                Outcome::Sat(m) => prop_assert!(f.is_satisfied_by(&m)),
                Outcome::Unsat => prop_assert!(!brute_force_sat(&f)),
                Outcome::Interrupted => prop_assert!(false),
            }
        }
    }
}
