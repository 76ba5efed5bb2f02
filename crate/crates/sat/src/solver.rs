use std::time::Instant;

use crate::heap::VarHeap;
use crate::lit::{LBool, Lit, Var};

/// Outcome of a [`Solver::solve`] call.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Sat,
    /// Unsatisfiable under the given assumptions. The solver stays usable;
    /// only an unsatisfiable clause set makes every later call `Unsat`.
    Unsat,
    /// The deadline passed before an answer was found.
    Interrupted,
}

type ClauseRef = usize;

#[derive(Debug, Clone)]
struct Clause {
    lits: Vec<Lit>,
    learnt: bool,
    deleted: bool,
    activity: f64,
}

#[derive(Debug, Clone, Copy)]
struct Watcher {
    cref: ClauseRef,
    blocker: Lit,
}

#[derive(Debug, Default, Clone, Copy)]
pub struct Stats {
    pub solves: u64,
    pub decisions: u64,
    pub propagations: u64,
    pub conflicts: u64,
    pub restarts: u64,
}

/// Conflict-driven clause-learning solver supporting incremental clause
/// addition and solving under unit assumptions.
///
/// Clauses can only be added between calls to [`Solver::solve`]. Learnt
/// clauses are kept across calls, which is sound because they are implied by
/// the clause set alone (assumptions are decisions, never reasons).
#[derive(Debug, Clone)]
pub struct Solver {
    clauses: Vec<Clause>,
    learnts: Vec<ClauseRef>,
    // indexed by literal code: clauses currently watching that literal
    watches: Vec<Vec<Watcher>>,
    assigns: Vec<LBool>,
    level: Vec<u32>,
    reason: Vec<Option<ClauseRef>>,
    polarity: Vec<bool>,
    decision: Vec<bool>,
    activity: Vec<f64>,
    seen: Vec<bool>,
    heap: VarHeap,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    var_inc: f64,
    cla_inc: f64,
    ok: bool,
    model: Vec<bool>,
    assumptions: Vec<Lit>,
    deadline: Option<Instant>,
    max_learnts: f64,
    simp_trail_len: usize,
    stats: Stats,
}

const VAR_DECAY: f64 = 0.95;
const CLA_DECAY: f64 = 0.999;
const RESTART_BASE: f64 = 100.0;

impl Default for Solver {
    fn default() -> Self {
        Self::new()
    }
}

impl Solver {
    pub fn new() -> Self {
        Solver {
            clauses: Vec::new(),
            learnts: Vec::new(),
            watches: Vec::new(),
            assigns: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            polarity: Vec::new(),
            decision: Vec::new(),
            activity: Vec::new(),
            seen: Vec::new(),
            heap: VarHeap::default(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            var_inc: 1.0,
            cla_inc: 1.0,
            ok: true,
            model: Vec::new(),
            assumptions: Vec::new(),
            deadline: None,
            max_learnts: 0.0,
            simp_trail_len: 0,
            stats: Stats::default(),
        }
    }

    pub fn new_var(&mut self) -> Var {
        let v = Var::from_index(self.assigns.len());
        self.assigns.push(LBool::Undef);
        self.level.push(0);
        self.reason.push(None);
        self.polarity.push(false);
        self.decision.push(true);
        self.activity.push(0.0);
        self.seen.push(false);
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        self.heap.insert(v.index(), &self.activity);
        v
    }

    pub fn num_vars(&self) -> usize {
        self.assigns.len()
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses
            .iter()
            .filter(|c| !c.deleted && !c.learnt)
            .count()
    }

    pub fn stats(&self) -> Stats {
        self.stats
    }

    /// `false` once the clause set itself is known to be unsatisfiable.
    pub fn is_ok(&self) -> bool {
        self.ok
    }

    pub fn set_deadline(&mut self, deadline: Option<Instant>) {
        self.deadline = deadline;
    }

    /// Sets the preferred phase used when the solver branches on `var`.
    pub fn set_polarity(&mut self, var: Var, value: bool) {
        self.polarity[var.index()] = value;
    }

    fn value_lit(&self, l: Lit) -> LBool {
        match self.assigns[l.var().index()] {
            LBool::Undef => LBool::Undef,
            LBool::True => LBool::from_bool(l.is_positive()),
            LBool::False => LBool::from_bool(!l.is_positive()),
        }
    }

    /// Value of `var` in the last satisfying assignment. Variables the search
    /// never touched read as `false`.
    pub fn model_value(&self, var: Var) -> bool {
        self.model.get(var.index()).copied().unwrap_or(false)
    }

    pub fn model(&self) -> &[bool] {
        &self.model
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    /// Adds a clause. Returns `false` if the clause set became trivially
    /// unsatisfiable. Panics if a literal refers to an unknown variable.
    pub fn add_clause(&mut self, lits: &[Lit]) -> bool {
        debug_assert_eq!(self.decision_level(), 0);
        if !self.ok {
            return false;
        }
        let mut ps: Vec<Lit> = lits.to_vec();
        for l in &ps {
            assert!(l.var().index() < self.num_vars(), "unknown variable {l}");
        }
        ps.sort_unstable();
        ps.dedup();
        let mut out = Vec::with_capacity(ps.len());
        for (i, &l) in ps.iter().enumerate() {
            if i + 1 < ps.len() && ps[i + 1] == !l {
                return true; // tautology
            }
            match self.value_lit(l) {
                LBool::True => return true,
                LBool::False => {}
                LBool::Undef => out.push(l),
            }
        }
        for &l in &out {
            let v = l.var().index();
            if !self.decision[v] {
                self.decision[v] = true;
                self.heap.insert(v, &self.activity);
            }
        }
        match out.len() {
            0 => {
                self.ok = false;
                false
            }
            1 => {
                self.enqueue(out[0], None);
                if self.propagate().is_some() {
                    self.ok = false;
                }
                self.ok
            }
            _ => {
                self.attach(out, false);
                true
            }
        }
    }

    fn attach(&mut self, lits: Vec<Lit>, learnt: bool) -> ClauseRef {
        let cref = self.clauses.len();
        self.watches[lits[0].code()].push(Watcher {
            cref,
            blocker: lits[1],
        });
        self.watches[lits[1].code()].push(Watcher {
            cref,
            blocker: lits[0],
        });
        self.clauses.push(Clause {
            lits,
            learnt,
            deleted: false,
            activity: 0.0,
        });
        if learnt {
            self.learnts.push(cref);
        }
        cref
    }

    fn enqueue(&mut self, l: Lit, reason: Option<ClauseRef>) {
        let v = l.var().index();
        debug_assert_eq!(self.assigns[v], LBool::Undef);
        self.assigns[v] = LBool::from_bool(l.is_positive());
        self.level[v] = self.decision_level() as u32;
        self.reason[v] = reason;
        self.trail.push(l);
    }

    fn propagate(&mut self) -> Option<ClauseRef> {
        let mut conflict = None;
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[false_lit.code()]);
            let mut i = 0;
            let mut j = 0;
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.value_lit(w.blocker) == LBool::True {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let cref = w.cref;
                if self.clauses[cref].deleted {
                    continue;
                }
                {
                    let c = &mut self.clauses[cref].lits;
                    if c[0] == false_lit {
                        c.swap(0, 1);
                    }
                }
                let first = self.clauses[cref].lits[0];
                let watcher = Watcher {
                    cref,
                    blocker: first,
                };
                if first != w.blocker && self.value_lit(first) == LBool::True {
                    ws[j] = watcher;
                    j += 1;
                    continue;
                }
                let len = self.clauses[cref].lits.len();
                let mut moved = false;
                for k in 2..len {
                    let lk = self.clauses[cref].lits[k];
                    if self.value_lit(lk) != LBool::False {
                        self.clauses[cref].lits.swap(1, k);
                        self.watches[lk.code()].push(watcher);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = watcher;
                j += 1;
                if self.value_lit(first) == LBool::False {
                    conflict = Some(cref);
                    self.qhead = self.trail.len();
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.enqueue(first, Some(cref));
                }
            }
            ws.truncate(j);
            self.watches[false_lit.code()] = ws;
            if conflict.is_some() {
                break;
            }
        }
        conflict
    }

    fn var_bump(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.increased(v, &self.activity);
    }

    fn clause_bump(&mut self, cref: ClauseRef) {
        let c = &mut self.clauses[cref];
        c.activity += self.cla_inc;
        if c.activity > 1e20 {
            for &r in &self.learnts {
                self.clauses[r].activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    fn analyze(&mut self, mut confl: ClauseRef) -> (Vec<Lit>, usize) {
        let mut learnt: Vec<Lit> = vec![Lit(0)];
        let mut path_c = 0usize;
        let mut p: Option<Lit> = None;
        let mut index = self.trail.len();
        let current = self.decision_level() as u32;
        loop {
            if self.clauses[confl].learnt {
                self.clause_bump(confl);
            }
            let start = if p.is_some() { 1 } else { 0 };
            let len = self.clauses[confl].lits.len();
            for k in start..len {
                let q = self.clauses[confl].lits[k];
                let v = q.var().index();
                if !self.seen[v] && self.level[v] > 0 {
                    self.var_bump(v);
                    self.seen[v] = true;
                    if self.level[v] >= current {
                        path_c += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].var().index()] {
                    break;
                }
            }
            let pl = self.trail[index];
            p = Some(pl);
            self.seen[pl.var().index()] = false;
            path_c -= 1;
            if path_c == 0 {
                break;
            }
            confl = self.reason[pl.var().index()].expect("implied literal has a reason");
        }
        learnt[0] = !p.expect("conflict has a UIP");

        // drop literals implied by the rest of the clause
        let to_clear: Vec<Lit> = learnt.clone();
        let mut kept = vec![learnt[0]];
        for &l in &learnt[1..] {
            let v = l.var().index();
            let redundant = match self.reason[v] {
                None => false,
                Some(r) => self.clauses[r].lits[1..].iter().all(|q| {
                    let qv = q.var().index();
                    self.seen[qv] || self.level[qv] == 0
                }),
            };
            if !redundant {
                kept.push(l);
            }
        }
        for l in to_clear {
            self.seen[l.var().index()] = false;
        }
        let mut learnt = kept;

        let bt = if learnt.len() == 1 {
            0
        } else {
            let mut max_i = 1;
            for k in 2..learnt.len() {
                if self.level[learnt[k].var().index()] > self.level[learnt[max_i].var().index()] {
                    max_i = k;
                }
            }
            learnt.swap(1, max_i);
            self.level[learnt[1].var().index()] as usize
        };
        (learnt, bt)
    }

    fn cancel_until(&mut self, lvl: usize) {
        if self.decision_level() <= lvl {
            return;
        }
        let lim = self.trail_lim[lvl];
        for k in (lim..self.trail.len()).rev() {
            let l = self.trail[k];
            let v = l.var().index();
            self.assigns[v] = LBool::Undef;
            self.reason[v] = None;
            self.polarity[v] = l.is_positive();
            if self.decision[v] {
                self.heap.insert(v, &self.activity);
            }
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(lvl);
        self.qhead = lim;
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while let Some(v) = self.heap.pop(&self.activity) {
            if self.assigns[v] == LBool::Undef && self.decision[v] {
                return Some(Var::from_index(v).lit(self.polarity[v]));
            }
        }
        None
    }

    fn locked(&self, cref: ClauseRef) -> bool {
        let l0 = self.clauses[cref].lits[0];
        self.value_lit(l0) == LBool::True && self.reason[l0.var().index()] == Some(cref)
    }

    fn reduce_db(&mut self) {
        let mut cands: Vec<ClauseRef> = self
            .learnts
            .iter()
            .copied()
            .filter(|&r| !self.clauses[r].deleted)
            .collect();
        cands.sort_by(|&a, &b| {
            self.clauses[a]
                .activity
                .partial_cmp(&self.clauses[b].activity)
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let half = cands.len() / 2;
        let extra_lim = self.cla_inc / cands.len().max(1) as f64;
        for (i, &r) in cands.iter().enumerate() {
            let c = &self.clauses[r];
            if c.lits.len() > 2 && !self.locked(r) && (i < half || c.activity < extra_lim) {
                self.clauses[r].deleted = true;
                self.clauses[r].lits = Vec::new();
            }
        }
        let clauses = &self.clauses;
        self.learnts.retain(|&r| !clauses[r].deleted);
    }

    /// Removes clauses satisfied at the top level. Once tombstones dominate,
    /// the clause database is compacted and variables no live clause
    /// mentions stop being branched on. Must be called at level 0.
    fn simplify(&mut self) {
        debug_assert_eq!(self.decision_level(), 0);
        if self.trail.len() == self.simp_trail_len {
            return;
        }
        self.simp_trail_len = self.trail.len();
        let mut live = 0usize;
        for cref in 0..self.clauses.len() {
            if self.clauses[cref].deleted {
                continue;
            }
            let sat = self.clauses[cref]
                .lits
                .iter()
                .any(|&l| self.value_lit(l) == LBool::True);
            if sat {
                self.clauses[cref].deleted = true;
                self.clauses[cref].lits = Vec::new();
            } else {
                live += 1;
            }
        }
        let clauses = &self.clauses;
        self.learnts.retain(|&r| !clauses[r].deleted);
        if self.clauses.len() - live > live.max(64) {
            self.compact();
        }
    }

    fn compact(&mut self) {
        // top-level reasons are never inspected by conflict analysis
        for &l in &self.trail {
            self.reason[l.var().index()] = None;
        }
        let old = std::mem::take(&mut self.clauses);
        self.learnts.clear();
        for w in &mut self.watches {
            w.clear();
        }
        let mut occurs = vec![false; self.num_vars()];
        for c in old.into_iter().filter(|c| !c.deleted) {
            let lits: Vec<Lit> = c
                .lits
                .into_iter()
                .filter(|&l| self.value_lit(l) != LBool::False)
                .collect();
            debug_assert!(lits.len() >= 2, "unit or empty clause survived propagation");
            for l in &lits {
                occurs[l.var().index()] = true;
            }
            let cref = self.attach(lits, c.learnt);
            self.clauses[cref].activity = c.activity;
        }
        for (v, &occ) in occurs.iter().enumerate() {
            if !occ && self.assigns[v] == LBool::Undef {
                self.decision[v] = false;
            }
        }
    }

    fn interrupted(&self) -> bool {
        matches!(self.deadline, Some(d) if Instant::now() >= d)
    }

    fn search(&mut self, nof_conflicts: u64) -> Option<SolveStatus> {
        let mut conflict_c = 0u64;
        loop {
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                conflict_c += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return Some(SolveStatus::Unsat);
                }
                let (learnt, bt) = self.analyze(confl);
                self.cancel_until(bt);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let first = learnt[0];
                    let cref = self.attach(learnt, true);
                    self.clause_bump(cref);
                    self.enqueue(first, Some(cref));
                }
                self.var_inc /= VAR_DECAY;
                self.cla_inc /= CLA_DECAY;
                if self.stats.conflicts.is_multiple_of(64) && self.interrupted() {
                    self.cancel_until(0);
                    return Some(SolveStatus::Interrupted);
                }
            } else {
                if conflict_c >= nof_conflicts {
                    self.cancel_until(0);
                    return None;
                }
                if self.learnts.len() as f64 - self.trail.len() as f64 >= self.max_learnts {
                    self.reduce_db();
                }
                let mut next = None;
                while self.decision_level() < self.assumptions.len() {
                    let p = self.assumptions[self.decision_level()];
                    match self.value_lit(p) {
                        LBool::True => self.trail_lim.push(self.trail.len()),
                        LBool::False => return Some(SolveStatus::Unsat),
                        LBool::Undef => {
                            next = Some(p);
                            break;
                        }
                    }
                }
                let next = match next {
                    Some(p) => p,
                    None => {
                        self.stats.decisions += 1;
                        if self.stats.decisions.is_multiple_of(1024) && self.interrupted() {
                            self.cancel_until(0);
                            return Some(SolveStatus::Interrupted);
                        }
                        match self.pick_branch() {
                            Some(l) => l,
                            None => return Some(SolveStatus::Sat),
                        }
                    }
                };
                self.trail_lim.push(self.trail.len());
                self.enqueue(next, None);
            }
        }
    }

    /// Solves the current clause set under the given unit assumptions.
    pub fn solve(&mut self, assumptions: &[Lit]) -> SolveStatus {
        self.stats.solves += 1;
        self.model.clear();
        if !self.ok {
            return SolveStatus::Unsat;
        }
        for l in assumptions {
            assert!(l.var().index() < self.num_vars(), "unknown variable {l}");
        }
        if self.propagate().is_some() {
            self.ok = false;
            return SolveStatus::Unsat;
        }
        self.simplify();
        self.assumptions = assumptions.to_vec();
        self.max_learnts = (self.num_clauses() as f64 / 3.0).max(2000.0);
        let mut restarts = 0u32;
        let status = loop {
            let budget = (luby(2.0, restarts) * RESTART_BASE) as u64;
            if let Some(s) = self.search(budget) {
                break s;
            }
            restarts += 1;
            self.stats.restarts += 1;
            self.max_learnts *= 1.05;
            if self.interrupted() {
                break SolveStatus::Interrupted;
            }
        };
        if status == SolveStatus::Sat {
            self.model = self.assigns.iter().map(|&a| a == LBool::True).collect();
        }
        self.cancel_until(0);
        self.assumptions.clear();
        status
    }
}

/// Luby restart sequence scaled by `y`: 1, 1, 2, 1, 1, 2, 4, ...
fn luby(y: f64, mut x: u32) -> f64 {
    let mut size = 1u32;
    let mut seq = 0i32;
    while size < x + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    y.powi(seq)
}
