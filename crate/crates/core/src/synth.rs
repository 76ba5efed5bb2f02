//! Effect and substitution synthesis for one action label.
//!
//! For a fixed parameter count `k`, transitions are explained incrementally:
//! one transition is encoded, a subset-minimal effect assignment is extracted,
//! and every other transition is checked against it in a scratch scope. The
//! first transition that cannot be bound consistently joins the jointly
//! encoded set and the round starts over. If the joint formula becomes
//! unsatisfiable, `k` grows by one.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::model::{ActionSchema, GroundFact, LiftedFact, Name, State, Substitution};
use crate::sat_bridge::{
    minimize_true, EffectKey, EffectKind, Lit, Model, SatError, SolveContext, SolveResult, Var,
    VarKey, VarRegistry,
};
use crate::trace::{LabelGroup, Transition};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SynthError {
    #[error("label `{label}` has no transitions")]
    EmptyGroup { label: Name },
    #[error("time limit reached while synthesizing `{label}`")]
    TimeLimit { label: Name },
    #[error("`{label}` needs more than {max_k} parameters")]
    ParamBudgetExceeded { label: Name, max_k: usize },
    #[error("transition {transition} of `{label}` has no objects to bind parameters to")]
    NoCandidateObjects { label: Name, transition: usize },
    #[error("solver: {0}")]
    Sat(SatError),
    #[error("synthesized `{label}` does not explain its transitions")]
    Unsound { label: Name },
}

impl SynthError {
    fn from_sat(e: SatError, label: &Name) -> Self {
        match e {
            SatError::TimeLimit => SynthError::TimeLimit {
                label: label.clone(),
            },
            other => SynthError::Sat(other),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthLimits {
    /// How far `k` may grow beyond `min_pars`.
    pub param_budget_extra: usize,
    pub deadline: Option<Instant>,
    /// Keep the clause log so the final encoding can be dumped as DIMACS.
    pub record_cnf: bool,
}

impl Default for SynthLimits {
    fn default() -> Self {
        SynthLimits {
            param_budget_extra: 3,
            deadline: None,
            record_cnf: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OffenseKind {
    UnexplainedChange,
    InconsistentEffect,
}

/// A transition the tentative effects cannot be bound to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Offense {
    pub transition: usize,
    pub kind: OffenseKind,
    pub detail: Option<GroundFact>,
}

#[derive(Debug, Clone, Default)]
pub struct SynthStats {
    pub encoded: usize,
    pub offenses: usize,
    pub verifications: usize,
    pub elapsed: Duration,
}

#[derive(Debug, Clone)]
pub struct EffectSolution {
    pub label: Name,
    pub k: usize,
    pub add: BTreeSet<LiftedFact>,
    pub del: BTreeSet<LiftedFact>,
    /// Transition id to the binding that explains it.
    pub substitutions: BTreeMap<usize, Substitution>,
    /// Ids of the transitions encoded jointly in the final formula.
    pub encoded: BTreeSet<usize>,
    pub stats: SynthStats,
}

impl EffectSolution {
    /// Schema with parameters `x1..xk` of type `object` and no preconditions.
    pub fn schema(&self) -> ActionSchema {
        let mut s = ActionSchema::with_arity(self.label.as_str(), self.k);
        s.add = self.add.clone();
        s.del = self.del.clone();
        s
    }

    pub fn diagnostics_line(&self) -> String {
        format!(
            "{} k={} encoded={} offenses={} time={:.3}",
            self.label,
            self.k,
            self.stats.encoded,
            self.stats.offenses,
            self.stats.elapsed.as_secs_f64()
        )
    }
}

/// The formula and effect assignment a successful synthesis ended with.
#[derive(Debug)]
pub struct FinalEncoding {
    ctx: SolveContext,
    reg: VarRegistry,
    effects: Vec<(Var, bool)>,
}

impl FinalEncoding {
    /// `true` iff flipping any single true effect variable to false, with
    /// all false ones held false, makes the formula unsatisfiable.
    pub fn is_subset_minimal(&mut self) -> Result<bool, SatError> {
        let fixed: Vec<Lit> = self
            .effects
            .iter()
            .filter(|(_, val)| !val)
            .map(|(v, _)| v.negative())
            .collect();
        let trues: Vec<Var> = self
            .effects
            .iter()
            .filter(|(_, val)| *val)
            .map(|(v, _)| *v)
            .collect();
        for v in trues {
            let mut a = fixed.clone();
            a.push(v.negative());
            if self.ctx.solve(&a)?.is_sat() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn num_effect_vars(&self) -> usize {
        self.effects.len()
    }

    /// DIMACS dump, if clause recording was enabled.
    pub fn to_dimacs(&self) -> Option<String> {
        self.ctx.to_dimacs(&self.reg)
    }
}

impl fmt::Display for Offense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            OffenseKind::UnexplainedChange => "unexplained change",
            OffenseKind::InconsistentEffect => "inconsistent effect",
        };
        write!(f, "transition {}: {kind}", self.transition)?;
        if let Some(d) = &self.detail {
            write!(f, " {d}")?;
        }
        Ok(())
    }
}

/// Candidate objects for binding parameters of `r`: objects of changed facts
/// first, then other objects of the two states, then the rest.
fn candidates(r: &Transition) -> Vec<Name> {
    let mut out = r.changed_objects();
    let mut seen: BTreeSet<Name> = out.iter().cloned().collect();
    let in_states: BTreeSet<&Name> = r
        .before
        .iter()
        .chain(r.after.iter())
        .flat_map(|f| f.args.iter())
        .collect();
    for o in in_states {
        if seen.insert(o.clone()) {
            out.push(o.clone());
        }
    }
    for o in r.objects.keys() {
        if seen.insert(o.clone()) {
            out.push(o.clone());
        }
    }
    out
}

/// Bind variables of one transition: `vars[param][i]` binds to `objects[i]`.
#[derive(Debug, Clone)]
struct Binds {
    objects: Vec<Name>,
    index: HashMap<Name, usize>,
    vars: Vec<Vec<Var>>,
}

impl Binds {
    fn var(&self, param: usize, object: &Name) -> Var {
        self.vars[param][self.index[object]]
    }

    fn read(&self, m: &Model) -> Substitution {
        let objs = self
            .vars
            .iter()
            .map(|row| {
                let i = row
                    .iter()
                    .position(|&v| m.value(v))
                    .expect("exactly-one bind constraint");
                self.objects[i].clone()
            })
            .collect();
        Substitution::new(objs)
    }

    /// Bind variables of every grounding of `key` over this transition's
    /// objects that would make the effect inconsistent with `r`, or `None`
    /// when there are more than `EAGER_BLOCK_LIMIT` groundings to try.
    fn all_violating(
        &self,
        r: &Transition,
        kind: EffectKind,
        key: &EffectKey,
    ) -> Option<Vec<Vec<Var>>> {
        let params: Vec<usize> = key
            .params
            .iter()
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let n = self.objects.len();
        let total = (0..params.len()).try_fold(1usize, |acc, _| acc.checked_mul(n))?;
        if total > EAGER_BLOCK_LIMIT {
            return None;
        }
        let fact = key.to_fact();
        let mut out = Vec::new();
        let mut choice = vec![0usize; params.len()];
        let mut objs = vec![self.objects.first()?.clone(); self.vars.len()];
        for _ in 0..total {
            for (p, &c) in params.iter().zip(&choice) {
                objs[*p] = self.objects[c].clone();
            }
            let g = fact.ground(&Substitution::new(objs.clone()));
            let bad = match kind {
                EffectKind::Add => !r.after.contains(&g),
                EffectKind::Del => r.after.contains(&g),
            };
            if bad {
                out.push(
                    params
                        .iter()
                        .zip(&choice)
                        .map(|(&p, &c)| self.vars[p][c])
                        .collect(),
                );
            }
            for c in choice.iter_mut() {
                *c += 1;
                if *c < n {
                    break;
                }
                *c = 0;
            }
        }
        Some(out)
    }

    /// Bind variables for the distinct parameters of `key` under `sub`.
    fn for_effect(&self, key: &EffectKey, sub: &Substitution) -> Vec<Var> {
        let params: BTreeSet<usize> = key.params.iter().copied().collect();
        params
            .into_iter()
            .map(|p| self.var(p, sub.get(p)))
            .collect()
    }
}

fn guarded(guard: Option<Var>, lits: &[Lit]) -> Vec<Lit> {
    let mut c = Vec::with_capacity(lits.len() + 1);
    if let Some(g) = guard {
        c.push(g.negative());
    }
    c.extend_from_slice(lits);
    c
}

fn exactly_one(ctx: &mut SolveContext, row: &[Var], guard: Option<Var>) -> Result<(), SatError> {
    if guard.is_none() {
        return ctx.add_exactly_one(row);
    }
    let alo: Vec<Lit> = row.iter().map(|v| v.positive()).collect();
    ctx.add_clause(&guarded(guard, &alo))?;
    for (i, a) in row.iter().enumerate() {
        for b in &row[i + 1..] {
            ctx.add_clause(&guarded(guard, &[a.negative(), b.negative()]))?;
        }
    }
    Ok(())
}

fn encode_binds(
    ctx: &mut SolveContext,
    reg: &mut VarRegistry,
    r: &Transition,
    k: usize,
    guard: Option<Var>,
) -> Result<Binds, SynthError> {
    let objects = candidates(r);
    if k > 0 && objects.is_empty() {
        return Err(SynthError::NoCandidateObjects {
            label: r.label.clone(),
            transition: r.id,
        });
    }
    let mut vars = Vec::with_capacity(k);
    for p in 0..k {
        let row: Vec<Var> = objects
            .iter()
            .map(|o| {
                let (transition, param, object) = (r.id, p, o.clone());
                let key = if guard.is_some() {
                    VarKey::ScratchBind {
                        transition,
                        param,
                        object,
                    }
                } else {
                    VarKey::Bind {
                        transition,
                        param,
                        object,
                    }
                };
                reg.fresh(ctx, key)
            })
            .collect();
        exactly_one(ctx, &row, guard).map_err(|e| SynthError::from_sat(e, &r.label))?;
        vars.push(row);
    }
    let index = objects
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, o)| (o, i))
        .collect();
    Ok(Binds {
        objects,
        index,
        vars,
    })
}

/// Parameter vectors of length `args.len()` over `0..k` that never bind one
/// parameter to two different objects, in lexicographic order.
fn vectors(k: usize, args: &[Name]) -> Vec<Vec<usize>> {
    fn go(k: usize, args: &[Name], cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let i = cur.len();
        if i == args.len() {
            out.push(cur.clone());
            return;
        }
        for p in 0..k {
            let clash = cur.iter().zip(args).any(|(&q, o)| q == p && *o != args[i]);
            if !clash {
                cur.push(p);
                go(k, args, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(k, args, &mut Vec::new(), &mut out);
    out
}

/// Explanation clauses for every changed fact of `r`. In a scratch scope
/// (`guard` set) only existing effect variables are used. Returns a changed
/// fact that cannot be explained at all, if any.
fn encode_explanations(
    ctx: &mut SolveContext,
    reg: &mut VarRegistry,
    r: &Transition,
    k: usize,
    binds: &Binds,
    guard: Option<Var>,
) -> Result<Option<GroundFact>, SatError> {
    let changes: Vec<(EffectKind, &GroundFact)> = r
        .deleted()
        .map(|f| (EffectKind::Del, f))
        .chain(r.added().map(|f| (EffectKind::Add, f)))
        .collect();
    for (kind, fact) in changes {
        let mut terms: Vec<Vec<Lit>> = Vec::new();
        for v in vectors(k, &fact.args) {
            let key = EffectKey {
                predicate: fact.predicate.clone(),
                params: v,
            };
            let e = if guard.is_none() {
                reg.effect_or_create(ctx, kind, &key)
            } else {
                match reg.effect(kind, &key) {
                    Some(e) => e,
                    None => continue,
                }
            };
            let mut term = vec![e.positive()];
            let mut seen = BTreeSet::new();
            for (&p, o) in key.params.iter().zip(&fact.args) {
                if seen.insert(p) {
                    term.push(binds.var(p, o).positive());
                }
            }
            terms.push(term);
        }
        match terms.len() {
            0 => return Ok(Some(fact.clone())),
            1 => {
                for &l in &terms[0] {
                    ctx.add_clause(&guarded(guard, &[l]))?;
                }
            }
            _ => {
                let mut big = Vec::with_capacity(terms.len());
                for term in &terms {
                    let y = reg.fresh(ctx, VarKey::Aux);
                    for &l in term {
                        ctx.add_clause(&guarded(guard, &[y.negative(), l]))?;
                    }
                    big.push(y.positive());
                }
                ctx.add_clause(&guarded(guard, &big))?;
            }
        }
    }
    Ok(None)
}

/// Encodes `r` permanently: exactly-one bind per parameter and one
/// explanation clause per changed fact.
pub fn encode_transition(
    ctx: &mut SolveContext,
    reg: &mut VarRegistry,
    r: &Transition,
    k: usize,
) -> Result<(), SynthError> {
    encode_main(ctx, reg, r, k).map(|_| ())
}

fn encode_main(
    ctx: &mut SolveContext,
    reg: &mut VarRegistry,
    r: &Transition,
    k: usize,
) -> Result<Option<Binds>, SynthError> {
    let binds = encode_binds(ctx, reg, r, k, None)?;
    let missing = encode_explanations(ctx, reg, r, k, &binds, None)
        .map_err(|e| SynthError::from_sat(e, &r.label))?;
    Ok(if missing.is_some() { None } else { Some(binds) })
}

/// Blocking clause forbidding `effect` together with the given bindings.
pub fn consistency_clause(effect: Var, binds: &[Var]) -> Vec<Lit> {
    std::iter::once(effect.negative())
        .chain(binds.iter().map(|b| b.negative()))
        .collect()
}

/// Effects asserted by a tentative assignment that the binding `sub` grounds
/// into an unobserved change: an add missing from the after-state, or a
/// delete of a fact still present after the step.
fn violations<'a>(
    r: &Transition,
    sub: &Substitution,
    asserted: &'a [(Var, EffectKind, EffectKey)],
) -> Vec<(&'a (Var, EffectKind, EffectKey), GroundFact)> {
    asserted
        .iter()
        .filter_map(|e| {
            let g = e.2.to_fact().ground(sub);
            let bad = match e.1 {
                EffectKind::Add => !r.after.contains(&g),
                EffectKind::Del => r.after.contains(&g),
            };
            bad.then_some((e, g))
        })
        .collect()
}

/// Tentative truth value of every effect variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EffectAssignment {
    values: Vec<(Var, EffectKind, EffectKey, bool)>,
}

impl EffectAssignment {
    fn from_model(reg: &VarRegistry, m: &Model) -> Self {
        EffectAssignment {
            values: reg
                .effect_vars()
                .into_iter()
                .map(|(v, kind, key)| (v, kind, key.clone(), m.value(v)))
                .collect(),
        }
    }

    fn asserted(&self) -> Vec<(Var, EffectKind, EffectKey)> {
        self.values
            .iter()
            .filter(|e| e.3)
            .map(|(v, kind, key, _)| (*v, *kind, key.clone()))
            .collect()
    }

    fn assumptions(&self) -> impl Iterator<Item = Lit> + '_ {
        self.values.iter().map(|e| e.0.lit(e.3))
    }

    fn lifted(&self, kind: EffectKind) -> BTreeSet<LiftedFact> {
        self.values
            .iter()
            .filter(|e| e.3 && e.1 == kind)
            .map(|e| e.2.to_fact())
            .collect()
    }
}

/// Searches a binding for `r` under the fixed `assignment`. All clauses added
/// here are guarded by a fresh activation literal that is retired before
/// returning, so the context is unchanged for later solves.
pub fn verify(
    ctx: &mut SolveContext,
    reg: &mut VarRegistry,
    assignment: &EffectAssignment,
    r: &Transition,
    k: usize,
) -> Result<Result<Substitution, Offense>, SynthError> {
    let act = reg.fresh(ctx, VarKey::Activation);
    let out = verify_scoped(ctx, reg, assignment, r, k, act);
    ctx.add_clause(&[act.negative()])
        .map_err(|e| SynthError::from_sat(e, &r.label))?;
    out
}

fn verify_scoped(
    ctx: &mut SolveContext,
    reg: &mut VarRegistry,
    assignment: &EffectAssignment,
    r: &Transition,
    k: usize,
    act: Var,
) -> Result<Result<Substitution, Offense>, SynthError> {
    let sat_err = |e| SynthError::from_sat(e, &r.label);
    let binds = encode_binds(ctx, reg, r, k, Some(act))?;
    if let Some(f) = encode_explanations(ctx, reg, r, k, &binds, Some(act)).map_err(sat_err)? {
        return Ok(Err(Offense {
            transition: r.id,
            kind: OffenseKind::UnexplainedChange,
            detail: Some(f),
        }));
    }
    let asserted = assignment.asserted();
    let assumptions: Vec<Lit> = std::iter::once(act.positive())
        .chain(assignment.assumptions())
        .collect();
    let mut last_blocked = None;
    loop {
        let m = match ctx.solve(&assumptions).map_err(sat_err)? {
            SolveResult::Sat(m) => m,
            SolveResult::Unsat => {
                let offense = match last_blocked {
                    Some(g) => Offense {
                        transition: r.id,
                        kind: OffenseKind::InconsistentEffect,
                        detail: Some(g),
                    },
                    None => Offense {
                        transition: r.id,
                        kind: OffenseKind::UnexplainedChange,
                        detail: unexplained_fact(r, assignment),
                    },
                };
                return Ok(Err(offense));
            }
        };
        let sub = binds.read(&m);
        let bad = violations(r, &sub, &asserted);
        if bad.is_empty() {
            return Ok(Ok(sub));
        }
        for ((e, _, key), g) in bad {
            let clause = consistency_clause(*e, &binds.for_effect(key, &sub));
            ctx.add_clause(&guarded(Some(act), &clause))
                .map_err(sat_err)?;
            last_blocked = Some(g);
        }
    }
}

/// First changed fact with no asserted effect of matching kind and predicate.
fn unexplained_fact(r: &Transition, assignment: &EffectAssignment) -> Option<GroundFact> {
    let asserted = assignment.asserted();
    let covered = |kind: EffectKind, f: &GroundFact| {
        asserted
            .iter()
            .any(|(_, k, key)| *k == kind && key.predicate == f.predicate)
    };
    r.deleted()
        .map(|f| (EffectKind::Del, f))
        .chain(r.added().map(|f| (EffectKind::Add, f)))
        .find(|(kind, f)| !covered(*kind, f))
        .or_else(|| {
            r.deleted()
                .chain(r.added())
                .next()
                .map(|f| (EffectKind::Add, f))
        })
        .map(|(_, f)| f.clone())
}

/// `true` iff under each transition's substitution the preconditions hold in
/// the before-state and `(before \ del) ∪ add` equals the after-state.
pub fn check_witness(
    schema: &ActionSchema,
    subs: &BTreeMap<usize, Substitution>,
    group: &LabelGroup,
) -> bool {
    group.transitions.iter().all(|r| {
        let Some(sub) = subs.get(&r.id) else {
            return false;
        };
        if sub.len() != schema.arity() {
            return false;
        }
        if schema
            .pre
            .iter()
            .any(|f| !r.before.contains(&f.ground(sub)))
        {
            return false;
        }
        let mut next = r.before.clone();
        for f in &schema.del {
            next.remove(&f.ground(sub));
        }
        for f in &schema.add {
            next.insert(f.ground(sub));
        }
        next == r.after
    })
}

/// Adds a consistency clause for every violation `m` shows among the encoded
/// transitions. Returns whether any clause was added.
fn block_violations(
    ctx: &mut SolveContext,
    reg: &VarRegistry,
    encoded: &[(usize, Binds)],
    classes: &[Class],
    ts: &[Transition],
    m: &Model,
) -> Result<bool, SatError> {
    let asserted = EffectAssignment::from_model(reg, m).asserted();
    let mut blocked = false;
    for (c, binds) in encoded {
        let r = &ts[classes[*c].rep];
        let sub = binds.read(m);
        for ((e, kind, key), _) in violations(r, &sub, &asserted) {
            match binds.all_violating(r, *kind, key) {
                Some(all) => {
                    for bs in all {
                        ctx.add_clause(&consistency_clause(*e, &bs))?;
                    }
                }
                None => ctx.add_clause(&consistency_clause(*e, &binds.for_effect(key, &sub)))?,
            }
            blocked = true;
        }
    }
    Ok(blocked)
}

/// Most groundings blocked at once when an effect is first found violated.
const EAGER_BLOCK_LIMIT: usize = 4096;

/// Transitions with equal instance and states, verified once.
struct Class {
    rep: usize,
    members: Vec<usize>,
}

fn classes(group: &LabelGroup) -> Vec<Class> {
    let mut index: HashMap<(&Name, &State, &State), usize> = HashMap::new();
    let mut out: Vec<Class> = Vec::new();
    for (i, r) in group.transitions.iter().enumerate() {
        let key = (&r.instance_id, &r.before, &r.after);
        match index.get(&key) {
            Some(&c) => out[c].members.push(i),
            None => {
                index.insert(key, out.len());
                out.push(Class {
                    rep: i,
                    members: vec![i],
                });
            }
        }
    }
    out
}

fn past(deadline: Option<Instant>) -> bool {
    deadline.is_some_and(|d| Instant::now() >= d)
}

/// Attempts synthesis with exactly `k` parameters. `Ok(None)` means no
/// effect set with `k` parameters explains the group.
pub fn synth_fixed_k(
    group: &LabelGroup,
    k: usize,
    limits: &SynthLimits,
) -> Result<Option<(EffectSolution, FinalEncoding)>, SynthError> {
    let label = &group.label;
    if group.is_empty() {
        return Err(SynthError::EmptyGroup {
            label: label.clone(),
        });
    }
    let start = Instant::now();
    let sat_err = |e| SynthError::from_sat(e, label);
    let time_limit = || SynthError::TimeLimit {
        label: label.clone(),
    };
    let mut ctx = if limits.record_cnf {
        SolveContext::with_clause_log()
    } else {
        SolveContext::new()
    };
    ctx.set_deadline(limits.deadline);
    let mut reg = VarRegistry::new();
    let classes = classes(group);
    let ts = &group.transitions;
    let mut stats = SynthStats::default();
    let mut encoded: Vec<(usize, Binds)> = Vec::new();
    let mut next = 0usize;
    // bindings found by verification, valid while the assignment is unchanged
    let mut verified: HashMap<usize, Substitution> = HashMap::new();
    let mut last_assignment: Option<EffectAssignment> = None;
    loop {
        match encode_main(&mut ctx, &mut reg, &ts[classes[next].rep], k)? {
            Some(b) => encoded.push((next, b)),
            None => return Ok(None),
        }
        stats.encoded += 1;
        // Consistency is enforced lazily: cheap solves block violations until
        // the model is consistent, then it is minimized and checked again.
        let model = loop {
            if past(limits.deadline) {
                return Err(time_limit());
            }
            let m = match ctx.solve(&[]).map_err(sat_err)? {
                SolveResult::Sat(m) => m,
                SolveResult::Unsat => return Ok(None),
            };
            if block_violations(&mut ctx, &reg, &encoded, &classes, ts, &m).map_err(sat_err)? {
                continue;
            }
            let effect_vars: Vec<Var> = reg.effect_vars().iter().map(|e| e.0).collect();
            let Some(m) = minimize_true(&mut ctx, &effect_vars, &[]).map_err(sat_err)? else {
                return Ok(None);
            };
            if !block_violations(&mut ctx, &reg, &encoded, &classes, ts, &m).map_err(sat_err)? {
                break m;
            }
        };
        let assignment = EffectAssignment::from_model(&reg, &model);
        if last_assignment.as_ref() != Some(&assignment) {
            verified.clear();
        }
        let mut subs: BTreeMap<usize, Substitution> = BTreeMap::new();
        for (c, binds) in &encoded {
            subs.insert(*c, binds.read(&model));
        }
        let mut offense = None;
        for (c, class) in classes.iter().enumerate() {
            if subs.contains_key(&c) {
                continue;
            }
            if let Some(s) = verified.get(&c) {
                subs.insert(c, s.clone());
                continue;
            }
            if past(limits.deadline) {
                return Err(time_limit());
            }
            stats.verifications += 1;
            match verify(&mut ctx, &mut reg, &assignment, &ts[class.rep], k)? {
                Ok(s) => {
                    verified.insert(c, s.clone());
                    subs.insert(c, s);
                }
                Err(o) => {
                    log::debug!("{label} k={k}: {o}");
                    offense = Some(c);
                    break;
                }
            }
        }
        last_assignment = Some(assignment.clone());
        match offense {
            Some(c) => {
                stats.offenses += 1;
                next = c;
            }
            None => {
                stats.elapsed = start.elapsed();
                let substitutions = classes
                    .iter()
                    .enumerate()
                    .flat_map(|(c, class)| {
                        let s = &subs[&c];
                        class.members.iter().map(move |&i| (ts[i].id, s.clone()))
                    })
                    .collect();
                let solution = EffectSolution {
                    label: label.clone(),
                    k,
                    add: assignment.lifted(EffectKind::Add),
                    del: assignment.lifted(EffectKind::Del),
                    substitutions,
                    encoded: encoded
                        .iter()
                        .map(|(c, _)| ts[classes[*c].rep].id)
                        .collect(),
                    stats,
                };
                if !check_witness(&solution.schema(), &solution.substitutions, group) {
                    return Err(SynthError::Unsound {
                        label: label.clone(),
                    });
                }
                let effects = assignment.values.iter().map(|e| (e.0, e.3)).collect();
                return Ok(Some((solution, FinalEncoding { ctx, reg, effects })));
            }
        }
    }
}

/// Synthesizes effects for `group`, starting at `k = min_pars` and growing
/// `k` by one after each failure.
pub fn synth_label_with_encoding(
    group: &LabelGroup,
    limits: &SynthLimits,
) -> Result<(EffectSolution, FinalEncoding), SynthError> {
    let max_k = group.min_pars + limits.param_budget_extra;
    let mut offenses = 0;
    for k in group.min_pars..=max_k {
        match synth_fixed_k(group, k, limits)? {
            Some((mut sol, enc)) => {
                sol.stats.offenses += offenses;
                return Ok((sol, enc));
            }
            None => {
                log::debug!("{}: no solution with k={k}", group.label);
                offenses += 1;
            }
        }
    }
    Err(SynthError::ParamBudgetExceeded {
        label: group.label.clone(),
        max_k,
    })
}

pub fn synth_label(group: &LabelGroup, limits: &SynthLimits) -> Result<EffectSolution, SynthError> {
    synth_label_with_encoding(group, limits).map(|(s, _)| s)
}
