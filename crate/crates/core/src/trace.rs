//! Label-only state traces: parsing, printing, state reconstruction and
//! decomposition into per-label transition groups.
//!
//! ```text
//! (trace (:instance ID)
//!        (:objects o1 - t1 o2 - t2 ...)
//!        (:init (p o1 o2) ...)
//!        (:step (:label NAME) (:add (f ...) ...) (:del (f ...) ...))
//!        ...)
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

use crate::model::{Domain, GroundFact, Name, State, ROOT_TYPE};
use crate::sexpr::{self, Pos, SExpr, SyntaxError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TraceError {
    #[error(transparent)]
    Parse(#[from] SyntaxError),
    #[error("{pos}: unknown predicate `{name}`")]
    UnknownPredicate { pos: Pos, name: Name },
    #[error("{pos}: `{name}` expects {expected} arguments, got {got}")]
    ArityMismatch {
        pos: Pos,
        name: Name,
        expected: usize,
        got: usize,
    },
    #[error("{pos}: unknown object `{name}`")]
    UnknownObject { pos: Pos, name: Name },
    #[error("{pos}: unknown type `{name}`")]
    UnknownType { pos: Pos, name: Name },
    #[error("step {step}: {reason} {fact}")]
    InconsistentDelta {
        step: usize,
        fact: GroundFact,
        reason: &'static str,
    },
}

/// One labelled step of a trace, stored as a state delta.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub label: Name,
    pub added: BTreeSet<GroundFact>,
    pub deleted: BTreeSet<GroundFact>,
}

/// An observed execution: initial state plus labelled deltas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub instance_id: Name,
    pub objects: BTreeMap<Name, Name>,
    pub init: State,
    pub steps: Vec<TraceStep>,
}

impl Trace {
    /// Reconstructs `S_0 .. S_n`, checking that every delta is a genuine change.
    pub fn states(&self) -> Result<Vec<State>, TraceError> {
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        let mut cur = self.init.clone();
        out.push(cur.clone());
        for (i, step) in self.steps.iter().enumerate() {
            for f in &step.deleted {
                if !cur.remove(f) {
                    return Err(TraceError::InconsistentDelta {
                        step: i + 1,
                        fact: f.clone(),
                        reason: "deleted fact is not in the state:",
                    });
                }
            }
            for f in &step.added {
                if !cur.insert(f.clone()) {
                    return Err(TraceError::InconsistentDelta {
                        step: i + 1,
                        fact: f.clone(),
                        reason: "added fact is already in the state:",
                    });
                }
            }
            out.push(cur.clone());
        }
        Ok(out)
    }

    /// Builds a trace from consecutive states.
    pub fn from_states(
        instance_id: Name,
        objects: BTreeMap<Name, Name>,
        states: &[State],
        labels: &[Name],
    ) -> Self {
        assert_eq!(states.len(), labels.len() + 1, "n labels need n+1 states");
        let steps = labels
            .iter()
            .zip(states.windows(2))
            .map(|(label, w)| TraceStep {
                label: label.clone(),
                added: w[1].minus(&w[0]).cloned().collect(),
                deleted: w[0].minus(&w[1]).cloned().collect(),
            })
            .collect();
        Trace {
            instance_id,
            objects,
            init: states[0].clone(),
            steps,
        }
    }
}

/// `(before, label, after)` drawn from one trace step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub id: usize,
    pub instance_id: Name,
    /// Object universe of the originating instance, with declared types.
    pub objects: Arc<BTreeMap<Name, Name>>,
    pub before: State,
    pub label: Name,
    pub after: State,
}

impl Transition {
    pub fn added(&self) -> impl Iterator<Item = &GroundFact> {
        self.after.minus(&self.before)
    }

    pub fn deleted(&self) -> impl Iterator<Item = &GroundFact> {
        self.before.minus(&self.after)
    }

    /// Distinct objects occurring in facts that change value, in first-seen
    /// order (deleted facts first, then added).
    pub fn changed_objects(&self) -> Vec<Name> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for f in self.deleted().chain(self.added()) {
            for a in &f.args {
                if seen.insert(a.clone()) {
                    out.push(a.clone());
                }
            }
        }
        out
    }

    pub fn has_changes(&self) -> bool {
        self.before != self.after
    }
}

/// All transitions that share one action label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelGroup {
    pub label: Name,
    pub transitions: Vec<Transition>,
    pub min_pars: usize,
}

impl LabelGroup {
    pub fn new(label: Name, transitions: Vec<Transition>) -> Self {
        let min_pars = min_pars(&transitions);
        LabelGroup {
            label,
            transitions,
            min_pars,
        }
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }
}

/// Maximum, over the transitions, of the number of distinct objects among
/// facts that change value.
pub fn min_pars(transitions: &[Transition]) -> usize {
    transitions
        .iter()
        .map(|t| t.changed_objects().len())
        .max()
        .unwrap_or(0)
}

/// Splits traces into transitions grouped by label. Transition ids are
/// assigned in trace order, then step order.
pub fn decompose(traces: &[Trace]) -> Result<BTreeMap<Name, LabelGroup>, TraceError> {
    let mut by_label: BTreeMap<Name, Vec<Transition>> = BTreeMap::new();
    let mut next_id = 0;
    for trace in traces {
        let objects = Arc::new(trace.objects.clone());
        let states = trace.states()?;
        for (step, w) in trace.steps.iter().zip(states.windows(2)) {
            by_label
                .entry(step.label.clone())
                .or_default()
                .push(Transition {
                    id: next_id,
                    instance_id: trace.instance_id.clone(),
                    objects: Arc::clone(&objects),
                    before: w[0].clone(),
                    label: step.label.clone(),
                    after: w[1].clone(),
                });
            next_id += 1;
        }
    }
    Ok(by_label
        .into_iter()
        .map(|(label, ts)| (label.clone(), LabelGroup::new(label, ts)))
        .collect())
}

fn section<'a>(e: &'a SExpr, key: &str) -> Option<&'a [SExpr]> {
    match e.list() {
        Some(items) if items.first().and_then(SExpr::atom) == Some(key) => Some(&items[1..]),
        _ => None,
    }
}

fn parse_fact(
    e: &SExpr,
    header: &Domain,
    objects: &BTreeMap<Name, Name>,
) -> Result<GroundFact, TraceError> {
    let items = e.expect_list("fact")?;
    let head = items
        .first()
        .ok_or_else(|| SyntaxError::new(e.pos(), "empty fact"))?
        .expect_atom("predicate name")?;
    let sig = header
        .predicates
        .get(head)
        .ok_or_else(|| TraceError::UnknownPredicate {
            pos: e.pos(),
            name: Name::new(head),
        })?;
    if sig.arity() != items.len() - 1 {
        return Err(TraceError::ArityMismatch {
            pos: e.pos(),
            name: sig.name.clone(),
            expected: sig.arity(),
            got: items.len() - 1,
        });
    }
    let mut args = Vec::with_capacity(sig.arity());
    for a in &items[1..] {
        let s = a.expect_atom("object")?;
        let (name, _) = objects
            .get_key_value(s)
            .ok_or_else(|| TraceError::UnknownObject {
                pos: a.pos(),
                name: Name::new(s),
            })?;
        args.push(name.clone());
    }
    Ok(GroundFact {
        predicate: sig.name.clone(),
        args,
    })
}

fn parse_objects(items: &[SExpr], header: &Domain) -> Result<BTreeMap<Name, Name>, TraceError> {
    let mut out = BTreeMap::new();
    let mut pending: Vec<&SExpr> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let a = items[i].expect_atom("object name")?;
        if a == "-" {
            let ty_e = items
                .get(i + 1)
                .ok_or_else(|| SyntaxError::new(items[i].pos(), "missing type after `-`"))?;
            let ty = ty_e.expect_atom("type name")?;
            let ty = header.types.get(ty).map_err(|_| TraceError::UnknownType {
                pos: ty_e.pos(),
                name: Name::new(ty),
            })?;
            if pending.is_empty() {
                return Err(
                    SyntaxError::new(items[i].pos(), "`-` without preceding objects").into(),
                );
            }
            for o in pending.drain(..) {
                out.insert(Name::new(o.atom().expect("atom")), ty.clone());
            }
            i += 2;
        } else {
            pending.push(&items[i]);
            i += 1;
        }
    }
    for o in pending {
        out.insert(Name::new(o.atom().expect("atom")), Name::new(ROOT_TYPE));
    }
    Ok(out)
}

/// Parses and validates a trace against the header's predicates and types.
pub fn parse_trace(text: &str, header: &Domain) -> Result<Trace, TraceError> {
    let top = sexpr::parse_one(text)?;
    let items = top.expect_list("(trace ...)")?;
    if items.first().and_then(SExpr::atom) != Some("trace") {
        return Err(SyntaxError::new(top.pos(), "expected `(trace ...)`").into());
    }
    let mut instance_id = None;
    let mut objects = BTreeMap::new();
    let mut init_items: &[SExpr] = &[];
    let mut step_items = Vec::new();
    for e in &items[1..] {
        if let Some(rest) = section(e, ":instance") {
            let id = rest
                .first()
                .ok_or_else(|| SyntaxError::new(e.pos(), "missing instance id"))?
                .expect_atom("instance id")?;
            instance_id = Some(Name::new(id));
        } else if let Some(rest) = section(e, ":objects") {
            objects = parse_objects(rest, header)?;
        } else if let Some(rest) = section(e, ":init") {
            init_items = rest;
        } else if let Some(rest) = section(e, ":step") {
            step_items.push((e.pos(), rest));
        } else {
            return Err(
                SyntaxError::new(e.pos(), "expected :instance, :objects, :init or :step").into(),
            );
        }
    }
    let instance_id =
        instance_id.ok_or_else(|| SyntaxError::new(top.pos(), "missing (:instance ID)"))?;
    let init = init_items
        .iter()
        .map(|f| parse_fact(f, header, &objects))
        .collect::<Result<State, _>>()?;

    let mut steps = Vec::with_capacity(step_items.len());
    for (pos, rest) in step_items {
        let mut label = None;
        let mut added = BTreeSet::new();
        let mut deleted = BTreeSet::new();
        for part in rest {
            if let Some(l) = section(part, ":label") {
                let l = l
                    .first()
                    .ok_or_else(|| SyntaxError::new(part.pos(), "missing label"))?
                    .expect_atom("label")?;
                label = Some(Name::new(l));
            } else if let Some(fs) = section(part, ":add") {
                for f in fs {
                    added.insert(parse_fact(f, header, &objects)?);
                }
            } else if let Some(fs) = section(part, ":del") {
                for f in fs {
                    deleted.insert(parse_fact(f, header, &objects)?);
                }
            } else {
                return Err(SyntaxError::new(part.pos(), "expected :label, :add or :del").into());
            }
        }
        let label = label.ok_or_else(|| SyntaxError::new(pos, "step without (:label NAME)"))?;
        steps.push(TraceStep {
            label,
            added,
            deleted,
        });
    }
    let trace = Trace {
        instance_id,
        objects,
        init,
        steps,
    };
    trace.states()?;
    Ok(trace)
}

/// Deterministic rendering (facts and objects sorted).
pub fn emit_trace(trace: &Trace) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "(trace");
    let _ = writeln!(s, "  (:instance {})", trace.instance_id);
    let _ = write!(s, "  (:objects");
    for (o, t) in &trace.objects {
        let _ = write!(s, "\n    {o} - {t}");
    }
    let _ = writeln!(s, ")");
    let _ = write!(s, "  (:init");
    for f in &trace.init {
        let _ = write!(s, "\n    {f}");
    }
    let _ = writeln!(s, ")");
    for step in &trace.steps {
        let _ = write!(s, "  (:step (:label {})", step.label);
        let _ = write!(s, "\n    (:add");
        for f in &step.added {
            let _ = write!(s, " {f}");
        }
        let _ = write!(s, ")\n    (:del");
        for f in &step.deleted {
            let _ = write!(s, " {f}");
        }
        let _ = writeln!(s, "))");
    }
    s.push_str(")\n");
    s
}
