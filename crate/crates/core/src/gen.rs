//! Benchmark trace generation from a reference domain: plan replay and
//! seeded random walks. Emitted traces keep only action names.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{
    apply, ActionSchema, Domain, GroundFact, LiftedFact, Name, State, Substitution, Term,
};
use crate::trace::Trace;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemInstance {
    pub name: Name,
    pub objects: BTreeMap<Name, Name>,
    pub init: State,
    pub goal: BTreeSet<GroundFact>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanStep {
    pub action: Name,
    pub args: Vec<Name>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Plan {
    pub steps: Vec<PlanStep>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenError {
    #[error("plan step {step}: unknown action `{action}`")]
    UnknownAction { step: usize, action: Name },
    #[error("plan step {step}: `{action}` expects {expected} arguments, got {got}")]
    WrongArity {
        step: usize,
        action: Name,
        expected: usize,
        got: usize,
    },
    #[error("plan step {step}: unknown object `{object}`")]
    UnknownObject { step: usize, object: Name },
    #[error("plan step {step}: `{action}` is not applicable")]
    NotApplicable { step: usize, action: Name },
}

fn trace_from(problem: &ProblemInstance, states: &[State], labels: &[Name]) -> Trace {
    Trace::from_states(
        problem.name.clone(),
        problem.objects.clone(),
        states,
        labels,
    )
}

/// Executes `plan` from the initial state. Step numbers in errors are 1-based.
pub fn replay_plan(
    domain: &Domain,
    problem: &ProblemInstance,
    plan: &Plan,
) -> Result<Trace, GenError> {
    let mut states = vec![problem.init.clone()];
    let mut labels = Vec::new();
    for (i, step) in plan.steps.iter().enumerate() {
        let n = i + 1;
        let schema =
            domain
                .action(step.action.as_str())
                .ok_or_else(|| GenError::UnknownAction {
                    step: n,
                    action: step.action.clone(),
                })?;
        if schema.arity() != step.args.len() {
            return Err(GenError::WrongArity {
                step: n,
                action: step.action.clone(),
                expected: schema.arity(),
                got: step.args.len(),
            });
        }
        if let Some(o) = step.args.iter().find(|o| !problem.objects.contains_key(*o)) {
            return Err(GenError::UnknownObject {
                step: n,
                object: o.clone(),
            });
        }
        let sub = Substitution::new(step.args.clone());
        let next = apply(states.last().expect("nonempty"), schema, &sub).map_err(|_| {
            GenError::NotApplicable {
                step: n,
                action: step.action.clone(),
            }
        })?;
        states.push(next);
        labels.push(schema.name.clone());
    }
    Ok(trace_from(problem, &states, &labels))
}

/// Enumerates every applicable grounding of `schema` in `state`, in
/// lexicographic object order. Objects bind a parameter only if their type
/// is a subtype of the parameter type.
pub fn applicable_groundings(
    domain: &Domain,
    problem: &ProblemInstance,
    schema: &ActionSchema,
    state: &State,
) -> Vec<Substitution> {
    let candidates: Vec<Vec<&Name>> = schema
        .param_types
        .iter()
        .map(|pt| {
            problem
                .objects
                .iter()
                .filter(|(_, ot)| {
                    domain
                        .types
                        .is_subtype(ot.as_str(), pt.as_str())
                        .unwrap_or(false)
                })
                .map(|(o, _)| o)
                .collect()
        })
        .collect();
    // preconditions become checkable once their highest parameter is bound
    let mut checks: Vec<Vec<&LiftedFact>> = vec![Vec::new(); schema.arity() + 1];
    for f in &schema.pre {
        let last = f.params().max().map(|m| m + 1).unwrap_or(0);
        checks[last].push(f);
    }
    let mut out = Vec::new();
    if checks[0].iter().any(|f| !holds(f, &[], state)) {
        return out;
    }
    let mut binding: Vec<Name> = Vec::with_capacity(schema.arity());
    extend(&candidates, &checks, state, &mut binding, &mut out);
    out
}

fn holds(f: &LiftedFact, binding: &[Name], state: &State) -> bool {
    let g = GroundFact {
        predicate: f.predicate.clone(),
        args: f
            .args
            .iter()
            .map(|t| match t {
                Term::Param(i) => binding[*i].clone(),
                Term::Const(c) => c.clone(),
            })
            .collect(),
    };
    state.contains(&g)
}

fn extend(
    candidates: &[Vec<&Name>],
    checks: &[Vec<&LiftedFact>],
    state: &State,
    binding: &mut Vec<Name>,
    out: &mut Vec<Substitution>,
) {
    let i = binding.len();
    if i == candidates.len() {
        out.push(Substitution::new(binding.clone()));
        return;
    }
    for &o in &candidates[i] {
        binding.push(o.clone());
        if checks[i + 1].iter().all(|f| holds(f, binding, state)) {
            extend(candidates, checks, state, binding, out);
        }
        binding.pop();
    }
}

/// Random walk of at most `length` steps, sampling uniformly among all
/// applicable ground actions. Stops early in dead ends.
pub fn random_walk(domain: &Domain, problem: &ProblemInstance, length: usize, seed: u64) -> Trace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut states = vec![problem.init.clone()];
    let mut labels = Vec::new();
    for _ in 0..length {
        let state = states.last().expect("nonempty");
        let options: Vec<(&ActionSchema, Substitution)> = domain
            .actions
            .iter()
            .flat_map(|a| {
                applicable_groundings(domain, problem, a, state)
                    .into_iter()
                    .map(move |s| (a, s))
            })
            .collect();
        if options.is_empty() {
            break;
        }
        let (schema, sub) = &options[rng.gen_range(0..options.len())];
        let next = apply(state, schema, sub).expect("enumerated groundings are applicable");
        states.push(next);
        labels.push(schema.name.clone());
    }
    trace_from(problem, &states, &labels)
}
