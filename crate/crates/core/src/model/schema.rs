use std::collections::BTreeSet;

use super::fact::{GroundFact, LiftedFact, State};
use super::{ModelError, Name};

/// Lifted STRIPS action: parameters, their types, preconditions and effects.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSchema {
    pub name: Name,
    pub params: Vec<Name>,
    pub param_types: Vec<Name>,
    pub pre: BTreeSet<LiftedFact>,
    pub add: BTreeSet<LiftedFact>,
    pub del: BTreeSet<LiftedFact>,
}

impl ActionSchema {
    /// Schema with `k` untyped parameters named `x1..xk` and no facts.
    pub fn with_arity(name: &str, k: usize) -> Self {
        ActionSchema {
            name: Name::new(name),
            params: (1..=k).map(|i| Name::new(&format!("x{i}"))).collect(),
            param_types: vec![Name::new(super::ROOT_TYPE); k],
            pre: BTreeSet::new(),
            add: BTreeSet::new(),
            del: BTreeSet::new(),
        }
    }

    pub fn arity(&self) -> usize {
        self.params.len()
    }

    pub fn facts(&self) -> impl Iterator<Item = &LiftedFact> {
        self.pre.iter().chain(&self.add).chain(&self.del)
    }

    /// Checks parameter distinctness, type vector length and index bounds.
    pub fn validate(&self) -> Result<(), ModelError> {
        let invalid = |reason: String| ModelError::InvalidSchema {
            action: self.name.clone(),
            reason,
        };
        if self.params.len() != self.param_types.len() {
            return Err(invalid(format!(
                "{} parameters but {} types",
                self.params.len(),
                self.param_types.len()
            )));
        }
        let distinct: BTreeSet<&Name> = self.params.iter().collect();
        if distinct.len() != self.params.len() {
            return Err(invalid("duplicate parameter name".into()));
        }
        for f in self.facts() {
            if let Some(i) = f.params().find(|&i| i >= self.params.len()) {
                return Err(invalid(format!(
                    "parameter index {i} out of range in {f:?}"
                )));
            }
        }
        Ok(())
    }

    pub fn ground_pre(&self, sub: &Substitution) -> impl Iterator<Item = GroundFact> + '_ {
        let sub = sub.clone();
        self.pre.iter().map(move |f| f.ground(&sub))
    }
}

/// Objects bound to a schema's parameters, by parameter position.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Substitution(Vec<Name>);

impl Substitution {
    pub fn new(objects: Vec<Name>) -> Self {
        Substitution(objects)
    }

    pub fn get(&self, param: usize) -> &Name {
        &self.0[param]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn objects(&self) -> &[Name] {
        &self.0
    }

    pub fn range(&self) -> BTreeSet<&Name> {
        self.0.iter().collect()
    }

    /// Parameter positions bound to `object`.
    pub fn preimage<'a>(&'a self, object: &'a Name) -> impl Iterator<Item = usize> + 'a {
        self.0
            .iter()
            .enumerate()
            .filter(move |(_, o)| *o == object)
            .map(|(i, _)| i)
    }

    fn check(&self, schema: &ActionSchema) -> Result<(), ModelError> {
        if self.len() != schema.arity() {
            return Err(ModelError::SubstitutionArity {
                action: schema.name.clone(),
                expected: schema.arity(),
                got: self.len(),
            });
        }
        Ok(())
    }
}

/// `true` iff every grounded precondition holds in `state`.
pub fn applicable(state: &State, schema: &ActionSchema, sub: &Substitution) -> bool {
    sub.len() == schema.arity() && schema.pre.iter().all(|f| state.contains(&f.ground(sub)))
}

/// Successor state `(state \ del) ∪ add`; adds win over deletes.
pub fn apply(
    state: &State,
    schema: &ActionSchema,
    sub: &Substitution,
) -> Result<State, ModelError> {
    sub.check(schema)?;
    if !applicable(state, schema, sub) {
        return Err(ModelError::NotApplicable(schema.name.clone()));
    }
    let mut next = state.clone();
    for f in &schema.del {
        next.remove(&f.ground(sub));
    }
    for f in &schema.add {
        next.insert(f.ground(sub));
    }
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Term;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn p(obj: &str) -> GroundFact {
        GroundFact::new("p", [obj])
    }

    fn unary(pre: &[&str], add: &[&str], del: &[&str]) -> ActionSchema {
        let mut s = ActionSchema::with_arity("a", 1);
        let lift = |ps: &[&str]| {
            ps.iter()
                .map(|q| LiftedFact::over_params(q, &[0]))
                .collect()
        };
        s.pre = lift(pre);
        s.add = lift(add);
        s.del = lift(del);
        s
    }

    fn sub(o: &str) -> Substitution {
        Substitution::new(vec![Name::new(o)])
    }

    #[test]
    fn applicability_examples() {
        let s: State = [p("a")].into_iter().collect();
        assert!(applicable(&State::new(), &unary(&[], &[], &[]), &sub("z")));
        assert!(applicable(&s, &unary(&["p"], &[], &[]), &sub("a")));
        assert!(!applicable(&s, &unary(&["p"], &[], &[]), &sub("b")));
    }

    #[test]
    fn apply_examples() {
        let s: State = [p("a")].into_iter().collect();
        assert_eq!(
            apply(&s, &unary(&[], &[], &["p"]), &sub("a")).unwrap(),
            State::new()
        );
        assert_eq!(
            apply(&State::new(), &unary(&[], &["p"], &[]), &sub("a")).unwrap(),
            s
        );
        let q: State = [GroundFact::new("q", ["a"])].into_iter().collect();
        assert_eq!(
            apply(&q, &unary(&[], &["q"], &["q"]), &sub("a")).unwrap(),
            q
        );
        assert_eq!(
            apply(&State::new(), &unary(&["p"], &[], &[]), &sub("a")),
            Err(ModelError::NotApplicable(Name::new("a")))
        );
    }

    #[test]
    fn validate_catches_bad_indices() {
        let mut s = ActionSchema::with_arity("a", 1);
        s.add.insert(LiftedFact::over_params("p", &[1]));
        assert!(s.validate().is_err());
        s.params.push(Name::new("x1"));
        s.param_types.push(Name::new("object"));
        assert!(s.validate().is_err());
    }

    // independent set-algebra oracle over bit masks of a 2-object universe
    fn universe() -> Vec<GroundFact> {
        let mut u = Vec::new();
        for pred in ["p", "q"] {
            for o in ["a", "b"] {
                u.push(GroundFact::new(pred, [o]));
            }
            for o1 in ["a", "b"] {
                for o2 in ["a", "b"] {
                    u.push(GroundFact::new(&format!("{pred}2"), [o1, o2]));
                }
            }
        }
        u.truncate(10);
        u
    }

    fn lifted_universe() -> Vec<LiftedFact> {
        vec![
            LiftedFact::over_params("p", &[0]),
            LiftedFact::over_params("p", &[1]),
            LiftedFact::over_params("q", &[0]),
            LiftedFact::over_params("p2", &[0, 1]),
            LiftedFact::over_params("p2", &[1, 0]),
            LiftedFact::over_params("q2", &[0, 0]),
        ]
    }

    proptest! {
        #[test]
        fn apply_matches_set_algebra(
            state_mask in 0u32..1024,
            pre_mask in 0u32..64, add_mask in 0u32..64, del_mask in 0u32..64,
            o1 in 0usize..2, o2 in 0usize..2,
        ) {
            let u = universe();
            let lu = lifted_universe();
            let pick = |m: u32| -> BTreeSet<LiftedFact> {
                lu.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, f)| f.clone()).collect()
            };
            let mut schema = ActionSchema::with_arity("act", 2);
            schema.pre = pick(pre_mask);
            schema.add = pick(add_mask);
            schema.del = pick(del_mask);
            let objs = ["a", "b"];
            let sub = Substitution::new(vec![Name::new(objs[o1]), Name::new(objs[o2])]);
            let state: State = u.iter().enumerate().filter(|(i, _)| state_mask >> i & 1 == 1).map(|(_, f)| f.clone()).collect();

            // oracle: ground by string substitution, then plain set operations
            let ground_str = |f: &LiftedFact| -> String {
                let args: Vec<&str> = f.args.iter().map(|t| match t {
                    Term::Param(0) => objs[o1], Term::Param(_) => objs[o2], Term::Const(_) => unreachable!(),
                }).collect();
                format!("({} {})", f.predicate, args.join(" "))
            };
            let s_str: BTreeSet<String> = state.iter().map(|f| f.to_string()).collect();
            let pre_ok = schema.pre.iter().all(|f| s_str.contains(&ground_str(f)));
            prop_assert_eq!(applicable(&state, &schema, &sub), pre_ok);
            if pre_ok {
                let dels: BTreeSet<String> = schema.del.iter().map(ground_str).collect();
                let adds: BTreeSet<String> = schema.add.iter().map(ground_str).collect();
                let expected: BTreeSet<String> = s_str.difference(&dels).cloned().collect::<BTreeSet<_>>().union(&adds).cloned().collect();
                let got: BTreeSet<String> = apply(&state, &schema, &sub).unwrap().iter().map(|f| f.to_string()).collect();
                prop_assert_eq!(got, expected);
            } else {
                prop_assert!(apply(&state, &schema, &sub).is_err());
            }
        }
    }
}
