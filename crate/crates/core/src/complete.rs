//! Completing synthesized effects into full schemas: preconditions from
//! lifted before-state candidates, parameter types from predicate signatures.

use std::collections::{BTreeMap, BTreeSet};

use crate::model::{
    Domain, GroundFact, LiftedFact, ModelError, Name, Substitution, Term, TypeHierarchy,
};
use crate::synth::EffectSolution;
use crate::trace::LabelGroup;

/// Facts of the before-state whose arguments all lie in the range of `sub`.
/// Zero-arity facts are always included.
pub fn ground_candidates(before: &crate::model::State, sub: &Substitution) -> BTreeSet<GroundFact> {
    let range = sub.range();
    before
        .iter()
        .filter(|f| f.args.iter().all(|a| range.contains(a)))
        .cloned()
        .collect()
}

/// Every lifting of every fact in `gpc`: each argument may be replaced by
/// any parameter that `sub` maps to it.
pub fn lift_all_ways(gpc: &BTreeSet<GroundFact>, sub: &Substitution) -> BTreeSet<LiftedFact> {
    let mut out = BTreeSet::new();
    for f in gpc {
        let choices: Vec<Vec<usize>> = f.args.iter().map(|a| sub.preimage(a).collect()).collect();
        if choices.iter().any(Vec::is_empty) {
            continue;
        }
        let mut idx = vec![0usize; choices.len()];
        loop {
            out.insert(LiftedFact {
                predicate: f.predicate.clone(),
                args: idx
                    .iter()
                    .zip(&choices)
                    .map(|(&i, c)| Term::Param(c[i]))
                    .collect(),
            });
            // odometer increment, last position fastest
            let mut pos = idx.len();
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < choices[pos].len() {
                    break;
                }
                idx[pos] = 0;
            }
            if idx.iter().all(|&i| i == 0) {
                break;
            }
        }
    }
    out
}

/// Intersection of the lifted candidates of every transition in the group.
pub fn synth_preconditions(group: &LabelGroup, solution: &EffectSolution) -> BTreeSet<LiftedFact> {
    let mut pre: Option<BTreeSet<LiftedFact>> = None;
    for r in &group.transitions {
        let sub = &solution.substitutions[&r.id];
        let lpc = lift_all_ways(&ground_candidates(&r.before, sub), sub);
        pre = Some(match pre {
            None => lpc,
            Some(p) => p.intersection(&lpc).cloned().collect(),
        });
        if pre.as_ref().is_some_and(BTreeSet::is_empty) {
            break;
        }
    }
    pre.unwrap_or_default()
}

/// Most specific types observed for each object.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ObjectTypeTable {
    pub observed: BTreeMap<Name, BTreeSet<Name>>,
}

impl ObjectTypeTable {
    /// Single type for `object`: its unique minimal observed type, the least
    /// common ancestor when observations are incomparable, or the root type
    /// when there are none.
    pub fn resolve(&self, object: &Name, types: &TypeHierarchy) -> Result<Name, ModelError> {
        match self.observed.get(object) {
            None => Ok(types.root().clone()),
            Some(set) if set.is_empty() => Ok(types.root().clone()),
            Some(set) if set.len() == 1 => Ok(set.iter().next().expect("one").clone()),
            Some(set) => {
                let lca = types.least_common_ancestor(set)?;
                log::warn!(
                    "object {object} observed with incomparable types {}; using {lca}",
                    set.iter().map(Name::as_str).collect::<Vec<_>>().join(", ")
                );
                Ok(lca)
            }
        }
    }
}

fn minimal_types(
    types: &TypeHierarchy,
    seen: &BTreeSet<Name>,
) -> Result<BTreeSet<Name>, ModelError> {
    let mut out = BTreeSet::new();
    for t in seen {
        let mut dominated = false;
        for u in seen {
            if u != t && types.is_subtype(u.as_str(), t.as_str())? {
                dominated = true;
                break;
            }
        }
        if !dominated {
            out.insert(t.clone());
        }
    }
    Ok(out)
}

/// Collects, per object, the argument types of every predicate position it
/// fills in any before- or after-state, plus its declared type unless that
/// is the root, and keeps the minimal ones.
pub fn infer_object_types<'a, I>(groups: I, header: &Domain) -> Result<ObjectTypeTable, ModelError>
where
    I: IntoIterator<Item = &'a LabelGroup>,
{
    let types = &header.types;
    let mut seen: BTreeMap<Name, BTreeSet<Name>> = BTreeMap::new();
    let mut instances = BTreeSet::new();
    for r in groups.into_iter().flat_map(|g| &g.transitions) {
        if instances.insert(r.instance_id.clone()) {
            for (o, ty) in r.objects.iter() {
                let entry = seen.entry(o.clone()).or_default();
                if ty != types.root() {
                    entry.insert(ty.clone());
                }
            }
        }
        for state in [&r.before, &r.after] {
            for f in state.iter() {
                let Some(sig) = header.predicates.get(&f.predicate) else {
                    continue;
                };
                for (a, ty) in f.args.iter().zip(&sig.arg_types) {
                    seen.entry(a.clone()).or_default().insert(ty.clone());
                }
            }
        }
    }
    let mut observed = BTreeMap::new();
    for (o, set) in seen {
        observed.insert(o, minimal_types(types, &set)?);
    }
    Ok(ObjectTypeTable { observed })
}

/// Type of each parameter: the least common ancestor of the resolved types
/// of all objects bound to it.
pub fn assign_parameter_types(
    group: &LabelGroup,
    solution: &EffectSolution,
    table: &ObjectTypeTable,
    types: &TypeHierarchy,
) -> Result<Vec<Name>, ModelError> {
    let mut occupants: Vec<BTreeSet<Name>> = vec![BTreeSet::new(); solution.k];
    for r in &group.transitions {
        let sub = &solution.substitutions[&r.id];
        for (i, o) in sub.objects().iter().enumerate() {
            occupants[i].insert(o.clone());
        }
    }
    occupants
        .iter()
        .map(|objs| {
            let resolved: Vec<Name> = objs
                .iter()
                .map(|o| table.resolve(o, types))
                .collect::<Result<_, _>>()?;
            types.least_common_ancestor(&resolved)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{PredicateSignature, State};
    use proptest::prelude::*;

    fn n(s: &str) -> Name {
        Name::new(s)
    }

    fn sub(objs: &[&str]) -> Substitution {
        Substitution::new(objs.iter().map(|o| n(o)).collect())
    }

    fn g(p: &str, args: &[&str]) -> GroundFact {
        GroundFact::new(p, args.iter().copied())
    }

    fn l(p: &str, params: &[usize]) -> LiftedFact {
        LiftedFact::over_params(p, params)
    }

    #[test]
    fn ground_candidates_filter_by_range() {
        let s: State = [g("p", &["a"]), g("q", &["b"])].into_iter().collect();
        assert_eq!(
            ground_candidates(&s, &sub(&["a"])),
            [g("p", &["a"])].into_iter().collect()
        );
        let h: State = [g("handempty", &[])].into_iter().collect();
        assert_eq!(ground_candidates(&h, &sub(&[])).len(), 1);
        let q: State = [g("q", &["a", "c"])].into_iter().collect();
        assert!(ground_candidates(&q, &sub(&["a", "b"])).is_empty());
    }

    #[test]
    fn lifting_covers_every_preimage() {
        let gpc: BTreeSet<_> = [g("p", &["a"])].into_iter().collect();
        assert_eq!(
            lift_all_ways(&gpc, &sub(&["a", "a"])),
            [l("p", &[0]), l("p", &[1])].into_iter().collect()
        );
        assert_eq!(
            lift_all_ways(&gpc, &sub(&["a"])),
            [l("p", &[0])].into_iter().collect()
        );
        let gpc: BTreeSet<_> = [g("q", &["a", "b"]), g("r", &["b"])].into_iter().collect();
        assert_eq!(
            lift_all_ways(&gpc, &sub(&["a", "b"])),
            [l("q", &[0, 1]), l("r", &[1])].into_iter().collect()
        );
        let gpc: BTreeSet<_> = [g("q", &["a", "a"])].into_iter().collect();
        assert_eq!(lift_all_ways(&gpc, &sub(&["a", "a"])).len(), 4);
    }

    proptest! {
        #[test]
        fn lifted_candidates_ground_back(
            binding in proptest::collection::vec(0usize..3, 0..4),
            facts in proptest::collection::vec((0usize..3, 0usize..3), 0..6),
        ) {
            let objs = ["a", "b", "c"];
            let s = sub(&binding.iter().map(|&i| objs[i]).collect::<Vec<_>>());
            let before: State = facts.iter().map(|&(x, y)| g("e", &[objs[x], objs[y]])).collect();
            let gpc = ground_candidates(&before, &s);
            prop_assert!(gpc.iter().all(|f| before.contains(f)));
            for lf in lift_all_ways(&gpc, &s) {
                prop_assert!(gpc.contains(&lf.ground(&s)));
            }
        }
    }

    fn hierarchy() -> TypeHierarchy {
        TypeHierarchy::from_declarations(vec![
            (n("t2"), None),
            (n("t1"), Some(n("t2"))),
            (n("ta"), Some(n("t2"))),
            (n("tb"), Some(n("t2"))),
        ])
        .unwrap()
    }

    fn header() -> Domain {
        let mut d = Domain::new("d", hierarchy());
        d.add_predicate(PredicateSignature::new("p", &["t1"]));
        d.add_predicate(PredicateSignature::new("q", &["t2"]));
        d.add_predicate(PredicateSignature::new("ra", &["ta"]));
        d.add_predicate(PredicateSignature::new("rb", &["tb"]));
        d
    }

    fn groups(facts: &[GroundFact], objs: &[&str]) -> Vec<LabelGroup> {
        let s: State = facts.iter().cloned().collect();
        let t = crate::trace::Trace::from_states(
            n("i"),
            objs.iter().map(|o| (n(o), n("object"))).collect(),
            &[s.clone(), s],
            &[n("noop")],
        );
        crate::trace::decompose(&[t])
            .unwrap()
            .into_values()
            .collect()
    }

    #[test]
    fn object_types_from_signatures() {
        let gs = groups(
            &[
                g("p", &["o"]),
                g("q", &["o"]),
                g("ra", &["s"]),
                g("rb", &["s"]),
            ],
            &["o", "s", "lonely"],
        );
        let table = infer_object_types(&gs, &header()).unwrap();
        assert_eq!(table.observed[&n("o")], [n("t1")].into_iter().collect());
        assert_eq!(
            table.observed[&n("s")],
            [n("ta"), n("tb")].into_iter().collect()
        );
        assert!(table.observed[&n("lonely")].is_empty());
        let h = hierarchy();
        assert_eq!(table.resolve(&n("s"), &h).unwrap(), n("t2"));
        assert_eq!(table.resolve(&n("lonely"), &h).unwrap(), n("object"));
    }

    fn solution_with(k: usize, subs: &[Substitution]) -> (LabelGroup, EffectSolution) {
        let group = LabelGroup {
            label: n("act"),
            transitions: (0..subs.len())
                .map(|id| crate::trace::Transition {
                    id,
                    instance_id: n("i"),
                    objects: Default::default(),
                    before: State::new(),
                    label: n("act"),
                    after: State::new(),
                })
                .collect(),
            min_pars: 0,
        };
        let sol = EffectSolution {
            label: n("act"),
            k,
            add: BTreeSet::new(),
            del: BTreeSet::new(),
            substitutions: subs.iter().cloned().enumerate().collect(),
            encoded: BTreeSet::new(),
            stats: Default::default(),
        };
        (group, sol)
    }

    #[test]
    fn parameter_types_are_lcas() {
        let h = TypeHierarchy::from_declarations(vec![
            (n("vehicletype"), None),
            (n("trucktype"), Some(n("vehicletype"))),
            (n("planetype"), Some(n("vehicletype"))),
            (n("ingredient"), Some(n("beverage"))),
            (n("beverage"), None),
        ])
        .unwrap();
        let mut table = ObjectTypeTable::default();
        table
            .observed
            .insert(n("t"), [n("trucktype")].into_iter().collect());
        table
            .observed
            .insert(n("p"), [n("planetype")].into_iter().collect());
        table
            .observed
            .insert(n("gin"), [n("ingredient")].into_iter().collect());
        let (group, sol) =
            solution_with(3, &[sub(&["t", "gin", "saw"]), sub(&["p", "gin", "saw"])]);
        let types = assign_parameter_types(&group, &sol, &table, &h).unwrap();
        assert_eq!(types, vec![n("vehicletype"), n("ingredient"), n("object")]);
    }

    #[test]
    fn preconditions_intersect() {
        let before1: State = [g("p", &["a"])].into_iter().collect();
        // candidates {p(x1), p(x2)} and {p(x1)}
        let before2: State = [g("p", &["a"]), g("p", &["b"])].into_iter().collect();
        let (mut group, sol) = solution_with(2, &[sub(&["a", "a"]), sub(&["a", "b"])]);
        group.transitions[0].before = before1.clone();
        group.transitions[1].before = before1.clone();
        assert_eq!(
            synth_preconditions(&group, &sol),
            [l("p", &[0])].into_iter().collect()
        );

        let (mut single, sol1) = solution_with(2, &[sub(&["a", "b"])]);
        single.transitions[0].before = before2;
        assert_eq!(
            synth_preconditions(&single, &sol1),
            [l("p", &[0]), l("p", &[1])].into_iter().collect()
        );

        let (mut disjoint, sol2) = solution_with(1, &[sub(&["a"]), sub(&["a"])]);
        disjoint.transitions[0].before = [g("p", &["a"])].into_iter().collect();
        disjoint.transitions[1].before = [g("q", &["a"])].into_iter().collect();
        assert!(synth_preconditions(&disjoint, &sol2).is_empty());
    }
}
