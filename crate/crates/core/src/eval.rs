//! Comparing a learned domain with a reference domain.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;

use crate::model::{ActionSchema, LiftedFact, Name, Term, TypeHierarchy};

/// Weighted similarity: `mapped / (mapped + mp + 0.2 pp + me + pe)`, or 1.0
/// when everything is zero.
pub fn fidelity(mapped: usize, mp: usize, pp: usize, me: usize, pe: usize) -> f64 {
    let score = mp as f64 + 0.2 * pp as f64 + me as f64 + pe as f64;
    let denom = mapped as f64 + score;
    if denom == 0.0 {
        1.0
    } else {
        mapped as f64 / denom
    }
}

/// Partial injective map from learned to reference parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alignment {
    pub map: Vec<Option<usize>>,
    /// Learned preconditions and effects whose image is in the reference.
    pub matched: usize,
}

impl Alignment {
    fn image(&self, f: &LiftedFact) -> Option<LiftedFact> {
        let args = f
            .args
            .iter()
            .map(|t| match t {
                Term::Param(i) => self.map.get(*i).copied().flatten().map(Term::Param),
                Term::Const(c) => Some(Term::Const(c.clone())),
            })
            .collect::<Option<Vec<_>>>()?;
        Some(LiftedFact {
            predicate: f.predicate.clone(),
            args,
        })
    }
}

fn types_fit(types: &TypeHierarchy, a: &Name, b: &Name, tolerant: bool) -> bool {
    if a == b {
        return true;
    }
    tolerant && types.comparable(a.as_str(), b.as_str()).unwrap_or(false)
}

struct Search<'a> {
    facts: Vec<(&'a LiftedFact, &'a BTreeSet<LiftedFact>)>,
    // facts become decidable once their highest parameter is assigned
    decided_at: Vec<Vec<usize>>,
    allowed: Vec<Vec<usize>>,
    best: Option<Alignment>,
    limit: usize,
}

impl Search<'_> {
    fn count(&self, map: &[Option<usize>], idx: &[usize]) -> usize {
        let a = Alignment {
            map: map.to_vec(),
            matched: 0,
        };
        idx.iter()
            .filter(|&&i| {
                let (f, target) = self.facts[i];
                a.image(f).is_some_and(|g| target.contains(&g))
            })
            .count()
    }

    fn go(
        &mut self,
        map: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
        matched: usize,
        pending: usize,
    ) {
        let best = self.best.as_ref().map_or(0, |b| b.matched);
        if self.best.is_some() && (matched + pending <= best || best == self.limit) {
            return;
        }
        let i = map.len();
        if i == self.allowed.len() {
            self.best = Some(Alignment {
                map: map.clone(),
                matched,
            });
            return;
        }
        let decided = self.decided_at[i + 1].clone();
        let options: Vec<Option<usize>> = self.allowed[i]
            .iter()
            .copied()
            .filter(|&j| !used[j])
            .map(Some)
            .chain(std::iter::once(None))
            .collect();
        for choice in options {
            map.push(choice);
            if let Some(j) = choice {
                used[j] = true;
            }
            let gained = self.count(map, &decided);
            self.go(map, used, matched + gained, pending - decided.len());
            if let Some(j) = choice {
                used[j] = false;
            }
            map.pop();
        }
    }
}

/// Best alignment of `learned`'s parameters onto `reference`'s: maximizes
/// the number of learned preconditions, adds and deletes that map onto the
/// reference's. Parameter pairs must have equal types, or comparable types
/// when `tolerant`. Ties go to the lexicographically smallest map, with
/// "unaligned" ordered after every parameter.
pub fn align_parameters(
    learned: &ActionSchema,
    reference: &ActionSchema,
    types: &TypeHierarchy,
    tolerant: bool,
) -> Alignment {
    let k = learned.arity();
    let mut facts = Vec::new();
    for (mine, theirs) in [
        (&learned.pre, &reference.pre),
        (&learned.add, &reference.add),
        (&learned.del, &reference.del),
    ] {
        for f in mine {
            facts.push((f, theirs));
        }
    }
    let limit = facts
        .len()
        .min(reference.pre.len() + reference.add.len() + reference.del.len());
    let mut decided_at = vec![Vec::new(); k + 1];
    for (i, (f, _)) in facts.iter().enumerate() {
        let last = f.params().max().map_or(0, |m| m + 1);
        decided_at[last].push(i);
    }
    let allowed = learned
        .param_types
        .iter()
        .map(|lt| {
            reference
                .param_types
                .iter()
                .enumerate()
                .filter(|(_, rt)| types_fit(types, lt, rt, tolerant))
                .map(|(j, _)| j)
                .collect()
        })
        .collect();
    let mut search = Search {
        facts,
        decided_at,
        allowed,
        best: None,
        limit,
    };
    let base = search.decided_at[0].clone();
    let always = search.count(&[], &base);
    let pending = search.facts.len() - base.len();
    let mut used = vec![false; reference.arity()];
    search.go(&mut Vec::new(), &mut used, always, pending);
    search
        .best
        .expect("the all-unaligned map is always reachable")
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Counts {
    #[serde(rename = "minusP")]
    pub minus_p: usize,
    #[serde(rename = "plusP")]
    pub plus_p: usize,
    #[serde(rename = "minusE_tol")]
    pub minus_e_tol: usize,
    #[serde(rename = "plusE_tol")]
    pub plus_e_tol: usize,
    #[serde(rename = "minusE_strict")]
    pub minus_e_strict: usize,
    #[serde(rename = "plusE_strict")]
    pub plus_e_strict: usize,
}

impl Counts {
    fn add(&mut self, o: &Counts) {
        self.minus_p += o.minus_p;
        self.plus_p += o.plus_p;
        self.minus_e_tol += o.minus_e_tol;
        self.plus_e_tol += o.plus_e_tol;
        self.minus_e_strict += o.minus_e_strict;
        self.plus_e_strict += o.plus_e_strict;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ActionDiff {
    pub name: Name,
    #[serde(flatten)]
    pub counts: Counts,
    #[serde(skip)]
    pub alignment: Alignment,
    #[serde(skip)]
    pub mapped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffReport {
    pub actions: Vec<ActionDiff>,
    pub totals: Counts,
    pub mapped: usize,
    pub fidelity: f64,
    /// Fidelity using the type-exact effect counts.
    pub fidelity_strict: f64,
    /// Reference actions with no learned counterpart; not counted.
    pub unobserved_actions: Vec<Name>,
    /// Learned actions with no reference counterpart; not counted.
    pub unknown_actions: Vec<Name>,
}

fn matched_in(
    a: &Alignment,
    mine: &BTreeSet<LiftedFact>,
    theirs: &BTreeSet<LiftedFact>,
) -> Vec<LiftedFact> {
    mine.iter()
        .filter(|f| a.image(f).is_some_and(|g| theirs.contains(&g)))
        .cloned()
        .collect()
}

/// Counts for one action under its tolerant alignment. Strict effect counts
/// only accept matched effects whose aligned parameters have equal types.
pub fn diff_action(
    learned: &ActionSchema,
    reference: &ActionSchema,
    types: &TypeHierarchy,
) -> ActionDiff {
    let a = align_parameters(learned, reference, types, true);
    let pre = matched_in(&a, &learned.pre, &reference.pre).len();
    let add = matched_in(&a, &learned.add, &reference.add);
    let del = matched_in(&a, &learned.del, &reference.del);
    let type_equal = |f: &LiftedFact| {
        f.params().all(|i| {
            let j = a.map[i].expect("matched facts are fully aligned");
            learned.param_types[i] == reference.param_types[j]
        })
    };
    let eff_tol = add.len() + del.len();
    let eff_strict = add.iter().chain(&del).filter(|f| type_equal(f)).count();
    let ref_eff = reference.add.len() + reference.del.len();
    let my_eff = learned.add.len() + learned.del.len();
    ActionDiff {
        name: learned.name.clone(),
        counts: Counts {
            minus_p: reference.pre.len() - pre,
            plus_p: learned.pre.len() - pre,
            minus_e_tol: ref_eff - eff_tol,
            plus_e_tol: my_eff - eff_tol,
            minus_e_strict: ref_eff - eff_strict,
            plus_e_strict: my_eff - eff_strict,
        },
        alignment: a,
        mapped: pre + eff_tol,
    }
}

/// Per-action and total differences between two domains; actions are
/// matched by name.
pub fn diff_domains(
    learned: &crate::model::Domain,
    reference: &crate::model::Domain,
) -> DiffReport {
    let mut actions = Vec::new();
    let mut unknown_actions = Vec::new();
    for l in &learned.actions {
        match reference.action(l.name.as_str()) {
            Some(r) => actions.push(diff_action(l, r, &reference.types)),
            None => unknown_actions.push(l.name.clone()),
        }
    }
    actions.sort_by(|a, b| a.name.cmp(&b.name));
    unknown_actions.sort();
    let mut unobserved_actions: Vec<Name> = reference
        .actions
        .iter()
        .filter(|r| learned.action(r.name.as_str()).is_none())
        .map(|r| r.name.clone())
        .collect();
    unobserved_actions.sort();
    let mut totals = Counts::default();
    let mut mapped = 0;
    for d in &actions {
        totals.add(&d.counts);
        mapped += d.mapped;
    }
    let fid = fidelity(
        mapped,
        totals.minus_p,
        totals.plus_p,
        totals.minus_e_tol,
        totals.plus_e_tol,
    );
    let mapped_strict = mapped - (totals.minus_e_strict - totals.minus_e_tol);
    let fid_strict = fidelity(
        mapped_strict,
        totals.minus_p,
        totals.plus_p,
        totals.minus_e_strict,
        totals.plus_e_strict,
    );
    DiffReport {
        actions,
        totals,
        mapped,
        fidelity: fid,
        fidelity_strict: fid_strict,
        unobserved_actions,
        unknown_actions,
    }
}

impl DiffReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Plain-text table with -P, +P, -E, +E and fidelity. Effect columns show
    /// tolerant/strict counts.
    pub fn table(&self) -> String {
        let width = self
            .actions
            .iter()
            .map(|a| a.name.as_str().len())
            .chain([6])
            .max()
            .unwrap_or(6);
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<width$}  {:>4}  {:>4}  {:>7}  {:>7}  {:>5}",
            "action", "-P", "+P", "-E", "+E", "fid."
        );
        let row = |s: &mut String, name: &str, c: &Counts, fid: Option<f64>| {
            let _ = write!(
                s,
                "{:<width$}  {:>4}  {:>4}  {:>7}  {:>7}",
                name,
                c.minus_p,
                c.plus_p,
                format!("{}/{}", c.minus_e_tol, c.minus_e_strict),
                format!("{}/{}", c.plus_e_tol, c.plus_e_strict),
            );
            if let Some(f) = fid {
                let _ = write!(s, "  {f:.3}");
            }
            s.push('\n');
        };
        for a in &self.actions {
            row(&mut s, a.name.as_str(), &a.counts, None);
        }
        row(&mut s, "total", &self.totals, Some(self.fidelity));
        if !self.unobserved_actions.is_empty() {
            let names: Vec<&str> = self.unobserved_actions.iter().map(Name::as_str).collect();
            let _ = writeln!(s, "unobserved: {}", names.join(" "));
        }
        if !self.unknown_actions.is_empty() {
            let names: Vec<&str> = self.unknown_actions.iter().map(Name::as_str).collect();
            let _ = writeln!(s, "not in reference: {}", names.join(" "));
        }
        s
    }
}
