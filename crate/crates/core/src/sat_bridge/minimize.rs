use tracelift_sat::{Lit, Var};

use super::context::{Model, SatError, SolveContext, SolveResult};

/// Finds a model whose set of true `candidates` is subset-minimal.
///
/// Candidates true in the current model are visited in ascending variable
/// order; each is tentatively assumed false and the negative assumption is
/// kept whenever the formula stays satisfiable. Passes repeat until none
/// succeeds. Returns `Ok(None)` if the base assumptions are unsatisfiable.
pub fn minimize_true(
    ctx: &mut SolveContext,
    candidates: &[Var],
    base_assumptions: &[Lit],
) -> Result<Option<Model>, SatError> {
    let mut assumptions = base_assumptions.to_vec();
    let mut model = match ctx.solve(&assumptions)? {
        SolveResult::Sat(m) => m,
        SolveResult::Unsat => return Ok(None),
    };
    let mut order = candidates.to_vec();
    order.sort();
    order.dedup();
    loop {
        let mut changed = false;
        for &v in &order {
            if !model.value(v) || assumptions.contains(&v.negative()) {
                continue;
            }
            assumptions.push(v.negative());
            match ctx.solve(&assumptions)? {
                SolveResult::Sat(m) => {
                    model = m;
                    changed = true;
                }
                SolveResult::Unsat => {
                    assumptions.pop();
                }
            }
        }
        if !changed {
            return Ok(Some(model));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{VarKey, VarRegistry};
    use super::*;
    use proptest::prelude::*;

    fn setup(n: usize) -> (SolveContext, Vec<Var>) {
        let mut ctx = SolveContext::new();
        let mut reg = VarRegistry::new();
        let vs = (0..n).map(|_| reg.fresh(&mut ctx, VarKey::Aux)).collect();
        (ctx, vs)
    }

    fn trues(m: &Model, vs: &[Var]) -> Vec<usize> {
        vs.iter()
            .enumerate()
            .filter(|(_, v)| m.value(**v))
            .map(|(i, _)| i)
            .collect()
    }

    #[test]
    fn single_disjunction_keeps_one() {
        let (mut ctx, vs) = setup(2);
        ctx.add_clause(&[vs[0].positive(), vs[1].positive()])
            .unwrap();
        let m = minimize_true(&mut ctx, &vs, &[]).unwrap().unwrap();
        assert_eq!(trues(&m, &vs).len(), 1);
    }

    #[test]
    fn forced_literal_stays() {
        let (mut ctx, vs) = setup(1);
        ctx.add_clause(&[vs[0].positive()]).unwrap();
        let m = minimize_true(&mut ctx, &vs, &[]).unwrap().unwrap();
        assert!(m.value(vs[0]));
    }

    #[test]
    fn shared_literal_covers_both_clauses() {
        let (mut ctx, vs) = setup(3);
        let (a, b, c) = (vs[0], vs[1], vs[2]);
        ctx.add_clause(&[a.positive(), b.positive()]).unwrap();
        ctx.add_clause(&[a.positive(), c.positive()]).unwrap();
        let m = minimize_true(&mut ctx, &vs, &[]).unwrap().unwrap();
        assert_eq!(trues(&m, &vs), vec![0]);
    }

    #[test]
    fn unsat_base_gives_none() {
        let (mut ctx, vs) = setup(1);
        ctx.add_clause(&[vs[0].positive()]).unwrap();
        assert_eq!(
            minimize_true(&mut ctx, &vs, &[vs[0].negative()]).unwrap(),
            None
        );
    }

    proptest! {
        #[test]
        fn result_is_subset_minimal(
            clauses in prop::collection::vec(prop::collection::vec((0usize..6, any::<bool>()), 1..4), 1..12)
        ) {
            let (mut ctx, vs) = setup(6);
            for c in &clauses {
                let lits: Vec<Lit> = c.iter().map(|&(v, p)| vs[v].lit(p)).collect();
                ctx.add_clause(&lits).unwrap();
            }
            if let Some(m) = minimize_true(&mut ctx, &vs, &[]).unwrap() {
                let t = trues(&m, &vs);
                // brute force: no model whose true set is a strict subset of t
                for mask in 0u32..64 {
                    let set: Vec<usize> = (0..6).filter(|i| mask >> i & 1 == 1).collect();
                    let strict_subset = set.len() < t.len() && set.iter().all(|i| t.contains(i));
                    if !strict_subset { continue; }
                    let sat = clauses.iter().all(|c| c.iter().any(|&(v, p)| (mask >> v & 1 == 1) == p));
                    prop_assert!(!sat, "model {:?} not minimal, {:?} also satisfies", t, set);
                }
            }
        }
    }
}
