use std::fmt::Write as _;
use std::time::Instant;

use thiserror::Error;
use tracelift_sat::{Lit, SolveStatus, Solver, Var};

use super::registry::VarRegistry;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SatError {
    #[error("literal {0} refers to an unregistered variable")]
    UnregisteredVar(i64),
    #[error("empty clause")]
    EmptyClause,
    #[error("time limit reached while solving")]
    TimeLimit,
}

/// Full assignment returned by a satisfiable solve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model(Vec<bool>);

impl Model {
    pub fn value(&self, v: Var) -> bool {
        self.0.get(v.index()).copied().unwrap_or(false)
    }

    pub fn satisfies(&self, l: Lit) -> bool {
        self.value(l.var()) == l.is_positive()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveResult {
    Sat(Model),
    Unsat,
}

impl SolveResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolveResult::Sat(_))
    }
}

/// Incremental clause store for one synthesis attempt.
#[derive(Debug)]
pub struct SolveContext {
    solver: Solver,
    log: Option<Vec<Vec<Lit>>>,
}

impl Default for SolveContext {
    fn default() -> Self {
        Self::new()
    }
}

impl SolveContext {
    pub fn new() -> Self {
        SolveContext {
            solver: Solver::new(),
            log: None,
        }
    }

    /// Context that keeps every added clause for [`SolveContext::to_dimacs`].
    pub fn with_clause_log() -> Self {
        SolveContext {
            solver: Solver::new(),
            log: Some(Vec::new()),
        }
    }

    pub fn set_deadline(&mut self, deadline: Option<Instant>) {
        self.solver.set_deadline(deadline);
    }

    /// Allocates a variable. Use the registry so that every variable has a key.
    pub(crate) fn new_var(&mut self) -> Var {
        self.solver.new_var()
    }

    pub fn num_vars(&self) -> usize {
        self.solver.num_vars()
    }

    pub fn stats(&self) -> tracelift_sat::Stats {
        self.solver.stats()
    }

    fn check(&self, l: Lit) -> Result<(), SatError> {
        if l.var().index() >= self.solver.num_vars() {
            return Err(SatError::UnregisteredVar(l.to_dimacs()));
        }
        Ok(())
    }

    pub fn add_clause(&mut self, lits: &[Lit]) -> Result<(), SatError> {
        if lits.is_empty() {
            return Err(SatError::EmptyClause);
        }
        for &l in lits {
            self.check(l)?;
        }
        if let Some(log) = &mut self.log {
            log.push(lits.to_vec());
        }
        self.solver.add_clause(lits);
        Ok(())
    }

    /// Exactly one of `vars` is true: one at-least-one clause plus pairwise
    /// at-most-one clauses.
    pub fn add_exactly_one(&mut self, vars: &[Var]) -> Result<(), SatError> {
        let alo: Vec<Lit> = vars.iter().map(|v| v.positive()).collect();
        self.add_clause(&alo)?;
        for (i, a) in vars.iter().enumerate() {
            for b in &vars[i + 1..] {
                self.add_clause(&[a.negative(), b.negative()])?;
            }
        }
        Ok(())
    }

    pub fn solve(&mut self, assumptions: &[Lit]) -> Result<SolveResult, SatError> {
        for &l in assumptions {
            self.check(l)?;
        }
        match self.solver.solve(assumptions) {
            SolveStatus::Sat => Ok(SolveResult::Sat(Model(self.solver.model().to_vec()))),
            SolveStatus::Unsat => Ok(SolveResult::Unsat),
            SolveStatus::Interrupted => Err(SatError::TimeLimit),
        }
    }

    /// DIMACS CNF of the logged clauses with one comment line per variable.
    /// Returns `None` if the context was created without a clause log.
    pub fn to_dimacs(&self, registry: &VarRegistry) -> Option<String> {
        let log = self.log.as_ref()?;
        let mut s = String::new();
        for v in 0..self.num_vars() {
            let var = Var::from_index(v);
            let _ = writeln!(s, "c {} {}", var.to_dimacs(), registry.key(var));
        }
        let _ = writeln!(s, "p cnf {} {}", self.num_vars(), log.len());
        for c in log {
            for l in c {
                let _ = write!(s, "{} ", l.to_dimacs());
            }
            s.push_str("0\n");
        }
        Some(s)
    }
}
