//! Incremental CDCL SAT solver.
//!
//! A compact MiniSat-style engine: two watched literals, first-UIP learning
//! with local clause minimization, activity-based branching with phase
//! saving, Luby restarts and learnt clause reduction. Solving under unit
//! assumptions is supported and leaves the solver reusable.

mod heap;
mod lit;
mod solver;

pub use lit::{Lit, Var};
pub use solver::{SolveStatus, Solver, Stats};
