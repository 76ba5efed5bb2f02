//! Bridge between the synthesis encoding and the SAT engine: a solving
//! context with an optional clause log, the bind/add/del variable registry,
//! and assumption-based minimal model extraction.

mod context;
mod minimize;
mod registry;

pub use context::{Model, SatError, SolveContext, SolveResult};
pub use minimize::minimize_true;
pub use registry::{EffectKey, EffectKind, VarKey, VarRegistry};
pub use tracelift_sat::{Lit, Var};
