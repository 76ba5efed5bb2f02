//! Learning typed STRIPS action schemas from state traces that carry only
//! action names.

pub mod bundled;
pub mod complete;
pub mod eval;
pub mod gen;
pub mod gi;
pub mod learn;
pub mod model;
pub mod pddl;
pub mod sat_bridge;
pub mod sexpr;
pub mod synth;
pub mod trace;
