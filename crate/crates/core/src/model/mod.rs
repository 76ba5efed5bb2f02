//! Planning vocabulary: names, types, facts, states, schemas and domains,
//! together with STRIPS execution semantics.

mod domain;
mod fact;
mod schema;
mod types;

use std::borrow::Borrow;
use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};
use thiserror::Error;

pub use domain::{Domain, PredicateSignature};
pub use fact::{GroundFact, LiftedFact, State, Term};
pub use schema::{applicable, apply, ActionSchema, Substitution};
pub use types::{TypeHierarchy, ROOT_TYPE};

/// An interned, lowercased identifier (type, predicate, object or action name).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Name(Arc<str>);

impl Name {
    pub fn new(s: &str) -> Self {
        if s.bytes().any(|b| b.is_ascii_uppercase()) {
            Name(Arc::from(s.to_ascii_lowercase().as_str()))
        } else {
            Name(Arc::from(s))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Self {
        Name::new(s)
    }
}

impl From<String> for Name {
    fn from(s: String) -> Self {
        Name::new(&s)
    }
}

impl Borrow<str> for Name {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl AsRef<str> for Name {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl Serialize for Name {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("unknown type `{0}`")]
    UnknownType(Name),
    #[error("type `{ty}` declared with two parents `{first}` and `{second}`")]
    MultipleParents { ty: Name, first: Name, second: Name },
    #[error("type hierarchy has a cycle through `{0}`")]
    TypeCycle(Name),
    #[error("action `{0}` is not applicable")]
    NotApplicable(Name),
    #[error("substitution has {got} objects but `{action}` has {expected} parameters")]
    SubstitutionArity {
        action: Name,
        expected: usize,
        got: usize,
    },
    #[error("invalid action schema `{action}`: {reason}")]
    InvalidSchema { action: Name, reason: String },
}
