use std::collections::BTreeMap;

use super::schema::ActionSchema;
use super::types::TypeHierarchy;
use super::Name;

/// Predicate name and argument types.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PredicateSignature {
    pub name: Name,
    pub arg_types: Vec<Name>,
}

impl PredicateSignature {
    pub fn new(name: &str, arg_types: &[&str]) -> Self {
        PredicateSignature {
            name: Name::new(name),
            arg_types: arg_types.iter().map(|t| Name::new(t)).collect(),
        }
    }

    pub fn arity(&self) -> usize {
        self.arg_types.len()
    }
}

/// A typed STRIPS domain. With no actions this is a domain header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Domain {
    pub name: Name,
    pub types: TypeHierarchy,
    pub constants: BTreeMap<Name, Name>,
    pub predicates: BTreeMap<Name, PredicateSignature>,
    pub actions: Vec<ActionSchema>,
}

impl Domain {
    pub fn new(name: &str, types: TypeHierarchy) -> Self {
        Domain {
            name: Name::new(name),
            types,
            constants: BTreeMap::new(),
            predicates: BTreeMap::new(),
            actions: Vec::new(),
        }
    }

    pub fn add_predicate(&mut self, sig: PredicateSignature) {
        self.predicates.insert(sig.name.clone(), sig);
    }

    pub fn action(&self, name: &str) -> Option<&ActionSchema> {
        self.actions.iter().find(|a| a.name.as_str() == name)
    }

    /// The same domain without actions.
    pub fn header(&self) -> Domain {
        Domain {
            actions: Vec::new(),
            ..self.clone()
        }
    }
}
