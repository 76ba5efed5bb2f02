use std::collections::BTreeSet;
use std::fmt;

use super::schema::Substitution;
use super::Name;

/// A predicate applied to objects.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroundFact {
    pub predicate: Name,
    pub args: Vec<Name>,
}

impl GroundFact {
    pub fn new<I, S>(predicate: &str, args: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        GroundFact {
            predicate: Name::new(predicate),
            args: args.into_iter().map(|a| Name::new(a.as_ref())).collect(),
        }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }
}

impl fmt::Display for GroundFact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Debug for GroundFact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Argument of a lifted fact: a schema parameter (by position) or a constant.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Param(usize),
    Const(Name),
}

/// A predicate applied to schema parameters; repetition is allowed.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LiftedFact {
    pub predicate: Name,
    pub args: Vec<Term>,
}

impl LiftedFact {
    /// Fact over parameters only.
    pub fn over_params(predicate: &str, params: &[usize]) -> Self {
        LiftedFact {
            predicate: Name::new(predicate),
            args: params.iter().map(|&i| Term::Param(i)).collect(),
        }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    /// Parameter indices in argument order, `None` if a constant occurs.
    pub fn param_indices(&self) -> Option<Vec<usize>> {
        self.args
            .iter()
            .map(|t| match t {
                Term::Param(i) => Some(*i),
                Term::Const(_) => None,
            })
            .collect()
    }

    pub fn params(&self) -> impl Iterator<Item = usize> + '_ {
        self.args.iter().filter_map(|t| match t {
            Term::Param(i) => Some(*i),
            Term::Const(_) => None,
        })
    }

    pub fn ground(&self, sub: &Substitution) -> GroundFact {
        GroundFact {
            predicate: self.predicate.clone(),
            args: self
                .args
                .iter()
                .map(|t| match t {
                    Term::Param(i) => sub.get(*i).clone(),
                    Term::Const(c) => c.clone(),
                })
                .collect(),
        }
    }

    /// PDDL rendering with `?`-prefixed parameter names.
    pub fn to_pddl(&self, params: &[Name]) -> String {
        let mut s = format!("({}", self.predicate);
        for t in &self.args {
            match t {
                Term::Param(i) => {
                    s.push_str(" ?");
                    s.push_str(params[*i].as_str());
                }
                Term::Const(c) => {
                    s.push(' ');
                    s.push_str(c.as_str());
                }
            }
        }
        s.push(')');
        s
    }
}

/// A set of ground facts.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct State(BTreeSet<GroundFact>);

impl State {
    pub fn new() -> Self {
        State(BTreeSet::new())
    }

    pub fn contains(&self, f: &GroundFact) -> bool {
        self.0.contains(f)
    }

    pub fn insert(&mut self, f: GroundFact) -> bool {
        self.0.insert(f)
    }

    pub fn remove(&mut self, f: &GroundFact) -> bool {
        self.0.remove(f)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &GroundFact> {
        self.0.iter()
    }

    pub fn facts(&self) -> &BTreeSet<GroundFact> {
        &self.0
    }

    /// Facts in `self` but not in `other`.
    pub fn minus<'a>(&'a self, other: &'a State) -> impl Iterator<Item = &'a GroundFact> {
        self.0.difference(&other.0)
    }
}

impl FromIterator<GroundFact> for State {
    fn from_iter<I: IntoIterator<Item = GroundFact>>(iter: I) -> Self {
        State(iter.into_iter().collect())
    }
}

impl IntoIterator for State {
    type Item = GroundFact;
    type IntoIter = std::collections::btree_set::IntoIter<GroundFact>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}

impl<'a> IntoIterator for &'a State {
    type Item = &'a GroundFact;
    type IntoIter = std::collections::btree_set::Iter<'a, GroundFact>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.iter()).finish()
    }
}
