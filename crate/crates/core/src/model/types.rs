use std::collections::BTreeMap;

use super::{ModelError, Name};

/// Name of the implicit root type.
pub const ROOT_TYPE: &str = "object";

/// Tree-shaped PDDL type hierarchy rooted at `object`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeHierarchy {
    // every declared type except the root maps to its parent
    parent: BTreeMap<Name, Name>,
    root: Name,
}

impl Default for TypeHierarchy {
    fn default() -> Self {
        Self::new()
    }
}

impl TypeHierarchy {
    /// A hierarchy containing only the root type.
    pub fn new() -> Self {
        TypeHierarchy {
            parent: BTreeMap::new(),
            root: Name::new(ROOT_TYPE),
        }
    }

    /// Builds a hierarchy from `(type, parent)` declarations. A missing parent
    /// means the root; parents that are never declared themselves are placed
    /// directly under the root.
    pub fn from_declarations<I>(decls: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = (Name, Option<Name>)>,
    {
        let mut h = TypeHierarchy::new();
        let mut explicit: BTreeMap<Name, Name> = BTreeMap::new();
        for (ty, parent) in decls {
            if ty == h.root {
                continue;
            }
            let parent = parent.unwrap_or_else(|| h.root.clone());
            match explicit.get(&ty) {
                Some(existing) if *existing != parent => {
                    // an untyped mention followed by a typed one is fine
                    if *existing == h.root {
                        explicit.insert(ty, parent);
                    } else if parent != h.root {
                        return Err(ModelError::MultipleParents {
                            ty,
                            first: existing.clone(),
                            second: parent,
                        });
                    }
                }
                Some(_) => {}
                None => {
                    explicit.insert(ty, parent);
                }
            }
        }
        let mut implicit = Vec::new();
        for parent in explicit.values() {
            if *parent != h.root && !explicit.contains_key(parent) {
                implicit.push(parent.clone());
            }
        }
        for p in implicit {
            explicit.insert(p, h.root.clone());
        }
        h.parent = explicit;
        for ty in h.parent.keys() {
            // walk at most |types| steps; longer means a cycle
            let mut cur = ty.clone();
            let mut steps = 0;
            while let Some(p) = h.parent.get(&cur) {
                cur = p.clone();
                steps += 1;
                if steps > h.parent.len() {
                    return Err(ModelError::TypeCycle(ty.clone()));
                }
            }
        }
        Ok(h)
    }

    pub fn root(&self) -> &Name {
        &self.root
    }

    pub fn contains(&self, ty: &str) -> bool {
        ty == self.root.as_str() || self.parent.contains_key(ty)
    }

    /// Number of types, including the root.
    pub fn len(&self) -> usize {
        self.parent.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// All types in name order, root included.
    pub fn types(&self) -> impl Iterator<Item = &Name> {
        std::iter::once(&self.root).chain(self.parent.keys())
    }

    pub fn parent(&self, ty: &str) -> Option<&Name> {
        self.parent.get(ty)
    }

    /// Declared `(type, parent)` pairs, root excluded.
    pub fn declarations(&self) -> impl Iterator<Item = (&Name, &Name)> {
        self.parent.iter()
    }

    /// Canonical handle for a declared type.
    pub fn get(&self, ty: &str) -> Result<Name, ModelError> {
        if ty == self.root.as_str() {
            return Ok(self.root.clone());
        }
        self.parent
            .get_key_value(ty)
            .map(|(k, _)| k.clone())
            .ok_or_else(|| ModelError::UnknownType(Name::new(ty)))
    }

    /// `ty` followed by its ancestors up to and including the root.
    pub fn ancestors(&self, ty: &str) -> Result<Vec<Name>, ModelError> {
        let mut out = vec![self.get(ty)?];
        while let Some(p) = self.parent.get(out.last().expect("nonempty").as_str()) {
            out.push(p.clone());
        }
        Ok(out)
    }

    pub fn depth(&self, ty: &str) -> Result<usize, ModelError> {
        Ok(self.ancestors(ty)?.len() - 1)
    }

    /// Reflexive-transitive subtype test: `sub ≤ sup`.
    pub fn is_subtype(&self, sub: &str, sup: &str) -> Result<bool, ModelError> {
        self.get(sup)?;
        Ok(self.ancestors(sub)?.iter().any(|t| t.as_str() == sup))
    }

    /// `true` if either type is a subtype of the other.
    pub fn comparable(&self, a: &str, b: &str) -> Result<bool, ModelError> {
        Ok(self.is_subtype(a, b)? || self.is_subtype(b, a)?)
    }

    /// Deepest type that every member of `types` is a subtype of.
    pub fn least_common_ancestor<'a, I>(&self, types: I) -> Result<Name, ModelError>
    where
        I: IntoIterator<Item = &'a Name>,
    {
        let mut chain: Option<Vec<Name>> = None;
        for t in types {
            let anc = self.ancestors(t.as_str())?;
            chain = Some(match chain {
                None => anc,
                Some(prev) => {
                    // keep the common suffix; both chains end at the root
                    let common = prev
                        .iter()
                        .rev()
                        .zip(anc.iter().rev())
                        .take_while(|(a, b)| a == b)
                        .count();
                    prev[prev.len() - common..].to_vec()
                }
            });
        }
        Ok(chain
            .and_then(|c| c.into_iter().next())
            .unwrap_or_else(|| self.root.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(s: &str) -> Name {
        Name::new(s)
    }

    fn vehicles() -> TypeHierarchy {
        TypeHierarchy::from_declarations(vec![
            (n("trucktype"), Some(n("vehicletype"))),
            (n("planetype"), Some(n("vehicletype"))),
            (n("vehicletype"), None),
            (n("blocktype"), None),
        ])
        .unwrap()
    }

    #[test]
    fn subtype_examples() {
        let h = vehicles();
        assert!(h.is_subtype("blocktype", "object").unwrap());
        assert!(h.is_subtype("blocktype", "blocktype").unwrap());
        assert!(h.is_subtype("trucktype", "vehicletype").unwrap());
        assert!(!h.is_subtype("vehicletype", "trucktype").unwrap());
        assert_eq!(
            h.is_subtype("nope", "object"),
            Err(ModelError::UnknownType(n("nope")))
        );
        assert!(h.is_subtype("object", "nope").is_err());
    }

    #[test]
    fn barman_ingredient_is_beverage() {
        let h = TypeHierarchy::from_declarations(vec![
            (n("ingredient"), Some(n("beverage"))),
            (n("cocktail"), Some(n("beverage"))),
        ])
        .unwrap();
        assert!(h.is_subtype("ingredient", "beverage").unwrap());
        assert_eq!(h.parent("beverage"), Some(&n("object")));
    }

    #[test]
    fn lca_examples() {
        let h = vehicles();
        assert_eq!(
            h.least_common_ancestor(&[n("blocktype")]).unwrap(),
            n("blocktype")
        );
        assert_eq!(
            h.least_common_ancestor(&[n("trucktype"), n("object")])
                .unwrap(),
            n("object")
        );
        assert_eq!(
            h.least_common_ancestor(&[n("trucktype"), n("planetype")])
                .unwrap(),
            n("vehicletype")
        );
        assert!(h.least_common_ancestor(&[n("ghost")]).is_err());
    }

    #[test]
    fn header_counting() {
        let h = TypeHierarchy::from_declarations(vec![(n("a"), None), (n("b"), None)]).unwrap();
        assert_eq!(h.len(), 3);
    }

    #[test]
    fn rejects_two_parents_and_cycles() {
        let two =
            TypeHierarchy::from_declarations(vec![(n("a"), Some(n("b"))), (n("a"), Some(n("c")))]);
        assert!(matches!(two, Err(ModelError::MultipleParents { .. })));
        let cyc =
            TypeHierarchy::from_declarations(vec![(n("a"), Some(n("b"))), (n("b"), Some(n("a")))]);
        assert!(matches!(cyc, Err(ModelError::TypeCycle(_))));
    }

    #[test]
    fn subtype_is_a_partial_order() {
        let h = vehicles();
        let ts: Vec<Name> = h.types().cloned().collect();
        for a in &ts {
            assert!(h.is_subtype(a.as_str(), a.as_str()).unwrap());
            for b in &ts {
                let ab = h.is_subtype(a.as_str(), b.as_str()).unwrap();
                let ba = h.is_subtype(b.as_str(), a.as_str()).unwrap();
                if ab && ba {
                    assert_eq!(a, b);
                }
                for c in &ts {
                    if ab && h.is_subtype(b.as_str(), c.as_str()).unwrap() {
                        assert!(h.is_subtype(a.as_str(), c.as_str()).unwrap());
                    }
                }
            }
        }
    }
}
