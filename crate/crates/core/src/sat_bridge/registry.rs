use std::collections::{BTreeMap, HashMap};
use std::fmt;

use tracelift_sat::Var;

use super::context::SolveContext;
use crate::model::{LiftedFact, Name};

/// A lifted effect candidate: predicate applied to a parameter vector.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EffectKey {
    pub predicate: Name,
    pub params: Vec<usize>,
}

impl EffectKey {
    pub fn to_fact(&self) -> LiftedFact {
        LiftedFact::over_params(self.predicate.as_str(), &self.params)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EffectKind {
    Add,
    Del,
}

/// What a solver variable stands for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VarKey {
    Bind {
        transition: usize,
        param: usize,
        object: Name,
    },
    /// Binding variable of a verification scope; never looked up by key.
    ScratchBind {
        transition: usize,
        param: usize,
        object: Name,
    },
    Effect(EffectKind, EffectKey),
    Activation,
    Aux,
}

impl fmt::Display for VarKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params = |ps: &[usize]| {
            ps.iter()
                .map(|p| format!("x{}", p + 1))
                .collect::<Vec<_>>()
                .join(" ")
        };
        match self {
            VarKey::Bind {
                transition,
                param,
                object,
            } => write!(f, "bind R{transition} x{} {object}", param + 1),
            VarKey::ScratchBind {
                transition,
                param,
                object,
            } => write!(f, "scratch-bind R{transition} x{} {object}", param + 1),
            VarKey::Effect(kind, k) => {
                let kind = match kind {
                    EffectKind::Add => "add",
                    EffectKind::Del => "del",
                };
                write!(f, "{kind} {} {}", k.predicate, params(&k.params))
            }
            VarKey::Activation => f.write_str("activation"),
            VarKey::Aux => f.write_str("aux"),
        }
    }
}

/// Bidirectional map between solver variables and their meaning. Effect
/// variables are shared by all transitions of a label; bind variables are
/// per transition.
#[derive(Debug, Default, Clone)]
pub struct VarRegistry {
    bind: HashMap<(usize, usize, Name), Var>,
    effects: BTreeMap<(EffectKind, EffectKey), Var>,
    keys: Vec<VarKey>,
}

impl VarRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// New variable with the given meaning. Keyed kinds are indexed for lookup.
    pub fn fresh(&mut self, ctx: &mut SolveContext, key: VarKey) -> Var {
        let v = ctx.new_var();
        debug_assert_eq!(
            v.index(),
            self.keys.len(),
            "context shared with another registry"
        );
        match &key {
            VarKey::Bind {
                transition,
                param,
                object,
            } => {
                self.bind.insert((*transition, *param, object.clone()), v);
            }
            VarKey::Effect(kind, k) => {
                self.effects.insert((*kind, k.clone()), v);
            }
            _ => {}
        }
        self.keys.push(key);
        v
    }

    pub fn bind(&self, transition: usize, param: usize, object: &Name) -> Option<Var> {
        self.bind.get(&(transition, param, object.clone())).copied()
    }

    pub fn effect(&self, kind: EffectKind, key: &EffectKey) -> Option<Var> {
        self.effects.get(&(kind, key.clone())).copied()
    }

    /// Existing effect variable, or a new one.
    pub fn effect_or_create(
        &mut self,
        ctx: &mut SolveContext,
        kind: EffectKind,
        key: &EffectKey,
    ) -> Var {
        match self.effect(kind, key) {
            Some(v) => v,
            None => self.fresh(ctx, VarKey::Effect(kind, key.clone())),
        }
    }

    /// All effect variables in ascending variable order.
    pub fn effect_vars(&self) -> Vec<(Var, EffectKind, &EffectKey)> {
        let mut out: Vec<_> = self
            .effects
            .iter()
            .map(|((kind, key), &v)| (v, *kind, key))
            .collect();
        out.sort_by_key(|(v, _, _)| *v);
        out
    }

    pub fn key(&self, v: Var) -> &VarKey {
        &self.keys[v.index()]
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookups_round_trip() {
        let mut ctx = SolveContext::new();
        let mut reg = VarRegistry::new();
        let a = Name::new("a");
        let b = reg.fresh(
            &mut ctx,
            VarKey::Bind {
                transition: 3,
                param: 1,
                object: a.clone(),
            },
        );
        let key = EffectKey {
            predicate: Name::new("p"),
            params: vec![0, 1],
        };
        let d = reg.effect_or_create(&mut ctx, EffectKind::Del, &key);
        let ad = reg.effect_or_create(&mut ctx, EffectKind::Add, &key);
        assert_ne!(d, ad);
        assert_eq!(reg.effect_or_create(&mut ctx, EffectKind::Del, &key), d);
        assert_eq!(reg.bind(3, 1, &a), Some(b));
        assert_eq!(reg.bind(3, 0, &a), None);
        for v in [b, d, ad] {
            let back = match reg.key(v) {
                VarKey::Bind {
                    transition,
                    param,
                    object,
                } => reg.bind(*transition, *param, object),
                VarKey::Effect(kind, k) => reg.effect(*kind, k),
                _ => None,
            };
            assert_eq!(back, Some(v));
        }
        let order: Vec<Var> = reg.effect_vars().iter().map(|e| e.0).collect();
        assert_eq!(order, vec![d, ad]);
        assert_eq!(reg.key(ad).to_string(), "add p x1 x2");
    }
}
