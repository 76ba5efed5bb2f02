//! Parser and printer for the typed STRIPS fragment of PDDL.
//!
//! Domains (and actionless domain headers), problems and plan files are
//! supported. ADL constructs are rejected with [`PddlError::Unsupported`]
//! rather than silently dropped.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::gen::{Plan, PlanStep, ProblemInstance};
use crate::model::{
    ActionSchema, Domain, GroundFact, LiftedFact, ModelError, Name, PredicateSignature, State,
    Term, TypeHierarchy, ROOT_TYPE,
};
use crate::sexpr::{self, Pos, SExpr, SyntaxError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PddlError {
    #[error(transparent)]
    Parse(#[from] SyntaxError),
    #[error("{pos}: unsupported feature `{feature}`")]
    Unsupported { pos: Pos, feature: String },
    #[error("{pos}: {source}")]
    Model { pos: Pos, source: ModelError },
}

fn err(pos: Pos, msg: impl Into<String>) -> PddlError {
    PddlError::Parse(SyntaxError::new(pos, msg))
}

fn unsupported(pos: Pos, feature: impl Into<String>) -> PddlError {
    PddlError::Unsupported {
        pos,
        feature: feature.into(),
    }
}

const ALLOWED_REQUIREMENTS: &[&str] = &[":strips", ":typing"];

// heads that mark constructs outside the STRIPS fragment
const ADL_HEADS: &[&str] = &[
    "or",
    "imply",
    "exists",
    "forall",
    "when",
    "=",
    "increase",
    "decrease",
    "assign",
    "scale-up",
    "scale-down",
    "either",
    "preference",
];

/// One entry of a PDDL typed list: `name` or `name - type`.
struct Typed {
    name: Name,
    ty: Option<Name>,
    pos: Pos,
}

fn typed_list(items: &[SExpr]) -> Result<Vec<Typed>, PddlError> {
    let mut out = Vec::new();
    let mut pending: Vec<(Name, Pos)> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let item = &items[i];
        match item {
            SExpr::Atom(a, pos) if a == "-" => {
                let ty = items
                    .get(i + 1)
                    .ok_or_else(|| err(*pos, "missing type after `-`"))?;
                if ty.head() == Some("either") {
                    return Err(unsupported(ty.pos(), "either"));
                }
                let ty = Name::new(ty.expect_atom("type name")?);
                if pending.is_empty() {
                    return Err(err(*pos, "`-` without preceding names"));
                }
                for (name, pos) in pending.drain(..) {
                    out.push(Typed {
                        name,
                        ty: Some(ty.clone()),
                        pos,
                    });
                }
                i += 2;
            }
            SExpr::Atom(a, pos) => {
                pending.push((Name::new(a), *pos));
                i += 1;
            }
            SExpr::List(_, pos) => return Err(err(*pos, "expected a name in typed list")),
        }
    }
    out.extend(pending.into_iter().map(|(name, pos)| Typed {
        name,
        ty: None,
        pos,
    }));
    Ok(out)
}

fn define_parts<'a>(top: &'a SExpr, kind: &str) -> Result<(Name, &'a [SExpr]), PddlError> {
    let items = top.expect_list("(define ...)")?;
    if items.first().and_then(SExpr::atom) != Some("define") {
        return Err(err(top.pos(), "expected `(define ...)`"));
    }
    let header = items
        .get(1)
        .ok_or_else(|| err(top.pos(), format!("missing ({kind} NAME)")))?;
    let h = header.expect_list(kind)?;
    if h.len() != 2 || h[0].atom() != Some(kind) {
        return Err(err(header.pos(), format!("expected ({kind} NAME)")));
    }
    Ok((Name::new(h[1].expect_atom("name")?), &items[2..]))
}

fn check_type(types: &TypeHierarchy, ty: &Name, pos: Pos) -> Result<Name, PddlError> {
    types
        .get(ty.as_str())
        .map_err(|source| PddlError::Model { pos, source })
}

/// Parses a domain or domain header.
pub fn parse_domain(text: &str) -> Result<Domain, PddlError> {
    let top = sexpr::parse_one(text)?;
    let (name, sections) = define_parts(&top, "domain")?;

    let mut type_decls: Vec<(Name, Option<Name>)> = Vec::new();
    let mut constant_decls = Vec::new();
    let mut predicate_decls = Vec::new();
    let mut action_decls = Vec::new();
    for section in sections {
        let items = section.expect_list("domain section")?;
        let head = items
            .first()
            .and_then(SExpr::atom)
            .ok_or_else(|| err(section.pos(), "expected section keyword"))?;
        match head {
            ":requirements" => {
                for r in &items[1..] {
                    let r_name = r.expect_atom("requirement")?;
                    if !ALLOWED_REQUIREMENTS.contains(&r_name) {
                        return Err(unsupported(r.pos(), r_name));
                    }
                }
            }
            ":types" => {
                for t in typed_list(&items[1..])? {
                    type_decls.push((t.name, t.ty));
                }
            }
            ":constants" => constant_decls.extend(typed_list(&items[1..])?),
            ":predicates" => predicate_decls.extend(items[1..].iter()),
            ":action" => action_decls.push(section),
            ":functions" | ":derived" | ":durative-action" | ":constraints" => {
                return Err(unsupported(section.pos(), head))
            }
            other => return Err(err(section.pos(), format!("unknown section `{other}`"))),
        }
    }

    let types =
        TypeHierarchy::from_declarations(type_decls).map_err(|source| PddlError::Model {
            pos: top.pos(),
            source,
        })?;
    let mut domain = Domain::new(name.as_str(), types);
    for c in constant_decls {
        let ty = c.ty.unwrap_or_else(|| Name::new(ROOT_TYPE));
        let ty = check_type(&domain.types, &ty, c.pos)?;
        domain.constants.insert(c.name, ty);
    }
    for p in predicate_decls {
        let items = p.expect_list("predicate declaration")?;
        let pname = items
            .first()
            .ok_or_else(|| err(p.pos(), "empty predicate declaration"))?
            .expect_atom("predicate name")?;
        let mut arg_types = Vec::new();
        for a in typed_list(&items[1..])? {
            if !a.name.as_str().starts_with('?') {
                return Err(err(a.pos, "predicate arguments must be variables"));
            }
            let ty = a.ty.unwrap_or_else(|| Name::new(ROOT_TYPE));
            arg_types.push(check_type(&domain.types, &ty, a.pos)?);
        }
        domain.add_predicate(PredicateSignature {
            name: Name::new(pname),
            arg_types,
        });
    }
    for a in action_decls {
        let schema = parse_action(a, &domain)?;
        if domain.action(schema.name.as_str()).is_some() {
            return Err(err(a.pos(), format!("duplicate action `{}`", schema.name)));
        }
        domain.actions.push(schema);
    }
    Ok(domain)
}

fn parse_action(section: &SExpr, domain: &Domain) -> Result<ActionSchema, PddlError> {
    let items = section.expect_list("action")?;
    let name = items
        .get(1)
        .ok_or_else(|| err(section.pos(), "missing action name"))?
        .expect_atom("action name")?;
    let mut schema = ActionSchema::with_arity(name, 0);
    let mut precondition = None;
    let mut effect = None;
    let mut i = 2;
    while i < items.len() {
        let key = items[i].expect_atom("action keyword")?;
        let value = items
            .get(i + 1)
            .ok_or_else(|| err(items[i].pos(), format!("missing value for {key}")))?;
        match key {
            ":parameters" => {
                for p in typed_list(value.expect_list("parameter list")?)? {
                    let pname = p
                        .name
                        .as_str()
                        .strip_prefix('?')
                        .ok_or_else(|| err(p.pos, "parameters must start with `?`"))?;
                    if schema.params.iter().any(|q| q.as_str() == pname) {
                        return Err(err(p.pos, format!("duplicate parameter ?{pname}")));
                    }
                    let ty = p.ty.unwrap_or_else(|| Name::new(ROOT_TYPE));
                    schema.params.push(Name::new(pname));
                    schema
                        .param_types
                        .push(check_type(&domain.types, &ty, p.pos)?);
                }
            }
            ":precondition" => precondition = Some(value),
            ":effect" => effect = Some(value),
            other => {
                return Err(err(
                    items[i].pos(),
                    format!("unknown action keyword `{other}`"),
                ))
            }
        }
        i += 2;
    }
    if let Some(pre) = precondition {
        let mut out = Vec::new();
        flatten_and(pre, &mut out)?;
        for f in out {
            if f.head() == Some("not") {
                return Err(unsupported(f.pos(), "negative preconditions"));
            }
            schema.pre.insert(lifted_atom(f, &schema, domain)?);
        }
    }
    if let Some(eff) = effect {
        let mut out = Vec::new();
        flatten_and(eff, &mut out)?;
        for e in out {
            if e.head() == Some("not") {
                let inner = e.list().expect("list");
                if inner.len() != 2 {
                    return Err(err(e.pos(), "`not` takes one argument"));
                }
                if inner[1].head() == Some("not")
                    || inner[1].head().is_some_and(|h| ADL_HEADS.contains(&h))
                {
                    return Err(unsupported(inner[1].pos(), inner[1].head().unwrap_or("")));
                }
                schema.del.insert(lifted_atom(&inner[1], &schema, domain)?);
            } else {
                schema.add.insert(lifted_atom(e, &schema, domain)?);
            }
        }
    }
    Ok(schema)
}

/// Flattens nested `(and ...)`; rejects ADL connectives.
fn flatten_and<'a>(e: &'a SExpr, out: &mut Vec<&'a SExpr>) -> Result<(), PddlError> {
    let items = e.expect_list("condition")?;
    match items.first().and_then(SExpr::atom) {
        None if items.is_empty() => Ok(()),
        Some("and") => {
            for c in &items[1..] {
                flatten_and(c, out)?;
            }
            Ok(())
        }
        Some(h) if ADL_HEADS.contains(&h) => Err(unsupported(e.pos(), h)),
        _ => {
            out.push(e);
            Ok(())
        }
    }
}

fn atom_parts<'a>(
    e: &'a SExpr,
    domain: &'a Domain,
) -> Result<(&'a PredicateSignature, &'a [SExpr]), PddlError> {
    let items = e.expect_list("atom")?;
    let head = items
        .first()
        .ok_or_else(|| err(e.pos(), "empty atom"))?
        .expect_atom("predicate name")?;
    if ADL_HEADS.contains(&head) {
        return Err(unsupported(e.pos(), head));
    }
    let sig = domain
        .predicates
        .get(head)
        .ok_or_else(|| err(e.pos(), format!("unknown predicate `{head}`")))?;
    if sig.arity() != items.len() - 1 {
        return Err(err(
            e.pos(),
            format!(
                "`{head}` expects {} arguments, got {}",
                sig.arity(),
                items.len() - 1
            ),
        ));
    }
    Ok((sig, &items[1..]))
}

fn lifted_atom(e: &SExpr, schema: &ActionSchema, domain: &Domain) -> Result<LiftedFact, PddlError> {
    let (sig, args) = atom_parts(e, domain)?;
    let mut terms = Vec::with_capacity(args.len());
    for a in args {
        let s = a.expect_atom("argument")?;
        if let Some(v) = s.strip_prefix('?') {
            let idx = schema
                .params
                .iter()
                .position(|p| p.as_str() == v)
                .ok_or_else(|| err(a.pos(), format!("unknown parameter ?{v}")))?;
            terms.push(Term::Param(idx));
        } else if domain.constants.contains_key(s) {
            terms.push(Term::Const(Name::new(s)));
        } else {
            return Err(err(a.pos(), format!("unknown constant `{s}`")));
        }
    }
    Ok(LiftedFact {
        predicate: sig.name.clone(),
        args: terms,
    })
}

fn ground_atom(
    e: &SExpr,
    domain: &Domain,
    objects: &BTreeMap<Name, Name>,
) -> Result<GroundFact, PddlError> {
    let (sig, args) = atom_parts(e, domain)?;
    let mut out = Vec::with_capacity(args.len());
    for a in args {
        let s = a.expect_atom("object")?;
        if !objects.contains_key(s) {
            return Err(err(a.pos(), format!("unknown object `{s}`")));
        }
        out.push(Name::new(s));
    }
    Ok(GroundFact {
        predicate: sig.name.clone(),
        args: out,
    })
}

/// Renders a domain deterministically. `parse_domain(&emit_domain(d)) == d`.
pub fn emit_domain(domain: &Domain) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "(define (domain {})", domain.name);
    let _ = writeln!(s, "  (:requirements :strips :typing)");

    let mut by_parent: BTreeMap<&Name, Vec<&Name>> = BTreeMap::new();
    for (ty, parent) in domain.types.declarations() {
        by_parent.entry(parent).or_default().push(ty);
    }
    if !by_parent.is_empty() {
        let _ = writeln!(s, "  (:types");
        for (parent, children) in &by_parent {
            let names: Vec<&str> = children.iter().map(|c| c.as_str()).collect();
            let _ = writeln!(s, "    {} - {}", names.join(" "), parent);
        }
        let _ = writeln!(s, "  )");
    }

    if !domain.constants.is_empty() {
        let _ = writeln!(s, "  (:constants");
        for (c, ty) in &domain.constants {
            let _ = writeln!(s, "    {c} - {ty}");
        }
        let _ = writeln!(s, "  )");
    }

    let _ = writeln!(s, "  (:predicates");
    for sig in domain.predicates.values() {
        let _ = write!(s, "    ({}", sig.name);
        for (i, t) in sig.arg_types.iter().enumerate() {
            let _ = write!(s, " ?a{} - {}", i + 1, t);
        }
        let _ = writeln!(s, ")");
    }
    let _ = writeln!(s, "  )");

    for a in &domain.actions {
        emit_action(&mut s, a);
    }
    s.push_str(")\n");
    s
}

fn emit_action(s: &mut String, a: &ActionSchema) {
    let _ = writeln!(s, "  (:action {}", a.name);
    let params: Vec<String> = a
        .params
        .iter()
        .zip(&a.param_types)
        .map(|(p, t)| format!("?{p} - {t}"))
        .collect();
    let _ = writeln!(s, "    :parameters ({})", params.join(" "));
    if a.pre.is_empty() {
        let _ = writeln!(s, "    :precondition (and)");
    } else {
        let _ = writeln!(s, "    :precondition (and");
        for f in &a.pre {
            let _ = writeln!(s, "      {}", f.to_pddl(&a.params));
        }
        let _ = writeln!(s, "    )");
    }
    if a.add.is_empty() && a.del.is_empty() {
        let _ = writeln!(s, "    :effect (and)");
    } else {
        let _ = writeln!(s, "    :effect (and");
        for f in &a.add {
            let _ = writeln!(s, "      {}", f.to_pddl(&a.params));
        }
        for f in &a.del {
            let _ = writeln!(s, "      (not {})", f.to_pddl(&a.params));
        }
        let _ = writeln!(s, "    )");
    }
    let _ = writeln!(s, "  )");
}

/// Parses a problem against its domain. Domain constants are added to the
/// problem's objects.
pub fn parse_problem(text: &str, domain: &Domain) -> Result<ProblemInstance, PddlError> {
    let top = sexpr::parse_one(text)?;
    let (name, sections) = define_parts(&top, "problem")?;
    let mut objects: BTreeMap<Name, Name> = domain.constants.clone();
    let mut init_sec = None;
    let mut goal_sec = None;
    let mut domain_name = None;
    for section in sections {
        let items = section.expect_list("problem section")?;
        let head = items
            .first()
            .and_then(SExpr::atom)
            .ok_or_else(|| err(section.pos(), "expected section keyword"))?;
        match head {
            ":domain" => {
                let d = items
                    .get(1)
                    .ok_or_else(|| err(section.pos(), "missing domain name"))?
                    .expect_atom("domain name")?;
                domain_name = Some(Name::new(d));
            }
            ":requirements" => {}
            ":objects" => {
                for o in typed_list(&items[1..])? {
                    let ty = o.ty.unwrap_or_else(|| Name::new(ROOT_TYPE));
                    let ty = check_type(&domain.types, &ty, o.pos)?;
                    objects.insert(o.name, ty);
                }
            }
            ":init" => init_sec = Some(&items[1..]),
            ":goal" => goal_sec = items.get(1),
            ":metric" => return Err(unsupported(section.pos(), ":metric")),
            other => return Err(err(section.pos(), format!("unknown section `{other}`"))),
        }
    }
    if let Some(d) = &domain_name {
        if *d != domain.name {
            return Err(err(
                top.pos(),
                format!("problem is for domain `{d}`, not `{}`", domain.name),
            ));
        }
    }
    let mut init = State::new();
    for f in init_sec.unwrap_or(&[]) {
        init.insert(ground_atom(f, domain, &objects)?);
    }
    let mut goal = BTreeSet::new();
    if let Some(g) = goal_sec {
        let mut out = Vec::new();
        flatten_and(g, &mut out)?;
        for f in out {
            if f.head() == Some("not") {
                return Err(unsupported(f.pos(), "negative goals"));
            }
            goal.insert(ground_atom(f, domain, &objects)?);
        }
    }
    Ok(ProblemInstance {
        name,
        objects,
        init,
        goal,
    })
}

/// Parses a plan file: one `(action obj ...)` per line, `;` comments.
pub fn parse_plan(text: &str) -> Result<Plan, PddlError> {
    let mut steps = Vec::new();
    for e in sexpr::parse_all(text)? {
        let items = e.expect_list("plan step")?;
        let name = items
            .first()
            .ok_or_else(|| err(e.pos(), "empty plan step"))?
            .expect_atom("action name")?;
        let args = items[1..]
            .iter()
            .map(|a| a.expect_atom("object").map(Name::new))
            .collect::<Result<Vec<_>, _>>()?;
        steps.push(PlanStep {
            action: Name::new(name),
            args,
        });
    }
    Ok(Plan { steps })
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "(define (domain hdr)
      (:requirements :strips :typing)
      (:types room ball)
      (:predicates (at ?b - ball ?r - room)))";

    #[test]
    fn header_counts() {
        let d = parse_domain(HEADER).unwrap();
        assert_eq!(d.types.len(), 3);
        assert_eq!(d.predicates.len(), 1);
        assert!(d.actions.is_empty());
    }

    #[test]
    fn empty_schema_list_emits_header_only() {
        let d = parse_domain(HEADER).unwrap();
        let text = emit_domain(&d);
        assert!(!text.contains(":action"));
        assert!(text.contains("(:types"));
        assert_eq!(parse_domain(&text).unwrap(), d);
    }

    #[test]
    fn conditional_effect_is_unsupported() {
        let text = "(define (domain d) (:requirements :strips :typing)
          (:predicates (p ?x) (q ?x))
          (:action a :parameters (?x) :precondition (p ?x)
             :effect (when (p ?x) (q ?x))))";
        assert!(matches!(
            parse_domain(text),
            Err(PddlError::Unsupported { feature, .. }) if feature == "when"
        ));
    }

    #[test]
    fn adl_requirement_and_negative_precondition_rejected() {
        let adl = "(define (domain d) (:requirements :adl) (:predicates (p)))";
        assert!(matches!(
            parse_domain(adl),
            Err(PddlError::Unsupported { .. })
        ));
        let neg = "(define (domain d) (:predicates (p ?x))
          (:action a :parameters (?x) :precondition (not (p ?x)) :effect (p ?x)))";
        assert!(matches!(
            parse_domain(neg),
            Err(PddlError::Unsupported { .. })
        ));
    }

    #[test]
    fn delete_effects_print_as_not() {
        let text = "(define (domain d) (:predicates (p ?x))
          (:action a :parameters (?x) :precondition (p ?x) :effect (not (p ?x))))";
        let d = parse_domain(text).unwrap();
        assert_eq!(d.actions[0].del.len(), 1);
        assert!(emit_domain(&d).contains("(not (p ?x))"));
    }

    #[test]
    fn parse_errors_have_positions() {
        let bad = "(define (domain d)\n  (:predicates (p ?x))\n  (:action a :parameters (?x) :effect (r ?x)))";
        match parse_domain(bad) {
            Err(PddlError::Parse(e)) => assert_eq!(e.pos.line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn constants_are_terms() {
        let text =
            "(define (domain d) (:types t) (:constants k - t) (:predicates (p ?x - t ?y - t))
          (:action a :parameters (?x - t) :precondition (and) :effect (p ?x k)))";
        let d = parse_domain(text).unwrap();
        let f = d.actions[0].add.iter().next().unwrap();
        assert_eq!(f.args[1], Term::Const(Name::new("k")));
        assert_eq!(parse_domain(&emit_domain(&d)).unwrap(), d);
    }

    #[test]
    fn plan_lines_and_comments() {
        let plan = parse_plan("; plan\n(move a b)\n(PICK x)\n").unwrap();
        assert_eq!(plan.steps.len(), 2);
        assert_eq!(plan.steps[1].action, Name::new("pick"));
    }
}
