//! Specification language: syntax tree, parser, printer and the syntactic
//! queries used by decomposition and ordering.

mod ast;
mod lexer;
mod parser;
mod printer;

use std::collections::{BTreeMap, BTreeSet, HashSet};

use thiserror::Error;

pub use ast::{
    classify, ActionDef, BinOp, ConjunctKind, Expr, Param, PathElem, PropertyDef, Quantifier, SpecAst,
};
pub use parser::{parse, parse_closed_expr, parse_expr_in};
pub use printer::{print_expr, print_spec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("undeclared identifier '{name}' at {line}:{col}")]
    Undeclared { name: String, line: usize, col: usize },
    #[error("duplicate declaration: {0}")]
    Duplicate(String),
    #[error("action {action}: {msg}")]
    ConjShape { action: String, msg: String },
    #[error("invalid Init: {0}")]
    Init(String),
    #[error("unknown variable '{0}'")]
    UnknownVariable(String),
    #[error("{0}")]
    Invalid(String),
}

/// Checks the structural invariants that every well-formed spec satisfies.
/// Run by [`parse`]; also useful for programmatically built specs.
pub fn validate(spec: &SpecAst) -> Result<(), SpecError> {
    let vars: HashSet<&str> = spec.variables.iter().map(String::as_str).collect();

    let mut bound = HashSet::new();
    for (c, value) in &spec.config {
        if !spec.constants.contains(c) {
            return Err(SpecError::Invalid(format!("CONFIG binds undeclared constant '{c}'")));
        }
        if !bound.insert(c) {
            return Err(SpecError::Duplicate(format!("constant '{c}' bound twice")));
        }
        if !value.is_closed() {
            return Err(SpecError::Invalid(format!("value of constant '{c}' must be closed")));
        }
    }

    if !spec.variables.is_empty() && spec.init.is_empty() {
        return Err(SpecError::Init("Init must have at least one conjunct".into()));
    }
    let mut initialised = HashSet::new();
    for c in &spec.init {
        match init_target(c) {
            Some(v) if vars.contains(v) => {
                initialised.insert(v);
            }
            _ => {
                return Err(SpecError::Init(format!(
                    "conjunct '{c}' is not of the form v = e or v \\in e with e constant"
                )))
            }
        }
    }
    for v in &spec.variables {
        if !initialised.contains(v.as_str()) {
            return Err(SpecError::Init(format!("variable '{v}' has no Init conjunct")));
        }
    }

    let mut names = HashSet::new();
    for a in &spec.actions {
        if !names.insert(&a.name) {
            return Err(SpecError::Duplicate(format!("action '{}' defined twice", a.name)));
        }
        validate_action(a, &spec.variables)?;
    }

    let mut names = HashSet::new();
    for p in &spec.properties {
        if !names.insert(&p.name) {
            return Err(SpecError::Duplicate(format!("property '{}' defined twice", p.name)));
        }
        if !p.body.primed_vars().is_empty() {
            return Err(SpecError::Invalid(format!("property '{}' mentions primed variables", p.name)));
        }
        check_quant_domains(&p.body).map_err(|m| SpecError::Invalid(format!("property '{}': {m}", p.name)))?;
    }
    Ok(())
}

/// The variable fixed by an Init conjunct, if it has the solvable shape.
pub(crate) fn init_target(c: &Expr) -> Option<&str> {
    match c {
        Expr::Binary(BinOp::Eq | BinOp::In, lhs, rhs) => match lhs.as_ref() {
            Expr::Var(v) if rhs.is_closed() => Some(v),
            _ => None,
        },
        _ => None,
    }
}

fn validate_action(a: &ActionDef, variables: &[String]) -> Result<(), SpecError> {
    let shape = |msg: String| SpecError::ConjShape {
        action: a.name.clone(),
        msg,
    };
    if a.conjuncts.is_empty() {
        return Err(shape("body must have at least one conjunct".into()));
    }
    if let Some(p) = &a.param {
        if !p.domain.is_closed() {
            return Err(shape(format!("parameter domain of '{}' must be constant", p.name)));
        }
    }
    let mut constrained: BTreeMap<&str, &'static str> = BTreeMap::new();
    for c in &a.conjuncts {
        check_quant_domains(c).map_err(shape)?;
        match classify(c) {
            None => return Err(shape(format!("conjunct '{c}' is neither a guard, an update nor a frame"))),
            Some(ConjunctKind::Guard) => {}
            Some(ConjunctKind::Update(v)) => {
                let v = variables
                    .iter()
                    .find(|x| **x == v)
                    .ok_or_else(|| shape(format!("update of undeclared variable '{v}'")))?;
                if constrained.get(v.as_str()) == Some(&"frame") {
                    return Err(shape(format!("variable '{v}' is both updated and unchanged")));
                }
                constrained.insert(v, "update");
            }
            Some(ConjunctKind::Frame(vs)) => {
                for v in &vs {
                    let v = variables
                        .iter()
                        .find(|x| *x == v)
                        .ok_or_else(|| shape(format!("frame mentions undeclared variable '{v}'")))?;
                    if constrained.get(v.as_str()) == Some(&"update") {
                        return Err(shape(format!("variable '{v}' is both updated and unchanged")));
                    }
                    constrained.insert(v, "frame");
                }
            }
        }
    }
    for v in variables {
        if !constrained.contains_key(v.as_str()) {
            return Err(shape(format!("variable '{v}' is neither updated nor unchanged")));
        }
    }
    Ok(())
}

fn check_quant_domains(e: &Expr) -> Result<(), String> {
    let mut bad = None;
    e.walk(&mut |x| {
        let domain = match x {
            Expr::Quant { domain, .. } | Expr::FuncLit { domain, .. } => domain,
            _ => return,
        };
        if bad.is_none() && !domain.primed_vars().is_empty() {
            bad = Some(format!("quantifier domain '{domain}' mentions primed variables"));
        }
    });
    bad.map_or(Ok(()), Err)
}

/// State variables of an expression (primed and unprimed both count).
pub fn free_vars(e: &Expr) -> BTreeSet<String> {
    e.free_vars()
}

/// State variables of a spec: every declared variable.
pub fn spec_vars(s: &SpecAst) -> BTreeSet<String> {
    s.variables.iter().cloned().collect()
}

/// Action names of a spec.
pub fn symbolic_actions(s: &SpecAst) -> BTreeSet<String> {
    s.actions.iter().map(|a| a.name.clone()).collect()
}

pub fn conjuncts(a: &ActionDef) -> &[Expr] {
    a.conjuncts()
}

/// Syntactic occurrences of `v` in Init, every action body, and the variable
/// tuple itself (which contributes one).
pub fn count_occurrences(s: &SpecAst, v: &str) -> Result<usize, SpecError> {
    if !s.variables.iter().any(|x| x == v) {
        return Err(SpecError::UnknownVariable(v.to_string()));
    }
    let init: usize = s.init.iter().map(|c| c.count_var(v)).sum();
    let actions: usize = s
        .actions
        .iter()
        .flat_map(|a| a.conjuncts.iter())
        .map(|c| c.count_var(v))
        .sum();
    Ok(1 + init + actions)
}

/// Canonical form: declarations sorted, Init conjuncts sorted and
/// deduplicated, actions sorted by name with their conjuncts ordered guards,
/// updates, then a single merged frame.
pub fn normalize(s: &SpecAst) -> SpecAst {
    let mut out = s.clone();
    out.constants.sort();
    out.config.sort_by(|a, b| a.0.cmp(&b.0));
    out.variables.sort();
    out.init = sorted_unique(&s.init);
    out.actions = s.actions.iter().map(normalize_action).collect();
    out.actions.sort_by(|a, b| a.name.cmp(&b.name));
    out.properties.sort_by(|a, b| a.name.cmp(&b.name));
    out
}

fn sorted_unique(es: &[Expr]) -> Vec<Expr> {
    let mut keyed: Vec<(String, &Expr)> = es.iter().map(|e| (print_expr(e), e)).collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    keyed.dedup_by(|a, b| a.0 == b.0);
    keyed.into_iter().map(|(_, e)| e.clone()).collect()
}

fn normalize_action(a: &ActionDef) -> ActionDef {
    let mut guards = Vec::new();
    let mut updates = Vec::new();
    let mut frame = BTreeSet::new();
    for c in &a.conjuncts {
        match classify(c) {
            Some(ConjunctKind::Frame(vs)) => frame.extend(vs),
            Some(ConjunctKind::Update(_)) => updates.push(c.clone()),
            _ => guards.push(c.clone()),
        }
    }
    let mut conjuncts = sorted_unique(&guards);
    conjuncts.extend(sorted_unique(&updates));
    if !frame.is_empty() {
        conjuncts.push(Expr::Unchanged(frame.into_iter().collect()));
    }
    ActionDef {
        name: a.name.clone(),
        param: a.param.clone(),
        conjuncts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "MODULE Small
VARIABLES x, y

INIT
  /\\ x = 0
  /\\ y = 0

ACTION Inc
  /\\ x < 3
  /\\ x' = x + 1
  /\\ UNCHANGED <<y>>
";

    #[test]
    fn counts_include_the_variable_tuple() {
        let s = parse(SMALL).unwrap();
        assert_eq!(count_occurrences(&s, "y").unwrap(), 3);
        assert_eq!(count_occurrences(&s, "x").unwrap(), 5);
        assert!(count_occurrences(&s, "z").is_err());
    }

    #[test]
    fn normalize_is_idempotent_and_order_insensitive() {
        let s = parse(SMALL).unwrap();
        let mut t = s.clone();
        t.actions[0].conjuncts.reverse();
        t.init.reverse();
        t.variables.reverse();
        assert_eq!(normalize(&s), normalize(&t));
        assert_eq!(normalize(&normalize(&s)), normalize(&s));
    }

    #[test]
    fn rejects_unframed_variable() {
        let src = SMALL.replace("  /\\ UNCHANGED <<y>>\n", "");
        assert!(matches!(parse(&src), Err(SpecError::ConjShape { .. })));
    }

    #[test]
    fn rejects_empty_init() {
        let src = "MODULE M\nVARIABLES x\n\nACTION A\n  /\\ x' = 1\n";
        assert!(matches!(parse(src), Err(SpecError::Init(_))));
    }

    #[test]
    fn rejects_undeclared_identifier() {
        let src = SMALL.replace("x < 3", "z < 3");
        assert!(matches!(parse(&src), Err(SpecError::Undeclared { ref name, .. }) if name == "z"));
    }
}
