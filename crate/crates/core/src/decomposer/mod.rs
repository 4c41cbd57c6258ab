//! Splitting a specification into components over disjoint variable sets.
//!
//! Variables are grouped by the conjuncts they share (frames excluded), and
//! the spec is sliced once per group.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::spec_lang::{
    classify, count_occurrences, validate, ActionDef, ConjunctKind, Expr, PropertyDef, SpecAst, SpecError,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecomposeError {
    #[error("slice over {{{vars}}} is not a well-formed spec: {source}")]
    IllFormedSlice { vars: String, source: SpecError },
    #[error("property {property} mentions '{var}', which is not a variable of the spec")]
    PropertyScope { property: String, var: String },
    #[error("unknown variable '{0}'")]
    UnknownVariable(String),
}

/// A split of a spec's variables into the component side and the rest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub v_c: BTreeSet<String>,
    pub v_t: BTreeSet<String>,
}

fn is_frame(c: &Expr) -> bool {
    matches!(classify(c), Some(ConjunctKind::Frame(_)))
}

/// Variables of every non-frame conjunct that touches `v`.
pub fn occurs(s: &SpecAst, v: &BTreeSet<String>) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for c in s.actions.iter().flat_map(|a| a.conjuncts.iter()) {
        if is_frame(c) {
            continue;
        }
        let fv = c.free_vars();
        if !fv.is_disjoint(v) {
            out.extend(fv);
        }
    }
    out
}

/// Least fixpoint of `x ↦ x ∪ op(x)` above `x`.
pub fn fixpoint<T: Ord + Clone>(op: impl Fn(&BTreeSet<T>) -> BTreeSet<T>, x: BTreeSet<T>) -> BTreeSet<T> {
    let mut cur = x;
    loop {
        let mut next = cur.clone();
        next.extend(op(&cur));
        if next == cur {
            return cur;
        }
        cur = next;
    }
}

pub fn partition(s: &SpecAst, v: &BTreeSet<String>) -> Partition {
    let v_c = fixpoint(|x| occurs(s, x), v.clone());
    let v_t = s.variables.iter().filter(|x| !v_c.contains(*x)).cloned().collect();
    Partition { v_c, v_t }
}

fn slice_action(a: &ActionDef, v: &BTreeSet<String>, vars: &[String]) -> Option<ActionDef> {
    // The parameter plays the role of an outer existential: it survives
    // exactly when some conjunct does.
    let mut conjuncts: Vec<Expr> = a
        .conjuncts
        .iter()
        .filter(|c| !is_frame(c) && c.free_vars().is_subset(v))
        .cloned()
        .collect();
    if conjuncts.is_empty() {
        return None;
    }
    let updated: BTreeSet<String> = conjuncts
        .iter()
        .filter_map(|c| match classify(c) {
            Some(ConjunctKind::Update(x)) => Some(x),
            _ => None,
        })
        .collect();
    let frame: Vec<String> = vars.iter().filter(|x| !updated.contains(*x)).cloned().collect();
    if !frame.is_empty() {
        conjuncts.push(Expr::Unchanged(frame));
    }
    Some(ActionDef {
        name: a.name.clone(),
        param: a.param.clone(),
        conjuncts,
    })
}

/// Name given to a slice: its variables joined by `_`.
pub fn component_name(vars: &[String]) -> String {
    if vars.is_empty() {
        "Empty".to_string()
    } else {
        vars.join("_")
    }
}

/// The spec restricted to the variables in `v`. Conjuncts mentioning other
/// variables are dropped, actions left with nothing are removed, and the
/// survivors get a frame over the variables they no longer update.
/// Properties are kept when all their variables are in `v`.
pub fn slice(s: &SpecAst, v: &BTreeSet<String>) -> Result<SpecAst, DecomposeError> {
    for x in v {
        if !s.variables.contains(x) {
            return Err(DecomposeError::UnknownVariable(x.clone()));
        }
    }
    let variables: Vec<String> = s.variables.iter().filter(|x| v.contains(*x)).cloned().collect();
    let init = s.init.iter().filter(|c| c.free_vars().is_subset(v)).cloned().collect();
    let actions = s.actions.iter().filter_map(|a| slice_action(a, v, &variables)).collect();
    let properties = s.properties.iter().filter(|p| p.free_vars().is_subset(v)).cloned().collect();
    let out = SpecAst {
        name: component_name(&variables),
        constants: s.constants.clone(),
        config: s.config.clone(),
        variables,
        init,
        actions,
        properties,
    };
    validate(&out).map_err(|source| DecomposeError::IllFormedSlice {
        vars: v.iter().cloned().collect::<Vec<_>>().join(", "),
        source,
    })?;
    Ok(out)
}

/// The variable of `t` with the fewest occurrences, ties broken by name.
fn pick_variable(t: &SpecAst) -> Option<String> {
    t.variables
        .iter()
        .map(|v| (count_occurrences(t, v).expect("declared variable"), v))
        .min_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(b.1)))
        .map(|(_, v)| v.clone())
}

/// Decomposes `s` into components with pairwise disjoint variables. The
/// first component holds every variable of `p`.
pub fn decompose(s: &SpecAst, p: &PropertyDef) -> Result<Vec<SpecAst>, DecomposeError> {
    let seed = p.free_vars();
    for v in &seed {
        if !s.variables.contains(v) {
            return Err(DecomposeError::PropertyScope {
                property: p.name.clone(),
                var: v.clone(),
            });
        }
    }
    // A property without variables constrains no component; start from
    // the same choice as later iterations.
    let seed = if seed.is_empty() {
        pick_variable(s).into_iter().collect()
    } else {
        seed
    };
    let mut part = partition(s, &seed);
    if part.v_t.is_empty() {
        return Ok(vec![s.clone()]);
    }
    let mut components = Vec::new();
    let mut t = s.clone();
    while !part.v_t.is_empty() {
        components.push(slice(&t, &part.v_c)?);
        t = slice(&t, &part.v_t)?;
        let v = pick_variable(&t).expect("non-empty remainder");
        part = partition(&t, &BTreeSet::from([v]));
    }
    components.push(t);
    Ok(components)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn set(xs: &[&str]) -> BTreeSet<String> {
        xs.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn fixpoint_examples() {
        assert_eq!(fixpoint(|x: &BTreeSet<u8>| x.clone(), BTreeSet::from([1])), BTreeSet::from([1]));
        let chain = |x: &BTreeSet<u8>| x.iter().filter(|&&i| i < 3).map(|i| i + 1).collect();
        assert_eq!(fixpoint(chain, BTreeSet::from([1])), BTreeSet::from([1, 2, 3]));
    }

    #[test]
    fn twophase_partitions() {
        let tp = corpus::twophase(3);
        assert_eq!(occurs(&tp, &BTreeSet::new()), BTreeSet::new());
        let p = partition(&tp, &set(&["rmState"]));
        assert_eq!(p.v_c, set(&["rmState"]));
        assert_eq!(p.v_t, set(&["msgs", "tmState", "tmPrepared"]));
    }

    #[test]
    fn full_slice_is_identity() {
        let tp = corpus::twophase(3);
        let all: BTreeSet<String> = tp.variables.iter().cloned().collect();
        let s = slice(&tp, &all).unwrap();
        assert!(crate::spec_lang::normalize(&s).same_structure(&crate::spec_lang::normalize(&tp)));
    }
}
