//! Syntactic parallel composition of specs, recomposition maps, and static
//! reduction of a map to the components that can influence the first one.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::spec_lang::{symbolic_actions, ActionDef, Expr, SpecAst};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecomposeError {
    #[error("variable '{0}' is declared by both specs")]
    OverlappingVariable(String),
    #[error("action {action} has incompatible parameter domains")]
    IncompatibleDomains { action: String },
    #[error("constant '{0}' is bound to different values")]
    ConflictingConstant(String),
    #[error("property '{0}' is defined differently by both specs")]
    ConflictingProperty(String),
    #[error("invalid recomposition map: {0}")]
    InvalidMap(String),
}

fn is_unit(s: &SpecAst) -> bool {
    s.variables.is_empty() && s.actions.is_empty() && s.init.is_empty()
}

fn with_frame(a: &ActionDef, frame: &[String]) -> ActionDef {
    let mut out = a.clone();
    if !frame.is_empty() {
        out.conjuncts.push(Expr::Unchanged(frame.to_vec()));
    }
    out
}

/// Parallel composition of two specs over disjoint variables. Shared actions
/// conjoin both bodies; an action of one side only leaves the other side's
/// variables unchanged.
pub fn compose_specs(s: &SpecAst, t: &SpecAst) -> Result<SpecAst, RecomposeError> {
    if let Some(v) = s.variables.iter().find(|v| t.variables.contains(v)) {
        return Err(RecomposeError::OverlappingVariable(v.clone()));
    }
    let mut constants = s.constants.clone();
    constants.extend(t.constants.iter().filter(|c| !s.constants.contains(c)).cloned());
    let mut config = s.config.clone();
    for (c, e) in &t.config {
        match s.constant_binding(c) {
            Some(prev) if prev != e => return Err(RecomposeError::ConflictingConstant(c.clone())),
            Some(_) => {}
            None => config.push((c.clone(), e.clone())),
        }
    }
    let mut variables = s.variables.clone();
    variables.extend(t.variables.iter().cloned());
    let mut init = s.init.clone();
    init.extend(t.init.iter().cloned());

    let mut actions = Vec::new();
    for a in &s.actions {
        match t.action(&a.name) {
            Some(b) => {
                let body_b = match (&a.param, &b.param) {
                    (None, None) => b.conjuncts.clone(),
                    (Some(pa), Some(pb)) if pa.domain == pb.domain => {
                        b.conjuncts.iter().map(|c| c.rename_bound(&pb.name, &pa.name)).collect()
                    }
                    _ => {
                        return Err(RecomposeError::IncompatibleDomains {
                            action: a.name.clone(),
                        })
                    }
                };
                let mut joined = a.clone();
                joined.conjuncts.extend(body_b);
                actions.push(joined);
            }
            None => actions.push(with_frame(a, &t.variables)),
        }
    }
    for b in &t.actions {
        if s.action(&b.name).is_none() {
            actions.push(with_frame(b, &s.variables));
        }
    }

    let mut properties = s.properties.clone();
    for p in &t.properties {
        match s.property(&p.name) {
            Some(q) if q != p => return Err(RecomposeError::ConflictingProperty(p.name.clone())),
            Some(_) => {}
            None => properties.push(p.clone()),
        }
    }
    let name = match (is_unit(s), is_unit(t)) {
        (true, _) => t.name.clone(),
        (_, true) => s.name.clone(),
        _ => format!("{}_{}", s.name, t.name),
    };
    Ok(SpecAst {
        name,
        constants,
        config,
        variables,
        init,
        actions,
        properties,
    })
}

/// Left fold of [`compose_specs`]; the unit spec for an empty input.
pub fn compose_all<'a>(specs: impl IntoIterator<Item = &'a SpecAst>) -> Result<SpecAst, RecomposeError> {
    let mut it = specs.into_iter();
    let Some(first) = it.next() else {
        return Ok(SpecAst::unit());
    };
    it.try_fold(first.clone(), |acc, s| compose_specs(&acc, s))
}

/// Target of a component under a recomposition map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Group {
    /// The group that carries the property.
    P,
    /// Group `d_j`, numbered from 1.
    D(usize),
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Group::P => f.write_str("P"),
            Group::D(j) => write!(f, "{j}"),
        }
    }
}

/// Assignment of components (by 0-based index) to groups. Component 0 maps
/// to [`Group::P`] and every group `1..=m` is used.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RecompositionMap {
    assignment: BTreeMap<usize, Group>,
    m: usize,
}

impl RecompositionMap {
    pub fn new(assignment: BTreeMap<usize, Group>) -> Result<Self, RecomposeError> {
        let bad = |m: String| Err(RecomposeError::InvalidMap(m));
        if assignment.get(&0) != Some(&Group::P) {
            return bad("the first component must map to P".into());
        }
        let used: BTreeSet<usize> = assignment
            .values()
            .filter_map(|g| match g {
                Group::D(j) => Some(*j),
                Group::P => None,
            })
            .collect();
        if used.contains(&0) {
            return bad("group ids start at 1".into());
        }
        let m = used.iter().copied().max().unwrap_or(0);
        if used.len() != m {
            let missing = (1..=m).find(|j| !used.contains(j)).expect("gap");
            return bad(format!("group {missing} has no component"));
        }
        Ok(Self { assignment, m })
    }

    /// Builds a map over components `0..groups.len()`.
    pub fn from_groups(groups: &[Group]) -> Result<Self, RecomposeError> {
        Self::new(groups.iter().copied().enumerate().collect())
    }

    /// Every component mapped to `P`.
    pub fn monolithic(n: usize) -> Self {
        Self::from_groups(&vec![Group::P; n]).expect("valid")
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn get(&self, component: usize) -> Option<Group> {
        self.assignment.get(&component).copied()
    }

    /// Components in the domain, ascending.
    pub fn domain(&self) -> impl Iterator<Item = usize> + '_ {
        self.assignment.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Group)> + '_ {
        self.assignment.iter().map(|(&i, &g)| (i, g))
    }

    /// Components of group `g`, ascending.
    pub fn preimage(&self, g: Group) -> Vec<usize> {
        self.iter().filter(|&(_, x)| x == g).map(|(i, _)| i).collect()
    }

    /// Parses lines `component-name = group`, where the group is `P` or a
    /// positive integer. Blank lines and `#` comments are ignored. Every
    /// component must be assigned exactly once.
    pub fn parse(text: &str, names: &[String]) -> Result<Self, RecomposeError> {
        let err = |line: usize, m: String| RecomposeError::InvalidMap(format!("line {line}: {m}"));
        let mut assignment = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (name, group) = line
                .split_once('=')
                .ok_or_else(|| err(i + 1, "expected 'component = group'".into()))?;
            let (name, group) = (name.trim(), group.trim());
            let idx = names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| err(i + 1, format!("unknown component '{name}'")))?;
            let g = if group == "P" {
                Group::P
            } else {
                match group.parse::<usize>() {
                    Ok(j) if j > 0 => Group::D(j),
                    _ => return Err(err(i + 1, format!("bad group '{group}'"))),
                }
            };
            if assignment.insert(idx, g).is_some() {
                return Err(err(i + 1, format!("component '{name}' assigned twice")));
            }
        }
        if let Some(missing) = (0..names.len()).find(|i| !assignment.contains_key(i)) {
            return Err(RecomposeError::InvalidMap(format!(
                "component '{}' is not assigned",
                names[missing]
            )));
        }
        Self::new(assignment)
    }

    /// Inverse of [`RecompositionMap::parse`].
    pub fn render(&self, names: &[String]) -> String {
        self.iter().map(|(i, g)| format!("{} = {g}\n", names[i])).collect()
    }
}

/// The growing sets of components that can influence the first one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionTrace {
    /// `x_sets[0] = {0}`; the last two entries are equal.
    pub x_sets: Vec<BTreeSet<usize>>,
    pub kept: BTreeSet<usize>,
}

/// Iterates `X_{i+1} = X_i ∪ {j | actions(C_j) ∩ actions(X_i) ≠ ∅}` from
/// `X_0 = {0}` until it stabilises.
pub fn necessary_components(components: &[SpecAst]) -> ReductionTrace {
    let alphabets: Vec<BTreeSet<String>> = components.iter().map(symbolic_actions).collect();
    x_sets_of(&alphabets)
}

/// [`necessary_components`] over bare action-name sets.
pub fn x_sets_of(alphabets: &[BTreeSet<String>]) -> ReductionTrace {
    let mut x_sets = vec![BTreeSet::from([0usize])];
    loop {
        let cur = x_sets.last().expect("non-empty");
        let reach: BTreeSet<&String> = cur.iter().flat_map(|&i| alphabets[i].iter()).collect();
        let mut next = cur.clone();
        next.extend((0..alphabets.len()).filter(|&j| alphabets[j].iter().any(|a| reach.contains(a))));
        let done = next == *cur;
        x_sets.push(next);
        if done {
            break;
        }
    }
    let kept = x_sets.last().expect("non-empty").clone();
    ReductionTrace { x_sets, kept }
}

/// Restricts `f` to the necessary components and renumbers the remaining
/// groups densely, preserving their relative order.
pub fn static_reduce(f: &RecompositionMap, components: &[SpecAst]) -> (RecompositionMap, ReductionTrace) {
    let trace = necessary_components(components);
    (restrict(f, &trace.kept), trace)
}

/// `f` restricted to `keep`, with groups renumbered densely.
pub fn restrict(f: &RecompositionMap, keep: &BTreeSet<usize>) -> RecompositionMap {
    let kept: BTreeMap<usize, Group> = f.iter().filter(|(i, _)| keep.contains(i)).collect();
    let groups: BTreeSet<usize> = kept
        .values()
        .filter_map(|g| match g {
            Group::D(j) => Some(*j),
            Group::P => None,
        })
        .collect();
    let renumber: BTreeMap<usize, usize> = groups.iter().enumerate().map(|(k, &j)| (j, k + 1)).collect();
    let assignment = kept
        .into_iter()
        .map(|(i, g)| {
            (
                i,
                match g {
                    Group::P => Group::P,
                    Group::D(j) => Group::D(renumber[&j]),
                },
            )
        })
        .collect();
    RecompositionMap::new(assignment).expect("restriction keeps component 0")
}

/// Composes each group's components in index order: `D_P`, then `D_1..D_m`.
pub fn build_groups(f: &RecompositionMap, components: &[SpecAst]) -> Result<(SpecAst, Vec<SpecAst>), RecomposeError> {
    let group = |g: Group| compose_all(f.preimage(g).into_iter().map(|i| &components[i]));
    let d_p = group(Group::P)?;
    let rest = (1..=f.m()).map(|j| group(Group::D(j))).collect::<Result<_, _>>()?;
    Ok((d_p, rest))
}
