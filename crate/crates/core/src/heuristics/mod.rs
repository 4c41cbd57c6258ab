//! Ordering heuristics and the four portfolio strategies.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::recomposer::{necessary_components, Group, RecompositionMap};
use crate::spec_lang::{count_occurrences, symbolic_actions, SpecAst};

/// Layers of components by distance from the first one, with the edges
/// between consecutive layers and their reflexive-transitive closure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataFlowOrder {
    pub e_sets: Vec<BTreeSet<usize>>,
    pub f_edges: BTreeSet<(usize, usize)>,
    /// All pairs `(i, j)` with `i ≼ j`.
    pub order: BTreeSet<(usize, usize)>,
}

impl DataFlowOrder {
    pub fn le(&self, i: usize, j: usize) -> bool {
        self.order.contains(&(i, j))
    }

    /// Components on which the order is defined.
    pub fn support(&self) -> BTreeSet<usize> {
        self.order.iter().flat_map(|&(i, j)| [i, j]).collect()
    }
}

pub fn data_flow_order(components: &[SpecAst]) -> DataFlowOrder {
    let alphabets: Vec<BTreeSet<String>> = components.iter().map(symbolic_actions).collect();
    let x = necessary_components(components).x_sets;
    let mut e_sets = vec![x[0].clone()];
    for w in x.windows(2) {
        let e: BTreeSet<usize> = w[1].difference(&w[0]).copied().collect();
        if e.is_empty() {
            break;
        }
        e_sets.push(e);
    }
    let mut f_edges = BTreeSet::new();
    for w in e_sets.windows(2) {
        for &j in &w[0] {
            for &k in &w[1] {
                if !alphabets[j].is_disjoint(&alphabets[k]) {
                    f_edges.insert((j, k));
                }
            }
        }
    }
    let nodes: BTreeSet<usize> = e_sets.iter().flatten().copied().collect();
    let mut order: BTreeSet<(usize, usize)> = nodes.iter().map(|&i| (i, i)).collect();
    order.extend(f_edges.iter().copied());
    loop {
        let extra: Vec<(usize, usize)> = order
            .iter()
            .flat_map(|&(a, b)| order.range((b, 0)..=(b, usize::MAX)).map(move |&(_, c)| (a, c)))
            .filter(|p| !order.contains(p))
            .collect();
        if extra.is_empty() {
            break;
        }
        order.extend(extra);
    }
    DataFlowOrder {
        e_sets,
        f_edges,
        order,
    }
}

/// Total occurrences in `s` of each component's variables.
fn weights(components: &[SpecAst], s: &SpecAst) -> Vec<usize> {
    components
        .iter()
        .map(|c| {
            c.variables
                .iter()
                .map(|v| count_occurrences(s, v).unwrap_or(0))
                .sum()
        })
        .collect()
}

/// A linear extension of the data-flow order. Among available components
/// the one with fewer occurrences in `s` goes first, then the lower index.
/// Components outside the order follow, sorted the same way.
pub fn total_order(components: &[SpecAst], s: &SpecAst) -> Vec<usize> {
    let dfo = data_flow_order(components);
    let w = weights(components, s);
    let key = |i: usize| (w[i], i);
    let support = dfo.support();
    let mut indegree: BTreeMap<usize, usize> = support.iter().map(|&i| (i, 0)).collect();
    for &(_, k) in &dfo.f_edges {
        *indegree.get_mut(&k).expect("edge inside support") += 1;
    }
    let mut ready: BTreeSet<(usize, usize)> = indegree.iter().filter(|(_, &d)| d == 0).map(|(&i, _)| key(i)).collect();
    let mut out = Vec::with_capacity(components.len());
    while let Some((_, i)) = ready.pop_first() {
        out.push(i);
        for &(_, k) in dfo.f_edges.range((i, 0)..=(i, usize::MAX)) {
            let d = indegree.get_mut(&k).expect("edge inside support");
            *d -= 1;
            if *d == 0 {
                ready.insert(key(k));
            }
        }
    }
    let mut rest: Vec<usize> = (0..components.len()).filter(|i| !support.contains(i)).collect();
    rest.sort_by_key(|&i| key(i));
    out.extend(rest);
    out
}

/// Portfolio strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StrategyKind {
    /// One group per component.
    S1,
    /// The first component alone, everything else in one group.
    S2,
    /// The last component alone, everything else with the property.
    S3,
    /// Everything in the property group.
    S4,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 4] = [StrategyKind::S1, StrategyKind::S2, StrategyKind::S3, StrategyKind::S4];
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StrategyKind::S1 => "S1",
            StrategyKind::S2 => "S2",
            StrategyKind::S3 => "S3",
            StrategyKind::S4 => "S4",
        })
    }
}

impl FromStr for StrategyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "S1" => Ok(StrategyKind::S1),
            "S2" => Ok(StrategyKind::S2),
            "S3" => Ok(StrategyKind::S3),
            "S4" => Ok(StrategyKind::S4),
            _ => Err(format!("unknown strategy '{s}'")),
        }
    }
}

/// A strategy: a built-in kind or a fixed map over the decomposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Strategy {
    Kind(StrategyKind),
    Custom { name: String, map: RecompositionMap },
}

impl Strategy {
    pub fn is_monolithic(&self) -> bool {
        matches!(self, Strategy::Kind(StrategyKind::S4))
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Kind(k) => k.fmt(f),
            Strategy::Custom { name, .. } => write!(f, "map:{name}"),
        }
    }
}

impl From<StrategyKind> for Strategy {
    fn from(k: StrategyKind) -> Self {
        Strategy::Kind(k)
    }
}

/// The map of `kind` for components listed in total order (`order[0]` is the
/// property component). With a single component every kind is monolithic.
pub fn make_strategy(kind: StrategyKind, order: &[usize]) -> RecompositionMap {
    let n = order.len();
    assert!(n >= 1 && order[0] == 0, "order must start with the first component");
    let group = |pos: usize| -> Group {
        if n == 1 || pos == 0 {
            return Group::P;
        }
        match kind {
            StrategyKind::S1 => Group::D(pos),
            StrategyKind::S2 => Group::D(1),
            StrategyKind::S3 if pos == n - 1 => Group::D(1),
            StrategyKind::S3 | StrategyKind::S4 => Group::P,
        }
    };
    let assignment = order.iter().enumerate().map(|(pos, &c)| (c, group(pos))).collect();
    RecompositionMap::new(assignment).expect("strategy maps are valid")
}
