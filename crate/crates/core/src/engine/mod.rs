//! Compositional verification: build the error LTS of the property group,
//! then compose the remaining groups one at a time until the error state
//! becomes unreachable. Also the parallel strategy portfolio.

mod portfolio;
mod report;

use std::collections::BTreeSet;
use std::fmt;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::decomposer::{decompose, DecomposeError};
use crate::enumerator::{err_lts, to_lts, EnumError, Limits};
use crate::heuristics::{make_strategy, total_order, Strategy};
use crate::lts::{compose, hide, minimize, ComposeError, ConcreteAction, Lts, MinimizeMode};
use crate::recomposer::{build_groups, static_reduce, Group, RecomposeError, RecompositionMap};
use crate::spec_lang::{symbolic_actions, PropertyDef, SpecAst};

pub use portfolio::{run_portfolio, PortfolioOutcome};
pub use report::{render_structured, render_text, Report, ReportError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Decompose(#[from] DecomposeError),
    #[error(transparent)]
    Recompose(#[from] RecomposeError),
    #[error(transparent)]
    Enumerate(EnumError),
    #[error(transparent)]
    Compose(#[from] ComposeError),
    #[error("map covers {got} components but the decomposition has {want}")]
    MapSize { got: usize, want: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InconclusiveReason {
    BoundExceeded,
    Timeout,
    Cancelled,
}

impl fmt::Display for InconclusiveReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InconclusiveReason::BoundExceeded => "bound-exceeded",
            InconclusiveReason::Timeout => "timeout",
            InconclusiveReason::Cancelled => "cancelled",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    /// Concrete actions leading from an initial state to a violation.
    Violated(Vec<ConcreteAction>),
    Inconclusive(BTreeSet<InconclusiveReason>),
}

impl Verdict {
    pub fn is_conclusive(&self) -> bool {
        !matches!(self, Verdict::Inconclusive(_))
    }

    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }
}

/// Sizes recorded for one group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stage {
    pub group: Group,
    /// State variables of the group.
    pub variables: Vec<String>,
    /// Distinct states generated for the group.
    pub generated: usize,
    /// States after minimization.
    pub minimized: usize,
    /// States of the composition with everything before it; `None` for the
    /// property group.
    pub composed: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatsReport {
    /// Components produced by decomposition.
    pub n: usize,
    /// Groups other than the property group, after reduction.
    pub m: usize,
    /// Groups composed before the error state became unreachable.
    pub k: usize,
    pub stages: Vec<Stage>,
    /// Largest generated or composed state count.
    pub max_states: usize,
    /// Whole microseconds.
    pub elapsed: Duration,
    pub strategy: String,
}

/// Knobs shared by every run.
#[derive(Debug, Clone, Default)]
pub struct Options {
    pub limits: Limits,
    pub minimize: MinimizeMode,
    /// Drop components that cannot influence the property group. Never
    /// applied to the monolithic strategy.
    pub static_reduction: bool,
}

impl Options {
    pub fn new() -> Self {
        Self {
            static_reduction: true,
            ..Default::default()
        }
    }
}

/// Verdict together with the statistics of the run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub verdict: Verdict,
    pub stats: StatsReport,
}

fn truncate_micros(d: Duration) -> Duration {
    Duration::from_micros(d.as_micros() as u64)
}

fn inconclusive(e: EnumError) -> Result<Verdict, EngineError> {
    match e {
        EnumError::StateBoundExceeded(_) => Ok(Verdict::Inconclusive(BTreeSet::from([InconclusiveReason::BoundExceeded]))),
        EnumError::Cancelled => Ok(Verdict::Inconclusive(BTreeSet::from([InconclusiveReason::Cancelled]))),
        other => Err(EngineError::Enumerate(other)),
    }
}

fn cancelled(opts: &Options) -> bool {
    opts.limits
        .cancel
        .as_ref()
        .is_some_and(|c| c.load(std::sync::atomic::Ordering::Relaxed))
}

/// Minimizes `lts`; in observational mode, actions whose names are not in
/// `visible` are hidden first.
fn reduce(lts: &Lts, mode: MinimizeMode, visible: &BTreeSet<String>) -> Lts {
    match mode {
        MinimizeMode::Strong => minimize(lts, mode),
        MinimizeMode::Observational => minimize(&hide(lts, |a| visible.contains(&*a.name)), mode),
    }
}

/// Checks `p` against the composition of `d_p` and `groups`, composing the
/// groups in order and stopping as soon as the error state is unreachable.
pub fn comp_verify(d_p: &SpecAst, groups: &[SpecAst], p: &PropertyDef, opts: &Options) -> Result<Outcome, EngineError> {
    let start = Instant::now();
    let (verdict, stages, k) = comp_verify_in(d_p, groups, p, opts, opts.minimize)?;
    let verdict = match verdict {
        // Hidden actions are missing from the trace; redo without hiding.
        Verdict::Violated(_) if opts.minimize == MinimizeMode::Observational => {
            comp_verify_in(d_p, groups, p, opts, MinimizeMode::Strong)?.0
        }
        v => v,
    };
    let max_states = stages
        .iter()
        .flat_map(|s| [s.generated, s.composed.unwrap_or(0)])
        .max()
        .unwrap_or(0);
    Ok(Outcome {
        verdict,
        stats: StatsReport {
            n: groups.len() + 1,
            m: groups.len(),
            k,
            stages,
            max_states,
            elapsed: truncate_micros(start.elapsed()),
            strategy: String::new(),
        },
    })
}

fn comp_verify_in(
    d_p: &SpecAst,
    groups: &[SpecAst],
    p: &PropertyDef,
    opts: &Options,
    mode: MinimizeMode,
) -> Result<(Verdict, Vec<Stage>, usize), EngineError> {
    let alphabets: Vec<BTreeSet<String>> = std::iter::once(d_p).chain(groups).map(symbolic_actions).collect();
    // Names still to be synchronised on after group `j` (0 = property).
    let later = |j: usize| -> BTreeSet<String> { alphabets[j + 1..].iter().flatten().cloned().collect() };
    let mut stages = Vec::new();

    let e = match err_lts(d_p, p, &opts.limits) {
        Ok(e) => e,
        Err(err) => return Ok((inconclusive(err)?, stages, 0)),
    };
    let mut acc = reduce(&e.lts, mode, &later(0));
    stages.push(Stage {
        group: Group::P,
        variables: d_p.variables.clone(),
        generated: e.generated,
        minimized: acc.len(),
        composed: None,
    });
    if !acc.pi_reachable() {
        return Ok((Verdict::Holds, stages, 0));
    }
    for (j, g) in groups.iter().enumerate() {
        if cancelled(opts) {
            return Ok((inconclusive(EnumError::Cancelled)?, stages, j));
        }
        let e = match to_lts(g, &opts.limits) {
            Ok(e) => e,
            Err(err) => return Ok((inconclusive(err)?, stages, j)),
        };
        let mut visible: BTreeSet<String> = acc.alphabet().iter().map(|a| a.name.to_string()).collect();
        visible.extend(later(j + 1));
        let min = reduce(&e.lts, mode, &visible);
        acc = compose(&acc, &min)?;
        stages.push(Stage {
            group: Group::D(j + 1),
            variables: g.variables.clone(),
            generated: e.generated,
            minimized: min.len(),
            composed: Some(acc.len()),
        });
        if !acc.pi_reachable() {
            return Ok((Verdict::Holds, stages, j + 1));
        }
    }
    let witness = acc.pi_witness().expect("error state is reachable");
    Ok((Verdict::Violated(witness), stages, groups.len()))
}

/// The map a strategy selects for `components`, before static reduction.
pub fn strategy_map(strategy: &Strategy, components: &[SpecAst], s: &SpecAst) -> Result<RecompositionMap, EngineError> {
    match strategy {
        Strategy::Kind(k) => Ok(make_strategy(*k, &total_order(components, s))),
        Strategy::Custom { map, .. } => {
            let got = map.domain().count();
            if got != components.len() || map.domain().last() != Some(got - 1) {
                return Err(EngineError::MapSize {
                    got,
                    want: components.len(),
                });
            }
            Ok(map.clone())
        }
    }
}

/// Decompose, recompose with `strategy`, optionally reduce, and verify.
pub fn recomp_verify(s: &SpecAst, p: &PropertyDef, strategy: &Strategy, opts: &Options) -> Result<Outcome, EngineError> {
    let start = Instant::now();
    let components = decompose(s, p)?;
    let f = strategy_map(strategy, &components, s)?;
    let f = if opts.static_reduction && !strategy.is_monolithic() {
        static_reduce(&f, &components).0
    } else {
        f
    };
    let (d_p, groups) = build_groups(&f, &components)?;
    let mut out = comp_verify(&d_p, &groups, p, opts)?;
    out.stats.n = components.len();
    out.stats.strategy = strategy.to_string();
    out.stats.elapsed = truncate_micros(start.elapsed());
    Ok(out)
}
