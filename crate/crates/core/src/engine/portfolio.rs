//! Runs several strategies in parallel and keeps the first conclusive answer.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{mpsc, Arc};
use std::time::{Duration, Instant};

use super::{recomp_verify, EngineError, InconclusiveReason, Options, Outcome, StatsReport, Verdict};
use crate::heuristics::Strategy;
use crate::spec_lang::{PropertyDef, SpecAst};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PortfolioOutcome {
    pub verdict: Verdict,
    pub stats: StatsReport,
    /// The strategy whose result was returned, if any was conclusive.
    pub winner: Option<Strategy>,
}

/// Runs one verification per strategy on up to `workers` threads, in the
/// given launch order. The first conclusive verdict wins and the other runs
/// are cancelled. Without a conclusive verdict the reasons of all runs are
/// merged.
pub fn run_portfolio(
    s: &SpecAst,
    p: &PropertyDef,
    strategies: &[Strategy],
    workers: usize,
    timeout: Option<Duration>,
    opts: &Options,
) -> Result<PortfolioOutcome, EngineError> {
    assert!(!strategies.is_empty(), "portfolio needs at least one strategy");
    let start = Instant::now();
    let cancel = Arc::new(AtomicBool::new(false));
    let mut opts = opts.clone();
    opts.limits.cancel = Some(cancel.clone());
    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<(usize, Result<Outcome, EngineError>)>();
    let workers = workers.clamp(1, strategies.len());

    std::thread::scope(|scope| {
        for _ in 0..workers {
            let tx = tx.clone();
            let (opts, next, cancel) = (&opts, &next, &cancel);
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= strategies.len() || cancel.load(Ordering::Relaxed) {
                    break;
                }
                let r = recomp_verify(s, p, &strategies[i], opts);
                if tx.send((i, r)).is_err() {
                    break;
                }
            });
        }
        drop(tx);

        let deadline = timeout.map(|t| start + t);
        let mut reasons = BTreeSet::new();
        let mut first: Option<StatsReport> = None;
        let mut error = None;
        loop {
            let msg = match deadline {
                Some(d) => match rx.recv_timeout(d.saturating_duration_since(Instant::now())) {
                    Ok(m) => Some(m),
                    Err(mpsc::RecvTimeoutError::Timeout) => {
                        reasons.insert(InconclusiveReason::Timeout);
                        None
                    }
                    Err(mpsc::RecvTimeoutError::Disconnected) => None,
                },
                None => rx.recv().ok(),
            };
            let Some((i, r)) = msg else { break };
            match r {
                Ok(out) if out.verdict.is_conclusive() => {
                    cancel.store(true, Ordering::Relaxed);
                    let mut stats = out.stats;
                    stats.elapsed = super::truncate_micros(start.elapsed());
                    return Ok(PortfolioOutcome {
                        verdict: out.verdict,
                        stats,
                        winner: Some(strategies[i].clone()),
                    });
                }
                Ok(out) => {
                    if let Verdict::Inconclusive(r) = &out.verdict {
                        reasons.extend(r.iter().copied());
                    }
                    first.get_or_insert(out.stats);
                }
                Err(e) => {
                    error.get_or_insert(e);
                }
            }
        }
        cancel.store(true, Ordering::Relaxed);
        if let Some(e) = error {
            return Err(e);
        }
        let mut stats = first.unwrap_or_else(|| StatsReport {
            n: 0,
            m: 0,
            k: 0,
            stages: Vec::new(),
            max_states: 0,
            elapsed: Duration::ZERO,
            strategy: "portfolio".to_string(),
        });
        stats.elapsed = super::truncate_micros(start.elapsed());
        Ok(PortfolioOutcome {
            verdict: Verdict::Inconclusive(reasons),
            stats,
            winner: None,
        })
    })
}
