//! Run reports: a human-readable table and a versioned line format.
//!
//! The structured format is one `key value` pair per line after the header
//! `recomp-report v1`:
//!
//! ```text
//! recomp-report v1
//! spec TwoPhase
//! property Consistent
//! verdict violated
//! step SndPrepare "rm1"
//! strategy S1
//! n 4
//! m 3
//! k 3
//! max_states 288
//! elapsed_us 1520
//! stage P generated=47 minimized=40 composed=- vars=rmState
//! end
//! ```
//!
//! `step` lines (violations) and `reason` lines (inconclusive runs) follow
//! the verdict. Stage lines appear in composition order.

use std::collections::BTreeSet;
use std::fmt::Write;
use std::time::Duration;

use thiserror::Error;

use super::{InconclusiveReason, Stage, StatsReport, Verdict};
use crate::enumerator::eval_closed;
use crate::lts::ConcreteAction;
use crate::recomposer::Group;
use crate::spec_lang::parse_closed_expr;

pub const HEADER: &str = "recomp-report v1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("report line {line}: {msg}")]
pub struct ReportError {
    pub line: usize,
    pub msg: String,
}

/// Everything printed for one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub spec: String,
    pub property: String,
    pub verdict: Verdict,
    pub stats: StatsReport,
}

fn verdict_word(v: &Verdict) -> &'static str {
    match v {
        Verdict::Holds => "holds",
        Verdict::Violated(_) => "violated",
        Verdict::Inconclusive(_) => "inconclusive",
    }
}

pub fn render_structured(r: &Report) -> String {
    let mut out = String::new();
    let s = &r.stats;
    let _ = writeln!(out, "{HEADER}");
    let _ = writeln!(out, "spec {}", r.spec);
    let _ = writeln!(out, "property {}", r.property);
    let _ = writeln!(out, "verdict {}", verdict_word(&r.verdict));
    match &r.verdict {
        Verdict::Violated(w) => {
            for a in w {
                match &a.arg {
                    Some(v) => writeln!(out, "step {} {v}", a.name),
                    None => writeln!(out, "step {}", a.name),
                }
                .expect("writing to a string");
            }
        }
        Verdict::Inconclusive(rs) => {
            for reason in rs {
                let _ = writeln!(out, "reason {reason}");
            }
        }
        Verdict::Holds => {}
    }
    let _ = writeln!(out, "strategy {}", s.strategy);
    let _ = writeln!(out, "n {}", s.n);
    let _ = writeln!(out, "m {}", s.m);
    let _ = writeln!(out, "k {}", s.k);
    let _ = writeln!(out, "max_states {}", s.max_states);
    let _ = writeln!(out, "elapsed_us {}", s.elapsed.as_micros());
    for st in &s.stages {
        let composed = st.composed.map_or("-".to_string(), |c| c.to_string());
        let vars = if st.variables.is_empty() {
            "-".to_string()
        } else {
            st.variables.join(",")
        };
        let _ = writeln!(
            out,
            "stage {} generated={} minimized={} composed={composed} vars={vars}",
            st.group, st.generated, st.minimized
        );
    }
    let _ = writeln!(out, "end");
    out
}

struct Cursor<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, msg: &str) -> ReportError {
        ReportError {
            line: self.lines.get(self.pos).map_or(self.lines.len() + 1, |l| l.0),
            msg: msg.to_string(),
        }
    }

    /// The value of the next line if it starts with `key`.
    fn peek(&self, key: &str) -> Option<&'a str> {
        let (_, l) = *self.lines.get(self.pos)?;
        match l.split_once(' ') {
            Some((k, v)) if k == key => Some(v),
            _ if l == key => Some(""),
            _ => None,
        }
    }

    fn field(&mut self, key: &str) -> Result<&'a str, ReportError> {
        let v = self.peek(key).ok_or_else(|| self.err(&format!("expected '{key}'")))?;
        self.pos += 1;
        Ok(v)
    }

    fn number(&mut self, key: &str) -> Result<u64, ReportError> {
        let v = self.field(key)?;
        v.parse().map_err(|_| ReportError {
            line: self.lines[self.pos - 1].0,
            msg: format!("'{key}' expects a number"),
        })
    }

    fn fail<T>(&self, msg: String) -> Result<T, ReportError> {
        Err(ReportError {
            line: self.lines[self.pos - 1].0,
            msg,
        })
    }
}

impl Report {
    /// Parses the output of [`render_structured`].
    pub fn parse(text: &str) -> Result<Report, ReportError> {
        let mut c = Cursor {
            lines: text.lines().enumerate().map(|(i, l)| (i + 1, l)).collect(),
            pos: 0,
        };
        if c.field("recomp-report")? != "v1" {
            return c.fail("unsupported report version".into());
        }
        let spec = c.field("spec")?.to_string();
        let property = c.field("property")?.to_string();
        let verdict = match c.field("verdict")? {
            "holds" => Verdict::Holds,
            "violated" => {
                let mut steps = Vec::new();
                while c.peek("step").is_some() {
                    let a = c.field("step")?;
                    steps.push(parse_action(a).or_else(|m| c.fail(m))?);
                }
                Verdict::Violated(steps)
            }
            "inconclusive" => {
                let mut reasons = BTreeSet::new();
                while c.peek("reason").is_some() {
                    reasons.insert(match c.field("reason")? {
                        "bound-exceeded" => InconclusiveReason::BoundExceeded,
                        "timeout" => InconclusiveReason::Timeout,
                        "cancelled" => InconclusiveReason::Cancelled,
                        other => return c.fail(format!("unknown reason '{other}'")),
                    });
                }
                Verdict::Inconclusive(reasons)
            }
            other => return c.fail(format!("unknown verdict '{other}'")),
        };
        let strategy = c.field("strategy")?.to_string();
        let n = c.number("n")? as usize;
        let m = c.number("m")? as usize;
        let k = c.number("k")? as usize;
        let max_states = c.number("max_states")? as usize;
        let elapsed = Duration::from_micros(c.number("elapsed_us")?);
        let mut stages = Vec::new();
        while c.peek("stage").is_some() {
            let v = c.field("stage")?;
            stages.push(parse_stage(v).or_else(|m| c.fail(m))?);
        }
        c.field("end")?;
        Ok(Report {
            spec,
            property,
            verdict,
            stats: StatsReport {
                n,
                m,
                k,
                stages,
                max_states,
                elapsed,
                strategy,
            },
        })
    }
}

fn parse_action(text: &str) -> Result<ConcreteAction, String> {
    match text.split_once(' ') {
        None => Ok(ConcreteAction::new(text, None)),
        Some((name, arg)) => {
            let e = parse_closed_expr(arg).map_err(|e| e.to_string())?;
            let v = eval_closed(&e).map_err(|e| e.to_string())?;
            Ok(ConcreteAction::new(name, Some(v)))
        }
    }
}

fn parse_stage(text: &str) -> Result<Stage, String> {
    let mut parts = text.split(' ');
    let group = match parts.next() {
        Some("P") => Group::P,
        Some(j) => Group::D(j.parse().map_err(|_| format!("bad group '{j}'"))?),
        None => return Err("empty stage".into()),
    };
    let mut get = |key: &str| -> Result<String, String> {
        let p = parts.next().ok_or_else(|| format!("missing {key}"))?;
        p.strip_prefix(key)
            .and_then(|r| r.strip_prefix('='))
            .map(str::to_string)
            .ok_or_else(|| format!("expected {key}="))
    };
    let count = |v: String| v.parse::<usize>().map_err(|_| format!("bad count '{v}'"));
    let generated = count(get("generated")?)?;
    let minimized = count(get("minimized")?)?;
    let composed = match get("composed")?.as_str() {
        "-" => None,
        c => Some(count(c.to_string())?),
    };
    let vars = get("vars")?;
    let variables = if vars == "-" {
        Vec::new()
    } else {
        vars.split(',').map(str::to_string).collect()
    };
    Ok(Stage {
        group,
        variables,
        generated,
        minimized,
        composed,
    })
}

fn thousands(n: usize) -> String {
    let s = n.to_string();
    let mut out = String::new();
    for (i, c) in s.chars().enumerate() {
        if i > 0 && (s.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(c);
    }
    out
}

/// Human-readable summary with one row of totals and the stage table.
pub fn render_text(r: &Report) -> String {
    let s = &r.stats;
    let mut out = String::new();
    let verdict = match &r.verdict {
        Verdict::Holds => "HOLDS".to_string(),
        Verdict::Violated(_) => "VIOLATED".to_string(),
        Verdict::Inconclusive(rs) => {
            let rs: Vec<String> = rs.iter().map(|x| x.to_string()).collect();
            format!("INCONCLUSIVE ({})", rs.join(", "))
        }
    };
    let _ = writeln!(out, "{} / {}: {verdict}", r.spec, r.property);
    if let Verdict::Violated(w) = &r.verdict {
        let _ = writeln!(out, "counterexample ({} steps):", w.len());
        for (i, a) in w.iter().enumerate() {
            let _ = writeln!(out, "  {:>3}. {a}", i + 1);
        }
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "{:<10} {:>3} {:>3} {:>3} {:>12} {:>10}", "strategy", "n", "m", "k", "states", "time");
    let _ = writeln!(
        out,
        "{:<10} {:>3} {:>3} {:>3} {:>12} {:>9.3}s",
        s.strategy,
        s.n,
        s.m,
        s.k,
        thousands(s.max_states),
        s.elapsed.as_secs_f64()
    );
    if !s.stages.is_empty() {
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{:<6} {:>12} {:>12} {:>12}  variables",
            "group", "generated", "minimized", "composed"
        );
        for st in &s.stages {
            let _ = writeln!(
                out,
                "{:<6} {:>12} {:>12} {:>12}  {}",
                st.group.to_string(),
                thousands(st.generated),
                thousands(st.minimized),
                st.composed.map_or("-".to_string(), thousands),
                st.variables.join(", ")
            );
        }
    }
    out
}
