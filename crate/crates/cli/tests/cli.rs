use std::path::PathBuf;
use std::process::{Command, Output};

use recomp::engine::{InconclusiveReason, Report, Verdict};

fn corpus(file: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "core", "corpus", file].iter().collect();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_recomp"))
        .args(args)
        .env_remove("RECOMP_BOUND")
        .env_remove("RECOMP_TIMEOUT")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_temp(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const OPT_MAP: &str = "# property group holds the RMs\nrmState = P\nmsgs = 1\ntmState = 1\ntmPrepared = 2\n";

#[test]
fn portfolio_reports_the_winner() {
    let tp = corpus("twophase.spec");
    let o = run(&["check", &tp, "--property", "Consistent", "--strategy", "portfolio", "--workers", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("HOLDS"));
    let row = out.lines().find(|l| l.starts_with('S')).unwrap();
    assert!(["S1", "S2", "S3", "S4"].contains(&row.split_whitespace().next().unwrap()));
}

#[test]
fn custom_map_gives_two_groups() {
    let dir = tempfile::tempdir().unwrap();
    let map = write_temp(&dir, "opt.map", OPT_MAP);
    let tp = corpus("twophase.spec");
    let o = run(&["check", &tp, "-p", "Consistent", "--strategy", &format!("map:{map}"), "--format", "structured"]);
    assert_eq!(o.status.code(), Some(0));
    let r = Report::parse(&stdout(&o)).unwrap();
    assert_eq!(r.verdict, Verdict::Holds);
    assert_eq!((r.stats.n, r.stats.m, r.stats.k), (4, 2, 2));
    assert_eq!(r.stats.strategy, "map:opt");
}

#[test]
fn structured_report_matches_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let map = write_temp(&dir, "opt.map", OPT_MAP);
    let tp = corpus("twophase.spec");
    let o = run(&["check", &tp, "-p", "Consistent", "-s", &format!("map:{map}"), "--format", "structured"]);
    let got: String = stdout(&o)
        .lines()
        .map(|l| if l.starts_with("elapsed_us ") { "elapsed_us 0" } else { l })
        .map(|l| format!("{l}\n"))
        .collect();
    assert_eq!(got, include_str!("golden/twophase_opt.report"));
}

#[test]
fn unbounded_monolithic_run_is_inconclusive() {
    let s = corpus("tpcounter.spec");
    let o = run(&["check", &s, "-p", "Consistent", "--strategy", "s4", "--bound", "20000", "--format", "structured"]);
    assert_eq!(o.status.code(), Some(2));
    let r = Report::parse(&stdout(&o)).unwrap();
    assert_eq!(r.verdict, Verdict::Inconclusive([InconclusiveReason::BoundExceeded].into()));

    let o = run(&["check", &s, "--strategy", "s1", "--bound", "20000"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn bound_can_come_from_the_environment() {
    let s = corpus("tpcounter.spec");
    let o = Command::new(env!("CARGO_BIN_EXE_recomp"))
        .args(["check", &s, "--strategy", "s4"])
        .env("RECOMP_BOUND", "5000")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("bound-exceeded"));
}

#[test]
fn timeout_makes_the_run_inconclusive() {
    let s = corpus("tpcounter.spec");
    let o = run(&["check", &s, "--strategy", "s4", "--timeout", "0.05", "--format", "structured"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("reason timeout"));
}

#[test]
fn violation_prints_a_counterexample() {
    let s = corpus("consensus_buggy.spec");
    let o = run(&["check", &s, "--strategy", "s1"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("VIOLATED"));
    assert!(out.contains("Decide(\"a\")") || out.contains("Decide(\"b\")"));

    let o = run(&["check", &s, "--strategy", "s4", "--format", "structured"]);
    let r = Report::parse(&stdout(&o)).unwrap();
    let Verdict::Violated(w) = r.verdict else { panic!() };
    assert_eq!(w.iter().filter(|a| &*a.name == "Decide").count(), 2);
}

#[test]
fn errors_exit_with_three() {
    let tp = corpus("twophase.spec");
    let dir = tempfile::tempdir().unwrap();
    let bad_maps = [
        "rmState = 1\nmsgs = P\ntmState = 1\ntmPrepared = 2\n",
        "rmState = P\nmsgs = 1\ntmState = 3\ntmPrepared = 1\n",
        "rmState = P\nmsgs = 1\n",
        "rmState = P\nrmState = P\nmsgs = 1\ntmState = 1\ntmPrepared = 1\n",
        "rmState = P\nmsgs = 1\ntmState = 1\nnobody = 1\ntmPrepared = 1\n",
    ];
    for (i, text) in bad_maps.iter().enumerate() {
        let map = write_temp(&dir, &format!("bad{i}.map"), text);
        let o = run(&["check", &tp, "-p", "Consistent", "-s", &format!("map:{map}")]);
        assert_eq!(o.status.code(), Some(3), "map {i}");
    }
    let bad_spec = write_temp(&dir, "bad.spec", "MODULE Bad\nVARIABLES x\nINIT\n  /\\ x = y\n");
    for args in [
        vec!["check", &tp, "-p", "Nope"],
        vec!["check", &tp],
        vec!["check", "/nonexistent.spec", "-p", "P"],
        vec!["check", &tp, "-p", "Consistent", "-s", "s9"],
        vec!["check", &tp, "-p", "Consistent", "--workers", "0"],
        vec!["check", &tp, "-p", "Consistent", "--bound", "0"],
        vec!["check", &tp, "-p", "Consistent", "--const", "Nope=1"],
        vec!["check", &bad_spec],
        vec!["frobnicate"],
    ] {
        assert_eq!(run(&args).status.code(), Some(3), "{args:?}");
    }
}

#[test]
fn constants_can_be_overridden() {
    let tp = corpus("twophase.spec");
    let o = run(&["lts", &tp, "--const", "RMs={\"a\", \"b\"}"]);
    assert_eq!(o.status.code(), Some(0));
    // Reference count for two resource managers.
    assert!(stdout(&o).starts_with("states 56\n"));
    let o = run(&["lts", &tp]);
    assert!(stdout(&o).starts_with("states 288\n"));
    let o = run(&["lts", &tp, "--error", "-p", "NothingPrepared", "--minimize", "strong"]);
    assert!(stdout(&o).lines().any(|l| l.starts_with("pi ")));
}

#[test]
fn decompose_and_order_subcommands() {
    let tp = corpus("twophase.spec");
    let o = run(&["decompose", &tp, "-p", "Consistent"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("4 components for Consistent\n"));
    assert!(out.contains("0 rmState\n  variables: rmState\n"));

    let o = run(&["order", &tp, "-p", "Consistent"]);
    let out = stdout(&o);
    assert!(out.contains("E0 = {rmState}\nE1 = {msgs}\nE2 = {tmPrepared, tmState}\n"));
    assert!(out.contains("order: rmState, msgs, tmPrepared, tmState\n"));
    assert!(out.contains("# S3\nrmState = P\ntmPrepared = P\ntmState = 1\nmsgs = P\n"));
}
