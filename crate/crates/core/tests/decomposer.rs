use std::collections::BTreeSet;

use recomp::corpus;
use recomp::decomposer::{decompose, slice};
use recomp::enumerator::{err_lts, Limits};
use recomp::recomposer::{compose_all, compose_specs};
use recomp::spec_lang::{normalize, spec_vars, PropertyDef, SpecAst};

mod common;

fn vars(names: &[&str]) -> BTreeSet<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn same(a: &SpecAst, b: &SpecAst) -> bool {
    normalize(a).same_structure(&normalize(b))
}

/// Every bundled spec paired with each of its properties, or `TRUE` when it
/// has none.
fn corpus_cases() -> Vec<(String, SpecAst, PropertyDef)> {
    let mut out = Vec::new();
    for (file, src) in corpus::ALL {
        let s = corpus::load(src);
        let props = if s.properties.is_empty() {
            vec![PropertyDef::truth()]
        } else {
            s.properties.clone()
        };
        for p in props {
            out.push((file.to_string(), s.clone(), p));
        }
    }
    out
}

#[test]
fn recomposing_the_components_gives_back_the_spec() {
    for (file, s, p) in corpus_cases() {
        let comps = decompose(&s, &p).unwrap();
        let whole = compose_all(&comps).unwrap();
        assert!(same(&whole, &s), "{file} / {}", p.name);
        assert!(p.free_vars().is_subset(&spec_vars(&comps[0])), "{file} / {}", p.name);
        let mut seen = BTreeSet::new();
        for c in &comps {
            for v in &c.variables {
                assert!(seen.insert(v.clone()), "{file}: {v} in two components");
            }
        }
        assert_eq!(seen, spec_vars(&s));
    }
}

#[test]
fn twophase_components_match_handwritten_slices() {
    let tp = corpus::load(corpus::TWOPHASE);
    let p = tp.property("Consistent").unwrap().clone();
    let comps = decompose(&tp, &p).unwrap();
    let names: Vec<&str> = comps.iter().map(|c| c.name.as_str()).collect();
    assert_eq!(names, ["rmState", "tmPrepared", "tmState", "msgs"]);
    // The hand-written files show a subset of each component's actions.
    for (c, src) in comps.iter().zip([corpus::RM, corpus::TM2, corpus::TM1, corpus::ENV]) {
        let want = normalize(&corpus::load(src));
        let got = normalize(c);
        assert_eq!(got.variables, want.variables);
        assert_eq!(got.init, want.init);
        for a in &want.actions {
            assert_eq!(got.action(&a.name), Some(a), "{}!{}", c.name, a.name);
        }
    }
}

#[test]
fn rm_slice_error_states_match_oracle() {
    // rmState alone: SndPrepare and ChooseAbort need "working"; the receive
    // actions lose their message guards and fire from any state.
    let n = 3;
    let bad = |s: &Vec<u8>| s.contains(&2) && s.contains(&3);
    let next = |s: &Vec<u8>| {
        let mut out = Vec::new();
        if bad(s) {
            return out;
        }
        for r in 0..n {
            let mut set = |to: u8| {
                let mut t = s.clone();
                t[r] = to;
                out.push(t);
            };
            if s[r] == 0 {
                set(1);
            }
            set(2);
            set(3);
        }
        out
    };
    let mut all = BTreeSet::new();
    let mut stack = vec![vec![0u8; n]];
    while let Some(s) = stack.pop() {
        if all.insert(s.clone()) {
            stack.extend(next(&s));
        }
    }
    let good = all.iter().filter(|s| !bad(s)).count();
    let violating = all.len() - good;

    let tp = corpus::twophase(n);
    let rm = slice(&tp, &vars(&["rmState"])).unwrap();
    let p = tp.property("Consistent").unwrap();
    let e = err_lts(&rm, p, &Limits::default()).unwrap();
    assert_eq!(e.generated, good + violating);
    assert_eq!(e.lts.len(), good + 1);
    assert!(e.lts.pi_reachable());
    // Closed form for three RMs: of the 4^3 assignments, 27 avoid "committed",
    // 27 avoid "aborted" and 8 avoid both.
    assert_eq!((good, violating), (27 + 27 - 8, 64 - 46));
}

#[test]
fn composing_slices_reproduces_the_intermediate_specs() {
    let tm1 = corpus::load(corpus::TM1);
    let tm2 = corpus::load(corpus::TM2);
    let env = corpus::load(corpus::ENV);
    let t2 = compose_specs(&tm1, &tm2).unwrap();
    assert!(same(&t2, &corpus::load(corpus::T2)));
    let t1 = compose_specs(&env, &t2).unwrap();
    assert!(same(&t1, &corpus::load(corpus::T1)));
}

#[test]
fn slicing_is_monotone_in_the_variable_set() {
    let tp = corpus::twophase(2);
    let small = slice(&tp, &vars(&["tmState"])).unwrap();
    let big = slice(&tp, &vars(&["tmState", "msgs"])).unwrap();
    let small_actions: BTreeSet<&str> = small.actions.iter().map(|a| a.name.as_str()).collect();
    let big_actions: BTreeSet<&str> = big.actions.iter().map(|a| a.name.as_str()).collect();
    assert!(small_actions.is_subset(&big_actions));
    assert_eq!(spec_vars(&big), vars(&["msgs", "tmState"]));
}
