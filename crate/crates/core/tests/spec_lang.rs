use recomp::corpus;
use recomp::spec_lang::*;

#[test]
fn bundled_files_print_back_exactly() {
    for (name, src) in corpus::ALL {
        let spec = parse(src).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(print_spec(&spec), *src, "{name} is not in canonical layout");
        assert_eq!(parse(&print_spec(&spec)).unwrap(), spec);
    }
}

#[test]
fn twophase_shape() {
    let tp = corpus::load(corpus::TWOPHASE_PREPARE);
    assert_eq!(tp.variables, ["msgs", "rmState", "tmState", "tmPrepared"]);
    let acts: Vec<_> = symbolic_actions(&tp).into_iter().collect();
    assert_eq!(acts, ["RcvPrepare", "SndPrepare"]);
    assert_eq!(conjuncts(tp.action("SndPrepare").unwrap()).len(), 4);
    assert_eq!(conjuncts(tp.action("RcvPrepare").unwrap()).len(), 4);
    let consistent = tp.property("Consistent").unwrap();
    assert_eq!(free_vars(&consistent.body).into_iter().collect::<Vec<_>>(), ["rmState"]);
    assert!(free_vars(&Expr::Int(0)).is_empty());
    assert_eq!(spec_vars(&tp).len(), 4);
}

#[test]
fn tpcounter_adds_counter_and_increment() {
    let tp = corpus::load(corpus::TWOPHASE);
    let tc = corpus::load(corpus::TPCOUNTER);
    assert_eq!(tc.variables.len(), 5);
    let mut expected = symbolic_actions(&tp);
    expected.insert("Increment".into());
    assert_eq!(symbolic_actions(&tc), expected);
}

/// Occurrence counts checked against a plain textual scan of the source.
#[test]
fn occurrence_counts_match_token_scan() {
    fn scan(src: &str, v: &str) -> usize {
        let body = src.split("\nPROPERTY").next().unwrap();
        let mut n = 0;
        let bytes = body.as_bytes();
        let mut i = 0;
        while let Some(off) = body[i..].find(v) {
            let at = i + off;
            let end = at + v.len();
            let before = at == 0 || !(bytes[at - 1].is_ascii_alphanumeric() || bytes[at - 1] == b'"');
            let after = end >= bytes.len() || !(bytes[end].is_ascii_alphanumeric() || bytes[end] == b'"');
            if before && after {
                n += 1;
            }
            i = end;
        }
        n
    }
    for (name, src) in corpus::ALL {
        let spec = parse(src).unwrap();
        for v in &spec.variables {
            assert_eq!(count_occurrences(&spec, v).unwrap(), scan(src, v), "{name}: {v}");
        }
    }
    let tp = corpus::load(corpus::TWOPHASE);
    assert!(count_occurrences(&tp, "tmPrepared").unwrap() < count_occurrences(&tp, "msgs").unwrap());
}

#[test]
fn minimal_spec_counts_two() {
    let s = parse("MODULE M\nVARIABLES x\n\nINIT\n  /\\ x = 0\n").unwrap();
    assert_eq!(count_occurrences(&s, "x").unwrap(), 2);
}

#[test]
fn syntax_errors_carry_positions() {
    let err = parse("MODULE M\nVARIABLES x\n\nINIT\n  /\\ x = (0\n").unwrap_err();
    assert!(matches!(err, SpecError::Syntax { line: 5, .. }), "{err}");
    let err = parse("MODULE M\nVARIABLES x\n\nINIT\n  /\\ x = 0\n\nACTION A\n  /\\ x' = x' + 1\n").unwrap_err();
    assert!(matches!(err, SpecError::ConjShape { .. }), "{err}");
}

#[test]
fn normalize_permutation_invariance() {
    let tp = corpus::load(corpus::TWOPHASE);
    let mut shuffled = tp.clone();
    shuffled.actions.reverse();
    for a in &mut shuffled.actions {
        a.conjuncts.rotate_left(1);
    }
    shuffled.init.reverse();
    assert_eq!(normalize(&shuffled), normalize(&tp));
    assert_eq!(normalize(&normalize(&tp)), normalize(&tp));
}
