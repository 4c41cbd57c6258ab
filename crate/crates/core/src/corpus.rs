//! Bundled specifications.

use crate::spec_lang::{parse, SpecAst};

pub const TWOPHASE: &str = include_str!("../corpus/twophase.spec");
pub const TWOPHASE_PREPARE: &str = include_str!("../corpus/twophase_prepare.spec");
pub const TPCOUNTER: &str = include_str!("../corpus/tpcounter.spec");
pub const RM: &str = include_str!("../corpus/rm.spec");
pub const ENV: &str = include_str!("../corpus/env.spec");
pub const TM1: &str = include_str!("../corpus/tm1.spec");
pub const TM2: &str = include_str!("../corpus/tm2.spec");
pub const T1: &str = include_str!("../corpus/t1.spec");
pub const T2: &str = include_str!("../corpus/t2.spec");
pub const LOCKSERVER: &str = include_str!("../corpus/lockserver.spec");
pub const CONSENSUS: &str = include_str!("../corpus/consensus.spec");
pub const CONSENSUS_BUGGY: &str = include_str!("../corpus/consensus_buggy.spec");

/// Every bundled file as `(file name, source)`.
pub const ALL: &[(&str, &str)] = &[
    ("twophase.spec", TWOPHASE),
    ("twophase_prepare.spec", TWOPHASE_PREPARE),
    ("tpcounter.spec", TPCOUNTER),
    ("rm.spec", RM),
    ("env.spec", ENV),
    ("tm1.spec", TM1),
    ("tm2.spec", TM2),
    ("t1.spec", T1),
    ("t2.spec", T2),
    ("lockserver.spec", LOCKSERVER),
    ("consensus.spec", CONSENSUS),
    ("consensus_buggy.spec", CONSENSUS_BUGGY),
];

/// Parses a bundled source. Panics on malformed input, which would be a
/// packaging bug.
pub fn load(src: &str) -> SpecAst {
    parse(src).expect("bundled spec parses")
}

/// Set literal `{"<prefix>1", ..., "<prefix>n"}` for rebinding a constant.
pub fn atoms(prefix: &str, n: usize) -> crate::spec_lang::Expr {
    use crate::spec_lang::Expr;
    Expr::SetLit((1..=n).map(|i| Expr::Str(format!("{prefix}{i}"))).collect())
}

/// The two-phase commit protocol over `n` resource managers.
pub fn twophase(n: usize) -> SpecAst {
    load(TWOPHASE).with_constant("RMs", atoms("rm", n))
}

pub fn tpcounter(n: usize) -> SpecAst {
    load(TPCOUNTER).with_constant("RMs", atoms("rm", n))
}
