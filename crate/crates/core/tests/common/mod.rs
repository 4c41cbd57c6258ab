//! Hand-written reference models and helpers shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::hash::Hash;

use rand::Rng;
use recomp::corpus;
use recomp::enumerator::{eval, init_states, successors, State, Value};
use recomp::lts::ConcreteAction;
use recomp::recomposer::{Group, RecompositionMap};
use recomp::spec_lang::{PropertyDef, SpecAst};

/// Breadth-first search over a native model. Returns the number of reachable
/// states and whether any of them is bad.
pub fn bfs<S: Clone + Eq + Hash>(init: S, next: impl Fn(&S) -> Vec<S>, bad: impl Fn(&S) -> bool) -> (usize, bool) {
    let mut seen = HashSet::from([init.clone()]);
    let mut queue = VecDeque::from([init]);
    let mut violated = false;
    while let Some(s) = queue.pop_front() {
        violated |= bad(&s);
        for t in next(&s) {
            if seen.insert(t.clone()) {
                queue.push_back(t);
            }
        }
    }
    (seen.len(), violated)
}

/// Two-phase commit over `n` resource managers.
/// msgs bits: 0..n Prepared(rm), n Commit, n+1 Abort.
/// rm states: 0 working, 1 prepared, 2 committed, 3 aborted.
/// tm states: 0 init, 1 committed, 2 aborted.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Tp {
    pub msgs: u32,
    pub rm: Vec<u8>,
    pub tm: u8,
    pub prepared: u32,
}

impl Tp {
    pub fn init(n: usize) -> Tp {
        Tp {
            msgs: 0,
            rm: vec![0; n],
            tm: 0,
            prepared: 0,
        }
    }

    pub fn consistent(&self) -> bool {
        !(self.rm.contains(&2) && self.rm.contains(&3))
    }
}

pub fn tp_next(n: usize, s: &Tp) -> Vec<(&'static str, Tp)> {
    let all = (1u32 << n) - 1;
    let mut out = Vec::new();
    for r in 0..n {
        if s.rm[r] == 0 {
            let mut t = s.clone();
            t.msgs |= 1 << r;
            t.rm[r] = 1;
            out.push(("SndPrepare", t));
            let mut t = s.clone();
            t.rm[r] = 3;
            out.push(("ChooseAbort", t));
        }
        if s.msgs & (1 << r) != 0 && s.tm == 0 {
            let mut t = s.clone();
            t.prepared |= 1 << r;
            out.push(("RcvPrepare", t));
        }
        if s.msgs & (1 << n) != 0 {
            let mut t = s.clone();
            t.rm[r] = 2;
            out.push(("RcvCommit", t));
        }
        if s.msgs & (1 << (n + 1)) != 0 {
            let mut t = s.clone();
            t.rm[r] = 3;
            out.push(("RcvAbort", t));
        }
    }
    if s.tm == 0 && s.prepared == all {
        let mut t = s.clone();
        t.tm = 1;
        t.msgs |= 1 << n;
        out.push(("TMCommit", t));
    }
    if s.tm == 0 {
        let mut t = s.clone();
        t.tm = 2;
        t.msgs |= 1 << (n + 1);
        out.push(("TMAbort", t));
    }
    out
}

/// (reachable states, whether Consistent is violated somewhere)
pub fn tp_oracle(n: usize) -> (usize, bool) {
    bfs(Tp::init(n), |s| tp_next(n, s).into_iter().map(|(_, t)| t).collect(), |s| !s.consistent())
}

/// Lock server over `n` nodes: bitmasks for the four per-node flags and the
/// server's flag.
#[derive(Clone, PartialEq, Eq, Hash)]
struct Lock {
    lock: u8,
    grant: u8,
    unlock: u8,
    hold: u8,
    server: bool,
}

pub fn lockserver_oracle(n: usize) -> (usize, bool) {
    let init = Lock {
        lock: 0,
        grant: 0,
        unlock: 0,
        hold: 0,
        server: true,
    };
    let next = |s: &Lock| {
        let mut out = Vec::new();
        for i in 0..n {
            let b = 1u8 << i;
            out.push(Lock { lock: s.lock | b, ..s.clone() });
            if s.server && s.lock & b != 0 {
                out.push(Lock {
                    server: false,
                    lock: s.lock & !b,
                    grant: s.grant | b,
                    ..s.clone()
                });
            }
            if s.grant & b != 0 {
                out.push(Lock {
                    grant: s.grant & !b,
                    hold: s.hold | b,
                    ..s.clone()
                });
            }
            if s.hold & b != 0 {
                out.push(Lock {
                    hold: s.hold & !b,
                    unlock: s.unlock | b,
                    ..s.clone()
                });
            }
            if s.unlock & b != 0 {
                out.push(Lock {
                    unlock: s.unlock & !b,
                    server: true,
                    ..s.clone()
                });
            }
        }
        out
    };
    bfs(init, next, |s| s.hold.count_ones() > 1)
}

/// Voting toy over `nodes` nodes and two values. `votes` bit `2*n + v` means
/// node n voted for v. With `buggy`, a single vote suffices to decide.
#[derive(Clone, PartialEq, Eq, Hash)]
struct Vote {
    voted: u8,
    votes: u16,
    decision: u8,
}

pub fn consensus_oracle(nodes: usize, buggy: bool) -> (usize, bool) {
    let init = Vote {
        voted: 0,
        votes: 0,
        decision: 0,
    };
    let next = |s: &Vote| {
        let mut out = Vec::new();
        for n in 0..nodes {
            for v in 0..2 {
                if s.voted & (1 << n) == 0 {
                    out.push(Vote {
                        voted: s.voted | 1 << n,
                        votes: s.votes | 1 << (2 * n + v),
                        ..s.clone()
                    });
                }
            }
        }
        for v in 0..2 {
            let support = (0..nodes).filter(|n| s.votes & (1 << (2 * n + v)) != 0).count();
            if support >= if buggy { 1 } else { 2 } {
                out.push(Vote {
                    decision: s.decision | 1 << v,
                    ..s.clone()
                });
            }
        }
        out
    };
    bfs(init, next, |s| s.decision == 3)
}

/// A bundled finite instance together with its oracle.
pub struct Instance {
    pub name: String,
    pub spec: SpecAst,
    pub property: PropertyDef,
    /// (reachable states, violated) from the reference model.
    pub oracle: (usize, bool),
}

pub fn instance(name: &str, spec: SpecAst, property: &str, oracle: (usize, bool)) -> Instance {
    let property = spec.property(property).expect("property exists").clone();
    Instance {
        name: name.to_string(),
        spec,
        property,
        oracle,
    }
}

/// TwoPhase at 2..=5 RMs, the lock server and both voting toys.
pub fn finite_instances() -> Vec<Instance> {
    let mut out: Vec<Instance> = (2..=5)
        .map(|n| instance(&format!("twophase-{n}"), corpus::twophase(n), "Consistent", tp_oracle(n)))
        .collect();
    out.push(instance(
        "lockserver",
        corpus::load(corpus::LOCKSERVER),
        "Mutex",
        lockserver_oracle(3),
    ));
    out.push(instance(
        "consensus",
        corpus::load(corpus::CONSENSUS),
        "Agreement",
        consensus_oracle(3, false),
    ));
    out.push(instance(
        "consensus_buggy",
        corpus::load(corpus::CONSENSUS_BUGGY),
        "Agreement",
        consensus_oracle(3, true),
    ));
    out
}

/// Replays `witness` from the initial states of `s` and reports whether a
/// state violating `p` is reached at the end.
pub fn replays_to_violation(s: &SpecAst, p: &PropertyDef, witness: &[ConcreteAction]) -> bool {
    let mut frontier: BTreeSet<State> = init_states(s).unwrap().into_iter().collect();
    for a in witness {
        frontier = frontier
            .iter()
            .flat_map(|st| successors(s, st).unwrap())
            .filter(|(b, _)| b == a)
            .map(|(_, t)| t)
            .collect();
    }
    frontier
        .iter()
        .any(|st| eval(s, &p.body, st, &[]).unwrap() == Value::Bool(false))
}

/// A random map over `n` components satisfying the map rules.
pub fn random_map(n: usize, rng: &mut impl Rng) -> RecompositionMap {
    let raw: Vec<usize> = (0..n).map(|i| if i == 0 { 0 } else { rng.gen_range(0..n) }).collect();
    let used: BTreeSet<usize> = raw.iter().copied().filter(|&g| g != 0).collect();
    let dense: BTreeMap<usize, usize> = used.iter().enumerate().map(|(i, &g)| (g, i + 1)).collect();
    let assignment = raw
        .iter()
        .enumerate()
        .map(|(i, &g)| (i, if g == 0 { Group::P } else { Group::D(dense[&g]) }))
        .collect();
    RecompositionMap::new(assignment).expect("dense map is valid")
}

/// Source of one side of a random composable pair. Actions `A` and `B` take
/// no argument; `C` and `D` take one from `{1, 2}` under the name `param`.
fn random_side(rng: &mut impl Rng, module: &str, var: &str, param: &str, actions: &[&str]) -> String {
    let mut src = format!("MODULE {module}\nVARIABLES {var}\n\nINIT\n");
    if rng.gen_bool(0.3) {
        src += &format!("  /\\ {var} \\in {{0, 1}}\n");
    } else {
        src += &format!("  /\\ {var} = {}\n", rng.gen_range(0..3));
    }
    for &a in actions {
        let has_param = a == "C" || a == "D";
        src += &format!("\nACTION {a}");
        if has_param {
            src += &format!("({param} \\in {{1, 2}})");
        }
        src += "\n";
        match rng.gen_range(0..4) {
            0 => src += &format!("  /\\ {var} = {}\n", rng.gen_range(0..3)),
            1 => src += &format!("  /\\ {var} /= {}\n", rng.gen_range(0..3)),
            2 => src += &format!("  /\\ {var} < {}\n", rng.gen_range(1..3)),
            _ => {}
        }
        match rng.gen_range(0..4) {
            0 => src += &format!("  /\\ {var}' = ({var} + {}) % 3\n", rng.gen_range(1..3)),
            1 => src += &format!("  /\\ {var}' = {}\n", rng.gen_range(0..3)),
            2 if has_param => src += &format!("  /\\ {var}' = {param}\n"),
            _ => src += &format!("  /\\ {var}' = {var}\n"),
        }
    }
    src
}

/// A random pair of one-variable specs over disjoint variables that share
/// some action names. The parameter is named differently on each side.
pub fn random_pair(rng: &mut impl Rng) -> (SpecAst, SpecAst) {
    let pool = ["A", "B", "C", "D"];
    let pick = |rng: &mut _| -> Vec<&str> {
        loop {
            let chosen: Vec<&str> = pool.iter().copied().filter(|_| Rng::gen_bool(rng, 0.6)).collect();
            if !chosen.is_empty() {
                return chosen;
            }
        }
    };
    let a = pick(rng);
    let b = pick(rng);
    let s = random_side(rng, "S", "x", "p", &a);
    let t = random_side(rng, "T", "y", "q", &b);
    let parse = |src: &str| recomp::spec_lang::parse(src).unwrap_or_else(|e| panic!("{e}\n{src}"));
    (parse(&s), parse(&t))
}

/// Builds every group `strategy` would verify and composes all of them
/// without stopping early. Returns whether the error state is reachable.
pub fn full_composition_violated(
    s: &SpecAst,
    p: &PropertyDef,
    strategy: &recomp::heuristics::Strategy,
    static_reduction: bool,
) -> bool {
    use recomp::enumerator::{err_lts, to_lts, Limits};
    use recomp::lts::{compose, minimize, MinimizeMode};
    let comps = recomp::decomposer::decompose(s, p).unwrap();
    let mut f = recomp::engine::strategy_map(strategy, &comps, s).unwrap();
    if static_reduction && !strategy.is_monolithic() {
        f = recomp::recomposer::static_reduce(&f, &comps).0;
    }
    let (d_p, groups) = recomp::recomposer::build_groups(&f, &comps).unwrap();
    let lim = Limits::default();
    let mut acc = minimize(&err_lts(&d_p, p, &lim).unwrap().lts, MinimizeMode::Strong);
    for g in &groups {
        acc = compose(&acc, &minimize(&to_lts(g, &lim).unwrap().lts, MinimizeMode::Strong)).unwrap();
    }
    acc.pi_reachable()
}

/// S1 to S4 followed by three random maps over the decomposition of `s`.
pub fn strategies_for(s: &SpecAst, p: &PropertyDef, seed: u64) -> Vec<recomp::heuristics::Strategy> {
    use rand::SeedableRng;
    use recomp::heuristics::{Strategy, StrategyKind};
    let n = recomp::decomposer::decompose(s, p).unwrap().len();
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let mut out: Vec<Strategy> = StrategyKind::ALL.iter().map(|&k| k.into()).collect();
    for i in 0..3 {
        out.push(Strategy::Custom {
            name: format!("random{i}"),
            map: random_map(n, &mut rng),
        });
    }
    out
}

/// Components sharing an action with component 0, directly or through
/// others: a plain graph search over the "shares an action" relation.
pub fn connected_to_first(alphabets: &[BTreeSet<String>]) -> BTreeSet<usize> {
    let mut seen = BTreeSet::from([0]);
    let mut stack = vec![0];
    while let Some(i) = stack.pop() {
        for j in 0..alphabets.len() {
            if !seen.contains(&j) && !alphabets[i].is_disjoint(&alphabets[j]) {
                seen.insert(j);
                stack.push(j);
            }
        }
    }
    seen
}

/// Distance of each reachable component from component 0 in that graph.
pub fn layers(alphabets: &[BTreeSet<String>]) -> BTreeMap<usize, usize> {
    let mut dist = BTreeMap::from([(0, 0)]);
    let mut frontier = vec![0];
    let mut d = 0;
    while !frontier.is_empty() {
        d += 1;
        let mut next = Vec::new();
        for &i in &frontier {
            for j in 0..alphabets.len() {
                if !dist.contains_key(&j) && !alphabets[i].is_disjoint(&alphabets[j]) {
                    dist.insert(j, d);
                    next.push(j);
                }
            }
        }
        frontier = next;
    }
    dist
}

/// A spec with one variable per alphabet whose actions only stutter.
pub fn synthetic(alphabets: &[BTreeSet<String>]) -> Vec<SpecAst> {
    alphabets
        .iter()
        .enumerate()
        .map(|(i, alpha)| {
            let mut src = format!("MODULE C{i}\nVARIABLES v{i}\n\nINIT\n  /\\ v{i} = 0\n");
            for a in alpha {
                src += &format!("\nACTION {a}\n  /\\ v{i}' = v{i}\n");
            }
            recomp::spec_lang::parse(&src).unwrap()
        })
        .collect()
}

pub fn random_alphabets(rng: &mut impl Rng) -> Vec<BTreeSet<String>> {
    let n = rng.gen_range(1..=7);
    let pool = rng.gen_range(2..=9);
    (0..n)
        .map(|_| {
            let k = rng.gen_range(1..=3);
            (0..k).map(|_| format!("a{}", rng.gen_range(0..pool))).collect()
        })
        .collect()
}

