//! Bounded trace sets, used as an oracle for equivalences between systems.

use std::collections::{BTreeSet, VecDeque};

use super::{ConcreteAction, Lts, TAU};

pub type Trace = Vec<ConcreteAction>;

fn tau_closure(lts: &Lts, set: &mut BTreeSet<u32>) {
    let mut queue: VecDeque<u32> = set.iter().copied().collect();
    while let Some(s) = queue.pop_front() {
        for &(l, t) in lts.edges(s) {
            if l == TAU && set.insert(t) {
                queue.push_back(t);
            }
        }
    }
}

/// All visible traces of length at most `len`. Traces that reach the error
/// state are extended through its self-loops like any other.
///
/// With `super_alphabet`, actions outside the system's own alphabet are
/// allowed at every step without changing state.
pub fn trace_set(lts: &Lts, len: usize, super_alphabet: Option<&[ConcreteAction]>) -> BTreeSet<Trace> {
    let own = lts.alphabet();
    let extra: Vec<ConcreteAction> = super_alphabet
        .map(|sa| sa.iter().filter(|a| !own.contains(a)).cloned().collect())
        .unwrap_or_default();
    let mut out = BTreeSet::new();
    let mut start: BTreeSet<u32> = lts.initials().iter().copied().collect();
    tau_closure(lts, &mut start);
    if start.is_empty() {
        return out;
    }
    let mut frontier: Vec<(Trace, BTreeSet<u32>)> = vec![(Vec::new(), start)];
    out.insert(Vec::new());
    for _ in 0..len {
        let mut next = Vec::new();
        for (trace, states) in &frontier {
            for (l, a) in own.iter().enumerate() {
                let mut succ = BTreeSet::new();
                for &s in states {
                    let e = lts.edges(s);
                    let from = e.partition_point(|x| x.0 < l as u32);
                    succ.extend(e[from..].iter().take_while(|x| x.0 == l as u32).map(|x| x.1));
                }
                if succ.is_empty() {
                    continue;
                }
                tau_closure(lts, &mut succ);
                let mut t = trace.clone();
                t.push(a.clone());
                out.insert(t.clone());
                next.push((t, succ));
            }
            for a in &extra {
                let mut t = trace.clone();
                t.push(a.clone());
                out.insert(t.clone());
                next.push((t, states.clone()));
            }
        }
        frontier = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn act(name: &str) -> ConcreteAction {
        ConcreteAction::new(name, None)
    }

    #[test]
    fn silent_steps_are_skipped() {
        let l = Lts::from_transitions(vec![act("a")], 3, vec![(0, TAU, 1), (1, 0, 2)], vec![0], None);
        let t = trace_set(&l, 2, None);
        assert_eq!(t.len(), 2);
        assert!(t.contains(&vec![act("a")]));
    }

    #[test]
    fn extra_actions_stutter() {
        let l = Lts::from_transitions(vec![act("a")], 2, vec![(0, 0, 1)], vec![0], None);
        let t = trace_set(&l, 2, Some(&[act("a"), act("b")]));
        // "", a, b, ab, ba, bb
        assert_eq!(t.len(), 6);
    }
}
