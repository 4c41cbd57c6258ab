//! Bisimulation minimization by signature-based partition refinement.

use hashbrown::HashMap;

use super::{ConcreteAction, Lts, TAU};

/// Equivalence used by [`minimize`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MinimizeMode {
    /// Strong bisimulation; silent labels are treated like any other label.
    #[default]
    Strong,
    /// Branching bisimulation over [`TAU`]-labelled transitions.
    Observational,
}

/// Relabels every action for which `keep` is false to [`TAU`] and drops it
/// from the alphabet.
pub fn hide(lts: &Lts, keep: impl Fn(&ConcreteAction) -> bool) -> Lts {
    let mut alphabet = Vec::new();
    let remap: Vec<u32> = lts
        .alphabet()
        .iter()
        .map(|a| {
            if keep(a) {
                alphabet.push(a.clone());
                alphabet.len() as u32 - 1
            } else {
                TAU
            }
        })
        .collect();
    let transitions = lts
        .transitions()
        .filter(|&(s, _, _)| Some(s) != lts.pi())
        .map(|(s, l, t)| (s, if l == TAU { TAU } else { remap[l as usize] }, t))
        .collect();
    Lts::from_transitions(alphabet, lts.len(), transitions, lts.initials().to_vec(), lts.pi())
}

/// Initial partition: the error state alone, everything else together.
fn initial_blocks(lts: &Lts) -> Vec<u32> {
    let mut block = vec![0u32; lts.len()];
    if let Some(p) = lts.pi() {
        block[p as usize] = 1;
    }
    block
}

fn count_blocks(block: &[u32]) -> usize {
    block.iter().copied().max().map_or(0, |m| m as usize + 1)
}

/// Strong bisimulation classes.
fn strong_classes(lts: &Lts) -> Vec<u32> {
    let mut block = initial_blocks(lts);
    let mut blocks = count_blocks(&block);
    let mut sig: Vec<(u32, u32)> = Vec::new();
    loop {
        let mut ids: HashMap<(u32, Vec<(u32, u32)>), u32> = HashMap::new();
        let mut next = Vec::with_capacity(block.len());
        for s in 0..lts.len() as u32 {
            sig.clear();
            sig.extend(lts.edges(s).iter().map(|&(l, t)| (l, block[t as usize])));
            sig.sort_unstable();
            sig.dedup();
            let n = ids.len() as u32;
            let id = *ids.entry((block[s as usize], sig.clone())).or_insert(n);
            next.push(id);
        }
        let new_blocks = ids.len();
        block = next;
        if new_blocks == blocks {
            return block;
        }
        blocks = new_blocks;
    }
}

/// Collapses strongly connected components of the silent-transition graph.
/// Returns the component of every state and the number of components; the
/// components are numbered in reverse topological order (sinks first).
fn tau_sccs(lts: &Lts) -> (Vec<u32>, usize) {
    const NONE: u32 = u32::MAX;
    let n = lts.len();
    let mut index = vec![NONE; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![NONE; n];
    let mut stack: Vec<u32> = Vec::new();
    let mut counter = 0u32;
    let mut ncomp = 0u32;
    let taus = |s: u32| {
        let e = lts.edges(s);
        let start = e.partition_point(|x| x.0 < TAU);
        &e[start..]
    };
    // Iterative Tarjan: frames of (state, next edge position).
    let mut call: Vec<(u32, usize)> = Vec::new();
    for root in 0..n as u32 {
        if index[root as usize] != NONE {
            continue;
        }
        call.push((root, 0));
        index[root as usize] = counter;
        low[root as usize] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root as usize] = true;
        while let Some(&mut (s, ref mut pos)) = call.last_mut() {
            let succ = taus(s);
            if *pos < succ.len() {
                let t = succ[*pos].1;
                *pos += 1;
                if index[t as usize] == NONE {
                    index[t as usize] = counter;
                    low[t as usize] = counter;
                    counter += 1;
                    stack.push(t);
                    on_stack[t as usize] = true;
                    call.push((t, 0));
                } else if on_stack[t as usize] {
                    low[s as usize] = low[s as usize].min(index[t as usize]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent as usize] = low[parent as usize].min(low[s as usize]);
                }
                if low[s as usize] == index[s as usize] {
                    loop {
                        let x = stack.pop().expect("tarjan stack");
                        on_stack[x as usize] = false;
                        comp[x as usize] = ncomp;
                        if x == s {
                            break;
                        }
                    }
                    ncomp += 1;
                }
            }
        }
    }
    (comp, ncomp as usize)
}

/// Quotient of `lts` by a state partition, restricted to reachable blocks.
/// Silent self-loops on blocks are dropped when `drop_inert` is set.
fn quotient(lts: &Lts, block: &[u32], drop_inert: bool) -> Lts {
    let n = count_blocks(block);
    let transitions = lts
        .transitions()
        .map(|(s, l, t)| (block[s as usize], l, block[t as usize]))
        .filter(|&(s, l, t)| !(drop_inert && l == TAU && s == t))
        .collect();
    let initials = lts.initials().iter().map(|&i| block[i as usize]).collect();
    let pi = lts.pi().map(|p| block[p as usize]);
    Lts::from_transitions(lts.alphabet().to_vec(), n, transitions, initials, pi).trim()
}

/// Branching bisimulation classes of an LTS without silent cycles, where
/// `order` lists states so that every silent successor comes first.
fn branching_classes(lts: &Lts, order: &[u32]) -> Vec<u32> {
    let mut block = initial_blocks(lts);
    let mut blocks = count_blocks(&block);
    let mut sigs: Vec<Vec<(u32, u32)>> = vec![Vec::new(); lts.len()];
    loop {
        for &s in order {
            let bs = block[s as usize];
            let mut sig: Vec<(u32, u32)> = Vec::new();
            for &(l, t) in lts.edges(s) {
                let bt = block[t as usize];
                if l == TAU && bt == bs {
                    // Inert step: inherit what the target can do.
                    sig.extend_from_slice(&sigs[t as usize]);
                } else {
                    sig.push((l, bt));
                }
            }
            sig.sort_unstable();
            sig.dedup();
            sigs[s as usize] = sig;
        }
        let mut ids: HashMap<(u32, &[(u32, u32)]), u32> = HashMap::new();
        let mut next = Vec::with_capacity(block.len());
        for s in 0..lts.len() {
            let n = ids.len() as u32;
            next.push(*ids.entry((block[s], sigs[s].as_slice())).or_insert(n));
        }
        let new_blocks = ids.len();
        drop(ids);
        block = next;
        if new_blocks == blocks {
            return block;
        }
        blocks = new_blocks;
    }
}

/// Minimizes `lts` modulo the chosen bisimulation. The error state keeps
/// its own class. Unreachable states are removed first.
pub fn minimize(lts: &Lts, mode: MinimizeMode) -> Lts {
    let lts = lts.trim();
    match mode {
        MinimizeMode::Strong => quotient(&lts, &strong_classes(&lts), false),
        MinimizeMode::Observational => {
            let (comp, _) = tau_sccs(&lts);
            // The error state never has silent edges, so it stays a
            // singleton component.
            let collapsed = quotient(&lts, &comp, true);
            // Components from the collapsed graph are renumbered by `trim`,
            // so recompute an order on the result.
            let (comp2, ncomp) = tau_sccs(&collapsed);
            let mut order: Vec<u32> = (0..collapsed.len() as u32).collect();
            order.sort_by_key(|&s| comp2[s as usize]);
            debug_assert_eq!(ncomp, collapsed.len());
            quotient(&collapsed, &branching_classes(&collapsed, &order), true)
        }
    }
}

/// Strong bisimilarity of the initial states, with the error states of both
/// systems required to match each other.
pub fn bisimilar(a: &Lts, b: &Lts) -> bool {
    // Disjoint union over a merged alphabet.
    let mut alphabet = a.alphabet().to_vec();
    let mut index: HashMap<ConcreteAction, u32> =
        alphabet.iter().enumerate().map(|(i, x)| (x.clone(), i as u32)).collect();
    let b_map: Vec<u32> = b
        .alphabet()
        .iter()
        .map(|x| {
            *index.entry(x.clone()).or_insert_with(|| {
                alphabet.push(x.clone());
                alphabet.len() as u32 - 1
            })
        })
        .collect();
    let off = a.len() as u32;
    let mut transitions: Vec<(u32, u32, u32)> = a.transitions().collect();
    transitions.extend(
        b.transitions()
            .map(|(s, l, t)| (s + off, if l == TAU { TAU } else { b_map[l as usize] }, t + off)),
    );
    let n = a.len() + b.len();
    let mut block = vec![0u32; n];
    for p in a.pi().into_iter().chain(b.pi().map(|p| p + off)) {
        block[p as usize] = 1;
    }
    // Self-loops of the error states are already in the transition lists.
    let union = Lts::from_transitions(alphabet, n, transitions, Vec::new(), None);
    let classes = refine_from(&union, block);
    let ia: std::collections::BTreeSet<u32> = a.initials().iter().map(|&i| classes[i as usize]).collect();
    let ib: std::collections::BTreeSet<u32> = b.initials().iter().map(|&i| classes[(i + off) as usize]).collect();
    ia == ib
}

fn refine_from(lts: &Lts, mut block: Vec<u32>) -> Vec<u32> {
    let mut blocks = count_blocks(&block);
    loop {
        let mut ids: HashMap<(u32, Vec<(u32, u32)>), u32> = HashMap::new();
        let mut next = Vec::with_capacity(block.len());
        for s in 0..lts.len() as u32 {
            let mut sig: Vec<(u32, u32)> = lts.edges(s).iter().map(|&(l, t)| (l, block[t as usize])).collect();
            sig.sort_unstable();
            sig.dedup();
            let n = ids.len() as u32;
            next.push(*ids.entry((block[s as usize], sig)).or_insert(n));
        }
        let new_blocks = ids.len();
        block = next;
        if new_blocks == blocks {
            return block;
        }
        blocks = new_blocks;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn act(name: &str) -> ConcreteAction {
        ConcreteAction::new(name, None)
    }

    #[test]
    fn strong_merges_equivalent_branches() {
        // 0 -a-> 1, 0 -a-> 2, 1 -b-> 3, 2 -b-> 4
        let l = Lts::from_transitions(
            vec![act("a"), act("b")],
            5,
            vec![(0, 0, 1), (0, 0, 2), (1, 1, 3), (2, 1, 4)],
            vec![0],
            None,
        );
        let m = minimize(&l, MinimizeMode::Strong);
        assert_eq!(m.len(), 3);
        assert!(bisimilar(&l, &m));
    }

    #[test]
    fn one_state_is_fixed_point() {
        let u = Lts::unit();
        assert_eq!(minimize(&u, MinimizeMode::Strong), u);
        assert_eq!(minimize(&u, MinimizeMode::Observational), u);
    }

    #[test]
    fn branching_removes_inert_steps() {
        // 0 -tau-> 1 -a-> 2 ; the silent step is inert.
        let l = Lts::from_transitions(vec![act("a")], 3, vec![(0, TAU, 1), (1, 0, 2)], vec![0], None);
        let m = minimize(&l, MinimizeMode::Observational);
        assert_eq!(m.len(), 2);
        // A silent step into the error state is not inert.
        let e = Lts::from_transitions(vec![act("a")], 3, vec![(0, TAU, 1), (0, 0, 2)], vec![0], Some(1));
        let m = minimize(&e, MinimizeMode::Observational);
        assert!(m.pi_reachable());
    }

    #[test]
    fn hide_keeps_error_self_loops_on_visible_labels() {
        let l = Lts::from_transitions(vec![act("a"), act("b")], 2, vec![(0, 0, 1)], vec![0], Some(1));
        let h = hide(&l, |a| &*a.name == "b");
        assert_eq!(h.alphabet().len(), 1);
        assert!(h.pi_reachable());
        assert_eq!(h.edges(1), &[(0, 1)]);
    }
}
