//! Parallel composition: synchronise on shared labels, interleave the rest.

use std::collections::VecDeque;

use hashbrown::HashMap;

use thiserror::Error;

use super::{ConcreteAction, Lts, TAU};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComposeError {
    #[error("both operands carry an error state")]
    BothPi,
}

/// Reachable product of `a` and `b`. Product states in which either side is
/// in its error state collapse into one absorbing error state.
pub fn compose(a: &Lts, b: &Lts) -> Result<Lts, ComposeError> {
    if a.pi.is_some() && b.pi.is_some() {
        return Err(ComposeError::BothPi);
    }
    let mut alphabet: Vec<ConcreteAction> = a.alphabet.clone();
    let a_index: HashMap<&ConcreteAction, u32> =
        a.alphabet.iter().enumerate().map(|(i, x)| (x, i as u32)).collect();
    // b label -> (union label, shared?)
    let mut b_map = Vec::with_capacity(b.alphabet.len());
    for x in &b.alphabet {
        match a_index.get(x) {
            Some(&i) => b_map.push((i, true)),
            None => {
                alphabet.push(x.clone());
                b_map.push((alphabet.len() as u32 - 1, false));
            }
        }
    }
    // a label -> matching b label, if shared
    let mut a_shared: Vec<Option<u32>> = vec![None; a.alphabet.len()];
    for (j, &(i, shared)) in b_map.iter().enumerate() {
        if shared {
            a_shared[i as usize] = Some(j as u32);
        }
    }

    const PI: u32 = u32::MAX;
    let mut ids: HashMap<(u32, u32), u32> = HashMap::new();
    let mut coords: Vec<(u32, u32)> = Vec::new();
    let mut queue = VecDeque::new();
    let mut uses_pi = false;
    let mut lookup = |p: u32, q: u32, coords: &mut Vec<(u32, u32)>, queue: &mut VecDeque<u32>| -> u32 {
        if Some(p) == a.pi || Some(q) == b.pi {
            return PI;
        }
        *ids.entry((p, q)).or_insert_with(|| {
            let id = coords.len() as u32;
            coords.push((p, q));
            queue.push_back(id);
            id
        })
    };

    let mut initials = Vec::new();
    for &p in &a.initials {
        for &q in &b.initials {
            initials.push(lookup(p, q, &mut coords, &mut queue));
        }
    }
    let mut transitions: Vec<(u32, u32, u32)> = Vec::new();
    while let Some(s) = queue.pop_front() {
        let (p, q) = coords[s as usize];
        let b_edges = b.edges(q);
        for &(l, p2) in a.edges(p) {
            match (l != TAU).then(|| a_shared[l as usize]).flatten() {
                Some(bl) => {
                    let start = b_edges.partition_point(|e| e.0 < bl);
                    for &(_, q2) in b_edges[start..].iter().take_while(|e| e.0 == bl) {
                        let t = lookup(p2, q2, &mut coords, &mut queue);
                        transitions.push((s, l, t));
                    }
                }
                None => {
                    let t = lookup(p2, q, &mut coords, &mut queue);
                    transitions.push((s, l, t));
                }
            }
        }
        for &(l, q2) in b_edges {
            let (ul, shared) = if l == TAU { (TAU, false) } else { b_map[l as usize] };
            if !shared {
                let t = lookup(p, q2, &mut coords, &mut queue);
                transitions.push((s, ul, t));
            }
        }
    }
    let n = coords.len() as u32;
    for t in transitions.iter_mut() {
        if t.2 == PI {
            t.2 = n;
            uses_pi = true;
        }
    }
    for i in initials.iter_mut() {
        if *i == PI {
            *i = n;
            uses_pi = true;
        }
    }
    let (size, pi) = if uses_pi { (n as usize + 1, Some(n)) } else { (n as usize, None) };
    Ok(Lts::from_transitions(alphabet, size, transitions, initials, pi))
}

/// Left fold of [`compose`] starting from the unit.
pub fn compose_all<'a>(items: impl IntoIterator<Item = &'a Lts>) -> Result<Lts, ComposeError> {
    let mut acc = Lts::unit();
    for x in items {
        acc = compose(&acc, x)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn act(name: &str) -> ConcreteAction {
        ConcreteAction::new(name, None)
    }

    #[test]
    fn shared_labels_synchronise() {
        // a: 0 -x-> 1 -y-> 2 ; b: 0 -y-> 1
        let a = Lts::from_transitions(vec![act("x"), act("y")], 3, vec![(0, 0, 1), (1, 1, 2)], vec![0], None);
        let b = Lts::from_transitions(vec![act("y")], 2, vec![(0, 0, 1)], vec![0], None);
        let c = compose(&a, &b).unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c.num_transitions(), 2);
        // b cannot move on its own
        let b2 = Lts::from_transitions(vec![act("z")], 2, vec![(0, 0, 1)], vec![0], None);
        let c2 = compose(&a, &b2).unwrap();
        assert_eq!(c2.len(), 6);
    }

    #[test]
    fn unit_is_identity() {
        let a = Lts::from_transitions(vec![act("x")], 2, vec![(0, 0, 1), (1, 0, 0)], vec![0], None);
        assert_eq!(compose(&a, &Lts::unit()).unwrap(), a);
    }

    #[test]
    fn error_states_collapse() {
        let a = Lts::from_transitions(vec![act("x")], 2, vec![(0, 0, 1)], vec![0], Some(1));
        let b = Lts::from_transitions(vec![act("y")], 2, vec![(0, 0, 1)], vec![0], None);
        let c = compose(&a, &b).unwrap();
        assert!(c.pi_reachable());
        // (0,0) (0,1) and a single error state
        assert_eq!(c.len(), 3);
        assert!(matches!(compose(&a, &a), Err(ComposeError::BothPi)));
    }
}
