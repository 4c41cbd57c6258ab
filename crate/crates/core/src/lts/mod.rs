//! Labeled transition systems and their algebra: parallel composition,
//! reachability of the error state, minimization and trace oracles.

mod compose;
mod minimize;
mod traces;

use std::collections::VecDeque;
use std::fmt::{self, Write};
use std::sync::Arc;

use crate::enumerator::Value;

pub use compose::{compose, compose_all, ComposeError};
pub use minimize::{bisimilar, hide, minimize, MinimizeMode};
pub use traces::{trace_set, Trace};

/// A concrete action: an action name together with its argument.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConcreteAction {
    pub name: Arc<str>,
    pub arg: Option<Value>,
}

impl ConcreteAction {
    pub fn new(name: &str, arg: Option<Value>) -> Self {
        Self {
            name: Arc::from(name),
            arg,
        }
    }
}

impl fmt::Display for ConcreteAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.arg {
            Some(a) => write!(f, "{}({a})", self.name),
            None => f.write_str(&self.name),
        }
    }
}

/// Label used for hidden (silent) transitions. Never part of the alphabet.
pub const TAU: u32 = u32::MAX;

/// An explicit LTS. States are `0..len()`; transitions are stored per source
/// state, sorted by `(label, target)`, with labels indexing `alphabet`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lts {
    alphabet: Vec<ConcreteAction>,
    offsets: Vec<u32>,
    edges: Vec<(u32, u32)>,
    initials: Vec<u32>,
    pi: Option<u32>,
}

impl Lts {
    /// The unit of composition: one initial state, empty alphabet.
    pub fn unit() -> Self {
        Self::from_transitions(Vec::new(), 1, Vec::new(), vec![0], None)
    }

    /// Builds an LTS from a transition list. Labels index `alphabet` (or are
    /// [`TAU`]). If `pi` is given it receives self-loops on every label.
    pub fn from_transitions(
        alphabet: Vec<ConcreteAction>,
        num_states: usize,
        mut transitions: Vec<(u32, u32, u32)>,
        mut initials: Vec<u32>,
        pi: Option<u32>,
    ) -> Self {
        if let Some(p) = pi {
            transitions.retain(|t| t.0 != p);
            transitions.extend((0..alphabet.len() as u32).map(|l| (p, l, p)));
        }
        transitions.sort_unstable();
        transitions.dedup();
        let mut offsets = vec![0u32; num_states + 1];
        for &(s, l, t) in &transitions {
            assert!((s as usize) < num_states && (t as usize) < num_states, "transition endpoint out of range");
            assert!(l == TAU || (l as usize) < alphabet.len(), "label out of range");
            offsets[s as usize + 1] += 1;
        }
        for i in 0..num_states {
            offsets[i + 1] += offsets[i];
        }
        let edges = transitions.into_iter().map(|(_, l, t)| (l, t)).collect();
        initials.sort_unstable();
        initials.dedup();
        Self {
            alphabet,
            offsets,
            edges,
            initials,
            pi,
        }
    }

    /// Assembles an LTS from already sorted CSR parts.
    pub(crate) fn from_csr(
        alphabet: Vec<ConcreteAction>,
        offsets: Vec<u32>,
        edges: Vec<(u32, u32)>,
        initials: Vec<u32>,
        pi: Option<u32>,
    ) -> Self {
        debug_assert_eq!(*offsets.last().unwrap() as usize, edges.len());
        Self {
            alphabet,
            offsets,
            edges,
            initials,
            pi,
        }
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn num_transitions(&self) -> usize {
        self.edges.len()
    }

    pub fn alphabet(&self) -> &[ConcreteAction] {
        &self.alphabet
    }

    pub fn initials(&self) -> &[u32] {
        &self.initials
    }

    pub fn pi(&self) -> Option<u32> {
        self.pi
    }

    /// Outgoing `(label, target)` pairs of state `s`, sorted.
    pub fn edges(&self, s: u32) -> &[(u32, u32)] {
        let s = s as usize;
        &self.edges[self.offsets[s] as usize..self.offsets[s + 1] as usize]
    }

    /// All transitions as `(source, label, target)`.
    pub fn transitions(&self) -> impl Iterator<Item = (u32, u32, u32)> + '_ {
        (0..self.len() as u32).flat_map(move |s| self.edges(s).iter().map(move |&(l, t)| (s, l, t)))
    }

    pub fn label_of(&self, l: u32) -> Option<&ConcreteAction> {
        self.alphabet.get(l as usize)
    }

    /// Replaces the alphabet by a superset, keeping every action's identity.
    /// Labels are remapped; `pi` gains the new self-loops.
    pub fn with_alphabet(&self, alphabet: Vec<ConcreteAction>) -> Lts {
        let index: std::collections::HashMap<&ConcreteAction, u32> =
            alphabet.iter().enumerate().map(|(i, a)| (a, i as u32)).collect();
        let remap: Vec<u32> = self
            .alphabet
            .iter()
            .map(|a| *index.get(a).expect("new alphabet must contain the old one"))
            .collect();
        let transitions = self
            .transitions()
            .map(|(s, l, t)| (s, if l == TAU { TAU } else { remap[l as usize] }, t))
            .collect();
        Lts::from_transitions(alphabet, self.len(), transitions, self.initials.clone(), self.pi)
    }

    /// Breadth-first reachability from the initial states.
    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut queue: VecDeque<u32> = VecDeque::new();
        for &i in &self.initials {
            if !seen[i as usize] {
                seen[i as usize] = true;
                queue.push_back(i);
            }
        }
        while let Some(s) = queue.pop_front() {
            for &(_, t) in self.edges(s) {
                if !seen[t as usize] {
                    seen[t as usize] = true;
                    queue.push_back(t);
                }
            }
        }
        seen
    }

    /// True iff the error state exists and is reachable.
    pub fn pi_reachable(&self) -> bool {
        match self.pi {
            Some(p) => self.reachable()[p as usize],
            None => false,
        }
    }

    /// A shortest label sequence from an initial state to the error state.
    pub fn pi_witness(&self) -> Option<Vec<ConcreteAction>> {
        let pi = self.pi?;
        let mut parent: Vec<Option<(u32, u32)>> = vec![None; self.len()];
        let mut seen = vec![false; self.len()];
        let mut queue = VecDeque::new();
        for &i in &self.initials {
            if !seen[i as usize] {
                seen[i as usize] = true;
                queue.push_back(i);
            }
        }
        while let Some(s) = queue.pop_front() {
            if s == pi {
                let mut trace = Vec::new();
                let mut cur = s;
                while let Some((prev, l)) = parent[cur as usize] {
                    if l != TAU {
                        trace.push(self.alphabet[l as usize].clone());
                    }
                    cur = prev;
                }
                trace.reverse();
                return Some(trace);
            }
            for &(l, t) in self.edges(s) {
                if !seen[t as usize] {
                    seen[t as usize] = true;
                    parent[t as usize] = Some((s, l));
                    queue.push_back(t);
                }
            }
        }
        None
    }

    /// Drops unreachable states and renumbers the rest in BFS order.
    pub fn trim(&self) -> Lts {
        let mut order = vec![u32::MAX; self.len()];
        let mut queue = VecDeque::new();
        let mut next = 0u32;
        for &i in &self.initials {
            if order[i as usize] == u32::MAX {
                order[i as usize] = next;
                next += 1;
                queue.push_back(i);
            }
        }
        while let Some(s) = queue.pop_front() {
            for &(_, t) in self.edges(s) {
                if order[t as usize] == u32::MAX {
                    order[t as usize] = next;
                    next += 1;
                    queue.push_back(t);
                }
            }
        }
        let transitions = self
            .transitions()
            .filter(|&(s, _, _)| order[s as usize] != u32::MAX)
            .map(|(s, l, t)| (order[s as usize], l, order[t as usize]))
            .collect();
        let initials = self.initials.iter().map(|&i| order[i as usize]).collect();
        let pi = self.pi.and_then(|p| match order[p as usize] {
            u32::MAX => None,
            q => Some(q),
        });
        Lts::from_transitions(self.alphabet.clone(), next as usize, transitions, initials, pi)
    }

    /// Textual dump: header lines, then one `src action dst` line per edge.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "states {}", self.len());
        let inits: Vec<String> = self.initials.iter().map(u32::to_string).collect();
        let _ = writeln!(out, "initial {}", inits.join(" "));
        if let Some(p) = self.pi {
            let _ = writeln!(out, "pi {p}");
        }
        for (s, l, t) in self.transitions() {
            match self.label_of(l) {
                Some(a) => {
                    let _ = writeln!(out, "{s} {a} {t}");
                }
                None => {
                    let _ = writeln!(out, "{s} tau {t}");
                }
            }
        }
        out
    }
}
