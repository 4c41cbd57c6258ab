//! Breadth-first state-graph generation.

use std::hash::BuildHasher;
use std::sync::atomic::Ordering;
use std::sync::Arc;

use hashbrown::DefaultHashBuilder;
use hashbrown::{HashMap, HashTable};

use super::{CompiledProperty, EnumError, Limits, Model, Value};
use crate::lts::Lts;
use crate::spec_lang::{PropertyDef, SpecAst};

/// Result of an exploration.
#[derive(Debug, Clone)]
pub struct Explored {
    pub lts: Lts,
    /// Distinct states generated, including property-violating ones that
    /// were folded into the error state.
    pub generated: usize,
}

/// Values are interned per variable so that a state is a row of `u32`s.
#[derive(Default)]
struct Interner {
    values: Vec<Value>,
    index: HashMap<Value, u32>,
}

impl Interner {
    fn intern(&mut self, v: &Value) -> u32 {
        if let Some(&i) = self.index.get(v) {
            return i;
        }
        let i = self.values.len() as u32;
        self.values.push(v.clone());
        self.index.insert(v.clone(), i);
        i
    }
}

struct Store {
    width: usize,
    count: usize,
    arena: Vec<u32>,
    table: HashTable<u32>,
    hasher: DefaultHashBuilder,
    interners: Vec<Interner>,
}

impl Store {
    fn new(width: usize) -> Self {
        Self {
            width,
            count: 0,
            arena: Vec::new(),
            table: HashTable::new(),
            hasher: DefaultHashBuilder::default(),
            interners: (0..width).map(|_| Interner::default()).collect(),
        }
    }

    fn row(&self, id: u32) -> &[u32] {
        let start = id as usize * self.width;
        &self.arena[start..start + self.width]
    }

    /// Returns the id of the state and whether it was new. `from` names a
    /// stored state whose decoded values are given; variables that still
    /// share its storage reuse its key without rehashing.
    fn insert(&mut self, values: &[Value], key: &mut Vec<u32>, from: Option<(u32, &[Value])>) -> (u32, bool) {
        key.clear();
        for (i, v) in values.iter().enumerate() {
            let reused = from
                .filter(|(_, old)| same_storage(&old[i], v))
                .map(|(id, _)| self.arena[id as usize * self.width + i]);
            key.push(match reused {
                Some(k) => k,
                None => self.interners[i].intern(v),
            });
        }
        let hash = self.hasher.hash_one(key.as_slice());
        let (arena, width) = (&self.arena, self.width);
        let row = |id: u32| &arena[id as usize * width..(id as usize + 1) * width];
        if let Some(&id) = self.table.find(hash, |&id| row(id) == key.as_slice()) {
            return (id, false);
        }
        let id = self.count as u32;
        let hasher = &self.hasher;
        self.table
            .insert_unique(hash, id, |&id| hasher.hash_one(&arena[id as usize * width..(id as usize + 1) * width]));
        self.arena.extend_from_slice(key);
        self.count += 1;
        (id, true)
    }

    fn decode(&self, id: u32) -> Vec<Value> {
        self.row(id)
            .iter()
            .enumerate()
            .map(|(i, &x)| self.interners[i].values[x as usize].clone())
            .collect()
    }
}

fn same_storage(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Bool(x), Value::Bool(y)) => x == y,
        (Value::Int(x), Value::Int(y)) => x == y,
        (Value::Str(x), Value::Str(y)) => Arc::ptr_eq(x, y),
        (Value::Set(x), Value::Set(y)) | (Value::Tuple(x), Value::Tuple(y)) => Arc::ptr_eq(x, y),
        (Value::Record(x), Value::Record(y)) => Arc::ptr_eq(x, y),
        (Value::Func(x), Value::Func(y)) => Arc::ptr_eq(x, y),
        _ => false,
    }
}

const PI_MARK: u32 = u32::MAX - 1;

/// Explores the reachable state graph. With a property, every state that
/// violates it is replaced by a single absorbing error state.
pub(crate) fn explore(model: &Model, property: Option<&CompiledProperty>, limits: &Limits) -> Result<Explored, EnumError> {
    let mut store = Store::new(model.variables().len());
    // Store id -> LTS id (or PI_MARK).
    let mut lts_id: Vec<u32> = Vec::new();
    let mut next_lts = 0u32;
    let mut key = Vec::new();
    let mut classify = |values: &[Value], lts_id: &mut Vec<u32>| -> Result<u32, EnumError> {
        let ok = match property {
            Some(p) => p.holds(values)?,
            None => true,
        };
        let id = if ok {
            next_lts += 1;
            next_lts - 1
        } else {
            PI_MARK
        };
        lts_id.push(id);
        Ok(id)
    };

    let mut initials = Vec::new();
    for s in model.initial_states() {
        let (id, new) = store.insert(&s, &mut key, None);
        if new {
            classify(&s, &mut lts_id)?;
        }
        initials.push(lts_id[id as usize]);
    }

    let mut offsets = vec![0u32];
    let mut edges: Vec<(u32, u32)> = Vec::new();
    let mut succ = Vec::new();
    let mut slots = Vec::new();
    let mut local = Vec::new();
    let mut uses_pi = initials.contains(&PI_MARK);
    let mut processed = 0usize;
    let mut id = 0u32;
    while (id as usize) < store.count {
        if lts_id[id as usize] == PI_MARK {
            id += 1;
            continue;
        }
        processed += 1;
        if processed % 256 == 0 {
            if let Some(c) = &limits.cancel {
                if c.load(Ordering::Relaxed) {
                    return Err(EnumError::Cancelled);
                }
            }
        }
        let cur = store.decode(id);
        succ.clear();
        model.successors_into(&cur, &mut slots, &mut succ)?;
        local.clear();
        for (label, next) in succ.drain(..) {
            let (nid, new) = store.insert(&next, &mut key, Some((id, &cur)));
            if new {
                if store.count > limits.bound {
                    return Err(EnumError::StateBoundExceeded(limits.bound));
                }
                classify(&next, &mut lts_id)?;
            }
            let target = lts_id[nid as usize];
            uses_pi |= target == PI_MARK;
            local.push((label, target));
        }
        local.sort_unstable();
        local.dedup();
        edges.extend_from_slice(&local);
        offsets.push(edges.len() as u32);
        id += 1;
    }

    let alphabet = model.alphabet().to_vec();
    let pi = if uses_pi {
        let p = next_lts;
        for e in edges.iter_mut() {
            if e.1 == PI_MARK {
                e.1 = p;
            }
        }
        // PI_MARK and `p` both exceed every real target, so per-state edge
        // lists stay sorted.
        for i in &mut initials {
            if *i == PI_MARK {
                *i = p;
            }
        }
        edges.extend((0..alphabet.len() as u32).map(|l| (l, p)));
        offsets.push(edges.len() as u32);
        Some(p)
    } else {
        None
    };
    initials.sort_unstable();
    initials.dedup();
    Ok(Explored {
        lts: Lts::from_csr(alphabet, offsets, edges, initials, pi),
        generated: store.count,
    })
}

/// The full state graph of a spec.
pub fn to_lts(spec: &SpecAst, limits: &Limits) -> Result<Explored, EnumError> {
    let model = Model::new(spec)?;
    explore(&model, None, limits)
}

/// The state graph with every property-violating state folded into an
/// absorbing error state.
pub fn err_lts(spec: &SpecAst, property: &PropertyDef, limits: &Limits) -> Result<Explored, EnumError> {
    let model = Model::new(spec)?;
    let p = model.compile_property(property)?;
    explore(&model, Some(&p), limits)
}
