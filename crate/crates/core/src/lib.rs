//! Compositional explicit-state safety model checking.
//!
//! A specification is split into components over disjoint variable sets,
//! the components are regrouped by a recomposition map, and the groups are
//! checked one after another against an error automaton for the property,
//! stopping as soon as the error state becomes unreachable.

pub mod spec_lang;
pub mod corpus;
pub mod enumerator;
pub mod lts;
pub mod decomposer;
pub mod recomposer;
pub mod heuristics;
pub mod engine;
