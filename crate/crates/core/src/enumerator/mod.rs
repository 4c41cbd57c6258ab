//! Explicit-state semantics of specifications: initial states, successors,
//! and full state-graph generation into an [`Lts`].

mod eval;
mod explore;
mod value;

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::AtomicBool;
use std::sync::Arc;

use thiserror::Error;

pub use eval::{eval_closed, EvalError};
pub use explore::{err_lts, to_lts, Explored};
pub use value::Value;

use crate::lts::ConcreteAction;
use crate::spec_lang::{classify, init_target, BinOp, ConjunctKind, Expr, PropertyDef, SpecAst};
use eval::{CExpr, Scope};

/// Default cap on the number of generated states.
pub const DEFAULT_BOUND: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumError {
    #[error("state bound of {0} exceeded")]
    StateBoundExceeded(usize),
    #[error("cancelled")]
    Cancelled,
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error("action {action} leaves variable '{var}' unconstrained")]
    Unconstrained { action: String, var: String },
    #[error("invalid Init: {0}")]
    Init(String),
    #[error("property {property} mentions variable '{var}' which is not in the spec")]
    PropertyScope { property: String, var: String },
    #[error("constant '{0}' has no value")]
    UnboundConstant(String),
}

/// Resource limits for one enumeration.
#[derive(Debug, Clone)]
pub struct Limits {
    pub bound: usize,
    pub cancel: Option<Arc<AtomicBool>>,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            bound: DEFAULT_BOUND,
            cancel: None,
        }
    }
}

impl Limits {
    pub fn with_bound(bound: usize) -> Self {
        Self { bound, cancel: None }
    }
}

/// A state as an assignment to the spec's variables.
pub type State = BTreeMap<String, Value>;

struct CompiledAction {
    /// Parameter values, or `None` for a parameterless action.
    domain: Option<Vec<Value>>,
    guards: Vec<CExpr>,
    updates: Vec<(usize, CExpr)>,
    frames: Vec<usize>,
    /// Alphabet index of the first concrete instance.
    label_base: u32,
}

/// A spec compiled for evaluation.
pub struct Model {
    vars: Vec<String>,
    var_index: HashMap<String, usize>,
    constants: HashMap<String, Value>,
    /// Candidate values per variable, in variable order.
    init: Vec<Vec<Value>>,
    actions: Vec<CompiledAction>,
    alphabet: Vec<ConcreteAction>,
}

impl Model {
    pub fn new(spec: &SpecAst) -> Result<Model, EnumError> {
        let constants = eval_constants(spec)?;
        let var_index: HashMap<String, usize> =
            spec.variables.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();

        let mut init: Vec<Option<Vec<Value>>> = vec![None; spec.variables.len()];
        for c in &spec.init {
            let v = init_target(c).ok_or_else(|| EnumError::Init(format!("'{c}' is not of the form v = e or v \\in e")))?;
            let idx = *var_index
                .get(v)
                .ok_or_else(|| EnumError::Init(format!("'{v}' is not a variable")))?;
            let Expr::Binary(op, _, rhs) = c else { unreachable!() };
            let value = Scope::new(&var_index, &constants).compile(rhs)?.eval(&[], &mut Vec::new())?;
            let candidates = if *op == BinOp::Eq {
                vec![value]
            } else {
                value
                    .as_set()
                    .ok_or_else(|| EvalError::TypeMismatch {
                        expected: "set",
                        found: value.to_string(),
                    })?
                    .to_vec()
            };
            init[idx] = Some(match init[idx].take() {
                None => candidates,
                Some(prev) => prev.into_iter().filter(|x| candidates.contains(x)).collect(),
            });
        }
        let init = init
            .into_iter()
            .zip(&spec.variables)
            .map(|(c, v)| c.ok_or_else(|| EnumError::Init(format!("variable '{v}' has no Init conjunct"))))
            .collect::<Result<Vec<_>, _>>()?;

        let mut actions = Vec::new();
        let mut alphabet = Vec::new();
        for a in &spec.actions {
            let mut scope = Scope::new(&var_index, &constants);
            let domain = match &a.param {
                Some(p) => {
                    let d = scope.compile(&p.domain)?.eval(&[], &mut Vec::new())?;
                    let items = d
                        .as_set()
                        .ok_or_else(|| EvalError::TypeMismatch {
                            expected: "set",
                            found: d.to_string(),
                        })?
                        .to_vec();
                    scope.bound.push(p.name.clone());
                    Some(items)
                }
                None => None,
            };
            let mut guards = Vec::new();
            let mut updates = Vec::new();
            let mut frames = Vec::new();
            let mut constrained = vec![false; spec.variables.len()];
            for c in &a.conjuncts {
                match classify(c) {
                    Some(ConjunctKind::Guard) => guards.push(scope.compile(c)?),
                    Some(ConjunctKind::Update(v)) => {
                        let idx = var_index[&v];
                        let Expr::Binary(_, _, rhs) = c else { unreachable!() };
                        updates.push((idx, scope.compile(rhs)?));
                        constrained[idx] = true;
                    }
                    Some(ConjunctKind::Frame(vs)) => {
                        for v in vs {
                            let idx = *var_index.get(&v).ok_or_else(|| EvalError::Unbound(v.clone()))?;
                            frames.push(idx);
                            constrained[idx] = true;
                        }
                    }
                    None => {
                        return Err(EvalError::Unsupported(format!(
                            "action {}: conjunct '{c}' has primes in an unsupported position",
                            a.name
                        ))
                        .into())
                    }
                }
            }
            if let Some(i) = constrained.iter().position(|c| !c) {
                return Err(EnumError::Unconstrained {
                    action: a.name.clone(),
                    var: spec.variables[i].clone(),
                });
            }
            let name: Arc<str> = Arc::from(a.name.as_str());
            let label_base = alphabet.len() as u32;
            match &domain {
                Some(items) => alphabet.extend(items.iter().map(|d| ConcreteAction {
                    name: name.clone(),
                    arg: Some(d.clone()),
                })),
                None => alphabet.push(ConcreteAction { name, arg: None }),
            }
            actions.push(CompiledAction {
                domain,
                guards,
                updates,
                frames,
                label_base,
            });
        }
        Ok(Model {
            vars: spec.variables.clone(),
            var_index,
            constants,
            init,
            actions,
            alphabet,
        })
    }

    pub fn variables(&self) -> &[String] {
        &self.vars
    }

    /// Every concrete action the spec can syntactically perform.
    pub fn alphabet(&self) -> &[ConcreteAction] {
        &self.alphabet
    }

    /// Initial states in lexicographic order of the per-variable candidates.
    pub fn initial_states(&self) -> Vec<Vec<Value>> {
        let mut out = vec![Vec::with_capacity(self.vars.len())];
        for candidates in &self.init {
            let mut next = Vec::with_capacity(out.len() * candidates.len());
            for prefix in &out {
                for c in candidates {
                    let mut s = prefix.clone();
                    s.push(c.clone());
                    next.push(s);
                }
            }
            out = next;
        }
        out
    }

    /// Appends `(label, successor)` pairs of `cur` to `out`.
    pub(crate) fn successors_into(
        &self,
        cur: &[Value],
        slots: &mut Vec<Value>,
        out: &mut Vec<(u32, Vec<Value>)>,
    ) -> Result<(), EvalError> {
        for a in &self.actions {
            match &a.domain {
                None => {
                    if let Some(next) = self.step(a, cur, slots)? {
                        out.push((a.label_base, next));
                    }
                }
                Some(items) => {
                    for (i, d) in items.iter().enumerate() {
                        slots.clear();
                        slots.push(d.clone());
                        if let Some(next) = self.step(a, cur, slots)? {
                            out.push((a.label_base + i as u32, next));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn step(&self, a: &CompiledAction, cur: &[Value], slots: &mut Vec<Value>) -> Result<Option<Vec<Value>>, EvalError> {
        for g in &a.guards {
            if !g.eval_bool(cur, slots)? {
                return Ok(None);
            }
        }
        let mut next: Vec<Option<Value>> = vec![None; cur.len()];
        for (idx, e) in &a.updates {
            let v = e.eval(cur, slots)?;
            match &next[*idx] {
                Some(prev) if *prev != v => return Ok(None),
                _ => next[*idx] = Some(v),
            }
        }
        for &idx in &a.frames {
            match &next[idx] {
                Some(prev) if *prev != cur[idx] => return Ok(None),
                _ => next[idx] = Some(cur[idx].clone()),
            }
        }
        Ok(Some(next.into_iter().map(|v| v.expect("checked at compile time")).collect()))
    }

    /// Compiles a state predicate against this model's variables.
    pub fn compile_property(&self, p: &PropertyDef) -> Result<CompiledProperty, EnumError> {
        for v in p.free_vars() {
            if !self.var_index.contains_key(&v) {
                return Err(EnumError::PropertyScope {
                    property: p.name.clone(),
                    var: v,
                });
            }
        }
        Ok(CompiledProperty(Scope::new(&self.var_index, &self.constants).compile(&p.body)?))
    }

    pub fn to_state(&self, values: &[Value]) -> State {
        self.vars.iter().cloned().zip(values.iter().cloned()).collect()
    }

    fn from_state(&self, state: &State) -> Result<Vec<Value>, EvalError> {
        self.vars
            .iter()
            .map(|v| state.get(v).cloned().ok_or_else(|| EvalError::Unbound(v.clone())))
            .collect()
    }
}

/// A compiled state predicate.
pub struct CompiledProperty(CExpr);

impl CompiledProperty {
    pub fn holds(&self, values: &[Value]) -> Result<bool, EvalError> {
        self.0.eval_bool(values, &mut Vec::new())
    }
}

fn eval_constants(spec: &SpecAst) -> Result<HashMap<String, Value>, EnumError> {
    let empty = HashMap::new();
    let mut constants = HashMap::new();
    for (name, e) in &spec.config {
        let v = Scope::new(&empty, &constants).compile(e)?.eval(&[], &mut Vec::new())?;
        constants.insert(name.clone(), v);
    }
    for c in &spec.constants {
        if !constants.contains_key(c) {
            return Err(EnumError::UnboundConstant(c.clone()));
        }
    }
    Ok(constants)
}

/// Evaluates `e` in `state` with the given bound names.
pub fn eval(spec: &SpecAst, e: &Expr, state: &State, bindings: &[(String, Value)]) -> Result<Value, EnumError> {
    let model = Model::new(spec)?;
    let mut scope = Scope::new(&model.var_index, &model.constants);
    let mut slots = Vec::new();
    for (name, v) in bindings {
        scope.bound.push(name.clone());
        slots.push(v.clone());
    }
    let c = scope.compile(e)?;
    let cur = model.from_state(state)?;
    Ok(c.eval(&cur, &mut slots)?)
}

/// All states satisfying Init.
pub fn init_states(spec: &SpecAst) -> Result<Vec<State>, EnumError> {
    let model = Model::new(spec)?;
    Ok(model.initial_states().iter().map(|s| model.to_state(s)).collect())
}

/// All `(action, successor)` pairs of `state`.
pub fn successors(spec: &SpecAst, state: &State) -> Result<Vec<(ConcreteAction, State)>, EnumError> {
    let model = Model::new(spec)?;
    let cur = model.from_state(state)?;
    let mut out = Vec::new();
    model.successors_into(&cur, &mut Vec::new(), &mut out)?;
    Ok(out
        .into_iter()
        .map(|(l, s)| (model.alphabet[l as usize].clone(), model.to_state(&s)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::spec_lang::parse_expr_in;

    #[test]
    fn twophase_initial_state() {
        let tp = corpus::load(corpus::TWOPHASE_PREPARE);
        let inits = init_states(&tp).unwrap();
        assert_eq!(inits.len(), 1);
        let s = &inits[0];
        assert_eq!(s["msgs"], Value::empty_set());
        assert_eq!(s["tmState"], Value::str("init"));
        let Value::Func(rm) = &s["rmState"] else { panic!() };
        assert!(rm.iter().all(|(_, v)| *v == Value::str("working")));
    }

    #[test]
    fn eval_examples_in_state() {
        let tp = corpus::load(corpus::TWOPHASE_PREPARE);
        let s = &init_states(&tp).unwrap()[0];
        let vars = tp.variables.clone();
        let consts = tp.constants.clone();
        let e = parse_expr_in(
            "rmState[\"rm1\"] = \"aborted\" /\\ rmState[\"rm2\"] = \"committed\"",
            &consts,
            &vars,
        )
        .unwrap();
        assert_eq!(eval(&tp, &e, s, &[]).unwrap(), Value::Bool(false));
        let e = parse_expr_in("tmPrepared \\union {rm}", &consts, &vars);
        // `rm` is not declared in this scope, so resolution fails.
        assert!(e.is_err());
        let u = Expr::binary(
            BinOp::Union,
            Expr::Var("tmPrepared".into()),
            Expr::SetLit(vec![Expr::Bound("rm".into())]),
        );
        let v = eval(&tp, &u, s, &[("rm".into(), Value::str("rm1"))]).unwrap();
        assert_eq!(v, Value::set(vec![Value::str("rm1")]));
    }

    #[test]
    fn initial_successors_are_prepares() {
        let tp = corpus::twophase(3);
        let s = &init_states(&tp).unwrap()[0];
        let succ = successors(&tp, s).unwrap();
        // Full protocol: three prepares, three spontaneous aborts, TM abort.
        let prepares = succ.iter().filter(|(a, _)| &*a.name == "SndPrepare").count();
        assert_eq!(prepares, 3);
        let tp = corpus::load(corpus::TWOPHASE_PREPARE);
        let succ = successors(&tp, &init_states(&tp).unwrap()[0]).unwrap();
        assert_eq!(succ.len(), 3);
        assert!(succ.iter().all(|(a, _)| &*a.name == "SndPrepare"));
    }

    #[test]
    fn unconstrained_variable_is_an_error() {
        let mut tp = corpus::load(corpus::TWOPHASE_PREPARE);
        tp.actions[0].conjuncts.pop();
        assert!(matches!(Model::new(&tp), Err(EnumError::Unconstrained { .. })));
    }
}
