//! Expression compilation and evaluation.
//!
//! Expressions are compiled once per spec: state variables become indices,
//! constants are substituted by their values, and bound names become slots
//! on an evaluation stack.

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use super::value::Value;
use crate::spec_lang::{BinOp, Expr, PathElem, Quantifier};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("type mismatch: expected {expected}, found {found}")]
    TypeMismatch { expected: &'static str, found: String },
    #[error("{arg} is outside the domain of {func}")]
    OutsideDomain { func: String, arg: String },
    #[error("integer overflow")]
    Overflow,
    #[error("unbound identifier '{0}'")]
    Unbound(String),
    #[error("{0}")]
    Unsupported(String),
}

fn mismatch(expected: &'static str, found: &Value) -> EvalError {
    EvalError::TypeMismatch {
        expected,
        found: found.to_string(),
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Step {
    Index(CExpr),
    Field(Arc<str>),
}

/// A compiled expression.
#[derive(Debug, Clone)]
pub(crate) enum CExpr {
    Lit(Value),
    Var(usize),
    Slot(usize),
    SetLit(Vec<CExpr>),
    Tuple(Vec<CExpr>),
    Record(Vec<(Arc<str>, CExpr)>),
    /// Binds one slot while evaluating the body.
    FuncLit(Box<CExpr>, Box<CExpr>),
    Apply(Box<CExpr>, Box<CExpr>),
    Field(Box<CExpr>, Arc<str>),
    Except(Box<CExpr>, Vec<(Vec<Step>, CExpr)>),
    Binary(BinOp, Box<CExpr>, Box<CExpr>),
    Not(Box<CExpr>),
    /// Binds `arity` slots.
    Quant {
        forall: bool,
        arity: usize,
        domain: Box<CExpr>,
        body: Box<CExpr>,
    },
    If(Box<CExpr>, Box<CExpr>, Box<CExpr>),
    Cardinality(Box<CExpr>),
}

/// Name resolution for compilation.
pub(crate) struct Scope<'a> {
    pub vars: &'a HashMap<String, usize>,
    pub constants: &'a HashMap<String, Value>,
    pub bound: Vec<String>,
}

impl<'a> Scope<'a> {
    pub fn new(vars: &'a HashMap<String, usize>, constants: &'a HashMap<String, Value>) -> Self {
        Self {
            vars,
            constants,
            bound: Vec::new(),
        }
    }

    pub fn compile(&mut self, e: &Expr) -> Result<CExpr, EvalError> {
        let c = match e {
            Expr::Bool(b) => CExpr::Lit(Value::Bool(*b)),
            Expr::Int(n) => CExpr::Lit(Value::Int(*n)),
            Expr::Str(s) => CExpr::Lit(Value::str(s)),
            Expr::Var(v) => CExpr::Var(*self.vars.get(v).ok_or_else(|| EvalError::Unbound(v.clone()))?),
            Expr::Const(c) => CExpr::Lit(
                self.constants
                    .get(c)
                    .cloned()
                    .ok_or_else(|| EvalError::Unbound(c.clone()))?,
            ),
            Expr::Bound(b) => {
                let slot = self
                    .bound
                    .iter()
                    .rposition(|x| x == b)
                    .ok_or_else(|| EvalError::Unbound(b.clone()))?;
                CExpr::Slot(slot)
            }
            Expr::Primed(v) => {
                return Err(EvalError::Unsupported(format!(
                    "primed variable {v}' outside an update"
                )))
            }
            Expr::Unchanged(_) => {
                return Err(EvalError::Unsupported("UNCHANGED outside a top-level conjunct".into()))
            }
            Expr::SetLit(es) => CExpr::SetLit(self.compile_all(es)?),
            Expr::Tuple(es) => CExpr::Tuple(self.compile_all(es)?),
            Expr::RecordLit(fs) => CExpr::Record(
                fs.iter()
                    .map(|(k, v)| Ok((Arc::from(k.as_str()), self.compile(v)?)))
                    .collect::<Result<_, EvalError>>()?,
            ),
            Expr::FuncLit { var, domain, body } => {
                let domain = self.compile(domain)?;
                self.bound.push(var.clone());
                let body = self.compile(body);
                self.bound.pop();
                CExpr::FuncLit(Box::new(domain), Box::new(body?))
            }
            Expr::Apply(f, a) => CExpr::Apply(Box::new(self.compile(f)?), Box::new(self.compile(a)?)),
            Expr::Field(r, name) => CExpr::Field(Box::new(self.compile(r)?), Arc::from(name.as_str())),
            Expr::Except { base, updates } => {
                let base = self.compile(base)?;
                let mut out = Vec::new();
                for (path, v) in updates {
                    let mut steps = Vec::new();
                    for p in path {
                        steps.push(match p {
                            PathElem::Index(i) => Step::Index(self.compile(i)?),
                            PathElem::Field(f) => Step::Field(Arc::from(f.as_str())),
                        });
                    }
                    out.push((steps, self.compile(v)?));
                }
                CExpr::Except(Box::new(base), out)
            }
            Expr::Binary(op, l, r) => CExpr::Binary(*op, Box::new(self.compile(l)?), Box::new(self.compile(r)?)),
            Expr::Not(inner) => CExpr::Not(Box::new(self.compile(inner)?)),
            Expr::Quant {
                kind,
                vars,
                domain,
                body,
            } => {
                let domain = self.compile(domain)?;
                let depth = self.bound.len();
                self.bound.extend(vars.iter().cloned());
                let body = self.compile(body);
                self.bound.truncate(depth);
                CExpr::Quant {
                    forall: *kind == Quantifier::Forall,
                    arity: vars.len(),
                    domain: Box::new(domain),
                    body: Box::new(body?),
                }
            }
            Expr::If { cond, then, els } => CExpr::If(
                Box::new(self.compile(cond)?),
                Box::new(self.compile(then)?),
                Box::new(self.compile(els)?),
            ),
            Expr::Cardinality(inner) => CExpr::Cardinality(Box::new(self.compile(inner)?)),
        };
        Ok(fold(c))
    }

    fn compile_all(&mut self, es: &[Expr]) -> Result<Vec<CExpr>, EvalError> {
        es.iter().map(|e| self.compile(e)).collect()
    }
}

/// Evaluates nodes whose operands are all literals. Errors are left for
/// evaluation time so that an unreachable ill-typed branch stays harmless.
fn fold(c: CExpr) -> CExpr {
    let lit = |e: &CExpr| matches!(e, CExpr::Lit(_));
    let foldable = match &c {
        CExpr::SetLit(es) | CExpr::Tuple(es) => es.iter().all(lit),
        CExpr::Record(fs) => fs.iter().all(|(_, e)| lit(e)),
        CExpr::Apply(a, b) | CExpr::Binary(_, a, b) => lit(a) && lit(b),
        CExpr::Field(e, _) | CExpr::Not(e) | CExpr::Cardinality(e) => lit(e),
        _ => false,
    };
    if !foldable {
        return c;
    }
    match c.eval(&[], &mut Vec::new()) {
        Ok(v) => CExpr::Lit(v),
        Err(_) => c,
    }
}

fn as_bool(v: &Value) -> Result<bool, EvalError> {
    match v {
        Value::Bool(b) => Ok(*b),
        other => Err(mismatch("boolean", other)),
    }
}

fn as_int(v: &Value) -> Result<i64, EvalError> {
    match v {
        Value::Int(n) => Ok(*n),
        other => Err(mismatch("integer", other)),
    }
}

fn as_set(v: &Value) -> Result<&[Value], EvalError> {
    v.as_set().ok_or_else(|| mismatch("set", v))
}

/// Looks up `f[arg]` for functions, tuples (1-based) and records.
pub(crate) fn apply(f: &Value, arg: &Value) -> Result<Value, EvalError> {
    let outside = || EvalError::OutsideDomain {
        func: f.to_string(),
        arg: arg.to_string(),
    };
    match (f, arg) {
        (Value::Func(pairs), _) => pairs
            .binary_search_by(|(k, _)| k.cmp(arg))
            .map(|i| pairs[i].1.clone())
            .map_err(|_| outside()),
        (Value::Tuple(items), Value::Int(i)) => usize::try_from(*i)
            .ok()
            .and_then(|i| i.checked_sub(1))
            .and_then(|i| items.get(i))
            .cloned()
            .ok_or_else(outside),
        (Value::Record(fields), Value::Str(name)) => field(fields, name).ok_or_else(outside),
        (other, _) => Err(mismatch("function", other)),
    }
}

fn field(fields: &[(Arc<str>, Value)], name: &str) -> Option<Value> {
    fields
        .binary_search_by(|(k, _)| k.as_ref().cmp(name))
        .ok()
        .map(|i| fields[i].1.clone())
}

fn update_at(base: &Value, path: &[Value], new: Value) -> Result<Value, EvalError> {
    let Some((head, rest)) = path.split_first() else {
        return Ok(new);
    };
    let outside = || EvalError::OutsideDomain {
        func: base.to_string(),
        arg: head.to_string(),
    };
    match base {
        Value::Func(pairs) => {
            let i = pairs.binary_search_by(|(k, _)| k.cmp(head)).map_err(|_| outside())?;
            let mut v: Vec<(Value, Value)> = pairs.to_vec();
            v[i].1 = update_at(&pairs[i].1, rest, new)?;
            Ok(Value::Func(v.into()))
        }
        Value::Record(fields) => {
            let Value::Str(name) = head else {
                return Err(outside());
            };
            let i = fields
                .binary_search_by(|(k, _)| k.as_ref().cmp(name.as_ref()))
                .map_err(|_| outside())?;
            let mut v = fields.to_vec();
            v[i].1 = update_at(&fields[i].1, rest, new)?;
            Ok(Value::Record(v.into()))
        }
        Value::Tuple(items) => {
            let i = match head {
                Value::Int(i) if *i >= 1 && (*i as usize) <= items.len() => *i as usize - 1,
                _ => return Err(outside()),
            };
            let mut v = items.to_vec();
            v[i] = update_at(&items[i], rest, new)?;
            Ok(Value::Tuple(v.into()))
        }
        other => Err(mismatch("function", other)),
    }
}

/// Borrowing counterpart of [`apply`]; `None` when `arg` is outside the domain.
fn lookup<'v>(f: &'v Value, arg: &Value) -> Option<&'v Value> {
    match (f, arg) {
        (Value::Func(pairs), _) => pairs.binary_search_by(|(k, _)| k.cmp(arg)).ok().map(|i| &pairs[i].1),
        (Value::Tuple(items), Value::Int(i)) => usize::try_from(*i).ok()?.checked_sub(1).and_then(|i| items.get(i)),
        (Value::Record(fields), Value::Str(name)) => fields
            .binary_search_by(|(k, _)| k.as_ref().cmp(name))
            .ok()
            .map(|i| &fields[i].1),
        _ => None,
    }
}

impl CExpr {
    /// The value of a literal, variable, slot, or a chain of applications
    /// over those, without cloning. `None` for anything else, including
    /// failed lookups, which [`CExpr::eval`] then reports.
    fn peek<'v>(&'v self, cur: &'v [Value], slots: &'v [Value]) -> Option<&'v Value> {
        match self {
            CExpr::Lit(v) => Some(v),
            CExpr::Var(i) => cur.get(*i),
            CExpr::Slot(i) => slots.get(*i),
            CExpr::Apply(f, a) => lookup(f.peek(cur, slots)?, a.peek(cur, slots)?),
            CExpr::Field(r, name) => match r.peek(cur, slots)? {
                Value::Record(fs) => fs.binary_search_by(|(k, _)| k.as_ref().cmp(name)).ok().map(|i| &fs[i].1),
                _ => None,
            },
            _ => None,
        }
    }

    /// Evaluates against the current state `cur`; `slots` holds bound values.
    pub fn eval(&self, cur: &[Value], slots: &mut Vec<Value>) -> Result<Value, EvalError> {
        if matches!(self, CExpr::Apply(..) | CExpr::Field(..)) {
            if let Some(v) = self.peek(cur, slots) {
                return Ok(v.clone());
            }
        }
        Ok(match self {
            CExpr::Lit(v) => v.clone(),
            CExpr::Var(i) => cur[*i].clone(),
            CExpr::Slot(i) => slots[*i].clone(),
            CExpr::SetLit(es) => Value::set(es.iter().map(|e| e.eval(cur, slots)).collect::<Result<_, _>>()?),
            CExpr::Tuple(es) => Value::tuple(es.iter().map(|e| e.eval(cur, slots)).collect::<Result<_, _>>()?),
            CExpr::Record(fs) => Value::record(
                fs.iter()
                    .map(|(k, e)| Ok((k.clone(), e.eval(cur, slots)?)))
                    .collect::<Result<_, EvalError>>()?,
            ),
            CExpr::FuncLit(domain, body) => {
                let d = domain.eval(cur, slots)?;
                let mut pairs = Vec::new();
                for k in as_set(&d)? {
                    slots.push(k.clone());
                    let v = body.eval(cur, slots);
                    slots.pop();
                    pairs.push((k.clone(), v?));
                }
                // Domain is already sorted and unique.
                Value::Func(pairs.into())
            }
            CExpr::Apply(f, a) => apply(&f.eval(cur, slots)?, &a.eval(cur, slots)?)?,
            CExpr::Field(r, name) => match r.eval(cur, slots)? {
                Value::Record(fs) => field(&fs, name).ok_or_else(|| EvalError::OutsideDomain {
                    func: Value::Record(fs.clone()).to_string(),
                    arg: name.to_string(),
                })?,
                other => return Err(mismatch("record", &other)),
            },
            CExpr::Except(base, updates) => {
                let mut v = base.eval(cur, slots)?;
                for (steps, new) in updates {
                    let mut path = Vec::with_capacity(steps.len());
                    for s in steps {
                        path.push(match s {
                            Step::Index(e) => e.eval(cur, slots)?,
                            Step::Field(f) => Value::Str(f.clone()),
                        });
                    }
                    let new = new.eval(cur, slots)?;
                    v = update_at(&v, &path, new)?;
                }
                v
            }
            CExpr::Binary(op, l, r) => return binary(*op, l, r, cur, slots),
            CExpr::Not(e) => Value::Bool(!as_bool(&e.eval(cur, slots)?)?),
            CExpr::Quant {
                forall,
                arity,
                domain,
                body,
            } => {
                let d = domain.eval(cur, slots)?;
                let items = as_set(&d)?;
                let found = quant(*forall, *arity, items, body, cur, slots)?;
                Value::Bool(found)
            }
            CExpr::If(c, t, e) => {
                if as_bool(&c.eval(cur, slots)?)? {
                    t.eval(cur, slots)?
                } else {
                    e.eval(cur, slots)?
                }
            }
            CExpr::Cardinality(e) => {
                let v = e.eval(cur, slots)?;
                Value::Int(as_set(&v)?.len() as i64)
            }
        })
    }

    pub fn eval_bool(&self, cur: &[Value], slots: &mut Vec<Value>) -> Result<bool, EvalError> {
        as_bool(&self.eval(cur, slots)?)
    }
}

/// `\A` returns whether the body holds everywhere, `\E` whether it holds
/// somewhere, over all `arity`-tuples drawn from `items`.
fn quant(
    forall: bool,
    arity: usize,
    items: &[Value],
    body: &CExpr,
    cur: &[Value],
    slots: &mut Vec<Value>,
) -> Result<bool, EvalError> {
    if arity == 0 {
        let b = body.eval_bool(cur, slots)?;
        return Ok(b);
    }
    for v in items {
        slots.push(v.clone());
        let r = quant(forall, arity - 1, items, body, cur, slots);
        slots.pop();
        let r = r?;
        if r != forall {
            return Ok(r);
        }
    }
    Ok(forall)
}

fn binary(op: BinOp, l: &CExpr, r: &CExpr, cur: &[Value], slots: &mut Vec<Value>) -> Result<Value, EvalError> {
    // Short-circuiting connectives first.
    match op {
        BinOp::And => {
            return Ok(Value::Bool(
                l.eval_bool(cur, slots)? && r.eval_bool(cur, slots)?,
            ))
        }
        BinOp::Or => {
            return Ok(Value::Bool(
                l.eval_bool(cur, slots)? || r.eval_bool(cur, slots)?,
            ))
        }
        BinOp::Implies => {
            return Ok(Value::Bool(
                !l.eval_bool(cur, slots)? || r.eval_bool(cur, slots)?,
            ))
        }
        _ => {}
    }
    if let (Some(a), Some(b)) = (l.peek(cur, slots), r.peek(cur, slots)) {
        match op {
            BinOp::Eq => return Ok(Value::Bool(a == b)),
            BinOp::Neq => return Ok(Value::Bool(a != b)),
            BinOp::In => return Ok(Value::Bool(as_set(b)?.binary_search(a).is_ok())),
            BinOp::NotIn => return Ok(Value::Bool(as_set(b)?.binary_search(a).is_err())),
            _ => {}
        }
    }
    let a = l.eval(cur, slots)?;
    let b = r.eval(cur, slots)?;
    let int2 = |a: &Value, b: &Value| -> Result<(i64, i64), EvalError> { Ok((as_int(a)?, as_int(b)?)) };
    Ok(match op {
        BinOp::Eq => Value::Bool(a == b),
        BinOp::Neq => Value::Bool(a != b),
        BinOp::In => Value::Bool(as_set(&b)?.binary_search(&a).is_ok()),
        BinOp::NotIn => Value::Bool(as_set(&b)?.binary_search(&a).is_err()),
        BinOp::Subseteq => {
            let sb = as_set(&b)?;
            Value::Bool(as_set(&a)?.iter().all(|x| sb.binary_search(x).is_ok()))
        }
        BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
            let (x, y) = int2(&a, &b)?;
            Value::Bool(match op {
                BinOp::Lt => x < y,
                BinOp::Le => x <= y,
                BinOp::Gt => x > y,
                _ => x >= y,
            })
        }
        BinOp::Add | BinOp::Sub | BinOp::Mul => {
            let (x, y) = int2(&a, &b)?;
            let r = match op {
                BinOp::Add => x.checked_add(y),
                BinOp::Sub => x.checked_sub(y),
                _ => x.checked_mul(y),
            };
            Value::Int(r.ok_or(EvalError::Overflow)?)
        }
        BinOp::Mod => {
            let (x, y) = int2(&a, &b)?;
            if y <= 0 {
                return Err(EvalError::Unsupported(format!("modulus {y} is not positive")));
            }
            Value::Int(x.rem_euclid(y))
        }
        BinOp::Range => {
            let (x, y) = int2(&a, &b)?;
            Value::Set((x..=y).map(Value::Int).collect::<Vec<_>>().into())
        }
        BinOp::Union => {
            let mut v = as_set(&a)?.to_vec();
            v.extend_from_slice(as_set(&b)?);
            Value::set(v)
        }
        BinOp::Intersect => {
            let sb = as_set(&b)?;
            Value::Set(
                as_set(&a)?
                    .iter()
                    .filter(|x| sb.binary_search(x).is_ok())
                    .cloned()
                    .collect::<Vec<_>>()
                    .into(),
            )
        }
        BinOp::SetMinus => {
            let sb = as_set(&b)?;
            Value::Set(
                as_set(&a)?
                    .iter()
                    .filter(|x| sb.binary_search(x).is_err())
                    .cloned()
                    .collect::<Vec<_>>()
                    .into(),
            )
        }
        BinOp::Cross => {
            let sb = as_set(&b)?;
            let mut v = Vec::new();
            for x in as_set(&a)? {
                for y in sb {
                    v.push(Value::tuple(vec![x.clone(), y.clone()]));
                }
            }
            Value::Set(v.into())
        }
        BinOp::MapsTo => Value::Func(vec![(a, b)].into()),
        BinOp::Merge => match (&a, &b) {
            (Value::Func(f), Value::Func(g)) => {
                let mut pairs = f.to_vec();
                pairs.extend(g.iter().cloned());
                Value::func(pairs)
            }
            (Value::Func(_), other) | (other, _) => return Err(mismatch("function", other)),
        },
        BinOp::And | BinOp::Or | BinOp::Implies => unreachable!("handled above"),
    })
}

/// Evaluates an expression that mentions neither state variables nor
/// constants.
pub fn eval_closed(e: &Expr) -> Result<Value, EvalError> {
    let vars = HashMap::new();
    let consts = HashMap::new();
    Scope::new(&vars, &consts).compile(e)?.eval(&[], &mut Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec_lang::parse_closed_expr;

    fn ev(src: &str) -> Value {
        eval_closed(&parse_closed_expr(src).unwrap()).unwrap()
    }

    #[test]
    fn arithmetic_and_sets() {
        assert_eq!(ev("1 + 2 * 3"), Value::Int(7));
        assert_eq!(ev("-7 % 3"), Value::Int(2));
        assert_eq!(ev("{3, 1} \\union {2, 3}"), ev("1..3"));
        assert_eq!(ev("Cardinality({1, 2} \\X {\"a\"})"), Value::Int(2));
        assert_eq!(ev("{1, 2, 3} \\ {2}"), ev("{1, 3}"));
        assert_eq!(ev("\\A x \\in 1..3 : \\E y \\in 1..3 : y > x \\/ x = 3"), Value::Bool(true));
    }

    #[test]
    fn functions_records_except() {
        assert_eq!(ev("[x \\in 1..3 |-> x * x][2]"), Value::Int(4));
        assert_eq!(ev("[[a |-> 1, b |-> 2] EXCEPT !.a = 5].a"), Value::Int(5));
        assert_eq!(ev("[[x \\in {1} |-> <<0, 0>>] EXCEPT ![1][2] = 9][1]"), ev("<<0, 9>>"));
        assert_eq!(ev("(1 :> 2 @@ 1 :> 3)[1]"), Value::Int(2));
        assert!(matches!(
            eval_closed(&parse_closed_expr("[x \\in 1..2 |-> 0][5]").unwrap()),
            Err(EvalError::OutsideDomain { .. })
        ));
        assert!(matches!(
            eval_closed(&parse_closed_expr("1 + TRUE").unwrap()),
            Err(EvalError::TypeMismatch { .. })
        ));
    }

    #[test]
    fn display_reparses_to_same_value() {
        for src in [
            "[x \\in {\"a\", \"b\"} |-> {1, -2}]",
            "[x \\in {} |-> 0]",
            "<<TRUE, \"s\", [f |-> <<>>]>>",
            "{[type |-> \"Prepared\", theRM |-> \"rm1\"]}",
            "[x \\in 1..2 |-> [y \\in 1..2 |-> x - y]]",
        ] {
            let v = ev(src);
            assert_eq!(ev(&v.to_string()), v, "{src} -> {v}");
        }
    }
}
