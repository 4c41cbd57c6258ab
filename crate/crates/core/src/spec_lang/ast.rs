//! Abstract syntax for specifications.

use std::collections::BTreeSet;
use std::fmt;

/// Binary operators of the expression language.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinOp {
    Implies,
    Or,
    And,
    Eq,
    Neq,
    In,
    NotIn,
    Subseteq,
    Lt,
    Le,
    Gt,
    Ge,
    Range,
    Union,
    Intersect,
    SetMinus,
    Cross,
    Add,
    Sub,
    Mul,
    Mod,
    /// `k :> v`, the single-point function.
    MapsTo,
    /// `f @@ g`, function merge (left operand wins).
    Merge,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Implies => "=>",
            BinOp::Or => "\\/",
            BinOp::And => "/\\",
            BinOp::Eq => "=",
            BinOp::Neq => "/=",
            BinOp::In => "\\in",
            BinOp::NotIn => "\\notin",
            BinOp::Subseteq => "\\subseteq",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Range => "..",
            BinOp::Union => "\\union",
            BinOp::Intersect => "\\intersect",
            BinOp::SetMinus => "\\",
            BinOp::Cross => "\\X",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Mod => "%",
            BinOp::MapsTo => ":>",
            BinOp::Merge => "@@",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Quantifier {
    Forall,
    Exists,
}

/// One step of an `EXCEPT` path: `![e]` or `!.field`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PathElem {
    Index(Expr),
    Field(String),
}

/// Expression tree. Identifiers are resolved at parse time into state
/// variables, constants and bound names.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Bool(bool),
    Int(i64),
    Str(String),
    Var(String),
    Primed(String),
    Const(String),
    Bound(String),
    SetLit(Vec<Expr>),
    Tuple(Vec<Expr>),
    RecordLit(Vec<(String, Expr)>),
    FuncLit {
        var: String,
        domain: Box<Expr>,
        body: Box<Expr>,
    },
    Apply(Box<Expr>, Box<Expr>),
    Field(Box<Expr>, String),
    Except {
        base: Box<Expr>,
        updates: Vec<(Vec<PathElem>, Expr)>,
    },
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    Quant {
        kind: Quantifier,
        vars: Vec<String>,
        domain: Box<Expr>,
        body: Box<Expr>,
    },
    If {
        cond: Box<Expr>,
        then: Box<Expr>,
        els: Box<Expr>,
    },
    Cardinality(Box<Expr>),
    /// `UNCHANGED <<v1, ..., vk>>`.
    Unchanged(Vec<String>),
}

impl Expr {
    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    /// Left-folded conjunction; `TRUE` for an empty list.
    pub fn conjunction(parts: impl IntoIterator<Item = Expr>) -> Expr {
        parts
            .into_iter()
            .reduce(|acc, e| Expr::binary(BinOp::And, acc, e))
            .unwrap_or(Expr::Bool(true))
    }

    /// Flattens nested top-level conjunctions into a list.
    pub fn flatten_and(self) -> Vec<Expr> {
        let mut out = Vec::new();
        fn go(e: Expr, out: &mut Vec<Expr>) {
            match e {
                Expr::Binary(BinOp::And, l, r) => {
                    go(*l, out);
                    go(*r, out);
                }
                other => out.push(other),
            }
        }
        go(self, &mut out);
        out
    }

    /// Visits every node in pre-order.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::Bool(_)
            | Expr::Int(_)
            | Expr::Str(_)
            | Expr::Var(_)
            | Expr::Primed(_)
            | Expr::Const(_)
            | Expr::Bound(_)
            | Expr::Unchanged(_) => {}
            Expr::SetLit(es) | Expr::Tuple(es) => es.iter().for_each(|e| e.walk(f)),
            Expr::RecordLit(fs) => fs.iter().for_each(|(_, e)| e.walk(f)),
            Expr::FuncLit { domain, body, .. } => {
                domain.walk(f);
                body.walk(f);
            }
            Expr::Apply(a, b) | Expr::Binary(_, a, b) => {
                a.walk(f);
                b.walk(f);
            }
            Expr::Field(e, _) | Expr::Not(e) | Expr::Cardinality(e) => e.walk(f),
            Expr::Except { base, updates } => {
                base.walk(f);
                for (path, e) in updates {
                    for p in path {
                        if let PathElem::Index(i) = p {
                            i.walk(f);
                        }
                    }
                    e.walk(f);
                }
            }
            Expr::Quant { domain, body, .. } => {
                domain.walk(f);
                body.walk(f);
            }
            Expr::If { cond, then, els } => {
                cond.walk(f);
                then.walk(f);
                els.walk(f);
            }
        }
    }

    /// State variables occurring in the expression, primed or not.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| match e {
            Expr::Var(v) | Expr::Primed(v) => {
                out.insert(v.clone());
            }
            Expr::Unchanged(vs) => out.extend(vs.iter().cloned()),
            _ => {}
        });
        out
    }

    /// Variables occurring primed (including those inside `UNCHANGED`).
    pub fn primed_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| match e {
            Expr::Primed(v) => {
                out.insert(v.clone());
            }
            Expr::Unchanged(vs) => out.extend(vs.iter().cloned()),
            _ => {}
        });
        out
    }

    /// Number of syntactic occurrences of state variable `v`.
    pub fn count_var(&self, v: &str) -> usize {
        let mut n = 0;
        self.walk(&mut |e| match e {
            Expr::Var(x) | Expr::Primed(x) if x == v => n += 1,
            Expr::Unchanged(vs) => n += vs.iter().filter(|x| *x == v).count(),
            _ => {}
        });
        n
    }

    /// True when the expression mentions no state variable and no bound name,
    /// i.e. it only depends on constants.
    pub fn is_closed(&self) -> bool {
        let mut has_state = false;
        self.walk(&mut |e| {
            if matches!(e, Expr::Var(_) | Expr::Primed(_) | Expr::Unchanged(_)) {
                has_state = true;
            }
        });
        !has_state && self.binds_all_bound_names()
    }

    fn binds_all_bound_names(&self) -> bool {
        fn go(e: &Expr, scope: &mut Vec<String>) -> bool {
            match e {
                Expr::Bound(b) => scope.contains(b),
                Expr::Quant {
                    vars, domain, body, ..
                } => {
                    if !go(domain, scope) {
                        return false;
                    }
                    let depth = scope.len();
                    scope.extend(vars.iter().cloned());
                    let ok = go(body, scope);
                    scope.truncate(depth);
                    ok
                }
                Expr::FuncLit { var, domain, body } => {
                    if !go(domain, scope) {
                        return false;
                    }
                    scope.push(var.clone());
                    let ok = go(body, scope);
                    scope.pop();
                    ok
                }
                other => {
                    let mut ok = true;
                    other.for_each_child(&mut |c| ok &= go(c, scope));
                    ok
                }
            }
        }
        go(self, &mut Vec::new())
    }

    /// Calls `f` on each direct child. Binder-introducing nodes (quantifiers,
    /// function literals) report their domain and body.
    pub fn for_each_child(&self, f: &mut impl FnMut(&Expr)) {
        match self {
            Expr::Bool(_)
            | Expr::Int(_)
            | Expr::Str(_)
            | Expr::Var(_)
            | Expr::Primed(_)
            | Expr::Const(_)
            | Expr::Bound(_)
            | Expr::Unchanged(_) => {}
            Expr::SetLit(es) | Expr::Tuple(es) => es.iter().for_each(f),
            Expr::RecordLit(fs) => fs.iter().for_each(|(_, e)| f(e)),
            Expr::FuncLit { domain, body, .. } | Expr::Quant { domain, body, .. } => {
                f(domain);
                f(body);
            }
            Expr::Apply(a, b) | Expr::Binary(_, a, b) => {
                f(a);
                f(b);
            }
            Expr::Field(e, _) | Expr::Not(e) | Expr::Cardinality(e) => f(e),
            Expr::Except { base, updates } => {
                f(base);
                for (path, e) in updates {
                    for p in path {
                        if let PathElem::Index(i) = p {
                            f(i);
                        }
                    }
                    f(e);
                }
            }
            Expr::If { cond, then, els } => {
                f(cond);
                f(then);
                f(els);
            }
        }
    }

    /// Replaces free occurrences of bound name `from` by bound name `to`.
    pub fn rename_bound(&self, from: &str, to: &str) -> Expr {
        if from == to {
            return self.clone();
        }
        let r = |e: &Expr| Box::new(e.rename_bound(from, to));
        match self {
            Expr::Bound(b) if b == from => Expr::Bound(to.to_string()),
            Expr::Bool(_)
            | Expr::Int(_)
            | Expr::Str(_)
            | Expr::Var(_)
            | Expr::Primed(_)
            | Expr::Const(_)
            | Expr::Bound(_)
            | Expr::Unchanged(_) => self.clone(),
            Expr::SetLit(es) => Expr::SetLit(es.iter().map(|e| e.rename_bound(from, to)).collect()),
            Expr::Tuple(es) => Expr::Tuple(es.iter().map(|e| e.rename_bound(from, to)).collect()),
            Expr::RecordLit(fs) => Expr::RecordLit(
                fs.iter()
                    .map(|(k, e)| (k.clone(), e.rename_bound(from, to)))
                    .collect(),
            ),
            Expr::FuncLit { var, domain, body } => Expr::FuncLit {
                var: var.clone(),
                domain: r(domain),
                body: if var == from { body.clone() } else { r(body) },
            },
            Expr::Quant {
                kind,
                vars,
                domain,
                body,
            } => Expr::Quant {
                kind: *kind,
                vars: vars.clone(),
                domain: r(domain),
                body: if vars.iter().any(|v| v == from) {
                    body.clone()
                } else {
                    r(body)
                },
            },
            Expr::Apply(a, b) => Expr::Apply(r(a), r(b)),
            Expr::Binary(op, a, b) => Expr::Binary(*op, r(a), r(b)),
            Expr::Field(e, name) => Expr::Field(r(e), name.clone()),
            Expr::Not(e) => Expr::Not(r(e)),
            Expr::Cardinality(e) => Expr::Cardinality(r(e)),
            Expr::Except { base, updates } => Expr::Except {
                base: r(base),
                updates: updates
                    .iter()
                    .map(|(path, e)| {
                        let path = path
                            .iter()
                            .map(|p| match p {
                                PathElem::Index(i) => PathElem::Index(i.rename_bound(from, to)),
                                PathElem::Field(f) => PathElem::Field(f.clone()),
                            })
                            .collect();
                        (path, e.rename_bound(from, to))
                    })
                    .collect(),
            },
            Expr::If { cond, then, els } => Expr::If {
                cond: r(cond),
                then: r(then),
                els: r(els),
            },
        }
    }
}

/// How a top-level action conjunct participates in a step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConjunctKind {
    /// No primed variables.
    Guard,
    /// `v' = e` with `e` unprimed.
    Update(String),
    /// `UNCHANGED <<...>>`.
    Frame(Vec<String>),
}

/// Classifies a conjunct, or returns `None` when it violates the conjunct shape
/// (primes in a position other than a top-level `v' = e` or `UNCHANGED`).
pub fn classify(c: &Expr) -> Option<ConjunctKind> {
    match c {
        Expr::Unchanged(vs) => Some(ConjunctKind::Frame(vs.clone())),
        Expr::Binary(BinOp::Eq, lhs, rhs) => match lhs.as_ref() {
            Expr::Primed(v) if rhs.primed_vars().is_empty() => Some(ConjunctKind::Update(v.clone())),
            _ if c.primed_vars().is_empty() => Some(ConjunctKind::Guard),
            _ => None,
        },
        _ if c.primed_vars().is_empty() => Some(ConjunctKind::Guard),
        _ => None,
    }
}

/// The single optional parameter of an action, `p \in D`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Param {
    pub name: String,
    pub domain: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ActionDef {
    pub name: String,
    pub param: Option<Param>,
    pub conjuncts: Vec<Expr>,
}

impl ActionDef {
    /// Top-level conjuncts of the body, in source order.
    pub fn conjuncts(&self) -> &[Expr] {
        &self.conjuncts
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        self.conjuncts.iter().flat_map(Expr::free_vars).collect()
    }
}

/// A named state predicate.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PropertyDef {
    pub name: String,
    pub body: Expr,
}

impl PropertyDef {
    pub fn new(name: impl Into<String>, body: Expr) -> Self {
        Self {
            name: name.into(),
            body,
        }
    }

    /// The trivially true property.
    pub fn truth() -> Self {
        Self::new("True", Expr::Bool(true))
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        self.body.free_vars()
    }
}

/// A specification: constants (bound by `config`), ordered state variables,
/// an `Init` conjunct list, actions, and named state properties.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpecAst {
    pub name: String,
    pub constants: Vec<String>,
    pub config: Vec<(String, Expr)>,
    pub variables: Vec<String>,
    pub init: Vec<Expr>,
    pub actions: Vec<ActionDef>,
    pub properties: Vec<PropertyDef>,
}

impl SpecAst {
    /// The unit of composition: no variables and no actions.
    pub fn unit() -> Self {
        Self {
            name: "Unit".to_string(),
            constants: Vec::new(),
            config: Vec::new(),
            variables: Vec::new(),
            init: Vec::new(),
            actions: Vec::new(),
            properties: Vec::new(),
        }
    }

    pub fn action(&self, name: &str) -> Option<&ActionDef> {
        self.actions.iter().find(|a| a.name == name)
    }

    pub fn property(&self, name: &str) -> Option<&PropertyDef> {
        self.properties.iter().find(|p| p.name == name)
    }

    pub fn constant_binding(&self, name: &str) -> Option<&Expr> {
        self.config.iter().find(|(c, _)| c == name).map(|(_, e)| e)
    }

    /// Rebinds (or adds) the configuration value of a constant.
    pub fn bind_constant(&mut self, name: &str, value: Expr) {
        if let Some(slot) = self.config.iter_mut().find(|(c, _)| c == name) {
            slot.1 = value;
        } else {
            if !self.constants.iter().any(|c| c == name) {
                self.constants.push(name.to_string());
            }
            self.config.push((name.to_string(), value));
        }
    }

    /// Builder-style variant of [`SpecAst::bind_constant`].
    pub fn with_constant(mut self, name: &str, value: Expr) -> Self {
        self.bind_constant(name, value);
        self
    }

    /// Compares everything except the module name.
    pub fn same_structure(&self, other: &SpecAst) -> bool {
        self.constants == other.constants
            && self.config == other.config
            && self.variables == other.variables
            && self.init == other.init
            && self.actions == other.actions
            && self.properties == other.properties
    }
}

impl fmt::Display for SpecAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::printer::print_spec(self))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::printer::print_expr(self))
    }
}
