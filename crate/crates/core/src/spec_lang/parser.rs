//! Recursive-descent parser for the specification syntax.
//!
//! A file is a sequence of sections introduced by a keyword at the start of a
//! line: `MODULE`, `CONSTANTS`, `VARIABLES`, `CONFIG`, `INIT`, `ACTION` and
//! `PROPERTY`. Conjunct lists are written as `/\` bullets aligned on one
//! column; a bullet at that column starting a line begins the next conjunct.

use std::collections::HashSet;

use super::ast::{ActionDef, BinOp, Expr, Param, PathElem, PropertyDef, Quantifier, SpecAst};
use super::lexer::{tokenize, Tok, Token};
use super::{validate, SpecError};

const SECTION_KEYWORDS: &[&str] = &[
    "MODULE",
    "CONSTANTS",
    "CONSTANT",
    "VARIABLES",
    "VARIABLE",
    "CONFIG",
    "INIT",
    "ACTION",
    "PROPERTY",
];

const RESERVED: &[&str] = &[
    "MODULE",
    "CONSTANTS",
    "CONSTANT",
    "VARIABLES",
    "VARIABLE",
    "CONFIG",
    "INIT",
    "ACTION",
    "PROPERTY",
    "UNCHANGED",
    "EXCEPT",
    "TRUE",
    "FALSE",
    "IF",
    "THEN",
    "ELSE",
    "Cardinality",
];

/// Parses a specification and checks every structural invariant.
pub fn parse(text: &str) -> Result<SpecAst, SpecError> {
    let tokens = tokenize(text)?;
    let sections = split_sections(&tokens)?;

    let mut spec = SpecAst::unit();
    let mut saw_module = false;
    let mut saw_init = false;

    // Declarations first so every later expression can resolve names.
    for sec in &sections {
        let body = &tokens[sec.body.clone()];
        match sec.keyword.as_str() {
            "MODULE" => {
                if saw_module {
                    return Err(syntax(&tokens[sec.start], "duplicate MODULE header"));
                }
                saw_module = true;
                spec.name = single_ident(&tokens[sec.start], body)?;
            }
            "CONSTANTS" | "CONSTANT" => spec.constants.extend(ident_list(&tokens[sec.start], body)?),
            "VARIABLES" | "VARIABLE" => spec.variables.extend(ident_list(&tokens[sec.start], body)?),
            _ => {}
        }
    }
    if !saw_module {
        return Err(SpecError::Syntax {
            line: 1,
            col: 1,
            msg: "expected MODULE header".into(),
        });
    }
    check_unique("constant", &spec.constants)?;
    check_unique("variable", &spec.variables)?;
    for c in &spec.constants {
        if spec.variables.contains(c) {
            return Err(SpecError::Duplicate(format!("name '{c}' is both a constant and a variable")));
        }
    }

    let scope = Scope {
        constants: spec.constants.iter().cloned().collect(),
        variables: spec.variables.iter().cloned().collect(),
    };

    for sec in &sections {
        let header = &tokens[sec.start];
        let body = &tokens[sec.body.clone()];
        match sec.keyword.as_str() {
            "CONFIG" => {
                for entry in split_config(body) {
                    let mut p = ExprParser::new(entry, &scope, header);
                    let name = p.ident()?;
                    if !spec.constants.contains(&name) {
                        return Err(SpecError::Undeclared {
                            name,
                            line: entry[0].line,
                            col: entry[0].col,
                        });
                    }
                    p.expect_sym("=")?;
                    let value = p.expr()?;
                    p.finish()?;
                    if spec.config.iter().any(|(c, _)| *c == name) {
                        return Err(SpecError::Duplicate(format!("constant '{name}' bound twice")));
                    }
                    spec.config.push((name, value));
                }
            }
            "INIT" => {
                if saw_init {
                    return Err(syntax(header, "duplicate INIT section"));
                }
                saw_init = true;
                spec.init = conjunct_list(body, &scope, header, &[])?;
            }
            "ACTION" => spec.actions.push(parse_action(header, body, &scope)?),
            "PROPERTY" => {
                let mut p = ExprParser::new(body, &scope, header);
                let name = p.ident()?;
                let rest = &body[p.pos..];
                let conj = conjunct_list(rest, &scope, header, &[])?;
                spec.properties.push(PropertyDef {
                    name,
                    body: Expr::conjunction(conj),
                });
            }
            _ => {}
        }
    }
    if !saw_init && !spec.variables.is_empty() {
        return Err(SpecError::Init("missing INIT section".into()));
    }
    validate(&spec)?;
    Ok(spec)
}

/// Parses a closed expression (no state variables), e.g. a constant value
/// given on the command line or an action argument in a report.
pub fn parse_closed_expr(text: &str) -> Result<Expr, SpecError> {
    parse_expr_in(text, &[], &[])
}

/// Parses an expression against explicit constant and variable declarations.
pub fn parse_expr_in(text: &str, constants: &[String], variables: &[String]) -> Result<Expr, SpecError> {
    let tokens = tokenize(text)?;
    if tokens.is_empty() {
        return Err(SpecError::Syntax {
            line: 1,
            col: 1,
            msg: "empty expression".into(),
        });
    }
    let scope = Scope {
        constants: constants.iter().cloned().collect(),
        variables: variables.iter().cloned().collect(),
    };
    let mut p = ExprParser::new(&tokens, &scope, &tokens[0]);
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}

struct Section {
    keyword: String,
    start: usize,
    body: std::ops::Range<usize>,
}

fn split_sections(tokens: &[Token]) -> Result<Vec<Section>, SpecError> {
    let mut starts = Vec::new();
    for (i, t) in tokens.iter().enumerate() {
        if let Tok::Ident(w) = &t.tok {
            if SECTION_KEYWORDS.contains(&w.as_str()) {
                if !t.line_start {
                    return Err(syntax(t, &format!("section keyword {w} must start a line")));
                }
                starts.push(i);
            }
        }
    }
    if starts.first() != Some(&0) {
        if let Some(t) = tokens.first() {
            return Err(syntax(t, "expected a section keyword"));
        }
    }
    Ok(starts
        .iter()
        .enumerate()
        .map(|(k, &s)| {
            let end = starts.get(k + 1).copied().unwrap_or(tokens.len());
            let keyword = match &tokens[s].tok {
                Tok::Ident(w) => w.clone(),
                _ => unreachable!(),
            };
            Section {
                keyword,
                start: s,
                body: s + 1..end,
            }
        })
        .collect())
}

fn split_config(body: &[Token]) -> Vec<&[Token]> {
    let Some(first) = body.first() else {
        return Vec::new();
    };
    let col = first.col;
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..body.len() {
        if body[i].line_start && body[i].col == col && matches!(body[i].tok, Tok::Ident(_)) {
            out.push(&body[start..i]);
            start = i;
        }
    }
    out.push(&body[start..]);
    out
}

/// Splits a bullet list into the token slices of its items.
fn split_bullets(body: &[Token]) -> Vec<&[Token]> {
    match body.first() {
        Some(first) if first.is_sym("/\\") => {
            let col = first.col;
            let mut out = Vec::new();
            let mut start = 1;
            for i in 1..body.len() {
                if body[i].is_sym("/\\") && body[i].line_start && body[i].col == col {
                    out.push(&body[start..i]);
                    start = i + 1;
                }
            }
            out.push(&body[start..]);
            out
        }
        Some(_) => vec![body],
        None => Vec::new(),
    }
}

fn conjunct_list(body: &[Token], scope: &Scope, header: &Token, bound: &[String]) -> Result<Vec<Expr>, SpecError> {
    let mut out = Vec::new();
    for item in split_bullets(body) {
        if item.is_empty() {
            return Err(syntax(header, "empty conjunct"));
        }
        let mut p = ExprParser::new(item, scope, header);
        p.bound.extend(bound.iter().cloned());
        let e = p.expr()?;
        p.finish()?;
        out.extend(e.flatten_and());
    }
    Ok(out)
}

fn parse_action(header: &Token, body: &[Token], scope: &Scope) -> Result<ActionDef, SpecError> {
    let mut p = ExprParser::new(body, scope, header);
    let name = p.ident()?;
    let mut param = None;
    if p.peek_sym("(") {
        p.pos += 1;
        let pname = p.ident()?;
        p.expect_backslash("in")?;
        let domain = p.expr()?;
        p.expect_sym(")")?;
        param = Some(Param { name: pname, domain });
    }
    let rest = &body[p.pos..];
    let bound: Vec<String> = param.iter().map(|p| p.name.clone()).collect();
    let conjuncts = conjunct_list(rest, scope, header, &bound)?;
    if conjuncts.is_empty() {
        return Err(SpecError::ConjShape {
            action: name,
            msg: "action body must have at least one conjunct".into(),
        });
    }
    Ok(ActionDef { name, param, conjuncts })
}

fn single_ident(header: &Token, body: &[Token]) -> Result<String, SpecError> {
    match body {
        [Token {
            tok: Tok::Ident(name), ..
        }] if !RESERVED.contains(&name.as_str()) => Ok(name.clone()),
        _ => Err(syntax(header, "expected a single identifier")),
    }
}

fn ident_list(header: &Token, body: &[Token]) -> Result<Vec<String>, SpecError> {
    let mut out = Vec::new();
    let mut expect_ident = true;
    for t in body {
        match (&t.tok, expect_ident) {
            (Tok::Ident(name), true) if !RESERVED.contains(&name.as_str()) => {
                out.push(name.clone());
                expect_ident = false;
            }
            (Tok::Sym(","), false) => expect_ident = true,
            _ => return Err(syntax(t, "expected a comma-separated identifier list")),
        }
    }
    if expect_ident && !out.is_empty() {
        return Err(syntax(header, "trailing comma in identifier list"));
    }
    Ok(out)
}

fn check_unique(kind: &str, names: &[String]) -> Result<(), SpecError> {
    let mut seen = HashSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(SpecError::Duplicate(format!("{kind} '{n}' declared twice")));
        }
    }
    Ok(())
}

fn syntax(t: &Token, msg: &str) -> SpecError {
    SpecError::Syntax {
        line: t.line,
        col: t.col,
        msg: msg.to_string(),
    }
}

struct Scope {
    constants: HashSet<String>,
    variables: HashSet<String>,
}

struct ExprParser<'a> {
    toks: &'a [Token],
    pos: usize,
    scope: &'a Scope,
    bound: Vec<String>,
    /// Used for error positions at end of input.
    anchor: &'a Token,
}

impl<'a> ExprParser<'a> {
    fn new(toks: &'a [Token], scope: &'a Scope, anchor: &'a Token) -> Self {
        Self {
            toks,
            pos: 0,
            scope,
            bound: Vec::new(),
            anchor,
        }
    }

    fn peek(&self) -> Option<&'a Token> {
        self.toks.get(self.pos)
    }

    fn peek_sym(&self, s: &str) -> bool {
        self.peek().is_some_and(|t| t.is_sym(s))
    }

    fn peek_backslash(&self, s: &str) -> bool {
        self.peek().is_some_and(|t| t.is_backslash(s))
    }

    fn peek_ident(&self, s: &str) -> bool {
        self.peek().is_some_and(|t| t.is_ident(s))
    }

    fn err_here(&self, msg: &str) -> SpecError {
        match self.peek() {
            Some(t) => syntax(t, msg),
            None => {
                let last = self.toks.last().unwrap_or(self.anchor);
                syntax(last, &format!("{msg} (at end of input)"))
            }
        }
    }

    fn finish(&self) -> Result<(), SpecError> {
        match self.peek() {
            None => Ok(()),
            Some(_) => Err(self.err_here("unexpected token")),
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), SpecError> {
        if self.peek_sym(s) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err_here(&format!("expected '{s}'")))
        }
    }

    fn expect_backslash(&mut self, s: &str) -> Result<(), SpecError> {
        if self.peek_backslash(s) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err_here(&format!("expected '\\{s}'")))
        }
    }

    fn expect_keyword(&mut self, s: &str) -> Result<(), SpecError> {
        if self.peek_ident(s) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err_here(&format!("expected {s}")))
        }
    }

    fn ident(&mut self) -> Result<String, SpecError> {
        match self.peek().map(|t| &t.tok) {
            Some(Tok::Ident(name)) if !RESERVED.contains(&name.as_str()) => {
                self.pos += 1;
                Ok(name.clone())
            }
            _ => Err(self.err_here("expected identifier")),
        }
    }

    fn expr(&mut self) -> Result<Expr, SpecError> {
        self.implies()
    }

    fn implies(&mut self) -> Result<Expr, SpecError> {
        let lhs = self.or()?;
        if self.peek_sym("=>") {
            self.pos += 1;
            let rhs = self.implies()?;
            return Ok(Expr::binary(BinOp::Implies, lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Expr, SpecError> {
        let mut lhs = self.and()?;
        while self.peek_sym("\\/") {
            self.pos += 1;
            let rhs = self.and()?;
            lhs = Expr::binary(BinOp::Or, lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Expr, SpecError> {
        let mut lhs = self.not()?;
        while self.peek_sym("/\\") {
            self.pos += 1;
            let rhs = self.not()?;
            lhs = Expr::binary(BinOp::And, lhs, rhs);
        }
        Ok(lhs)
    }

    fn not(&mut self) -> Result<Expr, SpecError> {
        if self.peek_sym("~") {
            self.pos += 1;
            return Ok(Expr::Not(Box::new(self.not()?)));
        }
        self.comparison()
    }

    fn comparison(&mut self) -> Result<Expr, SpecError> {
        let lhs = self.merge()?;
        let op = match self.peek().map(|t| &t.tok) {
            Some(Tok::Sym("=")) => BinOp::Eq,
            Some(Tok::Sym("/=")) | Some(Tok::Sym("#")) => BinOp::Neq,
            Some(Tok::Sym("<")) => BinOp::Lt,
            Some(Tok::Sym("<=")) | Some(Tok::Sym("=<")) => BinOp::Le,
            Some(Tok::Sym(">")) => BinOp::Gt,
            Some(Tok::Sym(">=")) => BinOp::Ge,
            Some(Tok::Backslash(w)) if w == "in" => BinOp::In,
            Some(Tok::Backslash(w)) if w == "notin" => BinOp::NotIn,
            Some(Tok::Backslash(w)) if w == "subseteq" => BinOp::Subseteq,
            _ => return Ok(lhs),
        };
        self.pos += 1;
        let rhs = self.merge()?;
        Ok(Expr::binary(op, lhs, rhs))
    }

    fn merge(&mut self) -> Result<Expr, SpecError> {
        let mut lhs = self.maps_to()?;
        while self.peek_sym("@@") {
            self.pos += 1;
            let rhs = self.maps_to()?;
            lhs = Expr::binary(BinOp::Merge, lhs, rhs);
        }
        Ok(lhs)
    }

    fn maps_to(&mut self) -> Result<Expr, SpecError> {
        let lhs = self.range()?;
        if self.peek_sym(":>") {
            self.pos += 1;
            let rhs = self.range()?;
            return Ok(Expr::binary(BinOp::MapsTo, lhs, rhs));
        }
        Ok(lhs)
    }

    fn range(&mut self) -> Result<Expr, SpecError> {
        let lhs = self.set_op()?;
        if self.peek_sym("..") {
            self.pos += 1;
            let rhs = self.set_op()?;
            return Ok(Expr::binary(BinOp::Range, lhs, rhs));
        }
        Ok(lhs)
    }

    fn set_op(&mut self) -> Result<Expr, SpecError> {
        let mut lhs = self.cross()?;
        loop {
            let op = match self.peek().map(|t| &t.tok) {
                Some(Tok::Backslash(w)) if w == "union" || w == "cup" => BinOp::Union,
                Some(Tok::Backslash(w)) if w == "intersect" || w == "cap" => BinOp::Intersect,
                Some(Tok::Backslash(w)) if w.is_empty() => BinOp::SetMinus,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.cross()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn cross(&mut self) -> Result<Expr, SpecError> {
        let mut lhs = self.additive()?;
        while self.peek_backslash("X") || self.peek_backslash("times") {
            self.pos += 1;
            let rhs = self.additive()?;
            lhs = Expr::binary(BinOp::Cross, lhs, rhs);
        }
        Ok(lhs)
    }

    fn additive(&mut self) -> Result<Expr, SpecError> {
        let mut lhs = self.multiplicative()?;
        loop {
            let op = if self.peek_sym("+") {
                BinOp::Add
            } else if self.peek_sym("-") {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            self.pos += 1;
            let rhs = self.multiplicative()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn multiplicative(&mut self) -> Result<Expr, SpecError> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.peek_sym("*") {
                BinOp::Mul
            } else if self.peek_sym("%") {
                BinOp::Mod
            } else {
                return Ok(lhs);
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, SpecError> {
        if self.peek_sym("-") {
            self.pos += 1;
            if let Some(Tok::Num(n)) = self.peek().map(|t| &t.tok) {
                self.pos += 1;
                return Ok(Expr::Int(-n));
            }
            let operand = self.unary()?;
            return Ok(Expr::binary(BinOp::Sub, Expr::Int(0), operand));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<Expr, SpecError> {
        let mut e = self.primary()?;
        loop {
            if self.peek_sym("[") {
                self.pos += 1;
                let arg = self.expr()?;
                self.expect_sym("]")?;
                e = Expr::Apply(Box::new(e), Box::new(arg));
            } else if self.peek_sym(".") {
                self.pos += 1;
                let field = self.ident()?;
                e = Expr::Field(Box::new(e), field);
            } else if self.peek_sym("'") {
                match e {
                    Expr::Var(v) => {
                        self.pos += 1;
                        e = Expr::Primed(v);
                    }
                    _ => return Err(self.err_here("only state variables can be primed")),
                }
            } else {
                return Ok(e);
            }
        }
    }

    fn comma_list(&mut self, close: &str) -> Result<Vec<Expr>, SpecError> {
        let mut items = Vec::new();
        if self.peek_sym(close) {
            self.pos += 1;
            return Ok(items);
        }
        loop {
            items.push(self.expr()?);
            if self.peek_sym(",") {
                self.pos += 1;
            } else {
                self.expect_sym(close)?;
                return Ok(items);
            }
        }
    }

    fn resolve(&self, name: &str, t: &Token) -> Result<Expr, SpecError> {
        if self.bound.iter().rev().any(|b| b == name) {
            Ok(Expr::Bound(name.to_string()))
        } else if self.scope.variables.contains(name) {
            Ok(Expr::Var(name.to_string()))
        } else if self.scope.constants.contains(name) {
            Ok(Expr::Const(name.to_string()))
        } else {
            Err(SpecError::Undeclared {
                name: name.to_string(),
                line: t.line,
                col: t.col,
            })
        }
    }

    fn bind_name(&mut self) -> Result<String, SpecError> {
        let t = self.peek();
        let name = self.ident()?;
        if self.scope.variables.contains(&name) || self.scope.constants.contains(&name) {
            let t = t.expect("identifier token");
            return Err(syntax(t, &format!("bound name '{name}' shadows a declared name")));
        }
        Ok(name)
    }

    fn primary(&mut self) -> Result<Expr, SpecError> {
        let Some(t) = self.peek() else {
            return Err(self.err_here("expected expression"));
        };
        match &t.tok {
            Tok::Num(n) => {
                self.pos += 1;
                Ok(Expr::Int(*n))
            }
            Tok::Str(s) => {
                self.pos += 1;
                Ok(Expr::Str(s.clone()))
            }
            Tok::Ident(w) => match w.as_str() {
                "TRUE" => {
                    self.pos += 1;
                    Ok(Expr::Bool(true))
                }
                "FALSE" => {
                    self.pos += 1;
                    Ok(Expr::Bool(false))
                }
                "UNCHANGED" => {
                    self.pos += 1;
                    let mut vars = Vec::new();
                    if self.peek_sym("<<") {
                        self.pos += 1;
                        loop {
                            let t = self.peek();
                            let name = self.ident()?;
                            if !self.scope.variables.contains(&name) {
                                let t = t.expect("identifier token");
                                return Err(SpecError::Undeclared {
                                    name,
                                    line: t.line,
                                    col: t.col,
                                });
                            }
                            vars.push(name);
                            if self.peek_sym(",") {
                                self.pos += 1;
                            } else {
                                self.expect_sym(">>")?;
                                break;
                            }
                        }
                    } else {
                        let t = self.peek();
                        let name = self.ident()?;
                        if !self.scope.variables.contains(&name) {
                            let t = t.expect("identifier token");
                            return Err(SpecError::Undeclared {
                                name,
                                line: t.line,
                                col: t.col,
                            });
                        }
                        vars.push(name);
                    }
                    Ok(Expr::Unchanged(vars))
                }
                "IF" => {
                    self.pos += 1;
                    let cond = self.expr()?;
                    self.expect_keyword("THEN")?;
                    let then = self.expr()?;
                    self.expect_keyword("ELSE")?;
                    let els = self.expr()?;
                    Ok(Expr::If {
                        cond: Box::new(cond),
                        then: Box::new(then),
                        els: Box::new(els),
                    })
                }
                "Cardinality" => {
                    self.pos += 1;
                    self.expect_sym("(")?;
                    let e = self.expr()?;
                    self.expect_sym(")")?;
                    Ok(Expr::Cardinality(Box::new(e)))
                }
                _ if RESERVED.contains(&w.as_str()) => Err(self.err_here(&format!("unexpected keyword {w}"))),
                _ => {
                    self.pos += 1;
                    self.resolve(w, t)
                }
            },
            Tok::Backslash(w) if w == "A" || w == "E" => {
                let kind = if w == "A" {
                    Quantifier::Forall
                } else {
                    Quantifier::Exists
                };
                self.pos += 1;
                let mut vars = vec![self.bind_name()?];
                while self.peek_sym(",") {
                    self.pos += 1;
                    vars.push(self.bind_name()?);
                }
                self.expect_backslash("in")?;
                let domain = self.expr()?;
                self.expect_sym(":")?;
                let depth = self.bound.len();
                self.bound.extend(vars.iter().cloned());
                let body = self.expr();
                self.bound.truncate(depth);
                Ok(Expr::Quant {
                    kind,
                    vars,
                    domain: Box::new(domain),
                    body: Box::new(body?),
                })
            }
            Tok::Sym("(") => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Sym("{") => {
                self.pos += 1;
                Ok(Expr::SetLit(self.comma_list("}")?))
            }
            Tok::Sym("<<") => {
                self.pos += 1;
                Ok(Expr::Tuple(self.comma_list(">>")?))
            }
            Tok::Sym("[") => {
                self.pos += 1;
                self.bracket()
            }
            _ => Err(self.err_here("expected expression")),
        }
    }

    /// After `[`: record literal, function literal, or EXCEPT.
    fn bracket(&mut self) -> Result<Expr, SpecError> {
        let is_ident = matches!(self.peek().map(|t| &t.tok), Some(Tok::Ident(_)));
        let next = self.toks.get(self.pos + 1);
        if is_ident && next.is_some_and(|t| t.is_sym("|->")) {
            let mut fields = Vec::new();
            loop {
                let name = self.ident()?;
                self.expect_sym("|->")?;
                fields.push((name, self.expr()?));
                if self.peek_sym(",") {
                    self.pos += 1;
                } else {
                    self.expect_sym("]")?;
                    return Ok(Expr::RecordLit(fields));
                }
            }
        }
        if is_ident && next.is_some_and(|t| t.is_backslash("in")) {
            let var = self.bind_name()?;
            self.expect_backslash("in")?;
            let domain = self.expr()?;
            self.expect_sym("|->")?;
            self.bound.push(var.clone());
            let body = self.expr();
            self.bound.pop();
            let body = body?;
            self.expect_sym("]")?;
            return Ok(Expr::FuncLit {
                var,
                domain: Box::new(domain),
                body: Box::new(body),
            });
        }
        let base = self.expr()?;
        self.expect_keyword("EXCEPT")?;
        let mut updates = Vec::new();
        loop {
            self.expect_sym("!")?;
            let mut path = Vec::new();
            loop {
                if self.peek_sym("[") {
                    self.pos += 1;
                    let idx = self.expr()?;
                    self.expect_sym("]")?;
                    path.push(PathElem::Index(idx));
                } else if self.peek_sym(".") {
                    self.pos += 1;
                    path.push(PathElem::Field(self.ident()?));
                } else {
                    break;
                }
            }
            if path.is_empty() {
                return Err(self.err_here("expected an EXCEPT path"));
            }
            self.expect_sym("=")?;
            let value = self.expr()?;
            updates.push((path, value));
            if self.peek_sym(",") {
                self.pos += 1;
            } else {
                self.expect_sym("]")?;
                break;
            }
        }
        Ok(Expr::Except {
            base: Box::new(base),
            updates,
        })
    }
}
