//! Canonical pretty-printer. Output re-parses to the same syntax tree.

use std::fmt::Write;

use super::ast::{BinOp, Expr, PathElem, Quantifier, SpecAst};

const ATOM: u8 = 14;

fn binop_prec(op: BinOp) -> u8 {
    match op {
        BinOp::Implies => 1,
        BinOp::Or => 2,
        BinOp::And => 3,
        BinOp::Eq
        | BinOp::Neq
        | BinOp::In
        | BinOp::NotIn
        | BinOp::Subseteq
        | BinOp::Lt
        | BinOp::Le
        | BinOp::Gt
        | BinOp::Ge => 5,
        BinOp::Merge => 6,
        BinOp::MapsTo => 7,
        BinOp::Range => 8,
        BinOp::Union | BinOp::Intersect | BinOp::SetMinus => 9,
        BinOp::Cross => 10,
        BinOp::Add | BinOp::Sub => 11,
        BinOp::Mul | BinOp::Mod => 12,
    }
}

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Quant { .. } | Expr::If { .. } => 0,
        Expr::Binary(op, ..) => binop_prec(*op),
        Expr::Not(_) => 4,
        Expr::Int(n) if *n < 0 => 13,
        _ => ATOM,
    }
}

pub fn print_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e, 0);
    out
}

fn write_expr(out: &mut String, e: &Expr, min: u8) {
    let paren = prec(e) < min;
    if paren {
        out.push('(');
    }
    write_bare(out, e);
    if paren {
        out.push(')');
    }
}

fn write_list(out: &mut String, es: &[Expr]) {
    for (i, e) in es.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_expr(out, e, 0);
    }
}

fn write_bare(out: &mut String, e: &Expr) {
    match e {
        Expr::Bool(true) => out.push_str("TRUE"),
        Expr::Bool(false) => out.push_str("FALSE"),
        Expr::Int(n) => {
            let _ = write!(out, "{n}");
        }
        Expr::Str(s) => {
            let _ = write!(out, "\"{s}\"");
        }
        Expr::Var(v) | Expr::Const(v) | Expr::Bound(v) => out.push_str(v),
        Expr::Primed(v) => {
            out.push_str(v);
            out.push('\'');
        }
        Expr::SetLit(es) => {
            out.push('{');
            write_list(out, es);
            out.push('}');
        }
        Expr::Tuple(es) => {
            out.push_str("<<");
            write_list(out, es);
            out.push_str(">>");
        }
        Expr::RecordLit(fields) => {
            out.push('[');
            for (i, (name, v)) in fields.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(name);
                out.push_str(" |-> ");
                write_expr(out, v, 0);
            }
            out.push(']');
        }
        Expr::FuncLit { var, domain, body } => {
            let _ = write!(out, "[{var} \\in ");
            write_expr(out, domain, 1);
            out.push_str(" |-> ");
            write_expr(out, body, 0);
            out.push(']');
        }
        Expr::Apply(f, arg) => {
            write_expr(out, f, ATOM);
            out.push('[');
            write_expr(out, arg, 0);
            out.push(']');
        }
        Expr::Field(base, name) => {
            write_expr(out, base, ATOM);
            out.push('.');
            out.push_str(name);
        }
        Expr::Except { base, updates } => {
            out.push('[');
            write_expr(out, base, 1);
            out.push_str(" EXCEPT ");
            for (i, (path, v)) in updates.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push('!');
                for p in path {
                    match p {
                        PathElem::Index(idx) => {
                            out.push('[');
                            write_expr(out, idx, 0);
                            out.push(']');
                        }
                        PathElem::Field(f) => {
                            out.push('.');
                            out.push_str(f);
                        }
                    }
                }
                out.push_str(" = ");
                write_expr(out, v, 0);
            }
            out.push(']');
        }
        Expr::Binary(op, l, r) => {
            let p = binop_prec(*op);
            let (lmin, rmin) = match op {
                BinOp::Implies => (p + 1, p),
                BinOp::Or | BinOp::And | BinOp::Merge => (p, p + 1),
                BinOp::Union | BinOp::Intersect | BinOp::SetMinus | BinOp::Cross => (p, p + 1),
                BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Mod => (p, p + 1),
                _ => (p + 1, p + 1),
            };
            write_expr(out, l, lmin);
            if *op == BinOp::Range {
                out.push_str("..");
            } else {
                out.push(' ');
                out.push_str(op.symbol());
                out.push(' ');
            }
            write_expr(out, r, rmin);
        }
        Expr::Not(inner) => {
            out.push('~');
            write_expr(out, inner, 5);
        }
        Expr::Quant {
            kind,
            vars,
            domain,
            body,
        } => {
            out.push_str(match kind {
                Quantifier::Forall => "\\A ",
                Quantifier::Exists => "\\E ",
            });
            out.push_str(&vars.join(", "));
            out.push_str(" \\in ");
            write_expr(out, domain, 1);
            out.push_str(" : ");
            write_expr(out, body, 0);
        }
        Expr::If { cond, then, els } => {
            out.push_str("IF ");
            write_expr(out, cond, 1);
            out.push_str(" THEN ");
            write_expr(out, then, 1);
            out.push_str(" ELSE ");
            write_expr(out, els, 0);
        }
        Expr::Cardinality(inner) => {
            out.push_str("Cardinality(");
            write_expr(out, inner, 0);
            out.push(')');
        }
        Expr::Unchanged(vs) => {
            let _ = write!(out, "UNCHANGED <<{}>>", vs.join(", "));
        }
    }
}

fn write_bullets(out: &mut String, conjuncts: &[Expr]) {
    for c in conjuncts {
        let _ = writeln!(out, "  /\\ {}", print_expr(c));
    }
}

/// Renders a spec in the canonical layout accepted by the parser.
pub fn print_spec(s: &SpecAst) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "MODULE {}", s.name);
    if !s.constants.is_empty() {
        let _ = writeln!(out, "CONSTANTS {}", s.constants.join(", "));
    }
    if !s.variables.is_empty() {
        let _ = writeln!(out, "VARIABLES {}", s.variables.join(", "));
    }
    if !s.config.is_empty() {
        out.push_str("CONFIG\n");
        for (name, value) in &s.config {
            let _ = writeln!(out, "  {name} = {}", print_expr(value));
        }
    }
    if !s.init.is_empty() {
        out.push_str("\nINIT\n");
        write_bullets(&mut out, &s.init);
    }
    for a in &s.actions {
        let _ = write!(out, "\nACTION {}", a.name);
        if let Some(p) = &a.param {
            let _ = write!(out, "({} \\in {})", p.name, print_expr(&p.domain));
        }
        out.push('\n');
        write_bullets(&mut out, &a.conjuncts);
    }
    for p in &s.properties {
        let _ = writeln!(out, "\nPROPERTY {}", p.name);
        match &p.body {
            Expr::Binary(BinOp::And, ..) => write_bullets(&mut out, &p.body.clone().flatten_and()),
            body => {
                let _ = writeln!(out, "  {}", print_expr(body));
            }
        }
    }
    out
}
