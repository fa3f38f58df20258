//! Pretty-printer producing source text that parses back to the same tree.
//!
//! Every node is printed at a precedence level and parenthesised when the
//! surrounding context demands a tighter one.

use std::fmt;

use num_traits::{One, Zero};

use super::ast::*;
use crate::ordinal::Ordinal;

const OPEN: u8 = 0;
const CMP: u8 = 1;
const ADD: u8 = 2;
const MUL: u8 = 3;
const APP: u8 = 4;
const POSTFIX: u8 = 5;
const ATOM: u8 = 6;

pub fn print_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e, OPEN);
    out
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_expr(self))
    }
}

fn level(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Lambda(..) | ExprKind::Cond(..) | ExprKind::Letrec(..) => OPEN,
        ExprKind::BinOp(op, ..) => match op {
            BinOp::Add | BinOp::Sub => ADD,
            BinOp::Mul | BinOp::Div | BinOp::Rem => MUL,
            _ => CMP,
        },
        ExprKind::Apply(..) | ExprKind::Reduce(..) | ExprKind::Filter(..) | ExprKind::IsLim(_) => {
            APP
        }
        ExprKind::Select(..) => POSTFIX,
        _ => ATOM,
    }
}

/// Ordinal constants that have a bare spelling: naturals, `w`, `w^n`.
fn bare_ordinal(o: &Ordinal) -> Option<String> {
    if o.is_natural() {
        return Some(o.to_string());
    }
    match o.terms() {
        [t] if t.coefficient.is_one() && !t.exponent.is_zero() => Some(o.to_string()),
        _ => None,
    }
}

fn write_expr(out: &mut String, e: &Expr, ctx: u8) {
    if level(e) < ctx {
        out.push('(');
        write_expr(out, e, OPEN);
        out.push(')');
        return;
    }
    match &e.kind {
        ExprKind::Ord(o) => match bare_ordinal(o) {
            Some(s) => out.push_str(&s),
            None => {
                out.push('(');
                out.push_str(&o.to_string());
                out.push(')');
            }
        },
        ExprKind::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        ExprKind::Var(x) => out.push_str(x),
        ExprKind::Lambda(x, body) => {
            out.push('\\');
            out.push_str(x);
            out.push_str(". ");
            write_expr(out, body, OPEN);
        }
        ExprKind::Apply(f, a) => {
            write_expr(out, f, APP);
            out.push(' ');
            write_expr(out, a, POSTFIX);
        }
        ExprKind::Cond(c, t, f) => {
            out.push_str("if ");
            write_expr(out, c, OPEN);
            out.push_str(" then ");
            write_expr(out, t, OPEN);
            out.push_str(" else ");
            write_expr(out, f, OPEN);
        }
        ExprKind::Letrec(x, bound, body) => {
            out.push_str("letrec ");
            out.push_str(x);
            out.push_str(" = ");
            write_expr(out, bound, OPEN);
            out.push_str(" in ");
            write_expr(out, body, OPEN);
        }
        ExprKind::BinOp(op, l, r) => {
            let lv = level(e);
            write_expr(out, l, lv);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            write_expr(out, r, lv + 1);
        }
        ExprKind::Array(elems) => {
            out.push('[');
            for (i, x) in elems.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, x, OPEN);
            }
            out.push(']');
        }
        ExprKind::Select(a, i) => {
            write_expr(out, a, POSTFIX);
            out.push('.');
            let bare = match &i.kind {
                ExprKind::Array(_) | ExprKind::Var(_) => true,
                ExprKind::Ord(o) => bare_ordinal(o).is_none(),
                _ => false,
            };
            if bare {
                write_expr(out, i, ATOM);
            } else {
                out.push('(');
                write_expr(out, i, OPEN);
                out.push(')');
            }
        }
        ExprKind::Shape(a) => {
            out.push('|');
            write_expr(out, a, POSTFIX);
            out.push('|');
        }
        ExprKind::Reduce(f, z, a) => {
            out.push_str("reduce ");
            write_expr(out, f, POSTFIX);
            out.push(' ');
            write_expr(out, z, POSTFIX);
            out.push(' ');
            write_expr(out, a, POSTFIX);
        }
        ExprKind::Filter(p, a) => {
            out.push_str("filter ");
            write_expr(out, p, POSTFIX);
            out.push(' ');
            write_expr(out, a, POSTFIX);
        }
        ExprKind::IsLim(a) => {
            out.push_str("islim ");
            write_expr(out, a, POSTFIX);
        }
        ExprKind::Imap(im) => {
            out.push_str("imap ");
            write_expr(out, &im.frame, POSTFIX);
            if let Some(cell) = &im.cell {
                out.push('|');
                write_expr(out, cell, POSTFIX);
            }
            out.push_str(" { ");
            for (i, p) in im.partitions.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                match &p.generator {
                    GeneratorSyntax::Full(x) => {
                        out.push_str("_(");
                        out.push_str(x);
                        out.push(')');
                    }
                    GeneratorSyntax::Bounds(lo, x, hi) => {
                        write_expr(out, lo, ADD);
                        out.push_str(" <= ");
                        out.push_str(x);
                        out.push_str(" < ");
                        write_expr(out, hi, ADD);
                    }
                }
                out.push_str(": ");
                write_expr(out, &p.body, OPEN);
            }
            out.push_str(" }");
        }
    }
}

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Item::Decl {
                name,
                recursive,
                value,
                ..
            } => write!(
                f,
                "{} {name} = {value}",
                if *recursive { "letrec" } else { "let" }
            ),
            Item::Expr(e) => write!(f, "{e}"),
        }
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for item in &self.items {
            writeln!(f, "{item}")?;
        }
        Ok(())
    }
}
