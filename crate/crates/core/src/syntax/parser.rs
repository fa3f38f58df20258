//! Recursive-descent parser.
//!
//! Precedence, loosest to tightest: `\x. e` / `if` / `letrec` (extend as far
//! right as possible), comparisons, `+ - ++`, `* / %`, application (including
//! the keyword forms `reduce`, `filter`, `islim`), selection `e . i`.

use std::rc::Rc;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::SyntaxError;
use crate::ordinal::Ordinal;

pub fn parse_expr(src: &str) -> Result<Expr, SyntaxError> {
    let mut p = Parser::new(tokenize(src)?);
    let e = p.expr()?;
    p.expect(Tok::Eof)?;
    Ok(e)
}

/// Parses a sequence of items: `let x = e`, `letrec x = e`, or bare
/// expressions. A token in the first column of a line starts a new item, so
/// continuation lines must be indented (closing brackets and `in`, `then`,
/// `else` may sit in the first column).
pub fn parse_program(src: &str) -> Result<Program, SyntaxError> {
    let toks = tokenize(src)?;
    let mut items = Vec::new();
    let mut chunk: Vec<Token> = Vec::new();
    for t in toks {
        let continues = matches!(
            t.tok,
            Tok::RBrace | Tok::RBracket | Tok::RParen | Tok::In | Tok::Then | Tok::Else
        );
        let boundary =
            t.tok == Tok::Eof || (t.span.col == 1 && !continues && !chunk.is_empty());
        if boundary && !chunk.is_empty() {
            let end = Token {
                tok: Tok::Eof,
                span: Span {
                    end: t.span.start,
                    ..t.span
                },
            };
            chunk.push(end);
            items.push(parse_item(std::mem::take(&mut chunk))?);
        }
        if t.tok != Tok::Eof {
            chunk.push(t);
        }
    }
    Ok(Program { items })
}

/// Parses one REPL input: a declaration or an expression.
pub fn parse_item(toks: Vec<Token>) -> Result<Item, SyntaxError> {
    let mut p = Parser::new(toks);
    let item = p.item()?;
    p.expect(Tok::Eof)?;
    Ok(item)
}

pub fn parse_repl_line(src: &str) -> Result<Item, SyntaxError> {
    parse_item(tokenize(src)?)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    /// Nesting depth of `|...|`; inside bars a `|` closes instead of
    /// starting an application argument.
    bars: u32,
}

impl Parser {
    fn new(toks: Vec<Token>) -> Self {
        Parser {
            toks,
            pos: 0,
            bars: 0,
        }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn prev_span(&self) -> Span {
        self.toks[self.pos.saturating_sub(1)].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error(&self, expected: &[&str]) -> SyntaxError {
        SyntaxError::Parse {
            span: self.span(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().to_string(),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<Span, SyntaxError> {
        if self.peek() == &tok {
            Ok(self.bump().span)
        } else {
            Err(self.error(&[&tok.to_string()]))
        }
    }

    fn ident(&mut self) -> Result<(Name, Span), SyntaxError> {
        match self.peek().clone() {
            Tok::Ident(x) => {
                let sp = self.bump().span;
                Ok((x, sp))
            }
            _ => Err(self.error(&["identifier"])),
        }
    }

    fn with_bars<T>(&mut self, depth: u32, f: impl FnOnce(&mut Self) -> T) -> T {
        let saved = std::mem::replace(&mut self.bars, depth);
        let r = f(self);
        self.bars = saved;
        r
    }

    fn item(&mut self) -> Result<Item, SyntaxError> {
        let start = self.span();
        let recursive = match self.peek() {
            Tok::Let => false,
            Tok::Letrec => true,
            _ => return Ok(Item::Expr(Rc::new(self.expr()?))),
        };
        self.bump();
        let (name, _) = self.ident()?;
        self.expect(Tok::Eq)?;
        let value = Rc::new(self.expr()?);
        if recursive && self.eat(&Tok::In) {
            let body = Rc::new(self.expr()?);
            let span = start.to(body.span);
            return Ok(Item::Expr(Rc::new(Expr::new(
                ExprKind::Letrec(name, value, body),
                span,
            ))));
        }
        if !recursive && self.peek() == &Tok::In {
            return Err(self.error(&["declaration end (`let` has no `in` form; use `letrec`)"]));
        }
        let span = start.to(value.span);
        Ok(Item::Decl {
            name,
            recursive,
            value,
            span,
        })
    }

    pub fn expr(&mut self) -> Result<Expr, SyntaxError> {
        let start = self.span();
        match self.peek() {
            Tok::Lambda => {
                self.bump();
                let (x, _) = self.ident()?;
                self.expect(Tok::Dot)?;
                let body = self.expr()?;
                let span = start.to(body.span);
                Ok(Expr::new(ExprKind::Lambda(x, Rc::new(body)), span))
            }
            Tok::If => {
                self.bump();
                let c = self.with_bars(0, |p| p.expr())?;
                self.expect(Tok::Then)?;
                let t = self.with_bars(0, |p| p.expr())?;
                self.expect(Tok::Else)?;
                let e = self.expr()?;
                let span = start.to(e.span);
                Ok(Expr::new(
                    ExprKind::Cond(Rc::new(c), Rc::new(t), Rc::new(e)),
                    span,
                ))
            }
            Tok::Letrec => {
                self.bump();
                let (x, _) = self.ident()?;
                self.expect(Tok::Eq)?;
                let bound = self.with_bars(0, |p| p.expr())?;
                self.expect(Tok::In)?;
                let body = self.expr()?;
                let span = start.to(body.span);
                Ok(Expr::new(
                    ExprKind::Letrec(x, Rc::new(bound), Rc::new(body)),
                    span,
                ))
            }
            _ => self.comparison(),
        }
    }

    fn comparison(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.additive()?;
        loop {
            let op = match self.peek() {
                Tok::Lt => BinOp::Lt,
                Tok::Le => BinOp::Le,
                Tok::Eq => BinOp::Eq,
                Tok::Gt => BinOp::Gt,
                Tok::Ge => BinOp::Ge,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.additive()?;
            lhs = binop(op, lhs, rhs);
        }
    }

    fn additive(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.multiplicative()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => Some(BinOp::Add),
                Tok::Minus => Some(BinOp::Sub),
                Tok::PlusPlus => None,
                _ => return Ok(lhs),
            };
            let op_span = self.bump().span;
            let rhs = self.multiplicative()?;
            lhs = match op {
                Some(op) => binop(op, lhs, rhs),
                None => {
                    // a ++ b  ≡  concat a b
                    let span = lhs.span.to(rhs.span);
                    let f = Expr::new(ExprKind::Var("concat".into()), op_span);
                    let partial = Expr::new(ExprKind::Apply(Rc::new(f), Rc::new(lhs)), span);
                    Expr::new(ExprKind::Apply(Rc::new(partial), Rc::new(rhs)), span)
                }
            };
        }
    }

    fn multiplicative(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.application()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                Tok::Percent => BinOp::Rem,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.application()?;
            lhs = binop(op, lhs, rhs);
        }
    }

    fn starts_argument(&self) -> bool {
        match self.peek() {
            Tok::Num(_)
            | Tok::Omega
            | Tok::Ident(_)
            | Tok::True
            | Tok::False
            | Tok::LParen
            | Tok::LBracket
            | Tok::Imap => true,
            Tok::Bar => self.bars == 0,
            _ => false,
        }
    }

    fn application(&mut self) -> Result<Expr, SyntaxError> {
        let start = self.span();
        let mut head = match self.peek() {
            Tok::Reduce => {
                self.bump();
                let f = self.postfix()?;
                let z = self.postfix()?;
                let a = self.postfix()?;
                let span = start.to(a.span);
                Expr::new(
                    ExprKind::Reduce(Rc::new(f), Rc::new(z), Rc::new(a)),
                    span,
                )
            }
            Tok::Filter => {
                self.bump();
                let p = self.postfix()?;
                let a = self.postfix()?;
                let span = start.to(a.span);
                Expr::new(ExprKind::Filter(Rc::new(p), Rc::new(a)), span)
            }
            Tok::IsLim => {
                self.bump();
                let a = self.postfix()?;
                let span = start.to(a.span);
                Expr::new(ExprKind::IsLim(Rc::new(a)), span)
            }
            _ => self.postfix()?,
        };
        while self.starts_argument() {
            let arg = self.postfix()?;
            let span = head.span.to(arg.span);
            head = Expr::new(ExprKind::Apply(Rc::new(head), Rc::new(arg)), span);
        }
        Ok(head)
    }

    fn postfix(&mut self) -> Result<Expr, SyntaxError> {
        let mut e = self.atom()?;
        while self.eat(&Tok::Dot) {
            let idx = match self.peek() {
                Tok::LBracket | Tok::LParen | Tok::Ident(_) => self.atom()?,
                _ => return Err(self.error(&["`[`", "`(`", "identifier"])),
            };
            let span = e.span.to(idx.span);
            e = Expr::new(ExprKind::Select(Rc::new(e), Rc::new(idx)), span);
        }
        Ok(e)
    }

    fn atom(&mut self) -> Result<Expr, SyntaxError> {
        let start = self.span();
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(Expr::new(ExprKind::Ord(Ordinal::natural(n)), start))
            }
            Tok::Omega => {
                self.bump();
                if self.eat(&Tok::Caret) {
                    match self.peek().clone() {
                        Tok::Num(e) => {
                            let sp = self.bump().span;
                            Ok(Expr::new(
                                ExprKind::Ord(omega_power(e)),
                                start.to(sp),
                            ))
                        }
                        _ => Err(self.error(&["natural exponent"])),
                    }
                } else {
                    Ok(Expr::new(ExprKind::Ord(Ordinal::omega()), start))
                }
            }
            Tok::True => {
                self.bump();
                Ok(Expr::new(ExprKind::Bool(true), start))
            }
            Tok::False => {
                self.bump();
                Ok(Expr::new(ExprKind::Bool(false), start))
            }
            Tok::Ident(x) => {
                self.bump();
                Ok(Expr::new(ExprKind::Var(x), start))
            }
            Tok::LParen => {
                if let Some(lit) = self.cnf_literal() {
                    return Ok(lit);
                }
                self.bump();
                let mut e = self.with_bars(0, |p| p.expr())?;
                let end = self.expect(Tok::RParen)?;
                e.span = start.to(end);
                Ok(e)
            }
            Tok::LBracket => {
                self.bump();
                let mut elems = Vec::new();
                if self.peek() != &Tok::RBracket {
                    loop {
                        elems.push(Rc::new(self.with_bars(0, |p| p.expr())?));
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                }
                let end = self.expect(Tok::RBracket)?;
                Ok(Expr::new(ExprKind::Array(elems), start.to(end)))
            }
            Tok::Bar => {
                self.bump();
                let depth = self.bars + 1;
                let inner = self.with_bars(depth, |p| p.expr())?;
                let end = self.expect(Tok::Bar)?;
                Ok(Expr::new(ExprKind::Shape(Rc::new(inner)), start.to(end)))
            }
            Tok::Imap => self.imap(),
            _ => Err(self.error(&["expression"])),
        }
    }

    fn imap(&mut self) -> Result<Expr, SyntaxError> {
        let start = self.expect(Tok::Imap)?;
        let frame = self.with_bars(0, |p| p.postfix())?;
        let cell = if self.eat(&Tok::Bar) {
            Some(Rc::new(self.with_bars(0, |p| p.postfix())?))
        } else {
            None
        };
        self.expect(Tok::LBrace)?;
        let mut partitions = Vec::new();
        loop {
            partitions.push(self.with_bars(0, |p| p.partition())?);
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        let end = self.expect(Tok::RBrace)?;
        Ok(Expr::new(
            ExprKind::Imap(Imap {
                frame: Rc::new(frame),
                cell,
                partitions,
            }),
            start.to(end),
        ))
    }

    fn partition(&mut self) -> Result<PartitionSyntax, SyntaxError> {
        let generator = if self.peek() == &Tok::Underscore {
            self.bump();
            self.expect(Tok::LParen)?;
            let (x, _) = self.ident()?;
            self.expect(Tok::RParen)?;
            GeneratorSyntax::Full(x)
        } else {
            let lower = self.additive()?;
            self.expect(Tok::Le)?;
            let (x, _) = self.ident()?;
            self.expect(Tok::Lt)?;
            let upper = self.additive()?;
            GeneratorSyntax::Bounds(Rc::new(lower), x, Rc::new(upper))
        };
        self.expect(Tok::Colon)?;
        let body = self.expr()?;
        Ok(PartitionSyntax {
            generator,
            body: Rc::new(body),
        })
    }

    /// Recognises a parenthesised ordinal written exactly in its canonical
    /// rendering, e.g. `(w^2*3 + w*2 + 5)`, as a single constant. Returns
    /// `None` (consuming nothing) when the tokens do not form one.
    fn cnf_literal(&mut self) -> Option<Expr> {
        let start = self.span();
        let mut k = 1;
        let mut monos: Vec<String> = Vec::new();
        let mut value = Ordinal::zero();
        loop {
            let (text, mono, used) = match (self.peek_at(k), self.peek_at(k + 1)) {
                (Tok::Num(n), _) => (n.to_string(), Ordinal::natural(n.clone()), 1),
                (Tok::Omega, Tok::Caret) => {
                    let Tok::Num(e) = self.peek_at(k + 2) else {
                        return None;
                    };
                    let e = e.clone();
                    if let (Tok::Star, Tok::Num(c)) = (self.peek_at(k + 3), self.peek_at(k + 4)) {
                        let o = Ordinal::from_terms([(e.clone(), c.clone())]).ok()?;
                        (format!("w^{e}*{c}"), o, 5)
                    } else {
                        (format!("w^{e}"), omega_power(e), 3)
                    }
                }
                (Tok::Omega, Tok::Star) => {
                    let Tok::Num(c) = self.peek_at(k + 2) else {
                        return None;
                    };
                    let o = Ordinal::from_terms([(BigUint::one(), c.clone())]).ok()?;
                    (format!("w*{c}"), o, 3)
                }
                (Tok::Omega, _) => ("w".to_string(), Ordinal::omega(), 1),
                _ => return None,
            };
            // strictly descending: the new summand must be below every
            // exponent already present
            if let Some(last) = value.terms().last() {
                let lead = mono.terms().first()?;
                if lead.exponent >= last.exponent {
                    return None;
                }
            }
            value = value.add(&mono);
            monos.push(text);
            k += used;
            match self.peek_at(k) {
                Tok::Plus => k += 1,
                Tok::RParen => break,
                _ => return None,
            }
        }
        let text = monos.join(" + ");
        if value.is_natural() || text != value.to_string() {
            return None;
        }
        for _ in 0..=k {
            self.bump();
        }
        Some(Expr::new(ExprKind::Ord(value), start.to(self.prev_span())))
    }
}

fn omega_power(e: BigUint) -> Ordinal {
    if e.is_zero() {
        Ordinal::one()
    } else {
        Ordinal::omega_pow(e)
    }
}

fn binop(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
    let span = lhs.span.to(rhs.span);
    Expr::new(ExprKind::BinOp(op, Rc::new(lhs), Rc::new(rhs)), span)
}
