use std::fmt;

use num_bigint::BigUint;

use super::ast::{Name, Span};
use super::SyntaxError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Num(BigUint),
    Omega,
    Ident(Name),
    True,
    False,
    If,
    Then,
    Else,
    Let,
    Letrec,
    In,
    Imap,
    Reduce,
    Filter,
    IsLim,
    Lambda,
    Dot,
    Comma,
    Colon,
    LBracket,
    RBracket,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Bar,
    Underscore,
    Caret,
    Plus,
    PlusPlus,
    Minus,
    Star,
    Slash,
    Percent,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Num(n) => return write!(f, "number `{n}`"),
            Tok::Ident(x) => return write!(f, "identifier `{x}`"),
            Tok::Omega => "`w`",
            Tok::True => "`true`",
            Tok::False => "`false`",
            Tok::If => "`if`",
            Tok::Then => "`then`",
            Tok::Else => "`else`",
            Tok::Let => "`let`",
            Tok::Letrec => "`letrec`",
            Tok::In => "`in`",
            Tok::Imap => "`imap`",
            Tok::Reduce => "`reduce`",
            Tok::Filter => "`filter`",
            Tok::IsLim => "`islim`",
            Tok::Lambda => "`\\`",
            Tok::Dot => "`.`",
            Tok::Comma => "`,`",
            Tok::Colon => "`:`",
            Tok::LBracket => "`[`",
            Tok::RBracket => "`]`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::Bar => "`|`",
            Tok::Underscore => "`_`",
            Tok::Caret => "`^`",
            Tok::Plus => "`+`",
            Tok::PlusPlus => "`++`",
            Tok::Minus => "`-`",
            Tok::Star => "`*`",
            Tok::Slash => "`/`",
            Tok::Percent => "`%`",
            Tok::Lt => "`<`",
            Tok::Le => "`<=`",
            Tok::Gt => "`>`",
            Tok::Ge => "`>=`",
            Tok::Eq => "`=`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

pub const KEYWORDS: &[&str] = &[
    "if", "then", "else", "let", "letrec", "in", "imap", "reduce", "filter", "islim", "true",
    "false", "w",
];

fn keyword(word: &str) -> Option<Tok> {
    Some(match word {
        "if" => Tok::If,
        "then" => Tok::Then,
        "else" => Tok::Else,
        "let" => Tok::Let,
        "letrec" => Tok::Letrec,
        "in" => Tok::In,
        "imap" => Tok::Imap,
        "reduce" => Tok::Reduce,
        "filter" => Tok::Filter,
        "islim" => Tok::IsLim,
        "true" => Tok::True,
        "false" => Tok::False,
        "w" => Tok::Omega,
        _ => return None,
    })
}

/// Splits source text into tokens. `;` starts a comment running to the end
/// of the line. The returned sequence always ends with [`Tok::Eof`].
pub fn tokenize(src: &str) -> Result<Vec<Token>, SyntaxError> {
    let mut out = Vec::new();
    let mut chars = src.char_indices().peekable();
    let mut line = 1u32;
    let mut line_start = 0usize;

    while let Some(&(start, c)) = chars.peek() {
        let col = (src[line_start..start].chars().count() + 1) as u32;
        let span_to = |end: usize| Span {
            start,
            end,
            line,
            col,
        };
        if c == '\n' {
            chars.next();
            line += 1;
            line_start = start + 1;
            continue;
        }
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        if c == ';' {
            while let Some(&(_, c)) = chars.peek() {
                if c == '\n' {
                    break;
                }
                chars.next();
            }
            continue;
        }
        if c.is_ascii_digit() {
            let mut end = start;
            while let Some(&(i, d)) = chars.peek() {
                if !d.is_ascii_digit() {
                    break;
                }
                end = i + d.len_utf8();
                chars.next();
            }
            let n: BigUint = src[start..end].parse().expect("digits");
            out.push(Token {
                tok: Tok::Num(n),
                span: span_to(end),
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut end = start;
            while let Some(&(i, d)) = chars.peek() {
                if !(d.is_ascii_alphanumeric() || d == '_') {
                    break;
                }
                end = i + d.len_utf8();
                chars.next();
            }
            let word = &src[start..end];
            let tok = if word == "_" {
                Tok::Underscore
            } else {
                keyword(word).unwrap_or_else(|| Tok::Ident(word.into()))
            };
            out.push(Token {
                tok,
                span: span_to(end),
            });
            continue;
        }
        chars.next();
        let next = chars.peek().map(|&(_, c)| c);
        let (tok, len) = match (c, next) {
            ('+', Some('+')) => (Tok::PlusPlus, 2),
            ('<', Some('=')) => (Tok::Le, 2),
            ('>', Some('=')) => (Tok::Ge, 2),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) => (Tok::Minus, 1),
            ('*', _) => (Tok::Star, 1),
            ('/', _) => (Tok::Slash, 1),
            ('%', _) => (Tok::Percent, 1),
            ('<', _) => (Tok::Lt, 1),
            ('>', _) => (Tok::Gt, 1),
            ('=', _) => (Tok::Eq, 1),
            ('\\', _) | ('λ', _) => (Tok::Lambda, 1),
            ('ω', _) => (Tok::Omega, 1),
            ('.', _) => (Tok::Dot, 1),
            (',', _) => (Tok::Comma, 1),
            (':', _) => (Tok::Colon, 1),
            ('[', _) => (Tok::LBracket, 1),
            (']', _) => (Tok::RBracket, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('{', _) => (Tok::LBrace, 1),
            ('}', _) => (Tok::RBrace, 1),
            ('|', _) => (Tok::Bar, 1),
            ('^', _) => (Tok::Caret, 1),
            _ => {
                return Err(SyntaxError::Lex {
                    span: span_to(start + c.len_utf8()),
                    message: format!("unexpected character `{c}`"),
                })
            }
        };
        let mut end = start + c.len_utf8();
        if len == 2 {
            let (i, d) = chars.next().expect("peeked");
            end = i + d.len_utf8();
        }
        out.push(Token {
            tok,
            span: span_to(end),
        });
    }
    let end = src.len();
    let col = (src[line_start..].chars().count() + 1) as u32;
    out.push(Token {
        tok: Tok::Eof,
        span: Span {
            start: end,
            end,
            line,
            col,
        },
    });
    Ok(out)
}
