//! Lexer, parser, AST and pretty-printer for λω source text.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod printer;

use thiserror::Error;

pub use ast::*;
pub use lexer::{tokenize, Tok, Token, KEYWORDS};
pub use parser::{parse_expr, parse_item, parse_program, parse_repl_line};
pub use printer::print_expr;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SyntaxError {
    #[error("{span}: {message}")]
    Lex { span: Span, message: String },
    #[error("{span}: expected {}, found {found}", expected.join(" or "))]
    Parse {
        span: Span,
        expected: Vec<String>,
        found: String,
    },
}

impl SyntaxError {
    pub fn span(&self) -> Span {
        match self {
            SyntaxError::Lex { span, .. } | SyntaxError::Parse { span, .. } => *span,
        }
    }
}
