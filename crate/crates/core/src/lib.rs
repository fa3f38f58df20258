//! Interpreter for λω, a lambda calculus over arrays whose shapes may be
//! ordinals below ω^ω.
//!
//! ```
//! use heh_core::{evaluate, probe, EvalConfig};
//!
//! let (mut s, nats) = evaluate("imap [w] { _(iv): iv.[0] * 2 }", EvalConfig::default()).unwrap();
//! assert_eq!(probe(&mut s, nats, "[21]").unwrap(), "42");
//! ```

pub mod eval;
pub mod ordinal;
pub mod prelude;
mod render;
pub mod runtime;
pub mod syntax;

use thiserror::Error;

pub use eval::{ErrorKind, EvalConfig, EvalError, Session, Stats};
pub use ordinal::{Ordinal, OrdinalError};
pub use prelude::load_prelude;
pub use runtime::{Handle, Scalar, StrictArray, Value};
pub use syntax::SyntaxError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error("evaluation error at {0}")]
    Eval(#[from] EvalError),
    #[error("program has no final expression")]
    NoResult,
}

impl Error {
    pub fn span(&self) -> Option<syntax::Span> {
        match self {
            Error::Syntax(e) => Some(e.span()),
            Error::Eval(e) => Some(e.span),
            Error::NoResult => None,
        }
    }
}

impl Session {
    /// A session with the prelude loaded.
    pub fn with_prelude(config: EvalConfig) -> Result<Session, Error> {
        let mut s = Session::new(config);
        load_prelude(&mut s)?;
        Ok(s)
    }

    /// Parses and runs a program; returns the value of its last expression.
    pub fn run_source(&mut self, src: &str) -> Result<Option<Handle>, Error> {
        let prog = syntax::parse_program(src)?;
        Ok(self.run_program(&prog)?)
    }

    /// Parses and evaluates a single expression.
    pub fn eval_source(&mut self, src: &str) -> Result<Handle, Error> {
        let e = syntax::parse_expr(src)?;
        Ok(self.eval_expr(&e)?)
    }

    /// Evaluates `index_src` (a vector expression such as `[3, 3]`) and
    /// selects it from `h`.
    pub fn select_source(&mut self, h: Handle, index_src: &str) -> Result<Handle, Error> {
        let ih = self.eval_source(index_src)?;
        let idx = self.force(ih)?;
        let idx = idx.as_ord_vector().ok_or_else(|| {
            Error::Eval(EvalError {
                kind: ErrorKind::ShapeMismatch,
                rule: "Sel",
                message: format!("`{index_src}` is not a vector of ordinals"),
                span: syntax::Span::default(),
            })
        })?;
        Ok(self.select(h, &idx)?)
    }
}

/// Runs `src` (with the prelude) and returns the session together with the
/// program's final value.
pub fn evaluate(src: &str, config: EvalConfig) -> Result<(Session, Handle), Error> {
    let mut s = Session::with_prelude(config)?;
    let h = s.run_source(src)?.ok_or(Error::NoResult)?;
    Ok((s, h))
}

/// Selects `index_src` from `h` and renders the selected element.
pub fn probe(session: &mut Session, h: Handle, index_src: &str) -> Result<String, Error> {
    let e = session.select_source(h, index_src)?;
    Ok(session.render(e, 0)?)
}
