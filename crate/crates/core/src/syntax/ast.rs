use std::fmt;
use std::rc::Rc;

use crate::ordinal::Ordinal;

pub type Name = Rc<str>;

/// Byte range plus the line/column of its first byte (both 1-based).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub fn to(self, other: Span) -> Span {
        Span {
            start: self.start.min(other.start),
            end: self.end.max(other.end),
            line: self.line,
            col: self.col,
        }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Lt,
    Le,
    Eq,
    Gt,
    Ge,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Eq => "=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
        }
    }

    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinOp::Lt | BinOp::Le | BinOp::Eq | BinOp::Gt | BinOp::Ge
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Ord(Ordinal),
    Bool(bool),
    Var(Name),
    Lambda(Name, Rc<Expr>),
    Apply(Rc<Expr>, Rc<Expr>),
    Cond(Rc<Expr>, Rc<Expr>, Rc<Expr>),
    Letrec(Name, Rc<Expr>, Rc<Expr>),
    BinOp(BinOp, Rc<Expr>, Rc<Expr>),
    Array(Vec<Rc<Expr>>),
    Select(Rc<Expr>, Rc<Expr>),
    Shape(Rc<Expr>),
    Reduce(Rc<Expr>, Rc<Expr>, Rc<Expr>),
    Imap(Imap),
    Filter(Rc<Expr>, Rc<Expr>),
    IsLim(Rc<Expr>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Imap {
    pub frame: Rc<Expr>,
    /// Absent for the scalar form, which behaves as a `[]` cell shape.
    pub cell: Option<Rc<Expr>>,
    pub partitions: Vec<PartitionSyntax>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartitionSyntax {
    pub generator: GeneratorSyntax,
    pub body: Rc<Expr>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum GeneratorSyntax {
    /// `_(x)`: the whole frame index space.
    Full(Name),
    /// `lower <= x < upper`
    Bounds(Rc<Expr>, Name, Rc<Expr>),
}

impl GeneratorSyntax {
    pub fn var(&self) -> &Name {
        match self {
            GeneratorSyntax::Full(x) | GeneratorSyntax::Bounds(_, x, _) => x,
        }
    }
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Expr { kind, span }
    }
}

/// A top-level item of a source file or REPL line.
#[derive(Clone, Debug, PartialEq)]
pub enum Item {
    /// `let x = e` or `letrec x = e` without a trailing `in`.
    Decl {
        name: Name,
        recursive: bool,
        value: Rc<Expr>,
        span: Span,
    },
    Expr(Rc<Expr>),
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Program {
    pub items: Vec<Item>,
}
