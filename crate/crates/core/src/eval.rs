//! Big-step evaluator over a mutable store.
//!
//! Every expression evaluates to a [`Handle`]. Imap and filter closures are
//! updated in place as selections force their elements, so all holders of a
//! handle observe the memoized results.

use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::ordinal::{Ordinal, OrdinalError};
use crate::runtime::*;
use crate::syntax::{BinOp, Expr, ExprKind, GeneratorSyntax, Imap, Item, Name, Program, Span};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalConfig {
    /// Evaluate finite, non-recursive imaps eagerly into strict arrays.
    pub strict_finite_imaps: bool,
    /// Record computed imap elements in their closure.
    pub memoize: bool,
    /// Upper bound on rule applications per top-level request.
    pub fuel: Option<u64>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            strict_finite_imaps: false,
            memoize: true,
            fuel: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ErrorKind {
    UnboundVariable,
    NotAFunction,
    ShapeMismatch,
    RankMismatch,
    IndexOutOfBounds,
    NotAPartition,
    HeterogeneousNesting,
    UndefinedOrdinalOp,
    DivisionByZero,
    ReduceOnInfinite,
    FilterRankError,
    FuelExhausted,
    IrreducibleTerm,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{span}: {kind} [{rule}]: {message}")]
pub struct EvalError {
    pub kind: ErrorKind,
    /// The evaluation rule that failed.
    pub rule: &'static str,
    pub message: String,
    pub span: Span,
}

pub type EvalResult<T> = Result<T, EvalError>;

fn err<T>(kind: ErrorKind, rule: &'static str, span: Span, message: impl Into<String>) -> EvalResult<T> {
    Err(EvalError {
        kind,
        rule,
        message: message.into(),
        span,
    })
}

fn ordinal_error(e: OrdinalError, span: Span) -> EvalError {
    let kind = match e {
        OrdinalError::DivisionByZero(_) => ErrorKind::DivisionByZero,
        _ => ErrorKind::UndefinedOrdinalOp,
    };
    EvalError {
        kind,
        rule: "BinOp",
        message: e.to_string(),
        span,
    }
}

/// Counters for instrumentation and tests.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub rules: u64,
    /// Imap partition bodies evaluated (lazy and strict).
    pub body_evals: u64,
    /// Filter predicate applications.
    pub predicate_calls: u64,
}

fn all_finite(v: &[Ordinal]) -> bool {
    v.iter().all(Ordinal::is_natural)
}

/// One evaluation session: a store, the top-level environment and a config.
pub struct Session {
    pub(crate) store: Store,
    pub(crate) env: Env,
    pub(crate) config: EvalConfig,
    pub(crate) stats: Stats,
    fuel_left: Option<u64>,
    /// Nesting depth of `letrec` bound expressions under evaluation; strict
    /// imaps are only used at depth 0.
    letrec_depth: u32,
    interned: HashMap<u64, Handle>,
    bools: [Option<Handle>; 2],
}

const INTERN_LIMIT: u64 = 1024;

impl Session {
    /// A session with an empty environment (no prelude).
    pub fn new(config: EvalConfig) -> Self {
        let fuel_left = config.fuel;
        Session {
            store: Store::new(),
            env: Env::new(),
            config,
            stats: Stats::default(),
            fuel_left,
            letrec_depth: 0,
            interned: HashMap::new(),
            bools: [None, None],
        }
    }

    pub fn config(&self) -> &EvalConfig {
        &self.config
    }

    pub fn set_config(&mut self, config: EvalConfig) {
        self.config = config;
    }

    pub fn env(&self) -> &Env {
        &self.env
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn stats(&self) -> Stats {
        self.stats
    }

    pub fn reset_stats(&mut self) {
        self.stats = Stats::default();
    }

    pub fn value(&self, h: Handle) -> Option<&Value> {
        self.store.get(h)
    }

    pub fn lookup(&self, name: &str) -> Option<Handle> {
        self.env.lookup(name).map(|h| self.store.resolve(h))
    }

    pub fn bind(&mut self, name: &str, h: Handle) {
        self.env = self.env.bind(name.into(), h);
    }

    /// Refills the fuel tank; every public entry point starts with this.
    pub(crate) fn begin(&mut self) {
        self.fuel_left = self.config.fuel;
    }

    pub fn eval_expr(&mut self, e: &Expr) -> EvalResult<Handle> {
        self.begin();
        let env = self.env.clone();
        self.eval(e, &env)
    }

    /// Evaluates one top-level item. Declarations extend the session
    /// environment and yield `None`.
    pub fn run_item(&mut self, item: &Item) -> EvalResult<Option<Handle>> {
        self.begin();
        let env = self.env.clone();
        match item {
            Item::Expr(e) => self.eval(e, &env).map(Some),
            Item::Decl {
                name,
                recursive: false,
                value,
                ..
            } => {
                let h = self.eval(value, &env)?;
                self.env = env.bind(name.clone(), h);
                Ok(None)
            }
            Item::Decl {
                name,
                recursive: true,
                value,
                ..
            } => {
                let h = self.letrec_bind(name, value, &env)?;
                self.env = env.bind(name.clone(), h);
                Ok(None)
            }
        }
    }

    /// Runs every item; the result is the value of the last expression item.
    pub fn run_program(&mut self, prog: &Program) -> EvalResult<Option<Handle>> {
        let mut last = None;
        for item in &prog.items {
            if let Some(h) = self.run_item(item)? {
                last = Some(h);
            }
        }
        Ok(last)
    }

    pub fn select(&mut self, h: Handle, index: &[Ordinal]) -> EvalResult<Handle> {
        self.begin();
        self.select_at(h, index, Span::default())
    }

    pub fn shape(&mut self, h: Handle) -> EvalResult<Vec<Ordinal>> {
        self.begin();
        self.shape_of(h, Span::default())
    }

    pub fn scalar(&mut self, h: Handle) -> EvalResult<Scalar> {
        self.begin();
        self.scalar_of(h, Span::default())
    }

    /// Forces a finite-shaped value into a strict array.
    pub fn force(&mut self, h: Handle) -> EvalResult<Rc<StrictArray>> {
        self.begin();
        self.force_strict(h, Span::default(), ErrorKind::IndexOutOfBounds, "Force")
    }

    /// Applies a function value to an argument value.
    pub fn apply(&mut self, f: Handle, arg: Handle) -> EvalResult<Handle> {
        self.begin();
        self.apply_fn(f, arg, Span::default())
    }

    pub fn alloc(&mut self, v: Value) -> Handle {
        self.store.insert(v)
    }

    // ---- core evaluation ------------------------------------------------

    fn tick(&mut self, rule: &'static str, span: Span) -> EvalResult<()> {
        self.stats.rules += 1;
        if let Some(f) = self.fuel_left {
            if f == 0 {
                return err(
                    ErrorKind::FuelExhausted,
                    rule,
                    span,
                    "fuel exhausted (evaluation did not finish within the rule budget)",
                );
            }
            self.fuel_left = Some(f - 1);
        }
        Ok(())
    }

    pub(crate) fn alloc_scalar(&mut self, s: Scalar) -> Handle {
        match &s {
            Scalar::Bool(b) => {
                let slot = usize::from(*b);
                if let Some(h) = self.bools[slot] {
                    return h;
                }
                let h = self.store.insert(Value::scalar(s));
                self.bools[slot] = Some(h);
                h
            }
            Scalar::Ord(o) => match o.to_u64() {
                Some(n) if n < INTERN_LIMIT => {
                    if let Some(&h) = self.interned.get(&n) {
                        return h;
                    }
                    let h = self.store.insert(Value::scalar(s));
                    self.interned.insert(n, h);
                    h
                }
                _ => self.store.insert(Value::scalar(s)),
            },
            Scalar::Fun(_) => self.store.insert(Value::scalar(s)),
        }
    }

    fn alloc_vector(&mut self, v: &[Ordinal]) -> Handle {
        self.store
            .insert(Value::Array(Rc::new(StrictArray::ord_vector(v))))
    }

    pub(crate) fn eval(&mut self, e: &Expr, env: &Env) -> EvalResult<Handle> {
        stacker::maybe_grow(256 * 1024, 8 * 1024 * 1024, || self.eval_node(e, env))
    }

    fn eval_node(&mut self, e: &Expr, env: &Env) -> EvalResult<Handle> {
        let span = e.span;
        match &e.kind {
            ExprKind::Ord(o) => {
                self.tick("Const-Scal", span)?;
                Ok(self.alloc_scalar(Scalar::Ord(o.clone())))
            }
            ExprKind::Bool(b) => {
                self.tick("Const-Scal", span)?;
                Ok(self.alloc_scalar(Scalar::Bool(*b)))
            }
            ExprKind::Var(x) => {
                self.tick("Var", span)?;
                let Some(h) = env.lookup(x) else {
                    return err(
                        ErrorKind::UnboundVariable,
                        "Var",
                        span,
                        format!("unbound variable `{x}`"),
                    );
                };
                let h = self.store.resolve(h);
                if let Cell::Hole = self.store.cell(h) {
                    return err(
                        ErrorKind::UnboundVariable,
                        "Letrec",
                        span,
                        format!("premature recursive reference to `{x}` while it is being defined"),
                    );
                }
                Ok(h)
            }
            ExprKind::Lambda(x, body) => {
                self.tick("Abs", span)?;
                Ok(self.store.insert(Value::Fun(Rc::new(FunClosure {
                    param: x.clone(),
                    body: body.clone(),
                    env: env.clone(),
                }))))
            }
            ExprKind::Apply(f, a) => {
                self.tick("App", span)?;
                let fh = self.eval(f, env)?;
                let fun = self.function_of(fh, f.span)?;
                let ah = self.eval(a, env)?;
                self.call(&fun, ah)
            }
            ExprKind::Cond(c, t, f) => {
                self.tick("Cond", span)?;
                let ch = self.eval(c, env)?;
                if self.bool_of(ch, c.span, "Cond")? {
                    self.eval(t, env)
                } else {
                    self.eval(f, env)
                }
            }
            ExprKind::Letrec(x, bound, body) => {
                self.tick("Letrec", span)?;
                let p2 = self.letrec_bind(x, bound, env)?;
                self.eval(body, &env.bind(x.clone(), p2))
            }
            ExprKind::BinOp(op, l, r) => {
                self.tick("BinOp", span)?;
                let lh = self.eval(l, env)?;
                let rh = self.eval(r, env)?;
                self.binop(*op, lh, rh, l.span, r.span, span)
            }
            ExprKind::Array(elems) => {
                self.tick("Imm-Array", span)?;
                let mut hs = Vec::with_capacity(elems.len());
                for x in elems {
                    hs.push(self.eval(x, env)?);
                }
                self.array_literal(&hs, span)
            }
            ExprKind::Select(a, i) => {
                self.tick("Sel", span)?;
                let ah = self.eval(a, env)?;
                let ih = self.eval(i, env)?;
                let idx = self.ord_vector_of(ih, i.span, "Sel", "index")?;
                self.select_at(ah, &idx, span)
            }
            ExprKind::Shape(a) => {
                self.tick("Shape", span)?;
                let h = self.eval(a, env)?;
                let s = self.shape_of(h, span)?;
                Ok(self.alloc_vector(&s))
            }
            ExprKind::Reduce(f, z, a) => {
                self.tick("Reduce", span)?;
                let fh = self.eval(f, env)?;
                let zh = self.eval(z, env)?;
                let ah = self.eval(a, env)?;
                self.reduce(fh, zh, ah, span)
            }
            ExprKind::Imap(im) => {
                self.tick("IMap", span)?;
                self.imap_eval(im, env, span)
            }
            ExprKind::Filter(p, a) => {
                self.tick("Filter", span)?;
                let ph = self.eval(p, env)?;
                let ah = self.eval(a, env)?;
                self.filter_make(ph, ah, span)
            }
            ExprKind::IsLim(a) => {
                self.tick("IsLim", span)?;
                let h = self.eval(a, env)?;
                let o = self.ord_of(h, a.span, "IsLim")?;
                Ok(self.alloc_scalar(Scalar::Bool(o.is_limit())))
            }
        }
    }

    /// Allocates a `⊥` placeholder for `x`, evaluates `bound` with `x`
    /// pointing at it, then turns the placeholder into an alias of the
    /// result so every closure that captured it sees the final value.
    fn letrec_bind(&mut self, x: &Name, bound: &Expr, env: &Env) -> EvalResult<Handle> {
        let p = self.store.hole();
        let inner = env.bind(x.clone(), p);
        self.letrec_depth += 1;
        let r = self.eval(bound, &inner);
        self.letrec_depth -= 1;
        let p2 = r?;
        self.store.overwrite(p, Cell::Alias(p2));
        Ok(p2)
    }

    // ---- scalar views -----------------------------------------------------

    pub(crate) fn scalar_of(&mut self, h: Handle, span: Span) -> EvalResult<Scalar> {
        let h = self.store.resolve(h);
        match self.store.get(h) {
            Some(Value::Array(a)) if a.shape.is_empty() => return Ok(a.data[0].clone()),
            Some(Value::Fun(f)) => return Ok(Scalar::Fun(f.clone())),
            None => {
                return err(
                    ErrorKind::UnboundVariable,
                    "Letrec",
                    span,
                    "premature recursive reference",
                )
            }
            _ => {}
        }
        let shape = self.shape_of(h, span)?;
        if shape.is_empty() {
            let inner = self.select_at(h, &[], span)?;
            return self.scalar_of(inner, span);
        }
        err(
            ErrorKind::ShapeMismatch,
            "Scalar",
            span,
            format!("expected a scalar, found an array of shape {}", OrdVec(&shape)),
        )
    }

    fn ord_of(&mut self, h: Handle, span: Span, rule: &'static str) -> EvalResult<Ordinal> {
        match self.scalar_of(h, span)? {
            Scalar::Ord(o) => Ok(o),
            other => err(
                ErrorKind::ShapeMismatch,
                rule,
                span,
                format!("expected an ordinal, found {}", scalar_kind(&other)),
            ),
        }
    }

    fn bool_of(&mut self, h: Handle, span: Span, rule: &'static str) -> EvalResult<bool> {
        match self.scalar_of(h, span)? {
            Scalar::Bool(b) => Ok(b),
            other => err(
                ErrorKind::ShapeMismatch,
                rule,
                span,
                format!("expected a boolean, found {}", scalar_kind(&other)),
            ),
        }
    }

    fn function_of(&mut self, h: Handle, span: Span) -> EvalResult<Rc<FunClosure>> {
        if let Some(Value::Fun(f)) = self.store.get(h) {
            return Ok(f.clone());
        }
        let described = self
            .store
            .get(h)
            .map(Value::kind_name)
            .unwrap_or("placeholder");
        match self.scalar_of(h, span) {
            Ok(Scalar::Fun(f)) => Ok(f),
            _ => err(
                ErrorKind::NotAFunction,
                "App",
                span,
                format!("cannot apply a value of kind {described}"),
            ),
        }
    }

    /// Reads a rank-1 vector of ordinals (indices, shapes, bounds).
    fn ord_vector_of(
        &mut self,
        h: Handle,
        span: Span,
        rule: &'static str,
        what: &str,
    ) -> EvalResult<Vec<Ordinal>> {
        let a = match self.store.get(h) {
            Some(Value::Array(a)) => a.clone(),
            _ => {
                let shape = self.shape_of(h, span)?;
                if shape.len() != 1 || !shape[0].is_natural() {
                    return err(
                        ErrorKind::ShapeMismatch,
                        rule,
                        span,
                        format!(
                            "{what} must be a finite vector of ordinals, found shape {}",
                            OrdVec(&shape)
                        ),
                    );
                }
                self.force_strict(h, span, ErrorKind::ShapeMismatch, rule)?
            }
        };
        match a.as_ord_vector() {
            Some(v) => Ok(v),
            None => err(
                ErrorKind::ShapeMismatch,
                rule,
                span,
                format!(
                    "{what} must be a vector of ordinals, found shape {}",
                    OrdVec(&a.shape)
                ),
            ),
        }
    }

    // ---- application, operators, reduce --------------------------------

    fn call(&mut self, fun: &FunClosure, arg: Handle) -> EvalResult<Handle> {
        let env = fun.env.bind(fun.param.clone(), arg);
        self.eval(&fun.body, &env)
    }

    pub(crate) fn apply_fn(&mut self, f: Handle, arg: Handle, span: Span) -> EvalResult<Handle> {
        self.tick("App", span)?;
        let fun = self.function_of(f, span)?;
        self.call(&fun, arg)
    }

    fn binop(
        &mut self,
        op: BinOp,
        lh: Handle,
        rh: Handle,
        lspan: Span,
        rspan: Span,
        span: Span,
    ) -> EvalResult<Handle> {
        let l = self.scalar_of(lh, lspan)?;
        let r = self.scalar_of(rh, rspan)?;
        let res = match (op, &l, &r) {
            (BinOp::Eq, Scalar::Bool(a), Scalar::Bool(b)) => Scalar::Bool(a == b),
            (_, Scalar::Ord(a), Scalar::Ord(b)) => match op {
                BinOp::Add => Scalar::Ord(a.add(b)),
                BinOp::Sub => Scalar::Ord(a.sub_left(b).map_err(|e| ordinal_error(e, span))?),
                BinOp::Mul => Scalar::Ord(a.mul(b)),
                BinOp::Div => Scalar::Ord(a.div(b).map_err(|e| ordinal_error(e, span))?),
                BinOp::Rem => Scalar::Ord(a.rem(b).map_err(|e| ordinal_error(e, span))?),
                BinOp::Lt => Scalar::Bool(a < b),
                BinOp::Le => Scalar::Bool(a <= b),
                BinOp::Eq => Scalar::Bool(a == b),
                BinOp::Gt => Scalar::Bool(a > b),
                BinOp::Ge => Scalar::Bool(a >= b),
            },
            _ => {
                let bad = if matches!(l, Scalar::Ord(_)) { (&r, rspan) } else { (&l, lspan) };
                return err(
                    ErrorKind::ShapeMismatch,
                    "BinOp",
                    bad.1,
                    format!(
                        "operator `{}` expects ordinal operands, found {}",
                        op.symbol(),
                        scalar_kind(bad.0)
                    ),
                );
            }
        };
        Ok(self.alloc_scalar(res))
    }

    fn reduce(&mut self, f: Handle, z: Handle, a: Handle, span: Span) -> EvalResult<Handle> {
        let arr = self.force_strict(a, span, ErrorKind::ReduceOnInfinite, "Reduce")?;
        let mut acc = z;
        for s in arr.data.iter() {
            let eh = self.alloc_scalar(s.clone());
            let partial = self.apply_fn(f, acc, span)?;
            acc = self.apply_fn(partial, eh, span)?;
        }
        Ok(acc)
    }

    // ---- shapes and forcing ---------------------------------------------

    pub(crate) fn shape_of(&mut self, h: Handle, span: Span) -> EvalResult<Vec<Ordinal>> {
        let h = self.store.resolve(h);
        match self.store.get(h) {
            Some(Value::Array(a)) => Ok(a.shape.clone()),
            Some(Value::Fun(_)) => Ok(Vec::new()),
            Some(Value::Imap(c)) => Ok(c.shape()),
            Some(Value::Filter(_)) => self.filter_shape(h, span),
            None => err(
                ErrorKind::UnboundVariable,
                "Letrec",
                span,
                "premature recursive reference",
            ),
        }
    }

    /// Turns a value of finite shape into a strict array by selecting every
    /// element; `kind` is reported when the shape is infinite.
    pub(crate) fn force_strict(
        &mut self,
        h: Handle,
        span: Span,
        kind: ErrorKind,
        rule: &'static str,
    ) -> EvalResult<Rc<StrictArray>> {
        let h = self.store.resolve(h);
        match self.store.get(h) {
            Some(Value::Array(a)) => return Ok(a.clone()),
            Some(Value::Fun(f)) => {
                return Ok(Rc::new(StrictArray::scalar(Scalar::Fun(f.clone()))))
            }
            _ => {}
        }
        let shape = self.shape_of(h, span)?;
        if !all_finite(&shape) {
            return err(
                kind,
                rule,
                span,
                format!("array of infinite shape {} cannot be forced", OrdVec(&shape)),
            );
        }
        let extents: Vec<usize> = match shape.iter().map(Ordinal::to_usize).collect() {
            Some(e) => e,
            None => {
                return err(kind, rule, span, "array too large to force");
            }
        };
        let size: usize = extents.iter().product();
        let mut data = Vec::with_capacity(size);
        for off in 0..size {
            let idx: Vec<Ordinal> = delinearize(&extents, off)
                .expect("offset in range")
                .into_iter()
                .map(Ordinal::from)
                .collect();
            let eh = self.select_at(h, &idx, span)?;
            data.push(self.scalar_of(eh, span)?);
        }
        Ok(Rc::new(StrictArray { shape, data }))
    }

    // ---- arrays -----------------------------------------------------------

    fn array_literal(&mut self, hs: &[Handle], span: Span) -> EvalResult<Handle> {
        if hs.is_empty() {
            return Ok(self.store.insert(Value::array(StrictArray {
                shape: vec![Ordinal::zero()],
                data: Vec::new(),
            })));
        }
        let first = self.shape_of(hs[0], span)?;
        for &h in &hs[1..] {
            let s = self.shape_of(h, span)?;
            if s != first {
                return err(
                    ErrorKind::HeterogeneousNesting,
                    "Imm-Array",
                    span,
                    format!(
                        "array elements must share one shape, found {} and {}",
                        OrdVec(&first),
                        OrdVec(&s)
                    ),
                );
            }
        }
        let mut shape = vec![Ordinal::from(hs.len())];
        shape.extend(first.iter().cloned());
        if all_finite(&first) {
            let mut data = Vec::new();
            for &h in hs {
                let a = self.force_strict(h, span, ErrorKind::ShapeMismatch, "Imm-Array")?;
                data.extend(a.data.iter().cloned());
            }
            return Ok(self.store.insert(Value::array(StrictArray { shape, data })));
        }
        // infinite elements stay lazy: an imap whose cells are all known
        let memo = hs
            .iter()
            .enumerate()
            .map(|(i, &h)| (vec![Ordinal::from(i)], self.store.resolve(h)))
            .collect();
        Ok(self.store.insert(Value::Imap(ImapClosure {
            frame: vec![Ordinal::from(hs.len())],
            cell: first,
            pending: Vec::new(),
            memo,
        })))
    }

    // ---- imap ------------------------------------------------------------

    fn imap_eval(&mut self, im: &Imap, env: &Env, span: Span) -> EvalResult<Handle> {
        let fh = self.eval(&im.frame, env)?;
        let frame = self.ord_vector_of(fh, im.frame.span, "IMap", "frame shape")?;
        let cell = match &im.cell {
            Some(c) => {
                let ch = self.eval(c, env)?;
                self.ord_vector_of(ch, c.span, "IMap", "cell shape")?
            }
            None => Vec::new(),
        };
        let mut parts = Vec::with_capacity(im.partitions.len());
        for p in &im.partitions {
            let gen = match &p.generator {
                GeneratorSyntax::Full(x) => Gen {
                    var: x.clone(),
                    bounds: IndexBox::of_shape(&frame),
                },
                GeneratorSyntax::Bounds(lo, x, hi) => {
                    self.tick("Gen", lo.span)?;
                    let lh = self.eval(lo, env)?;
                    let lower = self.ord_vector_of(lh, lo.span, "Gen", "generator bound")?;
                    let hh = self.eval(hi, env)?;
                    let upper = self.ord_vector_of(hh, hi.span, "Gen", "generator bound")?;
                    let gspan = lo.span.to(hi.span);
                    if lower.len() != frame.len() || upper.len() != frame.len() {
                        return err(
                            ErrorKind::RankMismatch,
                            "Gen",
                            gspan,
                            format!(
                                "generator bounds {} and {} do not match frame rank {}",
                                OrdVec(&lower),
                                OrdVec(&upper),
                                frame.len()
                            ),
                        );
                    }
                    if lower.iter().zip(&upper).any(|(l, u)| l > u) {
                        return err(
                            ErrorKind::NotAPartition,
                            "Gen",
                            gspan,
                            format!(
                                "generator lower bound {} exceeds upper bound {}",
                                OrdVec(&lower),
                                OrdVec(&upper)
                            ),
                        );
                    }
                    Gen {
                        var: x.clone(),
                        bounds: IndexBox::new(lower, upper),
                    }
                }
            };
            parts.push(Partition {
                gen,
                body: p.body.clone(),
                env: env.clone(),
            });
        }
        let boxes: Vec<&IndexBox> = parts.iter().map(|p| &p.gen.bounds).collect();
        if let Err(msg) = forms_partition(&IndexBox::of_shape(&frame), &boxes) {
            return err(ErrorKind::NotAPartition, "FormsPartition", span, msg);
        }
        parts.retain(|p| !p.gen.bounds.is_empty());

        if self.config.strict_finite_imaps
            && all_finite(&frame)
            && all_finite(&cell)
            && self.letrec_depth == 0
        {
            return self.imap_strict(frame, cell, &parts, span);
        }
        Ok(self.store.insert(Value::Imap(ImapClosure {
            frame,
            cell,
            pending: parts,
            memo: HashMap::new(),
        })))
    }

    fn imap_strict(
        &mut self,
        frame: Vec<Ordinal>,
        cell: Vec<Ordinal>,
        parts: &[Partition],
        span: Span,
    ) -> EvalResult<Handle> {
        let extents: Vec<usize> = match frame.iter().map(Ordinal::to_usize).collect() {
            Some(e) => e,
            None => return err(ErrorKind::IndexOutOfBounds, "IMap-Strict", span, "frame too large"),
        };
        let size: usize = extents.iter().product();
        let mut data = Vec::new();
        for off in 0..size {
            let idx: Vec<Ordinal> = delinearize(&extents, off)
                .expect("offset in range")
                .into_iter()
                .map(Ordinal::from)
                .collect();
            let part = parts
                .iter()
                .find(|p| p.gen.bounds.contains(&idx))
                .expect("generators cover the frame");
            let r = self.eval_partition(part, &idx, &cell)?;
            let a = self.force_strict(r, part.body.span, ErrorKind::ShapeMismatch, "IMap-Strict")?;
            data.extend(a.data.iter().cloned());
        }
        let mut shape = frame;
        shape.extend(cell);
        Ok(self.store.insert(Value::array(StrictArray { shape, data })))
    }

    /// Evaluates a partition body at one frame index and checks the cell
    /// shape of the result.
    fn eval_partition(
        &mut self,
        part: &Partition,
        index: &[Ordinal],
        cell: &[Ordinal],
    ) -> EvalResult<Handle> {
        self.stats.body_evals += 1;
        let iv = self.alloc_vector(index);
        let env = part.env.bind(part.gen.var.clone(), iv);
        let r = self.eval(&part.body, &env)?;
        let s = self.shape_of(r, part.body.span)?;
        if s != cell {
            return err(
                ErrorKind::ShapeMismatch,
                "IMap",
                part.body.span,
                format!(
                    "element at index {} has shape {}, expected cell shape {}",
                    OrdVec(index),
                    OrdVec(&s),
                    OrdVec(cell)
                ),
            );
        }
        Ok(r)
    }

    // ---- selection --------------------------------------------------------

    pub(crate) fn select_at(&mut self, h: Handle, idx: &[Ordinal], span: Span) -> EvalResult<Handle> {
        stacker::maybe_grow(256 * 1024, 8 * 1024 * 1024, || self.select_inner(h, idx, span))
    }

    fn select_inner(&mut self, h: Handle, idx: &[Ordinal], span: Span) -> EvalResult<Handle> {
        let h = self.store.resolve(h);
        let scalar = match self.store.get(h) {
            None => {
                return err(
                    ErrorKind::UnboundVariable,
                    "Letrec",
                    span,
                    "premature recursive reference",
                )
            }
            Some(Value::Imap(_)) => return self.select_imap(h, idx, span),
            Some(Value::Filter(_)) => return self.select_filter(h, idx, span),
            Some(Value::Fun(_)) => {
                self.tick("Sel-strict", span)?;
                if !idx.is_empty() {
                    return rank_error(idx.len(), 0, span, "Sel-strict");
                }
                return Ok(h);
            }
            Some(Value::Array(a)) => {
                if idx.len() != a.shape.len() {
                    return rank_error(idx.len(), a.shape.len(), span, "Sel-strict");
                }
                if a.shape.is_empty() {
                    None
                } else {
                    if idx.iter().zip(&a.shape).any(|(i, s)| i >= s) {
                        return err(
                            ErrorKind::IndexOutOfBounds,
                            "Sel-strict",
                            span,
                            format!(
                                "index {} is outside shape {}",
                                OrdVec(idx),
                                OrdVec(&a.shape)
                            ),
                        );
                    }
                    let ix: Vec<usize> = idx.iter().map(|i| i.to_usize().expect("finite")).collect();
                    let off = linearize(&a.extents(), &ix).expect("bounds checked");
                    Some(a.data[off].clone())
                }
            }
        };
        self.tick("Sel-strict", span)?;
        Ok(match scalar {
            None => h,
            Some(s) => self.alloc_scalar(s),
        })
    }

    fn select_imap(&mut self, h: Handle, idx: &[Ordinal], span: Span) -> EvalResult<Handle> {
        self.tick("Sel-lazy-imap", span)?;
        let Some(Value::Imap(c)) = self.store.get(h) else {
            unreachable!("caller checked")
        };
        let (m, n) = (c.frame.len(), c.cell.len());
        // selecting with just the frame part yields the whole cell
        if idx.len() != m + n && idx.len() != m {
            return rank_error(idx.len(), m + n, span, "Sel-lazy-imap");
        }
        let (i, j) = idx.split_at(m);
        if i.iter().zip(&c.frame).any(|(x, s)| x >= s) {
            return err(
                ErrorKind::IndexOutOfBounds,
                "Sel-lazy-imap",
                span,
                format!("index {} is outside shape {}", OrdVec(idx), OrdVec(&c.shape())),
            );
        }
        let cell_h = match c.memo.get(i) {
            Some(&r) => r,
            None => {
                let Some(k) = c.locate(i) else {
                    return err(
                        ErrorKind::IrreducibleTerm,
                        "Sel-lazy-imap",
                        span,
                        format!("no partition covers index {}", OrdVec(i)),
                    );
                };
                let part = c.pending[k].clone();
                let cell = c.cell.clone();
                let r = self.eval_partition(&part, i, &cell)?;
                if self.config.memoize {
                    self.update_imap(h, i, r);
                }
                r
            }
        };
        if j.is_empty() {
            Ok(cell_h)
        } else {
            self.select_at(cell_h, j, span)
        }
    }

    /// Splits the pending partition holding `index` and memoizes `result`.
    /// The partition is located afresh because evaluating the body may have
    /// split the closure's partitions already.
    fn update_imap(&mut self, h: Handle, index: &[Ordinal], result: Handle) {
        if let Some(Value::Imap(c)) = self.store.get_mut(h) {
            if c.memo.contains_key(index) {
                return;
            }
            if let Some(k) = c.locate(index) {
                c.update(k, index, result);
            }
        }
    }

    // ---- filter ------------------------------------------------------------

    fn filter_make(&mut self, p: Handle, a: Handle, span: Span) -> EvalResult<Handle> {
        let shape = self.shape_of(a, span)?;
        if shape.len() != 1 {
            return err(
                ErrorKind::FilterRankError,
                "Filter",
                span,
                format!("filter expects a vector, found shape {}", OrdVec(&shape)),
            );
        }
        if shape[0].is_natural() {
            let arr = self.force_strict(a, span, ErrorKind::FilterRankError, "Filter")?;
            let mut kept = Vec::new();
            for s in arr.data.iter() {
                let eh = self.alloc_scalar(s.clone());
                self.stats.predicate_calls += 1;
                let r = self.apply_fn(p, eh, span)?;
                if self.bool_of(r, span, "Filter")? {
                    kept.push(s.clone());
                }
            }
            return Ok(self.store.insert(Value::array(StrictArray::vector(kept))));
        }
        Ok(self.store.insert(Value::Filter(FilterClosure {
            predicate: p,
            argument: a,
            length: shape[0].clone(),
            segments: Default::default(),
        })))
    }

    /// Inspects the next unscanned argument element of segment `xi`.
    /// Returns `false` once a finite segment is exhausted.
    fn filter_step(&mut self, h: Handle, xi: &Ordinal, span: Span) -> EvalResult<bool> {
        let Some(Value::Filter(f)) = self.store.get(h) else {
            unreachable!("caller checked")
        };
        let (lam, k) = f.length.limit_part();
        let (p, a) = (f.predicate, f.argument);
        let seg = f.segments.get(xi).cloned().unwrap_or_default();
        if *xi == lam && seg.scanned >= k {
            return Ok(false);
        }
        self.tick("Sel-filter", span)?;
        let pos = xi.add(&Ordinal::natural(seg.scanned.clone()));
        let eh = self.select_at(a, &[pos], span)?;
        self.stats.predicate_calls += 1;
        let r = self.apply_fn(p, eh, span)?;
        let keep = self.bool_of(r, span, "Sel-filter")?;
        if let Some(Value::Filter(f)) = self.store.get_mut(h) {
            let seg = f.segments.entry(xi.clone()).or_default();
            seg.scanned += 1u32;
            if keep {
                seg.accepted.push(eh);
            }
            if *xi == lam && seg.scanned >= k {
                seg.complete = true;
            }
        }
        Ok(true)
    }

    fn select_filter(&mut self, h: Handle, idx: &[Ordinal], span: Span) -> EvalResult<Handle> {
        self.tick("Sel-filter", span)?;
        if idx.len() != 1 {
            return rank_error(idx.len(), 1, span, "Sel-filter");
        }
        let (xi, n) = idx[0].limit_part();
        let length = match self.store.get(h) {
            Some(Value::Filter(f)) => f.length.clone(),
            _ => unreachable!("caller checked"),
        };
        if idx[0] >= length {
            return err(
                ErrorKind::IndexOutOfBounds,
                "Sel-filter",
                span,
                format!("index {} is outside the filtered array's extent {}", idx[0], length),
            );
        }
        let Some(n) = n.to_usize() else {
            return err(ErrorKind::IndexOutOfBounds, "Sel-filter", span, "index too large");
        };
        loop {
            if let Some(Value::Filter(f)) = self.store.get(h) {
                if let Some(seg) = f.segments.get(&xi) {
                    if let Some(&e) = seg.accepted.get(n) {
                        return Ok(e);
                    }
                }
            }
            if !self.filter_step(h, &xi, span)? {
                let got = match self.store.get(h) {
                    Some(Value::Filter(f)) => f.segments.get(&xi).map_or(0, |s| s.accepted.len()),
                    _ => 0,
                };
                return err(
                    ErrorKind::IndexOutOfBounds,
                    "Sel-filter",
                    span,
                    format!(
                        "index {} is outside the filtered array: segment {} holds {} element(s)",
                        idx[0], xi, got
                    ),
                );
            }
        }
    }

    /// `[λ + accepted]` where the argument has extent `λ + k`: the trailing
    /// `k` elements are tested so the finite rest of the shape is known.
    fn filter_shape(&mut self, h: Handle, span: Span) -> EvalResult<Vec<Ordinal>> {
        let length = match self.store.get(h) {
            Some(Value::Filter(f)) => f.length.clone(),
            _ => unreachable!("caller checked"),
        };
        let (lam, k) = length.limit_part();
        if k.is_zero() {
            return Ok(vec![lam]);
        }
        while self.filter_step(h, &lam, span)? {}
        let accepted = match self.store.get(h) {
            Some(Value::Filter(f)) => f.segments.get(&lam).map_or(0, |s| s.accepted.len()),
            _ => 0,
        };
        Ok(vec![lam.add(&Ordinal::natural(BigUint::from(accepted)))])
    }
}

fn rank_error<T>(got: usize, want: usize, span: Span, rule: &'static str) -> EvalResult<T> {
    err(
        ErrorKind::RankMismatch,
        rule,
        span,
        format!("index of length {got} used on an array of rank {want}"),
    )
}

fn scalar_kind(s: &Scalar) -> &'static str {
    match s {
        Scalar::Ord(_) => "an ordinal",
        Scalar::Bool(_) => "a boolean",
        Scalar::Fun(_) => "a function",
    }
}

/// Checks that the non-empty generator boxes lie inside `frame`, are
/// pairwise disjoint and together cover it.
pub fn forms_partition(frame: &IndexBox, gens: &[&IndexBox]) -> Result<(), String> {
    let mut uncovered: Vec<IndexBox> = if frame.is_empty() {
        Vec::new()
    } else {
        vec![frame.clone()]
    };
    for g in gens {
        if g.is_empty() {
            continue;
        }
        // g must lie within what is still uncovered
        let mut outside = vec![(*g).clone()];
        for r in &uncovered {
            outside = outside
                .into_iter()
                .flat_map(|b| {
                    let cut = b.intersect(r);
                    box_subtract(&b, &cut)
                })
                .collect();
        }
        if let Some(b) = outside.first() {
            return Err(format!(
                "generator {} overlaps another generator or leaves the frame (at {})",
                g,
                OrdVec(&b.lower)
            ));
        }
        uncovered = uncovered
            .into_iter()
            .flat_map(|r| {
                let cut = r.intersect(g);
                box_subtract(&r, &cut)
            })
            .collect();
    }
    match uncovered.first() {
        None => Ok(()),
        Some(b) => Err(format!(
            "generators do not cover the frame {}: index {} is missing",
            OrdVec(&frame.upper),
            OrdVec(&b.lower)
        )),
    }
}
