//! Values, the store of cells they live in, environments, and index-space
//! helpers (row-major linearization and box subtraction).

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::rc::Rc;

use num_bigint::BigUint;
use thiserror::Error;

use crate::ordinal::Ordinal;
use crate::syntax::{Expr, Name};

/// Opaque reference to a store cell. Handles are never reused.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Handle(usize);

impl Handle {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for Handle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Debug)]
pub enum Cell {
    /// The `⊥` placeholder of a `letrec` binding under construction.
    Hole,
    /// Forwarding pointer installed when a placeholder is patched.
    Alias(Handle),
    Value(Value),
}

#[derive(Debug, Default)]
pub struct Store {
    cells: Vec<Cell>,
}

impl Store {
    pub fn new() -> Self {
        Store::default()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn insert(&mut self, v: Value) -> Handle {
        self.cells.push(Cell::Value(v));
        Handle(self.cells.len() - 1)
    }

    pub fn hole(&mut self) -> Handle {
        self.cells.push(Cell::Hole);
        Handle(self.cells.len() - 1)
    }

    pub fn cell(&self, h: Handle) -> &Cell {
        &self.cells[h.0]
    }

    /// Replaces the contents of a cell, keeping its handle.
    pub fn overwrite(&mut self, h: Handle, c: Cell) {
        self.cells[h.0] = c;
    }

    /// Follows alias cells to the cell that actually holds content.
    pub fn resolve(&self, mut h: Handle) -> Handle {
        while let Cell::Alias(next) = self.cells[h.0] {
            h = next;
        }
        h
    }

    /// The value behind `h`, or `None` for an unpatched placeholder.
    pub fn get(&self, h: Handle) -> Option<&Value> {
        match &self.cells[self.resolve(h).0] {
            Cell::Value(v) => Some(v),
            _ => None,
        }
    }

    pub fn get_mut(&mut self, h: Handle) -> Option<&mut Value> {
        let h = self.resolve(h);
        match &mut self.cells[h.0] {
            Cell::Value(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Debug)]
struct EnvNode {
    name: Name,
    handle: Handle,
    next: Env,
}

/// Persistent name → handle bindings; the newest binding wins.
#[derive(Clone, Debug, Default)]
pub struct Env(Option<Rc<EnvNode>>);

impl Env {
    pub fn new() -> Self {
        Env(None)
    }

    pub fn bind(&self, name: Name, handle: Handle) -> Env {
        Env(Some(Rc::new(EnvNode {
            name,
            handle,
            next: self.clone(),
        })))
    }

    pub fn lookup(&self, name: &str) -> Option<Handle> {
        let mut cur = &self.0;
        while let Some(node) = cur {
            if &*node.name == name {
                return Some(node.handle);
            }
            cur = &node.next.0;
        }
        None
    }

    /// Bound names, newest first, shadowed names included.
    pub fn names(&self) -> Vec<Name> {
        let mut out = Vec::new();
        let mut cur = &self.0;
        while let Some(node) = cur {
            out.push(node.name.clone());
            cur = &node.next.0;
        }
        out
    }
}

#[derive(Debug)]
pub struct FunClosure {
    pub param: Name,
    pub body: Rc<Expr>,
    pub env: Env,
}

/// An element of a strict array.
#[derive(Clone, Debug)]
pub enum Scalar {
    Ord(Ordinal),
    Bool(bool),
    Fun(Rc<FunClosure>),
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Scalar::Ord(a), Scalar::Ord(b)) => a == b,
            (Scalar::Bool(a), Scalar::Bool(b)) => a == b,
            (Scalar::Fun(a), Scalar::Fun(b)) => Rc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Ord(o) => write!(f, "{o}"),
            Scalar::Bool(b) => write!(f, "{b}"),
            Scalar::Fun(c) => write!(f, "<fun \\{}>", c.param),
        }
    }
}

/// Shape plus elements in row-major order. Every shape component is finite.
#[derive(Clone, Debug, PartialEq)]
pub struct StrictArray {
    pub shape: Vec<Ordinal>,
    pub data: Vec<Scalar>,
}

impl StrictArray {
    pub fn scalar(s: Scalar) -> Self {
        StrictArray {
            shape: Vec::new(),
            data: vec![s],
        }
    }

    pub fn vector(data: Vec<Scalar>) -> Self {
        StrictArray {
            shape: vec![Ordinal::from(data.len())],
            data,
        }
    }

    pub fn ord_vector(v: &[Ordinal]) -> Self {
        StrictArray::vector(v.iter().cloned().map(Scalar::Ord).collect())
    }

    /// The shape components as machine integers.
    pub fn extents(&self) -> Vec<usize> {
        self.shape
            .iter()
            .map(|s| s.to_usize().expect("strict arrays have finite shape"))
            .collect()
    }

    /// Interprets a rank-1 array of ordinals as an index/shape vector.
    pub fn as_ord_vector(&self) -> Option<Vec<Ordinal>> {
        if self.shape.len() != 1 {
            return None;
        }
        self.data
            .iter()
            .map(|s| match s {
                Scalar::Ord(o) => Some(o.clone()),
                _ => None,
            })
            .collect()
    }
}

/// An index box `[lower, upper)` over ordinal coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IndexBox {
    pub lower: Vec<Ordinal>,
    pub upper: Vec<Ordinal>,
}

impl IndexBox {
    pub fn new(lower: Vec<Ordinal>, upper: Vec<Ordinal>) -> Self {
        debug_assert_eq!(lower.len(), upper.len());
        IndexBox { lower, upper }
    }

    /// The box `[0⃗, shape)`.
    pub fn of_shape(shape: &[Ordinal]) -> Self {
        IndexBox::new(vec![Ordinal::zero(); shape.len()], shape.to_vec())
    }

    /// The single-point box `[i, i + 1⃗)`.
    pub fn point(index: &[Ordinal]) -> Self {
        IndexBox::new(index.to_vec(), index.iter().map(Ordinal::succ).collect())
    }

    pub fn rank(&self) -> usize {
        self.lower.len()
    }

    /// Rank-0 boxes hold exactly one (empty) index.
    pub fn is_empty(&self) -> bool {
        self.lower.iter().zip(&self.upper).any(|(l, u)| l >= u)
    }

    pub fn contains(&self, index: &[Ordinal]) -> bool {
        index.len() == self.rank()
            && index
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(i, (l, u))| l <= i && i < u)
    }

    pub fn intersect(&self, other: &IndexBox) -> IndexBox {
        IndexBox::new(
            self.lower
                .iter()
                .zip(&other.lower)
                .map(|(a, b)| a.max(b).clone())
                .collect(),
            self.upper
                .iter()
                .zip(&other.upper)
                .map(|(a, b)| a.min(b).clone())
                .collect(),
        )
    }
}

impl fmt::Display for IndexBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{})-{})", OrdVec(&self.lower), OrdVec(&self.upper))
    }
}

/// Displays an ordinal slice as `[a, b, c]`.
pub struct OrdVec<'a>(pub &'a [Ordinal]);

impl fmt::Display for OrdVec<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, o) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{o}")?;
        }
        f.write_str("]")
    }
}

/// `outer \ inner` as disjoint boxes, `inner ⊆ outer`. Pieces come in the
/// order: axis 0 below, axis 0 above, axis 1 below, axis 1 above, … and
/// empty pieces are omitted.
pub fn box_subtract(outer: &IndexBox, inner: &IndexBox) -> Vec<IndexBox> {
    debug_assert_eq!(outer.rank(), inner.rank());
    if inner.is_empty() {
        return if outer.is_empty() {
            Vec::new()
        } else {
            vec![outer.clone()]
        };
    }
    let mut out = Vec::new();
    // the slab still to be carved: axes < d already narrowed to inner
    let mut rest = outer.clone();
    for d in 0..outer.rank() {
        if rest.lower[d] < inner.lower[d] {
            let mut below = rest.clone();
            below.upper[d] = inner.lower[d].clone();
            out.push(below);
        }
        if inner.upper[d] < rest.upper[d] {
            let mut above = rest.clone();
            above.lower[d] = inner.upper[d].clone();
            out.push(above);
        }
        rest.lower[d] = inner.lower[d].clone();
        rest.upper[d] = inner.upper[d].clone();
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IndexError {
    #[error("index rank {index} does not match array rank {shape}")]
    RankMismatch { index: usize, shape: usize },
    #[error("index {index} is outside shape {shape}")]
    OutOfBounds { index: String, shape: String },
    #[error("offset {offset} is outside an array of {size} elements")]
    OffsetOutOfBounds { offset: usize, size: usize },
}

/// Row-major offset of `index` within `shape` (0-based).
pub fn linearize(shape: &[usize], index: &[usize]) -> Result<usize, IndexError> {
    if shape.len() != index.len() {
        return Err(IndexError::RankMismatch {
            index: index.len(),
            shape: shape.len(),
        });
    }
    let mut off = 0usize;
    for (&s, &i) in shape.iter().zip(index) {
        if i >= s {
            return Err(IndexError::OutOfBounds {
                index: format!("{index:?}"),
                shape: format!("{shape:?}"),
            });
        }
        off = off * s + i;
    }
    Ok(off)
}

/// Inverse of [`linearize`].
pub fn delinearize(shape: &[usize], offset: usize) -> Result<Vec<usize>, IndexError> {
    let size: usize = shape.iter().product();
    if offset >= size {
        return Err(IndexError::OffsetOutOfBounds { offset, size });
    }
    let mut idx = vec![0; shape.len()];
    let mut rest = offset;
    for (d, &s) in shape.iter().enumerate().rev() {
        idx[d] = rest % s;
        rest /= s;
    }
    Ok(idx)
}

/// An evaluated generator `lower <= var < upper`.
#[derive(Clone, Debug, PartialEq)]
pub struct Gen {
    pub var: Name,
    pub bounds: IndexBox,
}

/// A not yet evaluated region of an imap closure.
#[derive(Clone, Debug)]
pub struct Partition {
    pub gen: Gen,
    pub body: Rc<Expr>,
    pub env: Env,
}

/// A lazily evaluated imap. Regions still awaiting evaluation are kept in
/// `pending`; every element computed so far sits in `memo` as a single-index
/// partition keyed by its frame index.
#[derive(Clone, Debug)]
pub struct ImapClosure {
    pub frame: Vec<Ordinal>,
    pub cell: Vec<Ordinal>,
    pub pending: Vec<Partition>,
    pub memo: HashMap<Vec<Ordinal>, Handle>,
}

impl ImapClosure {
    pub fn shape(&self) -> Vec<Ordinal> {
        let mut s = self.frame.clone();
        s.extend(self.cell.iter().cloned());
        s
    }

    /// Position in `pending` of the partition covering `index`.
    pub fn locate(&self, index: &[Ordinal]) -> Option<usize> {
        // recently split pieces sit at the end and are the likeliest hits
        self.pending
            .iter()
            .rposition(|p| p.gen.bounds.contains(index))
    }

    /// Records the value of `index` (inside pending partition `k`) and
    /// splits that partition around it.
    pub fn update(&mut self, k: usize, index: &[Ordinal], result: Handle) {
        let part = self.pending.swap_remove(k);
        let point = IndexBox::point(index);
        for piece in box_subtract(&part.gen.bounds, &point) {
            self.pending.push(Partition {
                gen: Gen {
                    var: part.gen.var.clone(),
                    bounds: piece,
                },
                body: part.body.clone(),
                env: part.env.clone(),
            });
        }
        self.memo.insert(index.to_vec(), result);
    }
}

/// Progress of a filter within one segment `[ξ, ξ + ω)` of its argument.
#[derive(Clone, Debug, Default)]
pub struct FilterSegment {
    pub accepted: Vec<Handle>,
    pub scanned: BigUint,
    /// Set once a finite segment has been scanned to its end.
    pub complete: bool,
}

#[derive(Clone, Debug)]
pub struct FilterClosure {
    pub predicate: Handle,
    pub argument: Handle,
    /// The argument's (rank-1) extent.
    pub length: Ordinal,
    pub segments: BTreeMap<Ordinal, FilterSegment>,
}

#[derive(Clone, Debug)]
pub enum Value {
    Array(Rc<StrictArray>),
    /// A function scalar.
    Fun(Rc<FunClosure>),
    Imap(ImapClosure),
    Filter(FilterClosure),
}

impl Value {
    /// Wraps a scalar, normalising functions to [`Value::Fun`].
    pub fn scalar(s: Scalar) -> Value {
        match s {
            Scalar::Fun(f) => Value::Fun(f),
            s => Value::Array(Rc::new(StrictArray::scalar(s))),
        }
    }

    pub fn array(a: StrictArray) -> Value {
        if a.shape.is_empty() {
            if let Some(Scalar::Fun(f)) = a.data.first() {
                return Value::Fun(f.clone());
            }
        }
        Value::Array(Rc::new(a))
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Value::Array(a) if a.shape.is_empty() => match a.data[0] {
                Scalar::Ord(_) => "ordinal",
                Scalar::Bool(_) => "boolean",
                Scalar::Fun(_) => "function",
            },
            Value::Array(_) => "array",
            Value::Fun(_) => "function",
            Value::Imap(_) => "imap closure",
            Value::Filter(_) => "filter closure",
        }
    }
}
