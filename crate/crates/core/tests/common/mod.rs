//! Shared fixtures for the integration tests and the acceptance runner:
//! golden programs, independent oracles and random generators.
#![allow(dead_code)]

use std::rc::Rc;

use heh_core::ordinal::Ordinal;
use heh_core::syntax::{BinOp, Expr, ExprKind, GeneratorSyntax, Imap, PartitionSyntax, Span};
use heh_core::{EvalConfig, Handle, Session, Value};
use rand::seq::SliceRandom;
use rand::Rng;

pub mod laws;

pub fn session(config: EvalConfig) -> Session {
    Session::with_prelude(config).expect("prelude loads")
}

pub fn run(s: &mut Session, src: &str) -> Handle {
    match s.run_source(src) {
        Ok(Some(h)) => h,
        Ok(None) => panic!("`{src}` has no final expression"),
        Err(e) => panic!("`{src}` failed: {e:?}"),
    }
}

/// Text of a value that does not depend on the evaluation mode: finite
/// values are forced and printed in full, infinite ones through the lazy
/// renderer with `k = 10`.
pub fn observe(s: &mut Session, h: Handle) -> Result<String, heh_core::EvalError> {
    let shape = s.shape(h)?;
    if shape.iter().all(Ordinal::is_natural) && !matches!(s.value(h), Some(Value::Fun(_))) {
        let a = s.force(h)?;
        let h = s.alloc(Value::Array(a));
        return s.render(h, 0);
    }
    s.render(h, 10)
}

/// Observes `program`'s final value, or the element at `index` when given.
pub fn outcome(s: &mut Session, program: &str, index: Option<&str>) -> Result<String, heh_core::Error> {
    let h = s.run_source(program)?.ok_or(heh_core::Error::NoResult)?;
    let target = match index {
        Some(idx) => s.select_source(h, idx)?,
        None => h,
    };
    Ok(observe(s, target)?)
}

pub fn example_source(name: &str) -> String {
    let path = format!("{}/examples/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

pub struct Golden {
    pub name: &'static str,
    pub program: &'static str,
    /// `(index, expected)`; an empty index observes the whole value.
    pub probes: &'static [(&'static str, &'static str)],
}

const NATS: &str = "letrec nats = imap [w] {
    [0] <= iv < [1]: 0,
    [1] <= iv < [w]: nats.(subv iv [1]) + 1 }
nats";

const COUNTDOWN: &str = "letrec a = imap [10] {
    [9] <= iv < [10]: 9,
    [0] <= iv < [9]: a.(addv iv [1]) - 1 }
a";

const TAIL: &str = "let a = imap [w + 42] { _(iv): iv.[0] }
let t = tail a
[t.[w], a.[w], t.[0], t.[w + 40]]";

/// Outcomes stated for the calculus' worked examples and the prelude.
pub const GOLDEN: &[Golden] = &[
    Golden {
        name: "identity",
        program: r"(\x. x) 42",
        probes: &[("", "42")],
    },
    Golden {
        name: "reduce",
        program: r"reduce (\x. \y. x + y) 0 [[1, 2], [3, 4]]",
        probes: &[("", "10")],
    },
    Golden {
        name: "shape of []",
        program: "|[]|",
        probes: &[("", "[0]")],
    },
    Golden {
        name: "shape of [[]]",
        program: "|[[]]|",
        probes: &[("", "[1, 0]")],
    },
    Golden {
        name: "shape of 42",
        program: "|42|",
        probes: &[("", "[]")],
    },
    Golden {
        name: "shape of true",
        program: "|true|",
        probes: &[("", "[]")],
    },
    Golden {
        name: "3x3 imap",
        program: "imap [3, 3] { _(iv): iv.[0] * 3 + iv.[1] }",
        probes: &[("", "[[0, 1, 2], [3, 4, 5], [6, 7, 8]]")],
    },
    Golden {
        name: "selection",
        program: "[[1, 2], [3, 4]]",
        probes: &[("[1, 1]", "4"), ("[0, 1]", "2")],
    },
    Golden {
        name: "lazy nats",
        program: "imap [w] { _(iv): iv.[0] }",
        probes: &[("[5]", "5"), ("[1000]", "1000")],
    },
    Golden {
        name: "recursive nats",
        program: NATS,
        probes: &[("[0]", "0"), ("[5]", "5"), ("[100]", "100")],
    },
    Golden {
        name: "countdown",
        program: COUNTDOWN,
        probes: &[("[0]", "0"), ("[4]", "4"), ("", "[0, 1, 2, 3, 4, 5, 6, 7, 8, 9]")],
    },
    Golden {
        name: "tail beyond omega",
        program: TAIL,
        probes: &[("", "[w, w, 1, w + 40]")],
    },
    Golden {
        name: "shape of tail",
        program: "|tail (imap [w + 42] { _(iv): iv.[0] })|",
        probes: &[("", "[w + 42]")],
    },
    Golden {
        name: "constant cell",
        program: "imap [2]|[4] { [0] <= iv < [2]: [1, 2, 3, 4] }",
        probes: &[("", "[[1, 2, 3, 4], [1, 2, 3, 4]]")],
    },
    Golden {
        name: "scalar imap",
        program: "imap [] { _(iv): 7 }",
        probes: &[("", "7")],
    },
    Golden {
        name: "head",
        program: "head [7, 8, 9]",
        probes: &[("", "7")],
    },
    Golden {
        name: "drop",
        program: "drop [1] [5, 6, 7]",
        probes: &[("", "[6, 7]")],
    },
    Golden {
        name: "cons and concat",
        program: "cons 1 ([2] ++ [3, 4])",
        probes: &[("", "[1, 2, 3, 4]")],
    },
    Golden {
        name: "reverse",
        program: "reverse [1, 2, 3]",
        probes: &[("", "[3, 2, 1]")],
    },
    Golden {
        name: "sum",
        program: "[sum [1, 2, 3, 4], sum 5, sum []]",
        probes: &[("", "[10, 5, 0]")],
    },
    Golden {
        name: "increment",
        program: "[increment [1, 2, 3], increment [4, 5, 6]]",
        probes: &[("", "[[2, 3, 4], [5, 6, 7]]")],
    },
    Golden {
        name: "zip",
        program: "let nats = imap [w] { _(iv): iv.[0] }\nzip nats nats",
        probes: &[("[4]", "[4, 4]"), ("[4, 1]", "4")],
    },
    Golden {
        name: "fused zip",
        program: "zipf [1, 2, 3] (imap [w] { _(iv): iv.[0] * 10 })",
        probes: &[("", "[[1, 0], [2, 10], [3, 20]]")],
    },
    Golden {
        name: "mixed radix",
        program: "[i2o [1, 5] [2, w], i2o [2, 3] [4, 5]]",
        probes: &[("", "[w + 5, 13]")],
    },
    Golden {
        name: "mixed radix inverse",
        program: "o2i (w + 5) [2, w]",
        probes: &[("", "[1, 5]")],
    },
    Golden {
        name: "flatten",
        program: "flatten [[1, 2], [3, 4]]",
        probes: &[("", "[1, 2, 3, 4]")],
    },
    Golden {
        name: "reshape",
        program: "reshape [3, 2] [1, 2, 3, 4, 5, 6]",
        probes: &[("", "[[1, 2], [3, 4], [5, 6]]")],
    },
    Golden {
        name: "ordinal addition",
        program: "[2 + w, w + 2, 2 * w, w * 2]",
        probes: &[("", "[w, w + 2, w, w*2]")],
    },
    Golden {
        name: "limit test",
        program: "[islim w, islim (w + 21), islim 0]",
        probes: &[("", "[true, false, false]")],
    },
    Golden {
        name: "finite filter",
        program: r"filter (\x. x % 2 = 0) [1, 2, 3, 4]",
        probes: &[("", "[2, 4]")],
    },
    Golden {
        name: "evens",
        program: r"filter (\x. x % 2 = 0) (imap [w] { _(iv): iv.[0] })",
        probes: &[("[3]", "6"), ("[0]", "0")],
    },
    Golden {
        name: "blinker",
        program: "gol_step [[0, 0, 0], [1, 1, 1], [0, 0, 0]]",
        probes: &[("", "[[0, 1, 0], [0, 1, 0], [0, 1, 0]]")],
    },
];

pub fn configs() -> [(&'static str, EvalConfig); 4] {
    let c = |strict, memo| EvalConfig {
        strict_finite_imaps: strict,
        memoize: memo,
        fuel: None,
    };
    [
        ("lazy+memo", c(false, true)),
        ("lazy+no-memo", c(false, false)),
        ("strict+memo", c(true, true)),
        ("strict+no-memo", c(true, false)),
    ]
}

pub fn ackermann(m: u64, n: u64) -> u64 {
    match (m, n) {
        (0, n) => n + 1,
        (m, 0) => ackermann(m - 1, 1),
        (m, n) => ackermann(m - 1, ackermann(m, n - 1)),
    }
}

/// One Game of Life step on a finite board; cells outside count as dead.
pub fn life_step(board: &[Vec<u8>]) -> Vec<Vec<u8>> {
    let rows = board.len() as i64;
    let cols = board.first().map_or(0, Vec::len) as i64;
    let at = |r: i64, c: i64| -> u8 {
        if r < 0 || c < 0 || r >= rows || c >= cols {
            0
        } else {
            board[r as usize][c as usize]
        }
    };
    (0..rows)
        .map(|r| {
            (0..cols)
                .map(|c| {
                    let mut live = 0;
                    for dr in -1..=1 {
                        for dc in -1..=1 {
                            if (dr, dc) != (0, 0) {
                                live += at(r + dr, c + dc);
                            }
                        }
                    }
                    u8::from(live == 3 || (live == 2 && at(r, c) == 1))
                })
                .collect()
        })
        .collect()
}

pub fn board_literal(board: &[Vec<u8>]) -> String {
    let rows: Vec<String> = board
        .iter()
        .map(|r| format!("[{}]", r.iter().map(u8::to_string).collect::<Vec<_>>().join(", ")))
        .collect();
    format!("[{}]", rows.join(", "))
}

/// A random board with the given pattern of live cells.
pub fn random_board<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Vec<Vec<u8>> {
    (0..rows)
        .map(|_| (0..cols).map(|_| u8::from(rng.gen_bool(0.35))).collect())
        .collect()
}

/// A random array literal of the given rank with extents in `1..=max`
/// (rank 1 may also be empty) and small natural elements. Returns the
/// source text and the elements in row-major order.
pub fn random_array<R: Rng>(rng: &mut R, rank: usize, max: usize) -> (String, Vec<usize>, Vec<u64>) {
    let lo = usize::from(rank != 1);
    let shape: Vec<usize> = (0..rank).map(|_| rng.gen_range(lo..=max)).collect();
    let total: usize = shape.iter().product();
    let data: Vec<u64> = (0..total).map(|_| rng.gen_range(0..100)).collect();
    (nested_literal(&shape, &data), shape, data)
}

/// Source text of the array with the given shape and row-major elements.
pub fn nested_literal(shape: &[usize], data: &[u64]) -> String {
    fn go(shape: &[usize], data: &[u64]) -> String {
        match shape {
            [] => data[0].to_string(),
            [n, rest @ ..] => {
                let stride: usize = rest.iter().product();
                let parts: Vec<String> = (0..*n)
                    .map(|i| go(rest, &data[i * stride..(i + 1) * stride]))
                    .collect();
                format!("[{}]", parts.join(", "))
            }
        }
    }
    go(shape, data)
}

pub fn vector_literal(xs: &[u64]) -> String {
    format!("[{}]", xs.iter().map(u64::to_string).collect::<Vec<_>>().join(", "))
}

// Random ASTs for the printer/parser round trip.

const NAMES: &[&str] = &["a", "b", "x", "iv", "foo", "x1", "acc_2"];

fn name<R: Rng>(rng: &mut R) -> Rc<str> {
    Rc::from(*NAMES.choose(rng).unwrap())
}

fn node(kind: ExprKind) -> Expr {
    Expr::new(kind, Span::default())
}

pub fn random_ordinal<R: Rng>(rng: &mut R) -> Ordinal {
    if rng.gen_bool(0.6) {
        return Ordinal::from(rng.gen_range(0u64..50));
    }
    let mut terms = Vec::new();
    let mut e = rng.gen_range(1u32..4);
    loop {
        terms.push((e, rng.gen_range(1u32..20)));
        if e == 0 || rng.gen_bool(0.4) {
            break;
        }
        e = rng.gen_range(0..e);
    }
    Ordinal::from_terms(terms).unwrap()
}

pub fn random_expr<R: Rng>(rng: &mut R, depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.15) {
        return match rng.gen_range(0..4) {
            0 | 1 => node(ExprKind::Ord(random_ordinal(rng))),
            2 => node(ExprKind::Bool(rng.gen())),
            _ => node(ExprKind::Var(name(rng))),
        };
    }
    let d = depth - 1;
    let sub = |rng: &mut R| Rc::new(random_expr(rng, d));
    match rng.gen_range(0..12) {
        0 => node(ExprKind::Lambda(name(rng), sub(rng))),
        1 => node(ExprKind::Apply(sub(rng), sub(rng))),
        2 => node(ExprKind::Cond(sub(rng), sub(rng), sub(rng))),
        3 => node(ExprKind::Letrec(name(rng), sub(rng), sub(rng))),
        4 => {
            let op = *[
                BinOp::Add,
                BinOp::Sub,
                BinOp::Mul,
                BinOp::Div,
                BinOp::Rem,
                BinOp::Lt,
                BinOp::Le,
                BinOp::Eq,
                BinOp::Gt,
                BinOp::Ge,
            ]
            .choose(rng)
            .unwrap();
            node(ExprKind::BinOp(op, sub(rng), sub(rng)))
        }
        5 => {
            let n = rng.gen_range(0..4);
            node(ExprKind::Array((0..n).map(|_| sub(rng)).collect()))
        }
        6 => node(ExprKind::Select(sub(rng), sub(rng))),
        7 => node(ExprKind::Shape(sub(rng))),
        8 => node(ExprKind::Reduce(sub(rng), sub(rng), sub(rng))),
        9 => {
            let frame = sub(rng);
            let cell = if rng.gen_bool(0.3) { Some(sub(rng)) } else { None };
            let partitions = (0..rng.gen_range(1..4))
                .map(|_| {
                    let generator = if rng.gen_bool(0.4) {
                        GeneratorSyntax::Full(name(rng))
                    } else {
                        GeneratorSyntax::Bounds(sub(rng), name(rng), sub(rng))
                    };
                    PartitionSyntax {
                        generator,
                        body: sub(rng),
                    }
                })
                .collect();
            node(ExprKind::Imap(Imap {
                frame,
                cell,
                partitions,
            }))
        }
        10 => node(ExprKind::Filter(sub(rng), sub(rng))),
        _ => node(ExprKind::IsLim(sub(rng))),
    }
}

// Checkers for the shipped example programs.

/// Probes `ackermann.heh` at every index in `probes` against the oracle.
pub fn check_ackermann(s: &mut Session, probes: &[(u64, u64)]) -> Result<(), String> {
    let h = s
        .run_source(&example_source("ackermann.heh"))
        .map_err(|e| e.to_string())?
        .ok_or("no result")?;
    for &(m, n) in probes {
        let e = s
            .select(h, &[Ordinal::from(m), Ordinal::from(n)])
            .map_err(|e| format!("[{m}, {n}]: {e}"))?;
        let got = s.render(e, 0).map_err(|e| e.to_string())?;
        let want = ackermann(m, n).to_string();
        if got != want {
            return Err(format!("A({m}, {n}) = {got}, expected {want}"));
        }
    }
    Ok(())
}

/// Runs `steps` applications of `gol_step` to `board` and compares the
/// whole result with the direct simulator.
pub fn check_life(s: &mut Session, board: &[Vec<u8>], steps: usize) -> Result<(), String> {
    let mut src = board_literal(board);
    let mut want = board.to_vec();
    for _ in 0..steps {
        src = format!("gol_step ({src})");
        want = life_step(&want);
    }
    let h = s.run_source(&src).map_err(|e| e.to_string())?.ok_or("no result")?;
    let got = observe(s, h).map_err(|e| e.to_string())?;
    if got != board_literal(&want) {
        return Err(format!("{} after {steps} steps:\n got {got}\nwant {}", board_literal(board), board_literal(&want)));
    }
    Ok(())
}

pub const GLIDER: [[u8; 3]; 3] = [[0, 1, 0], [0, 0, 1], [1, 1, 1]];

/// Runs the glider on the `[w, w]` plane for `steps` generations and
/// compares the `window` x `window` corner with a simulator on a board
/// large enough that its far edges cannot influence the window.
pub fn check_life_plane(s: &mut Session, steps: usize, window: usize) -> Result<(), String> {
    let size = window + steps + 2;
    let mut want = vec![vec![0u8; size]; size];
    for (r, row) in GLIDER.iter().enumerate() {
        want[r][..3].copy_from_slice(row);
    }
    for _ in 0..steps {
        want = life_step(&want);
    }
    let src = "let glider = [[0, 1, 0], [0, 0, 1], [1, 1, 1]]\n\
               let plane = imap [w, w] { _(iv):\n    \
               if and (iv.[0] < 3) (iv.[1] < 3) then glider.iv else 0 }\nplane";
    let mut h = s.run_source(src).map_err(|e| e.to_string())?.ok_or("no result")?;
    for _ in 0..steps {
        let step = s.lookup("gol_step").ok_or("gol_step missing")?;
        h = s.apply(step, h).map_err(|e| e.to_string())?;
    }
    for r in 0..window {
        for c in 0..window {
            let e = s
                .select(h, &[Ordinal::from(r), Ordinal::from(c)])
                .map_err(|e| format!("[{r}, {c}]: {e}"))?;
            let got = s.render(e, 0).map_err(|e| e.to_string())?;
            if got != want[r][c].to_string() {
                return Err(format!("cell [{r}, {c}] after {steps} steps: {got}, expected {}", want[r][c]));
            }
        }
    }
    Ok(())
}

/// A random ordinal in normal form with at most four terms, exponents at
/// most 5 and coefficients at most 10^6.
pub fn random_cnf<R: Rng>(rng: &mut R) -> Ordinal {
    let mut exps: Vec<u32> = (0..=5).collect();
    exps.shuffle(rng);
    let mut exps: Vec<u32> = exps.into_iter().take(rng.gen_range(0..=4)).collect();
    exps.sort_unstable_by(|a, b| b.cmp(a));
    Ordinal::from_terms(exps.into_iter().map(|e| (e, rng.gen_range(1u32..=1_000_000)))).unwrap()
}

/// Checks the ordinal laws on one triple; returns the first failing law.
pub fn ordinal_laws(a: &Ordinal, b: &Ordinal, c: &Ordinal) -> Result<(), String> {
    let fail = |law: &str| Err(format!("{law} fails for a = {a}, b = {b}, c = {c}"));
    if a.add(&b.add(c)) != a.add(b).add(c) {
        return fail("associativity of +");
    }
    if a.mul(&b.mul(c)) != a.mul(b).mul(c) {
        return fail("associativity of *");
    }
    if a.mul(&b.add(c)) != a.mul(b).add(&a.mul(c)) {
        return fail("left distributivity");
    }
    // left cancellation: a + b = a + c implies b = c, via left subtraction
    if a.add(b).sub_left(a).as_ref() != Ok(b) {
        return fail("left cancellation");
    }
    if (a.add(b) == a.add(c)) != (b == c) {
        return fail("left cancellation (injectivity)");
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    match hi.sub_left(lo) {
        Ok(d) if lo.add(&d) == *hi => {}
        _ => return fail("subtraction round trip"),
    }
    if !b.is_zero() {
        match a.div_rem(b) {
            Ok((q, r)) if b.mul(&q).add(&r) == *a && r < *b => {}
            _ => return fail("division theorem"),
        }
    }
    Ok(())
}

/// Parses `text` and checks that printing the result reproduces it.
pub fn round_trip(text: &str) -> Result<(), String> {
    let e = heh_core::syntax::parse_expr(text).map_err(|err| format!("`{text}` does not parse: {err}"))?;
    let again = heh_core::syntax::print_expr(&e);
    if again != text {
        return Err(format!("`{text}` reprinted as `{again}`"));
    }
    Ok(())
}
