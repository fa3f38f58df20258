//! Checkers for the algebraic laws of the prelude. Each runs `n` random
//! instances (or a fixed transfinite probe set) in one session and returns
//! the number of comparisons made, or a description of the first mismatch.

use heh_core::ordinal::Ordinal;
use heh_core::{Handle, Session};
use rand::Rng;

use super::{nested_literal, random_array, vector_literal};

pub type Outcome = Result<usize, String>;

fn eval(s: &mut Session, src: &str) -> Result<Handle, String> {
    match s.run_source(src) {
        Ok(Some(h)) => Ok(h),
        Ok(None) => Err(format!("`{src}` has no value")),
        Err(e) => Err(format!("`{src}`: {e}")),
    }
}

/// Forces both expressions and compares shapes and elements exactly.
pub fn same_array(s: &mut Session, lhs: &str, rhs: &str) -> Result<(), String> {
    let l = eval(s, lhs)?;
    let r = eval(s, rhs)?;
    let l = s.force(l).map_err(|e| format!("`{lhs}`: {e}"))?;
    let r = s.force(r).map_err(|e| format!("`{rhs}`: {e}"))?;
    if l != r {
        return Err(format!("`{lhs}` = {l:?}\n`{rhs}` = {r:?}"));
    }
    Ok(())
}

fn element(s: &mut Session, h: Handle, idx: &[Ordinal]) -> Result<String, String> {
    let e = s.select(h, idx).map_err(|e| e.to_string())?;
    s.render(e, 0).map_err(|e| e.to_string())
}

/// Compares shapes and the elements at every index in `probes`.
pub fn same_at(s: &mut Session, lhs: &str, rhs: &str, probes: &[Vec<Ordinal>]) -> Outcome {
    let l = eval(s, lhs)?;
    let r = eval(s, rhs)?;
    let (ls, rs) = (s.shape(l), s.shape(r));
    if ls != rs {
        return Err(format!("shapes differ: `{lhs}` {ls:?}, `{rhs}` {rs:?}"));
    }
    for idx in probes {
        let (a, b) = (element(s, l, idx)?, element(s, r, idx)?);
        if a != b {
            return Err(format!("at {idx:?}: `{lhs}` = {a}, `{rhs}` = {b}"));
        }
    }
    Ok(probes.len() + 1)
}

fn ord(n: usize) -> Ordinal {
    Ordinal::from(n)
}

/// `[n]` and `[w*k + n]` for every limit segment `k < segments`, `n < per`.
pub fn vector_probes(segments: u32, per: usize) -> Vec<Vec<Ordinal>> {
    let mut out = Vec::new();
    for k in 0..segments {
        let base = Ordinal::omega().mul(&Ordinal::from(k as u64));
        out.extend((0..per).map(|n| vec![base.add(&ord(n))]));
    }
    out
}

fn random_vector<R: Rng>(rng: &mut R, max_len: usize) -> Vec<u64> {
    let len = rng.gen_range(0..=max_len);
    (0..len).map(|_| rng.gen_range(0..100)).collect()
}

fn random_predicate<R: Rng>(rng: &mut R) -> String {
    match rng.gen_range(0..3) {
        0 => {
            let m = rng.gen_range(1..5);
            format!("\\x. x % {m} = {}", rng.gen_range(0..m))
        }
        1 => format!("\\x. x < {}", rng.gen_range(0..100)),
        _ => format!("\\x. x >= {}", rng.gen_range(0..100)),
    }
}

/// `reshape |a| (flatten a) == a` on random arrays of rank <= 3.
pub fn flatten_reshape<R: Rng>(s: &mut Session, rng: &mut R, n: usize) -> Outcome {
    for _ in 0..n {
        let rank = rng.gen_range(0..=3);
        let (a, ..) = random_array(rng, rank, 5);
        same_array(s, &format!("let a = {a}\nreshape |a| (flatten a)"), "a")?;
    }
    Ok(n)
}

/// The same law on `[2, w]`, probed at `[d, n]` for `d < 2`, `n < 50`.
pub fn flatten_reshape_transfinite(s: &mut Session) -> Outcome {
    eval(s, "let a = imap [2, w] { _(iv): iv.[0] * 1000 + iv.[1] }\na")?;
    let probes: Vec<Vec<Ordinal>> = (0..2)
        .flat_map(|d| (0..50).map(move |n| vec![ord(d), ord(n)]))
        .collect();
    same_at(s, "reshape |a| (flatten a)", "a", &probes)
}

/// `drop |a| (a ++ b) == b` on random vectors.
pub fn drop_concat<R: Rng>(s: &mut Session, rng: &mut R, n: usize) -> Outcome {
    for _ in 0..n {
        let a = vector_literal(&random_vector(rng, 8));
        let b = vector_literal(&random_vector(rng, 8));
        same_array(s, &format!("let b = {b}\ndrop |{a}| ({a} ++ b)"), "b")?;
    }
    Ok(n)
}

/// The same law with `|a| = [w]`, for an infinite and a finite `b`.
pub fn drop_concat_transfinite(s: &mut Session) -> Outcome {
    eval(s, "let a = imap [w] { _(iv): iv.[0] * 2 }\na")?;
    let mut count = 0;
    eval(s, "let b = imap [w] { _(iv): iv.[0] * 7 + 1 }\nb")?;
    count += same_at(s, "drop |a| (a ++ b)", "b", &vector_probes(1, 50))?;
    eval(s, "let b = [3, 1, 4, 1, 5]\nb")?;
    let all: Vec<Vec<Ordinal>> = (0..5).map(|n| vec![ord(n)]).collect();
    count += same_at(s, "drop |a| (a ++ b)", "b", &all)?;
    Ok(count)
}

/// `filter p (a ++ b) == (filter p a) ++ (filter p b)` on random vectors.
pub fn filter_concat<R: Rng>(s: &mut Session, rng: &mut R, n: usize) -> Outcome {
    for _ in 0..n {
        let a = vector_literal(&random_vector(rng, 8));
        let b = vector_literal(&random_vector(rng, 8));
        let p = random_predicate(rng);
        same_array(
            s,
            &format!("let p = {p}\nfilter p ({a} ++ {b})"),
            &format!("(filter p {a}) ++ (filter p {b})"),
        )?;
    }
    Ok(n)
}

/// The same law with `|a| = [w]` and a predicate that accepts infinitely
/// many elements of every infinite segment, probed below `w` and at `w + n`.
pub fn filter_concat_transfinite<R: Rng>(s: &mut Session, rng: &mut R, n: usize) -> Outcome {
    let mut count = 0;
    for _ in 0..n {
        let m = rng.gen_range(1..5);
        let r = rng.gen_range(0..m);
        let (d1, d2) = (rng.gen_range(0..10), rng.gen_range(0..10));
        let setup = format!(
            "let p = \\x. x % {m} = {r}\n\
             let a = imap [w] {{ _(iv): iv.[0] + {d1} }}\n\
             let b = imap [w] {{ _(iv): iv.[0] + {d2} }}\n\
             let c = {}\np",
            vector_literal(&random_vector(rng, 6))
        );
        eval(s, &setup)?;
        count += same_at(
            s,
            "filter p (a ++ b)",
            "(filter p a) ++ (filter p b)",
            &vector_probes(2, 50),
        )?;
        count += same_at(
            s,
            "filter p (a ++ c)",
            "(filter p a) ++ (filter p c)",
            &vector_probes(1, 50),
        )?;
    }
    Ok(count)
}

/// `filter p (map f a) == map f (filter (\x. p (f x)) a)` on random vectors.
pub fn filter_map<R: Rng>(s: &mut Session, rng: &mut R, n: usize) -> Outcome {
    for _ in 0..n {
        let a = vector_literal(&random_vector(rng, 10));
        let f = format!("\\x. x * {} + {}", rng.gen_range(1..4), rng.gen_range(0..5));
        let p = random_predicate(rng);
        same_array(
            s,
            &format!("let f = {f}\nlet p = {p}\nfilter p (map f {a})"),
            &format!("map f (filter (\\x. p (f x)) {a})"),
        )?;
    }
    Ok(n)
}

const COMPOSE: &str = r"\f. \g. \x. f (g x)";

/// Expects `u`, `v` (arrays of functions), `z` (numbers), `s = |z|`, a
/// function `f` and a number `y`, then compares both sides of each law.
fn applicative_laws(s: &mut Session, check: &mut dyn FnMut(&mut Session, &str, &str) -> Outcome) -> Outcome {
    let laws = [
        ("ap (pure s (\\x. x)) z", "z"),
        (&*format!("ap (ap (ap (pure s ({COMPOSE})) u) v) z"), "ap u (ap v z)"),
        ("ap (pure s f) (pure s y)", "pure s (f y)"),
        ("ap u (pure s y)", "ap (pure s (\\h. h y)) u"),
    ]
    .map(|(l, r)| (l.to_string(), r.to_string()));
    let mut count = 0;
    for (l, r) in &laws {
        count += check(s, l, r)?;
    }
    Ok(count)
}

/// Identity, composition, homomorphism and interchange on random finite
/// shapes.
pub fn applicative<R: Rng>(s: &mut Session, rng: &mut R, n: usize) -> Outcome {
    let mut count = 0;
    for _ in 0..n {
        let rank = rng.gen_range(0..=2);
        let lo = usize::from(rank == 2);
        let shape: Vec<usize> = (0..rank).map(|_| rng.gen_range(lo..=4)).collect();
        let total: usize = shape.iter().product();
        let lit = |rng: &mut R| {
            let data: Vec<u64> = (0..total).map(|_| rng.gen_range(0..50)).collect();
            nested_literal(&shape, &data)
        };
        let setup = format!(
            "let z = {}\nlet u = map (\\k. \\x. x + k) {}\nlet v = map (\\k. \\x. x * k) {}\n\
             let s = |z|\nlet f = \\x. x * {} + {}\nlet y = {}\ns",
            lit(rng),
            lit(rng),
            lit(rng),
            rng.gen_range(1..5),
            rng.gen_range(0..5),
            rng.gen_range(0..50),
        );
        eval(s, &setup)?;
        count += applicative_laws(s, &mut |s, l, r| same_array(s, l, r).map(|_| 1))?;
    }
    Ok(count)
}

/// The applicative laws on shape `[w*2]`, probed in both limit segments.
pub fn applicative_transfinite<R: Rng>(s: &mut Session, rng: &mut R, n: usize) -> Outcome {
    let mut count = 0;
    for _ in 0..n {
        let (c, d) = (rng.gen_range(1..4), rng.gen_range(0..5));
        let setup = format!(
            "let z = imap [w*2] {{ _(iv): iv.[0] * {c} + {d} }}\n\
             let u = map (\\k. \\x. x + k) (imap [w*2] {{ _(iv): iv.[0] + {d} }})\n\
             let v = map (\\k. \\x. x * k) (imap [w*2] {{ _(iv): iv.[0] * {c} }})\n\
             let s = |z|\nlet f = \\x. x * {c} + {d}\nlet y = {}\ns",
            rng.gen_range(0..50)
        );
        eval(s, &setup)?;
        let probes = vector_probes(2, 50);
        count += applicative_laws(s, &mut |s, l, r| same_at(s, l, r, &probes))?;
    }
    Ok(count)
}

/// Every index inside a strict array's shape selects its element; every
/// index outside it, and every index of the wrong rank, is an error.
pub fn selection_totality<R: Rng>(s: &mut Session, rng: &mut R, n: usize) -> Outcome {
    let mut count = 0;
    for _ in 0..n {
        let rank = rng.gen_range(1..=3);
        let (lit, shape, data) = random_array(rng, rank, 4);
        let h = eval(s, &lit)?;
        for (off, want) in data.iter().enumerate() {
            let mut idx = vec![0; shape.len()];
            let mut rest = off;
            for d in (0..shape.len()).rev() {
                idx[d] = rest % shape[d];
                rest /= shape[d];
            }
            let idx: Vec<Ordinal> = idx.into_iter().map(ord).collect();
            let got = element(s, h, &idx)?;
            if got != want.to_string() {
                return Err(format!("{lit} at {idx:?}: {got}, expected {want}"));
            }
            count += 1;
        }
        for d in 0..shape.len() {
            let mut idx: Vec<Ordinal> = vec![Ordinal::zero(); shape.len()];
            idx[d] = if rng.gen_bool(0.5) { ord(shape[d]) } else { Ordinal::omega() };
            if s.select(h, &idx).is_ok() {
                return Err(format!("{lit} at {idx:?} should be out of bounds"));
            }
            count += 1;
        }
        let short = vec![Ordinal::zero(); shape.len() - 1];
        let long = vec![Ordinal::zero(); shape.len() + 1];
        if s.select(h, &short).is_ok() || s.select(h, &long).is_ok() {
            return Err(format!("{lit}: index of the wrong rank accepted"));
        }
        count += 2;
    }
    Ok(count)
}
