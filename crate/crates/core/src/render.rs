//! Printing values. Strict arrays print in full; lazy closures print a
//! header plus at most `k` forced elements per infinite segment of each axis.

use crate::eval::{EvalResult, Session};
use crate::ordinal::Ordinal;
use crate::runtime::{OrdVec, StrictArray, Value};
use crate::syntax::Span;

impl Session {
    /// Renders the value behind `h`, forcing at most `k` elements per
    /// infinite axis segment of lazy closures (`k = 0` prints the header only).
    pub fn render(&mut self, h: crate::runtime::Handle, k: usize) -> EvalResult<String> {
        self.begin();
        let span = Span::default();
        let h = self.store.resolve(h);
        let header = match self.store.get(h) {
            Some(Value::Array(a)) => return Ok(render_strict(a)),
            Some(Value::Fun(f)) => return Ok(format!("<fun \\{}>", f.param)),
            Some(Value::Imap(c)) if c.cell.is_empty() => {
                format!("<imap shape={}>", OrdVec(&c.frame))
            }
            Some(Value::Imap(c)) => {
                format!("<imap shape={}|{}>", OrdVec(&c.frame), OrdVec(&c.cell))
            }
            Some(Value::Filter(_)) => {
                let s = self.shape_of(h, span)?;
                format!("<filter shape={}>", OrdVec(&s))
            }
            None => return Ok("<undefined>".to_string()),
        };
        if k == 0 {
            return Ok(header);
        }
        let shape = self.shape_of(h, span)?;
        let mut out = header;
        out.push(' ');
        let mut prefix = Vec::new();
        self.render_axes(h, &shape, &mut prefix, k, &mut out)?;
        Ok(out)
    }

    fn render_axes(
        &mut self,
        h: crate::runtime::Handle,
        shape: &[Ordinal],
        prefix: &mut Vec<Ordinal>,
        k: usize,
        out: &mut String,
    ) -> EvalResult<()> {
        let span = Span::default();
        let d = prefix.len();
        if d == shape.len() {
            let e = self.select_at(h, prefix, span)?;
            let s = self.scalar_of(e, span)?;
            out.push_str(&s.to_string());
            return Ok(());
        }
        out.push('[');
        let mut first = true;
        for (start, len) in segments(&shape[d], k) {
            if !start.is_zero() {
                if !first {
                    out.push_str(", ");
                }
                out.push_str(&format!("{start}: "));
                first = true;
            }
            // finite axes print in full
            let shown = match len {
                Some(l) if shape[d].is_natural() => l,
                Some(l) => l.min(k),
                None => k,
            };
            for n in 0..shown {
                if !first {
                    out.push_str(", ");
                }
                first = false;
                prefix.push(start.add(&Ordinal::from(n)));
                self.render_axes(h, shape, prefix, k, out)?;
                prefix.pop();
            }
            if len.is_none_or(|l| l > shown) {
                if !first {
                    out.push_str(", ");
                }
                out.push_str("...");
                first = false;
            }
        }
        out.push(']');
        Ok(())
    }
}

/// Starting points and lengths (`None` = ω elements) of the segments of an
/// axis of extent `alpha` that get printed. A finite extent is one segment
/// shown in full; otherwise the segment at 0 and those starting at the
/// limit ordinals spelled by prefixes of `alpha`'s normal form, at most `k`.
fn segments(alpha: &Ordinal, k: usize) -> Vec<(Ordinal, Option<usize>)> {
    if let Some(n) = alpha.to_usize() {
        return vec![(Ordinal::zero(), Some(n))];
    }
    let (lam, fin) = alpha.limit_part();
    let mut starts = vec![Ordinal::zero()];
    let mut running = Ordinal::zero();
    for t in alpha.terms() {
        if t.exponent == 0u32.into() {
            break;
        }
        let step = Ordinal::omega_pow(t.exponent.clone());
        let c = t.coefficient.clone();
        let mut j = num_bigint::BigUint::from(0u32);
        while j < c && starts.len() < k.max(1) {
            running = running.add(&step);
            j += 1u32;
            if running < *alpha {
                starts.push(running.clone());
            }
        }
        if j < c {
            break;
        }
    }
    starts.dedup();
    starts
        .into_iter()
        .map(|s| {
            let len = if s < lam {
                None
            } else {
                Some(fin.clone().try_into().unwrap_or(usize::MAX))
            };
            (s, len)
        })
        .collect()
}

fn render_strict(a: &StrictArray) -> String {
    fn go(a: &StrictArray, ext: &[usize], off: usize, d: usize, out: &mut String) {
        if d == ext.len() {
            out.push_str(&a.data[off].to_string());
            return;
        }
        out.push('[');
        let stride: usize = ext[d + 1..].iter().product();
        for i in 0..ext[d] {
            if i > 0 {
                out.push_str(", ");
            }
            go(a, ext, off + i * stride, d + 1, out);
        }
        out.push(']');
    }
    let mut out = String::new();
    go(a, &a.extents(), 0, 0, &mut out);
    out
}
