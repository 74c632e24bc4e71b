//! Closed residue expansion of the walk kernel, evaluated in multiprecision.
//!
//! The z-integral is taken over the finitely many excluded poles (the
//! complement of the enclosed ones), after which the w-integral reduces to
//! residues at the finite poles q^{y1}, …, q^{y1+t1} and q^{x_r}: the
//! essential singularity at zero never has to be touched. Terms are huge and
//! alternate, so precision is doubled until two levels agree.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::mp::{self, Mp, MpCtx};

/// Precision of the first attempt.
pub(crate) const START_BITS: usize = 192;
/// Give up beyond this precision.
pub(crate) const MAX_BITS: usize = 1 << 16;

/// Runs `f` at doubling precision until two consecutive results agree to
/// double precision. Returns the finer value and the observed change.
pub(crate) fn adaptive<F>(q: f64, span: i64, f: F) -> Result<(f64, f64)>
where
    F: Fn(&MpCtx) -> Result<Mp>,
{
    let eval = |bits: usize| -> Result<f64> {
        let mut ctx = MpCtx::new(q, bits);
        ctx.reserve(-span, span);
        Ok(mp::to_f64(&f(&ctx)?))
    };
    let mut bits = START_BITS;
    let mut prev = eval(bits)?;
    while bits < MAX_BITS {
        bits *= 2;
        let cur = eval(bits)?;
        let change = (cur - prev).abs();
        if change <= 4.0 * f64::EPSILON * cur.abs().max(1.0) {
            return Ok((cur, change));
        }
        prev = cur;
    }
    Err(Error::NonConvergence {
        last: prev.into(),
        prev: prev.into(),
        nodes: MAX_BITS,
    })
}

/// Exponent range the power table should cover for a walk evaluation.
pub(crate) fn walk_span(x: &[i64], y1: i64, t1: i64, y2: i64, t2: i64) -> i64 {
    let top = x
        .iter()
        .chain([y1, y2, y1 + t1, y2 + t2].iter())
        .map(|v| v.abs())
        .max()
        .unwrap_or(0);
    2 * (top + t1 + t2) + 4
}

/// Products ∏ (1 − q^{i−a}) over i ≥ 0, i ≠ a, i ∉ x, memoized in a.
struct PiTable<'a> {
    ctx: &'a MpCtx,
    x: &'a [i64],
    qinf: Mp,
    memo: HashMap<i64, Mp>,
}

impl<'a> PiTable<'a> {
    fn get(&mut self, a: i64) -> Mp {
        if let Some(v) = self.memo.get(&a) {
            return v.clone();
        }
        let ctx = self.ctx;
        let mut p = if a >= 0 {
            let mut p = self.qinf.clone();
            for s in 1..=a {
                p *= ctx.one() - ctx.powi(-s);
            }
            p
        } else {
            &self.qinf / &ctx.qfact(-a - 1)
        };
        for &xr in self.x {
            if xr != a {
                p /= ctx.one() - ctx.powi(xr - a);
            }
        }
        self.memo.insert(a, p.clone());
        p
    }
}

/// Discrete part 1_{equal points} − (indicator term) of the walk kernel.
pub(crate) fn walk_discrete(ctx: &MpCtx, y1: i64, t1: i64, y2: i64, t2: i64) -> Mp {
    let mut d = if t1 == t2 && y1 == y2 { ctx.one() } else { ctx.zero() };
    if t2 > t1 && y2 + t2 > y1 + t1 {
        let mut num = ctx.one();
        for i in 0..(t2 - t1 - 1) {
            num *= ctx.one() - ctx.powi(y1 - y2 + t1 - t2 + 1 + i);
        }
        d -= ctx.powi((t1 - t2) * (y1 + t1)) * num / ctx.qfact(t2 - t1 - 1);
    }
    d
}

/// The walk kernel at (y1,t1; y2,t2) from initial data x, at the context's precision.
pub(crate) fn walk_kernel(ctx: &MpCtx, x: &[i64], y1: i64, t1: i64, y2: i64, t2: i64) -> Mp {
    let one = ctx.one();
    let qf_t1 = ctx.qfact(t1);
    let qf_t2 = ctx.qfact(t2 - 1);
    let mut pi = PiTable {
        ctx,
        x,
        qinf: ctx.qfact_inf(),
        memo: HashMap::new(),
    };
    // ∏_{k=1}^{t2−1} (1 − q^{e−y2−k})
    let zfac = |e: i64| {
        let mut v = one.clone();
        for k in 1..t2 {
            v *= &one - &ctx.powi(e - y2 - k);
        }
        v
    };
    // ∏_{e' ≠ e} (1 − q^{e−e'}) over the rational w-poles
    let wden = |e: i64| {
        let mut v = one.clone();
        for ep in y1..=y1 + t1 {
            if ep != e {
                v *= &one - &ctx.powi(e - ep);
            }
        }
        v
    };
    let outside = |e: i64| e <= y2;

    let mut t1_sum = ctx.zero();
    for e in y1..=y1 + t1 {
        if (y2 + 1..=y2 + t2 - 1).contains(&e) || !outside(e) {
            continue;
        }
        let v = ctx.powi(e * (t1 - t2) + e) * &qf_t1 / &qf_t2 * zfac(e) / wden(e);
        t1_sum -= v;
    }

    let xs: std::collections::HashSet<i64> = x.iter().copied().collect();
    let ez: Vec<i64> = (0..=y2).filter(|j| !xs.contains(j)).collect();
    let rho: Vec<(Mp, Mp)> = ez
        .iter()
        .map(|&j| {
            let v = ctx.powi(j * (1 - t2)) / &qf_t2 * zfac(j) / pi.get(j);
            (ctx.powi(j), v)
        })
        .collect();

    let mut t2_sum = ctx.zero();
    for e in y1..=y1 + t1 {
        if !(xs.contains(&e) || e < 0) {
            continue;
        }
        let w = ctx.powi(e);
        let r = -(ctx.powi(e * (1 + t1)) * &qf_t1 * pi.get(e) / wden(e));
        let mut j = ctx.zero();
        for (qj, v) in &rho {
            j += v / &(&w - qj);
        }
        if outside(e) {
            j -= ctx.powi(-e * t2) / &qf_t2 * zfac(e) / pi.get(e);
        }
        t2_sum += r * j;
    }
    walk_discrete(ctx, y1, t1, y2, t2) - ctx.powi(-t1 - y1) * (t1_sum + t2_sum)
}
