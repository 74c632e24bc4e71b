//! Karlin–McGregor conditioning: the ratio of T-step noncollision
//! determinants and its T → ∞ limit.
//!
//! Column c of [Υ_1^{(T)}(x_i, c)] carries the factor q^{cT}; it is divided
//! out analytically so the matrices stay O(1) for large T. The determinants
//! are taken in multiprecision so the geometric approach to the limit stays
//! visible far below double-precision roundoff.

use super::WalkConfig;
use crate::error::{Error, Result};
use crate::linalg::{cond1, det};
use crate::mp::{self, Mp, MpCtx};
use crate::qcalc::QParam;

/// Condition number above which a matrix counts as singular.
pub const SINGULAR_COND: f64 = 1e12;

fn bits_for(t: i64, q: QParam) -> usize {
    (128.0 + 2.0 * t as f64 * (-q.value().log2())) as usize
}

/// Υ_1^{(T)}(x, c) · q^{−cT}.
fn scaled_entry(ctx: &MpCtx, x: i64, c: i64, t: i64) -> Mp {
    if c > x || t < x - c {
        return ctx.zero();
    }
    let mut v = ctx.pow(c * (c - x)).clone();
    for e in (c + 1)..=x {
        v *= ctx.one_minus(e);
    }
    let k = x - c;
    for i in 1..=k {
        v *= ctx.one_minus(t - k + i);
        v /= ctx.one_minus(i);
    }
    v
}

fn scaled_matrix(ctx: &MpCtx, pts: &[i64], t: i64) -> Vec<Vec<Mp>> {
    let m = pts.len() as i64;
    pts.iter()
        .map(|&p| (1..=m).map(|j| scaled_entry(ctx, p, m - j, t)).collect())
        .collect()
}

fn context(x: &WalkConfig, y: &WalkConfig, t: i64, q: QParam) -> MpCtx {
    let mut ctx = MpCtx::new(q.value(), bits_for(t, q));
    let top = x.parts().first().copied().unwrap_or(0).max(y.parts().first().copied().unwrap_or(0));
    let m = x.m() as i64;
    let span = m * m * (top + 1) + m * m;
    ctx.reserve(-span, t + span);
    ctx
}

fn ratio_mp(ctx: &MpCtx, x: &WalkConfig, y: &WalkConfig, t: i64) -> Result<Mp> {
    let num = scaled_matrix(ctx, y.parts(), t - 1);
    let den = scaled_matrix(ctx, x.parts(), t);
    for a in [&num, &den] {
        let f: Vec<Vec<f64>> = a.iter().map(|r| r.iter().map(mp::to_f64).collect()).collect();
        let c = cond1(&f);
        if !(c <= SINGULAR_COND) {
            return Err(Error::Singular { cond: c });
        }
    }
    let m = x.m() as i64;
    let dn = det(num, ctx.one());
    let dd = det(den, ctx.one());
    Ok(ctx.pow(-(m * (m - 1) / 2)).clone() * dn / dd)
}

fn limit_mp(ctx: &MpCtx, x: &WalkConfig, y: &WalkConfig) -> Mp {
    let (xs, ys) = (x.parts(), y.parts());
    let m = xs.len() as i64;
    let mut v = ctx.pow(-(m * (m - 1) / 2) + (m - 1) * (x.size() - y.size())).clone();
    for i in 0..xs.len() {
        for j in (i + 1)..xs.len() {
            v *= ctx.pow(ys[j]) - ctx.pow(ys[i]);
            v /= ctx.pow(xs[j]) - ctx.pow(xs[i]);
        }
    }
    v
}

/// det[Υ_1^{(T−1)}(y_i, m−j)] / det[Υ_1^{(T)}(x_i, m−j)].
pub fn km_ratio(x: &WalkConfig, y: &WalkConfig, t: i64, q: QParam) -> Result<f64> {
    check(x, y, t)?;
    let ctx = context(x, y, t, q);
    Ok(mp::to_f64(&ratio_mp(&ctx, x, y, t)?))
}

/// The T → ∞ limit q^{−C(m,2)+(m−1)(|x|−|y|)} ∏_{i<j}(q^{y_j}−q^{y_i})/(q^{x_j}−q^{x_i}).
pub fn km_limit(x: &WalkConfig, y: &WalkConfig, q: QParam) -> f64 {
    let ctx = context(x, y, 1, q);
    mp::to_f64(&limit_mp(&ctx, x, y))
}

/// |km_ratio − km_limit|, with both sides in multiprecision.
pub fn km_error(x: &WalkConfig, y: &WalkConfig, t: i64, q: QParam) -> Result<f64> {
    check(x, y, t)?;
    let ctx = context(x, y, t, q);
    let r = ratio_mp(&ctx, x, y, t)?;
    let l = limit_mp(&ctx, x, y);
    Ok(mp::to_f64(&mp::abs(r - l)))
}

fn check(x: &WalkConfig, y: &WalkConfig, t: i64) -> Result<()> {
    if x.m() != y.m() {
        return Err(Error::Domain("configurations differ in length".into()));
    }
    if t < 1 {
        return Err(Error::Domain(format!("T = {t} must be positive")));
    }
    Ok(())
}
