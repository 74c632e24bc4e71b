//! The finite-N lozenge kernel, the terminating ₂φ₁ it is built from, and the
//! coefficient identity behind the N → ∞ limit.

use num_complex::Complex64;

use super::contour::classify_lozenge_poles;
use super::quadrature::double_contour;
use super::residue::adaptive;
use super::{KernelMethod, KernelOptions, KernelValue, LozengePoint};
use crate::error::{Error, Result};
use crate::mp::{self, Mp, MpCtx};
use crate::qcalc::{qfact, qpoch, QParam};
use crate::tilings::Partition;

/// Radius of the w circle relative to the z circle. Any ratio above one is
/// valid; a small one keeps |∏(w − c_r)/∏(z − c_r)| moderate.
const W_OVER_Z: f64 = 1.5;

/// Σ_{j=0}^{n1−1} (q^{n1−1}; q^{−1})_j / (q^{N−1}; q^{−1})_j · arg^j.
pub fn gauss_qhyp(n1: usize, n: usize, q: QParam, arg: Complex64) -> Result<Complex64> {
    if !(1 <= n1 && n1 <= n) {
        return Err(Error::Domain(format!("need 1 <= n1 <= N, got n1 = {n1}, N = {n}")));
    }
    let (n1, n) = (n1 as i64, n as i64);
    let mut coef = 1.0;
    let mut pow = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for j in 0..n1 {
        sum += pow * coef;
        coef *= q.one_minus_pow(n1 - 1 - j) / q.one_minus_pow(n - 1 - j);
        pow *= arg;
    }
    Ok(sum)
}

/// (q^{N−1}; q^{−1})_{t1} q^{−N p1} w^N ₂φ₁(n1 = N − t1; q^{p1}/w).
pub fn q_n_function(n: usize, t1: usize, p1: i64, q: QParam, w: Complex64) -> Result<Complex64> {
    if t1 >= n {
        return Err(Error::Domain(format!("need t1 < N, got t1 = {t1}, N = {n}")));
    }
    let mut pre = 1.0;
    for i in 0..t1 as i64 {
        pre *= q.one_minus_pow(n as i64 - 1 - i);
    }
    let u = w / q.pow(p1);
    Ok(u.powi(n as i32) * pre * gauss_qhyp(n - t1, n, q, u.inv())?)
}

/// The N → ∞ limit (w/q^{p1})^{t1+1} (q;q)_{t1} / (w q^{−p1}; q)_{t1+1}.
pub fn q_n_limit(t1: usize, p1: i64, q: QParam, w: Complex64) -> Result<Complex64> {
    let u = w / q.pow(p1);
    let t1 = t1 as i64;
    Ok(u.powi(t1 as i32 + 1) * qfact(q, t1) / qpoch(u, q, t1 + 1)?)
}

/// Coefficient of w^{−(N−1)} in the product of the two Laurent polynomials
/// (the ₂φ₁ in w^{−1}q^{p1} and the expansion of (w q^{1−p2}; q)_{t2−1}),
/// compared with its closed form. Returns the absolute difference.
pub fn residue_identity_check(p1: i64, p2: i64, t1: i64, t2: i64, n: i64, q: QParam) -> f64 {
    assert!(0 <= t1 && t1 < n && t2 >= 1, "need 0 <= t1 < N and t2 >= 1");
    let mut ctx = MpCtx::new(q.value(), 256);
    let span = 4 * (n + t1 + t2 + p1.abs() + p2.abs()) * (n + t2) + 8;
    ctx.reserve(-span, span);
    let one = ctx.one();
    let pm = |e: i64| ctx.powi(e);
    let om = |e: i64| &one - &ctx.powi(e);

    // first factor, j = 0..N−t1−1
    let mut first: Vec<Mp> = Vec::new();
    let mut c = one.clone();
    for j in 0..(n - t1) {
        first.push(&c * &pm(p1 * j));
        if j + 1 < n - t1 {
            c = c * om(n - t1 - 1 - j) / om(n - 1 - j);
        }
    }
    // second factor, j = 0..t2−1
    let qbin = |a: i64, b: i64| {
        let mut v = one.clone();
        for i in 1..=b {
            v = v * om(a - b + i) / om(i);
        }
        v
    };
    let second: Vec<Mp> = (0..t2)
        .map(|j| {
            let v = pm((p2 - t2 + 1) * j + j * (j - 1) / 2) * qbin(t2 - 1, j);
            if j % 2 == 1 {
                -v
            } else {
                v
            }
        })
        .collect();
    let mut direct = ctx.zero();
    for k in t1..=(n - 1).min(t2 - 1) {
        direct += &first[(n - 1 - k) as usize] * &second[k as usize];
    }

    let closed = if t2 > t1 {
        let mut v = pm(p1 * (n - 1 - t1) + t1 * (t1 - 1) / 2 + (p2 - t2 + 1) * t1);
        for i in 0..t1 {
            v = v * om(t2 - t1 + i) / om(n - t1 + i);
        }
        for i in 0..(t2 - t1 - 1) {
            v *= om(t1 - p1 + p2 - t2 + 1 + i);
        }
        if t1 % 2 == 1 {
            -v
        } else {
            v
        }
    } else {
        ctx.zero()
    };
    mp::to_f64(&mp::abs(direct - closed))
}

fn check_points(pt1: LozengePoint, pt2: LozengePoint, lambda: &Partition, q: QParam) -> Result<()> {
    classify_lozenge_poles(pt1, pt2, lambda.len(), q).map(|_| ())
}

/// q^{scale} K_loz(p1,n1; p2,n2) in multiprecision: the z-residues at the
/// enclosed c_r = q^{λ_r − r − p1}, after the w-integral has been reduced to
/// the negative-power part of ∏(w − c_r) ₂φ₁(w^{−1}).
fn loz_residue(ctx: &MpCtx, pt1: LozengePoint, pt2: LozengePoint, lam: &[i64], scale: i64) -> Mp {
    let one = ctx.one();
    let om = |e: i64| &one - &ctx.powi(e);
    let n = lam.len() as i64;
    let (p1, n1, p2, n2) = (pt1.p, pt1.n, pt2.p, pt2.n);

    let mut d = ctx.zero();
    if n2 < n1 && p2 <= p1 {
        let mut v = ctx.powi(n2 * (p1 - p2) + scale);
        for i in 0..(n1 - n2 - 1) {
            v *= om(p1 - p2 + 1 + i);
        }
        d = -(v / ctx.qfact(n1 - n2 - 1));
    }
    let mut pref = one.clone();
    for i in 0..(n - n1) {
        pref *= om(n - 1 - i);
    }
    let mut a = Vec::with_capacity(n1 as usize);
    let mut c = one.clone();
    for j in 0..n1 {
        a.push(c.clone());
        if j + 1 < n1 {
            c = c * om(n1 - 1 - j) / om(n - 1 - j);
        }
    }
    let es: Vec<i64> = lam
        .iter()
        .enumerate()
        .map(|(r, &l)| l - r as i64 - 1 - p1)
        .collect();
    let cs: Vec<Mp> = es.iter().map(|&e| ctx.powi(e)).collect();
    // coefficients of ∏ (w − c_r), index = power of w
    let mut poly = vec![one.clone()];
    for cr in &cs {
        let mut next = vec![ctx.zero(); poly.len() + 1];
        for (k, v) in poly.iter().enumerate() {
            next[k + 1] += v;
            next[k] -= v * cr;
        }
        poly = next;
    }
    // nonpositive powers of ∏(w − c_r) φ(w): index k ∈ [−(n1−1), 0]
    let low: Vec<(i64, Mp)> = (-(n1 - 1)..=0)
        .map(|k| {
            let mut s = ctx.zero();
            for (j, aj) in a.iter().enumerate() {
                let idx = k + j as i64;
                if (0..poly.len() as i64).contains(&idx) {
                    s += &poly[idx as usize] * aj;
                }
            }
            (k, s)
        })
        .collect();

    let mut total = ctx.zero();
    for (r, (&e, cr)) in es.iter().zip(&cs).enumerate() {
        if e < p2 - p1 {
            continue;
        }
        let mut s = ctx.zero();
        for (k, v) in &low {
            s -= v * &ctx.powi(e * (k - 1));
        }
        let mut val = ctx.powi(n2 * (p1 - p2) + scale + e * n2) * s;
        for i in 0..(n - n2 - 1) {
            val *= om(e + 1 - p2 + p1 + i);
        }
        val /= ctx.qfact(n - n2 - 1);
        for (rr, cc) in cs.iter().enumerate() {
            if rr != r {
                val /= cr - cc;
            }
        }
        total += val;
    }
    d + pref * total
}

fn loz_quadrature(
    pt1: LozengePoint,
    pt2: LozengePoint,
    lam: &Partition,
    q: QParam,
    scale: i64,
    opts: &KernelOptions,
) -> Result<KernelValue> {
    let n = lam.len() as i64;
    let spec = classify_lozenge_poles(pt1, pt2, lam.len(), q)?;
    let (p1, n1, p2, n2) = (pt1.p, pt1.n, pt2.p, pt2.n);
    let mut d = 0.0;
    if n2 < n1 && p2 <= p1 {
        let num = qpoch(Complex64::new(q.pow(p1 - p2 + 1), 0.0), q, n1 - n2 - 1)?.re;
        d = -(q.ln() * (n2 * (p1 - p2) + scale) as f64).exp() * num / qfact(q, n1 - n2 - 1);
    }
    let mut pref = 1.0;
    for i in 0..(n - n1) {
        pref *= q.one_minus_pow(n - 1 - i);
    }
    let cs: Vec<f64> = lam
        .shifted()
        .iter()
        .map(|&s| q.pow(s - p1))
        .collect();
    let zconst = (q.ln() * (n2 * (p1 - p2) + scale) as f64).exp() / qfact(q, n - n2 - 1);
    let shift = q.pow(1 - p2 + p1);
    let fz = |z: Complex64| -> Result<Complex64> {
        let mut v = z.powi(n2 as i32) * zconst * qpoch(z * shift, q, n - n2 - 1)?;
        for &c in &cs {
            v /= z - c;
        }
        Ok(v)
    };
    let fw = |w: Complex64| -> Result<Complex64> {
        let mut v = gauss_qhyp(n1 as usize, n as usize, q, w.inv())? / w;
        for &c in &cs {
            v *= w - c;
        }
        Ok(v)
    };
    let r_w = W_OVER_Z * spec.r_z;
    let quad = double_contour(fz, spec.r_z, fw, r_w, spec.nodes, opts.tol, opts.node_cap)?;
    Ok(KernelValue {
        value: quad.value * pref + d,
        est_error: quad.change * pref,
    })
}

/// K_loz(p1,n1; p2,n2) for the uniformly-q-weighted tilings of the sawtooth
/// polygon with top row λ.
pub fn kernel_loz(
    pt1: LozengePoint,
    pt2: LozengePoint,
    lambda: &Partition,
    q: QParam,
    opts: &KernelOptions,
) -> Result<KernelValue> {
    kernel_loz_scaled(pt1, pt2, lambda, q, 0, opts)
}

/// q^{scale} K_loz, with the prefactor folded in before any number is
/// rounded to double precision (used with scale = N(p2 − p1)).
pub fn kernel_loz_scaled(
    pt1: LozengePoint,
    pt2: LozengePoint,
    lambda: &Partition,
    q: QParam,
    scale: i64,
    opts: &KernelOptions,
) -> Result<KernelValue> {
    check_points(pt1, pt2, lambda, q)?;
    match opts.method {
        KernelMethod::Quadrature => loz_quadrature(pt1, pt2, lambda, q, scale, opts),
        KernelMethod::Residue => {
            let lam = lambda.parts();
            let n = lam.len() as i64;
            let top = lam.first().copied().unwrap_or(0) + n + pt1.p.abs() + pt2.p.abs() + 2;
            let span = top * (n + 2) + scale.abs();
            let (v, err) = adaptive(q.value(), span.min(1 << 14), |ctx| {
                Ok(loz_residue(ctx, pt1, pt2, lam, scale))
            })?;
            Ok(KernelValue {
                value: v.into(),
                est_error: err,
            })
        }
    }
}
