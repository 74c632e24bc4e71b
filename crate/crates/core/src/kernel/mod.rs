//! Determinantal correlation kernels: the walk kernel, the finite-N lozenge
//! kernel and its N → ∞ limit, each by contour quadrature (default) or by a
//! multiprecision residue expansion, plus correlation-determinant assembly.

mod contour;
mod lozenge;
mod quadrature;
mod residue;

#[cfg(test)]
mod tests;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

pub use contour::{classify_lozenge_poles, classify_poles, ContourSpec, INITIAL_NODES};
pub use lozenge::{
    gauss_qhyp, kernel_loz, kernel_loz_scaled, q_n_function, q_n_limit, residue_identity_check,
};

use crate::error::{Error, Result};
use crate::linalg;
use crate::qcalc::{qpoch, qpoch_inf, qfact, QParam};
use crate::walks::WalkConfig;
use contour::{check_walk_domain, classify_shifted};
use quadrature::double_contour;
use residue::{adaptive, walk_kernel, walk_span};

/// A point (y, t) of the walk space-time lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SpaceTimePoint {
    pub y: i64,
    pub t: i64,
}

impl SpaceTimePoint {
    pub fn new(y: i64, t: i64) -> Self {
        SpaceTimePoint { y, t }
    }
}

/// A point (p, n) of the interlacing array, n the row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct LozengePoint {
    pub p: i64,
    pub n: i64,
}

impl LozengePoint {
    pub fn new(p: i64, n: i64) -> Self {
        LozengePoint { p, n }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelMethod {
    #[default]
    Quadrature,
    Residue,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelOptions {
    pub tol: f64,
    pub node_cap: usize,
    pub method: KernelMethod,
}

impl Default for KernelOptions {
    fn default() -> Self {
        KernelOptions {
            tol: 1e-9,
            node_cap: 1 << 16,
            method: KernelMethod::Quadrature,
        }
    }
}

impl KernelOptions {
    pub fn residue() -> Self {
        KernelOptions {
            method: KernelMethod::Residue,
            ..Default::default()
        }
    }
}

/// A kernel value with the size of the last refinement step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub value: Complex64,
    pub est_error: f64,
}

impl Serialize for KernelValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Triple {
            re: f64,
            im: f64,
            est_error: f64,
        }
        Triple {
            re: self.value.re,
            im: self.value.im,
            est_error: self.est_error,
        }
        .serialize(s)
    }
}

/// The indicator and discrete terms 1_{same point} − (…) of the walk kernel.
fn walk_discrete_f64(y1: i64, t1: i64, y2: i64, t2: i64, q: QParam) -> Result<f64> {
    let mut d = if t1 == t2 && y1 == y2 { 1.0 } else { 0.0 };
    if t2 > t1 && y2 + t2 > y1 + t1 {
        let num = qpoch(Complex64::new(q.pow(y1 - y2 + t1 - t2 + 1), 0.0), q, t2 - t1 - 1)?.re;
        d -= (q.ln() * ((t1 - t2) * (y1 + t1)) as f64).exp() * num / qfact(q, t2 - t1 - 1);
    }
    Ok(d)
}

/// K_walks by quadrature with both radii multiplied by the given factors,
/// for checking that the value does not depend on the circles.
pub fn kernel_walks_stretched(
    pt1: SpaceTimePoint,
    pt2: SpaceTimePoint,
    x: &WalkConfig,
    q: QParam,
    opts: &KernelOptions,
    stretch: (f64, f64),
) -> Result<KernelValue> {
    check_walk_domain(pt1, pt2)?;
    let (y1, t1, y2, t2) = (pt1.y, pt1.t, pt2.y, pt2.t);
    let d = walk_discrete_f64(y1, t1, y2, t2, q)?;
    let pre = q.pow(-t1 - y1);
    let (i, err) = walk_integral(x.parts(), y1 + t1, t1, y2 + t2, t2, q, opts, stretch, pre)?;
    Ok(KernelValue {
        value: i * (-pre) + d,
        est_error: err * pre,
    })
}

/// (2πi)^{-2}∮∮ of the walk integrand in shifted coordinates p = y + t.
fn walk_integral(
    x: &[i64],
    p1: i64,
    t1: i64,
    p2: i64,
    t2: i64,
    q: QParam,
    opts: &KernelOptions,
    stretch: (f64, f64),
    weight: f64,
) -> Result<(Complex64, f64)> {
    // the caller multiplies the integral by `weight`; aim the tolerance at the product
    let tol = opts.tol / weight.max(1.0);
    let spec = classify_shifted(x, p1, t1, p2, t2, q)?;
    // the w circle may be shrunk freely: nothing but 0 lies inside it
    let r_w = spec.r_w.min(0.5 * spec.r_z) * stretch.1;
    let r_z = spec.r_z * stretch.0;
    let qf1 = qfact(q, t1);
    let qf2 = qfact(q, t2 - 1);
    let shift_w = q.pow(-p1);
    let shift_z = q.pow(1 - p2);
    let xs: Vec<f64> = x.iter().map(|&v| q.pow(v)).collect();
    let fw = |w: Complex64| -> Result<Complex64> {
        let mut v = w.powi(t1 as i32) * qf1 / qpoch(w * shift_w, q, t1 + 1)?;
        v *= qpoch_inf(w.inv(), q, 0.0)?;
        for &c in &xs {
            v /= 1.0 - c / w;
        }
        Ok(v)
    };
    let fz = |z: Complex64| -> Result<Complex64> {
        let mut v = z.powi(-(t2 as i32)) * qpoch(z * shift_z, q, t2 - 1)? / qf2;
        v /= qpoch_inf(z.inv(), q, 0.0)?;
        for &c in &xs {
            v *= 1.0 - c / z;
        }
        Ok(v)
    };
    let quad = double_contour(fz, r_z, fw, r_w, spec.nodes, tol, opts.node_cap)?;
    Ok((quad.value, quad.change))
}

/// K_walks(y1,t1; y2,t2) for noncolliding walks started from x.
pub fn kernel_walks(
    pt1: SpaceTimePoint,
    pt2: SpaceTimePoint,
    x: &WalkConfig,
    q: QParam,
    opts: &KernelOptions,
) -> Result<KernelValue> {
    check_walk_domain(pt1, pt2)?;
    let (y1, t1, y2, t2) = (pt1.y, pt1.t, pt2.y, pt2.t);
    let xs = x.parts();
    match opts.method {
        KernelMethod::Quadrature => kernel_walks_stretched(pt1, pt2, x, q, opts, (1.0, 1.0)),
        KernelMethod::Residue => {
            let span = walk_span(xs, y1, t1, y2, t2);
            let (v, err) = adaptive(q.value(), span, |ctx| Ok(walk_kernel(ctx, xs, y1, t1, y2, t2)))?;
            Ok(KernelValue {
                value: v.into(),
                est_error: err,
            })
        }
    }
}

/// The N → ∞ limit kernel K_loz^lim(p1,t1; p2,t2) attached to initial data x.
pub fn kernel_loz_lim(
    pt1: (i64, i64),
    pt2: (i64, i64),
    x: &WalkConfig,
    q: QParam,
    opts: &KernelOptions,
) -> Result<KernelValue> {
    let ((p1, t1), (p2, t2)) = (pt1, pt2);
    check_walk_domain(SpaceTimePoint::new(p1 - t1, t1), SpaceTimePoint::new(p2 - t2, t2))?;
    let (y1, y2) = (p1 - t1, p2 - t2);
    let xs = x.parts();
    let gauge = t2 * p2 - t1 * p1;
    match opts.method {
        KernelMethod::Quadrature => {
            let disc = {
                let same = if t1 == t2 && y1 == y2 { 1.0 } else { 0.0 };
                same - walk_discrete_f64(y1, t1, y2, t2, q)?
            };
            let g = (q.ln() * gauge as f64).exp();
            let gi = (q.ln() * (gauge - p1) as f64).exp();
            let (i, err) = walk_integral(xs, p1, t1, p2, t2, q, opts, (1.0, 1.0), gi)?;
            Ok(KernelValue {
                value: i * gi + disc * g,
                est_error: err * gi,
            })
        }
        KernelMethod::Residue => {
            let span = walk_span(xs, y1, t1, y2, t2);
            let (v, err) = adaptive(q.value(), span, |ctx| {
                let same = if t1 == t2 && y1 == y2 { ctx.one() } else { ctx.zero() };
                Ok(ctx.powi(gauge) * (same - walk_kernel(ctx, xs, y1, t1, y2, t2)))
            })?;
            Ok(KernelValue {
                value: v.into(),
                est_error: err,
            })
        }
    }
}

/// A correlation function with the diagnostic imaginary part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Correlation {
    pub value: f64,
    pub imag: f64,
    pub est_error: f64,
}

/// Probability that every given space-time point is occupied. Points at t = 0
/// are decided by the initial configuration and removed before the
/// determinant is formed.
pub fn correlation_det(
    points: &[SpaceTimePoint],
    x: &WalkConfig,
    q: QParam,
    opts: &KernelOptions,
) -> Result<Correlation> {
    for (i, a) in points.iter().enumerate() {
        if a.t < 0 {
            return Err(Error::Domain(format!("negative time in {a:?}")));
        }
        if points[..i].contains(a) {
            return Err(Error::Domain(format!("repeated point {a:?}")));
        }
    }
    let mut live = Vec::new();
    for p in points {
        if p.t == 0 {
            if !x.contains(p.y) {
                return Ok(Correlation {
                    value: 0.0,
                    imag: 0.0,
                    est_error: 0.0,
                });
            }
        } else {
            live.push(*p);
        }
    }
    let n = live.len();
    let entries: Vec<KernelValue> = (0..n * n)
        .into_par_iter()
        .map(|k| kernel_walks(live[k / n], live[k % n], x, q, opts))
        .collect::<Result<_>>()?;
    let rows: Vec<Vec<Complex64>> = (0..n)
        .map(|i| (0..n).map(|j| entries[i * n + j].value).collect())
        .collect();
    let d = linalg::det(rows, Complex64::new(1.0, 0.0));
    // first-order propagation: each entry perturbs det by at most its cofactor
    let big = entries.iter().map(|e| e.value.norm()).fold(1.0, f64::max);
    let err = entries.iter().map(|e| e.est_error).fold(0.0, f64::max);
    let est_error = if n == 0 {
        0.0
    } else {
        err * (n * n) as f64 * big.powi(n as i32 - 1)
    };
    Ok(Correlation {
        value: d.re,
        imag: d.im,
        est_error,
    })
}
