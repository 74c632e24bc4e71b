//! Nested periodic trapezoidal rule for
//! (2πi)^{-2} ∮∮ f_z(z) f_w(w) / (w − z) dz dw on two concentric circles.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Below this many node pairs the double sum runs on one thread.
const PAR_THRESHOLD: usize = 1 << 14;

/// Values of f(ζ)·ζ/n at the n equispaced nodes of the circle |ζ| = r.
fn weighted<F>(f: &F, r: f64, n: usize) -> Result<Vec<(Complex64, Complex64)>>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    (0..n)
        .map(|k| {
            let z = Complex64::from_polar(r, TAU * k as f64 / n as f64);
            Ok((z, f(z)? * z / n as f64))
        })
        .collect()
}

/// The double sum together with the sum of the moduli of its terms, which
/// bounds the rounding error.
fn double_sum(zs: &[(Complex64, Complex64)], ws: &[(Complex64, Complex64)]) -> (Complex64, f64) {
    let row = |&(z, a): &(Complex64, Complex64)| {
        let mut s = Complex64::new(0.0, 0.0);
        let mut m = 0.0;
        for &(w, b) in ws {
            let t = b / (w - z);
            s += t;
            m += t.norm();
        }
        (a * s, a.norm() * m)
    };
    let add = |x: (Complex64, f64), y: (Complex64, f64)| (x.0 + y.0, x.1 + y.1);
    let zero = (Complex64::new(0.0, 0.0), 0.0);
    if zs.len() * ws.len() < PAR_THRESHOLD {
        zs.iter().map(row).fold(zero, add)
    } else {
        zs.par_iter().map(row).reduce(|| zero, add)
    }
}

/// Converged value of the double integral and an error estimate: the last
/// refinement step or the rounding floor, whichever is larger.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Quad {
    pub value: Complex64,
    pub change: f64,
}

/// Doubles the z and w node counts independently until neither refinement
/// moves the value by more than tol·max(1, |value|).
pub(crate) fn double_contour<FZ, FW>(
    fz: FZ,
    r_z: f64,
    fw: FW,
    r_w: f64,
    start: usize,
    tol: f64,
    cap: usize,
) -> Result<Quad>
where
    FZ: Fn(Complex64) -> Result<Complex64>,
    FW: Fn(Complex64) -> Result<Complex64>,
{
    let (mut nz, mut nw) = (start.max(4), start.max(4));
    let mut zs = weighted(&fz, r_z, nz)?;
    let mut ws = weighted(&fw, r_w, nw)?;
    let (mut v, _) = double_sum(&zs, &ws);
    loop {
        let zs2 = weighted(&fz, r_z, 2 * nz)?;
        let ws2 = weighted(&fw, r_w, 2 * nw)?;
        let (vz, mag) = double_sum(&zs2, &ws);
        let (vw, _) = double_sum(&zs, &ws2);
        let scale = tol * v.norm().max(1.0);
        let (dz, dw) = ((vz - v).norm(), (vw - v).norm());
        if !(dz.is_finite() && dw.is_finite()) {
            return Err(Error::NonConvergence {
                last: vz,
                prev: v,
                nodes: nz.max(nw),
            });
        }
        if dz < scale && dw < scale {
            // the z and w discretization errors are independent and additive
            return Ok(Quad {
                value: vz + vw - v,
                change: dz.max(dw).max(f64::EPSILON * mag),
            });
        }
        if 2 * nz > cap || 2 * nw > cap {
            let last = if dz >= dw { vz } else { vw };
            return Err(Error::NonConvergence {
                last,
                prev: v,
                nodes: nz.max(nw) * 2,
            });
        }
        if !(dz < scale) {
            nz *= 2;
            zs = zs2;
        }
        if !(dw < scale) {
            nw *= 2;
            ws = ws2;
        }
        v = double_sum(&zs, &ws).0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cauchy_kernel() {
        // f_z = 1/z², f_w = w²: only the w = z residue contributes, giving
        // (2πi)^{-1}∮ dz = 0; with f_z = 1/z, f_w = 1 it is 1 (residue of 1/z at 0)
        let one = |_: Complex64| Ok(Complex64::new(1.0, 0.0));
        let inv = |z: Complex64| Ok(z.inv());
        let q = double_contour(inv, 1.0, one, 0.5, 8, 1e-13, 1 << 12).unwrap();
        // inner w integral of 1/(w−z) with |w|<|z| vanishes
        assert!(q.value.norm() < 1e-13);
        // 1/(z (w − z)) integrated over w outside: the w = z residue gives ∮ dz/z = 1
        let q = double_contour(inv, 0.5, one, 1.0, 8, 1e-13, 1 << 12).unwrap();
        assert!((q.value - 1.0).norm() < 1e-12, "{:?}", q.value);
    }

    #[test]
    fn nonconvergence_reports_iterates() {
        // a pole just outside the w circle makes the rule converge too slowly
        let fz = |_: Complex64| Ok(Complex64::new(1.0, 0.0));
        let fw = |w: Complex64| Ok((w - 1.0 - 1e-9).inv());
        let r = double_contour(fz, 2.0, fw, 1.0, 8, 1e-14, 64);
        assert!(matches!(r, Err(Error::NonConvergence { .. })));
    }
}
