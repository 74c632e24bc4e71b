//! The incomplete beta kernel (2πi)^{-1} ∫_{ω̄}^{ω} (1−u)^{Δt} u^{−Δp−1} du.
//!
//! The integrand is rational, so only the side of u = 0 on which the path
//! crosses the real line matters: through (0,1) for Δt ≥ 0 and through
//! (−∞,0) for Δt < 0.

use std::f64::consts::PI;
use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;

use super::ComplexSlope;
use crate::error::{Error, Result};

const PANEL_DEGREE: usize = 16;
const MAX_DEPTH: u32 = 48;

/// Below this distance from a singular point the default crossing is replaced.
const CROWDED: f64 = 0.05;

fn rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(NonZeroUsize::new(PANEL_DEGREE).unwrap()))
        .as_node_weight_pairs()
}

fn panel<F: Fn(Complex64) -> Complex64>(f: &F, a: Complex64, b: Complex64) -> Complex64 {
    let half = (b - a) * 0.5;
    let mid = (a + b) * 0.5;
    rule().iter().map(|&(x, w)| f(mid + half * x) * w).sum::<Complex64>() * half
}

/// Adaptive bisection of the straight segment a → b.
fn segment<F: Fn(Complex64) -> Complex64>(
    f: &F,
    a: Complex64,
    b: Complex64,
    whole: Complex64,
    tol: f64,
    depth: u32,
) -> Result<Complex64> {
    let m = (a + b) * 0.5;
    let (l, r) = (panel(f, a, m), panel(f, m, b));
    let d = (l + r - whole).norm();
    if !d.is_finite() {
        return Err(Error::Domain(format!("integrand not finite on [{a}, {b}]")));
    }
    // stop at the rounding floor of the panel sums as well
    if d < tol || d <= 64.0 * f64::EPSILON * (l.norm() + r.norm()) {
        return Ok(l + r);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::NonConvergence {
            last: l + r,
            prev: whole,
            nodes: 1 << depth,
        });
    }
    Ok(segment(f, a, m, l, tol / 2.0, depth + 1)? + segment(f, m, b, r, tol / 2.0, depth + 1)?)
}

fn integrand(dt: i64, dp: i64) -> impl Fn(Complex64) -> Complex64 {
    move |u: Complex64| {
        let one = Complex64::new(1.0, 0.0);
        powi(one - u, dt) * powi(u, -dp - 1)
    }
}

fn powi(z: Complex64, e: i64) -> Complex64 {
    let p = z.powu(e.unsigned_abs() as u32);
    if e < 0 {
        p.inv()
    } else {
        p
    }
}

fn dist_to_segment(s: f64, a: Complex64, b: Complex64) -> f64 {
    let p = Complex64::new(s, 0.0);
    let ab = b - a;
    let t = (((p - a) * ab.conj()).re / ab.norm_sqr()).clamp(0.0, 1.0);
    (a + ab * t - p).norm()
}

/// Points where the integrand can blow up.
fn singular_points(dt: i64, dp: i64) -> Vec<f64> {
    let mut s = Vec::new();
    if dp >= 0 {
        s.push(0.0);
    }
    if dt < 0 {
        s.push(1.0);
    }
    s
}

fn clearance(omega: Complex64, x0: f64, sing: &[f64]) -> f64 {
    let x = Complex64::new(x0, 0.0);
    sing.iter()
        .map(|&s| dist_to_segment(s, omega.conj(), x).min(dist_to_segment(s, x, omega)))
        .fold(f64::INFINITY, f64::min)
}

/// (2πi)^{-1} times the integral along the polyline ω̄ → x₀ → ω.
pub fn incomplete_beta_via(omega: Complex64, dt: i64, dp: i64, x0: f64, tol: f64) -> Result<Complex64> {
    if !(omega.im > 0.0) {
        return Err(Error::Domain(format!("need Im omega > 0, got {omega}")));
    }
    let sing = singular_points(dt, dp);
    if sing.iter().any(|&s| s == x0) {
        return Err(Error::Domain(format!("crossing point {x0} is a singularity")));
    }
    let f = integrand(dt, dp);
    let x = Complex64::new(x0, 0.0);
    let tol = tol * 2.0 * PI;
    let mut total = Complex64::new(0.0, 0.0);
    for (a, b) in [(omega.conj(), x), (x, omega)] {
        total += segment(&f, a, b, panel(&f, a, b), tol / 2.0, 0)?;
    }
    Ok(total / Complex64::new(0.0, 2.0 * PI))
}

/// The crossing point: ½ or −1 by default, moved within the same interval
/// when the polyline would pass too close to u = 0 or u = 1.
pub fn crossing_point(omega: Complex64, dt: i64, dp: i64) -> Result<f64> {
    let sing = singular_points(dt, dp);
    let (default, candidates): (f64, &[f64]) = if dt >= 0 {
        (0.5, &[0.5, 0.25, 0.75, 0.1, 0.9, 0.05, 0.95, 0.01, 0.99])
    } else {
        (-1.0, &[-1.0, -0.5, -2.0, -0.25, -4.0, -0.1, -10.0, -0.01, -100.0])
    };
    let scale = omega.norm().min((omega - 1.0).norm()).min(1.0);
    if clearance(omega, default, &sing) >= CROWDED * scale {
        return Ok(default);
    }
    let best = candidates
        .iter()
        .copied()
        .max_by(|&a, &b| clearance(omega, a, &sing).total_cmp(&clearance(omega, b, &sing)))
        .unwrap();
    let c = clearance(omega, best, &sing);
    if !(c > 1e3 * f64::EPSILON * omega.norm().max(1.0)) {
        return Err(Error::Domain(format!(
            "crossing-point conflict: omega = {omega} too close to the real axis"
        )));
    }
    log::debug!("crossing point moved from {default} to {best} for omega = {omega}");
    Ok(best)
}

/// B_ω(Δt, Δp) along the crossing prescribed by the sign of Δt.
pub fn incomplete_beta(omega: ComplexSlope, dt: i64, dp: i64, tol: f64) -> Result<Complex64> {
    let x0 = crossing_point(omega.omega, dt, dp)?;
    incomplete_beta_via(omega.omega, dt, dp, x0, tol)
}

/// Res_{u=0} (1−u)^{Δt} u^{−Δp−1}: the coefficient of u^{Δp} in (1−u)^{Δt}.
pub fn residue_at_zero(dt: i64, dp: i64) -> f64 {
    if dp < 0 {
        return 0.0;
    }
    // (−1)^k binom(Δt, k) with the generalized binomial
    let mut c = 1.0;
    for j in 0..dp {
        c *= -((dt - j) as f64) / (j + 1) as f64;
    }
    c
}
