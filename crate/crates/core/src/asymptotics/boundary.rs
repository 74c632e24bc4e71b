use rayon::prelude::*;
use serde::Serialize;

use super::critical::critical_polynomial;
use super::profile::{reduced_and_derivative, ClusterProfile};
use num_complex::Complex64;

/// A frozen-boundary point and the real w that generates it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryPoint {
    pub w: f64,
    pub tau: f64,
    pub rho: f64,
}

/// e^{γτ} and e^{γρ} at a real w, or None where the parametrization is undefined.
fn exponentials(w: f64, profile: &ClusterProfile) -> Option<(f64, f64)> {
    let g = profile.gamma();
    let (r, dr) = reduced_and_derivative(w, profile)?;
    let (f, df) = (w * r, r + w * dr);
    let dwf = f + w * df;
    // wF′ − F = w² G′ with G = F/w
    let et = (dwf - (-g).exp()) / (w * w * (dr + g.exp() * r * r));
    let er = g.exp() * df / (g.exp() * dwf - 1.0);
    (et.is_finite() && er.is_finite()).then_some((et, er))
}

/// (τ(w), ρ(w)) when both exponentials are positive and τ, ρ > 0.
pub fn boundary_point(w: f64, profile: &ClusterProfile) -> Option<BoundaryPoint> {
    let (et, er) = exponentials(w, profile)?;
    if !(et > 0.0 && er > 0.0) {
        return None;
    }
    let g = profile.gamma();
    let (tau, rho) = (et.ln() / g, er.ln() / g);
    (tau > 0.0 && rho > 0.0).then_some(BoundaryPoint { w, tau, rho })
}

/// The rational parametrization over a grid of real w. Points where it is
/// undefined or leaves the quadrant τ, ρ > 0 are skipped with a debug record.
pub fn frozen_boundary(profile: &ClusterProfile, w_grid: &[f64]) -> Vec<BoundaryPoint> {
    w_grid
        .par_iter()
        .filter_map(|&w| {
            let p = boundary_point(w, profile);
            if p.is_none() {
                log::debug!("frozen boundary: skipped w = {w}");
            }
            p
        })
        .collect()
}

/// |P(w)| / ‖P‖ and |P′(w)| / ‖P‖, with ‖P‖ the largest coefficient of the
/// critical polynomial at the point's (τ, ρ): both vanish at a real double root.
pub fn double_root_certificate(pt: &BoundaryPoint, profile: &ClusterProfile) -> (f64, f64) {
    let p = critical_polynomial(pt.tau, pt.rho, profile);
    let (v, dv) = p.eval_with_derivative(Complex64::new(pt.w, 0.0));
    let norm = p.max_coefficient();
    (v.norm() / norm, dv.norm() / norm)
}

/// Boundary points with the given τ, located by bisection between adjacent
/// grid values of w where τ(w) − τ changes sign.
pub fn boundary_at_tau(profile: &ClusterProfile, tau: f64, w_grid: &[f64]) -> Vec<BoundaryPoint> {
    let mut out = Vec::new();
    for pair in w_grid.windows(2) {
        let (Some(a), Some(b)) = (boundary_point(pair[0], profile), boundary_point(pair[1], profile))
        else {
            continue;
        };
        if (a.tau - tau).signum() == (b.tau - tau).signum() {
            continue;
        }
        let (mut lo, mut hi) = (a, b);
        let mut ok = true;
        for _ in 0..200 {
            let mid = 0.5 * (lo.w + hi.w);
            if mid == lo.w || mid == hi.w {
                break;
            }
            let Some(m) = boundary_point(mid, profile) else {
                ok = false;
                break;
            };
            if (m.tau - tau).signum() == (lo.tau - tau).signum() {
                lo = m;
            } else {
                hi = m;
            }
        }
        // a jump across a pole of τ(w) is not a crossing
        if ok && (lo.tau - tau).abs().min((hi.tau - tau).abs()) < 1e-6 * tau.max(1.0) {
            out.push(if (lo.tau - tau).abs() < (hi.tau - tau).abs() { lo } else { hi });
        }
    }
    out
}
