//! Pole bookkeeping for the double contour integrals. All cancellations are
//! decided on integer exponents, never by comparing floating values of q^j.

use std::collections::BTreeSet;

use super::{LozengePoint, SpaceTimePoint};
use crate::error::{Error, Result};
use crate::qcalc::QParam;

/// Initial node count per circle.
pub const INITIAL_NODES: usize = 32;

/// Circles for the w and z integrations, with the pole classification that
/// produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourSpec {
    pub r_w: f64,
    pub r_z: f64,
    pub nodes: usize,
    /// Exponents e of the finite w-poles q^e.
    pub w_poles: Vec<i64>,
    /// Exponents j ≥ 0 whose z-poles are cancelled by zeros of the integrand.
    pub z_cancelled: BTreeSet<i64>,
    /// Uncancelled z-pole exponents left outside the z circle.
    pub z_excluded: Vec<i64>,
    /// Uncancelled z-poles q^j with j ≥ this exponent are inside the circle.
    pub z_threshold: i64,
}

impl ContourSpec {
    /// Whether the z-pole q^j (j ≥ 0) lies inside the z circle.
    pub fn encloses_z(&self, j: i64) -> bool {
        j >= self.z_threshold && !self.z_cancelled.contains(&j)
    }
}

/// Contours for the walk kernel at (y1,t1; y2,t2) from initial data x.
pub fn classify_poles(
    x: &[i64],
    pt1: SpaceTimePoint,
    pt2: SpaceTimePoint,
    q: QParam,
) -> Result<ContourSpec> {
    check_walk_domain(pt1, pt2)?;
    classify_shifted(x, pt1.y + pt1.t, pt1.t, pt2.y + pt2.t, pt2.t, q)
}

pub(crate) fn check_walk_domain(pt1: SpaceTimePoint, pt2: SpaceTimePoint) -> Result<()> {
    if pt1.t < 0 || pt2.t <= 0 {
        return Err(Error::Domain(format!(
            "kernel needs t1 >= 0 and t2 > 0, got t1 = {}, t2 = {}",
            pt1.t, pt2.t
        )));
    }
    Ok(())
}

/// Same classification in the shifted coordinates p = y + t.
pub(crate) fn classify_shifted(
    x: &[i64],
    p1: i64,
    t1: i64,
    p2: i64,
    t2: i64,
    q: QParam,
) -> Result<ContourSpec> {
    // w-poles: zeros of (w q^{−p1}; q)_{t1+1} and of ∏(1 − q^{x_r}/w)
    let mut w_poles: Vec<i64> = (0..=t1).map(|i| p1 - t1 + i).collect();
    w_poles.extend_from_slice(x);
    w_poles.sort_unstable();
    w_poles.dedup();
    let top = *w_poles.last().expect("at least one w-pole");

    // z-poles q^j, j ≥ 0, from 1/(z^{−1}; q)_∞; cancelled by the zeros of
    // (z q^{1−p2}; q)_{t2−1} (exponents p2−1, …, p2−t2+1) and of ∏(1 − q^{x_r}/z)
    let mut z_cancelled: BTreeSet<i64> = (1..t2).map(|i| p2 - i).filter(|&j| j >= 0).collect();
    z_cancelled.extend(x.iter().copied().filter(|&j| j >= 0));
    let z_excluded: Vec<i64> = (0..p2).filter(|j| !z_cancelled.contains(j)).collect();
    // Between q^{p2} and the nearest excluded pole every circle is valid. The
    // midpoint q^{p2−1/2} of the gap to q^{p2−1} never lands on a lattice
    // point, whereas the midpoint to a more distant excluded pole can sit
    // exactly on a cancelled one, where the integrand evaluates to 0/0.
    let half_step = |e: i64| (q.ln() * (e as f64 + 0.5)).exp();
    let mut r_z = half_step(p2 - 1);
    let mut r_w = 0.5 * q.pow(top);
    if r_w >= r_z {
        // widen to just inside the nearest excluded pole q^e (q^{e+1} is
        // enclosed or removable), then shrink the w circle if still needed;
        // only 0 lies inside it
        r_z = half_step(z_excluded.last().copied().unwrap_or(-1));
        r_w = r_w.min(0.5 * r_z);
    }
    if !(r_w > 0.0 && r_z > r_w && r_z.is_finite()) {
        return Err(Error::NoSeparatingAnnulus(format!(
            "z radius {r_z:e} does not exceed w radius {r_w:e}"
        )));
    }
    Ok(ContourSpec {
        r_w,
        r_z,
        nodes: INITIAL_NODES,
        w_poles,
        z_cancelled,
        z_excluded,
        z_threshold: p2,
    })
}

/// Contours for the finite-N lozenge kernel: the z circle separates the
/// exponents ≥ p2 − p1 from the rest, the w circle encloses it.
pub fn classify_lozenge_poles(
    pt1: LozengePoint,
    pt2: LozengePoint,
    n_rows: usize,
    q: QParam,
) -> Result<ContourSpec> {
    let n = n_rows as i64;
    if !(1 <= pt1.n && pt1.n <= n && 1 <= pt2.n && pt2.n < n) {
        return Err(Error::Domain(format!(
            "lozenge kernel needs 1 <= n1 <= N and 1 <= n2 <= N-1, got n1 = {}, n2 = {}, N = {n}",
            pt1.n, pt2.n
        )));
    }
    let gap = pt2.p - pt1.p;
    let r_z = (q.ln() * (gap as f64 - 0.5)).exp();
    Ok(ContourSpec {
        r_w: 2.0 * r_z,
        r_z,
        nodes: INITIAL_NODES,
        w_poles: Vec::new(),
        z_cancelled: BTreeSet::new(),
        z_excluded: Vec::new(),
        z_threshold: gap,
    })
}
