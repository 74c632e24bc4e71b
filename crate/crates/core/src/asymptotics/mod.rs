//! Large-m asymptotics for clustered initial data: the critical-point
//! equation, liquid region, complex slope, incomplete beta kernel and the
//! frozen boundary.

mod beta;
mod boundary;
mod critical;
mod profile;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

pub use beta::{crossing_point, incomplete_beta, incomplete_beta_via, residue_at_zero};
pub use boundary::{boundary_at_tau, boundary_point, double_root_certificate, frozen_boundary, BoundaryPoint};
pub use critical::{critical_points, critical_polynomial, poly_roots, CriticalRoot, Poly, TOL_IM};
pub use profile::{f_eval, realize_initial_config, ClusterProfile};

use crate::error::{Error, Result};
use crate::format::sig12;
use crate::kernel::{kernel_walks, KernelOptions, SpaceTimePoint};
use crate::qcalc::QParam;
use critical::ser_complex;

/// A point of the liquid region and its critical point in the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LiquidPoint {
    pub tau: f64,
    pub rho: f64,
    #[serde(serialize_with = "ser_complex")]
    pub w_c: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexSlope {
    #[serde(serialize_with = "ser_complex")]
    pub omega: Complex64,
}

impl ComplexSlope {
    pub fn new(omega: Complex64) -> Result<Self> {
        if !(omega.im > 0.0) {
            return Err(Error::Domain(format!("complex slope {omega} is not in the upper half-plane")));
        }
        Ok(ComplexSlope { omega })
    }

    /// B_ω(0,0) = Arg ω / π, the local particle density.
    pub fn density(&self) -> f64 {
        self.omega.arg() / std::f64::consts::PI
    }
}

/// The liquid point at (τ, ρ) when exactly one critical point lies in the
/// open upper half-plane.
pub fn liquid_membership(tau: f64, rho: f64, profile: &ClusterProfile) -> Result<Option<LiquidPoint>> {
    let roots = critical_points(tau, rho, profile)?;
    let upper: Vec<_> = roots.iter().filter(|r| !r.real && r.w.im > 0.0).collect();
    Ok(match upper.as_slice() {
        [r] if r.multiplicity == 1 => Some(LiquidPoint { tau, rho, w_c: r.w }),
        _ => None,
    })
}

/// ω·F(e^{−γρ}(1−ω)/(1−e^{γτ}ω)) − e^{−γ(τ+1)}.
pub fn slope_residual(omega: Complex64, tau: f64, rho: f64, profile: &ClusterProfile) -> Result<f64> {
    let g = profile.gamma();
    let w = (-g * rho).exp() * (1.0 - omega) / (1.0 - (g * tau).exp() * omega);
    Ok((omega * f_eval(w, profile)? - (-g * (tau + 1.0)).exp()).norm())
}

/// ω = (1 − w_c e^{γρ})/(1 − w_c e^{γ(τ+ρ)}), checked against its own equation.
pub fn complex_slope(pt: &LiquidPoint, profile: &ClusterProfile) -> Result<ComplexSlope> {
    let g = profile.gamma();
    let omega = (1.0 - pt.w_c * (g * pt.rho).exp()) / (1.0 - pt.w_c * (g * (pt.tau + pt.rho)).exp());
    if !(omega.im > 0.0) || omega == Complex64::new(1.0, 0.0) {
        return Err(Error::Consistency(format!("complex slope {omega} is not in the upper half-plane")));
    }
    let res = slope_residual(omega, pt.tau, pt.rho, profile)?;
    if !(res < 1e-9) {
        return Err(Error::Consistency(format!(
            "complex slope {omega} misses its equation by {res:e} at ({}, {})",
            pt.tau, pt.rho
        )));
    }
    Ok(ComplexSlope { omega })
}

/// Finite-m kernel next to its bulk limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BulkComparison {
    pub finite_value: f64,
    pub limit_value: f64,
    pub abs_err: f64,
}

/// (−1)^{Δt} e^{γ(τ+ρ)Δt} K_walks(⌊ρm⌋+Δp, ⌊τm⌋+Δt; ⌊ρm⌋, ⌊τm⌋) at q = e^{−γ/m}
/// against its bulk limit 1_{Δt=Δp=0} − B_ω(Δt, −Δp).
///
/// The steepest-descent computation produces the integrand (1−u)^{Δt} u^{Δp−1}
/// for a first point shifted by +Δp, which is B_ω with the space offset
/// reversed; the finite kernel confirms this orientation. The kernel is
/// evaluated by exact residues, since the quadrature integrand overflows at
/// this scale.
pub fn bulk_limit_compare(
    m: usize,
    profile: &ClusterProfile,
    tau: f64,
    rho: f64,
    dt: i64,
    dp: i64,
    tol: f64,
) -> Result<BulkComparison> {
    let lp = liquid_membership(tau, rho, profile)?
        .ok_or_else(|| Error::Domain(format!("({tau}, {rho}) is not in the liquid region")))?;
    let omega = complex_slope(&lp, profile)?;
    let g = profile.gamma();
    let mf = m as f64;
    let x = realize_initial_config(profile, m)?;
    let q = QParam::new((-g / mf).exp())?;
    let (y, t) = ((rho * mf).floor() as i64, (tau * mf).floor() as i64);
    let k = kernel_walks(
        SpaceTimePoint::new(y + dp, t + dt),
        SpaceTimePoint::new(y, t),
        &x,
        q,
        &KernelOptions::residue(),
    )?;
    let sign = if dt.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let finite_value = sign * (g * (tau + rho) * dt as f64).exp() * k.value.re;
    let delta = if dt == 0 && dp == 0 { 1.0 } else { 0.0 };
    let limit_value = delta - incomplete_beta(omega, dt, -dp, tol)?.re;
    Ok(BulkComparison {
        finite_value,
        limit_value,
        abs_err: (finite_value - limit_value).abs(),
    })
}

/// One row of a liquid-region scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRow {
    pub tau: f64,
    pub rho: f64,
    pub liquid: Option<(LiquidPoint, ComplexSlope)>,
}

/// Membership and complex slope over the product grid taus × rhos.
/// Points where the slope fails its check are reported as errors.
pub fn scan_liquid(profile: &ClusterProfile, taus: &[f64], rhos: &[f64]) -> Result<Vec<ScanRow>> {
    let pts: Vec<(f64, f64)> = taus.iter().flat_map(|&t| rhos.iter().map(move |&r| (t, r))).collect();
    pts.par_iter()
        .map(|&(tau, rho)| {
            let liquid = match liquid_membership(tau, rho, profile)? {
                Some(lp) => Some((lp, complex_slope(&lp, profile)?)),
                None => None,
            };
            Ok(ScanRow { tau, rho, liquid })
        })
        .collect()
}

pub fn boundary_csv(points: &[BoundaryPoint]) -> String {
    let mut s = String::from("w,tau,rho\n");
    for p in points {
        s += &format!("{},{},{}\n", sig12(p.w), sig12(p.tau), sig12(p.rho));
    }
    s
}

pub fn scan_csv(rows: &[ScanRow]) -> String {
    let mut s = String::from("tau,rho,in_liquid,re_wc,im_wc,re_omega,im_omega\n");
    for r in rows {
        match &r.liquid {
            Some((lp, om)) => {
                s += &format!(
                    "{},{},1,{},{},{},{}\n",
                    sig12(r.tau),
                    sig12(r.rho),
                    sig12(lp.w_c.re),
                    sig12(lp.w_c.im),
                    sig12(om.omega.re),
                    sig12(om.omega.im)
                )
            }
            None => s += &format!("{},{},0,,,,\n", sig12(r.tau), sig12(r.rho)),
        }
    }
    s
}
