use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::profile::ClusterProfile;
use crate::error::{Error, Result};

/// Relative threshold on |Im w| below which a root counts as real.
pub const TOL_IM: f64 = 1e-9;

/// Roots closer than this (relative) are merged into one with multiplicity.
const MERGE: f64 = 1e-7;

/// Coefficients in increasing degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    fn linear_product(lin: &[(f64, f64)]) -> Poly {
        // ∏ (s w + c)
        let mut p = vec![1.0];
        for &(s, c) in lin {
            let mut next = vec![0.0; p.len() + 1];
            for (k, &a) in p.iter().enumerate() {
                next[k] += a * c;
                next[k + 1] += a * s;
            }
            p = next;
        }
        Poly(p)
    }

    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn eval(&self, w: Complex64) -> Complex64 {
        self.0.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * w + c)
    }

    /// P(w) and P′(w) by Horner.
    pub fn eval_with_derivative(&self, w: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in self.0.iter().rev() {
            dp = dp * w + p;
            p = p * w + c;
        }
        (p, dp)
    }

    /// Σ|c_k||w|^k and Σ k|c_k||w|^{k−1}: the rounding scales of P(w) and P′(w).
    pub fn magnitudes(&self, w: f64) -> (f64, f64) {
        let a = w.abs();
        let mut s = 0.0;
        let mut ds = 0.0;
        for (k, &c) in self.0.iter().enumerate() {
            s += c.abs() * a.powi(k as i32);
            if k > 0 {
                ds += k as f64 * c.abs() * a.powi(k as i32 - 1);
            }
        }
        (s, ds)
    }

    pub fn max_coefficient(&self) -> f64 {
        self.0.iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }
}

/// P(w) = w e^{γ(τ+1)}(w e^{γρ} − 1)∏(w e^{γ(a_i+C_i)} − 1)
///      − (w − 1)(w e^{γ(ρ+τ)} − 1)∏(w e^{γ(a_{i+1}+C_i)} − 1),
/// expanded from its linear factors. The w^{L+2} coefficients of the two
/// products cancel identically, so the top one is dropped.
pub fn critical_polynomial(tau: f64, rho: f64, profile: &ClusterProfile) -> Poly {
    let g = profile.gamma();
    let (num, den) = profile.factors();
    let mut left = vec![(1.0, 0.0), ((g * rho).exp(), -1.0)];
    left.extend(num.iter().map(|&a| (a, -1.0)));
    let mut right = vec![(1.0, -1.0), ((g * (rho + tau)).exp(), -1.0)];
    right.extend(den.iter().map(|&b| (b, -1.0)));
    let lp = Poly::linear_product(&left);
    let rp = Poly::linear_product(&right);
    let lead = (g * (tau + 1.0)).exp();
    let mut c: Vec<f64> = lp.0.iter().zip(&rp.0).map(|(a, b)| lead * a - b).collect();
    c.pop();
    Poly(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalRoot {
    #[serde(serialize_with = "ser_complex")]
    pub w: Complex64,
    pub multiplicity: usize,
    pub real: bool,
}

pub(crate) fn ser_complex<S: serde::Serializer>(
    z: &Complex64,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeStruct;
    let mut st = s.serialize_struct("Complex", 2)?;
    st.serialize_field("re", &z.re)?;
    st.serialize_field("im", &z.im)?;
    st.end()
}

/// Roots of a real polynomial: companion-matrix eigenvalues, one Newton
/// polish each, nearby roots merged.
pub fn poly_roots(p: &Poly) -> Result<Vec<CriticalRoot>> {
    let mut c = p.0.clone();
    while c.len() > 1 && c.last() == Some(&0.0) {
        c.pop();
    }
    let n = c.len() - 1;
    if n == 0 {
        return Ok(Vec::new());
    }
    let top = c[n];
    let comp = DMatrix::from_fn(n, n, |i, j| {
        if j == n - 1 {
            -c[i] / top
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let eig = comp.complex_eigenvalues();
    let poly = Poly(c);
    let mut raw = Vec::with_capacity(n);
    for &z0 in eig.iter() {
        if !(z0.re.is_finite() && z0.im.is_finite()) {
            return Err(Error::RootSolver(format!("non-finite eigenvalue {z0}")));
        }
        let (f, df) = poly.eval_with_derivative(z0);
        let z1 = if df.norm() > 0.0 { z0 - f / df } else { z0 };
        // keep the polish only if it lowers the residual
        let z = if z1.re.is_finite() && z1.im.is_finite() && poly.eval(z1).norm() <= f.norm() {
            z1
        } else {
            z0
        };
        raw.push(z);
    }
    let mut out: Vec<CriticalRoot> = Vec::new();
    let mut used = vec![false; raw.len()];
    for i in 0..raw.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let mut group = vec![raw[i]];
        for j in i + 1..raw.len() {
            if !used[j] && (raw[j] - raw[i]).norm() < MERGE * raw[i].norm().max(1.0) {
                used[j] = true;
                group.push(raw[j]);
            }
        }
        let mean = group.iter().sum::<Complex64>() / group.len() as f64;
        let real = mean.im.abs() <= TOL_IM * mean.norm().max(1.0);
        out.push(CriticalRoot {
            w: if real { Complex64::new(mean.re, 0.0) } else { mean },
            multiplicity: group.len(),
            real,
        });
    }
    out.sort_by(|a, b| a.w.re.total_cmp(&b.w.re).then(a.w.im.total_cmp(&b.w.im)));
    Ok(out)
}

/// All roots of the critical polynomial at (τ, ρ).
pub fn critical_points(tau: f64, rho: f64, profile: &ClusterProfile) -> Result<Vec<CriticalRoot>> {
    if !(tau > 0.0 && rho > 0.0) {
        return Err(Error::Domain(format!("need tau, rho > 0, got ({tau}, {rho})")));
    }
    poly_roots(&critical_polynomial(tau, rho, profile))
}
