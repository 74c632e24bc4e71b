use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::walks::WalkConfig;

/// Values this close to an integer are snapped to it before flooring, so
/// that decimal inputs such as C = 0.29 with m = 100 give 29, not 28.
const SNAP: f64 = 1e-9;

fn floor_snapped(v: f64) -> i64 {
    let r = v.round();
    if (v - r).abs() <= SNAP * v.abs().max(1.0) {
        r as i64
    } else {
        v.floor() as i64
    }
}

/// L densely packed clusters: the cluster of particles with labels in
/// [m a_k, m a_{k+1}) sits at offset m C_k, and γ sets q = e^{−γ/m}.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterProfile {
    a: Vec<f64>,
    c: Vec<f64>,
    gamma: f64,
}

impl ClusterProfile {
    pub fn new(a: Vec<f64>, c: Vec<f64>, gamma: f64) -> Result<Self> {
        let l = c.len();
        if l == 0 || a.len() != l + 1 {
            return Err(Error::InvalidConfig(format!(
                "need L >= 1 offsets and L+1 breakpoints, got {} and {}",
                l,
                a.len()
            )));
        }
        if a[0] != 0.0 || a[l] != 1.0 || a.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidConfig(format!(
                "breakpoints must increase strictly from 0 to 1: {a:?}"
            )));
        }
        if !(c[0] > 0.0) || c.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidConfig(format!(
                "offsets must be positive and strictly increasing: {c:?}"
            )));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::Domain(format!("gamma = {gamma} must be positive")));
        }
        Ok(ClusterProfile { a, c, gamma })
    }

    /// One packed cluster x_i = i + ⌊m c⌋.
    pub fn single(c: f64, gamma: f64) -> Result<Self> {
        ClusterProfile::new(vec![0.0, 1.0], vec![c], gamma)
    }

    pub fn clusters(&self) -> usize {
        self.c.len()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.a
    }

    pub fn offsets(&self) -> &[f64] {
        &self.c
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        ClusterProfile::new(self.a.clone(), self.c.clone(), gamma)
    }

    /// g(u) = u + C_k on [a_k, a_{k+1}); the last interval is closed at 1.
    pub fn g(&self, u: f64) -> f64 {
        let l = self.c.len();
        let k = (0..l).find(|&k| u < self.a[k + 1]).unwrap_or(l - 1);
        u + self.c[k]
    }

    /// ∫₀¹ g(u) du.
    pub fn g_integral(&self) -> f64 {
        let mut s = 0.5;
        for k in 0..self.c.len() {
            s += self.c[k] * (self.a[k + 1] - self.a[k]);
        }
        s
    }

    /// Zeros e^{−γ(a_k + C_k)} and poles e^{−γ(a_{k+1} + C_k)} of the product in F.
    pub(crate) fn factors(&self) -> (Vec<f64>, Vec<f64>) {
        let g = self.gamma;
        let num = (0..self.c.len()).map(|k| (g * (self.a[k] + self.c[k])).exp()).collect();
        let den = (0..self.c.len()).map(|k| (g * (self.a[k + 1] + self.c[k])).exp()).collect();
        (num, den)
    }

    /// Poles of F: w = 1 and w = e^{−γ(a_{k+1} + C_k)}.
    pub fn f_poles(&self) -> Vec<f64> {
        let (_, den) = self.factors();
        let mut p = vec![1.0];
        p.extend(den.iter().map(|b| 1.0 / b));
        p
    }
}

/// The initial configuration x_i = i + ⌊m C_k⌋ for m a_k ≤ i < m a_{k+1},
/// i = 1..m (i = m joins the last cluster), in decreasing order.
pub fn realize_initial_config(profile: &ClusterProfile, m: usize) -> Result<WalkConfig> {
    if m == 0 {
        return Err(Error::InvalidN {
            n: 0,
            reason: "need m >= 1".into(),
        });
    }
    let l = profile.clusters();
    let mf = m as f64;
    let bounds: Vec<i64> = profile.a.iter().map(|&a| {
        // first label of each cluster: the least i with i >= m a
        let v = mf * a;
        let f = floor_snapped(v);
        if (v - f as f64).abs() <= SNAP * v.abs().max(1.0) { f } else { f + 1 }
    }).collect();
    let offsets: Vec<i64> = profile.c.iter().map(|&c| floor_snapped(mf * c)).collect();
    let mut x: Vec<i64> = (1..=m as i64)
        .map(|i| {
            let k = (0..l).find(|&k| i < bounds[k + 1]).unwrap_or(l - 1);
            i + offsets[k]
        })
        .collect();
    x.reverse();
    WalkConfig::new(x).map_err(|e| match e {
        Error::InvalidConfig(s) => Error::InvalidConfig(format!("cluster floors collide: {s}")),
        other => other,
    })
}

/// F(w) = w/(w−1) ∏ (w e^{γ(a_k+C_k)} − 1)/(w e^{γ(a_{k+1}+C_k)} − 1).
pub fn f_eval(w: Complex64, profile: &ClusterProfile) -> Result<Complex64> {
    let (num, den) = profile.factors();
    let near = |d: Complex64, pole: f64, index: i64| {
        if d.norm() < 1e-14 * pole.abs().max(1.0) {
            Err(Error::PoleHit {
                index,
                modulus: d.norm(),
            })
        } else {
            Ok(())
        }
    };
    near(w - 1.0, 1.0, 0)?;
    let mut v = w / (w - 1.0);
    for k in 0..num.len() {
        near(w - 1.0 / den[k], 1.0 / den[k], k as i64 + 1)?;
        v *= (w * num[k] - 1.0) / (w * den[k] - 1.0);
    }
    Ok(v)
}

/// G = F/w and G′ at a real point, by the product rule on the numerator
/// ∏(α w − 1) and denominator (w − 1)∏(β w − 1). Working with G keeps
/// wF′ − F = w²G′ free of cancellation near w = 0.
pub(crate) fn reduced_and_derivative(w: f64, profile: &ClusterProfile) -> Option<(f64, f64)> {
    let (num, den) = profile.factors();
    let prod = |lin: &mut dyn Iterator<Item = (f64, f64)>| {
        // ∏ (s w + c) and its derivative
        let (mut p, mut dp) = (1.0, 0.0);
        for (s, c) in lin {
            let f = s * w + c;
            dp = dp * f + p * s;
            p *= f;
        }
        (p, dp)
    };
    let (n, dn) = prod(&mut num.iter().map(|&a| (a, -1.0)));
    let (d, dd) = prod(&mut std::iter::once((1.0, -1.0)).chain(den.iter().map(|&b| (b, -1.0))));
    if d == 0.0 || !d.is_finite() {
        return None;
    }
    Some((n / d, (dn * d - n * dd) / (d * d)))
}

/// F and F′ at a real point.
#[cfg(test)]
pub(crate) fn f_and_derivative(w: f64, profile: &ClusterProfile) -> Option<(f64, f64)> {
    let (g, dg) = reduced_and_derivative(w, profile)?;
    Some((w * g, g + w * dg))
}
