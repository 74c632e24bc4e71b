//! The noncolliding q-exchangeable walks: single-walk kernels, the m-particle
//! transition law as a Doob transform of independent walks, exact samplers,
//! trajectory volume, the partition function and the Karlin–McGregor ratio.

mod coupled;
mod export;
mod km;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qcalc::{qbinom, QParam};

pub use coupled::sample_step_coupled;
pub use export::{trajectory_csv, trajectory_json};
pub use km::{km_error, km_limit, km_ratio};

/// Largest number of step patterns the exhaustive sampler will enumerate.
pub const ENUM_CAP: usize = 1 << 16;
/// Default cap on trajectory length.
pub const STEP_CAP: usize = 1_000_000;

/// A point of the Weyl chamber: strictly decreasing nonnegative integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct WalkConfig(Vec<i64>);

impl WalkConfig {
    pub fn new(parts: Vec<i64>) -> Result<Self> {
        if parts.iter().any(|&v| v < 0) {
            return Err(Error::InvalidConfig(format!("negative entry in {parts:?}")));
        }
        if parts.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::InvalidConfig(format!(
                "{parts:?} is not strictly decreasing"
            )));
        }
        Ok(WalkConfig(parts))
    }

    /// The absorbing configuration (m−1, …, 1, 0).
    pub fn packed(m: usize) -> Self {
        WalkConfig((0..m as i64).rev().collect())
    }

    pub fn parts(&self) -> &[i64] {
        &self.0
    }

    pub fn m(&self) -> usize {
        self.0.len()
    }

    /// |x| = Σ x_i.
    pub fn size(&self) -> i64 {
        self.0.iter().sum()
    }

    pub fn is_packed(&self) -> bool {
        self.0.last().map_or(true, |&v| v == 0) && self.0.windows(2).all(|w| w[0] == w[1] + 1)
    }

    pub fn contains(&self, y: i64) -> bool {
        self.0.iter().any(|&v| v == y)
    }
}

/// A sampled path t = 0, 1, …, T_end ending at the packed configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    pub states: Vec<WalkConfig>,
    pub seed: u64,
}

impl Trajectory {
    pub fn absorption_time(&self) -> usize {
        self.states.len().saturating_sub(1)
    }

    /// Configuration at time t; stays at the final state after absorption.
    pub fn at(&self, t: usize) -> &WalkConfig {
        &self.states[t.min(self.states.len() - 1)]
    }
}

/// The law of one step from a fixed configuration.
#[derive(Debug, Clone)]
pub struct StepDistribution {
    pub support: Vec<(WalkConfig, f64)>,
}

fn choose2(m: usize) -> i64 {
    (m as i64) * (m as i64 - 1) / 2
}

/// Υ_1(x, y).
pub fn step_prob_single(x: i64, y: i64, q: QParam) -> f64 {
    if x < 0 {
        0.0
    } else if y == x {
        q.pow(x)
    } else if y == x - 1 {
        q.one_minus_pow(x)
    } else {
        0.0
    }
}

/// Υ_1^{(T)}(x, y), the T-step law of one walk.
pub fn multi_step_single(x: i64, y: i64, t: i64, q: QParam) -> f64 {
    if y < 0 || y > x || t < x - y {
        return 0.0;
    }
    let mut s = y as f64 * (t - x + y) as f64 * q.ln();
    for e in (y + 1)..=x {
        s += q.one_minus_pow(e).ln();
    }
    s.exp() * qbinom(t, x - y, q)
}

/// Υ_{m,ind}(x, y): product of independent single-walk steps.
pub fn independent_prob(x: &[i64], y: &[i64], q: QParam) -> f64 {
    x.iter()
        .zip(y)
        .map(|(&a, &b)| step_prob_single(a, b, q))
        .product()
}

/// Υ_m(x, y). Zero for illegal steps and for collisions.
pub fn transition_prob(x: &WalkConfig, y: &WalkConfig, q: QParam) -> f64 {
    transition_prob_raw(x.parts(), y.parts(), q)
}

pub(crate) fn transition_prob_raw(x: &[i64], y: &[i64], q: QParam) -> f64 {
    let m = x.len();
    if y.len() != m {
        return 0.0;
    }
    let mut expo = -choose2(m);
    let mut log = 0.0;
    for i in 0..m {
        let d = x[i] - y[i];
        match d {
            0 => log += x[i] as f64 * q.ln(),
            1 => {
                if x[i] == 0 {
                    return 0.0;
                }
                log += q.one_minus_pow(x[i]).ln();
                expo += (m - 1 - i) as i64;
            }
            _ => return 0.0,
        }
    }
    for i in 0..m {
        for j in (i + 1)..m {
            let dy = y[i] - y[j];
            if dy <= 0 {
                return 0.0;
            }
            log += q.one_minus_pow(dy).ln() - q.one_minus_pow(x[i] - x[j]).ln();
        }
    }
    (log + expo as f64 * q.ln()).exp()
}

fn log_h(x: &[i64], q: QParam) -> Option<f64> {
    let m = x.len();
    let mut s = 0.0;
    for (j, &v) in x.iter().enumerate() {
        s -= (m - 1 - j) as f64 * v as f64 * q.ln();
    }
    for i in 0..m {
        for j in (i + 1)..m {
            let d = x[i] - x[j];
            if d <= 0 {
                return None;
            }
            s += q.one_minus_pow(d).ln();
        }
    }
    Some(s)
}

/// h_m(x) = q^{−(m−1)|x|} ∏_{i<j}(q^{x_j} − q^{x_i}).
pub fn h_eigen(x: &WalkConfig, q: QParam) -> f64 {
    log_h(x.parts(), q).map_or(0.0, f64::exp)
}

/// Relative residual of the eigenrelation Σ_y h(y) Υ_ind(x,y) = q^{C(m,2)} h(x),
/// normalised by h(x) since h is only defined up to scale.
pub fn eigen_residual(x: &WalkConfig, q: QParam) -> f64 {
    let xs = x.parts();
    let m = xs.len();
    let lhx = log_h(xs, q).expect("configuration is strictly decreasing");
    let mut sum = 0.0;
    let mut y = xs.to_vec();
    for mask in 0u64..(1u64 << m) {
        let mut w = 1.0;
        for i in 0..m {
            let p = q.pow(xs[i]);
            if mask >> i & 1 == 1 {
                y[i] = xs[i] - 1;
                w *= 1.0 - p;
            } else {
                y[i] = xs[i];
                w *= p;
            }
        }
        if w == 0.0 {
            continue;
        }
        if let Some(lh) = log_h(&y, q) {
            sum += (lh - lhx).exp() * w;
        }
    }
    (sum - q.pow(choose2(m))).abs()
}

/// All positive-probability one-step targets with their probabilities.
pub fn step_distribution(x: &WalkConfig, q: QParam) -> Result<StepDistribution> {
    let m = x.m();
    if m >= 64 || (1usize << m) > ENUM_CAP {
        return Err(Error::Domain(format!(
            "m = {m} exceeds the enumeration cap of {ENUM_CAP} patterns"
        )));
    }
    let xs = x.parts();
    let mut support = Vec::new();
    let mut y = xs.to_vec();
    for mask in 0usize..(1usize << m) {
        for i in 0..m {
            y[i] = xs[i] - (mask >> i & 1) as i64;
        }
        let p = transition_prob_raw(xs, &y, q);
        if p > 0.0 {
            support.push((WalkConfig(y.clone()), p));
        }
    }
    Ok(StepDistribution { support })
}

/// Which exact sampler to use for a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepSampler {
    /// Enumeration for small m, coupling from the past otherwise.
    #[default]
    Auto,
    Enumerate,
    Coupled,
}

/// Draws y ~ Υ_m(x, ·) exactly.
pub fn sample_step<R: Rng + ?Sized>(x: &WalkConfig, q: QParam, rng: &mut R) -> WalkConfig {
    sample_step_with(x, q, rng, StepSampler::Auto).expect("auto sampler accepts every m")
}

pub fn sample_step_with<R: Rng + ?Sized>(
    x: &WalkConfig,
    q: QParam,
    rng: &mut R,
    sampler: StepSampler,
) -> Result<WalkConfig> {
    if x.is_packed() {
        return Ok(x.clone());
    }
    match sampler {
        StepSampler::Enumerate => sample_enumerated(x, q, rng),
        StepSampler::Coupled => Ok(sample_step_coupled(x, q, rng)),
        StepSampler::Auto if x.m() <= 8 => sample_enumerated(x, q, rng),
        StepSampler::Auto => Ok(sample_step_coupled(x, q, rng)),
    }
}

fn sample_enumerated<R: Rng + ?Sized>(
    x: &WalkConfig,
    q: QParam,
    rng: &mut R,
) -> Result<WalkConfig> {
    let dist = step_distribution(x, q)?;
    let total: f64 = dist.support.iter().map(|(_, p)| p).sum();
    let u = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    for (y, p) in &dist.support {
        acc += p;
        if u < acc {
            return Ok(y.clone());
        }
    }
    Ok(dist.support.last().expect("nonempty support").0.clone())
}

/// Runs the chain from x until absorption.
pub fn sample_trajectory<R: Rng + ?Sized>(
    x: &WalkConfig,
    q: QParam,
    rng: &mut R,
    seed: u64,
    cap: usize,
) -> Result<Trajectory> {
    let mut states = vec![x.clone()];
    let mut cur = x.clone();
    while !cur.is_packed() {
        if states.len() > cap {
            return Err(Error::StepCap { cap });
        }
        cur = sample_step(&cur, q, rng);
        states.push(cur.clone());
    }
    Ok(Trajectory { states, seed })
}

/// The greedy all-down configuration at time t from x.
pub fn fastest_at(x: &[i64], t: i64) -> Vec<i64> {
    let m = x.len() as i64;
    x.iter()
        .enumerate()
        .map(|(i, &v)| (v - t).max(m - 1 - i as i64))
        .collect()
}

/// Boxes above the minimal stepped surface: Σ_{t≥1} (|y(t)| − |y_min(t)|).
pub fn volume(traj: &Trajectory) -> i64 {
    volume_of(&traj.states)
}

pub(crate) fn volume_of(states: &[WalkConfig]) -> i64 {
    let x = states[0].parts();
    states
        .iter()
        .enumerate()
        .skip(1)
        .map(|(t, s)| s.size() - fastest_at(x, t as i64).iter().sum::<i64>())
        .sum()
}

/// Z = ∏_i 1/(q;q)_{x_i} · ∏_{i<j}(1 − q^{x_i − x_j}).
pub fn partition_function(x: &WalkConfig, q: QParam) -> f64 {
    let xs = x.parts();
    let mut s = 0.0;
    for &v in xs {
        for e in 1..=v {
            s -= q.one_minus_pow(e).ln();
        }
    }
    for i in 0..xs.len() {
        for j in (i + 1)..xs.len() {
            s += q.one_minus_pow(xs[i] - xs[j]).ln();
        }
    }
    s.exp()
}

/// All noncolliding one-step targets of x (steps in {0, −1}, staying ≥ 0).
pub(crate) fn admissible_targets(x: &[i64]) -> Vec<Vec<i64>> {
    let m = x.len();
    let mut out = Vec::new();
    let mut y = x.to_vec();
    for mask in 0usize..(1usize << m) {
        for i in 0..m {
            y[i] = x[i] - (mask >> i & 1) as i64;
        }
        if y.last().map_or(true, |&v| v >= 0) && y.windows(2).all(|w| w[0] > w[1]) {
            out.push(y.clone());
        }
    }
    out
}

/// Σ over every admissible trajectory from x of q^{volume}, by exhaustive
/// summation over paths grouped by state, truncated at a horizon where the
/// remaining mass is below `tol` relative.
pub fn brute_force_gibbs_sum(x: &WalkConfig, q: QParam, tol: f64) -> f64 {
    use std::collections::BTreeMap;
    let xs = x.parts().to_vec();
    let target = WalkConfig::packed(x.m());
    let mut layer: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
    layer.insert(xs.clone(), 1.0);
    let mut total = if x.is_packed() { 1.0 } else { 0.0 };
    if x.is_packed() {
        return total;
    }
    let mut t = 0i64;
    loop {
        t += 1;
        let fmin: i64 = fastest_at(&xs, t).iter().sum();
        let mut next: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
        for (s, w) in &layer {
            for y in admissible_targets(s) {
                let wy = w * q.pow(y.iter().sum::<i64>() - fmin);
                *next.entry(y).or_insert(0.0) += wy;
            }
        }
        if let Some(w) = next.remove(target.parts()) {
            total += w;
        }
        let rest: f64 = next.values().sum();
        layer = next;
        if layer.is_empty() || rest < tol * total.max(1e-300) * (1.0 - q.value()) {
            return total;
        }
    }
}

#[cfg(test)]
mod tests;
