//! The q^{−volume} measure on interlacing arrays with fixed top row λ
//! (lozenge tilings of a sawtooth polygon) and its limit to the walks.

mod enumerate;
mod partition;

use serde::Serialize;

pub use enumerate::{enumerate_arrays, interlacing_below, tilings_json, volume, TilingRecord, MAX_ENUM_N};
pub use partition::Partition;

use crate::error::{Error, Result};
use crate::qcalc::QParam;
use crate::walks::{transition_prob, WalkConfig};

/// μ ≺ λ: λ₁ ≥ μ₁ ≥ λ₂ ≥ … ≥ μ_{N−1} ≥ λ_N.
pub fn interlaces(mu: &Partition, lambda: &Partition) -> bool {
    let (m, l) = (mu.parts(), lambda.parts());
    m.len() + 1 == l.len() && (0..m.len()).all(|i| l[i] >= m[i] && m[i] >= l[i + 1])
}

/// A validated pair μ ≺ λ.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InterlacingPair {
    lower: Partition,
    upper: Partition,
}

impl InterlacingPair {
    pub fn new(lower: Partition, upper: Partition) -> Result<Self> {
        if !interlaces(&lower, &upper) {
            return Err(Error::InvalidPartition(format!(
                "{:?} does not interlace with {:?}",
                lower.parts(),
                upper.parts()
            )));
        }
        Ok(InterlacingPair { lower, upper })
    }

    pub fn lower(&self) -> &Partition {
        &self.lower
    }

    pub fn upper(&self) -> &Partition {
        &self.upper
    }
}

/// s_λ(q^{1−N}, …, q^{−1}, 1) = q^{|λ|(1−N)} ∏_{i<j} (q^{λ_i−i} − q^{λ_j−j})/(q^{−i} − q^{−j})
/// as q^e · exp(l) with the integer exponent e kept exact. With a = λ_i − i,
/// b = λ_j − j, c = −i, d = −j each factor is q^{b−d}(1 − q^{a−b})/(1 − q^{c−d}).
fn schur_split(lambda: &Partition, q: QParam) -> (i64, f64) {
    let n = lambda.len() as i64;
    let lq = q.ln();
    let l = lambda.parts();
    let log1m = |k: i64| (-(lq * k as f64).exp()).ln_1p();
    let mut e = lambda.size() * (1 - n);
    let mut s = 0.0;
    for i in 0..l.len() {
        for j in i + 1..l.len() {
            let (a, b) = (l[i] - i as i64, l[j] - j as i64);
            e += l[j];
            s += log1m(a - b) - log1m((j - i) as i64);
        }
    }
    (e, s)
}

/// log s_λ(q^{1−N}, …, q^{−1}, 1) with N = len(λ).
pub fn log_schur_principal(lambda: &Partition, q: QParam) -> f64 {
    let (e, s) = schur_split(lambda, q);
    e as f64 * q.ln() + s
}

/// s_λ(q^{1−N}, …, q^{−1}, 1), the partition function of the measure with top row λ.
pub fn schur_principal(lambda: &Partition, q: QParam) -> f64 {
    log_schur_principal(lambda, q).exp()
}

/// P(Λ^{(N−1)} = μ | Λ^{(N)} = λ) = q^{−|μ|} Z_{N−1}(μ) / Z_N(λ), or 0 unless μ ≺ λ.
pub fn cond_prob_top_row(mu: &Partition, lambda: &Partition, q: QParam) -> f64 {
    if !interlaces(mu, lambda) {
        return 0.0;
    }
    let (em, sm) = schur_split(mu, q);
    let (el, sl) = schur_split(lambda, q);
    ((em - el - mu.size()) as f64 * q.ln() + (sm - sl)).exp()
}

/// The N parts ν_i = s_i + i for the complement s (in decreasing order) of
/// `removed` within [lo, hi].
fn from_complement(lo: i64, hi: i64, removed: &[i64], n: usize) -> Result<Partition> {
    let mut s: Vec<i64> = (lo..=hi).rev().filter(|v| !removed.contains(v)).collect();
    if s.len() != n || removed.iter().any(|&r| r < lo || r > hi) {
        return Err(Error::InvalidN {
            n,
            reason: format!("the points {removed:?} do not all fit in [{lo}, {hi}]"),
        });
    }
    s.iter_mut().enumerate().for_each(|(i, v)| *v += i as i64 + 1);
    Partition::new(s).map_err(|e| Error::InvalidN {
        n,
        reason: e.to_string(),
    })
}

/// λ and μ with {λ_i − i} = {0..N+m−1} \ x and {μ_i − i} = {1..N+m−1} \ (y + 1).
pub fn encode_boundary(x: &WalkConfig, y: &WalkConfig, n: usize) -> Result<(Partition, Partition)> {
    let m = x.m();
    if y.m() != m {
        return Err(Error::InvalidConfig(format!("{} and {} particles", m, y.m())));
    }
    if n < 2 {
        return Err(Error::InvalidN {
            n,
            reason: "need N >= 2".into(),
        });
    }
    let top = (n + m - 1) as i64;
    let lambda = from_complement(0, top, x.parts(), n)?;
    let shifted: Vec<i64> = y.parts().iter().map(|v| v + 1).collect();
    let mu = from_complement(1, top, &shifted, n - 1)?;
    Ok((lambda, mu))
}

/// The walk configuration encoded by a top row: the gaps of {λ_i − i} in [0, N+m−1].
pub fn decode_top(lambda: &Partition, m: usize) -> Result<WalkConfig> {
    let n = lambda.len();
    let sh = lambda.shifted();
    let x: Vec<i64> = (0..(n + m) as i64).rev().filter(|v| !sh.contains(v)).collect();
    if x.len() != m {
        return Err(Error::InvalidN {
            n,
            reason: format!("{:?} does not encode {m} walkers", lambda.parts()),
        });
    }
    WalkConfig::new(x)
}

/// The walk configuration y encoded by the second row μ of a depth-N array.
pub fn decode_second(mu: &Partition, m: usize) -> Result<WalkConfig> {
    let n = mu.len() + 1;
    let sh = mu.shifted();
    let y: Vec<i64> = (1..(n + m) as i64).rev().filter(|v| !sh.contains(v)).map(|v| v - 1).collect();
    if y.len() != m {
        return Err(Error::InvalidN {
            n,
            reason: format!("{:?} does not encode {m} walkers", mu.parts()),
        });
    }
    WalkConfig::new(y)
}

/// |P(Λ^{(N−1)} = μ) − Υ_m(x, y)| for each N, with (λ, μ) encoding (x, y).
pub fn convergence_to_walks(x: &WalkConfig, y: &WalkConfig, q: QParam, n_list: &[usize]) -> Result<Vec<f64>> {
    let target = transition_prob(x, y, q);
    n_list
        .iter()
        .map(|&n| {
            let (lambda, mu) = encode_boundary(x, y, n)?;
            Ok((cond_prob_top_row(&mu, &lambda, q) - target).abs())
        })
        .collect()
}
