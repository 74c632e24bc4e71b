//! q-series primitives: q-Pochhammer symbols (finite, negative index and
//! infinite) and Gaussian binomials, over real and complex arguments.
//!
//! Long products of near-unit factors are accumulated in log space so that
//! large indices neither underflow nor lose their phase.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Distance from zero below which a negative-index factor counts as a pole.
pub const POLE_TOL: f64 = 1e-12;
/// Default relative truncation tolerance for infinite products.
pub const INF_TOL: f64 = 1e-15;
/// Hard cap on the number of factors of an infinite product.
pub const INF_CAP: usize = 1_000_000;

/// The base of all q-series, strictly inside (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct QParam(f64);

impl QParam {
    pub fn new(q: f64) -> Result<Self> {
        if q > 0.0 && q < 1.0 {
            Ok(QParam(q))
        } else {
            Err(Error::Domain(format!("q = {q} is not in (0,1)")))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn ln(self) -> f64 {
        self.0.ln()
    }

    /// q^e for an integer (possibly negative) exponent.
    #[inline]
    pub fn pow(self, e: i64) -> f64 {
        if e.unsigned_abs() < i32::MAX as u64 {
            self.0.powi(e as i32)
        } else {
            (e as f64 * self.0.ln()).exp()
        }
    }

    /// 1 − q^e, accurate when q^e is close to 1.
    #[inline]
    pub fn one_minus_pow(self, e: i64) -> f64 {
        -(e as f64 * self.0.ln()).exp_m1()
    }
}

impl TryFrom<f64> for QParam {
    type Error = Error;
    fn try_from(q: f64) -> Result<Self> {
        QParam::new(q)
    }
}

/// ln(1 + z) with the compensated-rounding trick for small |z|.
fn clog1p(z: Complex64) -> Complex64 {
    let u = Complex64::new(1.0, 0.0) + z;
    let d = u - 1.0;
    if d == Complex64::new(0.0, 0.0) {
        z
    } else {
        u.ln() * (z / d)
    }
}

/// Accumulates ∏ (1 − c_i); factors with positive real part go through the
/// log sum, the rest are multiplied directly.
struct ProductAcc {
    log: Complex64,
    direct: Complex64,
}

impl ProductAcc {
    fn new() -> Self {
        ProductAcc {
            log: Complex64::new(0.0, 0.0),
            direct: Complex64::new(1.0, 0.0),
        }
    }

    #[inline]
    fn push(&mut self, c: Complex64) {
        let f = Complex64::new(1.0, 0.0) - c;
        if f.re > 0.0 {
            self.log += clog1p(-c);
        } else {
            self.direct *= f;
        }
    }

    fn value(&self) -> Complex64 {
        self.log.exp() * self.direct
    }
}

/// (a; q)_k. For k < 0 this is 1/(a q^k; q)_{−k} = 1/∏_{j=1}^{−k}(1 − a q^{−j}).
pub fn qpoch(a: Complex64, q: QParam, k: i64) -> Result<Complex64> {
    let mut acc = ProductAcc::new();
    if k >= 0 {
        let mut c = a;
        for _ in 0..k {
            acc.push(c);
            c *= q.0;
        }
        Ok(acc.value())
    } else {
        let inv = 1.0 / q.0;
        let mut c = a * inv;
        for j in 1..=(-k) {
            let f = Complex64::new(1.0, 0.0) - c;
            if f.norm() < POLE_TOL {
                return Err(Error::PoleHit {
                    index: -j,
                    modulus: f.norm(),
                });
            }
            acc.push(c);
            c *= inv;
        }
        Ok(acc.value().inv())
    }
}

/// Real-argument convenience wrapper around [`qpoch`].
pub fn qpoch_real(a: f64, q: QParam, k: i64) -> Result<f64> {
    Ok(qpoch(Complex64::new(a, 0.0), q, k)?.re)
}

/// (q; q)_k for k ≥ 0, computed with expm1 for each factor.
pub fn qfact(q: QParam, k: i64) -> f64 {
    let mut s = 0.0;
    for i in 1..=k {
        s += q.one_minus_pow(i).ln();
    }
    s.exp()
}

/// ∏_{i=0}^{k−1} (1 − a·r^i) for an arbitrary positive ratio r; with r = 1/q
/// this is (a; q^{−1})_k.
pub fn geometric_prod(a: Complex64, r: f64, k: usize) -> Complex64 {
    let mut acc = ProductAcc::new();
    let mut c = a;
    for _ in 0..k {
        acc.push(c);
        c *= r;
    }
    acc.value()
}

/// (a; q)_∞, truncated once the tail bound |a| q^K / (1 − q) drops below tol.
pub fn qpoch_inf(a: Complex64, q: QParam, tol: f64) -> Result<Complex64> {
    let tol = if tol > 0.0 { tol } else { INF_TOL };
    let mut acc = ProductAcc::new();
    let mut c = a;
    let tail = 1.0 / (1.0 - q.0);
    for _ in 0..INF_CAP {
        if c.norm() * tail < tol {
            return Ok(acc.value());
        }
        acc.push(c);
        c *= q.0;
    }
    Err(Error::TruncationCap { cap: INF_CAP })
}

/// Gaussian binomial (q;q)_n / ((q;q)_k (q;q)_{n−k}); zero outside 0 ≤ k ≤ n.
pub fn qbinom(n: i64, k: i64, q: QParam) -> f64 {
    if k < 0 || k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut s = 0.0;
    for i in 1..=k {
        s += q.one_minus_pow(n - k + i).ln() - q.one_minus_pow(i).ln();
    }
    s.exp()
}
