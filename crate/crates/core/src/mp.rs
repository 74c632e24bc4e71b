//! Thin multiprecision layer over `dashu-float` for the exact residue
//! evaluations, where double precision loses every digit to cancellation.

use dashu_float::ops::Abs;
use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;

/// Binary multiprecision float with round-half-even.
pub type Mp = FBig<HalfEven, 2>;

/// Working precision bound to a value of q, with a cached table of powers.
#[derive(Clone)]
pub struct MpCtx {
    bits: usize,
    one: Mp,
    q: Mp,
    qinv: Mp,
    lo: i64,
    pows: Vec<Mp>,
}

impl MpCtx {
    pub fn new(q: f64, bits: usize) -> Self {
        let one = Mp::ONE.with_precision(bits).value();
        let qm = from_f64(q, bits);
        let qinv = &one / &qm;
        MpCtx {
            bits,
            one: one.clone(),
            q: qm,
            qinv,
            lo: 0,
            pows: vec![one],
        }
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn one(&self) -> Mp {
        self.one.clone()
    }

    pub fn zero(&self) -> Mp {
        Mp::ZERO.with_precision(self.bits).value()
    }

    pub fn from_f64(&self, v: f64) -> Mp {
        from_f64(v, self.bits)
    }

    pub fn int(&self, v: i64) -> Mp {
        Mp::from(v).with_precision(self.bits).value()
    }

    /// Extends the power table to cover [lo, hi].
    pub fn reserve(&mut self, lo: i64, hi: i64) {
        let top = self.lo + self.pows.len() as i64 - 1;
        if hi > top {
            let mut cur = self.pows.last().unwrap().clone();
            for _ in top..hi {
                cur = &cur * &self.q;
                self.pows.push(cur.clone());
            }
        }
        if lo < self.lo {
            let extra = (self.lo - lo) as usize;
            let mut front = Vec::with_capacity(extra);
            let mut cur = self.pows[0].clone();
            for _ in 0..extra {
                cur = &cur * &self.qinv;
                front.push(cur.clone());
            }
            front.reverse();
            front.append(&mut self.pows);
            self.pows = front;
            self.lo = lo;
        }
    }

    /// q^e; the exponent must lie in the reserved range.
    #[inline]
    pub fn pow(&self, e: i64) -> &Mp {
        let i = e - self.lo;
        assert!(
            i >= 0 && (i as usize) < self.pows.len(),
            "q-power {e} outside the reserved table"
        );
        &self.pows[i as usize]
    }

    /// q^e for any exponent: table lookup when reserved, binary powering otherwise.
    pub fn powi(&self, e: i64) -> Mp {
        let i = e - self.lo;
        if i >= 0 && (i as usize) < self.pows.len() {
            return self.pows[i as usize].clone();
        }
        let mut base = if e < 0 { self.qinv.clone() } else { self.q.clone() };
        let mut k = e.unsigned_abs();
        let mut acc = self.one();
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// (q; q)_∞ truncated below the working precision.
    pub fn qfact_inf(&self) -> Mp {
        let mut p = self.one();
        let mut c = self.q.clone();
        // factors beyond q^K with q^K < 2^{−bits−4} are one to working precision
        let q = to_f64(&self.q);
        let terms = ((self.bits + 4) as f64 / -q.log2()).ceil() as usize + 1;
        for _ in 0..terms {
            p *= &self.one - &c;
            c = &c * &self.q;
        }
        p
    }

    /// 1 − q^e.
    #[inline]
    pub fn one_minus(&self, e: i64) -> Mp {
        &self.one - self.pow(e)
    }

    /// (q; q)_k.
    pub fn qfact(&self, k: i64) -> Mp {
        let mut p = self.one();
        for i in 1..=k {
            p *= self.one_minus(i);
        }
        p
    }
}

pub fn from_f64(v: f64, bits: usize) -> Mp {
    Mp::try_from(v)
        .expect("finite f64")
        .with_precision(bits)
        .value()
}

pub fn abs(v: Mp) -> Mp {
    v.abs()
}

pub fn to_f64(v: &Mp) -> f64 {
    v.to_f64().value()
}
