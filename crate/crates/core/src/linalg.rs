//! Small dense determinants by full-pivot LU, generic over the scalar type,
//! plus a 1-norm condition estimate for real matrices.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::mp::{self, Mp};

pub trait Scalar:
    Clone
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn magnitude(&self) -> f64;
    fn one_like(&self) -> Self;
    fn is_zero(&self) -> bool {
        self.magnitude() == 0.0
    }
}

impl Scalar for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn one_like(&self) -> Self {
        1.0
    }
}

impl Scalar for Complex64 {
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn one_like(&self) -> Self {
        Complex64::new(1.0, 0.0)
    }
}

impl Scalar for Mp {
    // Magnitudes are only compared for pivoting; log2 keeps tiny values apart.
    fn magnitude(&self) -> f64 {
        if *self == Mp::ZERO {
            0.0
        } else {
            let v = mp::to_f64(&mp::abs(self.clone()));
            if v == 0.0 {
                f64::MIN_POSITIVE
            } else {
                v
            }
        }
    }
    fn one_like(&self) -> Self {
        Mp::ONE.with_precision(self.precision()).value()
    }
    fn is_zero(&self) -> bool {
        *self == Mp::ZERO
    }
}

/// Determinant of a square matrix given as rows, by Gaussian elimination with
/// full pivoting. The empty matrix has determinant one.
pub fn det<T: Scalar>(mut a: Vec<Vec<T>>, one: T) -> T {
    let n = a.len();
    let mut d = one;
    for k in 0..n {
        let (mut pi, mut pj, mut best) = (k, k, -1.0);
        for (i, row) in a.iter().enumerate().skip(k) {
            for (j, v) in row.iter().enumerate().skip(k) {
                let m = v.magnitude();
                if m > best {
                    best = m;
                    pi = i;
                    pj = j;
                }
            }
        }
        if a[pi][pj].is_zero() {
            return d.clone() - d;
        }
        if pi != k {
            a.swap(pi, k);
            d = -d;
        }
        if pj != k {
            for row in a.iter_mut() {
                row.swap(pj, k);
            }
            d = -d;
        }
        let piv = a[k][k].clone();
        for i in (k + 1)..n {
            let f = a[i][k].clone() / piv.clone();
            if f.is_zero() {
                continue;
            }
            for j in (k + 1)..n {
                let t = a[k][j].clone() * f.clone();
                a[i][j] = a[i][j].clone() - t;
            }
        }
        d = d * piv;
    }
    d
}

/// 1-norm condition number of a real matrix (infinite when singular).
pub fn cond1(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    if n == 0 {
        return 1.0;
    }
    let norm1 = |m: &[Vec<f64>]| {
        (0..n)
            .map(|j| (0..n).map(|i| m[i][j].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    // Gauss-Jordan inverse with partial pivoting.
    let mut w: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| w[i][k].abs().total_cmp(&w[j][k].abs()))
            .unwrap();
        if w[p][k] == 0.0 {
            return f64::INFINITY;
        }
        w.swap(p, k);
        let piv = w[k][k];
        for v in w[k].iter_mut() {
            *v /= piv;
        }
        for i in 0..n {
            if i != k {
                let f = w[i][k];
                if f != 0.0 {
                    for j in 0..2 * n {
                        w[i][j] -= f * w[k][j];
                    }
                }
            }
        }
    }
    let inv: Vec<Vec<f64>> = w.into_iter().map(|r| r[n..].to_vec()).collect();
    let c = norm1(a) * norm1(&inv);
    if c.is_finite() {
        c
    } else {
        f64::INFINITY
    }
}
