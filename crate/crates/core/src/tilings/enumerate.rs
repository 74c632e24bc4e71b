use rayon::prelude::*;
use serde::Serialize;

use super::partition::Partition;
use crate::error::{Error, Result};
use crate::qcalc::QParam;

/// Exhaustive enumeration is offered up to this depth.
pub const MAX_ENUM_N: usize = 6;

/// All μ ≺ λ.
pub fn interlacing_below(lambda: &Partition) -> Vec<Partition> {
    let l = lambda.parts();
    if l.len() < 2 {
        return vec![Partition::zero(0)];
    }
    let mut out = Vec::new();
    let mut cur = vec![0; l.len() - 1];
    fn rec(l: &[i64], i: usize, cur: &mut Vec<i64>, out: &mut Vec<Partition>) {
        if i == cur.len() {
            out.push(Partition::new(cur.clone()).expect("interlacing rows are partitions"));
            return;
        }
        for v in l[i + 1]..=l[i] {
            cur[i] = v;
            rec(l, i + 1, cur, out);
        }
    }
    rec(l, 0, &mut cur, &mut out);
    out
}

/// Σ_{n=1}^{N−1} |Λ^{(n)}|; the array lists rows Λ^{(1)}, …, Λ^{(N)}.
pub fn volume(array: &[Partition]) -> i64 {
    array[..array.len().saturating_sub(1)].iter().map(Partition::size).sum()
}

/// One interlacing array Λ^{(1)} ≺ … ≺ Λ^{(N)} = λ with its q^{−volume} probability.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TilingRecord {
    pub array: Vec<Partition>,
    pub volume: i64,
    pub prob: f64,
}

fn arrays_below(lambda: &Partition) -> Vec<Vec<Partition>> {
    if lambda.len() <= 1 {
        return vec![vec![lambda.clone()]];
    }
    interlacing_below(lambda)
        .into_iter()
        .flat_map(|mu| {
            arrays_below(&mu).into_iter().map(|mut a| {
                a.push(lambda.clone());
                a
            })
        })
        .collect()
}

/// Every array with top row λ, normalized by the enumerated partition function.
pub fn enumerate_arrays(lambda: &Partition, q: QParam) -> Result<Vec<TilingRecord>> {
    let n = lambda.len();
    if n == 0 || n > MAX_ENUM_N {
        return Err(Error::InvalidN {
            n,
            reason: format!("exhaustive enumeration needs 1 <= N <= {MAX_ENUM_N}"),
        });
    }
    let arrays: Vec<Vec<Partition>> = if n == 1 {
        vec![vec![lambda.clone()]]
    } else {
        interlacing_below(lambda)
            .par_iter()
            .flat_map_iter(|mu| {
                arrays_below(mu).into_iter().map(|mut a| {
                    a.push(lambda.clone());
                    a
                })
            })
            .collect()
    };
    let weights: Vec<f64> = arrays.iter().map(|a| (-(volume(a) as f64) * q.ln()).exp()).collect();
    let z: f64 = weights.iter().sum();
    Ok(arrays
        .into_iter()
        .zip(weights)
        .map(|(array, w)| TilingRecord {
            volume: volume(&array),
            array,
            prob: w / z,
        })
        .collect())
}

/// JSON list of {array, volume, prob}.
pub fn tilings_json(records: &[TilingRecord]) -> String {
    serde_json::to_string_pretty(records).expect("records serialize")
}
