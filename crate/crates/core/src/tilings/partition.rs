use serde::Serialize;

use crate::error::{Error, Result};

/// A weakly decreasing sequence of nonnegative integers of fixed length N;
/// trailing zeros are kept, since N matters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct Partition(Vec<i64>);

impl Partition {
    pub fn new(parts: Vec<i64>) -> Result<Self> {
        if parts.iter().any(|&p| p < 0) {
            return Err(Error::InvalidPartition(format!("negative part in {parts:?}")));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidPartition(format!("{parts:?} is not weakly decreasing")));
        }
        Ok(Partition(parts))
    }

    pub fn zero(n: usize) -> Self {
        Partition(vec![0; n])
    }

    pub fn parts(&self) -> &[i64] {
        &self.0
    }

    /// Number of parts N, zeros included.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// |λ|.
    pub fn size(&self) -> i64 {
        self.0.iter().sum()
    }

    /// The strictly decreasing sequence λ_i − i, i = 1..N.
    pub fn shifted(&self) -> Vec<i64> {
        self.0
            .iter()
            .enumerate()
            .map(|(i, &l)| l - i as i64 - 1)
            .collect()
    }
}
