//! Subset-Sum to DMDGP_K reduction.
//!
//! Given positive integers `a_1 … a_N`, build an instance on `KN + 1`
//! vertices whose feasible embeddings are orthogonal walks: vertex `i + 1`
//! (for `i = 0 … KN-1`) steps by `±a_{⌊i/K⌋+1}` along axis `i mod K`, and the
//! walk must close up (`d_{1,KN+1} = 0`). Each coordinate axis therefore
//! carries an independent signed sum `Σ s_ℓ a_ℓ` that has to vanish.

use std::fmt;
use std::str::FromStr;

use super::{DgpInstance, InstanceError};
use crate::geometry::Point;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsetSumInstance {
    values: Vec<u64>,
}

impl SubsetSumInstance {
    pub fn new(values: Vec<u64>) -> Result<Self, InstanceError> {
        if values.is_empty() {
            return Err(InstanceError::InvalidSubsetSum("need at least one value".into()));
        }
        if values.contains(&0) {
            return Err(InstanceError::InvalidSubsetSum("values must be positive".into()));
        }
        Ok(SubsetSumInstance { values })
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl FromStr for SubsetSumInstance {
    type Err = InstanceError;

    /// Comma-separated positive integers, e.g. `"3,1,2"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let values = s
            .split(',')
            .map(|t| {
                let t = t.trim();
                t.parse::<u64>()
                    .map_err(|_| InstanceError::InvalidSubsetSum(format!("not a nonnegative integer: {t:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        SubsetSumInstance::new(values)
    }
}

impl fmt::Display for SubsetSumInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.values.iter().map(u64::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

/// Builds the reduced instance for `ss` in dimension `k >= 2`.
pub fn reduce_subset_sum(ss: &SubsetSumInstance, k: usize) -> Result<DgpInstance, InstanceError> {
    if k < 2 {
        return Err(InstanceError::InvalidSubsetSum(format!("dimension K = {k} is not covered; need K >= 2")));
    }
    if ss.len() < 2 {
        return Err(InstanceError::InvalidSubsetSum("need N >= 2 values".into()));
    }
    let a: Vec<f64> = ss.values().iter().map(|&x| x as f64).collect();
    let steps = k * a.len();
    let n = steps + 1;
    // step i (0-based, from vertex i+1 to i+2) has length a[i / K]
    let step = |i: usize| a[i / k];

    let mut initial = vec![Point::origin(k)];
    for j in 0..k - 1 {
        let mut c = initial[j].clone().into_coords();
        c[j] += a[0];
        initial.push(Point::new(c));
    }
    let mut inst = DgpInstance::new(n, k, initial)?;
    for i in 0..steps {
        inst.add_edge(i + 1, i + 2, step(i))?;
    }
    for span in 2..=k {
        for i in 0..=steps - span {
            let sq: f64 = (i..i + span).map(|s| step(s) * step(s)).sum();
            inst.add_edge(i + 1, i + 1 + span, sq.sqrt())?;
        }
    }
    inst.add_edge(1, n, 0.0)?;
    Ok(inst)
}
