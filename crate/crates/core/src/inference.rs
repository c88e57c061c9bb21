//! Subsampling standard deviations for averaged bounds.
//!
//! Each replicate draws `m < n` rows without replacement and reruns a
//! deterministic estimator. Replicates that fail are excluded and counted;
//! more than [`MAX_FAILURE_SHARE`] failures abort.

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GpnError, Result};
use crate::marginals::Dataset;
use crate::rng;
use crate::stats;

pub const MAX_FAILURE_SHARE: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubsamplePlan {
    /// Number of replicates.
    pub b: usize,
    /// Subsample size; `None` means `⌊n/2⌋`.
    pub m: Option<usize>,
    pub seed: u64,
    /// Multiply each sd by `sqrt(m/n)`.
    pub rescale: bool,
}

impl Default for SubsamplePlan {
    fn default() -> Self {
        Self { b: 100, m: None, seed: 0, rescale: false }
    }
}

impl SubsamplePlan {
    /// Resolved subsample size for `n` rows.
    pub fn size(&self, n: usize) -> Result<usize> {
        let m = self.m.unwrap_or(n / 2);
        if self.b < 2 {
            return Err(GpnError::Domain(format!("need at least 2 subsamples, got {}", self.b)));
        }
        if !(m > 1 && m < n) {
            return Err(GpnError::Domain(format!("subsample size {m} must satisfy 1 < m < {n}")));
        }
        Ok(m)
    }

    /// Row indices of every replicate, sorted within each replicate.
    pub fn indices(&self, n: usize) -> Result<Vec<Vec<usize>>> {
        let m = self.size(n)?;
        Ok((0..self.b)
            .map(|r| {
                let mut g = rng::stream(rng::derive_seed(self.seed, &[r as u64]));
                let mut idx = index::sample(&mut g, n, m).into_vec();
                idx.sort_unstable();
                idx
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsampleResult {
    /// One sd per estimator output.
    pub sd: Vec<f64>,
    pub failed: usize,
    pub total: usize,
    pub m: usize,
}

/// Standard deviation of each output of `estimator` across subsamples.
///
/// `estimator` receives the subsample and a replicate seed and must return
/// the same number of values for every replicate.
pub fn subsample_sd<F>(data: &Dataset, plan: &SubsamplePlan, estimator: F) -> Result<SubsampleResult>
where
    F: Fn(&Dataset, u64) -> Result<Vec<f64>> + Sync,
{
    let n = data.n();
    let sets = plan.indices(n)?;
    let m = sets[0].len();
    let outcomes: Vec<Option<Vec<f64>>> = sets
        .par_iter()
        .enumerate()
        .map(|(r, idx)| {
            let sub = data.subset(idx).ok()?;
            estimator(&sub, rng::derive_seed(plan.seed, &[r as u64, 1])).ok()
        })
        .collect();
    let total = outcomes.len();
    let ok: Vec<Vec<f64>> = outcomes.into_iter().flatten().collect();
    let failed = total - ok.len();
    if failed as f64 > MAX_FAILURE_SHARE * total as f64 || ok.len() < 2 {
        return Err(GpnError::SubsampleAborted { failed, total });
    }
    let k = ok[0].len();
    if let Some(bad) = ok.iter().find(|v| v.len() != k) {
        return Err(GpnError::LengthMismatch { expected: k, got: bad.len() });
    }
    let factor = if plan.rescale { (m as f64 / n as f64).sqrt() } else { 1.0 };
    let sd = (0..k)
        .map(|j| {
            let col: Vec<f64> = ok.iter().map(|v| v[j]).collect();
            let s = stats::sample_sd(&col).expect("at least two replicates");
            // identical replicate values give exactly zero
            if col.iter().all(|&v| v == col[0]) { 0.0 } else { s * factor }
        })
        .collect();
    Ok(SubsampleResult { sd, failed, total, m })
}
