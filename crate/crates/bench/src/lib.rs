//! Shared fixtures for the benchmarks.

use gpn_core::dgp::{generate, DgpCase, Scenario};
use gpn_core::{Dataset, MarginalPoint};

/// A simulated sample from `case`.
pub fn sample(case: DgpCase, n: usize, seed: u64) -> Dataset {
    generate(&Scenario::standard(case), n, seed).expect("valid design").data
}

/// `k × k` marginal points on an even grid inside the unit square.
pub fn point_grid(k: usize) -> Vec<MarginalPoint> {
    let step = 1.0 / (k + 1) as f64;
    (1..=k)
        .flat_map(|i| (1..=k).map(move |j| (i as f64 * step, j as f64 * step)))
        .map(|(u1, u0)| MarginalPoint::new(u1, u0, Some(u0)).expect("interior point"))
        .collect()
}
