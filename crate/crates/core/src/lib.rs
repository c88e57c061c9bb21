//! Partial identification of the general probability of necessity (GPN)
//! for continuous outcomes.
//!
//! For thresholds `c0 <= c1` the estimand is
//! `GPN = P(Y(0) < c0 | Z = 1, Y >= c1)`. Given the identified conditional
//! margins `u1(x) = P(Y(1) <= c1 | x)` and `u0(x) = P(Y(0) <= c0 | x)` the
//! crate provides
//!
//! * Fréchet–Hoeffding, monotonicity and copula-restricted bounds
//!   ([`bounds`]),
//! * the copula families and bivariate normal CDF behind them ([`copula`]),
//! * doubly robust estimation of the margins ([`marginals`]),
//! * the simulation designs used to benchmark the bounds ([`dgp`]),
//! * an end-to-end estimation pipeline ([`pipeline`]) and subsampling
//!   standard deviations ([`inference`]).

pub mod bounds;
pub mod copula;
pub mod dgp;
pub mod error;
pub mod inference;
pub mod marginals;
pub mod normal;
pub mod pipeline;
pub mod rng;
pub mod stats;

pub use bounds::{
    aggregate, copula_gpn, copula_gpn_bounds, fh_bounds, find_rho_crossing, interval_gpn,
    mono_bounds, point_identify_mono, sensitivity_curve, Aggregation, BoundInterval, Checked,
    CopulaSpec, IntervalGpnInputs, IntervalWeights, MarginalPoint, Method, Notes,
    SensitivityCurve, Thresholds,
};
pub use copula::{
    bvn_cdf, copula_cdf, copula_extremes, sample_copula_pair, tau_to_param, Copula, CopulaFamily,
    DependenceRange, KendallTau,
};
pub use error::{GpnError, Result};
pub use marginals::{Dataset, DrConfig, MarginalSurface, RegressorKind, RegressorSpec, Target};
pub use pipeline::BoundMethod;
