//! Estimation of the conditional distribution surfaces
//! `u_z(x) = P(Y(z) <= c | X = x)`.
//!
//! The doubly robust learner fits a propensity score `ê(x)` and an initial
//! outcome CDF `ν̂_z(x)`, forms the pseudo-outcome
//!
//! ```text
//! φ_1 = ν̂_1(X) + Z / ê(X) · (1{Y <= c} - ν̂_1(X))
//! φ_0 = ν̂_0(X) + (1 - Z) / (1 - ê(X)) · (1{Y <= c} - ν̂_0(X))
//! ```
//!
//! and regresses `φ` on `X` through a logistic link by least squares.

mod data;
mod regress;

use std::fmt;
use std::sync::Arc;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

pub use data::Dataset;
pub use regress::{RegressorKind, RegressorSpec, Target};

use crate::error::{GpnError, Result};
use crate::rng;
use regress::Fitted;

pub const DEFAULT_PROPENSITY_EPS: f64 = 0.01;
pub const DEFAULT_MARGINAL_DELTA: f64 = 1e-4;

/// Which quantity a surface estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceRole {
    Propensity,
    OutcomeCdf,
    DrMarginal,
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurfaceMeta {
    pub role: SurfaceRole,
    pub arm: Option<u8>,
    pub threshold: Option<f64>,
    pub kind: Option<RegressorKind>,
    /// Outputs are clipped to `[lower, upper]`.
    pub lower: f64,
    pub upper: f64,
    /// The training indicators were all equal, so the fit is a constant.
    pub constant_target: bool,
}

type OracleFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Model {
    Fitted(Fitted),
    Oracle(OracleFn),
}

/// A fitted (or analytic) map `x ↦ probability`.
#[derive(Clone)]
pub struct MarginalSurface {
    model: Model,
    meta: SurfaceMeta,
}

impl fmt::Debug for MarginalSurface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MarginalSurface").field("meta", &self.meta).finish_non_exhaustive()
    }
}

impl MarginalSurface {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match &self.model {
            Model::Oracle(f) => f(x),
            Model::Fitted(m) => m.predict(x).clamp(self.meta.lower, self.meta.upper),
        }
    }

    /// Evaluate at every row of `data`.
    pub fn eval_dataset(&self, data: &Dataset) -> Vec<f64> {
        (0..data.n()).map(|i| self.eval(data.x_row(i))).collect()
    }

    pub fn meta(&self) -> &SurfaceMeta {
        &self.meta
    }

    /// Intercept and slopes on the covariate scale for degree-one logistic
    /// fits.
    pub fn linear_coefficients(&self) -> Option<Vec<f64>> {
        match &self.model {
            Model::Fitted(m) => m.linear_coefficients(),
            Model::Oracle(_) => None,
        }
    }

    fn fitted(model: Fitted, meta: SurfaceMeta) -> Self {
        Self { model: Model::Fitted(model), meta }
    }
}

/// Wrap an analytic function as a surface; values pass through unchanged.
pub fn oracle_surface<F>(f: F) -> MarginalSurface
where
    F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
{
    MarginalSurface {
        model: Model::Oracle(Arc::new(f)),
        meta: SurfaceMeta {
            role: SurfaceRole::Oracle,
            arm: None,
            threshold: None,
            kind: None,
            lower: 0.0,
            upper: 1.0,
            constant_target: false,
        },
    }
}

/// `P(Z = 1 | X = x)`, clipped to `[eps, 1 - eps]`.
pub fn fit_propensity(data: &Dataset, kind: &RegressorKind, eps: f64) -> Result<MarginalSurface> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(GpnError::Domain(format!("propensity clip {eps} must lie in (0, 0.5)")));
    }
    data.require_both_arms()?;
    let z: Vec<f64> = data.z().iter().map(|&t| f64::from(t)).collect();
    let spec = RegressorSpec::new(kind.clone(), Target::BinaryProbability);
    let model = regress::fit(&spec, data.x_flat(), data.d(), &z)?;
    Ok(MarginalSurface::fitted(
        model,
        SurfaceMeta {
            role: SurfaceRole::Propensity,
            arm: None,
            threshold: None,
            kind: Some(kind.clone()),
            lower: eps,
            upper: 1.0 - eps,
            constant_target: false,
        },
    ))
}

fn check_arm(arm: u8) -> Result<()> {
    if arm > 1 {
        return Err(GpnError::Domain(format!("arm must be 0 or 1, got {arm}")));
    }
    Ok(())
}

/// Initial `ν̂_z(x) = P(Y <= c | Z = z, X = x)` from the arm-`z` rows.
pub fn fit_outcome_cdf(
    data: &Dataset,
    arm: u8,
    c: f64,
    kind: &RegressorKind,
) -> Result<MarginalSurface> {
    check_arm(arm)?;
    let idx = data.arm_indices(arm);
    if idx.is_empty() {
        return Err(GpnError::DegenerateTreatment(format!("arm {arm} has no units")));
    }
    let sub = data.subset(&idx)?;
    let ind: Vec<f64> = sub.y().iter().map(|&v| f64::from(v <= c)).collect();
    let constant_target = ind.iter().all(|&v| v == ind[0]);
    let spec = RegressorSpec::new(kind.clone(), Target::BinaryProbability);
    let model = regress::fit(&spec, sub.x_flat(), sub.d(), &ind)?;
    Ok(MarginalSurface::fitted(
        model,
        SurfaceMeta {
            role: SurfaceRole::OutcomeCdf,
            arm: Some(arm),
            threshold: Some(c),
            kind: Some(kind.clone()),
            lower: 0.0,
            upper: 1.0,
            constant_target,
        },
    ))
}

/// Doubly robust pseudo-outcomes, one per row.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoOutcomes(Vec<f64>);

impl PseudoOutcomes {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn mean(&self) -> f64 {
        self.0.iter().sum::<f64>() / self.0.len() as f64
    }
}

fn pseudo_value(nu: f64, e: f64, z: u8, y: f64, arm: u8, c: f64) -> f64 {
    let ind = f64::from(y <= c);
    let weight = match (arm, z) {
        (1, 1) => 1.0 / e,
        (0, 0) => 1.0 / (1.0 - e),
        _ => 0.0,
    };
    nu + weight * (ind - nu)
}

/// Pseudo-outcomes for arm `arm` at threshold `c`.
pub fn dr_pseudo(
    data: &Dataset,
    e: &MarginalSurface,
    nu: &MarginalSurface,
    arm: u8,
    c: f64,
) -> Result<PseudoOutcomes> {
    check_arm(arm)?;
    let vals = (0..data.n())
        .map(|i| {
            let x = data.x_row(i);
            let v = pseudo_value(nu.eval(x), e.eval(x), data.z()[i], data.y()[i], arm, c);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(GpnError::Fit(format!("row {i}: non-finite pseudo-outcome")))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PseudoOutcomes(vals))
}

/// Settings of the doubly robust learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrConfig {
    pub propensity: RegressorKind,
    pub outcome: RegressorKind,
    pub final_stage: RegressorKind,
    /// Propensity clip level.
    pub eps: f64,
    /// Final surfaces are clipped to `[delta, 1 - delta]`.
    pub delta: f64,
    /// Fit nuisances on one half and form pseudo-outcomes on the other.
    pub cross_fit: bool,
    /// Seed for the cross-fitting split.
    pub seed: u64,
}

impl Default for DrConfig {
    fn default() -> Self {
        Self {
            propensity: RegressorKind::default(),
            outcome: RegressorKind::default(),
            final_stage: RegressorKind::default(),
            eps: DEFAULT_PROPENSITY_EPS,
            delta: DEFAULT_MARGINAL_DELTA,
            cross_fit: false,
            seed: 0,
        }
    }
}

impl DrConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 0.5) {
            return Err(GpnError::Domain(format!("eps = {} must lie in (0, 0.5)", self.eps)));
        }
        if !(self.delta > 0.0 && self.delta < 0.5) {
            return Err(GpnError::Domain(format!("delta = {} must lie in (0, 0.5)", self.delta)));
        }
        self.propensity.validate()?;
        self.outcome.validate()?;
        self.final_stage.validate()
    }
}

/// Doubly robust estimate of `u_arm(x) = P(Y(arm) <= c | x)`.
pub fn fit_dr_marginal(data: &Dataset, arm: u8, c: f64, cfg: &DrConfig) -> Result<MarginalSurface> {
    cfg.validate()?;
    if cfg.cross_fit {
        let phi = cross_fitted_pseudo(data, arm, c, cfg)?;
        return final_stage(data, arm, c, &phi, cfg);
    }
    let e = fit_propensity(data, &cfg.propensity, cfg.eps)?;
    fit_dr_marginal_with(data, arm, c, &e, cfg)
}

/// As [`fit_dr_marginal`] with a given propensity surface (no cross-fitting).
pub fn fit_dr_marginal_with(
    data: &Dataset,
    arm: u8,
    c: f64,
    e: &MarginalSurface,
    cfg: &DrConfig,
) -> Result<MarginalSurface> {
    cfg.validate()?;
    let nu = fit_outcome_cdf(data, arm, c, &cfg.outcome)?;
    let phi = dr_pseudo(data, e, &nu, arm, c)?;
    final_stage(data, arm, c, &phi, cfg)
}

fn cross_fitted_pseudo(data: &Dataset, arm: u8, c: f64, cfg: &DrConfig) -> Result<PseudoOutcomes> {
    let n = data.n();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::stream(rng::derive_seed(cfg.seed, &[u64::from(arm)])));
    let half = n / 2;
    let folds = [&order[..half], &order[half..]];
    let mut phi = vec![0.0; n];
    for k in 0..2 {
        let (eval_idx, train_idx) = (folds[k], folds[1 - k]);
        if eval_idx.is_empty() {
            return Err(GpnError::EmptyInput("cross-fitting needs at least two rows"));
        }
        let train = data.subset(train_idx)?;
        let e = fit_propensity(&train, &cfg.propensity, cfg.eps)?;
        let nu = fit_outcome_cdf(&train, arm, c, &cfg.outcome)?;
        for &i in eval_idx {
            let x = data.x_row(i);
            phi[i] = pseudo_value(nu.eval(x), e.eval(x), data.z()[i], data.y()[i], arm, c);
        }
    }
    Ok(PseudoOutcomes(phi))
}

fn final_stage(
    data: &Dataset,
    arm: u8,
    c: f64,
    phi: &PseudoOutcomes,
    cfg: &DrConfig,
) -> Result<MarginalSurface> {
    let spec = RegressorSpec::new(cfg.final_stage.clone(), Target::BoundedReal);
    let model = regress::fit(&spec, data.x_flat(), data.d(), phi.values())?;
    Ok(MarginalSurface::fitted(
        model,
        SurfaceMeta {
            role: SurfaceRole::DrMarginal,
            arm: Some(arm),
            threshold: Some(c),
            kind: Some(cfg.final_stage.clone()),
            lower: cfg.delta,
            upper: 1.0 - cfg.delta,
            constant_target: false,
        },
    ))
}
