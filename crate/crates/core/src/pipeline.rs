//! End-to-end estimation: margins per unit, then every bound per unit, then
//! averages.

use serde::Serialize;

use crate::bounds::{
    aggregate, aggregate_weighted, copula_gpn_bounds, Aggregation, fh_bounds, mono_bounds, BoundInterval, CopulaSpec,
    DiagnosticCounts, MarginalPoint, Notes, Thresholds,
};
use crate::error::Result;
use crate::marginals::{fit_dr_marginal, fit_dr_marginal_with, fit_propensity, Dataset, DrConfig};

/// The four reported bound families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum BoundMethod {
    #[serde(rename = "FH")]
    Fh,
    #[serde(rename = "Monotonicity")]
    Mono,
    Conservative,
    Expert,
}

impl BoundMethod {
    pub const ALL: [BoundMethod; 4] =
        [BoundMethod::Fh, BoundMethod::Mono, BoundMethod::Conservative, BoundMethod::Expert];

    pub fn label(self) -> &'static str {
        match self {
            BoundMethod::Fh => "FH",
            BoundMethod::Mono => "Monotonicity",
            BoundMethod::Conservative => "Conservative",
            BoundMethod::Expert => "Expert",
        }
    }
}

/// Which bounds to compute besides Fréchet–Hoeffding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundsPlan {
    pub monotonicity: bool,
    pub conservative: Option<CopulaSpec>,
    pub expert: Option<CopulaSpec>,
}

/// Per-unit intervals for every requested method.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitBounds {
    pub fh: Vec<BoundInterval>,
    pub mono: Option<Vec<BoundInterval>>,
    pub conservative: Option<Vec<BoundInterval>>,
    pub expert: Option<Vec<BoundInterval>>,
    pub diagnostics: DiagnosticCounts,
}

impl UnitBounds {
    pub fn get(&self, method: BoundMethod) -> Option<&[BoundInterval]> {
        match method {
            BoundMethod::Fh => Some(&self.fh),
            BoundMethod::Mono => self.mono.as_deref(),
            BoundMethod::Conservative => self.conservative.as_deref(),
            BoundMethod::Expert => self.expert.as_deref(),
        }
    }

    /// Unit-averaged interval per computed method, in [`BoundMethod::ALL`]
    /// order.
    pub fn summary(&self) -> Result<Vec<(BoundMethod, BoundInterval)>> {
        BoundMethod::ALL
            .iter()
            .filter_map(|&m| self.get(m).map(|b| aggregate(b).map(|a| (m, a))))
            .collect()
    }

    /// Like [`UnitBounds::summary`] under an explicit aggregation; `points`
    /// supplies the survival weights and must be the units behind `self`.
    pub fn aggregate(
        &self,
        points: &[MarginalPoint],
        aggregation: Aggregation,
    ) -> Result<Vec<(BoundMethod, BoundInterval)>> {
        match aggregation {
            Aggregation::UnitMean => self.summary(),
            Aggregation::SurvivalWeighted => {
                let w: Vec<f64> = points.iter().map(MarginalPoint::treated_survival).collect();
                BoundMethod::ALL
                    .iter()
                    .filter_map(|&m| self.get(m).map(|b| aggregate_weighted(b, &w).map(|a| (m, a))))
                    .collect()
            }
        }
    }
}

/// All requested bounds at each unit.
pub fn unit_bounds(points: &[MarginalPoint], plan: &BoundsPlan) -> Result<UnitBounds> {
    let n = points.len();
    let mut fh = Vec::with_capacity(n);
    let mut mono = plan.monotonicity.then(|| Vec::with_capacity(n));
    let mut cons = plan.conservative.map(|_| Vec::with_capacity(n));
    let mut expert = plan.expert.map(|_| Vec::with_capacity(n));
    let mut diagnostics = DiagnosticCounts::default();
    for m in points {
        let b = fh_bounds(m);
        let mut notes: Notes = b.notes;
        fh.push(b.value);
        if let Some(v) = mono.as_mut() {
            let b = mono_bounds(m)?;
            notes = notes.merge(b.notes);
            v.push(b.value);
        }
        if let (Some(v), Some(spec)) = (cons.as_mut(), plan.conservative.as_ref()) {
            let b = copula_gpn_bounds(m, spec)?;
            notes = notes.merge(b.notes);
            v.push(b.value);
        }
        if let (Some(v), Some(spec)) = (expert.as_mut(), plan.expert.as_ref()) {
            let b = copula_gpn_bounds(m, spec)?;
            notes = notes.merge(b.notes);
            v.push(b.value);
        }
        diagnostics.record(&notes);
    }
    Ok(UnitBounds { fh, mono, conservative: cons, expert, diagnostics })
}

/// Doubly robust margins `u1(X_i)`, `u0(X_i)` and `P(Y(0) <= c1 | X_i)`
/// evaluated in-sample.
pub fn estimate_points(
    data: &Dataset,
    thresholds: &Thresholds,
    cfg: &DrConfig,
) -> Result<Vec<MarginalPoint>> {
    let (c0, c1) = (thresholds.c0, thresholds.c1);
    let (u1, u0, u0_c1) = if cfg.cross_fit {
        let u1 = fit_dr_marginal(data, 1, c1, cfg)?;
        let u0 = fit_dr_marginal(data, 0, c0, cfg)?;
        let u0_c1 = if thresholds.coincide() { u0.clone() } else { fit_dr_marginal(data, 0, c1, cfg)? };
        (u1, u0, u0_c1)
    } else {
        let e = fit_propensity(data, &cfg.propensity, cfg.eps)?;
        let u1 = fit_dr_marginal_with(data, 1, c1, &e, cfg)?;
        let u0 = fit_dr_marginal_with(data, 0, c0, &e, cfg)?;
        let u0_c1 = if thresholds.coincide() {
            u0.clone()
        } else {
            fit_dr_marginal_with(data, 0, c1, &e, cfg)?
        };
        (u1, u0, u0_c1)
    };
    (0..data.n())
        .map(|i| {
            let x = data.x_row(i);
            MarginalPoint::guarded(u1.eval(x), u0.eval(x), Some(u0_c1.eval(x)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan() -> BoundsPlan {
        BoundsPlan {
            monotonicity: true,
            conservative: Some(CopulaSpec::gaussian(0.0, 1.0).unwrap()),
            expert: Some(CopulaSpec::gaussian(0.2, 0.7).unwrap()),
        }
    }

    #[test]
    fn unit_bounds_nest() {
        let pts: Vec<_> = [(0.6, 0.3, 0.9), (0.2, 0.4, 0.5), (0.5, 0.5, 0.8)]
            .iter()
            .map(|&(a, b, c)| MarginalPoint::new(a, b, Some(c)).unwrap())
            .collect();
        let ub = unit_bounds(&pts, &plan()).unwrap();
        for i in 0..pts.len() {
            let fh = ub.fh[i];
            let e = ub.expert.as_ref().unwrap()[i];
            let c = ub.conservative.as_ref().unwrap()[i];
            assert!(fh.lower <= c.lower + 1e-12 && c.upper <= fh.upper + 1e-12);
            assert!(c.lower <= e.lower + 1e-12 && e.upper <= c.upper + 1e-12);
            assert!(ub.mono.as_ref().unwrap()[i].upper <= fh.upper);
        }
        let s = ub.summary().unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(s[0].0, BoundMethod::Fh);
        assert_eq!(ub.diagnostics.units, 3);
    }

    #[test]
    fn survival_weighted_summary() {
        let pts = [MarginalPoint::new(0.5, 0.5, Some(0.8)).unwrap(), MarginalPoint::new(0.9, 0.2, Some(0.95)).unwrap()];
        let ub = unit_bounds(&pts, &plan()).unwrap();
        let w = ub.aggregate(&pts, Aggregation::SurvivalWeighted).unwrap();
        let (a, b) = (ub.fh[0], ub.fh[1]);
        let expect = (0.5 * a.lower + 0.1 * b.lower) / 0.6;
        assert!((w[0].1.lower - expect).abs() < 1e-12);
        assert_eq!(ub.aggregate(&pts, Aggregation::UnitMean).unwrap(), ub.summary().unwrap());
    }

    #[test]
    fn optional_methods_skipped() {
        let pts = [MarginalPoint::new(0.6, 0.3, None).unwrap()];
        let p = BoundsPlan { monotonicity: false, conservative: None, expert: None };
        let ub = unit_bounds(&pts, &p).unwrap();
        assert!(ub.mono.is_none() && ub.get(BoundMethod::Expert).is_none());
        assert_eq!(ub.summary().unwrap().len(), 1);
    }
}
