//! Bounds on the conditional GPN from the identified margins.
//!
//! With `u1 = P(Y(1) <= c1 | x)`, `u0 = P(Y(0) <= c0 | x)` and a copula `C`
//! linking `(Y(1), Y(0))`,
//!
//! ```text
//! GPN(x) = (u0 - C(u1, u0)) / (1 - u1)
//! ```
//!
//! Every bound below is this expression with `C` replaced by an extremal
//! value: the Fréchet–Hoeffding copulas (no restriction), the endpoints of a
//! parameter interval (copula restriction), or the monotonicity cap
//! `P(Y(0) <= c1 | x)` on the joint mass.
//!
//! Finite-sample margins can violate the population inequalities slightly,
//! so outputs are clamped into `[0, 1]` with `lower <= upper` and the
//! adjustment is reported through [`Notes`] instead of failing.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::copula::{Copula, CopulaFamily, DependenceRange};
use crate::error::{domain, GpnError, Result};

/// `u1` values above `1 - DENOMINATOR_GUARD` are clamped before dividing.
pub const DENOMINATOR_GUARD: f64 = 1e-6;

/// Allowed upward drift between consecutive points of a sensitivity curve.
const CURVE_SLACK: f64 = 1e-9;

/// Outcome thresholds; `c1 >= c0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub c0: f64,
    pub c1: f64,
}

impl Thresholds {
    pub fn new(c0: f64, c1: f64) -> Result<Self> {
        if !c0.is_finite() || !c1.is_finite() {
            return Err(domain("thresholds must be finite"));
        }
        if c1 < c0 {
            return Err(domain(format!("threshold c1 = {c1} is below c0 = {c0}")));
        }
        Ok(Self { c0, c1 })
    }

    /// `c0 == c1`, where monotonicity point-identifies the GPN.
    pub fn coincide(&self) -> bool {
        self.c0 == self.c1
    }
}

/// Adjustments applied while computing a value.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Notes {
    pub denominator_clamped: bool,
    pub clamped: bool,
    pub monotonicity_violation: bool,
    pub threshold_order_violation: bool,
}

impl Notes {
    pub fn merge(self, other: Notes) -> Notes {
        Notes {
            denominator_clamped: self.denominator_clamped || other.denominator_clamped,
            clamped: self.clamped || other.clamped,
            monotonicity_violation: self.monotonicity_violation || other.monotonicity_violation,
            threshold_order_violation: self.threshold_order_violation
                || other.threshold_order_violation,
        }
    }

    pub fn is_clean(&self) -> bool {
        *self == Notes::default()
    }
}

/// A value together with the adjustments made to produce it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Checked<T> {
    pub value: T,
    pub notes: Notes,
}

impl<T> Checked<T> {
    fn new(value: T, notes: Notes) -> Self {
        Self { value, notes }
    }
}

/// Tallies of [`Notes`] over many units.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct DiagnosticCounts {
    pub units: usize,
    pub denominator_clamped: usize,
    pub clamped: usize,
    pub monotonicity_violations: usize,
    pub threshold_order_violations: usize,
}

impl DiagnosticCounts {
    pub fn record(&mut self, notes: &Notes) {
        self.units += 1;
        self.denominator_clamped += notes.denominator_clamped as usize;
        self.clamped += notes.clamped as usize;
        self.monotonicity_violations += notes.monotonicity_violation as usize;
        self.threshold_order_violations += notes.threshold_order_violation as usize;
    }
}

/// The identified margins at one covariate value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginalPoint {
    u1: f64,
    u0: f64,
    u0_at_c1: Option<f64>,
    notes: Notes,
}

impl MarginalPoint {
    /// `u1 = P(Y(1) <= c1 | x)`, `u0 = P(Y(0) <= c0 | x)` and optionally
    /// `u0_at_c1 = P(Y(0) <= c1 | x)`.
    ///
    /// `u1 == 1` is rejected; values within [`DENOMINATOR_GUARD`] of 1 are
    /// clamped and noted.
    pub fn new(u1: f64, u0: f64, u0_at_c1: Option<f64>) -> Result<Self> {
        if u1 == 1.0 {
            return Err(GpnError::DegenerateDenominator);
        }
        Self::guarded(u1, u0, u0_at_c1)
    }

    /// Like [`MarginalPoint::new`] but also clamps `u1 == 1`; used for
    /// estimated or analytic surfaces evaluated over many units.
    pub fn guarded(u1: f64, u0: f64, u0_at_c1: Option<f64>) -> Result<Self> {
        check_prob("u1", u1)?;
        check_prob("u0", u0)?;
        if let Some(p) = u0_at_c1 {
            check_prob("u0_at_c1", p)?;
        }
        let mut notes = Notes::default();
        let mut u1 = u1;
        if u1 > 1.0 - DENOMINATOR_GUARD {
            u1 = 1.0 - DENOMINATOR_GUARD;
            notes.denominator_clamped = true;
        }
        if matches!(u0_at_c1, Some(p) if p < u0) {
            notes.threshold_order_violation = true;
        }
        Ok(Self { u1, u0, u0_at_c1, notes })
    }

    pub fn u1(&self) -> f64 {
        self.u1
    }

    pub fn u0(&self) -> f64 {
        self.u0
    }

    pub fn u0_at_c1(&self) -> Option<f64> {
        self.u0_at_c1
    }

    pub fn notes(&self) -> Notes {
        self.notes
    }

    /// `P(Y(1) >= c1 | x)`, the GPN denominator.
    pub fn treated_survival(&self) -> f64 {
        1.0 - self.u1
    }

    /// GPN implied by a value of the joint `P(Y(1) <= c1, Y(0) <= c0 | x)`.
    fn gpn_from_joint(&self, joint: f64) -> f64 {
        (self.u0 - joint) / (1.0 - self.u1)
    }
}

fn check_prob(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(domain(format!("{name} = {p} is not a probability")))
    }
}

fn clamp_unit(x: f64) -> (f64, bool) {
    let c = x.clamp(0.0, 1.0);
    (c, c != x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "FH")]
    Fh,
    #[serde(rename = "Mono")]
    Mono,
    #[serde(rename = "Copula")]
    Copula,
    #[serde(rename = "Point")]
    Point,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Fh => "FH",
            Method::Mono => "Mono",
            Method::Copula => "Copula",
            Method::Point => "Point",
        }
    }
}

/// `[lower, upper]` with `0 <= lower <= upper <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundInterval {
    pub lower: f64,
    pub upper: f64,
    pub method: Method,
}

impl BoundInterval {
    pub fn new(lower: f64, upper: f64, method: Method) -> Result<Self> {
        if !(0.0 <= lower && lower <= upper && upper <= 1.0) {
            return Err(domain(format!("invalid interval [{lower}, {upper}]")));
        }
        Ok(Self { lower, upper, method })
    }

    /// Clamp raw endpoints into a valid interval; an upper endpoint below the
    /// lower one is raised to it.
    fn clamped(lower: f64, upper: f64, method: Method) -> Checked<Self> {
        let (lower, a) = clamp_unit(lower);
        let (mut upper, b) = clamp_unit(upper);
        let mut notes = Notes { clamped: a || b, ..Notes::default() };
        if upper < lower {
            upper = lower;
            notes.clamped = true;
        }
        Checked::new(Self { lower, upper, method }, notes)
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        self.lower - tol <= x && x <= self.upper + tol
    }
}

/// Sharp bounds under ignorability alone:
/// `[max(0, (u0 - u1)/(1 - u1)), min(1, u0/(1 - u1))]`.
pub fn fh_bounds(m: &MarginalPoint) -> Checked<BoundInterval> {
    let lower = m.gpn_from_joint(m.u1.min(m.u0));
    let upper = m.gpn_from_joint((m.u1 + m.u0 - 1.0).max(0.0));
    let mut out = BoundInterval::clamped(lower, upper, Method::Fh);
    out.notes = out.notes.merge(m.notes);
    out
}

/// Sharp bounds when additionally `Y(1) >= Y(0)` almost surely.
///
/// The upper bound drops to `(u0_at_c1 - u1)/(1 - u1)` when smaller: mass
/// with `Y(0) >= c1` must sit in `{Y(1) >= c1, Y(0) >= c0}`. When the
/// margins contradict monotonicity (`u0_at_c1 < u1`) the violation is noted
/// and the upper bound falls back to the lower one.
pub fn mono_bounds(m: &MarginalPoint) -> Result<Checked<BoundInterval>> {
    let u0_at_c1 = m.u0_at_c1.ok_or(GpnError::MissingInput("u0_at_c1"))?;
    let fh = fh_bounds(m);
    let cap = (u0_at_c1 - m.u1) / (1.0 - m.u1);
    let mut notes = fh.notes;
    if u0_at_c1 < m.u1 {
        notes.monotonicity_violation = true;
    }
    let out = BoundInterval::clamped(fh.value.lower, fh.value.upper.min(cap), Method::Mono);
    Ok(Checked::new(out.value, notes.merge(out.notes)))
}

/// Point-identified GPN when `c0 = c1 = c` under monotonicity:
/// `1 - P(Y(0) >= c | x) / P(Y(1) >= c | x)`.
pub fn point_identify_mono(u1_at_c: f64, u0_at_c: f64) -> Result<Checked<f64>> {
    let m = MarginalPoint::new(u1_at_c, u0_at_c, Some(u0_at_c))?;
    // same expression as the monotonicity cap so that the two agree exactly
    let raw = (m.u0 - m.u1) / (1.0 - m.u1);
    let (value, clamped) = clamp_unit(raw);
    let mut notes = m.notes;
    notes.clamped = clamped;
    notes.monotonicity_violation = u0_at_c < m.u1;
    Ok(Checked::new(value, notes))
}

/// GPN under a fully specified copula.
pub fn copula_gpn(m: &MarginalPoint, copula: &Copula) -> Result<Checked<f64>> {
    let joint = copula.cdf(m.u1, m.u0)?;
    let (value, clamped) = clamp_unit(m.gpn_from_joint(joint));
    let mut notes = m.notes;
    notes.clamped = clamped;
    Ok(Checked::new(value, notes))
}

/// A working copula family and the admissible range of its parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CopulaSpec {
    pub family: CopulaFamily,
    pub range: DependenceRange,
}

impl CopulaSpec {
    pub fn new(family: CopulaFamily, min: f64, max: f64) -> Result<Self> {
        Ok(Self { family, range: DependenceRange::new(family, min, max)? })
    }

    pub fn gaussian(min: f64, max: f64) -> Result<Self> {
        Self::new(CopulaFamily::Gaussian, min, max)
    }
}

/// Sharp bounds when the copula parameter is known to lie in a range.
///
/// The lower bound uses the largest joint mass (parameter at the top of the
/// range), the upper bound the smallest.
pub fn copula_gpn_bounds(m: &MarginalPoint, spec: &CopulaSpec) -> Result<Checked<BoundInterval>> {
    let (c_min, c_max) =
        crate::copula::copula_extremes(spec.family, spec.range, m.u1, m.u0)?;
    let out = BoundInterval::clamped(
        m.gpn_from_joint(c_max),
        m.gpn_from_joint(c_min),
        Method::Copula,
    );
    Ok(Checked::new(out.value, out.notes.merge(m.notes)))
}

/// Weights expressing an interval GPN through threshold GPNs; `w1 - w2 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalWeights {
    pub w1: f64,
    pub w2: f64,
}

impl IntervalWeights {
    /// From `P(Y(1) >= lower c1 | Z=1)` and `P(Y(1) >= upper c1 | Z=1)`.
    pub fn new(surv_lo1: f64, surv_hi1: f64) -> Result<Self> {
        check_prob("surv_lo1", surv_lo1)?;
        check_prob("surv_hi1", surv_hi1)?;
        if surv_lo1 <= surv_hi1 {
            return Err(GpnError::DegenerateInterval(format!(
                "survival probabilities must be strictly ordered, got {surv_lo1} <= {surv_hi1}"
            )));
        }
        let w1 = 1.0 + surv_hi1 / (surv_lo1 - surv_hi1);
        // w1 >= 1, so w1 - 1 is exact and the difference below is exactly 1
        Ok(Self { w1, w2: w1 - 1.0 })
    }
}

/// Inputs for [`interval_gpn`]: `GPN(c0, c1)` at the interval endpoints and
/// the treated-arm survival at both `c1` endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalGpnInputs {
    pub gpn_lo0_lo1: f64,
    pub gpn_hi0_lo1: f64,
    pub gpn_lo0_hi1: f64,
    pub gpn_hi0_hi1: f64,
    pub surv_lo1: f64,
    pub surv_hi1: f64,
}

/// `P(lo0 <= Y(0) < hi0 | Z = 1, lo1 <= Y(1) < hi1)` as a linear combination
/// of threshold GPNs:
/// `w1 [GPN(hi0, lo1) - GPN(lo0, lo1)] - w2 [GPN(hi0, hi1) - GPN(lo0, hi1)]`.
pub fn interval_gpn(inputs: &IntervalGpnInputs) -> Result<(Checked<f64>, IntervalWeights)> {
    let w = IntervalWeights::new(inputs.surv_lo1, inputs.surv_hi1)?;
    let raw = w.w1 * (inputs.gpn_hi0_lo1 - inputs.gpn_lo0_lo1)
        - w.w2 * (inputs.gpn_hi0_hi1 - inputs.gpn_lo0_hi1);
    let (value, clamped) = clamp_unit(raw);
    Ok((Checked::new(value, Notes { clamped, ..Notes::default() }), w))
}

/// How per-unit quantities are averaged into a population summary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    /// Plain mean over units, `n⁻¹ Σ GPN(X_i)`.
    #[default]
    UnitMean,
    /// Weighted by `P(Y(1) >= c1 | X_i)`; bounds the population
    /// `P(Y(0) < c0 | Y(1) >= c1)`.
    SurvivalWeighted,
}

/// Componentwise mean of per-unit intervals sharing one method.
pub fn aggregate(per_unit: &[BoundInterval]) -> Result<BoundInterval> {
    let first = per_unit.first().ok_or(GpnError::EmptyInput("no intervals to aggregate"))?;
    if per_unit.iter().any(|b| b.method != first.method) {
        return Err(GpnError::MixedMethods);
    }
    let n = per_unit.len() as f64;
    let (lo, hi) = per_unit
        .iter()
        .fold((0.0, 0.0), |(l, u), b| (l + b.lower, u + b.upper));
    let lower = (lo / n).clamp(0.0, 1.0);
    let upper = (hi / n).clamp(lower, 1.0);
    Ok(BoundInterval { lower, upper, method: first.method })
}

/// Weighted mean of per-unit intervals (weights must be nonnegative with a
/// positive sum).
pub fn aggregate_weighted(per_unit: &[BoundInterval], weights: &[f64]) -> Result<BoundInterval> {
    let first = per_unit.first().ok_or(GpnError::EmptyInput("no intervals to aggregate"))?;
    if weights.len() != per_unit.len() {
        return Err(GpnError::LengthMismatch { expected: per_unit.len(), got: weights.len() });
    }
    if per_unit.iter().any(|b| b.method != first.method) {
        return Err(GpnError::MixedMethods);
    }
    let total: f64 = weights.iter().sum();
    if weights.iter().any(|w| !(*w >= 0.0)) || total <= 0.0 {
        return Err(domain("aggregation weights must be nonnegative with positive sum"));
    }
    let (lo, hi) = per_unit
        .iter()
        .zip(weights)
        .fold((0.0, 0.0), |(l, u), (b, w)| (l + w * b.lower, u + w * b.upper));
    let lower = (lo / total).clamp(0.0, 1.0);
    let upper = (hi / total).clamp(lower, 1.0);
    Ok(BoundInterval { lower, upper, method: first.method })
}

/// Averaged GPN as a function of the copula parameter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityCurve {
    points: Vec<(f64, f64)>,
}

impl SensitivityCurve {
    /// Points must have strictly increasing parameters and values in `[0, 1]`.
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(GpnError::EmptyInput("sensitivity grid is empty"));
        }
        if points.windows(2).any(|w| !(w[0].0 < w[1].0)) {
            return Err(domain("sensitivity grid must be strictly increasing"));
        }
        if points.iter().any(|p| !(0.0..=1.0).contains(&p.1)) {
            return Err(domain("sensitivity values must be probabilities"));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn value_at(&self, rho: f64) -> Option<f64> {
        self.points.iter().find(|p| p.0 == rho).map(|p| p.1)
    }
}

/// `n` equally spaced values covering `[lo, hi]` (just `lo` when `n == 1`).
pub fn rho_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
            .collect(),
    }
}

/// Averaged copula GPN over `units` at each parameter in `grid`.
pub fn sensitivity_curve(
    units: &[MarginalPoint],
    family: CopulaFamily,
    grid: &[f64],
    aggregation: Aggregation,
) -> Result<SensitivityCurve> {
    if grid.is_empty() {
        return Err(GpnError::EmptyInput("sensitivity grid is empty"));
    }
    if units.is_empty() {
        return Err(GpnError::EmptyInput("no units for sensitivity curve"));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(domain("sensitivity grid must be strictly increasing"));
    }
    let points = grid
        .par_iter()
        .map(|&rho| {
            let copula = Copula::new(family, rho)?;
            let (mut num, mut den) = (0.0, 0.0);
            for m in units {
                let g = copula_gpn(m, &copula)?.value;
                let w = match aggregation {
                    Aggregation::UnitMean => 1.0,
                    Aggregation::SurvivalWeighted => m.treated_survival(),
                };
                num += w * g;
                den += w;
            }
            Ok((rho, (num / den).clamp(0.0, 1.0)))
        })
        .collect::<Result<Vec<_>>>()?;
    SensitivityCurve::new(points)
}

/// Parameter at which a nonincreasing curve crosses `level`, by linear
/// interpolation between the bracketing grid points.
pub fn find_rho_crossing(curve: &SensitivityCurve, level: f64) -> Result<Option<f64>> {
    let pts = curve.points();
    if let Some(w) = pts.windows(2).find(|w| w[1].1 > w[0].1 + CURVE_SLACK) {
        return Err(GpnError::InconsistentCurve(format!(
            "curve increases from {} at {} to {} at {}",
            w[0].1, w[0].0, w[1].1, w[1].0
        )));
    }
    if let Some(p) = pts.iter().find(|p| p.1 == level) {
        return Ok(Some(p.0));
    }
    for w in pts.windows(2) {
        let ((r0, v0), (r1, v1)) = (w[0], w[1]);
        if v0 > level && level > v1 {
            return Ok(Some(r0 + (v0 - level) / (v0 - v1) * (r1 - r0)));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mp(u1: f64, u0: f64) -> MarginalPoint {
        MarginalPoint::new(u1, u0, None).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn thresholds_validation() {
        assert!(Thresholds::new(10.0, 12.0).is_ok());
        assert!(Thresholds::new(10.0, 10.0).unwrap().coincide());
        assert!(Thresholds::new(12.0, 10.0).is_err());
        assert!(Thresholds::new(f64::NAN, 10.0).is_err());
    }

    #[test]
    fn marginal_point_validation() {
        assert_eq!(MarginalPoint::new(1.0, 0.5, None), Err(GpnError::DegenerateDenominator));
        assert!(MarginalPoint::new(0.5, 1.2, None).is_err());
        let g = MarginalPoint::guarded(1.0, 0.5, None).unwrap();
        assert!(g.notes().denominator_clamped);
        assert_eq!(g.u1(), 1.0 - DENOMINATOR_GUARD);
        let t = MarginalPoint::new(0.5, 0.6, Some(0.4)).unwrap();
        assert!(t.notes().threshold_order_violation);
    }

    #[test]
    fn fh_examples() {
        let b = fh_bounds(&mp(0.6, 0.7)).value;
        assert!(close(b.lower, 0.25, 1e-15) && close(b.upper, 1.0, 1e-15));
        let b = fh_bounds(&mp(0.3, 0.0)).value;
        assert_eq!((b.lower, b.upper), (0.0, 0.0));
        let b = fh_bounds(&mp(0.6, 0.3)).value;
        assert!(close(b.lower, 0.0, 1e-15) && close(b.upper, 0.75, 1e-15));
        assert_eq!(b.method, Method::Fh);
    }

    #[test]
    fn mono_examples() {
        let m = MarginalPoint::new(0.6, 0.3, Some(0.9)).unwrap();
        let b = mono_bounds(&m).unwrap().value;
        assert!(close(b.lower, 0.0, 1e-15) && close(b.upper, 0.75, 1e-15));

        let m = MarginalPoint::new(0.6, 0.3, Some(1.0)).unwrap();
        let b = mono_bounds(&m).unwrap().value;
        assert!(close(b.upper, fh_bounds(&m).value.upper, 1e-15));

        let m = MarginalPoint::new(0.6, 0.3, Some(0.7)).unwrap();
        let b = mono_bounds(&m).unwrap().value;
        assert!(close(b.upper, 0.25, 1e-15));

        assert_eq!(
            mono_bounds(&mp(0.6, 0.3)).unwrap_err(),
            GpnError::MissingInput("u0_at_c1")
        );
    }

    #[test]
    fn mono_violation_falls_back_to_lower() {
        let m = MarginalPoint::new(0.6, 0.5, Some(0.55)).unwrap();
        let out = mono_bounds(&m).unwrap();
        assert!(out.notes.monotonicity_violation);
        assert_eq!(out.value.upper, out.value.lower);
    }

    #[test]
    fn point_identification_examples() {
        assert_eq!(point_identify_mono(0.4, 0.4).unwrap().value, 0.0);
        assert_eq!(point_identify_mono(0.4, 1.0).unwrap().value, 1.0);
        assert!(close(point_identify_mono(0.4, 0.7).unwrap().value, 0.5, 1e-15));
        assert_eq!(point_identify_mono(1.0, 0.7).unwrap_err(), GpnError::DegenerateDenominator);
        let v = point_identify_mono(0.7, 0.4).unwrap();
        assert_eq!(v.value, 0.0);
        assert!(v.notes.clamped && v.notes.monotonicity_violation);
    }

    #[test]
    fn copula_gpn_examples() {
        let m = mp(0.6, 0.7);
        assert!(close(copula_gpn(&m, &Copula::independence()).unwrap().value, 0.7, 1e-12));
        assert!(close(copula_gpn(&m, &Copula::comonotone()).unwrap().value, 0.25, 1e-12));
        let g = Copula::gaussian(0.5).unwrap();
        assert!(close(copula_gpn(&mp(0.5, 0.5), &g).unwrap().value, 1.0 / 3.0, 1e-12));
    }

    #[test]
    fn copula_bounds_examples() {
        let m = mp(0.6, 0.7);
        let full = copula_gpn_bounds(&m, &CopulaSpec::gaussian(-1.0, 1.0).unwrap()).unwrap().value;
        assert!(close(full.lower, 0.25, 1e-12) && close(full.upper, 1.0, 1e-12));
        let pos = copula_gpn_bounds(&m, &CopulaSpec::gaussian(0.0, 1.0).unwrap()).unwrap().value;
        assert!(close(pos.lower, 0.25, 1e-12) && close(pos.upper, 0.7, 1e-12));
        let b = copula_gpn_bounds(&mp(0.5, 0.5), &CopulaSpec::gaussian(0.2, 0.7).unwrap())
            .unwrap()
            .value;
        assert!(close(b.lower, 0.253_183_311_106_635, 1e-12), "{b:?}");
        assert!(close(b.upper, 0.435_905_783_151_025, 1e-12), "{b:?}");
    }

    #[test]
    fn interval_gpn_collapses_to_threshold_gpn() {
        // lower c0 = -inf (GPN 0), upper c1 = +inf (survival 0)
        let inp = IntervalGpnInputs {
            gpn_lo0_lo1: 0.0,
            gpn_hi0_lo1: 0.42,
            gpn_lo0_hi1: 0.0,
            gpn_hi0_hi1: 0.9,
            surv_lo1: 0.3,
            surv_hi1: 0.0,
        };
        let (v, w) = interval_gpn(&inp).unwrap();
        assert_eq!((w.w1, w.w2), (1.0, 0.0));
        assert!(close(v.value, 0.42, 1e-15));
    }

    #[test]
    fn interval_gpn_zero_width() {
        let inp = IntervalGpnInputs {
            gpn_lo0_lo1: 0.3,
            gpn_hi0_lo1: 0.3,
            gpn_lo0_hi1: 0.6,
            gpn_hi0_hi1: 0.6,
            surv_lo1: 0.5,
            surv_hi1: 0.2,
        };
        let (v, w) = interval_gpn(&inp).unwrap();
        assert_eq!(v.value, 0.0);
        assert_eq!(w.w1 - w.w2, 1.0);
        let bad = IntervalGpnInputs { surv_hi1: 0.5, ..inp };
        assert!(matches!(interval_gpn(&bad), Err(GpnError::DegenerateInterval(_))));
    }

    #[test]
    fn aggregate_examples() {
        let a = BoundInterval::new(0.1, 0.3, Method::Fh).unwrap();
        let b = BoundInterval::new(0.3, 0.5, Method::Fh).unwrap();
        let m = aggregate(&[a, b]).unwrap();
        assert!(close(m.lower, 0.2, 1e-15) && close(m.upper, 0.4, 1e-15));
        assert_eq!(aggregate(&[a]).unwrap(), a);
        assert!(aggregate(&[]).is_err());
        let c = BoundInterval::new(0.3, 0.5, Method::Mono).unwrap();
        assert_eq!(aggregate(&[a, c]), Err(GpnError::MixedMethods));
        let w = aggregate_weighted(&[a, b], &[3.0, 1.0]).unwrap();
        assert!(close(w.lower, 0.15, 1e-15) && close(w.upper, 0.35, 1e-15));
    }

    #[test]
    fn sensitivity_examples() {
        let units = [mp(0.6, 0.7)];
        let c = sensitivity_curve(&units, CopulaFamily::Gaussian, &[0.0], Aggregation::UnitMean)
            .unwrap();
        assert!(close(c.points()[0].1, 0.7, 1e-12));

        let units: Vec<_> = [(0.6, 0.7), (0.2, 0.1), (0.9, 0.95), (0.45, 0.3)]
            .iter()
            .map(|&(a, b)| mp(a, b))
            .collect();
        let curve = sensitivity_curve(
            &units,
            CopulaFamily::Gaussian,
            &[-1.0, 1.0],
            Aggregation::UnitMean,
        )
        .unwrap();
        let fh: Vec<_> = units.iter().map(|m| fh_bounds(m).value).collect();
        let avg = aggregate(&fh).unwrap();
        assert!(close(curve.points()[0].1, avg.upper, 1e-12));
        assert!(close(curve.points()[1].1, avg.lower, 1e-12));

        assert!(sensitivity_curve(&units, CopulaFamily::Gaussian, &[], Aggregation::UnitMean)
            .is_err());
        assert!(sensitivity_curve(
            &units,
            CopulaFamily::Gaussian,
            &[0.5, 0.2],
            Aggregation::UnitMean
        )
        .is_err());
    }

    #[test]
    fn crossing_examples() {
        let flat = SensitivityCurve::new(vec![(0.0, 0.5), (1.0, 0.5)]).unwrap();
        assert_eq!(find_rho_crossing(&flat, 0.1).unwrap(), None);
        let lin = SensitivityCurve::new(vec![(0.0, 0.2), (1.0, 0.0)]).unwrap();
        assert!(close(find_rho_crossing(&lin, 0.1).unwrap().unwrap(), 0.5, 1e-15));
        let up = SensitivityCurve::new(vec![(0.0, 0.1), (1.0, 0.3)]).unwrap();
        assert!(matches!(find_rho_crossing(&up, 0.2), Err(GpnError::InconsistentCurve(_))));
        let at = SensitivityCurve::new(vec![(0.0, 0.3), (0.5, 0.2), (1.0, 0.1)]).unwrap();
        assert_eq!(find_rho_crossing(&at, 0.2).unwrap(), Some(0.5));
    }

    #[test]
    fn grid_endpoints_exact() {
        let g = rho_grid(-1.0, 1.0, 101);
        assert_eq!(g.len(), 101);
        assert_eq!((g[0], g[50], g[100]), (-1.0, 0.0, 1.0));
        assert_eq!(rho_grid(0.3, 0.9, 1), vec![0.3]);
    }
}
