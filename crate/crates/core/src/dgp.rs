//! Simulation designs with known ground truth.
//!
//! Covariates `X ~ N((0.5, -0.5, 0), Σ_X)`, treatment
//! `P(Z = 1 | X) = σ(-1.5 + 0.5 e^{X0} - 0.8 X1 + 0.4 X2)` and outcomes
//! `Y(z) = μ_z(X) + ε_z` with unit-variance errors. Three mean/error designs
//! are provided:
//!
//! * monotonic: `μ1 = μ0 + X0²`, shared noise `ε1 = ε0`;
//! * linear: linear means, bivariate normal errors with correlation 0.5;
//! * nonlinear: quadratic means, the same error law.
//!
//! The linear design can also be driven by Clayton or Gumbel errors matched
//! in Kendall's τ to study copula misspecification.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{copula_gpn, BoundInterval, CopulaSpec, MarginalPoint, Thresholds};
use crate::copula::{param_to_tau, sample_copula_pair, tau_to_param, Copula, CopulaFamily, KendallTau};
use crate::error::{GpnError, Result};
use crate::marginals::{Dataset, DrConfig};
use crate::normal;
use crate::pipeline::{estimate_points, unit_bounds, BoundMethod, BoundsPlan};
use crate::rng;
use crate::stats;

pub const DEFAULT_C0: f64 = 10.0;
pub const DEFAULT_C1: f64 = 12.0;
/// Draws of `X` behind population summaries.
pub const POPULATION_DRAWS: usize = 200_000;

/// Error correlation of the linear and nonlinear designs.
const DESIGN_RHO: f64 = 0.5;

const TAG_COVARIATES: u64 = 1;
const TAG_ERRORS: u64 = 2;
const TAG_TABLE1: u64 = 11;
const TAG_TABLE2: u64 = 12;
const TAG_POPULATION: u64 = 13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum DgpCase {
    Monotonic,
    Linear,
    Nonlinear,
}

impl DgpCase {
    pub const ALL: [DgpCase; 3] = [DgpCase::Monotonic, DgpCase::Linear, DgpCase::Nonlinear];

    /// Short label: `a`, `b` or `c`.
    pub fn label(self) -> &'static str {
        match self {
            DgpCase::Monotonic => "a",
            DgpCase::Linear => "b",
            DgpCase::Nonlinear => "c",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        DgpCase::ALL.into_iter().find(|c| c.label() == s)
    }

    /// `(μ0(x), μ1(x))`.
    pub fn means(self, x: &[f64]) -> (f64, f64) {
        let (x0, x1, x2) = (x[0], x[1], x[2]);
        match self {
            DgpCase::Monotonic => {
                let m0 = 10.0 + 2.0 * x0 + x1 - 0.5 * x2;
                (m0, m0 + x0 * x0)
            }
            DgpCase::Linear => (
                10.0 + 2.0 * x0 + x1 - 0.5 * x2,
                12.0 + 1.5 * x0 + 1.2 * x1 + 1.5 * x2,
            ),
            DgpCase::Nonlinear => (
                10.0 + 0.5 * x0 * x0 + x1 * x1 + x0 * x2 - 2.0 * x1 * x2,
                13.0 + 0.5 * x0 * x0 + 2.5 * x1 * x1 + 1.5 * x0 * x2 + 4.0 * x1 * x2,
            ),
        }
    }

    /// Default expert range for the Gaussian working copula.
    pub fn expert_range(self) -> (f64, f64) {
        match self {
            DgpCase::Monotonic => (0.5, 1.0),
            _ => (0.2, 0.7),
        }
    }
}

/// Joint law of `(ε0, ε1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ErrorModel {
    /// `ε1 = ε0`.
    SharedNoise,
    /// Standard normal margins linked by a copula.
    Copula(Copula),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scenario {
    pub case: DgpCase,
    pub errors: ErrorModel,
}

impl Scenario {
    pub fn standard(case: DgpCase) -> Self {
        let errors = match case {
            DgpCase::Monotonic => ErrorModel::SharedNoise,
            _ => ErrorModel::Copula(Copula::gaussian(DESIGN_RHO).expect("valid correlation")),
        };
        Self { case, errors }
    }

    /// Linear means with errors from `family` at Kendall's `tau`.
    pub fn misspecified(family: CopulaFamily, tau: KendallTau) -> Result<Self> {
        if !matches!(family, CopulaFamily::Gaussian | CopulaFamily::Clayton | CopulaFamily::Gumbel) {
            return Err(GpnError::Domain(format!("{family} is not a misspecification family")));
        }
        let copula = Copula::new(family, tau_to_param(family, tau)?)?;
        Ok(Self { case: DgpCase::Linear, errors: ErrorModel::Copula(copula) })
    }

    /// Copula of `(Y(1), Y(0))` given `X`.
    pub fn truth_copula(&self) -> Copula {
        match self.errors {
            ErrorModel::SharedNoise => Copula::comonotone(),
            ErrorModel::Copula(c) => c,
        }
    }

    /// Exact margins at `x`, guarded like estimated ones.
    pub fn oracle_point(&self, x: &[f64], t: &Thresholds) -> Result<MarginalPoint> {
        let (m0, m1) = self.case.means(x);
        MarginalPoint::guarded(
            normal::cdf(t.c1 - m1),
            normal::cdf(t.c0 - m0),
            Some(normal::cdf(t.c1 - m0)),
        )
    }

    /// `GPN(x)` under the generating law.
    pub fn true_gpn(&self, x: &[f64], t: &Thresholds) -> Result<f64> {
        Ok(copula_gpn(&self.oracle_point(x, t)?, &self.truth_copula())?.value)
    }

    /// `P(Y(0) < c0 | Y(1) >= c1)` over the covariate distribution, by Monte
    /// Carlo over `draws` covariate vectors.
    pub fn population_gpn(&self, t: &Thresholds, draws: usize, seed: u64) -> Result<f64> {
        if draws == 0 {
            return Err(GpnError::EmptyInput("population draws"));
        }
        let xs = CovariateModel::default().sample(draws, seed);
        let copula = self.truth_copula();
        let (mut num, mut den) = (0.0, 0.0);
        for x in xs.chunks_exact(3) {
            let m = self.oracle_point(x, t)?;
            num += m.u0() - copula.cdf(m.u1(), m.u0())?;
            den += m.treated_survival();
        }
        Ok((num / den).clamp(0.0, 1.0))
    }
}

/// Multivariate normal covariate law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovariateModel {
    pub mean: [f64; 3],
    pub cov: [[f64; 3]; 3],
}

impl Default for CovariateModel {
    fn default() -> Self {
        Self {
            mean: [0.5, -0.5, 0.0],
            cov: [[1.0, 0.3, 0.1], [0.3, 1.0, 0.2], [0.1, 0.2, 1.0]],
        }
    }
}

impl CovariateModel {
    fn cholesky(&self) -> [[f64; 3]; 3] {
        let a = self.cov;
        let mut l = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..=i {
                let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
                l[i][j] = if i == j { (a[i][i] - s).sqrt() } else { (a[i][j] - s) / l[j][j] };
            }
        }
        l
    }

    /// `n` draws, row-major.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let l = self.cholesky();
        let mut r = rng::stream(seed);
        let mut out = Vec::with_capacity(3 * n);
        for _ in 0..n {
            let e: [f64; 3] = std::array::from_fn(|_| r.sample(StandardNormal));
            for i in 0..3 {
                out.push(self.mean[i] + (0..=i).map(|k| l[i][k] * e[k]).sum::<f64>());
            }
        }
        out
    }
}

/// `P(Z = 1 | X = x)`.
pub fn propensity(x: &[f64]) -> f64 {
    let eta = -1.5 + 0.5 * x[0].exp() - 0.8 * x[1] + 0.4 * x[2];
    1.0 / (1.0 + (-eta).exp())
}

/// A simulated sample plus the hidden potential outcomes.
#[derive(Debug, Clone)]
pub struct Simulated {
    pub data: Dataset,
    pub y0: Vec<f64>,
    pub y1: Vec<f64>,
}

/// Draw `n` units from `scenario`.
pub fn generate(scenario: &Scenario, n: usize, seed: u64) -> Result<Simulated> {
    if n == 0 {
        return Err(GpnError::EmptyInput("sample size must be at least 1"));
    }
    let cov_seed = rng::derive_seed(seed, &[TAG_COVARIATES]);
    let err_seed = rng::derive_seed(seed, &[TAG_ERRORS]);
    let x = CovariateModel::default().sample(n, cov_seed);
    // treatment draws continue the covariate stream's sibling
    let mut tr = rng::stream(rng::derive_seed(cov_seed, &[0]));
    let eps: Vec<(f64, f64)> = match scenario.errors {
        ErrorModel::SharedNoise => {
            let mut r = rng::stream(err_seed);
            (0..n)
                .map(|_| {
                    let e: f64 = r.sample(StandardNormal);
                    (e, e)
                })
                .collect()
        }
        ErrorModel::Copula(c) => sample_copula_pair(&c, n, err_seed)?,
    };
    let (mut z, mut y, mut y0, mut y1) =
        (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for (i, row) in x.chunks_exact(3).enumerate() {
        let (m0, m1) = scenario.case.means(row);
        let t = u8::from(tr.random::<f64>() < propensity(row));
        let (a, b) = (m0 + eps[i].0, m1 + eps[i].1);
        y.push(if t == 1 { b } else { a });
        z.push(t);
        y0.push(a);
        y1.push(b);
    }
    Ok(Simulated { data: Dataset::from_flat(x, 3, z, y)?, y0, y1 })
}

/// Accuracy of per-unit bounds against the per-unit truth.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Metrics {
    pub mse_lb: f64,
    pub mse_ub: f64,
    pub width: f64,
}

pub fn evaluate(intervals: &[BoundInterval], truth: &[f64]) -> Result<Metrics> {
    if intervals.len() != truth.len() {
        return Err(GpnError::LengthMismatch { expected: truth.len(), got: intervals.len() });
    }
    if intervals.is_empty() {
        return Err(GpnError::EmptyInput("no units to evaluate"));
    }
    let n = truth.len() as f64;
    let mut m = Metrics::default();
    for (b, &g) in intervals.iter().zip(truth) {
        m.mse_lb += (b.lower - g).powi(2);
        m.mse_ub += (b.upper - g).powi(2);
        m.width += b.width();
    }
    Ok(Metrics { mse_lb: m.mse_lb / n, mse_ub: m.mse_ub / n, width: m.width / n })
}

/// How the margins feeding the bounds are obtained.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum MarginalMode {
    /// Analytic margins of the generating law.
    Oracle,
    /// Doubly robust estimates from the observed sample.
    Estimated(DrConfig),
}

fn unit_points(
    scenario: &Scenario,
    sim: &Simulated,
    t: &Thresholds,
    mode: &MarginalMode,
) -> Result<Vec<MarginalPoint>> {
    match mode {
        MarginalMode::Oracle => (0..sim.data.n())
            .map(|i| scenario.oracle_point(sim.data.x_row(i), t))
            .collect(),
        MarginalMode::Estimated(cfg) => estimate_points(&sim.data, t, cfg),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1Config {
    pub n: usize,
    pub replicates: usize,
    pub thresholds: Thresholds,
    pub mode: MarginalMode,
    pub conservative: (f64, f64),
    /// Expert range per case; `None` uses [`DgpCase::expert_range`].
    pub expert: Option<(f64, f64)>,
    pub cases: Vec<DgpCase>,
}

impl Default for Table1Config {
    fn default() -> Self {
        Self {
            n: 4096,
            replicates: 10,
            thresholds: Thresholds { c0: DEFAULT_C0, c1: DEFAULT_C1 },
            mode: MarginalMode::Estimated(DrConfig::default()),
            conservative: (0.0, 1.0),
            expert: None,
            cases: DgpCase::ALL.to_vec(),
        }
    }
}

/// Metrics of all four methods on one simulated sample.
pub fn table1_replicate(
    cfg: &Table1Config,
    case: DgpCase,
    seed: u64,
) -> Result<Vec<(BoundMethod, Metrics)>> {
    let scenario = Scenario::standard(case);
    let t = &cfg.thresholds;
    let sim = generate(&scenario, cfg.n, seed)?;
    let points = unit_points(&scenario, &sim, t, &cfg.mode)?;
    let truth = (0..sim.data.n())
        .map(|i| scenario.true_gpn(sim.data.x_row(i), t))
        .collect::<Result<Vec<_>>>()?;
    let (elo, ehi) = cfg.expert.unwrap_or_else(|| case.expert_range());
    let plan = BoundsPlan {
        monotonicity: true,
        conservative: Some(CopulaSpec::gaussian(cfg.conservative.0, cfg.conservative.1)?),
        expert: Some(CopulaSpec::gaussian(elo, ehi)?),
    };
    let ub = unit_bounds(&points, &plan)?;
    BoundMethod::ALL
        .iter()
        .map(|&m| {
            let b = ub.get(m).expect("all methods planned");
            Ok((m, evaluate(b, &truth)?))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1Row {
    pub method: BoundMethod,
    pub case: DgpCase,
    /// Mean over replicates.
    pub metrics: Metrics,
    /// Across-replicate standard deviation of the width (0 for one replicate).
    pub width_sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1 {
    pub rows: Vec<Table1Row>,
    /// `replicates[case][rep]` holds the four method metrics of one sample.
    pub replicates: Vec<Vec<Vec<(BoundMethod, Metrics)>>>,
}

/// Table of metrics per (method, case), averaged over replicates. Replicate
/// `r` of case `k` uses seed `derive_seed(seed, [11, k, r])`.
pub fn run_table1(cfg: &Table1Config, seed: u64) -> Result<Table1> {
    if cfg.replicates == 0 {
        return Err(GpnError::EmptyInput("at least one replicate is required"));
    }
    let tasks: Vec<(usize, usize)> = (0..cfg.cases.len())
        .flat_map(|k| (0..cfg.replicates).map(move |r| (k, r)))
        .collect();
    let results = tasks
        .par_iter()
        .map(|&(k, r)| {
            let s = rng::derive_seed(seed, &[TAG_TABLE1, k as u64, r as u64]);
            table1_replicate(cfg, cfg.cases[k], s)
        })
        .collect::<Result<Vec<_>>>()?;
    let replicates: Vec<Vec<_>> =
        results.chunks(cfg.replicates).map(|c| c.to_vec()).collect();
    let mut rows = Vec::new();
    for (mi, &method) in BoundMethod::ALL.iter().enumerate() {
        for (k, &case) in cfg.cases.iter().enumerate() {
            let reps: Vec<Metrics> = replicates[k].iter().map(|r| r[mi].1).collect();
            let nrep = reps.len() as f64;
            let widths: Vec<f64> = reps.iter().map(|m| m.width).collect();
            rows.push(Table1Row {
                method,
                case,
                metrics: Metrics {
                    mse_lb: reps.iter().map(|m| m.mse_lb).sum::<f64>() / nrep,
                    mse_ub: reps.iter().map(|m| m.mse_ub).sum::<f64>() / nrep,
                    width: widths.iter().sum::<f64>() / nrep,
                },
                width_sd: stats::sample_sd(&widths).unwrap_or(0.0),
            });
        }
    }
    Ok(Table1 { rows, replicates })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table2Config {
    pub n: usize,
    pub replicates: usize,
    pub thresholds: Thresholds,
    pub mode: MarginalMode,
    pub conservative: (f64, f64),
    /// Expert range is `ρ(τ) ± expert_half_width`, clipped to `[-1, 1]`.
    pub expert_half_width: f64,
    pub population_draws: usize,
    pub families: Vec<CopulaFamily>,
    pub taus: Vec<f64>,
}

impl Default for Table2Config {
    fn default() -> Self {
        Self {
            n: 4096,
            replicates: 10,
            thresholds: Thresholds { c0: DEFAULT_C0, c1: DEFAULT_C1 },
            mode: MarginalMode::Estimated(DrConfig::default()),
            conservative: (0.0, 1.0),
            expert_half_width: 0.1,
            population_draws: POPULATION_DRAWS,
            families: vec![CopulaFamily::Gaussian, CopulaFamily::Clayton, CopulaFamily::Gumbel],
            taus: vec![0.20, 0.33, 0.50],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table2Row {
    pub family: CopulaFamily,
    pub tau: f64,
    /// Gaussian working-model correlation matched to `tau`.
    pub rho: f64,
    pub true_mean_gpn: f64,
    pub fh: BoundInterval,
    pub conservative: BoundInterval,
    pub expert: BoundInterval,
}

fn mean_interval(xs: &[BoundInterval]) -> BoundInterval {
    let n = xs.len() as f64;
    let lower = xs.iter().map(|b| b.lower).sum::<f64>() / n;
    let upper = xs.iter().map(|b| b.upper).sum::<f64>() / n;
    BoundInterval { lower, upper: upper.max(lower), method: xs[0].method }
}

/// Averaged bounds under copula misspecification with a Gaussian working
/// model. All cells share the population draws behind the true mean.
pub fn run_table2(cfg: &Table2Config, seed: u64) -> Result<Vec<Table2Row>> {
    if cfg.replicates == 0 {
        return Err(GpnError::EmptyInput("at least one replicate is required"));
    }
    if !(cfg.expert_half_width >= 0.0) {
        return Err(GpnError::Domain("expert half-width must be nonnegative".into()));
    }
    let cells: Vec<(usize, usize)> = (0..cfg.families.len())
        .flat_map(|f| (0..cfg.taus.len()).map(move |t| (f, t)))
        .collect();
    let pop_seed = rng::derive_seed(seed, &[TAG_POPULATION]);
    cells
        .par_iter()
        .map(|&(f, ti)| {
            let family = cfg.families[f];
            let tau = KendallTau::new(cfg.taus[ti])?;
            let scenario = Scenario::misspecified(family, tau)?;
            let rho = tau_to_param(CopulaFamily::Gaussian, tau)?;
            let plan = BoundsPlan {
                monotonicity: false,
                conservative: Some(CopulaSpec::gaussian(cfg.conservative.0, cfg.conservative.1)?),
                expert: Some(CopulaSpec::gaussian(
                    (rho - cfg.expert_half_width).max(-1.0),
                    (rho + cfg.expert_half_width).min(1.0),
                )?),
            };
            let true_mean_gpn =
                scenario.population_gpn(&cfg.thresholds, cfg.population_draws, pop_seed)?;
            let mut fh = Vec::with_capacity(cfg.replicates);
            let mut cons = Vec::with_capacity(cfg.replicates);
            let mut expert = Vec::with_capacity(cfg.replicates);
            for r in 0..cfg.replicates {
                let s = rng::derive_seed(seed, &[TAG_TABLE2, f as u64, ti as u64, r as u64]);
                let sim = generate(&scenario, cfg.n, s)?;
                let points = unit_points(&scenario, &sim, &cfg.thresholds, &cfg.mode)?;
                let summary = unit_bounds(&points, &plan)?.summary()?;
                for (m, b) in summary {
                    match m {
                        BoundMethod::Fh => fh.push(b),
                        BoundMethod::Conservative => cons.push(b),
                        BoundMethod::Expert => expert.push(b),
                        BoundMethod::Mono => {}
                    }
                }
            }
            Ok(Table2Row {
                family,
                tau: tau.value(),
                rho,
                true_mean_gpn,
                fh: mean_interval(&fh),
                conservative: mean_interval(&cons),
                expert: mean_interval(&expert),
            })
        })
        .collect()
}

/// Kendall's τ of the generating copula (for reporting).
pub fn scenario_tau(s: &Scenario) -> f64 {
    param_to_tau(&s.truth_copula())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::Method;

    fn thr() -> Thresholds {
        Thresholds::new(DEFAULT_C0, DEFAULT_C1).unwrap()
    }

    #[test]
    fn monotonic_case_rows_are_monotone() {
        let sim = generate(&Scenario::standard(DgpCase::Monotonic), 4096, 1).unwrap();
        assert!(sim.y1.iter().zip(&sim.y0).all(|(a, b)| a >= b));
    }

    #[test]
    fn covariate_means() {
        let x = CovariateModel::default().sample(4096, 2);
        for (j, m) in [0.5, -0.5, 0.0].iter().enumerate() {
            let s = x.iter().skip(j).step_by(3).sum::<f64>() / 4096.0;
            assert!((s - m).abs() < 0.05, "{j}: {s}");
        }
    }

    #[test]
    fn covariate_covariance() {
        let n = 100_000;
        let x = CovariateModel::default().sample(n, 3);
        let cov = |a: usize, b: usize| {
            let ma = x.iter().skip(a).step_by(3).sum::<f64>() / n as f64;
            let mb = x.iter().skip(b).step_by(3).sum::<f64>() / n as f64;
            x.chunks_exact(3).map(|r| (r[a] - ma) * (r[b] - mb)).sum::<f64>() / n as f64
        };
        let target = CovariateModel::default().cov;
        for a in 0..3 {
            for b in 0..3 {
                assert!((cov(a, b) - target[a][b]).abs() < 0.02);
            }
        }
    }

    #[test]
    fn linear_case_error_correlation() {
        let n = 100_000;
        let s = Scenario::standard(DgpCase::Linear);
        let sim = generate(&s, n, 4).unwrap();
        let (mut e0, mut e1) = (Vec::new(), Vec::new());
        for i in 0..n {
            let (m0, m1) = DgpCase::Linear.means(sim.data.x_row(i));
            e0.push(sim.y0[i] - m0);
            e1.push(sim.y1[i] - m1);
        }
        let cov: f64 = e0.iter().zip(&e1).map(|(a, b)| a * b).sum::<f64>() / n as f64;
        assert!((cov - 0.5).abs() < 0.03, "{cov}");
    }

    #[test]
    fn observed_outcome_follows_treatment() {
        let sim = generate(&Scenario::standard(DgpCase::Nonlinear), 200, 5).unwrap();
        for i in 0..200 {
            let want = if sim.data.z()[i] == 1 { sim.y1[i] } else { sim.y0[i] };
            assert_eq!(sim.data.y()[i], want);
        }
        assert!(sim.data.treated() > 0 && sim.data.treated() < 200);
    }

    #[test]
    fn generation_is_deterministic() {
        let s = Scenario::misspecified(CopulaFamily::Gumbel, KendallTau::new(0.33).unwrap()).unwrap();
        let a = generate(&s, 300, 9).unwrap();
        let b = generate(&s, 300, 9).unwrap();
        assert_eq!(a.data, b.data);
        assert_ne!(a.data, generate(&s, 300, 10).unwrap().data);
    }

    #[test]
    fn monotonic_truth_matches_closed_form() {
        let s = Scenario::standard(DgpCase::Monotonic);
        let t = thr();
        for x in [[0.5, -0.5, 0.0], [1.5, 0.2, -1.0], [-1.0, -2.0, 0.5], [2.0, 1.0, 1.0]] {
            let (m0, m1) = DgpCase::Monotonic.means(&x);
            let u1 = normal::cdf(t.c1 - m1);
            let u0 = normal::cdf(t.c0 - m0);
            let joint = normal::cdf(t.c0.min(t.c1 - (m1 - m0)) - m0);
            let want = (u0 - joint) / (1.0 - u1);
            assert!((s.true_gpn(&x, &t).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn no_effect_means_zero_gpn() {
        // X0 = 0 gives μ1 = μ0 in the monotonic design
        let s = Scenario::standard(DgpCase::Monotonic);
        assert_eq!(s.true_gpn(&[0.0, 0.3, -0.2], &thr()).unwrap(), 0.0);
    }

    #[test]
    fn linear_truth_matches_monte_carlo() {
        let s = Scenario::standard(DgpCase::Linear);
        let t = thr();
        let x = [0.5, -0.5, 0.0];
        let (m0, m1) = DgpCase::Linear.means(&x);
        let pairs = sample_copula_pair(&Copula::gaussian(0.5).unwrap(), 1_000_000, 77).unwrap();
        let (mut hit, mut cond) = (0usize, 0usize);
        for (e0, e1) in pairs {
            if m1 + e1 >= t.c1 {
                cond += 1;
                hit += usize::from(m0 + e0 < t.c0);
            }
        }
        let p = hit as f64 / cond as f64;
        let se = (p * (1.0 - p) / cond as f64).sqrt();
        let g = s.true_gpn(&x, &t).unwrap();
        assert!((p - g).abs() < 3.0 * se, "mc {p} vs {g} (se {se})");
    }

    #[test]
    fn misspecified_requires_parametric_family() {
        let tau = KendallTau::new(0.3).unwrap();
        assert!(Scenario::misspecified(CopulaFamily::Independence, tau).is_err());
        let s = Scenario::misspecified(CopulaFamily::Gaussian, KendallTau::new(0.5).unwrap()).unwrap();
        assert!((s.truth_copula().param() - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((scenario_tau(&s) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn evaluate_examples() {
        let exact = [BoundInterval::new(0.3, 0.3, Method::Fh).unwrap()];
        assert_eq!(evaluate(&exact, &[0.3]).unwrap(), Metrics::default());
        let wide = vec![BoundInterval::new(0.0, 1.0, Method::Fh).unwrap(); 3];
        let m = evaluate(&wide, &[0.5; 3]).unwrap();
        assert_eq!((m.mse_lb, m.mse_ub, m.width), (0.25, 0.25, 1.0));
        assert!(evaluate(&wide, &[0.5; 2]).is_err());
    }

    #[test]
    fn oracle_truth_is_covered() {
        let t = thr();
        for case in DgpCase::ALL {
            let s = Scenario::standard(case);
            let sim = generate(&s, 512, 6).unwrap();
            let (lo, hi) = case.expert_range();
            let spec = CopulaSpec::gaussian(lo, hi).unwrap();
            for i in 0..512 {
                let x = sim.data.x_row(i);
                let m = s.oracle_point(x, &t).unwrap();
                let g = s.true_gpn(x, &t).unwrap();
                assert!(crate::bounds::fh_bounds(&m).value.contains(g, 1e-9));
                assert!(crate::bounds::copula_gpn_bounds(&m, &spec).unwrap().value.contains(g, 1e-9));
            }
        }
    }

    #[test]
    fn table1_shape_and_determinism() {
        let cfg = Table1Config { n: 256, replicates: 2, mode: MarginalMode::Oracle, ..Default::default() };
        let a = run_table1(&cfg, 1).unwrap();
        assert_eq!(a.rows.len(), 12);
        assert_eq!(a, run_table1(&cfg, 1).unwrap());
    }

    #[test]
    fn table2_shape() {
        let cfg = Table2Config {
            n: 256,
            replicates: 1,
            mode: MarginalMode::Oracle,
            population_draws: 2000,
            ..Default::default()
        };
        let rows = run_table2(&cfg, 1).unwrap();
        assert_eq!(rows.len(), 9);
        for r in &rows {
            assert!(r.fh.lower <= r.conservative.lower + 1e-12);
            assert!(r.conservative.upper <= r.fh.upper + 1e-12);
        }
    }
}
