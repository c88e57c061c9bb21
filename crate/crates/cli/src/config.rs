//! Run configuration read from JSON.
//!
//! Every field is optional; omitted fields take the documented defaults.
//! Unknown keys are rejected so that typos do not silently fall back to a
//! default. Validation errors name the offending field and the line of the
//! file it appears on.

use std::path::Path;

use gpn_core::bounds::Aggregation;
use gpn_core::inference::SubsamplePlan;
use gpn_core::marginals::{DEFAULT_MARGINAL_DELTA, DEFAULT_PROPENSITY_EPS};
use gpn_core::rng::derive_seed;
use gpn_core::{CopulaFamily, CopulaSpec, DrConfig, RegressorKind, Thresholds};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

const TAG_REGRESSOR: u64 = 101;
const TAG_CROSS_FIT: u64 = 102;
const TAG_SUBSAMPLE: u64 = 103;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdsConfig {
    pub c0: f64,
    pub c1: f64,
}

impl Default for ThresholdsConfig {
    fn default() -> Self {
        Self { c0: gpn_core::dgp::DEFAULT_C0, c1: gpn_core::dgp::DEFAULT_C1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CopulaConfig {
    /// Working family for the Conservative and Expert bounds and the
    /// sensitivity curve.
    pub family: CopulaFamily,
    pub conservative: [f64; 2],
    /// Analysis Expert range; `simulate --table 1` falls back to the
    /// per-design ranges when absent.
    pub expert: Option<[f64; 2]>,
    /// Half-width of the Expert range around the τ-matched correlation in
    /// `simulate --table 2`.
    pub expert_half_width: f64,
}

impl Default for CopulaConfig {
    fn default() -> Self {
        Self { family: CopulaFamily::Gaussian, conservative: [0.0, 1.0], expert: None, expert_half_width: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegressorName {
    LinearLogistic,
    PolynomialLogistic,
    Mlp,
}

/// One learner used for the propensity, the outcome regressions and the
/// final stage. MLP fields default to a 64×64 network, 200 epochs, learning
/// rate 1e-3 and batch size 256.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegressorConfig {
    pub kind: RegressorName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hidden: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epochs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learning_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<usize>,
}

impl Default for RegressorConfig {
    fn default() -> Self {
        Self {
            kind: RegressorName::PolynomialLogistic,
            degree: Some(2),
            hidden: None,
            epochs: None,
            learning_rate: None,
            batch_size: None,
        }
    }
}

impl RegressorConfig {
    pub fn to_kind(&self, seed: u64) -> RegressorKind {
        match self.kind {
            RegressorName::LinearLogistic => RegressorKind::LinearLogistic,
            RegressorName::PolynomialLogistic => {
                RegressorKind::PolynomialLogistic { degree: self.degree.unwrap_or(2) }
            }
            RegressorName::Mlp => {
                let RegressorKind::Mlp { hidden, epochs, learning_rate, batch_size, .. } =
                    RegressorKind::mlp_default(seed)
                else {
                    unreachable!("mlp_default builds an mlp")
                };
                RegressorKind::Mlp {
                    hidden: self.hidden.clone().unwrap_or(hidden),
                    epochs: self.epochs.unwrap_or(epochs),
                    learning_rate: self.learning_rate.unwrap_or(learning_rate),
                    batch_size: self.batch_size.unwrap_or(batch_size),
                    seed,
                }
            }
        }
    }

    fn misplaced_field(&self) -> Option<&'static str> {
        let mlp_fields = self.hidden.is_some()
            || self.epochs.is_some()
            || self.learning_rate.is_some()
            || self.batch_size.is_some();
        match self.kind {
            RegressorName::Mlp if self.degree.is_some() => Some("degree"),
            RegressorName::LinearLogistic if self.degree.is_some() => Some("degree"),
            RegressorName::LinearLogistic | RegressorName::PolynomialLogistic if mlp_fields => {
                Some("mlp hyperparameters")
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClipConfig {
    pub eps: f64,
    pub delta: f64,
}

impl Default for ClipConfig {
    fn default() -> Self {
        Self { eps: DEFAULT_PROPENSITY_EPS, delta: DEFAULT_MARGINAL_DELTA }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SubsampleConfig {
    pub b: usize,
    /// Subsample size; half the sample when absent.
    pub m: Option<usize>,
    /// Scale each sd by `sqrt(m/n)`.
    pub rescale: bool,
}

impl Default for SubsampleConfig {
    fn default() -> Self {
        Self { b: 100, m: None, rescale: false }
    }
}

/// Everything a command needs besides its own flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub thresholds: ThresholdsConfig,
    pub copula: CopulaConfig,
    pub regressor: RegressorConfig,
    pub clip: ClipConfig,
    pub subsample: SubsampleConfig,
    pub seed: u64,
    /// Fit nuisances on one half of the sample, pseudo-outcomes on the other.
    pub cross_fit: bool,
    /// Include the monotonicity bound.
    pub monotonicity: bool,
    pub aggregation: Aggregation,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            thresholds: ThresholdsConfig::default(),
            copula: CopulaConfig::default(),
            regressor: RegressorConfig::default(),
            clip: ClipConfig::default(),
            subsample: SubsampleConfig::default(),
            seed: 0,
            cross_fit: false,
            monotonicity: true,
            aggregation: Aggregation::UnitMean,
        }
    }
}

/// 1-based line of the key at `path` (nested object keys) in JSON text.
fn locate(src: &str, path: &[&str]) -> Option<usize> {
    let mut pos = 0;
    for key in path {
        pos += src[pos..].find(&format!("\"{key}\""))?;
    }
    Some(src[..pos].matches('\n').count() + 1)
}

impl RunConfig {
    /// Parse and validate JSON text.
    pub fn from_json(src: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(src).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.check(Some(src))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| {
            CliError::Config(format!("cannot read {}: {e}", path.display()))
        })?;
        Self::from_json(&src).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.check(None)
    }

    fn check(&self, src: Option<&str>) -> Result<()> {
        let fail = |path: &[&str], msg: String| {
            let at = src
                .and_then(|s| locate(s, path))
                .map(|l| format!(" (line {l})"))
                .unwrap_or_default();
            CliError::Config(format!("{}{at}: {msg}", path.join(".")))
        };
        self.thresholds().map_err(|e| fail(&["thresholds"], e.to_string()))?;
        let family = self.copula.family;
        if !family.is_parametric() {
            return Err(fail(&["copula", "family"], format!("{family} has no parameter range")));
        }
        self.conservative_spec()
            .map_err(|e| fail(&["copula", "conservative"], e.to_string()))?;
        self.expert_spec().map_err(|e| fail(&["copula", "expert"], e.to_string()))?;
        let hw = self.copula.expert_half_width;
        if !(hw >= 0.0 && hw.is_finite()) {
            return Err(fail(&["copula", "expert_half_width"], format!("{hw} must be finite and nonnegative")));
        }
        if let Some(field) = self.regressor.misplaced_field() {
            return Err(fail(&["regressor"], format!("{field} not valid for this regressor kind")));
        }
        for (key, v) in [("eps", self.clip.eps), ("delta", self.clip.delta)] {
            if !(v > 0.0 && v < 0.5) {
                return Err(fail(&["clip", key], format!("{v} must lie in (0, 0.5)")));
            }
        }
        self.dr_config().validate().map_err(|e| fail(&["regressor"], e.to_string()))?;
        if self.subsample.b < 2 {
            return Err(fail(&["subsample", "b"], format!("need at least 2 subsamples, got {}", self.subsample.b)));
        }
        if let Some(m) = self.subsample.m.filter(|&m| m < 2) {
            return Err(fail(&["subsample", "m"], format!("subsample size {m} must exceed 1")));
        }
        Ok(())
    }

    pub fn thresholds(&self) -> gpn_core::Result<Thresholds> {
        Thresholds::new(self.thresholds.c0, self.thresholds.c1)
    }

    pub fn conservative_spec(&self) -> gpn_core::Result<CopulaSpec> {
        let [lo, hi] = self.copula.conservative;
        CopulaSpec::new(self.copula.family, lo, hi)
    }

    pub fn expert_spec(&self) -> gpn_core::Result<Option<CopulaSpec>> {
        self.copula
            .expert
            .map(|[lo, hi]| CopulaSpec::new(self.copula.family, lo, hi))
            .transpose()
    }

    /// Learner settings; MLP seeds and the cross-fitting split are derived
    /// from the run seed.
    pub fn dr_config(&self) -> DrConfig {
        let kind = |stage: u64| self.regressor.to_kind(derive_seed(self.seed, &[TAG_REGRESSOR, stage]));
        DrConfig {
            propensity: kind(0),
            outcome: kind(1),
            final_stage: kind(2),
            eps: self.clip.eps,
            delta: self.clip.delta,
            cross_fit: self.cross_fit,
            seed: derive_seed(self.seed, &[TAG_CROSS_FIT]),
        }
    }

    pub fn subsample_plan(&self) -> SubsamplePlan {
        SubsamplePlan {
            b: self.subsample.b,
            m: self.subsample.m,
            seed: derive_seed(self.seed, &[TAG_SUBSAMPLE]),
            rescale: self.subsample.rescale,
        }
    }
}
