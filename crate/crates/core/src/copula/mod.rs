//! Bivariate copulas used to couple the two potential outcomes.
//!
//! Every parametric family here is ordered by concordance in its parameter,
//! i.e. `C_θ(u, v)` is nondecreasing in `θ` for each fixed `(u, v)`. The
//! extremes of `C_θ(u, v)` over a parameter interval are therefore attained
//! at its endpoints, which is what [`copula_extremes`] relies on (the
//! ordering itself is property-tested below).

mod bvn;
mod sampling;

pub use bvn::{bvn_cdf, DEGENERATE_RHO};
pub use sampling::sample_copula_pair;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, GpnError, Result};
use crate::normal;

/// Family tag for a bivariate copula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CopulaFamily {
    Gaussian,
    Clayton,
    Gumbel,
    Independence,
    /// Fréchet–Hoeffding upper bound, `min(u, v)`.
    Comonotone,
    /// Fréchet–Hoeffding lower bound, `max(u + v - 1, 0)`.
    Countermonotone,
}

impl CopulaFamily {
    pub const ALL: [CopulaFamily; 6] = [
        CopulaFamily::Gaussian,
        CopulaFamily::Clayton,
        CopulaFamily::Gumbel,
        CopulaFamily::Independence,
        CopulaFamily::Comonotone,
        CopulaFamily::Countermonotone,
    ];

    pub fn is_parametric(self) -> bool {
        matches!(self, Self::Gaussian | Self::Clayton | Self::Gumbel)
    }

    /// Closed parameter domain. Clayton includes its removable limit at 0.
    pub fn param_domain(self) -> Option<(f64, f64)> {
        match self {
            Self::Gaussian => Some((-1.0, 1.0)),
            Self::Clayton => Some((0.0, f64::INFINITY)),
            Self::Gumbel => Some((1.0, f64::INFINITY)),
            _ => None,
        }
    }

    pub fn check_param(self, param: f64) -> Result<()> {
        match self.param_domain() {
            None => Ok(()),
            Some((lo, hi)) => {
                if param.is_nan() || param < lo || param > hi || param.is_infinite() {
                    Err(domain(format!("{self} parameter {param} outside [{lo}, {hi}]")))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Gaussian => "gaussian",
            Self::Clayton => "clayton",
            Self::Gumbel => "gumbel",
            Self::Independence => "independence",
            Self::Comonotone => "comonotone",
            Self::Countermonotone => "countermonotone",
        }
    }
}

impl fmt::Display for CopulaFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CopulaFamily {
    type Err = GpnError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| domain(format!("unknown copula family `{s}`")))
    }
}

/// A copula family together with a validated parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Copula {
    family: CopulaFamily,
    param: f64,
}

impl Copula {
    /// Parameterless families ignore `param`.
    pub fn new(family: CopulaFamily, param: f64) -> Result<Self> {
        family.check_param(param)?;
        let param = if family.is_parametric() { param } else { 0.0 };
        Ok(Self { family, param })
    }

    pub fn independence() -> Self {
        Self { family: CopulaFamily::Independence, param: 0.0 }
    }

    pub fn comonotone() -> Self {
        Self { family: CopulaFamily::Comonotone, param: 0.0 }
    }

    pub fn countermonotone() -> Self {
        Self { family: CopulaFamily::Countermonotone, param: 0.0 }
    }

    pub fn gaussian(rho: f64) -> Result<Self> {
        Self::new(CopulaFamily::Gaussian, rho)
    }

    pub fn family(&self) -> CopulaFamily {
        self.family
    }

    pub fn param(&self) -> f64 {
        self.param
    }

    /// `C(u, v)`.
    pub fn cdf(&self, u: f64, v: f64) -> Result<f64> {
        check_unit("u", u)?;
        check_unit("v", v)?;
        if u == 0.0 || v == 0.0 {
            return Ok(0.0);
        }
        if u == 1.0 {
            return Ok(v);
        }
        if v == 1.0 {
            return Ok(u);
        }
        let c = match self.family {
            CopulaFamily::Independence => u * v,
            CopulaFamily::Comonotone => u.min(v),
            CopulaFamily::Countermonotone => (u + v - 1.0).max(0.0),
            // exact limits in copula space avoid the Φ(Φ⁻¹(u)) round trip
            CopulaFamily::Gaussian if self.param == 0.0 => u * v,
            CopulaFamily::Gaussian if self.param > DEGENERATE_RHO => u.min(v),
            CopulaFamily::Gaussian if self.param < -DEGENERATE_RHO => (u + v - 1.0).max(0.0),
            CopulaFamily::Gaussian => bvn_cdf(normal::inv_cdf(u), normal::inv_cdf(v), self.param)?,
            CopulaFamily::Clayton => clayton(u, v, self.param),
            CopulaFamily::Gumbel => gumbel(u, v, self.param),
        };
        Ok(c)
    }
}

fn check_unit(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(domain(format!("{name} = {p} outside [0, 1]")))
    }
}

fn clayton(u: f64, v: f64, theta: f64) -> f64 {
    if theta == 0.0 {
        return u * v;
    }
    // ln S with S = u^-θ + v^-θ - 1, computed without overflow
    let a = -theta * u.ln();
    let b = -theta * v.ln();
    let ln_s = if a.max(b) < 1.0 {
        (a.exp_m1() + b.exp_m1()).ln_1p()
    } else {
        let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
        hi + ((lo - hi).exp() - (-hi).exp()).ln_1p()
    };
    (-ln_s / theta).exp()
}

fn gumbel(u: f64, v: f64, theta: f64) -> f64 {
    if theta == 1.0 {
        return u * v;
    }
    let x = -u.ln();
    let y = -v.ln();
    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
    let r = hi * (1.0 + (lo / hi).powf(theta)).powf(1.0 / theta);
    (-r).exp()
}

/// `C_param(u, v)` for a family tag and raw parameter.
pub fn copula_cdf(family: CopulaFamily, param: f64, u: f64, v: f64) -> Result<f64> {
    Copula::new(family, param)?.cdf(u, v)
}

/// Admissible interval `[min, max]` for the dependence parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DependenceRange {
    pub min: f64,
    pub max: f64,
}

impl DependenceRange {
    pub fn new(family: CopulaFamily, min: f64, max: f64) -> Result<Self> {
        family.check_param(min)?;
        family.check_param(max)?;
        if min > max {
            return Err(domain(format!("dependence range [{min}, {max}] is reversed")));
        }
        Ok(Self { min, max })
    }

    pub fn contains(&self, param: f64) -> bool {
        self.min <= param && param <= self.max
    }
}

/// `(min, max)` of `C_θ(u, v)` over `θ` in the range.
pub fn copula_extremes(
    family: CopulaFamily,
    range: DependenceRange,
    u: f64,
    v: f64,
) -> Result<(f64, f64)> {
    let range = DependenceRange::new(family, range.min, range.max)?;
    let c_min = copula_cdf(family, range.min, u, v)?;
    let c_max = copula_cdf(family, range.max, u, v)?;
    Ok((c_min, c_max))
}

/// Kendall's rank correlation, `|tau| < 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct KendallTau(f64);

impl KendallTau {
    pub fn new(tau: f64) -> Result<Self> {
        if tau.is_finite() && tau.abs() < 1.0 {
            Ok(Self(tau))
        } else {
            Err(domain(format!("Kendall tau {tau} must lie in (-1, 1)")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Parameter whose population Kendall's tau equals `tau`.
///
/// Gaussian `sin(πτ/2)`, Clayton `2τ/(1-τ)`, Gumbel `1/(1-τ)`.
pub fn tau_to_param(family: CopulaFamily, tau: KendallTau) -> Result<f64> {
    let t = tau.value();
    match family {
        CopulaFamily::Gaussian => Ok((std::f64::consts::FRAC_PI_2 * t).sin()),
        CopulaFamily::Clayton | CopulaFamily::Gumbel if t < 0.0 => Err(domain(format!(
            "{family} copula cannot represent negative Kendall tau {t}"
        ))),
        CopulaFamily::Clayton => Ok(2.0 * t / (1.0 - t)),
        CopulaFamily::Gumbel => Ok(1.0 / (1.0 - t)),
        _ => Err(domain(format!("{family} copula has no parameter"))),
    }
}

/// Population Kendall's tau of a copula.
pub fn param_to_tau(copula: &Copula) -> f64 {
    let p = copula.param;
    match copula.family {
        CopulaFamily::Gaussian => std::f64::consts::FRAC_2_PI * p.asin(),
        CopulaFamily::Clayton => p / (p + 2.0),
        CopulaFamily::Gumbel => 1.0 - 1.0 / p,
        CopulaFamily::Independence => 0.0,
        CopulaFamily::Comonotone => 1.0,
        CopulaFamily::Countermonotone => -1.0,
    }
}
