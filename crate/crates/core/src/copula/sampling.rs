use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, Open01, StandardNormal};

use super::{Copula, CopulaFamily};
use crate::error::{GpnError, Result};
use crate::normal;
use crate::rng;

/// Draw `n` pairs `(ε0, ε1)` with standard normal margins coupled by `copula`.
///
/// Gaussian pairs are drawn directly in normal space; Archimedean families
/// use the Marshall–Olkin frailty construction in copula space (gamma frailty
/// for Clayton, positive stable frailty for Gumbel) followed by `Φ⁻¹`.
/// Output is a pure function of `(copula, n, seed)`.
pub fn sample_copula_pair(copula: &Copula, n: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    if n == 0 {
        return Err(GpnError::EmptyInput("sample size must be at least 1"));
    }
    let mut rng = rng::stream(seed);
    let theta = copula.param();
    let mut out = Vec::with_capacity(n);
    match copula.family() {
        CopulaFamily::Gaussian => {
            let s = (1.0 - theta * theta).max(0.0).sqrt();
            for _ in 0..n {
                let z0: f64 = rng.sample(StandardNormal);
                let z1: f64 = rng.sample(StandardNormal);
                out.push((z0, theta * z0 + s * z1));
            }
        }
        CopulaFamily::Independence => {
            for _ in 0..n {
                out.push((rng.sample(StandardNormal), rng.sample(StandardNormal)));
            }
        }
        CopulaFamily::Comonotone => {
            for _ in 0..n {
                let z: f64 = rng.sample(StandardNormal);
                out.push((z, z));
            }
        }
        CopulaFamily::Countermonotone => {
            for _ in 0..n {
                let z: f64 = rng.sample(StandardNormal);
                out.push((z, -z));
            }
        }
        CopulaFamily::Clayton if theta == 0.0 => {
            for _ in 0..n {
                out.push((rng.sample(StandardNormal), rng.sample(StandardNormal)));
            }
        }
        CopulaFamily::Clayton => {
            // ψ(t) = (1 + t)^(-1/θ) is the Laplace transform of Gamma(1/θ, 1)
            let frailty = Gamma::new(1.0 / theta, 1.0)
                .map_err(|e| GpnError::Domain(format!("clayton frailty: {e}")))?;
            for _ in 0..n {
                let v: f64 = frailty.sample(&mut rng);
                let e0: f64 = rng.sample(Exp1);
                let e1: f64 = rng.sample(Exp1);
                let ln_u0 = -(e0 / v).ln_1p() / theta;
                let ln_u1 = -(e1 / v).ln_1p() / theta;
                out.push((normal_from_log_uniform(ln_u0), normal_from_log_uniform(ln_u1)));
            }
        }
        CopulaFamily::Gumbel if theta == 1.0 => {
            for _ in 0..n {
                out.push((rng.sample(StandardNormal), rng.sample(StandardNormal)));
            }
        }
        CopulaFamily::Gumbel => {
            // ψ(t) = exp(-t^α), α = 1/θ, is the Laplace transform of a
            // positive α-stable variable (Kanter's representation).
            let alpha = 1.0 / theta;
            for _ in 0..n {
                let s = positive_stable(alpha, &mut rng);
                let e0: f64 = rng.sample(Exp1);
                let e1: f64 = rng.sample(Exp1);
                let ln_u0 = -(e0 / s).powf(alpha);
                let ln_u1 = -(e1 / s).powf(alpha);
                out.push((normal_from_log_uniform(ln_u0), normal_from_log_uniform(ln_u1)));
            }
        }
    }
    Ok(out)
}

fn positive_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let v: f64 = std::f64::consts::PI * rng.sample::<f64, _>(Open01);
    let w: f64 = rng.sample(Exp1);
    let a = (alpha * v).sin() / v.sin().powf(1.0 / alpha);
    let b = (((1.0 - alpha) * v).sin() / w).powf((1.0 - alpha) / alpha);
    a * b
}

/// `Φ⁻¹(exp(ln_u))` without losing the upper tail to rounding.
fn normal_from_log_uniform(ln_u: f64) -> f64 {
    if ln_u < -std::f64::consts::LN_2 {
        normal::inv_cdf(ln_u.exp().max(f64::MIN_POSITIVE))
    } else {
        let tail = -ln_u.exp_m1();
        -normal::inv_cdf(tail.max(f64::MIN_POSITIVE))
    }
}
