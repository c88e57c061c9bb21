//! Doubly robust margins on the simulation designs, checked against the
//! analytic truth.

use gpn_core::dgp::{generate, propensity, DgpCase, Scenario};
use gpn_core::marginals::{
    fit_dr_marginal, fit_dr_marginal_with, fit_outcome_cdf, fit_propensity, oracle_surface,
};
use gpn_core::normal;
use gpn_core::{Dataset, DrConfig, RegressorKind};

fn linear(n: usize, seed: u64) -> Dataset {
    generate(&Scenario::standard(DgpCase::Linear), n, seed).unwrap().data
}

fn mae(data: &Dataset, f: impl Fn(&[f64]) -> f64, truth: impl Fn(&[f64]) -> f64) -> f64 {
    (0..data.n()).map(|i| (f(data.x_row(i)) - truth(data.x_row(i))).abs()).sum::<f64>()
        / data.n() as f64
}

fn u1_truth(x: &[f64]) -> f64 {
    normal::cdf(12.0 - DgpCase::Linear.means(x).1)
}

#[test]
fn propensity_coefficients_recovered() {
    let data = linear(4096, 1).map_covariates(|x| vec![x[0].exp(), x[1], x[2]]).unwrap();
    let e = fit_propensity(&data, &RegressorKind::LinearLogistic, 0.01).unwrap();
    let coef = e.linear_coefficients().unwrap();
    for (c, t) in coef.iter().zip([-1.5, 0.5, -0.8, 0.4]) {
        assert!((c - t).abs() < 0.2, "{coef:?}");
    }
}

#[test]
fn initial_control_cdf_tracks_truth() {
    let data = linear(4096, 2);
    let nu = fit_outcome_cdf(&data, 0, 10.0, &RegressorKind::default()).unwrap();
    let err = mae(&data, |x| nu.eval(x), |x| normal::cdf(10.0 - DgpCase::Linear.means(x).0));
    assert!(err < 0.03, "{err}");
}

#[test]
fn dr_treated_margin_with_mlp() {
    let data = linear(4096, 3);
    let cfg = DrConfig {
        propensity: RegressorKind::mlp_default(1),
        outcome: RegressorKind::mlp_default(2),
        final_stage: RegressorKind::mlp_default(3),
        ..DrConfig::default()
    };
    let u = fit_dr_marginal(&data, 1, 12.0, &cfg).unwrap();
    let err = mae(&data, |x| u.eval(x), u1_truth);
    assert!(err < 0.04, "{err}");
}

#[test]
fn dr_treated_margin_with_default_learner() {
    let data = linear(4096, 3);
    let u = fit_dr_marginal(&data, 1, 12.0, &DrConfig::default()).unwrap();
    let err = mae(&data, |x| u.eval(x), u1_truth);
    assert!(err < 0.04, "{err}");
}

#[test]
fn double_robustness_with_constant_outcome_model() {
    let data = linear(16384, 4);
    let cfg = DrConfig { outcome: RegressorKind::PolynomialLogistic { degree: 0 }, ..DrConfig::default() };
    let e = oracle_surface(propensity);
    let u = fit_dr_marginal_with(&data, 1, 12.0, &e, &cfg).unwrap();
    let n = data.n() as f64;
    let est: f64 = u.eval_dataset(&data).iter().sum::<f64>() / n;
    let truth: f64 = (0..data.n()).map(|i| u1_truth(data.x_row(i))).sum::<f64>() / n;
    assert!((est - truth).abs() < 0.02, "{est} vs {truth}");
}

#[test]
fn error_shrinks_with_sample_size() {
    let errs: Vec<f64> = [1024, 2048, 4096, 8192]
        .iter()
        .map(|&n| {
            // average over a few samples so one lucky draw does not dominate
            (0..3)
                .map(|r| {
                    let data = linear(n, 100 + r);
                    let u = fit_dr_marginal(&data, 1, 12.0, &DrConfig::default()).unwrap();
                    mae(&data, |x| u.eval(x), u1_truth)
                })
                .sum::<f64>()
                / 3.0
        })
        .collect();
    let inversions = errs.windows(2).filter(|w| w[1] > w[0]).count();
    assert!(inversions <= 1, "{errs:?}");
    assert!(errs[3] < errs[0], "{errs:?}");
}

#[test]
fn margins_roughly_monotone_in_threshold() {
    let data = linear(4096, 5);
    let cfg = DrConfig::default();
    let lo = fit_dr_marginal(&data, 0, 10.0, &cfg).unwrap();
    let hi = fit_dr_marginal(&data, 0, 12.0, &cfg).unwrap();
    for i in 0..data.n() {
        let x = data.x_row(i);
        assert!(hi.eval(x) >= lo.eval(x) - 0.05);
    }
}

#[test]
fn fits_are_reproducible() {
    let data = linear(2048, 6);
    let cfg = DrConfig { cross_fit: true, seed: 8, ..DrConfig::default() };
    let a = fit_dr_marginal(&data, 0, 10.0, &cfg).unwrap().eval_dataset(&data);
    let b = fit_dr_marginal(&data, 0, 10.0, &cfg).unwrap().eval_dataset(&data);
    assert_eq!(a, b);
    assert!(a.iter().all(|&p| (1e-4..=1.0 - 1e-4).contains(&p)));
}
