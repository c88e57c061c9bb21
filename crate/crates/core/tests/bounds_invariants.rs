//! Structural properties of the bound formulas, checked against brute-force
//! couplings and Monte Carlo.

use gpn_core::bounds::{rho_grid, DENOMINATOR_GUARD};
use gpn_core::{
    copula_gpn, copula_gpn_bounds, fh_bounds, interval_gpn, mono_bounds, point_identify_mono,
    sample_copula_pair, sensitivity_curve, Aggregation, Copula, CopulaFamily, CopulaSpec,
    IntervalGpnInputs, IntervalWeights, MarginalPoint,
};
use proptest::prelude::*;

const N_ATOMS: usize = 20;
const FORBIDDEN: f64 = 1e6;

/// Minimum-cost perfect matching of a square cost matrix (Hungarian method
/// with potentials). Returns `assignment[row] = column`.
fn min_cost_assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let inf = f64::INFINITY;
    let (mut u, mut v) = (vec![0.0; n + 1], vec![0.0; n + 1]);
    let (mut p, mut way) = (vec![0usize; n + 1], vec![0usize; n + 1]);
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![0; n];
    for j in 1..=n {
        out[p[j] - 1] = j - 1;
    }
    out
}

/// Range of `P(Y0 < c0, Y1 >= c1) / P(Y1 >= c1)` over all couplings of two
/// equally weighted atom sets, optionally restricted to `y1 >= y0`.
fn coupling_range(y1: &[f64], y0: &[f64], c0: f64, c1: f64, monotone: bool) -> (f64, f64) {
    let n = y1.len();
    let hit = |i: usize, j: usize| f64::from(y1[i] >= c1 && y0[j] < c0);
    let allowed = |i: usize, j: usize| !monotone || y1[i] >= y0[j];
    let solve = |sign: f64| {
        let cost: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if allowed(i, j) { sign * hit(i, j) } else { FORBIDDEN })
                    .collect()
            })
            .collect();
        let a = min_cost_assignment(&cost);
        assert!(a.iter().enumerate().all(|(i, &j)| allowed(i, j)), "no feasible coupling");
        a.iter().enumerate().map(|(i, &j)| hit(i, j)).sum::<f64>()
    };
    let b = y1.iter().filter(|&&v| v >= c1).count() as f64;
    (solve(1.0) / b, solve(-1.0) / b)
}

/// Atoms on `[0, 1)` at the cell midpoints; with thresholds `k/20` the
/// discrete margins equal the continuous ones exactly.
fn uniform_atoms() -> Vec<f64> {
    (0..N_ATOMS).map(|i| (i as f64 + 0.5) / N_ATOMS as f64).collect()
}

#[test]
fn fh_bounds_are_attained_by_couplings() {
    let atoms = uniform_atoms();
    for k1 in 0..N_ATOMS {
        for k0 in 0..=N_ATOMS {
            let (u1, u0) = (k1 as f64 / 20.0, k0 as f64 / 20.0);
            let (lo, hi) = coupling_range(&atoms, &atoms, u0, u1, false);
            let fh = fh_bounds(&MarginalPoint::new(u1, u0, None).unwrap()).value;
            assert!((fh.lower - lo).abs() < 1e-12, "u1={u1} u0={u0}: {lo} vs {}", fh.lower);
            assert!((fh.upper - hi).abs() < 1e-12, "u1={u1} u0={u0}: {hi} vs {}", fh.upper);
        }
    }
}

#[test]
fn fh_example_against_couplings() {
    let atoms = uniform_atoms();
    let (lo, hi) = coupling_range(&atoms, &atoms, 0.3, 0.6, false);
    assert!((lo - 0.0).abs() < 0.05 && (hi - 0.75).abs() < 0.05);
}

/// Atoms with `P(Y1 <= 12) = 0.6`, `P(Y0 < 10) = 0.3`, `P(Y0 <= 12) = 0.7`;
/// the treated atoms sit just below `c1` or above every control atom, so
/// only the threshold probabilities constrain monotone couplings.
fn monotone_atoms() -> (Vec<f64>, Vec<f64>) {
    let mut y0: Vec<f64> = (0..6).map(|k| 9.0 + 0.1 * k as f64).collect();
    y0.extend((0..8).map(|k| 10.0 + 0.2 * k as f64));
    y0.extend((0..6).map(|k| 12.1 + 0.1 * k as f64));
    let y1: Vec<f64> = (0..20).map(|k| if k < 12 { 11.9 } else { 13.0 }).collect();
    (y1, y0)
}

#[test]
fn mono_upper_against_monotone_couplings() {
    let (y1, y0) = monotone_atoms();
    let frac = |xs: &[f64], f: &dyn Fn(f64) -> bool| xs.iter().filter(|&&v| f(v)).count() as f64 / 20.0;
    let u1 = frac(&y1, &|v| v < 12.0);
    let u0 = frac(&y0, &|v| v < 10.0);
    let u0_c1 = frac(&y0, &|v| v < 12.0);
    assert_eq!((u1, u0, u0_c1), (0.6, 0.3, 0.7));
    let (lo, hi) = coupling_range(&y1, &y0, 10.0, 12.0, true);
    let b = mono_bounds(&MarginalPoint::new(u1, u0, Some(u0_c1)).unwrap()).unwrap().value;
    assert!((b.upper - 0.25).abs() < 1e-15);
    assert!((hi - b.upper).abs() < 1e-12, "{hi}");
    assert!((lo - b.lower).abs() < 1e-12, "{lo}");
}

#[test]
fn point_identification_against_monotone_couplings() {
    // c0 = c1 = 10, P(Y1 < 10) = 0.4, P(Y0 < 10) = 0.7
    let y0: Vec<f64> = (0..20).map(|k| if k < 14 { 8.0 + 0.1 * k as f64 } else { 10.0 + 0.1 * k as f64 }).collect();
    let y1: Vec<f64> = (0..20).map(|k| if k < 8 { y0[k] + 0.01 } else { 10.0 + 0.1 * k as f64 }).collect();
    let (lo, hi) = coupling_range(&y1, &y0, 10.0, 10.0, true);
    let p = point_identify_mono(0.4, 0.7).unwrap().value;
    assert!((p - 0.5).abs() < 1e-15);
    assert!((lo - p).abs() < 1e-12 && (hi - p).abs() < 1e-12, "{lo} {hi}");
}

#[test]
fn gaussian_full_range_equals_fh_on_grid() {
    let spec = CopulaSpec::gaussian(-1.0, 1.0).unwrap();
    let mut worst = 0.0f64;
    for i in 1..=99 {
        for j in 1..=99 {
            let m = MarginalPoint::new(i as f64 / 100.0, j as f64 / 100.0, None).unwrap();
            let fh = fh_bounds(&m).value;
            let c = copula_gpn_bounds(&m, &spec).unwrap().value;
            worst = worst.max((fh.lower - c.lower).abs()).max((fh.upper - c.upper).abs());
        }
    }
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn copula_gpn_nonincreasing_in_parameter() {
    let grids = [
        (CopulaFamily::Gaussian, rho_grid(-1.0, 1.0, 41)),
        (CopulaFamily::Clayton, rho_grid(0.0, 20.0, 41)),
        (CopulaFamily::Gumbel, rho_grid(1.0, 20.0, 41)),
    ];
    for (family, grid) in &grids {
        for i in 1..20 {
            for j in 1..20 {
                let m = MarginalPoint::new(i as f64 / 20.0, j as f64 / 20.0, None).unwrap();
                let vals: Vec<f64> = grid
                    .iter()
                    .map(|&p| copula_gpn(&m, &Copula::new(*family, p).unwrap()).unwrap().value)
                    .collect();
                assert!(vals.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{family} {i} {j}");
            }
        }
    }
}

#[test]
fn sensitivity_curve_is_nonincreasing() {
    let units: Vec<MarginalPoint> = (1..30)
        .map(|k| MarginalPoint::new((k as f64 * 0.37) % 0.95, (k as f64 * 0.61) % 0.97, None).unwrap())
        .collect();
    for agg in [Aggregation::UnitMean, Aggregation::SurvivalWeighted] {
        let c = sensitivity_curve(&units, CopulaFamily::Gaussian, &rho_grid(-1.0, 1.0, 101), agg).unwrap();
        assert!(c.points().windows(2).all(|w| w[1].1 <= w[0].1 + 1e-12));
    }
}

#[test]
fn interval_gpn_matches_monte_carlo() {
    // Y(0), Y(1) standard bivariate normal with correlation 0.5;
    // Y(0) in [-0.5, 0.5), Y(1) in [0, 1)
    let copula = Copula::gaussian(0.5).unwrap();
    let (lo0, hi0, lo1, hi1) = (-0.5f64, 0.5f64, 0.0f64, 1.0f64);
    let phi = gpn_core::normal::cdf;
    let gpn = |c0: f64, c1: f64| {
        let m = MarginalPoint::new(phi(c1), phi(c0), None).unwrap();
        copula_gpn(&m, &copula).unwrap().value
    };
    let inputs = IntervalGpnInputs {
        gpn_lo0_lo1: gpn(lo0, lo1),
        gpn_hi0_lo1: gpn(hi0, lo1),
        gpn_lo0_hi1: gpn(lo0, hi1),
        gpn_hi0_hi1: gpn(hi0, hi1),
        surv_lo1: 1.0 - phi(lo1),
        surv_hi1: 1.0 - phi(hi1),
    };
    let (value, w) = interval_gpn(&inputs).unwrap();
    assert_eq!(w.w1 - w.w2, 1.0);

    let pairs = sample_copula_pair(&copula, 1_000_000, 2024).unwrap();
    let (mut cond, mut hit) = (0usize, 0usize);
    for (y0, y1) in pairs {
        if (lo1..hi1).contains(&y1) {
            cond += 1;
            hit += usize::from((lo0..hi0).contains(&y0));
        }
    }
    let p = hit as f64 / cond as f64;
    let se = (p * (1.0 - p) / cond as f64).sqrt();
    assert!((value.value - p).abs() < 3.0 * se, "{} vs {p} ± {se}", value.value);
}

fn point() -> impl Strategy<Value = MarginalPoint> {
    (0.0f64..0.999, 0.0f64..=1.0, 0.0f64..=1.0).prop_map(|(u1, u0, extra)| {
        let u0_c1 = u0 + (1.0 - u0) * extra;
        MarginalPoint::new(u1, u0, Some(u0_c1)).unwrap()
    })
}

fn gaussian_range() -> impl Strategy<Value = (f64, f64)> {
    (-1.0f64..=1.0, -1.0f64..=1.0).prop_map(|(a, b)| (a.min(b), a.max(b)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn intervals_are_valid(m in point(), (lo, hi) in gaussian_range()) {
        let spec = CopulaSpec::gaussian(lo, hi).unwrap();
        for b in [
            fh_bounds(&m).value,
            mono_bounds(&m).unwrap().value,
            copula_gpn_bounds(&m, &spec).unwrap().value,
        ] {
            prop_assert!(0.0 <= b.lower && b.lower <= b.upper && b.upper <= 1.0);
        }
    }

    #[test]
    fn bounds_nest(m in point(), (lo, hi) in gaussian_range()) {
        let fh = fh_bounds(&m).value;
        let c = copula_gpn_bounds(&m, &CopulaSpec::gaussian(lo, hi).unwrap()).unwrap().value;
        prop_assert!(fh.lower <= c.lower + 1e-9 && c.upper <= fh.upper + 1e-9);
        let mono = mono_bounds(&m).unwrap().value;
        prop_assert_eq!(mono.lower, fh.lower);
        prop_assert!(mono.upper <= fh.upper + 1e-9);
    }

    #[test]
    fn truth_inside_any_containing_range(
        m in point(),
        rho in -1.0f64..=1.0,
        below in 0.0f64..=1.0,
        above in 0.0f64..=1.0,
    ) {
        let lo = rho - below * (rho + 1.0);
        let hi = rho + above * (1.0 - rho);
        let g = copula_gpn(&m, &Copula::gaussian(rho).unwrap()).unwrap().value;
        let b = copula_gpn_bounds(&m, &CopulaSpec::gaussian(lo, hi).unwrap()).unwrap().value;
        prop_assert!(b.contains(g, 1e-12), "{} not in {:?}", g, b);
    }

    #[test]
    fn archimedean_truth_inside_range(u1 in 0.0f64..0.999, u0 in 0.0f64..=1.0, theta in 0.0f64..15.0, w in 0.0f64..5.0) {
        let m = MarginalPoint::new(u1, u0, None).unwrap();
        let g = copula_gpn(&m, &Copula::new(CopulaFamily::Clayton, theta).unwrap()).unwrap().value;
        let spec = CopulaSpec::new(CopulaFamily::Clayton, (theta - w).max(0.0), theta + w).unwrap();
        prop_assert!(copula_gpn_bounds(&m, &spec).unwrap().value.contains(g, 1e-12));
        let g = copula_gpn(&m, &Copula::new(CopulaFamily::Gumbel, 1.0 + theta).unwrap()).unwrap().value;
        let spec = CopulaSpec::new(CopulaFamily::Gumbel, (1.0 + theta - w).max(1.0), 1.0 + theta + w).unwrap();
        prop_assert!(copula_gpn_bounds(&m, &spec).unwrap().value.contains(g, 1e-12));
    }

    #[test]
    fn coinciding_thresholds_collapse_mono(u1 in 0.0f64..0.999, gap in 0.0f64..=1.0) {
        let u = u1 + (1.0 - u1) * gap;
        let b = mono_bounds(&MarginalPoint::new(u1, u, Some(u)).unwrap()).unwrap().value;
        let p = point_identify_mono(u1, u).unwrap().value;
        prop_assert!((b.lower - p).abs() <= 1e-12 && (b.upper - p).abs() <= 1e-12);
    }

    #[test]
    fn interval_weights_differ_by_one(hi in 0.0f64..0.999, gap in 1e-6f64..1.0) {
        let lo = hi + (1.0 - hi) * gap;
        prop_assume!(lo > hi);
        let w = IntervalWeights::new(lo, hi).unwrap();
        prop_assert!((w.w1 - w.w2 - 1.0).abs() <= 1e-12);
        prop_assert!(w.w1 >= 1.0 && w.w2 >= 0.0);
    }

    #[test]
    fn guard_keeps_denominator_positive(u1 in (1.0 - DENOMINATOR_GUARD)..=1.0, u0 in 0.0f64..=1.0) {
        let m = MarginalPoint::guarded(u1, u0, None).unwrap();
        prop_assert!(m.treated_survival() >= DENOMINATOR_GUARD * (1.0 - 1e-9));
        let b = fh_bounds(&m).value;
        prop_assert!(b.lower.is_finite() && b.upper.is_finite());
    }
}
