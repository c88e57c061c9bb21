//! The four subcommands. Each returns a [`Report`]; writing files is left to
//! the caller.

use std::path::PathBuf;

use gpn_core::bounds::{rho_grid, DiagnosticCounts, Method};
use gpn_core::dgp::{
    generate, run_table1, run_table2, DgpCase, MarginalMode, Scenario, Table1Config, Table2Config,
};
use gpn_core::inference::subsample_sd;
use gpn_core::pipeline::{estimate_points, unit_bounds, BoundsPlan, UnitBounds};
use gpn_core::{
    copula_gpn_bounds, fh_bounds, find_rho_crossing, mono_bounds, point_identify_mono,
    sensitivity_curve, BoundInterval, BoundMethod, Copula, CopulaFamily, CopulaSpec, Dataset,
    MarginalPoint,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::manifest::Bundle;
use crate::table::{read_dataset, Cell, Table};

/// Outcome of a command before anything is written.
#[derive(Debug)]
pub struct Report {
    pub command: &'static str,
    pub parameters: Value,
    pub results: Value,
    pub bundle: Bundle,
    /// Text for standard output.
    pub stdout: String,
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn method_key(m: BoundMethod) -> &'static str {
    match m {
        BoundMethod::Fh => "fh",
        BoundMethod::Mono => "mono",
        BoundMethod::Conservative => "conservative",
        BoundMethod::Expert => "expert",
    }
}

fn parse_case(label: &str) -> Result<DgpCase> {
    DgpCase::from_label(label).ok_or_else(|| config_err(format!("unknown case `{label}`, expected a, b or c")))
}

fn bounds_plan(cfg: &RunConfig) -> Result<BoundsPlan> {
    Ok(BoundsPlan {
        monotonicity: cfg.monotonicity,
        conservative: Some(cfg.conservative_spec().map_err(config_err)?),
        expert: cfg.expert_spec().map_err(config_err)?,
    })
}

#[derive(Debug, Clone)]
pub struct SimulateParams {
    pub table: u8,
    pub n: usize,
    pub seeds: usize,
    pub oracle_marginals: bool,
    pub population_draws: usize,
}

/// Reproduce Table 1 (widths and errors per method and design) or Table 2
/// (copula misspecification).
pub fn simulate(p: &SimulateParams, cfg: &RunConfig) -> Result<Report> {
    if cfg.copula.family != CopulaFamily::Gaussian {
        return Err(config_err("simulate uses the gaussian working model; set copula.family to gaussian"));
    }
    if p.n < 2 || p.seeds == 0 || p.population_draws == 0 {
        return Err(config_err("--n must be at least 2 and --seeds, --population-draws positive"));
    }
    let t = cfg.thresholds().map_err(config_err)?;
    let mode = if p.oracle_marginals { MarginalMode::Oracle } else { MarginalMode::Estimated(cfg.dr_config()) };
    let parameters = json!({
        "table": p.table,
        "n": p.n,
        "seeds": p.seeds,
        "oracle_marginals": p.oracle_marginals,
        "population_draws": p.population_draws,
    });
    let [clo, chi] = cfg.copula.conservative;
    let mut bundle = Bundle::default();
    let results = match p.table {
        1 => {
            let t1 = Table1Config {
                n: p.n,
                replicates: p.seeds,
                thresholds: t,
                mode,
                conservative: (clo, chi),
                expert: cfg.copula.expert.map(|[a, b]| (a, b)),
                cases: DgpCase::ALL.to_vec(),
            };
            let out = run_table1(&t1, cfg.seed)?;
            let mut table = Table::new(&["method", "case", "mse_lb", "mse_ub", "width"]);
            for r in &out.rows {
                table.push(vec![
                    r.method.label().into(),
                    r.case.label().into(),
                    r.metrics.mse_lb.into(),
                    r.metrics.mse_ub.into(),
                    r.metrics.width.into(),
                ]);
            }
            let mut reps = Table::new(&["method", "case", "replicate", "mse_lb", "mse_ub", "width"]);
            for (mi, method) in BoundMethod::ALL.iter().enumerate() {
                for (k, case) in t1.cases.iter().enumerate() {
                    for (r, rep) in out.replicates[k].iter().enumerate() {
                        let m = rep[mi].1;
                        reps.push(vec![
                            method.label().into(),
                            case.label().into(),
                            (r as f64).into(),
                            m.mse_lb.into(),
                            m.mse_ub.into(),
                            m.width.into(),
                        ]);
                    }
                }
            }
            bundle.add_csv("table1.csv", &table);
            bundle.add_csv("table1_replicates.csv", &reps);
            serde_json::to_value(&out.rows).expect("serialisable rows")
        }
        2 => {
            let t2 = Table2Config {
                n: p.n,
                replicates: p.seeds,
                thresholds: t,
                mode,
                conservative: (clo, chi),
                expert_half_width: cfg.copula.expert_half_width,
                population_draws: p.population_draws,
                ..Table2Config::default()
            };
            let rows = run_table2(&t2, cfg.seed)?;
            let mut table = Table::new(&[
                "family", "tau", "rho", "true_mean_gpn", "fh_lb", "fh_ub", "fh_width", "cons_lb",
                "cons_ub", "cons_width", "expert_lb", "expert_ub", "expert_width",
            ]);
            for r in &rows {
                let mut row: Vec<Cell> =
                    vec![r.family.name().into(), r.tau.into(), r.rho.into(), r.true_mean_gpn.into()];
                for b in [r.fh, r.conservative, r.expert] {
                    row.extend([b.lower.into(), b.upper.into(), b.width().into()]);
                }
                table.push(row);
            }
            bundle.add_csv("table2.csv", &table);
            serde_json::to_value(&rows).expect("serialisable rows")
        }
        other => return Err(config_err(format!("--table must be 1 or 2, got {other}"))),
    };
    Ok(Report { command: "simulate", parameters, results, bundle, stdout: String::new() })
}

struct Estimate {
    points: Vec<MarginalPoint>,
    units: UnitBounds,
    summary: Vec<(BoundMethod, BoundInterval)>,
}

fn estimate(data: &Dataset, cfg: &RunConfig, plan: &BoundsPlan) -> gpn_core::Result<Estimate> {
    let t = cfg.thresholds()?;
    let points = estimate_points(data, &t, &cfg.dr_config())?;
    let units = unit_bounds(&points, plan)?;
    let summary = units.aggregate(&points, cfg.aggregation)?;
    Ok(Estimate { points, units, summary })
}

#[derive(Debug, Serialize)]
struct Diagnostics {
    rows: usize,
    treated: usize,
    controls: usize,
    covariates: usize,
    #[serde(flatten)]
    counts: DiagnosticCounts,
    subsample: Option<SubsampleDiagnostics>,
}

#[derive(Debug, Serialize)]
struct SubsampleDiagnostics {
    b: usize,
    m: usize,
    failed: usize,
}

#[derive(Debug, Clone)]
pub struct AnalyzeParams {
    pub data: PathBuf,
    pub subsample: bool,
}

/// Averaged bounds on an observed dataset, with subsampling sds.
pub fn analyze(p: &AnalyzeParams, cfg: &RunConfig) -> Result<Report> {
    let data = read_dataset(&p.data)?;
    let plan = bounds_plan(cfg)?;
    let est = estimate(&data, cfg, &plan)?;

    let sub = if p.subsample {
        let sp = cfg.subsample_plan();
        sp.size(data.n()).map_err(config_err)?;
        let res = subsample_sd(&data, &sp, |d, _| {
            let e = estimate(d, cfg, &plan)?;
            Ok(e.summary.iter().flat_map(|(_, b)| [b.lower, b.upper]).collect())
        })?;
        Some(res)
    } else {
        None
    };

    let mut bounds = Table::new(&["method", "lower", "upper", "width", "lower_sd", "upper_sd"]);
    let mut results = Vec::new();
    for (k, (m, b)) in est.summary.iter().enumerate() {
        let sd = |j: usize| sub.as_ref().map(|s| s.sd[2 * k + j]);
        bounds.push(vec![
            m.label().into(),
            b.lower.into(),
            b.upper.into(),
            b.width().into(),
            sd(0).into(),
            sd(1).into(),
        ]);
        results.push(json!({
            "method": m.label(),
            "lower": b.lower,
            "upper": b.upper,
            "lower_sd": sd(0),
            "upper_sd": sd(1),
        }));
    }

    let methods: Vec<BoundMethod> = est.summary.iter().map(|s| s.0).collect();
    let mut header = vec!["unit".to_string(), "u1".into(), "u0".into(), "u0_at_c1".into()];
    for m in &methods {
        header.push(format!("{}_lower", method_key(*m)));
        header.push(format!("{}_upper", method_key(*m)));
    }
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut per_unit = Table::new(&header_refs);
    for (i, pt) in est.points.iter().enumerate() {
        let mut row: Vec<Cell> =
            vec![(i as f64).into(), pt.u1().into(), pt.u0().into(), pt.u0_at_c1().into()];
        for m in &methods {
            let b = est.units.get(*m).expect("summarised method")[i];
            row.extend([b.lower.into(), b.upper.into()]);
        }
        per_unit.push(row);
    }

    let diagnostics = Diagnostics {
        rows: data.n(),
        treated: data.treated(),
        controls: data.n() - data.treated(),
        covariates: data.d(),
        counts: est.units.diagnostics,
        subsample: sub.as_ref().map(|s| SubsampleDiagnostics { b: s.total, m: s.m, failed: s.failed }),
    };

    let mut bundle = Bundle::default();
    bundle.add_csv("bounds.csv", &bounds);
    bundle.add_csv("per_unit_bounds.csv", &per_unit);
    bundle.add_json("diagnostics.json", &diagnostics);
    let stdout = String::from_utf8(bounds.to_csv()).expect("csv is utf-8");
    Ok(Report {
        command: "analyze",
        parameters: json!({
            "data": p.data.file_name().map(|f| f.to_string_lossy().into_owned()),
            "subsample": p.subsample,
        }),
        results: json!({ "bounds": results, "diagnostics": diagnostics }),
        bundle,
        stdout,
    })
}

#[derive(Debug, Clone)]
pub enum SensitivitySource {
    Data(PathBuf),
    Simulated { case: String, n: usize, oracle_marginals: bool },
}

#[derive(Debug, Clone)]
pub struct SensitivityParams {
    pub source: SensitivitySource,
    /// `(lo, hi, count)`; a family-specific default when absent.
    pub grid: Option<(f64, f64, usize)>,
}

fn default_grid(family: CopulaFamily) -> (f64, f64, usize) {
    match family {
        CopulaFamily::Clayton => (0.0, 20.0, 201),
        CopulaFamily::Gumbel => (1.0, 20.0, 191),
        _ => (-1.0, 1.0, 201),
    }
}

#[derive(Debug, Clone, Serialize)]
struct Crossing {
    method: &'static str,
    bound: &'static str,
    level: f64,
    /// Parameter where the averaged GPN crosses `level`; `None` if it never
    /// does on the grid.
    rho: Option<f64>,
}

/// Averaged GPN over a grid of copula parameters and the parameters at which
/// it crosses each averaged bound.
pub fn sensitivity(p: &SensitivityParams, cfg: &RunConfig) -> Result<Report> {
    let family = cfg.copula.family;
    let (lo, hi, count) = p.grid.unwrap_or_else(|| default_grid(family));
    if count == 0 || lo > hi || (count > 1 && lo == hi) {
        return Err(config_err(format!("invalid grid {lo} {hi} {count}")));
    }
    for v in [lo, hi] {
        Copula::new(family, v).map_err(config_err)?;
    }
    let plan = bounds_plan(cfg)?;
    let t = cfg.thresholds().map_err(config_err)?;
    let (points, source) = match &p.source {
        SensitivitySource::Data(path) => {
            let data = read_dataset(path)?;
            let source = json!({ "data": path.file_name().map(|f| f.to_string_lossy().into_owned()) });
            (estimate_points(&data, &t, &cfg.dr_config())?, source)
        }
        SensitivitySource::Simulated { case, n, oracle_marginals } => {
            let case = parse_case(case)?;
            if *n < 2 {
                return Err(config_err("--n must be at least 2"));
            }
            let scenario = Scenario::standard(case);
            let sim = generate(&scenario, *n, cfg.seed)?;
            let points = if *oracle_marginals {
                (0..sim.data.n())
                    .map(|i| scenario.oracle_point(sim.data.x_row(i), &t))
                    .collect::<gpn_core::Result<Vec<_>>>()?
            } else {
                estimate_points(&sim.data, &t, &cfg.dr_config())?
            };
            let source = json!({ "case": case.label(), "n": n, "oracle_marginals": oracle_marginals });
            (points, source)
        }
    };
    let grid = rho_grid(lo, hi, count);
    let curve = sensitivity_curve(&points, family, &grid, cfg.aggregation)?;
    let summary = unit_bounds(&points, &plan)?.aggregate(&points, cfg.aggregation)?;
    let mut crossings = Vec::new();
    for (m, b) in &summary {
        for (side, level) in [("lower", b.lower), ("upper", b.upper)] {
            crossings.push(Crossing { method: m.label(), bound: side, level, rho: find_rho_crossing(&curve, level)? });
        }
    }

    let mut table = Table::new(&["rho", "avg_gpn"]);
    for &(r, v) in curve.points() {
        table.push(vec![r.into(), v.into()]);
    }
    let report = json!({
        "family": family,
        "aggregation": cfg.aggregation,
        "crossings": crossings,
    });
    let mut bundle = Bundle::default();
    bundle.add_csv("sensitivity.csv", &table);
    bundle.add_json("crossings.json", &report);
    Ok(Report {
        command: "sensitivity",
        parameters: json!({ "source": source, "grid": [lo, hi, count] }),
        results: json!({ "curve": curve.points(), "crossings": crossings }),
        bundle,
        stdout: String::new(),
    })
}

#[derive(Debug, Clone)]
pub struct BoundsParams {
    pub u1: f64,
    pub u0: f64,
    pub u0_at_c1: Option<f64>,
    pub range: Option<(f64, f64)>,
    pub family: Option<CopulaFamily>,
}

/// Every bound formula at a single marginal point.
pub fn bounds(p: &BoundsParams, cfg: &RunConfig) -> Result<Report> {
    let m = MarginalPoint::new(p.u1, p.u0, p.u0_at_c1).map_err(config_err)?;
    let mut rows: Vec<(&str, f64, f64)> = Vec::new();
    let fh = fh_bounds(&m).value;
    rows.push((Method::Fh.label(), fh.lower, fh.upper));
    if p.u0_at_c1.is_some() {
        let b = mono_bounds(&m)?.value;
        rows.push((Method::Mono.label(), b.lower, b.upper));
    }
    if let Some((lo, hi)) = p.range {
        let family = p.family.unwrap_or(cfg.copula.family);
        let spec = CopulaSpec::new(family, lo, hi).map_err(config_err)?;
        let b = copula_gpn_bounds(&m, &spec)?.value;
        rows.push((Method::Copula.label(), b.lower, b.upper));
    }
    let point = point_identify_mono(p.u1, p.u0)?.value;
    rows.push((Method::Point.label(), point, point));

    let mut table = Table::new(&["method", "lower", "upper"]);
    for &(name, lo, hi) in &rows {
        table.push(vec![name.into(), lo.into(), hi.into()]);
    }
    let mut bundle = Bundle::default();
    bundle.add_csv("bounds.csv", &table);
    let stdout = String::from_utf8(table.to_csv()).expect("csv is utf-8");
    let results: Vec<Value> =
        rows.iter().map(|(n, l, u)| json!({ "method": n, "lower": l, "upper": u })).collect();
    Ok(Report {
        command: "bounds",
        parameters: json!({
            "u1": p.u1,
            "u0": p.u0,
            "u0_at_c1": p.u0_at_c1,
            "range": p.range.map(|(a, b)| [a, b]),
            "family": p.family,
        }),
        results: Value::Array(results),
        bundle,
        stdout,
    })
}
