//! Probability-valued regressors.
//!
//! GLM fits use a polynomial design on standardised covariates. Binary
//! targets are fitted by penalised IRLS; bounded-real targets (which may leave
//! `[0, 1]`) by least squares through the logistic link with
//! Levenberg–Marquardt steps. The small ridge on non-intercept coefficients
//! only matters under separation.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GpnError, Result};
use crate::rng;

const RIDGE: f64 = 1e-4;
const MAX_IRLS: usize = 100;
const MAX_LM: usize = 300;

/// Regressor family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegressorKind {
    LinearLogistic,
    /// All monomials up to total `degree`; degree 0 is a constant model.
    PolynomialLogistic { degree: usize },
    Mlp {
        hidden: Vec<usize>,
        epochs: usize,
        learning_rate: f64,
        batch_size: usize,
        seed: u64,
    },
}

impl Default for RegressorKind {
    fn default() -> Self {
        RegressorKind::PolynomialLogistic { degree: 2 }
    }
}

impl RegressorKind {
    pub fn mlp_default(seed: u64) -> Self {
        RegressorKind::Mlp {
            hidden: vec![64, 64],
            epochs: 200,
            learning_rate: 1e-3,
            batch_size: 256,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            RegressorKind::Mlp { hidden, epochs, learning_rate, batch_size, .. } => {
                if hidden.iter().any(|&h| h == 0)
                    || *epochs == 0
                    || !(*learning_rate > 0.0 && learning_rate.is_finite())
                    || *batch_size == 0
                {
                    return Err(GpnError::Domain(
                        "mlp hyperparameters must be positive".into(),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// What the regressor is asked to predict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    /// 0/1 responses; fitted by maximum likelihood.
    BinaryProbability,
    /// Real responses whose conditional mean lies in `[0, 1]`; least squares.
    BoundedReal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressorSpec {
    pub kind: RegressorKind,
    pub target: Target,
}

impl RegressorSpec {
    pub fn new(kind: RegressorKind, target: Target) -> Self {
        Self { kind, target }
    }
}

pub(crate) fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Standardisation plus polynomial expansion.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Design {
    mean: Vec<f64>,
    scale: Vec<f64>,
    monomials: Vec<Vec<usize>>,
}

impl Design {
    fn fit(x: &[f64], d: usize, degree: usize) -> Self {
        let n = if d == 0 { 0 } else { x.len() / d };
        let mut mean = vec![0.0; d];
        let mut scale = vec![1.0; d];
        for j in 0..d {
            let m = (0..n).map(|i| x[i * d + j]).sum::<f64>() / n as f64;
            let v = (0..n).map(|i| (x[i * d + j] - m).powi(2)).sum::<f64>() / n as f64;
            mean[j] = m;
            scale[j] = if v > 1e-24 { v.sqrt() } else { 1.0 };
        }
        let mut monomials = Vec::new();
        let mut stack: Vec<(Vec<usize>, usize)> = vec![(Vec::new(), 0)];
        while let Some((m, start)) = stack.pop() {
            if !m.is_empty() {
                monomials.push(m.clone());
            }
            if m.len() < degree {
                for j in (start..d).rev() {
                    let mut next = m.clone();
                    next.push(j);
                    stack.push((next, j));
                }
            }
        }
        monomials.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
        Self { mean, scale, monomials }
    }

    /// Number of columns including the intercept.
    fn width(&self) -> usize {
        1 + self.monomials.len()
    }

    fn row(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.push(1.0);
        for m in &self.monomials {
            out.push(m.iter().map(|&j| (x[j] - self.mean[j]) / self.scale[j]).product());
        }
    }

    fn matrix(&self, x: &[f64], d: usize, n: usize) -> DMatrix<f64> {
        let p = self.width();
        let mut buf = Vec::with_capacity(p);
        let mut m = DMatrix::zeros(n, p);
        for i in 0..n {
            self.row(&x[i * d..(i + 1) * d], &mut buf);
            for (j, v) in buf.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        m
    }
}

/// A fitted probability model.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Fitted {
    Constant(f64),
    Glm { design: Design, beta: Vec<f64> },
    Mlp(Mlp),
}

impl Fitted {
    pub(crate) fn predict(&self, x: &[f64]) -> f64 {
        match self {
            Fitted::Constant(p) => *p,
            Fitted::Glm { design, beta } => {
                let mut row = Vec::with_capacity(beta.len());
                design.row(x, &mut row);
                sigmoid(row.iter().zip(beta).map(|(a, b)| a * b).sum())
            }
            Fitted::Mlp(m) => m.predict(x),
        }
    }

    /// Intercept and slopes on the original covariate scale, for
    /// degree-one GLMs.
    pub(crate) fn linear_coefficients(&self) -> Option<Vec<f64>> {
        match self {
            Fitted::Glm { design, beta } if design.monomials.iter().all(|m| m.len() == 1) => {
                let mut out = vec![beta[0]];
                for (k, m) in design.monomials.iter().enumerate() {
                    let j = m[0];
                    let slope = beta[k + 1] / design.scale[j];
                    out[0] -= slope * design.mean[j];
                    out.push(slope);
                }
                Some(out)
            }
            _ => None,
        }
    }
}

/// Fit `spec` to rows of `x` (row-major, `d` columns) and responses `y`.
pub(crate) fn fit(spec: &RegressorSpec, x: &[f64], d: usize, y: &[f64]) -> Result<Fitted> {
    spec.kind.validate()?;
    let n = y.len();
    if n == 0 {
        return Err(GpnError::EmptyInput("no rows to fit"));
    }
    if spec.target == Target::BinaryProbability {
        if y.iter().any(|&v| v != 0.0 && v != 1.0) {
            return Err(GpnError::Fit("binary target must be 0/1".into()));
        }
        if y.iter().all(|&v| v == y[0]) {
            return Ok(Fitted::Constant(y[0]));
        }
    }
    let degree = match &spec.kind {
        RegressorKind::LinearLogistic => 1,
        RegressorKind::PolynomialLogistic { degree } => *degree,
        RegressorKind::Mlp { hidden, epochs, learning_rate, batch_size, seed } => {
            let cfg = MlpConfig {
                hidden: hidden.clone(),
                epochs: *epochs,
                lr: *learning_rate,
                batch: *batch_size,
                seed: *seed,
                binary: spec.target == Target::BinaryProbability,
            };
            return Mlp::train(&cfg, x, d, y).map(Fitted::Mlp);
        }
    };
    let design = Design::fit(x, d, if d == 0 { 0 } else { degree });
    let xm = design.matrix(x, d, n);
    let beta = match spec.target {
        Target::BinaryProbability => irls(&xm, y)?,
        Target::BoundedReal => sigmoid_least_squares(&xm, y)?,
    };
    Ok(Fitted::Glm { design, beta: beta.iter().copied().collect() })
}

fn logit_of_mean(y: &[f64]) -> f64 {
    let m = (y.iter().sum::<f64>() / y.len() as f64).clamp(1e-3, 1.0 - 1e-3);
    (m / (1.0 - m)).ln()
}

fn penalty(p: usize, n: usize) -> DVector<f64> {
    let mut v = DVector::from_element(p, RIDGE * n as f64);
    v[0] = 0.0;
    v
}

fn solve_spd(a: DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    if let Some(ch) = a.clone().cholesky() {
        return Ok(ch.solve(b));
    }
    a.lu()
        .solve(b)
        .ok_or_else(|| GpnError::Fit("singular normal equations".into()))
}

/// `Xᵀ diag(w) X`.
fn weighted_gram(x: &DMatrix<f64>, w: &DVector<f64>) -> DMatrix<f64> {
    let mut xw = x.clone();
    for (i, mut row) in xw.row_iter_mut().enumerate() {
        row *= w[i];
    }
    x.tr_mul(&xw)
}

fn logistic_objective(x: &DMatrix<f64>, y: &[f64], beta: &DVector<f64>, pen: &DVector<f64>) -> f64 {
    let eta = x * beta;
    let ll: f64 = eta
        .iter()
        .zip(y)
        .map(|(&t, &yi)| {
            // log(1 + e^t) computed without overflow
            let softplus = if t > 0.0 { t + (-t).exp().ln_1p() } else { t.exp().ln_1p() };
            yi * t - softplus
        })
        .sum();
    ll - 0.5 * beta.iter().zip(pen.iter()).map(|(b, l)| l * b * b).sum::<f64>()
}

/// Penalised logistic regression by Newton–Raphson with step halving.
fn irls(x: &DMatrix<f64>, y: &[f64]) -> Result<DVector<f64>> {
    let (n, p) = x.shape();
    let pen = penalty(p, n);
    let mut beta = DVector::zeros(p);
    beta[0] = logit_of_mean(y);
    let mut obj = logistic_objective(x, y, &beta, &pen);
    for _ in 0..MAX_IRLS {
        let eta = x * &beta;
        let mu = eta.map(sigmoid);
        let resid = DVector::from_iterator(n, mu.iter().zip(y).map(|(m, yi)| yi - m));
        let w = mu.map(|m| (m * (1.0 - m)).max(1e-12));
        let grad = x.tr_mul(&resid) - pen.component_mul(&beta);
        let hess = weighted_gram(x, &w) + DMatrix::from_diagonal(&pen);
        let step = solve_spd(hess, &grad)?;
        let mut t = 1.0;
        loop {
            let cand = &beta + &step * t;
            let c_obj = logistic_objective(x, y, &cand, &pen);
            if c_obj >= obj - 1e-12 * obj.abs() {
                beta = cand;
                obj = c_obj;
                break;
            }
            t *= 0.5;
            if t < 1e-10 {
                return Err(GpnError::Fit("logistic line search failed".into()));
            }
        }
        if (step * t).amax() < 1e-9 {
            return Ok(beta);
        }
    }
    Err(GpnError::Fit(format!("logistic regression did not converge in {MAX_IRLS} iterations")))
}

fn ls_objective(x: &DMatrix<f64>, y: &[f64], beta: &DVector<f64>, pen: &DVector<f64>) -> f64 {
    let eta = x * beta;
    let rss: f64 = eta.iter().zip(y).map(|(&t, &yi)| (yi - sigmoid(t)).powi(2)).sum();
    0.5 * rss + 0.5 * beta.iter().zip(pen.iter()).map(|(b, l)| l * b * b).sum::<f64>()
}

/// Least squares through the logistic link (Levenberg–Marquardt).
fn sigmoid_least_squares(x: &DMatrix<f64>, y: &[f64]) -> Result<DVector<f64>> {
    if y.iter().any(|v| !v.is_finite()) {
        return Err(GpnError::Fit("non-finite regression target".into()));
    }
    let (n, p) = x.shape();
    let pen = penalty(p, n);
    let mut beta = DVector::zeros(p);
    beta[0] = logit_of_mean(y);
    let mut obj = ls_objective(x, y, &beta, &pen);
    let mut lambda = 1e-3;
    for _ in 0..MAX_LM {
        let eta = x * &beta;
        let mu = eta.map(sigmoid);
        let w = mu.map(|m| m * (1.0 - m));
        let resid = DVector::from_iterator(n, (0..n).map(|i| (y[i] - mu[i]) * w[i]));
        let grad = x.tr_mul(&resid) - pen.component_mul(&beta);
        let jtj = weighted_gram(x, &w.map(|v| v * v)) + DMatrix::from_diagonal(&pen);
        let mut accepted = false;
        while lambda < 1e12 {
            let mut a = jtj.clone();
            for j in 0..p {
                a[(j, j)] += lambda * jtj[(j, j)].max(1e-12);
            }
            let step = solve_spd(a, &grad)?;
            let cand = &beta + &step;
            let c_obj = ls_objective(x, y, &cand, &pen);
            if c_obj <= obj {
                let done = obj - c_obj <= 1e-14 * obj.max(1e-300) || step.amax() < 1e-10;
                beta = cand;
                obj = c_obj;
                lambda = (lambda / 3.0).max(1e-12);
                accepted = true;
                if done {
                    return Ok(beta);
                }
                break;
            }
            lambda *= 4.0;
        }
        if !accepted {
            // no descent direction left at machine precision
            return Ok(beta);
        }
    }
    Ok(beta)
}

struct MlpConfig {
    hidden: Vec<usize>,
    epochs: usize,
    lr: f64,
    batch: usize,
    seed: u64,
    binary: bool,
}

#[derive(Debug, Clone, PartialEq)]
struct Layer {
    w: Vec<f64>,
    b: Vec<f64>,
    fan_in: usize,
}

/// Share of rows held out for early stopping.
const MLP_HOLDOUT: f64 = 0.1;
/// Epochs without validation improvement before training stops.
const MLP_PATIENCE: usize = 20;

/// ReLU network with a sigmoid output unit, trained with Adam and early
/// stopping on a seeded holdout.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Mlp {
    mean: Vec<f64>,
    scale: Vec<f64>,
    layers: Vec<Layer>,
}

impl Mlp {
    fn train(cfg: &MlpConfig, x: &[f64], d: usize, y: &[f64]) -> Result<Self> {
        let n = y.len();
        let design = Design::fit(x, d, 1);
        let mut r = rng::stream(cfg.seed);
        let mut sizes = vec![d];
        sizes.extend(&cfg.hidden);
        sizes.push(1);
        let layers = sizes
            .windows(2)
            .map(|w| {
                let bound = (6.0 / w[0].max(1) as f64).sqrt();
                Layer {
                    w: (0..w[0] * w[1]).map(|_| r.random_range(-bound..bound)).collect(),
                    b: vec![0.0; w[1]],
                    fan_in: w[0],
                }
            })
            .collect();
        let mut net = Mlp { mean: design.mean, scale: design.scale, layers };
        let xs: Vec<f64> = (0..n)
            .flat_map(|i| net.standardise(&x[i * d..(i + 1) * d]))
            .collect();

        let sizes_w: Vec<usize> = net.layers.iter().map(|l| l.w.len()).collect();
        let sizes_b: Vec<usize> = net.layers.iter().map(|l| l.b.len()).collect();
        let zeros = |s: &[usize]| s.iter().map(|&k| vec![0.0; k]).collect::<Vec<_>>();
        let (mut mw, mut vw, mut mb, mut vb) =
            (zeros(&sizes_w), zeros(&sizes_w), zeros(&sizes_b), zeros(&sizes_b));
        let (beta1, beta2, eps): (f64, f64, f64) = (0.9, 0.999, 1e-8);
        let mut t = 0i32;
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut r);
        let n_val = if n >= 50 { ((n as f64) * MLP_HOLDOUT).round() as usize } else { 0 };
        let val: Vec<usize> = order.split_off(n - n_val);
        let val_loss = |net: &Mlp| -> f64 {
            val.iter()
                .map(|&i| {
                    let p = sigmoid(net.forward(&xs[i * d..(i + 1) * d]).last().unwrap()[0]);
                    let p = p.clamp(1e-12, 1.0 - 1e-12);
                    if cfg.binary {
                        -(y[i] * p.ln() + (1.0 - y[i]) * (1.0 - p).ln())
                    } else {
                        (p - y[i]).powi(2)
                    }
                })
                .sum()
        };
        let mut best = (f64::INFINITY, net.clone());
        let mut stale = 0;
        for _ in 0..cfg.epochs {
            order.shuffle(&mut r);
            for chunk in order.chunks(cfg.batch) {
                let mut gw = zeros(&sizes_w);
                let mut gb = zeros(&sizes_b);
                for &i in chunk {
                    net.accumulate(&xs[i * d..(i + 1) * d], y[i], cfg.binary, &mut gw, &mut gb);
                }
                t += 1;
                let scale = 1.0 / chunk.len() as f64;
                let c1 = 1.0 - beta1.powi(t);
                let c2 = 1.0 - beta2.powi(t);
                for (k, layer) in net.layers.iter_mut().enumerate() {
                    let params = layer.w.iter_mut().zip(&gw[k]).zip(mw[k].iter_mut().zip(vw[k].iter_mut()));
                    let biases = layer.b.iter_mut().zip(&gb[k]).zip(mb[k].iter_mut().zip(vb[k].iter_mut()));
                    for ((p, g), (m, v)) in params.chain(biases) {
                        let g = g * scale;
                        *m = beta1 * *m + (1.0 - beta1) * g;
                        *v = beta2 * *v + (1.0 - beta2) * g * g;
                        *p -= cfg.lr * (*m / c1) / ((*v / c2).sqrt() + eps);
                    }
                }
            }
            if val.is_empty() {
                continue;
            }
            let loss = val_loss(&net);
            if loss < best.0 {
                best = (loss, net.clone());
                stale = 0;
            } else {
                stale += 1;
                if stale >= MLP_PATIENCE {
                    break;
                }
            }
        }
        if best.0.is_finite() {
            net = best.1;
        }
        if net.layers.iter().any(|l| l.w.iter().chain(&l.b).any(|v| !v.is_finite())) {
            return Err(GpnError::Fit("mlp training diverged".into()));
        }
        Ok(net)
    }

    fn standardise(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(j, v)| (v - self.mean[j]) / self.scale[j])
            .collect()
    }

    /// Activations of every layer; the last holds the output logit.
    fn forward(&self, input: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = vec![input.to_vec()];
        let last = self.layers.len() - 1;
        for (k, l) in self.layers.iter().enumerate() {
            let a = &acts[k];
            let out: Vec<f64> = (0..l.b.len())
                .map(|o| {
                    let s = l.b[o]
                        + l.w[o * l.fan_in..(o + 1) * l.fan_in]
                            .iter()
                            .zip(a)
                            .map(|(w, x)| w * x)
                            .sum::<f64>();
                    if k == last { s } else { s.max(0.0) }
                })
                .collect();
            acts.push(out);
        }
        acts
    }

    fn accumulate(
        &self,
        input: &[f64],
        target: f64,
        binary: bool,
        gw: &mut [Vec<f64>],
        gb: &mut [Vec<f64>],
    ) {
        let acts = self.forward(input);
        let p = sigmoid(acts[acts.len() - 1][0]);
        // d loss / d logit: cross-entropy for 0/1 targets, squared error otherwise
        let mut delta = vec![if binary { p - target } else { (p - target) * p * (1.0 - p) }];
        for k in (0..self.layers.len()).rev() {
            let l = &self.layers[k];
            let a = &acts[k];
            for (o, &dlt) in delta.iter().enumerate() {
                gb[k][o] += dlt;
                for (j, &aj) in a.iter().enumerate() {
                    gw[k][o * l.fan_in + j] += dlt * aj;
                }
            }
            if k > 0 {
                delta = (0..l.fan_in)
                    .map(|j| {
                        if a[j] <= 0.0 {
                            return 0.0;
                        }
                        delta.iter().enumerate().map(|(o, d)| d * l.w[o * l.fan_in + j]).sum()
                    })
                    .collect();
            }
        }
    }

    fn predict(&self, x: &[f64]) -> f64 {
        let acts = self.forward(&self.standardise(x));
        sigmoid(acts[acts.len() - 1][0])
    }
}
