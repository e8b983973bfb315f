//! Cost-weighted logistic regression fitted by full-batch gradient descent
//! with Armijo backtracking. The gradient is scaled per coordinate by a bound
//! on the Hessian diagonal so that the unpenalised bias and heavily penalised
//! weights share one step size.
//!
//! Objective over rows `i` with sample weight `w_i`, label `y_i` and logit
//! `z_i = theta . x_i + bias`:
//!
//! ```text
//! L = sum_i w_i C(y_i) log(1 + exp(-(2 y_i - 1) z_i)) / sum_i w_i + l2/2 |theta|^2
//! ```
//!
//! with `C(1) = 1 - c` and `C(0) = c`. The bias is not penalised.

use serde::{Deserialize, Serialize};

use crate::distributions::SampleSet;
use crate::error::{Error, Result};
use crate::measures::CostParam;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LabelChannel {
    Y,
    Ybar,
    /// `Ybar` on the rows with `Y = 1`.
    YbarGivenY1,
}

impl LabelChannel {
    pub fn name(self) -> &'static str {
        match self {
            LabelChannel::Y => "y",
            LabelChannel::Ybar => "ybar",
            LabelChannel::YbarGivenY1 => "ybar|y=1",
        }
    }

    /// Row indices and labels that make up this channel.
    pub fn rows(self, sample: &SampleSet) -> (Vec<usize>, Vec<u8>) {
        (0..sample.len())
            .filter(|&i| self != LabelChannel::YbarGivenY1 || sample.y[i] == 1)
            .map(|i| {
                let label = match self {
                    LabelChannel::Y => sample.y[i],
                    _ => sample.ybar[i],
                };
                (i, label)
            })
            .unzip()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub c: CostParam,
    pub l2: f64,
    pub max_iters: usize,
    pub grad_tol: f64,
    /// Recorded for reproducibility; the optimiser itself is deterministic.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            c: CostParam::HALF,
            l2: 1e-4,
            max_iters: 10_000,
            grad_tol: 1e-8,
            seed: 0,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return Err(Error::InvalidParameter(format!("l2 = {} must be nonnegative", self.l2)));
        }
        if !(self.grad_tol >= 0.0) {
            return Err(Error::InvalidParameter("grad_tol must be nonnegative".into()));
        }
        Ok(())
    }
}

/// `sigmoid(weights . x + bias)` over raw features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearScorer {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearScorer {
    pub fn logit(&self, x: &[f64]) -> f64 {
        self.bias + self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
    }

    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        sigmoid(self.logit(x))
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(t))` without overflow.
fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

/// The training objective over fixed rows; parameters are `[theta..., bias]`.
#[derive(Debug, Clone)]
pub struct LogisticObjective {
    x: Vec<Vec<f64>>,
    y: Vec<u8>,
    /// `w_i C(y_i) / sum w`.
    row_weight: Vec<f64>,
    l2: f64,
}

impl LogisticObjective {
    pub fn new(
        x: Vec<Vec<f64>>,
        y: Vec<u8>,
        sample_weights: Option<&[f64]>,
        c: CostParam,
        l2: f64,
    ) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::EmptySample);
        }
        if y.len() != x.len() {
            return Err(Error::LengthMismatch {
                expected: x.len(),
                got: y.len(),
            });
        }
        let w = |i: usize| sample_weights.map_or(1.0, |s| s[i]);
        let total: f64 = (0..x.len()).map(w).sum();
        if !(total > 0.0) {
            return Err(Error::InvalidParameter("sample weights sum to zero".into()));
        }
        let row_weight = (0..x.len())
            .map(|i| {
                let cost = if y[i] == 1 { 1.0 - c.get() } else { c.get() };
                w(i) * cost / total
            })
            .collect();
        Ok(LogisticObjective {
            x,
            y,
            row_weight,
            l2,
        })
    }

    pub fn dim(&self) -> usize {
        self.x[0].len()
    }

    fn logit(&self, params: &[f64], i: usize) -> f64 {
        let d = self.dim();
        params[d] + self.x[i].iter().zip(&params[..d]).map(|(a, b)| a * b).sum::<f64>()
    }

    fn penalty(&self, params: &[f64]) -> f64 {
        0.5 * self.l2 * params[..self.dim()].iter().map(|v| v * v).sum::<f64>()
    }

    pub fn value(&self, params: &[f64]) -> f64 {
        let data: f64 = (0..self.x.len())
            .map(|i| {
                let z = self.logit(params, i);
                let margin = if self.y[i] == 1 { -z } else { z };
                self.row_weight[i] * softplus(margin)
            })
            .sum();
        data + self.penalty(params)
    }

    pub fn value_and_gradient(&self, params: &[f64]) -> (f64, Vec<f64>) {
        let d = self.dim();
        let mut grad = vec![0.0; d + 1];
        let mut data = 0.0;
        for i in 0..self.x.len() {
            let z = self.logit(params, i);
            let label = f64::from(self.y[i]);
            let margin = if self.y[i] == 1 { -z } else { z };
            data += self.row_weight[i] * softplus(margin);
            let r = self.row_weight[i] * (sigmoid(z) - label);
            for (g, v) in grad[..d].iter_mut().zip(&self.x[i]) {
                *g += r * v;
            }
            grad[d] += r;
        }
        for j in 0..d {
            grad[j] += self.l2 * params[j];
        }
        (data + self.penalty(params), grad)
    }

    pub fn gradient(&self, params: &[f64]) -> Vec<f64> {
        self.value_and_gradient(params).1
    }

    /// Inverse of a bound on the Hessian diagonal, `1/4 sum w x_j^2 + l2`.
    fn diagonal_scaling(&self) -> Vec<f64> {
        let d = self.dim();
        let mut h = vec![0.0; d + 1];
        for (row, w) in self.x.iter().zip(&self.row_weight) {
            for (hj, v) in h[..d].iter_mut().zip(row) {
                *hj += 0.25 * w * v * v;
            }
            h[d] += 0.25 * w;
        }
        for hj in &mut h[..d] {
            *hj += self.l2;
        }
        h.into_iter()
            .map(|v| if v > 0.0 { 1.0 / v } else { 1.0 })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub scorer: LinearScorer,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after each accepted step, starting from the initial point.
    pub losses: Vec<f64>,
}

/// Minimises `objective` from the origin.
pub fn minimize(objective: &LogisticObjective, cfg: &TrainConfig) -> Result<(Vec<f64>, FitReport)> {
    cfg.validate()?;
    let d = objective.dim();
    let mut params = vec![0.0; d + 1];
    let (mut value, mut grad) = objective.value_and_gradient(&params);
    let mut losses = vec![value];
    let scaling = objective.diagonal_scaling();
    let mut step: f64 = 1.0;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iters {
        let norm2: f64 = grad.iter().map(|g| g * g).sum();
        if norm2.sqrt() <= cfg.grad_tol {
            converged = true;
            break;
        }
        iterations += 1;
        let direction: Vec<f64> = grad.iter().zip(&scaling).map(|(g, s)| g * s).collect();
        let decrease: f64 = grad.iter().zip(&direction).map(|(g, v)| g * v).sum();
        step = (step * 2.0).min(1e6);
        let accepted = loop {
            let trial: Vec<f64> = params
                .iter()
                .zip(&direction)
                .map(|(p, v)| p - step * v)
                .collect();
            let trial_value = objective.value(&trial);
            if trial_value <= value - 1e-4 * step * decrease {
                break Some((trial, trial_value));
            }
            step *= 0.5;
            if step < 1e-20 {
                break None;
            }
        };
        let Some((next, next_value)) = accepted else {
            // No decrease representable in floating point: at the optimum.
            converged = true;
            break;
        };
        if !next_value.is_finite() {
            return Err(Error::NonFinite { iterations });
        }
        params = next;
        (value, grad) = objective.value_and_gradient(&params);
        losses.push(value);
    }
    if !value.is_finite() {
        return Err(Error::NonFinite { iterations });
    }
    let scorer = LinearScorer {
        weights: params[..d].to_vec(),
        bias: params[d],
    };
    Ok((
        params,
        FitReport {
            scorer,
            iterations,
            converged,
            losses,
        },
    ))
}

/// Weighted per-column mean and population standard deviation; zero spread
/// maps to scale one.
fn standardization(x: &[Vec<f64>], w: impl Fn(usize) -> f64) -> (Vec<f64>, Vec<f64>) {
    let d = x[0].len();
    let total: f64 = (0..x.len()).map(&w).sum();
    let mut mean = vec![0.0; d];
    for (i, row) in x.iter().enumerate() {
        for j in 0..d {
            mean[j] += w(i) * row[j] / total;
        }
    }
    let mut var = vec![0.0; d];
    for (i, row) in x.iter().enumerate() {
        for j in 0..d {
            var[j] += w(i) * (row[j] - mean[j]).powi(2) / total;
        }
    }
    let scale = var
        .into_iter()
        .map(|v| if v > 0.0 { v.sqrt() } else { 1.0 })
        .collect();
    (mean, scale)
}

/// Fits on standardised features and reports weights on the raw scale.
pub fn fit_cs_logistic(
    sample: &SampleSet,
    channel: LabelChannel,
    cfg: &TrainConfig,
) -> Result<FitReport> {
    let (rows, labels) = channel.rows(sample);
    if rows.is_empty() {
        return Err(Error::EmptyChannel(channel.name().into()));
    }
    let weights: Option<Vec<f64>> = sample
        .weights
        .as_ref()
        .map(|w| rows.iter().map(|&i| w[i]).collect());
    let raw: Vec<Vec<f64>> = rows.iter().map(|&i| sample.x[i].clone()).collect();
    let d = sample.dim();
    let (mean, scale) = if d > 0 {
        standardization(&raw, |i| weights.as_ref().map_or(1.0, |w| w[i]))
    } else {
        (vec![], vec![])
    };
    let x: Vec<Vec<f64>> = raw
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(j, v)| (v - mean[j]) / scale[j])
                .collect()
        })
        .collect();
    let objective = LogisticObjective::new(x, labels, weights.as_deref(), cfg.c, cfg.l2)?;
    let (params, mut report) = minimize(&objective, cfg)?;

    let weights: Vec<f64> = (0..d).map(|j| params[j] / scale[j]).collect();
    let bias = params[d] - (0..d).map(|j| weights[j] * mean[j]).sum::<f64>();
    report.scorer = LinearScorer { weights, bias };
    Ok(report)
}

pub fn train_cs_logistic(
    sample: &SampleSet,
    channel: LabelChannel,
    cfg: &TrainConfig,
) -> Result<LinearScorer> {
    Ok(fit_cs_logistic(sample, channel, cfg)?.scorer)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sample(x: Vec<Vec<f64>>, y: Vec<u8>) -> SampleSet {
        let d = x.first().map_or(0, Vec::len);
        let names = (0..d).map(|j| format!("x{j}")).collect();
        let ybar = y.clone();
        SampleSet::new(names, x, y, ybar, None).unwrap()
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x: Vec<Vec<f64>> = (0..40).map(|_| (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
        let y: Vec<u8> = (0..40).map(|_| rng.gen_range(0..2)).collect();
        let obj = LogisticObjective::new(x, y, None, CostParam::new(0.3).unwrap(), 0.05).unwrap();
        for _ in 0..10 {
            let p: Vec<f64> = (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let g = obj.gradient(&p);
            for j in 0..4 {
                let h = 1e-6;
                let mut up = p.clone();
                let mut down = p.clone();
                up[j] += h;
                down[j] -= h;
                let fd = (obj.value(&up) - obj.value(&down)) / (2.0 * h);
                assert!((fd - g[j]).abs() <= 1e-5 * g[j].abs().max(1e-3));
            }
        }
    }

    #[test]
    fn separable_sample_is_fitted_exactly() {
        let x: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64 - 9.5]).collect();
        let y: Vec<u8> = (0..20).map(|i| u8::from(i >= 10)).collect();
        let s = sample(x, y);
        let m = train_cs_logistic(&s, LabelChannel::Y, &TrainConfig::default()).unwrap();
        for i in 0..20 {
            assert_eq!(m.predict_proba(&s.x[i]) > 0.5, s.y[i] == 1);
        }
    }

    #[test]
    fn heavy_penalty_predicts_prior() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x: Vec<Vec<f64>> = (0..200).map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
        let y: Vec<u8> = x.iter().map(|r| u8::from(r[0] + 0.3 > rng.gen_range(-1.0..1.0))).collect();
        let prior = y.iter().map(|&v| f64::from(v)).sum::<f64>() / 200.0;
        let s = sample(x, y);
        let cfg = TrainConfig { l2: 1e6, ..TrainConfig::default() };
        let m = train_cs_logistic(&s, LabelChannel::Y, &cfg).unwrap();
        assert!(m.weights.iter().all(|w| w.abs() < 1e-5));
        assert!((m.predict_proba(&[0.0, 0.0]) - prior).abs() < 1e-4);
    }

    #[test]
    fn losses_never_increase() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let x: Vec<Vec<f64>> = (0..100).map(|_| (0..4).map(|_| rng.gen_range(-3.0..3.0)).collect()).collect();
        let y: Vec<u8> = x.iter().map(|r| u8::from(r[0] - r[2] + rng.gen_range(-1.0..1.0) > 0.0)).collect();
        let s = sample(x, y);
        let cfg = TrainConfig { c: CostParam::new(0.7).unwrap(), ..TrainConfig::default() };
        let report = fit_cs_logistic(&s, LabelChannel::Y, &cfg).unwrap();
        assert!(report.converged);
        assert!(report.losses.windows(2).all(|w| w[1] <= w[0]));
        let again = fit_cs_logistic(&s, LabelChannel::Y, &cfg).unwrap();
        assert_eq!(report.scorer, again.scorer);
    }

    #[test]
    fn raw_scale_weights_match_standardised_fit() {
        // Rescaling a feature must not change the fitted probabilities.
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let x: Vec<Vec<f64>> = (0..80).map(|_| vec![rng.gen_range(-1.0..1.0)]).collect();
        let y: Vec<u8> = x.iter().map(|r| u8::from(r[0] > rng.gen_range(-1.0..1.0))).collect();
        let scaled: Vec<Vec<f64>> = x.iter().map(|r| vec![1000.0 * r[0] + 50.0]).collect();
        let a = train_cs_logistic(&sample(x.clone(), y.clone()), LabelChannel::Y, &TrainConfig::default()).unwrap();
        let b = train_cs_logistic(&sample(scaled.clone(), y), LabelChannel::Y, &TrainConfig::default()).unwrap();
        for i in 0..80 {
            assert!((a.predict_proba(&x[i]) - b.predict_proba(&scaled[i])).abs() < 1e-8);
        }
    }

    #[test]
    fn conditional_channel_needs_positive_rows() {
        let s = SampleSet::new(vec!["a".into()], vec![vec![0.0], vec![1.0]], vec![0, 0], vec![0, 1], None).unwrap();
        let err = train_cs_logistic(&s, LabelChannel::YbarGivenY1, &TrainConfig::default()).unwrap_err();
        assert!(matches!(err, Error::EmptyChannel(_)));
        let (rows, _) = LabelChannel::YbarGivenY1.rows(&s);
        assert!(rows.is_empty());
    }

    #[test]
    fn stable_link_functions() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
        assert!((softplus(800.0) - 800.0).abs() < 1e-12);
        assert!(softplus(-800.0) >= 0.0);
    }
}
