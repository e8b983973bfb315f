//! Finite-support joint distributions over `(X, Y, Ybar)`, randomised
//! classifiers on them, and the samplers used by the experiments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{CostParam, FairnessSpec, Rates, SensitiveChannel};

/// Masses below this are treated as zero when conditioning on a class.
pub const MASS_EPS: f64 = 1e-15;

/// One support point: its marginal mass and the three class probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointPoint {
    pub mass: f64,
    pub eta: f64,
    pub eta_dp: f64,
    pub eta_eo: f64,
}

/// The label distribution a classifier is evaluated against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Channel {
    /// `Pr(X, Y)`.
    Target,
    /// `Pr(X, Ybar)`.
    SensitiveDp,
    /// `Pr(X, Ybar | Y = 1)`.
    SensitiveEo,
}

impl From<SensitiveChannel> for Channel {
    fn from(ch: SensitiveChannel) -> Self {
        match ch {
            SensitiveChannel::Dp => Channel::SensitiveDp,
            SensitiveChannel::Eo => Channel::SensitiveEo,
        }
    }
}

impl Channel {
    pub fn name(self) -> &'static str {
        match self {
            Channel::Target => "target",
            Channel::SensitiveDp => "sensitive-dp",
            Channel::SensitiveEo => "sensitive-eo",
        }
    }
}

/// A channel written as instance weights, a conditional positive probability
/// per instance and the resulting class prior.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelView {
    pub weights: Vec<f64>,
    pub cond: Vec<f64>,
    pub prior: f64,
}

impl ChannelView {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Positive-class mass `sum w * cond` and negative-class mass.
    pub fn class_masses(&self) -> (f64, f64) {
        let pos: f64 = self
            .weights
            .iter()
            .zip(&self.cond)
            .map(|(w, q)| w * q)
            .sum();
        let neg: f64 = self
            .weights
            .iter()
            .zip(&self.cond)
            .map(|(w, q)| w * (1.0 - q))
            .sum();
        (pos, neg)
    }

    /// FNR and FPR of `f` on this channel.
    pub fn rates(&self, f: &[f64]) -> Result<Rates> {
        if f.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got: f.len(),
            });
        }
        let (pos, neg) = self.class_masses();
        if pos <= MASS_EPS {
            return Err(Error::DegenerateClass("positive class".into()));
        }
        if neg <= MASS_EPS {
            return Err(Error::DegenerateClass("negative class".into()));
        }
        let mut miss = 0.0;
        let mut false_alarm = 0.0;
        for ((w, q), fx) in self.weights.iter().zip(&self.cond).zip(f) {
            miss += w * q * (1.0 - fx);
            false_alarm += w * (1.0 - q) * fx;
        }
        Rates::from_sums(miss / pos, false_alarm / neg)
    }

    /// Standard cost-sensitive risk `sum w [(1-c) q (1-f) + c (1-q) f]`.
    /// Needs no conditioning, so it is defined on degenerate channels too.
    pub fn standard_cs(&self, f: &[f64], c: CostParam) -> Result<f64> {
        if f.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got: f.len(),
            });
        }
        let c = c.get();
        Ok(self
            .weights
            .iter()
            .zip(&self.cond)
            .zip(f)
            .map(|((w, q), fx)| w * ((1.0 - c) * q * (1.0 - fx) + c * (1.0 - q) * fx))
            .sum())
    }
}

/// A distribution over finitely many instances with cached priors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteJoint {
    points: Vec<JointPoint>,
    pi: f64,
    pibar: f64,
}

impl DiscreteJoint {
    /// Validates masses (summing to one within `1e-12`) and probabilities.
    pub fn new(points: Vec<JointPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptySample);
        }
        for p in &points {
            if !(p.mass >= 0.0 && p.mass.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "mass {} is negative or not finite",
                    p.mass
                )));
            }
            for (name, v) in [("eta", p.eta), ("eta_dp", p.eta_dp), ("eta_eo", p.eta_eo)] {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidProbability { name, value: v });
                }
            }
        }
        let total: f64 = points.iter().map(|p| p.mass).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "masses sum to {total}, expected 1"
            )));
        }
        let pi = points.iter().map(|p| p.mass * p.eta).sum();
        let pibar = points.iter().map(|p| p.mass * p.eta_dp).sum();
        Ok(DiscreteJoint { points, pi, pibar })
    }

    /// Rescales the masses to sum to one before validating.
    pub fn normalized(mut points: Vec<JointPoint>) -> Result<Self> {
        let total: f64 = points.iter().map(|p| p.mass).sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "masses sum to {total}, cannot normalise"
            )));
        }
        for p in &mut points {
            p.mass /= total;
        }
        DiscreteJoint::new(points)
    }

    pub fn points(&self) -> &[JointPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `Pr(Y = 1)`.
    pub fn pi(&self) -> f64 {
        self.pi
    }

    /// `Pr(Ybar = 1)`.
    pub fn pibar(&self) -> f64 {
        self.pibar
    }

    /// The channel as weights, conditionals and prior. The equality of
    /// opportunity channel reweights instances by `m eta / pi`.
    pub fn channel_view(&self, channel: Channel) -> Result<ChannelView> {
        let (weights, cond): (Vec<f64>, Vec<f64>) = match channel {
            Channel::Target => self.points.iter().map(|p| (p.mass, p.eta)).unzip(),
            Channel::SensitiveDp => self.points.iter().map(|p| (p.mass, p.eta_dp)).unzip(),
            Channel::SensitiveEo => {
                if self.pi <= MASS_EPS {
                    return Err(Error::DegenerateClass("Y = 1 (conditioning event)".into()));
                }
                self.points
                    .iter()
                    .map(|p| (p.mass * p.eta / self.pi, p.eta_eo))
                    .unzip()
            }
        };
        let prior = weights.iter().zip(&cond).map(|(w, q)| w * q).sum();
        Ok(ChannelView {
            weights,
            cond,
            prior,
        })
    }
}

/// `f(x)`, the probability of predicting positive at each support point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomizedClassifier {
    values: Vec<f64>,
}

impl RandomizedClassifier {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(&v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidProbability { name: "f(x)", value: v });
        }
        Ok(RandomizedClassifier { values })
    }

    pub fn constant(p: f64, n: usize) -> Result<Self> {
        RandomizedClassifier::new(vec![p; n])
    }

    pub fn from_bools(bits: impl IntoIterator<Item = bool>) -> Self {
        RandomizedClassifier {
            values: bits.into_iter().map(|b| if b { 1.0 } else { 0.0 }).collect(),
        }
    }

    pub(crate) fn from_clamped(values: Vec<f64>) -> Self {
        RandomizedClassifier {
            values: values.into_iter().map(|v| v.clamp(0.0, 1.0)).collect(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn anti(&self) -> RandomizedClassifier {
        RandomizedClassifier {
            values: self.values.iter().map(|v| 1.0 - v).collect(),
        }
    }

    pub fn is_deterministic(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0 || v == 1.0)
    }
}

fn check_len(dist: &DiscreteJoint, f: &RandomizedClassifier) -> Result<()> {
    if dist.len() != f.len() {
        return Err(Error::LengthMismatch {
            expected: dist.len(),
            got: f.len(),
        });
    }
    Ok(())
}

pub fn rates_on(dist: &DiscreteJoint, channel: Channel, f: &RandomizedClassifier) -> Result<Rates> {
    check_len(dist, f)?;
    dist.channel_view(channel)?.rates(f.values())
}

/// Standard cost-sensitive risk of `f` on one channel.
pub fn standard_cs_on(
    dist: &DiscreteJoint,
    channel: Channel,
    f: &RandomizedClassifier,
    c: CostParam,
) -> Result<f64> {
    check_len(dist, f)?;
    dist.channel_view(channel)?.standard_cs(f.values(), c)
}

/// `CS(f; D, c) - lambda * CS(f; Dbar, cbar)` with standard (unbalanced)
/// risks, the sensitive distribution taken from `fairness.channel`.
pub fn full_risk(
    dist: &DiscreteJoint,
    f: &RandomizedClassifier,
    c: CostParam,
    fairness: &FairnessSpec,
    lambda: f64,
) -> Result<f64> {
    let target = standard_cs_on(dist, Channel::Target, f, c)?;
    let sensitive = standard_cs_on(dist, fairness.channel.into(), f, fairness.cbar)?;
    Ok(target - lambda * sensitive)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EtaKind {
    /// `eta(x) = 1[x > 0]`
    Indicator,
    /// `eta(x) = 1 / (1 + exp(-x))`
    Sigmoid,
}

/// Uniform grid of `n_points` on `[-1, 1]` with `eta` of the given kind and
/// `eta_dp(x) = eta_eo(x) = 1[x > t]`.
pub fn build_interval_dist(kind: EtaKind, t: f64, n_points: usize) -> Result<DiscreteJoint> {
    if n_points < 3 {
        return Err(Error::InvalidParameter(format!(
            "n_points = {n_points}, need at least 3"
        )));
    }
    if !(-1.0..=1.0).contains(&t) {
        return Err(Error::InvalidParameter(format!("t = {t} is outside [-1, 1]")));
    }
    let step = 2.0 / (n_points - 1) as f64;
    let mass = 1.0 / n_points as f64;
    let points = (0..n_points)
        .map(|i| {
            let x = -1.0 + step * i as f64;
            let eta = match kind {
                EtaKind::Indicator => indicator(x > 0.0),
                EtaKind::Sigmoid => 1.0 / (1.0 + (-x).exp()),
            };
            let etabar = indicator(x > t);
            JointPoint {
                mass,
                eta,
                eta_dp: etabar,
                eta_eo: etabar,
            }
        })
        .collect();
    DiscreteJoint::normalized(points)
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Rows of features with a target and a sensitive label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub feature_names: Vec<String>,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<u8>,
    pub ybar: Vec<u8>,
    pub weights: Option<Vec<f64>>,
}

impl SampleSet {
    pub fn new(
        feature_names: Vec<String>,
        x: Vec<Vec<f64>>,
        y: Vec<u8>,
        ybar: Vec<u8>,
        weights: Option<Vec<f64>>,
    ) -> Result<Self> {
        let n = x.len();
        for len in [y.len(), ybar.len()]
            .into_iter()
            .chain(weights.as_ref().map(Vec::len))
        {
            if len != n {
                return Err(Error::LengthMismatch { expected: n, got: len });
            }
        }
        let d = feature_names.len();
        if let Some(row) = x.iter().find(|r| r.len() != d) {
            return Err(Error::LengthMismatch {
                expected: d,
                got: row.len(),
            });
        }
        if y.iter().chain(&ybar).any(|&v| v > 1) {
            return Err(Error::InvalidParameter("labels must be 0 or 1".into()));
        }
        if let Some(w) = &weights {
            if w.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
                return Err(Error::InvalidParameter(
                    "weights must be finite and nonnegative".into(),
                ));
            }
        }
        Ok(SampleSet {
            feature_names,
            x,
            y,
            ybar,
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.feature_names.len()
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[i])
    }

    /// The rows at `idx`, in that order.
    pub fn select(&self, idx: &[usize]) -> SampleSet {
        SampleSet {
            feature_names: self.feature_names.clone(),
            x: idx.iter().map(|&i| self.x[i].clone()).collect(),
            y: idx.iter().map(|&i| self.y[i]).collect(),
            ybar: idx.iter().map(|&i| self.ybar[i]).collect(),
            weights: self
                .weights
                .as_ref()
                .map(|w| idx.iter().map(|&i| w[i]).collect()),
        }
    }
}

/// Class means and covariances of the two-Gaussian benchmark.
const MU1: [f64; 2] = [2.0, 2.0];
const SIGMA1: [[f64; 2]; 2] = [[5.0, 1.0], [1.0, 5.0]];
const MU0: [f64; 2] = [-2.0, -2.0];
const SIGMA0: [[f64; 2]; 2] = [[10.0, 1.0], [1.0, 3.0]];

fn gaussian_log_density(x: [f64; 2], mu: [f64; 2], s: [[f64; 2]; 2]) -> f64 {
    let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
    let d = [x[0] - mu[0], x[1] - mu[1]];
    let quad = (s[1][1] * d[0] * d[0] - (s[0][1] + s[1][0]) * d[0] * d[1] + s[0][0] * d[1] * d[1]) / det;
    -0.5 * quad - 0.5 * det.ln() - (2.0 * std::f64::consts::PI).ln()
}

/// `Pr(Y = 1 | X = x)` under equal class priors.
pub fn gaussian_posterior(x: [f64; 2]) -> f64 {
    let l1 = gaussian_log_density(x, MU1, SIGMA1);
    let l0 = gaussian_log_density(x, MU0, SIGMA0);
    1.0 / (1.0 + (l0 - l1).exp())
}

/// `Pr(Ybar = 1 | X = x)`: the class posterior evaluated at `R(phi) x`.
pub fn rotated_posterior(x: [f64; 2], phi: f64) -> f64 {
    let (s, c) = phi.sin_cos();
    gaussian_posterior([c * x[0] - s * x[1], s * x[0] + c * x[1]])
}

fn cholesky(s: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let l00 = s[0][0].sqrt();
    let l10 = s[1][0] / l00;
    let l11 = (s[1][1] - l10 * l10).sqrt();
    [[l00, 0.0], [l10, l11]]
}

/// Draws `n` rows: `Y ~ Bernoulli(1/2)`, `X | Y` Gaussian, and `Ybar | X`
/// Bernoulli with the rotated posterior.
pub fn sample_rotated_gaussians(n: usize, phi: f64, seed: u64) -> Result<SampleSet> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chol = [cholesky(SIGMA0), cholesky(SIGMA1)];
    let mus = [MU0, MU1];
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut ybar = Vec::with_capacity(n);
    for _ in 0..n {
        let label = u8::from(rng.gen::<f64>() < 0.5);
        let z0: f64 = rng.sample(StandardNormal);
        let z1: f64 = rng.sample(StandardNormal);
        let (mu, l) = (mus[label as usize], chol[label as usize]);
        let point = [mu[0] + l[0][0] * z0, mu[1] + l[1][0] * z0 + l[1][1] * z1];
        let p = rotated_posterior(point, phi);
        x.push(point.to_vec());
        y.push(label);
        ybar.push(u8::from(rng.gen::<f64>() < p));
    }
    SampleSet::new(vec!["x1".into(), "x2".into()], x, y, ybar, None)
}

/// One support point per row, with the row weights (or uniform masses)
/// normalised to one and the class probabilities read off the two models.
/// The equality-of-opportunity field reuses `etabar_hat`.
pub fn empirical_joint(
    sample: &SampleSet,
    eta_hat: impl Fn(&[f64]) -> f64,
    etabar_hat: impl Fn(&[f64]) -> f64,
) -> Result<DiscreteJoint> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let points = (0..sample.len())
        .map(|i| {
            let row = &sample.x[i];
            let etabar = etabar_hat(row);
            JointPoint {
                mass: sample.weight(i),
                eta: eta_hat(row),
                eta_dp: etabar,
                eta_eo: etabar,
            }
        })
        .collect();
    DiscreteJoint::normalized(points)
}
