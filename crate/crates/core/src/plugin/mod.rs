//! Plug-in fairness-aware classification: fit class-probability models for
//! the target and the sensitive feature, then threshold the closed-form
//! optimal score. Sweeping the tradeoff parameter needs no refitting.

pub mod logistic;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bayes::{classify, score_dp, score_eo, ScorerParams, TiePolicy};
use crate::distributions::{
    rates_on, Channel, DiscreteJoint, JointPoint, RandomizedClassifier, SampleSet, MASS_EPS,
};
use crate::error::{Error, Result};
use crate::measures::{
    ber_from_rates, disparate_impact, symmetric_mean_difference, CostParam, Rates,
    SensitiveChannel,
};

pub use logistic::{
    fit_cs_logistic, sigmoid, train_cs_logistic, FitReport, LabelChannel, LinearScorer,
    LogisticObjective, TrainConfig,
};

/// Empirical FNR and FPR of `f` on a label channel, weighted by the sample
/// weights when present.
pub fn evaluate_empirical(
    sample: &SampleSet,
    channel: LabelChannel,
    f: impl Fn(usize, &[f64]) -> f64,
) -> Result<Rates> {
    let (rows, labels) = channel.rows(sample);
    let (mut pos, mut neg, mut miss, mut alarm) = (0.0, 0.0, 0.0, 0.0);
    for (&i, &label) in rows.iter().zip(&labels) {
        let w = sample.weight(i);
        let p = f(i, &sample.x[i]);
        if label == 1 {
            pos += w;
            miss += w * (1.0 - p);
        } else {
            neg += w;
            alarm += w * p;
        }
    }
    if pos <= MASS_EPS {
        return Err(Error::DegenerateClass(format!("{} positive class", channel.name())));
    }
    if neg <= MASS_EPS {
        return Err(Error::DegenerateClass(format!("{} negative class", channel.name())));
    }
    Rates::from_sums(miss / pos, alarm / neg)
}

/// Where the sensitive class probability comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SensitiveModel {
    Fitted(LinearScorer),
    /// The sensitive feature is an input: `etabar(x, ybar) = ybar`.
    Observed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PluginClassifier {
    pub eta_model: LinearScorer,
    pub etabar_model: SensitiveModel,
    pub params: ScorerParams,
    pub ties: TiePolicy,
    /// The target model also reads `ybar` as a trailing feature.
    pub target_sees_ybar: bool,
}

pub fn plugin_classifier(
    eta_model: LinearScorer,
    etabar_model: LinearScorer,
    p: ScorerParams,
    ties: TiePolicy,
) -> PluginClassifier {
    PluginClassifier {
        eta_model,
        etabar_model: SensitiveModel::Fitted(etabar_model),
        params: p,
        ties,
        target_sees_ybar: false,
    }
}

impl PluginClassifier {
    pub fn eta(&self, x: &[f64], ybar: u8) -> f64 {
        if self.target_sees_ybar {
            let mut row = x.to_vec();
            row.push(f64::from(ybar));
            self.eta_model.predict_proba(&row)
        } else {
            self.eta_model.predict_proba(x)
        }
    }

    pub fn etabar(&self, x: &[f64], ybar: u8) -> f64 {
        match &self.etabar_model {
            SensitiveModel::Fitted(m) => m.predict_proba(x),
            SensitiveModel::Observed => f64::from(ybar),
        }
    }

    pub fn score(&self, x: &[f64], ybar: u8) -> f64 {
        let eta = self.eta(x, ybar);
        let etabar = self.etabar(x, ybar);
        match self.params.channel {
            SensitiveChannel::Dp => score_dp(eta, etabar, &self.params),
            SensitiveChannel::Eo => score_eo(eta, etabar, &self.params),
        }
    }

    /// Prediction for a row; `ybar` is only read by sensitive-aware models.
    pub fn predict(&self, x: &[f64], ybar: u8) -> f64 {
        classify(self.score(x, ybar), self.eta(x, ybar), self.params.c, self.ties)
    }

    pub fn with_lambda(&self, lambda: f64) -> PluginClassifier {
        PluginClassifier {
            params: self.params.with_lambda(lambda),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeoffPoint {
    pub lambda: f64,
    /// Balanced error for `Y` on the test split.
    pub ber_target: f64,
    /// `-|MD|` for `Ybar` on the test split.
    pub md_sym_sensitive: f64,
    pub di_sensitive: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Target cost; `None` uses the mean fitted target probability on the
    /// training split, which makes the unpenalised rule balanced-error optimal
    /// on the fitted model.
    pub c: Option<CostParam>,
    pub cbar: CostParam,
    pub channel: SensitiveChannel,
    pub sensitive_aware: bool,
    pub ties: TiePolicy,
    pub train: TrainConfig,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            c: None,
            cbar: CostParam::HALF,
            channel: SensitiveChannel::Dp,
            sensitive_aware: false,
            ties: TiePolicy::default(),
            train: TrainConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub points: Vec<TradeoffPoint>,
    /// Balanced error of each swept classifier on the training rows with
    /// `Y` replaced by the fitted target probability.
    pub model_ber: Vec<f64>,
    pub c_used: CostParam,
    pub classifier: PluginClassifier,
}

fn with_ybar_column(sample: &SampleSet) -> SampleSet {
    let mut out = sample.clone();
    out.feature_names.push("ybar".into());
    for (row, &yb) in out.x.iter_mut().zip(&sample.ybar) {
        row.push(f64::from(yb));
    }
    out
}

/// Fits both models once on `train`, then evaluates the plug-in classifier
/// on `test` for every `lambda` in grid order.
pub fn sweep_lambda(
    train: &SampleSet,
    test: &SampleSet,
    lambdas: &[f64],
    cfg: &SweepConfig,
) -> Result<Sweep> {
    if train.is_empty() || test.is_empty() {
        return Err(Error::EmptySample);
    }
    let fit_cfg = TrainConfig {
        c: CostParam::HALF,
        ..cfg.train
    };
    let sensitive_channel = match cfg.channel {
        SensitiveChannel::Dp => LabelChannel::Ybar,
        SensitiveChannel::Eo => LabelChannel::YbarGivenY1,
    };
    let (eta_model, etabar_model) = if cfg.sensitive_aware {
        let eta = train_cs_logistic(&with_ybar_column(train), LabelChannel::Y, &fit_cfg)?;
        (eta, SensitiveModel::Observed)
    } else {
        let (eta, etabar) = rayon::join(
            || train_cs_logistic(train, LabelChannel::Y, &fit_cfg),
            || train_cs_logistic(train, sensitive_channel, &fit_cfg),
        );
        (eta?, SensitiveModel::Fitted(etabar?))
    };

    let base = PluginClassifier {
        eta_model,
        etabar_model,
        params: ScorerParams::dp(CostParam::HALF, cfg.cbar, 0.0),
        ties: cfg.ties,
        target_sees_ybar: cfg.sensitive_aware,
    };

    let n = train.len();
    let eta_train: Vec<f64> = (0..n).map(|i| base.eta(&train.x[i], train.ybar[i])).collect();
    let fitted = DiscreteJoint::normalized(
        (0..n)
            .map(|i| JointPoint {
                mass: train.weight(i),
                eta: eta_train[i],
                eta_dp: 0.0,
                eta_eo: 0.0,
            })
            .collect(),
    )?;
    let c_used = match cfg.c {
        Some(c) => c,
        None => CostParam::new(fitted.pi().clamp(0.0, 1.0))?,
    };
    let pi_hat = {
        let total: f64 = (0..n).map(|i| train.weight(i)).sum();
        (0..n).map(|i| train.weight(i) * f64::from(train.y[i])).sum::<f64>() / total
    };
    let params = match cfg.channel {
        SensitiveChannel::Dp => ScorerParams::dp(c_used, cfg.cbar, 0.0),
        SensitiveChannel::Eo => ScorerParams::eo(c_used, cfg.cbar, 0.0, pi_hat)?,
    };
    let classifier = PluginClassifier { params, ..base };

    let results = lambdas
        .par_iter()
        .map(|&lambda| {
            let clf = classifier.with_lambda(lambda);
            let predict = |i: usize, x: &[f64]| clf.predict(x, test.ybar[i]);
            let target = evaluate_empirical(test, LabelChannel::Y, predict)?;
            let sensitive = evaluate_empirical(test, sensitive_channel, predict)?;
            let f_train = RandomizedClassifier::new(
                (0..n).map(|i| clf.predict(&train.x[i], train.ybar[i])).collect(),
            )?;
            let model_rates = rates_on(&fitted, Channel::Target, &f_train)?;
            Ok((
                TradeoffPoint {
                    lambda,
                    ber_target: ber_from_rates(target),
                    md_sym_sensitive: symmetric_mean_difference(sensitive),
                    di_sensitive: disparate_impact(sensitive).ok(),
                },
                ber_from_rates(model_rates),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let (points, model_ber) = results.into_iter().unzip();
    Ok(Sweep {
        points,
        model_ber,
        c_used,
        classifier,
    })
}

/// For each point, the lowest test balanced error among points at least as
/// fair (`|MD|` no larger). Nonincreasing as the allowed `|MD|` grows.
pub fn pareto_front(points: &[TradeoffPoint]) -> Vec<(f64, f64)> {
    let mut sorted: Vec<(f64, f64)> = points
        .iter()
        .map(|p| (p.md_sym_sensitive.abs(), p.ber_target))
        .collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut best = f64::INFINITY;
    sorted
        .into_iter()
        .map(|(md, ber)| {
            best = best.min(ber);
            (md, best)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::sample_rotated_gaussians;
    use crate::measures::balanced_cs_risk;

    fn hand_sample() -> SampleSet {
        SampleSet::new(
            vec!["a".into()],
            vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]],
            vec![0, 1, 1, 0],
            vec![1, 1, 0, 0],
            None,
        )
        .unwrap()
    }

    #[test]
    fn empirical_rates_examples() {
        let s = hand_sample();
        let r = evaluate_empirical(&s, LabelChannel::Y, |i, _| f64::from(s.y[i])).unwrap();
        assert_eq!((r.fnr(), r.fpr()), (0.0, 0.0));
        let r = evaluate_empirical(&s, LabelChannel::Y, |_, _| 0.5).unwrap();
        assert_eq!((r.fnr(), r.fpr()), (0.5, 0.5));
        // f = 1[x >= 2]: Y positives {1, 2} -> miss 1; negatives {0, 3} -> alarm 1.
        let f = |_: usize, x: &[f64]| f64::from(u8::from(x[0] >= 2.0));
        let r = evaluate_empirical(&s, LabelChannel::Y, f).unwrap();
        assert_eq!((r.fnr(), r.fpr()), (0.5, 0.5));
        // Ybar positives {0, 1} both missed; negatives {2, 3} both flagged.
        let r = evaluate_empirical(&s, LabelChannel::Ybar, f).unwrap();
        assert_eq!((r.fnr(), r.fpr()), (1.0, 1.0));
        // Ybar | Y = 1: rows {1, 2}, labels {1, 0}.
        let r = evaluate_empirical(&s, LabelChannel::YbarGivenY1, f).unwrap();
        assert_eq!((r.fnr(), r.fpr()), (1.0, 1.0));
        let one_class = SampleSet::new(vec![], vec![vec![], vec![]], vec![1, 1], vec![0, 1], None).unwrap();
        assert!(matches!(
            evaluate_empirical(&one_class, LabelChannel::Y, |_, _| 1.0),
            Err(Error::DegenerateClass(_))
        ));
    }

    #[test]
    fn plugin_limits() {
        let eta = LinearScorer { weights: vec![1.0], bias: 0.0 };
        let etabar = LinearScorer { weights: vec![-2.0], bias: 0.5 };
        let p = ScorerParams::dp(CostParam::HALF, CostParam::HALF, 0.0);
        let clf = plugin_classifier(eta.clone(), etabar.clone(), p, TiePolicy::default());
        for x in [-1.3, -0.1, 0.2, 2.0] {
            assert_eq!(clf.predict(&[x], 0), f64::from(u8::from(eta.predict_proba(&[x]) > 0.5)));
        }
        let strong = clf.with_lambda(1e9);
        for x in [-1.3, -0.1, 0.2, 0.3, 2.0] {
            let expected = f64::from(u8::from(etabar.predict_proba(&[x]) < 0.5));
            assert_eq!(strong.predict(&[x], 0), expected);
        }
    }

    #[test]
    fn sensitive_aware_thresholds_per_group() {
        let (lam, cbar) = (0.3, 0.4);
        let clf = PluginClassifier {
            eta_model: LinearScorer { weights: vec![1.0], bias: 0.0 },
            etabar_model: SensitiveModel::Observed,
            params: ScorerParams::dp(CostParam::HALF, CostParam::new(cbar).unwrap(), lam),
            ties: TiePolicy::default(),
            target_sees_ybar: false,
        };
        for z in [-3.0, -0.5, -0.2, 0.0, 0.1, 0.4, 2.0] {
            let eta = sigmoid(z);
            assert_eq!(clf.predict(&[z], 0), f64::from(u8::from(eta > 0.5 - lam * cbar)));
            assert_eq!(clf.predict(&[z], 1), f64::from(u8::from(eta > 0.5 + lam * (1.0 - cbar))));
        }
    }

    fn gaussian_split() -> (SampleSet, SampleSet) {
        let s = sample_rotated_gaussians(900, 0.5, 7).unwrap();
        let idx: Vec<usize> = (0..s.len()).collect();
        (s.select(&idx[..600]), s.select(&idx[600..]))
    }

    #[test]
    fn sweep_is_refit_free() {
        let (train, test) = gaussian_split();
        let small = [-1.0, 0.0, 1.0];
        let large = [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0];
        let cfg = SweepConfig::default();
        let a = sweep_lambda(&train, &test, &small, &cfg).unwrap();
        let b = sweep_lambda(&train, &test, &large, &cfg).unwrap();
        for p in &a.points {
            assert!(b.points.contains(p));
        }
        let zero = sweep_lambda(&train, &test, &[0.0], &cfg).unwrap();
        assert_eq!(zero.points.len(), 1);
        assert_eq!(zero.points[0], a.points[1]);
    }

    #[test]
    fn unpenalised_rule_is_model_optimal() {
        let (train, test) = gaussian_split();
        let lambdas: Vec<f64> = (-20..=20).map(|i| i as f64 / 10.0).collect();
        for channel in [SensitiveChannel::Dp, SensitiveChannel::Eo] {
            let cfg = SweepConfig { channel, ..SweepConfig::default() };
            let s = sweep_lambda(&train, &test, &lambdas, &cfg).unwrap();
            let at_zero = s.model_ber[20];
            assert!(s.model_ber.iter().all(|&b| b >= at_zero - 1e-12));
        }
    }

    #[test]
    fn certificate_agrees_with_disparate_impact() {
        let (train, test) = gaussian_split();
        let tau = 0.8;
        let c = crate::measures::di_equiv_cost(tau).unwrap();
        let cfg = TrainConfig { c, ..TrainConfig::default() };
        let m = train_cs_logistic(&train, LabelChannel::Ybar, &cfg).unwrap();
        let r = evaluate_empirical(&test, LabelChannel::Ybar, |_, x| {
            f64::from(u8::from(m.predict_proba(x) > 0.5))
        })
        .unwrap();
        let di = disparate_impact(r).unwrap();
        let delta = balanced_cs_risk(r, c) - (1.0 - c.get());
        assert_eq!(di >= tau, delta >= 0.0);
    }

    #[test]
    fn pareto_front_is_monotone() {
        let pts = [
            TradeoffPoint { lambda: 0.0, ber_target: 0.2, md_sym_sensitive: -0.5, di_sensitive: None },
            TradeoffPoint { lambda: 1.0, ber_target: 0.3, md_sym_sensitive: -0.1, di_sensitive: None },
            TradeoffPoint { lambda: 2.0, ber_target: 0.25, md_sym_sensitive: -0.3, di_sensitive: None },
            TradeoffPoint { lambda: 3.0, ber_target: 0.4, md_sym_sensitive: -0.2, di_sensitive: None },
        ];
        let front = pareto_front(&pts);
        assert_eq!(front.iter().map(|p| p.1).collect::<Vec<_>>(), vec![0.3, 0.3, 0.25, 0.2]);
    }
}
