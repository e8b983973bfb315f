//! Closed-form minimisers of `CS(f; D, c) - lambda * CS(f; Dbar, cbar)`.
//!
//! On the demographic-parity channel the optimal score shifts the threshold
//! additively, `s(x) = eta - c - lambda (eta_dp - cbar)`. On the equality of
//! opportunity channel the correction is multiplicative,
//! `s(x) = (1 - lambda (eta_eo - cbar) / pi) eta - c`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{DiscreteJoint, JointPoint, RandomizedClassifier, MASS_EPS};
use crate::error::{Error, Result};
use crate::measures::{CostParam, FairnessForm, FairnessSpec, SensitiveChannel, Symmetrization};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScorerParams {
    pub c: CostParam,
    pub cbar: CostParam,
    /// Any real; negative values push away from the sensitive threshold.
    pub lambda: f64,
    pub channel: SensitiveChannel,
    /// `Pr(Y = 1)`; only read on the equality of opportunity channel.
    pub pi: f64,
}

impl ScorerParams {
    pub fn dp(c: CostParam, cbar: CostParam, lambda: f64) -> Self {
        ScorerParams {
            c,
            cbar,
            lambda,
            channel: SensitiveChannel::Dp,
            pi: 1.0,
        }
    }

    pub fn eo(c: CostParam, cbar: CostParam, lambda: f64, pi: f64) -> Result<Self> {
        if !(pi > 0.0 && pi <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "pi = {pi}; the opportunity channel needs pi in (0, 1]"
            )));
        }
        Ok(ScorerParams {
            c,
            cbar,
            lambda,
            channel: SensitiveChannel::Eo,
            pi,
        })
    }

    pub fn with_lambda(self, lambda: f64) -> Self {
        ScorerParams { lambda, ..self }
    }

    /// The cost-sensitive fairness requirement this scorer trades off.
    pub fn fairness_spec(&self) -> FairnessSpec {
        FairnessSpec {
            form: FairnessForm::CostSensitive,
            cbar: self.cbar,
            symmetrization: Symmetrization::None,
            tau: 0.0,
            channel: self.channel,
        }
    }
}

/// Resolution of a zero score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TiePolicy {
    /// `1[eta > c]`
    #[default]
    PredictByEta,
    PredictZero,
    PredictHalf,
}

pub fn score_dp(eta: f64, eta_dp: f64, p: &ScorerParams) -> f64 {
    eta - p.c.get() - p.lambda * (eta_dp - p.cbar.get())
}

pub fn score_eo(eta: f64, eta_eo: f64, p: &ScorerParams) -> f64 {
    (1.0 - p.lambda * (eta_eo - p.cbar.get()) / p.pi) * eta - p.c.get()
}

/// Score on the channel named by `p`.
pub fn score(point: &JointPoint, p: &ScorerParams) -> f64 {
    match p.channel {
        SensitiveChannel::Dp => score_dp(point.eta, point.eta_dp, p),
        SensitiveChannel::Eo => score_eo(point.eta, point.eta_eo, p),
    }
}

pub fn classify(score: f64, eta: f64, c: CostParam, ties: TiePolicy) -> f64 {
    if score > 0.0 {
        1.0
    } else if score < 0.0 {
        0.0
    } else {
        match ties {
            TiePolicy::PredictByEta => f64::from(u8::from(eta > c.get())),
            TiePolicy::PredictZero => 0.0,
            TiePolicy::PredictHalf => 0.5,
        }
    }
}

/// Pointwise thresholding of the optimal score. On the opportunity channel
/// `pi` is taken from `dist`, overriding `p.pi`.
pub fn bayes_classifier(
    dist: &DiscreteJoint,
    p: &ScorerParams,
    ties: TiePolicy,
) -> Result<RandomizedClassifier> {
    let mut p = *p;
    if p.channel == SensitiveChannel::Eo {
        if dist.pi() <= MASS_EPS {
            return Err(Error::DegenerateClass("Y = 1 (conditioning event)".into()));
        }
        p.pi = dist.pi();
    }
    let values: Vec<f64> = dist
        .points()
        .par_iter()
        .map(|pt| classify(score(pt, &p), pt.eta, p.c, ties))
        .collect();
    RandomizedClassifier::new(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::full_risk;
    use crate::distributions::tests::random_dist;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(v: f64) -> CostParam {
        CostParam::new(v).unwrap()
    }

    #[test]
    fn dp_score_examples() {
        let p = ScorerParams::dp(c(0.3), c(0.5), 0.0);
        assert_eq!(score_dp(0.8, 0.1, &p), 0.8 - 0.3);
        let p = ScorerParams::dp(c(0.5), c(0.5), 0.5);
        assert!(score_dp(0.7, 0.9, &p).abs() < 1e-15);

        let (lam, cb) = (0.7, 0.4);
        let p = ScorerParams::dp(c(0.5), c(cb), lam);
        let eta = 0.62;
        assert!((score_dp(eta, 0.0, &p) - (eta - 0.5 + lam * cb)).abs() < 1e-15);
        assert!((score_dp(eta, 1.0, &p) - (eta - 0.5 - lam * (1.0 - cb))).abs() < 1e-15);
    }

    #[test]
    fn eo_score_examples() {
        let p = ScorerParams::eo(c(0.4), c(0.5), 0.0, 0.3).unwrap();
        assert_eq!(score_eo(0.9, 0.2, &p), 0.9 - 0.4);
        let p = ScorerParams::eo(c(0.4), c(0.5), 1.7, 0.3).unwrap();
        assert!((score_eo(0.9, 0.5, &p) - 0.5).abs() < 1e-15);

        let (lam, cb, pi, eta) = (0.8, 0.3, 0.4, 0.55);
        let p = ScorerParams::eo(c(0.5), c(cb), lam, pi).unwrap();
        let s0 = (1.0 + lam * cb / pi) * eta - 0.5;
        let s1 = (1.0 - lam * (1.0 - cb) / pi) * eta - 0.5;
        assert!((score_eo(eta, 0.0, &p) - s0).abs() < 1e-15);
        assert!((score_eo(eta, 1.0, &p) - s1).abs() < 1e-15);
        assert!(ScorerParams::eo(c(0.5), c(0.5), 1.0, 0.0).is_err());
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(0.3, 0.1, c(0.5), TiePolicy::PredictByEta), 1.0);
        assert_eq!(classify(-0.3, 0.9, c(0.5), TiePolicy::PredictByEta), 0.0);
        assert_eq!(classify(0.0, 0.8, c(0.5), TiePolicy::PredictByEta), 1.0);
        assert_eq!(classify(0.0, 0.8, c(0.5), TiePolicy::PredictZero), 0.0);
        assert_eq!(classify(0.0, 0.8, c(0.5), TiePolicy::PredictHalf), 0.5);
    }

    #[test]
    fn lambda_zero_is_threshold_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = random_dist(&mut rng, 20);
        let f = bayes_classifier(&d, &ScorerParams::dp(c(0.4), c(0.6), 0.0), TiePolicy::default()).unwrap();
        for (pt, v) in d.points().iter().zip(f.values()) {
            assert_eq!(*v, f64::from(u8::from(pt.eta > 0.4)));
        }
    }

    #[test]
    fn self_fairness_makes_risk_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let base = random_dist(&mut rng, 6);
        let d = DiscreteJoint::new(
            base.points()
                .iter()
                .map(|p| JointPoint { eta_dp: p.eta, ..*p })
                .collect(),
        )
        .unwrap();
        let p = ScorerParams::dp(c(0.35), c(0.35), 1.0);
        assert!(d.points().iter().all(|pt| score(pt, &p).abs() < 1e-15));
        let spec = p.fairness_spec();
        let reference = full_risk(&d, &RandomizedClassifier::constant(0.0, 6).unwrap(), p.c, &spec, 1.0).unwrap();
        for _ in 0..20 {
            let f = RandomizedClassifier::new((0..6).map(|_| rng.gen()).collect()).unwrap();
            let v = full_risk(&d, &f, p.c, &spec, 1.0).unwrap();
            assert!((v - reference).abs() < 1e-15);
        }
    }

    fn exhaustive_min(d: &DiscreteJoint, p: &ScorerParams) -> f64 {
        let n = d.len();
        let spec = p.fairness_spec();
        (0u32..1 << n)
            .map(|mask| {
                let f = RandomizedClassifier::from_bools((0..n).map(|i| mask >> i & 1 == 1));
                full_risk(d, &f, p.c, &spec, p.lambda).unwrap()
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn eight_point_exhaustive_optimality() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for channel in [SensitiveChannel::Dp, SensitiveChannel::Eo] {
            let d = random_dist(&mut rng, 8);
            let p = ScorerParams {
                c: c(rng.gen()),
                cbar: c(rng.gen()),
                lambda: 0.7,
                channel,
                pi: d.pi(),
            };
            let f = bayes_classifier(&d, &p, TiePolicy::default()).unwrap();
            let got = full_risk(&d, &f, p.c, &p.fairness_spec(), p.lambda).unwrap();
            assert!(got <= exhaustive_min(&d, &p) + 1e-12);
            for _ in 0..200 {
                let g = RandomizedClassifier::new((0..8).map(|_| rng.gen()).collect()).unwrap();
                assert!(got <= full_risk(&d, &g, p.c, &p.fairness_spec(), p.lambda).unwrap() + 1e-12);
            }
        }
    }

    #[test]
    fn pointwise_decomposability() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let d = random_dist(&mut rng, 9);
        let p = ScorerParams::dp(c(0.5), c(0.4), 1.3);
        let f = bayes_classifier(&d, &p, TiePolicy::default()).unwrap();
        let mut pts = d.points().to_vec();
        pts[4].eta = 1.0 - pts[4].eta;
        pts[4].eta_dp = 1.0 - pts[4].eta_dp;
        let g = bayes_classifier(&DiscreteJoint::new(pts).unwrap(), &p, TiePolicy::default()).unwrap();
        for i in (0..9).filter(|&i| i != 4) {
            assert_eq!(f.values()[i], g.values()[i]);
        }
    }

    #[test]
    fn dp_prediction_nonincreasing_in_sensitive_probability() {
        let p = ScorerParams::dp(c(0.5), c(0.5), 0.8);
        for eta in [0.1, 0.4, 0.5, 0.7, 0.95] {
            let preds: Vec<f64> = (0..=20)
                .map(|i| {
                    let eta_dp = i as f64 / 20.0;
                    classify(score_dp(eta, eta_dp, &p), eta, p.c, TiePolicy::default())
                })
                .collect();
            assert!(preds.windows(2).all(|w| w[1] <= w[0]), "{preds:?}");
        }
    }

    #[test]
    fn channels_coincide_at_lambda_zero() {
        let p = ScorerParams::eo(c(0.3), c(0.6), 0.0, 1.0).unwrap();
        for (eta, other) in [(0.2, 0.9), (0.7, 0.1), (0.3, 0.3)] {
            assert_eq!(score_dp(eta, other, &p), score_eo(eta, other, &p));
        }
    }
}
