//! Lagrangian sweep: for each multiplier the inner problem is solved by the
//! closed-form thresholded score, and the best lower bound is compared with
//! the primal optimum.

use serde::{Deserialize, Serialize};

use super::build_lp;
use super::lp::{solve_boxed_lp, LpStatus};
use crate::bayes::{bayes_classifier, ScorerParams, TiePolicy};
use crate::distributions::DiscreteJoint;
use crate::error::{Error, Result};
use crate::measures::{CostParam, FairnessForm, FairnessSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualSweep {
    pub best_lambda: f64,
    pub dual_value: f64,
    pub primal: f64,
    /// `primal - dual_value`; nonnegative up to rounding.
    pub duality_gap: f64,
    /// `(lambda, g(lambda))` in grid order.
    pub values: Vec<(f64, f64)>,
}

pub fn dual_sweep(
    dist: &DiscreteJoint,
    c: CostParam,
    fairness: &FairnessSpec,
    tau: f64,
    lambda_grid: &[f64],
) -> Result<DualSweep> {
    if lambda_grid.is_empty() {
        return Err(Error::InvalidParameter("empty lambda grid".into()));
    }
    let fairness = fairness.with_tau(tau);
    let lp = build_lp(dist, c, &fairness)?;
    let primal = solve_boxed_lp(&lp);
    if primal.status == LpStatus::Infeasible {
        return Err(Error::InvalidLevel {
            tau,
            form: fairness.form.name(),
        });
    }

    let mut values = Vec::with_capacity(lambda_grid.len());
    for &lambda in lambda_grid {
        let f: Vec<f64> = if fairness.form == FairnessForm::CostSensitive {
            let params = ScorerParams {
                c,
                cbar: fairness.cbar,
                lambda,
                channel: fairness.channel,
                pi: dist.pi(),
            };
            bayes_classifier(dist, &params, TiePolicy::PredictZero)?
                .values()
                .to_vec()
        } else {
            lp.a.iter()
                .zip(&lp.b)
                .map(|(a, b)| if a - lambda * b < 0.0 { 1.0 } else { 0.0 })
                .collect()
        };
        let (_, upper) = lp.bf_bounds();
        let g = if lambda < 0.0 && upper == f64::INFINITY {
            f64::NEG_INFINITY
        } else {
            lp.lagrangian(&f, lambda)
        };
        values.push((lambda, g));
    }

    let (best_lambda, dual_value) = values
        .iter()
        .copied()
        .reduce(|best, cur| {
            if cur.1 > best.1 || (cur.1 == best.1 && cur.0.abs() < best.0.abs()) {
                cur
            } else {
                best
            }
        })
        .expect("nonempty grid");

    Ok(DualSweep {
        best_lambda,
        dual_value,
        primal: primal.objective,
        duality_gap: primal.objective - dual_value,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::tests::random_dist;
    use crate::distributions::JointPoint;
    use crate::frontier::linspace;
    use crate::measures::{SensitiveChannel, Symmetrization};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(v: f64) -> CostParam {
        CostParam::new(v).unwrap()
    }

    #[test]
    fn level_zero_has_zero_multiplier_and_gap() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let d = random_dist(&mut rng, 6);
        let fairness = FairnessSpec::cs_symmetric(c(0.4), 0.0);
        let s = dual_sweep(&d, c(0.5), &fairness, 0.0, &linspace(-3.0, 3.0, 61)).unwrap();
        assert_eq!(s.best_lambda, 0.0);
        assert!(s.duality_gap.abs() < 1e-15);
    }

    #[test]
    fn gap_closes_at_lp_multiplier() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for i in 0..30 {
            let d = random_dist(&mut rng, 7);
            let cost = c(rng.gen());
            let ch = if i % 2 == 0 { SensitiveChannel::Dp } else { SensitiveChannel::Eo };
            let fairness = FairnessSpec::cs_symmetric(c(rng.gen()), 0.0).with_channel(ch);
            let tau = rng.gen_range(0.0..0.3);
            let lp = build_lp(&d, cost, &fairness.with_tau(tau)).unwrap();
            let sol = solve_boxed_lp(&lp);
            if sol.status == LpStatus::Infeasible {
                continue;
            }
            let mut grid = linspace(-2.0, 2.0, 41);
            grid.push(sol.dual_lambda);
            let s = dual_sweep(&d, cost, &fairness, tau, &grid).unwrap();
            let at_multiplier = s.values.last().unwrap().1;
            assert!((at_multiplier - sol.objective).abs() <= 1e-10);
            assert!(s.duality_gap.abs() <= 1e-8);
            assert!(s.values.iter().all(|v| v.1 <= sol.objective + 1e-12));
        }
    }

    #[test]
    fn self_fair_distribution_has_flat_inner_problem() {
        let mut rng = ChaCha8Rng::seed_from_u64(27);
        let base = random_dist(&mut rng, 6);
        let d = DiscreteJoint::new(base.points().iter().map(|p| JointPoint { eta_dp: p.eta, ..*p }).collect()).unwrap();
        let fairness = FairnessSpec {
            symmetrization: Symmetrization::None,
            ..FairnessSpec::cs_symmetric(c(0.5), 0.0)
        };
        let tau = crate::frontier::tau_star_direct(&d, c(0.5), &fairness).unwrap() + 0.05;
        let lp = build_lp(&d, c(0.5), &fairness.with_tau(tau)).unwrap();
        let sol = solve_boxed_lp(&lp);
        if sol.status == LpStatus::Optimal {
            // At lambda = 1 every coefficient a - b vanishes.
            assert!(lp.a.iter().zip(&lp.b).all(|(a, b)| (a - b).abs() < 1e-15));
            let s = dual_sweep(&d, c(0.5), &fairness, tau, &[0.0, 0.5, 1.0, 1.5]).unwrap();
            assert_eq!(s.best_lambda, 1.0);
            assert!(s.duality_gap.abs() <= 1e-12);
        }
    }

    #[test]
    fn other_forms_use_generic_threshold() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = random_dist(&mut rng, 6);
        let fairness = FairnessSpec {
            form: FairnessForm::MeanDifference,
            ..FairnessSpec::cs_symmetric(c(0.5), 0.0)
        };
        let lp = build_lp(&d, c(0.5), &fairness.with_tau(0.9)).unwrap();
        let sol = solve_boxed_lp(&lp);
        let s = dual_sweep(&d, c(0.5), &fairness, 0.9, &[sol.dual_lambda]).unwrap();
        assert!(s.duality_gap.abs() <= 1e-10);
    }
}
