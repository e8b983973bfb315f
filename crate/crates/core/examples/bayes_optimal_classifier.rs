//! Closed-form minimiser of `CS(f; D, c) - lambda CS(f; Dbar, cbar)` on a
//! small joint distribution, for both sensitive channels.

use fairfront::bayes::{bayes_classifier, ScorerParams, TiePolicy};
use fairfront::distributions::{full_risk, DiscreteJoint, JointPoint};
use fairfront::measures::CostParam;

fn main() -> fairfront::Result<()> {
    let dist = DiscreteJoint::normalized(vec![
        JointPoint { mass: 0.3, eta: 0.9, eta_dp: 0.8, eta_eo: 0.7 },
        JointPoint { mass: 0.2, eta: 0.6, eta_dp: 0.1, eta_eo: 0.2 },
        JointPoint { mass: 0.3, eta: 0.4, eta_dp: 0.9, eta_eo: 0.8 },
        JointPoint { mass: 0.2, eta: 0.1, eta_dp: 0.3, eta_eo: 0.5 },
    ])?;
    let (c, cbar) = (CostParam::HALF, CostParam::HALF);

    for lambda in [-1.0, 0.0, 0.5, 1.0, 2.0] {
        let dp = ScorerParams::dp(c, cbar, lambda);
        let eo = ScorerParams::eo(c, cbar, lambda, dist.pi())?;
        let f_dp = bayes_classifier(&dist, &dp, TiePolicy::default())?;
        let f_eo = bayes_classifier(&dist, &eo, TiePolicy::default())?;
        let risk = full_risk(&dist, &f_dp, c, &dp.fairness_spec(), lambda)?;
        println!(
            "lambda = {lambda:>4}: dp {:?} (risk {risk:.4}), eo {:?}",
            f_dp.values(),
            f_eo.values()
        );
    }
    Ok(())
}
