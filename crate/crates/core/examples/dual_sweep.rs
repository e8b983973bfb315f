use fairfront::distributions::{DiscreteJoint, JointPoint};
use fairfront::frontier::{
    build_lp, dual_sweep, frontier_regret_identity, linspace, solve_boxed_lp, tau_star_direct,
};
use fairfront::measures::{CostParam, FairnessSpec};

fn main() -> fairfront::Result<()> {
    let dist = DiscreteJoint::normalized(vec![
        JointPoint { mass: 1.0, eta: 0.9, eta_dp: 0.9, eta_eo: 0.9 },
        JointPoint { mass: 1.0, eta: 0.4, eta_dp: 0.1, eta_eo: 0.1 },
        JointPoint { mass: 1.0, eta: 0.1, eta_dp: 0.9, eta_eo: 0.9 },
        JointPoint { mass: 1.0, eta: 0.7, eta_dp: 0.3, eta_eo: 0.4 },
    ])?;
    let c = CostParam::HALF;
    let fairness = FairnessSpec::cs_symmetric(CostParam::HALF, 0.0);
    // Halfway between the free level and the symmetric ceiling of 1/4.
    let tau_star = tau_star_direct(&dist, c, &fairness)?;
    let tau = 0.5 * (tau_star + 0.25);
    println!("tau* = {tau_star:.4}, tau = {tau:.4}");

    let lp = build_lp(&dist, c, &fairness.with_tau(tau))?;
    let sol = solve_boxed_lp(&lp);
    let mut grid = linspace(-3.0, 3.0, 25);
    grid.push(sol.dual_lambda);
    let sweep = dual_sweep(&dist, c, &fairness, tau, &grid)?;
    for (lambda, g) in &sweep.values {
        println!("lambda {lambda:>7.3}  g {g:.6}");
    }
    println!("primal {:.6}, best dual {:.6} at {:.3}, gap {:.2e}", sweep.primal, sweep.dual_value, sweep.best_lambda, sweep.duality_gap);

    let id = frontier_regret_identity(&dist, c, &fairness, tau)?;
    println!("F from LP {:.6}, as regret {:.6}, as disalignment {:?}", id.f_lp, id.f_regret, id.f_bregman);
    Ok(())
}
