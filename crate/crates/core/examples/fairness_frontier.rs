//! Frontiers for the interval family: the fair level reachable at no cost
//! grows with the overlap parameter `t`, and past it the penalty grows
//! linearly.

use fairfront::distributions::{build_interval_dist, EtaKind};
use fairfront::frontier::{compute_frontier, linspace, tau_star_decomposed};
use fairfront::measures::{CostParam, FairnessSpec, SensitiveChannel};

fn main() -> fairfront::Result<()> {
    let half = CostParam::HALF;
    let fairness = FairnessSpec::cs_symmetric(half, 0.0);
    let taus = linspace(0.0, 0.3, 13);
    for kind in [EtaKind::Indicator, EtaKind::Sigmoid] {
        println!("{kind:?}");
        for t in [0.0, 0.25, 0.5, 0.75] {
            let dist = build_interval_dist(kind, t, 401)?;
            let curve = compute_frontier(&dist, half, &fairness, &taus)?;
            let decomposed = tau_star_decomposed(&dist, half, half, SensitiveChannel::Dp)?;
            let values: Vec<String> = curve
                .points
                .iter()
                .map(|p| p.value.map_or("  -  ".into(), |v| format!("{v:.3}")))
                .collect();
            println!(
                "  t = {t:<4} tau* = {:.4} ({decomposed:.4})  F: {}",
                curve.tau_star,
                values.join(" ")
            );
        }
    }
    Ok(())
}
