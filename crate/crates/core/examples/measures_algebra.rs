//! Fairness measures as cost-sensitive risks on a pair of error rates.

use fairfront::measures::{
    balanced_cs_risk, cs_certifies_di, di_at_least, di_equiv_cost, disparate_impact,
    mean_difference, symmetric_mean_difference, CostParam, Rates,
};

fn main() -> fairfront::Result<()> {
    // Rates of a classifier predicting the sensitive feature.
    let rates = Rates::new(0.2, 0.4)?;
    let di = disparate_impact(rates)?;
    let md = mean_difference(rates);
    println!("fnr = {}, fpr = {}", rates.fnr(), rates.fpr());
    println!("DI = {di:.4}, MD = {md:.4}, -|MD| = {:.4}", symmetric_mean_difference(rates));
    println!("1 - 2 CS_bal(1/2) = {:.4}", 1.0 - 2.0 * balanced_cs_risk(rates, CostParam::HALF));

    for tau in [0.4, 0.5, 0.8] {
        let c = di_equiv_cost(tau)?;
        println!(
            "tau = {tau}: c = {:.4}, CS_bal = {:.4} vs 1 - c = {:.4}, DI >= tau: {}, certificate: {}",
            c.get(),
            balanced_cs_risk(rates, c),
            1.0 - c.get(),
            di_at_least(rates, tau, 1e-12)?,
            cs_certifies_di(rates, tau, 1e-12)?,
        );
    }
    Ok(())
}
