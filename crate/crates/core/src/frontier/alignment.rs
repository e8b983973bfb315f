//! How far the target and sensitive class probabilities disagree around
//! their cost thresholds, and what that costs.
//!
//! `tau*` is the fairness of the unconstrained optimum `1[eta > c]`. For the
//! symmetrised cost-sensitive measure it splits into an expected disalignment
//! `E[|etabar - cbar| 1[(etabar - cbar)(eta - c) < 0]]` plus the minimal
//! fairness risk, and the latter is the negated f-divergence between the two
//! sensitive class-conditionals.

use serde::{Deserialize, Serialize};

use super::lp::{solve_boxed_lp, LpStatus};
use super::{build_lp, standard_coeffs, unconstrained};
use crate::distributions::{Channel, ChannelView, DiscreteJoint, RandomizedClassifier, MASS_EPS};
use crate::error::{Error, Result};
use crate::measures::{
    mean_difference, CostParam, FairnessForm, FairnessSpec, Rates, SensitiveChannel,
    Symmetrization,
};

fn optimal_unconstrained(dist: &DiscreteJoint, c: CostParam) -> Vec<f64> {
    dist.points()
        .iter()
        .map(|p| if p.eta > c.get() { 1.0 } else { 0.0 })
        .collect()
}

/// Largest `tau` in `[0, 1]` with `fpr >= tau (1 - fnr)`, i.e. `DI >= tau`
/// read through its cost-sensitive certificate. `1` when `fnr = 1`.
fn di_level(r: Rates) -> f64 {
    if r.fnr() >= 1.0 {
        1.0
    } else {
        (r.fpr() / (1.0 - r.fnr())).min(1.0)
    }
}

/// Fairness of `1[eta > c]` on the level scale of `fairness.form`.
pub fn tau_star_direct(dist: &DiscreteJoint, c: CostParam, fairness: &FairnessSpec) -> Result<f64> {
    let view = dist.channel_view(fairness.channel.into())?;
    let f0 = optimal_unconstrained(dist, c);
    let sym = fairness.symmetrization;
    match fairness.form {
        FairnessForm::CostSensitive => {
            let (b, k) = standard_coeffs(&view, fairness.cbar);
            let v = k + b.iter().zip(&f0).map(|(b, f)| b * f).sum::<f64>();
            let cb = fairness.cbar.get();
            let anti = (1.0 - cb) * view.prior + cb * (1.0 - view.prior) - v;
            match sym {
                Symmetrization::None => Ok(v),
                Symmetrization::MinWithAnti => Ok(v.min(anti)),
                Symmetrization::PriorWeighted => {
                    let alpha = view.prior * (1.0 - view.prior);
                    if alpha <= MASS_EPS {
                        return Err(Error::DegenerateClass("sensitive class prior".into()));
                    }
                    Ok(((1.0 - alpha) * v).min(alpha * anti))
                }
            }
        }
        FairnessForm::MeanDifference => {
            let md = mean_difference(view.rates(&f0)?);
            match sym {
                Symmetrization::None => Ok((1.0 - md).min(1.0)),
                Symmetrization::MinWithAnti => Ok(1.0 - md.abs()),
                Symmetrization::PriorWeighted => Err(Error::Config(
                    "prior-weighted symmetrisation needs the cost-sensitive form".into(),
                )),
            }
        }
        FairnessForm::DisparateImpact => {
            let r = view.rates(&f0)?;
            match sym {
                Symmetrization::None => Ok(di_level(r)),
                Symmetrization::MinWithAnti => Ok(di_level(r).min(di_level(r.anti()))),
                Symmetrization::PriorWeighted => Err(Error::Config(
                    "prior-weighted symmetrisation needs the cost-sensitive form".into(),
                )),
            }
        }
    }
}

/// `E[min((1 - cbar) etabar, cbar (1 - etabar))]` and `-I_phi(P1, P0)` with
/// `phi(t) = -min((1 - cbar) pibar t, cbar (1 - pibar))`, computed from the
/// explicit class-conditionals `P1 = w etabar / pibar`, `P0 = w (1 - etabar) / (1 - pibar)`.
pub fn min_cs_and_fdiv(view: &ChannelView, cbar: CostParam) -> Result<(f64, f64)> {
    let (pos, neg) = view.class_masses();
    if pos <= MASS_EPS || neg <= MASS_EPS {
        return Err(Error::DegenerateClass("sensitive class prior is 0 or 1".into()));
    }
    let cb = cbar.get();
    let min_cs = view
        .weights
        .iter()
        .zip(&view.cond)
        .map(|(w, q)| w * ((1.0 - cb) * q).min(cb * (1.0 - q)))
        .sum();

    let phi = |t: f64| -((1.0 - cb) * pos * t).min(cb * neg);
    let divergence: f64 = view
        .weights
        .iter()
        .zip(&view.cond)
        .map(|(w, q)| {
            let p1 = w * q / pos;
            let p0 = w * (1.0 - q) / neg;
            // Perspective at p0 = 0: p1 * lim phi(t)/t = 0.
            if p0 > 0.0 {
                p0 * phi(p1 / p0)
            } else {
                0.0
            }
        })
        .sum();
    Ok((min_cs, -divergence))
}

/// `min(Delta(etabar, eta), Delta(etabar, -eta))`, each the expected
/// disalignment of `etabar` with one of `1[eta > c]`, `1[eta <= c]` minus the
/// f-divergence between the sensitive class-conditionals.
pub fn tau_star_decomposed(
    dist: &DiscreteJoint,
    c: CostParam,
    cbar: CostParam,
    channel: SensitiveChannel,
) -> Result<f64> {
    let view = dist.channel_view(channel.into())?;
    let (_, neg_fdiv) = min_cs_and_fdiv(&view, cbar)?;
    let cb = cbar.get();
    let disalignment = |side: &dyn Fn(f64) -> f64| -> f64 {
        view.weights
            .iter()
            .zip(&view.cond)
            .zip(dist.points())
            .map(|((w, q), p)| {
                let gap = q - cb;
                if gap * side(p.eta) < 0.0 {
                    w * gap.abs()
                } else {
                    0.0
                }
            })
            .sum()
    };
    let cost = c.get();
    let aligned = disalignment(&|eta| if eta > cost { 1.0 } else { -1.0 });
    let anti = disalignment(&|eta| if eta > cost { -1.0 } else { 1.0 });
    Ok((aligned + neg_fdiv).min(anti + neg_fdiv))
}

/// `E[(c - eta)(f - 1[eta > c])]`.
pub fn regret_cs(dist: &DiscreteJoint, f: &RandomizedClassifier, c: CostParam) -> Result<f64> {
    if f.len() != dist.len() {
        return Err(Error::LengthMismatch {
            expected: dist.len(),
            got: f.len(),
        });
    }
    let cost = c.get();
    Ok(dist
        .points()
        .iter()
        .zip(f.values())
        .map(|(p, v)| {
            let f0 = if p.eta > cost { 1.0 } else { 0.0 };
            p.mass * (cost - p.eta) * (v - f0)
        })
        .sum())
}

/// `E[|eta - c| 1[(eta - c)(2 f - 1) < 0]]` for deterministic `f`.
pub fn regret_cs_abs(dist: &DiscreteJoint, f: &RandomizedClassifier, c: CostParam) -> Result<f64> {
    if f.len() != dist.len() {
        return Err(Error::LengthMismatch {
            expected: dist.len(),
            got: f.len(),
        });
    }
    if !f.is_deterministic() {
        return Err(Error::InvalidParameter(
            "absolute regret needs a deterministic classifier".into(),
        ));
    }
    let cost = c.get();
    Ok(dist
        .points()
        .iter()
        .zip(f.values())
        .map(|(p, v)| {
            let gap = p.eta - cost;
            if gap * (2.0 * v - 1.0) < 0.0 {
                p.mass * gap.abs()
            } else {
                0.0
            }
        })
        .sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretIdentity {
    pub f_lp: f64,
    pub f_regret: f64,
    /// Present when the LP optimum is deterministic and some multiplier's
    /// thresholded score reproduces it off the ties `eta = c`.
    pub f_bregman: Option<f64>,
    pub dual_lambda: f64,
    pub bregman_lambda: Option<f64>,
}

/// Open interval of multipliers whose rule `1[a - lambda b < 0]` agrees with
/// the deterministic `f` wherever `a != 0`; its midpoint if nonempty.
fn reproducing_lambda(a: &[f64], b: &[f64], f: &[f64]) -> Option<f64> {
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for i in 0..a.len() {
        if a[i] == 0.0 {
            continue;
        }
        let on = f[i] == 1.0;
        if b[i] == 0.0 {
            if (a[i] < 0.0) != on {
                return None;
            }
            continue;
        }
        let r = a[i] / b[i];
        // a - lambda b < 0  <=>  lambda > r (b > 0) or lambda < r (b < 0).
        if (b[i] > 0.0) == on {
            lo = lo.max(r);
        } else {
            hi = hi.min(r);
        }
    }
    match (lo.is_finite(), hi.is_finite()) {
        _ if lo >= hi => None,
        (true, true) => Some(0.5 * (lo + hi)),
        (true, false) => Some(lo + 1.0),
        (false, true) => Some(hi - 1.0),
        (false, false) => Some(0.0),
    }
}

/// `F(tau)` three ways: from the LP, as the target regret of the LP
/// optimum, and as the expected disalignment `E[|eta - c| 1[(eta - c) s < 0]]`
/// of the multiplier-corrected score `s`.
pub fn frontier_regret_identity(
    dist: &DiscreteJoint,
    c: CostParam,
    fairness: &FairnessSpec,
    tau: f64,
) -> Result<RegretIdentity> {
    let fairness = fairness.with_tau(tau);
    let lp = build_lp(dist, c, &fairness)?;
    let sol = solve_boxed_lp(&lp);
    if sol.status == LpStatus::Infeasible {
        return Err(Error::InvalidLevel {
            tau,
            form: fairness.form.name(),
        });
    }
    let f_lp = sol.objective - lp.objective_at(&unconstrained(&lp));
    let f_regret = regret_cs(dist, &sol.f, c)?;

    let bregman_lambda = if sol.f.is_deterministic() {
        reproducing_lambda(&lp.a, &lp.b, sol.f.values())
    } else {
        None
    };
    let masses = dist.channel_view(Channel::Target)?.weights;
    let f_bregman = bregman_lambda.map(|lambda| {
        (0..lp.len())
            .filter(|&i| masses[i] > 0.0)
            .map(|i| {
                let gap = -lp.a[i] / masses[i];
                let score = -(lp.a[i] - lambda * lp.b[i]) / masses[i];
                if gap * score < 0.0 {
                    lp.a[i].abs()
                } else {
                    0.0
                }
            })
            .sum()
    });

    Ok(RegretIdentity {
        f_lp,
        f_regret,
        f_bregman,
        dual_lambda: sol.dual_lambda,
        bregman_lambda,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::tests::random_dist;
    use crate::distributions::{build_interval_dist, standard_cs_on, EtaKind, JointPoint};
    use crate::frontier::linspace;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(v: f64) -> CostParam {
        CostParam::new(v).unwrap()
    }

    #[test]
    fn aligned_deterministic_case_has_zero_tau_star() {
        let d = DiscreteJoint::normalized(
            [1.0, 0.0, 1.0, 0.0, 0.0]
                .iter()
                .map(|&e| JointPoint { mass: 1.0, eta: e, eta_dp: e, eta_eo: e })
                .collect(),
        )
        .unwrap();
        let fairness = FairnessSpec::cs_symmetric(CostParam::HALF, 0.0);
        assert_eq!(tau_star_direct(&d, CostParam::HALF, &fairness).unwrap(), 0.0);
        let dec = tau_star_decomposed(&d, CostParam::HALF, CostParam::HALF, SensitiveChannel::Dp).unwrap();
        assert!(dec.abs() < 1e-15);
        let (min_cs, neg) = min_cs_and_fdiv(&d.channel_view(Channel::SensitiveDp).unwrap(), CostParam::HALF).unwrap();
        assert_eq!(min_cs, 0.0);
        assert!(neg.abs() < 1e-15);
    }

    #[test]
    fn min_cs_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let half = random_dist(&mut rng, 5);
        let d = DiscreteJoint::new(half.points().iter().map(|p| JointPoint { eta_dp: 0.5, ..*p }).collect()).unwrap();
        let (m, n) = min_cs_and_fdiv(&d.channel_view(Channel::SensitiveDp).unwrap(), CostParam::HALF).unwrap();
        assert!((m - 0.25).abs() < 1e-15);
        assert!((n - 0.25).abs() < 1e-15);

        for _ in 0..20 {
            let d = random_dist(&mut rng, 8);
            let cbar = c(rng.gen());
            for ch in [Channel::SensitiveDp, Channel::SensitiveEo] {
                let (m, n) = min_cs_and_fdiv(&d.channel_view(ch).unwrap(), cbar).unwrap();
                assert!((m - n).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn direct_and_decomposed_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        for i in 0..50 {
            let d = random_dist(&mut rng, 6);
            let (cost, cbar) = (c(rng.gen()), c(rng.gen()));
            let ch = if i % 2 == 0 { SensitiveChannel::Dp } else { SensitiveChannel::Eo };
            let fairness = FairnessSpec::cs_symmetric(cbar, 0.0).with_channel(ch);
            let direct = tau_star_direct(&d, cost, &fairness).unwrap();
            let dec = tau_star_decomposed(&d, cost, cbar, ch).unwrap();
            assert!((direct - dec).abs() <= 1e-9, "{direct} vs {dec}");
        }
        let d = build_interval_dist(EtaKind::Indicator, 0.5, 2001).unwrap();
        let fairness = FairnessSpec::cs_symmetric(CostParam::HALF, 0.0);
        let direct = tau_star_direct(&d, CostParam::HALF, &fairness).unwrap();
        let dec = tau_star_decomposed(&d, CostParam::HALF, CostParam::HALF, SensitiveChannel::Dp).unwrap();
        assert!((direct - dec).abs() <= 1e-9);
    }

    #[test]
    fn tau_star_direct_uses_sensitive_risk_of_threshold_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let d = random_dist(&mut rng, 7);
        let cost = c(0.4);
        let cbar = c(0.6);
        let f0 = RandomizedClassifier::from_bools(d.points().iter().map(|p| p.eta > 0.4));
        let v = standard_cs_on(&d, Channel::SensitiveDp, &f0, cbar).unwrap();
        let anti = standard_cs_on(&d, Channel::SensitiveDp, &f0.anti(), cbar).unwrap();
        let got = tau_star_direct(&d, cost, &FairnessSpec::cs_symmetric(cbar, 0.0)).unwrap();
        assert!((got - v.min(anti)).abs() < 1e-15);
    }

    #[test]
    fn regret_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let d = random_dist(&mut rng, 6);
        let cost = c(0.45);
        let f0 = RandomizedClassifier::from_bools(d.points().iter().map(|p| p.eta > 0.45));
        assert_eq!(regret_cs(&d, &f0, cost).unwrap(), 0.0);
        let worst = RandomizedClassifier::from_bools(d.points().iter().map(|p| p.eta < 0.45));
        let expected: f64 = d.points().iter().map(|p| p.mass * (p.eta - 0.45).abs()).sum();
        assert!((regret_cs(&d, &worst, cost).unwrap() - expected).abs() < 1e-15);

        let n = d.len();
        let best = (0u32..1 << n)
            .map(|mask| {
                let g = RandomizedClassifier::from_bools((0..n).map(|i| mask >> i & 1 == 1));
                standard_cs_on(&d, Channel::Target, &g, cost).unwrap()
            })
            .fold(f64::INFINITY, f64::min);
        for mask in [0u32, 5, 17, 63] {
            let g = RandomizedClassifier::from_bools((0..n).map(|i| mask >> i & 1 == 1));
            let risk = standard_cs_on(&d, Channel::Target, &g, cost).unwrap();
            let r = regret_cs(&d, &g, cost).unwrap();
            assert!((r - (risk - best)).abs() <= 1e-12);
            assert!((r - regret_cs_abs(&d, &g, cost).unwrap()).abs() <= 1e-15);
        }
        let g = RandomizedClassifier::new((0..n).map(|_| rng.gen()).collect()).unwrap();
        let risk = standard_cs_on(&d, Channel::Target, &g, cost).unwrap();
        assert!((regret_cs(&d, &g, cost).unwrap() - (risk - best)).abs() <= 1e-12);
        assert!(regret_cs_abs(&d, &g, cost).is_err());
    }

    #[test]
    fn regret_identity_holds_across_the_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        for _ in 0..10 {
            let d = random_dist(&mut rng, 7);
            let cost = c(rng.gen());
            let fairness = FairnessSpec::cs_symmetric(c(rng.gen()), 0.0);
            let tau_star = tau_star_direct(&d, cost, &fairness).unwrap();
            for tau in linspace(0.0, 0.5, 26) {
                match frontier_regret_identity(&d, cost, &fairness, tau) {
                    Ok(id) => {
                        assert!((id.f_lp - id.f_regret).abs() <= 1e-10);
                        if let Some(b) = id.f_bregman {
                            assert!((id.f_lp - b).abs() <= 1e-10);
                        }
                        if tau <= tau_star {
                            assert_eq!(id.f_lp, 0.0);
                            assert_eq!(id.f_bregman, Some(0.0));
                        }
                    }
                    Err(Error::InvalidLevel { .. }) => {}
                    Err(e) => panic!("{e}"),
                }
            }
        }
    }

    #[test]
    fn bregman_emitted_for_deterministic_solution() {
        let mut rng = ChaCha8Rng::seed_from_u64(90);
        let mut emitted = 0;
        for _ in 0..20 {
            let d = random_dist(&mut rng, 8);
            let cost = c(rng.gen());
            let fairness = FairnessSpec::cs_symmetric(c(rng.gen()), 0.0);
            let tau_star = tau_star_direct(&d, cost, &fairness).unwrap();
            let tau = (tau_star + 0.03).min(0.5);
            let lp = build_lp(&d, cost, &fairness.with_tau(tau)).unwrap();
            let sol = solve_boxed_lp(&lp);
            let Some(i) = sol.fractional_index else { continue };
            // Complete the partial move so the level sits on a vertex.
            let mut f = sol.f.values().to_vec();
            f[i] = if lp.b[i] > 0.0 { 1.0 } else { 0.0 };
            let vertex_tau = lp.constraint_at(&f);
            let Ok(id) = frontier_regret_identity(&d, cost, &fairness, vertex_tau) else { continue };
            let b = id.f_bregman.expect("deterministic solution");
            assert!(id.f_lp > 0.0);
            assert!((b - id.f_lp).abs() <= 1e-10);
            assert!((b - id.f_regret).abs() <= 1e-10);
            emitted += 1;
        }
        assert!(emitted >= 5, "{emitted}");
    }

    #[test]
    fn tied_ratios_withhold_bregman_value() {
        // Every exchange ratio on the indicator family is +-1, so no single
        // multiplier separates the switched points from the unswitched ones.
        let d = build_interval_dist(EtaKind::Indicator, 0.5, 21).unwrap();
        let fairness = FairnessSpec::cs_symmetric(CostParam::HALF, 0.0);
        let tau_star = tau_star_direct(&d, CostParam::HALF, &fairness).unwrap();
        let id = frontier_regret_identity(&d, CostParam::HALF, &fairness, tau_star + 1.0 / 21.0).unwrap();
        assert!((id.f_lp - id.f_regret).abs() <= 1e-12);
        assert!(id.f_bregman.is_none());
    }
}
