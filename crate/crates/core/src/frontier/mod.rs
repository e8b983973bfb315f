//! Fairness-constrained risk minimisation over a finite instance space.
//!
//! With standard cost-sensitive risks both the target risk and the fairness
//! risk are affine in `f`, so the constrained problem is a box LP with a
//! single two-sided constraint ([`lp`]). The frontier `F(tau)` is the excess
//! of its optimum over the unconstrained one.
//!
//! Constraint on the fairness quantity `q(f) = k + b.f` per form:
//!
//! | form | `q` | `MinWithAnti` | `None` |
//! |------|-----|---------------|--------|
//! | cost-sensitive | `CS(f; Dbar, cbar)` | `[tau, K - tau]` | `[tau, inf)` |
//! | mean difference | `CS_bal(f; 1/2)` | `[tau/2, 1 - tau/2]` | `[tau/2, inf)` |
//! | disparate impact | `CS_bal(f; 1/(1+tau))` | `[1 - cbar, cbar]` | `[1 - cbar, inf)` |
//!
//! where `K = CS(f) + CS(1 - f) = (1 - cbar) pibar + cbar (1 - pibar)`.
//! `PriorWeighted` is available for the cost-sensitive form only, with
//! bounds `[tau / (1 - alpha), K - tau / alpha]` and `alpha = pibar (1 - pibar)`.

pub mod alignment;
pub mod dual;
pub mod lp;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{Channel, ChannelView, DiscreteJoint, MASS_EPS};
use crate::error::{Error, Result};
use crate::measures::{di_equiv_cost, CostParam, FairnessForm, FairnessSpec, Symmetrization};

pub use alignment::{
    frontier_regret_identity, min_cs_and_fdiv, regret_cs, regret_cs_abs, tau_star_decomposed,
    tau_star_direct, RegretIdentity,
};
pub use dual::{dual_sweep, DualSweep};
pub use lp::{solve_boxed_lp, BoxedLp, LpSolution, LpStatus};

/// Coefficients of the fairness quantity `q(f) = k + b.f` and its bounds.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Constraint {
    pub b: Vec<f64>,
    pub k: f64,
    pub lo: f64,
    pub hi: f64,
}

/// `CS(f; view, cbar) = (1 - cbar) prior + sum w (cbar - cond) f`.
pub(crate) fn standard_coeffs(view: &ChannelView, cbar: CostParam) -> (Vec<f64>, f64) {
    let cb = cbar.get();
    let b = view
        .weights
        .iter()
        .zip(&view.cond)
        .map(|(w, q)| w * (cb - q))
        .collect();
    (b, (1.0 - cb) * view.prior)
}

/// `CS_bal(f; view, cbar) = (1 - cbar) + sum w [cbar (1-q)/(1-p) - (1-cbar) q/p] f`.
pub(crate) fn balanced_coeffs(view: &ChannelView, cbar: CostParam) -> Result<(Vec<f64>, f64)> {
    let (pos, neg) = view.class_masses();
    if pos <= MASS_EPS {
        return Err(Error::DegenerateClass("sensitive positive class".into()));
    }
    if neg <= MASS_EPS {
        return Err(Error::DegenerateClass("sensitive negative class".into()));
    }
    let cb = cbar.get();
    let b = view
        .weights
        .iter()
        .zip(&view.cond)
        .map(|(w, q)| w * (cb * (1.0 - q) / neg - (1.0 - cb) * q / pos))
        .collect();
    Ok((b, 1.0 - cb))
}

fn check_level(fairness: &FairnessSpec) -> Result<()> {
    let tau = fairness.tau;
    let max = match (fairness.form, fairness.symmetrization) {
        (FairnessForm::CostSensitive, Symmetrization::None) => 1.0,
        (FairnessForm::CostSensitive, _) => 0.5,
        _ => 1.0,
    };
    if !(0.0..=max).contains(&tau) {
        return Err(Error::InvalidLevel {
            tau,
            form: fairness.form.name(),
        });
    }
    Ok(())
}

fn unsupported_symmetrization(fairness: &FairnessSpec) -> Error {
    Error::Config(format!(
        "{:?} symmetrisation is only defined for the cost-sensitive form, not {}",
        fairness.symmetrization,
        fairness.form.name()
    ))
}

pub(crate) fn constraint(view: &ChannelView, fairness: &FairnessSpec) -> Result<Constraint> {
    check_level(fairness)?;
    let tau = fairness.tau;
    let sym = fairness.symmetrization;
    let (b, k, lo, hi) = match fairness.form {
        FairnessForm::CostSensitive => {
            let (b, k) = standard_coeffs(view, fairness.cbar);
            let cb = fairness.cbar.get();
            let total = (1.0 - cb) * view.prior + cb * (1.0 - view.prior);
            let (lo, hi) = match sym {
                Symmetrization::None => (tau, f64::INFINITY),
                Symmetrization::MinWithAnti => (tau, total - tau),
                Symmetrization::PriorWeighted => {
                    let alpha = view.prior * (1.0 - view.prior);
                    if alpha <= MASS_EPS {
                        return Err(Error::DegenerateClass("sensitive class prior".into()));
                    }
                    (tau / (1.0 - alpha), total - tau / alpha)
                }
            };
            (b, k, lo, hi)
        }
        FairnessForm::MeanDifference => {
            let (b, k) = balanced_coeffs(view, CostParam::HALF)?;
            let (lo, hi) = match sym {
                Symmetrization::None => (tau / 2.0, f64::INFINITY),
                Symmetrization::MinWithAnti => (tau / 2.0, 1.0 - tau / 2.0),
                Symmetrization::PriorWeighted => return Err(unsupported_symmetrization(fairness)),
            };
            (b, k, lo, hi)
        }
        FairnessForm::DisparateImpact => {
            let cost = di_equiv_cost(tau)?;
            let (b, k) = balanced_coeffs(view, cost)?;
            let cb = cost.get();
            let (lo, hi) = match sym {
                Symmetrization::None => (1.0 - cb, f64::INFINITY),
                Symmetrization::MinWithAnti => (1.0 - cb, cb),
                Symmetrization::PriorWeighted => return Err(unsupported_symmetrization(fairness)),
            };
            (b, k, lo, hi)
        }
    };
    Ok(Constraint { b, k, lo, hi })
}

/// The LP for target cost `c` under `fairness`, which also names the
/// sensitive channel and the fairness cost.
pub fn build_lp(dist: &DiscreteJoint, c: CostParam, fairness: &FairnessSpec) -> Result<BoxedLp> {
    let target = dist.channel_view(Channel::Target)?;
    let sensitive = dist.channel_view(fairness.channel.into())?;
    let cost = c.get();
    let a = target
        .weights
        .iter()
        .zip(&target.cond)
        .map(|(m, eta)| m * (cost - eta))
        .collect();
    let Constraint { b, k, lo, hi } = constraint(&sensitive, fairness)?;
    Ok(BoxedLp {
        a,
        b,
        objective_offset: (1.0 - cost) * target.prior,
        k_offset: k,
        lo,
        hi,
    })
}

/// The unconstrained minimiser `1[eta > c]`, written as `1[a < 0]`.
pub(crate) fn unconstrained(lp: &BoxedLp) -> Vec<f64> {
    lp.a.iter().map(|&a| if a < 0.0 { 1.0 } else { 0.0 }).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierPoint {
    pub tau: f64,
    /// `F(tau)`; `None` when the level is infeasible.
    pub value: Option<f64>,
    pub lambda: Option<f64>,
    pub status: LpStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierCurve {
    pub points: Vec<FrontierPoint>,
    pub tau_star: f64,
    /// Largest feasible grid level.
    pub tau_max: Option<f64>,
}

impl FrontierCurve {
    pub fn taus(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.tau).collect()
    }

    /// Feasible `(tau, F)` pairs in grid order.
    pub fn feasible(&self) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .filter_map(|p| p.value.map(|v| (p.tau, v)))
            .collect()
    }
}

/// Evenly spaced grid of `n` points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n)
            .map(|i| {
                let (i, m) = (i as f64, (n - 1) as f64);
                (lo * (m - i) + hi * i) / m
            })
            .collect(),
    }
}

/// `F(tau) = min{CS(f; D, c) : Fair(f) >= tau} - min_f CS(f; D, c)` on each
/// grid level, solved in parallel and returned in grid order.
pub fn compute_frontier(
    dist: &DiscreteJoint,
    c: CostParam,
    fairness: &FairnessSpec,
    taus: &[f64],
) -> Result<FrontierCurve> {
    let points = taus
        .par_iter()
        .map(|&tau| {
            let lp = build_lp(dist, c, &fairness.with_tau(tau))?;
            let base = lp.objective_at(&unconstrained(&lp));
            let sol = solve_boxed_lp(&lp);
            Ok(match sol.status {
                LpStatus::Optimal => FrontierPoint {
                    tau,
                    value: Some(sol.objective - base),
                    lambda: Some(sol.dual_lambda),
                    status: sol.status,
                },
                LpStatus::Infeasible => FrontierPoint {
                    tau,
                    value: None,
                    lambda: None,
                    status: sol.status,
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let tau_max = points
        .iter()
        .filter(|p| p.status == LpStatus::Optimal)
        .map(|p| p.tau)
        .fold(None, |acc: Option<f64>, t| Some(acc.map_or(t, |a| a.max(t))));
    Ok(FrontierCurve {
        points,
        tau_star: tau_star_direct(dist, c, fairness)?,
        tau_max,
    })
}
