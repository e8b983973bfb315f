//! `min offset + a.f` subject to `lo - k <= b.f <= hi - k`, `0 <= f <= 1`.
//!
//! One linear constraint over a box: the optimum is the unconstrained
//! minimiser `1[a < 0]` pushed along the cheapest exchange ratios `a/b`
//! until the violated bound is met, with at most one coordinate left
//! fractional.

use serde::{Deserialize, Serialize};

use crate::distributions::RandomizedClassifier;

/// Slack allowed when comparing `b.f` against the bounds.
pub const FEASIBILITY_TOL: f64 = 1e-12;

/// Relative slack under which a partial move is completed to a vertex.
const SNAP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxedLp {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// Constant part of the objective.
    pub objective_offset: f64,
    /// Constant part of the constrained quantity, `q(f) = k + b.f`.
    pub k_offset: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
}

impl LpStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            LpStatus::Optimal => "optimal",
            LpStatus::Infeasible => "infeasible",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub f: RandomizedClassifier,
    /// `+inf` when infeasible.
    pub objective: f64,
    /// Multiplier of the active bound: positive for `lo`, negative for `hi`.
    pub dual_lambda: f64,
    pub fractional_index: Option<usize>,
    pub status: LpStatus,
}

impl BoxedLp {
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// Bounds on `b.f`.
    pub fn bf_bounds(&self) -> (f64, f64) {
        (self.lo - self.k_offset, self.hi - self.k_offset)
    }

    pub fn objective_at(&self, f: &[f64]) -> f64 {
        self.objective_offset + dot(&self.a, f)
    }

    /// The constrained quantity `k + b.f`.
    pub fn constraint_at(&self, f: &[f64]) -> f64 {
        self.k_offset + dot(&self.b, f)
    }

    pub fn is_feasible(&self, f: &[f64], tol: f64) -> bool {
        let q = self.constraint_at(f);
        q >= self.lo - tol && q <= self.hi + tol
    }

    /// Range of `b.f` over the box.
    pub fn attainable(&self) -> (f64, f64) {
        let lo = self.b.iter().map(|v| v.min(0.0)).sum();
        let hi = self.b.iter().map(|v| v.max(0.0)).sum();
        (lo, hi)
    }

    /// `g(lambda) = offset + sum min(0, a - lambda b) + lambda L` for
    /// `lambda >= 0` and `... + lambda U` for `lambda < 0`.
    pub fn dual_value(&self, lambda: f64) -> f64 {
        let (l, u) = self.bf_bounds();
        let inner: f64 = self
            .a
            .iter()
            .zip(&self.b)
            .map(|(a, b)| (a - lambda * b).min(0.0))
            .sum();
        let bound = if lambda > 0.0 {
            lambda * l
        } else if lambda < 0.0 {
            lambda * u
        } else {
            0.0
        };
        self.objective_offset + inner + bound
    }

    /// Lagrangian of a given `f` at `lambda`; equals `dual_value` when `f`
    /// minimises `(a - lambda b).f`.
    pub fn lagrangian(&self, f: &[f64], lambda: f64) -> f64 {
        let (l, u) = self.bf_bounds();
        let inner: f64 = self
            .a
            .iter()
            .zip(&self.b)
            .zip(f)
            .map(|((a, b), v)| (a - lambda * b) * v)
            .sum();
        let bound = if lambda > 0.0 {
            lambda * l
        } else if lambda < 0.0 {
            lambda * u
        } else {
            0.0
        };
        self.objective_offset + inner + bound
    }

    /// Ratios `a/b` over `b != 0`, plus zero, sorted and deduplicated.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .a
            .iter()
            .zip(&self.b)
            .filter(|(_, b)| **b != 0.0)
            .map(|(a, b)| a / b)
            .chain(std::iter::once(0.0))
            .collect();
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn infeasible(n: usize) -> LpSolution {
    LpSolution {
        f: RandomizedClassifier::from_bools(std::iter::repeat_n(false, n)),
        objective: f64::INFINITY,
        dual_lambda: 0.0,
        fractional_index: None,
        status: LpStatus::Infeasible,
    }
}

/// Raises `b.f` from `f` to `target` at least cost. Returns the multiplier
/// and the coordinate left fractional, if any.
fn raise(a: &[f64], b: &[f64], f: &mut [f64], target: f64) -> (f64, Option<usize>) {
    let mut moves: Vec<(f64, usize)> = (0..a.len())
        .filter(|&i| (b[i] > 0.0 && f[i] == 0.0) || (b[i] < 0.0 && f[i] == 1.0))
        .map(|i| (a[i] / b[i], i))
        .collect();
    moves.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));

    let mut need = target - dot(b, f);
    let mut mu = 0.0;
    for (ratio, i) in moves {
        let gain = b[i].abs();
        if need <= SNAP_TOL * gain {
            break;
        }
        mu = ratio;
        if gain >= need {
            // Within rounding of a vertex, land on it.
            let t = match need / gain {
                t if t >= 1.0 - SNAP_TOL => 1.0,
                t => t,
            };
            let up = f[i] == 0.0;
            f[i] = if up { t } else { 1.0 - t };
            let frac = (f[i] > 0.0 && f[i] < 1.0).then_some(i);
            return (mu, frac);
        }
        f[i] = if f[i] == 0.0 { 1.0 } else { 0.0 };
        need -= gain;
    }
    (mu, None)
}

pub fn solve_boxed_lp(lp: &BoxedLp) -> LpSolution {
    let n = lp.len();
    let (l, u) = lp.bf_bounds();
    let (min_bf, max_bf) = lp.attainable();
    if l > u || max_bf < l - FEASIBILITY_TOL || min_bf > u + FEASIBILITY_TOL {
        return infeasible(n);
    }

    let mut f: Vec<f64> = lp.a.iter().map(|&a| if a < 0.0 { 1.0 } else { 0.0 }).collect();
    let s0 = dot(&lp.b, &f);
    let (dual_lambda, fractional_index) = if s0 < l - FEASIBILITY_TOL {
        raise(&lp.a, &lp.b, &mut f, l)
    } else if s0 > u + FEASIBILITY_TOL {
        let neg_b: Vec<f64> = lp.b.iter().map(|v| -v).collect();
        let (mu, frac) = raise(&lp.a, &neg_b, &mut f, -u);
        (-mu, frac)
    } else {
        (0.0, None)
    };

    LpSolution {
        objective: lp.objective_at(&f),
        f: RandomizedClassifier::from_clamped(f),
        dual_lambda,
        fractional_index,
        status: LpStatus::Optimal,
    }
}
