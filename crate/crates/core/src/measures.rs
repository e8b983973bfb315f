//! Error rates, cost-sensitive risks and the fairness measures built on them.
//!
//! Every measure here is a pure function of a pair of class-conditional error
//! rates (plus a class prior where the risk needs one). Turning a classifier
//! and a distribution into [`Rates`] is the job of [`crate::distributions`]
//! and [`crate::plugin::evaluate_empirical`].
//!
//! The central identities:
//!
//! * `DI(f) >= tau` iff `CS_bal(f; c) >= 1 - c` with `c = 1 / (1 + tau)`;
//! * `MD(f) = 1 - 2 * CS_bal(f; 1/2)`;
//! * `CS_bal(1 - f; c) = 1 - CS_bal(f; c)`, so the symmetrised balanced risk
//!   is `min(v, 1 - v)` and peaks at the uniformly random classifier.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance used by the superlevel-set predicates.
pub const DEFAULT_TOL: f64 = 1e-12;

/// A cost parameter in `[0, 1]`. Used both for the target cost `c` and the
/// fairness cost `cbar`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct CostParam(f64);

impl CostParam {
    pub fn new(c: f64) -> Result<Self> {
        check_unit("c", c)?;
        Ok(CostParam(c))
    }

    pub const HALF: CostParam = CostParam(0.5);

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

/// False-negative and false-positive rate of a (possibly randomised)
/// classifier on one binary label channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    fnr: f64,
    fpr: f64,
}

impl Rates {
    pub fn new(fnr: f64, fpr: f64) -> Result<Self> {
        check_unit("fnr", fnr)?;
        check_unit("fpr", fpr)?;
        Ok(Rates { fnr, fpr })
    }

    /// Clamps tiny excursions outside `[0, 1]` produced by floating-point
    /// summation. Anything further out than `1e-9` is still an error.
    pub(crate) fn from_sums(fnr: f64, fpr: f64) -> Result<Self> {
        let fix = |v: f64| {
            if (-1e-9..0.0).contains(&v) {
                0.0
            } else if v > 1.0 && v <= 1.0 + 1e-9 {
                1.0
            } else {
                v
            }
        };
        Rates::new(fix(fnr), fix(fpr))
    }

    #[inline]
    pub fn fnr(&self) -> f64 {
        self.fnr
    }

    #[inline]
    pub fn fpr(&self) -> f64 {
        self.fpr
    }

    /// Rates of the anti-classifier `1 - f`.
    pub fn anti(&self) -> Rates {
        Rates {
            fnr: 1.0 - self.fnr,
            fpr: 1.0 - self.fpr,
        }
    }
}

fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::InvalidProbability { name, value })
    }
}

/// Which sensitive distribution a fairness measure is evaluated on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SensitiveChannel {
    /// `Pr(X, Ybar)`: demographic parity.
    Dp,
    /// `Pr(X, Ybar | Y = 1)`: equality of opportunity.
    Eo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FairnessForm {
    CostSensitive,
    MeanDifference,
    DisparateImpact,
}

impl FairnessForm {
    pub fn name(self) -> &'static str {
        match self {
            FairnessForm::CostSensitive => "cost-sensitive",
            FairnessForm::MeanDifference => "mean-difference",
            FairnessForm::DisparateImpact => "disparate-impact",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Symmetrization {
    None,
    /// `min(R(f), R(1 - f))`.
    MinWithAnti,
    /// `min((1 - alpha) R(f), alpha R(1 - f))` with `alpha` the raw fairness
    /// of the constant classifier `f = pibar`.
    PriorWeighted,
}

/// Fairness requirement: measure form, its cost, symmetrisation, level and
/// the sensitive distribution it is measured on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FairnessSpec {
    pub form: FairnessForm,
    /// Fairness cost. Used by `CostSensitive`; the other two forms derive
    /// their own cost from `tau`.
    pub cbar: CostParam,
    pub symmetrization: Symmetrization,
    pub tau: f64,
    pub channel: SensitiveChannel,
}

impl FairnessSpec {
    /// Symmetrised cost-sensitive fairness on the demographic-parity channel.
    pub fn cs_symmetric(cbar: CostParam, tau: f64) -> Self {
        FairnessSpec {
            form: FairnessForm::CostSensitive,
            cbar,
            symmetrization: Symmetrization::MinWithAnti,
            tau,
            channel: SensitiveChannel::Dp,
        }
    }

    pub fn with_tau(self, tau: f64) -> Self {
        FairnessSpec { tau, ..self }
    }

    pub fn with_channel(self, channel: SensitiveChannel) -> Self {
        FairnessSpec { channel, ..self }
    }
}

/// `(1 - c) * FNR + c * FPR`.
pub fn balanced_cs_risk(rates: Rates, c: CostParam) -> f64 {
    let c = c.get();
    (1.0 - c) * rates.fnr + c * rates.fpr
}

/// `pi (1 - c) FNR + (1 - pi) c FPR`.
pub fn standard_cs_risk(rates: Rates, pi: f64, c: CostParam) -> Result<f64> {
    check_unit("pi", pi)?;
    let c = c.get();
    Ok(pi * (1.0 - c) * rates.fnr + (1.0 - pi) * c * rates.fpr)
}

/// The scale `alpha + beta` and the cost `c'` for which
/// `CS(f; pi, c) = (alpha + beta) * CS_bal(f; c')`.
///
/// Returns `None` when `alpha + beta = 0`, where every classifier has zero
/// standard risk.
pub fn balanced_reparameterization(pi: f64, c: CostParam) -> Option<(f64, CostParam)> {
    let alpha = pi * (1.0 - c.get());
    let beta = (1.0 - pi) * c.get();
    let scale = alpha + beta;
    (scale > 0.0).then(|| (scale, CostParam((beta / scale).clamp(0.0, 1.0))))
}

/// `1 - FNR - FPR`.
pub fn mean_difference(rates: Rates) -> f64 {
    1.0 - rates.fnr - rates.fpr
}

/// `FPR / (1 - FNR)`.
pub fn disparate_impact(rates: Rates) -> Result<f64> {
    if rates.fnr >= 1.0 {
        return Err(Error::UndefinedRatio("disparate impact with FNR = 1"));
    }
    Ok(rates.fpr / (1.0 - rates.fnr))
}

/// `(FNR + FPR) / 2`.
pub fn ber_from_rates(rates: Rates) -> f64 {
    0.5 * (rates.fnr + rates.fpr)
}

/// Cost `1 / (1 + tau)` whose balanced risk certifies disparate impact at
/// level `tau`.
pub fn di_equiv_cost(tau: f64) -> Result<CostParam> {
    check_unit("tau", tau)?;
    Ok(CostParam(1.0 / (1.0 + tau)))
}

/// Cost `(1 + tau) / 2`. With `c` so defined, `MD(f) >= tau` iff
/// `CS_bal(f; 1/2) <= 1 - c`, and `|MD(f)| <= tau` iff
/// `CS_bal(f; 1/2)` lies in `[1 - c, c]`.
pub fn md_equiv_cost(tau: f64) -> Result<CostParam> {
    check_unit("tau", tau)?;
    Ok(CostParam((1.0 + tau) / 2.0))
}

/// `DI(f) >= tau` with the boundary counted as attained.
pub fn di_at_least(rates: Rates, tau: f64, tol: f64) -> Result<bool> {
    Ok(disparate_impact(rates)? >= tau - tol)
}

/// `CS_bal(f; 1/(1+tau)) >= tau / (1 + tau)`: the cost-sensitive certificate
/// for `DI(f) >= tau`.
pub fn cs_certifies_di(rates: Rates, tau: f64, tol: f64) -> Result<bool> {
    let c = di_equiv_cost(tau)?;
    Ok(balanced_cs_risk(rates, c) >= (1.0 - c.get()) - tol)
}

/// Combines a raw fairness value with the value of the anti-classifier.
pub fn symmetrize(value: f64, anti_value: f64, mode: Symmetrization, alpha: f64) -> Result<f64> {
    match mode {
        Symmetrization::None => Ok(value),
        Symmetrization::MinWithAnti => Ok(value.min(anti_value)),
        Symmetrization::PriorWeighted => {
            check_unit("alpha", alpha)?;
            Ok(((1.0 - alpha) * value).min(alpha * anti_value))
        }
    }
}

/// Symmetrised balanced cost-sensitive risk `min(v, 1 - v)`.
pub fn symmetric_balanced_cs(rates: Rates, c: CostParam) -> f64 {
    let v = balanced_cs_risk(rates, c);
    v.min(1.0 - v)
}

/// Symmetrised mean difference `min(MD(f), MD(1 - f)) = -|MD(f)|`.
pub fn symmetric_mean_difference(rates: Rates) -> f64 {
    let md = mean_difference(rates);
    md.min(mean_difference(rates.anti()))
}

/// The four ways of reading DI off BER (and back).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiBerIdentities {
    /// `FPR / (1 - 2 BER + FPR)`
    pub di_from_ber_fpr: f64,
    /// `(2 BER - FNR) / (1 - FNR)`
    pub di_from_ber_fnr: f64,
    /// `FNR / 2 + (1 - FNR) DI / 2`
    pub ber_from_di_fnr: f64,
    /// `FPR / 2 + (1 - FPR / DI) / 2`; undefined when `DI = 0`.
    pub ber_from_di_fpr: Option<f64>,
}

pub fn di_ber_identities(rates: Rates) -> Result<DiBerIdentities> {
    let di = disparate_impact(rates)?;
    let ber = ber_from_rates(rates);
    let (fnr, fpr) = (rates.fnr, rates.fpr);
    Ok(DiBerIdentities {
        di_from_ber_fpr: fpr / (1.0 - 2.0 * ber + fpr),
        di_from_ber_fnr: (2.0 * ber - fnr) / (1.0 - fnr),
        ber_from_di_fnr: 0.5 * fnr + 0.5 * (1.0 - fnr) * di,
        ber_from_di_fpr: (di != 0.0).then(|| 0.5 * fpr + 0.5 * (1.0 - fpr / di)),
    })
}

/// `BER <= epsilon` forces `DI <= 2 epsilon`.
pub fn di_bound_from_ber(epsilon: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&epsilon) {
        return Err(Error::InvalidParameter(format!(
            "epsilon = {epsilon} is outside [0, 1/2]"
        )));
    }
    Ok(2.0 * epsilon)
}

/// Rate-dependent DI ceiling implied by `BER <= epsilon`:
/// `min(FPR / (1 - 2 eps + FPR), (2 eps - FNR) / (1 - FNR))`.
pub fn di_ceiling_given_ber(rates: Rates, epsilon: f64) -> Result<f64> {
    if rates.fnr >= 1.0 {
        return Err(Error::UndefinedRatio("DI ceiling with FNR = 1"));
    }
    let first = rates.fpr / (1.0 - 2.0 * epsilon + rates.fpr);
    let second = (2.0 * epsilon - rates.fnr) / (1.0 - rates.fnr);
    Ok(first.min(second))
}

/// BER threshold equivalent to `DI <= tau` for the given rates:
/// `min(tau/2 + (1 - tau)/2 FNR, 1/2 - (1 - tau)/(2 tau) FPR)`.
pub fn ber_threshold_for_di(rates: Rates, tau: f64) -> Result<f64> {
    check_unit("tau", tau)?;
    let first = 0.5 * tau + 0.5 * (1.0 - tau) * rates.fnr;
    let second = if tau > 0.0 {
        0.5 - (1.0 - tau) / (2.0 * tau) * rates.fpr
    } else {
        f64::INFINITY
    };
    Ok(first.min(second))
}

/// The classifier that rejects everything on the sensitive channel: BER is
/// exactly one half, yet DI is undefined (and tends to 0 as FNR approaches 1
/// from below). High balanced error therefore does not rule out disparate
/// impact.
#[derive(Debug, Clone, Copy)]
pub struct DegenerateCounterexample {
    pub rates: Rates,
    pub ber: f64,
    pub di_defined: bool,
}

pub fn degenerate_counterexample() -> DegenerateCounterexample {
    let rates = Rates { fnr: 1.0, fpr: 0.0 };
    DegenerateCounterexample {
        rates,
        ber: ber_from_rates(rates),
        di_defined: disparate_impact(rates).is_ok(),
    }
}

/// A named relation between DI and BER evaluated on one pair of rates.
/// `holds` is `None` when the relation's hypothesis does not apply.
#[derive(Debug, Clone, Serialize)]
pub struct BoundCheck {
    pub name: &'static str,
    pub holds: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsReport {
    pub rates: Rates,
    pub ber: f64,
    pub di: Option<f64>,
    pub md: f64,
    pub identities: Option<DiBerIdentities>,
    pub checks: Vec<BoundCheck>,
}

impl BoundsReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.holds != Some(false))
    }
}

/// Evaluates DI, BER, the identity branches and every bound relation on a
/// single pair of rates.
pub fn bounds_report(rates: Rates) -> BoundsReport {
    let ber = ber_from_rates(rates);
    let di = disparate_impact(rates).ok();
    let identities = di_ber_identities(rates).ok();
    let tol = 1e-12;
    let mut checks = Vec::new();

    let close = |x: f64, y: f64| (x - y).abs() <= tol * (1.0 + y.abs());
    checks.push(BoundCheck {
        name: "identity: di = fpr / (1 - 2 ber + fpr)",
        holds: di.zip(identities).map(|(d, id)| close(id.di_from_ber_fpr, d)),
    });
    checks.push(BoundCheck {
        name: "identity: di = (2 ber - fnr) / (1 - fnr)",
        holds: di.zip(identities).map(|(d, id)| close(id.di_from_ber_fnr, d)),
    });
    checks.push(BoundCheck {
        name: "identity: ber = fnr/2 + (1 - fnr) di / 2",
        holds: identities.map(|id| close(id.ber_from_di_fnr, ber)),
    });
    checks.push(BoundCheck {
        name: "identity: ber = fpr/2 + (1 - fpr / di) / 2",
        holds: identities
            .and_then(|id| id.ber_from_di_fpr)
            .map(|v| close(v, ber)),
    });
    checks.push(BoundCheck {
        name: "bound: ber <= 1/2 implies di <= 2 ber",
        holds: di.filter(|_| ber <= 0.5).map(|d| d <= 2.0 * ber + tol),
    });
    checks.push(BoundCheck {
        name: "bound: di <= rate-dependent ceiling at eps = ber",
        holds: di.filter(|_| ber <= 0.5).and_then(|d| {
            di_ceiling_given_ber(rates, ber)
                .ok()
                .map(|ceiling| d <= ceiling + 1e-9)
        }),
    });
    checks.push(BoundCheck {
        name: "bound: di >= 0.8 implies ber >= 0.4",
        holds: di.filter(|&d| d >= 0.8).map(|_| ber >= 0.4 - tol),
    });
    checks.push(BoundCheck {
        name: "lemma: di >= 0.8 iff cs_bal(5/9) >= 4/9",
        holds: match (di_at_least(rates, 0.8, tol), cs_certifies_di(rates, 0.8, tol)) {
            (Ok(a), Ok(b)) => Some(a == b),
            _ => None,
        },
    });
    checks.push(BoundCheck {
        name: "lemma: md = 1 - 2 ber",
        holds: Some(close(mean_difference(rates), 1.0 - 2.0 * ber)),
    });

    BoundsReport {
        rates,
        ber,
        di,
        md: mean_difference(rates),
        identities,
        checks,
    }
}
