//! Claim price sets: the classical interval `Π(C)`, the envelope of the
//! integer-arbitrage-free prices `Π_Z(C)`, one-period membership tests and
//! NIA checks for user-supplied price processes.
//!
//! Both intervals come from the same pair of LPs, `min/max E_Q[Ĉ]` over the
//! martingale polytope. Every martingale measure vanishes on `A`, so the
//! closed polytope is already the face of measures vanishing on `A`.

use std::fmt;

use crate::arbitrage::support::{certify_affine, measure_lp, system, to_f64_vec, Kind, System};
use crate::arbitrage::{na_check, nia_check, ArbitrageReport, Verdict};
use crate::error::{Error, Result};
use crate::linalg::split_rows;
use crate::linprog::{lp_solve, LpError, LpStatus, Sense};
use crate::market::{Asset, Claim, MarketModel, Strategy};
use crate::scalar::{NumericContext, Scalar, ScalarError, Sign};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Openness {
    Open,
    Closed,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Classical,
    NiaEnvelope,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PriceInterval {
    pub lo: Scalar,
    pub hi: Scalar,
    pub lo_open: Openness,
    pub hi_open: Openness,
    /// The price set is known to be empty.
    pub empty: bool,
    pub replicable: bool,
    pub provenance: Provenance,
    /// Endpoints are binary64 values that could not be certified exactly.
    pub approx: bool,
    /// NIA was not confirmed: the integer search ran out of budget.
    pub nia_unconfirmed: bool,
}

impl fmt::Display for PriceInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = match self.lo_open {
            Openness::Open => "(",
            Openness::Closed => "[",
            Openness::Unknown => "?",
        };
        let r = match self.hi_open {
            Openness::Open => ")",
            Openness::Closed => "]",
            Openness::Unknown => "?",
        };
        write!(f, "{l}{}, {}{r}", self.lo, self.hi)?;
        if self.empty {
            write!(f, " (empty)")?;
        }
        Ok(())
    }
}

/// Optimal value of `E_Q[Ĉ]` over the martingale polytope.
#[derive(Debug, Clone)]
pub(crate) struct Extremum {
    pub value: Scalar,
    pub approx: bool,
}

fn is_escalation(e: &LpError) -> bool {
    matches!(e, LpError::Scalar(ScalarError::Nonlinear) | LpError::Scalar(ScalarError::PrecisionExhausted(_)))
}

/// `max` or `min` of `E_Q[ĉ]`. Exact when the simplex stays in the scalar
/// field; otherwise a binary64 optimum certified by a rational measure from
/// the split constraints and an exact hedge with the same initial value.
pub(crate) fn expectation_extremum(sys: &System, c_hat: &[Scalar], sense: Sense) -> Result<Extremum> {
    let ctx = &sys.ctx;
    let n = c_hat.len();
    let mut lp = measure_lp(&sys.constraints, n, 0);
    lp.objective = c_hat.to_vec();
    lp.sense = sense;
    let exact = match lp_solve(&lp, ctx) {
        Ok(res) => Some(res),
        Err(e) if sys.kind == Kind::Symbolic && is_escalation(&e) => None,
        Err(e) => return Err(e.into()),
    };
    if let Some(res) = exact {
        return match res.status {
            LpStatus::Optimal => Ok(Extremum { value: res.objective.unwrap_or_else(Scalar::zero), approx: false }),
            LpStatus::Infeasible => Err(Error::ModelHasArbitrage),
            LpStatus::Unbounded => Err(Error::InvariantViolation("expectation over a simplex is unbounded".into())),
        };
    }

    let fl = lp_solve(&lp.to_float(ctx)?, ctx)?;
    match fl.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(Error::ModelHasArbitrage),
        LpStatus::Unbounded => return Err(Error::InvariantViolation("expectation over a simplex is unbounded".into())),
    }
    let v_f = ctx.to_f64(fl.objective.as_ref().unwrap_or(&Scalar::zero()))?;
    let approx = Extremum { value: Scalar::Float(v_f), approx: true };

    // Lower (for max) bound attained by a rational martingale measure.
    let names = crate::arbitrage::support::basis_of(&sys.constraints);
    let Some(split) = split_rows(&sys.constraints, &names) else { return Ok(approx) };
    let mut slp = measure_lp(&[], n, 0);
    for r in split {
        slp.add_row(r.into_iter().map(Scalar::Rational).collect(), crate::linprog::Relation::Eq, Scalar::zero());
    }
    slp.objective = c_hat.to_vec();
    slp.sense = sense;
    let sres = match lp_solve(&slp, ctx) {
        Ok(r) if r.status == LpStatus::Optimal => r,
        _ => return Ok(approx),
    };
    let v_s = sres.objective.clone().unwrap_or_else(Scalar::zero);

    // Matching bound from an exact hedge `V₀ + φ·ΔŜ ≥ Ĉ` (≤ for min).
    let (hedge_rows, sol_f) = hedge_system(sys, &fl.dual)?;
    let rows_f: Vec<Vec<f64>> = hedge_rows.iter().map(|r| to_f64_vec(r, ctx)).collect::<Result<_>>()?;
    let c_f = to_f64_vec(c_hat, ctx)?;
    let slack: Vec<f64> =
        rows_f.iter().zip(&c_f).map(|(r, c)| r.iter().zip(&sol_f).map(|(a, b)| a * b).sum::<f64>() - c).collect();
    let scale = slack.iter().chain(&c_f).fold(1.0f64, |m, x| m.max(x.abs()));
    let float_tight: Vec<usize> = (0..n).filter(|&w| slack[w].abs() <= 1e-7 * scale).collect();
    let support: Vec<usize> = (0..n).filter(|&w| !sres.x[w].is_exact_zero()).collect();
    let ge = sense == Sense::Max;
    let Some(hedge) = certify_affine(&hedge_rows, c_hat, &sol_f, &[support, float_tight], ge, ctx)? else {
        return Ok(approx);
    };
    if ctx.is_zero(&hedge[0].sub(&v_s)?)? {
        Ok(Extremum { value: v_s, approx: false })
    } else {
        Ok(approx)
    }
}

/// Rows `(1, V̂_T − V₀)` over `(V₀, positions)` and the binary64 hedge read
/// off the multipliers of the measure LP.
pub(crate) fn hedge_system(sys: &System, dual: &[Scalar]) -> Result<(Vec<Vec<Scalar>>, Vec<f64>)> {
    let rows: Vec<Vec<Scalar>> = sys
        .rows
        .iter()
        .map(|r| {
            let mut v = Vec::with_capacity(r.len() + 1);
            v.push(Scalar::one());
            v.extend(r.iter().cloned());
            v
        })
        .collect();
    let mut sol = vec![dual.first().cloned().unwrap_or_else(Scalar::zero)];
    sol.extend(sys.spread(dual.get(1..).unwrap_or(&[])));
    Ok((rows, to_f64_vec(&sol, &sys.ctx)?))
}

fn check_claim(m: &MarketModel, claim: &Claim) -> Result<Vec<Scalar>> {
    if claim.payoff.len() != m.n() {
        return Err(Error::DimensionMismatch(format!("claim has {} payoffs for {} states", claim.payoff.len(), m.n())));
    }
    m.discounted_payoff(claim)
}

fn envelope(m: &MarketModel, claim: &Claim) -> Result<(Scalar, Scalar, bool, NumericContext)> {
    let sys = system(m)?;
    let c_hat = check_claim(m, claim)?;
    let lo = expectation_extremum(&sys, &c_hat, Sense::Min)?;
    let hi = expectation_extremum(&sys, &c_hat, Sense::Max)?;
    Ok((lo.value, hi.value, lo.approx || hi.approx, sys.ctx))
}

/// `Π(C)` under NA: open unless the claim is replicable.
pub fn classical_price_bounds(m: &MarketModel, claim: &Claim) -> Result<PriceInterval> {
    if na_check(m)?.verdict != Verdict::Holds {
        return Err(Error::ModelHasArbitrage);
    }
    let (lo, hi, approx, ctx) = envelope(m, claim)?;
    let replicable = ctx.cmp(&hi, &lo)? == Sign::Zero;
    let open = if replicable { Openness::Closed } else { Openness::Open };
    Ok(PriceInterval {
        lo,
        hi,
        lo_open: open,
        hi_open: open,
        empty: false,
        replicable,
        provenance: Provenance::Classical,
        approx,
        nia_unconfirmed: false,
    })
}

/// Envelope `[inf, sup]` of `E_Q[Ĉ]` over martingale measures, the closure
/// of `Π_Z(C)` when it is nonempty. One-period endpoints are resolved by
/// membership tests.
pub fn nia_price_interval(m: &MarketModel, claim: &Claim, radius: u32) -> Result<PriceInterval> {
    let nia = nia_check(m, radius)?;
    if nia.verdict == Verdict::Fails {
        return Err(Error::ModelHasIntegerArbitrage);
    }
    let (lo, hi, approx, ctx) = envelope(m, claim)?;
    let replicable = ctx.cmp(&hi, &lo)? == Sign::Zero;
    let (mut lo_open, mut hi_open) = (Openness::Unknown, Openness::Unknown);
    if m.periods == 1 && !approx {
        let resolve = |p: &Scalar| -> Result<Openness> {
            Ok(match endpoint_membership(m, claim, p, radius)?.verdict {
                MemberVerdict::Member => Openness::Closed,
                MemberVerdict::NotMember => Openness::Open,
                MemberVerdict::Unknown => Openness::Unknown,
            })
        };
        lo_open = resolve(&lo)?;
        hi_open = if replicable { lo_open } else { resolve(&hi)? };
    }
    let empty = replicable && lo_open == Openness::Open;
    Ok(PriceInterval {
        lo,
        hi,
        lo_open,
        hi_open,
        empty,
        replicable,
        provenance: Provenance::NiaEnvelope,
        approx,
        nia_unconfirmed: nia.verdict == Verdict::NoWitnessWithinBudget,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MemberVerdict {
    Member,
    NotMember,
    Unknown,
}

impl fmt::Display for MemberVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MemberVerdict::Member => "member",
            MemberVerdict::NotMember => "not-member",
            MemberVerdict::Unknown => "unknown-within-budget",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Membership {
    pub verdict: MemberVerdict,
    /// Integer arbitrage in the market extended by the claim at price `p`.
    pub witness: Option<Strategy>,
    pub reason: String,
}

/// Extends a one-period model by the claim traded at `p`.
fn extended_one_period(m: &MarketModel, claim: &Claim, p: &Scalar) -> MarketModel {
    m.with_asset(Asset { name: "C".into(), prices: vec![vec![p.clone(); m.n()], claim.payoff.clone()] })
}

/// Whether `p ∈ Π_Z(C)` for a one-period model.
pub fn price_membership_t1(m: &MarketModel, claim: &Claim, p: &Scalar, radius: u32) -> Result<Membership> {
    if m.periods != 1 {
        return Err(Error::NotOnePeriod);
    }
    let ctx = m.context()?;
    if ctx.sign(p)? == Sign::Negative {
        return Err(Error::Input("price must be nonnegative".into()));
    }
    check_claim(m, claim)?;
    let base = nia_check(m, radius)?;
    if base.verdict == Verdict::Fails {
        let witness = base.witness.map(|mut s| {
            for node in s.positions.iter_mut().flatten() {
                node.push(Scalar::zero());
            }
            s
        });
        return Ok(Membership {
            verdict: MemberVerdict::NotMember,
            witness,
            reason: "the base model admits an integer arbitrage".into(),
        });
    }
    let (lo, hi, _, _) = envelope(m, claim)?;
    if ctx.cmp(p, &lo)? == Sign::Positive && ctx.cmp(p, &hi)? == Sign::Negative {
        return Ok(Membership {
            verdict: MemberVerdict::Member,
            witness: None,
            reason: "interior of the martingale-measure envelope".into(),
        });
    }
    endpoint_membership(m, claim, p, radius)
}

/// Membership decided on the extended market alone.
fn endpoint_membership(m: &MarketModel, claim: &Claim, p: &Scalar, radius: u32) -> Result<Membership> {
    let ext = extended_one_period(m, claim, p);
    let r = nia_check(&ext, radius)?;
    Ok(match r.verdict {
        Verdict::Holds => Membership {
            verdict: MemberVerdict::Member,
            witness: None,
            reason: "the extended market satisfies NIA".into(),
        },
        Verdict::Fails => Membership {
            verdict: MemberVerdict::NotMember,
            witness: r.witness,
            reason: "integer arbitrage in the extended market".into(),
        },
        Verdict::NoWitnessWithinBudget => Membership {
            verdict: MemberVerdict::Unknown,
            witness: None,
            reason: format!("no integer arbitrage within radius {radius}; {}", r.note),
        },
    })
}

/// NIA of the market extended by the price process `x[t][state]`.
pub fn extension_nia_check(m: &MarketModel, claim: &Claim, x: &[Vec<Scalar>], radius: u32) -> Result<ArbitrageReport> {
    crate::market::require_valid(m)?;
    let ctx = m.context()?;
    if x.len() != m.periods + 1 || x.iter().any(|r| r.len() != m.n()) {
        return Err(Error::DimensionMismatch("price process needs T + 1 rows of one value per state".into()));
    }
    check_claim(m, claim)?;
    for (t, part) in m.filtration.iter().enumerate() {
        for (b, block) in part.iter().enumerate() {
            let first = &x[t][block[0]];
            for &w in &block[1..] {
                if !ctx.is_zero(&x[t][w].sub(first)?)? {
                    return Err(Error::NotAdapted(format!("time {t}, block {b}")));
                }
            }
        }
    }
    for (v, c) in x[m.periods].iter().zip(&claim.payoff) {
        if !ctx.is_zero(&v.sub(c)?)? {
            return Err(Error::TerminalMismatch);
        }
    }
    for v in x.iter().flatten() {
        if ctx.sign(v)? == Sign::Negative {
            return Err(Error::Input("price process must be nonnegative".into()));
        }
    }
    let ext = m.with_asset(Asset { name: "X".into(), prices: x.to_vec() });
    nia_check(&ext, radius)
}

#[cfg(test)]
mod tests;
