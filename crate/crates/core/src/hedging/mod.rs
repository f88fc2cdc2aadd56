//! Super- and subhedging: real hedges from the hedging LP, integer min-max
//! hedges, the rounding gap bound, scaling in the number of copies and
//! rational hedges with bounded denominators.
//!
//! Everything is phrased on the discounted terminal rows
//! `V̂_T(ω) = V₀ + rows[ω]·φ` over the positions that actually move a gain.
//! Subhedges reuse the superhedge code: `V_T(φ) ≤ C` iff `V_T(−φ) ≥ −C`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::arbitrage::support::{certify_affine, system, to_f64_vec, Kind, System};
use crate::arbitrage::{na_check, nia_check, Verdict, DEFAULT_RADIUS, SEARCH_BUDGET};
use crate::error::{Error, Result};
use crate::lattice::{dist_pow_below, nearest_with_distance};
use crate::linalg::rationalize;
use crate::linprog::{lp_solve, Bound, LinearProgram, LpError, LpStatus, Relation, Sense};
use crate::market::{value_process, Claim, MarketModel, Strategy, StrategyClass};
use crate::pricing::expectation_extremum;
use crate::scalar::{dot, rational_from_f64, NumericContext, Scalar, ScalarError, Sign};

/// Branch-and-bound node cap per integer program.
pub const NODE_BUDGET: u64 = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Super,
    Sub,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::Super => "super",
            Direction::Sub => "sub",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum HedgeStatus {
    CertifiedOptimal,
    OptimalWithinRadius,
    /// Price exceeds the optimum (or falls short, for subhedges) by at most ε.
    EpsilonApproximate(Scalar),
}

impl fmt::Display for HedgeStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HedgeStatus::CertifiedOptimal => f.write_str("certified-optimal"),
            HedgeStatus::OptimalWithinRadius => f.write_str("optimal-within-radius"),
            HedgeStatus::EpsilonApproximate(e) => write!(f, "epsilon-approximate({e})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HedgeResult {
    pub direction: Direction,
    pub class: StrategyClass,
    /// `V₀` of the strategy.
    pub price: Scalar,
    pub strategy: Strategy,
    pub status: HedgeStatus,
    /// Box radius of an integer search.
    pub radius: Option<u32>,
    /// Common denominator of rational positions.
    pub denominator: Option<BigInt>,
    /// Martingale-measure bound: `sup Π(C)` for super, `inf Π(C)` for sub.
    pub bound: Option<Scalar>,
    /// Binary64 data or an uncertified bound.
    pub approx: bool,
    /// Initial capital was raised beyond the construction to pass verification.
    pub flagged: bool,
    pub nodes: u64,
    pub nia_unconfirmed: bool,
}

/// Discounted superhedging problem on the active positions.
struct Problem {
    sys: System,
    /// Position variables with a nonzero column.
    active: Vec<usize>,
    /// `rows[ω]` restricted to `active`.
    rows: Vec<Vec<Scalar>>,
    c_hat: Vec<Scalar>,
}

impl Problem {
    fn new(m: &MarketModel, claim: &Claim, direction: Direction) -> Result<Problem> {
        let sys = system(m)?;
        if claim.payoff.len() != m.n() {
            return Err(Error::DimensionMismatch(format!(
                "claim has {} payoffs for {} states",
                claim.payoff.len(),
                m.n()
            )));
        }
        let mut c_hat = m.discounted_payoff(claim)?;
        if direction == Direction::Sub {
            c_hat = c_hat.iter().map(Scalar::neg).collect();
        }
        let mut active = sys.kept.clone();
        active.sort_unstable();
        active.dedup();
        let rows = sys.rows.iter().map(|r| active.iter().map(|&j| r[j].clone()).collect()).collect();
        Ok(Problem { sys, active, rows, c_hat })
    }

    fn ctx(&self) -> &NumericContext {
        &self.sys.ctx
    }

    /// Cheapest initial value for positions `phi`: `max_ω(ĉ − rows·φ)`.
    fn price_of(&self, phi: &[Scalar]) -> Result<Scalar> {
        let mut best: Option<Scalar> = None;
        for (row, c) in self.rows.iter().zip(&self.c_hat) {
            let v = c.sub(&dot(row, phi)?)?;
            best = Some(match best {
                None => v,
                Some(b) => self.ctx().max(&b, &v)?,
            });
        }
        Ok(best.unwrap_or_else(Scalar::zero))
    }

    fn superhedges(&self, v0: &Scalar, phi: &[Scalar]) -> Result<bool> {
        for (row, c) in self.rows.iter().zip(&self.c_hat) {
            let v = v0.add(&dot(row, phi)?)?;
            if self.ctx().cmp(&v, c)? == Sign::Negative {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn hedge_lp(&self) -> LinearProgram {
        let k = self.active.len();
        let mut obj = vec![Scalar::zero(); k + 1];
        obj[0] = Scalar::one();
        let mut lp = LinearProgram::new(Sense::Min, obj);
        for j in 0..=k {
            lp.set_bound(j, Bound::free());
        }
        for (row, c) in self.rows.iter().zip(&self.c_hat) {
            let mut coefs = Vec::with_capacity(k + 1);
            coefs.push(Scalar::one());
            coefs.extend(row.iter().cloned());
            lp.add_row(coefs, Relation::Ge, c.clone());
        }
        lp
    }

    fn strategy(&self, v0: Scalar, phi: &[Scalar], class: StrategyClass, direction: Direction) -> Strategy {
        let mut x = vec![Scalar::zero(); self.sys.layout.nvars];
        for (&j, p) in self.active.iter().zip(phi) {
            x[j] = p.clone();
        }
        let mut s = self.sys.layout.strategy(&x, class);
        s.initial_value = v0;
        if direction == Direction::Sub {
            negate(&mut s);
        }
        s
    }

    /// `sup Π` of the (possibly negated) claim from the measure LP.
    fn measure_bound(&self) -> Result<(Scalar, bool)> {
        let e = expectation_extremum(&self.sys, &self.c_hat, Sense::Max)?;
        Ok((e.value, e.approx))
    }
}

fn negate(s: &mut Strategy) {
    s.initial_value = s.initial_value.neg();
    for p in s.positions.iter_mut().flatten().flatten() {
        *p = p.neg();
    }
}

fn oriented(direction: Direction, v: Scalar) -> Scalar {
    match direction {
        Direction::Super => v,
        Direction::Sub => v.neg(),
    }
}

fn is_escalation(e: &LpError) -> bool {
    matches!(e, LpError::Scalar(ScalarError::Nonlinear) | LpError::Scalar(ScalarError::PrecisionExhausted(_)))
}

fn require_nia(m: &MarketModel) -> Result<bool> {
    let r = nia_check(m, DEFAULT_RADIUS)?;
    match r.verdict {
        Verdict::Fails => Err(Error::ModelHasIntegerArbitrage),
        Verdict::Holds => Ok(false),
        Verdict::NoWitnessWithinBudget => Ok(true),
    }
}

/// Real superhedge of the oriented problem: `(V₀, φ, exact optimum?)`.
fn real_core(p: &Problem) -> Result<(Scalar, Vec<Scalar>, bool)> {
    let lp = p.hedge_lp();
    let ctx = p.ctx();
    match lp_solve(&lp, ctx) {
        Ok(res) => match res.status {
            LpStatus::Optimal => {
                let phi = res.x[1..].to_vec();
                let v0 = p.price_of(&phi)?;
                Ok((v0, phi, true))
            }
            LpStatus::Infeasible => Err(Error::InvariantViolation("hedging LP is infeasible".into())),
            LpStatus::Unbounded => Err(Error::ModelHasArbitrage),
        },
        Err(e) if is_escalation(&e) => {
            let fl = lp_solve(&lp.to_float(ctx)?, ctx)?;
            if fl.status != LpStatus::Optimal {
                return Err(Error::InvariantViolation("float hedging LP is not optimal".into()));
            }
            let sol_f = to_f64_vec(&fl.x, ctx)?;
            let rows: Vec<Vec<Scalar>> = lp.rows.iter().map(|r| r.coefs.clone()).collect();
            let rows_f: Vec<Vec<f64>> = rows.iter().map(|r| to_f64_vec(r, ctx)).collect::<Result<_>>()?;
            let c_f = to_f64_vec(&p.c_hat, ctx)?;
            let slack: Vec<f64> = rows_f
                .iter()
                .zip(&c_f)
                .map(|(r, c)| r.iter().zip(&sol_f).map(|(a, b)| a * b).sum::<f64>() - c)
                .collect();
            let scale = slack.iter().chain(&c_f).fold(1.0f64, |m, x| m.max(x.abs()));
            let tight: Vec<usize> = (0..slack.len()).filter(|&w| slack[w].abs() <= 1e-7 * scale).collect();
            let phi = match certify_affine(&rows, &p.c_hat, &sol_f, &[tight], true, ctx)? {
                Some(x) => x[1..].to_vec(),
                None => sol_f[1..].iter().map(|&v| Scalar::Rational(rationalize(v, 1_000_000))).collect(),
            };
            let v0 = p.price_of(&phi)?;
            Ok((v0, phi, false))
        }
        Err(e) => Err(e.into()),
    }
}

/// Cheapest real superhedge (or richest subhedge) and the matching
/// martingale-measure bound.
pub fn real_hedge(m: &MarketModel, claim: &Claim, direction: Direction) -> Result<HedgeResult> {
    let nia_unconfirmed = require_nia(m)?;
    let p = Problem::new(m, claim, direction)?;
    let ctx = p.ctx().clone();
    let (v0, phi, exact) = real_core(&p)?;
    let (bound, bound_approx) = p.measure_bound()?;
    let float = p.sys.kind == Kind::Float;
    let gap = v0.sub(&bound)?;
    let status = if ctx.is_zero(&gap)? {
        HedgeStatus::CertifiedOptimal
    } else if exact && !bound_approx && !float {
        return Err(Error::InvariantViolation(format!("hedge price {v0} differs from measure bound {bound}")));
    } else {
        HedgeStatus::EpsilonApproximate(gap)
    };
    let approx = float || bound_approx || status != HedgeStatus::CertifiedOptimal;
    Ok(HedgeResult {
        direction,
        class: StrategyClass::Real,
        price: oriented(direction, v0.clone()),
        strategy: p.strategy(v0, &phi, StrategyClass::Real, direction),
        status,
        radius: None,
        denominator: None,
        bound: Some(oriented(direction, bound)),
        approx,
        flagged: false,
        nodes: 0,
        nia_unconfirmed,
    })
}

/// Rational hedge whose price is within `eps` of the real optimum.
pub fn rational_hedge(m: &MarketModel, claim: &Claim, direction: Direction, eps: &BigRational) -> Result<HedgeResult> {
    if !eps.is_positive() {
        return Err(Error::Input("ε must be positive".into()));
    }
    let nia_unconfirmed = require_nia(m)?;
    let p = Problem::new(m, claim, direction)?;
    let ctx = p.ctx().clone();
    let (v_real, phi, _) = real_core(&p)?;
    let eps_s = Scalar::Rational(eps.clone());
    let mut digits = 4usize;
    loop {
        let psi: Vec<Scalar> = phi
            .iter()
            .map(|x| match x {
                Scalar::Rational(_) => Ok(x.clone()),
                _ => {
                    let (lo, hi) = ctx.enclose(x, digits)?;
                    Ok(Scalar::Rational((lo + hi) / BigRational::from_integer(2.into())))
                }
            })
            .collect::<Result<_>>()?;
        let v0 = p.price_of(&psi)?;
        let excess = v0.sub(&v_real)?;
        if ctx.cmp(&excess, &eps_s)? != Sign::Positive {
            let den = crate::linprog::common_denominator(psi.iter().filter_map(Scalar::as_rational));
            let status = if ctx.is_zero(&excess)? {
                HedgeStatus::CertifiedOptimal
            } else {
                HedgeStatus::EpsilonApproximate(eps_s)
            };
            return Ok(HedgeResult {
                direction,
                class: StrategyClass::Rational,
                price: oriented(direction, v0.clone()),
                strategy: p.strategy(v0, &psi, StrategyClass::Rational, direction),
                status,
                radius: None,
                denominator: Some(den),
                bound: Some(oriented(direction, v_real)),
                approx: p.sys.kind == Kind::Float,
                flagged: false,
                nodes: 0,
                nia_unconfirmed,
            });
        }
        if digits >= 4096 {
            return Err(Error::Scalar(ScalarError::PrecisionExhausted(digits)));
        }
        digits *= 2;
    }
}

/// `2(⌈‖φ‖∞⌉ + 1)` for the real hedge positions.
fn default_radius(phi: &[Scalar], ctx: &NumericContext) -> Result<u32> {
    let mut top = BigInt::zero();
    for x in phi {
        let a = ctx.abs(x)?;
        let f = ctx.floor(&a)?;
        let c = if Scalar::from_bigint(f.clone()) == a { f } else { f + 1 };
        top = top.max(c);
    }
    let r: BigInt = (top + 1) * 2;
    r.to_u32().ok_or_else(|| Error::Input("real hedge positions are too large for a box search".into()))
}

struct IntegerOptimum {
    v0: Scalar,
    phi: Vec<Scalar>,
    nodes: u64,
    certified: bool,
}

/// Exact branch and bound: `min obj·x` over the LP with `int_vars` integral.
fn branch_and_bound(
    lp: &LinearProgram,
    int_vars: &[usize],
    ctx: &NumericContext,
    nodes: &mut u64,
) -> Result<Option<(Scalar, Vec<Scalar>)>> {
    let mut best: Option<(Scalar, Vec<Scalar>)> = None;
    let mut stack = vec![lp.bounds.clone()];
    let mut work = lp.clone();
    while let Some(bounds) = stack.pop() {
        *nodes += 1;
        if *nodes > NODE_BUDGET {
            return Err(Error::BudgetExceeded { needed: *nodes as f64, budget: NODE_BUDGET as f64 });
        }
        work.bounds = bounds;
        let res = lp_solve(&work, ctx)?;
        if res.status != LpStatus::Optimal {
            continue;
        }
        let obj = res.objective.clone().unwrap_or_else(Scalar::zero);
        if let Some((b, _)) = &best {
            if ctx.cmp(&obj, b)? != Sign::Negative {
                continue;
            }
        }
        let frac = int_vars.iter().copied().find(|&j| !res.x[j].is_integer());
        let Some(j) = frac else {
            best = Some((obj, res.x));
            continue;
        };
        let fl = Scalar::from_bigint(ctx.floor(&res.x[j])?);
        let cur = work.bounds[j].clone();
        let up = Bound { lower: Some(fl.add(&Scalar::one())?), upper: cur.upper.clone() };
        let down = Bound { lower: cur.lower.clone(), upper: Some(fl) };
        let mut b_up = work.bounds.clone();
        b_up[j] = up;
        let mut b_down = work.bounds.clone();
        b_down[j] = down;
        stack.push(b_up);
        stack.push(b_down);
    }
    Ok(best)
}

/// Integer superhedge over `[−R, R]^k` for rational gains, lexicographically
/// smallest among the optimal positions.
fn integer_bb(p: &Problem, radius: u32) -> Result<IntegerOptimum> {
    let ctx = p.ctx();
    let k = p.active.len();
    let r = Scalar::int(radius as i64);
    let mut lp = p.hedge_lp();
    for j in 1..=k {
        lp.set_bound(j, Bound::between(r.neg(), r.clone()));
    }
    let ints: Vec<usize> = (1..=k).collect();
    let mut nodes = 0u64;
    let Some((v_star, _)) = branch_and_bound(&lp, &ints, ctx, &mut nodes)? else {
        return Err(Error::InvariantViolation("integer hedging problem is infeasible".into()));
    };
    // Fix coordinates one at a time at their smallest optimal value.
    lp.set_bound(0, Bound { lower: None, upper: Some(v_star.clone()) });
    for j in 1..=k {
        let mut obj = vec![Scalar::zero(); k + 1];
        obj[j] = Scalar::one();
        lp.objective = obj;
        let Some((z, _)) = branch_and_bound(&lp, &ints, ctx, &mut nodes)? else {
            return Err(Error::InvariantViolation("lexicographic refinement lost feasibility".into()));
        };
        lp.set_bound(j, Bound::between(z.clone(), z));
    }
    let phi: Vec<Scalar> = (1..=k).map(|j| lp.bounds[j].lower.clone().unwrap_or_else(Scalar::zero)).collect();
    let v0 = p.price_of(&phi)?;
    if ctx.cmp(&v0, &v_star)? != Sign::Zero {
        return Err(Error::InvariantViolation("lexicographic refinement changed the optimum".into()));
    }
    Ok(IntegerOptimum { v0, phi, nodes, certified: true })
}

/// Exhaustive box enumeration with a binary64 prefilter and exact
/// comparisons; the first (lexicographically smallest) minimiser wins.
fn integer_enumerate(p: &Problem, radius: u32) -> Result<IntegerOptimum> {
    let ctx = p.ctx();
    let k = p.active.len();
    let r = radius as i64;
    let needed = ((2 * r + 1) as f64).powi(k as i32);
    if needed > SEARCH_BUDGET {
        return Err(Error::BudgetExceeded { needed, budget: SEARCH_BUDGET });
    }
    let rows_f: Vec<Vec<f64>> = p.rows.iter().map(|r| to_f64_vec(r, ctx)).collect::<Result<_>>()?;
    let c_f = to_f64_vec(&p.c_hat, ctx)?;
    let scale = c_f.iter().fold(1.0f64, |m, x| m.max(x.abs()))
        + rows_f.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs())) * (r as f64) * (k as f64);
    let tol = 1e-9 * scale;
    let value_f = |x: &[i64]| -> f64 {
        rows_f
            .iter()
            .zip(&c_f)
            .map(|(row, c)| c - row.iter().zip(x).map(|(a, &b)| a * b as f64).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let to_scalars = |x: &[i64]| -> Vec<Scalar> { x.iter().map(|&v| Scalar::int(v)).collect() };

    let mut x = vec![-r; k];
    let mut best_x = x.clone();
    let mut best_v = p.price_of(&to_scalars(&x))?;
    let mut best_f = ctx.to_f64(&best_v)?;
    let mut nodes = 0u64;
    loop {
        nodes += 1;
        let f = value_f(&x);
        if f <= best_f + tol {
            let v = p.price_of(&to_scalars(&x))?;
            if ctx.cmp(&v, &best_v)? == Sign::Negative {
                best_f = ctx.to_f64(&v)?;
                best_v = v;
                best_x = x.clone();
            }
        }
        let mut j = k;
        loop {
            if j == 0 {
                return Ok(IntegerOptimum { v0: best_v, phi: to_scalars(&best_x), nodes, certified: false });
            }
            j -= 1;
            if x[j] < r {
                x[j] += 1;
                break;
            }
            x[j] = -r;
        }
    }
}

/// Cheapest integer superhedge (richest subhedge) over positions in
/// `[−R, R]`. Rational gains are solved by exact branch and bound and the
/// result is certified for the box; other data are enumerated.
pub fn integer_hedge(m: &MarketModel, claim: &Claim, direction: Direction, radius: Option<u32>) -> Result<HedgeResult> {
    let nia_unconfirmed = require_nia(m)?;
    let p = Problem::new(m, claim, direction)?;
    integer_on(&p, direction, radius, nia_unconfirmed)
}

fn integer_on(p: &Problem, direction: Direction, radius: Option<u32>, nia_unconfirmed: bool) -> Result<HedgeResult> {
    let ctx = p.ctx().clone();
    let (v_real, phi_real, _) = real_core(p)?;
    let radius = match radius {
        Some(r) => r,
        None => default_radius(&phi_real, &ctx)?,
    };
    let opt = if p.active.is_empty() {
        IntegerOptimum { v0: p.price_of(&[])?, phi: Vec::new(), nodes: 0, certified: true }
    } else if p.sys.kind == Kind::Rational {
        integer_bb(p, radius)?
    } else {
        integer_enumerate(p, radius)?
    };
    if !p.superhedges(&opt.v0, &opt.phi)? {
        return Err(Error::InvariantViolation("integer hedge fails verification".into()));
    }
    Ok(HedgeResult {
        direction,
        class: StrategyClass::Integer,
        price: oriented(direction, opt.v0.clone()),
        strategy: p.strategy(opt.v0, &opt.phi, StrategyClass::Integer, direction),
        status: if opt.certified { HedgeStatus::CertifiedOptimal } else { HedgeStatus::OptimalWithinRadius },
        radius: Some(radius),
        denominator: None,
        bound: Some(oriented(direction, v_real)),
        approx: p.sys.kind == Kind::Float,
        flagged: false,
        nodes: opt.nodes,
        nia_unconfirmed,
    })
}

/// `½√d · max_ω Σ_t ‖ΔŜ_t(ω)‖`, exact when every square root is rational.
pub fn gap_bound(m: &MarketModel) -> Result<Scalar> {
    crate::market::require_valid(m)?;
    let ctx = m.context()?;
    let gains = crate::market::discounted_gains(m)?;
    let d = m.d();
    // Exact path: all gains rational and all norms perfect squares.
    let exact_sqrt = |r: &BigRational| -> Option<BigRational> {
        if r.is_negative() {
            return None;
        }
        let (n, q) = (r.numer().sqrt(), r.denom().sqrt());
        (&n * &n == *r.numer() && &q * &q == *r.denom()).then(|| BigRational::new(n, q))
    };
    let sqrt_d = exact_sqrt(&BigRational::from_integer(d.into()));
    let mut best_f = 0.0f64;
    let mut best_exact: Option<BigRational> = Some(BigRational::zero());
    for w in 0..m.n() {
        let mut sum_f = 0.0;
        let mut sum_exact: Option<BigRational> = Some(BigRational::zero());
        for t in 0..m.periods {
            let g: Vec<&Scalar> = (0..d).map(|j| &gains[j][t][w]).collect();
            let mut sq_f = 0.0;
            for x in &g {
                let v = ctx.to_f64(x)?;
                sq_f += v * v;
            }
            sum_f += sq_f.sqrt();
            let sq: Option<BigRational> =
                g.iter().map(|x| x.as_rational().map(|r| r * r)).sum::<Option<BigRational>>();
            sum_exact = match (sum_exact, sq.and_then(|s| exact_sqrt(&s))) {
                (Some(a), Some(b)) => Some(a + b),
                _ => None,
            };
        }
        best_f = best_f.max(sum_f);
        best_exact = match (best_exact, sum_exact) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        };
    }
    let half = BigRational::new(1.into(), 2.into());
    if let (Some(sd), Some(b)) = (sqrt_d, best_exact) {
        if !m.has_float() {
            return Ok(Scalar::Rational(half * sd * b));
        }
    }
    Ok(Scalar::Float(0.5 * (d as f64).sqrt() * best_f))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CopiesRow {
    pub copies: u64,
    /// `σ_Z(N·C)`.
    pub sigma: Scalar,
    pub per_copy: Scalar,
    /// `σ_Z(N·C)/N − sup Π(C)`.
    pub gap: Scalar,
    pub status: HedgeStatus,
    pub radius: u32,
}

/// Per-copy integer superhedging price of `N·C` against `sup Π(C)`.
pub fn copies_scaling(m: &MarketModel, claim: &Claim, copies: &[u64]) -> Result<(Scalar, Vec<CopiesRow>)> {
    let nia_unconfirmed = require_nia(m)?;
    let base = Problem::new(m, claim, Direction::Super)?;
    let ctx = base.ctx().clone();
    let (sup, _, _) = real_core(&base)?;
    let mut out = Vec::with_capacity(copies.len());
    for &n in copies {
        if n == 0 {
            return Err(Error::Input("number of copies must be positive".into()));
        }
        let nr = BigRational::from_integer(n.into());
        let scaled = Claim { payoff: claim.payoff.iter().map(|c| c.scale(&nr)).collect() };
        let p = Problem::new(m, &scaled, Direction::Super)?;
        let h = integer_on(&p, Direction::Super, None, nia_unconfirmed)?;
        let per_copy = h.price.scale(&nr.recip());
        let gap = per_copy.sub(&sup)?;
        if ctx.sign(&gap)? == Sign::Negative {
            return Err(Error::InvariantViolation(format!("integer price below sup Π for N = {n}")));
        }
        out.push(CopiesRow { copies: n, sigma: h.price, per_copy, gap, status: h.status, radius: h.radius.unwrap_or(0) });
    }
    Ok((sup, out))
}

/// Rational superhedge with all denominators at most `N`: positions of the
/// cheapest real superhedge approximated with a common denominator
/// `q ≤ N` to within `N^{-1/m}`, `m = n·d·(T+1)`, plus a bank buffer of
/// `N^{-1/m}·ln N`.
pub fn rational_denominator_superhedge(m: &MarketModel, claim: &Claim, n_bound: u64) -> Result<HedgeResult> {
    if n_bound < 2 {
        return Err(Error::Input("denominator bound N must be at least 2".into()));
    }
    if na_check(m)?.verdict != Verdict::Holds {
        return Err(Error::ModelHasArbitrage);
    }
    let p = Problem::new(m, claim, Direction::Super)?;
    let ctx = p.ctx().clone();
    let (v_real, phi, _) = real_core(&p)?;
    let expo = (m.n() * m.d() * (m.periods + 1)) as u32;
    let nr = BigRational::from_integer(n_bound.into());

    // Smallest q with every |φ q − p| below N^{-1/m}.
    let mut found = None;
    for q in 1..=n_bound {
        let qs = Scalar::from_bigint(q.into());
        let mut ps = Vec::with_capacity(phi.len());
        let mut ok = true;
        for a in &phi {
            let (x, dist) = nearest_with_distance(&a.mul(&qs)?, &ctx)?;
            if !dist_pow_below(&dist, expo, &nr, &ctx)? {
                ok = false;
                break;
            }
            ps.push(x);
        }
        if ok {
            found = Some((q, ps));
            break;
        }
    }
    let Some((q, ps)) = found else {
        return Err(Error::SearchBudgetExceeded(format!("{n_bound}")));
    };
    let qr = BigRational::from_integer(q.into());
    let psi: Vec<Scalar> = ps.into_iter().map(|x| Scalar::Rational(BigRational::from_integer(x) / &qr)).collect();

    let nf = n_bound as f64;
    let buffer_f = nf.powf(-1.0 / expo as f64) * nf.ln();
    let buffer = Scalar::Rational(rational_from_f64(buffer_f).unwrap_or_else(BigRational::zero));
    // V₀(ψ) = V₀(φ) + buffer + (ψ − φ)·Ŝ₀ at every time-0 position.
    let s0 = initial_prices(m, &p)?;
    let mut v0 = v_real.add(&buffer)?;
    for ((a, b), s) in psi.iter().zip(&phi).zip(&s0) {
        if let Some(s) = s {
            v0 = v0.add(&a.sub(b)?.mul(s)?)?;
        }
    }
    // Later positions only move money between accounts.
    let mut flagged = false;
    let needed = p.price_of(&psi)?;
    if ctx.cmp(&v0, &needed)? == Sign::Negative {
        v0 = needed;
        flagged = true;
    }
    if !p.superhedges(&v0, &psi)? {
        return Err(Error::InvariantViolation("rational superhedge fails verification".into()));
    }
    let excess = v0.sub(&v_real)?;
    Ok(HedgeResult {
        direction: Direction::Super,
        class: StrategyClass::Rational,
        price: v0.clone(),
        strategy: p.strategy(v0, &psi, StrategyClass::Rational, Direction::Super),
        status: HedgeStatus::EpsilonApproximate(excess),
        radius: None,
        denominator: Some(q.into()),
        bound: Some(v_real),
        approx: p.sys.kind == Kind::Float,
        flagged,
        nodes: 0,
        nia_unconfirmed: false,
    })
}

/// `Ŝ₀` for time-0 active positions, `None` for later ones.
fn initial_prices(m: &MarketModel, p: &Problem) -> Result<Vec<Option<Scalar>>> {
    Ok(p.active
        .iter()
        .map(|&j| {
            let (t, _) = p.sys.layout.node_of(j);
            (t == 0).then(|| m.assets[j % p.sys.layout.d].prices[0][0].clone())
        })
        .collect())
}

/// Exact check of `V_T ≥ C` (super) or `V_T ≤ C` (sub) through the value
/// process of the market module.
pub fn verify_hedge(m: &MarketModel, claim: &Claim, h: &HedgeResult, ctx: &NumericContext) -> Result<bool> {
    let v = value_process(m, &h.strategy)?;
    for (x, c) in v.values[m.periods].iter().zip(&claim.payoff) {
        let s = ctx.cmp(x, c)?;
        let bad = match h.direction {
            Direction::Super => s == Sign::Negative,
            Direction::Sub => s == Sign::Positive,
        };
        if bad {
            return Ok(false);
        }
    }
    Ok(true)
}
