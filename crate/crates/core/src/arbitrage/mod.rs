//! Classical and integer no-arbitrage: the support-complement set `A`,
//! arbitrage witnesses and zero-gain strategy spaces.
//!
//! `A` is computed from one max-mass LP per state over the martingale
//! polytope. The dual of the LP for a state of `A` is a strategy with zero
//! cost whose terminal value is nonnegative and positive in that state, so
//! the same LP family yields `A`, a witness measure and real witnesses.
//!
//! Integer arbitrage is decided node by node: a multi-period integer
//! arbitrage exists iff some node admits a one-period integer arbitrage.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::{rational_nullspace, split_rows};
use crate::linprog::{lp_feasible_strict, Bound, LinearProgram, Relation, Sense};
use crate::market::{
    discounted_gains, discounted_values_by_gains, node_gains, require_valid, verify_arbitrage, MarketModel, Strategy,
    StrategyClass,
};
use crate::scalar::{dot, NumericContext, Scalar, Sign};

pub(crate) mod support;

use support::{
    average_alive, basis_of, box_search, box_size, certify_gain, exact_rational, integer_multiple, kind_of,
    martingale_rows, max_mass, split_max_mass, terminal_rows, to_f64_vec, Kind, Layout,
};

/// Default integer-search radius per node and asset.
pub const DEFAULT_RADIUS: u32 = 50;

/// Candidate points an integer search may visit in one call.
pub const SEARCH_BUDGET: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Property {
    Na,
    Nia,
    Nifl,
}

impl Property {
    pub fn name(self) -> &'static str {
        match self {
            Property::Na => "NA",
            Property::Nia => "NIA",
            Property::Nifl => "NIFL",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails,
    NoWitnessWithinBudget,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::NoWitnessWithinBudget => "no-witness-within-budget",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupportProfile {
    /// States carried by no martingale measure, ascending.
    pub a_set: Vec<usize>,
    /// A martingale measure vanishing exactly on `a_set`; `None` when the
    /// martingale polytope is empty.
    pub witness_measure: Option<Vec<Scalar>>,
    /// `max Q(ω)` over the martingale polytope, per state.
    pub max_mass: Vec<Scalar>,
    /// Some classification rests on binary64 LP output that could not be
    /// certified exactly.
    pub approx: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NaOutcome {
    pub verdict: Verdict,
    pub profile: SupportProfile,
    /// Zero-cost strategy with `V_T ≥ 0` and `{V_T > 0} = A` (all of `Ω` when
    /// no martingale measure exists).
    pub witness: Option<Strategy>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArbitrageReport {
    pub property: Property,
    pub verdict: Verdict,
    pub witness: Option<Strategy>,
    /// Integer-search radius, when a search ran.
    pub radius: Option<u32>,
    /// Nodes that needed the bounded integer search.
    pub nodes_searched: usize,
    /// Whether the per-node exact dependency test found every unresolved
    /// node free of rational zero-gain directions; `None` when not run.
    pub dependency_trivial: Option<bool>,
    pub approx: bool,
    pub note: String,
}

/// Classical no-arbitrage with the support profile and a real witness.
pub fn na_check(m: &MarketModel) -> Result<NaOutcome> {
    require_valid(m)?;
    let ctx = m.context()?;
    let tree = m.tree()?;
    let gains = discounted_gains(m)?;
    let layout = Layout::new(m);
    let rows = terminal_rows(m, &tree, &gains, &layout);
    let (constraints, kept) = martingale_rows(&rows, layout.nvars);
    let n = m.n();
    let kind = kind_of(m);
    let mm = max_mass(&constraints, n, kind != Kind::Rational, &ctx)?;

    // Multipliers of the kept rows back onto all position variables.
    let spread = |v: &[Scalar]| -> Vec<Scalar> {
        let mut x = vec![Scalar::zero(); layout.nvars];
        for (k, &var) in kept.iter().enumerate() {
            x[var] = v[k].clone();
        }
        x
    };

    let mut approx = false;
    let mut alive = mm.alive.clone();
    let mut witness_measure = average_alive(&mm)?;
    // Exact per-state witnesses, or binary64 ones for float data.
    let mut pieces: Vec<Vec<Scalar>> = Vec::new();

    if kind == Kind::Symbolic {
        let split = split_max_mass(&constraints, n, &ctx)?;
        if mm.feasible {
            for w in 0..n {
                if alive[w] {
                    let certified = split.as_ref().is_some_and(|s| s.alive[w]);
                    approx |= !certified;
                }
            }
            if let Some(s) = &split {
                if !approx {
                    witness_measure = average_alive(s)?;
                }
            }
        }
        let strict_targets: Vec<(Option<usize>, Vec<Scalar>)> = if mm.feasible {
            (0..n).filter(|&w| !alive[w]).map(|w| (Some(w), mm.duals[w].clone().unwrap_or_default())).collect()
        } else {
            let f = mm.farkas.clone().unwrap_or_default();
            vec![(None, f.iter().map(Scalar::neg).collect())]
        };
        for (target, cert) in strict_targets {
            let phi_f = to_f64_vec(&spread(&cert), &ctx)?;
            match certify_gain(&rows, &phi_f, target, &ctx)? {
                Some(phi) => pieces.push(phi),
                None => approx = true,
            }
        }
    } else if mm.feasible {
        for w in 0..n {
            if !alive[w] {
                pieces.push(spread(mm.duals[w].as_ref().expect("dual of a dead state")));
            }
        }
    } else {
        let f = mm.farkas.clone().unwrap_or_default();
        pieces.push(spread(&f.iter().map(Scalar::neg).collect::<Vec<_>>()));
    }
    if !mm.feasible {
        alive = vec![false; n];
        witness_measure = None;
    }

    let a_set: Vec<usize> = (0..n).filter(|&w| !alive[w]).collect();
    let verdict = if a_set.is_empty() { Verdict::Holds } else { Verdict::Fails };
    let witness = if verdict == Verdict::Fails && !pieces.is_empty() && !approx {
        let mut phi = vec![Scalar::zero(); layout.nvars];
        for p in &pieces {
            for (a, b) in phi.iter_mut().zip(p) {
                *a = a.add(b)?;
            }
        }
        let class =
            if phi.iter().all(|x| x.as_rational().is_some()) { StrategyClass::Rational } else { StrategyClass::Real };
        let s = layout.strategy(&phi, class);
        if !verify_arbitrage(m, &s, &ctx)?.is_arbitrage {
            return Err(Error::InvariantViolation("assembled NA witness does not verify".into()));
        }
        Some(s)
    } else {
        None
    };
    Ok(NaOutcome {
        verdict,
        profile: SupportProfile { a_set, witness_measure, max_mass: mm.mass, approx },
        witness,
    })
}

/// NIFL is equivalent to NA on finite probability spaces; the verdict is
/// the NA verdict.
pub fn nifl_check(m: &MarketModel) -> Result<ArbitrageReport> {
    let na = na_check(m)?;
    Ok(ArbitrageReport {
        property: Property::Nifl,
        verdict: na.verdict,
        witness: na.witness,
        radius: None,
        nodes_searched: 0,
        dependency_trivial: None,
        approx: na.profile.approx,
        note: "NIFL is equivalent to NA on a finite state space".into(),
    })
}

/// Per-node result of the integer analysis.
enum NodeResult {
    Safe,
    Witness(Vec<BigInt>),
    Unresolved { dependency_trivial: Option<bool> },
}

/// One-period integer arbitrage at a node with child gains `g[c][asset]`.
fn node_integer_arbitrage(
    g: &[Vec<Scalar>],
    kind: Kind,
    radius: u32,
    budget_left: &mut f64,
    ctx: &NumericContext,
) -> Result<(NodeResult, bool)> {
    let d = g.first().map_or(0, Vec::len);
    if d == 0 || g.is_empty() {
        return Ok((NodeResult::Safe, false));
    }
    if d == 1 {
        // ψ ∈ {−1, 1}: a one-asset arbitrage is a sign condition.
        let mut pos = false;
        let mut neg = false;
        for c in g {
            match ctx.sign(&c[0])? {
                Sign::Positive => pos = true,
                Sign::Negative => neg = true,
                Sign::Zero => {}
            }
        }
        return Ok((
            match (pos, neg) {
                (true, false) => NodeResult::Witness(vec![BigInt::one()]),
                (false, true) => NodeResult::Witness(vec![-BigInt::one()]),
                _ => NodeResult::Safe,
            },
            false,
        ));
    }
    if kind != Kind::Symbolic {
        // Binary64 gains within tolerance of zero are rounding noise.
        let mut exact = Vec::with_capacity(g.len());
        for c in g {
            let mut row = Vec::with_capacity(d);
            for x in c {
                let r = if kind == Kind::Float && ctx.is_zero(x)? { Some(BigRational::zero()) } else { exact_rational(x) };
                row.push(r.ok_or_else(|| Error::InvariantViolation("non-rational entry in rational data".into()))?);
            }
            exact.push(row);
        }
        return Ok((rational_node(&exact, ctx)?, false));
    }

    // Rational martingale measure of the split system; its support decides
    // the rational zero-gain directions when the constants are independent.
    let constraints: Vec<Vec<Scalar>> = (0..d).map(|j| g.iter().map(|c| c[j].clone()).collect()).collect();
    let basis = basis_of(g);
    if ctx.independent {
        if let Some(split) = split_max_mass(&constraints, g.len(), ctx)? {
            if split.feasible && split.alive.iter().any(|&a| a) && dependency_trivial(g, &split.alive, &basis)? {
                return Ok((NodeResult::Safe, false));
            }
        }
    }

    // Bounded search with a binary64 prefilter and exact acceptance.
    let r = radius as i64;
    let needed = box_size(d, r);
    if needed > *budget_left {
        return Err(Error::BudgetExceeded { needed, budget: SEARCH_BUDGET });
    }
    *budget_left -= needed;
    let gf: Vec<Vec<f64>> = g.iter().map(|c| to_f64_vec(c, ctx)).collect::<Result<_>>()?;
    let hit = box_search(
        d,
        r,
        |x| {
            gf.iter().all(|c| {
                let (v, mag) = c.iter().zip(x).fold((0.0, 0.0), |(s, a), (gj, &xj)| {
                    (s + gj * xj as f64, a + (gj * xj as f64).abs())
                });
                v >= -1e-9 * (1.0 + mag)
            })
        },
        |x| {
            let phi: Vec<Scalar> = x.iter().map(|&v| Scalar::int(v)).collect();
            let mut strict = false;
            for c in g {
                match ctx.sign(&dot(c, &phi)?)? {
                    Sign::Negative => return Ok(false),
                    Sign::Positive => strict = true,
                    Sign::Zero => {}
                }
            }
            Ok(strict)
        },
    )?;
    if let Some(x) = hit {
        return Ok((NodeResult::Witness(x.into_iter().map(BigInt::from).collect()), true));
    }

    // Exact dependency test over the binary64 support.
    let dep = if ctx.independent {
        let mm = max_mass(&constraints, g.len(), true, ctx)?;
        if mm.feasible {
            Some(dependency_trivial(g, &mm.alive, &basis)?)
        } else {
            Some(false)
        }
    } else {
        None
    };
    Ok((NodeResult::Unresolved { dependency_trivial: dep }, true))
}

/// True when every rational `φ` with `φ·g_c = 0` on `support` has
/// `φ·g_c = 0` on every child.
fn dependency_trivial(g: &[Vec<Scalar>], support: &[bool], basis: &[String]) -> Result<bool> {
    let d = g[0].len();
    let on: Vec<Vec<Scalar>> = g.iter().zip(support).filter(|(_, &s)| s).map(|(c, _)| c.clone()).collect();
    let (Some(split_on), Some(split_all)) = (split_rows(&on, basis), split_rows(g, basis)) else {
        return Ok(false);
    };
    Ok(rational_nullspace(&split_on, d).len() == rational_nullspace(&split_all, d).len())
}

/// Exact one-period NA at a node with rational gains; an integer witness
/// from a strictly feasible rational point when it fails.
fn rational_node(g: &[Vec<BigRational>], ctx: &NumericContext) -> Result<NodeResult> {
    let d = g[0].len();
    let mut lp = LinearProgram::new(Sense::Max, vec![Scalar::zero(); d]);
    for j in 0..d {
        lp.set_bound(j, Bound::free());
    }
    for c in g {
        lp.add_row(c.iter().cloned().map(Scalar::Rational).collect(), Relation::Ge, Scalar::zero());
    }
    let strict: Vec<usize> = (0..g.len()).collect();
    match lp_feasible_strict(&lp, &strict, ctx)? {
        None => Ok(NodeResult::Safe),
        Some(w) => {
            let x: Vec<BigRational> = w.x.iter().map(|s| s.as_rational().cloned().unwrap_or_default()).collect();
            Ok(NodeResult::Witness(integer_multiple(&x)))
        }
    }
}

/// Integer no-arbitrage by per-node analysis. Rational and one-asset data
/// are decided exactly; otherwise an exact zero-gain test or a bounded
/// integer search per node.
pub fn nia_check(m: &MarketModel, radius: u32) -> Result<ArbitrageReport> {
    require_valid(m)?;
    let ctx = m.context()?;
    let tree = m.tree()?;
    let gains = discounted_gains(m)?;
    let kind = kind_of(m);
    let mut budget_left = SEARCH_BUDGET;
    let mut searched = 0;
    let mut unresolved: Vec<Option<bool>> = Vec::new();
    let mut approx = false;
    for t in 0..m.periods {
        for b in 0..m.filtration[t].len() {
            let g: Vec<Vec<Scalar>> = node_gains(&gains, m, &tree, t, b).into_iter().map(|(_, v)| v).collect();
            let (res, did_search) = node_integer_arbitrage(&g, kind, radius, &mut budget_left, &ctx)?;
            searched += usize::from(did_search);
            match res {
                NodeResult::Safe => {}
                NodeResult::Unresolved { dependency_trivial } => unresolved.push(dependency_trivial),
                NodeResult::Witness(phi) => {
                    let phi: Vec<Scalar> = phi.into_iter().map(Scalar::from_bigint).collect();
                    let s = Strategy::one_period(m, StrategyClass::Integer, t, b, &phi, Scalar::zero())?;
                    if !verify_arbitrage(m, &s, &ctx)?.is_arbitrage {
                        // Binary64 data: the exact witness gains nothing beyond
                        // the tolerance, so the node is safe up to rounding.
                        if kind == Kind::Float {
                            approx = true;
                            continue;
                        }
                        return Err(Error::InvariantViolation(format!("integer witness at node ({t}, {b}) does not verify")));
                    }
                    return Ok(ArbitrageReport {
                        property: Property::Nia,
                        verdict: Verdict::Fails,
                        witness: Some(s),
                        radius: (searched > 0).then_some(radius),
                        nodes_searched: searched,
                        dependency_trivial: None,
                        approx: false,
                        note: format!("one-period integer arbitrage at time {t}, block {b}"),
                    });
                }
            }
        }
    }
    let (verdict, dependency_trivial, note) = if unresolved.is_empty() {
        (Verdict::Holds, None, "every node is free of one-period integer arbitrage".to_string())
    } else {
        let dep = unresolved.iter().copied().collect::<Option<Vec<bool>>>().map(|v| v.iter().all(|&x| x));
        (
            Verdict::NoWitnessWithinBudget,
            dep,
            format!("{} node(s) without a witness within radius {radius}", unresolved.len()),
        )
    };
    Ok(ArbitrageReport {
        property: Property::Nia,
        verdict,
        witness: None,
        radius: (searched > 0).then_some(radius),
        nodes_searched: searched,
        dependency_trivial,
        approx,
        note,
    })
}

/// Report for any of the three properties.
pub fn check(m: &MarketModel, property: Property, radius: u32) -> Result<ArbitrageReport> {
    match property {
        Property::Nia => nia_check(m, radius),
        Property::Nifl => nifl_check(m),
        Property::Na => {
            let na = na_check(m)?;
            Ok(ArbitrageReport {
                property: Property::Na,
                verdict: na.verdict,
                witness: na.witness,
                radius: None,
                nodes_searched: 0,
                dependency_trivial: None,
                approx: na.profile.approx,
                note: if na.profile.a_set.is_empty() {
                    "an equivalent martingale measure exists".into()
                } else {
                    format!("states carried by no martingale measure: {:?}", na.profile.a_set)
                },
            })
        }
    }
}

/// Integer arbitrage from a real one on rational data, positive wherever
/// the given witness is.
pub fn rationalize_arbitrage(m: &MarketModel, witness: &Strategy) -> Result<Strategy> {
    require_valid(m)?;
    if !m.is_rational() {
        return Err(Error::NotRational("rationalize_arbitrage needs rational prices".into()));
    }
    let ctx = m.context()?;
    let values = discounted_values_by_gains(m, witness)?;
    let terminal = &values[m.periods];
    let mut strict_states = Vec::new();
    for (w, v) in terminal.iter().enumerate() {
        match ctx.sign(v)? {
            Sign::Negative => return Err(Error::Input("witness has a negative terminal value".into())),
            Sign::Positive => strict_states.push(w),
            Sign::Zero => {}
        }
    }
    if strict_states.is_empty() || ctx.sign(&witness.initial_value)? == Sign::Positive {
        return Err(Error::Input("witness is not an arbitrage".into()));
    }
    let layout = Layout::new(m);
    let tree = m.tree()?;
    let gains = discounted_gains(m)?;

    // One asset and one trading node: the sign of the position suffices.
    let nonzero: Vec<(usize, usize)> = (0..m.periods)
        .flat_map(|t| (0..m.filtration[t].len()).map(move |b| (t, b)))
        .filter(|&(t, b)| witness.positions[t][b].iter().any(|x| !x.is_exact_zero()))
        .collect();
    if m.d() == 1 && nonzero.len() == 1 {
        let (t, b) = nonzero[0];
        let s = match ctx.sign(&witness.positions[t][b][0])? {
            Sign::Positive => 1,
            _ => -1,
        };
        let out = Strategy::one_period(m, StrategyClass::Integer, t, b, &[Scalar::int(s)], Scalar::zero())?;
        if verify_arbitrage(m, &out, &ctx)?.is_arbitrage {
            return Ok(out);
        }
    }

    let rows = terminal_rows(m, &tree, &gains, &layout);
    let mut lp = LinearProgram::new(Sense::Max, vec![Scalar::zero(); layout.nvars]);
    for k in 0..layout.nvars {
        lp.set_bound(k, Bound::free());
    }
    for row in &rows {
        lp.add_row(row.clone(), Relation::Ge, Scalar::zero());
    }
    let found = lp_feasible_strict(&lp, &strict_states, &ctx)?
        .ok_or_else(|| Error::InvariantViolation("no rational point shares the witness's strict state".into()))?;
    let x: Vec<BigRational> = found.x.iter().map(|s| s.as_rational().cloned().unwrap_or_default()).collect();
    let phi: Vec<Scalar> = integer_multiple(&x).into_iter().map(Scalar::from_bigint).collect();
    let out = layout.strategy(&phi, StrategyClass::Integer);
    if !verify_arbitrage(m, &out, &ctx)?.is_arbitrage {
        return Err(Error::InvariantViolation("rationalised witness does not verify".into()));
    }
    Ok(out)
}

/// Whether `q` is a probability measure making every discounted price a
/// martingale; the error names the first failed condition.
pub fn check_martingale_measure(m: &MarketModel, q: &[Scalar]) -> Result<()> {
    let ctx = m.context()?;
    if q.len() != m.n() {
        return Err(Error::NotMartingaleMeasure(format!("{} masses for {} states", q.len(), m.n())));
    }
    let mut total = Scalar::zero();
    for (w, x) in q.iter().enumerate() {
        if ctx.sign(x)? == Sign::Negative {
            return Err(Error::NotMartingaleMeasure(format!("negative mass at state {w}")));
        }
        total = total.add(x)?;
    }
    if !ctx.is_zero(&total.sub(&Scalar::one())?)? {
        return Err(Error::NotMartingaleMeasure("masses do not sum to 1".into()));
    }
    let tree = m.tree()?;
    let gains = discounted_gains(m)?;
    let layout = Layout::new(m);
    let rows = terminal_rows(m, &tree, &gains, &layout);
    for k in 0..layout.nvars {
        let col: Vec<Scalar> = rows.iter().map(|r| r[k].clone()).collect();
        if !ctx.is_zero(&dot(&col, q)?)? {
            let (t, b) = layout.node_of(k);
            return Err(Error::NotMartingaleMeasure(format!(
                "asset {} is not a martingale at time {t}, block {b}",
                k - layout.var(t, b, 0)
            )));
        }
    }
    Ok(())
}

/// `Q ∈ 𝔔^max`: a martingale measure whose support is `Ω ∖ A`.
pub fn qmax_membership(m: &MarketModel, q: &[Scalar]) -> Result<bool> {
    if check_martingale_measure(m, q).is_err() {
        return Ok(false);
    }
    let ctx = m.context()?;
    let na = na_check(m)?;
    for (w, x) in q.iter().enumerate() {
        let in_a = na.profile.a_set.contains(&w);
        if in_a == (ctx.sign(x)? == Sign::Positive) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq)]
pub enum LatticeStatus {
    /// Every integer strategy with zero cost and `V_T = 0` `Q`-a.s. has
    /// `V_T = 0` in every state.
    OnlyTrivialInteger,
    NontrivialIntegerFound(Strategy),
    UnknownWithinBudget,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroGainSpace {
    pub measure: Vec<Scalar>,
    /// Basis of the real strategies with `V₀ = 0` and `V_T = 0` on the support.
    pub basis: Vec<Strategy>,
    pub status: LatticeStatus,
    /// The basis is a binary64 approximation.
    pub approx: bool,
}

/// Zero-cost strategies with `Q`-a.s. zero gain and their integer points.
/// Strategies are compared through their terminal values, so positions that
/// never change `V_T` do not count as nontrivial.
pub fn zero_gain_space(m: &MarketModel, q: &[Scalar], radius: u32) -> Result<ZeroGainSpace> {
    require_valid(m)?;
    check_martingale_measure(m, q)?;
    let ctx = m.context()?;
    let tree = m.tree()?;
    let gains = discounted_gains(m)?;
    let layout = Layout::new(m);
    let rows = terminal_rows(m, &tree, &gains, &layout);
    let mut support = Vec::with_capacity(q.len());
    for x in q {
        support.push(ctx.sign(x)? == Sign::Positive);
    }
    let on: Vec<Vec<Scalar>> = rows.iter().zip(&support).filter(|(_, &s)| s).map(|(r, _)| r.clone()).collect();

    let kind = kind_of(m);
    // Exact rows: binary64 data is taken at face value.
    let exact_rows = |rs: &[Vec<Scalar>]| -> Vec<Vec<Scalar>> {
        rs.iter()
            .map(|r| r.iter().map(|x| exact_rational(x).map_or_else(|| x.clone(), Scalar::Rational)).collect())
            .collect()
    };
    let (on_x, all_x) = if kind == Kind::Float { (exact_rows(&on), exact_rows(&rows)) } else { (on.clone(), rows.clone()) };

    let (basis_vecs, approx) = match crate::linalg::scalar_nullspace(&on_x, layout.nvars) {
        Some(b) => (b, false),
        None => (float_nullspace(&on_x, layout.nvars, &ctx)?, true),
    };
    let class = |v: &[Scalar]| {
        if v.iter().all(|x| x.as_rational().is_some()) {
            StrategyClass::Rational
        } else {
            StrategyClass::Real
        }
    };
    let basis: Vec<Strategy> = basis_vecs.iter().map(|v| layout.strategy(v, class(v))).collect();

    let names = basis_of(&all_x);
    let decidable = kind != Kind::Symbolic || ctx.independent;
    let status = match (split_rows(&on_x, &names), split_rows(&all_x, &names)) {
        (Some(split_on), Some(split_all)) if decidable => {
            let ns_on = rational_nullspace(&split_on, layout.nvars);
            let ns_all = rational_nullspace(&split_all, layout.nvars);
            if ns_on.len() == ns_all.len() {
                LatticeStatus::OnlyTrivialInteger
            } else {
                let found = ns_on.iter().find(|v| {
                    split_all.iter().any(|row| !row.iter().zip(v.iter()).map(|(a, b)| a * b).sum::<BigRational>().is_zero())
                });
                match found {
                    Some(v) => {
                        let phi: Vec<Scalar> = integer_multiple(v).into_iter().map(Scalar::from_bigint).collect();
                        LatticeStatus::NontrivialIntegerFound(layout.strategy(&phi, StrategyClass::Integer))
                    }
                    None => return Err(Error::InvariantViolation("nullspace dimensions disagree".into())),
                }
            }
        }
        _ => zero_gain_search(&on_x, &all_x, layout.nvars, radius, &ctx, &layout)?,
    };
    Ok(ZeroGainSpace { measure: q.to_vec(), basis, status, approx })
}

/// Integer points of the zero-gain space by exhaustive search.
fn zero_gain_search(
    on: &[Vec<Scalar>],
    all: &[Vec<Scalar>],
    nvars: usize,
    radius: u32,
    ctx: &NumericContext,
    layout: &Layout,
) -> Result<LatticeStatus> {
    let r = radius as i64;
    let needed = box_size(nvars, r);
    if needed > SEARCH_BUDGET {
        return Ok(LatticeStatus::UnknownWithinBudget);
    }
    let hit = box_search(
        nvars,
        r,
        |_| true,
        |x| {
            let phi: Vec<Scalar> = x.iter().map(|&v| Scalar::int(v)).collect();
            for row in on {
                if !ctx.is_zero(&dot(row, &phi)?)? {
                    return Ok(false);
                }
            }
            for row in all {
                if !ctx.is_zero(&dot(row, &phi)?)? {
                    return Ok(true);
                }
            }
            Ok(false)
        },
    )?;
    Ok(match hit {
        Some(x) => {
            let phi: Vec<Scalar> = x.into_iter().map(Scalar::int).collect();
            LatticeStatus::NontrivialIntegerFound(layout.strategy(&phi, StrategyClass::Integer))
        }
        None => LatticeStatus::UnknownWithinBudget,
    })
}

/// Orthonormal nullspace basis in binary64, from the SVD.
fn float_nullspace(rows: &[Vec<Scalar>], nvars: usize, ctx: &NumericContext) -> Result<Vec<Vec<Scalar>>> {
    if rows.is_empty() {
        return Ok((0..nvars)
            .map(|k| (0..nvars).map(|i| if i == k { Scalar::one() } else { Scalar::zero() }).collect())
            .collect());
    }
    let rf: Vec<Vec<f64>> = rows.iter().map(|r| to_f64_vec(r, ctx)).collect::<Result<_>>()?;
    // Pad with zero rows so the SVD exposes the full right singular basis.
    let nr = rf.len().max(nvars);
    let a = nalgebra::DMatrix::from_fn(nr, nvars, |i, j| if i < rf.len() { rf[i][j] } else { 0.0 });
    let svd = a.svd(false, true);
    let vt = svd.v_t.ok_or_else(|| Error::InvariantViolation("SVD without right vectors".into()))?;
    let smax = svd.singular_values.iter().fold(0.0f64, |m, &s| m.max(s));
    let tol = 1e-10 * smax.max(1.0);
    Ok((0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= tol)
        .map(|i| (0..nvars).map(|j| Scalar::Float(vt[(i, j)])).collect())
        .collect())
}

#[cfg(test)]
mod tests;
