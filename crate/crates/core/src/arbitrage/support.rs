//! Shared machinery: node-position variables, max-mass LPs over martingale
//! polytopes, and exact certification of binary64 LP output.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::{least_squares, rationalize, scalar_nullspace, split_rows};
use crate::linprog::{lp_solve, LinearProgram, LpStatus, Relation, Sense};
use crate::market::{Gains, MarketModel, Strategy, StrategyClass, Tree};
use crate::scalar::{dot, rational_from_f64, NumericContext, Scalar, Sign};

/// Arithmetic regime of a model's data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Kind {
    Rational,
    Float,
    Symbolic,
}

pub(crate) fn kind_of(m: &MarketModel) -> Kind {
    if m.has_float() {
        Kind::Float
    } else if m.is_rational() {
        Kind::Rational
    } else {
        Kind::Symbolic
    }
}

/// Flat indexing of the risky positions `(t, block, asset)`.
#[derive(Debug, Clone)]
pub(crate) struct Layout {
    offsets: Vec<Vec<usize>>,
    pub nvars: usize,
    pub d: usize,
}

impl Layout {
    pub fn new(m: &MarketModel) -> Layout {
        let d = m.d();
        let mut k = 0;
        let offsets = (0..m.periods)
            .map(|t| {
                (0..m.filtration[t].len())
                    .map(|_| {
                        k += d;
                        k - d
                    })
                    .collect()
            })
            .collect();
        Layout { offsets, nvars: k, d }
    }

    pub fn var(&self, t: usize, block: usize, asset: usize) -> usize {
        self.offsets[t][block] + asset
    }

    /// `(t, block)` owning variable `k`.
    pub fn node_of(&self, k: usize) -> (usize, usize) {
        for (t, row) in self.offsets.iter().enumerate() {
            for (b, &o) in row.iter().enumerate() {
                if k >= o && k < o + self.d {
                    return (t, b);
                }
            }
        }
        unreachable!("variable index out of range")
    }

    pub fn strategy(&self, x: &[Scalar], class: StrategyClass) -> Strategy {
        let positions = self
            .offsets
            .iter()
            .map(|row| row.iter().map(|&o| x[o..o + self.d].to_vec()).collect())
            .collect();
        Strategy { class, positions, initial_value: Scalar::zero() }
    }
}

/// `rows[ω]` gives `V̂_T(ω) − V₀` as a linear form in the node positions.
pub(crate) fn terminal_rows(m: &MarketModel, tree: &Tree, gains: &Gains, layout: &Layout) -> Vec<Vec<Scalar>> {
    (0..m.n())
        .map(|w| {
            let mut row = vec![Scalar::zero(); layout.nvars];
            for t in 0..m.periods {
                let b = tree.block_of[t][w];
                for j in 0..m.d() {
                    row[layout.var(t, b, j)] = gains[j][t][w].clone();
                }
            }
            row
        })
        .collect()
}

/// Columns of `rows` as constraint rows over the measure variables, keeping
/// only those that are not identically zero. Returns the kept indices too.
pub(crate) fn martingale_rows(rows: &[Vec<Scalar>], nvars: usize) -> (Vec<Vec<Scalar>>, Vec<usize>) {
    let mut out = Vec::new();
    let mut kept = Vec::new();
    for k in 0..nvars {
        let col: Vec<Scalar> = rows.iter().map(|r| r[k].clone()).collect();
        if col.iter().any(|x| !x.is_exact_zero()) {
            out.push(col);
            kept.push(k);
        }
    }
    (out, kept)
}

/// `max q_target` over `{q ≥ 0, Σq = 1, constraints·q = 0}`.
pub(crate) fn measure_lp(constraints: &[Vec<Scalar>], nq: usize, target: usize) -> LinearProgram {
    let mut obj = vec![Scalar::zero(); nq];
    obj[target] = Scalar::one();
    let mut lp = LinearProgram::new(Sense::Max, obj);
    lp.add_row(vec![Scalar::one(); nq], Relation::Eq, Scalar::one());
    for c in constraints {
        lp.add_row(c.clone(), Relation::Eq, Scalar::zero());
    }
    lp
}

/// Result of the `nq` max-mass problems over one polytope.
#[derive(Debug, Clone)]
pub(crate) struct MaxMass {
    pub feasible: bool,
    pub mass: Vec<Scalar>,
    pub alive: Vec<bool>,
    /// Maximiser per coordinate.
    pub measures: Vec<Vec<Scalar>>,
    /// Constraint multipliers (row 0 dropped) for coordinates with zero maximum.
    pub duals: Vec<Option<Vec<Scalar>>>,
    /// Constraint part of the Farkas vector when the polytope is empty.
    pub farkas: Option<Vec<Scalar>>,
}

/// Solves every max-mass problem; `float` evaluates the data in binary64 first.
pub(crate) fn max_mass(constraints: &[Vec<Scalar>], nq: usize, float: bool, ctx: &NumericContext) -> Result<MaxMass> {
    let mut out = MaxMass {
        feasible: true,
        mass: Vec::with_capacity(nq),
        alive: Vec::with_capacity(nq),
        measures: Vec::with_capacity(nq),
        duals: Vec::with_capacity(nq),
        farkas: None,
    };
    for target in 0..nq {
        let mut lp = measure_lp(constraints, nq, target);
        if float {
            lp = lp.to_float(ctx)?;
        }
        let res = lp_solve(&lp, ctx)?;
        match res.status {
            LpStatus::Infeasible => {
                out.feasible = false;
                out.farkas = Some(res.farkas[1..].to_vec());
                out.mass = vec![Scalar::zero(); nq];
                out.alive = vec![false; nq];
                out.measures.clear();
                out.duals = vec![None; nq];
                return Ok(out);
            }
            LpStatus::Unbounded => {
                return Err(Error::InvariantViolation("max-mass LP over a simplex is unbounded".into()));
            }
            LpStatus::Optimal => {
                let obj = res.objective.clone().unwrap_or_else(Scalar::zero);
                let alive = ctx.sign(&obj)? == Sign::Positive;
                out.duals.push(if alive { None } else { Some(res.dual[1..].to_vec()) });
                out.mass.push(obj);
                out.alive.push(alive);
                out.measures.push(res.x);
            }
        }
    }
    Ok(out)
}

/// Average of the maximisers of the alive coordinates.
pub(crate) fn average_alive(mm: &MaxMass) -> Result<Option<Vec<Scalar>>> {
    let count = mm.alive.iter().filter(|&&a| a).count();
    if !mm.feasible || count == 0 {
        return Ok(None);
    }
    let nq = mm.alive.len();
    let w = BigRational::new(BigInt::one(), BigInt::from(count));
    let mut avg = vec![Scalar::zero(); nq];
    for (k, q) in mm.measures.iter().enumerate() {
        if mm.alive[k] {
            for (a, x) in avg.iter_mut().zip(q) {
                *a = a.add(&x.scale(&w))?;
            }
        }
    }
    Ok(Some(avg))
}

/// Sorted constant names occurring anywhere in `rows`.
pub(crate) fn basis_of(rows: &[Vec<Scalar>]) -> Vec<String> {
    crate::linalg::constant_basis(rows.iter().flatten())
}

/// Rational martingale measures from the component-split constraints: every
/// solution of the split system solves the original one.
pub(crate) fn split_max_mass(constraints: &[Vec<Scalar>], nq: usize, ctx: &NumericContext) -> Result<Option<MaxMass>> {
    let basis = basis_of(constraints);
    let Some(split) = split_rows(constraints, &basis) else { return Ok(None) };
    let split: Vec<Vec<Scalar>> = split.into_iter().map(|r| r.into_iter().map(Scalar::Rational).collect()).collect();
    Ok(Some(max_mass(&split, nq, false, ctx)?))
}

pub(crate) fn to_f64_vec(v: &[Scalar], ctx: &NumericContext) -> Result<Vec<f64>> {
    v.iter().map(|x| Ok(ctx.to_f64(x)?)).collect()
}

/// Exact rational value of a rational or binary64 scalar.
pub(crate) fn exact_rational(s: &Scalar) -> Option<BigRational> {
    match s {
        Scalar::Rational(r) => Some(r.clone()),
        Scalar::Float(x) => rational_from_f64(*x),
        Scalar::LinearExt(_) => None,
    }
}

/// True when `rows·phi ≥ 0` everywhere and `> 0` at `target` (or somewhere
/// when `target` is `None`).
pub(crate) fn is_positive_gain(
    rows: &[Vec<Scalar>],
    phi: &[Scalar],
    target: Option<usize>,
    ctx: &NumericContext,
) -> Result<bool> {
    let mut strict = false;
    for (w, row) in rows.iter().enumerate() {
        match ctx.sign(&dot(row, phi)?)? {
            Sign::Negative => return Ok(false),
            Sign::Positive => {
                if target.is_none_or(|t| t == w) {
                    strict = true;
                }
            }
            Sign::Zero => {}
        }
    }
    Ok(strict)
}

/// Largest denominator tried when snapping binary64 coefficients to ℚ.
const SNAP_DENOMINATOR: u64 = 1_000_000;

/// Exact `φ` with `rows·φ ≥ 0` and strictly positive at `target`, guided by
/// the binary64 certificate `phi_f`. `None` when no candidate verifies.
pub(crate) fn certify_gain(
    rows: &[Vec<Scalar>],
    phi_f: &[f64],
    target: Option<usize>,
    ctx: &NumericContext,
) -> Result<Option<Vec<Scalar>>> {
    let nvars = phi_f.len();
    // Direct snap of each coordinate.
    let snapped: Vec<Scalar> = phi_f.iter().map(|&x| Scalar::Rational(rationalize(x, SNAP_DENOMINATOR))).collect();
    if is_positive_gain(rows, &snapped, target, ctx)? {
        return Ok(Some(snapped));
    }
    // Exact nullspace of the rows the certificate makes tight.
    let rows_f: Vec<Vec<f64>> = rows.iter().map(|r| to_f64_vec(r, ctx)).collect::<Result<_>>()?;
    let vals: Vec<f64> = rows_f.iter().map(|r| r.iter().zip(phi_f).map(|(a, b)| a * b).sum()).collect();
    let scale = vals.iter().chain(phi_f).fold(1e-300f64, |m, x| m.max(x.abs()));
    let tight: Vec<Vec<Scalar>> =
        rows.iter().zip(&vals).filter(|(_, v)| v.abs() <= 1e-7 * scale).map(|(r, _)| r.clone()).collect();
    let Some(basis) = scalar_nullspace(&tight, nvars) else { return Ok(None) };
    if basis.is_empty() {
        return Ok(None);
    }
    let basis_f: Vec<Vec<f64>> = basis.iter().map(|b| to_f64_vec(b, ctx)).collect::<Result<_>>()?;
    if let Some(coef) = least_squares(&basis_f, phi_f) {
        let mut cand = vec![Scalar::zero(); nvars];
        for (c, b) in coef.iter().zip(&basis) {
            let c = rationalize(*c, SNAP_DENOMINATOR);
            if c.is_zero() {
                continue;
            }
            for (x, y) in cand.iter_mut().zip(b) {
                *x = x.add(&y.scale(&c))?;
            }
        }
        if is_positive_gain(rows, &cand, target, ctx)? {
            return Ok(Some(cand));
        }
    }
    for b in &basis {
        for s in [BigRational::one(), -BigRational::one()] {
            let cand: Vec<Scalar> = b.iter().map(|x| x.scale(&s)).collect();
            if is_positive_gain(rows, &cand, target, ctx)? {
                return Ok(Some(cand));
            }
        }
    }
    Ok(None)
}

/// Visits every nonzero point of `[-radius, radius]^dim` and returns the one
/// accepted by `accept` with the smallest max-norm, lexicographically first
/// among equals. `prefilter` is a cheap necessary condition.
pub(crate) fn box_search(
    dim: usize,
    radius: i64,
    mut prefilter: impl FnMut(&[i64]) -> bool,
    mut accept: impl FnMut(&[i64]) -> Result<bool>,
) -> Result<Option<Vec<i64>>> {
    if dim == 0 {
        return Ok(None);
    }
    let mut x = vec![-radius; dim];
    let mut best: Option<(i64, Vec<i64>)> = None;
    loop {
        let norm = x.iter().map(|v| v.abs()).max().unwrap_or(0);
        if norm > 0 && best.as_ref().is_none_or(|(n, _)| norm < *n) && prefilter(&x) && accept(&x)? {
            best = Some((norm, x.clone()));
        }
        let mut k = dim;
        loop {
            if k == 0 {
                return Ok(best.map(|(_, v)| v));
            }
            k -= 1;
            if x[k] < radius {
                x[k] += 1;
                break;
            }
            x[k] = -radius;
        }
    }
}

/// Number of points `box_search` visits.
pub(crate) fn box_size(dim: usize, radius: i64) -> f64 {
    ((2 * radius + 1) as f64).powi(dim as i32)
}

/// Integer vector with the direction of a rational one.
pub(crate) fn integer_multiple(v: &[BigRational]) -> Vec<BigInt> {
    let l = crate::linprog::common_denominator(v.iter());
    v.iter().map(|x| (x * BigRational::from_integer(l.clone())).to_integer()).collect()
}

/// Exact `x` with `rows·x ≥ rhs` (or `≤` when `ge` is false) in every row,
/// guided by the binary64 solution `sol_f`. Each candidate set of rows is
/// tried as the tight set of an exact affine solve before falling back to
/// the snapped solution itself.
pub(crate) fn certify_affine(
    rows: &[Vec<Scalar>],
    rhs: &[Scalar],
    sol_f: &[f64],
    tight_sets: &[Vec<usize>],
    ge: bool,
    ctx: &NumericContext,
) -> Result<Option<Vec<Scalar>>> {
    let nvars = sol_f.len();
    let feasible = |x: &[Scalar]| -> Result<bool> {
        for (row, b) in rows.iter().zip(rhs) {
            let s = ctx.sign(&dot(row, x)?.sub(b)?)?;
            if (ge && s == Sign::Negative) || (!ge && s == Sign::Positive) {
                return Ok(false);
            }
        }
        Ok(true)
    };
    let mut target = sol_f.to_vec();
    target.push(1.0);
    for tight in tight_sets {
        // Homogeneous form (row, −b)·(x, s) = 0; solutions with s = 1 are wanted.
        let aug: Vec<Vec<Scalar>> = tight
            .iter()
            .map(|&w| {
                let mut r = rows[w].clone();
                r.push(rhs[w].neg());
                r
            })
            .collect();
        let Some(basis) = scalar_nullspace(&aug, nvars + 1) else { continue };
        if basis.is_empty() {
            continue;
        }
        let basis_f: Vec<Vec<f64>> = basis.iter().map(|b| to_f64_vec(b, ctx)).collect::<Result<_>>()?;
        let Some(coef) = least_squares(&basis_f, &target) else { continue };
        for delta in [0.0, 1e-6, 1e-3, 1e-1, 1.0] {
            for sgn in [1.0, -1.0] {
                if delta == 0.0 && sgn < 0.0 {
                    continue;
                }
                let mut x = vec![Scalar::zero(); nvars + 1];
                for (c, b) in coef.iter().zip(&basis) {
                    // Directions that move `s` stay put so that `s` remains near 1.
                    let factor = if b[nvars].is_exact_zero() { 1.0 + sgn * delta } else { 1.0 };
                    let c = rationalize(c * factor, SNAP_DENOMINATOR);
                    if c.is_zero() {
                        continue;
                    }
                    for (xi, bi) in x.iter_mut().zip(b) {
                        *xi = xi.add(&bi.scale(&c))?;
                    }
                }
                let Some(s) = x[nvars].as_rational().cloned() else { continue };
                if s.is_zero() {
                    continue;
                }
                let inv = s.recip();
                let cand: Vec<Scalar> = x[..nvars].iter().map(|v| v.scale(&inv)).collect();
                if feasible(&cand)? {
                    return Ok(Some(cand));
                }
            }
        }
    }
    // No tight set certifies; a snapped point may still be feasible.
    let snapped: Vec<Scalar> = sol_f.iter().map(|&x| Scalar::Rational(rationalize(x, SNAP_DENOMINATOR))).collect();
    Ok(feasible(&snapped)?.then_some(snapped))
}

/// Everything the LP-based analyses need about a validated model.
#[derive(Debug, Clone)]
pub(crate) struct System {
    pub ctx: NumericContext,
    pub kind: Kind,
    pub layout: Layout,
    /// `V̂_T − V₀` per state in the node positions.
    pub rows: Vec<Vec<Scalar>>,
    /// Martingale constraints over the measure variables.
    pub constraints: Vec<Vec<Scalar>>,
    /// Position variable behind each constraint.
    pub kept: Vec<usize>,
}

pub(crate) fn system(m: &MarketModel) -> Result<System> {
    crate::market::require_valid(m)?;
    let ctx = m.context()?;
    let tree = m.tree()?;
    let gains = crate::market::discounted_gains(m)?;
    let layout = Layout::new(m);
    let rows = terminal_rows(m, &tree, &gains, &layout);
    let (constraints, kept) = martingale_rows(&rows, layout.nvars);
    Ok(System { ctx, kind: kind_of(m), layout, rows, constraints, kept })
}

impl System {
    /// Constraint multipliers spread back onto all position variables.
    pub fn spread(&self, v: &[Scalar]) -> Vec<Scalar> {
        let mut x = vec![Scalar::zero(); self.layout.nvars];
        for (k, &var) in self.kept.iter().enumerate() {
            x[var] = v[k].clone();
        }
        x
    }
}
