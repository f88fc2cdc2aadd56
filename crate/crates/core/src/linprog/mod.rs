//! Two-phase primal simplex with Bland's rule over [`Scalar`].
//!
//! Exact inputs are pivoted exactly. The constraint matrix may only pivot on
//! rational entries; symbolic right-hand sides or objectives are fine as long
//! as no product of two symbolic values is needed. When one is, the solve
//! fails with [`ScalarError::Nonlinear`] and [`solve_with_fallback`] retries in
//! float mode.

use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::scalar::{NumericContext, Scalar, ScalarError, Sign};

/// Float-mode iteration cap; exact mode terminates by Bland's rule.
const FLOAT_ITERATION_CAP: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error("numerical breakdown in float simplex")]
    NumericalBreakdown,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("strict feasibility requires rational data")]
    NotRational,
}

pub type LpOutcome<T> = std::result::Result<T, LpError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    fn flipped(self) -> Relation {
        match self {
            Relation::Le => Relation::Ge,
            Relation::Ge => Relation::Le,
            Relation::Eq => Relation::Eq,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coefs: Vec<Scalar>,
    pub rel: Relation,
    pub rhs: Scalar,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bound {
    pub lower: Option<Scalar>,
    pub upper: Option<Scalar>,
}

impl Bound {
    pub fn nonneg() -> Bound {
        Bound { lower: Some(Scalar::zero()), upper: None }
    }

    pub fn free() -> Bound {
        Bound { lower: None, upper: None }
    }

    pub fn between(lo: Scalar, hi: Scalar) -> Bound {
        Bound { lower: Some(lo), upper: Some(hi) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<Scalar>,
    pub rows: Vec<Constraint>,
    /// Defaults to `x ≥ 0` for every variable.
    pub bounds: Vec<Bound>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpResult {
    pub status: LpStatus,
    /// Primal solution (optimal) or the last basic feasible point (unbounded).
    pub x: Vec<Scalar>,
    pub objective: Option<Scalar>,
    /// Row multipliers at optimality: for `Max`, `y ≥ 0` on `≤` rows and
    /// `y ≤ 0` on `≥` rows; for `Min` the signs flip. Upper-bound rows created
    /// from finite variable bounds follow the original rows.
    pub dual: Vec<Scalar>,
    /// On infeasibility: `y ≤ 0` on `≤` rows, `y ≥ 0` on `≥` rows, with
    /// `yᵀb > 0` and `yᵀA ≤ 0` on nonnegative columns (`= 0` on free ones).
    pub farkas: Vec<Scalar>,
    /// On unboundedness: an improving direction in the original variables.
    pub ray: Vec<Scalar>,
}

impl LinearProgram {
    pub fn new(sense: Sense, objective: Vec<Scalar>) -> Self {
        let n = objective.len();
        LinearProgram { sense, objective, rows: Vec::new(), bounds: vec![Bound::nonneg(); n] }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_row(&mut self, coefs: Vec<Scalar>, rel: Relation, rhs: Scalar) {
        self.rows.push(Constraint { coefs, rel, rhs });
    }

    pub fn set_bound(&mut self, j: usize, bound: Bound) {
        self.bounds[j] = bound;
    }

    /// True when every coefficient, bound and right-hand side is rational.
    pub fn is_rational(&self) -> bool {
        let rational = |s: &Scalar| matches!(s, Scalar::Rational(_));
        self.objective.iter().all(rational)
            && self.rows.iter().all(|r| rational(&r.rhs) && r.coefs.iter().all(rational))
            && self.bounds.iter().all(|b| {
                b.lower.as_ref().is_none_or(rational) && b.upper.as_ref().is_none_or(rational)
            })
    }

    pub fn has_float(&self) -> bool {
        self.objective.iter().any(Scalar::is_float)
            || self.rows.iter().any(|r| r.rhs.is_float() || r.coefs.iter().any(Scalar::is_float))
    }

    /// Same program with every entry evaluated to binary64.
    pub fn to_float(&self, ctx: &NumericContext) -> LpOutcome<LinearProgram> {
        let f = |s: &Scalar| s.to_float(ctx);
        let fo = |s: &Option<Scalar>| s.as_ref().map(f).transpose();
        Ok(LinearProgram {
            sense: self.sense,
            objective: self.objective.iter().map(f).collect::<Result<_, _>>()?,
            rows: self
                .rows
                .iter()
                .map(|r| {
                    Ok(Constraint {
                        coefs: r.coefs.iter().map(f).collect::<Result<_, _>>()?,
                        rel: r.rel,
                        rhs: f(&r.rhs)?,
                    })
                })
                .collect::<Result<_, ScalarError>>()?,
            bounds: self
                .bounds
                .iter()
                .map(|b| Ok(Bound { lower: fo(&b.lower)?, upper: fo(&b.upper)? }))
                .collect::<Result<_, ScalarError>>()?,
        })
    }

    fn check_dims(&self) -> LpOutcome<()> {
        let n = self.num_vars();
        if self.bounds.len() != n {
            return Err(LpError::Dimension(format!("{} bounds for {n} variables", self.bounds.len())));
        }
        for (i, r) in self.rows.iter().enumerate() {
            if r.coefs.len() != n {
                return Err(LpError::Dimension(format!("row {i} has {} coefficients", r.coefs.len())));
            }
        }
        Ok(())
    }
}

/// How an original variable is expressed through nonnegative columns.
struct VarMap {
    offset: Scalar,
    cols: Vec<(usize, bool)>, // (column, negated)
}

struct Tableau<'a> {
    ctx: &'a NumericContext,
    rows: Vec<Vec<Scalar>>,
    rhs: Vec<Scalar>,
    basis: Vec<usize>,
    d: Vec<Scalar>,
    banned: Vec<bool>,
    float: bool,
}

impl<'a> Tableau<'a> {
    fn sign(&self, s: &Scalar) -> LpOutcome<Sign> {
        Ok(self.ctx.sign(s)?)
    }

    fn reset_costs(&mut self, cost: &[Scalar]) -> LpOutcome<()> {
        let ncols = cost.len();
        let mut d = cost.to_vec();
        for (i, row) in self.rows.iter().enumerate() {
            let cb = &cost[self.basis[i]];
            if cb.is_exact_zero() {
                continue;
            }
            for j in 0..ncols {
                if !row[j].is_exact_zero() {
                    d[j] = d[j].sub(&cb.mul(&row[j])?)?;
                }
            }
        }
        self.d = d;
        Ok(())
    }

    fn pivot(&mut self, r: usize, j: usize) -> LpOutcome<()> {
        let p = self.rows[r][j].clone();
        let one = Scalar::one();
        let inv = one.div(&p)?;
        for v in self.rows[r].iter_mut() {
            if !v.is_exact_zero() {
                *v = v.mul(&inv)?;
            }
        }
        self.rows[r][j] = Scalar::one();
        self.rhs[r] = self.rhs[r].mul(&inv)?;
        let prow = self.rows[r].clone();
        let prhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = self.rows[i][j].clone();
            if f.is_exact_zero() {
                continue;
            }
            for (k, pv) in prow.iter().enumerate() {
                if !pv.is_exact_zero() {
                    self.rows[i][k] = self.rows[i][k].sub(&f.mul(pv)?)?;
                }
            }
            self.rows[i][j] = Scalar::zero();
            self.rhs[i] = self.rhs[i].sub(&f.mul(&prhs)?)?;
        }
        let f = self.d[j].clone();
        if !f.is_exact_zero() {
            for (k, pv) in prow.iter().enumerate() {
                if !pv.is_exact_zero() {
                    self.d[k] = self.d[k].sub(&f.mul(pv)?)?;
                }
            }
            self.d[j] = Scalar::zero();
        }
        self.basis[r] = j;
        Ok(())
    }

    /// Runs Bland-rule iterations to optimality (max form). Returns the column
    /// that proved unboundedness, if any.
    fn optimize(&mut self) -> LpOutcome<Option<usize>> {
        let mut iterations = 0usize;
        loop {
            iterations += 1;
            if self.float && iterations > FLOAT_ITERATION_CAP {
                return Err(LpError::NumericalBreakdown);
            }
            let mut entering = None;
            for j in 0..self.d.len() {
                if !self.banned[j] && self.sign(&self.d[j])? == Sign::Positive {
                    entering = Some(j);
                    break;
                }
            }
            let Some(j) = entering else { return Ok(None) };
            let mut leave: Option<(usize, Scalar)> = None;
            for i in 0..self.rows.len() {
                if self.sign(&self.rows[i][j])? != Sign::Positive {
                    continue;
                }
                let ratio = self.rhs[i].div(&self.rows[i][j])?;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((bi, br)) => match self.ctx.cmp(&ratio, &br)? {
                        Sign::Negative => Some((i, ratio)),
                        Sign::Zero if self.basis[i] < self.basis[bi] => Some((i, ratio)),
                        _ => Some((bi, br)),
                    },
                };
            }
            match leave {
                None => return Ok(Some(j)),
                Some((r, _)) => self.pivot(r, j)?,
            }
        }
    }

    fn column_values(&self, ncols: usize) -> Vec<Scalar> {
        let mut v = vec![Scalar::zero(); ncols];
        for (i, &b) in self.basis.iter().enumerate() {
            v[b] = self.rhs[i].clone();
        }
        v
    }
}

/// Solves `p` in the arithmetic of its entries.
pub fn lp_solve(p: &LinearProgram, ctx: &NumericContext) -> LpOutcome<LpResult> {
    p.check_dims()?;
    let n = p.num_vars();
    let float = p.has_float();

    // Variable substitution onto nonnegative columns.
    let mut maps = Vec::with_capacity(n);
    let mut ncols = 0usize;
    let mut extra_rows: Vec<(usize, Scalar)> = Vec::new(); // (column, upper - lower)
    for b in &p.bounds {
        match (&b.lower, &b.upper) {
            (Some(l), u) => {
                maps.push(VarMap { offset: l.clone(), cols: vec![(ncols, false)] });
                if let Some(u) = u {
                    extra_rows.push((ncols, u.sub(l)?));
                }
                ncols += 1;
            }
            (None, Some(u)) => {
                maps.push(VarMap { offset: u.clone(), cols: vec![(ncols, true)] });
                ncols += 1;
            }
            (None, None) => {
                maps.push(VarMap { offset: Scalar::zero(), cols: vec![(ncols, false), (ncols + 1, true)] });
                ncols += 2;
            }
        }
    }
    let nstruct = ncols;

    // Rows in structural columns, before sign normalisation.
    let mut srows: Vec<(Vec<Scalar>, Relation, Scalar)> = Vec::new();
    for row in &p.rows {
        let mut coefs = vec![Scalar::zero(); nstruct];
        let mut rhs = row.rhs.clone();
        for (j, a) in row.coefs.iter().enumerate() {
            if a.is_exact_zero() {
                continue;
            }
            if !maps[j].offset.is_exact_zero() {
                rhs = rhs.sub(&a.mul(&maps[j].offset)?)?;
            }
            for &(c, neg) in &maps[j].cols {
                coefs[c] = if neg { a.neg() } else { a.clone() };
            }
        }
        srows.push((coefs, row.rel, rhs));
    }
    for (c, width) in &extra_rows {
        let mut coefs = vec![Scalar::zero(); nstruct];
        coefs[*c] = Scalar::one();
        srows.push((coefs, Relation::Le, width.clone()));
    }

    let m = srows.len();
    let mut flips = vec![false; m];
    for (i, (coefs, rel, rhs)) in srows.iter_mut().enumerate() {
        if ctx.sign(rhs)? == Sign::Negative {
            flips[i] = true;
            for c in coefs.iter_mut() {
                *c = c.neg();
            }
            *rhs = rhs.neg();
            *rel = rel.flipped();
        }
    }

    // Slack/surplus columns, then artificials.
    let mut slack_col = vec![None; m];
    for (i, (_, rel, _)) in srows.iter().enumerate() {
        if *rel != Relation::Eq {
            slack_col[i] = Some(ncols);
            ncols += 1;
        }
    }
    let mut art_col = vec![None; m];
    for (i, (_, rel, _)) in srows.iter().enumerate() {
        if *rel != Relation::Le {
            art_col[i] = Some(ncols);
            ncols += 1;
        }
    }
    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut identity_col = Vec::with_capacity(m);
    for (i, (coefs, rel, b)) in srows.into_iter().enumerate() {
        let mut row = coefs;
        row.resize(ncols, Scalar::zero());
        if let Some(s) = slack_col[i] {
            row[s] = if rel == Relation::Le { Scalar::one() } else { Scalar::int(-1) };
        }
        if let Some(a) = art_col[i] {
            row[a] = Scalar::one();
        }
        let id = if rel == Relation::Le { slack_col[i].unwrap() } else { art_col[i].unwrap() };
        identity_col.push(id);
        basis.push(id);
        rows.push(row);
        rhs.push(b);
    }
    let is_art: Vec<bool> = (0..ncols).map(|c| art_col.contains(&Some(c))).collect();

    let mut t = Tableau { ctx, rows, rhs, basis, d: Vec::new(), banned: vec![false; ncols], float };

    // Phase I: maximise −Σ artificials.
    let phase1_cost: Vec<Scalar> =
        (0..ncols).map(|c| if is_art[c] { Scalar::int(-1) } else { Scalar::zero() }).collect();
    let any_art = is_art.iter().any(|&a| a);
    if any_art {
        t.reset_costs(&phase1_cost)?;
        t.optimize()?;
        let vals = t.column_values(ncols);
        let mut infeas = Scalar::zero();
        for c in 0..ncols {
            if is_art[c] {
                infeas = infeas.add(&vals[c])?;
            }
        }
        if ctx.sign(&infeas)? == Sign::Positive {
            let mut farkas = Vec::with_capacity(m);
            for i in 0..m {
                let col = identity_col[i];
                let y_std = phase1_cost[col].sub(&t.d[col])?;
                let y = if flips[i] { y_std } else { y_std.neg() };
                farkas.push(y);
            }
            return Ok(LpResult {
                status: LpStatus::Infeasible,
                x: Vec::new(),
                objective: None,
                dual: Vec::new(),
                farkas,
                ray: Vec::new(),
            });
        }
        // Drive zero-level artificials out of the basis where possible.
        for r in 0..m {
            if !is_art[t.basis[r]] {
                continue;
            }
            let mut col = None;
            for j in 0..ncols {
                if !is_art[j] && t.sign(&t.rows[r][j])? != Sign::Zero {
                    col = Some(j);
                    break;
                }
            }
            if let Some(j) = col {
                t.pivot(r, j)?;
            }
        }
        for c in 0..ncols {
            t.banned[c] = is_art[c];
        }
    }

    // Phase II in max form.
    let negate = p.sense == Sense::Min;
    let mut cost = vec![Scalar::zero(); ncols];
    for (j, c) in p.objective.iter().enumerate() {
        let c = if negate { c.neg() } else { c.clone() };
        for &(col, neg) in &maps[j].cols {
            cost[col] = if neg { c.neg() } else { c.clone() };
        }
    }
    t.reset_costs(&cost)?;
    let unbounded = t.optimize()?;
    let vals = t.column_values(ncols);
    let recover = |vals: &[Scalar], with_offset: bool| -> LpOutcome<Vec<Scalar>> {
        let mut x = Vec::with_capacity(n);
        for map in &maps {
            let mut v = if with_offset { map.offset.clone() } else { Scalar::zero() };
            for &(c, neg) in &map.cols {
                v = if neg { v.sub(&vals[c])? } else { v.add(&vals[c])? };
            }
            x.push(v);
        }
        Ok(x)
    };
    let x = recover(&vals, true)?;

    if let Some(j) = unbounded {
        let mut dir = vec![Scalar::zero(); ncols];
        dir[j] = Scalar::one();
        for (i, &b) in t.basis.iter().enumerate() {
            dir[b] = t.rows[i][j].neg();
        }
        let ray = recover(&dir, false)?;
        return Ok(LpResult {
            status: LpStatus::Unbounded,
            x,
            objective: None,
            dual: Vec::new(),
            farkas: Vec::new(),
            ray,
        });
    }

    let mut dual = Vec::with_capacity(m);
    for i in 0..m {
        let col = identity_col[i];
        let y_std = cost[col].sub(&t.d[col])?;
        let y = if flips[i] { y_std.neg() } else { y_std };
        dual.push(if negate { y.neg() } else { y });
    }
    let mut objective = Scalar::zero();
    for (c, v) in p.objective.iter().zip(&x) {
        if !c.is_exact_zero() && !v.is_exact_zero() {
            objective = objective.add(&c.mul(v)?)?;
        }
    }
    Ok(LpResult {
        status: LpStatus::Optimal,
        x,
        objective: Some(objective),
        dual,
        farkas: Vec::new(),
        ray: Vec::new(),
    })
}

/// Solves exactly when possible, otherwise in float. The flag reports whether
/// the float path was taken.
pub fn solve_with_fallback(p: &LinearProgram, ctx: &NumericContext) -> LpOutcome<(LpResult, bool)> {
    if p.has_float() {
        return Ok((lp_solve(p, ctx)?, true));
    }
    match lp_solve(p, ctx) {
        Ok(r) => Ok((r, false)),
        Err(LpError::Scalar(ScalarError::Nonlinear)) | Err(LpError::Scalar(ScalarError::PrecisionExhausted(_))) => {
            let fp = p.to_float(ctx)?;
            Ok((lp_solve(&fp, ctx)?, true))
        }
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrictWitness {
    pub row: usize,
    pub x: Vec<Scalar>,
}

/// Looks for `x` satisfying every row of `p` with at least one row of
/// `strict_rows` holding strictly. Each candidate row gets an auxiliary slack
/// `s ∈ [0, 1]` that is maximised; `s > 0` certifies strictness.
pub fn lp_feasible_strict(
    p: &LinearProgram,
    strict_rows: &[usize],
    ctx: &NumericContext,
) -> LpOutcome<Option<StrictWitness>> {
    if !p.is_rational() {
        return Err(LpError::NotRational);
    }
    p.check_dims()?;
    let n = p.num_vars();
    for &k in strict_rows {
        let row = &p.rows[k];
        if row.rel == Relation::Eq {
            continue;
        }
        let mut objective = vec![Scalar::zero(); n + 1];
        objective[n] = Scalar::one();
        let mut q = LinearProgram::new(Sense::Max, objective);
        q.bounds = p.bounds.clone();
        q.bounds.push(Bound::between(Scalar::zero(), Scalar::one()));
        for (i, r) in p.rows.iter().enumerate() {
            let mut coefs = r.coefs.clone();
            let s_coef = if i != k {
                Scalar::zero()
            } else if r.rel == Relation::Ge {
                Scalar::int(-1)
            } else {
                Scalar::one()
            };
            coefs.push(s_coef);
            q.add_row(coefs, r.rel, r.rhs.clone());
        }
        let res = lp_solve(&q, ctx)?;
        if res.status == LpStatus::Optimal {
            let s = &res.x[n];
            if ctx.sign(s)? == Sign::Positive {
                return Ok(Some(StrictWitness { row: k, x: res.x[..n].to_vec() }));
            }
        }
    }
    Ok(None)
}

/// Least common multiple of the denominators of a rational vector.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a BigRational>) -> num_bigint::BigInt {
    use num_integer::Integer;
    let mut l = num_bigint::BigInt::one();
    for v in values {
        l = l.lcm(v.denom());
    }
    if l.is_zero() {
        num_bigint::BigInt::one()
    } else {
        l
    }
}

#[cfg(test)]
mod tests;
