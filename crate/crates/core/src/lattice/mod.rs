//! Lattice reduction and closest-vector search in binary64, plus exact
//! simultaneous Dirichlet approximation.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::{rational_from_f64, NumericContext, Scalar, ScalarError, MAX_DIGITS};

/// Relative threshold below which a Gram–Schmidt norm counts as zero.
const RANK_TOL: f64 = 1e-12;
/// Enumeration budget of [`cvp_bruteforce`].
pub const BRUTEFORCE_BUDGET: f64 = 1e8;

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeBasis {
    /// Generators `b₁..b_m`, each of the ambient dimension.
    pub generators: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CvpStatus {
    ExactOptimal,
    BestWithinRadius,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvpResult {
    pub coefficients: Vec<i64>,
    pub point: Vec<f64>,
    pub distance_sq: f64,
    pub status: CvpStatus,
}

struct GramSchmidt {
    /// `mu[i][j]` for `j < i`.
    mu: Vec<Vec<f64>>,
    /// Squared norms of the orthogonalised vectors.
    norms: Vec<f64>,
    ortho: Vec<Vec<f64>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn gram_schmidt(b: &[Vec<f64>]) -> GramSchmidt {
    let m = b.len();
    let mut ortho: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut mu = vec![vec![0.0; m]; m];
    let mut norms = vec![0.0; m];
    for i in 0..m {
        let mut v = b[i].clone();
        for j in 0..i {
            mu[i][j] = if norms[j] > 0.0 { dot(&b[i], &ortho[j]) / norms[j] } else { 0.0 };
            for (vk, ok) in v.iter_mut().zip(&ortho[j]) {
                *vk -= mu[i][j] * ok;
            }
        }
        norms[i] = dot(&v, &v);
        ortho.push(v);
    }
    GramSchmidt { mu, norms, ortho }
}

impl LatticeBasis {
    pub fn new(generators: Vec<Vec<f64>>) -> Result<LatticeBasis> {
        if let Some(first) = generators.first() {
            if generators.iter().any(|g| g.len() != first.len()) {
                return Err(Error::DimensionMismatch("generators of unequal length".into()));
            }
        }
        if generators.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Input("non-finite lattice coordinate".into()));
        }
        Ok(LatticeBasis { generators })
    }

    pub fn from_scalars(generators: &[Vec<Scalar>], ctx: &NumericContext) -> Result<LatticeBasis> {
        let g = generators
            .iter()
            .map(|v| v.iter().map(|x| Ok(ctx.to_f64(x)?)).collect::<Result<Vec<f64>>>())
            .collect::<Result<Vec<_>>>()?;
        LatticeBasis::new(g)
    }

    pub fn rank_count(&self) -> usize {
        self.generators.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.generators.first().map_or(0, Vec::len)
    }

    /// Number of generators with a non-negligible Gram–Schmidt component.
    pub fn rank(&self) -> usize {
        let gs = gram_schmidt(&self.generators);
        let scale = self.generators.iter().map(|g| dot(g, g)).fold(0.0, f64::max).max(1e-300);
        gs.norms.iter().filter(|&&n| n > RANK_TOL * scale).count()
    }

    fn require_independent(&self) -> Result<()> {
        if self.rank() < self.generators.len() {
            return Err(Error::DependentGenerators);
        }
        Ok(())
    }

    /// `Σ φ_i b_i`.
    pub fn combine(&self, phi: &[i64]) -> Vec<f64> {
        let mut p = vec![0.0; self.ambient_dim()];
        for (c, g) in phi.iter().zip(&self.generators) {
            for (pk, gk) in p.iter_mut().zip(g) {
                *pk += *c as f64 * gk;
            }
        }
        p
    }

    pub fn distance_sq(&self, phi: &[i64], target: &[f64]) -> f64 {
        let p = self.combine(phi);
        p.iter().zip(target).map(|(a, b)| (a - b) * (a - b)).sum()
    }

    /// Real least-squares coefficients of `target` (its projection onto the span).
    pub fn least_squares(&self, target: &[f64]) -> Result<Vec<f64>> {
        let m = self.generators.len();
        let n = self.ambient_dim();
        if target.len() != n {
            return Err(Error::DimensionMismatch("target length differs from ambient dimension".into()));
        }
        if m == 0 {
            return Ok(Vec::new());
        }
        let a = nalgebra::DMatrix::from_fn(n, m, |i, j| self.generators[j][i]);
        let b = nalgebra::DVector::from_column_slice(target);
        let svd = a.svd(true, true);
        let x = svd.solve(&b, 1e-12).map_err(|e| Error::InvariantViolation(e.to_string()))?;
        Ok(x.iter().copied().collect())
    }
}

fn checked(v: Option<i64>) -> Result<i64> {
    v.ok_or_else(|| Error::InvariantViolation("integer overflow in lattice transform".into()))
}

/// LLL reduction. Returns the reduced basis and `U` with `reduced = U·B`
/// (rows are generators); coefficients map back by `φ_B = Uᵀ φ_reduced`.
pub fn lll_reduce(basis: &LatticeBasis, delta: f64) -> Result<(LatticeBasis, Vec<Vec<i64>>)> {
    if !(delta > 0.25 && delta < 1.0) {
        return Err(Error::Input(format!("LLL parameter {delta} outside (1/4, 1)")));
    }
    basis.require_independent()?;
    let m = basis.generators.len();
    let mut b = basis.generators.clone();
    let mut u: Vec<Vec<i64>> = (0..m).map(|i| (0..m).map(|j| i64::from(i == j)).collect()).collect();
    let mut gs = gram_schmidt(&b);
    let mut k = 1;
    let mut guard = 0usize;
    while k < m {
        guard += 1;
        if guard > 1_000_000 {
            return Err(Error::InvariantViolation("LLL failed to converge".into()));
        }
        for j in (0..k).rev() {
            let q = gs.mu[k][j].round();
            if q != 0.0 {
                let qi = q as i64;
                for t in 0..b[k].len() {
                    b[k][t] -= q * b[j][t];
                }
                for t in 0..m {
                    u[k][t] = checked(u[k][t].checked_sub(checked(qi.checked_mul(u[j][t]))?))?;
                }
                gs = gram_schmidt(&b);
            }
        }
        let lhs = gs.norms[k];
        let rhs = (delta - gs.mu[k][k - 1] * gs.mu[k][k - 1]) * gs.norms[k - 1];
        if lhs >= rhs {
            k += 1;
        } else {
            b.swap(k, k - 1);
            u.swap(k, k - 1);
            gs = gram_schmidt(&b);
            k = (k - 1).max(1);
        }
    }
    Ok((LatticeBasis { generators: b }, u))
}

/// Independent LLL check via a Householder QR factorisation: counts
/// size-reduction and Lovász violations.
pub fn lll_violations(basis: &LatticeBasis, delta: f64) -> usize {
    let m = basis.generators.len();
    if m == 0 {
        return 0;
    }
    let n = basis.ambient_dim();
    let a = nalgebra::DMatrix::from_fn(n, m, |i, j| basis.generators[j][i]);
    let r = a.qr().r();
    let mut bad = 0;
    for i in 0..m {
        for j in 0..i {
            let mu = r[(j, i)] / r[(j, j)];
            if mu.abs() > 0.5 + 1e-9 {
                bad += 1;
            }
        }
    }
    for k in 1..m {
        let mu = r[(k - 1, k)] / r[(k - 1, k - 1)];
        let lhs = r[(k, k)] * r[(k, k)];
        let rhs = (delta - mu * mu) * r[(k - 1, k - 1)] * r[(k - 1, k - 1)];
        if lhs < rhs - 1e-9 * rhs.abs().max(1.0) {
            bad += 1;
        }
    }
    bad
}

fn tie_tol(best: f64) -> f64 {
    1e-9 * best.max(1.0)
}

fn lex_less(a: &[i64], b: &[i64]) -> bool {
    a < b
}

struct Enumerator<'a> {
    gs: &'a GramSchmidt,
    tau: Vec<f64>,
    bound: f64,
    phi: Vec<i64>,
    found: Vec<Vec<i64>>,
    best: f64,
}

impl Enumerator<'_> {
    fn visit(&mut self, k: usize, partial: f64) {
        let m = self.phi.len();
        let mut c = self.tau[k];
        for i in k + 1..m {
            c -= self.phi[i] as f64 * self.gs.mu[i][k];
        }
        let norm = self.gs.norms[k];
        let start = c.round();
        // Zig-zag: start, start±1, start∓1, start±2, ...
        let up_first = c >= start;
        let mut offset = 0i64;
        let mut exhausted = [false, false];
        loop {
            for dir in 0..2 {
                if offset == 0 && dir == 1 {
                    continue;
                }
                let side = if (dir == 0) == up_first { 1 } else { -1 };
                if exhausted[if side > 0 { 0 } else { 1 }] {
                    continue;
                }
                let x = start as i64 + side * offset;
                let diff = c - x as f64;
                let p = partial + diff * diff * norm;
                if p > self.bound + tie_tol(self.bound) {
                    // Farther candidates on this side only grow.
                    if offset > 0 || diff.abs() > 0.5 {
                        exhausted[if side > 0 { 0 } else { 1 }] = true;
                    }
                    if offset == 0 {
                        exhausted = [true, true];
                    }
                    continue;
                }
                self.phi[k] = x;
                if k == 0 {
                    if p < self.best - tie_tol(self.best) {
                        self.best = p;
                        self.bound = p;
                        self.found.clear();
                    }
                    self.found.push(self.phi.clone());
                } else {
                    self.visit(k - 1, p);
                }
            }
            if exhausted[0] && exhausted[1] {
                break;
            }
            offset += 1;
        }
        self.phi[k] = 0;
    }
}

/// Exact closest vector by LLL preprocessing and Schnorr–Euchner enumeration.
/// Ties within a relative `1e-9` go to the lexicographically smallest `φ`.
pub fn cvp_closest(basis: &LatticeBasis, target: &[f64]) -> Result<CvpResult> {
    basis.require_independent()?;
    let m = basis.generators.len();
    if target.len() != basis.ambient_dim() && m > 0 {
        return Err(Error::DimensionMismatch("target length differs from ambient dimension".into()));
    }
    if m == 0 {
        let d = dot(target, target);
        return Ok(CvpResult { coefficients: vec![], point: vec![0.0; target.len()], distance_sq: d, status: CvpStatus::ExactOptimal });
    }
    let (reduced, u) = lll_reduce(basis, 0.99)?;
    let gs = gram_schmidt(&reduced.generators);
    let tau: Vec<f64> = (0..m).map(|k| dot(target, &gs.ortho[k]) / gs.norms[k]).collect();

    // Babai nearest plane gives the initial radius.
    let mut babai = vec![0i64; m];
    let mut partial = 0.0;
    for k in (0..m).rev() {
        let mut c = tau[k];
        for i in k + 1..m {
            c -= babai[i] as f64 * gs.mu[i][k];
        }
        babai[k] = c.round() as i64;
        partial += (c - babai[k] as f64).powi(2) * gs.norms[k];
    }
    let mut e = Enumerator { gs: &gs, tau, bound: partial, phi: vec![0; m], found: Vec::new(), best: partial * (1.0 + 1e-9) + 1e-12 };
    e.bound = e.best;
    e.visit(m - 1, 0.0);

    let to_original = |phi: &[i64]| -> Result<Vec<i64>> {
        let mut out = vec![0i64; m];
        for (i, &p) in phi.iter().enumerate() {
            for t in 0..m {
                out[t] = checked(out[t].checked_add(checked(p.checked_mul(u[i][t]))?))?;
            }
        }
        Ok(out)
    };
    let mut candidates = Vec::with_capacity(e.found.len() + 1);
    for phi in e.found.iter().chain(std::iter::once(&babai)) {
        let orig = to_original(phi)?;
        let d = basis.distance_sq(&orig, target);
        candidates.push((orig, d));
    }
    let min = candidates.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    let (coefficients, distance_sq) = candidates
        .into_iter()
        .filter(|c| c.1 <= min + tie_tol(min))
        .reduce(|a, b| if lex_less(&b.0, &a.0) { b } else { a })
        .expect("at least the Babai point");
    Ok(CvpResult { point: basis.combine(&coefficients), coefficients, distance_sq, status: CvpStatus::ExactOptimal })
}

/// Rounds the least-squares coefficients of the projected target, half to even.
pub fn babai_round(basis: &LatticeBasis, target: &[f64]) -> Result<CvpResult> {
    basis.require_independent()?;
    let coeffs = basis.least_squares(target)?;
    let coefficients = coeffs
        .iter()
        .map(|&c| {
            let r = rational_from_f64(c).ok_or_else(|| Error::Input("non-finite coefficient".into()))?;
            crate::scalar::round_half_even_rational(&r)
                .to_i64()
                .ok_or_else(|| Error::InvariantViolation("coefficient out of range".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    let distance_sq = basis.distance_sq(&coefficients, target);
    Ok(CvpResult { point: basis.combine(&coefficients), coefficients, distance_sq, status: CvpStatus::BestWithinRadius })
}

/// Exhaustive minimum over `[-radius, radius]^m`, lexicographic tie-break.
pub fn cvp_bruteforce(basis: &LatticeBasis, target: &[f64], radius: u32) -> Result<CvpResult> {
    let m = basis.generators.len();
    let side = 2.0 * radius as f64 + 1.0;
    let needed = m as f64 * side.powi(m as i32);
    if needed > BRUTEFORCE_BUDGET {
        return Err(Error::BudgetExceeded { needed, budget: BRUTEFORCE_BUDGET });
    }
    let n = target.len();
    if m > 0 && basis.ambient_dim() != n {
        return Err(Error::DimensionMismatch("target length differs from ambient dimension".into()));
    }
    let r = radius as i64;
    let start: Vec<i64> = vec![-r; m];
    let mut origin = target.to_vec();
    for g in &basis.generators {
        for t in 0..n {
            origin[t] += r as f64 * g[t];
        }
    }
    // Visits every point in lexicographic order; the last coordinate moves
    // fastest. Stops early when `stop` returns true.
    let sweep = |stop: &mut dyn FnMut(&[i64], f64) -> bool| {
        let mut res = origin.clone();
        let mut cur = start.clone();
        loop {
            if stop(&cur, dot(&res, &res)) {
                return;
            }
            let mut advanced = false;
            for k in (0..m).rev() {
                if cur[k] < r {
                    cur[k] += 1;
                    for t in 0..n {
                        res[t] -= basis.generators[k][t];
                    }
                    advanced = true;
                    break;
                }
                for t in 0..n {
                    res[t] += (2 * r) as f64 * basis.generators[k][t];
                }
                cur[k] = -r;
            }
            if !advanced {
                return;
            }
        }
    };
    // Two passes: the minimum, then the first point within the tie
    // tolerance of it.
    let mut best = f64::INFINITY;
    sweep(&mut |_, d| {
        best = best.min(d);
        false
    });
    let mut chosen = start.clone();
    sweep(&mut |cur, d| {
        if d <= best + tie_tol(best) {
            chosen = cur.to_vec();
            return true;
        }
        false
    });
    let distance_sq = basis.distance_sq(&chosen, target);
    Ok(CvpResult { point: basis.combine(&chosen), coefficients: chosen, distance_sq, status: CvpStatus::BestWithinRadius })
}

/// Nearest integer (half to even) and the exact distance to it.
pub fn nearest_with_distance(v: &Scalar, ctx: &NumericContext) -> Result<(BigInt, Scalar)> {
    let x = ctx.round_half_even(v)?;
    let diff = v.sub(&Scalar::from_bigint(x.clone()))?;
    let dist = ctx.abs(&diff)?;
    Ok((x, dist))
}

/// Decides `dist^m · q < 1` for `dist ≥ 0`, exactly for exact inputs.
pub fn dist_pow_below(dist: &Scalar, m: u32, q: &BigRational, ctx: &NumericContext) -> Result<bool> {
    let one = BigRational::one();
    let test = |x: &BigRational| -> BigRational { x.pow(m as i32) * q };
    match dist {
        Scalar::Rational(r) => Ok(test(r) < one),
        Scalar::Float(x) => {
            let qf = crate::scalar::rational_to_f64(q);
            Ok(x.abs().powi(m as i32) * qf < 1.0)
        }
        Scalar::LinearExt(_) => {
            let mut digits = ctx.base_digits;
            loop {
                let (lo, hi) = ctx.enclose(dist, digits)?;
                let lo = if lo.is_negative() { BigRational::zero() } else { lo };
                if test(&hi) < one {
                    return Ok(true);
                }
                if test(&lo) >= one {
                    return Ok(false);
                }
                if digits >= MAX_DIGITS {
                    return Err(ScalarError::PrecisionExhausted(digits).into());
                }
                digits = (digits * 2).min(MAX_DIGITS);
            }
        }
    }
}

/// Smallest `q ∈ [1, N]` with `|α_i q − x_i| < N^{-1/m}` for all `i`, where
/// `x_i` is the nearest integer to `α_i q`.
pub fn dirichlet_simultaneous(alphas: &[Scalar], n_bound: &BigInt, ctx: &NumericContext) -> Result<(BigInt, Vec<BigInt>)> {
    if *n_bound < BigInt::from(2) {
        return Err(Error::Input("Dirichlet bound N must be at least 2".into()));
    }
    let m = alphas.len().max(1) as u32;
    let nr = BigRational::from_integer(n_bound.clone());
    let mut q = BigInt::one();
    while q <= *n_bound {
        let qs = Scalar::from_bigint(q.clone());
        let mut xs = Vec::with_capacity(alphas.len());
        let mut ok = true;
        for a in alphas {
            let (x, dist) = nearest_with_distance(&a.mul(&qs)?, ctx)?;
            if !dist_pow_below(&dist, m, &nr, ctx)? {
                ok = false;
                break;
            }
            xs.push(x);
        }
        if ok {
            return Ok((q, xs));
        }
        q += 1;
    }
    Err(Error::InvariantViolation("Dirichlet search failed; floating-point data too coarse".into()))
}

#[cfg(test)]
mod tests;
