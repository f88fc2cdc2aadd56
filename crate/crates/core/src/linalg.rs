//! Small exact linear algebra used by the certification steps: rational
//! nullspaces, component splitting of linear-extension rows, and
//! rationalisation of binary64 values.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::scalar::Scalar;

/// Basis of `{x : A x = 0}` over ℚ, one vector per free column.
pub fn rational_nullspace(rows: &[Vec<BigRational>], ncols: usize) -> Vec<Vec<BigRational>> {
    let mut a: Vec<Vec<BigRational>> = rows.to_vec();
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for v in a[r].iter_mut() {
            *v = &*v * &inv;
        }
        for i in 0..a.len() {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for k in 0..ncols {
                    let delta = &f * &a[r][k];
                    a[i][k] -= delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == a.len() {
            break;
        }
    }
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![BigRational::zero(); ncols];
            v[f] = BigRational::one();
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = -a[i][f].clone();
            }
            v
        })
        .collect()
}

/// Names of the constants occurring in `rows`, sorted.
pub fn constant_basis<'a>(rows: impl IntoIterator<Item = &'a Scalar>) -> Vec<String> {
    let mut names: Vec<String> = Vec::new();
    for s in rows {
        for n in s.constant_names() {
            if !names.iter().any(|x| x == n) {
                names.push(n.to_string());
            }
        }
    }
    names.sort();
    names
}

/// Replaces each row `Σ_k a_k x_k` by one rational row per coordinate of
/// `{1} ∪ basis`. For rational `x` and independent constants the split
/// system has the same solutions; in general its solutions are a subset.
pub fn split_rows(rows: &[Vec<Scalar>], basis: &[String]) -> Option<Vec<Vec<BigRational>>> {
    let mut out = Vec::with_capacity(rows.len() * (basis.len() + 1));
    for row in rows {
        let comps: Vec<Vec<BigRational>> = row.iter().map(|s| s.components(basis)).collect::<Option<_>>()?;
        for k in 0..=basis.len() {
            out.push(comps.iter().map(|c| c[k].clone()).collect());
        }
    }
    Some(out)
}

/// Nullspace of a matrix of exact scalars, eliminating only on rational
/// pivots. `None` when the remaining rows have only irrational entries or an
/// update would leave the linear extension.
pub fn scalar_nullspace(rows: &[Vec<Scalar>], ncols: usize) -> Option<Vec<Vec<Scalar>>> {
    let mut a: Vec<Vec<Scalar>> = rows.to_vec();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut row_used = vec![false; a.len()];
    let mut col_used = vec![false; ncols];
    loop {
        let pick = (0..a.len())
            .filter(|&i| !row_used[i])
            .flat_map(|i| (0..ncols).map(move |c| (i, c)))
            .find(|&(i, c)| !col_used[c] && !a[i][c].is_exact_zero() && a[i][c].as_rational().is_some());
        let Some((p, c)) = pick else { break };
        let inv = a[p][c].as_rational()?.recip();
        for v in a[p].iter_mut() {
            *v = v.scale(&inv);
        }
        for i in 0..a.len() {
            if i != p && !a[i][c].is_exact_zero() {
                let f = a[i][c].clone();
                for k in 0..ncols {
                    if !a[p][k].is_exact_zero() {
                        let delta = f.mul(&a[p][k]).ok()?;
                        a[i][k] = a[i][k].sub(&delta).ok()?;
                    }
                }
            }
        }
        row_used[p] = true;
        col_used[c] = true;
        pivots.push((p, c));
    }
    if (0..a.len()).any(|i| !row_used[i] && a[i].iter().any(|x| !x.is_exact_zero())) {
        return None;
    }
    Some(
        (0..ncols)
            .filter(|&f| !col_used[f])
            .map(|f| {
                let mut v = vec![Scalar::zero(); ncols];
                v[f] = Scalar::one();
                for &(r, p) in &pivots {
                    v[p] = a[r][f].neg();
                }
                v
            })
            .collect(),
    )
}

/// Best rational approximation with denominator at most `max_den`.
pub fn rationalize(x: f64, max_den: u64) -> BigRational {
    if !x.is_finite() {
        return BigRational::zero();
    }
    let neg = x < 0.0;
    let mut v = x.abs();
    let (mut p0, mut q0, mut p1, mut q1) = (0u128, 1u128, 1u128, 0u128);
    for _ in 0..64 {
        let a = v.floor();
        if a > 1e18 {
            break;
        }
        let a = a as u128;
        let p2 = a * p1 + p0;
        let q2 = a * q1 + q0;
        if q2 > max_den as u128 {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = v - v.floor();
        if frac < 1e-15 {
            break;
        }
        v = 1.0 / frac;
    }
    if q1 == 0 {
        return BigRational::zero();
    }
    let r = BigRational::new(BigInt::from(p1), BigInt::from(q1));
    if neg {
        -r
    } else {
        r
    }
}

/// Least-squares coefficients of `target` in the span of `basis` (float).
pub fn least_squares(basis: &[Vec<f64>], target: &[f64]) -> Option<Vec<f64>> {
    let k = basis.len();
    let n = target.len();
    if k == 0 {
        return Some(Vec::new());
    }
    let a = nalgebra::DMatrix::from_fn(n, k, |i, j| basis[j][i]);
    let b = nalgebra::DVector::from_column_slice(target);
    let x = a.svd(true, true).solve(&b, 1e-12).ok()?;
    Some(x.iter().copied().collect())
}
