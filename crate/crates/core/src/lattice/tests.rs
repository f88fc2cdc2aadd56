use num_bigint::BigInt;
use proptest::prelude::*;

use super::*;
use crate::scalar::{rat, rat_int};

fn basis(rows: &[&[f64]]) -> LatticeBasis {
    LatticeBasis::new(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
}

fn det(rows: &[Vec<i64>]) -> f64 {
    let m = rows.len();
    nalgebra::DMatrix::from_fn(m, m, |i, j| rows[i][j] as f64).determinant()
}

/// `U·B` equals the reduced basis.
fn check_transform(orig: &LatticeBasis, reduced: &LatticeBasis, u: &[Vec<i64>]) {
    for (row, red) in u.iter().zip(&reduced.generators) {
        let p = orig.combine(row);
        for (a, b) in p.iter().zip(red) {
            assert!((a - b).abs() < 1e-9 * (1.0 + b.abs()), "{p:?} vs {red:?}");
        }
    }
    assert!((det(u).abs() - 1.0).abs() < 1e-9);
}

#[test]
fn lll_reduces_textbook_basis() {
    let b = basis(&[&[1.0, 1.0, 1.0], &[-1.0, 0.0, 2.0], &[3.0, 5.0, 6.0]]);
    assert!(lll_violations(&b, 0.99) > 0);
    let (r, u) = lll_reduce(&b, 0.99).unwrap();
    assert_eq!(lll_violations(&r, 0.99), 0);
    check_transform(&b, &r, &u);
    // The first reduced vector is a shortest vector here: (0, 1, 0).
    let n0: f64 = r.generators[0].iter().map(|x| x * x).sum();
    assert!((n0 - 1.0).abs() < 1e-12);
}

#[test]
fn dependent_generators_are_rejected() {
    let b = basis(&[&[1.0, 2.0], &[2.0, 4.0]]);
    assert_eq!(lll_reduce(&b, 0.99).unwrap_err(), Error::DependentGenerators);
    assert_eq!(cvp_closest(&b, &[0.0, 0.0]).unwrap_err(), Error::DependentGenerators);
    assert!(lll_reduce(&basis(&[&[1.0]]), 0.2).is_err());
}

#[test]
fn cvp_ties_go_to_lexicographically_smallest() {
    let b = basis(&[&[1.0, 0.0], &[0.0, 1.0]]);
    let r = cvp_closest(&b, &[0.5, 0.5]).unwrap();
    assert_eq!(r.coefficients, vec![0, 0]);
    assert!((r.distance_sq - 0.5).abs() < 1e-12);
    let bf = cvp_bruteforce(&b, &[0.5, 0.5], 3).unwrap();
    assert_eq!(bf.coefficients, vec![0, 0]);
}

#[test]
fn cvp_beats_rounding_on_skewed_basis() {
    // Rounding the real coefficients is poor for nearly parallel generators.
    let b = basis(&[&[1.0, 0.0], &[0.99, 0.1]]);
    let target = [0.3, 0.76];
    let exact = cvp_closest(&b, &target).unwrap();
    let round = babai_round(&b, &target).unwrap();
    let brute = cvp_bruteforce(&b, &target, 12).unwrap();
    assert_eq!(exact.coefficients, brute.coefficients);
    assert!(exact.distance_sq < round.distance_sq);
}

#[test]
fn cvp_projects_out_of_span_targets() {
    // Target off the span: only the in-span part matters.
    let b = basis(&[&[2.0, 0.0, 0.0]]);
    let r = cvp_closest(&b, &[4.9, 1.0, -1.0]).unwrap();
    assert_eq!(r.coefficients, vec![2]);
    assert!((r.distance_sq - (0.81 + 2.0)).abs() < 1e-9);
}

#[test]
fn bruteforce_budget_is_enforced() {
    let b = LatticeBasis::new(vec![vec![1.0, 0.0, 0.0, 0.0, 0.0]; 5]).unwrap();
    match cvp_bruteforce(&b, &[0.0; 5], 40) {
        Err(Error::BudgetExceeded { needed, .. }) => assert!(needed > BRUTEFORCE_BUDGET),
        other => panic!("{other:?}"),
    }
}

#[test]
fn nearest_integer_rounds_half_to_even() {
    let ctx = NumericContext::exact();
    let (x, d) = nearest_with_distance(&Scalar::ratio(5, 2), &ctx).unwrap();
    assert_eq!(x, BigInt::from(2));
    assert_eq!(d, Scalar::ratio(1, 2));
    let (x, d) = nearest_with_distance(&Scalar::ratio(-7, 2), &ctx).unwrap();
    assert_eq!(x, BigInt::from(-4));
    assert_eq!(d, Scalar::ratio(1, 2));
    let (x, _) = nearest_with_distance(&Scalar::constant("sqrt2").scale(&rat_int(5)), &ctx).unwrap();
    assert_eq!(x, BigInt::from(7));
}

#[test]
fn power_threshold_is_decided_exactly() {
    let ctx = NumericContext::exact();
    // (√2 − 1)² = 3 − 2√2 ≈ 0.17157
    let d = Scalar::constant("sqrt2").sub(&Scalar::one()).unwrap();
    assert!(dist_pow_below(&d, 2, &rat(5, 1), &ctx).unwrap());
    assert!(!dist_pow_below(&d, 2, &rat(6, 1), &ctx).unwrap());
    assert!(dist_pow_below(&Scalar::ratio(1, 2), 3, &rat(7, 1), &ctx).unwrap());
    assert!(!dist_pow_below(&Scalar::ratio(1, 2), 3, &rat(8, 1), &ctx).unwrap());
}

/// Smallest admissible q by a direct binary64 scan.
fn dirichlet_oracle(alphas: &[f64], n: u64) -> u64 {
    let bound = (n as f64).powf(-1.0 / alphas.len() as f64);
    (1..=n)
        .find(|&q| alphas.iter().all(|a| {
            let v = a * q as f64;
            (v - v.round()).abs() < bound
        }))
        .unwrap()
}

#[test]
fn dirichlet_finds_smallest_denominator() {
    let ctx = NumericContext::exact();
    let sqrt2 = Scalar::constant("sqrt2");
    let (q, x) = dirichlet_simultaneous(&[sqrt2.clone()], &BigInt::from(10), &ctx).unwrap();
    assert_eq!(q, BigInt::from(dirichlet_oracle(&[std::f64::consts::SQRT_2], 10)));
    assert_eq!(q, BigInt::from(5));
    assert_eq!(x, vec![BigInt::from(7)]);

    let pi = Scalar::constant("pi");
    let (q, _) = dirichlet_simultaneous(&[sqrt2, pi], &BigInt::from(1000), &ctx).unwrap();
    let oracle = dirichlet_oracle(&[std::f64::consts::SQRT_2, std::f64::consts::PI], 1000);
    assert_eq!(q, BigInt::from(oracle));
}

fn small_basis() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>)> {
    (1usize..=3, 1usize..=3).prop_flat_map(|(m, extra)| {
        let n = m + extra - 1;
        (
            prop::collection::vec(prop::collection::vec(-40i32..=40, n), m),
            prop::collection::vec(-300i32..=300, n),
        )
            .prop_map(|(g, t)| {
                let g = g.into_iter().map(|r| r.into_iter().map(|x| x as f64 / 8.0).collect()).collect();
                let t = t.into_iter().map(|x| x as f64 / 16.0).collect();
                (g, t)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn lll_output_is_reduced_and_equivalent((g, _) in small_basis()) {
        let b = LatticeBasis::new(g).unwrap();
        prop_assume!(b.rank() == b.rank_count());
        let (r, u) = lll_reduce(&b, 0.99).unwrap();
        prop_assert_eq!(lll_violations(&r, 0.99), 0);
        check_transform(&b, &r, &u);
    }

    #[test]
    fn cvp_matches_exhaustive_search((g, t) in small_basis()) {
        let b = LatticeBasis::new(g).unwrap();
        prop_assume!(b.rank() == b.rank_count());
        let exact = cvp_closest(&b, &t).unwrap();
        let brute = cvp_bruteforce(&b, &t, 12).unwrap();
        prop_assert!(exact.distance_sq <= brute.distance_sq + 1e-9 * brute.distance_sq.max(1.0));
        // Inside the box the exhaustive search sees the true optimum.
        if exact.coefficients.iter().all(|c| c.abs() <= 12) {
            prop_assert_eq!(&exact.coefficients, &brute.coefficients);
        }
        let round = babai_round(&b, &t).unwrap();
        prop_assert!(exact.distance_sq <= round.distance_sq + 1e-9 * round.distance_sq.max(1.0));
    }

    #[test]
    fn dirichlet_rational_matches_scan(num in 1i64..200, den in 2i64..50, n in 2u64..300) {
        let ctx = NumericContext::exact();
        let (q, x) = dirichlet_simultaneous(&[Scalar::ratio(num, den)], &BigInt::from(n), &ctx).unwrap();
        // Exact rational scan: |q a − round| · n < 1.
        let a = rat(num, den);
        let expect = (1..=n).find(|&q| {
            let v = &a * rat_int(q as i64);
            let r = crate::scalar::round_half_even_rational(&v);
            let d = (v - BigRational::from_integer(r)).abs();
            d * rat_int(n as i64) < BigRational::one()
        }).unwrap();
        prop_assert_eq!(q.clone(), BigInt::from(expect));
        prop_assert_eq!(x[0].clone(), crate::scalar::round_half_even_rational(&(a * BigRational::from_integer(q))));
    }
}
