use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::*;
use crate::linprog::{lp_solve, LpStatus};
use crate::market::{value_process, Asset, MarketModel};
use crate::scalar::rat;
use crate::testkit;

const SQRT2: &str = include_str!("../../../../models/sqrt2.json");
const EMPTY_PI: &str = include_str!("../../../../models/empty_pi.json");
const DENSE: &str = include_str!("../../../../models/dense.json");
const COROLLARY: &str = include_str!("../../../../models/corollary.json");

fn model(text: &str) -> MarketModel {
    MarketModel::from_json_str(text).unwrap()
}

fn pi() -> Scalar {
    Scalar::constant("pi")
}

fn ratios(xs: &[(i64, i64)]) -> Vec<Scalar> {
    xs.iter().map(|&(a, b)| Scalar::ratio(a, b)).collect()
}

fn one_period(s0: &[i64], s1: &[&[i64]]) -> MarketModel {
    MarketModel::one_period(
        s0.iter().map(|&x| Scalar::int(x)).collect(),
        s1.iter().map(|r| r.iter().map(|&x| Scalar::int(x)).collect()).collect(),
    )
}

fn terminal(m: &MarketModel, s: &Strategy) -> Vec<Scalar> {
    value_process(m, s).unwrap().values[m.periods].clone()
}

#[test]
fn three_state_model_has_no_arbitrage() {
    let m = model(SQRT2);
    let na = na_check(&m).unwrap();
    assert_eq!(na.verdict, Verdict::Holds);
    assert!(na.profile.a_set.is_empty());
    assert!(na.witness.is_none());
    let q = na.profile.witness_measure.unwrap();
    check_martingale_measure(&m, &q).unwrap();
    assert!(q.iter().all(|x| x.as_rational().unwrap().is_positive()));
    assert!(qmax_membership(&m, &q).unwrap());
    // One asset: NIA and NIFL follow NA.
    assert_eq!(nia_check(&m, DEFAULT_RADIUS).unwrap().verdict, Verdict::Holds);
    assert_eq!(nifl_check(&m).unwrap().verdict, Verdict::Holds);
}

#[test]
fn single_state_model_is_trivially_free_of_arbitrage() {
    let m = one_period(&[3], &[&[3]]);
    assert_eq!(na_check(&m).unwrap().verdict, Verdict::Holds);
    assert_eq!(nia_check(&m, 5).unwrap().verdict, Verdict::Holds);
}

#[test]
fn empty_price_set_example_support_and_witness() {
    let m = model(EMPTY_PI);
    let ctx = m.context().unwrap();
    let na = na_check(&m).unwrap();
    assert_eq!(na.verdict, Verdict::Fails);
    assert_eq!(na.profile.a_set, vec![2]);
    assert!(!na.profile.approx);
    assert_eq!(na.profile.witness_measure, Some(ratios(&[(1, 3), (2, 3), (0, 1)])));

    // Witness proportional to (−1, π): φ² = −π φ¹ with φ¹ < 0.
    let w = na.witness.unwrap();
    let phi = &w.positions[0][0];
    assert!(ctx.is_negative(&phi[0]).unwrap());
    assert!(ctx.is_zero(&phi[1].add(&pi().mul(&phi[0]).unwrap()).unwrap()).unwrap());
    let v = terminal(&m, &w);
    assert!(ctx.is_zero(&v[0]).unwrap() && ctx.is_zero(&v[1]).unwrap());
    assert!(ctx.is_positive(&v[2]).unwrap());

    // Integer trading cannot exploit it.
    let nia = nia_check(&m, DEFAULT_RADIUS).unwrap();
    assert_eq!(nia.verdict, Verdict::Holds);
    assert_eq!(nia.nodes_searched, 0);
    assert_eq!(nifl_check(&m).unwrap().verdict, Verdict::Fails);

    assert!(qmax_membership(&m, &ratios(&[(1, 3), (2, 3), (0, 1)])).unwrap());
    assert!(!qmax_membership(&m, &ratios(&[(1, 3), (1, 3), (1, 3)])).unwrap());
}

#[test]
fn indicator_asset_creates_integer_arbitrage() {
    let base = model(EMPTY_PI);
    let m = base.with_asset(Asset { name: "X".into(), prices: vec![vec![Scalar::zero(); 3], ratios(&[(0, 1), (0, 1), (1, 1)])] });
    let r = nia_check(&m, DEFAULT_RADIUS).unwrap();
    assert_eq!(r.verdict, Verdict::Fails);
    let w = r.witness.unwrap();
    assert_eq!(w.positions[0][0], ratios(&[(0, 1), (0, 1), (1, 1)]));
    assert!(verify_arbitrage(&m, &w, &m.context().unwrap()).unwrap().is_arbitrage);
}

#[test]
fn sure_gain_fails_with_unit_witness() {
    let m = one_period(&[1], &[&[2], &[2]]);
    let na = na_check(&m).unwrap();
    assert_eq!(na.verdict, Verdict::Fails);
    assert_eq!(na.profile.a_set, vec![0, 1]);
    assert!(na.profile.witness_measure.is_none());
    let nia = nia_check(&m, DEFAULT_RADIUS).unwrap();
    assert_eq!(nia.verdict, Verdict::Fails);
    assert_eq!(nia.witness.unwrap().positions[0][0], vec![Scalar::one()]);

    let real = Strategy::constant(&m, StrategyClass::Real, &[Scalar::ratio(7, 10)], Scalar::zero()).unwrap();
    let int = rationalize_arbitrage(&m, &real).unwrap();
    assert_eq!(int.positions[0][0], vec![Scalar::one()]);
}

#[test]
fn one_asset_witness_is_normalised_to_a_sign() {
    let m = one_period(&[2], &[&[1], &[1], &[2]]);
    let real = Strategy::constant(&m, StrategyClass::Rational, &[Scalar::ratio(-2, 3)], Scalar::zero()).unwrap();
    let int = rationalize_arbitrage(&m, &real).unwrap();
    assert_eq!(int.positions[0][0], vec![Scalar::int(-1)]);
    assert!(rationalize_arbitrage(&model(SQRT2), &real).is_err());
}

#[test]
fn rationalised_witness_shares_strict_states() {
    // Two assets; the second dominates a multiple of the first in state 3.
    let m = one_period(&[2, 3], &[&[1, 2], &[3, 4], &[3, 5]]);
    let na = na_check(&m).unwrap();
    assert_eq!(na.verdict, Verdict::Fails);
    let w = na.witness.unwrap();
    let int = rationalize_arbitrage(&m, &w).unwrap();
    let ctx = m.context().unwrap();
    let a = terminal(&m, &w);
    let b = terminal(&m, &int);
    for (x, y) in a.iter().zip(&b) {
        if ctx.is_positive(x).unwrap() {
            assert!(ctx.is_positive(y).unwrap());
        }
    }
    assert!(int.positions[0][0].iter().all(Scalar::is_integer));
}

#[test]
fn corollary_example_zero_gain_space() {
    let m = model(COROLLARY);
    let ctx = m.context().unwrap();
    let z = zero_gain_space(&m, &ratios(&[(1, 2), (1, 2)]), DEFAULT_RADIUS).unwrap();
    assert_eq!(z.basis.len(), 1);
    assert!(!z.approx);
    let phi = &z.basis[0].positions[0][0];
    // Direction (−π, 1), zero bank leg.
    assert!(ctx.is_zero(&phi[0].add(&pi().mul(&phi[1]).unwrap()).unwrap()).unwrap());
    assert!(!phi[1].is_exact_zero());
    let bank = crate::scalar::dot(phi, &[Scalar::one(), pi()]).unwrap();
    assert!(ctx.is_zero(&bank).unwrap());
    assert_eq!(z.status, LatticeStatus::OnlyTrivialInteger);
}

#[test]
fn full_support_measure_has_trivial_zero_gain_space() {
    let m = model(SQRT2);
    let z = zero_gain_space(&m, &ratios(&[(1, 2), (1, 4), (1, 4)]), 5).unwrap();
    assert!(z.basis.is_empty());
    assert_eq!(z.status, LatticeStatus::OnlyTrivialInteger);
    assert!(matches!(
        zero_gain_space(&m, &ratios(&[(1, 3), (1, 3), (1, 3)]), 5),
        Err(Error::NotMartingaleMeasure(_))
    ));
}

#[test]
fn dense_example_support_and_integer_triviality() {
    let m = model(DENSE);
    let na = na_check(&m).unwrap();
    assert_eq!(na.verdict, Verdict::Fails);
    assert_eq!(na.profile.a_set, vec![3]);
    assert!(!na.profile.approx);
    let q_half = ratios(&[(1, 2), (1, 4), (1, 4), (0, 1)]);
    assert!(qmax_membership(&m, &q_half).unwrap());
    let z = zero_gain_space(&m, &q_half, DEFAULT_RADIUS).unwrap();
    assert_eq!(z.status, LatticeStatus::OnlyTrivialInteger);
    // Q_0 puts no mass on ω₂ and is still a martingale measure, outside 𝔔^max.
    let q0 = ratios(&[(1, 2), (0, 1), (1, 2), (0, 1)]);
    check_martingale_measure(&m, &q0).unwrap();
    assert!(!qmax_membership(&m, &q0).unwrap());
    assert_eq!(nia_check(&m, DEFAULT_RADIUS).unwrap().verdict, Verdict::Holds);
}

#[test]
fn zero_gain_space_finds_rational_directions() {
    // Rational data with a martingale measure missing state 3.
    let m = one_period(&[2, 3], &[&[1, 2], &[3, 4], &[3, 5]]);
    let z = zero_gain_space(&m, &ratios(&[(1, 2), (1, 2), (0, 1)]), 5).unwrap();
    match z.status {
        LatticeStatus::NontrivialIntegerFound(s) => {
            let v = terminal(&m, &s);
            assert!(v[0].is_exact_zero() && v[1].is_exact_zero());
            assert!(!v[2].is_exact_zero());
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn float_data_uses_tolerance() {
    let m = MarketModel::one_period(vec![Scalar::Float(2.0)], vec![
        vec![Scalar::Float(1.0)],
        vec![Scalar::Float(3.0)],
        vec![Scalar::Float(3.0)],
    ]);
    assert_eq!(na_check(&m).unwrap().verdict, Verdict::Holds);
    let bad = MarketModel::one_period(vec![Scalar::Float(2.0)], vec![vec![Scalar::Float(2.5)], vec![Scalar::Float(3.0)]]);
    let na = na_check(&bad).unwrap();
    assert_eq!(na.verdict, Verdict::Fails);
    assert!(na.witness.is_some());
    assert_eq!(nia_check(&bad, 5).unwrap().verdict, Verdict::Fails);
}

/// Dense example extended by the claim price process `X_0 = α/2`,
/// `X_1 = α 1_{ω₂, ω₃}`, `X_2 = 1_{ω₂}`.
fn dense_extended(alpha: Scalar) -> MarketModel {
    let half = alpha.scale(&rat(1, 2));
    let prices = vec![
        vec![half; 4],
        vec![Scalar::zero(), alpha.clone(), alpha, Scalar::zero()],
        vec![Scalar::zero(), Scalar::one(), Scalar::zero(), Scalar::zero()],
    ];
    model(DENSE).with_asset(Asset { name: "X".into(), prices })
}

#[test]
fn dense_extension_rational_price_has_integer_arbitrage() {
    let m = dense_extended(Scalar::ratio(1, 2));
    let r = nia_check(&m, DEFAULT_RADIUS).unwrap();
    assert_eq!(r.verdict, Verdict::Fails);
    assert!(verify_arbitrage(&m, r.witness.as_ref().unwrap(), &m.context().unwrap()).unwrap().is_arbitrage);
}

#[test]
fn dense_extension_irrational_price_has_no_witness() {
    let alpha = Scalar::constant("sqrt2").scale(&rat(1, 2));
    let m = dense_extended(alpha);
    let r = nia_check(&m, DEFAULT_RADIUS).unwrap();
    assert_eq!(r.verdict, Verdict::NoWitnessWithinBudget);
    assert_eq!(r.dependency_trivial, Some(true));
    assert_eq!(r.radius, Some(DEFAULT_RADIUS));
    assert!(matches!(nia_check(&m, 10_000), Err(Error::BudgetExceeded { .. })));
}

#[test]
fn box_search_prefers_small_norm_then_lex() {
    let hit = support::box_search(2, 3, |_| true, |x| Ok(x[0] + x[1] >= 2)).unwrap();
    assert_eq!(hit, Some(vec![1, 1]));
    let none = support::box_search(2, 2, |_| true, |_| Ok(false)).unwrap();
    assert_eq!(none, None);
}

/// Brute-force one-period integer arbitrage over `[-r, r]^d` at every node,
/// on gains scaled to integers.
fn brute_integer_arbitrage(m: &MarketModel, r: i64) -> bool {
    let tree = m.tree().unwrap();
    let gains = discounted_gains(m).unwrap();
    for t in 0..m.periods {
        for b in 0..m.filtration[t].len() {
            let g: Vec<Vec<BigRational>> = node_gains(&gains, m, &tree, t, b)
                .into_iter()
                .map(|(_, v)| v.iter().map(|x| x.as_rational().unwrap().clone()).collect())
                .collect();
            let mut l = BigInt::one();
            for x in g.iter().flatten() {
                l = l.lcm(x.denom());
            }
            let gi: Vec<Vec<i128>> = g
                .iter()
                .map(|c| c.iter().map(|x| (x * BigRational::from_integer(l.clone())).to_integer().to_i128().unwrap()).collect())
                .collect();
            let d = m.d();
            let mut phi = vec![-r; d];
            loop {
                let vals: Vec<i128> =
                    gi.iter().map(|c| c.iter().zip(&phi).map(|(a, p)| a * *p as i128).sum()).collect();
                if vals.iter().all(|&v| v >= 0) && vals.iter().any(|&v| v > 0) {
                    return true;
                }
                let mut k = 0;
                while k < d && phi[k] == r {
                    phi[k] = -r;
                    k += 1;
                }
                if k == d {
                    break;
                }
                phi[k] += 1;
            }
        }
    }
    false
}

#[test]
fn rational_models_integer_verdict_matches_classical() {
    let mut rng = testkit::rng(7);
    for _ in 0..100 {
        let m = testkit::rational_model(&mut rng, 5, 3, 2);
        let ctx = m.context().unwrap();
        let na = na_check(&m).unwrap();
        let nia = nia_check(&m, 10).unwrap();
        assert_eq!(na.verdict, nia.verdict, "{m:?}");
        let brute = brute_integer_arbitrage(&m, 10);
        if na.verdict == Verdict::Holds {
            assert!(!brute);
        } else {
            let w = nia.witness.as_ref().unwrap();
            assert!(w.positions.iter().flatten().flatten().all(Scalar::is_integer));
            assert!(verify_arbitrage(&m, w, &ctx).unwrap().is_arbitrage);
            assert!(verify_arbitrage(&m, na.witness.as_ref().unwrap(), &ctx).unwrap().is_arbitrage);
        }
    }
}

#[test]
fn support_profile_is_consistent_on_random_models() {
    let mut rng = testkit::rng(11);
    for _ in 0..60 {
        let m = testkit::rational_model(&mut rng, 5, 3, 2);
        let ctx = m.context().unwrap();
        let na = na_check(&m).unwrap();
        let a = &na.profile.a_set;
        if let Some(w) = &na.witness {
            // {V_T > 0} = A (or all of Ω when no measure exists).
            let v = terminal(&m, w);
            for (s, x) in v.iter().enumerate() {
                let pos = ctx.is_positive(x).unwrap();
                if na.profile.witness_measure.is_some() {
                    assert_eq!(pos, a.contains(&s));
                }
                assert!(!ctx.is_negative(x).unwrap());
            }
        }
        if let Some(q) = &na.profile.witness_measure {
            check_martingale_measure(&m, q).unwrap();
            for (s, x) in q.iter().enumerate() {
                assert_eq!(x.as_rational().unwrap().is_positive(), !a.contains(&s));
            }
            assert!(qmax_membership(&m, q).unwrap());
            // Vertices of the martingale polytope in random directions vanish on A.
            let tree = m.tree().unwrap();
            let gains = discounted_gains(&m).unwrap();
            let layout = Layout::new(&m);
            let rows = terminal_rows(&m, &tree, &gains, &layout);
            let (cons, _) = martingale_rows(&rows, layout.nvars);
            let mut lp = support::measure_lp(&cons, m.n(), 0);
            lp.objective = (0..m.n()).map(|k| Scalar::int((k as i64 * 7 + 3) % 5 - 2)).collect();
            let res = lp_solve(&lp, &ctx).unwrap();
            assert_eq!(res.status, LpStatus::Optimal);
            for &s in a {
                assert!(res.x[s].is_exact_zero());
            }
        } else {
            assert_eq!(a.len(), m.n());
        }
    }
}

#[test]
fn one_asset_integer_verdict_matches_classical() {
    let mut rng = testkit::rng(3);
    for _ in 0..40 {
        let m = testkit::rational_model(&mut rng, 4, 1, 2);
        assert_eq!(na_check(&m).unwrap().verdict, nia_check(&m, 3).unwrap().verdict);
    }
    // Irrational one-asset model: S₀ = √2, S₁ ∈ {1, 2}.
    let s2 = Scalar::constant("sqrt2");
    let m = MarketModel::one_period(vec![s2.clone()], vec![vec![Scalar::one()], vec![Scalar::int(2)]]);
    assert_eq!(nia_check(&m, 3).unwrap().verdict, Verdict::Holds);
    let m = MarketModel::one_period(vec![s2], vec![vec![Scalar::int(2)], vec![Scalar::int(3)]]);
    let r = nia_check(&m, 3).unwrap();
    assert_eq!(r.verdict, Verdict::Fails);
    assert_eq!(r.witness.unwrap().positions[0][0], vec![Scalar::one()]);
}

#[test]
fn integer_multiple_clears_denominators() {
    let v = support::integer_multiple(&[rat(1, 2), rat(-1, 3), BigRational::zero()]);
    assert_eq!(v, vec![BigInt::from(3), BigInt::from(-2), BigInt::zero()]);
}

#[test]
fn binary64_rounding_noise_is_not_an_integer_arbitrage() {
    let m = model(
        r#"{"states": ["w1", "w2", "w3", "w4", "w5"], "rate": 0.0, "periods": 1,
        "assets": [
          {"name": "S1", "prices": [[3.0, 3.0, 3.0, 3.0, 3.0], [3.5, 3.0, 11.0, 0.0, 1.0]]},
          {"name": "S2", "prices": [[1.6666666666666667, 1.6666666666666667, 1.6666666666666667, 1.6666666666666667, 1.6666666666666667],
                                    [1.0, 5.0, 1.0, 0.0, 0.3333333333333333]]}]}"#,
    );
    assert_eq!(na_check(&m).unwrap().verdict, Verdict::Holds);
    assert_eq!(nia_check(&m, DEFAULT_RADIUS).unwrap().verdict, Verdict::Holds);
    // At the upper envelope price the extended market is arbitrage-free up
    // to rounding; the exact binary64 data admit a tiny integer gain.
    let c = crate::market::Claim::new(ratios(&[(9, 2), (0, 1), (4, 1), (5, 2), (7, 1)]));
    let iv = crate::pricing::nia_price_interval(&m, &c, DEFAULT_RADIUS).unwrap();
    let hi = m.context().unwrap().to_f64(&iv.hi).unwrap();
    assert!((hi - 80.0 / 17.0).abs() < 1e-9, "{hi}");
}
