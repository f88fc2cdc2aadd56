use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::Rng;

use super::*;
use crate::arbitrage::DEFAULT_RADIUS;
use crate::market::{claim_from_json, value_process, verify_arbitrage, StrategyClass};
use crate::scalar::rat;

const SQRT2: &str = include_str!("../../../../models/sqrt2.json");
const EMPTY_PI: &str = include_str!("../../../../models/empty_pi.json");
const DENSE: &str = include_str!("../../../../models/dense.json");

fn model(text: &str) -> MarketModel {
    MarketModel::from_json_str(text).unwrap()
}

fn claim(m: &MarketModel, text: &str) -> Claim {
    claim_from_json(text, m.n()).unwrap()
}

fn sqrt2() -> Scalar {
    Scalar::constant("sqrt2")
}

fn eq(ctx: &NumericContext, a: &Scalar, b: &Scalar) -> bool {
    ctx.cmp(a, b).unwrap() == Sign::Zero
}

fn claim_of(xs: Vec<Scalar>) -> Claim {
    Claim { payoff: xs }
}

#[test]
fn classical_bounds_of_irrational_claims() {
    let m = model(SQRT2);
    let ctx = m.context().unwrap();
    let c = claim(&m, include_str!("../../../../claims/ci.json"));
    let iv = classical_price_bounds(&m, &c).unwrap();
    assert!(eq(&ctx, &iv.lo, &sqrt2()));
    assert!(eq(&ctx, &iv.hi, &sqrt2().scale(&rat(3, 1))));
    assert_eq!((iv.lo_open, iv.hi_open), (Openness::Open, Openness::Open));
    assert!(!iv.approx && !iv.replicable);

    let c = claim(&m, include_str!("../../../../claims/civ.json"));
    let iv = classical_price_bounds(&m, &c).unwrap();
    assert_eq!((iv.lo.clone(), iv.hi.clone()), (Scalar::zero(), Scalar::one()));
}

#[test]
fn replicable_claim_is_a_closed_singleton() {
    let m = model(SQRT2);
    // C = S_1 is replicated by holding one share.
    let c = claim_of(vec![Scalar::int(1), Scalar::int(3), Scalar::int(3)]);
    let iv = classical_price_bounds(&m, &c).unwrap();
    assert!(iv.replicable);
    assert_eq!(iv.lo, Scalar::int(2));
    assert_eq!(iv.lo_open, Openness::Closed);
}

#[test]
fn classical_bounds_need_no_arbitrage() {
    let m = model(EMPTY_PI);
    let c = claim(&m, include_str!("../../../../claims/empty_pi.json"));
    assert!(matches!(classical_price_bounds(&m, &c), Err(Error::ModelHasArbitrage)));
}

#[test]
fn membership_of_irrational_claims() {
    let m = model(SQRT2);
    let r = DEFAULT_RADIUS;
    let v = |text: &str, p: Scalar| price_membership_t1(&m, &claim(&m, text), &p, r).unwrap();

    let ci = include_str!("../../../../claims/ci.json");
    assert_eq!(v(ci, sqrt2()).verdict, MemberVerdict::Member);
    assert_eq!(v(ci, Scalar::int(2)).verdict, MemberVerdict::Member);

    let cii = include_str!("../../../../claims/cii.json");
    let out = v(cii, sqrt2().scale(&rat(2, 1)));
    assert_eq!(out.verdict, MemberVerdict::NotMember);
    let w = out.witness.unwrap();
    let ext = extended_one_period(&m, &claim(&m, cii), &sqrt2().scale(&rat(2, 1)));
    let ctx = ext.context().unwrap();
    assert!(verify_arbitrage(&ext, &w, &ctx).unwrap().is_arbitrage);
    assert_eq!(w.positions[0][0], vec![Scalar::zero(), Scalar::int(-1)]);

    let ciii = include_str!("../../../../claims/ciii.json");
    assert_eq!(v(ciii, sqrt2()).verdict, MemberVerdict::Member);
    assert_eq!(v(ciii, Scalar::zero()).verdict, MemberVerdict::NotMember);

    let civ = include_str!("../../../../claims/civ.json");
    assert_eq!(v(civ, Scalar::zero()).verdict, MemberVerdict::NotMember);
    assert_eq!(v(civ, Scalar::one()).verdict, MemberVerdict::NotMember);
    assert_eq!(v(civ, Scalar::ratio(1, 2)).verdict, MemberVerdict::Member);
}

#[test]
fn integer_envelope_resolves_one_period_endpoints() {
    let m = model(SQRT2);
    let ctx = m.context().unwrap();
    let ci = claim(&m, include_str!("../../../../claims/ci.json"));
    let iv = nia_price_interval(&m, &ci, DEFAULT_RADIUS).unwrap();
    assert_eq!(iv.lo_open, Openness::Closed);
    assert!(eq(&ctx, &iv.lo, &sqrt2()));
    let civ = claim(&m, include_str!("../../../../claims/civ.json"));
    let iv = nia_price_interval(&m, &civ, DEFAULT_RADIUS).unwrap();
    assert_eq!((iv.lo_open, iv.hi_open), (Openness::Open, Openness::Open));
    assert!(!iv.empty);
}

#[test]
fn empty_integer_price_set() {
    let m = model(EMPTY_PI);
    let c = claim(&m, include_str!("../../../../claims/empty_pi.json"));
    let iv = nia_price_interval(&m, &c, DEFAULT_RADIUS).unwrap();
    assert_eq!((iv.lo.clone(), iv.hi.clone()), (Scalar::zero(), Scalar::zero()));
    assert!(iv.replicable && iv.empty);
    let out = price_membership_t1(&m, &c, &Scalar::zero(), DEFAULT_RADIUS).unwrap();
    assert_eq!(out.verdict, MemberVerdict::NotMember);
    let w = out.witness.unwrap();
    assert_eq!(w.positions[0][0], vec![Scalar::zero(), Scalar::zero(), Scalar::one()]);
}

#[test]
fn membership_needs_one_period() {
    let m = model(DENSE);
    let c = claim(&m, include_str!("../../../../claims/dense.json"));
    assert!(matches!(price_membership_t1(&m, &c, &Scalar::zero(), 5), Err(Error::NotOnePeriod)));
}

fn dense_process(alpha: Scalar) -> Vec<Vec<Scalar>> {
    vec![
        vec![alpha.scale(&rat(1, 2)); 4],
        vec![Scalar::zero(), alpha.clone(), alpha, Scalar::zero()],
        vec![Scalar::zero(), Scalar::one(), Scalar::zero(), Scalar::zero()],
    ]
}

#[test]
fn dense_extension_at_rational_price_fails() {
    let m = model(DENSE);
    let c = claim(&m, include_str!("../../../../claims/dense.json"));
    let x = dense_process(Scalar::ratio(1, 2));
    let r = extension_nia_check(&m, &c, &x, DEFAULT_RADIUS).unwrap();
    assert_eq!(r.verdict, Verdict::Fails);

    // Short half a share of S¹ and one unit of X at time 1: 1/4 on ω₄.
    let ext = m.with_asset(Asset { name: "X".into(), prices: x });
    let ctx = ext.context().unwrap();
    let phi = vec![Scalar::ratio(-1, 2), Scalar::zero(), Scalar::int(-1)];
    let s = Strategy::one_period(&ext, StrategyClass::Rational, 0, 0, &phi, Scalar::zero()).unwrap();
    let v = value_process(&ext, &s).unwrap();
    assert_eq!(v.values[2], vec![Scalar::zero(), Scalar::zero(), Scalar::zero(), Scalar::ratio(1, 4)]);
    let doubled: Vec<Scalar> = phi.iter().map(|p| p.scale(&rat(2, 1))).collect();
    let s2 = Strategy::one_period(&ext, StrategyClass::Integer, 0, 0, &doubled, Scalar::zero()).unwrap();
    assert!(verify_arbitrage(&ext, &s2, &ctx).unwrap().is_arbitrage);
}

#[test]
fn dense_extension_at_irrational_price_has_no_witness() {
    let m = model(DENSE);
    let c = claim(&m, include_str!("../../../../claims/dense.json"));
    let x = dense_process(sqrt2().scale(&rat(1, 2)));
    let r = extension_nia_check(&m, &c, &x, DEFAULT_RADIUS).unwrap();
    assert_eq!(r.verdict, Verdict::NoWitnessWithinBudget);
    assert_eq!(r.dependency_trivial, Some(true));
}

#[test]
fn extension_inputs_are_validated() {
    let m = model(DENSE);
    let c = claim(&m, include_str!("../../../../claims/dense.json"));
    let mut x = dense_process(Scalar::ratio(1, 2));
    x[1][1] = Scalar::one();
    assert!(matches!(extension_nia_check(&m, &c, &x, 5), Err(Error::NotAdapted(_))));
    let mut x = dense_process(Scalar::ratio(1, 2));
    x[2][0] = Scalar::one();
    assert!(matches!(extension_nia_check(&m, &c, &x, 5), Err(Error::TerminalMismatch)));
    let x = dense_process(Scalar::ratio(1, 2));
    assert!(matches!(extension_nia_check(&m, &c, &x[..2], 5), Err(Error::DimensionMismatch(_))));
}

/// Extremes of `E_Q[c]` over one-asset, one-period martingale measures by
/// vertex enumeration: vertices sit on one zero-gain state or on a pair of
/// states with gains of opposite sign.
fn vertex_extremes(g: &[BigRational], c: &[BigRational]) -> Option<(BigRational, BigRational)> {
    let mut vals = Vec::new();
    for i in 0..g.len() {
        if g[i].is_zero() {
            vals.push(c[i].clone());
        }
        for j in 0..g.len() {
            if g[i].is_positive() && g[j].is_negative() {
                let qi = -&g[j] / (&g[i] - &g[j]);
                let qj = &g[i] / (&g[i] - &g[j]);
                vals.push(&qi * &c[i] + &qj * &c[j]);
            }
        }
    }
    let lo = vals.iter().min()?.clone();
    let hi = vals.iter().max()?.clone();
    Some((lo, hi))
}

#[test]
fn envelope_matches_vertex_enumeration() {
    let mut rng = crate::testkit::rng(41);
    let mut checked = 0;
    for _ in 0..150 {
        let n = rng.gen_range(2..=5);
        let s0 = rng.gen_range(1..=6i64);
        let s1: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=12)).collect();
        let c: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=9)).collect();
        let m = MarketModel::one_period(
            vec![Scalar::int(s0)],
            s1.iter().map(|&x| vec![Scalar::int(x)]).collect(),
        );
        let g: Vec<BigRational> = s1.iter().map(|&x| rat(x - s0, 1)).collect();
        let cr: Vec<BigRational> = c.iter().map(|&x| rat(x, 1)).collect();
        let claim = claim_of(c.iter().map(|&x| Scalar::int(x)).collect());
        let na = g.iter().all(|x| x.is_zero())
            || (g.iter().any(|x| x.is_positive()) && g.iter().any(|x| x.is_negative()));
        match vertex_extremes(&g, &cr).filter(|_| na) {
            None => assert!(matches!(classical_price_bounds(&m, &claim), Err(Error::ModelHasArbitrage))),
            Some((lo, hi)) => {
                let iv = classical_price_bounds(&m, &claim).unwrap();
                assert_eq!(iv.lo, Scalar::Rational(lo.clone()));
                assert_eq!(iv.hi, Scalar::Rational(hi.clone()));
                assert_eq!(iv.replicable, lo == hi);
                checked += 1;
            }
        }
    }
    assert!(checked > 40);
}

#[test]
fn bounds_are_monotone_and_classical_lies_in_envelope() {
    let mut rng = crate::testkit::rng(7);
    let mut seen = 0;
    for _ in 0..300 {
        let m = crate::testkit::rational_model(&mut rng, 4, 2, 2);
        let ctx = m.context().unwrap();
        let c: Vec<Scalar> = (0..m.n()).map(|_| Scalar::int(rng.gen_range(0..=5))).collect();
        let bump: Vec<Scalar> =
            c.iter().map(|x| x.add(&Scalar::int(rng.gen_range(0..=2))).unwrap()).collect();
        let Ok(a) = classical_price_bounds(&m, &claim_of(c.clone())) else { continue };
        let b = classical_price_bounds(&m, &claim_of(bump)).unwrap();
        assert_ne!(ctx.cmp(&a.lo, &b.lo).unwrap(), Sign::Positive);
        assert_ne!(ctx.cmp(&a.hi, &b.hi).unwrap(), Sign::Positive);
        assert_ne!(ctx.cmp(&a.lo, &a.hi).unwrap(), Sign::Positive);
        let z = nia_price_interval(&m, &claim_of(c), DEFAULT_RADIUS).unwrap();
        assert_eq!((z.lo, z.hi), (a.lo, a.hi));
        seen += 1;
    }
    assert!(seen > 10, "only {seen} models without arbitrage");
}

#[test]
fn interior_prices_are_members_of_the_extended_market() {
    // Rational prices strictly inside (√2, 3√2) for claim (i).
    let m = model(SQRT2);
    let c = claim(&m, include_str!("../../../../claims/ci.json"));
    for (a, b) in [(3, 2), (2, 1), (5, 2), (3, 1), (4, 1), (21, 5)] {
        let p = Scalar::ratio(a, b);
        let out = price_membership_t1(&m, &c, &p, DEFAULT_RADIUS).unwrap();
        assert_eq!(out.verdict, MemberVerdict::Member);
        let ext = extended_one_period(&m, &c, &p);
        assert_ne!(nia_check(&ext, DEFAULT_RADIUS).unwrap().verdict, Verdict::Fails);
    }
}
