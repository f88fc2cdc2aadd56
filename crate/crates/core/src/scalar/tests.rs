use super::*;
use proptest::prelude::*;

fn pi() -> Scalar {
    Scalar::constant("pi")
}

fn sqrt2() -> Scalar {
    Scalar::constant("sqrt2")
}

/// `arctan(1/x)·10^digits` by the alternating series, in fixed-point integers.
fn arctan_inv(x: u32, digits: u32) -> BigInt {
    let unity = BigInt::from(10).pow(digits + 10);
    let x2 = BigInt::from(x * x);
    let mut power = &unity / BigInt::from(x);
    let mut total = power.clone();
    let mut k = 1u32;
    loop {
        power = &power / &x2;
        let term = &power / BigInt::from(2 * k + 1);
        if term.is_zero() {
            break;
        }
        if k % 2 == 1 {
            total -= term;
        } else {
            total += term;
        }
        k += 1;
    }
    total
}

#[test]
fn shipped_pi_matches_machin_formula() {
    let digits = 1010u32;
    let pi_scaled = (arctan_inv(5, digits) * BigInt::from(16) - arctan_inv(239, digits) * BigInt::from(4))
        / BigInt::from(10).pow(10);
    let shipped = constants::PI.replace('.', "");
    let oracle = pi_scaled.to_string();
    // The last few digits of the series result carry truncation error.
    assert_eq!(&shipped[..1005], &oracle[..1005]);
}

#[test]
fn shipped_sqrt2_matches_integer_square_root() {
    let digits = 1010u32;
    let n = BigInt::from(2) * BigInt::from(10).pow(2 * digits);
    let root = n.sqrt();
    assert_eq!(constants::SQRT2.replace('.', ""), root.to_string());
}

#[test]
fn add_scale_examples() {
    let two_pi = pi().scale(&rat_int(2));
    let r = scalar_add_scale(&two_pi, &rat_int(-2), &pi()).unwrap();
    assert_eq!(r, Scalar::zero());

    let r = scalar_add_scale(&Scalar::ratio(1, 2), &rat(1, 3), &Scalar::ratio(1, 4)).unwrap();
    assert_eq!(r, Scalar::ratio(7, 12));

    let r = scalar_add_scale(&pi(), &rat_int(1), &Scalar::one()).unwrap();
    let mut terms = BTreeMap::new();
    terms.insert("pi".to_string(), rat_int(1));
    assert_eq!(r, Scalar::linear(rat_int(1), terms));
    let ctx = NumericContext::exact();
    assert_eq!(ctx.to_decimal(&r, 6).unwrap(), "4.14159");
}

#[test]
fn float_and_symbolic_do_not_mix() {
    assert_eq!(Scalar::Float(1.0).add(&pi()), Err(ScalarError::MixedMode));
    assert_eq!(pi().mul(&Scalar::Float(2.0)), Err(ScalarError::MixedMode));
    assert_eq!(pi().mul(&sqrt2()), Err(ScalarError::Nonlinear));
    assert_eq!(Scalar::one().div(&pi()), Err(ScalarError::Nonlinear));
    // Rationals promote into float arithmetic.
    assert_eq!(Scalar::Float(0.5).add(&Scalar::ratio(1, 4)).unwrap(), Scalar::Float(0.75));
}

#[test]
fn sign_examples() {
    let ctx = NumericContext::exact();
    let a = Scalar::int(7).sub(&sqrt2().scale(&rat_int(5))).unwrap();
    assert_eq!(ctx.sign(&a).unwrap(), Sign::Negative);
    assert_eq!(ctx.to_decimal(&a, 3).unwrap(), "-0.0711");
    assert_eq!(ctx.sign(&Scalar::ratio(0, 1)).unwrap(), Sign::Zero);

    // (2 − π)·1 + π − 2 cancels symbolically.
    let two_minus_pi = Scalar::int(2).sub(&pi()).unwrap();
    let c = two_minus_pi.add(&pi()).unwrap().sub(&Scalar::int(2)).unwrap();
    assert!(matches!(c, Scalar::Rational(_)));
    assert_eq!(ctx.sign(&c).unwrap(), Sign::Zero);
}

#[test]
fn sign_escalates_on_close_values() {
    // 665857/470832 agrees with √2 to about 12 digits.
    let ctx = NumericContext { base_digits: 4, ..NumericContext::exact() };
    let a = sqrt2().sub(&Scalar::ratio(665857, 470832)).unwrap();
    assert_eq!(ctx.sign(&a).unwrap(), Sign::Negative);
}

#[test]
fn sign_reports_exhaustion_for_a_fake_dependency() {
    let mut table = ConstantTable::default();
    table.insert("fakepi", &constants::PI[..200]).unwrap();
    let ctx = NumericContext::exact().with_constants(table);
    let a = Scalar::constant("fakepi").sub(&pi()).unwrap();
    assert!(matches!(ctx.sign(&a), Err(ScalarError::PrecisionExhausted(_))));
}

#[test]
fn decimal_examples() {
    let ctx = NumericContext::exact();
    assert_eq!(ctx.to_decimal(&sqrt2(), 6).unwrap(), "1.41421");
    assert_eq!(ctx.to_decimal(&sqrt2().scale(&rat_int(3)), 6).unwrap(), "4.24264");
    assert_eq!(ctx.to_decimal(&Scalar::ratio(1, 3), 4).unwrap(), "0.3333");
    assert_eq!(ctx.to_decimal(&Scalar::ratio(-2, 3), 3).unwrap(), "-0.667");
    assert_eq!(ctx.to_decimal(&Scalar::int(99999), 3).unwrap(), "100000");
    assert_eq!(ctx.to_decimal(&Scalar::ratio(1, 8), 1).unwrap(), "0.1");
    assert_eq!(ctx.to_decimal(&Scalar::zero(), 5).unwrap(), "0");
    assert_eq!(ctx.to_decimal(&Scalar::constant("e"), 5), Err(ScalarError::UnknownConstant("e".into())));
}

#[test]
fn literal_grammar() {
    assert_eq!(parse_literal_str("7").unwrap(), Scalar::int(7));
    assert_eq!(parse_literal_str("-3/6").unwrap(), Scalar::ratio(-1, 2));
    assert_eq!(parse_literal_str("0.25").unwrap(), Scalar::Float(0.25));
    let v = parse_literal_str(r#"{"q": "1/2", "terms": {"pi": "-1/4", "sqrt2": 0}}"#).unwrap();
    let mut terms = BTreeMap::new();
    terms.insert("pi".to_string(), rat(-1, 4));
    assert_eq!(v, Scalar::linear(rat(1, 2), terms));
    assert!(parse_literal_str("1/0").is_err());
    assert!(parse_literal_str("abc").is_err());
    for s in [Scalar::ratio(5, 3), Scalar::int(-4), v.clone(), Scalar::Float(0.37)] {
        assert_eq!(parse_literal(&scalar_to_json(&s)).unwrap(), s);
    }
}

#[test]
fn components_round_trip() {
    let basis = vec!["pi".to_string(), "sqrt2".to_string()];
    let x = Scalar::ratio(1, 2).add(&sqrt2().scale(&rat(3, 5))).unwrap();
    let c = x.components(&basis).unwrap();
    assert_eq!(c, vec![rat(1, 2), rat_int(0), rat(3, 5)]);
    assert_eq!(Scalar::from_components(&basis, &c), x);
}

#[test]
fn rounding_and_floor() {
    let ctx = NumericContext::exact();
    assert_eq!(ctx.round_half_even(&Scalar::ratio(5, 2)).unwrap(), BigInt::from(2));
    assert_eq!(ctx.round_half_even(&Scalar::ratio(7, 2)).unwrap(), BigInt::from(4));
    assert_eq!(ctx.round_half_even(&Scalar::ratio(-5, 2)).unwrap(), BigInt::from(-2));
    assert_eq!(ctx.floor(&pi().neg()).unwrap(), BigInt::from(-4));
    assert_eq!(ctx.round_half_even(&sqrt2().scale(&rat_int(5))).unwrap(), BigInt::from(7));
}

fn small_rational() -> impl Strategy<Value = BigRational> {
    (-1000i64..1000, 1i64..60).prop_map(|(n, d)| rat(n, d))
}

proptest! {
    #[test]
    fn field_axioms_hold_exactly(a in small_rational(), b in small_rational(), c in small_rational()) {
        let (x, y, z) = (Scalar::Rational(a), Scalar::Rational(b), Scalar::Rational(c));
        let lhs = x.add(&y).unwrap().add(&z).unwrap();
        let rhs = x.add(&y.add(&z).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
        let dist = x.mul(&y.add(&z).unwrap()).unwrap();
        let expanded = x.mul(&y).unwrap().add(&x.mul(&z).unwrap()).unwrap();
        prop_assert_eq!(dist, expanded);
        prop_assert_eq!(x.sub(&x).unwrap(), Scalar::zero());
    }

    #[test]
    fn nonzero_sqrt2_combinations_have_nonzero_sign(
        u in (-100i64..=100, 1i64..20), v in (-100i64..=100, 1i64..20)
    ) {
        prop_assume!(u.0 != 0 || v.0 != 0);
        let ctx = NumericContext::exact();
        let x = Scalar::ratio(u.0, u.1).add(&sqrt2().scale(&rat(v.0, v.1))).unwrap();
        prop_assert_ne!(ctx.sign(&x).unwrap(), Sign::Zero);
    }

    #[test]
    fn sign_agrees_with_decimal_rendering(
        u in (-100i64..=100, 1i64..20), v in (-100i64..=100, 1i64..20), w in (-50i64..=50, 1i64..9)
    ) {
        let ctx = NumericContext::exact();
        let x = Scalar::ratio(u.0, u.1)
            .add(&sqrt2().scale(&rat(v.0, v.1))).unwrap()
            .add(&pi().scale(&rat(w.0, w.1))).unwrap();
        let s = ctx.to_decimal(&x, 50).unwrap();
        let (lo, hi) = ctx.enclose(&x, 60).unwrap();
        let magnitude = rational_to_f64(&lo.abs().max(hi.abs()));
        prop_assume!(magnitude > 1e-40);
        let expected = if s.starts_with('-') { Sign::Negative } else { Sign::Positive };
        prop_assert_eq!(ctx.sign(&x).unwrap(), expected);
    }
}
