use super::*;
use crate::scalar::{dot, rat};
use proptest::prelude::*;

fn s(n: i64) -> Scalar {
    Scalar::int(n)
}

fn ctx() -> NumericContext {
    NumericContext::exact()
}

fn value(r: &LpResult) -> BigRational {
    r.objective.as_ref().unwrap().as_rational().unwrap().clone()
}

#[test]
fn single_variable_bound() {
    let mut p = LinearProgram::new(Sense::Max, vec![s(1)]);
    p.add_row(vec![s(1)], Relation::Le, s(1));
    let r = lp_solve(&p, &ctx()).unwrap();
    assert_eq!(r.status, LpStatus::Optimal);
    assert_eq!(r.x, vec![s(1)]);
    assert_eq!(r.dual, vec![s(1)]);
}

#[test]
fn martingale_mass_on_middle_state() {
    // Q over three states with S0 = 2, S1 = (1, 3, 3): maximise Q(ω2).
    let mut p = LinearProgram::new(Sense::Max, vec![s(0), s(1), s(0)]);
    p.add_row(vec![s(-1), s(1), s(1)], Relation::Eq, s(0));
    p.add_row(vec![s(1), s(1), s(1)], Relation::Eq, s(1));
    let r = lp_solve(&p, &ctx()).unwrap();
    assert_eq!(r.status, LpStatus::Optimal);
    assert_eq!(value(&r), rat(1, 2));
    assert_eq!(r.x, vec![Scalar::ratio(1, 2), Scalar::ratio(1, 2), s(0)]);
}

#[test]
fn infeasible_pair_has_farkas_certificate() {
    let mut p = LinearProgram::new(Sense::Max, vec![s(0)]);
    p.add_row(vec![s(1)], Relation::Ge, s(1));
    p.add_row(vec![s(1)], Relation::Le, s(0));
    let r = lp_solve(&p, &ctx()).unwrap();
    assert_eq!(r.status, LpStatus::Infeasible);
    check_farkas(&p, &r.farkas);
}

#[test]
fn unbounded_program_reports_a_ray() {
    let mut p = LinearProgram::new(Sense::Max, vec![s(1), s(1)]);
    p.add_row(vec![s(1), s(-1)], Relation::Le, s(2));
    let r = lp_solve(&p, &ctx()).unwrap();
    assert_eq!(r.status, LpStatus::Unbounded);
    let gain = dot(&p.objective, &r.ray).unwrap();
    assert_eq!(ctx().sign(&gain).unwrap(), Sign::Positive);
    let slope = dot(&p.rows[0].coefs, &r.ray).unwrap();
    assert_ne!(ctx().sign(&slope).unwrap(), Sign::Positive);
}

#[test]
fn free_and_boxed_variables() {
    // min x + y with x free, y ∈ [−2, 5], x − y ≥ −1, x ≥ −10 via a row.
    let mut p = LinearProgram::new(Sense::Min, vec![s(1), s(1)]);
    p.set_bound(0, Bound::free());
    p.set_bound(1, Bound::between(s(-2), s(5)));
    p.add_row(vec![s(1), s(-1)], Relation::Ge, s(-1));
    p.add_row(vec![s(1), s(0)], Relation::Ge, s(-10));
    let r = lp_solve(&p, &ctx()).unwrap();
    assert_eq!(r.status, LpStatus::Optimal);
    assert_eq!(value(&r), rat_i(-5));
    assert_eq!(r.x, vec![s(-3), s(-2)]);
}

fn rat_i(n: i64) -> BigRational {
    rat(n, 1)
}

#[test]
fn symbolic_right_hand_side_stays_exact() {
    // max x s.t. x ≤ √2, x ≤ 3.
    let mut p = LinearProgram::new(Sense::Max, vec![s(1)]);
    p.add_row(vec![s(1)], Relation::Le, Scalar::constant("sqrt2"));
    p.add_row(vec![s(1)], Relation::Le, s(3));
    let r = lp_solve(&p, &ctx()).unwrap();
    assert_eq!(r.objective, Some(Scalar::constant("sqrt2")));
}

#[test]
fn symbolic_products_fall_back_to_float() {
    // max √2·x s.t. x ≤ π: the objective value needs √2·π.
    let mut p = LinearProgram::new(Sense::Max, vec![Scalar::constant("sqrt2")]);
    p.add_row(vec![s(1)], Relation::Le, Scalar::constant("pi"));
    assert!(lp_solve(&p, &ctx()).is_err());
    let (r, approx) = solve_with_fallback(&p, &ctx()).unwrap();
    assert!(approx);
    let v = ctx().to_f64(r.objective.as_ref().unwrap()).unwrap();
    assert!((v - std::f64::consts::SQRT_2 * std::f64::consts::PI).abs() < 1e-9);
}

#[test]
fn float_mode_solves_the_same_program() {
    let mut p = LinearProgram::new(Sense::Max, vec![Scalar::Float(3.0), Scalar::Float(2.0)]);
    p.add_row(vec![Scalar::Float(1.0), Scalar::Float(1.0)], Relation::Le, Scalar::Float(4.0));
    p.add_row(vec![Scalar::Float(1.0), Scalar::Float(3.0)], Relation::Le, Scalar::Float(6.0));
    let r = lp_solve(&p, &NumericContext::float()).unwrap();
    let v = NumericContext::float().to_f64(r.objective.as_ref().unwrap()).unwrap();
    assert!((v - 12.0).abs() < 1e-9);
}

#[test]
fn degenerate_cycling_example_terminates() {
    // Beale's program cycles under the textbook largest-coefficient rule.
    let mut p = LinearProgram::new(
        Sense::Max,
        vec![Scalar::ratio(3, 4), s(-150), Scalar::ratio(1, 50), s(-6)],
    );
    p.add_row(vec![Scalar::ratio(1, 4), s(-60), Scalar::ratio(-1, 25), s(9)], Relation::Le, s(0));
    p.add_row(vec![Scalar::ratio(1, 2), s(-90), Scalar::ratio(-1, 50), s(3)], Relation::Le, s(0));
    p.add_row(vec![s(0), s(0), s(1), s(0)], Relation::Le, s(1));
    let r = lp_solve(&p, &ctx()).unwrap();
    assert_eq!(value(&r), rat(1, 20));
    check_optimal(&p, &r);
}

#[test]
fn degenerate_redundant_equalities() {
    // Repeated equality rows leave a zero artificial in the basis.
    let mut p = LinearProgram::new(Sense::Min, vec![s(1), s(2), s(3)]);
    p.add_row(vec![s(1), s(1), s(1)], Relation::Eq, s(1));
    p.add_row(vec![s(2), s(2), s(2)], Relation::Eq, s(2));
    p.add_row(vec![s(1), s(-1), s(0)], Relation::Eq, s(0));
    let r = lp_solve(&p, &ctx()).unwrap();
    assert_eq!(value(&r), rat(3, 2));
    check_optimal(&p, &r);
}

#[test]
fn strict_feasibility_finds_a_rational_witness() {
    // x − y ≥ 0 and y ≥ 0 with strictness on the first row.
    let mut p = LinearProgram::new(Sense::Max, vec![s(0), s(0)]);
    p.set_bound(0, Bound::free());
    p.set_bound(1, Bound::free());
    p.add_row(vec![s(1), s(-1)], Relation::Ge, s(0));
    p.add_row(vec![s(0), s(1)], Relation::Ge, s(0));
    let w = lp_feasible_strict(&p, &[0, 1], &ctx()).unwrap().unwrap();
    let lhs = dot(&p.rows[w.row].coefs, &w.x).unwrap();
    assert_eq!(ctx().sign(&lhs).unwrap(), Sign::Positive);
    for row in &p.rows {
        assert_ne!(ctx().sign(&dot(&row.coefs, &w.x).unwrap()).unwrap(), Sign::Negative);
    }
}

#[test]
fn strict_feasibility_of_zero_rows_is_none() {
    let mut p = LinearProgram::new(Sense::Max, vec![s(0), s(0)]);
    p.set_bound(0, Bound::free());
    p.set_bound(1, Bound::free());
    p.add_row(vec![s(0), s(0)], Relation::Ge, s(0));
    p.add_row(vec![s(0), s(0)], Relation::Ge, s(0));
    assert_eq!(lp_feasible_strict(&p, &[0, 1], &ctx()).unwrap(), None);
}

#[test]
fn strict_feasibility_rejects_irrational_rows() {
    let mut p = LinearProgram::new(Sense::Max, vec![s(0), s(0)]);
    p.add_row(vec![s(1), Scalar::constant("sqrt2").neg()], Relation::Ge, s(0));
    assert_eq!(lp_feasible_strict(&p, &[0], &ctx()), Err(LpError::NotRational));
}

/// Feasibility, dual feasibility and complementary slackness for programs
/// whose variables are all nonnegative.
fn check_optimal(p: &LinearProgram, r: &LpResult) {
    let c = ctx();
    assert_eq!(r.status, LpStatus::Optimal);
    for x in &r.x {
        assert_ne!(c.sign(x).unwrap(), Sign::Negative);
    }
    let max = p.sense == Sense::Max;
    let mut dual_obj = Scalar::zero();
    for (row, y) in p.rows.iter().zip(&r.dual) {
        let lhs = dot(&row.coefs, &r.x).unwrap();
        let slack = c.cmp(&lhs, &row.rhs).unwrap();
        match row.rel {
            Relation::Le => assert_ne!(slack, Sign::Positive),
            Relation::Ge => assert_ne!(slack, Sign::Negative),
            Relation::Eq => assert_eq!(slack, Sign::Zero),
        }
        let ys = c.sign(y).unwrap();
        let expect_nonneg = (row.rel == Relation::Le) == max;
        if row.rel != Relation::Eq {
            assert_ne!(ys, if expect_nonneg { Sign::Negative } else { Sign::Positive });
            if slack != Sign::Zero {
                assert_eq!(ys, Sign::Zero, "complementary slackness");
            }
        }
        dual_obj = dual_obj.add(&y.mul(&row.rhs).unwrap()).unwrap();
    }
    for j in 0..p.num_vars() {
        let mut aty = Scalar::zero();
        for (row, y) in p.rows.iter().zip(&r.dual) {
            aty = aty.add(&row.coefs[j].mul(y).unwrap()).unwrap();
        }
        let reduced = c.cmp(&aty, &p.objective[j]).unwrap();
        if max {
            assert_ne!(reduced, Sign::Negative);
        } else {
            assert_ne!(reduced, Sign::Positive);
        }
        if c.sign(&r.x[j]).unwrap() == Sign::Positive {
            assert_eq!(reduced, Sign::Zero, "complementary slackness on x{j}");
        }
    }
    assert_eq!(&dual_obj, r.objective.as_ref().unwrap());
}

fn check_farkas(p: &LinearProgram, y: &[Scalar]) {
    let c = ctx();
    let mut yb = Scalar::zero();
    for (row, yi) in p.rows.iter().zip(y) {
        let sg = c.sign(yi).unwrap();
        match row.rel {
            Relation::Le => assert_ne!(sg, Sign::Positive),
            Relation::Ge => assert_ne!(sg, Sign::Negative),
            Relation::Eq => {}
        }
        yb = yb.add(&yi.mul(&row.rhs).unwrap()).unwrap();
    }
    assert_eq!(c.sign(&yb).unwrap(), Sign::Positive);
    for j in 0..p.num_vars() {
        let mut aty = Scalar::zero();
        for (row, yi) in p.rows.iter().zip(y) {
            aty = aty.add(&row.coefs[j].mul(yi).unwrap()).unwrap();
        }
        assert_ne!(c.sign(&aty).unwrap(), Sign::Positive);
    }
}

/// Vertex enumeration oracle for two-variable programs with `x ≥ 0` and `≤`
/// rows: every vertex solves two tight constraints out of rows plus axes.
fn vertex_oracle(a: &[[i64; 2]], b: &[i64], cobj: [i64; 2]) -> Option<BigRational> {
    let mut lines: Vec<([BigRational; 2], BigRational)> =
        a.iter().zip(b).map(|(r, &bi)| ([rat_i(r[0]), rat_i(r[1])], rat_i(bi))).collect();
    lines.push(([rat_i(1), rat_i(0)], rat_i(0)));
    lines.push(([rat_i(0), rat_i(1)], rat_i(0)));
    let mut best: Option<BigRational> = None;
    for i in 0..lines.len() {
        for k in i + 1..lines.len() {
            let (p, pb) = &lines[i];
            let (q, qb) = &lines[k];
            let det = &p[0] * &q[1] - &p[1] * &q[0];
            if det == rat_i(0) {
                continue;
            }
            let x = (pb * &q[1] - &p[1] * qb) / &det;
            let y = (&p[0] * qb - pb * &q[0]) / &det;
            if x < rat_i(0) || y < rat_i(0) {
                continue;
            }
            let feasible = a.iter().zip(b).all(|(r, &bi)| &x * rat_i(r[0]) + &y * rat_i(r[1]) <= rat_i(bi));
            if feasible {
                let v = &x * rat_i(cobj[0]) + &y * rat_i(cobj[1]);
                if best.as_ref().is_none_or(|bv| v > *bv) {
                    best = Some(v);
                }
            }
        }
    }
    best
}

proptest! {
    #[test]
    fn bounded_two_variable_programs_match_vertex_oracle(
        rows in prop::collection::vec(([1i64..6, 1i64..6], 0i64..20), 1..5),
        cobj in [-5i64..6, -5i64..6],
    ) {
        // Positive coefficients on every row keep the region bounded.
        let a: Vec<[i64; 2]> = rows.iter().map(|r| r.0).collect();
        let b: Vec<i64> = rows.iter().map(|r| r.1).collect();
        let mut p = LinearProgram::new(Sense::Max, vec![s(cobj[0]), s(cobj[1])]);
        for (r, &bi) in a.iter().zip(&b) {
            p.add_row(vec![s(r[0]), s(r[1])], Relation::Le, s(bi));
        }
        let r = lp_solve(&p, &ctx()).unwrap();
        prop_assert_eq!(Some(value(&r)), vertex_oracle(&a, &b, cobj));
        check_optimal(&p, &r);
    }

    #[test]
    fn mixed_relation_programs_are_certified(
        rows in prop::collection::vec((prop::collection::vec(-4i64..5, 3), 0usize..3, -6i64..7), 1..5),
        cobj in prop::collection::vec(-4i64..5, 3),
    ) {
        let mut p = LinearProgram::new(Sense::Min, cobj.iter().map(|&c| s(c)).collect());
        for (coefs, rel, rhs) in &rows {
            let rel = [Relation::Le, Relation::Eq, Relation::Ge][*rel];
            p.add_row(coefs.iter().map(|&c| s(c)).collect(), rel, s(*rhs));
        }
        // Cap the region so that only optimal/infeasible can occur.
        p.add_row(vec![s(1), s(1), s(1)], Relation::Le, s(30));
        let r = lp_solve(&p, &ctx()).unwrap();
        match r.status {
            LpStatus::Optimal => check_optimal(&p, &r),
            LpStatus::Infeasible => check_farkas(&p, &r.farkas),
            LpStatus::Unbounded => prop_assert!(false, "bounded region reported unbounded"),
        }
    }
}
