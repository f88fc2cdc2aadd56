//! Command handlers: load inputs, run the analysis, render both formats.

use intlot::arbitrage::{self, check_martingale_measure, na_check, ArbitrageReport, Property, Verdict, DEFAULT_RADIUS};
use intlot::hedging::{
    copies_scaling, gap_bound, integer_hedge, rational_denominator_superhedge, rational_hedge, real_hedge, verify_hedge,
    Direction, HedgeResult,
};
use intlot::lattice::{babai_round, cvp_bruteforce, cvp_closest, lll_reduce, lll_violations, CvpStatus, LatticeBasis};
use intlot::market::{claim_from_json, Asset, measure_from_json, process_from_json, validate_model, Claim, MarketModel};
use intlot::pricing::{
    classical_price_bounds, extension_nia_check, nia_price_interval, price_membership_t1, MemberVerdict, Membership,
    Openness, PriceInterval,
};
use intlot::scalar::{parse_literal, parse_literal_str};
use intlot::varhedge::{render_report, var_hedge_report, VarHedgeResult, VarMethod, ALL_METHODS};
use intlot::{Error, NumericContext, Scalar};
use num_traits::Signed;
use serde_json::{json, Value};

use crate::render::{number, show, state_names, state_set, strategy_json, strategy_text};
use crate::{
    matrix, CheckArgs, ClassArg, CvpMethod, DirectionArg, Failure, HedgeArgs, LatticeOp, MethodArg, Outcome, PriceArgs,
    PropertyArg, VarhedgeArgs, EXIT_FAILS, EXIT_INCONCLUSIVE, EXIT_INTERNAL, EXIT_OK,
};

fn read(path: &str) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{path}: {e}")))
}

/// Parses and validates a model file; every violation is listed.
pub fn load_model(path: &str) -> Result<MarketModel, Failure> {
    model_from_text(path, &read(path)?)
}

pub fn model_from_text(path: &str, text: &str) -> Result<MarketModel, Failure> {
    let m = MarketModel::from_json_str(text).map_err(|e| Failure::at(path, e))?;
    let violations = validate_model(&m);
    if !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(|v| format!("  {v}")).collect();
        return Err(Failure::input(format!("{path}: invalid model\n{}", list.join("\n"))));
    }
    Ok(m)
}

pub fn load_claim(path: &str, m: &MarketModel) -> Result<Claim, Failure> {
    claim_from_json(&read(path)?, m.n()).map_err(|e| Failure::at(path, e))
}

/// A scalar literal from the command line; objects may use JSON5 syntax,
/// e.g. `{terms:{sqrt2:'1'}}`.
pub fn parse_scalar(text: &str) -> Result<Scalar, Failure> {
    let t = text.trim();
    let parsed = if t.starts_with('{') {
        let v: Value = json5::from_str(t).map_err(|e| Failure::input(format!("literal `{t}`: {e}")))?;
        parse_literal(&v)
    } else {
        parse_literal_str(t)
    };
    parsed.map_err(|e| Failure::input(format!("literal `{t}`: {e}")))
}

pub fn verdict_code(v: Verdict) -> u8 {
    match v {
        Verdict::Holds => EXIT_OK,
        Verdict::Fails => EXIT_FAILS,
        Verdict::NoWitnessWithinBudget => EXIT_INCONCLUSIVE,
    }
}

pub fn report_json(ctx: &NumericContext, m: &MarketModel, r: &ArbitrageReport) -> Value {
    json!({
        "property": r.property.name(),
        "verdict": r.verdict.to_string(),
        "witness": r.witness.as_ref().map(|s| strategy_json(ctx, m, s)),
        "radius": r.radius,
        "nodes_searched": r.nodes_searched,
        "dependency_trivial": r.dependency_trivial,
        "approx": r.approx,
        "note": r.note,
    })
}

/// Lines after the headline of an arbitrage report.
pub fn report_details(ctx: &NumericContext, m: &MarketModel, r: &ArbitrageReport) -> String {
    let mut out = String::new();
    if let Some(w) = &r.witness {
        out.push_str("witness:\n");
        out.push_str(&strategy_text(ctx, m, w));
    }
    if let Some(radius) = r.radius {
        out.push_str(&format!("search radius {radius}, {} nodes searched\n", r.nodes_searched));
    }
    if let Some(trivial) = r.dependency_trivial {
        out.push_str(&format!("one-period dependency test: {}\n", if trivial { "trivial" } else { "nontrivial" }));
    }
    if !r.note.is_empty() {
        out.push_str(&format!("note: {}\n", r.note));
    }
    if r.approx {
        out.push_str("warning: part of the decision rests on uncertified floating-point LP output\n");
    }
    out
}

pub fn check(a: &CheckArgs) -> Result<Outcome, Failure> {
    let m = load_model(&a.model)?;
    let ctx = m.context()?;
    let property = match a.property {
        PropertyArg::Na => Property::Na,
        PropertyArg::Nia => Property::Nia,
        PropertyArg::Nifl => Property::Nifl,
    };
    let r = arbitrage::check(&m, property, a.radius.unwrap_or(DEFAULT_RADIUS))?;
    let a_set = na_check(&m)?.profile.a_set;
    let text = format!(
        "{} {}; A = {}\n{}",
        r.property.name(),
        r.verdict,
        state_set(&a_set),
        report_details(&ctx, &m, &r)
    );
    let mut body = report_json(&ctx, &m, &r);
    body["a_set"] = state_names(&m, &a_set);
    Ok(Outcome { code: verdict_code(r.verdict), text, json: body })
}

fn bracket(o: Openness, left: bool) -> &'static str {
    match (o, left) {
        (Openness::Open, true) => "(",
        (Openness::Closed, true) => "[",
        (Openness::Open, false) => ")",
        (Openness::Closed, false) => "]",
        (Openness::Unknown, _) => "?",
    }
}

fn openness(o: Openness) -> &'static str {
    match o {
        Openness::Open => "open",
        Openness::Closed => "closed",
        Openness::Unknown => "unknown",
    }
}

pub fn interval_text(ctx: &NumericContext, iv: &PriceInterval) -> String {
    let mut s = if iv.empty {
        format!("∅ (envelope endpoints {} and {})", show(ctx, &iv.lo), show(ctx, &iv.hi))
    } else {
        format!("{}{}, {}{}", bracket(iv.lo_open, true), show(ctx, &iv.lo), show(ctx, &iv.hi), bracket(iv.hi_open, false))
    };
    let mut flags = Vec::new();
    if iv.replicable {
        flags.push("replicable");
    }
    if iv.approx {
        flags.push("approximate endpoints");
    }
    if iv.nia_unconfirmed {
        flags.push("NIA unconfirmed within budget");
    }
    if !flags.is_empty() {
        s.push_str(&format!(" ({})", flags.join(", ")));
    }
    s
}

pub fn interval_json(ctx: &NumericContext, iv: &PriceInterval) -> Value {
    json!({
        "lo": number(ctx, &iv.lo),
        "hi": number(ctx, &iv.hi),
        "lo_bound": openness(iv.lo_open),
        "hi_bound": openness(iv.hi_open),
        "empty": iv.empty,
        "replicable": iv.replicable,
        "approx": iv.approx,
        "nia_unconfirmed": iv.nia_unconfirmed,
    })
}

pub fn membership_code(v: MemberVerdict) -> u8 {
    match v {
        MemberVerdict::Member => EXIT_OK,
        MemberVerdict::NotMember => EXIT_FAILS,
        MemberVerdict::Unknown => EXIT_INCONCLUSIVE,
    }
}

/// The market extended by the claim traded at `p`, in which membership
/// witnesses live.
pub fn priced_extension(m: &MarketModel, claim: &Claim, p: &Scalar) -> MarketModel {
    m.with_asset(Asset { name: "C".into(), prices: vec![vec![p.clone(); m.n()], claim.payoff.clone()] })
}

pub fn membership_json(ctx: &NumericContext, m: &MarketModel, claim: &Claim, p: &Scalar, r: &Membership) -> Value {
    json!({
        "price": number(ctx, p),
        "verdict": r.verdict.to_string(),
        "reason": r.reason,
        "witness": r.witness.as_ref().map(|s| strategy_json(ctx, &priced_extension(m, claim, p), s)),
    })
}

pub fn membership_text(ctx: &NumericContext, m: &MarketModel, claim: &Claim, p: &Scalar, r: &Membership) -> String {
    let mut out = format!("price {}: {}\n", show(ctx, p), r.verdict);
    if !r.reason.is_empty() {
        out.push_str(&format!("reason: {}\n", r.reason));
    }
    if let Some(w) = &r.witness {
        out.push_str("integer arbitrage in the extended market:\n");
        out.push_str(&strategy_text(ctx, &priced_extension(m, claim, p), w));
    }
    out
}

pub fn price(a: &PriceArgs) -> Result<Outcome, Failure> {
    let m = load_model(&a.model)?;
    let c = load_claim(&a.claim, &m)?;
    let ctx = m.context()?;
    let radius = a.radius.unwrap_or(DEFAULT_RADIUS);
    if let Some(lit) = &a.member {
        let p = parse_scalar(lit)?;
        let r = price_membership_t1(&m, &c, &p, radius)?;
        let text = membership_text(&ctx, &m, &c, &p, &r);
        let body = membership_json(&ctx, &m, &c, &p, &r);
        return Ok(Outcome { code: membership_code(r.verdict), text, json: body });
    }
    if let Some(path) = &a.extension {
        let x = process_from_json(&read(path)?, m.n(), m.periods).map_err(|e| Failure::at(path, e))?;
        let r = extension_nia_check(&m, &c, &x, radius)?;
        let ext = m.with_asset(Asset { name: "X".into(), prices: x });
        let text = format!("NIA of the extended market: {}\n{}", r.verdict, report_details(&ctx, &ext, &r));
        return Ok(Outcome { code: verdict_code(r.verdict), text, json: report_json(&ctx, &ext, &r) });
    }
    let (classical_text, classical_json) = match classical_price_bounds(&m, &c) {
        Ok(iv) => (interval_text(&ctx, &iv), interval_json(&ctx, &iv)),
        Err(Error::ModelHasArbitrage) => ("undefined: the model admits a real arbitrage".into(), Value::Null),
        Err(e) => return Err(e.into()),
    };
    let nia = nia_price_interval(&m, &c, radius)?;
    let text = format!(
        "classical price interval: {classical_text}\ninteger price interval (NIA envelope): {}\n",
        interval_text(&ctx, &nia)
    );
    Ok(Outcome::ok(text, json!({ "classical": classical_json, "nia": interval_json(&ctx, &nia) })))
}

pub fn hedge_json(ctx: &NumericContext, m: &MarketModel, h: &HedgeResult) -> Value {
    json!({
        "direction": h.direction.name(),
        "class": h.class.name(),
        "price": number(ctx, &h.price),
        "status": h.status.to_string(),
        "strategy": strategy_json(ctx, m, &h.strategy),
        "radius": h.radius,
        "denominator": h.denominator.as_ref().map(|d| d.to_string()),
        "bound": h.bound.as_ref().map(|b| number(ctx, b)),
        "approx": h.approx,
        "flagged": h.flagged,
        "nodes": h.nodes,
        "nia_unconfirmed": h.nia_unconfirmed,
    })
}

pub fn hedge_text(ctx: &NumericContext, m: &MarketModel, h: &HedgeResult) -> String {
    let mut out = format!(
        "{} {}hedge: price {}\nstatus: {}\n",
        h.class.name(),
        h.direction.name(),
        show(ctx, &h.price),
        h.status
    );
    out.push_str(&strategy_text(ctx, m, &h.strategy));
    if let Some(r) = h.radius {
        out.push_str(&format!("search radius {r}, {} nodes\n", h.nodes));
    }
    if let Some(d) = &h.denominator {
        out.push_str(&format!("common denominator {d}\n"));
    }
    if let Some(b) = &h.bound {
        out.push_str(&format!("bound {}\n", show(ctx, b)));
    }
    if h.flagged {
        out.push_str("warning: the buffered price fell short of the strategy's superhedging cost and was raised\n");
    }
    if h.approx {
        out.push_str("warning: price rests on uncertified floating-point LP output\n");
    }
    if h.nia_unconfirmed {
        out.push_str("warning: NIA not confirmed within the search budget\n");
    }
    out
}

fn copies_outcome(m: &MarketModel, c: &Claim, copies: &[u64]) -> Result<Outcome, Failure> {
    let ctx = m.context()?;
    let (sup, rows) = copies_scaling(m, c, copies)?;
    let bound = gap_bound(m).ok();
    let mut text = format!("sup Π(C) = {}\n", show(&ctx, &sup));
    if let Some(b) = &bound {
        text.push_str(&format!("gap bound = {}\n", show(&ctx, b)));
    }
    text.push_str("N  σ_Z(N·C)  per copy  gap  status\n");
    for r in &rows {
        text.push_str(&format!(
            "{}  {}  {}  {}  {}\n",
            r.copies,
            show(&ctx, &r.sigma),
            show(&ctx, &r.per_copy),
            show(&ctx, &r.gap),
            r.status
        ));
    }
    let json_rows: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "copies": r.copies,
                "sigma": number(&ctx, &r.sigma),
                "per_copy": number(&ctx, &r.per_copy),
                "gap": number(&ctx, &r.gap),
                "status": r.status.to_string(),
                "radius": r.radius,
            })
        })
        .collect();
    let body = json!({
        "sup": number(&ctx, &sup),
        "gap_bound": bound.as_ref().map(|b| number(&ctx, b)),
        "rows": json_rows,
    });
    Ok(Outcome::ok(text, body))
}

pub fn hedge(a: &HedgeArgs) -> Result<Outcome, Failure> {
    let m = load_model(&a.model)?;
    let c = load_claim(&a.claim, &m)?;
    let ctx = m.context()?;
    let direction = match a.direction {
        DirectionArg::Super => Direction::Super,
        DirectionArg::Sub => Direction::Sub,
    };
    if let Some(copies) = &a.copies {
        if direction != Direction::Super || matches!(a.class, Some(ClassArg::Real | ClassArg::Rational)) {
            return Err(Failure::input("--copies computes integer superhedges; drop --direction sub and --class"));
        }
        if a.denom_bound.is_some() || a.epsilon.is_some() {
            return Err(Failure::input("--copies cannot be combined with --denom-bound or --epsilon"));
        }
        return copies_outcome(&m, &c, copies);
    }
    let class = match (a.class, a.denom_bound) {
        (None, Some(_)) => ClassArg::Rational,
        (Some(k), Some(_)) if k != ClassArg::Rational => {
            return Err(Failure::input("--denom-bound applies to the rational class"));
        }
        (k, _) => k.unwrap_or(ClassArg::Real),
    };
    if a.radius.is_some() && class != ClassArg::Integer {
        return Err(Failure::input("--radius applies to the integer class"));
    }
    if a.epsilon.is_some() && (class != ClassArg::Rational || a.denom_bound.is_some()) {
        return Err(Failure::input("--epsilon applies to the rational class without --denom-bound"));
    }
    let h = match class {
        ClassArg::Real => real_hedge(&m, &c, direction)?,
        ClassArg::Integer => integer_hedge(&m, &c, direction, a.radius)?,
        ClassArg::Rational => match a.denom_bound {
            Some(n) => {
                if direction != Direction::Super {
                    return Err(Failure::input("--denom-bound builds superhedges only"));
                }
                rational_denominator_superhedge(&m, &c, n)?
            }
            None => {
                let eps = parse_scalar(a.epsilon.as_deref().unwrap_or("1/1000000"))?;
                let eps = match eps.as_rational() {
                    Some(r) if r.is_positive() => r.clone(),
                    _ => return Err(Failure::input("--epsilon must be a positive rational")),
                };
                rational_hedge(&m, &c, direction, &eps)?
            }
        },
    };
    if !verify_hedge(&m, &c, &h, &ctx)? {
        return Err(Failure { code: EXIT_INTERNAL, message: "computed hedge does not dominate the claim".into() });
    }
    Ok(Outcome::ok(hedge_text(&ctx, &m, &h), hedge_json(&ctx, &m, &h)))
}

/// Model probabilities when they form an equivalent martingale measure,
/// otherwise the relative-interior measure found by the NA check.
pub fn default_measure(m: &MarketModel) -> Result<(Vec<Scalar>, &'static str), Failure> {
    if check_martingale_measure(m, &m.probabilities).is_ok() {
        return Ok((m.probabilities.clone(), "model probabilities"));
    }
    let na = na_check(m)?;
    match na.profile.witness_measure {
        Some(q) if na.profile.a_set.is_empty() => Ok((q, "martingale measure from the NA check")),
        _ => Err(Error::ModelHasArbitrage.into()),
    }
}

pub fn var_result_json(r: &VarHedgeResult) -> Value {
    json!({
        "positions": r.positions,
        "integer_positions": r.integer_positions,
        "initial_value": r.initial_value,
        "residual": r.residual,
        "rmse": r.rmse,
        "position_size": r.position_size,
        "zero_norm": r.zero_norm,
    })
}

pub fn varhedge_outcome(
    m: &MarketModel,
    c: &Claim,
    q: &[Scalar],
    measure_source: &str,
    copies: &[u64],
    methods: &[VarMethod],
) -> Result<Outcome, Failure> {
    let rows = var_hedge_report(m, c, q, copies)?;
    let mut text = format!("pricing measure: {measure_source}\n");
    text.push_str(&render_report(&rows, methods));
    for r in &rows {
        let parts: Vec<String> = methods
            .iter()
            .map(|&k| {
                let p: Vec<String> = r.get(k).positions.iter().map(|x| format!("{x:.4}")).collect();
                format!("{} ({})", k.name(), p.join(", "))
            })
            .collect();
        text.push_str(&format!("N={}: V₀ = {:.6}; {}\n", r.copies, r.classical.initial_value, parts.join("; ")));
    }
    if rows.iter().any(|r| r.classical.zero_norm) {
        text.push_str("note: the centred claim has zero norm; rMSE reported as 0\n");
    }
    let json_rows: Vec<Value> = rows
        .iter()
        .map(|r| {
            let mut o = json!({ "copies": r.copies });
            for &k in methods {
                o[k.name()] = var_result_json(r.get(k));
            }
            o
        })
        .collect();
    let body = json!({ "measure_source": measure_source, "rows": json_rows });
    Ok(Outcome::ok(text, body))
}

pub fn varhedge(a: &VarhedgeArgs) -> Result<Outcome, Failure> {
    let m = load_model(&a.model)?;
    let c = load_claim(&a.claim, &m)?;
    let (q, source) = match &a.measure {
        Some(path) => (measure_from_json(&read(path)?, m.n()).map_err(|e| Failure::at(path, e))?, "measure file"),
        None => default_measure(&m)?,
    };
    let methods: &[VarMethod] = match a.method {
        MethodArg::All => &ALL_METHODS,
        MethodArg::Classical => &[VarMethod::Classical],
        MethodArg::Cvp => &[VarMethod::Cvp],
        MethodArg::Round => &[VarMethod::Rounding],
    };
    varhedge_outcome(&m, &c, &q, source, &a.copies, methods)
}

fn status_name(s: CvpStatus) -> &'static str {
    match s {
        CvpStatus::ExactOptimal => "exact-optimal",
        CvpStatus::BestWithinRadius => "best-within-radius",
    }
}

fn float_row(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(" ")
}

pub fn lattice(op: &LatticeOp) -> Result<Outcome, Failure> {
    match op {
        LatticeOp::Lll { basis, delta, .. } => {
            if !(*delta > 0.25 && *delta < 1.0) {
                return Err(Failure::input("--delta must lie in (1/4, 1)"));
            }
            let b = LatticeBasis::new(matrix::read(basis)?).map_err(|e| Failure::at(basis, e))?;
            let (reduced, u) = lll_reduce(&b, *delta)?;
            let violations = lll_violations(&reduced, *delta);
            let mut text = String::from("reduced basis:\n");
            for row in &reduced.generators {
                text.push_str(&format!("  {}\n", float_row(row)));
            }
            text.push_str("transform (reduced = U·B):\n");
            for row in &u {
                text.push_str(&format!("  {}\n", row.iter().map(i64::to_string).collect::<Vec<_>>().join(" ")));
            }
            text.push_str(&format!("Lovász violations at δ = {delta}: {violations}\n"));
            let body = json!({ "reduced": reduced.generators, "transform": u, "delta": delta, "violations": violations });
            Ok(Outcome::ok(text, body))
        }
        LatticeOp::Cvp { basis, target, method, radius, .. } => {
            let b = LatticeBasis::new(matrix::read(basis)?).map_err(|e| Failure::at(basis, e))?;
            let t = matrix::read_vector(target)?;
            let r = match method {
                CvpMethod::Closest => cvp_closest(&b, &t)?,
                CvpMethod::Babai => babai_round(&b, &t)?,
                CvpMethod::Bruteforce => cvp_bruteforce(&b, &t, *radius)?,
            };
            let coeffs: Vec<String> = r.coefficients.iter().map(i64::to_string).collect();
            let text = format!(
                "coefficients: {}\npoint: {}\ndistance: {}\nstatus: {}\n",
                coeffs.join(" "),
                float_row(&r.point),
                r.distance_sq.sqrt(),
                status_name(r.status)
            );
            let body = json!({
                "coefficients": r.coefficients,
                "point": r.point,
                "distance": r.distance_sq.sqrt(),
                "status": status_name(r.status),
            });
            Ok(Outcome::ok(text, body))
        }
    }
}
