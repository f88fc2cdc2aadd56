//! The bundled example corpus, reproducible without any input files.

use clap::ValueEnum;
use intlot::arbitrage::{na_check, nia_check, zero_gain_space, LatticeStatus, DEFAULT_RADIUS};
use intlot::hedging::{copies_scaling, gap_bound, integer_hedge, real_hedge, Direction};
use intlot::market::{claim_from_json, process_from_json, Claim, MarketModel};
use intlot::pricing::{classical_price_bounds, extension_nia_check, nia_price_interval, price_membership_t1};
use intlot::varhedge::ALL_METHODS;
use intlot::Scalar;
use serde_json::{json, Map, Value};

use crate::commands::{
    hedge_json, interval_json, interval_text, membership_json, membership_text, model_from_text, report_details,
    report_json, varhedge_outcome,
};
use crate::render::{number, show, state_names, state_set, strategy_json, strategy_text};
use crate::{Failure, Outcome};

const GAP: &str = include_str!("../../../models/gap.json");
const GAP_CLAIM: &str = include_str!("../../../claims/gap.json");
const SQRT2: &str = include_str!("../../../models/sqrt2.json");
const SQRT2_CLAIMS: [(&str, &str); 4] = [
    ("i", include_str!("../../../claims/ci.json")),
    ("ii", include_str!("../../../claims/cii.json")),
    ("iii", include_str!("../../../claims/ciii.json")),
    ("iv", include_str!("../../../claims/civ.json")),
];
const EMPTY_PI: &str = include_str!("../../../models/empty_pi.json");
const EMPTY_PI_CLAIM: &str = include_str!("../../../claims/empty_pi.json");
const DENSE: &str = include_str!("../../../models/dense.json");
const DENSE_CLAIM: &str = include_str!("../../../claims/dense.json");
const DENSE_PROCESSES: [(&str, &str); 2] = [
    ("1/4", include_str!("../../../processes/dense_quarter.json")),
    ("√2/4", include_str!("../../../processes/dense_sqrt2.json")),
];
const NO_CHEAPEST: &str = include_str!("../../../models/no_cheapest.json");
const NO_CHEAPEST_CLAIM: &str = include_str!("../../../claims/no_cheapest.json");
const TABLE1: &str = include_str!("../../../models/table1.json");
const TABLE1_CLAIM: &str = include_str!("../../../claims/table1.json");
const COROLLARY: &str = include_str!("../../../models/corollary.json");

/// Copies reported in the variance-hedging table.
pub const TABLE2_COPIES: [u64; 7] = [1, 5, 10, 20, 30, 40, 50];
/// Radii of the integer superhedge in the model without a cheapest hedge.
pub const NO_CHEAPEST_RADII: [u32; 3] = [5, 50, 500];

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Example {
    Table2,
    Gap,
    Sqrt2,
    EmptyPi,
    Dense,
    NoCheapest,
    Corollary,
    All,
}

const EACH: [Example; 7] = [
    Example::Gap,
    Example::Sqrt2,
    Example::EmptyPi,
    Example::Dense,
    Example::NoCheapest,
    Example::Corollary,
    Example::Table2,
];

impl Example {
    fn key(self) -> &'static str {
        match self {
            Example::Table2 => "table2",
            Example::Gap => "gap",
            Example::Sqrt2 => "sqrt2",
            Example::EmptyPi => "empty-pi",
            Example::Dense => "dense",
            Example::NoCheapest => "no-cheapest",
            Example::Corollary => "corollary",
            Example::All => "all",
        }
    }
}

fn model(name: &str, text: &str) -> Result<MarketModel, Failure> {
    model_from_text(&format!("models/{name}.json"), text)
}

fn claim(m: &MarketModel, name: &str, text: &str) -> Result<Claim, Failure> {
    claim_from_json(text, m.n()).map_err(|e| Failure::at(&format!("claims/{name}.json"), e))
}

pub fn run(which: Example) -> Result<Outcome, Failure> {
    if which != Example::All {
        return one(which);
    }
    let mut text = String::new();
    let mut body = Map::new();
    for e in EACH {
        let out = one(e)?;
        text.push_str(&out.text);
        text.push('\n');
        body.insert(e.key().into(), out.json);
    }
    Ok(Outcome::ok(text, Value::Object(body)))
}

fn one(which: Example) -> Result<Outcome, Failure> {
    let (title, out) = match which {
        Example::Table2 => ("Variance-optimal hedging, Table 1 model", table2()?),
        Example::Gap => ("Gap between integer and real superhedging prices", gap()?),
        Example::Sqrt2 => ("Price sets in the one-asset model with claims involving √2", sqrt2()?),
        Example::EmptyPi => ("Empty integer price set under NIA", empty_pi()?),
        Example::Dense => ("Extensions of the two-period model by a traded claim", dense()?),
        Example::NoCheapest => ("Integer superhedging without a cheapest hedge", no_cheapest()?),
        Example::Corollary => ("Zero-gain strategies with only the trivial integer point", corollary()?),
        Example::All => unreachable!("expanded by run"),
    };
    Ok(Outcome { text: format!("== {} ==\n{title}\n{}", which.key(), out.text), ..out })
}

fn table2() -> Result<Outcome, Failure> {
    let m = model("table1", TABLE1)?;
    let c = claim(&m, "table1", TABLE1_CLAIM)?;
    let q = m.probabilities.clone();
    varhedge_outcome(&m, &c, &q, "model probabilities", &TABLE2_COPIES, &ALL_METHODS)
}

fn gap() -> Result<Outcome, Failure> {
    let m = model("gap", GAP)?;
    let c = claim(&m, "gap", GAP_CLAIM)?;
    let ctx = m.context()?;
    let real = real_hedge(&m, &c, Direction::Super)?;
    let int_super = integer_hedge(&m, &c, Direction::Super, None)?;
    let int_sub = integer_hedge(&m, &c, Direction::Sub, None)?;
    let bound = gap_bound(&m)?;
    let (_, rows) = copies_scaling(&m, &c, &[1, 2, 3, 4, 5, 6])?;
    let mut text = format!(
        "sup Π(C) = {}\nσ_Z(C) = {}\nσ̂_Z(C) = {}\ngap bound = {}\nper-copy gap for N = 1..6:",
        show(&ctx, &real.price),
        show(&ctx, &int_super.price),
        show(&ctx, &int_sub.price),
        show(&ctx, &bound)
    );
    for r in &rows {
        text.push_str(&format!(" {}", show(&ctx, &r.gap)));
    }
    text.push('\n');
    let gaps: Vec<Value> = rows.iter().map(|r| json!({ "copies": r.copies, "gap": number(&ctx, &r.gap) })).collect();
    let body = json!({
        "sup": number(&ctx, &real.price),
        "integer_super": hedge_json(&ctx, &m, &int_super),
        "integer_sub": hedge_json(&ctx, &m, &int_sub),
        "gap_bound": number(&ctx, &bound),
        "copies": gaps,
    });
    Ok(Outcome::ok(text, body))
}

fn sqrt2() -> Result<Outcome, Failure> {
    let m = model("sqrt2", SQRT2)?;
    let ctx = m.context()?;
    let mut text = String::new();
    let mut body = Map::new();
    for (name, src) in SQRT2_CLAIMS {
        let c = claim(&m, &format!("c{name}"), src)?;
        let classical = classical_price_bounds(&m, &c)?;
        let nia = nia_price_interval(&m, &c, DEFAULT_RADIUS)?;
        text.push_str(&format!(
            "claim ({name}): classical {}, integer envelope {}\n",
            interval_text(&ctx, &classical),
            interval_text(&ctx, &nia)
        ));
        let mut ends = Vec::new();
        for (side, p) in [("lower", &classical.lo), ("upper", &classical.hi)] {
            let r = price_membership_t1(&m, &c, p, DEFAULT_RADIUS)?;
            text.push_str(&format!("  {side} endpoint "));
            text.push_str(&membership_text(&ctx, &m, &c, p, &r).replace('\n', "\n    ").trim_end());
            text.push('\n');
            ends.push(membership_json(&ctx, &m, &c, p, &r));
        }
        body.insert(
            format!("c{name}"),
            json!({
                "classical": interval_json(&ctx, &classical),
                "nia": interval_json(&ctx, &nia),
                "lower": ends[0],
                "upper": ends[1],
            }),
        );
    }
    Ok(Outcome::ok(text, Value::Object(body)))
}

fn empty_pi() -> Result<Outcome, Failure> {
    let m = model("empty_pi", EMPTY_PI)?;
    let c = claim(&m, "empty_pi", EMPTY_PI_CLAIM)?;
    let ctx = m.context()?;
    let nia = nia_check(&m, DEFAULT_RADIUS)?;
    let a_set = na_check(&m)?.profile.a_set;
    let iv = nia_price_interval(&m, &c, DEFAULT_RADIUS)?;
    let zero = Scalar::zero();
    let r = price_membership_t1(&m, &c, &zero, DEFAULT_RADIUS)?;
    let text = format!(
        "NIA {}; A = {}\ninteger envelope {}\nat {}",
        nia.verdict,
        state_set(&a_set),
        interval_text(&ctx, &iv),
        membership_text(&ctx, &m, &c, &zero, &r)
    );
    let body = json!({
        "nia": nia.verdict.to_string(),
        "a_set": state_names(&m, &a_set),
        "interval": interval_json(&ctx, &iv),
        "membership_at_zero": membership_json(&ctx, &m, &c, &zero, &r),
    });
    Ok(Outcome::ok(text, body))
}

fn dense() -> Result<Outcome, Failure> {
    let m = model("dense", DENSE)?;
    let c = claim(&m, "dense", DENSE_CLAIM)?;
    let mut text = String::new();
    let mut body = Map::new();
    for (label, src) in DENSE_PROCESSES {
        let x = process_from_json(src, m.n(), m.periods)?;
        let r = extension_nia_check(&m, &c, &x, DEFAULT_RADIUS)?;
        let ext = m.with_asset(intlot::market::Asset { name: "X".into(), prices: x });
        let ctx = ext.context()?;
        text.push_str(&format!("X₀ = {label}: NIA {}\n", r.verdict));
        text.push_str(&report_details(&ctx, &ext, &r));
        body.insert(label.into(), report_json(&ctx, &ext, &r));
    }
    Ok(Outcome::ok(text, Value::Object(body)))
}

fn no_cheapest() -> Result<Outcome, Failure> {
    let m = model("no_cheapest", NO_CHEAPEST)?;
    let c = claim(&m, "no_cheapest", NO_CHEAPEST_CLAIM)?;
    let ctx = m.context()?;
    let real = real_hedge(&m, &c, Direction::Super)?;
    let mut text = format!("sup Π(C) = {}\n", show(&ctx, &real.price));
    let mut rows = Vec::new();
    for r in NO_CHEAPEST_RADII {
        let h = integer_hedge(&m, &c, Direction::Super, Some(r))?;
        text.push_str(&format!("radius {r}: price {}, {}\n", show(&ctx, &h.price), h.status));
        text.push_str(&strategy_text(&ctx, &m, &h.strategy));
        rows.push(json!({ "radius": r, "price": number(&ctx, &h.price), "status": h.status.to_string(),
            "strategy": strategy_json(&ctx, &m, &h.strategy) }));
    }
    Ok(Outcome::ok(text, json!({ "sup": number(&ctx, &real.price), "radii": rows })))
}

fn corollary() -> Result<Outcome, Failure> {
    let m = model("corollary", COROLLARY)?;
    let ctx = m.context()?;
    let na = na_check(&m)?;
    let q = na.profile.witness_measure.clone().ok_or(intlot::Error::ModelHasArbitrage)?;
    let z = zero_gain_space(&m, &q, DEFAULT_RADIUS)?;
    let status = match &z.status {
        LatticeStatus::OnlyTrivialInteger => "only-trivial-integer".to_string(),
        LatticeStatus::NontrivialIntegerFound(_) => "nontrivial-integer-found".to_string(),
        LatticeStatus::UnknownWithinBudget => "unknown-within-budget".to_string(),
    };
    let mut text = format!("NA {}; zero-gain space of dimension {}\n", na.verdict, z.basis.len());
    for s in &z.basis {
        text.push_str(&strategy_text(&ctx, &m, s));
    }
    text.push_str(&format!("integer points: {status}\n"));
    let body = json!({
        "na": na.verdict.to_string(),
        "basis": z.basis.iter().map(|s| strategy_json(&ctx, &m, s)).collect::<Vec<_>>(),
        "lattice_status": status,
        "approx": z.approx,
    });
    Ok(Outcome::ok(text, body))
}
