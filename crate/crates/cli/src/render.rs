//! Text and JSON renderings shared by the commands.

use intlot::market::{MarketModel, Strategy};
use intlot::scalar::scalar_to_json;
use intlot::{NumericContext, Scalar};
use serde_json::{json, Value};

/// Significant digits of decimal approximations in reports.
pub const DIGITS: usize = 12;

pub fn decimal(ctx: &NumericContext, s: &Scalar) -> String {
    match ctx.to_decimal(s, DIGITS) {
        Ok(d) => d,
        Err(_) => ctx.to_f64(s).map_or_else(|_| "?".into(), |x| format!("{x:e}")),
    }
}

/// Exact form, with a decimal approximation when the value is not a plain rational.
pub fn show(ctx: &NumericContext, s: &Scalar) -> String {
    match s {
        Scalar::Rational(_) => s.to_string(),
        Scalar::Float(x) => format!("{x}"),
        Scalar::LinearExt(_) => format!("{s} ≈ {}", decimal(ctx, s)),
    }
}

pub fn number(ctx: &NumericContext, s: &Scalar) -> Value {
    json!({ "exact": scalar_to_json(s), "decimal": decimal(ctx, s) })
}

pub fn numbers(ctx: &NumericContext, v: &[Scalar]) -> Value {
    Value::Array(v.iter().map(|s| number(ctx, s)).collect())
}

pub fn tuple(ctx: &NumericContext, v: &[Scalar]) -> String {
    let items: Vec<String> = v.iter().map(|s| show(ctx, s)).collect();
    format!("({})", items.join(", "))
}

/// `ω₃`-style name for a 0-based state index.
pub fn omega(i: usize) -> String {
    const SUB: [char; 10] = ['₀', '₁', '₂', '₃', '₄', '₅', '₆', '₇', '₈', '₉'];
    let digits: String = (i + 1).to_string().chars().map(|c| SUB[c.to_digit(10).unwrap() as usize]).collect();
    format!("ω{digits}")
}

pub fn state_set(states: &[usize]) -> String {
    if states.is_empty() {
        return "∅".into();
    }
    let names: Vec<String> = states.iter().map(|&w| omega(w)).collect();
    format!("{{{}}}", names.join(", "))
}

pub fn state_names(m: &MarketModel, states: &[usize]) -> Value {
    Value::Array(states.iter().map(|&w| Value::String(m.states[w].clone())).collect())
}

/// Bank units held over the first period: `V₀ − φ·S₀` (the bank starts at 1).
pub fn bank_at_start(m: &MarketModel, s: &Strategy) -> Option<Scalar> {
    let phi = s.positions.first()?.first()?;
    let mut cash = s.initial_value.clone();
    for (p, a) in phi.iter().zip(&m.assets) {
        cash = cash.sub(&p.mul(&a.prices[0][0]).ok()?).ok()?;
    }
    Some(cash)
}

/// Holdings `(bank, S¹, …, Sᵈ)` over the first period.
pub fn first_holdings(m: &MarketModel, s: &Strategy) -> Option<Vec<Scalar>> {
    let mut out = vec![bank_at_start(m, s)?];
    out.extend(s.positions.first()?.first()?.iter().cloned());
    Some(out)
}

pub fn strategy_json(ctx: &NumericContext, m: &MarketModel, s: &Strategy) -> Value {
    let periods: Vec<Value> = s
        .positions
        .iter()
        .enumerate()
        .map(|(t, nodes)| {
            Value::Array(
                nodes
                    .iter()
                    .enumerate()
                    .map(|(b, phi)| json!({ "states": state_names(m, &m.filtration[t][b]), "positions": numbers(ctx, phi) }))
                    .collect(),
            )
        })
        .collect();
    let mut v = json!({
        "class": s.class.name(),
        "assets": m.assets.iter().map(|a| a.name.clone()).collect::<Vec<_>>(),
        "initial_value": number(ctx, &s.initial_value),
        "periods": periods,
    });
    if let Some(h) = first_holdings(m, s) {
        v["first_holdings"] = numbers(ctx, &h);
    }
    v
}

/// Indented lines describing a strategy.
pub fn strategy_text(ctx: &NumericContext, m: &MarketModel, s: &Strategy) -> String {
    let mut out = String::new();
    let names: Vec<&str> = m.assets.iter().map(|a| a.name.as_str()).collect();
    out.push_str(&format!("  class {}, initial value {}\n", s.class.name(), show(ctx, &s.initial_value)));
    if m.periods == 1 {
        if let Some(h) = first_holdings(m, s) {
            out.push_str(&format!("  holdings (bank, {}) = {}\n", names.join(", "), tuple(ctx, &h)));
            return out;
        }
    }
    for (t, nodes) in s.positions.iter().enumerate() {
        for (b, phi) in nodes.iter().enumerate() {
            let block = state_set(&m.filtration[t][b]);
            out.push_str(&format!("  period {} on {block}: ({}) = {}\n", t + 1, names.join(", "), tuple(ctx, phi)));
        }
    }
    out
}
