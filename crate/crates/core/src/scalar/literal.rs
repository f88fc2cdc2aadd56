//! Literal grammar shared by model files and the CLI:
//! an integer, `"p/q"`, a decimal (float mode), or
//! `{"q": "p/q", "terms": {"pi": "u/v", "sqrt2": "r/s"}}`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde_json::{Map, Number, Value};

use super::{rational_from_f64, Result, Scalar, ScalarError};

fn parse_rational_text(s: &str) -> Result<BigRational> {
    let t = s.trim();
    let bad = || ScalarError::Parse(format!("`{s}` is not an integer or p/q fraction"));
    match t.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(ScalarError::DivisionByZero);
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(t.parse().map_err(|_| bad())?)),
    }
}

fn looks_decimal(s: &str) -> bool {
    let t = s.trim();
    (t.contains('.') || t.contains('e') || t.contains('E')) && t.parse::<f64>().is_ok()
}

/// Parses a scalar from plain text: integer, `p/q`, decimal, or a JSON object.
pub fn parse_literal_str(s: &str) -> Result<Scalar> {
    let t = s.trim();
    if t.starts_with('{') {
        let v: Value = serde_json::from_str(t).map_err(|e| ScalarError::Parse(e.to_string()))?;
        return parse_literal(&v);
    }
    if looks_decimal(t) {
        let x: f64 = t.parse().map_err(|_| ScalarError::Parse(t.to_string()))?;
        if !x.is_finite() {
            return Err(ScalarError::Parse(format!("`{t}` is not finite")));
        }
        return Ok(Scalar::Float(x));
    }
    parse_rational_text(t).map(Scalar::Rational)
}

fn exact_coefficient(v: &Value, what: &str) -> Result<BigRational> {
    match parse_literal(v)? {
        Scalar::Rational(r) => Ok(r),
        _ => Err(ScalarError::Parse(format!("{what} must be an exact rational"))),
    }
}

/// Parses a JSON literal value.
pub fn parse_literal(v: &Value) -> Result<Scalar> {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(Scalar::int(i))
            } else if let Some(u) = n.as_u64() {
                Ok(Scalar::from_bigint(BigInt::from(u)))
            } else {
                let x = n.as_f64().ok_or_else(|| ScalarError::Parse(n.to_string()))?;
                if x.fract() == 0.0 && !n.to_string().contains(['.', 'e', 'E']) {
                    Ok(Scalar::Rational(rational_from_f64(x).unwrap()))
                } else {
                    Ok(Scalar::Float(x))
                }
            }
        }
        Value::String(s) => parse_literal_str(s),
        Value::Object(map) => {
            for key in map.keys() {
                if key != "q" && key != "terms" {
                    return Err(ScalarError::Parse(format!("unexpected key `{key}` in scalar")));
                }
            }
            let q = match map.get("q") {
                Some(v) => exact_coefficient(v, "`q`")?,
                None => BigRational::zero(),
            };
            let mut terms = BTreeMap::new();
            match map.get("terms") {
                Some(Value::Object(t)) => {
                    for (name, c) in t {
                        terms.insert(name.clone(), exact_coefficient(c, "a term coefficient")?);
                    }
                }
                Some(_) => return Err(ScalarError::Parse("`terms` must be an object".into())),
                None => {}
            }
            Ok(Scalar::linear(q, terms))
        }
        _ => Err(ScalarError::Parse(format!("unsupported literal {v}"))),
    }
}

fn rational_to_json(r: &BigRational) -> Value {
    if r.is_integer() {
        if let Ok(i) = i64::try_from(r.numer().clone()) {
            return Value::Number(i.into());
        }
        return Value::String(r.numer().to_string());
    }
    Value::String(format!("{}/{}", r.numer(), r.denom()))
}

/// Canonical JSON rendering; [`parse_literal`] inverts it.
pub fn scalar_to_json(s: &Scalar) -> Value {
    match s {
        Scalar::Rational(r) => rational_to_json(r),
        Scalar::Float(x) => Number::from_f64(*x).map(Value::Number).unwrap_or(Value::Null),
        Scalar::LinearExt(l) => {
            let mut obj = Map::new();
            if !l.rational_part().is_zero() {
                obj.insert("q".into(), rational_to_json(l.rational_part()));
            }
            let terms: Map<String, Value> =
                l.terms().iter().map(|(k, v)| (k.clone(), rational_to_json(v))).collect();
            obj.insert("terms".into(), Value::Object(terms));
            Value::Object(obj)
        }
    }
}
