//! JSON model, claim, measure and price-process files.

use std::collections::BTreeMap;

use serde_json::{Map, Value};

use super::{Asset, Claim, MarketModel};
use crate::error::{Error, Result};
use crate::scalar::{parse_literal, scalar_to_json, Scalar};

fn input(path: &str, msg: impl std::fmt::Display) -> Error {
    Error::Input(format!("{path}: {msg}"))
}

fn parse_document(text: &str) -> Result<Value> {
    serde_json::from_str(text)
        .map_err(|e| Error::Input(format!("line {}, column {}: {e}", e.line(), e.column())))
}

fn object<'a>(v: &'a Value, path: &str, allowed: &[&str]) -> Result<&'a Map<String, Value>> {
    let obj = v.as_object().ok_or_else(|| input(path, "expected an object"))?;
    for key in obj.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(input(path, format!("unexpected key `{key}`")));
        }
    }
    Ok(obj)
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| input(path, "expected an array"))
}

fn literal(v: &Value, path: &str) -> Result<Scalar> {
    parse_literal(v).map_err(|e| input(path, e))
}

fn literal_row(v: &Value, path: &str, len: usize) -> Result<Vec<Scalar>> {
    let items = array(v, path)?;
    if items.len() != len {
        return Err(input(path, format!("expected {len} entries, found {}", items.len())));
    }
    items.iter().enumerate().map(|(i, x)| literal(x, &format!("{path}[{i}]"))).collect()
}

impl MarketModel {
    pub fn from_json_str(text: &str) -> Result<MarketModel> {
        MarketModel::from_json(&parse_document(text)?)
    }

    pub fn from_json(v: &Value) -> Result<MarketModel> {
        let obj = object(
            v,
            "model",
            &["states", "probabilities", "rate", "periods", "filtration", "constants", "assets"],
        )?;
        let get = |k: &str| obj.get(k).ok_or_else(|| input("model", format!("missing `{k}`")));

        let states: Vec<String> = array(get("states")?, "states")?
            .iter()
            .enumerate()
            .map(|(i, s)| s.as_str().map(str::to_string).ok_or_else(|| input(&format!("states[{i}]"), "expected a string")))
            .collect::<Result<_>>()?;
        let n = states.len();
        if n == 0 {
            return Err(input("states", "at least one state is required"));
        }
        for (i, s) in states.iter().enumerate() {
            if states[..i].contains(s) {
                return Err(input("states", format!("duplicate state `{s}`")));
            }
        }
        let periods = get("periods")?
            .as_u64()
            .filter(|&p| p >= 1)
            .ok_or_else(|| input("periods", "expected a positive integer"))? as usize;
        let rate = literal(get("rate")?, "rate")?;

        let mut constants = BTreeMap::new();
        if let Some(c) = obj.get("constants") {
            for (name, digits) in c.as_object().ok_or_else(|| input("constants", "expected an object"))? {
                let s = digits
                    .as_str()
                    .ok_or_else(|| input(&format!("constants.{name}"), "expected a decimal string"))?;
                constants.insert(name.clone(), s.to_string());
            }
        }

        let assets_v = array(get("assets")?, "assets")?;
        let mut assets = Vec::with_capacity(assets_v.len());
        for (j, a) in assets_v.iter().enumerate() {
            let path = format!("assets[{j}]");
            let ao = object(a, &path, &["name", "prices"])?;
            let name = ao
                .get("name")
                .and_then(Value::as_str)
                .ok_or_else(|| input(&path, "missing string `name`"))?
                .to_string();
            let rows = array(ao.get("prices").ok_or_else(|| input(&path, "missing `prices`"))?, &format!("{path}.prices"))?;
            if rows.len() != periods + 1 {
                return Err(input(&format!("{path}.prices"), format!("expected {} time rows", periods + 1)));
            }
            let prices = rows
                .iter()
                .enumerate()
                .map(|(t, r)| literal_row(r, &format!("{path}.prices[{t}]"), n))
                .collect::<Result<Vec<_>>>()?;
            assets.push(Asset { name, prices });
        }
        if assets.is_empty() {
            return Err(input("assets", "at least one risky asset is required"));
        }

        let mut m = MarketModel::new(periods, rate, assets, n);
        m.states = states;
        m.constants = constants;
        if let Some(p) = obj.get("probabilities") {
            m.probabilities = literal_row(p, "probabilities", n)?;
        }
        m.filtration = match obj.get("filtration") {
            Some(f) => {
                let parts = array(f, "filtration")?;
                if parts.len() != periods + 1 {
                    return Err(input("filtration", format!("expected {} partitions", periods + 1)));
                }
                parts
                    .iter()
                    .enumerate()
                    .map(|(t, part)| {
                        array(part, &format!("filtration[{t}]"))?
                            .iter()
                            .enumerate()
                            .map(|(b, block)| {
                                let path = format!("filtration[{t}][{b}]");
                                array(block, &path)?
                                    .iter()
                                    .map(|s| {
                                        let name = s.as_str().ok_or_else(|| input(&path, "expected state names"))?;
                                        m.states
                                            .iter()
                                            .position(|x| x == name)
                                            .ok_or_else(|| input(&path, format!("unknown state `{name}`")))
                                    })
                                    .collect::<Result<Vec<usize>>>()
                            })
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?
            }
            None => m.default_filtration(),
        };
        Ok(m)
    }

    /// Canonical rendering: uniform probabilities and the default filtration
    /// are omitted.
    pub fn to_json(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("states".into(), Value::Array(self.states.iter().map(|s| Value::String(s.clone())).collect()));
        let uniform = Scalar::ratio(1, self.n() as i64);
        if self.probabilities.iter().any(|p| *p != uniform) {
            obj.insert("probabilities".into(), Value::Array(self.probabilities.iter().map(scalar_to_json).collect()));
        }
        obj.insert("rate".into(), scalar_to_json(&self.rate));
        obj.insert("periods".into(), Value::from(self.periods as u64));
        if self.filtration != self.default_filtration() {
            let f = self
                .filtration
                .iter()
                .map(|part| {
                    Value::Array(
                        part.iter()
                            .map(|b| Value::Array(b.iter().map(|&w| Value::String(self.states[w].clone())).collect()))
                            .collect(),
                    )
                })
                .collect();
            obj.insert("filtration".into(), Value::Array(f));
        }
        if !self.constants.is_empty() {
            let c = self.constants.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
            obj.insert("constants".into(), Value::Object(c));
        }
        let assets = self
            .assets
            .iter()
            .map(|a| {
                let mut ao = Map::new();
                ao.insert("name".into(), Value::String(a.name.clone()));
                let rows = a
                    .prices
                    .iter()
                    .map(|row| Value::Array(row.iter().map(scalar_to_json).collect()))
                    .collect();
                ao.insert("prices".into(), Value::Array(rows));
                Value::Object(ao)
            })
            .collect();
        obj.insert("assets".into(), Value::Array(assets));
        Value::Object(obj)
    }
}

/// `{"payoff": [literal per state]}`.
pub fn claim_from_json(text: &str, n: usize) -> Result<Claim> {
    let v = parse_document(text)?;
    let obj = object(&v, "claim", &["payoff"])?;
    let payoff = literal_row(obj.get("payoff").ok_or_else(|| input("claim", "missing `payoff`"))?, "payoff", n)?;
    Ok(Claim { payoff })
}

pub fn claim_to_json(c: &Claim) -> Value {
    let mut obj = Map::new();
    obj.insert("payoff".into(), Value::Array(c.payoff.iter().map(scalar_to_json).collect()));
    Value::Object(obj)
}

/// `{"probabilities": [literal per state]}`.
pub fn measure_from_json(text: &str, n: usize) -> Result<Vec<Scalar>> {
    let v = parse_document(text)?;
    let obj = object(&v, "measure", &["probabilities"])?;
    literal_row(
        obj.get("probabilities").ok_or_else(|| input("measure", "missing `probabilities`"))?,
        "probabilities",
        n,
    )
}

/// `{"process": [[literal per state] per time 0..=T]}`.
pub fn process_from_json(text: &str, n: usize, periods: usize) -> Result<Vec<Vec<Scalar>>> {
    let v = parse_document(text)?;
    let obj = object(&v, "extension", &["process"])?;
    let rows = array(obj.get("process").ok_or_else(|| input("extension", "missing `process`"))?, "process")?;
    if rows.len() != periods + 1 {
        return Err(input("process", format!("expected {} time rows", periods + 1)));
    }
    rows.iter().enumerate().map(|(t, r)| literal_row(r, &format!("process[{t}]"), n)).collect()
}
