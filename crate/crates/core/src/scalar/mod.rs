//! Numeric tower: exact rationals, rational-linear combinations over declared
//! irrational constants, and tolerance-carrying floats.
//!
//! Exact values never leave the linear world. A product of two `LinearExt`
//! values is refused with [`ScalarError::Nonlinear`]; callers that need such a
//! product fall back to float evaluation and flag the result.

mod constants;
mod literal;

pub use literal::{parse_literal, parse_literal_str, scalar_to_json};

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, Sign as BigSign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Digits used for the first sign-evaluation attempt unless `INTLOT_PRECISION` says otherwise.
pub const DEFAULT_DIGITS: usize = 50;
/// Upper limit of the doubling escalation in [`NumericContext::sign`].
pub const MAX_DIGITS: usize = 1000;
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("cannot combine a float with a symbolic value")]
    MixedMode,
    #[error("product of two symbolic values is outside the linear tower")]
    Nonlinear,
    #[error("sign undecided after {0}-digit evaluation (near-dependency among constants)")]
    PrecisionExhausted(usize),
    #[error("unknown constant `{0}`")]
    UnknownConstant(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("invalid literal: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, ScalarError>;

/// `q + Σ coef·constant` with at least one nonzero coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinearExt {
    q: BigRational,
    terms: BTreeMap<String, BigRational>,
}

impl LinearExt {
    pub fn rational_part(&self) -> &BigRational {
        &self.q
    }

    pub fn terms(&self) -> &BTreeMap<String, BigRational> {
        &self.terms
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Rational(BigRational),
    LinearExt(LinearExt),
    Float(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn of_f64(x: f64, tol: f64) -> Sign {
        if x > tol {
            Sign::Positive
        } else if x < -tol {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Exact rational value of a finite binary64.
pub fn rational_from_f64(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // Huge numerator/denominator: shift both down before dividing.
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    let shift = (nb.max(db) - 1000).max(0) as usize;
    let n = (r.numer() >> shift).to_f64().unwrap_or(0.0);
    let d = (r.denom() >> shift).to_f64().unwrap_or(f64::INFINITY);
    n / d
}

impl Scalar {
    pub fn zero() -> Scalar {
        Scalar::Rational(BigRational::zero())
    }

    pub fn one() -> Scalar {
        Scalar::Rational(BigRational::one())
    }

    pub fn int(n: i64) -> Scalar {
        Scalar::Rational(rat_int(n))
    }

    pub fn ratio(n: i64, d: i64) -> Scalar {
        Scalar::Rational(rat(n, d))
    }

    pub fn from_bigint(n: BigInt) -> Scalar {
        Scalar::Rational(BigRational::from_integer(n))
    }

    /// The named constant itself, e.g. `Scalar::constant("pi")`.
    pub fn constant(name: &str) -> Scalar {
        let mut terms = BTreeMap::new();
        terms.insert(name.to_string(), BigRational::one());
        Scalar::LinearExt(LinearExt { q: BigRational::zero(), terms })
    }

    /// Canonicalising constructor: zero coefficients are dropped and an empty
    /// map collapses to a rational.
    pub fn linear(q: BigRational, terms: BTreeMap<String, BigRational>) -> Scalar {
        let terms: BTreeMap<_, _> = terms.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        if terms.is_empty() {
            Scalar::Rational(q)
        } else {
            Scalar::LinearExt(LinearExt { q, terms })
        }
    }

    pub fn is_float(&self) -> bool {
        matches!(self, Scalar::Float(_))
    }

    pub fn is_exact(&self) -> bool {
        !self.is_float()
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Scalar::Rational(r) => Some(r),
            _ => None,
        }
    }

    pub fn is_integer(&self) -> bool {
        matches!(self, Scalar::Rational(r) if r.is_integer())
    }

    /// Structural zero test; exact for the exact variants, `== 0.0` for floats.
    pub fn is_exact_zero(&self) -> bool {
        match self {
            Scalar::Rational(r) => r.is_zero(),
            Scalar::LinearExt(_) => false,
            Scalar::Float(x) => *x == 0.0,
        }
    }

    /// Constant names with nonzero coefficient.
    pub fn constant_names(&self) -> Vec<&str> {
        match self {
            Scalar::LinearExt(l) => l.terms.keys().map(|k| k.as_str()).collect(),
            _ => Vec::new(),
        }
    }

    /// Coordinates `(q, c_1, …, c_k)` with respect to `1` and the listed constants.
    /// Returns `None` for floats or when a constant outside `basis` occurs.
    pub fn components(&self, basis: &[String]) -> Option<Vec<BigRational>> {
        let mut out = vec![BigRational::zero(); basis.len() + 1];
        match self {
            Scalar::Rational(r) => out[0] = r.clone(),
            Scalar::LinearExt(l) => {
                out[0] = l.q.clone();
                for (name, c) in &l.terms {
                    let k = basis.iter().position(|b| b == name)?;
                    out[k + 1] = c.clone();
                }
            }
            Scalar::Float(_) => return None,
        }
        Some(out)
    }

    pub fn from_components(basis: &[String], comps: &[BigRational]) -> Scalar {
        let terms = basis.iter().cloned().zip(comps[1..].iter().cloned()).collect();
        Scalar::linear(comps[0].clone(), terms)
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Rational(r) => Scalar::Rational(-r),
            Scalar::LinearExt(l) => Scalar::LinearExt(LinearExt {
                q: -&l.q,
                terms: l.terms.iter().map(|(k, v)| (k.clone(), -v)).collect(),
            }),
            Scalar::Float(x) => Scalar::Float(-x),
        }
    }

    pub fn scale(&self, c: &BigRational) -> Scalar {
        match self {
            Scalar::Rational(r) => Scalar::Rational(r * c),
            Scalar::LinearExt(l) => Scalar::linear(
                &l.q * c,
                l.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
            ),
            Scalar::Float(x) => Scalar::Float(x * rational_to_f64(c)),
        }
    }

    pub fn add(&self, other: &Scalar) -> Result<Scalar> {
        scalar_add_scale(self, &BigRational::one(), other)
    }

    pub fn sub(&self, other: &Scalar) -> Result<Scalar> {
        scalar_add_scale(self, &-BigRational::one(), other)
    }

    /// Product, defined when at least one factor is rational or both are floats.
    pub fn mul(&self, other: &Scalar) -> Result<Scalar> {
        match (self, other) {
            (Scalar::Rational(a), b) => Ok(b.scale(a)),
            (a, Scalar::Rational(b)) => Ok(a.scale(b)),
            (Scalar::Float(a), Scalar::Float(b)) => Ok(Scalar::Float(a * b)),
            (Scalar::LinearExt(_), Scalar::LinearExt(_)) => Err(ScalarError::Nonlinear),
            _ => Err(ScalarError::MixedMode),
        }
    }

    /// Quotient, defined for rational or float divisors.
    pub fn div(&self, other: &Scalar) -> Result<Scalar> {
        match other {
            Scalar::Rational(b) => {
                if b.is_zero() {
                    Err(ScalarError::DivisionByZero)
                } else {
                    Ok(self.scale(&b.recip()))
                }
            }
            Scalar::Float(b) => match self {
                Scalar::LinearExt(_) => Err(ScalarError::MixedMode),
                _ if *b == 0.0 => Err(ScalarError::DivisionByZero),
                Scalar::Float(a) => Ok(Scalar::Float(a / b)),
                Scalar::Rational(a) => Ok(Scalar::Float(rational_to_f64(a) / b)),
            },
            Scalar::LinearExt(_) => Err(ScalarError::Nonlinear),
        }
    }

    /// Converts exact values to floats (constants evaluated through `ctx`).
    pub fn to_float(&self, ctx: &NumericContext) -> Result<Scalar> {
        Ok(Scalar::Float(ctx.to_f64(self)?))
    }
}

/// `a + c·b`, exact for exact inputs.
pub fn scalar_add_scale(a: &Scalar, c: &BigRational, b: &Scalar) -> Result<Scalar> {
    match (a, b) {
        (Scalar::Rational(x), Scalar::Rational(y)) => Ok(Scalar::Rational(x + c * y)),
        (Scalar::Float(x), Scalar::Float(y)) => Ok(Scalar::Float(x + rational_to_f64(c) * y)),
        (Scalar::Float(x), Scalar::Rational(y)) => {
            Ok(Scalar::Float(x + rational_to_f64(&(c * y))))
        }
        (Scalar::Rational(x), Scalar::Float(y)) => {
            Ok(Scalar::Float(rational_to_f64(x) + rational_to_f64(c) * y))
        }
        (Scalar::Float(_), _) | (_, Scalar::Float(_)) => Err(ScalarError::MixedMode),
        _ => {
            let (mut q, mut terms) = match a {
                Scalar::Rational(x) => (x.clone(), BTreeMap::new()),
                Scalar::LinearExt(l) => (l.q.clone(), l.terms.clone()),
                Scalar::Float(_) => unreachable!(),
            };
            match b {
                Scalar::Rational(y) => q += c * y,
                Scalar::LinearExt(l) => {
                    q += c * &l.q;
                    for (k, v) in &l.terms {
                        let e = terms.entry(k.clone()).or_insert_with(BigRational::zero);
                        *e += c * v;
                    }
                }
                Scalar::Float(_) => unreachable!(),
            }
            Ok(Scalar::linear(q, terms))
        }
    }
}

/// Sum of `coef_i · x_i` with rational-or-scalar coefficients; fails only on
/// nonlinear or mixed products.
pub fn dot(coefs: &[Scalar], xs: &[Scalar]) -> Result<Scalar> {
    let mut acc = Scalar::zero();
    for (c, x) in coefs.iter().zip(xs) {
        acc = acc.add(&c.mul(x)?)?;
    }
    Ok(acc)
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rational(r) => write!(f, "{r}"),
            Scalar::Float(x) => write!(f, "{x}"),
            Scalar::LinearExt(l) => {
                let mut first = true;
                if !l.q.is_zero() {
                    write!(f, "{}", l.q)?;
                    first = false;
                }
                for (name, c) in &l.terms {
                    let neg = c.is_negative();
                    let abs = c.abs();
                    if first {
                        if neg {
                            write!(f, "-")?;
                        }
                    } else {
                        write!(f, " {} ", if neg { '-' } else { '+' })?;
                    }
                    if abs.is_one() {
                        write!(f, "{name}")?;
                    } else {
                        write!(f, "{abs}*{name}")?;
                    }
                    first = false;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Float,
}

/// A constant's decimal expansion split into sign, integer digits and fraction digits.
#[derive(Debug, Clone)]
struct Expansion {
    negative: bool,
    int_digits: String,
    frac_digits: String,
}

impl Expansion {
    fn parse(s: &str) -> Option<Expansion> {
        let s = s.trim();
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (i, f) = body.split_once('.').unwrap_or((body, ""));
        if i.is_empty() || !i.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        if !f.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        Some(Expansion { negative, int_digits: i.to_string(), frac_digits: f.to_string() })
    }

    fn significant_digits(&self) -> usize {
        let lead = self.int_digits.trim_start_matches('0').len();
        if lead > 0 {
            lead + self.frac_digits.len()
        } else {
            self.frac_digits.trim_start_matches('0').len()
        }
    }

    /// `[lo, hi]` containing the constant, using `digits` fraction digits.
    fn enclose(&self, digits: usize) -> (BigRational, BigRational) {
        let d = digits.min(self.frac_digits.len());
        let mut s = self.int_digits.clone();
        s.push_str(&self.frac_digits[..d]);
        let t: BigInt = s.parse().expect("validated digits");
        let den = BigInt::from(10u32).pow(d as u32);
        let lo = BigRational::new(t.clone(), den.clone());
        let hi = BigRational::new(t + 1, den);
        if self.negative {
            (-hi, -lo)
        } else {
            (lo, hi)
        }
    }
}

/// Table of declared constants. The defaults `pi` and `sqrt2` carry 1010 digits.
#[derive(Debug, Clone)]
pub struct ConstantTable {
    entries: BTreeMap<String, Expansion>,
}

impl Default for ConstantTable {
    fn default() -> Self {
        let mut entries = BTreeMap::new();
        entries.insert("pi".to_string(), Expansion::parse(constants::PI).unwrap());
        entries.insert("sqrt2".to_string(), Expansion::parse(constants::SQRT2).unwrap());
        ConstantTable { entries }
    }
}

impl ConstantTable {
    /// Adds or replaces a constant. Requires at least 50 significant digits.
    pub fn insert(&mut self, name: &str, decimal: &str) -> Result<()> {
        let e = Expansion::parse(decimal)
            .ok_or_else(|| ScalarError::Parse(format!("constant `{name}`: not a decimal expansion")))?;
        if e.significant_digits() < 50 {
            return Err(ScalarError::Parse(format!(
                "constant `{name}` needs at least 50 significant digits"
            )));
        }
        self.entries.insert(name.to_string(), e);
        Ok(())
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(|k| k.as_str())
    }

    /// The stored expansion text of a constant.
    pub fn expansion(&self, name: &str) -> Option<String> {
        self.entries.get(name).map(|e| {
            let mut s = String::new();
            if e.negative {
                s.push('-');
            }
            s.push_str(&e.int_digits);
            if !e.frac_digits.is_empty() {
                s.push('.');
                s.push_str(&e.frac_digits);
            }
            s
        })
    }

    fn available_digits(&self, name: &str) -> Result<usize> {
        self.entries
            .get(name)
            .map(|e| e.frac_digits.len())
            .ok_or_else(|| ScalarError::UnknownConstant(name.to_string()))
    }
}

/// Sign/rounding context shared by every analysis.
#[derive(Debug, Clone)]
pub struct NumericContext {
    pub mode: Mode,
    pub tolerance: f64,
    pub constants: Arc<ConstantTable>,
    /// Digits of the first evaluation attempt in exact sign decisions.
    pub base_digits: usize,
    /// The model author asserts `{1} ∪ constants` is rationally independent.
    pub independent: bool,
}

impl Default for NumericContext {
    fn default() -> Self {
        NumericContext::exact()
    }
}

impl NumericContext {
    pub fn exact() -> Self {
        let base_digits = std::env::var("INTLOT_PRECISION")
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&d| d > 0)
            .unwrap_or(DEFAULT_DIGITS)
            .min(MAX_DIGITS);
        NumericContext {
            mode: Mode::Exact,
            tolerance: DEFAULT_TOLERANCE,
            constants: Arc::new(ConstantTable::default()),
            base_digits,
            independent: true,
        }
    }

    pub fn float() -> Self {
        NumericContext { mode: Mode::Float, ..NumericContext::exact() }
    }

    pub fn with_constants(mut self, table: ConstantTable) -> Self {
        self.constants = Arc::new(table);
        self
    }

    /// Rational enclosure of `a` using `digits` fraction digits of every constant.
    pub fn enclose(&self, a: &Scalar, digits: usize) -> Result<(BigRational, BigRational)> {
        match a {
            Scalar::Rational(r) => Ok((r.clone(), r.clone())),
            Scalar::Float(x) => {
                let r = rational_from_f64(*x)
                    .ok_or_else(|| ScalarError::Parse(format!("non-finite float {x}")))?;
                Ok((r.clone(), r))
            }
            Scalar::LinearExt(l) => {
                let mut lo = l.q.clone();
                let mut hi = l.q.clone();
                for (name, c) in &l.terms {
                    let e = self
                        .constants
                        .entries
                        .get(name)
                        .ok_or_else(|| ScalarError::UnknownConstant(name.clone()))?;
                    let (clo, chi) = e.enclose(digits);
                    if c.is_positive() {
                        lo += c * &clo;
                        hi += c * &chi;
                    } else {
                        lo += c * &chi;
                        hi += c * &clo;
                    }
                }
                Ok((lo, hi))
            }
        }
    }

    fn digit_cap(&self, l: &LinearExt) -> Result<usize> {
        let mut cap = MAX_DIGITS;
        for name in l.terms.keys() {
            cap = cap.min(self.constants.available_digits(name)?);
        }
        Ok(cap)
    }

    /// Exact sign for exact values, tolerance test for floats.
    pub fn sign(&self, a: &Scalar) -> Result<Sign> {
        match a {
            Scalar::Rational(r) => Ok(match r.numer().sign() {
                BigSign::Minus => Sign::Negative,
                BigSign::NoSign => Sign::Zero,
                BigSign::Plus => Sign::Positive,
            }),
            Scalar::Float(x) => Ok(Sign::of_f64(*x, self.tolerance)),
            Scalar::LinearExt(l) => {
                let cap = self.digit_cap(l)?;
                let mut digits = self.base_digits.min(cap);
                loop {
                    let (lo, hi) = self.enclose(a, digits)?;
                    if lo.is_positive() {
                        return Ok(Sign::Positive);
                    }
                    if hi.is_negative() {
                        return Ok(Sign::Negative);
                    }
                    if digits >= cap {
                        return Err(ScalarError::PrecisionExhausted(digits));
                    }
                    digits = (digits * 2).min(cap);
                }
            }
        }
    }

    pub fn cmp(&self, a: &Scalar, b: &Scalar) -> Result<Sign> {
        self.sign(&a.sub(b)?)
    }

    pub fn is_zero(&self, a: &Scalar) -> Result<bool> {
        Ok(self.sign(a)? == Sign::Zero)
    }

    pub fn is_positive(&self, a: &Scalar) -> Result<bool> {
        Ok(self.sign(a)? == Sign::Positive)
    }

    pub fn is_negative(&self, a: &Scalar) -> Result<bool> {
        Ok(self.sign(a)? == Sign::Negative)
    }

    pub fn to_f64(&self, a: &Scalar) -> Result<f64> {
        match a {
            Scalar::Rational(r) => Ok(rational_to_f64(r)),
            Scalar::Float(x) => Ok(*x),
            Scalar::LinearExt(_) => {
                let (lo, hi) = self.enclose(a, 30)?;
                Ok(rational_to_f64(&((lo + hi) / rat_int(2))))
            }
        }
    }

    /// Absolute value, exact where the sign is decidable.
    pub fn abs(&self, a: &Scalar) -> Result<Scalar> {
        Ok(if self.sign(a)? == Sign::Negative { a.neg() } else { a.clone() })
    }

    pub fn max(&self, a: &Scalar, b: &Scalar) -> Result<Scalar> {
        Ok(if self.cmp(a, b)? == Sign::Negative { b.clone() } else { a.clone() })
    }

    pub fn min(&self, a: &Scalar, b: &Scalar) -> Result<Scalar> {
        Ok(if self.cmp(a, b)? == Sign::Positive { b.clone() } else { a.clone() })
    }

    /// `⌊a⌋`, exact for exact inputs.
    pub fn floor(&self, a: &Scalar) -> Result<BigInt> {
        match a {
            Scalar::Rational(r) => Ok(r.floor().to_integer()),
            Scalar::Float(x) => rational_from_f64(*x)
                .map(|r| r.floor().to_integer())
                .ok_or_else(|| ScalarError::Parse(format!("non-finite float {x}"))),
            Scalar::LinearExt(l) => {
                // A nonzero combination of independent irrationals is never an integer,
                // so the enclosure separates from the integers once tight enough.
                let cap = self.digit_cap(l)?;
                let mut digits = self.base_digits.min(cap);
                loop {
                    let (lo, hi) = self.enclose(a, digits)?;
                    let fl = lo.floor().to_integer();
                    if hi.floor().to_integer() == fl {
                        return Ok(fl);
                    }
                    if digits >= cap {
                        return Err(ScalarError::PrecisionExhausted(digits));
                    }
                    digits = (digits * 2).min(cap);
                }
            }
        }
    }

    /// Nearest integer; exact halves round to even.
    pub fn round_half_even(&self, a: &Scalar) -> Result<BigInt> {
        match a {
            Scalar::Rational(r) => Ok(round_half_even_rational(r)),
            Scalar::Float(x) => {
                let r = rational_from_f64(*x)
                    .ok_or_else(|| ScalarError::Parse(format!("non-finite float {x}")))?;
                Ok(round_half_even_rational(&r))
            }
            Scalar::LinearExt(_) => {
                let half = Scalar::Rational(rat(1, 2));
                self.floor(&a.add(&half)?)
            }
        }
    }

    /// Decimal string with `digits` significant digits, correctly rounded.
    pub fn to_decimal(&self, a: &Scalar, digits: usize) -> Result<String> {
        if digits == 0 || digits > MAX_DIGITS {
            return Err(ScalarError::Parse(format!("digit count {digits} outside 1..={MAX_DIGITS}")));
        }
        match a {
            Scalar::Rational(r) => Ok(decimal_rounded(r, digits)),
            Scalar::Float(x) => {
                let r = rational_from_f64(*x)
                    .ok_or_else(|| ScalarError::Parse(format!("non-finite float {x}")))?;
                Ok(decimal_rounded(&r, digits))
            }
            Scalar::LinearExt(l) => {
                let cap = self.digit_cap(l)?;
                let mut work = (digits + 10).min(cap);
                loop {
                    let (lo, hi) = self.enclose(a, work)?;
                    let slo = decimal_rounded(&lo, digits);
                    if slo == decimal_rounded(&hi, digits) {
                        return Ok(slo);
                    }
                    if work >= cap {
                        return Err(ScalarError::PrecisionExhausted(work));
                    }
                    work = (work * 2).min(cap);
                }
            }
        }
    }
}

pub fn round_half_even_rational(r: &BigRational) -> BigInt {
    let fl = r.floor().to_integer();
    let frac = r - BigRational::from_integer(fl.clone());
    let half = rat(1, 2);
    if frac > half || (frac == half && fl.is_odd()) {
        fl + 1
    } else {
        fl
    }
}

/// `⌊log10 |r|⌋` for nonzero `r`.
fn decimal_exponent(r: &BigRational) -> i64 {
    let a = r.abs();
    let ten = BigRational::from_integer(BigInt::from(10));
    let mut e = a.numer().to_string().len() as i64 - a.denom().to_string().len() as i64;
    let pow = |k: i64| -> BigRational {
        if k >= 0 {
            BigRational::from_integer(BigInt::from(10).pow(k as u32))
        } else {
            BigRational::new(BigInt::one(), BigInt::from(10).pow((-k) as u32))
        }
    };
    while pow(e) > a {
        e -= 1;
    }
    while pow(e) * &ten <= a {
        e += 1;
    }
    e
}

/// Rounds to `digits` significant digits (half to even) and renders positionally.
fn decimal_rounded(r: &BigRational, digits: usize) -> String {
    if r.is_zero() {
        return "0".to_string();
    }
    let mut e = decimal_exponent(r);
    let scale_pow = digits as i64 - 1 - e;
    let scale = if scale_pow >= 0 {
        BigRational::from_integer(BigInt::from(10).pow(scale_pow as u32))
    } else {
        BigRational::new(BigInt::one(), BigInt::from(10).pow((-scale_pow) as u32))
    };
    let mut n = round_half_even_rational(&(r.abs() * scale));
    let limit = BigInt::from(10).pow(digits as u32);
    if n >= limit {
        n /= 10;
        e += 1;
    }
    let s = n.to_string();
    let point = e + 1;
    let body = if point <= 0 {
        format!("0.{}{}", "0".repeat((-point) as usize), s)
    } else if point as usize >= s.len() {
        format!("{}{}", s, "0".repeat(point as usize - s.len()))
    } else {
        format!("{}.{}", &s[..point as usize], &s[point as usize..])
    };
    if r.is_negative() {
        format!("-{body}")
    } else {
        body
    }
}

#[cfg(test)]
mod tests;
