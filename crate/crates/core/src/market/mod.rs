//! Finite market models on scenario trees, trading strategies and values.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::lattice::{dist_pow_below, nearest_with_distance};
use crate::scalar::{ConstantTable, Mode, NumericContext, Scalar, Sign};

mod io;

pub use io::{claim_from_json, claim_to_json, measure_from_json, process_from_json};

/// Blocks of one partition of the state indices.
pub type Partition = Vec<Vec<usize>>;

#[derive(Debug, Clone, PartialEq)]
pub struct Asset {
    pub name: String,
    /// `prices[t][state]` for `t = 0..=T`.
    pub prices: Vec<Vec<Scalar>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarketModel {
    pub states: Vec<String>,
    pub probabilities: Vec<Scalar>,
    pub rate: Scalar,
    pub periods: usize,
    /// `filtration[t]` for `t = 0..=T`.
    pub filtration: Vec<Partition>,
    /// Extra constants beyond the shipped `pi` and `sqrt2`.
    pub constants: BTreeMap<String, String>,
    pub assets: Vec<Asset>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    DimensionMismatch(String),
    NotAPartition { t: usize },
    RootNotTrivial,
    NotRefining { t: usize },
    TerminalNotDiscrete,
    AdaptednessViolation { asset: usize, t: usize, block: usize },
    ZeroProbabilityState { state: usize },
    ProbabilitiesDoNotSumToOne,
    NegativePrice { asset: usize, t: usize, state: usize },
    RateNotAboveMinusOne,
    UnknownConstant(String),
    Undecidable(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DimensionMismatch(s) => write!(f, "dimension mismatch: {s}"),
            Violation::NotAPartition { t } => write!(f, "filtration[{t}] is not a partition of the states"),
            Violation::RootNotTrivial => write!(f, "filtration[0] must be the trivial partition"),
            Violation::NotRefining { t } => write!(f, "filtration[{t}] does not refine filtration[{}]", t - 1),
            Violation::TerminalNotDiscrete => write!(f, "filtration[T] must be the discrete partition"),
            Violation::AdaptednessViolation { asset, t, block } => {
                write!(f, "asset {asset} price at time {t} is not constant on block {block}")
            }
            Violation::ZeroProbabilityState { state } => write!(f, "state {state} has nonpositive probability"),
            Violation::ProbabilitiesDoNotSumToOne => write!(f, "probabilities do not sum to 1"),
            Violation::NegativePrice { asset, t, state } => {
                write!(f, "asset {asset} has a negative price at time {t} in state {state}")
            }
            Violation::RateNotAboveMinusOne => write!(f, "rate must exceed -1"),
            Violation::UnknownConstant(c) => write!(f, "unknown constant `{c}`"),
            Violation::Undecidable(s) => write!(f, "undecidable check: {s}"),
        }
    }
}

/// Node structure of a valid filtration.
#[derive(Debug, Clone)]
pub struct Tree {
    /// `block_of[t][state]` indexes `filtration[t]`.
    pub block_of: Vec<Vec<usize>>,
    /// `children[t][b]`: blocks of `filtration[t + 1]` inside block `b` of `filtration[t]`.
    pub children: Vec<Vec<Vec<usize>>>,
}

impl MarketModel {
    /// Builds a model with uniform probabilities and the default filtration.
    pub fn new(periods: usize, rate: Scalar, assets: Vec<Asset>, n: usize) -> MarketModel {
        let states: Vec<String> = (1..=n).map(|i| format!("w{i}")).collect();
        let mut m = MarketModel {
            states,
            probabilities: vec![Scalar::ratio(1, n as i64); n],
            rate,
            periods,
            filtration: Vec::new(),
            constants: BTreeMap::new(),
            assets,
        };
        m.filtration = m.default_filtration();
        m
    }

    /// One-period model from initial prices and per-state terminal prices.
    pub fn one_period(s0: Vec<Scalar>, s1: Vec<Vec<Scalar>>) -> MarketModel {
        let n = s1.len();
        let d = s0.len();
        let assets = (0..d)
            .map(|j| Asset {
                name: format!("S{}", j + 1),
                prices: vec![vec![s0[j].clone(); n], s1.iter().map(|row| row[j].clone()).collect()],
            })
            .collect();
        MarketModel::new(1, Scalar::zero(), assets, n)
    }

    pub fn n(&self) -> usize {
        self.states.len()
    }

    pub fn d(&self) -> usize {
        self.assets.len()
    }

    pub fn price(&self, asset: usize, t: usize, state: usize) -> &Scalar {
        &self.assets[asset].prices[t][state]
    }

    /// Trivial root, then blocks of states with identical price histories;
    /// the terminal partition is discrete.
    pub fn default_filtration(&self) -> Vec<Partition> {
        let n = self.n();
        let mut out = Vec::with_capacity(self.periods + 1);
        for t in 0..=self.periods {
            if t == 0 {
                out.push(vec![(0..n).collect()]);
            } else if t == self.periods {
                out.push((0..n).map(|i| vec![i]).collect());
            } else {
                let mut blocks: Vec<Vec<usize>> = Vec::new();
                for w in 0..n {
                    let same = |b: &Vec<usize>| {
                        let v = b[0];
                        self.assets.iter().all(|a| (0..=t).all(|s| a.prices[s][v] == a.prices[s][w]))
                    };
                    match blocks.iter_mut().find(|b| same(b)) {
                        Some(b) => b.push(w),
                        None => blocks.push(vec![w]),
                    }
                }
                out.push(blocks);
            }
        }
        out
    }

    pub fn has_float(&self) -> bool {
        self.rate.is_float()
            || self.probabilities.iter().any(Scalar::is_float)
            || self.assets.iter().any(|a| a.prices.iter().flatten().any(Scalar::is_float))
    }

    /// True when the rate and every price are rational.
    pub fn is_rational(&self) -> bool {
        let r = |s: &Scalar| s.as_rational().is_some();
        r(&self.rate) && self.assets.iter().all(|a| a.prices.iter().flatten().all(r))
    }

    /// Exact context carrying the model's constants, or a float context when
    /// any literal is a decimal.
    pub fn context(&self) -> Result<NumericContext> {
        let mut table = ConstantTable::default();
        for (name, digits) in &self.constants {
            table.insert(name, digits)?;
        }
        let base = if self.has_float() { NumericContext::float() } else { NumericContext::exact() };
        Ok(base.with_constants(table))
    }

    /// Node structure; fails when the filtration is not a refining sequence of partitions.
    pub fn tree(&self) -> Result<Tree> {
        let n = self.n();
        if self.filtration.len() != self.periods + 1 {
            return Err(Error::InvalidModel("filtration needs T + 1 partitions".into()));
        }
        let mut block_of = Vec::with_capacity(self.periods + 1);
        for (t, part) in self.filtration.iter().enumerate() {
            let mut idx = vec![usize::MAX; n];
            for (b, block) in part.iter().enumerate() {
                if block.is_empty() {
                    return Err(Error::InvalidModel(format!("filtration[{t}] has an empty block")));
                }
                for &w in block {
                    if w >= n || idx[w] != usize::MAX {
                        return Err(Error::InvalidModel(format!("filtration[{t}] is not a partition")));
                    }
                    idx[w] = b;
                }
            }
            if idx.contains(&usize::MAX) {
                return Err(Error::InvalidModel(format!("filtration[{t}] misses states")));
            }
            block_of.push(idx);
        }
        let mut children = Vec::with_capacity(self.periods);
        for t in 0..self.periods {
            let mut ch = vec![Vec::new(); self.filtration[t].len()];
            for (c, block) in self.filtration[t + 1].iter().enumerate() {
                let parent = block_of[t][block[0]];
                if block.iter().any(|&w| block_of[t][w] != parent) {
                    return Err(Error::InvalidModel(format!(
                        "filtration[{}] does not refine filtration[{t}]",
                        t + 1
                    )));
                }
                ch[parent].push(c);
            }
            children.push(ch);
        }
        Ok(Tree { block_of, children })
    }

    /// Riskless price `(1 + r)^t`.
    pub fn bank(&self, t: usize) -> Result<Scalar> {
        let base = Scalar::one().add(&self.rate)?;
        let mut acc = Scalar::one();
        for _ in 0..t {
            acc = acc.mul(&base)?;
        }
        Ok(acc)
    }

    pub fn discounted_payoff(&self, claim: &Claim) -> Result<Vec<Scalar>> {
        let b = self.bank(self.periods)?;
        claim.payoff.iter().map(|c| Ok(c.div(&b)?)).collect()
    }

    /// Copy of the model with an additional asset.
    pub fn with_asset(&self, asset: Asset) -> MarketModel {
        let mut m = self.clone();
        m.assets.push(asset);
        m
    }
}

/// Every violated model invariant, with its location.
pub fn validate_model(m: &MarketModel) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = m.n();
    if n == 0 {
        out.push(Violation::DimensionMismatch("no states".into()));
        return out;
    }
    if m.probabilities.len() != n {
        out.push(Violation::DimensionMismatch(format!("{} probabilities for {n} states", m.probabilities.len())));
    }
    for (j, a) in m.assets.iter().enumerate() {
        if a.prices.len() != m.periods + 1 || a.prices.iter().any(|row| row.len() != n) {
            out.push(Violation::DimensionMismatch(format!("asset {j} needs (T+1)×{n} prices")));
        }
    }
    if m.filtration.len() != m.periods + 1 {
        out.push(Violation::DimensionMismatch("filtration needs T + 1 partitions".into()));
    }
    if !out.is_empty() {
        return out;
    }
    let ctx = match m.context() {
        Ok(c) => c,
        Err(e) => {
            out.push(Violation::Undecidable(e.to_string()));
            return out;
        }
    };
    let known = |s: &Scalar| -> Option<String> {
        s.constant_names().into_iter().find(|c| !ctx.constants.contains(c)).map(str::to_string)
    };
    let all_scalars = std::iter::once(&m.rate)
        .chain(m.probabilities.iter())
        .chain(m.assets.iter().flat_map(|a| a.prices.iter().flatten()));
    let mut unknown: Vec<String> = all_scalars.filter_map(known).collect();
    unknown.sort();
    unknown.dedup();
    if !unknown.is_empty() {
        out.extend(unknown.into_iter().map(Violation::UnknownConstant));
        return out;
    }

    // Partitions.
    let mut partitions_ok = true;
    for (t, part) in m.filtration.iter().enumerate() {
        let mut seen = vec![false; n];
        let mut ok = true;
        for block in part {
            if block.is_empty() {
                ok = false;
            }
            for &w in block {
                if w >= n || seen[w] {
                    ok = false;
                } else {
                    seen[w] = true;
                }
            }
        }
        if !ok || seen.contains(&false) {
            out.push(Violation::NotAPartition { t });
            partitions_ok = false;
        }
    }
    if partitions_ok {
        if m.filtration[0].len() != 1 {
            out.push(Violation::RootNotTrivial);
        }
        if m.filtration[m.periods].len() != n {
            out.push(Violation::TerminalNotDiscrete);
        }
        for t in 1..=m.periods {
            let coarse = &m.filtration[t - 1];
            let refines = m.filtration[t]
                .iter()
                .all(|b| coarse.iter().any(|c| b.iter().all(|w| c.contains(w))));
            if !refines {
                out.push(Violation::NotRefining { t });
            }
        }
        for (j, a) in m.assets.iter().enumerate() {
            for t in 0..=m.periods {
                for (b, block) in m.filtration[t].iter().enumerate() {
                    let first = &a.prices[t][block[0]];
                    let same = block.iter().all(|&w| match ctx.cmp(&a.prices[t][w], first) {
                        Ok(s) => s == Sign::Zero,
                        Err(_) => false,
                    });
                    if !same {
                        out.push(Violation::AdaptednessViolation { asset: j, t, block: b });
                    }
                }
            }
        }
    }

    for (w, p) in m.probabilities.iter().enumerate() {
        match ctx.sign(p) {
            Ok(Sign::Positive) => {}
            Ok(_) => out.push(Violation::ZeroProbabilityState { state: w }),
            Err(e) => out.push(Violation::Undecidable(e.to_string())),
        }
    }
    let total = m.probabilities.iter().try_fold(Scalar::zero(), |acc, p| acc.add(p));
    match total.map_err(Error::from).and_then(|t| Ok(ctx.cmp(&t, &Scalar::one())?)) {
        Ok(Sign::Zero) => {}
        Ok(_) => out.push(Violation::ProbabilitiesDoNotSumToOne),
        Err(e) => out.push(Violation::Undecidable(e.to_string())),
    }
    for (j, a) in m.assets.iter().enumerate() {
        for (t, row) in a.prices.iter().enumerate() {
            for (w, s) in row.iter().enumerate() {
                match ctx.sign(s) {
                    Ok(Sign::Negative) => out.push(Violation::NegativePrice { asset: j, t, state: w }),
                    Ok(_) => {}
                    Err(e) => out.push(Violation::Undecidable(e.to_string())),
                }
            }
        }
    }
    match ctx.sign(&m.rate.add(&Scalar::one()).unwrap_or(Scalar::one())) {
        Ok(Sign::Positive) => {}
        Ok(_) => out.push(Violation::RateNotAboveMinusOne),
        Err(e) => out.push(Violation::Undecidable(e.to_string())),
    }
    out
}

/// Fails with the first violation, for callers that need a valid model.
pub fn require_valid(m: &MarketModel) -> Result<()> {
    match validate_model(m).first() {
        None => Ok(()),
        Some(v) => Err(Error::InvalidModel(v.to_string())),
    }
}

/// `ΔŜ[asset][t - 1][state]` for `t = 1..=T`.
pub type Gains = Vec<Vec<Vec<Scalar>>>;

pub fn discounted_gains(m: &MarketModel) -> Result<Gains> {
    let banks: Vec<Scalar> = (0..=m.periods).map(|t| m.bank(t)).collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(m.d());
    for a in &m.assets {
        let mut per = Vec::with_capacity(m.periods);
        for t in 1..=m.periods {
            let row = (0..m.n())
                .map(|w| {
                    let now = a.prices[t][w].div(&banks[t])?;
                    let before = a.prices[t - 1][w].div(&banks[t - 1])?;
                    Ok(now.sub(&before)?)
                })
                .collect::<Result<Vec<_>>>()?;
            per.push(row);
        }
        out.push(per);
    }
    Ok(out)
}

/// One-step gain vectors out of the node `(t, block)` of `filtration[t]`:
/// one entry per child block of `filtration[t + 1]`, each a vector over assets.
pub fn node_gains(gains: &Gains, m: &MarketModel, tree: &Tree, t: usize, block: usize) -> Vec<(usize, Vec<Scalar>)> {
    tree.children[t][block]
        .iter()
        .map(|&c| {
            let w = m.filtration[t + 1][c][0];
            (c, (0..m.d()).map(|j| gains[j][t][w].clone()).collect())
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Claim {
    pub payoff: Vec<Scalar>,
}

impl Claim {
    pub fn new(payoff: Vec<Scalar>) -> Claim {
        Claim { payoff }
    }

    pub fn scaled(&self, n: i64) -> Claim {
        let f = BigRational::from_integer(BigInt::from(n));
        Claim { payoff: self.payoff.iter().map(|c| c.scale(&f)).collect() }
    }

    pub fn negated(&self) -> Claim {
        Claim { payoff: self.payoff.iter().map(Scalar::neg).collect() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum StrategyClass {
    Integer,
    Rational,
    Real,
}

impl StrategyClass {
    pub fn name(self) -> &'static str {
        match self {
            StrategyClass::Integer => "integer",
            StrategyClass::Rational => "rational",
            StrategyClass::Real => "real",
        }
    }
}

/// Predictable risky positions; the bank leg follows from `initial_value`
/// and self-financing.
#[derive(Debug, Clone, PartialEq)]
pub struct Strategy {
    pub class: StrategyClass,
    /// `positions[t - 1][block of filtration[t - 1]][asset]` for `t = 1..=T`.
    pub positions: Vec<Vec<Vec<Scalar>>>,
    pub initial_value: Scalar,
}

impl Strategy {
    /// Checks the class tag against the entries.
    pub fn new(class: StrategyClass, positions: Vec<Vec<Vec<Scalar>>>, initial_value: Scalar) -> Result<Strategy> {
        let entries = positions.iter().flatten().flatten();
        let ok = match class {
            StrategyClass::Integer => entries.into_iter().all(Scalar::is_integer),
            StrategyClass::Rational => entries.into_iter().all(|s| s.as_rational().is_some()),
            StrategyClass::Real => true,
        };
        if !ok {
            return Err(Error::Input(format!("positions do not match class {}", class.name())));
        }
        Ok(Strategy { class, positions, initial_value })
    }

    pub fn zero(m: &MarketModel, initial_value: Scalar) -> Strategy {
        let positions = (0..m.periods)
            .map(|t| vec![vec![Scalar::zero(); m.d()]; m.filtration[t].len()])
            .collect();
        Strategy { class: StrategyClass::Integer, positions, initial_value }
    }

    /// The same positions at every node.
    pub fn constant(m: &MarketModel, class: StrategyClass, phi: &[Scalar], initial_value: Scalar) -> Result<Strategy> {
        let positions = (0..m.periods).map(|t| vec![phi.to_vec(); m.filtration[t].len()]).collect();
        Strategy::new(class, positions, initial_value)
    }

    /// `phi` at node `(t, block)` of `filtration[t]` (trading from `t` to
    /// `t + 1`), zero elsewhere.
    pub fn one_period(
        m: &MarketModel,
        class: StrategyClass,
        t: usize,
        block: usize,
        phi: &[Scalar],
        initial_value: Scalar,
    ) -> Result<Strategy> {
        let mut s = Strategy::zero(m, initial_value);
        s.positions[t][block] = phi.to_vec();
        s.class = class;
        Strategy::new(class, s.positions, s.initial_value)
    }

    /// Position of `asset` held over period `t` (`1..=T`) in `state`.
    pub fn position(&self, tree: &Tree, t: usize, state: usize, asset: usize) -> &Scalar {
        &self.positions[t - 1][tree.block_of[t - 1][state]][asset]
    }

    fn check_dims(&self, m: &MarketModel) -> Result<()> {
        if self.positions.len() != m.periods {
            return Err(Error::DimensionMismatch(format!(
                "strategy has {} periods, model {}",
                self.positions.len(),
                m.periods
            )));
        }
        for (t, nodes) in self.positions.iter().enumerate() {
            if nodes.len() != m.filtration[t].len() || nodes.iter().any(|p| p.len() != m.d()) {
                return Err(Error::DimensionMismatch(format!("period {} positions do not match the tree", t + 1)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValueProcess {
    /// `values[t][state]`.
    pub values: Vec<Vec<Scalar>>,
    pub discounted: Vec<Vec<Scalar>>,
}

fn dot_positions(phi: &[Scalar], prices: impl Iterator<Item = Scalar>) -> Result<Scalar> {
    let mut acc = Scalar::zero();
    for (p, s) in phi.iter().zip(prices) {
        if !p.is_exact_zero() && !s.is_exact_zero() {
            acc = acc.add(&p.mul(&s)?)?;
        }
    }
    Ok(acc)
}

/// Values by rolling the self-financing bank leg forward.
pub fn value_process(m: &MarketModel, s: &Strategy) -> Result<ValueProcess> {
    s.check_dims(m)?;
    let tree = m.tree()?;
    let n = m.n();
    let banks: Vec<Scalar> = (0..=m.periods).map(|t| m.bank(t)).collect::<Result<_>>()?;
    let mut values = vec![vec![s.initial_value.clone(); n]];
    let mut discounted = vec![vec![s.initial_value.clone(); n]];
    for w in 0..n {
        let prices = |t: usize| m.assets.iter().map(move |a| a.prices[t][w].clone());
        let phi1 = &s.positions[0][tree.block_of[0][w]];
        let mut bank_units = s.initial_value.sub(&dot_positions(phi1, prices(0))?)?;
        for t in 1..=m.periods {
            let phi = &s.positions[t - 1][tree.block_of[t - 1][w]];
            let v = bank_units.mul(&banks[t])?.add(&dot_positions(phi, prices(t))?)?;
            if t < m.periods {
                let next = &s.positions[t][tree.block_of[t][w]];
                bank_units = v.sub(&dot_positions(next, prices(t))?)?.div(&banks[t])?;
            }
            if values.len() <= t {
                values.push(vec![Scalar::zero(); n]);
                discounted.push(vec![Scalar::zero(); n]);
            }
            discounted[t][w] = v.div(&banks[t])?;
            values[t][w] = v;
        }
    }
    Ok(ValueProcess { values, discounted })
}

/// `V̂_t = V₀ + Σ_{k ≤ t} φ_k ΔŜ_k`.
pub fn discounted_values_by_gains(m: &MarketModel, s: &Strategy) -> Result<Vec<Vec<Scalar>>> {
    s.check_dims(m)?;
    let tree = m.tree()?;
    let gains = discounted_gains(m)?;
    let mut out = vec![vec![s.initial_value.clone(); m.n()]];
    for t in 1..=m.periods {
        let mut row = Vec::with_capacity(m.n());
        for w in 0..m.n() {
            let phi = &s.positions[t - 1][tree.block_of[t - 1][w]];
            let g = dot_positions(phi, gains.iter().map(|gj| gj[t - 1][w].clone()))?;
            row.push(out[t - 1][w].add(&g)?);
        }
        out.push(row);
    }
    Ok(out)
}

/// Least `N` with `N·φ` integral, and the scaled strategy.
pub fn clear_denominators(s: &Strategy) -> Result<(BigInt, Strategy)> {
    let mut l = BigInt::one();
    for p in s.positions.iter().flatten().flatten() {
        let r = p
            .as_rational()
            .ok_or_else(|| Error::NotRational("clear_denominators needs rational positions".into()))?;
        l = l.lcm(r.denom());
    }
    let f = BigRational::from_integer(l.clone());
    let positions = s
        .positions
        .iter()
        .map(|nodes| nodes.iter().map(|p| p.iter().map(|x| x.scale(&f)).collect()).collect())
        .collect();
    Ok((l, Strategy { class: StrategyClass::Integer, positions, initial_value: s.initial_value.scale(&f) }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArbitrageCheck {
    pub is_arbitrage: bool,
    pub terminal: Vec<Scalar>,
    pub initial: Scalar,
}

/// `V₀ ≤ 0`, `V_T ≥ 0` everywhere and `V_T > 0` somewhere.
pub fn verify_arbitrage(m: &MarketModel, s: &Strategy, ctx: &NumericContext) -> Result<ArbitrageCheck> {
    let vp = value_process(m, s)?;
    let terminal = vp.values[m.periods].clone();
    let mut ok = ctx.sign(&s.initial_value)? != Sign::Positive;
    let mut strict = false;
    for v in &terminal {
        match ctx.sign(v)? {
            Sign::Negative => ok = false,
            Sign::Positive => strict = true,
            Sign::Zero => {}
        }
    }
    Ok(ArbitrageCheck { is_arbitrage: ok && strict, terminal, initial: s.initial_value.clone() })
}

/// `ε^{-m}` strictly exceeded by the returned `q`, plus the integer
/// approximation `ψ` of `q·φ`; see [`crate::lattice::dirichlet_simultaneous`].
pub fn dirichlet_strategy_approx(
    m: &MarketModel,
    s: &Strategy,
    eps: &BigRational,
    ctx: &NumericContext,
) -> Result<(BigInt, Strategy)> {
    if !eps.is_positive() || *eps >= BigRational::one() {
        return Err(Error::Input("ε must lie in (0, 1)".into()));
    }
    s.check_dims(m)?;
    let exponent = (m.n() * m.d() * (m.periods + 1)) as u32;
    // Distinct position values; φ₀ := φ₁ adds nothing new.
    let mut alphas: Vec<Scalar> = Vec::new();
    for p in s.positions.iter().flatten().flatten() {
        if !alphas.contains(p) {
            alphas.push(p.clone());
        }
    }
    // q must satisfy q > ε^{-m}.
    let threshold = eps.recip().pow(exponent as i32);
    let first: BigInt = threshold.floor().to_integer() + 1;

    let q = if alphas.iter().all(|a| a.as_rational().is_some()) {
        let mut q0 = BigInt::one();
        for a in &alphas {
            q0 = q0.lcm(a.as_rational().unwrap().denom());
        }
        first.div_ceil(&q0) * &q0
    } else {
        const SCAN_CAP: u64 = 50_000_000;
        let mut q = first.clone();
        let mut found = None;
        for _ in 0..SCAN_CAP {
            let qs = Scalar::from_bigint(q.clone());
            let mut all = true;
            for a in &alphas {
                let (_, dist) = nearest_with_distance(&a.mul(&qs)?, ctx)?;
                // dist < q^{-1/m}  ⟺  dist^m · q < 1
                if !dist_pow_below(&dist, exponent, &BigRational::from_integer(q.clone()), ctx)? {
                    all = false;
                    break;
                }
            }
            if all {
                found = Some(q.clone());
                break;
            }
            q += 1;
        }
        found.ok_or_else(|| Error::SearchBudgetExceeded(format!("{first} + {SCAN_CAP}")))?
    };

    let qs = Scalar::from_bigint(q.clone());
    let positions = s
        .positions
        .iter()
        .map(|nodes| {
            nodes
                .iter()
                .map(|p| {
                    p.iter()
                        .map(|x| Ok(Scalar::from_bigint(nearest_with_distance(&x.mul(&qs)?, ctx)?.0)))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let initial_value = s.initial_value.mul(&qs)?;
    Ok((q, Strategy { class: StrategyClass::Integer, positions, initial_value }))
}

/// Mode of the model's arithmetic.
pub fn mode_of(m: &MarketModel) -> Mode {
    if m.has_float() {
        Mode::Float
    } else {
        Mode::Exact
    }
}
