//! One-period variance-optimal hedging in `L²(P*)`: the classical projection,
//! the integer hedge as a closest-vector problem and naive rounding.
//!
//! Quadratic forms leave the exact scalar field, so this module works in
//! binary64 once the inputs are validated.

use std::fmt::Write as _;

use num_traits::ToPrimitive;

use crate::arbitrage::check_martingale_measure;
use crate::error::{Error, Result};
use crate::lattice::{cvp_closest, LatticeBasis};
use crate::market::{discounted_gains, Claim, MarketModel};
use crate::scalar::{rational_from_f64, round_half_even_rational, Scalar, Sign};

/// Absolute tolerance for the orthogonality and zero-norm checks.
pub const TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarMethod {
    Classical,
    Cvp,
    Rounding,
}

pub const ALL_METHODS: [VarMethod; 3] = [VarMethod::Classical, VarMethod::Cvp, VarMethod::Rounding];

impl VarMethod {
    pub fn name(self) -> &'static str {
        match self {
            VarMethod::Classical => "classical",
            VarMethod::Cvp => "cvp",
            VarMethod::Rounding => "rounding",
        }
    }
}

#[derive(Debug, Clone)]
pub struct VarHedgeProblem {
    pub model: MarketModel,
    pub claim: Claim,
    /// Pricing measure `P*`, strictly positive martingale measure.
    pub measure: Vec<Scalar>,
    pub copies: u64,
    /// Weighted gain vectors `ΔŜ^j(ω)·√P*(ω)`, one per asset.
    generators: Vec<Vec<f64>>,
    /// `√P*`-weighted `C̃ = (C − E*[C])/(1+r)` for one copy.
    target: Vec<f64>,
    /// `E*[C]/(1+r)` for one copy.
    price: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarHedgeResult {
    pub method: VarMethod,
    pub positions: Vec<f64>,
    /// Integer positions for the CVP and rounding hedges.
    pub integer_positions: Option<Vec<i64>>,
    pub initial_value: f64,
    /// `‖N·C̃ − φΔŜ₁‖` in `L²(P*)`.
    pub residual: f64,
    /// `residual / ‖N·C̃‖`; 0 when the claim is constant.
    pub rmse: f64,
    /// `max_j |φ^j|`.
    pub position_size: f64,
    /// `‖N·C̃‖` vanished and `rmse` is reported as 0.
    pub zero_norm: bool,
}

impl VarHedgeProblem {
    pub fn new(model: &MarketModel, claim: &Claim, measure: &[Scalar], copies: u64) -> Result<VarHedgeProblem> {
        crate::market::require_valid(model)?;
        if model.periods != 1 {
            return Err(Error::NotOnePeriod);
        }
        if copies == 0 {
            return Err(Error::Input("number of copies must be positive".into()));
        }
        let n = model.n();
        if claim.payoff.len() != n {
            return Err(Error::DimensionMismatch(format!("claim has {} payoffs for {n} states", claim.payoff.len())));
        }
        let ctx = model.context()?;
        check_martingale_measure(model, measure)?;
        for (w, q) in measure.iter().enumerate() {
            if ctx.sign(q)? != Sign::Positive {
                return Err(Error::NotMartingaleMeasure(format!("mass at state {w} is not positive")));
            }
        }
        let floats = |v: &[Scalar]| v.iter().map(|x| Ok(ctx.to_f64(x)?)).collect::<Result<Vec<f64>>>();
        let q = floats(measure)?;
        let c_hat = floats(&model.discounted_payoff(claim)?)?;
        let gains = discounted_gains(model)?;
        let price: f64 = q.iter().zip(&c_hat).map(|(a, b)| a * b).sum();
        let sq: Vec<f64> = q.iter().map(|x| x.sqrt()).collect();
        let target = (0..n).map(|w| (c_hat[w] - price) * sq[w]).collect();
        let generators = gains
            .iter()
            .map(|g| Ok(floats(&g[0])?.iter().zip(&sq).map(|(x, s)| x * s).collect()))
            .collect::<Result<_>>()?;
        Ok(VarHedgeProblem {
            model: model.clone(),
            claim: claim.clone(),
            measure: measure.to_vec(),
            copies,
            generators,
            target,
            price,
        })
    }

    fn scaled_target(&self) -> Vec<f64> {
        let n = self.copies as f64;
        self.target.iter().map(|x| x * n).collect()
    }

    fn basis(&self) -> Result<LatticeBasis> {
        LatticeBasis::new(self.generators.clone())
    }

    fn result(&self, method: VarMethod, positions: Vec<f64>, integer_positions: Option<Vec<i64>>) -> VarHedgeResult {
        let target = self.scaled_target();
        let mut resid = target.clone();
        for (phi, g) in positions.iter().zip(&self.generators) {
            for (r, x) in resid.iter_mut().zip(g) {
                *r -= phi * x;
            }
        }
        let residual = norm(&resid);
        let denom = norm(&target);
        let zero_norm = denom <= TOLERANCE;
        VarHedgeResult {
            method,
            position_size: positions.iter().fold(0.0f64, |m, x| m.max(x.abs())),
            positions,
            integer_positions,
            initial_value: self.price * self.copies as f64,
            residual,
            rmse: if zero_norm { 0.0 } else { residual / denom },
            zero_norm,
        }
    }

    /// `P*`-weighted inner products of the classical residual with each gain.
    pub fn residual_correlations(&self, r: &VarHedgeResult) -> Vec<f64> {
        let target = self.scaled_target();
        let resid: Vec<f64> = (0..target.len())
            .map(|w| target[w] - r.positions.iter().zip(&self.generators).map(|(p, g)| p * g[w]).sum::<f64>())
            .collect();
        self.generators.iter().map(|g| g.iter().zip(&resid).map(|(a, b)| a * b).sum()).collect()
    }

    /// Lattice generators and target of the closest-vector formulation.
    pub fn lattice(&self) -> (Vec<Vec<f64>>, Vec<f64>) {
        (self.generators.clone(), self.scaled_target())
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn classical_positions(p: &VarHedgeProblem) -> Result<Vec<f64>> {
    // Solved for one copy and scaled, so that φ(N) = N·φ(1) holds bit for bit.
    let phi = p.basis()?.least_squares(&p.target)?;
    Ok(phi.iter().map(|x| x * p.copies as f64).collect())
}

/// Minimum-norm weighted least-squares hedge.
pub fn classical_var_hedge(p: &VarHedgeProblem) -> Result<VarHedgeResult> {
    Ok(p.result(VarMethod::Classical, classical_positions(p)?, None))
}

/// Integer hedge closest in `L²(P*)`, by LLL and Schnorr–Euchner enumeration.
pub fn integer_var_hedge(p: &VarHedgeProblem) -> Result<VarHedgeResult> {
    let cvp = cvp_closest(&p.basis()?, &p.scaled_target())?;
    let phi = cvp.coefficients.iter().map(|&x| x as f64).collect();
    Ok(p.result(VarMethod::Cvp, phi, Some(cvp.coefficients)))
}

/// Classical positions rounded half to even.
pub fn rounded_var_hedge(p: &VarHedgeProblem) -> Result<VarHedgeResult> {
    let ints = classical_positions(p)?
        .iter()
        .map(|&c| {
            let r = rational_from_f64(c).ok_or_else(|| Error::Input("non-finite position".into()))?;
            round_half_even_rational(&r).to_i64().ok_or_else(|| Error::Input("position out of range".into()))
        })
        .collect::<Result<Vec<i64>>>()?;
    let phi = ints.iter().map(|&x| x as f64).collect();
    Ok(p.result(VarMethod::Rounding, phi, Some(ints)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarHedgeRow {
    pub copies: u64,
    pub classical: VarHedgeResult,
    pub cvp: VarHedgeResult,
    pub rounding: VarHedgeResult,
}

impl VarHedgeRow {
    pub fn get(&self, method: VarMethod) -> &VarHedgeResult {
        match method {
            VarMethod::Classical => &self.classical,
            VarMethod::Cvp => &self.cvp,
            VarMethod::Rounding => &self.rounding,
        }
    }
}

/// All three hedges for each number of copies.
pub fn var_hedge_report(m: &MarketModel, claim: &Claim, measure: &[Scalar], copies: &[u64]) -> Result<Vec<VarHedgeRow>> {
    copies
        .iter()
        .map(|&n| {
            let p = VarHedgeProblem::new(m, claim, measure, n)?;
            Ok(VarHedgeRow {
                copies: n,
                classical: classical_var_hedge(&p)?,
                cvp: integer_var_hedge(&p)?,
                rounding: rounded_var_hedge(&p)?,
            })
        })
        .collect()
}

/// Aligned text table: one column per `N`, rMSE and position size for each
/// requested method.
pub fn render_report(rows: &[VarHedgeRow], methods: &[VarMethod]) -> String {
    let mut lines: Vec<(String, Vec<String>)> = vec![("N".into(), rows.iter().map(|r| r.copies.to_string()).collect())];
    for &method in methods {
        let (name, integral) = match method {
            VarMethod::Classical => ("classical", false),
            VarMethod::Cvp => ("CVP", true),
            VarMethod::Rounding => ("rounding", true),
        };
        let rmse = rows.iter().map(|r| format!("{:.3}", r.get(method).rmse)).collect();
        lines.push((format!("{name}: rMSE"), rmse));
        let size = rows
            .iter()
            .map(|r| {
                let s = r.get(method).position_size;
                if integral { format!("{s:.0}") } else { format!("{s:.3}") }
            })
            .collect();
        lines.push((format!("{name}: position size"), size));
    }
    let label_w = lines.iter().map(|(l, _)| l.chars().count()).max().unwrap_or(0);
    let col_w = lines.iter().flat_map(|(_, c)| c.iter().map(String::len)).max().unwrap_or(0);
    let mut out = String::new();
    for (label, cells) in &lines {
        let _ = write!(out, "{label:<label_w$}");
        for c in cells {
            let _ = write!(out, "  {c:>col_w$}");
        }
        out.push('\n');
    }
    out
}
