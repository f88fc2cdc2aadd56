//! `intlot`: integer-constrained arbitrage, pricing and hedging on finite
//! scenario trees.
//!
//! ```text
//! intlot check models/empty_pi.json --property nia
//! intlot price models/sqrt2.json claims/ci.json --member "{terms:{sqrt2:'1'}}"
//! intlot hedge models/gap.json claims/gap.json --class integer
//! intlot varhedge models/table1.json claims/table1.json --copies 1,5,10
//! intlot examples table2
//! ```
//!
//! Exit codes: 0 success or property holds, 2 input error, 3 property fails
//! (arbitrage exists, price not a member), 4 inconclusive within the search
//! budget, 5 internal invariant violation.

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

mod commands;
mod examples;
mod matrix;
mod render;

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_FAILS: u8 = 3;
pub const EXIT_INCONCLUSIVE: u8 = 4;
pub const EXIT_INTERNAL: u8 = 5;

/// Version of the machine-readable output.
pub const SCHEMA: u64 = 1;

#[derive(Parser, Debug)]
#[command(name = "intlot", version, about = "Arbitrage, pricing and hedging with integer trading constraints")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide NA, NIA or NIFL for a model.
    Check(CheckArgs),
    /// Price bounds, price-set membership and extension checks for a claim.
    Price(PriceArgs),
    /// Super- and subhedges in the real, rational or integer class.
    Hedge(HedgeArgs),
    /// One-period variance-optimal hedges (classical, CVP, rounding).
    Varhedge(VarhedgeArgs),
    /// Lattice utilities on plain-text matrices.
    Lattice {
        #[command(subcommand)]
        op: LatticeOp,
    },
    /// Reproduce the bundled examples.
    Examples(ExamplesArgs),
}

#[derive(Args, Debug)]
pub struct Output {
    /// Machine-readable JSON instead of text.
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    pub model: String,
    #[arg(long, value_enum, default_value_t = PropertyArg::Nia)]
    pub property: PropertyArg,
    /// Integer search radius per period.
    #[arg(long)]
    pub radius: Option<u32>,
    #[command(flatten)]
    pub out: Output,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum PropertyArg {
    Na,
    Nia,
    Nifl,
}

#[derive(Args, Debug)]
pub struct PriceArgs {
    pub model: String,
    pub claim: String,
    /// Decide whether this price lies in the integer price set (one period).
    /// Accepts an integer, `p/q`, a decimal or a JSON5 literal object.
    #[arg(long, conflicts_with = "extension")]
    pub member: Option<String>,
    /// Price-process file for the claim; checks NIA of the extended market.
    #[arg(long)]
    pub extension: Option<String>,
    #[arg(long)]
    pub radius: Option<u32>,
    #[command(flatten)]
    pub out: Output,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum DirectionArg {
    Super,
    Sub,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClassArg {
    Real,
    Rational,
    Integer,
}

#[derive(Args, Debug)]
pub struct HedgeArgs {
    pub model: String,
    pub claim: String,
    #[arg(long, value_enum, default_value_t = DirectionArg::Super)]
    pub direction: DirectionArg,
    /// Strategy class; defaults to real, or rational with --denom-bound.
    #[arg(long, value_enum)]
    pub class: Option<ClassArg>,
    /// Integer search radius (integer class).
    #[arg(long)]
    pub radius: Option<u32>,
    /// Denominator bound N for the rational superhedge.
    #[arg(long)]
    pub denom_bound: Option<u64>,
    /// Tolerance of the rational hedge without a denominator bound.
    #[arg(long)]
    pub epsilon: Option<String>,
    /// Integer superhedges of N copies, per-copy price against sup Π.
    #[arg(long, value_delimiter = ',')]
    pub copies: Option<Vec<u64>>,
    #[command(flatten)]
    pub out: Output,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodArg {
    All,
    Classical,
    Cvp,
    Round,
}

#[derive(Args, Debug)]
pub struct VarhedgeArgs {
    pub model: String,
    pub claim: String,
    /// Pricing measure file `{"probabilities": [...]}`.
    #[arg(long)]
    pub measure: Option<String>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub copies: Vec<u64>,
    #[arg(long, value_enum, default_value_t = MethodArg::All)]
    pub method: MethodArg,
    #[command(flatten)]
    pub out: Output,
}

#[derive(Subcommand, Debug)]
pub enum LatticeOp {
    /// LLL-reduce the rows of a matrix file.
    Lll {
        basis: String,
        #[arg(long, default_value_t = 0.99)]
        delta: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Closest lattice vector to a target.
    Cvp {
        basis: String,
        target: String,
        #[arg(long, value_enum, default_value_t = CvpMethod::Closest)]
        method: CvpMethod,
        /// Box radius for the brute-force method.
        #[arg(long, default_value_t = 20)]
        radius: u32,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum CvpMethod {
    Closest,
    Babai,
    Bruteforce,
}

#[derive(Args, Debug)]
pub struct ExamplesArgs {
    #[arg(value_enum, default_value_t = examples::Example::All)]
    pub name: examples::Example,
    #[command(flatten)]
    pub out: Output,
}

/// Report of one command: text and JSON renderings plus the exit code.
pub struct Outcome {
    pub code: u8,
    pub text: String,
    pub json: Value,
}

impl Outcome {
    pub fn ok(text: String, json: Value) -> Outcome {
        Outcome { code: EXIT_OK, text, json }
    }
}

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Failure {
        Failure { code: EXIT_INPUT, message: message.into() }
    }

    /// Error from `path`, with the file named in the message.
    pub fn at(path: &str, e: intlot::Error) -> Failure {
        let f = Failure::from(e);
        Failure { message: format!("{path}: {}", f.message), ..f }
    }
}

impl From<intlot::Error> for Failure {
    fn from(e: intlot::Error) -> Failure {
        use intlot::linprog::LpError;
        use intlot::{Error, ScalarError};
        let code = match &e {
            Error::ModelHasArbitrage | Error::ModelHasIntegerArbitrage => EXIT_FAILS,
            Error::BudgetExceeded { .. } | Error::SearchBudgetExceeded(_) => EXIT_INCONCLUSIVE,
            Error::Scalar(ScalarError::PrecisionExhausted(_)) => EXIT_INCONCLUSIVE,
            Error::Lp(LpError::Scalar(ScalarError::PrecisionExhausted(_))) => EXIT_INCONCLUSIVE,
            Error::InvariantViolation(_) | Error::Lp(LpError::NumericalBreakdown) => EXIT_INTERNAL,
            Error::Scalar(ScalarError::Nonlinear | ScalarError::MixedMode) => EXIT_INTERNAL,
            _ => EXIT_INPUT,
        };
        Failure { code, message: e.to_string() }
    }
}

/// `INTLOT_PRECISION` must be a positive digit count when set.
fn check_environment() -> Result<(), Failure> {
    match std::env::var("INTLOT_PRECISION") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(d) if d > 0 => Ok(()),
            _ => Err(Failure::input(format!("INTLOT_PRECISION must be a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(()),
    }
}

fn run(cli: Cli) -> Result<Outcome, Failure> {
    check_environment()?;
    match cli.command {
        Command::Check(a) => commands::check(&a),
        Command::Price(a) => commands::price(&a),
        Command::Hedge(a) => commands::hedge(&a),
        Command::Varhedge(a) => commands::varhedge(&a),
        Command::Lattice { op } => commands::lattice(&op),
        Command::Examples(a) => examples::run(a.name),
    }
}

fn wants_json(cli: &Cli) -> bool {
    match &cli.command {
        Command::Check(a) => a.out.json,
        Command::Price(a) => a.out.json,
        Command::Hedge(a) => a.out.json,
        Command::Varhedge(a) => a.out.json,
        Command::Lattice { op: LatticeOp::Lll { out, .. } | LatticeOp::Cvp { out, .. } } => out.json,
        Command::Examples(a) => a.out.json,
    }
}

fn command_name(cli: &Cli) -> &'static str {
    match &cli.command {
        Command::Check(_) => "check",
        Command::Price(_) => "price",
        Command::Hedge(_) => "hedge",
        Command::Varhedge(_) => "varhedge",
        Command::Lattice { op: LatticeOp::Lll { .. } } => "lattice lll",
        Command::Lattice { op: LatticeOp::Cvp { .. } } => "lattice cvp",
        Command::Examples(_) => "examples",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json = wants_json(&cli);
    let name = command_name(&cli);
    let mut stdout = std::io::stdout().lock();
    let code = match run(cli) {
        Ok(out) => {
            if json {
                let mut doc = json!({ "schema": SCHEMA, "command": name });
                if let (Some(d), Value::Object(body)) = (doc.as_object_mut(), out.json) {
                    d.extend(body);
                }
                let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&doc).unwrap_or_default());
            } else {
                let _ = write!(stdout, "{}", out.text);
            }
            out.code
        }
        Err(f) => {
            if json {
                let doc = json!({ "schema": SCHEMA, "command": name, "error": { "code": f.code, "message": f.message } });
                let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&doc).unwrap_or_default());
            }
            eprintln!("error: {}", f.message);
            f.code
        }
    };
    ExitCode::from(code)
}
