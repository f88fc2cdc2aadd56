//! Discrete-time no-arbitrage analysis under integer trading constraints.
//!
//! The crate works on finite scenario trees. It decides classical and
//! integer no-arbitrage, computes martingale-measure supports and price
//! intervals, builds real and integer super/subhedges, and solves the
//! one-period variance-optimal integer hedging problem by lattice search.

pub mod arbitrage;
pub mod error;
pub mod hedging;
pub mod lattice;
pub(crate) mod linalg;
pub mod linprog;
pub mod market;
pub mod pricing;
pub mod scalar;
pub mod varhedge;

pub use error::{Error, Result};
pub use scalar::{NumericContext, Scalar, ScalarError, Sign};
#[cfg(test)]
pub(crate) mod testkit;
