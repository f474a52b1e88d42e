//! Numerical laboratory for feedback-controlled thermodynamics.
//!
//! Modules:
//! - [`info`]: classical and quantum entropies over named index sets.
//! - [`thermal`]: Gibbs states, free-energy functionals, and the
//!   conditional-entropy growth bound for bipartite feedback dynamics.
//! - [`chain`]: Markov chains, Bayes-inverted time reversal, and
//!   trajectory-level entropy production.
//! - [`szilard`]: single-particle feedback engine scenarios with exact
//!   per-leg work tables.
//! - [`bsc`]: binary symmetric channel algebra and its engine table.
//! - [`ledger`]: quasistatic bookkeeping checks (first law, bath exchange,
//!   engine efficiency, isothermal quadrature).
//! - [`verify`]: named check suites with machine-readable reports.

pub mod error;
pub mod info;
pub mod thermal;
pub mod chain;
pub mod szilard;
pub mod bsc;
pub mod ledger;
pub mod verify;

pub use error::{Error, Result};
