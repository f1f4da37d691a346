//! Multi-objective resource allocation for uplink multi-carrier NOMA cells
//! with underlaid D2D pairs: channel generation, SIC rate evaluation,
//! Tchebycheff scalarization, monotonic (polyblock) optimization, a
//! brute-force oracle, baselines and an experiment harness.

pub mod adapter;
pub mod baselines;
pub mod channel;
pub mod error;
pub mod experiment;
pub mod oracle;
pub mod par;
pub mod rates;
pub mod scalarize;
pub mod units;

pub use error::{Error, Result};
