//! Soccer match-result forecasting toolkit.
//!
//! The crate is organised around the life of a backtest:
//!
//! - [`data`] parses vendor CSVs into a canonical, temporally ordered [`Dataset`].
//! - [`ratings`] holds the sequential rating engines (Elo, pi, Berrar, GAP).
//! - [`features`] builds pre-match features (recency, streak, form, odds).
//! - [`forecast`] maps ratings to win/draw/loss distributions.
//! - [`evaluate`] scores forecasts and runs the walk-forward harness.
//! - [`simulate`] generates synthetic leagues with known team strengths.
//! - [`config`] reads flat `key=value` parameter files.

pub mod config;
pub mod data;
pub mod error;
pub mod evaluate;
pub mod features;
pub mod forecast;
pub mod ratings;
pub mod simulate;

pub use data::{Dataset, MatchRecord, OddsTriple, Outcome};
pub use error::{Error, Result};
pub use forecast::ProbTriple;
