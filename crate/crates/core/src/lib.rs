//! Periodic batch auction laboratory.
//!
//! A single strategic seller faces Poisson-arriving market makers in a
//! batch auction cleared at the volume-maximizing uniform price. The crate
//! simulates the market, computes the seller's best response (price mean
//! and arrival time), scores market quality from the exchange's viewpoint,
//! and solves the exchange's outer design problem over transaction-fee
//! schedules and closing-time randomization.
//!
//! Modules:
//! - [`model`] — parameters, beliefs, fee schedules, closing rules.
//! - [`clearing`] — the volume-maximizing clearing rule.
//! - [`engine`] — path sampling, arrival measures, conditional-value
//!   estimators (Monte Carlo and quadrature), deterministic parallelism.
//! - [`trader`] — the seller's best response and value-of-arrival curves.
//! - [`quality`] — MQ, MQ^rho, and price impact.
//! - [`bilevel`] — the exchange's fee/closing grid search.
//! - [`calibration`] — parameter estimation from daily OHLC bars.

pub mod bilevel;
pub mod calibration;
pub mod clearing;
pub mod engine;
pub mod error;
pub mod model;
pub mod quadrature;
pub mod quality;
pub mod trader;

pub use error::{AuctionError, Result};
pub use model::{AuctionParams, Beliefs, ClosingRule, FeeFamily, FeeSchedule};
