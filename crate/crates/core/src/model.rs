//! Domain types shared by the whole crate: market constants, the strategic
//! trader's conjectured means, and the exchange's two control levers
//! (time-indexed transaction fees and closing-time randomization).
//!
//! All types here are immutable value objects and safe to share across
//! worker threads.

use serde::{Deserialize, Serialize};

use crate::error::{AuctionError, Result};

/// Market constants of one auction experiment.
///
/// Serializes to/from the JSON parameter document exchanged between CLI
/// subcommands; field names in that document match the Rust field names
/// (the supply slope is spelled `K`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuctionParams {
    /// Auction horizon in integer time steps.
    pub horizon: u32,
    /// Market-maker arrival rate per unit time.
    pub lambda: f64,
    /// Supply-function slope (shares per currency unit).
    #[serde(rename = "K")]
    pub supply_slope: f64,
    /// Common standard deviation of all price draws.
    pub sigma: f64,
    /// Mean of the efficient price.
    pub mu_star: f64,
    /// Mean of market-maker limit prices.
    pub mu_mm: f64,
    /// Half-width of the submitted-price-mean search interval, in units of
    /// sigma.
    #[serde(default = "default_bound_width")]
    pub mu_bound_width: f64,
    /// Decision times at which the strategic trader may arrive. Defaults to
    /// `1..=horizon`.
    #[serde(default)]
    pub time_grid: Vec<u32>,
    /// Bid-ask spread of the continuous-market alternative, used by the
    /// reservation constraint. Optional because pure simulation runs do not
    /// need it; mechanism search does.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
}

fn default_bound_width() -> f64 {
    4.0
}

impl AuctionParams {
    pub fn new(horizon: u32, lambda: f64, supply_slope: f64, sigma: f64, mu: f64) -> Self {
        AuctionParams {
            horizon,
            lambda,
            supply_slope,
            sigma,
            mu_star: mu,
            mu_mm: mu,
            mu_bound_width: default_bound_width(),
            time_grid: (1..=horizon).collect(),
            gamma: None,
        }
    }

    /// Apple, Oct-Dec 2023 daily bars.
    pub fn apple() -> Self {
        let mut p = AuctionParams::new(10, 1.0, 10.0, 1.76, 184.39);
        p.gamma = Some(0.0039);
        p
    }

    /// Alphabet, Oct-Dec 2023 daily bars.
    pub fn alphabet() -> Self {
        let mut p = AuctionParams::new(10, 1.0, 10.0, 2.11, 134.24);
        p.gamma = Some(0.0065);
        p
    }

    /// Fills in the default time grid when the parameter document omitted it.
    pub fn normalized(mut self) -> Self {
        if self.time_grid.is_empty() {
            self.time_grid = (1..=self.horizon).collect();
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        validate(self)
    }
}

/// Checks every `AuctionParams` invariant, naming the violated field.
pub fn validate(params: &AuctionParams) -> Result<()> {
    if params.horizon < 2 {
        return Err(AuctionError::validation("horizon too short: need T >= 2"));
    }
    if !(params.lambda > 0.0) || !params.lambda.is_finite() {
        return Err(AuctionError::validation("lambda must be positive"));
    }
    if !(params.supply_slope > 0.0) || !params.supply_slope.is_finite() {
        return Err(AuctionError::validation("K must be positive"));
    }
    if !(params.sigma > 0.0) || !params.sigma.is_finite() {
        return Err(AuctionError::validation("sigma must be positive"));
    }
    if !(params.mu_bound_width > 0.0) || !params.mu_bound_width.is_finite() {
        return Err(AuctionError::validation("mu_bound_width must be positive"));
    }
    if !params.mu_star.is_finite() || !params.mu_mm.is_finite() {
        return Err(AuctionError::validation("price means must be finite"));
    }
    if params.time_grid.is_empty() {
        return Err(AuctionError::validation("time_grid must be non-empty"));
    }
    if params.time_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(AuctionError::validation(
            "time_grid must be strictly increasing",
        ));
    }
    if *params.time_grid.last().unwrap() != params.horizon {
        return Err(AuctionError::validation("time_grid must end at horizon"));
    }
    if params.time_grid[0] < 1 {
        return Err(AuctionError::validation("time_grid entries must be >= 1"));
    }
    if let Some(g) = params.gamma {
        if !(g >= 0.0) || !g.is_finite() {
            return Err(AuctionError::validation("gamma must be non-negative"));
        }
    }
    Ok(())
}

/// The strategic trader's conjectured means for the efficient price and the
/// market-maker limit prices. Expectations under these means are the
/// trader's subjective measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Beliefs {
    pub mu_g_star: f64,
    pub mu_g_mm: f64,
}

impl Beliefs {
    /// Trader guesses both means correctly.
    pub fn perfect(params: &AuctionParams) -> Self {
        Beliefs {
            mu_g_star: params.mu_star,
            mu_g_mm: params.mu_mm,
        }
    }

    /// Under-estimation by one sigma (case "minus").
    pub fn minus_sigma(params: &AuctionParams) -> Self {
        Beliefs {
            mu_g_star: params.mu_star - params.sigma,
            mu_g_mm: params.mu_mm - params.sigma,
        }
    }

    /// Over-estimation by one sigma (case "plus").
    pub fn plus_sigma(params: &AuctionParams) -> Self {
        Beliefs {
            mu_g_star: params.mu_star + params.sigma,
            mu_g_mm: params.mu_mm + params.sigma,
        }
    }

    pub fn is_perfect(&self, params: &AuctionParams) -> bool {
        self.mu_g_star == params.mu_star && self.mu_g_mm == params.mu_mm
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mu_g_star.is_finite() || !self.mu_g_mm.is_finite() {
            return Err(AuctionError::validation("belief means must be finite"));
        }
        Ok(())
    }
}

/// Transaction-fee family: per-share fee paid by a participant arriving in
/// step `t` of the auction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeeFamily {
    Zero,
    Linear,
    Square,
}

impl std::fmt::Display for FeeFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FeeFamily::Zero => write!(f, "zero"),
            FeeFamily::Linear => write!(f, "linear"),
            FeeFamily::Square => write!(f, "square"),
        }
    }
}

/// Time-indexed transaction fee schedule: 0, a*t, or a*t^2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeeSchedule {
    pub family: FeeFamily,
    #[serde(default)]
    pub coefficient: f64,
}

impl FeeSchedule {
    pub fn zero() -> Self {
        FeeSchedule {
            family: FeeFamily::Zero,
            coefficient: 0.0,
        }
    }

    pub fn linear(a: f64) -> Self {
        FeeSchedule {
            family: FeeFamily::Linear,
            coefficient: a,
        }
    }

    pub fn square(a: f64) -> Self {
        FeeSchedule {
            family: FeeFamily::Square,
            coefficient: a,
        }
    }

    /// Per-share fee for an arrival in step `t` (arrivals in `(t-1, t]` pay
    /// the step-`t` fee; the initial resting order at time 0 pays nothing).
    pub fn eval(&self, t: f64) -> f64 {
        match self.family {
            FeeFamily::Zero => 0.0,
            FeeFamily::Linear => self.coefficient * t,
            FeeFamily::Square => self.coefficient * t * t,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.family == FeeFamily::Zero || self.coefficient == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.coefficient >= 0.0) || !self.coefficient.is_finite() {
            return Err(AuctionError::validation(
                "fee coefficient must be non-negative",
            ));
        }
        Ok(())
    }
}

impl std::fmt::Display for FeeSchedule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.family {
            FeeFamily::Zero => write!(f, "0"),
            FeeFamily::Linear => write!(f, "{}t", self.coefficient),
            FeeFamily::Square => write!(f, "{}t^2", self.coefficient),
        }
    }
}

/// Law of the auction closing time: a discrete distribution over time-grid
/// points. Deterministic closing at the horizon is `support=[T], probs=[1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosingRule {
    pub support: Vec<u32>,
    pub probs: Vec<f64>,
}

impl ClosingRule {
    pub fn deterministic(t: u32) -> Self {
        ClosingRule {
            support: vec![t],
            probs: vec![1.0],
        }
    }

    /// Two-point randomization over `{T-1, T}` with `P(close at T-1) = p`.
    pub fn bernoulli_last_two(horizon: u32, p: f64) -> Self {
        if p == 0.0 {
            return ClosingRule::deterministic(horizon);
        }
        ClosingRule {
            support: vec![horizon - 1, horizon],
            probs: vec![p, 1.0 - p],
        }
    }

    pub fn validate(&self, params: &AuctionParams) -> Result<()> {
        if self.support.is_empty() || self.support.len() != self.probs.len() {
            return Err(AuctionError::validation(
                "closing rule support/probs must be non-empty and same length",
            ));
        }
        if self.support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(AuctionError::validation(
                "closing rule support must be strictly increasing",
            ));
        }
        for &t in &self.support {
            if !params.time_grid.contains(&t) {
                return Err(AuctionError::validation(format!(
                    "closing time {t} not on the time grid"
                )));
            }
        }
        if self.probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(AuctionError::validation(
                "closing probabilities must be non-negative",
            ));
        }
        let total: f64 = self.probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(AuctionError::validation(format!(
                "closing probabilities sum to {total}, expected 1"
            )));
        }
        Ok(())
    }

    /// Inverse-CDF draw from one uniform, so that rules sharing the uniform
    /// are coupled across experiment candidates.
    pub fn sample(&self, u: f64) -> u32 {
        let mut acc = 0.0;
        for (&t, &p) in self.support.iter().zip(&self.probs) {
            acc += p;
            if u < acc {
                return t;
            }
        }
        *self.support.last().unwrap()
    }

    pub fn latest(&self) -> u32 {
        *self.support.last().unwrap()
    }

    pub fn is_deterministic(&self) -> bool {
        self.support.len() == 1
    }
}

/// Sufficient statistic of the trader's information at time `t`: the number
/// of resting market-maker orders observed and the sum of their prices. The
/// conditional objective depends on observed prices only through that sum,
/// which is what makes tabulating the best response feasible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InformationSet {
    pub t: u32,
    pub n: u32,
    pub sum_prices: f64,
}

impl InformationSet {
    pub fn new(t: u32, n: u32, sum_prices: f64) -> Self {
        InformationSet { t, n, sum_prices }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(AuctionError::validation(
                "information set needs at least one resting order",
            ));
        }
        if !self.sum_prices.is_finite() {
            return Err(AuctionError::validation("sum of prices must be finite"));
        }
        Ok(())
    }
}

/// One fully materialized auction realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    /// Arrival times of market-maker orders, including the initial resting
    /// order at time 0. Same length as `mm_prices`.
    pub mm_arrival_times: Vec<f64>,
    pub mm_prices: Vec<f64>,
    pub efficient_price: f64,
    pub closing_time: u32,
    pub trader_arrival: u32,
    pub trader_price: f64,
    pub clearing_price: f64,
    pub executed: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_calibration_validates() {
        let p = AuctionParams::apple();
        assert!(validate(&p).is_ok());
        assert_eq!(p.horizon, 10);
        assert_eq!(p.supply_slope, 10.0);
    }

    #[test]
    fn zero_sigma_rejected() {
        let mut p = AuctionParams::apple();
        p.sigma = 0.0;
        let err = validate(&p).unwrap_err().to_string();
        assert!(err.contains("sigma must be positive"), "{err}");
    }

    #[test]
    fn short_horizon_rejected() {
        let mut p = AuctionParams::apple();
        p.horizon = 1;
        p.time_grid = vec![1];
        let err = validate(&p).unwrap_err().to_string();
        assert!(err.contains("horizon too short"), "{err}");
    }

    #[test]
    fn time_grid_must_end_at_horizon() {
        let mut p = AuctionParams::apple();
        p.time_grid = vec![1, 2, 3];
        assert!(validate(&p).is_err());
    }

    #[test]
    fn fee_families_evaluate() {
        assert_eq!(FeeSchedule::zero().eval(7.0), 0.0);
        assert_eq!(FeeSchedule::linear(0.1).eval(3.0), 0.1 * 3.0);
        assert_eq!(FeeSchedule::square(0.24).eval(10.0), 24.0);
    }

    #[test]
    fn fee_nondecreasing_on_grid() {
        for fee in [
            FeeSchedule::zero(),
            FeeSchedule::linear(0.05),
            FeeSchedule::square(0.003),
        ] {
            let mut prev = fee.eval(0.0);
            assert!(prev >= 0.0);
            for t in 1..=20 {
                let v = fee.eval(t as f64);
                assert!(v >= prev, "{fee} decreased at t={t}");
                prev = v;
            }
        }
    }

    #[test]
    fn closing_rule_probs_checked() {
        let p = AuctionParams::apple();
        let bad = ClosingRule {
            support: vec![9, 10],
            probs: vec![0.5, 0.6],
        };
        assert!(bad.validate(&p).is_err());
        let ok = ClosingRule::bernoulli_last_two(10, 0.08);
        assert!(ok.validate(&p).is_ok());
        assert_eq!(ok.sample(0.05), 9);
        assert_eq!(ok.sample(0.5), 10);
    }

    #[test]
    fn deterministic_rule_is_single_point() {
        let r = ClosingRule::bernoulli_last_two(10, 0.0);
        assert!(r.is_deterministic());
        assert_eq!(r.latest(), 10);
        assert_eq!(r.sample(0.9999), 10);
    }

    #[test]
    fn params_json_round_trip_uses_exact_names() {
        let p = AuctionParams::apple();
        let doc = serde_json::to_value(&p).unwrap();
        assert!(doc.get("K").is_some());
        assert!(doc.get("mu_star").is_some());
        assert!(doc.get("mu_bound_width").is_some());
        let back: AuctionParams = serde_json::from_value(doc).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn information_set_requires_resting_order() {
        assert!(InformationSet::new(1, 0, 0.0).validate().is_err());
        assert!(InformationSet::new(1, 1, 100.0).validate().is_ok());
    }
}
