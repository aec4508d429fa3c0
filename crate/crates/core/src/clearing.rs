//! Volume-maximizing clearing rule.
//!
//! Market makers submit linear supply schedules Q = K(P - p_i) around their
//! limit prices, so without the strategic trader the volume-maximizing price
//! is simply the arithmetic mean of the submitted prices. The strategic
//! seller's one-sided order only trades when the candidate price is at or
//! above the trader's limit; the closed form for the resulting clearing
//! price is implemented in [`clear`], and [`executed_volume`] provides the
//! brute-force volume function that tests sweep to confirm the closed form.

use serde::{Deserialize, Serialize};

use crate::error::{AuctionError, Result};

/// Outcome of one clearing: the uniform price and whether the strategic
/// trader's order made it into the pool.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClearingOutcome {
    pub price: f64,
    pub trader_included: bool,
}

/// Clearing price with only market-maker orders present: the mean of their
/// limit prices.
pub fn clear_no_trader(prices: &[f64]) -> Result<f64> {
    if prices.is_empty() {
        return Err(AuctionError::validation(
            "cannot clear an empty order pool",
        ));
    }
    Ok(prices.iter().sum::<f64>() / prices.len() as f64)
}

/// Clearing price with the strategic seller's order in the pool.
///
/// The trader is included exactly when the no-trader mean strictly exceeds
/// the trader's price; a tie excludes. When included, the price averages the
/// trader's price in with the rest.
pub fn clear(prices: &[f64], trader_price: f64) -> Result<ClearingOutcome> {
    let mean = clear_no_trader(prices)?;
    if mean > trader_price {
        let n = prices.len() as f64;
        let sum: f64 = prices.iter().sum();
        Ok(ClearingOutcome {
            price: (sum + trader_price) / (n + 1.0),
            trader_included: true,
        })
    } else {
        Ok(ClearingOutcome {
            price: mean,
            trader_included: false,
        })
    }
}

/// Executed volume at a candidate price: min(buy side, sell side).
///
/// Each market-maker schedule contributes |K(candidate - p_i)| to the buy
/// side when p_i > candidate and to the sell side when p_i < candidate. The
/// strategic trader sells only, contributing K(candidate - trader_price)
/// when the candidate is at or above their price.
pub fn executed_volume(
    prices: &[f64],
    trader_price: Option<f64>,
    candidate: f64,
    supply_slope: f64,
) -> Result<f64> {
    if !(supply_slope > 0.0) {
        return Err(AuctionError::validation("K must be positive"));
    }
    let mut buy = 0.0;
    let mut sell = 0.0;
    for &p in prices {
        if p > candidate {
            buy += supply_slope * (p - candidate);
        } else if p < candidate {
            sell += supply_slope * (candidate - p);
        }
    }
    if let Some(tp) = trader_price {
        if candidate >= tp {
            sell += supply_slope * (candidate - tp);
        }
    }
    Ok(buy.min(sell))
}

/// The strategic seller's realized payoff on one path.
///
/// Zero unless the trader was included and filled (price at or above their
/// limit); otherwise K(P^cl - p)(P^cl - P*) less the per-share fee on the
/// executed quantity.
pub fn trader_payoff(
    outcome: ClearingOutcome,
    trader_price: f64,
    efficient_price: f64,
    supply_slope: f64,
    fee_at_arrival: f64,
) -> f64 {
    if !outcome.trader_included || trader_price > outcome.price {
        return 0.0;
    }
    let qty = supply_slope * (outcome.price - trader_price);
    qty * (outcome.price - efficient_price - fee_at_arrival)
}
