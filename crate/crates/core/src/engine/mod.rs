//! Stochastic machinery: fee-distorted arrival measures, path sampling, and
//! the two interchangeable estimators (Monte Carlo and quadrature) for the
//! trader's conditional objective.
//!
//! Everything here is deterministic given (seed, path_index): see [`rng`]
//! for the counter-based stream construction, and [`chunked_reduce`] for
//! the fixed-order parallel reduction that makes aggregates independent of
//! the worker count.

pub mod cond;
pub mod rng;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clearing;
use crate::error::{AuctionError, Result};
use crate::model::{AuctionParams, ClosingRule, FeeSchedule, InformationSet, PathSample};

pub use cond::{conditional_value, conditional_value_mc_stats, CondCtx};

/// Expected market-maker arrival count per step `(t-1, t]`, after the fee
/// distortion `lambda * exp(-xi(t))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrivalMeasure {
    /// Index 0 holds step 1 (the interval `(0, 1]`).
    pub per_step_mean: Vec<f64>,
}

impl ArrivalMeasure {
    /// Expected count on `(from_t, to_t]`.
    pub fn mass(&self, from_t: u32, to_t: u32) -> f64 {
        assert!(from_t <= to_t, "interval reversed");
        self.per_step_mean
            .iter()
            .take(to_t as usize)
            .skip(from_t as usize)
            .sum()
    }
}

/// Builds the fee-distorted arrival measure: arrivals in `(t-1, t]` pay the
/// step-`t` fee, thinning the rate to `lambda * exp(-xi(t))`.
pub fn arrival_measure(params: &AuctionParams, fee: &FeeSchedule) -> ArrivalMeasure {
    let per_step_mean = (1..=params.horizon)
        .map(|t| params.lambda * (-fee.eval(t as f64)).exp())
        .collect();
    ArrivalMeasure { per_step_mean }
}

/// Poisson pmf of the arrival count on `(from_t, to_t]`.
pub fn poisson_count_pmf(
    measure: &ArrivalMeasure,
    from_t: u32,
    to_t: u32,
    m: u32,
) -> f64 {
    let mean = measure.mass(from_t, to_t);
    poisson_pmf(mean, m)
}

pub(crate) fn poisson_pmf(mean: f64, m: u32) -> f64 {
    if mean == 0.0 {
        return if m == 0 { 1.0 } else { 0.0 };
    }
    // log-space to stay finite for large m
    let mf = m as f64;
    let log_p = mf * mean.ln() - mean - libm::lgamma(mf + 1.0);
    log_p.exp()
}

/// Which estimator backs expectation computations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    MonteCarlo,
    Quadrature,
}

/// Estimator settings shared across the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub method: Method,
    #[serde(default = "default_paths")]
    pub paths: u64,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    #[serde(default = "default_tail_eps")]
    pub poisson_tail_eps: f64,
    pub seed: u64,
}

fn default_paths() -> u64 {
    200_000
}
fn default_nodes() -> usize {
    48
}
fn default_tail_eps() -> f64 {
    1e-10
}

impl EstimatorConfig {
    pub fn monte_carlo(seed: u64, paths: u64) -> Self {
        EstimatorConfig {
            method: Method::MonteCarlo,
            paths,
            nodes: default_nodes(),
            poisson_tail_eps: default_tail_eps(),
            seed,
        }
    }

    pub fn quadrature(seed: u64) -> Self {
        EstimatorConfig {
            method: Method::Quadrature,
            paths: default_paths(),
            nodes: default_nodes(),
            poisson_tail_eps: default_tail_eps(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.paths < 1 {
            return Err(AuctionError::validation("paths must be at least 1"));
        }
        if self.nodes < 2 {
            return Err(AuctionError::validation("nodes must be at least 2"));
        }
        if !(self.poisson_tail_eps > 0.0 && self.poisson_tail_eps < 1.0) {
            return Err(AuctionError::validation(
                "poisson_tail_eps must lie in (0, 1)",
            ));
        }
        Ok(())
    }
}

/// A submitted-price-mean policy: anything that maps an information set to
/// the mean the trader uses. Implemented by the tabulated best response.
pub trait MuPolicy: Sync {
    fn mu_hat(&self, info: &InformationSet) -> f64;
}

/// How the strategic trader participates in a simulated path.
pub enum TraderMode<'a> {
    /// No strategic trader at all (pure market-maker auction).
    Disabled,
    /// Price drawn N(mu_hat, sigma^2) with mu_hat from the policy at the
    /// realized information set.
    Policy(&'a dyn MuPolicy),
    /// Full-information benchmark: the trader knows the efficient price and
    /// the whole closing pool, sends exactly the unconstrained optimizer
    /// (no noise), and is always pooled.
    FullInfoBar,
}

/// All randomness of one market path, materialized once so several
/// consumers (one per candidate arrival time) can reuse it.
#[derive(Debug, Clone)]
pub struct MarketDraw {
    pub closing_time: u32,
    /// Arrival count per step 1..=T.
    pub counts: Vec<u32>,
    /// prices[0] is the single resting order at time 0; prices[t] holds the
    /// step-t arrivals in draw order.
    pub prices: Vec<Vec<f64>>,
    /// Orders present at integer time t (index 0..=T), resting included.
    pub n_cum: Vec<u32>,
    /// Sum of their prices.
    pub sum_cum: Vec<f64>,
    pub efficient_price: f64,
    pub trader_z: f64,
}

/// Samples market-side randomness for one path under the given mean pair.
///
/// Counts are drawn for every step regardless of the realized closing time;
/// steps after the close simply never enter a clearing pool. Keeping the
/// draws ensures common random numbers across closing-rule candidates.
pub fn draw_market(
    params: &AuctionParams,
    mean_star: f64,
    mean_mm: f64,
    measure: &ArrivalMeasure,
    closing: &ClosingRule,
    seed: u64,
    path_index: u64,
) -> MarketDraw {
    let horizon = params.horizon as usize;
    let sigma = params.sigma;

    let u_close = rng::uniform(&mut rng::stream_rng(seed, path_index, rng::stream::CLOSING));
    let closing_time = closing.sample(u_close);

    let mut count_rng = rng::stream_rng(seed, path_index, rng::stream::COUNTS);
    let counts: Vec<u32> = (0..horizon)
        .map(|i| {
            let u = rng::uniform(&mut count_rng);
            rng::poisson_from_uniform(u, measure.per_step_mean[i])
        })
        .collect();

    let mut prices = Vec::with_capacity(horizon + 1);
    let mut resting_rng = rng::stream_rng(seed, path_index, rng::stream::PRICES_BASE);
    prices.push(vec![mean_mm + sigma * rng::standard_normal(&mut resting_rng)]);
    for (i, &c) in counts.iter().enumerate() {
        let t = (i + 1) as u64;
        let mut price_rng = rng::stream_rng(seed, path_index, rng::stream::PRICES_BASE + t);
        prices.push(
            (0..c)
                .map(|_| mean_mm + sigma * rng::standard_normal(&mut price_rng))
                .collect(),
        );
    }

    let mut n_cum = Vec::with_capacity(horizon + 1);
    let mut sum_cum = Vec::with_capacity(horizon + 1);
    let mut n = 0u32;
    let mut s = 0.0f64;
    for step in prices.iter() {
        n += step.len() as u32;
        s += step.iter().sum::<f64>();
        n_cum.push(n);
        sum_cum.push(s);
    }

    let efficient_price = mean_star
        + sigma
            * rng::standard_normal(&mut rng::stream_rng(
                seed,
                path_index,
                rng::stream::EFFICIENT,
            ));
    let trader_z =
        rng::standard_normal(&mut rng::stream_rng(seed, path_index, rng::stream::TRADER));

    MarketDraw {
        closing_time,
        counts,
        prices,
        n_cum,
        sum_cum,
        efficient_price,
        trader_z,
    }
}

/// Per-arrival-time outcome on one path.
#[derive(Debug, Clone, Copy)]
pub struct TauOutcome {
    /// Net payoff K(Pcl - p)(Pcl - P* - xi(tau)); zero when excluded or
    /// arriving after the close.
    pub payoff: f64,
    pub clearing_with: f64,
    pub clearing_no: f64,
    pub executed: bool,
    pub mu_hat: f64,
    pub trader_price: f64,
    pub fee_at_arrival: f64,
    /// tau <= realized closing time.
    pub arrived: bool,
}

/// One path evaluated at every candidate arrival time, sharing the market
/// draws across candidates.
#[derive(Debug, Clone)]
pub struct PathEval {
    pub efficient_price: f64,
    pub closing_time: u32,
    /// Sum of per-arrival fees over the market-maker pool at close (the
    /// resting order pays zero); divide by pool size for the per-capita fee.
    pub mm_fee_sum: f64,
    /// Pool size at close, resting order included, trader excluded.
    pub pool_n: u32,
    pub per_tau: Vec<TauOutcome>,
}

/// Evaluates one path at every arrival time in `taus`.
pub fn evaluate_path(
    params: &AuctionParams,
    mean_star: f64,
    mean_mm: f64,
    fee: &FeeSchedule,
    closing: &ClosingRule,
    mode: &TraderMode<'_>,
    measure: &ArrivalMeasure,
    seed: u64,
    path_index: u64,
    taus: &[u32],
) -> PathEval {
    let draw = draw_market(params, mean_star, mean_mm, measure, closing, seed, path_index);
    let close = draw.closing_time as usize;
    let pool_n = draw.n_cum[close];
    let pool_sum = draw.sum_cum[close];
    let clearing_no = pool_sum / pool_n as f64;
    let sigma = params.sigma;
    let k = params.supply_slope;

    let mm_fee_sum: f64 = (1..=close)
        .map(|t| fee.eval(t as f64) * draw.counts[t - 1] as f64)
        .sum();

    let per_tau = taus
        .iter()
        .map(|&tau| {
            let arrived = tau <= draw.closing_time;
            let fee_at_arrival = fee.eval(tau as f64);
            match mode {
                TraderMode::Disabled => TauOutcome {
                    payoff: 0.0,
                    clearing_with: clearing_no,
                    clearing_no,
                    executed: false,
                    mu_hat: f64::NAN,
                    trader_price: f64::NAN,
                    fee_at_arrival,
                    arrived,
                },
                TraderMode::Policy(policy) => {
                    let info = InformationSet::new(
                        tau,
                        draw.n_cum[tau as usize],
                        draw.sum_cum[tau as usize],
                    );
                    let mu_hat = policy.mu_hat(&info);
                    let trader_price = mu_hat + sigma * draw.trader_z;
                    if !arrived {
                        return TauOutcome {
                            payoff: 0.0,
                            clearing_with: clearing_no,
                            clearing_no,
                            executed: false,
                            mu_hat,
                            trader_price,
                            fee_at_arrival,
                            arrived,
                        };
                    }
                    let included = clearing_no > trader_price;
                    let clearing_with = if included {
                        (pool_sum + trader_price) / (pool_n as f64 + 1.0)
                    } else {
                        clearing_no
                    };
                    let payoff = if included {
                        k * (clearing_with - trader_price)
                            * (clearing_with - draw.efficient_price - fee_at_arrival)
                    } else {
                        0.0
                    };
                    TauOutcome {
                        payoff,
                        clearing_with,
                        clearing_no,
                        executed: included,
                        mu_hat,
                        trader_price,
                        fee_at_arrival,
                        arrived,
                    }
                }
                TraderMode::FullInfoBar => {
                    // unconstrained benchmark: price exactly at the optimum
                    // given the full closing pool and the efficient price,
                    // always pooled, no execution indicator
                    let mu_bar = crate::trader::closed_form_mu_bar(
                        pool_n,
                        pool_sum,
                        draw.efficient_price,
                    );
                    let clearing_with = (pool_sum + mu_bar) / (pool_n as f64 + 1.0);
                    let payoff = if arrived {
                        k * (clearing_with - mu_bar)
                            * (clearing_with - draw.efficient_price - fee_at_arrival)
                    } else {
                        0.0
                    };
                    TauOutcome {
                        payoff,
                        clearing_with: if arrived { clearing_with } else { clearing_no },
                        clearing_no,
                        executed: arrived,
                        mu_hat: mu_bar,
                        trader_price: mu_bar,
                        fee_at_arrival,
                        arrived,
                    }
                }
            }
        })
        .collect();

    PathEval {
        efficient_price: draw.efficient_price,
        closing_time: draw.closing_time,
        mm_fee_sum,
        pool_n,
        per_tau,
    }
}

/// Fully materializes one auction realization with the trader arriving at a
/// fixed time under the given policy.
#[allow(clippy::too_many_arguments)]
pub fn sample_path(
    params: &AuctionParams,
    mean_star: f64,
    mean_mm: f64,
    fee: &FeeSchedule,
    closing: &ClosingRule,
    trader_arrival: u32,
    policy: &dyn MuPolicy,
    seed: u64,
    path_index: u64,
) -> PathSample {
    let measure = arrival_measure(params, fee);
    let draw = draw_market(params, mean_star, mean_mm, &measure, closing, seed, path_index);

    // arrivals stop at the realized close; later draws never materialize
    let mut mm_arrival_times = vec![0.0f64];
    let mut mm_prices = draw.prices[0].clone();
    for (i, step) in draw.prices.iter().enumerate().skip(1) {
        if i > draw.closing_time as usize {
            break;
        }
        for &p in step {
            mm_arrival_times.push(i as f64);
            mm_prices.push(p);
        }
    }

    let info = InformationSet::new(
        trader_arrival,
        draw.n_cum[trader_arrival as usize],
        draw.sum_cum[trader_arrival as usize],
    );
    let mu_hat = policy.mu_hat(&info);
    let trader_price = mu_hat + params.sigma * draw.trader_z;

    let close = draw.closing_time as usize;
    let pool: Vec<f64> = draw
        .prices
        .iter()
        .take(close + 1)
        .flatten()
        .copied()
        .collect();
    let outcome = if trader_arrival <= draw.closing_time {
        clearing::clear(&pool, trader_price).expect("pool has the resting order")
    } else {
        clearing::ClearingOutcome {
            price: clearing::clear_no_trader(&pool).expect("pool has the resting order"),
            trader_included: false,
        }
    };

    PathSample {
        mm_arrival_times,
        mm_prices,
        efficient_price: draw.efficient_price,
        closing_time: draw.closing_time,
        trader_arrival,
        trader_price,
        clearing_price: outcome.price,
        executed: outcome.trader_included,
    }
}

/// Evaluates `n_paths` path indices in fixed-size chunks, in parallel, and
/// returns the per-chunk accumulators in chunk order. Callers fold the
/// vector sequentially, so the final reduction order — and therefore every
/// floating-point aggregate — is independent of the rayon worker count.
pub fn chunked_reduce<Acc, F>(n_paths: u64, chunk_size: u64, eval_chunk: F) -> Vec<Acc>
where
    Acc: Send,
    F: Fn(std::ops::Range<u64>) -> Acc + Sync,
{
    assert!(chunk_size > 0);
    let n_chunks = n_paths.div_ceil(chunk_size);
    (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * chunk_size;
            let hi = (lo + chunk_size).min(n_paths);
            eval_chunk(lo..hi)
        })
        .collect()
}

/// Default chunk size for path-level parallelism.
pub const PATH_CHUNK: u64 = 4096;
