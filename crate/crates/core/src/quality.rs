//! Market quality from the exchange's viewpoint: expected squared spread
//! between the clearing and efficient prices (MQ), its exponential variant
//! (MQ^rho), and the price impact of the strategic trader. Scoring is under
//! the true measure; the trader's pricing policy may have been built under
//! different (belief) means — the dual-measure pipeline.

use serde::{Deserialize, Serialize};

use crate::engine::{
    self, chunked_reduce, evaluate_path, EstimatorConfig, TraderMode, PATH_CHUNK,
};
use crate::error::Result;
use crate::model::{AuctionParams, Beliefs, ClosingRule, FeeSchedule};
use crate::trader::MuTable;

/// Closed-form no-trader market quality sigma^2 (1 + (1 - e^{-T lambda}) / (T lambda)).
pub fn mq_no_trader(params: &AuctionParams) -> f64 {
    let tl = params.horizon as f64 * params.lambda;
    params.sigma * params.sigma * (1.0 + (1.0 - (-tl).exp()) / tl)
}

/// One row of a quality table (one arrival time).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QualityRow {
    pub tau: u32,
    pub trader_value: f64,
    pub trader_value_se: f64,
    pub mq: f64,
    pub mq_se: f64,
    /// (rho, estimate, stderr) per requested rho.
    pub mq_rho: Vec<(f64, f64, f64)>,
    pub price_impact: f64,
    pub price_impact_se: f64,
    pub expected_mu_hat: f64,
    pub expected_mu_hat_se: f64,
}

/// Quality estimates for every arrival time on the grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QualityReport {
    pub rows: Vec<QualityRow>,
    pub rho_list: Vec<f64>,
    pub paths: u64,
}

struct Acc {
    n: u64,
    // per tau: value, mq, impact, mu_hat, then one slot per rho
    sum: Vec<f64>,
    sumsq: Vec<f64>,
}

const BASE_STATS: usize = 4;

impl Acc {
    fn new(nt: usize, nrho: usize) -> Self {
        let len = nt * (BASE_STATS + nrho);
        Acc {
            n: 0,
            sum: vec![0.0; len],
            sumsq: vec![0.0; len],
        }
    }

    fn push(&mut self, slot: usize, v: f64) {
        self.sum[slot] += v;
        self.sumsq[slot] += v * v;
    }

    fn merge(&mut self, other: &Acc) {
        self.n += other.n;
        for i in 0..self.sum.len() {
            self.sum[i] += other.sum[i];
            self.sumsq[i] += other.sumsq[i];
        }
    }

    fn stats(&self, slot: usize) -> (f64, f64) {
        let n = self.n as f64;
        let mean = self.sum[slot] / n;
        let var = (self.sumsq[slot] / n - mean * mean).max(0.0);
        (mean, (var / n).sqrt())
    }
}

/// Scores the market under the true measure for every arrival time, with
/// the trader behaving per `mode` (typically a policy table built under the
/// trader's beliefs).
pub fn quality_curve(
    params: &AuctionParams,
    fee: &FeeSchedule,
    closing: &ClosingRule,
    rho_list: &[f64],
    cfg: &EstimatorConfig,
    mode: &TraderMode<'_>,
) -> QualityReport {
    let taus = params.time_grid.clone();
    let nt = taus.len();
    let nrho = rho_list.len();
    let width = BASE_STATS + nrho;
    let measure = engine::arrival_measure(params, fee);

    let chunks = chunked_reduce(cfg.paths, PATH_CHUNK, |range| {
        let mut acc = Acc::new(nt, nrho);
        for i in range {
            let eval = evaluate_path(
                params,
                params.mu_star,
                params.mu_mm,
                fee,
                closing,
                mode,
                &measure,
                cfg.seed,
                i,
                &taus,
            );
            acc.n += 1;
            for (j, o) in eval.per_tau.iter().enumerate() {
                let base = j * width;
                let spread = o.clearing_with - eval.efficient_price;
                acc.push(base, o.payoff);
                acc.push(base + 1, spread * spread);
                let impact = o.clearing_no - o.clearing_with;
                acc.push(base + 2, impact * impact);
                acc.push(base + 3, o.mu_hat);
                for (r, &rho) in rho_list.iter().enumerate() {
                    acc.push(base + BASE_STATS + r, (rho * spread.abs()).exp());
                }
            }
        }
        acc
    });

    let mut total = Acc::new(nt, nrho);
    for c in &chunks {
        total.merge(c);
    }

    let rows = taus
        .iter()
        .enumerate()
        .map(|(j, &tau)| {
            let base = j * width;
            let (trader_value, trader_value_se) = total.stats(base);
            let (mq, mq_se) = total.stats(base + 1);
            let (price_impact, price_impact_se) = total.stats(base + 2);
            let (expected_mu_hat, expected_mu_hat_se) = total.stats(base + 3);
            let mq_rho = rho_list
                .iter()
                .enumerate()
                .map(|(r, &rho)| {
                    let (m, se) = total.stats(base + BASE_STATS + r);
                    (rho, m, se)
                })
                .collect();
            QualityRow {
                tau,
                trader_value,
                trader_value_se,
                mq,
                mq_se,
                mq_rho,
                price_impact,
                price_impact_se,
                expected_mu_hat,
                expected_mu_hat_se,
            }
        })
        .collect();

    QualityReport {
        rows,
        rho_list: rho_list.to_vec(),
        paths: total.n,
    }
}

/// Quality row for a single arrival time, with the trader's policy table
/// built under `beliefs` (the dual-measure pipeline in one call).
pub fn evaluate_quality(
    tau: u32,
    params: &AuctionParams,
    beliefs: &Beliefs,
    fee: &FeeSchedule,
    closing: &ClosingRule,
    rho_list: &[f64],
    cfg: &EstimatorConfig,
) -> Result<QualityRow> {
    let table = MuTable::new(params, beliefs, fee, closing, cfg)?;
    let report = quality_curve(
        params,
        fee,
        closing,
        rho_list,
        cfg,
        &TraderMode::Policy(&table),
    );
    report
        .rows
        .into_iter()
        .find(|r| r.tau == tau)
        .ok_or_else(|| {
            crate::error::AuctionError::validation(format!(
                "arrival time {tau} off the decision grid"
            ))
        })
}

/// MC estimate of MQ(tau = T) / MQ-no-trader in the full-information
/// unconstrained benchmark; the theorem value is 1/4. Returns (ratio,
/// stderr of the ratio).
pub fn quarter_check(params: &AuctionParams, cfg: &EstimatorConfig) -> (f64, f64) {
    let fee = FeeSchedule::zero();
    let closing = ClosingRule::deterministic(params.horizon);
    let report = quality_curve(
        params,
        &fee,
        &closing,
        &[],
        cfg,
        &TraderMode::FullInfoBar,
    );
    let row = report.rows.last().expect("non-empty grid");
    let denom = mq_no_trader(params);
    (row.mq / denom, row.mq_se / denom)
}
