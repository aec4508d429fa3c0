//! The strategic seller's best response: the optimal submitted-price mean
//! per information set (tabulated and memoized), the closed-form optimizer
//! for the full-information unconstrained benchmark, and value-of-arrival
//! curves over the decision-time grid.

use std::collections::HashMap;
use std::io::Write as _;
use std::path::Path;

use dashmap::DashMap;
use serde::{Deserialize, Serialize};

use crate::engine::{
    self, chunked_reduce, evaluate_path, CondCtx, EstimatorConfig, MuPolicy, TraderMode,
    PATH_CHUNK,
};
use crate::error::{AuctionError, Result};
use crate::model::{AuctionParams, Beliefs, ClosingRule, FeeSchedule, InformationSet};

/// Index of the first maximum: strict improvement required, so exact ties
/// resolve to the earliest (smallest) candidate.
pub fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Unconstrained full-information optimizer of the trader's parabola:
/// with n orders summing to `sum_prices` and the efficient price known,
/// mu_bar = (n(n+1) p* - (n-1) sum) / (2n).
pub fn closed_form_mu_bar(n: u32, sum_prices: f64, p_star: f64) -> f64 {
    let nf = n as f64;
    (nf * (nf + 1.0) * p_star - (nf - 1.0) * sum_prices) / (2.0 * nf)
}

/// Expected payoff in the full-information mode without the execution
/// indicator: the trader knows the pool (n, sum) and the efficient price,
/// sends price N(mu, sigma^2), and is always pooled. Quadratic in mu with
/// the same argmax as the noiseless parabola.
pub fn full_info_objective(
    n: u32,
    sum_prices: f64,
    p_star: f64,
    mu: f64,
    params: &AuctionParams,
) -> f64 {
    let nf = n as f64;
    let c = nf + 1.0;
    let k = params.supply_slope;
    let s2 = params.sigma * params.sigma;
    // E[(A - n p)(A + p - c P*)] with p = mu + sigma Z
    k * ((sum_prices - nf * mu) * (sum_prices + mu - c * p_star) - nf * s2) / (c * c)
}

/// Uniform candidate grid on [lo, hi] with the given step (inclusive of
/// both ends up to floating-point rounding).
fn mu_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    (0..count).map(|i| lo + i as f64 * step).collect()
}

/// Tabulated best response mu_hat over (t, n, price-sum) cells.
///
/// Cells are computed lazily on first touch and memoized; the price sum is
/// snapped to a grid of step sigma/4 spanning mu_g_mm * n +- 6 sigma sqrt(n)
/// per n. Information sets falling outside the grid (rare, deep in the
/// Poisson tail) are optimized directly without caching.
pub struct MuTable {
    pub bound_lo: f64,
    pub bound_hi: f64,
    mu_candidates: Vec<f64>,
    sum_step: f64,
    n_max: u32,
    mu_g_mm: f64,
    ctxs: HashMap<u32, CondCtx>,
    cells: DashMap<(u32, u32, i64), f64>,
    cache_key: String,
}

impl MuTable {
    pub fn new(
        params: &AuctionParams,
        beliefs: &Beliefs,
        fee: &FeeSchedule,
        closing: &ClosingRule,
        cfg: &EstimatorConfig,
    ) -> Result<Self> {
        params.validate()?;
        beliefs.validate()?;
        fee.validate()?;
        closing.validate(params)?;
        cfg.validate()?;

        let sigma = params.sigma;
        let bound_lo = beliefs.mu_g_star - params.mu_bound_width * sigma;
        let bound_hi = beliefs.mu_g_star + params.mu_bound_width * sigma;
        let mu_candidates = mu_grid(bound_lo, bound_hi, sigma / 20.0);

        let measure = engine::arrival_measure(params, fee);
        let ctxs = params
            .time_grid
            .iter()
            .map(|&t| {
                (
                    t,
                    CondCtx::build(t, params, beliefs, fee, closing, &measure, cfg),
                )
            })
            .collect();

        let lam_t = params.lambda * params.horizon as f64;
        let n_max = (lam_t + 6.0 * lam_t.sqrt()).ceil() as u32 + 1;

        Ok(MuTable {
            bound_lo,
            bound_hi,
            mu_candidates,
            sum_step: sigma / 4.0,
            n_max,
            mu_g_mm: beliefs.mu_g_mm,
            ctxs,
            cells: DashMap::new(),
            cache_key: cache_key(params, beliefs, fee, closing, cfg),
        })
    }

    fn optimize_cell(&self, t: u32, n: u32, sum_prices: f64) -> f64 {
        let ctx = self
            .ctxs
            .get(&t)
            .unwrap_or_else(|| panic!("arrival time {t} off the decision grid"));
        let values: Vec<f64> = self
            .mu_candidates
            .iter()
            .map(|&mu| ctx.value(n, sum_prices, mu))
            .collect();
        self.mu_candidates[argmax_first(&values)]
    }

    /// Number of cells materialized so far.
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cache_key(&self) -> &str {
        &self.cache_key
    }

    /// Persists materialized cells as JSON (sorted, so the file is
    /// byte-stable for a given cell set).
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut cells: Vec<(u32, u32, i64, f64)> = self
            .cells
            .iter()
            .map(|e| {
                let (t, n, i) = *e.key();
                (t, n, i, *e.value())
            })
            .collect();
        cells.sort_by(|a, b| (a.0, a.1, a.2).cmp(&(b.0, b.1, b.2)));
        let doc = CacheDoc {
            key: self.cache_key.clone(),
            cells,
        };
        let mut f = std::fs::File::create(path)?;
        f.write_all(serde_json::to_string(&doc).unwrap().as_bytes())?;
        Ok(())
    }

    /// Warms the table from a cache file; ignored (Ok) when the key does
    /// not match the current configuration.
    pub fn warm_from(&self, path: &Path) -> Result<usize> {
        let text = std::fs::read_to_string(path)?;
        let doc: CacheDoc = serde_json::from_str(&text).map_err(|e| {
            AuctionError::validation(format!("bad cache file: {e}"))
        })?;
        if doc.key != self.cache_key {
            return Ok(0);
        }
        let mut loaded = 0;
        for (t, n, i, mu) in doc.cells {
            self.cells.insert((t, n, i), mu);
            loaded += 1;
        }
        Ok(loaded)
    }
}

#[derive(Serialize, Deserialize)]
struct CacheDoc {
    key: String,
    cells: Vec<(u32, u32, i64, f64)>,
}

impl MuPolicy for MuTable {
    fn mu_hat(&self, info: &InformationSet) -> f64 {
        let n = info.n;
        if n == 0 {
            return self.bound_lo;
        }
        let center = self.mu_g_mm * n as f64;
        let idx = ((info.sum_prices - center) / self.sum_step).round() as i64;
        let max_idx = (24.0 * (n as f64).sqrt()).ceil() as i64;
        if n > self.n_max || idx.abs() > max_idx {
            // off-grid: optimize directly, uncached (pure, so still
            // deterministic under any execution order)
            return self.optimize_cell(info.t, n, info.sum_prices);
        }
        let key = (info.t, n, idx);
        if let Some(v) = self.cells.get(&key) {
            return *v;
        }
        let snapped = center + idx as f64 * self.sum_step;
        let v = self.optimize_cell(info.t, n, snapped);
        self.cells.insert(key, v);
        v
    }
}

/// Stable identifier of a table configuration: FNV-1a over the canonical
/// JSON of everything the cell values depend on.
pub fn cache_key(
    params: &AuctionParams,
    beliefs: &Beliefs,
    fee: &FeeSchedule,
    closing: &ClosingRule,
    cfg: &EstimatorConfig,
) -> String {
    let doc = serde_json::json!({
        "params": params,
        "beliefs": beliefs,
        "fee": fee,
        "closing": closing,
        "nodes": cfg.nodes,
        "poisson_tail_eps": cfg.poisson_tail_eps,
    });
    let text = serde_json::to_string(&doc).unwrap();
    let mut h: u64 = 0xcbf29ce484222325;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

/// Direct best-response optimization for one information set.
pub fn optimize_mu(
    info: &InformationSet,
    params: &AuctionParams,
    beliefs: &Beliefs,
    fee: &FeeSchedule,
    closing: &ClosingRule,
    cfg: &EstimatorConfig,
) -> f64 {
    let measure = engine::arrival_measure(params, fee);
    let ctx = CondCtx::build(info.t, params, beliefs, fee, closing, &measure, cfg);
    let sigma = params.sigma;
    let lo = beliefs.mu_g_star - params.mu_bound_width * sigma;
    let hi = beliefs.mu_g_star + params.mu_bound_width * sigma;
    let grid = mu_grid(lo, hi, sigma / 20.0);
    let values: Vec<f64> = grid
        .iter()
        .map(|&mu| ctx.value(info.n, info.sum_prices, mu))
        .collect();
    grid[argmax_first(&values)]
}

/// One point of the value-of-arrival curve.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ArrivalValuePoint {
    pub tau: u32,
    pub value: f64,
    pub stderr: f64,
}

/// The trader's expected payoff per candidate arrival time, estimated with
/// common random numbers across times; `adjacent_diff` carries the paired
/// statistics of V(tau_{i+1}) - V(tau_i) used for monotonicity checks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArrivalValueCurve {
    pub points: Vec<ArrivalValuePoint>,
    pub adjacent_diff: Vec<(f64, f64)>,
}

struct CurveAcc {
    n: u64,
    sum: Vec<f64>,
    sumsq: Vec<f64>,
    dsum: Vec<f64>,
    dsumsq: Vec<f64>,
}

impl CurveAcc {
    fn new(nt: usize) -> Self {
        CurveAcc {
            n: 0,
            sum: vec![0.0; nt],
            sumsq: vec![0.0; nt],
            dsum: vec![0.0; nt.saturating_sub(1)],
            dsumsq: vec![0.0; nt.saturating_sub(1)],
        }
    }

    fn add(&mut self, payoffs: &[f64]) {
        self.n += 1;
        for (i, &v) in payoffs.iter().enumerate() {
            self.sum[i] += v;
            self.sumsq[i] += v * v;
            if i + 1 < payoffs.len() {
                let d = payoffs[i + 1] - v;
                self.dsum[i] += d;
                self.dsumsq[i] += d * d;
            }
        }
    }

    fn merge(&mut self, other: &CurveAcc) {
        self.n += other.n;
        for i in 0..self.sum.len() {
            self.sum[i] += other.sum[i];
            self.sumsq[i] += other.sumsq[i];
        }
        for i in 0..self.dsum.len() {
            self.dsum[i] += other.dsum[i];
            self.dsumsq[i] += other.dsumsq[i];
        }
    }
}

fn mean_stderr(sum: f64, sumsq: f64, n: f64) -> (f64, f64) {
    let mean = sum / n;
    let var = (sumsq / n - mean * mean).max(0.0);
    (mean, (var / n).sqrt())
}

/// Full value-of-arrival curve under the trader's beliefs, reusing a
/// prebuilt policy table.
pub fn arrival_value_curve(
    params: &AuctionParams,
    beliefs: &Beliefs,
    fee: &FeeSchedule,
    closing: &ClosingRule,
    cfg: &EstimatorConfig,
    table: &MuTable,
) -> ArrivalValueCurve {
    let taus = params.time_grid.clone();
    let nt = taus.len();
    let measure = engine::arrival_measure(params, fee);
    let mode = TraderMode::Policy(table);

    let chunks = chunked_reduce(cfg.paths, PATH_CHUNK, |range| {
        let mut acc = CurveAcc::new(nt);
        let mut payoffs = vec![0.0; nt];
        for i in range {
            let eval = evaluate_path(
                params,
                beliefs.mu_g_star,
                beliefs.mu_g_mm,
                fee,
                closing,
                &mode,
                &measure,
                cfg.seed,
                i,
                &taus,
            );
            for (j, o) in eval.per_tau.iter().enumerate() {
                payoffs[j] = o.payoff;
            }
            acc.add(&payoffs);
        }
        acc
    });

    let mut total = CurveAcc::new(nt);
    for c in &chunks {
        total.merge(c);
    }
    let nf = total.n as f64;
    let points = taus
        .iter()
        .enumerate()
        .map(|(i, &tau)| {
            let (value, stderr) = mean_stderr(total.sum[i], total.sumsq[i], nf);
            ArrivalValuePoint { tau, value, stderr }
        })
        .collect();
    let adjacent_diff = (0..nt.saturating_sub(1))
        .map(|i| mean_stderr(total.dsum[i], total.dsumsq[i], nf))
        .collect();
    ArrivalValueCurve {
        points,
        adjacent_diff,
    }
}

/// Expected payoff of arriving at `tau` (builds the policy table; prefer
/// [`arrival_value_curve`] when several times are needed).
pub fn value_of_arrival(
    tau: u32,
    params: &AuctionParams,
    beliefs: &Beliefs,
    fee: &FeeSchedule,
    closing: &ClosingRule,
    cfg: &EstimatorConfig,
) -> Result<(f64, f64)> {
    if !params.time_grid.contains(&tau) {
        return Err(AuctionError::validation(format!(
            "arrival time {tau} off the decision grid"
        )));
    }
    let table = MuTable::new(params, beliefs, fee, closing, cfg)?;
    let curve = arrival_value_curve(params, beliefs, fee, closing, cfg, &table);
    let p = curve
        .points
        .iter()
        .find(|p| p.tau == tau)
        .expect("tau is on the grid");
    Ok((p.value, p.stderr))
}

/// Optimal arrival time (earliest on ties) with the full value curve.
pub fn best_arrival(
    params: &AuctionParams,
    beliefs: &Beliefs,
    fee: &FeeSchedule,
    closing: &ClosingRule,
    cfg: &EstimatorConfig,
) -> Result<(u32, ArrivalValueCurve)> {
    let table = MuTable::new(params, beliefs, fee, closing, cfg)?;
    let curve = arrival_value_curve(params, beliefs, fee, closing, cfg, &table);
    let values: Vec<f64> = curve.points.iter().map(|p| p.value).collect();
    let tau_hat = curve.points[argmax_first(&values)].tau;
    Ok((tau_hat, curve))
}
