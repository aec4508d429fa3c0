//! The exchange's outer problem: grid search over fee families,
//! coefficients, and closing-time randomization. Incentive compatibility is
//! baked in — every candidate is scored at the trader's own best response —
//! and candidates that would drive the trader back to the continuous market
//! (the reservation constraint) are discarded.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::engine::{
    self, chunked_reduce, evaluate_path, EstimatorConfig, TraderMode, PATH_CHUNK,
};
use crate::error::{AuctionError, Result};
use crate::model::{AuctionParams, Beliefs, ClosingRule, FeeFamily, FeeSchedule, PathSample};
use crate::trader::{argmax_first, MuTable};

/// Whose fees enter the exchange's per-capita fee term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeeBase {
    AllArrivals,
    StrategicOnly,
}

/// What the exchange minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveKind {
    /// E[(|Pcl - P*| + avg fee)^2], or its exp-rho variant.
    TotalSpread,
    /// E[|Pcl - P*|^2 - fee revenue], or its exp-rho variant. The fee term
    /// is the strategic seller's volume fee (per-share fee times executed
    /// quantity), which is what the reported fee gains measure.
    EfficiencyMinusFee,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub kind: ObjectiveKind,
    /// Risk aversion; absent means the risk-neutral quadratic form.
    pub rho: Option<f64>,
    pub fee_base: FeeBase,
}

impl ObjectiveSpec {
    pub fn total_spread() -> Self {
        ObjectiveSpec {
            kind: ObjectiveKind::TotalSpread,
            rho: None,
            fee_base: FeeBase::AllArrivals,
        }
    }

    pub fn efficiency_minus_fee() -> Self {
        ObjectiveSpec {
            kind: ObjectiveKind::EfficiencyMinusFee,
            rho: None,
            fee_base: FeeBase::AllArrivals,
        }
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = Some(rho);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(r) = self.rho {
            if !(r > 0.0) {
                return Err(AuctionError::validation("rho must be positive"));
            }
        }
        Ok(())
    }
}

/// One scored mechanism candidate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MechanismResult {
    pub fee: FeeSchedule,
    pub closing: ClosingRule,
    pub tau_hat: u32,
    pub exchange_value: f64,
    pub exchange_value_se: f64,
    /// Expected volume fee collected from the strategic seller.
    pub fee_revenue: f64,
    pub fee_revenue_se: f64,
    pub mq_with_fee: f64,
    pub mq_with_fee_se: f64,
    pub mq_zero_fee: f64,
    pub trader_value: f64,
    pub trader_value_se: f64,
    pub reservation_satisfied: bool,
}

/// Per-capita (or strategic-only) realized fee on one path.
pub fn average_fee(path: &PathSample, fee: &FeeSchedule, base: FeeBase) -> f64 {
    match base {
        FeeBase::AllArrivals => {
            let total: f64 = path
                .mm_arrival_times
                .iter()
                .map(|&t| fee.eval(t))
                .sum();
            total / path.mm_prices.len() as f64
        }
        FeeBase::StrategicOnly => {
            if path.trader_arrival <= path.closing_time {
                fee.eval(path.trader_arrival as f64)
            } else {
                0.0
            }
        }
    }
}

/// Per-arrival-time statistics under the trader's beliefs: expected payoff
/// (with stderr) and expected executed volume.
struct BeliefStats {
    taus: Vec<u32>,
    value: Vec<f64>,
    value_se: Vec<f64>,
    volume: Vec<f64>,
}

fn belief_stats(
    params: &AuctionParams,
    beliefs: &Beliefs,
    fee: &FeeSchedule,
    closing: &ClosingRule,
    cfg: &EstimatorConfig,
    table: &MuTable,
) -> BeliefStats {
    let taus = params.time_grid.clone();
    let nt = taus.len();
    let measure = engine::arrival_measure(params, fee);
    let mode = TraderMode::Policy(table);
    let k = params.supply_slope;

    let chunks = chunked_reduce(cfg.paths, PATH_CHUNK, |range| {
        let mut sum = vec![0.0f64; nt];
        let mut sumsq = vec![0.0f64; nt];
        let mut vol = vec![0.0f64; nt];
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
                sum[j] += o.payoff;
                sumsq[j] += o.payoff * o.payoff;
                if o.executed {
                    vol[j] += k * (o.clearing_with - o.trader_price);
                }
            }
        }
        (sum, sumsq, vol)
    });

    let mut sum = vec![0.0f64; nt];
    let mut sumsq = vec![0.0f64; nt];
    let mut vol = vec![0.0f64; nt];
    for (s, sq, v) in &chunks {
        for j in 0..nt {
            sum[j] += s[j];
            sumsq[j] += sq[j];
            vol[j] += v[j];
        }
    }
    let n = cfg.paths as f64;
    let mut value = Vec::with_capacity(nt);
    let mut value_se = Vec::with_capacity(nt);
    let mut volume = Vec::with_capacity(nt);
    for j in 0..nt {
        let mean = sum[j] / n;
        let var = (sumsq[j] / n - mean * mean).max(0.0);
        value.push(mean);
        value_se.push((var / n).sqrt());
        volume.push(vol[j] / n);
    }
    BeliefStats {
        taus,
        value,
        value_se,
        volume,
    }
}

/// True iff the trader's best-response value weakly exceeds the
/// continuous-market alternative (half the spread gamma times expected
/// executed volume), both sides estimated under the trader's beliefs.
pub fn reservation_holds(
    fee: &FeeSchedule,
    closing: &ClosingRule,
    params: &AuctionParams,
    beliefs: &Beliefs,
    cfg: &EstimatorConfig,
) -> Result<bool> {
    let table = MuTable::new(params, beliefs, fee, closing, cfg)?;
    let bs = belief_stats(params, beliefs, fee, closing, cfg, &table);
    let i = argmax_first(&bs.value);
    let gamma = params.gamma.unwrap_or(0.0);
    Ok(bs.value[i] >= 0.5 * gamma * bs.volume[i])
}

struct TruthStats {
    mq: f64,
    mq_se: f64,
    objective: f64,
    objective_se: f64,
    revenue: f64,
    revenue_se: f64,
}

/// True-measure scoring at the trader's chosen arrival time. Accumulation
/// mirrors the quality module exactly (same paths, same order), so the
/// zero-fee total-spread value collapses bitwise to MQ.
#[allow(clippy::too_many_arguments)]
fn truth_stats(
    params: &AuctionParams,
    fee: &FeeSchedule,
    closing: &ClosingRule,
    cfg: &EstimatorConfig,
    table: &MuTable,
    tau_hat: u32,
    objective: &ObjectiveSpec,
) -> TruthStats {
    let taus = [tau_hat];
    let measure = engine::arrival_measure(params, fee);
    let mode = TraderMode::Policy(table);
    let k = params.supply_slope;

    let chunks = chunked_reduce(cfg.paths, PATH_CHUNK, |range| {
        let mut acc = [0.0f64; 6]; // mq, mq^2, obj, obj^2, rev, rev^2
        for i in range {
            let eval = evaluate_path(
                params,
                params.mu_star,
                params.mu_mm,
                fee,
                closing,
                &mode,
                &measure,
                cfg.seed,
                i,
                &taus,
            );
            let o = &eval.per_tau[0];
            let spread = o.clearing_with - eval.efficient_price;
            let sq = spread * spread;

            let revenue = if o.executed {
                k * (o.clearing_with - o.trader_price) * o.fee_at_arrival
            } else {
                0.0
            };
            let avg_fee = match objective.fee_base {
                FeeBase::AllArrivals => eval.mm_fee_sum / eval.pool_n as f64,
                FeeBase::StrategicOnly => {
                    if o.arrived {
                        o.fee_at_arrival
                    } else {
                        0.0
                    }
                }
            };
            let sample = match (objective.kind, objective.rho) {
                (ObjectiveKind::TotalSpread, None) => {
                    let s = spread.abs() + avg_fee;
                    s * s
                }
                (ObjectiveKind::TotalSpread, Some(rho)) => {
                    (rho * (spread.abs() + avg_fee)).exp()
                }
                (ObjectiveKind::EfficiencyMinusFee, None) => sq - revenue,
                (ObjectiveKind::EfficiencyMinusFee, Some(rho)) => {
                    (rho * (spread.abs() - revenue)).exp()
                }
            };

            acc[0] += sq;
            acc[1] += sq * sq;
            acc[2] += sample;
            acc[3] += sample * sample;
            acc[4] += revenue;
            acc[5] += revenue * revenue;
        }
        acc
    });

    let mut tot = [0.0f64; 6];
    for c in &chunks {
        for j in 0..6 {
            tot[j] += c[j];
        }
    }
    let n = cfg.paths as f64;
    let stat = |s: f64, sq: f64| {
        let mean = s / n;
        let var = (sq / n - mean * mean).max(0.0);
        (mean, (var / n).sqrt())
    };
    let (mq, mq_se) = stat(tot[0], tot[1]);
    let (objective_v, objective_se) = stat(tot[2], tot[3]);
    let (revenue, revenue_se) = stat(tot[4], tot[5]);
    TruthStats {
        mq,
        mq_se,
        objective: objective_v,
        objective_se,
        revenue,
        revenue_se,
    }
}

fn evaluate_with_baseline(
    fee: &FeeSchedule,
    closing: &ClosingRule,
    objective: &ObjectiveSpec,
    params: &AuctionParams,
    beliefs: &Beliefs,
    cfg: &EstimatorConfig,
    mq_zero_fee: Option<f64>,
) -> Result<MechanismResult> {
    objective.validate()?;
    let table = MuTable::new(params, beliefs, fee, closing, cfg)?;
    let bs = belief_stats(params, beliefs, fee, closing, cfg, &table);
    let i = argmax_first(&bs.value);
    let tau_hat = bs.taus[i];
    let gamma = params.gamma.unwrap_or(0.0);
    let reservation_satisfied = bs.value[i] >= 0.5 * gamma * bs.volume[i];

    let ts = truth_stats(params, fee, closing, cfg, &table, tau_hat, objective);

    let mq_zero_fee = match mq_zero_fee {
        Some(v) => v,
        None => {
            if fee.is_zero() {
                ts.mq
            } else {
                // baseline: same closing rule, zero fee, trader re-optimizes
                let zero = FeeSchedule::zero();
                let table0 = MuTable::new(params, beliefs, &zero, closing, cfg)?;
                let bs0 = belief_stats(params, beliefs, &zero, closing, cfg, &table0);
                let tau0 = bs0.taus[argmax_first(&bs0.value)];
                truth_stats(params, &zero, closing, cfg, &table0, tau0, objective).mq
            }
        }
    };

    Ok(MechanismResult {
        fee: *fee,
        closing: closing.clone(),
        tau_hat,
        exchange_value: ts.objective,
        exchange_value_se: ts.objective_se,
        fee_revenue: ts.revenue,
        fee_revenue_se: ts.revenue_se,
        mq_with_fee: ts.mq,
        mq_with_fee_se: ts.mq_se,
        mq_zero_fee,
        trader_value: bs.value[i],
        trader_value_se: bs.value_se[i],
        reservation_satisfied,
    })
}

/// Scores one (fee, closing) candidate at the trader's best response.
pub fn evaluate_mechanism(
    fee: &FeeSchedule,
    closing: &ClosingRule,
    objective: &ObjectiveSpec,
    params: &AuctionParams,
    beliefs: &Beliefs,
    cfg: &EstimatorConfig,
) -> Result<MechanismResult> {
    evaluate_with_baseline(fee, closing, objective, params, beliefs, cfg, None)
}

/// Best candidate plus the full sweep (for curve emission).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizeOutcome {
    pub best: MechanismResult,
    pub sweep: Vec<MechanismResult>,
}

fn family_rank(f: FeeFamily) -> u8 {
    match f {
        FeeFamily::Zero => 0,
        FeeFamily::Linear => 1,
        FeeFamily::Square => 2,
    }
}

/// Exhaustive grid search over (family, a, p) minimizing the objective
/// among reservation-feasible candidates. Ties resolve to smaller a, then
/// smaller p, then linear before square.
pub fn optimize_mechanism(
    objective: &ObjectiveSpec,
    fee_families: &[FeeFamily],
    a_grid: &[f64],
    p_grid: &[f64],
    params: &AuctionParams,
    beliefs: &Beliefs,
    cfg: &EstimatorConfig,
) -> Result<OptimizeOutcome> {
    if fee_families.is_empty() || a_grid.is_empty() || p_grid.is_empty() {
        return Err(AuctionError::validation("search grids must be non-empty"));
    }

    // enumerate, canonicalizing a = 0 to the zero family and deduplicating
    let mut fees: Vec<FeeSchedule> = Vec::new();
    for &fam in fee_families {
        match fam {
            FeeFamily::Zero => {
                if !fees.iter().any(|f| f.is_zero()) {
                    fees.push(FeeSchedule::zero());
                }
            }
            _ => {
                for &a in a_grid {
                    let f = if a == 0.0 {
                        FeeSchedule::zero()
                    } else {
                        FeeSchedule { family: fam, coefficient: a }
                    };
                    if !fees.iter().any(|g| g == &f) {
                        fees.push(f);
                    }
                }
            }
        }
    }
    let mut candidates: Vec<(FeeSchedule, f64)> = Vec::new();
    for &f in &fees {
        for &p in p_grid {
            candidates.push((f, p));
        }
    }
    // tie preference order: smaller a, then smaller p, then linear < square
    candidates.sort_by(|x, y| {
        (x.0.coefficient, x.1, family_rank(x.0.family))
            .partial_cmp(&(y.0.coefficient, y.1, family_rank(y.0.family)))
            .unwrap()
    });

    let mut baselines: HashMap<u64, f64> = HashMap::new();
    let mut sweep = Vec::with_capacity(candidates.len());
    let mut best: Option<usize> = None;

    for (fee, p) in &candidates {
        let closing = ClosingRule::bernoulli_last_two(params.horizon, *p);
        let p_key = p.to_bits();
        let baseline = baselines.get(&p_key).copied();
        let result = evaluate_with_baseline(
            fee, &closing, objective, params, beliefs, cfg, baseline,
        )?;
        baselines.entry(p_key).or_insert(result.mq_zero_fee);
        sweep.push(result);
        let idx = sweep.len() - 1;
        if sweep[idx].reservation_satisfied {
            match best {
                None => best = Some(idx),
                Some(b) => {
                    if sweep[idx].exchange_value < sweep[b].exchange_value {
                        best = Some(idx);
                    }
                }
            }
        }
    }

    match best {
        Some(b) => Ok(OptimizeOutcome {
            best: sweep[b].clone(),
            sweep,
        }),
        None => Err(AuctionError::Infeasible(
            "every candidate violates the reservation constraint".into(),
        )),
    }
}
