//! The trader's conditional objective
//! E[ 1_{p <= Pcl} K(Pcl - p)(Pcl - P* - xi(t)) | (t, n, sum) ]
//! under belief means, marginalized over closing times at or after t.
//!
//! Two interchangeable estimators:
//!
//! * Quadrature: the future-arrival count is a Poisson mixture (merged
//!   across closing-rule support points, since the integrand given the
//!   count does not depend on the closing time); given the count m, the sum
//!   of future prices is one Gaussian. The trader price and the efficient
//!   price integrate in closed form — the efficient price enters linearly,
//!   and the price indicator reduces to truncated-Gaussian moments — so a
//!   single Gauss-Hermite sweep over the future-price sum remains.
//! * Monte Carlo: direct conditional sampling with counter-based streams.
//!
//! The closed-form inner integral: with n_tot others summing to A,
//! c = n_tot + 1, inclusion means p < b = A/n_tot (and then execution is
//! automatic), Pcl = (A + p)/c. Writing p = mu + sigma Z, u = A - n_tot mu,
//! v = A - c D + mu with D = mu_g_star + xi(t), z = (b - mu)/sigma:
//!
//!   E[...] = (K/c^2) [ u v Phi(z) - (u - n_tot v) sigma phi(z)
//!                      - n_tot sigma^2 (Phi(z) - z phi(z)) ].

use crate::engine::{self, rng, ArrivalMeasure, EstimatorConfig, Method, PATH_CHUNK};
use crate::model::{AuctionParams, Beliefs, ClosingRule, FeeSchedule, InformationSet};
use crate::quadrature::{gauss_hermite, norm_cdf, norm_pdf};

/// Beyond this standardized distance the inclusion probability is treated
/// as 0 or 1; the error is below f64 noise for the payoff scale.
const SATURATE_Z: f64 = 8.0;

struct MixTerm {
    /// Mixture weight: sum over closing support of q_k * Poisson pmf.
    w: f64,
    m: u32,
    /// (future-price-sum node, Gauss-Hermite weight / sqrt(pi)).
    nodes: Vec<(f64, f64)>,
}

/// Precomputed quadrature context for one decision time `t`. Building it
/// once and sweeping many (n, sum, mu) triples is what makes tabulating the
/// best response cheap.
pub struct CondCtx {
    pub t: u32,
    sigma: f64,
    supply_slope: f64,
    /// mu_g_star + xi(t); the efficient price and the fee only enter the
    /// integrand through this shift.
    d: f64,
    terms: Vec<MixTerm>,
}

impl CondCtx {
    pub fn build(
        t: u32,
        params: &AuctionParams,
        beliefs: &Beliefs,
        fee: &FeeSchedule,
        closing: &ClosingRule,
        measure: &ArrivalMeasure,
        cfg: &EstimatorConfig,
    ) -> Self {
        let sigma = params.sigma;
        // closing times before t contribute zero payoff and are simply
        // absent from the mixture mass
        let live: Vec<(f64, f64)> = closing
            .support
            .iter()
            .zip(&closing.probs)
            .filter(|(&tk, _)| tk >= t)
            .map(|(&tk, &qk)| (measure.mass(t, tk), qk))
            .collect();
        let mass_total: f64 = live.iter().map(|&(_, q)| q).sum();

        let (gx, gw) = gauss_hermite(cfg.nodes);
        let sqrt_pi = std::f64::consts::PI.sqrt();

        let mut terms = Vec::new();
        if mass_total > 0.0 {
            // incremental pmf per support point, stop once the mixture tail
            // is below the configured mass
            let mut pmf: Vec<f64> = live.iter().map(|&(lam, _)| (-lam).exp()).collect();
            let mut covered = 0.0;
            let mut m = 0u32;
            loop {
                let w: f64 = pmf
                    .iter()
                    .zip(&live)
                    .map(|(&p, &(_, q))| q * p)
                    .sum();
                if w > 0.0 {
                    let nodes = if m == 0 {
                        vec![(0.0, 1.0)]
                    } else {
                        let mf = m as f64;
                        let scale = (2.0 * mf).sqrt() * sigma;
                        gx.iter()
                            .zip(&gw)
                            .map(|(&x, &gwj)| {
                                (mf * beliefs.mu_g_mm + scale * x, gwj / sqrt_pi)
                            })
                            .collect()
                    };
                    terms.push(MixTerm { w, m, nodes });
                }
                covered += w;
                if covered >= mass_total - cfg.poisson_tail_eps || m > 500 {
                    break;
                }
                m += 1;
                for (p, &(lam, _)) in pmf.iter_mut().zip(&live) {
                    *p *= lam / m as f64;
                }
            }
        }

        CondCtx {
            t,
            sigma,
            supply_slope: params.supply_slope,
            d: beliefs.mu_g_star + fee.eval(t as f64),
            terms,
        }
    }

    /// Conditional value at (n resting orders summing to `sum_prices`,
    /// trader mean `mu`).
    pub fn value(&self, n: u32, sum_prices: f64, mu: f64) -> f64 {
        let sig = self.sigma;
        let sig2 = sig * sig;
        let mut total = 0.0;
        for term in &self.terms {
            let n_tot = (n + term.m) as f64;
            let c = n_tot + 1.0;
            let mut acc = 0.0;
            for &(y, wy) in &term.nodes {
                let a = sum_prices + y;
                let b = a / n_tot;
                let z = (b - mu) / sig;
                if z <= -SATURATE_Z {
                    continue;
                }
                let u = a - n_tot * mu;
                let v = a - c * self.d + mu;
                let inner = if z >= SATURATE_Z {
                    u * v - n_tot * sig2
                } else {
                    let phi = norm_pdf(z);
                    let cap = norm_cdf(z);
                    u * v * cap - (u - n_tot * v) * sig * phi
                        - n_tot * sig2 * (cap - z * phi)
                };
                acc += wy * inner;
            }
            total += term.w * acc / (c * c);
        }
        self.supply_slope * total
    }
}

/// Conditional value via the estimator selected in `cfg`.
pub fn conditional_value(
    info: &InformationSet,
    mu: f64,
    params: &AuctionParams,
    beliefs: &Beliefs,
    fee: &FeeSchedule,
    closing: &ClosingRule,
    cfg: &EstimatorConfig,
) -> f64 {
    let measure = engine::arrival_measure(params, fee);
    match cfg.method {
        Method::Quadrature => {
            let ctx = CondCtx::build(info.t, params, beliefs, fee, closing, &measure, cfg);
            ctx.value(info.n, info.sum_prices, mu)
        }
        Method::MonteCarlo => {
            conditional_value_mc_stats(info, mu, params, beliefs, fee, closing, &measure, cfg).0
        }
    }
}

/// Monte Carlo estimate with its standard error.
#[allow(clippy::too_many_arguments)]
pub fn conditional_value_mc_stats(
    info: &InformationSet,
    mu: f64,
    params: &AuctionParams,
    beliefs: &Beliefs,
    fee: &FeeSchedule,
    closing: &ClosingRule,
    measure: &ArrivalMeasure,
    cfg: &EstimatorConfig,
) -> (f64, f64) {
    let sigma = params.sigma;
    let k = params.supply_slope;
    let xi = fee.eval(info.t as f64);
    let seed = cfg.seed;
    let t = info.t;
    let n = info.n;
    let s = info.sum_prices;

    let chunks = engine::chunked_reduce(cfg.paths, PATH_CHUNK, |range| {
        let mut sum = 0.0f64;
        let mut sumsq = 0.0f64;
        for i in range {
            let u_close =
                rng::uniform(&mut rng::stream_rng(seed, i, rng::stream::CLOSING));
            let close = closing.sample(u_close);
            let payoff = if close < t {
                0.0
            } else {
                let lam = measure.mass(t, close);
                let u_m =
                    rng::uniform(&mut rng::stream_rng(seed, i, rng::stream::COUNTS));
                let m = rng::poisson_from_uniform(u_m, lam);
                let y = if m > 0 {
                    let z = rng::standard_normal(&mut rng::stream_rng(
                        seed,
                        i,
                        rng::stream::PRICES_BASE,
                    ));
                    m as f64 * beliefs.mu_g_mm + (m as f64).sqrt() * sigma * z
                } else {
                    0.0
                };
                let p_star = beliefs.mu_g_star
                    + sigma
                        * rng::standard_normal(&mut rng::stream_rng(
                            seed,
                            i,
                            rng::stream::EFFICIENT,
                        ));
                let p = mu
                    + sigma
                        * rng::standard_normal(&mut rng::stream_rng(
                            seed,
                            i,
                            rng::stream::TRADER,
                        ));
                let n_tot = (n + m) as f64;
                let a = s + y;
                if a / n_tot > p {
                    let pcl = (a + p) / (n_tot + 1.0);
                    k * (pcl - p) * (pcl - p_star - xi)
                } else {
                    0.0
                }
            };
            sum += payoff;
            sumsq += payoff * payoff;
        }
        (sum, sumsq)
    });

    let (sum, sumsq) = chunks
        .iter()
        .fold((0.0, 0.0), |(a, b), &(c, d)| (a + c, b + d));
    let nf = cfg.paths as f64;
    let mean = sum / nf;
    let var = (sumsq / nf - mean * mean).max(0.0);
    (mean, (var / nf).sqrt())
}
