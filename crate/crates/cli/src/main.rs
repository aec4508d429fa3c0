//! Command-line front end for the periodic batch auction laboratory.
//!
//! Subcommands: `calibrate` (OHLC bars -> parameters), `market-quality`
//! (MQ / MQ^rho / price impact tables), `best-response` (the strategic
//! seller's value-of-arrival curve), `optimize` (the exchange's fee and
//! closing-time grid search), and `reproduce` (re-runs the pinned
//! configuration behind a published reference table and reports
//! deviations).
//!
//! Exit codes: 0 success, 2 usage, 3 validation, 4 infeasible, 5 I/O.

mod reference;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use auction_core::bilevel::{
    optimize_mechanism, FeeBase, MechanismResult, ObjectiveKind, ObjectiveSpec, OptimizeOutcome,
};
use auction_core::calibration;
use auction_core::engine::{EstimatorConfig, Method, TraderMode};
use auction_core::quality::{quality_curve, QualityReport};
use auction_core::trader::{argmax_first, arrival_value_curve, ArrivalValueCurve, MuTable};
use auction_core::{
    AuctionError, AuctionParams, Beliefs, ClosingRule, FeeFamily, FeeSchedule,
};

#[derive(Parser)]
#[command(
    name = "auction-lab",
    version,
    about = "Periodic batch auction laboratory: calibration, best response, \
             market quality, and fee/closing-time mechanism search"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalOpts {
    /// JSON parameter document (overrides --stock)
    #[arg(long, global = true)]
    params: Option<PathBuf>,

    /// Built-in calibration to use when no parameter document is given
    #[arg(long, global = true, value_enum, default_value_t = Stock::Apple)]
    stock: Stock,

    /// Base RNG seed; identical (config, seed) reproduce bytes exactly
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Monte Carlo path count
    #[arg(long, global = true)]
    paths: Option<u64>,

    /// Estimator backing the trader's conditional objective
    #[arg(long, global = true, value_enum)]
    method: Option<MethodArg>,

    /// Quadrature node count (quad method only)
    #[arg(long, global = true)]
    nodes: Option<usize>,

    /// Worker thread count (default: machine parallelism)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output directory for generated files
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Directory for the best-response table disk cache
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Stock {
    Apple,
    Alphabet,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    /// Monte Carlo inner estimator
    Mc,
    /// Poisson-mixture Gauss-Hermite quadrature (default)
    Quad,
}

#[derive(Clone, Copy, ValueEnum)]
enum BeliefsArg {
    /// Trader conjectures both means correctly
    Perfect,
    /// Both conjectured means one sigma low (case "minus")
    MinusSigma,
    /// Both conjectured means one sigma high (case "plus")
    PlusSigma,
}

#[derive(Args)]
struct RunOpts {
    /// Trader's conjecture of the price means
    #[arg(long, value_enum, default_value_t = BeliefsArg::Perfect)]
    beliefs: BeliefsArg,

    /// Explicit conjectured efficient-price mean (overrides --beliefs)
    #[arg(long, requires = "mu_g_mm")]
    mu_g_star: Option<f64>,

    /// Explicit conjectured market-maker price mean (overrides --beliefs)
    #[arg(long, requires = "mu_g_star")]
    mu_g_mm: Option<f64>,

    /// Fee schedule: "zero", "linear:<a>" or "square:<a>"
    #[arg(long, default_value = "zero", value_parser = parse_fee)]
    fee: FeeSchedule,

    /// Closing rule: "close=<t>" (deterministic) or "p=<x>"
    /// (close at T-1 with probability x, else at T)
    #[arg(long, default_value = "close=last", value_parser = parse_close)]
    close: CloseSpec,
}

#[derive(Clone, Copy, Debug)]
enum CloseSpec {
    Deterministic(Option<u32>),
    BernoulliLastTwo(f64),
}

fn parse_fee(s: &str) -> Result<FeeSchedule, String> {
    if s == "zero" || s == "0" {
        return Ok(FeeSchedule::zero());
    }
    let (family, a) = s
        .split_once(':')
        .ok_or_else(|| format!("bad fee spec {s:?}: expected zero, linear:<a> or square:<a>"))?;
    let a: f64 = a.parse().map_err(|e| format!("bad fee coefficient: {e}"))?;
    match family {
        "linear" => Ok(FeeSchedule::linear(a)),
        "square" => Ok(FeeSchedule::square(a)),
        other => Err(format!("unknown fee family {other:?}")),
    }
}

fn parse_close(s: &str) -> Result<CloseSpec, String> {
    if let Some(p) = s.strip_prefix("p=") {
        let p: f64 = p.parse().map_err(|e| format!("bad probability: {e}"))?;
        if !(0.0..=1.0).contains(&p) {
            return Err(format!("probability {p} outside [0, 1]"));
        }
        return Ok(CloseSpec::BernoulliLastTwo(p));
    }
    if let Some(t) = s.strip_prefix("close=") {
        if t == "last" {
            return Ok(CloseSpec::Deterministic(None));
        }
        let t: u32 = t.parse().map_err(|e| format!("bad closing time: {e}"))?;
        return Ok(CloseSpec::Deterministic(Some(t)));
    }
    Err(format!("bad closing spec {s:?}: expected close=<t> or p=<x>"))
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    /// E[(|clearing - efficient| + average fee)^2] (or its exp-rho form)
    TotalSpread,
    /// E[|clearing - efficient|^2 - seller fee revenue] (or its exp-rho form)
    EfficiencyMinusFee,
}

#[derive(Clone, Copy, ValueEnum)]
enum FeeBaseArg {
    /// Per-capita fee over every arrival in the closing pool
    AllArrivals,
    /// Fee of the strategic trader only
    StrategicOnly,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate mu, sigma and gamma from a daily OHLC CSV
    Calibrate {
        /// Input CSV with header date,open,high,low,close
        #[arg(long)]
        input: PathBuf,
        /// Where to write the result JSON (defaults to stdout only)
        #[arg(long)]
        output: Option<PathBuf>,
    },

    /// Market quality (MQ, MQ^rho, price impact) per arrival time
    MarketQuality {
        #[command(flatten)]
        run: RunOpts,
        /// Risk-aversion exponents for the MQ^rho columns
        #[arg(long, value_delimiter = ',', default_value = "0.1")]
        rho: Vec<f64>,
    },

    /// The strategic seller's value-of-arrival curve and optimal arrival
    BestResponse {
        #[command(flatten)]
        run: RunOpts,
    },

    /// Grid search over fee families, coefficients and closing randomization
    Optimize {
        #[command(flatten)]
        run: RunOpts,
        #[arg(long, value_enum, default_value_t = ObjectiveArg::TotalSpread)]
        objective: ObjectiveArg,
        /// Risk aversion; omit for the risk-neutral quadratic form
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long, value_enum, default_value_t = FeeBaseArg::AllArrivals)]
        fee_base: FeeBaseArg,
        /// Fee coefficient grid (comma separated); default depends on the objective
        #[arg(long, value_delimiter = ',')]
        a_grid: Option<Vec<f64>>,
        /// Closing randomization grid (comma separated)
        #[arg(long, value_delimiter = ',')]
        p_grid: Option<Vec<f64>>,
    },

    /// Re-run the configuration behind a published reference table and
    /// report deviations
    Reproduce {
        /// Reference table number
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5))]
        table: u8,
        #[arg(long, value_enum, default_value_t = Stock::Apple)]
        stock: Stock,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: could not size the worker pool: {e}");
            return ExitCode::from(3);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                AuctionError::Validation(_) | AuctionError::Parse { .. } => 3,
                AuctionError::Infeasible(_) => 4,
                AuctionError::Io(_) => 5,
            })
        }
    }
}

struct Ctx {
    params: AuctionParams,
    cfg: EstimatorConfig,
    out: PathBuf,
    cache: Option<PathBuf>,
}

fn load_ctx(g: &GlobalOpts) -> Result<Ctx, AuctionError> {
    let params = match &g.params {
        Some(path) => {
            let text = fs::read_to_string(path)?;
            let p: AuctionParams = serde_json::from_str(&text).map_err(|e| {
                AuctionError::validation(format!("bad parameter document: {e}"))
            })?;
            p.normalized()
        }
        None => match g.stock {
            Stock::Apple => AuctionParams::apple(),
            Stock::Alphabet => AuctionParams::alphabet(),
        },
    };
    params.validate()?;

    let method = match g.method.unwrap_or(MethodArg::Quad) {
        MethodArg::Mc => Method::MonteCarlo,
        MethodArg::Quad => Method::Quadrature,
    };
    let mut cfg = match method {
        Method::Quadrature => EstimatorConfig::quadrature(g.seed.unwrap_or(12345)),
        Method::MonteCarlo => {
            EstimatorConfig::monte_carlo(g.seed.unwrap_or(12345), 200_000)
        }
    };
    if let Some(p) = g.paths {
        cfg.paths = p;
    }
    if let Some(n) = g.nodes {
        cfg.nodes = n;
    }
    cfg.validate()?;

    fs::create_dir_all(&g.out)?;
    Ok(Ctx {
        params,
        cfg,
        out: g.out.clone(),
        cache: g.cache.clone(),
    })
}

fn resolve_beliefs(run: &RunOpts, params: &AuctionParams) -> Beliefs {
    if let (Some(s), Some(m)) = (run.mu_g_star, run.mu_g_mm) {
        return Beliefs {
            mu_g_star: s,
            mu_g_mm: m,
        };
    }
    match run.beliefs {
        BeliefsArg::Perfect => Beliefs::perfect(params),
        BeliefsArg::MinusSigma => Beliefs::minus_sigma(params),
        BeliefsArg::PlusSigma => Beliefs::plus_sigma(params),
    }
}

fn resolve_close(spec: CloseSpec, params: &AuctionParams) -> Result<ClosingRule, AuctionError> {
    let rule = match spec {
        CloseSpec::Deterministic(t) => {
            ClosingRule::deterministic(t.unwrap_or(params.horizon))
        }
        CloseSpec::BernoulliLastTwo(p) => {
            ClosingRule::bernoulli_last_two(params.horizon, p)
        }
    };
    rule.validate(params)?;
    Ok(rule)
}

/// Builds the trader's policy table, warmed from (and saved back to) the
/// cache directory when one is configured.
fn build_table(
    ctx: &Ctx,
    beliefs: &Beliefs,
    fee: &FeeSchedule,
    closing: &ClosingRule,
) -> Result<(MuTable, Option<PathBuf>), AuctionError> {
    let table = MuTable::new(&ctx.params, beliefs, fee, closing, &ctx.cfg)?;
    let cache_file = match &ctx.cache {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            let file = dir.join(format!("mu_{}.json", table.cache_key()));
            if file.exists() {
                let loaded = table.warm_from(&file)?;
                eprintln!("cache: warmed {loaded} cells from {}", file.display());
            }
            Some(file)
        }
        None => None,
    };
    Ok((table, cache_file))
}

fn save_table(table: &MuTable, cache_file: &Option<PathBuf>) -> Result<(), AuctionError> {
    if let Some(file) = cache_file {
        table.save(file)?;
        eprintln!("cache: saved {} cells to {}", table.len(), file.display());
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), AuctionError> {
    match &cli.command {
        Command::Calibrate { input, output } => {
            let ctx_out = &cli.global.out;
            fs::create_dir_all(ctx_out)?;
            let loaded = calibration::load_bars(input)?;
            for w in &loaded.warnings {
                eprintln!("warning: {w}");
            }
            let result = calibration::calibrate(&loaded.bars)?;
            let doc = serde_json::to_string_pretty(&result).unwrap();
            println!("{doc}");
            if let Some(path) = output {
                fs::write(path, doc.as_bytes())?;
            }
            Ok(())
        }

        Command::MarketQuality { run: opts, rho } => {
            let ctx = load_ctx(&cli.global)?;
            let beliefs = resolve_beliefs(opts, &ctx.params);
            let closing = resolve_close(opts.close, &ctx.params)?;
            let (table, cache_file) = build_table(&ctx, &beliefs, &opts.fee, &closing)?;
            let report = quality_curve(
                &ctx.params,
                &opts.fee,
                &closing,
                rho,
                &ctx.cfg,
                &TraderMode::Policy(&table),
            );
            save_table(&table, &cache_file)?;
            let path = ctx.out.join("market_quality.csv");
            write_quality_csv(&path, &report)?;
            let last = report.rows.last().expect("non-empty grid");
            println!(
                "wrote {} ({} rows, {} paths); last row: tau={} MQ={:.4} impact={:.4}",
                path.display(),
                report.rows.len(),
                report.paths,
                last.tau,
                last.mq,
                last.price_impact
            );
            Ok(())
        }

        Command::BestResponse { run: opts } => {
            let ctx = load_ctx(&cli.global)?;
            let beliefs = resolve_beliefs(opts, &ctx.params);
            let closing = resolve_close(opts.close, &ctx.params)?;
            let (table, cache_file) = build_table(&ctx, &beliefs, &opts.fee, &closing)?;
            let curve = arrival_value_curve(
                &ctx.params,
                &beliefs,
                &opts.fee,
                &closing,
                &ctx.cfg,
                &table,
            );
            save_table(&table, &cache_file)?;
            let values: Vec<f64> = curve.points.iter().map(|p| p.value).collect();
            let tau_hat = curve.points[argmax_first(&values)].tau;
            let path = ctx.out.join("best_response.json");
            write_best_response_json(&path, tau_hat, &curve)?;
            println!("wrote {}; tau_hat={tau_hat}", path.display());
            Ok(())
        }

        Command::Optimize {
            run: opts,
            objective,
            rho,
            fee_base,
            a_grid,
            p_grid,
        } => {
            let ctx = load_ctx(&cli.global)?;
            let beliefs = resolve_beliefs(opts, &ctx.params);
            let kind = match objective {
                ObjectiveArg::TotalSpread => ObjectiveKind::TotalSpread,
                ObjectiveArg::EfficiencyMinusFee => ObjectiveKind::EfficiencyMinusFee,
            };
            let spec = ObjectiveSpec {
                kind,
                rho: *rho,
                fee_base: match fee_base {
                    FeeBaseArg::AllArrivals => FeeBase::AllArrivals,
                    FeeBaseArg::StrategicOnly => FeeBase::StrategicOnly,
                },
            };
            let a_default: Vec<f64> = match kind {
                // brackets the published optima of both objectives
                ObjectiveKind::TotalSpread => (0..=10).map(|i| i as f64 * 0.001).collect(),
                ObjectiveKind::EfficiencyMinusFee => {
                    (0..=30).map(|i| i as f64 * 0.01).collect()
                }
            };
            let p_default: Vec<f64> = (0..=10)
                .map(|i| i as f64 * 0.02)
                .chain([0.5, 1.0])
                .collect();
            let a_grid = a_grid.clone().unwrap_or(a_default);
            let p_grid = p_grid.clone().unwrap_or(p_default);
            let outcome = optimize_mechanism(
                &spec,
                &[FeeFamily::Linear, FeeFamily::Square],
                &a_grid,
                &p_grid,
                &ctx.params,
                &beliefs,
                &ctx.cfg,
            )?;
            let sweep_path = ctx.out.join("optimize_sweep.csv");
            write_sweep_csv(&sweep_path, &outcome.sweep)?;
            let best_path = ctx.out.join("optimize_best.json");
            fs::write(
                &best_path,
                serde_json::to_string_pretty(&outcome.best).unwrap(),
            )?;
            print_best(&outcome);
            println!("wrote {} and {}", sweep_path.display(), best_path.display());
            Ok(())
        }

        Command::Reproduce { table, stock } => {
            let mut global = GlobalOpts {
                stock: *stock,
                params: cli.global.params.clone(),
                seed: cli.global.seed,
                paths: cli.global.paths,
                method: cli.global.method,
                nodes: cli.global.nodes,
                threads: None,
                out: cli.global.out.clone(),
                cache: cli.global.cache.clone(),
            };
            // mechanism sweeps re-run the whole pipeline per grid point, so
            // their unconfigured default path count is reduced
            if global.paths.is_none() && (*table == 4 || *table == 5) {
                global.paths = Some(40_000);
            }
            let ctx = load_ctx(&global)?;
            match table {
                1 => reproduce_table1(&ctx, *stock),
                2 => reproduce_table2(&ctx, *stock),
                3 => reproduce_table3(&ctx, *stock),
                4 => reproduce_table4(&ctx, *stock),
                5 => reproduce_table5(&ctx, *stock),
                _ => unreachable!("range-checked by the parser"),
            }
        }
    }
}

fn stock_name(stock: Stock) -> &'static str {
    match stock {
        Stock::Apple => "apple",
        Stock::Alphabet => "alphabet",
    }
}

fn rel_dev(measured: f64, reference: f64) -> f64 {
    (measured - reference) / reference.abs().max(1e-12)
}

fn write_quality_csv(path: &Path, report: &QualityReport) -> Result<(), AuctionError> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| AuctionError::validation(format!("csv write failed: {e}")))?;
    let mut header = vec![
        "tau".to_string(),
        "trader_value".into(),
        "trader_value_se".into(),
        "mq".into(),
        "mq_se".into(),
        "price_impact".into(),
        "price_impact_se".into(),
        "expected_mu_hat".into(),
        "expected_mu_hat_se".into(),
    ];
    for rho in &report.rho_list {
        header.push(format!("mq_rho_{rho}"));
        header.push(format!("mq_rho_{rho}_se"));
    }
    w.write_record(&header).map_err(csv_err)?;
    for r in &report.rows {
        let mut rec = vec![
            r.tau.to_string(),
            r.trader_value.to_string(),
            r.trader_value_se.to_string(),
            r.mq.to_string(),
            r.mq_se.to_string(),
            r.price_impact.to_string(),
            r.price_impact_se.to_string(),
            r.expected_mu_hat.to_string(),
            r.expected_mu_hat_se.to_string(),
        ];
        for (_, v, se) in &r.mq_rho {
            rec.push(v.to_string());
            rec.push(se.to_string());
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> AuctionError {
    AuctionError::validation(format!("csv write failed: {e}"))
}

fn write_best_response_json(
    path: &Path,
    tau_hat: u32,
    curve: &ArrivalValueCurve,
) -> Result<(), AuctionError> {
    let doc = serde_json::json!({
        "tau_hat": tau_hat,
        "curve": curve.points,
        "adjacent_diff": curve.adjacent_diff,
    });
    fs::write(path, serde_json::to_string_pretty(&doc).unwrap())?;
    Ok(())
}

fn write_sweep_csv(path: &Path, sweep: &[MechanismResult]) -> Result<(), AuctionError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record([
        "fee_family",
        "fee_coefficient",
        "p_close_early",
        "tau_hat",
        "exchange_value",
        "exchange_value_se",
        "fee_revenue",
        "fee_revenue_se",
        "mq_with_fee",
        "mq_with_fee_se",
        "mq_zero_fee",
        "trader_value",
        "trader_value_se",
        "reservation_satisfied",
    ])
    .map_err(csv_err)?;
    for r in sweep {
        let p = if r.closing.is_deterministic() {
            0.0
        } else {
            r.closing.probs[0]
        };
        w.write_record([
            r.fee.family.to_string(),
            r.fee.coefficient.to_string(),
            p.to_string(),
            r.tau_hat.to_string(),
            r.exchange_value.to_string(),
            r.exchange_value_se.to_string(),
            r.fee_revenue.to_string(),
            r.fee_revenue_se.to_string(),
            r.mq_with_fee.to_string(),
            r.mq_with_fee_se.to_string(),
            r.mq_zero_fee.to_string(),
            r.trader_value.to_string(),
            r.trader_value_se.to_string(),
            r.reservation_satisfied.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn print_best(outcome: &OptimizeOutcome) {
    let b = &outcome.best;
    let p = if b.closing.is_deterministic() {
        0.0
    } else {
        b.closing.probs[0]
    };
    println!(
        "best: fee={} p={} tau_hat={} value={:.4} (se {:.4}) revenue={:.4} mq={:.4}",
        b.fee, p, b.tau_hat, b.exchange_value, b.exchange_value_se, b.fee_revenue, b.mq_with_fee
    );
}

/// Seller value, MQ, MQ^0.1, price impact and E[mu_hat] per arrival time,
/// perfect conjecture, zero fee, deterministic close.
fn reproduce_table1(ctx: &Ctx, stock: Stock) -> Result<(), AuctionError> {
    let beliefs = Beliefs::perfect(&ctx.params);
    let fee = FeeSchedule::zero();
    let closing = ClosingRule::deterministic(ctx.params.horizon);
    let (table, cache_file) = build_table(ctx, &beliefs, &fee, &closing)?;
    let report = quality_curve(
        &ctx.params,
        &fee,
        &closing,
        &[0.1],
        &ctx.cfg,
        &TraderMode::Policy(&table),
    );
    let curve = arrival_value_curve(&ctx.params, &beliefs, &fee, &closing, &ctx.cfg, &table);
    save_table(&table, &cache_file)?;

    let reference: &[reference::QualityRow] = match stock {
        Stock::Apple => &reference::TABLE1_APPLE,
        Stock::Alphabet => &reference::TABLE1_ALPHABET,
    };
    let path = ctx.out.join(format!("reproduce_table1_{}.csv", stock_name(stock)));
    let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
    w.write_record([
        "tau",
        "trader_value", "trader_value_ref", "trader_value_dev",
        "mq", "mq_ref", "mq_dev",
        "mq_rho_0.1", "mq_rho_0.1_ref", "mq_rho_0.1_dev",
        "price_impact", "price_impact_ref", "price_impact_dev",
        "expected_mu_hat", "expected_mu_hat_ref", "expected_mu_hat_dev",
    ])
    .map_err(csv_err)?;
    println!("tau  value (ref, dev%)      mq (ref, dev%)        impact (ref, dev%)    e_mu (ref, dev%)");
    for (row, &(tau, v_ref, mq_ref, rho_ref, imp_ref, mu_ref)) in
        report.rows.iter().zip(reference)
    {
        assert_eq!(row.tau, tau);
        let v = curve.points[(tau - 1) as usize].value;
        let rho_v = row.mq_rho[0].1;
        w.write_record([
            tau.to_string(),
            v.to_string(), v_ref.to_string(), rel_dev(v, v_ref).to_string(),
            row.mq.to_string(), mq_ref.to_string(), rel_dev(row.mq, mq_ref).to_string(),
            rho_v.to_string(), rho_ref.to_string(), rel_dev(rho_v, rho_ref).to_string(),
            row.price_impact.to_string(), imp_ref.to_string(),
            rel_dev(row.price_impact, imp_ref).to_string(),
            row.expected_mu_hat.to_string(), mu_ref.to_string(),
            rel_dev(row.expected_mu_hat, mu_ref).to_string(),
        ])
        .map_err(csv_err)?;
        println!(
            "{tau:3}  {v:7.4} ({v_ref:7.4}, {:+6.1}%)  {:7.4} ({mq_ref:7.4}, {:+6.1}%)  {:7.4} ({imp_ref:7.4}, {:+6.1}%)  {:8.3} ({mu_ref:8.3}, {:+5.2}%)",
            100.0 * rel_dev(v, v_ref),
            row.mq,
            100.0 * rel_dev(row.mq, mq_ref),
            row.price_impact,
            100.0 * rel_dev(row.price_impact, imp_ref),
            row.expected_mu_hat,
            100.0 * rel_dev(row.expected_mu_hat, mu_ref),
        );
    }
    w.flush()?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Both conjecture cases (minus and plus one sigma), Apple layout: MQ,
/// MQ^0.1, MQ^1, price impact, E[mu_hat] per arrival time.
fn reproduce_table2(ctx: &Ctx, stock: Stock) -> Result<(), AuctionError> {
    if stock != Stock::Apple {
        return Err(AuctionError::validation(
            "table 2 reference values are published for apple only",
        ));
    }
    let fee = FeeSchedule::zero();
    let closing = ClosingRule::deterministic(ctx.params.horizon);
    let path = ctx.out.join("reproduce_table2_apple.csv");
    let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
    w.write_record([
        "case", "tau",
        "mq", "mq_ref", "mq_dev",
        "mq_rho_0.1", "mq_rho_0.1_ref", "mq_rho_0.1_dev",
        "mq_rho_1", "mq_rho_1_ref", "mq_rho_1_dev",
        "price_impact", "price_impact_ref", "price_impact_dev",
        "expected_mu_hat", "expected_mu_hat_ref", "expected_mu_hat_dev",
    ])
    .map_err(csv_err)?;
    for (case, beliefs, reference) in [
        (
            "minus",
            Beliefs::minus_sigma(&ctx.params),
            &reference::TABLE2_MINUS,
        ),
        (
            "plus",
            Beliefs::plus_sigma(&ctx.params),
            &reference::TABLE2_PLUS,
        ),
    ] {
        let (table, cache_file) = build_table(ctx, &beliefs, &fee, &closing)?;
        let report = quality_curve(
            &ctx.params,
            &fee,
            &closing,
            &[0.1, 1.0],
            &ctx.cfg,
            &TraderMode::Policy(&table),
        );
        save_table(&table, &cache_file)?;
        println!("case ({case}):");
        println!("tau  mq (ref, dev%)        impact (ref, dev%)    e_mu (ref, dev%)");
        for (row, &(tau, mq_ref, r01_ref, r1_ref, imp_ref, mu_ref)) in
            report.rows.iter().zip(reference)
        {
            assert_eq!(row.tau, tau);
            let r01 = row.mq_rho[0].1;
            let r1 = row.mq_rho[1].1;
            w.write_record([
                case.to_string(), tau.to_string(),
                row.mq.to_string(), mq_ref.to_string(),
                rel_dev(row.mq, mq_ref).to_string(),
                r01.to_string(), r01_ref.to_string(), rel_dev(r01, r01_ref).to_string(),
                r1.to_string(), r1_ref.to_string(), rel_dev(r1, r1_ref).to_string(),
                row.price_impact.to_string(), imp_ref.to_string(),
                rel_dev(row.price_impact, imp_ref).to_string(),
                row.expected_mu_hat.to_string(), mu_ref.to_string(),
                rel_dev(row.expected_mu_hat, mu_ref).to_string(),
            ])
            .map_err(csv_err)?;
            println!(
                "{tau:3}  {:7.4} ({mq_ref:7.4}, {:+6.1}%)  {:7.4} ({imp_ref:7.4}, {:+6.1}%)  {:8.3} ({mu_ref:8.3}, {:+5.2}%)",
                row.mq,
                100.0 * rel_dev(row.mq, mq_ref),
                row.price_impact,
                100.0 * rel_dev(row.price_impact, imp_ref),
                row.expected_mu_hat,
                100.0 * rel_dev(row.expected_mu_hat, mu_ref),
            );
        }
    }
    w.flush()?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Closing-time randomization sweep, lower conjecture, zero fee: MQ at the
/// trader's optimal arrival per p.
fn reproduce_table3(ctx: &Ctx, stock: Stock) -> Result<(), AuctionError> {
    let beliefs = Beliefs::minus_sigma(&ctx.params);
    let fee = FeeSchedule::zero();
    let reference: &[reference::RandRow] = match stock {
        Stock::Apple => &reference::TABLE3_APPLE,
        Stock::Alphabet => &reference::TABLE3_ALPHABET,
    };
    let path = ctx.out.join(format!("reproduce_table3_{}.csv", stock_name(stock)));
    let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
    w.write_record([
        "p", "mq", "mq_se", "mq_ref", "mq_dev", "tau_hat", "tau_hat_ref",
    ])
    .map_err(csv_err)?;
    println!("  p     mq (ref, dev%)        tau_hat (ref)");
    let mut best = (f64::INFINITY, 0.0);
    for &(p, mq_ref, tau_ref) in reference {
        let closing = ClosingRule::bernoulli_last_two(ctx.params.horizon, p);
        let (table, cache_file) = build_table(ctx, &beliefs, &fee, &closing)?;
        let curve =
            arrival_value_curve(&ctx.params, &beliefs, &fee, &closing, &ctx.cfg, &table);
        let values: Vec<f64> = curve.points.iter().map(|pt| pt.value).collect();
        let tau_hat = curve.points[argmax_first(&values)].tau;
        let report = quality_curve(
            &ctx.params,
            &fee,
            &closing,
            &[],
            &ctx.cfg,
            &TraderMode::Policy(&table),
        );
        save_table(&table, &cache_file)?;
        let row = report
            .rows
            .iter()
            .find(|r| r.tau == tau_hat)
            .expect("tau_hat on the grid");
        if row.mq < best.0 {
            best = (row.mq, p);
        }
        w.write_record([
            p.to_string(),
            row.mq.to_string(),
            row.mq_se.to_string(),
            mq_ref.to_string(),
            rel_dev(row.mq, mq_ref).to_string(),
            tau_hat.to_string(),
            tau_ref.to_string(),
        ])
        .map_err(csv_err)?;
        println!(
            "{p:5.2}  {:7.4} ({mq_ref:7.4}, {:+6.1}%)  {tau_hat:2} ({tau_ref})",
            row.mq,
            100.0 * rel_dev(row.mq, mq_ref),
        );
    }
    w.flush()?;
    println!("measured optimum: p={} (mq {:.4})", best.1, best.0);
    println!("wrote {}", path.display());
    Ok(())
}

/// Spread-plus-fee mechanism search (risk neutral), lower conjecture:
/// optimum over the square/linear fee grids versus the reference row.
fn reproduce_table4(ctx: &Ctx, stock: Stock) -> Result<(), AuctionError> {
    let beliefs = Beliefs::minus_sigma(&ctx.params);
    let spec = ObjectiveSpec::total_spread();
    let a_grid: Vec<f64> = (0..=10).map(|i| i as f64 * 0.001).collect();
    let p_grid = vec![0.0, 0.1];
    let outcome = optimize_mechanism(
        &spec,
        &[FeeFamily::Linear, FeeFamily::Square],
        &a_grid,
        &p_grid,
        &ctx.params,
        &beliefs,
        &ctx.cfg,
    )?;
    let reference = match stock {
        Stock::Apple => reference::TABLE4_APPLE[0],
        Stock::Alphabet => reference::TABLE4_ALPHABET[0],
    };
    let path = ctx.out.join(format!("reproduce_table4_{}.csv", stock_name(stock)));
    write_sweep_csv(&path, &outcome.sweep)?;
    print_best(&outcome);
    let (_, a_ref, p_ref, tau_ref, value_ref, mq0_ref) = reference;
    let b = &outcome.best;
    println!(
        "reference: fee={a_ref}t^2 p={p_ref} tau_hat={tau_ref} value={value_ref} mq_zero_fee={mq0_ref}"
    );
    println!(
        "deviation: value {:+.1}%  mq_zero_fee {:+.1}%",
        100.0 * rel_dev(b.exchange_value, value_ref),
        100.0 * rel_dev(b.mq_zero_fee, mq0_ref),
    );
    println!("wrote {}", path.display());
    Ok(())
}

/// Efficiency-minus-fee mechanism search (risk neutral), lower conjecture:
/// optimum over the square/linear fee grids versus the reference row.
fn reproduce_table5(ctx: &Ctx, stock: Stock) -> Result<(), AuctionError> {
    let beliefs = Beliefs::minus_sigma(&ctx.params);
    let spec = ObjectiveSpec::efficiency_minus_fee();
    let a_grid: Vec<f64> = (0..=30).map(|i| i as f64 * 0.01).collect();
    let p_grid = vec![0.0];
    let outcome = optimize_mechanism(
        &spec,
        &[FeeFamily::Linear, FeeFamily::Square],
        &a_grid,
        &p_grid,
        &ctx.params,
        &beliefs,
        &ctx.cfg,
    )?;
    let reference = match stock {
        Stock::Apple => reference::TABLE5_APPLE[0],
        Stock::Alphabet => reference::TABLE5_ALPHABET[0],
    };
    let path = ctx.out.join(format!("reproduce_table5_{}.csv", stock_name(stock)));
    write_sweep_csv(&path, &outcome.sweep)?;
    print_best(&outcome);
    let (_, a_ref, p_ref, tau_ref, gain_ref, fee_ref, mqx_ref, mq0_ref) = reference;
    let b = &outcome.best;
    println!(
        "reference: fee={a_ref}t^2 p={p_ref} tau_hat={tau_ref} gain={gain_ref} fee_gain={fee_ref} mq_fee={mqx_ref} mq_zero_fee={mq0_ref}"
    );
    println!(
        "deviation: gain {:+.1}%  fee_gain {:+.1}%  mq_fee {:+.1}%",
        100.0 * rel_dev(b.exchange_value, gain_ref),
        100.0 * rel_dev(b.fee_revenue, fee_ref),
        100.0 * rel_dev(b.mq_with_fee, mqx_ref),
    );
    println!("wrote {}", path.display());
    Ok(())
}
