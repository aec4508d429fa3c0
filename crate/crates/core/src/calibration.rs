//! Calibration from daily OHLC bars: the mean day price, the realized
//! day-over-day volatility, and the bid-ask spread estimate derived from
//! high-low ranges on log prices (the Corwin-Schultz style estimator).

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{AuctionError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DailyBar {
    pub date: NaiveDate,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
}

impl DailyBar {
    /// The representative day price (O + H + L + C) / 4.
    pub fn day_price(&self) -> f64 {
        (self.open + self.high + self.low + self.close) / 4.0
    }

    fn check(&self) -> std::result::Result<(), String> {
        if !(self.low > 0.0) {
            return Err("prices must be positive".into());
        }
        if self.low > self.open.min(self.close) {
            return Err("low exceeds open/close".into());
        }
        if self.high < self.open.max(self.close) {
            return Err("high below open/close".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub mu: f64,
    pub sigma: f64,
    pub gamma: f64,
    pub n_days: usize,
}

/// Parsed bars plus non-fatal warnings (currently only the unsorted-input
/// notice).
#[derive(Debug, Clone)]
pub struct LoadedBars {
    pub bars: Vec<DailyBar>,
    pub warnings: Vec<String>,
}

/// Loads and date-sorts a `date,open,high,low,close` CSV. Malformed rows
/// fail with their 1-based line number (the header is line 1).
pub fn load_bars(path: &std::path::Path) -> Result<LoadedBars> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => AuctionError::Io(io),
            other => AuctionError::validation(format!("csv open failed: {other:?}")),
        })?;

    let headers = reader.headers().map_err(|e| AuctionError::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    let expected = ["date", "open", "high", "low", "close"];
    if headers.iter().map(|h| h.to_ascii_lowercase()).collect::<Vec<_>>() != expected {
        return Err(AuctionError::Parse {
            line: 1,
            message: format!("expected header {}", expected.join(",")),
        });
    }

    let mut bars = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| AuctionError::Parse {
            line,
            message: e.to_string(),
        })?;
        let parse_err = |message: String| AuctionError::Parse { line, message };
        if record.len() != 5 {
            return Err(parse_err(format!("expected 5 fields, got {}", record.len())));
        }
        let date = record[0]
            .parse::<NaiveDate>()
            .map_err(|e| parse_err(format!("bad date: {e}")))?;
        let mut nums = [0.0f64; 4];
        for (j, v) in nums.iter_mut().enumerate() {
            *v = record[j + 1]
                .parse::<f64>()
                .map_err(|e| parse_err(format!("bad number in field {}: {e}", expected[j + 1])))?;
        }
        let bar = DailyBar {
            date,
            open: nums[0],
            high: nums[1],
            low: nums[2],
            close: nums[3],
        };
        bar.check().map_err(|m| parse_err(m))?;
        bars.push(bar);
    }
    if bars.is_empty() {
        return Err(AuctionError::validation("no data"));
    }

    let mut warnings = Vec::new();
    if bars.windows(2).any(|w| w[0].date > w[1].date) {
        warnings.push("input rows were not date-sorted; sorted".to_string());
        bars.sort_by_key(|b| b.date);
    }
    Ok(LoadedBars { bars, warnings })
}

/// Mean over days of the day price.
pub fn estimate_mu(bars: &[DailyBar]) -> Result<f64> {
    if bars.is_empty() {
        return Err(AuctionError::validation("need at least one bar"));
    }
    Ok(bars.iter().map(|b| b.day_price()).sum::<f64>() / bars.len() as f64)
}

/// Root mean squared day-price difference.
pub fn estimate_sigma(bars: &[DailyBar]) -> Result<f64> {
    if bars.len() < 2 {
        return Err(AuctionError::validation("need at least two bars"));
    }
    let prices: Vec<f64> = bars.iter().map(|b| b.day_price()).collect();
    let n = prices.len() - 1;
    let ssq: f64 = prices.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
    Ok((ssq / n as f64).sqrt())
}

/// High-low spread estimate on natural-log prices, averaged over
/// consecutive day pairs; negative products are floored at zero but the
/// pair still counts in the average.
pub fn estimate_gamma(bars: &[DailyBar]) -> Result<f64> {
    if bars.len() < 2 {
        return Err(AuctionError::validation("need at least two bars"));
    }
    let mut total = 0.0;
    for w in bars.windows(2) {
        let c = w[0].close.ln();
        let mid0 = (w[0].low.ln() + w[0].high.ln()) / 2.0;
        let mid1 = (w[1].low.ln() + w[1].high.ln()) / 2.0;
        total += (4.0 * (c - mid0) * (c - mid1)).max(0.0).sqrt();
    }
    Ok(total / (bars.len() - 1) as f64)
}

/// Runs all three estimators.
pub fn calibrate(bars: &[DailyBar]) -> Result<CalibrationResult> {
    Ok(CalibrationResult {
        mu: estimate_mu(bars)?,
        sigma: estimate_sigma(bars)?,
        gamma: estimate_gamma(bars)?,
        n_days: bars.len(),
    })
}
