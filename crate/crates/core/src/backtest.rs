//! Rolling one-day-ahead evaluation of the prediction intervals.
//!
//! For each day `n = 2, …, m−1` the posterior is fitted on the first `n`
//! days, the predictive interval for the next day's positivity rate is
//! simulated, and two realizations of day `n+1` are scored against it:
//! the cumulative rate `X_{n+1}/N_{n+1}` (the series a tracking dashboard
//! plots) and the single-day rate `y_{n+1}/k_{n+1}` (the quantity the
//! predictive distribution actually describes). The two targets genuinely
//! differ, so both hit series are reported rather than collapsing them.

use std::io;

use chrono::NaiveDate;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::{cumulative_stats, TestSeries};
use crate::model::{posterior_update, PriorSpec};
use crate::predictive::{prediction_interval, simulate_predictive_with, EmpiricalCdf};
use crate::rng::split_stream;

/// One evaluated day of the rolling backtest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BacktestRow {
    /// Fitting horizon: the posterior saw days 1..=n.
    pub day: usize,
    /// Date of the predicted day (n+1).
    pub date: NaiveDate,
    pub lower: f64,
    pub upper: f64,
    /// Cumulative positivity through day n+1; `None` only when no tests
    /// have been reported at all by then.
    pub realized_cumulative_ppt: Option<f64>,
    /// Single-day positivity of day n+1; `None` on a zero-test day.
    pub realized_daily_ppt: Option<f64>,
    pub hit_cumulative: Option<bool>,
    pub hit_daily: Option<bool>,
}

/// Full backtest output: per-day rows and empirical coverage of both
/// target series (hits divided by the rows where the target is defined).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BacktestReport {
    pub rows: Vec<BacktestRow>,
    pub coverage_cumulative: f64,
    pub coverage_daily: f64,
    pub level: f64,
    pub draws: usize,
    pub seed: u64,
}

/// Run the rolling backtest. Day `n`'s interval is simulated on an RNG
/// sub-stream derived from `(seed, n)`, so any row can be replayed alone.
pub fn run_backtest(
    series: &TestSeries,
    prior: &PriorSpec,
    level: f64,
    draws: usize,
    seed: u64,
) -> Result<BacktestReport> {
    let m = series.effective_len();
    if m < 3 {
        return Err(Error::SeriesTooShort { needed: 3, have: m });
    }
    if !level.is_finite() || level <= 0.0 || level >= 1.0 {
        return Err(Error::Validation(format!(
            "level must lie in (0, 1), got {level}"
        )));
    }
    if draws == 0 {
        return Err(Error::Validation("draws must be ≥ 1".into()));
    }

    let effective = series.effective();
    let mut rows = Vec::with_capacity(m - 2);
    for n in 2..m {
        let stats = cumulative_stats(series, n)?;
        let post = posterior_update(prior, &stats);
        let mut rng = split_stream(seed, n as u64);
        let sim = simulate_predictive_with(&post, draws, &mut rng)?;
        let ps: Vec<f64> = sim.samples.iter().map(|s| s.p_star).collect();
        let cdf = EmpiricalCdf::new(&ps)?;
        let (lower, upper) = prediction_interval(&cdf, level)?;

        let next = effective[n]; // day n+1, 1-based
        let realized_cumulative_ppt = cumulative_stats(series, n + 1)?.cumulative_rate();
        let realized_daily_ppt =
            (next.tests > 0).then(|| next.positives as f64 / next.tests as f64);
        let hit = |v: Option<f64>| v.map(|v| v >= lower && v <= upper);
        rows.push(BacktestRow {
            day: n,
            date: next.date,
            lower,
            upper,
            realized_cumulative_ppt,
            realized_daily_ppt,
            hit_cumulative: hit(realized_cumulative_ppt),
            hit_daily: hit(realized_daily_ppt),
        });
    }

    let coverage = |pick: fn(&BacktestRow) -> Option<bool>| {
        let defined: Vec<bool> = rows.iter().filter_map(pick).collect();
        if defined.is_empty() {
            0.0
        } else {
            defined.iter().filter(|h| **h).count() as f64 / defined.len() as f64
        }
    };
    Ok(BacktestReport {
        coverage_cumulative: coverage(|r| r.hit_cumulative),
        coverage_daily: coverage(|r| r.hit_daily),
        rows,
        level,
        draws,
        seed,
    })
}

impl BacktestReport {
    /// One row per evaluated day.
    pub fn write_rows_csv<W: io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "day",
            "date",
            "lower",
            "upper",
            "realized_cumulative_ppt",
            "realized_daily_ppt",
            "hit_cumulative",
            "hit_daily",
        ])?;
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
        let opt_bool = |v: Option<bool>| v.map_or(String::new(), |x| x.to_string());
        for r in &self.rows {
            w.write_record([
                r.day.to_string(),
                r.date.format("%Y-%m-%d").to_string(),
                r.lower.to_string(),
                r.upper.to_string(),
                opt(r.realized_cumulative_ppt),
                opt(r.realized_daily_ppt),
                opt_bool(r.hit_cumulative),
                opt_bool(r.hit_daily),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Plot-ready series: the cumulative positivity of each predicted day
    /// with its interval bounds.
    pub fn write_plot_csv<W: io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["date", "cumulative_ppt", "lower", "upper"])?;
        for r in &self.rows {
            w.write_record([
                r.date.format("%Y-%m-%d").to_string(),
                r.realized_cumulative_ppt
                    .map_or(String::new(), |x| x.to_string()),
                r.lower.to_string(),
                r.upper.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
