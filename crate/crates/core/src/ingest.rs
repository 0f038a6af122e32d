//! Ingestion of daily testing reports and derived series.
//!
//! Input is CSV with a header row carrying at least `DATE`, `COVID_TEST`
//! and `COVID_COUNT` (any other columns are tolerated and ignored), ISO
//! dates, UTF-8. Validation failures carry the 1-based file row so bad
//! rows can be found and fixed.

use std::collections::HashMap;
use std::io;

use chrono::NaiveDate;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::SufficientStats;

const COL_DATE: &str = "DATE";
const COL_TESTS: &str = "COVID_TEST";
const COL_POSITIVES: &str = "COVID_COUNT";

/// One day of reported counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DailyRecord {
    pub date: NaiveDate,
    pub tests: u64,
    pub positives: u64,
}

/// A validated, date-sorted series of daily records. The trailing
/// `drop_last` records are kept but excluded from every analysis view,
/// mirroring the practice of ignoring the most recent days while their
/// reports are still being revised.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestSeries {
    records: Vec<DailyRecord>,
    drop_last: usize,
}

impl TestSeries {
    /// Build from records already sorted by strictly increasing date.
    pub fn new(records: Vec<DailyRecord>, drop_last: usize) -> Result<Self> {
        for pair in records.windows(2) {
            if pair[1].date <= pair[0].date {
                return Err(Error::Validation(format!(
                    "dates not strictly increasing at {}",
                    pair[1].date
                )));
            }
        }
        for (i, rec) in records.iter().enumerate() {
            if rec.positives > rec.tests {
                return Err(Error::CountViolation {
                    row: i as u64 + 1,
                    positives: rec.positives,
                    tests: rec.tests,
                });
            }
        }
        Ok(Self { records, drop_last })
    }

    /// Records inside the analysis window (everything but the dropped tail).
    pub fn effective(&self) -> &[DailyRecord] {
        let keep = self.records.len().saturating_sub(self.drop_last);
        &self.records[..keep]
    }

    /// Number of days in the analysis window (m).
    pub fn effective_len(&self) -> usize {
        self.effective().len()
    }

    /// All parsed records, including the dropped tail.
    pub fn all_records(&self) -> &[DailyRecord] {
        &self.records
    }

    pub fn drop_last(&self) -> usize {
        self.drop_last
    }

    /// Serialize all records back to the ingestion schema; a round-trip
    /// through [`parse_report`] reproduces the series exactly.
    pub fn write_csv<W: io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([COL_DATE, COL_TESTS, COL_POSITIVES])?;
        for rec in &self.records {
            w.write_record([
                rec.date.format("%Y-%m-%d").to_string(),
                rec.tests.to_string(),
                rec.positives.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Windowing options applied at parse time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParseOptions {
    /// Records excluded from the analysis tail (still-revising days).
    pub drop_last: usize,
    /// Drop records dated before this.
    pub start_date: Option<NaiveDate>,
}

impl Default for ParseOptions {
    fn default() -> Self {
        Self {
            drop_last: 3,
            start_date: None,
        }
    }
}

/// Parse a daily testing report. Rows are validated (counts parse, dates
/// parse and are unique, positives ≤ tests) and sorted by date; errors
/// name the offending 1-based file row.
pub fn parse_report<R: io::Read>(reader: R, opts: &ParseOptions) -> Result<TestSeries> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let headers = csv_reader.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let date_idx = col(COL_DATE)?;
    let tests_idx = col(COL_TESTS)?;
    let positives_idx = col(COL_POSITIVES)?;

    let mut records = Vec::new();
    let mut seen: HashMap<NaiveDate, u64> = HashMap::new();
    for row in csv_reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let field = |idx: usize| row.get(idx).unwrap_or("");

        let date_raw = field(date_idx);
        let date = NaiveDate::parse_from_str(date_raw, "%Y-%m-%d").map_err(|_| Error::BadDate {
            row: line,
            value: date_raw.to_string(),
        })?;
        let parse_count = |idx: usize, name: &str| -> Result<u64> {
            let raw = field(idx);
            raw.parse::<u64>().map_err(|_| Error::BadCount {
                row: line,
                column: name.to_string(),
                value: raw.to_string(),
            })
        };
        let tests = parse_count(tests_idx, COL_TESTS)?;
        let positives = parse_count(positives_idx, COL_POSITIVES)?;

        if let Some(start) = opts.start_date {
            if date < start {
                continue;
            }
        }
        if positives > tests {
            return Err(Error::CountViolation {
                row: line,
                positives,
                tests,
            });
        }
        if seen.insert(date, line).is_some() {
            return Err(Error::DuplicateDate {
                row: line,
                date: date.to_string(),
            });
        }
        records.push(DailyRecord {
            date,
            tests,
            positives,
        });
    }
    records.sort_by_key(|r| r.date);
    TestSeries::new(records, opts.drop_last)
}

/// Per-day positivity rate over the analysis window. Days with zero
/// tests yield `None` rather than a division error.
pub fn daily_ppt(series: &TestSeries) -> Vec<Option<f64>> {
    series
        .effective()
        .iter()
        .map(|r| (r.tests > 0).then(|| r.positives as f64 / r.tests as f64))
        .collect()
}

/// Trailing moving average with partial head windows: entry `i` is the
/// mean of the last `window` values ending at `i`, or of all values so
/// far while fewer than `window` exist.
pub fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    assert!(window >= 1, "window must be ≥ 1");
    let mut out = Vec::with_capacity(values.len());
    for i in 0..values.len() {
        let lo = (i + 1).saturating_sub(window);
        let slice = &values[lo..=i];
        out.push(slice.iter().sum::<f64>() / slice.len() as f64);
    }
    out
}

/// [`moving_average`] over a series with undefined entries: undefined
/// values are excluded from both numerator and denominator, and a window
/// containing no defined value is itself undefined.
pub fn moving_average_opt(values: &[Option<f64>], window: usize) -> Vec<Option<f64>> {
    assert!(window >= 1, "window must be ≥ 1");
    let mut out = Vec::with_capacity(values.len());
    for i in 0..values.len() {
        let lo = (i + 1).saturating_sub(window);
        let defined: Vec<f64> = values[lo..=i].iter().filter_map(|v| *v).collect();
        out.push(if defined.is_empty() {
            None
        } else {
            Some(defined.iter().sum::<f64>() / defined.len() as f64)
        });
    }
    out
}

/// Sufficient statistics of the first `upto` analysis days (1-based).
pub fn cumulative_stats(series: &TestSeries, upto: usize) -> Result<SufficientStats> {
    let effective = series.effective();
    if upto < 1 || upto > effective.len() {
        return Err(Error::IndexOutOfRange(format!(
            "upto = {upto} outside 1..={}",
            effective.len()
        )));
    }
    let mut stats = SufficientStats::empty();
    for rec in &effective[..upto] {
        stats = stats.with_day(rec.positives, rec.tests)?;
    }
    Ok(stats)
}

/// Seven summary statistics of one column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ColumnSummary {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub mean: f64,
    pub q3: f64,
    pub max: f64,
    pub sd: f64,
}

/// Descriptive statistics of daily tests, daily positives, and the daily
/// positivity rate over the analysis window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesSummary {
    pub days: usize,
    pub tests: ColumnSummary,
    pub positives: ColumnSummary,
    pub daily_ppt: ColumnSummary,
}

/// Quantile by linear interpolation between order statistics
/// (the "type 7" convention: `h = (n−1)p`, interpolate between
/// `x[⌊h⌋]` and `x[⌊h⌋+1]`).
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty() && (0.0..=1.0).contains(&p));
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 >= n {
        sorted[n - 1]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

fn column_summary(values: &[f64]) -> Result<ColumnSummary> {
    if values.is_empty() {
        return Err(Error::Empty("summary of an empty column".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let sd = if n > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(ColumnSummary {
        min: sorted[0],
        q1: quantile_sorted(&sorted, 0.25),
        median: quantile_sorted(&sorted, 0.5),
        mean,
        q3: quantile_sorted(&sorted, 0.75),
        max: sorted[n - 1],
        sd,
    })
}

/// Descriptive statistics over the analysis window. The daily-rate column
/// covers only days with at least one test.
pub fn summarize_series(series: &TestSeries) -> Result<SeriesSummary> {
    let effective = series.effective();
    if effective.is_empty() {
        return Err(Error::Empty("summary of an empty series".into()));
    }
    let tests: Vec<f64> = effective.iter().map(|r| r.tests as f64).collect();
    let positives: Vec<f64> = effective.iter().map(|r| r.positives as f64).collect();
    let ppt: Vec<f64> = daily_ppt(series).into_iter().flatten().collect();
    Ok(SeriesSummary {
        days: effective.len(),
        tests: column_summary(&tests)?,
        positives: column_summary(&positives)?,
        daily_ppt: column_summary(&ppt)?,
    })
}

/// One histogram bin with the fitted count-model mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OverlayBin {
    /// Inclusive lower count bound.
    pub lo: u64,
    /// Inclusive upper count bound.
    pub hi: u64,
    pub observed: u64,
    pub observed_frac: f64,
    /// Negative-Binomial mass on `lo..=hi` at the fitted parameters.
    pub fitted: f64,
}

/// Histogram of observed daily test counts with fitted Negative-Binomial
/// probabilities per bin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitOverlay {
    pub r: u32,
    pub theta: f64,
    pub bins: Vec<OverlayBin>,
    /// Fitted mass falling outside the binned range.
    pub outside: f64,
}

/// Bin observed counts and overlay `NegBinomial(r, theta)` mass per bin,
/// for plot emission. Bins are equal-width integer intervals covering the
/// observed range; a constant series yields a single bin.
pub fn negbinom_fit_overlay(
    tests: &[u64],
    r: u32,
    theta: f64,
    max_bins: usize,
) -> Result<FitOverlay> {
    if tests.is_empty() {
        return Err(Error::Empty("overlay of an empty series".into()));
    }
    if max_bins == 0 {
        return Err(Error::Domain("overlay needs at least one bin".into()));
    }
    let model = crate::dist::NegBinomialParams::new(r, theta)?;
    let lo = *tests.iter().min().unwrap();
    let hi = *tests.iter().max().unwrap();
    let span = hi - lo + 1;
    let width = span.div_ceil(max_bins as u64).max(1);
    let n_bins = span.div_ceil(width) as usize;

    let n = tests.len() as f64;
    let mut bins = Vec::with_capacity(n_bins);
    for j in 0..n_bins {
        let bin_lo = lo + j as u64 * width;
        let bin_hi = (bin_lo + width - 1).min(hi);
        let observed = tests
            .iter()
            .filter(|&&t| t >= bin_lo && t <= bin_hi)
            .count() as u64;
        let fitted: f64 = (bin_lo..=bin_hi)
            .map(|k| model.log_pmf(k).expect("k ≥ 0").exp())
            .sum();
        bins.push(OverlayBin {
            lo: bin_lo,
            hi: bin_hi,
            observed,
            observed_frac: observed as f64 / n,
            fitted,
        });
    }
    let covered: f64 = bins.iter().map(|b| b.fitted).sum();
    Ok(FitOverlay {
        r,
        theta,
        bins,
        outside: (1.0 - covered).max(0.0),
    })
}

/// Write a date-indexed series as CSV with columns `date,value,flag`.
/// Undefined values leave the cell empty.
pub fn write_series_csv<W: io::Write>(
    writer: W,
    rows: &[(NaiveDate, Option<f64>, &str)],
    extra_columns: &[(&str, f64)],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["date".to_string(), "value".to_string(), "flag".to_string()];
    header.extend(extra_columns.iter().map(|(name, _)| name.to_string()));
    w.write_record(&header)?;
    for (date, value, flag) in rows {
        let mut record = vec![
            date.format("%Y-%m-%d").to_string(),
            value.map_or(String::new(), |v| v.to_string()),
            flag.to_string(),
        ];
        record.extend(extra_columns.iter().map(|(_, v)| v.to_string()));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}
