//! Deterministic generation of series from the model's own data-generating
//! process, for self-consistency checks and backtest calibration suites.

use chrono::NaiveDate;

use crate::dist::{sample_binomial, NegBinomialParams};
use crate::ingest::{DailyRecord, TestSeries};
use crate::rng::seeded;

/// Generate `days` of records with test counts from
/// `NegBinomial(r, theta)` and positives from `Binomial(tests, p)`,
/// starting 2020-03-16. Fully determined by `seed`.
pub fn model_series(days: usize, p: f64, theta: f64, r: u32, seed: u64) -> TestSeries {
    let mut rng = seeded(seed);
    let nb = NegBinomialParams::new(r, theta).expect("valid synth parameters");
    let start = NaiveDate::from_ymd_opt(2020, 3, 16).unwrap();
    let records = (0..days)
        .map(|i| {
            let tests = nb.sample(&mut rng);
            let positives = sample_binomial(&mut rng, tests, p).expect("valid p");
            DailyRecord {
                date: start + chrono::Days::new(i as u64),
                tests,
                positives,
            }
        })
        .collect();
    TestSeries::new(records, 0).expect("synthesized records are valid")
}
