//! Conjugate Bayesian tracking and prediction of daily test positivity.
//!
//! The model: daily positive counts are Binomial given the day's test
//! count and a latent rate `p`; daily test counts are Negative-Binomial
//! with a latent `θ`. Beta priors on both make the posterior closed-form
//! in the cumulative sufficient statistics, and the one-day-ahead
//! predictive laws are Beta-Binomial (positives) and
//! Beta-Negative-Binomial (tests). The predictive distribution of the
//! next positivity rate has no closed form and is estimated by
//! Monte-Carlo simulation.
//!
//! Modules:
//! - [`dist`]: exact log-space pmfs and samplers,
//! - [`model`]: priors, sufficient statistics, posterior update, moments,
//! - [`predictive`]: the Monte-Carlo engine, empirical CDF and intervals,
//! - [`ingest`]: CSV ingestion, positivity series, summary statistics,
//! - [`backtest`]: rolling one-day-ahead interval evaluation,
//! - [`rng`]: explicit seeding and deterministic stream splitting.

pub mod backtest;
pub mod dist;
pub mod error;
pub mod ingest;
pub mod model;
pub mod predictive;
pub mod rng;
pub mod synth;

pub use error::{Error, Result};
