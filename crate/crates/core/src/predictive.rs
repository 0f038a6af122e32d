//! Monte-Carlo estimation of the predictive distribution of the next
//! positivity rate.
//!
//! One draw simulates the next reporting day: a test count `k*` from the
//! Beta-Negative-Binomial predictive, a positive count `y*` from the
//! Beta-Binomial predictive conditioned on `k*`, and the rate
//! `p* = y*/k*`. The empirical CDF of the `p*` sample then yields
//! percentile prediction intervals.

use serde::Serialize;

use crate::dist::{BetaBinomialParams, BetaNegBinomialParams};
use crate::error::{Error, Result};
use crate::model::PosteriorParams;
use crate::rng::{seeded, StdRng};

/// One simulated future day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PredictiveSample {
    pub y_star: u64,
    pub k_star: u64,
    /// Exactly `y_star as f64 / k_star as f64`.
    pub p_star: f64,
}

/// The full Monte-Carlo sample plus the count of discarded `k* = 0` draws.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictiveDraws {
    pub samples: Vec<PredictiveSample>,
    /// Draws rejected and redrawn because `k* = 0` leaves the rate
    /// undefined. At posterior scale this is vanishingly rare; tiny
    /// synthetic inputs can hit it.
    pub resampled_zero_k: u64,
}

/// Simulate `draws` future days from the posterior predictive, seeding a
/// fresh generator. See [`simulate_predictive_with`] for the rng-passing
/// variant used by replayable pipelines.
pub fn simulate_predictive(
    post: &PosteriorParams,
    draws: usize,
    seed: u64,
) -> Result<PredictiveDraws> {
    simulate_predictive_with(post, draws, &mut seeded(seed))
}

/// Simulate `draws` future days, consuming randomness from `rng`.
pub fn simulate_predictive_with(
    post: &PosteriorParams,
    draws: usize,
    rng: &mut StdRng,
) -> Result<PredictiveDraws> {
    if draws == 0 {
        return Err(Error::Validation("draws must be ≥ 1".into()));
    }
    let bnb = BetaNegBinomialParams::new(post.prior.r, post.c_m, post.d_m)?;
    let mut samples = Vec::with_capacity(draws);
    let mut resampled_zero_k = 0u64;
    while samples.len() < draws {
        let k_star = bnb.sample(rng);
        if k_star == 0 {
            resampled_zero_k += 1;
            continue;
        }
        let bb = BetaBinomialParams {
            trials: k_star,
            alpha: post.a_m,
            beta: post.b_m,
        };
        let y_star = bb.sample(rng);
        samples.push(PredictiveSample {
            y_star,
            k_star,
            p_star: y_star as f64 / k_star as f64,
        });
    }
    Ok(PredictiveDraws {
        samples,
        resampled_zero_k,
    })
}

/// Empirical CDF of a sample: a right-continuous step function.
#[derive(Debug, Clone)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("empirical CDF needs a non-empty sample".into()));
        }
        let mut sorted = values.to_vec();
        sorted.sort_unstable_by(f64::total_cmp);
        Ok(Self { sorted })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `Q̂(t)` = fraction of the sample ≤ t.
    pub fn eval(&self, t: f64) -> f64 {
        let count = self.sorted.partition_point(|&x| x <= t);
        count as f64 / self.sorted.len() as f64
    }

    /// The α-th percentile as the infimum of `{t : Q̂(t) ≥ α}`, which for a
    /// step CDF is the ⌈αB⌉-th order statistic. Products within 1e-9 of an
    /// integer rank snap to it, so decimal levels like 0.025·5000 resolve
    /// to the intended rank despite binary rounding.
    pub fn percentile(&self, alpha: f64) -> Result<f64> {
        if !alpha.is_finite() || alpha <= 0.0 || alpha >= 1.0 {
            return Err(Error::Domain(format!(
                "percentile level must lie in (0, 1), got {alpha}"
            )));
        }
        let b = self.sorted.len();
        let t = alpha * b as f64;
        let nearest = t.round();
        let rank = if (t - nearest).abs() < 1e-9 {
            nearest as usize
        } else {
            t.ceil() as usize
        };
        let rank = rank.clamp(1, b);
        Ok(self.sorted[rank - 1])
    }

    /// Sample values in ascending order.
    pub fn values(&self) -> &[f64] {
        &self.sorted
    }
}

/// Central prediction interval at the given coverage level: with
/// `α = (1−level)/2`, the pair `(percentile(α), percentile(1−α))`,
/// always returned in ascending order by construction.
pub fn prediction_interval(cdf: &EmpiricalCdf, level: f64) -> Result<(f64, f64)> {
    if !level.is_finite() || level <= 0.0 || level >= 1.0 {
        return Err(Error::Domain(format!(
            "interval level must lie in (0, 1), got {level}"
        )));
    }
    let alpha = (1.0 - level) / 2.0;
    Ok((cdf.percentile(alpha)?, cdf.percentile(1.0 - alpha)?))
}

/// Location, spread, and interval bounds of one predictive margin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarginSummary {
    pub mean: f64,
    pub sd: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Monte-Carlo summary of the three predictive margins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PredictiveSummary {
    pub draws: usize,
    pub level: f64,
    pub y_star: MarginSummary,
    pub k_star: MarginSummary,
    pub p_star: MarginSummary,
    pub resampled_zero_k: u64,
    /// Set when the sample has a single draw, where the sd (divisor B−1)
    /// is undefined and reported as 0.
    pub degenerate_sd: bool,
}

/// Summarize a simulated sample: means, sample SDs (divisor B−1), and
/// central prediction intervals for `y*`, `k*`, and `p*`.
pub fn summarize(draws: &PredictiveDraws, level: f64) -> Result<PredictiveSummary> {
    if draws.samples.is_empty() {
        return Err(Error::Empty("cannot summarize an empty sample".into()));
    }
    let ys: Vec<f64> = draws.samples.iter().map(|s| s.y_star as f64).collect();
    let ks: Vec<f64> = draws.samples.iter().map(|s| s.k_star as f64).collect();
    let ps: Vec<f64> = draws.samples.iter().map(|s| s.p_star).collect();
    Ok(PredictiveSummary {
        draws: draws.samples.len(),
        level,
        y_star: margin_summary(&ys, level)?,
        k_star: margin_summary(&ks, level)?,
        p_star: margin_summary(&ps, level)?,
        resampled_zero_k: draws.resampled_zero_k,
        degenerate_sd: draws.samples.len() == 1,
    })
}

fn margin_summary(values: &[f64], level: f64) -> Result<MarginSummary> {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let sd = if n > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let cdf = EmpiricalCdf::new(values)?;
    let (lower, upper) = prediction_interval(&cdf, level)?;
    Ok(MarginSummary {
        mean,
        sd,
        lower,
        upper,
    })
}
