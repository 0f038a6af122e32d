//! The conjugate model: priors, sufficient statistics, posterior update,
//! and closed-form posterior / predictive moments.
//!
//! Observation model, per day `i` with `k_i` tests and `y_i` positives:
//! `y_i | k_i, p ~ Binomial(k_i, p)` and `k_i | θ ~ NegBinomial(r, θ)`
//! under the convention of [`crate::dist::NegBinomialParams`]. With
//! independent Beta(a, b) and Beta(c, d) priors on `p` and `θ`, the
//! posterior after `m` days depends on the data only through
//! `(m, X_m, N_m)` — day count, cumulative positives, cumulative tests —
//! and stays in the Beta family:
//!
//! ```text
//! a_m = a + X_m    b_m = b + N_m − X_m    c_m = c + N_m    d_m = d + m·r
//! ```

use serde::Serialize;

use crate::error::{Error, Result};

/// Prior hyperparameters: Beta(a, b) on the positivity rate, Beta(c, d)
/// on the Negative-Binomial θ, and the fixed Negative-Binomial size `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PriorSpec {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub r: u32,
}

impl PriorSpec {
    pub fn new(a: f64, b: f64, c: f64, d: f64, r: u32) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b), ("c", c), ("d", d)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::Validation(format!(
                    "prior hyperparameter {name} must be positive and finite, got {v}"
                )));
            }
        }
        if r < 1 {
            return Err(Error::Validation("r must be a positive integer".into()));
        }
        Ok(Self { a, b, c, d, r })
    }

    /// The flat Beta(1,1) × Beta(1,1) prior with the given `r`.
    pub fn flat(r: u32) -> Result<Self> {
        Self::new(1.0, 1.0, 1.0, 1.0, r)
    }
}

/// Sufficient statistics of the first `m` days: cumulative positives
/// `X_m` and cumulative tests `N_m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SufficientStats {
    /// Number of days folded in (m).
    pub days: u64,
    /// Cumulative positives (X_m).
    pub positives: u64,
    /// Cumulative tests (N_m).
    pub tests: u64,
}

impl SufficientStats {
    pub fn new(days: u64, positives: u64, tests: u64) -> Result<Self> {
        if positives > tests {
            return Err(Error::Validation(format!(
                "cumulative positives ({positives}) exceed cumulative tests ({tests})"
            )));
        }
        if days == 0 && (positives != 0 || tests != 0) {
            return Err(Error::Validation(
                "zero days must carry zero cumulative counts".into(),
            ));
        }
        Ok(Self {
            days,
            positives,
            tests,
        })
    }

    pub fn empty() -> Self {
        Self {
            days: 0,
            positives: 0,
            tests: 0,
        }
    }

    /// Fold in one more day of counts.
    pub fn with_day(&self, day_positives: u64, day_tests: u64) -> Result<Self> {
        if day_positives > day_tests {
            return Err(Error::Validation(format!(
                "day positives ({day_positives}) exceed day tests ({day_tests})"
            )));
        }
        Ok(Self {
            days: self.days + 1,
            positives: self.positives + day_positives,
            tests: self.tests + day_tests,
        })
    }

    /// Cumulative positivity rate `X_m / N_m`, undefined with no tests.
    pub fn cumulative_rate(&self) -> Option<f64> {
        (self.tests > 0).then(|| self.positives as f64 / self.tests as f64)
    }
}

/// The updated Beta parameters, with the prior and sufficient statistics
/// they came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PosteriorParams {
    pub a_m: f64,
    pub b_m: f64,
    pub c_m: f64,
    pub d_m: f64,
    pub prior: PriorSpec,
    pub stats: SufficientStats,
}

/// Conjugate posterior update.
pub fn posterior_update(prior: &PriorSpec, stats: &SufficientStats) -> PosteriorParams {
    let x = stats.positives as f64;
    let n = stats.tests as f64;
    let m = stats.days as f64;
    PosteriorParams {
        a_m: prior.a + x,
        b_m: prior.b + (n - x),
        c_m: prior.c + n,
        d_m: prior.d + m * prior.r as f64,
        prior: *prior,
        stats: *stats,
    }
}

/// Posterior mean of the positivity rate, `a_m / (a_m + b_m)`.
pub fn bayes_estimate_p(post: &PosteriorParams) -> f64 {
    post.a_m / (post.a_m + post.b_m)
}

/// Posterior mean of the test-count parameter θ, `c_m / (c_m + d_m)`.
pub fn bayes_estimate_theta(post: &PosteriorParams) -> f64 {
    post.c_m / (post.c_m + post.d_m)
}

/// Mean and variance of a predictive distribution; either moment may be
/// undefined (infinite) depending on the posterior parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub mean: Option<f64>,
    pub variance: Option<f64>,
}

/// Predictive mean and variance of the positive count out of `k_star`
/// future tests:
///
/// ```text
/// E[Y*]   = k*·p̂
/// Var[Y*] = k*·p̂(1−p̂)·(a_m+b_m+k*)/(a_m+b_m+1)
/// ```
///
/// Both always exist.
pub fn predictive_moments_y(post: &PosteriorParams, k_star: u64) -> Moments {
    let k = k_star as f64;
    let p = bayes_estimate_p(post);
    let s = post.a_m + post.b_m;
    Moments {
        mean: Some(k * p),
        variance: Some(k * p * (1.0 - p) * (s + k) / (s + 1.0)),
    }
}

/// Predictive mean and variance of the future test count:
///
/// ```text
/// μ*      = r·c_m/(d_m−1)                      (needs d_m > 1)
/// Var[K*] = μ*·(d_m+r−1)(c_m+d_m−1)/((d_m−1)(d_m−2))   (needs d_m > 2)
/// ```
///
/// Below those thresholds the moments are infinite and reported as
/// `None` rather than NaN. With any prior `d ≥ 1` and at least one
/// observed day the mean always exists.
pub fn predictive_moments_k(post: &PosteriorParams) -> Moments {
    let r = post.prior.r as f64;
    let mean = (post.d_m > 1.0).then(|| r * post.c_m / (post.d_m - 1.0));
    let variance = (post.d_m > 2.0).then(|| {
        let mu = r * post.c_m / (post.d_m - 1.0);
        mu * (post.d_m + r - 1.0) * (post.c_m + post.d_m - 1.0)
            / ((post.d_m - 1.0) * (post.d_m - 2.0))
    });
    Moments { mean, variance }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::BetaBinomialParams;

    /// Sufficient statistics printed for a full season of state data;
    /// used as the golden posterior throughout the test suite.
    pub fn season_stats() -> SufficientStats {
        SufficientStats::new(109, 46_907, 522_946).unwrap()
    }

    #[test]
    fn posterior_update_golden() {
        let prior = PriorSpec::flat(3).unwrap();
        let post = posterior_update(&prior, &season_stats());
        assert_eq!(post.a_m, 46_908.0);
        assert_eq!(post.b_m, 476_040.0);
        assert_eq!(post.c_m, 522_947.0);
        assert_eq!(post.d_m, 328.0);
    }

    #[test]
    fn posterior_update_no_data_is_prior() {
        let prior = PriorSpec::new(2.5, 3.5, 4.5, 5.5, 2).unwrap();
        let post = posterior_update(&prior, &SufficientStats::empty());
        assert_eq!(
            (post.a_m, post.b_m, post.c_m, post.d_m),
            (2.5, 3.5, 4.5, 5.5)
        );
    }

    #[test]
    fn posterior_update_small_arithmetic() {
        let prior = PriorSpec::new(2.0, 3.0, 4.0, 5.0, 2).unwrap();
        let stats = SufficientStats::new(1, 3, 10).unwrap();
        let post = posterior_update(&prior, &stats);
        assert_eq!(
            (post.a_m, post.b_m, post.c_m, post.d_m),
            (5.0, 10.0, 14.0, 7.0)
        );
    }

    #[test]
    fn stats_reject_impossible_counts() {
        assert!(SufficientStats::new(3, 11, 10).is_err());
        assert!(SufficientStats::new(0, 1, 1).is_err());
    }

    #[test]
    fn bayes_estimates_golden() {
        let prior = PriorSpec::flat(3).unwrap();
        let post = posterior_update(&prior, &season_stats());
        assert!((bayes_estimate_p(&post) - 0.0897).abs() < 5e-5);
        assert!((bayes_estimate_theta(&post) - 0.9993732).abs() < 5e-7);
        // exact ratio 522947/523275
        assert!((bayes_estimate_theta(&post) - 522_947.0 / 523_275.0).abs() < 1e-15);
    }

    #[test]
    fn bayes_estimates_symmetry_and_small_cases() {
        let prior = PriorSpec::new(2.0, 2.0, 7.0, 7.0, 1).unwrap();
        let post = posterior_update(&prior, &SufficientStats::empty());
        assert_eq!(bayes_estimate_p(&post), 0.5);
        assert_eq!(bayes_estimate_theta(&post), 0.5);

        let handmade = PosteriorParams {
            a_m: 5.0,
            b_m: 15.0,
            c_m: 3.0,
            d_m: 1.0,
            prior,
            stats: SufficientStats::empty(),
        };
        assert_eq!(bayes_estimate_p(&handmade), 0.25);
        assert_eq!(bayes_estimate_theta(&handmade), 0.75);
    }

    #[test]
    fn update_composes_day_by_day() {
        let prior = PriorSpec::new(1.5, 2.5, 0.5, 1.0, 4).unwrap();
        let first = SufficientStats::new(5, 120, 1000).unwrap();
        let folded = first.with_day(40, 350).unwrap();
        let combined = SufficientStats::new(6, 160, 1350).unwrap();
        let via_fold = posterior_update(&prior, &folded);
        let direct = posterior_update(&prior, &combined);
        assert_eq!(via_fold.a_m, direct.a_m);
        assert_eq!(via_fold.b_m, direct.b_m);
        assert_eq!(via_fold.c_m, direct.c_m);
        assert_eq!(via_fold.d_m, direct.d_m);
    }

    #[test]
    fn prior_sensitivity_is_negligible_at_season_scale() {
        // Moving (a, b) anywhere in [0.5, 10]² shifts p̂ by < 2e-4 when the
        // counts are in the hundreds of thousands.
        let stats = season_stats();
        let baseline = bayes_estimate_p(&posterior_update(&PriorSpec::flat(3).unwrap(), &stats));
        for a10 in [5u32, 10, 20, 50, 100] {
            for b10 in [5u32, 10, 20, 50, 100] {
                let prior =
                    PriorSpec::new(a10 as f64 / 10.0, b10 as f64 / 10.0, 1.0, 1.0, 3).unwrap();
                let p = bayes_estimate_p(&posterior_update(&prior, &stats));
                assert!(
                    (p - baseline).abs() < 2e-4,
                    "a={} b={} moved p̂ by {}",
                    a10 as f64 / 10.0,
                    b10 as f64 / 10.0,
                    (p - baseline).abs()
                );
            }
        }
    }

    #[test]
    fn p_estimate_monotone_in_positives() {
        let prior = PriorSpec::flat(2).unwrap();
        let mut last = -1.0;
        for x in [0u64, 10, 50, 90, 100] {
            let stats = SufficientStats::new(1, x, 100).unwrap();
            let p = bayes_estimate_p(&posterior_update(&prior, &stats));
            assert!(p > last);
            last = p;
        }
    }

    #[test]
    fn predictive_y_moments_small_cases() {
        let prior = PriorSpec::flat(3).unwrap();
        let post = posterior_update(&prior, &season_stats());
        let p = bayes_estimate_p(&post);

        let m0 = predictive_moments_y(&post, 0);
        assert_eq!(m0.mean, Some(0.0));
        assert_eq!(m0.variance, Some(0.0));

        let m1 = predictive_moments_y(&post, 1);
        assert!((m1.mean.unwrap() - p).abs() < 1e-15);
        assert!((m1.variance.unwrap() - p * (1.0 - p)).abs() < 1e-15);

        let m5000 = predictive_moments_y(&post, 5000);
        assert!((m5000.mean.unwrap() - 448.4958).abs() < 0.01);
    }

    #[test]
    fn predictive_y_variance_matches_brute_force_moments() {
        // At small trial counts the pmf can be summed directly; the
        // closed-form variance must agree with Σ y²·pmf − mean².
        let prior = PriorSpec::new(2.0, 5.0, 1.0, 1.0, 3).unwrap();
        let stats = SufficientStats::new(2, 9, 60).unwrap();
        let post = posterior_update(&prior, &stats);
        let k_star = 50u64;
        let d = BetaBinomialParams::new(k_star, post.a_m, post.b_m).unwrap();
        let mut mean = 0.0;
        let mut second = 0.0;
        for y in 0..=k_star {
            let p = d.log_pmf(y).unwrap().exp();
            mean += y as f64 * p;
            second += (y as f64) * (y as f64) * p;
        }
        let brute_var = second - mean * mean;
        let m = predictive_moments_y(&post, k_star);
        assert!((m.mean.unwrap() - mean).abs() < 1e-9);
        assert!(
            (m.variance.unwrap() - brute_var).abs() < 1e-7,
            "formula {} vs brute {}",
            m.variance.unwrap(),
            brute_var
        );
    }

    #[test]
    fn predictive_k_moments_golden_and_edges() {
        let prior = PriorSpec::flat(3).unwrap();
        let post = posterior_update(&prior, &season_stats());
        let m = predictive_moments_k(&post);
        assert!((m.mean.unwrap() - 4797.678899082569).abs() < 1e-9);
        assert!((m.variance.unwrap() - 7_771_572.834643962).abs() < 1e-6);

        // (r=1, c_m=1, d_m=3): mean 0.5, variance 0.5·3·3/(2·1) = 2.25
        let tiny = PosteriorParams {
            a_m: 1.0,
            b_m: 1.0,
            c_m: 1.0,
            d_m: 3.0,
            prior: PriorSpec::flat(1).unwrap(),
            stats: SufficientStats::empty(),
        };
        let m = predictive_moments_k(&tiny);
        assert_eq!(m.mean, Some(0.5));
        assert_eq!(m.variance, Some(2.25));

        // moment-existence boundaries
        let edge = PosteriorParams {
            d_m: 1.5,
            ..tiny
        };
        let m = predictive_moments_k(&edge);
        assert!(m.mean.is_some());
        assert_eq!(m.variance, None);

        let edge = PosteriorParams {
            d_m: 1.0,
            ..tiny
        };
        let m = predictive_moments_k(&edge);
        assert_eq!(m.mean, None);
        assert_eq!(m.variance, None);
    }

    proptest::proptest! {
        /// |p̂ − X/N| ≤ (a+b)/(a+b+N): the Bayes estimate stays within a
        /// shrinking band of the cumulative positivity rate.
        #[test]
        fn p_estimate_close_to_cumulative_rate(
            a in 0.1f64..20.0,
            b in 0.1f64..20.0,
            tests in 1u64..2_000_000,
            frac in 0.0f64..1.0,
        ) {
            let positives = ((tests as f64) * frac).floor() as u64;
            let prior = PriorSpec::new(a, b, 1.0, 1.0, 3).unwrap();
            let stats = SufficientStats::new(7, positives, tests).unwrap();
            let post = posterior_update(&prior, &stats);
            let p_hat = bayes_estimate_p(&post);
            let raw = positives as f64 / tests as f64;
            let bound = (a + b) / (a + b + tests as f64);
            proptest::prop_assert!((p_hat - raw).abs() <= bound + 1e-12);
        }
    }
}
