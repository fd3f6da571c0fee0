//! Reputation metrics and the observation-error model.
//!
//! The network watches `n_samples` transit requests per assessment window.
//! The node services each one with probability `t_x`, and every observation
//! is misread with probability `e`, so a single sample reads "serviced" with
//! probability `p' = t_x (1 - e) + (1 - t_x) e`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{Policy, ServiceProfile};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReputationError {
    #[error("n_samples must be at least 1")]
    NoSamples,
    #[error("observation error must be in [0, 1], got {0}")]
    ErrorProbability(f64),
    #[error("threshold must be in [0, 1], got {0}")]
    Threshold(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    FineGrained,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservationModel {
    n_samples: u64,
    e: f64,
    seed: u64,
}

impl ObservationModel {
    pub fn new(n_samples: u64, e: f64, seed: u64) -> Result<Self, ReputationError> {
        if n_samples == 0 {
            return Err(ReputationError::NoSamples);
        }
        if !(0.0..=1.0).contains(&e) {
            return Err(ReputationError::ErrorProbability(e));
        }
        Ok(ObservationModel { n_samples, e, seed })
    }

    /// One observation per requested transit unit, `round(s_nx)`, at least one.
    pub fn for_profile(profile: &ServiceProfile, seed: u64) -> Self {
        ObservationModel {
            n_samples: default_samples(profile.s_nx()),
            e: profile.e(),
            seed,
        }
    }

    pub fn n_samples(&self) -> u64 {
        self.n_samples
    }

    pub fn e(&self) -> f64 {
        self.e
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_seed(self, seed: u64) -> Self {
        ObservationModel { seed, ..self }
    }

    /// Probability that a single observation reads "serviced".
    pub fn observed_success(&self, t_x: Policy) -> f64 {
        let t = t_x.value();
        t * (1.0 - self.e) + (1.0 - t) * self.e
    }
}

pub(crate) fn default_samples(s_nx: f64) -> u64 {
    (s_nx.round() as u64).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReputationEstimate {
    pub r_hat: f64,
    pub n_samples: u64,
    pub metric: Metric,
}

/// Fine-grained reputation: the observed fraction of serviced requests.
pub fn observe(t_x: Policy, model: &ObservationModel) -> ReputationEstimate {
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    let t = t_x.value();
    let mut seen = 0u64;
    for _ in 0..model.n_samples {
        let serviced = rng.random_bool(t);
        let misread = rng.random_bool(model.e);
        if serviced != misread {
            seen += 1;
        }
    }
    ReputationEstimate {
        r_hat: seen as f64 / model.n_samples as f64,
        n_samples: model.n_samples,
        metric: Metric::FineGrained,
    }
}

/// Collapses a fine-grained estimate to `{0, 1}`; reaching `t_s` counts as 1.
pub fn binarize(est: &ReputationEstimate, t_s: f64) -> ReputationEstimate {
    ReputationEstimate {
        r_hat: if est.r_hat >= t_s { 1.0 } else { 0.0 },
        n_samples: est.n_samples,
        metric: Metric::Binary,
    }
}

/// Smallest serviced count `k` with `k / n >= t_s`, matching the comparison
/// [`binarize`] makes on the estimate.
fn min_passing_count(n: u64, t_s: f64) -> u64 {
    let nf = n as f64;
    let mut k = (t_s * nf).ceil().clamp(0.0, nf + 1.0) as u64;
    while k > 0 && (k - 1) as f64 / nf >= t_s {
        k -= 1;
    }
    while k <= n && (k as f64 / nf) < t_s {
        k += 1;
    }
    k
}

/// Exact probability that a node playing `t_x` ends up with binary
/// reputation 0, i.e. `P[K < k_min]` for `K ~ Binomial(n, p')`.
pub fn exclusion_probability(t_x: Policy, t_s: f64, model: &ObservationModel) -> Result<f64, ReputationError> {
    if !(0.0..=1.0).contains(&t_s) {
        return Err(ReputationError::Threshold(t_s));
    }
    let n = model.n_samples;
    let k_min = min_passing_count(n, t_s);
    Ok(binomial_cdf_below(n, model.observed_success(t_x), k_min))
}

/// `P[K < k]` for `K ~ Binomial(n, p)` by exact summation of the pmf. The
/// tail on the far side of the mean is summed and complemented when that is
/// the smaller one.
pub(crate) fn binomial_cdf_below(n: u64, p: f64, k: u64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    if k > n {
        return 1.0;
    }
    if p <= 0.0 {
        return 1.0;
    }
    if p >= 1.0 {
        return 0.0;
    }
    let mean = n as f64 * p;
    if (k as f64) <= mean {
        (0..k).map(|j| binomial_pmf(n, p, j)).sum::<f64>().min(1.0)
    } else {
        let upper: f64 = (k..=n).map(|j| binomial_pmf(n, p, j)).sum();
        (1.0 - upper).max(0.0)
    }
}

fn binomial_pmf(n: u64, p: f64, k: u64) -> f64 {
    let ln_choose = ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k);
    (ln_choose + k as f64 * p.ln() + (n - k) as f64 * (-p).ln_1p()).exp()
}

fn ln_factorial(n: u64) -> f64 {
    // exact summation below the cutoff, Stirling series above
    if n < 256 {
        (2..=n).map(|i| (i as f64).ln()).sum()
    } else {
        let x = n as f64;
        x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln() + 1.0 / (12.0 * x) - 1.0 / (360.0 * x.powi(3))
            + 1.0 / (1260.0 * x.powi(5))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(n: u64, e: f64, seed: u64) -> ObservationModel {
        ObservationModel::new(n, e, seed).unwrap()
    }

    fn pol(t: f64) -> Policy {
        Policy::new(t).unwrap()
    }

    #[test]
    fn model_validation() {
        assert_eq!(ObservationModel::new(0, 0.1, 1), Err(ReputationError::NoSamples));
        assert!(ObservationModel::new(5, 1.1, 1).is_err());
        let p = ServiceProfile::new(1.0, 0.3, 2.0, 10.0, 0.2).unwrap();
        let m = ObservationModel::for_profile(&p, 9);
        assert_eq!(m.n_samples(), 1);
        assert_eq!(m.e(), 0.2);
        let p = ServiceProfile::new(1.0, 199.6, 2.0, 10.0, 0.0).unwrap();
        assert_eq!(ObservationModel::for_profile(&p, 9).n_samples(), 200);
    }

    #[test]
    fn noiseless_full_cooperation() {
        let est = observe(Policy::FULL, &model(100, 0.0, 7));
        assert_eq!(est.r_hat, 1.0);
        assert_eq!(est.metric, Metric::FineGrained);
        assert_eq!(observe(Policy::ZERO, &model(100, 0.0, 7)).r_hat, 0.0);
    }

    #[test]
    fn estimate_lies_on_sample_lattice() {
        let est = observe(pol(0.37), &model(40, 0.05, 3));
        let k = est.r_hat * 40.0;
        assert!((k - k.round()).abs() < 1e-9);
    }

    #[test]
    fn same_seed_same_estimate() {
        let m = model(500, 0.1, 42);
        assert_eq!(observe(pol(0.6), &m), observe(pol(0.6), &m));
        assert_ne!(observe(pol(0.6), &m).r_hat, observe(pol(0.6), &m.with_seed(43)).r_hat);
    }

    #[test]
    fn large_sample_converges() {
        let est = observe(pol(0.7), &model(1_000_000, 0.0, 11));
        assert!((est.r_hat - 0.7).abs() < 0.002);
        let est = observe(Policy::FULL, &model(1_000_000, 0.1, 12));
        assert!((est.r_hat - 0.9).abs() < 0.001);
    }

    #[test]
    fn binarize_is_inclusive() {
        let est = |r| ReputationEstimate {
            r_hat: r,
            n_samples: 100,
            metric: Metric::FineGrained,
        };
        assert_eq!(binarize(&est(0.95), 0.9).r_hat, 1.0);
        assert_eq!(binarize(&est(0.9), 0.9).r_hat, 1.0);
        assert_eq!(binarize(&est(0.89), 0.9).r_hat, 0.0);
        assert_eq!(binarize(&est(0.89), 0.9).metric, Metric::Binary);
    }

    #[test]
    fn passing_count_agrees_with_float_comparison() {
        for n in [1u64, 3, 7, 10, 100, 333] {
            for i in 0..=40 {
                let t_s = i as f64 / 40.0;
                let k = min_passing_count(n, t_s);
                if k <= n {
                    assert!(k as f64 / n as f64 >= t_s);
                }
                if k > 0 {
                    assert!(((k - 1) as f64 / n as f64) < t_s);
                }
            }
        }
        // 0.7 * 100 rounds above 70 in binary floating point
        assert_eq!(min_passing_count(100, 0.7), 70);
    }

    #[test]
    fn exclusion_cases() {
        let p = exclusion_probability(Policy::FULL, 1.0, &model(100, 0.0, 0)).unwrap();
        assert_eq!(p, 0.0);
        let p = exclusion_probability(Policy::ZERO, 0.5, &model(100, 0.0, 0)).unwrap();
        assert_eq!(p, 1.0);
        let p = exclusion_probability(Policy::FULL, 1.0, &model(100, 0.01, 0)).unwrap();
        assert!((p - (1.0 - 0.99f64.powi(100))).abs() < 1e-12, "{p}");
        let p = exclusion_probability(pol(0.3), 0.0, &model(100, 0.2, 0)).unwrap();
        assert_eq!(p, 0.0);
        assert!(exclusion_probability(Policy::FULL, 1.5, &model(10, 0.0, 0)).is_err());
    }

    #[test]
    fn cdf_small_cases_by_hand() {
        // n = 2, p = 0.5: P[K<1] = 0.25, P[K<2] = 0.75
        assert!((binomial_cdf_below(2, 0.5, 1) - 0.25).abs() < 1e-15);
        assert!((binomial_cdf_below(2, 0.5, 2) - 0.75).abs() < 1e-15);
        assert_eq!(binomial_cdf_below(2, 0.5, 3), 1.0);
        // n = 3, p = 0.2: P[K<2] = 0.8^3 + 3*0.2*0.8^2 = 0.896
        assert!((binomial_cdf_below(3, 0.2, 2) - 0.896).abs() < 1e-14);
    }

    #[test]
    fn ln_factorial_is_continuous_at_cutoff() {
        let exact: f64 = (2..=256u64).map(|i| (i as f64).ln()).sum();
        assert!((ln_factorial(256) - exact).abs() < 1e-9);
    }
}
