use coopgame::model::Policy;
use coopgame::reputation::{binarize, exclusion_probability, observe, Metric, ObservationModel};
use proptest::prelude::*;
use statrs::distribution::{Binomial, DiscreteCDF};

/// P(K/n < t_s) for K ~ Binomial(n, p'), computed with statrs.
fn statrs_exclusion(t_x: f64, t_s: f64, n: u64, e: f64) -> f64 {
    let p = t_x * (1.0 - e) + (1.0 - t_x) * e;
    let k_min = (0..=n).find(|&k| k as f64 / n as f64 >= t_s);
    match k_min {
        None => 1.0,
        Some(0) => 0.0,
        Some(k) => Binomial::new(p, n).unwrap().cdf(k - 1),
    }
}

#[test]
fn exact_matches_statrs_on_a_grid() {
    for n in [1u64, 7, 50, 100, 333, 1000] {
        for e in [0.0, 0.001, 0.01, 0.1, 0.3, 0.5] {
            for t_x in [0.0, 0.25, 0.7, 0.9, 1.0] {
                for t_s in [0.0, 0.5, 0.7, 0.95, 1.0] {
                    let m = ObservationModel::new(n, e, 0).unwrap();
                    let got = exclusion_probability(Policy::new(t_x).unwrap(), t_s, &m).unwrap();
                    let want = statrs_exclusion(t_x, t_s, n, e);
                    assert!(
                        (got - want).abs() <= 1e-10,
                        "n={n} e={e} t_x={t_x} t_s={t_s}: {got} vs {want}"
                    );
                }
            }
        }
    }
}

#[test]
fn fine_grained_mean_converges() {
    let p = 0.8 * 0.95 + 0.2 * 0.05;
    for (n, tol) in [(1_000u64, 0.05), (100_000, 0.005), (1_000_000, 0.0015)] {
        let m = ObservationModel::new(n, 0.05, 42).unwrap();
        let est = observe(Policy::new(0.8).unwrap(), &m);
        assert_eq!(est.metric, Metric::FineGrained);
        assert_eq!(est.n_samples, n);
        assert!((est.r_hat - p).abs() < tol, "n={n}: {}", est.r_hat);
    }
}

#[test]
fn observation_is_deterministic_per_seed() {
    let m = ObservationModel::new(500, 0.2, 17).unwrap();
    let pol = Policy::new(0.6).unwrap();
    assert_eq!(observe(pol, &m), observe(pol, &m));
    let draws: Vec<f64> = (0..20).map(|s| observe(pol, &m.with_seed(s)).r_hat).collect();
    assert!(draws.iter().any(|&r| r != draws[0]), "seeds should vary the estimate");
}

#[test]
fn binary_metric_is_zero_or_one() {
    let m = ObservationModel::new(100, 0.1, 3).unwrap();
    for t_x in [0.0, 0.5, 0.85, 1.0] {
        let b = binarize(&observe(Policy::new(t_x).unwrap(), &m), 0.8);
        assert_eq!(b.metric, Metric::Binary);
        assert!(b.r_hat == 0.0 || b.r_hat == 1.0);
    }
}

proptest! {
    #[test]
    fn exclusion_falls_with_policy(n in 1u64..400, e in 0.0..0.5f64, t_s in 0.0..=1.0f64, a in 0.0..=1.0f64, b in 0.0..=1.0f64) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let m = ObservationModel::new(n, e, 0).unwrap();
        let p_lo = exclusion_probability(Policy::new(lo).unwrap(), t_s, &m).unwrap();
        let p_hi = exclusion_probability(Policy::new(hi).unwrap(), t_s, &m).unwrap();
        prop_assert!(p_hi <= p_lo + 1e-12, "{} > {}", p_hi, p_lo);
    }

    #[test]
    fn exclusion_rises_with_threshold(n in 1u64..400, e in 0.0..0.5f64, t_x in 0.0..=1.0f64, a in 0.0..=1.0f64, b in 0.0..=1.0f64) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let m = ObservationModel::new(n, e, 0).unwrap();
        let pol = Policy::new(t_x).unwrap();
        let p_lo = exclusion_probability(pol, lo, &m).unwrap();
        let p_hi = exclusion_probability(pol, hi, &m).unwrap();
        prop_assert!(p_lo <= p_hi + 1e-12);
    }

    #[test]
    fn exclusion_is_a_probability(n in 1u64..5000, e in 0.0..=1.0f64, t_x in 0.0..=1.0f64, t_s in 0.0..=1.0f64) {
        let m = ObservationModel::new(n, e, 0).unwrap();
        let p = exclusion_probability(Policy::new(t_x).unwrap(), t_s, &m).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn estimate_is_a_fraction(n in 1u64..2000, e in 0.0..=1.0f64, t_x in 0.0..=1.0f64, seed in any::<u64>()) {
        let est = observe(Policy::new(t_x).unwrap(), &ObservationModel::new(n, e, seed).unwrap());
        prop_assert!((0.0..=1.0).contains(&est.r_hat));
        prop_assert_eq!((est.r_hat * n as f64).round() / n as f64, est.r_hat);
    }
}

#[test]
fn invalid_models_are_rejected() {
    assert!(ObservationModel::new(0, 0.1, 0).is_err());
    assert!(ObservationModel::new(10, 1.5, 0).is_err());
    assert!(ObservationModel::new(10, -0.1, 0).is_err());
    let m = ObservationModel::new(10, 0.1, 0).unwrap();
    assert!(exclusion_probability(Policy::FULL, 1.5, &m).is_err());
}
