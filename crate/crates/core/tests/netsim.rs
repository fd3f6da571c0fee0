use coopgame::model::Mechanism;
use coopgame::netsim::{derive_profile, run, SimConfig, SimError, Simulation};
use coopgame::solver::{solve, SolveStatus};
use proptest::prelude::*;

fn mechanism_strategy() -> impl Strategy<Value = Mechanism> {
    (0..6u8, 0.3..=0.95f64).prop_map(|(k, th)| match k {
        0 => Mechanism::Plain,
        1 => Mechanism::RepSplit,
        2 => Mechanism::rep_split_threshold(th).unwrap(),
        3 => Mechanism::tft_fine(),
        4 => Mechanism::tft_binary(th).unwrap(),
        _ => Mechanism::tft_fine_threshold(th).unwrap(),
    })
}

fn config_strategy() -> impl Strategy<Value = SimConfig> {
    (
        mechanism_strategy(),
        prop::collection::vec(1.0..200.0f64, 2..12),
        1.0..3.0f64,
        1.5..30.0f64,
        prop_oneof![Just(0.0), 0.0..0.2f64],
        any::<u64>(),
    )
        .prop_map(|(mech, demands, hop, g, e, seed)| {
            let mut c = SimConfig::new(mech, demands);
            c.hop_factor = hop;
            c.g = g;
            c.e = e;
            c.seed = seed;
            c.rounds = 6;
            c
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn same_seed_same_run(cfg in config_strategy()) {
        prop_assert_eq!(run(&cfg).unwrap(), run(&cfg).unwrap());
    }

    #[test]
    fn delivered_never_exceeds_offered(cfg in config_strategy()) {
        let out = run(&cfg).unwrap();
        for m in &out.metrics {
            prop_assert!(m.delivered >= 0.0);
            prop_assert!(m.delivered <= m.offered * (1.0 + 1e-12));
            prop_assert!((0.0..=1.0).contains(&m.mean_policy));
        }
        let active: f64 = out.final_states.iter().filter(|s| !s.opted_out).map(|s| s.demand).sum();
        let last = out.metrics.last().unwrap();
        prop_assert!((last.offered - active).abs() <= 1e-9 * active.max(1.0));
    }

    #[test]
    fn opt_out_is_absorbing(cfg in config_strategy()) {
        let mut sim = Simulation::new(cfg.clone()).unwrap();
        let mut prev: Vec<bool> = sim.states().iter().map(|s| s.opted_out).collect();
        let mut count = 0;
        for _ in 0..cfg.rounds {
            let m = sim.step().unwrap();
            prop_assert!(m.opted_out_count >= count);
            count = m.opted_out_count;
            for (was, s) in prev.iter().zip(sim.states()) {
                prop_assert!(!was || s.opted_out);
                prop_assert!(!s.opted_out || s.policy.value() == 0.0);
            }
            prev = sim.states().iter().map(|s| s.opted_out).collect();
        }
    }
}

#[test]
fn converged_state_is_a_best_response() {
    let cases = [
        SimConfig::new(Mechanism::tft_fine(), vec![80.0, 100.0, 120.0, 90.0]),
        SimConfig::new(Mechanism::tft_binary(0.7).unwrap(), vec![100.0; 6]),
        SimConfig::new(Mechanism::RepSplit, vec![50.0, 150.0, 100.0]),
        SimConfig::new(Mechanism::tft_fine_threshold(0.5).unwrap(), vec![100.0; 5]),
    ];
    for mut cfg in cases {
        cfg.rounds = 30;
        let out = run(&cfg).unwrap();
        assert!(out.converged_at.is_some(), "{}: no fixed point", cfg.mech);
        let states = &out.final_states;
        for i in 0..states.len() {
            if states[i].opted_out {
                continue;
            }
            let derived = derive_profile(&cfg, states, i).unwrap();
            let r = solve(cfg.mech, &derived.profile, &cfg.solver_cfg).unwrap();
            assert_eq!(r.status, SolveStatus::Interior, "{} node {i}", cfg.mech);
            let dev = (r.t_star.unwrap() - states[i].policy.value()).abs();
            assert!(
                dev <= cfg.solver_cfg.grid_step,
                "{} node {i}: deviates by {dev}",
                cfg.mech
            );
        }
    }
}

#[test]
fn fine_grained_network_collapses_at_high_ratio() {
    // hop factor 50 makes every node carry fifty times its own demand
    let mut cfg = SimConfig::new(Mechanism::tft_fine(), vec![10.0; 8]);
    cfg.hop_factor = 50.0;
    let out = run(&cfg).unwrap();
    let last = out.metrics.last().unwrap();
    assert_eq!(last.opted_out_count, 8);
    assert_eq!(last.delivered, 0.0);
    assert_eq!(last.mean_policy, 0.0);
}

#[test]
fn invalid_configs_are_rejected() {
    assert!(matches!(
        run(&SimConfig::new(Mechanism::Plain, vec![1.0])),
        Err(SimError::TooFewNodes(_))
    ));
    assert!(run(&SimConfig::new(Mechanism::Plain, vec![1.0, -1.0])).is_err());
    assert!(run(&SimConfig::new(Mechanism::Plain, vec![0.0, 0.0])).is_err());
    let mut c = SimConfig::new(Mechanism::Plain, vec![1.0, 1.0]);
    c.hop_factor = 0.5;
    assert!(run(&c).is_err());
}
