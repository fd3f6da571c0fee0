// Rounds of best responses in a small network: the plain network loses all
// forwarding at once, fine-grained tit-for-tat loses its members when the
// transit load is heavy, and the binary threshold holds them at t_s.
//
// `cargo run --example network_disintegration`

use std::error::Error;

use coopgame::model::Mechanism;
use coopgame::netsim::{run as simulate, SimConfig};

fn report(label: &str, cfg: &SimConfig) -> Result<(), Box<dyn Error>> {
    let out = simulate(cfg)?;
    println!("{label}");
    for m in &out.metrics {
        println!(
            "  round {}: mean policy {:.3}, opted out {}, delivered {:.0} of {:.0}",
            m.round, m.mean_policy, m.opted_out_count, m.delivered, m.offered
        );
    }
    println!("  fixed point after round {:?}", out.converged_at);
    Ok(())
}

pub fn run() -> Result<(), Box<dyn Error>> {
    let demands = vec![80.0, 100.0, 120.0, 90.0, 110.0, 100.0];
    report("plain", &SimConfig::new(Mechanism::plain(), demands.clone()))?;

    let mut heavy = SimConfig::new(Mechanism::tft_fine(), demands.clone());
    heavy.hop_factor = 50.0;
    report("fine-grained, 50 hops per delivery", &heavy)?;

    let mut light = SimConfig::new(Mechanism::tft_fine(), demands.clone());
    light.hop_factor = 3.0;
    report("fine-grained, 3 hops per delivery", &light)?;

    report(
        "binary t_s = 0.7",
        &SimConfig::new(Mechanism::tft_binary(0.7)?, demands.clone()),
    )?;

    let mut noisy = SimConfig::new(Mechanism::tft_binary(0.8)?, demands);
    noisy.e = 0.1;
    noisy.seed = 7;
    noisy.rounds = 4;
    report("binary t_s = 0.8 with 10% misread forwards", &noisy)?;
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run()
}
