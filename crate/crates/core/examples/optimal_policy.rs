// Best forwarding policy of one node under every mechanism, for the same
// traffic profile.
//
// `cargo run --example optimal_policy`

use std::error::Error;

use coopgame::model::{Mechanism, ServiceProfile};
use coopgame::solver::{closed_form_oracle, solve, SolverConfig};

pub fn run() -> Result<(), Box<dyn Error>> {
    // the node asks for 100 units and is asked to forward 200
    let profile = ServiceProfile::new(100.0, 200.0, 10.0, f64::INFINITY, 0.0)?;
    let mechanisms = [
        Mechanism::plain(),
        Mechanism::rep_split(),
        Mechanism::rep_split_threshold(0.5)?,
        Mechanism::tft_fine(),
        Mechanism::TftFine {
            scale_transit_by_reputation: true,
        },
        Mechanism::tft_binary(0.8)?,
        Mechanism::tft_fine_threshold(0.8)?,
    ];
    let cfg = SolverConfig::default();
    println!("{:<40} {:>10} {:>10} {:>10}", "mechanism", "status", "t_star", "u_star");
    for mech in mechanisms {
        let r = solve(mech, &profile, &cfg)?;
        let t = r.t_star.map(|t| format!("{t:.4}")).unwrap_or_default();
        let u = r.u_star.map(|u| format!("{u:.2}")).unwrap_or_default();
        println!("{:<40} {:>10} {t:>10} {u:>10}", mech.to_string(), r.status.as_str());
        if let Some(exact) = closed_form_oracle(mech, &profile) {
            println!("{:<40} {:>10} {exact:>10.4}", "", "analytic");
        }
    }

    // a tight bandwidth can leave no policy at all
    let tight = ServiceProfile::new(100.0, 200.0, 10.0, 500.0, 0.0)?;
    let r = solve(Mechanism::tft_fine(), &tight, &cfg)?;
    println!("tft_fine with b = 500: {}", r.status);
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run()
}
