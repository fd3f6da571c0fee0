// Threshold mechanisms: the binary one pins nodes exactly at the
// threshold, the fine-grained one flips between full cooperation and
// stopping just short of it as the transit load grows.
//
// `cargo run --example threshold_strategies`

use std::error::Error;

use coopgame::model::{Mechanism, ServiceProfile};
use coopgame::solver::{solve, SolverConfig};

pub fn run() -> Result<(), Box<dyn Error>> {
    let cfg = SolverConfig::default();
    let inf = f64::INFINITY;

    for t_s in [0.3, 0.7, 0.95] {
        let p = ServiceProfile::with_ratio(100.0, 2.0, 10.0, inf, 0.0)?;
        let r = solve(Mechanism::tft_binary(t_s)?, &p, &cfg)?;
        println!("binary t_s = {t_s}: t_star = {:?}", r.t_star);
    }

    let t_s = 2.0 / 3.0;
    let mech = Mechanism::tft_fine_threshold(t_s)?;
    println!("fine-grained threshold t_s = {t_s:.4}");
    for m in [0.2, 0.4, 0.8, 1.0, 1.5, 2.0, 4.0] {
        let p = ServiceProfile::with_ratio(10.0, m, 10.0, inf, 0.0)?;
        let r = solve(mech, &p, &cfg)?;
        let note = if r.supremum_approach {
            "  (just below the threshold)"
        } else {
            ""
        };
        println!(
            "  M = {m:>3}: {} t_star = {}{note}",
            r.status,
            r.t_star.map(|t| format!("{t:.4}")).unwrap_or("-".into())
        );
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run()
}
