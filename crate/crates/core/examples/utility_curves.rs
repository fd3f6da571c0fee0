// Utility of a node under fine-grained tit-for-tat as it forwards more of
// the transit load, for a few service ratios M.
//
// `cargo run --example utility_curves`

use std::error::Error;

use coopgame::model::{Mechanism, ServiceProfile};
use coopgame::solver::{solve, SolverConfig};
use coopgame::sweep::{utility_curve, SweepKind, SweepRange, SweepSpec};

pub fn run() -> Result<(), Box<dyn Error>> {
    let cfg = SolverConfig::default();
    for m in [0.5, 2.0, 10.0, 50.0] {
        let spec = SweepSpec {
            kind: SweepKind::UtilityCurve,
            mech: Mechanism::tft_fine(),
            base_profile: ServiceProfile::with_ratio(1.0, m, 10.0, f64::INFINITY, 0.0)?,
            range: SweepRange::new(0.0, 1.0, 11),
            solver_cfg: cfg,
        };
        let curve = utility_curve(&spec)?;
        let row: Vec<String> = curve.iter().map(|p| format!("{:7.2}", p.value)).collect();
        println!("M = {m:>4}: {}", row.join(" "));

        let best = solve(spec.mech, &spec.base_profile, &cfg)?;
        match best.t_star {
            Some(t) => println!(
                "          best policy {t:.4} with utility {:.4}",
                best.adopted_utility()
            ),
            None => println!("          no policy beats leaving: {}", best.status),
        }
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run()
}
