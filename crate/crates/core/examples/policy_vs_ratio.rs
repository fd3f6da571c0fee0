// Optimal fine-grained policy against the service ratio M, next to the
// analytic 1/sqrt(M), and against the service value g for the binary
// mechanism.
//
// `cargo run --example policy_vs_ratio`

use std::error::Error;

use coopgame::model::{Mechanism, ServiceProfile};
use coopgame::solver::SolverConfig;
use coopgame::sweep::{run_sweep, SweepKind, SweepRange, SweepSpec};

pub fn run() -> Result<(), Box<dyn Error>> {
    let spec = SweepSpec {
        kind: SweepKind::PolicyVsM,
        mech: Mechanism::tft_fine(),
        base_profile: ServiceProfile::new(10.0, 10.0, 10.0, f64::INFINITY, 0.0)?,
        range: SweepRange::new(0.25, 40.0, 12),
        solver_cfg: SolverConfig::default(),
    };
    println!("{:>8} {:>8} {:>10} {:>10}", "M", "t_star", "1/sqrt(M)", "status");
    for p in run_sweep(&spec)? {
        let status = p.status.map(|s| s.as_str()).unwrap_or("");
        println!(
            "{:>8.3} {:>8.4} {:>10.4} {status:>10}",
            p.x,
            p.value,
            (1.0 / p.x.sqrt()).min(1.0)
        );
    }

    let spec = SweepSpec {
        kind: SweepKind::PolicyVsG,
        mech: Mechanism::tft_binary(0.6)?,
        base_profile: ServiceProfile::with_ratio(10.0, 3.0, 10.0, f64::INFINITY, 0.0)?,
        range: SweepRange::new(1.5, 5.0, 8),
        solver_cfg: SolverConfig::default(),
    };
    println!("binary t_s = 0.6, M = 3");
    for p in run_sweep(&spec)? {
        let status = p.status.map(|s| s.as_str()).unwrap_or("");
        println!("  g = {:.2}: t_star {:.2} ({status})", p.x, p.value);
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run()
}
