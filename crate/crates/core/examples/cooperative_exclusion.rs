// A node that forwards everything can still be cut off by a binary
// reputation metric when the network misreads some of its forwards.
//
// `cargo run --example cooperative_exclusion`

use std::error::Error;

use coopgame::model::Policy;
use coopgame::reputation::{binarize, exclusion_probability, observe, ObservationModel};

pub fn run() -> Result<(), Box<dyn Error>> {
    let n = 100;
    println!("{:>6} {:>10} {:>10} {:>10}", "e", "t_s=1", "t_s=0.95", "t_s=0.9");
    for e in [0.0, 0.001, 0.005, 0.01, 0.02, 0.05] {
        let model = ObservationModel::new(n, e, 0)?;
        let row: Vec<String> = [1.0, 0.95, 0.9]
            .iter()
            .map(|&t_s| exclusion_probability(Policy::FULL, t_s, &model).map(|p| format!("{p:>10.6}")))
            .collect::<Result<_, _>>()?;
        println!("{e:>6} {}", row.join(" "));
    }

    // the same number by simulation
    let model = ObservationModel::new(n, 0.01, 0)?;
    let trials = 20_000u64;
    let cut = (0..trials)
        .filter(|&s| binarize(&observe(Policy::FULL, &model.with_seed(s)), 1.0).r_hat == 0.0)
        .count();
    println!(
        "e = 0.01, t_s = 1: simulated {:.4}, exact {:.4}, 1 - 0.99^100 = {:.4}",
        cut as f64 / trials as f64,
        exclusion_probability(Policy::FULL, 1.0, &model)?,
        1.0 - 0.99f64.powi(100)
    );
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run()
}
