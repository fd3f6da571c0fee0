// Scenario text in, CSV out, without going through the binary.
//
// `cargo run --example scenario_csv`

use std::error::Error;

use coopgame::cli::{execute, parse_scenario};

const SCENARIO: &str = "\
# sweep the optimal policy against the service ratio
command = sweep
mechanism.variant = tft_fine
profile.s_xn = 10
profile.g = 10
sweep.kind = policy_vs_m
sweep.lo = 0.5
sweep.hi = 8
sweep.steps = 6
";

pub fn run() -> Result<(), Box<dyn Error>> {
    let scenario = parse_scenario(SCENARIO)?;
    print!("{}", execute(&scenario)?);

    let broken = SCENARIO.replace("tft_fine", "tft_binary");
    match parse_scenario(&broken) {
        Ok(_) => println!("unexpectedly parsed"),
        Err(err) => println!("rejected: {err}"),
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run()
}
