//! Scenario-driven front end shared by the `coopgame` binary and its tests.

pub mod csv;
pub mod scenario;

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use scenario::{parse_scenario, Command, Job, Scenario, ScenarioError};

use crate::netsim::{run, SimError};
use crate::solver::{solve, SolverError};
use crate::sweep::{run_sweep, SweepError, SweepKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read scenario {path}: {source}")]
    ReadScenario { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: ScenarioError },
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Sweep(#[from] SweepError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ReadScenario { .. } | CliError::Parse { .. } => EXIT_USAGE,
            _ => EXIT_RUNTIME,
        }
    }
}

/// Runs the scenario and renders its CSV, header comment included.
pub fn execute(scn: &Scenario) -> Result<String, CliError> {
    let params = scn.resolved_params();
    let text = match &scn.job {
        Job::Solve { mech, profile, solver } => csv::solve_csv(&params, &solve(*mech, profile, solver)?),
        Job::Curve(spec) => csv::curve_csv(&params, &run_sweep(spec)?),
        Job::Sweep(spec) => {
            let points = run_sweep(spec)?;
            match spec.kind {
                SweepKind::PolicyVsM => csv::policy_csv(&params, "m", &points),
                SweepKind::PolicyVsG => csv::policy_csv(&params, "g", &points),
                SweepKind::ExclusionVsE(_) => csv::exclusion_csv(&params, &points),
                SweepKind::UtilityCurve => csv::curve_csv(&params, &points),
            }
        }
        Job::Sim(cfg) => csv::sim_csv(&params, &run(cfg)?.metrics),
    };
    Ok(text)
}

/// Where the CSV went: a file, or standard output when no path is set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Output {
    File(PathBuf),
    Stdout(String),
}

/// Reads, parses and executes a scenario file. `out` and `seed` override
/// the scenario's `output` and `sim.seed`.
pub fn run_file(path: &Path, out: Option<&Path>, seed: Option<u64>) -> Result<Output, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::ReadScenario {
        path: path.to_path_buf(),
        source,
    })?;
    let mut scn = parse_scenario(&text).map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    })?;
    if let Some(seed) = seed {
        scn = scn.with_seed(seed);
    }
    let csv = execute(&scn)?;
    match out.map(Path::to_path_buf).or(scn.output.clone()) {
        Some(dest) => {
            fs::write(&dest, csv).map_err(|source| CliError::Write {
                path: dest.clone(),
                source,
            })?;
            Ok(Output::File(dest))
        }
        None => Ok(Output::Stdout(csv)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_solve_row() {
        let scn = parse_scenario(
            "command = solve\nmechanism.variant = plain\nprofile.g = 10\nprofile.s_xn = 100\nprofile.m = 2\n",
        )
        .unwrap();
        let csv = execute(&scn).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with("# coopgame command=solve"));
        assert_eq!(lines[1], "status,t_star,u_star,argmax_lo,argmax_hi");
        assert_eq!(lines[2], "interior,0,900,0,0");
        assert_eq!(lines.len(), 3);
    }

    #[test]
    fn opt_out_row() {
        let scn = parse_scenario(
            "command = solve\nmechanism.variant = tft_fine\nprofile.g = 10\nprofile.s_xn = 100\nprofile.m = 50\n",
        )
        .unwrap();
        let csv = execute(&scn).unwrap();
        assert_eq!(csv.lines().nth(2), Some("opt_out,0,0,,"));
    }

    #[test]
    fn curve_writes_sentinel() {
        let scn = parse_scenario(
            "command = curve\nmechanism.variant = tft_fine\nprofile.g = 10\nprofile.s_xn = 1\nprofile.m = 50\nsweep.steps = 3\n",
        )
        .unwrap();
        let csv = execute(&scn).unwrap();
        let rows: Vec<&str> = csv.lines().skip(2).collect();
        assert_eq!(rows[0], "0,-inf,false");
        assert_eq!(rows[1], "0.5,-17,true");
        assert_eq!(rows[2], "1,-41,true");
    }

    #[test]
    fn error_exit_codes() {
        let missing = run_file(Path::new("/nonexistent/scenario.scn"), None, None).unwrap_err();
        assert_eq!(missing.exit_code(), EXIT_USAGE);
        let write = CliError::Write {
            path: PathBuf::from("x"),
            source: std::io::Error::other("denied"),
        };
        assert_eq!(write.exit_code(), EXIT_RUNTIME);
    }
}
