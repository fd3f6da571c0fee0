//! Scenario files: flat `key = value` lines, `#` comments, dotted block keys.
//!
//! ```text
//! command = solve
//! mechanism.variant = tft_binary
//! mechanism.t_s = 0.8
//! profile.s_xn = 100
//! profile.m = 2
//! profile.g = 10
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

use super::csv::fmt_num;
use crate::model::{Mechanism, Policy, ServiceProfile};
use crate::netsim::SimConfig;
use crate::solver::SolverConfig;
use crate::sweep::{ExclusionParams, SweepKind, SweepRange, SweepSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ScenarioError {
    pub line: usize,
    pub message: String,
}

impl ScenarioError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        ScenarioError {
            line,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Curve,
    Sweep,
    Sim,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Curve => "curve",
            Command::Sweep => "sweep",
            Command::Sim => "sim",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Job {
    Solve {
        mech: Mechanism,
        profile: ServiceProfile,
        solver: SolverConfig,
    },
    Curve(SweepSpec),
    Sweep(SweepSpec),
    Sim(SimConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub command: Command,
    pub job: Job,
    pub output: Option<PathBuf>,
}

const KEYS: &[&str] = &[
    "command",
    "output",
    "mechanism.variant",
    "mechanism.t_s",
    "mechanism.t_p",
    "mechanism.scale_transit_by_reputation",
    "profile.s_xn",
    "profile.s_nx",
    "profile.m",
    "profile.g",
    "profile.b",
    "profile.e",
    "sweep.kind",
    "sweep.lo",
    "sweep.hi",
    "sweep.steps",
    "sweep.t_x",
    "sweep.t_s",
    "sweep.n_samples",
    "sim.n_nodes",
    "sim.demands",
    "sim.hop_factor",
    "sim.rounds",
    "sim.seed",
    "sim.initial_policy",
    "solver.grid_step",
    "solver.tie_tolerance",
    "solver.refine",
    "solver.refine_tolerance",
];

struct Entries {
    map: BTreeMap<String, (usize, String)>,
    last_line: usize,
}

impl Entries {
    fn raw(&self, key: &str) -> Option<(usize, &str)> {
        self.map.get(key).map(|(l, v)| (*l, v.as_str()))
    }

    fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    fn line_of(&self, key: &str) -> usize {
        self.map.get(key).map(|(l, _)| *l).unwrap_or(self.last_line)
    }

    fn require(&self, key: &str, missing_line: usize, missing: &str) -> Result<(usize, &str), ScenarioError> {
        self.raw(key)
            .ok_or_else(|| ScenarioError::new(missing_line, format!("missing {missing}: `{key}` is required")))
    }

    fn num(&self, key: &str) -> Result<Option<f64>, ScenarioError> {
        let Some((line, v)) = self.raw(key) else {
            return Ok(None);
        };
        parse_f64(v)
            .map(Some)
            .ok_or_else(|| ScenarioError::new(line, format!("`{key}` expects a number, got `{v}`")))
    }

    fn num_in(&self, key: &str, domain: &str, ok: impl Fn(f64) -> bool) -> Result<Option<f64>, ScenarioError> {
        match self.num(key)? {
            Some(v) if !ok(v) => Err(ScenarioError::new(
                self.line_of(key),
                format!("`{key}` = {v} is out of domain: must be {domain}"),
            )),
            other => Ok(other),
        }
    }

    fn int(&self, key: &str) -> Result<Option<u64>, ScenarioError> {
        let Some((line, v)) = self.raw(key) else {
            return Ok(None);
        };
        v.parse::<u64>()
            .map(Some)
            .map_err(|_| ScenarioError::new(line, format!("`{key}` expects a non-negative integer, got `{v}`")))
    }

    fn flag(&self, key: &str) -> Result<Option<bool>, ScenarioError> {
        let Some((line, v)) = self.raw(key) else {
            return Ok(None);
        };
        match v {
            "true" => Ok(Some(true)),
            "false" => Ok(Some(false)),
            _ => Err(ScenarioError::new(
                line,
                format!("`{key}` expects true or false, got `{v}`"),
            )),
        }
    }

    fn forbid(&self, prefix: &str, why: &str) -> Result<(), ScenarioError> {
        match self.map.iter().find(|(k, _)| k.starts_with(prefix)) {
            Some((k, (line, _))) => Err(ScenarioError::new(*line, format!("`{k}` is not allowed: {why}"))),
            None => Ok(()),
        }
    }
}

fn parse_f64(v: &str) -> Option<f64> {
    match v {
        "inf" | "+inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => v.parse::<f64>().ok().filter(|x| x.is_finite()),
    }
}

fn unit(v: f64) -> bool {
    (0.0..=1.0).contains(&v)
}

fn positive(v: f64) -> bool {
    v > 0.0 && v.is_finite()
}

fn lex(text: &str) -> Result<Entries, ScenarioError> {
    let mut map = BTreeMap::new();
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ScenarioError::new(
                line,
                format!("expected `key = value`, got `{content}`"),
            ));
        };
        let key = key.trim();
        let value = value.trim();
        if !KEYS.contains(&key) {
            return Err(ScenarioError::new(line, format!("unknown key `{key}`")));
        }
        if value.is_empty() {
            return Err(ScenarioError::new(line, format!("`{key}` has no value")));
        }
        if let Some((first, _)) = map.insert(key.to_string(), (line, value.to_string())) {
            return Err(ScenarioError::new(
                line,
                format!("duplicate key `{key}` (first set on line {first})"),
            ));
        }
    }
    Ok(Entries { map, last_line })
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let entries = lex(text)?;
    let (cmd_line, cmd) = entries.require("command", entries.last_line, "command")?;
    let command = match cmd {
        "solve" => Command::Solve,
        "curve" => Command::Curve,
        "sweep" => Command::Sweep,
        "sim" => Command::Sim,
        other => {
            return Err(ScenarioError::new(
                cmd_line,
                format!("unknown command `{other}` (expected solve, curve, sweep or sim)"),
            ))
        }
    };

    match command {
        Command::Solve => {
            entries.forbid("sweep.", "only curve and sweep commands take a sweep block")?;
            entries.forbid("sim.", "only the sim command takes a sim block")?;
        }
        Command::Curve | Command::Sweep => {
            entries.forbid("sim.", "only the sim command takes a sim block")?;
        }
        Command::Sim => {
            entries.forbid("sweep.", "only curve and sweep commands take a sweep block")?;
            for key in ["profile.s_xn", "profile.s_nx", "profile.m"] {
                entries.forbid(key, "sim derives each node's demand and transit from the sim block")?;
            }
        }
    }

    let mech = parse_mechanism(&entries)?;
    let solver = parse_solver(&entries)?;
    let output = entries.raw("output").map(|(_, v)| PathBuf::from(v));

    let job = match command {
        Command::Solve => Job::Solve {
            mech,
            profile: parse_profile(&entries, true)?,
            solver,
        },
        Command::Curve | Command::Sweep => Job::from_sweep(command, parse_sweep(&entries, command, mech, solver)?),
        Command::Sim => Job::Sim(parse_sim(&entries, mech, solver)?),
    };
    Ok(Scenario { command, job, output })
}

impl Job {
    fn from_sweep(command: Command, spec: SweepSpec) -> Job {
        if command == Command::Curve {
            Job::Curve(spec)
        } else {
            Job::Sweep(spec)
        }
    }
}

fn parse_mechanism(entries: &Entries) -> Result<Mechanism, ScenarioError> {
    let (line, variant) = entries.require("mechanism.variant", entries.last_line, "variant")?;
    let t_s = entries.num_in("mechanism.t_s", "in (0, 1]", |v| v > 0.0 && v <= 1.0)?;
    let t_p = entries.num_in("mechanism.t_p", "in (0, 1]", |v| v > 0.0 && v <= 1.0)?;
    let scale = entries.flag("mechanism.scale_transit_by_reputation")?;

    let needs_t_s = matches!(variant, "tft_binary" | "tft_fine_threshold");
    let needs_t_p = variant == "rep_split_threshold";
    for (key, needed) in [("mechanism.t_s", needs_t_s), ("mechanism.t_p", needs_t_p)] {
        if entries.has(key) && !needed {
            return Err(ScenarioError::new(
                entries.line_of(key),
                format!("`{key}` is not used by variant {variant}"),
            ));
        }
    }
    if scale.is_some() && variant != "tft_fine" {
        return Err(ScenarioError::new(
            entries.line_of("mechanism.scale_transit_by_reputation"),
            format!("`mechanism.scale_transit_by_reputation` is not used by variant {variant}"),
        ));
    }
    let missing = |name: &str| {
        ScenarioError::new(
            line,
            format!("missing {name}: variant {variant} requires `mechanism.{name}`"),
        )
    };

    let mech = match variant {
        "plain" => Mechanism::Plain,
        "rep_split" => Mechanism::RepSplit,
        "rep_split_threshold" => Mechanism::RepSplitThreshold {
            t_p: t_p.ok_or_else(|| missing("t_p"))?,
        },
        "tft_fine" => Mechanism::TftFine {
            scale_transit_by_reputation: scale.unwrap_or(false),
        },
        "tft_binary" => Mechanism::TftBinary {
            t_s: t_s.ok_or_else(|| missing("t_s"))?,
        },
        "tft_fine_threshold" => Mechanism::TftFineThreshold {
            t_s: t_s.ok_or_else(|| missing("t_s"))?,
        },
        other => {
            return Err(ScenarioError::new(
                line,
                format!(
                    "unknown variant `{other}` (expected plain, rep_split, rep_split_threshold, tft_fine, tft_binary or tft_fine_threshold)"
                ),
            ))
        }
    };
    Ok(mech)
}

fn parse_solver(entries: &Entries) -> Result<SolverConfig, ScenarioError> {
    let mut cfg = SolverConfig::default();
    if let Some(v) = entries.num_in("solver.grid_step", "in (0, 1)", |v| v > 0.0 && v < 1.0)? {
        cfg.grid_step = v;
    }
    if let Some(v) = entries.num_in("solver.tie_tolerance", "> 0", positive)? {
        cfg.tie_tolerance = v;
    }
    if let Some(v) = entries.num_in("solver.refine_tolerance", "> 0", positive)? {
        cfg.refine_tolerance = v;
    }
    if let Some(v) = entries.flag("solver.refine")? {
        cfg.refine = v;
    }
    Ok(cfg)
}

/// `g`, `b` and `e`, shared by every command.
fn parse_profile_values(entries: &Entries) -> Result<(f64, f64, f64), ScenarioError> {
    entries.require("profile.g", entries.last_line, "g")?;
    let g = entries.num_in("profile.g", "> 0", positive)?.expect("present");
    let b = entries
        .num_in("profile.b", "> 0", |v| v > 0.0)?
        .unwrap_or(f64::INFINITY);
    let e = entries.num_in("profile.e", "in [0, 1]", unit)?.unwrap_or(0.0);
    Ok((g, b, e))
}

fn parse_profile(entries: &Entries, with_transit: bool) -> Result<ServiceProfile, ScenarioError> {
    let (g, b, e) = parse_profile_values(entries)?;
    entries.require("profile.s_xn", entries.last_line, "s_xn")?;
    let s_xn = entries.num_in("profile.s_xn", ">= 0", |v| v >= 0.0)?.expect("present");
    let s_nx = entries.num_in("profile.s_nx", "> 0", positive)?;
    let m = entries.num_in("profile.m", "> 0", positive)?;
    let s_nx = match (s_nx, m) {
        (Some(_), Some(_)) => {
            return Err(ScenarioError::new(
                entries.line_of("profile.m"),
                "conflicting keys: give either `profile.s_nx` or `profile.m`, not both",
            ))
        }
        (Some(s), None) => s,
        (None, Some(m)) => {
            if s_xn == 0.0 {
                return Err(ScenarioError::new(
                    entries.line_of("profile.m"),
                    "`profile.m` needs a positive `profile.s_xn`",
                ));
            }
            m * s_xn
        }
        (None, None) if !with_transit => 1.0,
        (None, None) => {
            return Err(ScenarioError::new(
                entries.last_line,
                "missing s_nx: one of `profile.s_nx` or `profile.m` is required",
            ))
        }
    };
    ServiceProfile::new(s_xn, s_nx, g, b, e)
        .map_err(|err| ScenarioError::new(entries.line_of("profile.s_xn"), err.to_string()))
}

fn parse_sweep(
    entries: &Entries,
    command: Command,
    mech: Mechanism,
    solver: SolverConfig,
) -> Result<SweepSpec, ScenarioError> {
    let kind_name = match (command, entries.raw("sweep.kind")) {
        (Command::Curve, None) => "utility_curve",
        (Command::Curve, Some((_, "utility_curve"))) => "utility_curve",
        (Command::Curve, Some((line, other))) => {
            return Err(ScenarioError::new(
                line,
                format!("curve command only supports sweep.kind = utility_curve, got `{other}`"),
            ))
        }
        (_, Some((line, "utility_curve"))) => {
            return Err(ScenarioError::new(line, "utility_curve belongs to the curve command"))
        }
        (_, Some((_, kind))) => kind,
        (_, None) => entries.require("sweep.kind", entries.last_line, "kind")?.1,
    };

    if kind_name != "exclusion_vs_e" {
        entries.forbid("sweep.t_x", "only exclusion_vs_e takes it")?;
        entries.forbid("sweep.t_s", "only exclusion_vs_e takes it")?;
        entries.forbid("sweep.n_samples", "only exclusion_vs_e takes it")?;
    }
    if kind_name == "policy_vs_m" {
        entries.forbid("profile.s_nx", "policy_vs_m sweeps the transit load")?;
        entries.forbid("profile.m", "policy_vs_m sweeps the transit load")?;
    }

    let (default_lo, default_hi, default_steps) = match kind_name {
        "utility_curve" => (Some(0.0), Some(1.0), Some(101)),
        _ => (None, None, None),
    };
    let missing_line = entries.last_line;
    let lo = entries.num("sweep.lo")?.or(default_lo);
    let hi = entries.num("sweep.hi")?.or(default_hi);
    let steps = entries.int("sweep.steps")?.or(default_steps);
    let lo = lo.ok_or_else(|| ScenarioError::new(missing_line, "missing lo: `sweep.lo` is required"))?;
    let hi = hi.ok_or_else(|| ScenarioError::new(missing_line, "missing hi: `sweep.hi` is required"))?;
    let steps = steps.ok_or_else(|| ScenarioError::new(missing_line, "missing steps: `sweep.steps` is required"))?;

    let kind = match kind_name {
        "utility_curve" => SweepKind::UtilityCurve,
        "policy_vs_m" => SweepKind::PolicyVsM,
        "policy_vs_g" => SweepKind::PolicyVsG,
        "exclusion_vs_e" => {
            let t_s = match entries.num_in("sweep.t_s", "in [0, 1]", unit)? {
                Some(t) => t,
                None => match mech {
                    Mechanism::TftBinary { t_s } | Mechanism::TftFineThreshold { t_s } => t_s,
                    _ => {
                        return Err(ScenarioError::new(
                            missing_line,
                            "missing t_s: `sweep.t_s` is required when the mechanism has no t_s",
                        ))
                    }
                },
            };
            let t_x = entries.num_in("sweep.t_x", "in [0, 1]", unit)?.unwrap_or(1.0);
            let n_samples = match entries.int("sweep.n_samples")? {
                Some(0) => {
                    return Err(ScenarioError::new(
                        entries.line_of("sweep.n_samples"),
                        "`sweep.n_samples` is out of domain: must be >= 1",
                    ))
                }
                other => other,
            };
            SweepKind::ExclusionVsE(ExclusionParams {
                t_x: Policy::saturating(t_x),
                t_s,
                n_samples,
                seed: 0,
            })
        }
        other => {
            return Err(ScenarioError::new(
                entries.line_of("sweep.kind"),
                format!("unknown sweep kind `{other}` (expected policy_vs_m, policy_vs_g or exclusion_vs_e)"),
            ))
        }
    };

    let spec = SweepSpec {
        kind,
        mech,
        base_profile: parse_profile(entries, kind_name != "policy_vs_m")?,
        range: SweepRange::new(lo, hi, steps as usize),
        solver_cfg: solver,
    };
    spec.validate()
        .map_err(|err| ScenarioError::new(entries.line_of("sweep.lo"), format!("out of domain: {err}")))?;
    Ok(spec)
}

fn parse_sim(entries: &Entries, mech: Mechanism, solver: SolverConfig) -> Result<SimConfig, ScenarioError> {
    let (g, b, e) = parse_profile_values(entries)?;
    let (n_line, _) = entries.require("sim.n_nodes", entries.last_line, "n_nodes")?;
    let n = entries.int("sim.n_nodes")?.expect("present") as usize;
    if n < 2 {
        return Err(ScenarioError::new(
            n_line,
            "`sim.n_nodes` is out of domain: must be >= 2",
        ));
    }
    let (d_line, raw) = entries.require("sim.demands", entries.last_line, "demands")?;
    let mut demands = Vec::new();
    for part in raw.split(',') {
        let part = part.trim();
        match parse_f64(part) {
            Some(d) if d >= 0.0 => demands.push(d),
            _ => {
                return Err(ScenarioError::new(
                    d_line,
                    format!("`sim.demands` entries must be numbers >= 0, got `{part}`"),
                ))
            }
        }
    }
    if demands.len() == 1 {
        demands = vec![demands[0]; n];
    }
    if demands.len() != n {
        return Err(ScenarioError::new(
            d_line,
            format!("`sim.demands` lists {} values for {n} nodes", demands.len()),
        ));
    }
    if !demands.iter().any(|&d| d > 0.0) {
        return Err(ScenarioError::new(
            d_line,
            "`sim.demands` needs at least one positive demand",
        ));
    }

    let mut cfg = SimConfig::new(mech, demands);
    cfg.g = g;
    cfg.b = b;
    cfg.e = e;
    cfg.solver_cfg = solver;
    if let Some(h) = entries.num_in("sim.hop_factor", ">= 1", |v| v >= 1.0)? {
        cfg.hop_factor = h;
    }
    if let Some(r) = entries.int("sim.rounds")? {
        cfg.rounds = r as usize;
    }
    if let Some(s) = entries.int("sim.seed")? {
        cfg.seed = s;
    }
    if let Some(p) = entries.num_in("sim.initial_policy", "in [0, 1]", unit)? {
        cfg.initial_policy = p;
    }
    Ok(cfg)
}

impl Scenario {
    /// Overrides the simulation seed; other commands are deterministic
    /// without one.
    pub fn with_seed(mut self, seed: u64) -> Self {
        if let Job::Sim(cfg) = &mut self.job {
            cfg.seed = seed;
        }
        self
    }

    /// Every effective parameter, defaults included, as sorted `key=value`
    /// pairs.
    pub fn resolved_params(&self) -> Vec<(String, String)> {
        let mut p: BTreeMap<&str, String> = BTreeMap::new();
        p.insert("command", self.command.to_string());
        let mech = match &self.job {
            Job::Solve { mech, .. } => *mech,
            Job::Curve(s) | Job::Sweep(s) => s.mech,
            Job::Sim(c) => c.mech,
        };
        p.insert("mechanism.variant", mech.name().to_string());
        match mech {
            Mechanism::RepSplitThreshold { t_p } => {
                p.insert("mechanism.t_p", fmt_num(t_p));
            }
            Mechanism::TftBinary { t_s } | Mechanism::TftFineThreshold { t_s } => {
                p.insert("mechanism.t_s", fmt_num(t_s));
            }
            Mechanism::TftFine {
                scale_transit_by_reputation,
            } => {
                p.insert(
                    "mechanism.scale_transit_by_reputation",
                    scale_transit_by_reputation.to_string(),
                );
            }
            _ => {}
        }

        let profile = |p: &mut BTreeMap<&str, String>, prof: &ServiceProfile, with_transit: bool| {
            p.insert("profile.s_xn", fmt_num(prof.s_xn()));
            if with_transit {
                p.insert("profile.s_nx", fmt_num(prof.s_nx()));
            }
            p.insert("profile.g", fmt_num(prof.g()));
            p.insert("profile.b", fmt_num(prof.b()));
            p.insert("profile.e", fmt_num(prof.e()));
        };
        let solver = match &self.job {
            Job::Solve {
                profile: prof, solver, ..
            } => {
                profile(&mut p, prof, true);
                *solver
            }
            Job::Curve(s) | Job::Sweep(s) => {
                profile(&mut p, &s.base_profile, s.kind != SweepKind::PolicyVsM);
                p.insert("sweep.kind", s.kind.name().to_string());
                p.insert("sweep.lo", fmt_num(s.range.lo));
                p.insert("sweep.hi", fmt_num(s.range.hi));
                p.insert("sweep.steps", s.range.steps.to_string());
                if let SweepKind::ExclusionVsE(x) = s.kind {
                    p.insert("sweep.t_x", fmt_num(x.t_x.value()));
                    p.insert("sweep.t_s", fmt_num(x.t_s));
                    let n = x
                        .n_samples
                        .unwrap_or_else(|| crate::reputation::default_samples(s.base_profile.s_nx()));
                    p.insert("sweep.n_samples", n.to_string());
                }
                s.solver_cfg
            }
            Job::Sim(c) => {
                p.insert("profile.g", fmt_num(c.g));
                p.insert("profile.b", fmt_num(c.b));
                p.insert("profile.e", fmt_num(c.e));
                p.insert("sim.n_nodes", c.n_nodes().to_string());
                let demands: Vec<String> = c.demands.iter().map(|&d| fmt_num(d)).collect();
                p.insert("sim.demands", demands.join(";"));
                p.insert("sim.hop_factor", fmt_num(c.hop_factor));
                p.insert("sim.rounds", c.rounds.to_string());
                p.insert("sim.seed", c.seed.to_string());
                p.insert("sim.initial_policy", fmt_num(c.initial_policy));
                c.solver_cfg
            }
        };
        p.insert("solver.grid_step", fmt_num(solver.grid_step));
        p.insert("solver.tie_tolerance", fmt_num(solver.tie_tolerance));
        p.insert("solver.refine", solver.refine.to_string());
        p.insert("solver.refine_tolerance", fmt_num(solver.refine_tolerance));
        p.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }
}
