//! Constrained best response of a single rational node.
//!
//! The optimum is searched on a uniform policy grid augmented with every
//! discontinuity of the mechanism and its left neighbour, then optionally
//! polished by a bracketed golden-section search inside the smooth piece
//! that holds the best grid point. The result is compared against opting
//! out, which is worth exactly zero.

use std::fmt;

use thiserror::Error;

use crate::model::{feasible, service_ratio, utility, Mechanism, Policy, ServiceProfile};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub grid_step: f64,
    /// Relative tolerance under which two utilities count as tied.
    pub tie_tolerance: f64,
    pub refine: bool,
    /// Policy resolution of the local refinement.
    pub refine_tolerance: f64,
    /// When false the node must stay in the game, and a configuration with
    /// no feasible policy is reported as [`SolveStatus::Infeasible`].
    pub allow_opt_out: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            grid_step: 1e-4,
            tie_tolerance: 1e-9,
            refine: true,
            refine_tolerance: 1e-10,
            allow_opt_out: true,
        }
    }
}

impl SolverConfig {
    pub fn with_grid_step(mut self, grid_step: f64) -> Self {
        self.grid_step = grid_step;
        self
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.grid_step > 0.0 && self.grid_step < 1.0) {
            return Err(SolverError::InvalidConfig(format!(
                "grid_step must be in (0, 1), got {}",
                self.grid_step
            )));
        }
        if !(self.tie_tolerance > 0.0 && self.tie_tolerance.is_finite()) {
            return Err(SolverError::InvalidConfig(format!(
                "tie_tolerance must be positive, got {}",
                self.tie_tolerance
            )));
        }
        if !(self.refine_tolerance > 0.0 && self.refine_tolerance.is_finite()) {
            return Err(SolverError::InvalidConfig(format!(
                "refine_tolerance must be positive, got {}",
                self.refine_tolerance
            )));
        }
        Ok(())
    }

    fn tie_band(&self, u_max: f64) -> f64 {
        self.tie_tolerance * u_max.abs().max(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Interior,
    OptOut,
    Infeasible,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Interior => "interior",
            SolveStatus::OptOut => "opt_out",
            SolveStatus::Infeasible => "infeasible",
        }
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Closed interval of policies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyInterval {
    pub lo: f64,
    pub hi: f64,
}

impl PolicyInterval {
    pub fn contains(&self, t: f64) -> bool {
        self.lo <= t && t <= self.hi
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Present iff `status` is [`SolveStatus::Interior`].
    pub t_star: Option<f64>,
    pub u_star: Option<f64>,
    /// Maximal runs of evaluated policies whose utility ties with `u_star`.
    pub argmax_set: Vec<PolicyInterval>,
    pub grid_step: f64,
    /// Set when `t_star` is the left neighbour of a discontinuity and the
    /// true optimum is only approached from below.
    pub supremum_approach: bool,
}

impl SolveResult {
    /// Policy actually adopted: `t_star`, or zero after opting out.
    pub fn adopted_policy(&self) -> Policy {
        self.t_star.map(Policy::saturating).unwrap_or(Policy::ZERO)
    }

    /// Utility actually obtained: `u_star`, or zero after opting out.
    pub fn adopted_utility(&self) -> f64 {
        self.u_star.unwrap_or(0.0)
    }

    /// The argmax interval holding `t_star`.
    pub fn argmax_interval(&self) -> Option<PolicyInterval> {
        let t = self.t_star?;
        self.argmax_set.iter().copied().find(|iv| iv.contains(t))
    }

    fn no_policy(status: SolveStatus, grid_step: f64) -> Self {
        SolveResult {
            status,
            t_star: None,
            u_star: None,
            argmax_set: Vec::new(),
            grid_step,
            supremum_approach: false,
        }
    }
}

/// Policies at which the solver evaluates utility before refinement.
pub fn evaluation_points(mech: Mechanism, grid_step: f64) -> Vec<f64> {
    let mut forced = Vec::new();
    for d in mech.discontinuities() {
        forced.push(d);
        if d - grid_step >= 0.0 {
            forced.push(d - grid_step);
        }
    }
    let n = (1.0 / grid_step).floor() as usize;
    let mut points: Vec<f64> = (0..=n)
        .map(|k| (k as f64 * grid_step).min(1.0))
        .chain(std::iter::once(1.0))
        // the left neighbour stands for "just below d"; nothing may sit between them
        .filter(|&t| {
            mech.discontinuities()
                .iter()
                .all(|&d| !(t > d - grid_step - 1e-12 && t < d + 1e-12))
        })
        .collect();
    points.extend(forced);
    points.sort_by(f64::total_cmp);
    points.dedup();
    points
}

fn value_at(mech: Mechanism, profile: &ServiceProfile, t: f64) -> Option<f64> {
    let pol = Policy::saturating(t);
    if !feasible(mech, profile, pol) {
        return None;
    }
    let u = utility(mech, profile, pol).value();
    (u > f64::NEG_INFINITY).then_some(u)
}

/// Optimal forwarding policy of a rational node.
pub fn solve(mech: Mechanism, profile: &ServiceProfile, cfg: &SolverConfig) -> Result<SolveResult, SolverError> {
    cfg.validate()?;
    let step = cfg.grid_step;
    let points = evaluation_points(mech, step);

    let mut values: Vec<(f64, f64)> = points
        .iter()
        .filter_map(|&t| value_at(mech, profile, t).map(|u| (t, u)))
        .collect();
    if values.is_empty() {
        let status = if cfg.allow_opt_out {
            SolveStatus::OptOut
        } else {
            SolveStatus::Infeasible
        };
        return Ok(SolveResult::no_policy(status, step));
    }

    let grid_max = values.iter().map(|&(_, u)| u).fold(f64::NEG_INFINITY, f64::max);
    let band = cfg.tie_band(grid_max);
    // smallest tied policy wins inside a flat region
    let (mut t_star, mut u_star) = *values.iter().find(|&&(_, u)| u >= grid_max - band).expect("non-empty");

    if cfg.refine {
        // polish around the exact grid maximiser; a flat region never improves
        let peak = values.iter().find(|&&(_, u)| u == grid_max).expect("non-empty").0;
        if let Some((t, u)) = refine(mech, profile, cfg, peak) {
            if u > grid_max {
                t_star = t;
                u_star = u;
                values.push((t, u));
                values.sort_by(|a, b| a.0.total_cmp(&b.0));
            }
        }
    }

    if u_star < 0.0 && cfg.allow_opt_out {
        return Ok(SolveResult::no_policy(SolveStatus::OptOut, step));
    }

    let u_max = u_star.max(grid_max);
    let band = cfg.tie_band(u_max);
    let argmax_set = tied_intervals(&points, &values, u_max - band, t_star);
    let supremum_approach = mech
        .discontinuities()
        .iter()
        .any(|&d| d - step >= 0.0 && t_star == d - step && is_left_limit(mech, profile, d, step, u_star));

    Ok(SolveResult {
        status: SolveStatus::Interior,
        t_star: Some(t_star),
        u_star: Some(u_star),
        argmax_set,
        grid_step: step,
        supremum_approach,
    })
}

/// True when utility still rises between `d - step` and `d` from the left,
/// so the reported point stands in for an open-interval supremum.
fn is_left_limit(mech: Mechanism, profile: &ServiceProfile, d: f64, step: f64, u_at: f64) -> bool {
    let probe = d - step / 2.0;
    match value_at(mech, profile, probe) {
        Some(u) => u > u_at,
        None => false,
    }
}

/// Merges consecutive evaluated points at or above `floor` into maximal
/// intervals. An infeasible point between two tied ones splits the run.
fn tied_intervals(points: &[f64], values: &[(f64, f64)], floor: f64, t_star: f64) -> Vec<PolicyInterval> {
    let mut all: Vec<(f64, Option<f64>)> = points.iter().map(|&t| (t, None)).collect();
    let mut vi = values.iter().peekable();
    for slot in all.iter_mut() {
        while let Some(&&(t, u)) = vi.peek() {
            if t < slot.0 {
                vi.next();
            } else {
                if t == slot.0 {
                    slot.1 = Some(u);
                }
                break;
            }
        }
    }
    // refined point sits between grid points
    if !points.contains(&t_star) {
        let at = all.partition_point(|&(t, _)| t < t_star);
        let u = values.iter().find(|&&(t, _)| t == t_star).map(|&(_, u)| u);
        all.insert(at, (t_star, u));
    }

    let mut out: Vec<PolicyInterval> = Vec::new();
    let mut open: Option<PolicyInterval> = None;
    for (t, u) in all {
        match u {
            Some(u) if u >= floor => match open.as_mut() {
                Some(iv) => iv.hi = t,
                None => open = Some(PolicyInterval { lo: t, hi: t }),
            },
            _ => {
                if let Some(iv) = open.take() {
                    out.push(iv);
                }
            }
        }
    }
    out.extend(open);
    out
}

/// Smooth piece `[lo, hi]` of the utility that contains `t`, kept clear of
/// the mechanism's jump points.
fn smooth_piece(mech: Mechanism, t: f64, step: f64) -> (f64, f64) {
    let mut lo: f64 = 0.0;
    let mut hi: f64 = 1.0;
    for d in mech.discontinuities() {
        if t < d {
            hi = hi.min(d - step);
        } else {
            lo = lo.max(d);
        }
    }
    (lo, hi.max(lo))
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the best feasible policy within one grid step
/// of `t0`. The feasible set is an interval inside each smooth piece, so its
/// edges are located by bisection first.
fn refine(mech: Mechanism, profile: &ServiceProfile, cfg: &SolverConfig, t0: f64) -> Option<(f64, f64)> {
    let step = cfg.grid_step;
    let (piece_lo, piece_hi) = smooth_piece(mech, t0, step);
    let mut lo = (t0 - step).max(piece_lo);
    let mut hi = (t0 + step).min(piece_hi);
    if hi <= lo {
        return None;
    }
    let ok = |t: f64| value_at(mech, profile, t).is_some();
    if !ok(t0) {
        return None;
    }
    if !ok(lo) {
        lo = feasibility_edge(&ok, lo, t0);
    }
    if !ok(hi) {
        hi = feasibility_edge(&ok, hi, t0);
    }

    let f = |t: f64| value_at(mech, profile, t).unwrap_or(f64::NEG_INFINITY);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > cfg.refine_tolerance {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = f(d);
        }
    }

    [lo, hi, c, d]
        .into_iter()
        .filter_map(|t| value_at(mech, profile, t).map(|u| (t, u)))
        .fold(None, |best: Option<(f64, f64)>, cand| match best {
            Some(b) if b.1 >= cand.1 => Some(b),
            _ => Some(cand),
        })
}

/// Bisects between an infeasible `bad` and a feasible `good` policy down to
/// floating-point resolution; returns the feasible end.
fn feasibility_edge(ok: &impl Fn(f64) -> bool, mut bad: f64, mut good: f64) -> f64 {
    loop {
        let mid = 0.5 * (bad + good);
        if mid == bad || mid == good {
            return good;
        }
        if ok(mid) {
            good = mid;
        } else {
            bad = mid;
        }
    }
}

/// Analytic optimum for the variants that have one, when the bandwidth
/// constraint does not bind. `None` for threshold variants, for the scaled
/// fine-grained variant, without own demand, or when the constraint binds.
pub fn closed_form_oracle(mech: Mechanism, profile: &ServiceProfile) -> Option<f64> {
    let t = match mech {
        Mechanism::Plain | Mechanism::RepSplit => 0.0,
        Mechanism::TftFine {
            scale_transit_by_reputation: false,
        } => {
            let m = service_ratio(profile).ok()?;
            (1.0 / m.sqrt()).min(1.0)
        }
        _ => return None,
    };
    feasible(mech, profile, Policy::saturating(t)).then_some(t)
}
