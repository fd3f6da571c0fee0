//! One-dimensional parameter sweeps producing tabular curves.

use thiserror::Error;

use crate::model::{feasible, utility, Mechanism, ModelError, Policy, ServiceProfile};
use crate::reputation::{default_samples, exclusion_probability, ObservationModel, ReputationError};
use crate::solver::{solve, SolveStatus, SolverConfig, SolverError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error("sweep range must satisfy lo < hi, got [{lo}, {hi}]")]
    EmptyRange { lo: f64, hi: f64 },
    #[error("sweep needs at least 2 steps, got {0}")]
    TooFewSteps(usize),
    #[error("{what} sweep range [{lo}, {hi}] leaves the domain {domain}")]
    OutOfDomain {
        what: &'static str,
        lo: f64,
        hi: f64,
        domain: &'static str,
    },
    #[error("sweep kind {expected:?} required, got {got:?}")]
    WrongKind { expected: SweepKind, got: SweepKind },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Reputation(#[from] ReputationError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepKind {
    /// Utility against the node's own policy.
    UtilityCurve,
    /// Optimal policy against the service ratio, scaling `s_nx`.
    PolicyVsM,
    /// Optimal policy against the service value.
    PolicyVsG,
    /// Exclusion probability of a node against the observation error.
    ExclusionVsE(ExclusionParams),
}

impl SweepKind {
    pub fn name(&self) -> &'static str {
        match self {
            SweepKind::UtilityCurve => "utility_curve",
            SweepKind::PolicyVsM => "policy_vs_m",
            SweepKind::PolicyVsG => "policy_vs_g",
            SweepKind::ExclusionVsE(_) => "exclusion_vs_e",
        }
    }

    fn same_kind(&self, other: &SweepKind) -> bool {
        std::mem::discriminant(self) == std::mem::discriminant(other)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExclusionParams {
    /// Policy of the assessed node; a fully cooperative node by default.
    pub t_x: Policy,
    pub t_s: f64,
    /// Observations per window; `round(s_nx)` of the base profile when absent.
    pub n_samples: Option<u64>,
    pub seed: u64,
}

impl ExclusionParams {
    pub fn cooperative(t_s: f64) -> Self {
        ExclusionParams {
            t_x: Policy::FULL,
            t_s,
            n_samples: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRange {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl SweepRange {
    pub fn new(lo: f64, hi: f64, steps: usize) -> Self {
        SweepRange { lo, hi, steps }
    }

    /// `steps` evenly spaced values from `lo` to `hi` inclusive.
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        let last = self.steps - 1;
        (0..self.steps).map(move |i| {
            if i == last {
                self.hi
            } else {
                self.lo + (self.hi - self.lo) * i as f64 / last as f64
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub kind: SweepKind,
    pub mech: Mechanism,
    pub base_profile: ServiceProfile,
    pub range: SweepRange,
    pub solver_cfg: SolverConfig,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), SweepError> {
        let SweepRange { lo, hi, steps } = self.range;
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(SweepError::EmptyRange { lo, hi });
        }
        if steps < 2 {
            return Err(SweepError::TooFewSteps(steps));
        }
        let (what, domain, ok) = match self.kind {
            SweepKind::UtilityCurve => ("t_x", "[0, 1]", lo >= 0.0 && hi <= 1.0),
            SweepKind::ExclusionVsE(_) => ("e", "[0, 1]", lo >= 0.0 && hi <= 1.0),
            SweepKind::PolicyVsM => ("m", "(0, inf)", lo > 0.0 && hi.is_finite()),
            SweepKind::PolicyVsG => ("g", "(0, inf)", lo > 0.0 && hi.is_finite()),
        };
        if !ok {
            return Err(SweepError::OutOfDomain { what, lo, hi, domain });
        }
        self.solver_cfg.validate()?;
        Ok(())
    }

    fn expect(&self, expected: SweepKind) -> Result<(), SweepError> {
        if !self.kind.same_kind(&expected) {
            return Err(SweepError::WrongKind {
                expected,
                got: self.kind,
            });
        }
        self.validate()
    }
}

/// One row of a curve. `value` is a utility, an optimal policy, or a
/// probability depending on the sweep kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub x: f64,
    pub value: f64,
    pub feasible: Option<bool>,
    pub status: Option<SolveStatus>,
}

pub fn utility_curve(spec: &SweepSpec) -> Result<Vec<CurvePoint>, SweepError> {
    spec.expect(SweepKind::UtilityCurve)?;
    Ok(spec
        .range
        .values()
        .map(|t| {
            let pol = Policy::saturating(t);
            CurvePoint {
                x: t,
                value: utility(spec.mech, &spec.base_profile, pol).value(),
                feasible: Some(feasible(spec.mech, &spec.base_profile, pol)),
                status: None,
            }
        })
        .collect())
}

/// Opt-out points carry policy 0, the policy of a node that has left.
pub fn policy_vs_m(spec: &SweepSpec) -> Result<Vec<CurvePoint>, SweepError> {
    spec.expect(SweepKind::PolicyVsM)?;
    let base = spec.base_profile;
    spec.range
        .values()
        .map(|m| {
            let profile = ServiceProfile::with_ratio(base.s_xn(), m, base.g(), base.b(), base.e())?;
            policy_point(spec, m, &profile)
        })
        .collect()
}

pub fn policy_vs_g(spec: &SweepSpec) -> Result<Vec<CurvePoint>, SweepError> {
    spec.expect(SweepKind::PolicyVsG)?;
    let base = spec.base_profile;
    spec.range
        .values()
        .map(|g| {
            let profile = ServiceProfile::new(base.s_xn(), base.s_nx(), g, base.b(), base.e())?;
            policy_point(spec, g, &profile)
        })
        .collect()
}

fn policy_point(spec: &SweepSpec, x: f64, profile: &ServiceProfile) -> Result<CurvePoint, SweepError> {
    let r = solve(spec.mech, profile, &spec.solver_cfg)?;
    Ok(CurvePoint {
        x,
        value: r.adopted_policy().value(),
        feasible: None,
        status: Some(r.status),
    })
}

pub fn exclusion_vs_e(spec: &SweepSpec) -> Result<Vec<CurvePoint>, SweepError> {
    let SweepKind::ExclusionVsE(params) = spec.kind else {
        return Err(SweepError::WrongKind {
            expected: SweepKind::ExclusionVsE(ExclusionParams::cooperative(1.0)),
            got: spec.kind,
        });
    };
    spec.validate()?;
    let n = params
        .n_samples
        .unwrap_or_else(|| default_samples(spec.base_profile.s_nx()));
    spec.range
        .values()
        .map(|e| {
            let model = ObservationModel::new(n, e, params.seed)?;
            Ok(CurvePoint {
                x: e,
                value: exclusion_probability(params.t_x, params.t_s, &model)?,
                feasible: None,
                status: None,
            })
        })
        .collect()
}

/// Dispatches on `spec.kind`.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<CurvePoint>, SweepError> {
    match spec.kind {
        SweepKind::UtilityCurve => utility_curve(spec),
        SweepKind::PolicyVsM => policy_vs_m(spec),
        SweepKind::PolicyVsG => policy_vs_g(spec),
        SweepKind::ExclusionVsE(_) => exclusion_vs_e(spec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const INF: f64 = f64::INFINITY;

    fn spec(kind: SweepKind, mech: Mechanism, profile: ServiceProfile, range: SweepRange) -> SweepSpec {
        SweepSpec {
            kind,
            mech,
            base_profile: profile,
            range,
            solver_cfg: SolverConfig::default(),
        }
    }

    #[test]
    fn range_values_hit_both_ends() {
        let r = SweepRange::new(0.1, 0.7, 4);
        let v: Vec<f64> = r.values().collect();
        assert_eq!(v.len(), 4);
        assert_eq!(v[0], 0.1);
        assert_eq!(v[3], 0.7);
        assert!((v[1] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn validation_errors() {
        let p = ServiceProfile::new(1.0, 1.0, 10.0, INF, 0.0).unwrap();
        let s = spec(
            SweepKind::UtilityCurve,
            Mechanism::Plain,
            p,
            SweepRange::new(0.5, 0.5, 3),
        );
        assert!(matches!(utility_curve(&s), Err(SweepError::EmptyRange { .. })));
        let s = spec(
            SweepKind::UtilityCurve,
            Mechanism::Plain,
            p,
            SweepRange::new(0.0, 1.0, 1),
        );
        assert!(matches!(utility_curve(&s), Err(SweepError::TooFewSteps(1))));
        let s = spec(
            SweepKind::UtilityCurve,
            Mechanism::Plain,
            p,
            SweepRange::new(0.0, 1.5, 3),
        );
        assert!(matches!(utility_curve(&s), Err(SweepError::OutOfDomain { .. })));
        let s = spec(SweepKind::PolicyVsM, Mechanism::Plain, p, SweepRange::new(0.0, 2.0, 3));
        assert!(matches!(policy_vs_m(&s), Err(SweepError::OutOfDomain { .. })));
        let s = spec(SweepKind::PolicyVsM, Mechanism::Plain, p, SweepRange::new(0.5, 2.0, 3));
        assert!(matches!(utility_curve(&s), Err(SweepError::WrongKind { .. })));
    }

    #[test]
    fn plain_curve_is_linear() {
        let p = ServiceProfile::with_ratio(100.0, 2.0, 10.0, INF, 0.0).unwrap();
        let s = spec(
            SweepKind::UtilityCurve,
            Mechanism::Plain,
            p,
            SweepRange::new(0.0, 1.0, 11),
        );
        let pts = utility_curve(&s).unwrap();
        assert_eq!(pts[0].value, 900.0);
        assert_eq!(pts[10].value, 700.0);
        for pt in &pts {
            assert!((pt.value - (900.0 - 200.0 * pt.x)).abs() < 1e-9);
            assert_eq!(pt.feasible, Some(true));
        }
    }

    #[test]
    fn fine_grained_curves() {
        let p = ServiceProfile::with_ratio(1.0, 50.0, 10.0, INF, 0.0).unwrap();
        let s = spec(
            SweepKind::UtilityCurve,
            Mechanism::tft_fine(),
            p,
            SweepRange::new(0.0, 1.0, 101),
        );
        let pts = utility_curve(&s).unwrap();
        assert_eq!(pts[0].value, f64::NEG_INFINITY);
        assert!(pts.iter().all(|pt| pt.value < 0.0));

        let p = ServiceProfile::with_ratio(1.0, 0.5, 10.0, INF, 0.0).unwrap();
        let s = SweepSpec { base_profile: p, ..s };
        let pts = utility_curve(&s).unwrap();
        let best = pts.iter().max_by(|a, b| a.value.total_cmp(&b.value)).unwrap();
        assert_eq!(best.x, 1.0);
    }

    #[test]
    fn policy_against_ratio() {
        let p = ServiceProfile::new(1.0, 1.0, 10.0, INF, 0.0).unwrap();
        let s = spec(
            SweepKind::PolicyVsM,
            Mechanism::tft_fine(),
            p,
            SweepRange::new(0.1, 1.0, 10),
        );
        for pt in policy_vs_m(&s).unwrap() {
            assert_eq!(pt.value, 1.0, "m = {}", pt.x);
            assert_eq!(pt.status, Some(SolveStatus::Interior));
        }
        let s = SweepSpec {
            range: SweepRange::new(4.0, 50.0, 2),
            ..s
        };
        let pts = policy_vs_m(&s).unwrap();
        assert!((pts[0].value - 0.5).abs() <= 1e-4 + 1e-10);
        assert_eq!(pts[1].status, Some(SolveStatus::OptOut));
        assert_eq!(pts[1].value, 0.0);
    }

    #[test]
    fn policy_against_value() {
        let p = ServiceProfile::new(1.0, 4.0, 1.0, INF, 0.0).unwrap();
        let s = spec(
            SweepKind::PolicyVsG,
            Mechanism::tft_fine(),
            p,
            SweepRange::new(1.0, 10.0, 10),
        );
        let pts = policy_vs_g(&s).unwrap();
        // break-even value is g = 2 sqrt(m) = 4
        assert_eq!(pts[0].status, Some(SolveStatus::OptOut));
        assert_eq!(pts[9].status, Some(SolveStatus::Interior));
        assert!((pts[9].value - 0.5).abs() <= 1e-4 + 1e-10);
    }

    #[test]
    fn exclusion_against_error() {
        let p = ServiceProfile::new(1.0, 100.0, 10.0, INF, 0.0).unwrap();
        let s = spec(
            SweepKind::ExclusionVsE(ExclusionParams::cooperative(1.0)),
            Mechanism::tft_binary(1.0).unwrap(),
            p,
            SweepRange::new(0.0, 0.01, 2),
        );
        let pts = exclusion_vs_e(&s).unwrap();
        assert_eq!(pts[0].value, 0.0);
        assert!((pts[1].value - (1.0 - 0.99f64.powi(100))).abs() < 1e-12);

        let s = SweepSpec {
            kind: SweepKind::ExclusionVsE(ExclusionParams::cooperative(0.0)),
            range: SweepRange::new(0.0, 1.0, 5),
            ..s
        };
        assert!(exclusion_vs_e(&s).unwrap().iter().all(|pt| pt.value == 0.0));
    }
}
