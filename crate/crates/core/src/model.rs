//! Game model between a single node and the network it is attached to.
//!
//! The node controls only its forwarding policy `t_x`, the fraction of the
//! network's transit requests it actually services. The network answers with
//! its own policy `T_N` (the fraction of the node's requests it grants), which
//! depends on the mechanism in force and on the node's reputation.
//!
//! Utility and feasibility are evaluated under the identification
//! `reputation == policy`; noisy reputation estimation lives in
//! [`crate::reputation`].

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{name} must be {expected}, got {value}")]
    OutOfDomain {
        name: &'static str,
        expected: &'static str,
        value: f64,
    },
    #[error("service ratio is undefined when s_xn = 0")]
    UndefinedRatio,
}

fn check(name: &'static str, value: f64, expected: &'static str, ok: bool) -> Result<f64, ModelError> {
    if ok && !value.is_nan() {
        Ok(value)
    } else {
        Err(ModelError::OutOfDomain { name, expected, value })
    }
}

/// A fraction in `[0, 1]` describing how much of the network's transit
/// load the node services.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Policy(f64);

impl Policy {
    pub const ZERO: Policy = Policy(0.0);
    pub const FULL: Policy = Policy(1.0);

    pub fn new(t_x: f64) -> Result<Self, ModelError> {
        check("t_x", t_x, "in [0, 1]", (0.0..=1.0).contains(&t_x)).map(Policy)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Clamps into `[0, 1]`; NaN maps to zero.
    pub fn saturating(t_x: f64) -> Self {
        if t_x.is_nan() {
            Policy::ZERO
        } else {
            Policy(t_x.clamp(0.0, 1.0))
        }
    }
}

/// Reputation held by the network about the node, in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Reputation(f64);

impl Reputation {
    pub fn new(r_x: f64) -> Result<Self, ModelError> {
        check("r_x", r_x, "in [0, 1]", (0.0..=1.0).contains(&r_x)).map(Reputation)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<Policy> for Reputation {
    fn from(p: Policy) -> Self {
        Reputation(p.0)
    }
}

/// Exogenous parameters of the game.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServiceProfile {
    s_xn: f64,
    s_nx: f64,
    g: f64,
    b: f64,
    e: f64,
}

impl ServiceProfile {
    /// `s_xn` is the node's own demand, `s_nx` the transit load the network
    /// asks of it, `g` the value per serviced unit, `b` the bandwidth
    /// (`f64::INFINITY` for a non-binding constraint) and `e` the observation
    /// error probability.
    pub fn new(s_xn: f64, s_nx: f64, g: f64, b: f64, e: f64) -> Result<Self, ModelError> {
        Ok(ServiceProfile {
            s_xn: check("s_xn", s_xn, "finite and >= 0", s_xn.is_finite() && s_xn >= 0.0)?,
            s_nx: check("s_nx", s_nx, "finite and > 0", s_nx.is_finite() && s_nx > 0.0)?,
            g: check("g", g, "finite and > 0", g.is_finite() && g > 0.0)?,
            b: check("b", b, "> 0", b > 0.0)?,
            e: check("e", e, "in [0, 1]", (0.0..=1.0).contains(&e))?,
        })
    }

    /// Builds a profile from the service ratio `m = s_nx / s_xn`.
    pub fn with_ratio(s_xn: f64, m: f64, g: f64, b: f64, e: f64) -> Result<Self, ModelError> {
        check("m", m, "finite and > 0", m.is_finite() && m > 0.0)?;
        Self::new(s_xn, m * s_xn, g, b, e)
    }

    pub fn s_xn(&self) -> f64 {
        self.s_xn
    }

    pub fn s_nx(&self) -> f64 {
        self.s_nx
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn e(&self) -> f64 {
        self.e
    }
}

/// The reputation / reciprocity variant governing the network side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mechanism {
    /// No reputation system; every request is served best effort.
    Plain,
    /// Transit requests sent to the node are scaled by its reputation.
    RepSplit,
    /// As [`Mechanism::RepSplit`], but no transit is requested below `t_p`.
    RepSplitThreshold { t_p: f64 },
    /// Network grants the node's requests in proportion to its reputation.
    TftFine { scale_transit_by_reputation: bool },
    /// Network grants everything at reputation `>= t_s`, nothing below.
    TftBinary { t_s: f64 },
    /// Fine-grained tit-for-tat; transit is requested only at reputation `>= t_s`.
    TftFineThreshold { t_s: f64 },
}

impl Mechanism {
    pub fn plain() -> Self {
        Mechanism::Plain
    }

    pub fn rep_split() -> Self {
        Mechanism::RepSplit
    }

    pub fn rep_split_threshold(t_p: f64) -> Result<Self, ModelError> {
        Mechanism::RepSplitThreshold { t_p }.validated()
    }

    pub fn tft_fine() -> Self {
        Mechanism::TftFine {
            scale_transit_by_reputation: false,
        }
    }

    pub fn tft_binary(t_s: f64) -> Result<Self, ModelError> {
        Mechanism::TftBinary { t_s }.validated()
    }

    pub fn tft_fine_threshold(t_s: f64) -> Result<Self, ModelError> {
        Mechanism::TftFineThreshold { t_s }.validated()
    }

    pub fn validated(self) -> Result<Self, ModelError> {
        let in_range = |t: f64| t > 0.0 && t <= 1.0;
        match self {
            Mechanism::RepSplitThreshold { t_p } => {
                check("t_p", t_p, "in (0, 1]", in_range(t_p))?;
            }
            Mechanism::TftBinary { t_s } | Mechanism::TftFineThreshold { t_s } => {
                check("t_s", t_s, "in (0, 1]", in_range(t_s))?;
            }
            _ => {}
        }
        Ok(self)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Mechanism::Plain => "plain",
            Mechanism::RepSplit => "rep_split",
            Mechanism::RepSplitThreshold { .. } => "rep_split_threshold",
            Mechanism::TftFine { .. } => "tft_fine",
            Mechanism::TftBinary { .. } => "tft_binary",
            Mechanism::TftFineThreshold { .. } => "tft_fine_threshold",
        }
    }

    /// Policies at which utility or feasibility jumps.
    pub fn discontinuities(&self) -> Vec<f64> {
        match *self {
            Mechanism::RepSplitThreshold { t_p } => vec![t_p],
            Mechanism::TftBinary { t_s } | Mechanism::TftFineThreshold { t_s } => vec![t_s],
            _ => Vec::new(),
        }
    }

    pub fn is_tit_for_tat(&self) -> bool {
        matches!(
            self,
            Mechanism::TftFine { .. } | Mechanism::TftBinary { .. } | Mechanism::TftFineThreshold { .. }
        )
    }

    pub fn splits_transit_by_reputation(&self) -> bool {
        matches!(self, Mechanism::RepSplit | Mechanism::RepSplitThreshold { .. })
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mechanism::RepSplitThreshold { t_p } => write!(f, "{}(t_p={t_p})", self.name()),
            Mechanism::TftBinary { t_s } | Mechanism::TftFineThreshold { t_s } => {
                write!(f, "{}(t_s={t_s})", self.name())
            }
            Mechanism::TftFine {
                scale_transit_by_reputation: true,
            } => write!(f, "tft_fine(scaled)"),
            _ => f.write_str(self.name()),
        }
    }
}

/// Utility on the extended real line; negative infinity means the node
/// receives no service at all while still having demand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Utility(f64);

impl Utility {
    pub const NEG_INFINITY: Utility = Utility(f64::NEG_INFINITY);

    pub fn finite(value: f64) -> Self {
        debug_assert!(value.is_finite());
        Utility(value)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }
}

impl PartialOrd for Utility {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

/// Fraction of the node's own requests the network grants.
pub fn network_policy(mech: Mechanism, r: Reputation) -> f64 {
    let r = r.value();
    match mech {
        Mechanism::Plain | Mechanism::RepSplit | Mechanism::RepSplitThreshold { .. } => 1.0,
        Mechanism::TftFine { .. } | Mechanism::TftFineThreshold { .. } => r,
        Mechanism::TftBinary { t_s } => {
            if r >= t_s {
                1.0
            } else {
                0.0
            }
        }
    }
}

/// Transit load the network actually directs at the node.
pub fn effective_transit(mech: Mechanism, profile: &ServiceProfile, r: Reputation) -> f64 {
    let r = r.value();
    let s_nx = profile.s_nx();
    match mech {
        Mechanism::Plain | Mechanism::TftBinary { .. } => s_nx,
        Mechanism::TftFine {
            scale_transit_by_reputation,
        } => {
            if scale_transit_by_reputation {
                r * s_nx
            } else {
                s_nx
            }
        }
        Mechanism::RepSplit => r * s_nx,
        Mechanism::RepSplitThreshold { t_p } => {
            if r < t_p {
                0.0
            } else {
                r * s_nx
            }
        }
        Mechanism::TftFineThreshold { t_s } => {
            if r < t_s {
                0.0
            } else {
                s_nx
            }
        }
    }
}

/// The node's utility at policy `pol`, taking its reputation equal to its
/// policy.
pub fn utility(mech: Mechanism, profile: &ServiceProfile, pol: Policy) -> Utility {
    let t = pol.value();
    let r = Reputation::from(pol);
    let transit = effective_transit(mech, profile, r);
    let s_xn = profile.s_xn();
    let g = profile.g();
    if mech.is_tit_for_tat() {
        let t_n = network_policy(mech, r);
        if t_n == 0.0 {
            if s_xn > 0.0 {
                Utility::NEG_INFINITY
            } else {
                Utility(-t * transit)
            }
        } else {
            // reissued requests cost s_xn / T_N in place of the flat issuing cost
            Utility(g * s_xn - s_xn / t_n - t * transit)
        }
    } else {
        Utility((g - 1.0) * s_xn - t * transit)
    }
}

/// Whether the bandwidth constraint of `mech` holds at policy `pol`.
pub fn feasible(mech: Mechanism, profile: &ServiceProfile, pol: Policy) -> bool {
    let t = pol.value();
    let r = Reputation::from(pol);
    let s_xn = profile.s_xn();
    let transit = effective_transit(mech, profile, r);
    // received transit occupies the medium whether or not it is forwarded
    let transit_load = transit * (1.0 + t);
    let load = if mech.is_tit_for_tat() {
        let t_n = network_policy(mech, r);
        let reissue = if s_xn == 0.0 {
            0.0
        } else if t_n == 0.0 {
            return false;
        } else {
            s_xn / t_n
        };
        transit_load + s_xn + reissue
    } else {
        transit_load + s_xn
    };
    load <= profile.b()
}

/// Ratio `s_nx / s_xn` of transit demanded to own demand.
pub fn service_ratio(profile: &ServiceProfile) -> Result<f64, ModelError> {
    if profile.s_xn() == 0.0 {
        Err(ModelError::UndefinedRatio)
    } else {
        Ok(profile.s_nx() / profile.s_xn())
    }
}
