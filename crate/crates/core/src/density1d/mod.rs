//! Exact arithmetic on one-dimensional log-concave spaces `(I, |.|, e^W dt)`.
//!
//! All masses are closed-form sums of exponential integrals over the linear
//! pieces of `W`, evaluated in log space so that checks involving very small
//! sets (masses far below `f64::MIN_POSITIVE`) stay exact.

mod cheeger;
mod entropy;
mod intervals;
mod lemmas;
mod plconcave;

pub use cheeger::{
    cheeger_constant, cheeger_ratio, half_line_ratio_curve, isoperimetric_profile, milman_objective,
    milman_profile, Attainment, CheegerConstant, Profile,
};
pub use entropy::{
    entropy_growth_inequality_check, volume_entropy, volume_entropy_window, EntropyReport, GrowthCheck,
};
pub use intervals::IntervalSet;
pub use lemmas::{
    lemma_1dim_check, neighborhood_growth_check, quantitative_rigidity_check, rigidity_1d,
    LemmaCheck, NeighborhoodReport, RigidityCheck, RigidityVerdict, Rigidity,
};
pub use plconcave::PLConcave;

/// Mass of a set: finite, or infinite when an unbounded piece does not decay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mass {
    Finite(f64),
    Infinite,
}

impl Mass {
    pub fn finite(self) -> Option<f64> {
        match self {
            Mass::Finite(m) => Some(m),
            Mass::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Mass::Infinite)
    }
}

/// `m(set ∩ domain)`.
pub fn mass(space: &PLConcave, set: &IntervalSet) -> Mass {
    let lm = space.log_mass(set);
    if lm == f64::INFINITY {
        Mass::Infinite
    } else {
        Mass::Finite(lm.exp())
    }
}

/// Minkowski content `m⁺(set)`: the right derivative of `ε -> m(set^ε)` at 0.
///
/// For a continuous density this is the density summed over the boundary
/// points of `set` that are interior to the domain.
pub fn minkowski_content(space: &PLConcave, set: &IntervalSet) -> f64 {
    space.log_boundary_measure(set).exp()
}
