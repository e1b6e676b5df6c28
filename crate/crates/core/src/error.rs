use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A single named hypothesis of a check that the caller's input violates.
#[derive(Debug, Clone, PartialEq)]
pub enum Precondition {
    EpsilonRange { eps: f64 },
    TotalMassBelowHalf { mass: f64 },
    LevelBelowEntropyRadius { neg_ln_mass: f64, h_times_r: f64 },
    NonPositiveEntropyRadius { h_times_r: f64 },
    SetMassTooLarge { ln_mass: f64, ln_bound: f64 },
    AverageSlopeGap { h_bar: f64, bound: f64 },
    BoundedDomainRequired,
    WholeLineRequired,
    PositiveRightSlopeRequired { slope: f64 },
    RadiusOrdering { r: f64, eps: f64 },
    NonPositive { name: &'static str, value: f64 },
}

impl fmt::Display for Precondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::EpsilonRange { eps } => write!(f, "epsilon {eps} not in (0, 1/128)"),
            Self::TotalMassBelowHalf { mass } => write!(f, "mass of [0, D] is {mass} < 1/2"),
            Self::LevelBelowEntropyRadius { neg_ln_mass, h_times_r } => {
                write!(f, "-ln m(set) = {neg_ln_mass} < h*R = {h_times_r}")
            }
            Self::NonPositiveEntropyRadius { h_times_r } => write!(f, "h*R = {h_times_r} must be > 0"),
            Self::SetMassTooLarge { ln_mass, ln_bound } => {
                write!(f, "ln m(set) = {ln_mass} exceeds -(1-eps)hR = {ln_bound}")
            }
            Self::AverageSlopeGap { h_bar, bound } => {
                write!(f, "(-ln2 + (1-eps)hR)/D = {h_bar} must exceed (1-2eps)h = {bound}")
            }
            Self::BoundedDomainRequired => write!(f, "domain must be a bounded interval"),
            Self::WholeLineRequired => write!(f, "domain must be the whole real line"),
            Self::PositiveRightSlopeRequired { slope } => {
                write!(f, "right tail slope {slope} must be positive")
            }
            Self::RadiusOrdering { r, eps } => write!(f, "need r > eps > 0, got r={r}, eps={eps}"),
            Self::NonPositive { name, value } => write!(f, "{name} = {value} must be positive"),
        }
    }
}

fn join(items: &[Precondition]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid log-density: {0}")]
    InvalidDensity(String),
    #[error("invalid interval set: {0}")]
    InvalidIntervals(String),
    #[error("infinite mass")]
    InfiniteMass,
    #[error("finite-mass space: use isoperimetric_profile")]
    FiniteMassSpace,
    #[error("volume {v} outside (0, {total})")]
    VolumeOutOfRange { v: f64, total: f64 },
    #[error("precondition violated: {}", join(.0))]
    Precondition(Vec<Precondition>),
    #[error("equality hypothesis fails: m+(set) = {boundary}, h*m(set) = {h_mass}")]
    EqualityHypothesisFails { boundary: f64, h_mass: f64 },
    #[error("invalid probability density: {0}")]
    InvalidProbability(String),
    #[error("empty support")]
    EmptySupport,
    #[error("densities live on different reference spaces")]
    ReferenceMismatch,
    #[error("invalid discrete space: {0}")]
    InvalidSpace(String),
    #[error("degenerate partition: {0}")]
    DegeneratePartition(String),
    #[error("unbalanced transport input: net mass {0}")]
    Unbalanced(f64),
    #[error("needles overlap at point {0}")]
    NeedleOverlap(usize),
    #[error("diagnostics undefined: {0}")]
    DiagnosticsUndefined(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("weight overflow: {0}")]
    WeightOverflow(String),
    #[error("malformed input: {0}")]
    Parse(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
