use serde::Serialize;

use super::{cheeger_constant, volume_entropy, Attainment, IntervalSet, PLConcave};
use crate::error::{Error, Precondition, Result};
use crate::numeric::ge_tol;

const LN2: f64 = std::f64::consts::LN_2;

/// Both sides of the long-interval boundary bound, in linear and log scale.
///
/// Linear values may underflow to zero for very small sets; the verdict is
/// taken in log space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LemmaCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ln_lhs: f64,
    pub ln_rhs: f64,
    pub holds: bool,
}

fn bounded_length(space: &PLConcave) -> Option<f64> {
    let (lo, hi) = space.domain();
    space.is_bounded().then_some(hi - lo)
}

/// `m⁺(Ω) >= v (−ln 2 + hR)/D` on a bounded interval of length `D` carrying
/// mass at least 1/2, for sets with `−ln v >= hR > 0`.
pub fn lemma_1dim_check(space: &PLConcave, omega: &IntervalSet, h: f64, r: f64) -> Result<LemmaCheck> {
    let Some(d) = bounded_length(space) else {
        return Err(Error::Precondition(vec![Precondition::BoundedDomainRequired]));
    };
    let mut bad = Vec::new();
    let total = space.log_total_mass().exp();
    if total < 0.5 {
        bad.push(Precondition::TotalMassBelowHalf { mass: total });
    }
    let hr = h * r;
    if !(hr > 0.0) {
        bad.push(Precondition::NonPositiveEntropyRadius { h_times_r: hr });
    }
    let ln_v = space.log_mass(omega);
    if -ln_v < hr {
        bad.push(Precondition::LevelBelowEntropyRadius { neg_ln_mass: -ln_v, h_times_r: hr });
    }
    if !bad.is_empty() {
        return Err(Error::Precondition(bad));
    }
    let ln_lhs = space.log_boundary_measure(omega);
    let factor = (-LN2 + hr) / d;
    let ln_rhs = if factor > 0.0 { ln_v + factor.ln() } else { f64::NEG_INFINITY };
    let holds = factor <= 0.0 || ge_tol(ln_lhs, ln_rhs, 1e-12);
    Ok(LemmaCheck { lhs: ln_lhs.exp(), rhs: ln_v.exp() * factor, ln_lhs, ln_rhs, holds })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RigidityVerdict {
    /// Hypothesis holds and every slope on the window lies in the band.
    Pass,
    /// Hypothesis holds but some slope leaves the band.
    Fail,
    /// The near-equality hypothesis on `m⁺(Ω)` is not satisfied; nothing is asserted.
    HypothesisNotMet,
}

/// Report of the quantitative slope estimate near a nearly optimal set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RigidityCheck {
    /// `sup Ω`
    pub b: f64,
    /// `−ln ε /(28 h)`
    pub width: f64,
    /// `[min(b, L) − width, D/10]`, clipped to the domain, in absolute coordinates.
    pub window: (f64, f64),
    pub slope_min: f64,
    pub slope_max: f64,
    /// `(1−4ε)h`
    pub lower: f64,
    /// `(1+3√ε)h`
    pub upper: f64,
    /// `ln m⁺(Ω)` and `ln((1+ε) h m(Ω ∩ [0, L]))`.
    pub ln_boundary: f64,
    pub ln_hypothesis_bound: f64,
    pub hypothesis_holds: bool,
    /// `(−ln2 + (1−ε)hR)/D − (1−2ε)h`, positive when admissible.
    pub average_slope_margin: f64,
    /// `−(1−ε)hR − ln m(Ω)`, non-negative when admissible.
    pub mass_margin: f64,
    pub verdict: RigidityVerdict,
}

/// Slope band for the log-density next to a set that nearly attains
/// `m⁺(Ω) = h m(Ω)` on a long interval `[0, D]`.
///
/// Positions `L`, `D/10` and the window are measured from the left end of the
/// domain. At breakpoints both one-sided slopes must lie in the band.
pub fn quantitative_rigidity_check(
    space: &PLConcave,
    omega: &IntervalSet,
    h: f64,
    eps: f64,
    l: f64,
    r: f64,
) -> Result<RigidityCheck> {
    let Some(d) = bounded_length(space) else {
        return Err(Error::Precondition(vec![Precondition::BoundedDomainRequired]));
    };
    let (lo, hi) = space.domain();
    let mut bad = Vec::new();
    if !(eps > 0.0 && eps < 1.0 / 128.0) {
        bad.push(Precondition::EpsilonRange { eps });
    }
    for (name, value) in [("h", h), ("L", l), ("R", r)] {
        if !(value > 0.0) {
            bad.push(Precondition::NonPositive { name, value });
        }
    }
    let total = space.log_total_mass().exp();
    if total < 0.5 {
        bad.push(Precondition::TotalMassBelowHalf { mass: total });
    }
    let omega = omega.clip(lo, hi);
    let ln_v = space.log_mass(&omega);
    let ln_bound = -(1.0 - eps) * h * r;
    let mass_margin = ln_bound - ln_v;
    if mass_margin < 0.0 {
        bad.push(Precondition::SetMassTooLarge { ln_mass: ln_v, ln_bound });
    }
    let h_bar = (-LN2 + (1.0 - eps) * h * r) / d;
    let average_slope_margin = h_bar - (1.0 - 2.0 * eps) * h;
    if !(average_slope_margin > 0.0) {
        bad.push(Precondition::AverageSlopeGap { h_bar, bound: (1.0 - 2.0 * eps) * h });
    }
    let Some(b) = omega.sup() else {
        return Err(Error::InvalidIntervals("empty set".into()));
    };
    if !bad.is_empty() {
        return Err(Error::Precondition(bad));
    }

    let ln_boundary = space.log_boundary_measure(&omega);
    let near = omega.clip(lo, lo + l);
    let ln_hypothesis_bound = eps.ln_1p() + h.ln() + space.log_mass(&near);
    let hypothesis_holds = ln_boundary < ln_hypothesis_bound;

    let width = -eps.ln() / (28.0 * h);
    let a1 = (b.min(lo + l) - width).max(lo);
    let a2 = (lo + d / 10.0).min(hi);
    let (slope_min, slope_max) = if a1 <= a2 {
        space.slope_range(a1, a2).expect("window inside domain")
    } else {
        (f64::NAN, f64::NAN)
    };
    let lower = (1.0 - 4.0 * eps) * h;
    let upper = (1.0 + 3.0 * eps.sqrt()) * h;
    let verdict = if !hypothesis_holds {
        RigidityVerdict::HypothesisNotMet
    } else if a1 > a2 || (slope_min >= lower && slope_max <= upper) {
        RigidityVerdict::Pass
    } else {
        RigidityVerdict::Fail
    };
    Ok(RigidityCheck {
        b,
        width,
        window: (a1, a2),
        slope_min,
        slope_max,
        lower,
        upper,
        ln_boundary,
        ln_hypothesis_bound,
        hypothesis_holds,
        average_slope_margin,
        mass_margin,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Rigidity {
    /// `W` is affine with slope `h` and `(−inf, b]` attains the Cheeger constant.
    Rigid { b: f64, h: f64 },
    NotRigid,
}

/// Whether a whole-line space with positive right tail slope attains its Cheeger constant.
pub fn rigidity_1d(space: &PLConcave) -> Result<Rigidity> {
    let mut bad = Vec::new();
    if !space.is_whole_line() {
        bad.push(Precondition::WholeLineRequired);
    }
    match space.right_tail_slope() {
        Some(s) if s > 0.0 => {}
        s => bad.push(Precondition::PositiveRightSlopeRequired { slope: s.unwrap_or(f64::NAN) }),
    }
    if !bad.is_empty() {
        return Err(Error::Precondition(bad));
    }
    let c = cheeger_constant(space)?;
    Ok(match c.attainment {
        Attainment::Attained(set) => Rigidity::Rigid { b: set.sup().unwrap(), h: c.mu },
        Attainment::NotAttained => Rigidity::NotRigid,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NeighborhoodReport {
    pub h: f64,
    pub ln_mass: f64,
    pub ln_mass_grown: f64,
    /// `ln m(Ω) + σ h`
    pub ln_expected: f64,
    /// `ln m⁺(Ω^σ) − ln(h m(Ω^σ))`
    pub boundary_residual: f64,
    pub holds: bool,
}

/// Relative tolerance for the log-space equalities of the neighbourhood check.
const GROWTH_TOL: f64 = 1e-12;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= GROWTH_TOL * a.abs().max(b.abs()).max(1.0)
}

/// For a set with `m⁺(Ω) = h m(Ω)`, verify `m(Ω^σ) = m(Ω) e^{σh}` and that `Ω^σ`
/// again attains the equality.
pub fn neighborhood_growth_check(space: &PLConcave, omega: &IntervalSet, sigma: f64) -> Result<NeighborhoodReport> {
    if !(sigma > 0.0) {
        return Err(Error::Precondition(vec![Precondition::NonPositive { name: "sigma", value: sigma }]));
    }
    let x0 = space.breakpoints()[0];
    let h = volume_entropy(space, x0)?.h;
    let ln_mass = space.log_mass(omega);
    let ln_boundary = space.log_boundary_measure(omega);
    if !(h > 0.0) || !ln_mass.is_finite() || !close(ln_boundary, h.ln() + ln_mass) {
        return Err(Error::EqualityHypothesisFails { boundary: ln_boundary.exp(), h_mass: h * ln_mass.exp() });
    }
    let (lo, hi) = space.domain();
    let grown = omega.neighborhood(sigma, lo, hi);
    let ln_mass_grown = space.log_mass(&grown);
    let ln_expected = ln_mass + sigma * h;
    let boundary_residual = space.log_boundary_measure(&grown) - (h.ln() + ln_mass_grown);
    let holds = close(ln_mass_grown, ln_expected) && boundary_residual.abs() <= GROWTH_TOL * ln_mass_grown.abs().max(1.0);
    Ok(NeighborhoodReport { h, ln_mass, ln_mass_grown, ln_expected, boundary_residual, holds })
}
