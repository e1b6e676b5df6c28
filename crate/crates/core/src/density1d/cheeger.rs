use super::{IntervalSet, PLConcave};
use crate::error::{Error, Precondition, Result};

/// Relative tolerance under which two slopes count as equal when deciding
/// whether `W` is affine.
const AFFINE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum Attainment {
    /// A half-line realising the infimum.
    Attained(IntervalSet),
    /// The ratio only approaches `mu` along a sequence of half-lines escaping to infinity.
    NotAttained,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheegerConstant {
    pub mu: f64,
    pub attainment: Attainment,
}

impl CheegerConstant {
    pub fn is_attained(&self) -> bool {
        matches!(self.attainment, Attainment::Attained(_))
    }
}

/// `m⁺(set)/m(set)`, or `None` when the mass is zero or infinite.
pub fn cheeger_ratio(space: &PLConcave, set: &IntervalSet) -> Option<f64> {
    let lm = space.log_mass(set);
    if !lm.is_finite() {
        return None;
    }
    Some((space.log_boundary_measure(set) - lm).exp())
}

/// Ratio of the half-line `(lo, b]` for each `b`, where `lo` is the left end of the domain.
pub fn half_line_ratio_curve(space: &PLConcave, bs: &[f64]) -> Vec<f64> {
    let lo = space.domain().0;
    bs.iter().map(|&b| (space.w(b) - space.log_mass_between(lo, b)).exp()).collect()
}

/// Cheeger constant of a space of infinite total mass.
///
/// Every finite-mass set lies on the finite-mass side of the space, and for a
/// log-concave density its ratio is at least that of the half-line with the
/// same outer boundary point. Writing `f(b) = e^{W(b)}/M(b)` for that
/// half-line, `f' = f(W' - f)` on each linear piece, so `f` is monotone there
/// and its infimum is either a value at a breakpoint or the limit `s` of `f`
/// along the infinite tail, `s` being the tail slope.
pub fn cheeger_constant(space: &PLConcave) -> Result<CheegerConstant> {
    if space.has_finite_mass() {
        return Err(Error::FiniteMassSpace);
    }
    let right_infinite = space.right_tail_slope().is_some_and(|s| s >= 0.0);
    let left_infinite = space.left_tail_slope().is_some_and(|s| s <= 0.0);
    if right_infinite && left_infinite {
        // Concavity forces W constant on the whole line: intervals of growing
        // length drive the ratio to zero.
        return Ok(CheegerConstant { mu: 0.0, attainment: Attainment::NotAttained });
    }
    let (oriented, reflected) = if right_infinite { (space.clone(), false) } else { (space.reflect(), true) };
    let res = cheeger_right_infinite(&oriented);
    Ok(match res.attainment {
        Attainment::Attained(set) if reflected => {
            CheegerConstant { mu: res.mu, attainment: Attainment::Attained(set.reflect()) }
        }
        _ => res,
    })
}

fn cheeger_right_infinite(space: &PLConcave) -> CheegerConstant {
    let (lo, _) = space.domain();
    let tail = space.right_tail_slope().expect("right side carries the infinite mass");
    let mut mu = tail;
    let mut best_knot = None;
    for &b in space.breakpoints() {
        if b > lo {
            let f = (space.w(b) - space.log_mass_between(lo, b)).exp();
            if f < mu {
                mu = f;
                best_knot = Some(b);
            }
        }
    }
    let slopes = space.slopes();
    let affine = lo == f64::NEG_INFINITY
        && tail > 0.0
        && slopes.iter().all(|s| (s - tail).abs() <= AFFINE_TOL * tail.abs().max(1.0));
    let attainment = if affine {
        let b = best_knot.unwrap_or(space.breakpoints()[0]);
        Attainment::Attained(IntervalSet::left_half_line(b))
    } else {
        Attainment::NotAttained
    };
    CheegerConstant { mu, attainment }
}

/// Result of an isoperimetric profile evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub value: f64,
    /// A set of mass `v` attaining `value` among the scanned candidates.
    pub minimizer: IntervalSet,
}

/// Number of interior-interval placements scanned per profile evaluation.
const PROFILE_SCAN: usize = 512;

/// `inf { m⁺(Ω) : m(Ω) = v }` on a finite-mass space, scanned over both
/// half-lines of mass `v` and single intervals of mass `v`.
pub fn isoperimetric_profile(space: &PLConcave, v: f64) -> Result<Profile> {
    let log_total = space.log_total_mass();
    if !log_total.is_finite() {
        return Err(Error::InfiniteMass);
    }
    let total = log_total.exp();
    if !(v > 0.0 && v < total) {
        return Err(Error::VolumeOutOfRange { v, total });
    }
    let (lo, hi) = space.domain();
    let mut best = Profile { value: f64::INFINITY, minimizer: IntervalSet::empty() };
    let mut consider = |set: IntervalSet| {
        let value = space.log_boundary_measure(&set).exp();
        if value < best.value {
            best = Profile { value, minimizer: set };
        }
    };
    if let Some(x) = space.advance(lo, v) {
        consider(IntervalSet::interval(lo, x.min(hi)));
    }
    if let Some(x) = space.retreat(hi, v) {
        consider(IntervalSet::interval(x.max(lo), hi));
    }
    let slack = total - v;
    for k in 1..PROFILE_SCAN {
        let u = slack * k as f64 / PROFILE_SCAN as f64;
        let (Some(a), Some(b)) = (space.advance(lo, u), space.advance(lo, u + v)) else {
            continue;
        };
        if a < b {
            consider(IntervalSet::interval(a, b));
        }
    }
    Ok(best)
}

/// `(v + w) ln(1 + 1/w)`.
pub fn milman_objective(v: f64, w: f64) -> f64 {
    (v + w) * (1.0 / w).ln_1p()
}

fn milman_derivative(v: f64, w: f64) -> f64 {
    (1.0 / w).ln_1p() - (v + w) / (w * (w + 1.0))
}

/// `(1/D) inf_{w>0} (v+w) ln(1 + 1/w)`, the infimum including the `w -> inf` limit 1.
///
/// The objective decreases from `+inf` near `w = 0`; for `v < 1/2` it has a
/// single interior minimum, for `v = 1/2` it decreases monotonically to 1.
pub fn milman_profile(d: f64, v: f64) -> Result<f64> {
    let mut bad = Vec::new();
    if !(d > 0.0) {
        bad.push(Precondition::NonPositive { name: "D", value: d });
    }
    if !(v > 0.0 && v <= 0.5) {
        bad.push(Precondition::NonPositive { name: "v (must lie in (0, 1/2])", value: v });
    }
    if !bad.is_empty() {
        return Err(Error::Precondition(bad));
    }
    let mut best = 1.0f64;
    // Scan ln w from -690 to +20 for the first sign change of the derivative.
    let mut prev_lw = -690.0f64;
    let mut prev = milman_derivative(v, prev_lw.exp());
    let mut lw = prev_lw;
    while lw < 20.0 {
        lw += 0.25;
        let cur = milman_derivative(v, lw.exp());
        if prev < 0.0 && cur >= 0.0 {
            let (mut a, mut b) = (prev_lw, lw);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if milman_derivative(v, m.exp()) < 0.0 {
                    a = m;
                } else {
                    b = m;
                }
                if b - a < 1e-15 {
                    break;
                }
            }
            best = best.min(milman_objective(v, (0.5 * (a + b)).exp()));
            break;
        }
        prev_lw = lw;
        prev = cur;
    }
    Ok(best / d)
}
