use serde::Serialize;

use super::PLConcave;
use crate::error::{Error, Precondition, Result};
use crate::numeric::{ge_tol, ls_slope};

/// Number of radii sampled inside the estimator window.
const WINDOW_SAMPLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyReport {
    /// Exact value from the tail slopes.
    pub h: f64,
    /// Least-squares slope of `r -> ln m(B_r(x0))` over `window`.
    pub estimator_slope: f64,
    pub window: (f64, f64),
}

fn log_ball(space: &PLConcave, x0: f64, r: f64) -> f64 {
    space.log_mass_between(x0 - r, x0 + r)
}

fn check_center(space: &PLConcave, x0: f64) -> Result<()> {
    if x0.is_finite() && space.contains(x0) {
        Ok(())
    } else {
        let (lo, hi) = space.domain();
        Err(Error::InvalidIntervals(format!("center {x0} outside domain [{lo}, {hi}]")))
    }
}

/// Volume entropy with a default estimator window of `[10 L, 20 L]`, where `L`
/// is the larger of 1 and the distance from `x0` to the farthest breakpoint.
pub fn volume_entropy(space: &PLConcave, x0: f64) -> Result<EntropyReport> {
    let bps = space.breakpoints();
    let span = bps
        .iter()
        .map(|b| (b - x0).abs())
        .fold(1.0f64, f64::max);
    volume_entropy_window(space, x0, 10.0 * span, 20.0 * span)
}

pub fn volume_entropy_window(space: &PLConcave, x0: f64, r1: f64, r2: f64) -> Result<EntropyReport> {
    check_center(space, x0)?;
    if !(r1 > 0.0 && r2 > r1) {
        return Err(Error::Precondition(vec![Precondition::RadiusOrdering { r: r2, eps: r1 }]));
    }
    let right = space.right_tail_slope().unwrap_or(0.0);
    let left = space.left_tail_slope().map_or(0.0, |s| -s);
    let h = right.max(left).max(0.0);
    let rs: Vec<f64> = (0..WINDOW_SAMPLES)
        .map(|k| r1 + (r2 - r1) * k as f64 / (WINDOW_SAMPLES - 1) as f64)
        .collect();
    let ls: Vec<f64> = rs.iter().map(|&r| log_ball(space, x0, r)).collect();
    let estimator_slope = ls_slope(&rs, &ls).unwrap_or(f64::NAN);
    Ok(EntropyReport { h, estimator_slope, window: (r1, r2) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthCheck {
    /// `ln m(B_r)`
    pub lhs: f64,
    /// `((δ+ε)/(r+δ)) ln m(B_ε) + ((r−ε)/(r+δ)) ln m(B_{r+δ})`
    pub rhs: f64,
    pub holds: bool,
}

/// Log-concavity of ball volumes along the radius, in the interpolated form
/// `ln m(B_r) >= ((δ+ε)/(r+δ)) ln m(B_ε) + ((r−ε)/(r+δ)) ln m(B_{r+δ})`.
pub fn entropy_growth_inequality_check(
    space: &PLConcave,
    x0: f64,
    r: f64,
    delta: f64,
    eps: f64,
) -> Result<GrowthCheck> {
    check_center(space, x0)?;
    let mut bad = Vec::new();
    if !(r > eps && eps > 0.0 && r.is_finite()) {
        bad.push(Precondition::RadiusOrdering { r, eps });
    }
    if !(delta > 0.0 && delta.is_finite()) {
        bad.push(Precondition::NonPositive { name: "delta", value: delta });
    }
    if !bad.is_empty() {
        return Err(Error::Precondition(bad));
    }
    let l_eps = log_ball(space, x0, eps);
    let l_r = log_ball(space, x0, r);
    let l_big = log_ball(space, x0, r + delta);
    if !l_big.is_finite() || !l_eps.is_finite() {
        return Err(Error::InfiniteMass);
    }
    let rhs = (delta + eps) / (r + delta) * l_eps + (r - eps) / (r + delta) * l_big;
    Ok(GrowthCheck { lhs: l_r, rhs, holds: ge_tol(l_r, rhs, 1e-12) })
}

#[cfg(test)]
mod tests {
    use super::*;

    const INF: f64 = f64::INFINITY;

    #[test]
    fn entropy_examples() {
        let w = PLConcave::affine((-INF, INF), 0.0, 2.0).unwrap();
        let e = volume_entropy(&w, 0.0).unwrap();
        assert_eq!(e.h, 2.0);
        assert!((e.estimator_slope - 2.0).abs() < 1e-9);

        let tent = PLConcave::new((-INF, INF), vec![0.0], vec![0.0], [Some(1.0), Some(-1.0)]).unwrap();
        let e = volume_entropy(&tent, 0.0).unwrap();
        assert_eq!(e.h, 0.0);
        assert!(e.estimator_slope.abs() < 1e-4);

        let kink = PLConcave::new((-INF, INF), vec![0.0], vec![0.0], [Some(5.0), Some(3.0)]).unwrap();
        assert_eq!(volume_entropy(&kink, 0.0).unwrap().h, 3.0);
        assert_eq!(volume_entropy(&kink, 7.5).unwrap().h, 3.0);
    }

    #[test]
    fn bounded_domain_has_zero_entropy() {
        let w = PLConcave::affine((0.0, 10.0), 0.0, 1.0).unwrap();
        assert_eq!(volume_entropy(&w, 5.0).unwrap().h, 0.0);
    }

    #[test]
    fn estimator_converges_as_window_grows() {
        let w = PLConcave::new(
            (-INF, INF),
            vec![-2.0, 0.0, 3.0],
            vec![0.0, 1.0, 1.5],
            [Some(0.5), Some(0.1)],
        )
        .unwrap();
        let mut prev = f64::INFINITY;
        for k in 1..6 {
            let r = 10f64.powi(k);
            let e = volume_entropy_window(&w, 0.0, r, 2.0 * r).unwrap();
            let err = (e.estimator_slope - e.h).abs();
            assert!(err <= prev + 1e-12);
            prev = err;
        }
        assert!(prev < 1e-4);
    }

    #[test]
    fn growth_examples() {
        let flat = PLConcave::affine((-INF, INF), 0.0, 0.0).unwrap();
        assert!(entropy_growth_inequality_check(&flat, 0.0, 3.0, 0.5, 0.2).unwrap().holds);
        let lin = PLConcave::affine((-INF, INF), 0.0, 1.0).unwrap();
        let g = entropy_growth_inequality_check(&lin, 0.0, 10.0, 1.0, 0.1).unwrap();
        // Oracle: direct evaluation of m(B_r) = e^r - e^{-r} = 2 sinh r.
        let lb = |r: f64| (2.0 * r.sinh()).ln();
        let rhs = (1.1 / 11.0) * lb(0.1) + (9.9 / 11.0) * lb(11.0);
        assert!((g.lhs - lb(10.0)).abs() < 1e-12);
        assert!((g.rhs - rhs).abs() < 1e-12);
        assert!(g.holds);
        assert!(entropy_growth_inequality_check(&lin, 0.0, 0.1, 1.0, 0.2).is_err());
    }
}
