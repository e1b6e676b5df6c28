use serde::{Deserialize, Serialize};

use super::{balanced_function, needle_diagnostics, solve_l1, DiscreteSpace, Needle};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitOptions {
    /// Allowed absolute deviation of each needle's fitted slope from their mean.
    pub h_tol: f64,
    /// Allowed `1 − ⟨u_i, u_j⟩` between needle directions.
    pub dir_tol: f64,
    /// Allowed spread of the boundary positions; defaults to the largest
    /// spacing between consecutive needle points.
    pub boundary_tol: Option<f64>,
}

impl Default for SplitOptions {
    fn default() -> Self {
        SplitOptions { h_tol: 0.05, dir_tol: 1e-9, boundary_tol: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitVerdict {
    pub splits: bool,
    /// Mean fitted slope.
    pub h_est: f64,
    pub slopes_agree: bool,
    pub directions_parallel: bool,
    pub boundaries_agree: bool,
    /// Largest `|slope − h_est|`.
    pub slope_spread: f64,
    /// Largest `1 − ⟨u_i, u_j⟩`.
    pub direction_gap: f64,
    /// Position of the exit point from the set, projected on the mean direction, per needle.
    pub boundary_positions: Vec<Option<f64>>,
    pub boundary_spread: f64,
    pub boundary_tol: f64,
}

fn unit(v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

/// Product signature of a needle family: equal log-density slopes, parallel
/// directions, and a common position where the needles leave the set.
pub fn splitting_detector(
    space: &DiscreteSpace,
    needles: &[Needle],
    omega_mask: &[bool],
    opts: SplitOptions,
) -> Result<SplitVerdict> {
    let Some(dim) = space.dim() else {
        return Err(Error::Unsupported("splitting detection needs coordinates".into()));
    };
    if needles.len() < 2 {
        return Err(Error::DiagnosticsUndefined(format!("{} needle(s); at least 2 required", needles.len())));
    }
    let mut slopes = Vec::with_capacity(needles.len());
    for q in needles {
        slopes.push(needle_diagnostics(q)?.slope_fit);
    }
    let h_est = slopes.iter().sum::<f64>() / slopes.len() as f64;
    let slope_spread = slopes.iter().map(|s| (s - h_est).abs()).fold(0.0, f64::max);

    let coords = |i: usize| space.coords(i).expect("embedded");
    let dirs: Vec<Vec<f64>> = needles
        .iter()
        .map(|q| {
            let (a, b) = (coords(q.points[0]), coords(*q.points.last().unwrap()));
            unit(b.iter().zip(a).map(|(y, x)| y - x).collect())
        })
        .collect();
    let mut direction_gap = 0.0f64;
    for a in 0..dirs.len() {
        for b in (a + 1)..dirs.len() {
            let dot: f64 = dirs[a].iter().zip(&dirs[b]).map(|(x, y)| x * y).sum();
            direction_gap = direction_gap.max(1.0 - dot);
        }
    }
    let mean_dir = unit((0..dim).map(|k| dirs.iter().map(|d| d[k]).sum()).collect());

    let boundary_positions: Vec<Option<f64>> = needles
        .iter()
        .map(|q| {
            q.points.windows(2).find(|p| omega_mask[p[0]] && !omega_mask[p[1]]).map(|p| {
                let (x, y) = (coords(p[0]), coords(p[1]));
                x.iter().zip(y).zip(&mean_dir).map(|((a, b), u)| 0.5 * (a + b) * u).sum()
            })
        })
        .collect();
    let found: Vec<f64> = boundary_positions.iter().flatten().copied().collect();
    let boundary_spread = if found.is_empty() {
        f64::INFINITY
    } else {
        found.iter().copied().fold(f64::NEG_INFINITY, f64::max) - found.iter().copied().fold(f64::INFINITY, f64::min)
    };
    let boundary_tol = opts.boundary_tol.unwrap_or_else(|| {
        needles
            .iter()
            .flat_map(|q| q.arclength.windows(2).map(|p| p[1] - p[0]))
            .fold(0.0, f64::max)
    });

    let slopes_agree = slope_spread <= opts.h_tol;
    let directions_parallel = direction_gap <= opts.dir_tol;
    let boundaries_agree = found.len() >= 2 && boundary_spread <= boundary_tol;
    Ok(SplitVerdict {
        splits: slopes_agree && directions_parallel && boundaries_agree,
        h_est,
        slopes_agree,
        directions_parallel,
        boundaries_agree,
        slope_spread,
        direction_gap,
        boundary_positions,
        boundary_spread,
        boundary_tol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LadderStep {
    pub r_small: f64,
    pub r_large: f64,
    /// `max |φ_{r_small} − φ_{r_large}|` over the core window.
    pub max_diff: f64,
}

/// Potentials for an increasing ladder of radii, compared on the points
/// within `core` of the center.
pub fn potential_ladder(
    space: &DiscreteSpace,
    omega_mask: &[bool],
    center: usize,
    radii: &[f64],
    core: f64,
) -> Result<Vec<LadderStep>> {
    let core_pts: Vec<usize> = (0..space.len()).filter(|&i| space.d(center, i) <= core).collect();
    let mut prev: Option<(f64, Vec<f64>)> = None;
    let mut steps = Vec::new();
    for &r in radii {
        let g = balanced_function(space, omega_mask, center, r)?;
        let phi = solve_l1(space, &g)?.phi;
        if let Some((r0, phi0)) = &prev {
            let max_diff = core_pts.iter().map(|&i| (phi[i] - phi0[i]).abs()).fold(0.0, f64::max);
            steps.push(LadderStep { r_small: *r0, r_large: r, max_diff });
        }
        prev = Some((r, phi));
    }
    Ok(steps)
}
