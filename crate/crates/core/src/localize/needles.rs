use std::collections::HashSet;

use serde::Serialize;

use super::{BalancedFunction, DiscreteSpace, TransportSolution};
use crate::error::{Error, Result};
use crate::numeric::ls_slope;

/// Relative tolerance on `| |φ(x) − φ(y)| − d(x, y) |` for two points to lie on one ray.
pub const RAY_TOL: f64 = 1e-6;
/// Upper bound on the number of maximal cliques enumerated before giving up.
const CLIQUE_CAP: usize = 200_000;

/// A transport ray: points ordered by decreasing potential.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Needle {
    pub points: Vec<usize>,
    /// Cumulative distance from the first point.
    pub arclength: Vec<f64>,
    pub phi: Vec<f64>,
    /// Atom masses.
    pub mass: Vec<f64>,
    pub g: Vec<f64>,
    /// `ln(mass / Voronoi length)` along the needle.
    pub log_density: Vec<f64>,
    /// Some point lies within one spacing of the ball boundary.
    pub touches_boundary: bool,
    /// Largest `|φ_i − φ_{i+1} − d(x_i, x_{i+1})|`.
    pub phi_defect: f64,
    /// Largest `|d(x_i, x_k) − (s_k − s_i)|` over all pairs.
    pub straightness_defect: f64,
}

impl Needle {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeedleReport {
    pub needles: Vec<Needle>,
    /// Points on more than one maximal ray; excluded from every needle.
    pub branch_points: Vec<usize>,
    /// Clique enumeration hit its cap; the needle list may be incomplete.
    pub truncated: bool,
}

/// Lengths of the Voronoi cells of sorted positions; endpoints use the one-sided gap.
pub(crate) fn voronoi_lengths(s: &[f64]) -> Vec<f64> {
    let n = s.len();
    (0..n)
        .map(|k| match (k, n) {
            (_, 1) => 1.0,
            (0, _) => s[1] - s[0],
            (k, n) if k == n - 1 => s[k] - s[k - 1],
            (k, _) => 0.5 * (s[k + 1] - s[k - 1]),
        })
        .collect()
}

type Bits = Vec<u64>;

fn bits_new(n: usize) -> Bits {
    vec![0; n.div_ceil(64)]
}

fn set_bit(b: &mut Bits, i: usize) {
    b[i / 64] |= 1 << (i % 64);
}

fn ones(b: &Bits) -> impl Iterator<Item = usize> + '_ {
    b.iter().enumerate().flat_map(|(w, &word)| {
        let mut x = word;
        std::iter::from_fn(move || {
            if x == 0 {
                return None;
            }
            let t = x.trailing_zeros() as usize;
            x &= x - 1;
            Some(w * 64 + t)
        })
    })
}

fn and(a: &Bits, b: &Bits) -> Bits {
    a.iter().zip(b).map(|(x, y)| x & y).collect()
}

fn count(b: &Bits) -> u32 {
    b.iter().map(|x| x.count_ones()).sum()
}

fn is_zero(b: &Bits) -> bool {
    b.iter().all(|&x| x == 0)
}

/// Bron–Kerbosch with Tomita pivoting over bitset adjacency.
fn maximal_cliques(adj: &[Bits], out: &mut Vec<Vec<usize>>) -> bool {
    fn rec(adj: &[Bits], r: &mut Vec<usize>, mut p: Bits, mut x: Bits, out: &mut Vec<Vec<usize>>) -> bool {
        if is_zero(&p) && is_zero(&x) {
            out.push(r.clone());
            return out.len() < CLIQUE_CAP;
        }
        let pivot = ones(&p)
            .chain(ones(&x))
            .max_by_key(|&u| count(&and(&p, &adj[u])))
            .expect("p or x non-empty");
        let candidates: Vec<usize> = ones(&p).filter(|&v| adj[pivot][v / 64] >> (v % 64) & 1 == 0).collect();
        for v in candidates {
            r.push(v);
            let ok = rec(adj, r, and(&p, &adj[v]), and(&x, &adj[v]), out);
            r.pop();
            if !ok {
                return false;
            }
            p[v / 64] &= !(1 << (v % 64));
            x[v / 64] |= 1 << (v % 64);
        }
        true
    }
    let n = adj.len();
    let mut p = bits_new(n);
    (0..n).for_each(|i| set_bit(&mut p, i));
    !rec(adj, &mut Vec::new(), p, bits_new(n), out)
}

/// Group the flow support into maximal transport rays.
///
/// Two points are on a common ray when their potential difference equals
/// their distance; rays are the maximal cliques of that relation containing
/// at least one flow arc.
pub fn extract_needles(space: &DiscreteSpace, g: &BalancedFunction, sol: &TransportSolution) -> NeedleReport {
    let mut support: Vec<usize> = sol.flow.iter().flat_map(|a| [a.src, a.dst]).collect();
    support.sort_unstable();
    support.dedup();
    let k = support.len();
    let phi = &sol.phi;
    let mut adj = vec![bits_new(k); k];
    for a in 0..k {
        for b in (a + 1)..k {
            let (i, j) = (support[a], support[b]);
            let d = space.d(i, j);
            if ((phi[i] - phi[j]).abs() - d).abs() <= RAY_TOL * d {
                set_bit(&mut adj[a], b);
                set_bit(&mut adj[b], a);
            }
        }
    }
    let mut cliques = Vec::new();
    let truncated = maximal_cliques(&adj, &mut cliques);

    let arcs: HashSet<(usize, usize)> = sol.flow.iter().map(|a| (a.src, a.dst)).collect();
    let kept: Vec<Vec<usize>> = cliques
        .into_iter()
        .filter(|c| c.len() >= 2)
        .map(|c| c.into_iter().map(|a| support[a]).collect::<Vec<_>>())
        .filter(|c| {
            let set: HashSet<usize> = c.iter().copied().collect();
            arcs.iter().any(|(s, d)| set.contains(s) && set.contains(d))
        })
        .collect();
    let mut uses = vec![0usize; space.len()];
    for c in &kept {
        for &i in c {
            uses[i] += 1;
        }
    }
    let mut branch_points: Vec<usize> = (0..space.len()).filter(|&i| uses[i] > 1).collect();
    branch_points.sort_unstable();

    let mut needles: Vec<Needle> = kept
        .into_iter()
        .filter_map(|c| {
            let mut pts: Vec<usize> = c.into_iter().filter(|&i| uses[i] == 1).collect();
            (pts.len() >= 2).then(|| {
                pts.sort_by(|&a, &b| phi[b].total_cmp(&phi[a]).then(a.cmp(&b)));
                build_needle(space, g, phi, pts)
            })
        })
        .collect();
    needles.sort_by(|a, b| a.points[0].cmp(&b.points[0]));
    NeedleReport { needles, branch_points, truncated }
}

fn build_needle(space: &DiscreteSpace, g: &BalancedFunction, phi: &[f64], points: Vec<usize>) -> Needle {
    let n = points.len();
    let mut arclength = vec![0.0; n];
    let mut phi_defect = 0.0f64;
    for k in 1..n {
        let d = space.d(points[k - 1], points[k]);
        arclength[k] = arclength[k - 1] + d;
        phi_defect = phi_defect.max((phi[points[k - 1]] - phi[points[k]] - d).abs());
    }
    let mut straightness_defect = 0.0f64;
    for a in 0..n {
        for b in (a + 1)..n {
            let gap = (space.d(points[a], points[b]) - (arclength[b] - arclength[a])).abs();
            straightness_defect = straightness_defect.max(gap);
        }
    }
    let w = space.weights();
    let mass: Vec<f64> = points.iter().map(|&i| w[i]).collect();
    let log_density = voronoi_lengths(&arclength).iter().zip(&mass).map(|(l, m)| (m / l).ln()).collect();
    let max_gap = arclength.windows(2).map(|p| p[1] - p[0]).fold(0.0, f64::max);
    let touches_boundary =
        g.radius.is_finite() && points.iter().any(|&i| space.d(g.center, i) + max_gap >= g.radius);
    Needle {
        g: points.iter().map(|&i| g.g[i]).collect(),
        phi: points.iter().map(|&i| phi[i]).collect(),
        points,
        arclength,
        mass,
        log_density,
        touches_boundary,
        phi_defect,
        straightness_defect,
    }
}

/// Conditional measures along needles and the points on no needle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Disintegration {
    /// Total mass of each needle, in needle order.
    pub needle_mass: Vec<f64>,
    pub residual: Vec<usize>,
    pub residual_mass: f64,
    pub total_mass: f64,
    /// Largest `|g|` on the residual set; zero in the continuum limit.
    pub residual_g_max: f64,
}

impl Disintegration {
    /// `|Σ needle masses + residual − total|`
    pub fn partition_error(&self) -> f64 {
        (self.needle_mass.iter().sum::<f64>() + self.residual_mass - self.total_mass).abs()
    }
}

pub fn disintegrate(space: &DiscreteSpace, needles: &[Needle], g: &BalancedFunction) -> Result<Disintegration> {
    let n = space.len();
    let mut owner = vec![usize::MAX; n];
    for (q, needle) in needles.iter().enumerate() {
        for &i in &needle.points {
            if owner[i] != usize::MAX {
                return Err(Error::NeedleOverlap(i));
            }
            owner[i] = q;
        }
    }
    let w = space.weights();
    let residual: Vec<usize> = (0..n).filter(|&i| owner[i] == usize::MAX).collect();
    Ok(Disintegration {
        needle_mass: needles.iter().map(|q| q.points.iter().map(|&i| w[i]).sum()).collect(),
        residual_mass: residual.iter().map(|&i| w[i]).fold(0.0, |a, b| a + b),
        residual_g_max: residual.iter().map(|&i| g.g[i].abs()).fold(0.0, f64::max),
        residual,
        total_mass: space.total_mass(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NeedleDiagnostics {
    /// `Σ g · mass` along the needle.
    pub balance: f64,
    /// Largest increase between consecutive divided slopes of the log-density;
    /// zero for a log-concave profile. Needs at least three points.
    pub logconcavity_defect: Option<f64>,
    /// Least-squares slope of the log-density against arclength.
    pub slope_fit: f64,
}

pub fn needle_diagnostics(needle: &Needle) -> Result<NeedleDiagnostics> {
    let n = needle.len();
    if n < 2 {
        return Err(Error::DiagnosticsUndefined(format!("needle with {n} point(s)")));
    }
    let balance = needle.g.iter().zip(&needle.mass).map(|(g, m)| g * m).sum();
    let s = &needle.arclength;
    let l = &needle.log_density;
    let slopes: Vec<f64> = (1..n).map(|k| (l[k] - l[k - 1]) / (s[k] - s[k - 1])).collect();
    let logconcavity_defect =
        (n >= 3).then(|| slopes.windows(2).map(|p| p[1] - p[0]).fold(0.0, f64::max));
    let slope_fit = ls_slope(s, l).expect("distinct arclengths");
    Ok(NeedleDiagnostics { balance, logconcavity_defect, slope_fit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localize::{balanced_function, solve_l1};

    fn synthetic(weights: Vec<f64>, spacing: f64) -> Needle {
        let n = weights.len();
        let arclength: Vec<f64> = (0..n).map(|k| k as f64 * spacing).collect();
        let log_density = voronoi_lengths(&arclength).iter().zip(&weights).map(|(l, m)| (m / l).ln()).collect();
        Needle {
            points: (0..n).collect(),
            phi: arclength.iter().map(|s| -s).collect(),
            arclength,
            g: vec![0.0; n],
            mass: weights,
            log_density,
            touches_boundary: false,
            phi_defect: 0.0,
            straightness_defect: 0.0,
        }
    }

    #[test]
    fn exponential_needle_slope() {
        let (h, dx) = (0.7, 0.05);
        let w = (0..100).map(|k| (h * k as f64 * dx).exp() * dx).collect();
        let d = needle_diagnostics(&synthetic(w, dx)).unwrap();
        assert!((d.slope_fit - h).abs() < 1e-9);
        assert!(d.logconcavity_defect.unwrap() < 1e-9);
    }

    #[test]
    fn uniform_needle() {
        let d = needle_diagnostics(&synthetic(vec![0.5; 20], 0.5)).unwrap();
        assert!(d.slope_fit.abs() < 1e-12);
        assert_eq!(d.logconcavity_defect, Some(0.0));
        assert!(needle_diagnostics(&synthetic(vec![1.0], 1.0)).is_err());
    }

    #[test]
    fn concave_needle_has_no_defect() {
        let dx = 0.1;
        let w = (0..60).map(|k| {
            let t = k as f64 * dx - 3.0;
            (-t * t / 2.0).exp() * dx
        });
        let d = needle_diagnostics(&synthetic(w.collect(), dx)).unwrap();
        assert!(d.logconcavity_defect.unwrap() < 1e-9);
        let convex = (0..60).map(|k| {
            let t = k as f64 * dx - 3.0;
            (t * t / 2.0).exp() * dx
        });
        let d = needle_diagnostics(&synthetic(convex.collect(), dx)).unwrap();
        assert!(d.logconcavity_defect.unwrap() > 1e-3);
    }

    #[test]
    fn collinear_points_form_one_needle() {
        let xs: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64]).collect();
        let s = DiscreteSpace::from_coords(xs, vec![1.0; 8]).unwrap();
        let mask: Vec<bool> = (0..8).map(|i| i < 4).collect();
        let g = balanced_function(&s, &mask, 0, 100.0).unwrap();
        let sol = solve_l1(&s, &g).unwrap();
        let rep = extract_needles(&s, &g, &sol);
        assert_eq!(rep.needles.len(), 1);
        assert_eq!(rep.needles[0].points, (0..8).collect::<Vec<_>>());
        assert!(rep.branch_points.is_empty());
        let dis = disintegrate(&s, &rep.needles, &g).unwrap();
        assert!(dis.residual.is_empty());
        assert_eq!(dis.needle_mass, vec![8.0]);
    }

    #[test]
    fn empty_flow_gives_no_needles() {
        let s = DiscreteSpace::from_coords(vec![vec![0.0], vec![1.0]], vec![1.0, 1.0]).unwrap();
        let g = BalancedFunction::from_values(vec![0.0, 0.0], 0);
        let sol = solve_l1(&s, &g).unwrap();
        let rep = extract_needles(&s, &g, &sol);
        assert!(rep.needles.is_empty());
        let dis = disintegrate(&s, &rep.needles, &g).unwrap();
        assert_eq!(dis.residual, vec![0, 1]);
        assert_eq!(dis.partition_error(), 0.0);
    }

    #[test]
    fn overlapping_needles_are_rejected() {
        let s = DiscreteSpace::from_coords(vec![vec![0.0], vec![1.0]], vec![1.0, 1.0]).unwrap();
        let g = BalancedFunction::from_values(vec![0.0, 0.0], 0);
        let q = synthetic(vec![1.0, 1.0], 1.0);
        assert!(matches!(disintegrate(&s, &[q.clone(), q], &g), Err(Error::NeedleOverlap(0))));
    }
}
