//! Exact one-dimensional displacement interpolation through the monotone
//! (quantile) coupling, with entropy and Brunn–Minkowski checks on top.

use serde::{Deserialize, Serialize};

use crate::density1d::{IntervalSet, PLConcave};
use crate::error::{Error, Result};
use crate::numeric::{ge_tol, log_sum_exp};

/// Default number of quantile cells.
pub const DEFAULT_QUANTILES: usize = 10_000;

/// `{0, 0.1, ..., 1}`
pub fn default_t_grid() -> Vec<f64> {
    (0..=10).map(|k| k as f64 / 10.0).collect()
}

/// A probability measure `ρ m` with `ρ` piecewise constant on a finite partition.
#[derive(Debug, Clone, PartialEq)]
pub struct Density1D {
    reference: PLConcave,
    edges: Vec<f64>,
    rho: Vec<f64>,
    /// `ln m(cell)` per cell.
    log_cell_mass: Vec<f64>,
    /// Cumulative probability at each edge.
    cdf: Vec<f64>,
}

const NORMALIZATION_TOL: f64 = 1e-12;

impl Density1D {
    /// `rho` must integrate to 1 against the reference measure within 1e-12.
    pub fn new(reference: PLConcave, edges: Vec<f64>, rho: Vec<f64>) -> Result<Self> {
        let d = Self::build(reference, edges, rho)?;
        let total = *d.cdf.last().unwrap();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidProbability(format!("total mass {total} differs from 1")));
        }
        Ok(d)
    }

    /// Rescale non-negative cell values so that the result is a probability density.
    pub fn normalized(reference: PLConcave, edges: Vec<f64>, rho: Vec<f64>) -> Result<Self> {
        let d = Self::build(reference, edges, rho)?;
        let total = *d.cdf.last().unwrap();
        let rho = d.rho.iter().map(|r| r / total).collect();
        Self::build(d.reference, d.edges, rho)
    }

    /// Normalised restriction of the reference measure to a bounded set.
    pub fn uniform(reference: PLConcave, set: &IntervalSet) -> Result<Self> {
        let (lo, hi) = reference.domain();
        let set = set.clip(lo, hi);
        if !set.is_bounded() {
            return Err(Error::InvalidProbability("support must be bounded".into()));
        }
        let mut edges = Vec::new();
        let mut rho = Vec::new();
        for &(a, b) in set.intervals() {
            if edges.last().is_some() {
                rho.push(0.0);
            }
            edges.extend([a, b]);
            rho.push(1.0);
        }
        Self::normalized(reference, edges, rho)
    }

    fn build(reference: PLConcave, edges: Vec<f64>, rho: Vec<f64>) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidProbability(m));
        if edges.len() < 2 || rho.len() + 1 != edges.len() {
            return bad(format!("{} edges need {} values, got {}", edges.len(), edges.len().saturating_sub(1), rho.len()));
        }
        if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| w[0] >= w[1]) {
            return bad("edges must be finite and strictly increasing".into());
        }
        let (lo, hi) = reference.domain();
        if edges[0] < lo || *edges.last().unwrap() > hi {
            return bad("partition leaves the reference domain".into());
        }
        if rho.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return bad("values must be finite and non-negative".into());
        }
        let log_cell_mass: Vec<f64> = edges.windows(2).map(|w| reference.log_mass_between(w[0], w[1])).collect();
        let mut cdf = Vec::with_capacity(edges.len());
        cdf.push(0.0);
        let mut acc = 0.0;
        for (r, lm) in rho.iter().zip(&log_cell_mass) {
            acc += r * lm.exp();
            cdf.push(acc);
        }
        if !(acc > 0.0) {
            return Err(Error::EmptySupport);
        }
        Ok(Self { reference, edges, rho, log_cell_mass, cdf })
    }

    pub fn reference(&self) -> &PLConcave {
        &self.reference
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn total_mass(&self) -> f64 {
        *self.cdf.last().unwrap()
    }

    /// Smallest and largest point of the support.
    pub fn support_hull(&self) -> (f64, f64) {
        let first = self.rho.iter().position(|&r| r > 0.0).unwrap();
        let last = self.rho.iter().rposition(|&r| r > 0.0).unwrap();
        (self.edges[first], self.edges[last + 1])
    }

    /// Generalised inverse of the CDF at level `u` in `[0, 1]`.
    pub fn quantile(&self, u: f64) -> f64 {
        let (s0, s1) = self.support_hull();
        let total = self.total_mass();
        if u <= 0.0 {
            return s0;
        }
        if u >= total {
            return s1;
        }
        // First cell whose right CDF value reaches u and that carries mass.
        let mut i = self.cdf.partition_point(|&c| c < u).max(1) - 1;
        while self.rho[i] == 0.0 {
            i += 1;
        }
        let need = (u - self.cdf[i]) / self.rho[i];
        let x = self.reference.advance(self.edges[i], need).unwrap_or(self.edges[i + 1]);
        x.clamp(self.edges[i], self.edges[i + 1])
    }

    /// `∫ ρ ln ρ dm`, exact for piecewise-constant `ρ`.
    pub fn entropy(&self) -> f64 {
        self.rho
            .iter()
            .zip(&self.log_cell_mass)
            .filter(|(r, _)| **r > 0.0)
            .map(|(r, lm)| r * lm.exp() * r.ln())
            .sum()
    }
}

/// Monotone rearrangement sampled at the levels `u_i = i/N`, `i = 0..=N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantileMap {
    /// Quantiles of the source.
    pub x: Vec<f64>,
    /// Quantiles of the target, `y_i = T(x_i)`.
    pub y: Vec<f64>,
}

impl QuantileMap {
    pub fn cells(&self) -> usize {
        self.x.len() - 1
    }

    /// `T` by linear interpolation between grid points, constant beyond them.
    pub fn eval(&self, t: f64) -> f64 {
        let k = self.x.partition_point(|&x| x < t);
        if k == 0 {
            return self.y[0];
        }
        if k >= self.x.len() {
            return *self.y.last().unwrap();
        }
        let (x0, x1) = (self.x[k - 1], self.x[k]);
        let s = if x1 > x0 { (t - x0) / (x1 - x0) } else { 1.0 };
        self.y[k - 1] + s * (self.y[k] - self.y[k - 1])
    }

    pub fn inverse(&self) -> QuantileMap {
        QuantileMap { x: self.y.clone(), y: self.x.clone() }
    }
}

fn same_reference(a: &Density1D, b: &Density1D) -> Result<()> {
    if a.reference == b.reference {
        Ok(())
    } else {
        Err(Error::ReferenceMismatch)
    }
}

/// `T = G⁻¹ ∘ F` on `n` quantile cells.
pub fn quantile_map(mu0: &Density1D, mu1: &Density1D, n: usize) -> Result<QuantileMap> {
    same_reference(mu0, mu1)?;
    if n == 0 {
        return Err(Error::InvalidProbability("need at least one quantile cell".into()));
    }
    let levels = (0..=n).map(|i| i as f64 / n as f64);
    let (x, y) = levels.map(|u| (mu0.quantile(u), mu1.quantile(u))).unzip();
    Ok(QuantileMap { x, y })
}

pub fn entropy(mu: &Density1D) -> f64 {
    mu.entropy()
}

/// `μ_t = ((1−t) Id + t T)_# μ0` represented by `N` cells of probability `1/N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicSample {
    pub t: f64,
    /// Cell edges `z_i = (1−t) x_i + t y_i`.
    pub points: Vec<f64>,
    /// Density of each cell relative to the reference measure.
    pub density: Vec<f64>,
}

impl GeodesicSample {
    pub fn total_mass(&self, reference: &PLConcave) -> f64 {
        self.points
            .windows(2)
            .zip(&self.density)
            .map(|(w, r)| r * reference.log_mass_between(w[0], w[1]).exp())
            .sum()
    }
}

pub fn pushforward(reference: &PLConcave, map: &QuantileMap, t: f64) -> GeodesicSample {
    let points: Vec<f64> = map.x.iter().zip(&map.y).map(|(x, y)| (1.0 - t) * x + t * y).collect();
    let p = 1.0 / map.cells() as f64;
    let density = points
        .windows(2)
        .map(|w| p / reference.log_mass_between(w[0], w[1]).exp())
        .collect();
    GeodesicSample { t, points, density }
}

/// Relative entropy of `μ_t` averaged on its quantile cells:
/// `−ln N − (1/N) Σ ln m([z_i, z_{i+1}])`.
///
/// This is the entropy of `μ_t` conditioned on the cell partition, so it never
/// exceeds the entropy of `μ_t` itself and converges to it as `N` grows.
pub fn cell_entropy(reference: &PLConcave, map: &QuantileMap, t: f64) -> f64 {
    let n = map.cells() as f64;
    let sum: f64 = map
        .x
        .windows(2)
        .zip(map.y.windows(2))
        .map(|(x, y)| {
            let a = (1.0 - t) * x[0] + t * y[0];
            let b = (1.0 - t) * x[1] + t * y[1];
            reference.log_mass_between(a, b)
        })
        .sum();
    -n.ln() - sum / n
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvexityRow {
    pub t: f64,
    pub entropy: f64,
    /// `(1−t) Ent(μ0) + t Ent(μ1)`
    pub bound: f64,
    pub violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexityReport {
    pub rows: Vec<ConvexityRow>,
    pub max_violation: f64,
}

/// `max_t Ent(μ_t) − [(1−t) Ent(μ0) + t Ent(μ1)]` over `t_grid`, with `n` quantile
/// cells. Endpoints use the exact entropies.
pub fn displacement_convexity_check(
    space: &PLConcave,
    mu0: &Density1D,
    mu1: &Density1D,
    t_grid: &[f64],
    n: usize,
) -> Result<ConvexityReport> {
    if &mu0.reference != space {
        return Err(Error::ReferenceMismatch);
    }
    let map = quantile_map(mu0, mu1, n)?;
    let (e0, e1) = (mu0.entropy(), mu1.entropy());
    let mut rows = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidProbability(format!("time {t} outside [0, 1]")));
        }
        let bound = (1.0 - t) * e0 + t * e1;
        let entropy = if t == 0.0 {
            e0
        } else if t == 1.0 {
            e1
        } else {
            cell_entropy(space, &map, t)
        };
        rows.push(ConvexityRow { t, entropy, bound, violation: entropy - bound });
    }
    let max_violation = rows.iter().map(|r| r.violation).fold(f64::NEG_INFINITY, f64::max);
    Ok(ConvexityReport { rows, max_violation })
}

/// `Z_t = {(1−t)x + t y : x ∈ Ω, y ∈ B}`.
pub fn intermediate_set(omega: &IntervalSet, b: &IntervalSet, t: f64) -> IntervalSet {
    if t <= 0.0 {
        return omega.clone();
    }
    if t >= 1.0 {
        return b.clone();
    }
    let mut pieces = Vec::with_capacity(omega.len() * b.len());
    for &(a0, a1) in omega.intervals() {
        for &(b0, b1) in b.intervals() {
            pieces.push(((1.0 - t) * a0 + t * b0, (1.0 - t) * a1 + t * b1));
        }
    }
    IntervalSet::new(pieces).expect("combinations of valid intervals are valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BrunnMinkowskiRow {
    pub t: f64,
    pub ln_mass: f64,
    /// `t ln m(B) + (1−t) ln m(Ω)`
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BrunnMinkowskiReport {
    pub rows: Vec<BrunnMinkowskiRow>,
    pub holds: bool,
}

/// `ln m(Z_t) >= t ln m(B) + (1−t) ln m(Ω)` on every `t` of the grid.
pub fn brunn_minkowski_check(
    space: &PLConcave,
    omega: &IntervalSet,
    b: &IntervalSet,
    t_grid: &[f64],
) -> Result<BrunnMinkowskiReport> {
    let (lo, hi) = space.domain();
    if !omega.within(lo, hi) || !b.within(lo, hi) {
        return Err(Error::InvalidIntervals("sets must lie inside the domain".into()));
    }
    let (lw, lb) = (space.log_mass(omega), space.log_mass(b));
    if lw == f64::INFINITY || lb == f64::INFINITY {
        return Err(Error::InfiniteMass);
    }
    if lw == f64::NEG_INFINITY || lb == f64::NEG_INFINITY {
        return Err(Error::EmptySupport);
    }
    let mut rows = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let z = intermediate_set(omega, b, t);
        let ln_mass = log_sum_exp(z.intervals().iter().map(|&(p, q)| space.log_mass_between(p, q)));
        let bound = t * lb + (1.0 - t) * lw;
        rows.push(BrunnMinkowskiRow { t, ln_mass, bound, holds: ge_tol(ln_mass, bound, 1e-12) });
    }
    let holds = rows.iter().all(|r| r.holds);
    Ok(BrunnMinkowskiReport { rows, holds })
}

/// On-disk form of a [`Density1D`]; the reference is supplied separately.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityFile {
    pub edges: Vec<f64>,
    pub rho: Vec<f64>,
    /// Rescale `rho` to unit mass instead of rejecting unnormalised input.
    #[serde(default)]
    pub normalize: bool,
}

impl DensityFile {
    pub fn into_density(self, reference: PLConcave) -> Result<Density1D> {
        if self.normalize {
            Density1D::normalized(reference, self.edges, self.rho)
        } else {
            Density1D::new(reference, self.edges, self.rho)
        }
    }
}

impl From<&Density1D> for DensityFile {
    fn from(d: &Density1D) -> Self {
        DensityFile { edges: d.edges.clone(), rho: d.rho.clone(), normalize: false }
    }
}
