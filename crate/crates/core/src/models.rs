//! Canonical spaces with closed-form volume entropy and Cheeger constant.

use serde::{Deserialize, Serialize};

use crate::density1d::{IntervalSet, PLConcave};
use crate::error::{Error, Result};
use crate::localize::DiscreteSpace;

/// Largest exponent allowed in strip weights before overflow is reported.
const MAX_EXPONENT: f64 = 700.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    /// `W(t) = h t` on the whole line.
    LogLinear { h: f64 },
    /// `W(t) = h t` on `[0, d]`.
    TruncatedExp { h: f64, d: f64 },
    /// `W(t) = a t` for `t <= 0` and `−b t` for `t >= 0`.
    Tent { a: f64, b: f64 },
    /// Piecewise-linear interpolant of `−t²/2` on `[−4, 4]` with end slopes `±4`.
    GaussianLikeTent,
    /// Grid `(i·spacing, j)` weighted by `e^{h x}` along rows.
    ProductStrip { h: f64, n_rows: usize, n_cols: usize, spacing: f64 },
}

/// A one-dimensional model with its closed-form invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct Model1D {
    pub space: PLConcave,
    /// Volume entropy.
    pub h: f64,
    /// Cheeger constant, for infinite-mass models.
    pub mu: Option<f64>,
    /// A set attaining `mu`, when one exists.
    pub attaining: Option<IntervalSet>,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidModel(format!("{name} = {v} must be positive and finite")))
    }
}

impl ModelSpec {
    pub fn is_1d(&self) -> bool {
        !matches!(self, ModelSpec::ProductStrip { .. })
    }
}

pub fn build_1d(spec: &ModelSpec) -> Result<Model1D> {
    const INF: f64 = f64::INFINITY;
    Ok(match *spec {
        ModelSpec::LogLinear { h } => {
            positive("h", h)?;
            Model1D {
                space: PLConcave::affine((-INF, INF), 0.0, h)?,
                h,
                mu: Some(h),
                attaining: Some(IntervalSet::left_half_line(0.0)),
            }
        }
        ModelSpec::TruncatedExp { h, d } => {
            positive("h", h)?;
            positive("d", d)?;
            Model1D { space: PLConcave::affine((0.0, d), 0.0, h)?, h: 0.0, mu: None, attaining: None }
        }
        ModelSpec::Tent { a, b } => {
            positive("a", a)?;
            positive("b", b)?;
            Model1D {
                space: PLConcave::new((-INF, INF), vec![0.0], vec![0.0], [Some(a), Some(-b)])?,
                h: 0.0,
                mu: None,
                attaining: None,
            }
        }
        ModelSpec::GaussianLikeTent => {
            let knots: Vec<f64> = (-8..=8).map(|k| k as f64 * 0.5).collect();
            let values = knots.iter().map(|t| -t * t / 2.0).collect();
            Model1D {
                space: PLConcave::new((-INF, INF), knots, values, [Some(4.0), Some(-4.0)])?,
                h: 0.0,
                mu: None,
                attaining: None,
            }
        }
        ModelSpec::ProductStrip { .. } => {
            return Err(Error::InvalidModel("product_strip is not one-dimensional; use build_strip".into()))
        }
    })
}

/// Discrete product of a weighted line with `n_rows` unit-weight points.
#[derive(Debug, Clone, PartialEq)]
pub struct Strip {
    pub space: DiscreteSpace,
    pub h: f64,
    pub n_rows: usize,
    pub n_cols: usize,
    pub spacing: f64,
    /// Point indices of each row, left to right: the expected needles.
    pub rows: Vec<Vec<usize>>,
    /// Half-strip: the left `n_cols / 2` columns.
    pub omega_mask: Vec<bool>,
    /// Position `e` with `m_Y(Y) e^{h e} = h m(Ω)`, `m_Y(Y) = n_rows`.
    pub e: f64,
    /// Right edge of the last column cell inside the half-strip.
    pub cell_boundary: f64,
    /// Point nearest the middle of the strip.
    pub center: usize,
    /// A radius whose ball contains every point with room to spare.
    pub radius: f64,
}

impl Strip {
    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.n_cols + col
    }

    /// `x < x_mid + tilt (y − y_mid)`: a half-strip with a tilted boundary.
    pub fn wedge_mask(&self, tilt: f64) -> Vec<bool> {
        let x_mid = self.cell_boundary;
        let y_mid = (self.n_rows as f64 - 1.0) / 2.0;
        (0..self.space.len())
            .map(|p| {
                let c = self.space.coords(p).expect("strip is embedded");
                c[0] < x_mid + tilt * (c[1] - y_mid)
            })
            .collect()
    }
}

/// Column weights are the exact cell integrals `∫ e^{h t} dt` over
/// `[x_i − s/2, x_i + s/2]`, which makes the conditional density along each
/// row exactly proportional to `e^{h x}`.
pub fn build_strip(spec: &ModelSpec) -> Result<Strip> {
    let ModelSpec::ProductStrip { h, n_rows, n_cols, spacing } = *spec else {
        return Err(Error::InvalidModel("build_strip needs a product_strip spec".into()));
    };
    positive("h", h)?;
    positive("spacing", spacing)?;
    if n_rows < 2 || n_cols < 2 {
        return Err(Error::InvalidModel(format!("grid {n_rows}x{n_cols} must be at least 2x2")));
    }
    let x_max = (n_cols - 1) as f64 * spacing;
    if h * x_max > MAX_EXPONENT {
        return Err(Error::WeightOverflow(format!(
            "h * extent = {} exceeds {MAX_EXPONENT}; reduce h, n_cols or spacing",
            h * x_max
        )));
    }
    let cell = 2.0 * (h * spacing / 2.0).sinh() / h;
    let mut coords = Vec::with_capacity(n_rows * n_cols);
    let mut weights = Vec::with_capacity(n_rows * n_cols);
    let half = n_cols / 2;
    let mut omega_mask = Vec::with_capacity(n_rows * n_cols);
    for j in 0..n_rows {
        for i in 0..n_cols {
            let x = i as f64 * spacing;
            coords.push(vec![x, j as f64]);
            weights.push((h * x).exp() * cell);
            omega_mask.push(i < half);
        }
    }
    let space = DiscreteSpace::from_coords(coords, weights)?;
    let omega_mass: f64 = (0..space.len()).filter(|&p| omega_mask[p]).map(|p| space.weights()[p]).sum();
    let e = (h * omega_mass / n_rows as f64).ln() / h;
    let rows = (0..n_rows).map(|j| (0..n_cols).map(|i| j * n_cols + i).collect()).collect();
    let center = (n_rows / 2) * n_cols + n_cols / 2;
    let diameter = (x_max * x_max + ((n_rows - 1) as f64).powi(2)).sqrt();
    Ok(Strip {
        space,
        h,
        n_rows,
        n_cols,
        spacing,
        rows,
        omega_mask,
        e,
        cell_boundary: (half as f64 - 0.5) * spacing,
        center,
        radius: 2.0 * diameter + 1.0,
    })
}
