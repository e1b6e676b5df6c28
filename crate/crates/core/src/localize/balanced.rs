use serde::Serialize;

use super::DiscreteSpace;
use crate::error::{Error, Result};

/// A zero-mean function on the points of a [`DiscreteSpace`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalancedFunction {
    pub g: Vec<f64>,
    pub omega_mask: Vec<bool>,
    pub ball_mask: Vec<bool>,
    pub center: usize,
    pub radius: f64,
}

impl BalancedFunction {
    /// Arbitrary values; masks are left empty and the whole space counts as the ball.
    pub fn from_values(g: Vec<f64>, center: usize) -> Self {
        let n = g.len();
        BalancedFunction { g, omega_mask: vec![false; n], ball_mask: vec![true; n], center, radius: f64::INFINITY }
    }

    /// `Σ g w`
    pub fn net_mass(&self, space: &DiscreteSpace) -> f64 {
        self.g.iter().zip(space.weights()).map(|(g, w)| g * w).sum()
    }
}

/// `χ_{Ω∩B_R} − (m(Ω∩B_R)/m(B_R∖Ω)) χ_{B_R∖Ω}` with the open ball `d(center, x) < R`.
pub fn balanced_function(
    space: &DiscreteSpace,
    omega_mask: &[bool],
    center: usize,
    radius: f64,
) -> Result<BalancedFunction> {
    let n = space.len();
    if omega_mask.len() != n {
        return Err(Error::InvalidSpace(format!("mask has {} entries for {n} points", omega_mask.len())));
    }
    if center >= n {
        return Err(Error::InvalidSpace(format!("center {center} out of range")));
    }
    let ball_mask: Vec<bool> = (0..n).map(|i| space.d(center, i) < radius).collect();
    let w = space.weights();
    let inside: f64 = (0..n).filter(|&i| ball_mask[i] && omega_mask[i]).map(|i| w[i]).sum();
    let outside: f64 = (0..n).filter(|&i| ball_mask[i] && !omega_mask[i]).map(|i| w[i]).sum();
    if inside <= 0.0 {
        return Err(Error::DegeneratePartition("set does not meet the ball".into()));
    }
    if outside <= 0.0 {
        return Err(Error::DegeneratePartition("ball lies inside the set".into()));
    }
    let ratio = inside / outside;
    let g = (0..n)
        .map(|i| match (ball_mask[i], omega_mask[i]) {
            (true, true) => 1.0,
            (true, false) => -ratio,
            _ => 0.0,
        })
        .collect();
    Ok(BalancedFunction { g, omega_mask: omega_mask.to_vec(), ball_mask, center, radius })
}
