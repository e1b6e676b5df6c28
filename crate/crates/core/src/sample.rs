//! Seeded random instances for property checks and the CLI.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::density1d::{IntervalSet, PLConcave};
use crate::interpolate1d::Density1D;
use crate::localize::{BalancedFunction, DiscreteSpace};

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    /// `[lo, hi]`, finite mass.
    Bounded,
    /// Whole line with both tails decaying.
    FiniteWholeLine,
    /// Whole line with a growing right tail.
    InfiniteWholeLine,
    /// `[lo, ∞)` with a growing right tail.
    InfiniteHalfLine,
}

impl Shape {
    pub const ALL: [Shape; 4] =
        [Shape::Bounded, Shape::FiniteWholeLine, Shape::InfiniteWholeLine, Shape::InfiniteHalfLine];
}

/// Sorted, strictly decreasing values in `[lo, hi]`.
fn decreasing(rng: &mut SampleRng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(lo..hi)).collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v.dedup();
    v
}

/// A random piecewise-linear concave log-density of the given shape with
/// at most `max_knots` breakpoints in `[-5, 5]`.
pub fn random_space(rng: &mut SampleRng, shape: Shape, max_knots: usize) -> PLConcave {
    let k = rng.random_range(1..=max_knots.max(1));
    let mut knots: Vec<f64> = (0..k).map(|_| rng.random_range(-5.0..5.0)).collect();
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let k = knots.len();
    // One slope per gap plus the two tails, redrawn until the shape holds.
    let slopes = loop {
        let s = match shape {
            Shape::Bounded | Shape::FiniteWholeLine => decreasing(rng, k + 1, -3.0, 3.0),
            Shape::InfiniteWholeLine | Shape::InfiniteHalfLine => decreasing(rng, k + 1, 0.1, 3.0),
        };
        let ok = s.len() == k + 1 && (shape != Shape::FiniteWholeLine || (s[0] > 0.0 && s[k] < 0.0));
        if ok {
            break s;
        }
    };
    let mut values = vec![rng.random_range(-1.0..1.0)];
    for g in 0..k - 1 {
        let v = values[g] + slopes[g + 1] * (knots[g + 1] - knots[g]);
        values.push(v);
    }
    let domain = match shape {
        Shape::Bounded => (knots[0] - rng.random_range(0.1..2.0), knots[k - 1] + rng.random_range(0.1..2.0)),
        Shape::FiniteWholeLine | Shape::InfiniteWholeLine => (f64::NEG_INFINITY, f64::INFINITY),
        Shape::InfiniteHalfLine => (knots[0] - rng.random_range(0.1..2.0), f64::INFINITY),
    };
    PLConcave::new(domain, knots, values, [Some(slopes[0]), Some(slopes[k])]).expect("sampled space is valid")
}

/// Up to `max_parts` disjoint intervals, clipped to the domain of `space`,
/// possibly unbounded on the sides where the domain is.
pub fn random_interval_set(rng: &mut SampleRng, space: &PLConcave, max_parts: usize) -> IntervalSet {
    let (lo, hi) = space.domain();
    let a = if lo.is_finite() { lo } else { -8.0 };
    let b = if hi.is_finite() { hi } else { 8.0 };
    loop {
        let n = 2 * rng.random_range(1..=max_parts.max(1));
        let mut cuts: Vec<f64> = (0..n).map(|_| rng.random_range(a..b)).collect();
        cuts.sort_by(f64::total_cmp);
        if !lo.is_finite() && rng.random_bool(0.2) {
            cuts[0] = f64::NEG_INFINITY;
        }
        if !hi.is_finite() && rng.random_bool(0.2) {
            cuts[n - 1] = f64::INFINITY;
        }
        let set = IntervalSet::new(cuts.chunks(2).map(|c| (c[0], c[1]))).expect("sorted cuts");
        if !set.is_empty() {
            return set;
        }
    }
}

/// A piecewise-constant probability density with `cells` cells on a random
/// window of the (bounded) interval `[a, b]`.
pub fn random_density(rng: &mut SampleRng, reference: &PLConcave, a: f64, b: f64, cells: usize) -> Density1D {
    let mut edges: Vec<f64> = (0..=cells).map(|_| rng.random_range(a..b)).collect();
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    if edges.len() < 2 {
        edges = vec![a, b];
    }
    let rho = (0..edges.len() - 1).map(|_| rng.random_range(0.1..2.0)).collect();
    Density1D::normalized(reference.clone(), edges, rho).expect("positive cells")
}

/// Bounded space shifted to `[0, D]` with total mass drawn from `[1/2, 1)`.
pub fn long_interval_space(rng: &mut SampleRng) -> PLConcave {
    let s = random_space(rng, Shape::Bounded, 5);
    let s = s.translate(-s.domain().0);
    let target: f64 = rng.random_range(0.5..1.0);
    s.shift_values(target.ln() - s.log_total_mass())
}

/// Concave `W` on `[0, d]` with unit mass and decreasing slopes drawn from
/// `h (1 + [−6, 1.5] eps)`; about half the breakpoints fall in the first
/// 15% of the domain.
pub fn near_linear(rng: &mut SampleRng, h: f64, eps: f64, d: f64) -> PLConcave {
    let k = rng.random_range(2..6);
    let mut knots: Vec<f64> = (0..k)
        .map(|i| if i % 2 == 0 { rng.random_range(0.0..0.15) * d } else { rng.random_range(0.0..1.0) * d })
        .collect();
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let mut slopes: Vec<f64> = (0..=knots.len()).map(|_| h * (1.0 + rng.random_range(-6.0..1.5) * eps)).collect();
    slopes.sort_by(|a, b| b.total_cmp(a));
    let mut values = vec![0.0];
    for g in 1..knots.len() {
        values.push(values[g - 1] + slopes[g] * (knots[g] - knots[g - 1]));
    }
    let s = PLConcave::new((0.0, d), knots, values, [Some(slopes[0]), Some(*slopes.last().unwrap())])
        .expect("decreasing slopes");
    s.shift_values(-s.log_total_mass())
}

/// `n` points uniform in `[0, side]^dim` with weights in `[0.5, 2]`.
pub fn random_discrete_space(rng: &mut SampleRng, n: usize, dim: usize, side: f64) -> DiscreteSpace {
    let coords = (0..n).map(|_| (0..dim).map(|_| rng.random_range(0.0..side)).collect()).collect();
    let weights = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
    DiscreteSpace::from_coords(coords, weights).expect("distinct random points")
}

/// Random signs and magnitudes, then the negative part rescaled so that
/// `Σ g w = 0`. At least one point of each sign.
pub fn random_balanced(rng: &mut SampleRng, space: &DiscreteSpace) -> BalancedFunction {
    let n = space.len();
    assert!(n >= 2, "need two points");
    let mut g: Vec<f64> =
        (0..n).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 } * rng.random_range(0.2..1.0)).collect();
    g[0] = g[0].abs();
    g[1] = -g[1].abs();
    let w = space.weights();
    let pos: f64 = (0..n).filter(|&i| g[i] > 0.0).map(|i| g[i] * w[i]).sum();
    let neg: f64 = (0..n).filter(|&i| g[i] < 0.0).map(|i| -g[i] * w[i]).sum();
    for x in g.iter_mut().filter(|x| **x < 0.0) {
        *x *= pos / neg;
    }
    BalancedFunction::from_values(g, 0)
}
