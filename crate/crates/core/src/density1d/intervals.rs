use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::ExtReal;

/// A finite union of closed intervals on the extended real line.
///
/// Intervals are sorted, pairwise separated by positive gaps, and have
/// positive length. Zero-length input intervals are dropped and touching
/// or overlapping ones are merged on construction.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IntervalSet {
    intervals: Vec<(f64, f64)>,
}

impl IntervalSet {
    pub fn new(raw: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut items = Vec::new();
        for (a, b) in raw {
            if a.is_nan() || b.is_nan() {
                return Err(Error::InvalidIntervals("NaN endpoint".into()));
            }
            if a == f64::INFINITY || b == f64::NEG_INFINITY {
                return Err(Error::InvalidIntervals(format!("empty interval [{a}, {b}]")));
            }
            if a > b {
                return Err(Error::InvalidIntervals(format!("reversed interval [{a}, {b}]")));
            }
            if a < b {
                items.push((a, b));
            }
        }
        Ok(Self::from_sorted_merge(items))
    }

    fn from_sorted_merge(mut items: Vec<(f64, f64)>) -> Self {
        items.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(items.len());
        for (a, b) in items {
            match merged.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        Self { intervals: merged }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// `[a, b]`; panics on invalid input, use [`IntervalSet::new`] for fallible construction.
    pub fn interval(a: f64, b: f64) -> Self {
        Self::new([(a, b)]).expect("valid interval")
    }

    /// `(-inf, b]`
    pub fn left_half_line(b: f64) -> Self {
        Self::interval(f64::NEG_INFINITY, b)
    }

    /// `[a, +inf)`
    pub fn right_half_line(a: f64) -> Self {
        Self::interval(a, f64::INFINITY)
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn inf(&self) -> Option<f64> {
        self.intervals.first().map(|i| i.0)
    }

    pub fn sup(&self) -> Option<f64> {
        self.intervals.last().map(|i| i.1)
    }

    pub fn contains(&self, t: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a <= t && t <= b)
    }

    pub fn is_bounded(&self) -> bool {
        self.intervals.iter().all(|&(a, b)| a.is_finite() && b.is_finite())
    }

    /// Intersection with `[lo, hi]`.
    pub fn clip(&self, lo: f64, hi: f64) -> Self {
        let items = self
            .intervals
            .iter()
            .map(|&(a, b)| (a.max(lo), b.min(hi)))
            .filter(|&(a, b)| a < b)
            .collect();
        Self { intervals: items }
    }

    /// The closed `eps`-neighbourhood, intersected with `[lo, hi]`.
    pub fn neighborhood(&self, eps: f64, lo: f64, hi: f64) -> Self {
        let items = self
            .intervals
            .iter()
            .map(|&(a, b)| ((a - eps).max(lo), (b + eps).min(hi)))
            .filter(|&(a, b)| a < b)
            .collect();
        Self::from_sorted_merge(items)
    }

    pub fn union(&self, other: &Self) -> Self {
        Self::from_sorted_merge(self.intervals.iter().chain(&other.intervals).copied().collect())
    }

    pub fn translate(&self, tau: f64) -> Self {
        Self { intervals: self.intervals.iter().map(|&(a, b)| (a + tau, b + tau)).collect() }
    }

    /// Image under `t -> -t`.
    pub fn reflect(&self) -> Self {
        let mut items: Vec<_> = self.intervals.iter().map(|&(a, b)| (-b, -a)).collect();
        items.reverse();
        Self { intervals: items }
    }

    /// Every interval lies inside `[lo, hi]`.
    pub fn within(&self, lo: f64, hi: f64) -> bool {
        self.intervals.iter().all(|&(a, b)| a >= lo && b <= hi)
    }

    /// Finite boundary points, in ascending order.
    pub fn boundary_points(&self) -> impl Iterator<Item = f64> + '_ {
        self.intervals.iter().flat_map(|&(a, b)| [a, b]).filter(|t| t.is_finite())
    }
}

impl Serialize for IntervalSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let raw: Vec<[ExtReal; 2]> =
            self.intervals.iter().map(|&(a, b)| [ExtReal(a), ExtReal(b)]).collect();
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntervalSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw: Vec<[ExtReal; 2]> = Vec::deserialize(d)?;
        IntervalSet::new(raw.into_iter().map(|[a, b]| (a.0, b.0))).map_err(serde::de::Error::custom)
    }
}
