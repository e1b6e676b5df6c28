use serde::{Deserialize, Serialize};

use super::intervals::IntervalSet;
use crate::error::{Error, Result};
use crate::io::ExtReal;
use crate::numeric::{log_add, log_sum_exp};

/// Relative slack allowed when checking that consecutive slopes do not increase.
const CONCAVITY_SLACK: f64 = 1e-12;

/// One linear piece of the log-density: `W(t) = w_anchor + slope * (t - anchor)` on `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Segment {
    pub a: f64,
    pub b: f64,
    pub slope: f64,
    pub anchor: f64,
    pub w_anchor: f64,
}

impl Segment {
    #[inline]
    pub fn w(&self, t: f64) -> f64 {
        self.w_anchor + self.slope * (t - self.anchor)
    }

    /// `ln ∫_p^q e^W` for `a <= p < q <= b`; `+inf` for a non-decaying unbounded end.
    pub fn log_integral(&self, p: f64, q: f64) -> f64 {
        let s = self.slope;
        if p == f64::NEG_INFINITY {
            return if s > 0.0 { self.w(q) - s.ln() } else { f64::INFINITY };
        }
        if q == f64::INFINITY {
            return if s < 0.0 { self.w(p) - (-s).ln() } else { f64::INFINITY };
        }
        let len = q - p;
        let top = self.w(p).max(self.w(q));
        if s == 0.0 {
            return top + len.ln();
        }
        let x = s.abs() * len;
        top + (-(-x).exp_m1() / s.abs()).ln()
    }

    /// Point `x` in `[p, b]` with `∫_p^x e^W = mass`, or `None` if the piece runs out first.
    fn advance(&self, p: f64, mass: f64) -> Option<f64> {
        let s = self.slope;
        if p == f64::NEG_INFINITY {
            // ∫_{-inf}^x e^W = e^{W(x)}/s
            if s <= 0.0 {
                return None;
            }
            let x = self.anchor + ((s * mass).ln() - self.w_anchor) / s;
            return (x <= self.b).then_some(x);
        }
        let scaled = mass * (-self.w(p)).exp();
        let x = if s == 0.0 {
            p + scaled
        } else {
            let arg = s * scaled;
            if arg <= -1.0 {
                return None;
            }
            p + arg.ln_1p() / s
        };
        (x <= self.b).then_some(x)
    }
}

/// A one-dimensional weighted space `(I, |.|, e^{W(t)} dt)` with `W` concave and
/// piecewise linear on the interval `I`.
///
/// `W` is the linear interpolant of `values` at `breakpoints`. Between a domain
/// end and the nearest breakpoint `W` continues with the corresponding end slope,
/// which is therefore required whenever that gap is non-empty (in particular on
/// an unbounded side).
#[derive(Debug, Clone, PartialEq)]
pub struct PLConcave {
    lo: f64,
    hi: f64,
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    end_slopes: [Option<f64>; 2],
    segments: Vec<Segment>,
}

impl PLConcave {
    pub fn new(
        domain: (f64, f64),
        breakpoints: Vec<f64>,
        values: Vec<f64>,
        end_slopes: [Option<f64>; 2],
    ) -> Result<Self> {
        let space = Self::build(domain, breakpoints, values, end_slopes)?;
        space.check_concave()?;
        Ok(space)
    }

    /// Same validation as [`PLConcave::new`] except concavity.
    ///
    /// Every mass and boundary formula remains exact; only the
    /// curvature-dependent results (Cheeger attainment, the lemma checks)
    /// lose their meaning. Intended for negative controls.
    pub fn new_unchecked_concavity(
        domain: (f64, f64),
        breakpoints: Vec<f64>,
        values: Vec<f64>,
        end_slopes: [Option<f64>; 2],
    ) -> Result<Self> {
        Self::build(domain, breakpoints, values, end_slopes)
    }

    /// `W(t) = w0 + slope * t` on the given domain.
    pub fn affine(domain: (f64, f64), w0: f64, slope: f64) -> Result<Self> {
        let (lo, hi) = domain;
        let x0 = if lo.is_finite() { lo } else if hi.is_finite() { hi } else { 0.0 };
        Self::new(domain, vec![x0], vec![w0 + slope * x0], [Some(slope), Some(slope)])
    }

    fn build(
        domain: (f64, f64),
        breakpoints: Vec<f64>,
        values: Vec<f64>,
        end_slopes: [Option<f64>; 2],
    ) -> Result<Self> {
        let (lo, hi) = domain;
        let bad = |m: String| Err(Error::InvalidDensity(m));
        if lo.is_nan() || hi.is_nan() || lo == f64::INFINITY || hi == f64::NEG_INFINITY || lo >= hi {
            return bad(format!("invalid domain [{lo}, {hi}]"));
        }
        if breakpoints.is_empty() {
            return bad("at least one breakpoint is required".into());
        }
        if breakpoints.len() != values.len() {
            return bad(format!("{} breakpoints but {} values", breakpoints.len(), values.len()));
        }
        if breakpoints.iter().chain(&values).any(|x| !x.is_finite()) {
            return bad("breakpoints and values must be finite".into());
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return bad("breakpoints must be strictly increasing".into());
        }
        let first = breakpoints[0];
        let last = *breakpoints.last().unwrap();
        if first < lo || last > hi {
            return bad(format!("breakpoints must lie in [{lo}, {hi}]"));
        }
        for s in end_slopes.iter().flatten() {
            if !s.is_finite() {
                return bad("end slopes must be finite".into());
            }
        }

        let mut segments = Vec::with_capacity(breakpoints.len() + 1);
        if lo < first {
            let Some(s) = end_slopes[0] else {
                return bad("left end slope required".into());
            };
            segments.push(Segment { a: lo, b: first, slope: s, anchor: first, w_anchor: values[0] });
        }
        for i in 1..breakpoints.len() {
            let (x0, x1) = (breakpoints[i - 1], breakpoints[i]);
            let slope = (values[i] - values[i - 1]) / (x1 - x0);
            segments.push(Segment { a: x0, b: x1, slope, anchor: x0, w_anchor: values[i - 1] });
        }
        if last < hi {
            let Some(s) = end_slopes[1] else {
                return bad("right end slope required".into());
            };
            segments.push(Segment {
                a: last,
                b: hi,
                slope: s,
                anchor: last,
                w_anchor: *values.last().unwrap(),
            });
        }
        if segments.is_empty() {
            // single breakpoint equal to both domain ends is excluded by lo < hi
            return bad("degenerate log-density".into());
        }
        Ok(Self { lo, hi, breakpoints, values, end_slopes, segments })
    }

    fn check_concave(&self) -> Result<()> {
        for w in self.segments.windows(2) {
            let (s0, s1) = (w[0].slope, w[1].slope);
            if s1 > s0 + CONCAVITY_SLACK * (1.0 + s0.abs()) {
                return Err(Error::InvalidDensity(format!(
                    "slope increases from {s0} to {s1} at t = {}",
                    w[0].b
                )));
            }
        }
        Ok(())
    }

    pub fn is_concave(&self) -> bool {
        self.check_concave().is_ok()
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn end_slopes(&self) -> [Option<f64>; 2] {
        self.end_slopes
    }

    /// Slopes of the linear pieces, left to right.
    pub fn slopes(&self) -> Vec<f64> {
        self.segments.iter().map(|s| s.slope).collect()
    }

    /// Slope of the left-most piece if the domain is unbounded below.
    pub fn left_tail_slope(&self) -> Option<f64> {
        (self.lo == f64::NEG_INFINITY).then(|| self.segments[0].slope)
    }

    /// Slope of the right-most piece if the domain is unbounded above.
    pub fn right_tail_slope(&self) -> Option<f64> {
        (self.hi == f64::INFINITY).then(|| self.segments.last().unwrap().slope)
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn is_whole_line(&self) -> bool {
        self.lo == f64::NEG_INFINITY && self.hi == f64::INFINITY
    }

    pub fn contains(&self, t: f64) -> bool {
        self.lo <= t && t <= self.hi
    }

    pub(crate) fn segment_index(&self, t: f64) -> usize {
        let idx = self.segments.partition_point(|s| s.b < t);
        idx.min(self.segments.len() - 1)
    }

    /// Log-density at `t`, which must lie in the closed domain and be finite.
    pub fn w(&self, t: f64) -> f64 {
        debug_assert!(t.is_finite());
        self.segments[self.segment_index(t)].w(t)
    }

    /// One-sided slopes `(W'(t-), W'(t+))`; equal away from breakpoints.
    pub fn one_sided_slopes(&self, t: f64) -> (f64, f64) {
        let i = self.segment_index(t);
        let seg = &self.segments[i];
        if t == seg.b && i + 1 < self.segments.len() {
            (seg.slope, self.segments[i + 1].slope)
        } else if t == seg.a && i > 0 {
            (self.segments[i - 1].slope, seg.slope)
        } else {
            (seg.slope, seg.slope)
        }
    }

    /// Extreme one-sided slopes over `[a, b]` (clipped to the domain).
    pub fn slope_range(&self, a: f64, b: f64) -> Option<(f64, f64)> {
        let (a, b) = (a.max(self.lo), b.min(self.hi));
        if a > b {
            return None;
        }
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for seg in &self.segments {
            if seg.b >= a && seg.a <= b {
                lo = lo.min(seg.slope);
                hi = hi.max(seg.slope);
            }
        }
        Some((lo, hi))
    }

    /// `ln ∫_a^b e^W` over `[a, b] ∩ domain`; `-inf` if empty, `+inf` if infinite.
    pub fn log_mass_between(&self, a: f64, b: f64) -> f64 {
        let (a, b) = (a.max(self.lo), b.min(self.hi));
        if a >= b {
            return f64::NEG_INFINITY;
        }
        let start = self.segment_index(a);
        let mut acc = f64::NEG_INFINITY;
        for seg in &self.segments[start..] {
            if seg.a >= b {
                break;
            }
            let (p, q) = (a.max(seg.a), b.min(seg.b));
            if p < q {
                acc = log_add(acc, seg.log_integral(p, q));
            }
        }
        acc
    }

    /// `ln m(set ∩ domain)`.
    pub fn log_mass(&self, set: &IntervalSet) -> f64 {
        log_sum_exp(set.intervals().iter().map(|&(a, b)| self.log_mass_between(a, b)))
    }

    pub fn log_total_mass(&self) -> f64 {
        self.log_mass_between(self.lo, self.hi)
    }

    pub fn has_finite_mass(&self) -> bool {
        self.log_total_mass().is_finite()
    }

    /// `ln m⁺(set)`: log of the summed density over boundary points of
    /// `set ∩ domain` lying strictly inside the domain.
    pub fn log_boundary_measure(&self, set: &IntervalSet) -> f64 {
        let clipped = set.clip(self.lo, self.hi);
        log_sum_exp(
            clipped
                .boundary_points()
                .filter(|&t| t > self.lo && t < self.hi)
                .map(|t| self.w(t)),
        )
    }

    /// The point `x >= a` with `m([a, x]) = mass`; `None` if less mass remains.
    pub fn advance(&self, a: f64, mass: f64) -> Option<f64> {
        if mass <= 0.0 {
            return Some(a.max(self.lo));
        }
        let a = a.max(self.lo);
        let mut remaining = mass;
        let mut p = a;
        for seg in &self.segments[self.segment_index(a)..] {
            if seg.b <= p && seg.b != f64::INFINITY {
                continue;
            }
            let p_here = p.max(seg.a);
            if let Some(x) = seg.advance(p_here, remaining) {
                return Some(x);
            }
            let piece = seg.log_integral(p_here, seg.b).exp();
            remaining -= piece;
            p = seg.b;
            if remaining <= 0.0 {
                return Some(seg.b);
            }
        }
        None
    }

    /// The point `x <= b` with `m([x, b]) = mass`.
    pub fn retreat(&self, b: f64, mass: f64) -> Option<f64> {
        self.reflect().advance(-b, mass).map(|x| -x)
    }

    /// Image under `t -> -t`.
    pub fn reflect(&self) -> Self {
        let breakpoints: Vec<f64> = self.breakpoints.iter().rev().map(|x| -x).collect();
        let values: Vec<f64> = self.values.iter().rev().copied().collect();
        let end_slopes = [self.end_slopes[1].map(|s| -s), self.end_slopes[0].map(|s| -s)];
        Self::build((-self.hi, -self.lo), breakpoints, values, end_slopes)
            .expect("reflection preserves validity")
    }

    /// `W + c`: multiplies every mass by `e^c`.
    pub fn shift_values(&self, c: f64) -> Self {
        let values = self.values.iter().map(|v| v + c).collect();
        Self::build((self.lo, self.hi), self.breakpoints.clone(), values, self.end_slopes)
            .expect("shift preserves validity")
    }

    /// Translate the space by `tau`.
    pub fn translate(&self, tau: f64) -> Self {
        let breakpoints = self.breakpoints.iter().map(|x| x + tau).collect();
        Self::build((self.lo + tau, self.hi + tau), breakpoints, self.values.clone(), self.end_slopes)
            .expect("translation preserves validity")
    }
}

#[derive(Serialize, Deserialize)]
struct SpaceFile {
    domain: [ExtReal; 2],
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    #[serde(default)]
    end_slopes: [Option<f64>; 2],
}

impl Serialize for PLConcave {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        SpaceFile {
            domain: [ExtReal(self.lo), ExtReal(self.hi)],
            breakpoints: self.breakpoints.clone(),
            values: self.values.clone(),
            end_slopes: self.end_slopes,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PLConcave {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let f = SpaceFile::deserialize(d)?;
        PLConcave::new((f.domain[0].0, f.domain[1].0), f.breakpoints, f.values, f.end_slopes)
            .map_err(serde::de::Error::custom)
    }
}
