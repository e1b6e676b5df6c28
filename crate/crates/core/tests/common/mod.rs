//! Independent oracles: quadrature, brute-force linear programming, grid search.
#![allow(dead_code)]

use needlekit_core::density1d::{IntervalSet, PLConcave};
use needlekit_core::localize::{BalancedFunction, DiscreteSpace};

const GL_X: [f64; 5] = [0.0, -0.538_469_310_105_683_1, 0.538_469_310_105_683_1, -0.906_179_845_938_664, 0.906_179_845_938_664];
const GL_W: [f64; 5] =
    [0.568_888_888_888_888_9, 0.478_628_670_499_366_5, 0.478_628_670_499_366_5, 0.236_926_885_056_189_1, 0.236_926_885_056_189_1];

/// Where the integrand `e^W` has dropped 60 nats below its value at `from`,
/// walking in direction `dir` over an unbounded side.
fn cutoff(space: &PLConcave, from: f64, dir: f64) -> f64 {
    let w0 = space.w(from);
    let mut step = 1.0;
    let mut t = from;
    while space.w(t) > w0 - 60.0 {
        t += dir * step;
        step *= 1.5;
        if step > 1e6 {
            break;
        }
    }
    t
}

/// `ln ∫_a^b e^W` by composite 5-point Gauss–Legendre on panels of width at
/// most `0.02`, split at the breakpoints. Infinite ends are truncated where
/// the integrand is negligible.
pub fn quad_log_mass(space: &PLConcave, a: f64, b: f64) -> f64 {
    let (lo, hi) = space.domain();
    let bps = space.breakpoints();
    let a = a.max(lo);
    let b = b.min(hi);
    if a >= b {
        return f64::NEG_INFINITY;
    }
    let a = if a.is_finite() { a } else { cutoff(space, bps[0].min(b), -1.0) };
    let b = if b.is_finite() { b } else { cutoff(space, (*bps.last().unwrap()).max(a), 1.0) };
    let mut cuts = vec![a];
    cuts.extend(bps.iter().copied().filter(|&x| x > a && x < b));
    cuts.push(b);
    let wmax = cuts.iter().map(|&t| space.w(t)).fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for seg in cuts.windows(2) {
        let n = ((seg[1] - seg[0]) / 0.02).ceil().max(1.0) as usize;
        let hstep = (seg[1] - seg[0]) / n as f64;
        for k in 0..n {
            let mid = seg[0] + (k as f64 + 0.5) * hstep;
            for (x, w) in GL_X.iter().zip(GL_W) {
                let t = mid + 0.5 * hstep * x;
                sum += w * 0.5 * hstep * (space.w(t) - wmax).exp();
            }
        }
    }
    sum.ln() + wmax
}

pub fn quad_set_mass(space: &PLConcave, set: &IntervalSet) -> f64 {
    set.intervals().iter().map(|&(a, b)| quad_log_mass(space, a, b).exp()).sum()
}

/// Boundary measure from the density at interval ends inside the domain.
pub fn boundary_by_density(space: &PLConcave, set: &IntervalSet) -> f64 {
    let (lo, hi) = space.domain();
    let mut s = 0.0;
    for &(a, b) in set.intervals() {
        for p in [a, b] {
            if p > lo && p < hi {
                s += space.w(p).exp();
            }
        }
    }
    s
}

/// Minimum-cost transport by enumerating every spanning tree of the
/// bipartite source/sink graph and keeping the feasible basic solutions.
pub fn lp_transport_cost(space: &DiscreteSpace, g: &BalancedFunction) -> f64 {
    let w = space.weights();
    let src: Vec<usize> = (0..space.len()).filter(|&i| g.g[i] > 0.0).collect();
    let dst: Vec<usize> = (0..space.len()).filter(|&i| g.g[i] < 0.0).collect();
    let (s, t) = (src.len(), dst.len());
    if s == 0 || t == 0 {
        return 0.0;
    }
    let arcs: Vec<(usize, usize)> = (0..s).flat_map(|i| (0..t).map(move |j| (i, j))).collect();
    let k = s + t - 1;
    let bal: Vec<f64> = src.iter().map(|&i| g.g[i] * w[i]).chain(dst.iter().map(|&j| -g.g[j] * w[j])).collect();
    let scale: f64 = bal.iter().sum();
    let mut best = f64::INFINITY;
    let mut pick: Vec<usize> = (0..k).collect();
    loop {
        if let Some(c) = tree_cost(&arcs, &pick, s, t, &bal, |i, j| space.d(src[i], dst[j]), scale) {
            best = best.min(c);
        }
        // Next k-combination of arc indices.
        let m = arcs.len();
        let mut p = k;
        while p > 0 && pick[p - 1] == m - k + p - 1 {
            p -= 1;
        }
        if p == 0 {
            return best;
        }
        pick[p - 1] += 1;
        for q in p..k {
            pick[q] = pick[q - 1] + 1;
        }
    }
}

fn tree_cost(
    arcs: &[(usize, usize)],
    pick: &[usize],
    s: usize,
    t: usize,
    bal: &[f64],
    d: impl Fn(usize, usize) -> f64,
    scale: f64,
) -> Option<f64> {
    let n = s + t;
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for &a in pick {
        let (i, j) = arcs[a];
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, s + j));
        if ri == rj {
            return None;
        }
        parent[ri] = rj;
    }
    // Peel leaves: a leaf's only arc carries its remaining balance.
    let mut rem = bal.to_vec();
    let mut alive: Vec<bool> = vec![true; pick.len()];
    let mut cost = 0.0;
    for _ in 0..pick.len() {
        let mut deg = vec![0usize; n];
        for (e, &a) in pick.iter().enumerate() {
            if alive[e] {
                let (i, j) = arcs[a];
                deg[i] += 1;
                deg[s + j] += 1;
            }
        }
        let (e, leaf) = pick
            .iter()
            .enumerate()
            .filter(|(e, _)| alive[*e])
            .find_map(|(e, &a)| {
                let (i, j) = arcs[a];
                if deg[i] == 1 {
                    Some((e, i))
                } else if deg[s + j] == 1 {
                    Some((e, s + j))
                } else {
                    None
                }
            })?;
        let (i, j) = arcs[pick[e]];
        let f = rem[leaf];
        if f < -1e-12 * scale {
            return None;
        }
        rem[i] -= f;
        rem[s + j] -= f;
        cost += f * d(i, j);
        alive[e] = false;
    }
    Some(cost)
}

/// `min(1, min_k (v + w_k) ln(1 + 1/w_k)) / D` over `n` log-spaced `w_k` in `[w_lo, w_hi]`.
pub fn milman_grid(d: f64, v: f64, n: usize, w_lo: f64, w_hi: f64) -> f64 {
    let (a, b) = (w_lo.ln(), w_hi.ln());
    let mut best = 1.0f64;
    for k in 0..n {
        let w = (a + (b - a) * k as f64 / (n - 1) as f64).exp();
        best = best.min((v + w) * (1.0 / w).ln_1p());
    }
    best / d
}

/// Graph metric of a complete graph with the given edge lengths.
pub fn shortest_paths(mut d: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let n = d.len();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}
