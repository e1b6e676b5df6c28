use serde::Serialize;

use super::{BalancedFunction, DiscreteSpace};
use crate::error::{Error, Result};

/// Relative imbalance `|Σ g w| / Σ |g| w` accepted as balanced.
const BALANCE_TOL: f64 = 1e-9;
/// Flows below this fraction of the total are dropped from the output.
const DUST: f64 = 1e-15;
/// Reduced costs below this fraction of the largest cost are treated as zero.
const ZERO_RC: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowArc {
    pub src: usize,
    pub dst: usize,
    pub mass: f64,
    pub cost: f64,
}

/// Optimal L1 coupling of `g₊ w` and `g₋ w` with a Kantorovich potential.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransportSolution {
    pub flow: Vec<FlowArc>,
    /// 1-Lipschitz potential with `φ(x) − φ(y) = d(x, y)` on every flow arc, `φ(center) = 0`.
    pub phi: Vec<f64>,
    pub total_cost: f64,
    /// Number of simplex pivots performed.
    pub pivots: usize,
}

impl TransportSolution {
    /// Largest `φ(x) − φ(y) − d(x, y)` over all ordered pairs; non-positive up to rounding.
    pub fn lipschitz_excess(&self, space: &DiscreteSpace) -> f64 {
        let n = space.len();
        let mut worst = f64::NEG_INFINITY;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    worst = worst.max(self.phi[i] - self.phi[j] - space.d(i, j));
                }
            }
        }
        worst
    }

    /// Largest `|φ(x) − φ(y) − d(x, y)|` over flow arcs.
    pub fn slackness_gap(&self) -> f64 {
        self.flow
            .iter()
            .map(|a| (self.phi[a.src] - self.phi[a.dst] - a.cost).abs())
            .fold(0.0, f64::max)
    }

    /// Outgoing minus incoming mass per point.
    pub fn net_outflow(&self, n: usize) -> Vec<f64> {
        let mut net = vec![0.0; n];
        for a in &self.flow {
            net[a.src] += a.mass;
            net[a.dst] -= a.mass;
        }
        net
    }
}

/// Primal network simplex on the complete bipartite graph from supply points
/// (nodes `0..s`) to demand points (nodes `s..s+t`), rooted at node 0.
struct Simplex {
    s: usize,
    t: usize,
    cost: Vec<f64>,
    parent: Vec<usize>,
    /// Flow on the tree edge between a node and its parent.
    up_flow: Vec<f64>,
    depth: Vec<usize>,
    children: Vec<Vec<usize>>,
    pi: Vec<f64>,
    zero_tol: f64,
}

const NONE: usize = usize::MAX;

impl Simplex {
    /// Northwest-corner basis. On ties the demand side advances first so
    /// that every zero-flow tree edge points away from the root.
    fn new(cost: Vec<f64>, supply: &[f64], demand: &[f64], zero_tol: f64) -> Simplex {
        let (s, t) = (supply.len(), demand.len());
        let n = s + t;
        let mut sp = Simplex {
            s,
            t,
            cost,
            parent: vec![NONE; n],
            up_flow: vec![0.0; n],
            depth: vec![0; n],
            children: vec![Vec::new(); n],
            pi: vec![0.0; n],
            zero_tol,
        };
        let (mut i, mut j) = (0, 0);
        let (mut a, mut b) = (supply[0], demand[0]);
        sp.attach(s, 0, 0.0);
        loop {
            let m = a.min(b);
            a -= m;
            b -= m;
            if i == s - 1 && j == t - 1 {
                break;
            }
            if (b <= 0.0 && j < t - 1) || i == s - 1 {
                j += 1;
                b = demand[j];
                sp.attach(s + j, i, 0.0);
            } else {
                i += 1;
                a = supply[i];
                sp.attach(i, s + j, 0.0);
            }
        }
        sp.recompute_flows(supply, demand);
        sp.refresh(0);
        sp
    }

    fn attach(&mut self, v: usize, p: usize, f: f64) {
        self.parent[v] = p;
        self.up_flow[v] = f;
        self.children[p].push(v);
    }

    fn arc_cost(&self, src: usize, sink_node: usize) -> f64 {
        self.cost[src * self.t + (sink_node - self.s)]
    }

    /// Cost of the tree edge above `v`.
    fn edge_cost(&self, v: usize) -> f64 {
        let p = self.parent[v];
        if v < self.s {
            self.arc_cost(v, p)
        } else {
            self.arc_cost(p, v)
        }
    }

    /// Tree flows from node balances, leaves first.
    fn recompute_flows(&mut self, supply: &[f64], demand: &[f64]) {
        let n = self.s + self.t;
        let mut order = Vec::with_capacity(n);
        let mut stack = vec![0];
        while let Some(v) = stack.pop() {
            order.push(v);
            stack.extend(self.children[v].iter().copied());
        }
        let mut net: Vec<f64> = supply.iter().copied().chain(demand.iter().map(|d| -d)).collect();
        for &v in order.iter().rev() {
            if v == 0 {
                continue;
            }
            let p = self.parent[v];
            // Sources push net outflow up; sinks receive from their parent.
            let f = if v < self.s { net[v] } else { -net[v] };
            self.up_flow[v] = f.max(0.0);
            net[p] += net[v];
        }
    }

    /// Depths and potentials below `top`, whose own values are current.
    fn refresh(&mut self, top: usize) {
        let mut stack = vec![top];
        while let Some(v) = stack.pop() {
            for k in 0..self.children[v].len() {
                let c = self.children[v][k];
                self.depth[c] = self.depth[v] + 1;
                let e = self.edge_cost(c);
                self.pi[c] = if c < self.s { self.pi[v] - e } else { self.pi[v] + e };
                stack.push(c);
            }
        }
    }

    fn reduced(&self, i: usize, j: usize) -> f64 {
        self.cost[i * self.t + j] + self.pi[i] - self.pi[self.s + j]
    }

    fn run(&mut self) -> usize {
        let arcs = self.s * self.t;
        let block = ((arcs as f64).sqrt() as usize).max(10).min(arcs);
        let mut next = 0;
        let mut pivots = 0;
        loop {
            let mut best = -self.zero_tol;
            let mut enter = NONE;
            let mut scanned = 0;
            while scanned < arcs {
                let end = (scanned + block).min(arcs);
                for _ in scanned..end {
                    let (i, j) = (next / self.t, next % self.t);
                    let rc = self.reduced(i, j);
                    if rc < best {
                        best = rc;
                        enter = next;
                    }
                    next += 1;
                    if next == arcs {
                        next = 0;
                    }
                }
                scanned = end;
                if enter != NONE {
                    break;
                }
            }
            if enter == NONE {
                return pivots;
            }
            self.pivot(enter / self.t, self.s + enter % self.t);
            pivots += 1;
        }
    }

    fn pivot(&mut self, i: usize, j: usize) {
        let (mut a, mut b) = (i, j);
        let mut side_i = Vec::new();
        let mut side_j = Vec::new();
        while a != b {
            if self.depth[a] >= self.depth[b] {
                side_i.push(a);
                a = self.parent[a];
            } else {
                side_j.push(b);
                b = self.parent[b];
            }
        }
        // Orientation: apex down to i, then i -> j, then j up to the apex.
        // The leaving edge is the last blocking one in that order.
        let mut theta = f64::INFINITY;
        let mut leave = NONE;
        let mut leave_on_j = false;
        for &x in side_i.iter().rev() {
            if x < self.s && self.up_flow[x] <= theta {
                theta = self.up_flow[x];
                leave = x;
            }
        }
        for &x in &side_j {
            if x >= self.s && self.up_flow[x] <= theta {
                theta = self.up_flow[x];
                leave = x;
                leave_on_j = true;
            }
        }
        for &x in &side_i {
            self.up_flow[x] += if x < self.s { -theta } else { theta };
        }
        for &x in &side_j {
            self.up_flow[x] += if x < self.s { theta } else { -theta };
        }

        // Re-hang the cut-off subtree on the entering edge.
        let (e, o) = if leave_on_j { (j, i) } else { (i, j) };
        let mut path = vec![e];
        while *path.last().unwrap() != leave {
            let v = *path.last().unwrap();
            path.push(self.parent[v]);
        }
        let old_parent = self.parent[leave];
        self.children[old_parent].retain(|&c| c != leave);
        let flows: Vec<f64> = path.iter().map(|&v| self.up_flow[v]).collect();
        for m in (1..path.len()).rev() {
            let (lo, hi) = (path[m - 1], path[m]);
            self.children[hi].retain(|&c| c != lo);
            self.parent[hi] = lo;
            self.up_flow[hi] = flows[m - 1];
            self.children[lo].push(hi);
        }
        self.attach(e, o, theta);
        self.depth[e] = self.depth[o] + 1;
        let c = self.edge_cost(e);
        self.pi[e] = if e < self.s { self.pi[o] - c } else { self.pi[o] + c };
        self.refresh(e);
    }
}

/// Min-cost transport of `g₊ w` onto `g₋ w` with cost `d`.
pub fn solve_l1(space: &DiscreteSpace, g: &BalancedFunction) -> Result<TransportSolution> {
    let n = space.len();
    if g.g.len() != n {
        return Err(Error::InvalidSpace(format!("function has {} values for {n} points", g.g.len())));
    }
    let w = space.weights();
    let scale: f64 = g.g.iter().zip(w).map(|(g, w)| (g * w).abs()).sum();
    let net = g.net_mass(space);
    if net.abs() > BALANCE_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Unbalanced(net));
    }
    let sources: Vec<usize> = (0..n).filter(|&i| g.g[i] > 0.0).collect();
    let sinks: Vec<usize> = (0..n).filter(|&i| g.g[i] < 0.0).collect();
    let (s, t) = (sources.len(), sinks.len());
    if s == 0 || t == 0 {
        return Ok(TransportSolution { flow: Vec::new(), phi: vec![0.0; n], total_cost: 0.0, pivots: 0 });
    }
    let mut cost = Vec::with_capacity(s * t);
    for &i in &sources {
        for &j in &sinks {
            cost.push(space.d(i, j));
        }
    }
    let max_cost = cost.iter().copied().fold(0.0, f64::max);
    let supply: Vec<f64> = sources.iter().map(|&i| g.g[i] * w[i]).collect();
    let demand: Vec<f64> = sinks.iter().map(|&j| -g.g[j] * w[j]).collect();
    let mut sp = Simplex::new(cost, &supply, &demand, ZERO_RC * max_cost.max(1.0));
    let pivots = sp.run();

    let dust = DUST * scale;
    let mut flow = Vec::new();
    let mut total_cost = 0.0;
    let mut carries = vec![false; t];
    for v in 1..s + t {
        let m = sp.up_flow[v];
        if m > dust {
            let (a, b) = if v < s { (v, sp.parent[v]) } else { (sp.parent[v], v) };
            let c = sp.arc_cost(a, b);
            total_cost += m * c;
            carries[b - s] = true;
            flow.push(FlowArc { src: sources[a], dst: sinks[b - s], mass: m, cost: c });
        }
    }
    flow.sort_by_key(|a| (a.src, a.dst));

    // Dual values φ = −π on sinks carrying flow, extended by the c-transform.
    let phi_sink: Vec<(usize, f64)> =
        (0..t).filter(|&b| carries[b]).map(|b| (sinks[b], -sp.pi[s + b])).collect();
    let mut phi = vec![0.0; n];
    if !phi_sink.is_empty() {
        for (x, p) in phi.iter_mut().enumerate() {
            *p = phi_sink.iter().map(|&(y, py)| py + space.d(x, y)).fold(f64::INFINITY, f64::min);
        }
        let c = phi[g.center.min(n - 1)];
        phi.iter_mut().for_each(|p| *p -= c);
    }
    Ok(TransportSolution { flow, phi, total_cost, pivots })
}
