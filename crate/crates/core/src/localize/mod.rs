//! Discrete L1 optimal transport and its decomposition into needles
//! (transport rays carrying conditional measures).

mod balanced;
mod flow;
mod needles;
mod space;
mod split;

pub use balanced::{balanced_function, BalancedFunction};
pub use flow::{solve_l1, FlowArc, TransportSolution};
pub use needles::{
    disintegrate, extract_needles, needle_diagnostics, Disintegration, Needle, NeedleDiagnostics, NeedleReport,
    RAY_TOL,
};
pub use space::DiscreteSpace;
pub use split::{potential_ladder, splitting_detector, LadderStep, SplitOptions, SplitVerdict};

use crate::io::fmt_f64;

pub const NEEDLE_CSV_HEADER: [&str; 6] = ["needle_id", "point_id", "arclength", "phi", "mass", "logdensity"];
pub const FLOW_CSV_HEADER: [&str; 4] = ["src", "dst", "mass", "cost"];

pub fn needle_csv_rows(needles: &[Needle]) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for (q, needle) in needles.iter().enumerate() {
        for k in 0..needle.len() {
            rows.push(vec![
                q.to_string(),
                needle.points[k].to_string(),
                fmt_f64(needle.arclength[k]),
                fmt_f64(needle.phi[k]),
                fmt_f64(needle.mass[k]),
                fmt_f64(needle.log_density[k]),
            ]);
        }
    }
    rows
}

pub fn flow_csv_rows(sol: &TransportSolution) -> Vec<Vec<String>> {
    sol.flow
        .iter()
        .map(|a| vec![a.src.to_string(), a.dst.to_string(), fmt_f64(a.mass), fmt_f64(a.cost)])
        .collect()
}
