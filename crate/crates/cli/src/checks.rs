//! Individual property checks, shared by the random suites and `replay`.

use std::path::Path;

use needlekit_core::density1d::{
    lemma_1dim_check, mass, minkowski_content, quantitative_rigidity_check, volume_entropy, IntervalSet, Mass,
    PLConcave, RigidityVerdict,
};
use needlekit_core::interpolate1d::{brunn_minkowski_check, displacement_convexity_check, DensityFile};
use needlekit_core::localize::{
    balanced_function, extract_needles, needle_diagnostics, solve_l1, splitting_detector, BalancedFunction,
    DiscreteSpace, NeedleReport, SplitOptions, TransportSolution,
};
use needlekit_core::io::read_json;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::output::{Failure, Out, Run};

/// A concrete instance of one check, complete enough to be re-run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum Counterexample {
    Isoperimetry {
        space: PLConcave,
        set: IntervalSet,
        tol: f64,
    },
    Convexity {
        space: PLConcave,
        mu0: DensityFile,
        mu1: DensityFile,
        t_grid: Vec<f64>,
        quantiles: usize,
        tol: f64,
    },
    BrunnMinkowski {
        space: PLConcave,
        omega: IntervalSet,
        target: IntervalSet,
        t_grid: Vec<f64>,
        tol: f64,
    },
    LongInterval {
        space: PLConcave,
        set: IntervalSet,
        h: f64,
        r: f64,
    },
    SlopeWindow {
        space: PLConcave,
        set: IntervalSet,
        h: f64,
        eps: f64,
        l: f64,
        r: f64,
        /// The instance is built so that the near-equality hypothesis must fail.
        #[serde(default)]
        contrapositive: bool,
    },
    Transport {
        space: DiscreteSpace,
        omega: Vec<bool>,
        center: usize,
        radius: f64,
        tol: f64,
        /// Also require `Σ g·m = 0` on needles away from the ball boundary.
        #[serde(default)]
        needle_balance: bool,
    },
    Split {
        space: DiscreteSpace,
        omega: Vec<bool>,
        center: usize,
        radius: f64,
        options: SplitOptions,
        expect_split: bool,
    },
}

/// Result of one check: whether it held, and the numbers behind the verdict.
#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub holds: bool,
    pub report: Value,
}

fn outcome<T: Serialize>(holds: bool, report: &T) -> Outcome {
    Outcome { holds, report: serde_json::to_value(report).unwrap_or(Value::Null) }
}

/// On-disk counterexample: the instance plus where it came from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CounterexampleFile {
    pub command: String,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub trial: Option<usize>,
    #[serde(flatten)]
    pub instance: Counterexample,
    #[serde(default, skip_deserializing)]
    pub observed: Value,
}

pub const COUNTEREXAMPLE_FILE: &str = "counterexample.json";

/// Write the counterexample and return the failure that ends the run.
pub fn violation(
    out: &Out,
    command: &str,
    seed: Option<u64>,
    trial: Option<usize>,
    instance: Counterexample,
    observed: &Outcome,
) -> Failure {
    let file = CounterexampleFile { command: command.into(), seed, trial, instance, observed: observed.report.clone() };
    match out.json(COUNTEREXAMPLE_FILE, &file) {
        Ok(path) => Failure::Violation(format!(
            "{command}{} failed; counterexample written to {}",
            trial.map(|t| format!(" trial {t}")).unwrap_or_default(),
            path.display()
        )),
        Err(e) => e,
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct IsoReport {
    pub h: f64,
    pub mass: f64,
    pub boundary: f64,
    /// `h · mass`
    pub bound: f64,
}

/// `m⁺(Ω) >= h m(Ω)`; `None` when the set has infinite mass.
pub fn isoperimetry(space: &PLConcave, set: &IntervalSet, tol: f64) -> Run<Option<(IsoReport, bool)>> {
    let h = volume_entropy(space, space.breakpoints()[0])?.h;
    let Mass::Finite(v) = mass(space, set) else { return Ok(None) };
    let boundary = minkowski_content(space, set);
    let bound = h * v;
    let holds = boundary >= bound - tol * bound.max(f64::MIN_POSITIVE);
    Ok(Some((IsoReport { h, mass: v, boundary, bound }, holds)))
}

/// Everything computed by the localization pipeline.
pub struct Localization {
    pub g: BalancedFunction,
    pub solution: TransportSolution,
    pub needles: NeedleReport,
}

pub fn localize(space: &DiscreteSpace, omega: &[bool], center: usize, radius: f64) -> Run<Localization> {
    let g = balanced_function(space, omega, center, radius)?;
    let solution = solve_l1(space, &g)?;
    let needles = extract_needles(space, &g, &solution);
    Ok(Localization { g, solution, needles })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TransportChecks {
    pub total_cost: f64,
    pub lipschitz_excess: f64,
    pub slackness_gap: f64,
    /// Largest `|net outflow − g w|` over points.
    pub conservation_error: f64,
    /// Largest `|Σ g·m|` over needles away from the ball boundary.
    pub interior_balance: f64,
}

impl TransportChecks {
    pub fn new(space: &DiscreteSpace, loc: &Localization) -> Run<Self> {
        let sol = &loc.solution;
        let net = sol.net_outflow(space.len());
        let w = space.weights();
        let conservation_error =
            (0..space.len()).map(|i| (net[i] - loc.g.g[i] * w[i]).abs()).fold(0.0, f64::max);
        let mut interior_balance = 0.0f64;
        for q in loc.needles.needles.iter().filter(|q| !q.touches_boundary) {
            interior_balance = interior_balance.max(needle_diagnostics(q)?.balance.abs());
        }
        Ok(TransportChecks {
            total_cost: sol.total_cost,
            lipschitz_excess: sol.lipschitz_excess(space),
            slackness_gap: sol.slackness_gap(),
            conservation_error,
            interior_balance,
        })
    }

    pub fn holds(&self, tol: f64, needle_balance: bool) -> bool {
        self.lipschitz_excess <= tol
            && self.slackness_gap <= tol
            && self.conservation_error <= tol
            && (!needle_balance || self.interior_balance <= tol)
    }
}

impl Counterexample {
    pub fn evaluate(&self) -> Run<Outcome> {
        match self {
            Counterexample::Isoperimetry { space, set, tol } => match isoperimetry(space, set, *tol)? {
                Some((rep, holds)) => Ok(outcome(holds, &rep)),
                None => Err(Failure::Input("set has infinite mass".into())),
            },
            Counterexample::Convexity { space, mu0, mu1, t_grid, quantiles, tol } => {
                let mu0 = mu0.clone().into_density(space.clone())?;
                let mu1 = mu1.clone().into_density(space.clone())?;
                let rep = displacement_convexity_check(space, &mu0, &mu1, t_grid, *quantiles)?;
                Ok(outcome(rep.max_violation <= *tol, &rep))
            }
            Counterexample::BrunnMinkowski { space, omega, target, t_grid, tol } => {
                let rep = brunn_minkowski_check(space, omega, target, t_grid)?;
                let worst = rep.rows.iter().map(|r| r.bound - r.ln_mass).fold(f64::NEG_INFINITY, f64::max);
                Ok(outcome(worst <= *tol, &rep))
            }
            Counterexample::LongInterval { space, set, h, r } => {
                let rep = lemma_1dim_check(space, set, *h, *r)?;
                Ok(outcome(rep.holds, &rep))
            }
            Counterexample::SlopeWindow { space, set, h, eps, l, r, contrapositive } => {
                let rep = quantitative_rigidity_check(space, set, *h, *eps, *l, *r)?;
                let holds = if *contrapositive {
                    !rep.hypothesis_holds
                } else {
                    rep.verdict != RigidityVerdict::Fail
                };
                Ok(outcome(holds, &rep))
            }
            Counterexample::Transport { space, omega, center, radius, tol, needle_balance } => {
                let loc = localize(space, omega, *center, *radius)?;
                let rep = TransportChecks::new(space, &loc)?;
                Ok(outcome(rep.holds(*tol, *needle_balance), &rep))
            }
            Counterexample::Split { space, omega, center, radius, options, expect_split } => {
                let loc = localize(space, omega, *center, *radius)?;
                let verdict = splitting_detector(space, &loc.needles.needles, omega, *options)?;
                Ok(outcome(verdict.splits == *expect_split, &verdict))
            }
        }
    }
}

/// Re-run a stored counterexample; exit 1 if the violation reproduces.
pub fn replay(path: &Path, out: &Out) -> Run {
    let file: CounterexampleFile = read_json(path)?;
    let outcome = file.instance.evaluate()?;
    out.json("replay.json", &outcome)?;
    if outcome.holds {
        println!("replay: {} check holds; the violation does not reproduce", file.command);
        Ok(())
    } else {
        Err(Failure::Violation(format!("replay: {} violation reproduced", file.command)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counterexample_round_trip() {
        let space = PLConcave::affine((0.0, 1.0), 0.0, 1.0).unwrap();
        let file = CounterexampleFile {
            command: "verify-iso".into(),
            seed: Some(3),
            trial: Some(4),
            instance: Counterexample::Isoperimetry { space, set: IntervalSet::interval(0.2, 0.5), tol: 1e-9 },
            observed: Value::Null,
        };
        let text = serde_json::to_string(&file).unwrap();
        assert!(text.contains("\"check\":\"isoperimetry\""));
        let back: CounterexampleFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.trial, Some(4));
        assert!(back.instance.evaluate().unwrap().holds);
    }
}
