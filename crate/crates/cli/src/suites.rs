//! Random property suites and their single-instance forms.

use std::path::{Path, PathBuf};

use needlekit_core::density1d::{IntervalSet, PLConcave};
use needlekit_core::interpolate1d::{default_t_grid, Density1D, DensityFile};
use needlekit_core::io::{fmt_f64, read_json};
use needlekit_core::sample::{self, SampleRng, Shape};
use rand::Rng;
use rayon::prelude::*;
use serde_json::Value;

use crate::checks::{isoperimetry, violation, Counterexample, Outcome};
use crate::input;
use crate::output::{Failure, Out, Run};
use crate::SuiteArgs;

const LN2: f64 = std::f64::consts::LN_2;

/// Independent stream per trial, so results do not depend on scheduling.
fn trial_rng(seed: u64, k: usize) -> SampleRng {
    sample::rng(seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn verdict(holds: bool) -> String {
    if holds { "pass" } else { "fail" }.into()
}

#[derive(Default)]
struct Trial {
    /// Trial number within the seeded stream, if the instance came from one.
    index: Option<usize>,
    rows: Vec<Vec<String>>,
    failure: Option<(Counterexample, Outcome)>,
    checked: usize,
}

impl Trial {
    fn record(&mut self, instance: impl FnOnce() -> Counterexample, outcome: Outcome) {
        self.checked += 1;
        if !outcome.holds && self.failure.is_none() {
            self.failure = Some((instance(), outcome));
        }
    }
}

fn run_trials(ks: std::ops::Range<usize>, f: impl Fn(usize) -> Run<Trial> + Sync) -> Run<Vec<Trial>> {
    let results: Vec<Run<Trial>> = ks.into_par_iter().map(|k| f(k).map(|t| Trial { index: Some(k), ..t })).collect();
    results.into_iter().collect()
}

/// Write every row, then fail on the first violating trial.
fn finish(
    out: &Out,
    command: &str,
    file: &str,
    header: &[&str],
    trials: Vec<Trial>,
    seed: Option<u64>,
) -> Run<usize> {
    let rows: Vec<Vec<String>> = trials.iter().flat_map(|t| t.rows.iter().cloned()).collect();
    out.csv(file, header, &rows)?;
    let checked = trials.iter().map(|t| t.checked).sum();
    let failures = trials.iter().filter(|t| t.failure.is_some()).count();
    println!("{command}: {checked} checks over {} trials, {failures} violations", trials.len());
    if let Some(t) = trials.into_iter().find(|t| t.failure.is_some()) {
        let (instance, outcome) = t.failure.unwrap();
        return Err(violation(out, command, seed, t.index, instance, &outcome));
    }
    Ok(checked)
}

fn field(report: &Value, key: &str) -> String {
    report.get(key).and_then(Value::as_f64).map(fmt_f64).unwrap_or_default()
}

const ISO_HEADER: [&str; 7] = ["trial", "shape", "h", "mass", "lhs", "rhs", "verdict"];

fn iso_trial(k: &str, shape: &str, space: PLConcave, set: IntervalSet, tol: f64) -> Run<Trial> {
    let mut t = Trial::default();
    match isoperimetry(&space, &set, tol)? {
        Some((rep, holds)) => {
            t.rows.push(vec![
                k.into(),
                shape.into(),
                fmt_f64(rep.h),
                fmt_f64(rep.mass),
                fmt_f64(rep.boundary),
                fmt_f64(rep.bound),
                verdict(holds),
            ]);
            let outcome = Outcome { holds, report: serde_json::to_value(rep).unwrap_or(Value::Null) };
            t.record(|| Counterexample::Isoperimetry { space, set, tol }, outcome);
        }
        None => t.rows.push(vec![
            k.into(),
            shape.into(),
            String::new(),
            "inf".into(),
            String::new(),
            String::new(),
            "skip".into(),
        ]),
    }
    Ok(t)
}

pub fn verify_iso(space: Option<&Path>, set: Option<&Path>, suite: &SuiteArgs, out: &Out) -> Run {
    let tol = suite.tol.unwrap_or(1e-9);
    if let Some(p) = space {
        let space: PLConcave = read_json(p)?;
        let set = input::set(set)?;
        let t = iso_trial("input", "input", space, set, tol)?;
        if t.checked == 0 {
            return Err(Failure::Input("set has infinite mass".into()));
        }
        finish(out, "verify-iso", "iso.csv", &ISO_HEADER, vec![t], None)?;
        return Ok(());
    }
    let trials = run_trials(0..suite.trials.unwrap_or(1000), |k| {
        let mut r = trial_rng(suite.seed, k);
        let shape = Shape::ALL[k % 4];
        let space = sample::random_space(&mut r, shape, 6);
        let set = sample::random_interval_set(&mut r, &space, 3);
        iso_trial(&k.to_string(), &format!("{shape:?}"), space, set, tol)
    })?;
    finish(out, "verify-iso", "iso.csv", &ISO_HEADER, trials, Some(suite.seed))?;
    Ok(())
}

pub struct ConvexityFiles {
    pub space: Option<PathBuf>,
    pub mu0: Option<PathBuf>,
    pub mu1: Option<PathBuf>,
    pub set: Option<PathBuf>,
    pub target: Option<PathBuf>,
}

const CONVEXITY_HEADER: [&str; 7] = ["trial", "check", "t", "value", "bound", "violation", "verdict"];

fn convexity_rows(t: &mut Trial, label: &str, instance: Counterexample) -> Run {
    let outcome = instance.evaluate()?;
    let rows = outcome.report.get("rows").and_then(Value::as_array).cloned().unwrap_or_default();
    for row in &rows {
        let (check, value, viol) = match &instance {
            Counterexample::Convexity { .. } => ("entropy", field(row, "entropy"), field(row, "violation")),
            _ => {
                let v = row.get("bound").and_then(Value::as_f64).unwrap_or(f64::NAN)
                    - row.get("ln_mass").and_then(Value::as_f64).unwrap_or(f64::NAN);
                ("brunn_minkowski", field(row, "ln_mass"), fmt_f64(v))
            }
        };
        t.rows.push(vec![
            label.into(),
            check.into(),
            field(row, "t"),
            value,
            field(row, "bound"),
            viol,
            verdict(outcome.holds),
        ]);
    }
    t.record(|| instance, outcome);
    Ok(())
}

/// `W = 3|t|` on `[−1, 1]` with mass moving from one end to the other: the
/// entropy must rise above the chord.
fn convex_control(quantiles: usize) -> Run<f64> {
    let convex = PLConcave::new_unchecked_concavity((-1.0, 1.0), vec![0.0], vec![0.0], [Some(-3.0), Some(3.0)])?;
    let mu0 = Density1D::uniform(convex.clone(), &IntervalSet::interval(-1.0, -0.5))?;
    let mu1 = Density1D::uniform(convex.clone(), &IntervalSet::interval(0.5, 1.0))?;
    let rep = needlekit_core::interpolate1d::displacement_convexity_check(&convex, &mu0, &mu1, &default_t_grid(), quantiles)?;
    Ok(rep.max_violation)
}

pub fn verify_convexity(files: &ConvexityFiles, quantiles: usize, suite: &SuiteArgs, out: &Out) -> Run {
    let tol = suite.tol.unwrap_or(1e-6);
    let grid = default_t_grid();
    if quantiles == 0 {
        return Err(Failure::Input("--quantiles must be positive".into()));
    }
    if let Some(p) = &files.space {
        let space: PLConcave = read_json(p)?;
        let mut t = Trial::default();
        if let (Some(a), Some(b)) = (&files.mu0, &files.mu1) {
            let (mu0, mu1): (DensityFile, DensityFile) = (read_json(a)?, read_json(b)?);
            let instance =
                Counterexample::Convexity { space: space.clone(), mu0, mu1, t_grid: grid.clone(), quantiles, tol };
            convexity_rows(&mut t, "input", instance)?;
        }
        if let (Some(a), Some(b)) = (&files.set, &files.target) {
            let (omega, target) = (read_json(a)?, read_json(b)?);
            let instance = Counterexample::BrunnMinkowski { space, omega, target, t_grid: grid, tol };
            convexity_rows(&mut t, "input", instance)?;
        }
        if t.checked == 0 {
            return Err(Failure::Input("give --mu0 and --mu1, or --set and --target".into()));
        }
        finish(out, "verify-convexity", "convexity.csv", &CONVEXITY_HEADER, vec![t], None)?;
        return Ok(());
    }
    let trials = run_trials(0..suite.trials.unwrap_or(500), |k| {
        let mut r = trial_rng(suite.seed, k);
        let mut t = Trial::default();
        let shape = if k % 2 == 0 { Shape::Bounded } else { Shape::FiniteWholeLine };
        let space = sample::random_space(&mut r, shape, 5);
        let (lo, hi) = space.domain();
        let (a, b) = (lo.max(-6.0), hi.min(6.0));
        let (c0, c1) = (r.random_range(1..5), r.random_range(1..5));
        let mu0 = DensityFile::from(&sample::random_density(&mut r, &space, a, b, c0));
        let mu1 = DensityFile::from(&sample::random_density(&mut r, &space, a, b, c1));
        let label = k.to_string();
        convexity_rows(
            &mut t,
            &label,
            Counterexample::Convexity { space, mu0, mu1, t_grid: grid.clone(), quantiles, tol },
        )?;

        let space = sample::random_space(&mut r, Shape::ALL[k % 4], 5);
        let (lo, hi) = space.domain();
        let clip = |s: IntervalSet| s.clip(lo.max(-8.0), hi.min(8.0));
        let omega = clip(sample::random_interval_set(&mut r, &space, 2));
        let target = clip(sample::random_interval_set(&mut r, &space, 2));
        if !omega.is_empty() && !target.is_empty() {
            let instance = Counterexample::BrunnMinkowski { space, omega, target, t_grid: grid.clone(), tol };
            convexity_rows(&mut t, &label, instance)?;
        }
        Ok(t)
    })?;
    let mut trials = trials;
    let control = convex_control(quantiles)?;
    trials.push(Trial {
        rows: vec![vec![
            "control".into(),
            "convex_reference".into(),
            String::new(),
            String::new(),
            String::new(),
            fmt_f64(control),
            if control > 1e-3 { "detected" } else { "missed" }.into(),
        ]],
        ..Trial::default()
    });
    finish(out, "verify-convexity", "convexity.csv", &CONVEXITY_HEADER, trials, Some(suite.seed))?;
    if control <= 1e-3 {
        return Err(Failure::Violation(format!(
            "convex control reference shows violation {control}, expected > 1e-3"
        )));
    }
    Ok(())
}

const LEMMA41_HEADER: [&str; 8] = ["trial", "h", "r", "ln_mass", "lhs", "rhs", "ln_lhs", "verdict"];

fn lemma41_trial(k: &str, space: PLConcave, set: IntervalSet, h: f64, r: f64) -> Run<Trial> {
    let mut t = Trial::default();
    let ln_mass = space.log_mass(&set);
    let instance = Counterexample::LongInterval { space, set, h, r };
    let outcome = instance.evaluate()?;
    let rep = &outcome.report;
    t.rows.push(vec![
        k.into(),
        fmt_f64(h),
        fmt_f64(r),
        fmt_f64(ln_mass),
        field(rep, "lhs"),
        field(rep, "rhs"),
        field(rep, "ln_lhs"),
        verdict(outcome.holds),
    ]);
    t.record(|| instance, outcome);
    Ok(t)
}

pub fn verify_lemma41(
    space: Option<&Path>,
    set: Option<&Path>,
    h: Option<f64>,
    r: Option<f64>,
    suite: &SuiteArgs,
    out: &Out,
) -> Run {
    if let Some(p) = space {
        let space: PLConcave = read_json(p)?;
        let set = input::set(set)?;
        let t = lemma41_trial("input", space, set, input::required(h, "h")?, input::required(r, "r")?)?;
        finish(out, "verify-lemma41", "lemma41.csv", &LEMMA41_HEADER, vec![t], None)?;
        return Ok(());
    }
    let trials = run_trials(0..suite.trials.unwrap_or(1000), |k| {
        let mut rng = trial_rng(suite.seed, k);
        // Redraw until the set is small enough for some admissible h R.
        loop {
            let space = sample::long_interval_space(&mut rng);
            let set = sample::random_interval_set(&mut rng, &space, 2);
            let v = space.log_mass(&set).exp();
            if !(v < 1.0) {
                continue;
            }
            let hr = rng.random_range(0.01..1.0) * -v.ln();
            let h = rng.random_range(0.1..3.0);
            return lemma41_trial(&k.to_string(), space, set, h, hr / h);
        }
    })?;
    finish(out, "verify-lemma41", "lemma41.csv", &LEMMA41_HEADER, trials, Some(suite.seed))?;
    Ok(())
}

pub struct SlopeArgs {
    pub h: Option<f64>,
    pub eps: Option<f64>,
    pub l: Option<f64>,
    pub r: Option<f64>,
}

const LEMMA42_HEADER: [&str; 14] = [
    "case",
    "eps",
    "trial",
    "h",
    "l",
    "r",
    "ln_boundary",
    "ln_hypothesis_bound",
    "hypothesis_holds",
    "slope_min",
    "slope_max",
    "lower",
    "upper",
    "verdict",
];

/// One row per instance; inadmissible random instances are kept as rows
/// when `skip_inadmissible` is set instead of ending the run.
fn lemma42_trial(case: &str, trial: &str, instance: Counterexample, skip_inadmissible: bool) -> Run<Trial> {
    let mut t = Trial::default();
    let Counterexample::SlopeWindow { h, eps, l, r, contrapositive, .. } = instance else {
        unreachable!("slope window instance")
    };
    let mut row: Vec<String> = vec![case.into(), fmt_f64(eps), trial.into(), fmt_f64(h), fmt_f64(l), fmt_f64(r)];
    let outcome = match instance.evaluate() {
        Ok(o) => o,
        Err(Failure::Input(_)) if skip_inadmissible => {
            row.extend(std::iter::repeat_n(String::new(), 7));
            row.push("inadmissible".into());
            t.rows.push(row);
            return Ok(t);
        }
        Err(e) => return Err(e),
    };
    let rep = &outcome.report;
    let hyp = rep.get("hypothesis_holds").and_then(Value::as_bool).unwrap_or(false);
    let label = if contrapositive {
        if hyp { "fail" } else { "hypothesis_fails" }
    } else {
        match rep.get("verdict").and_then(Value::as_str) {
            Some("Pass") => "pass",
            Some("Fail") => "fail",
            _ => "hypothesis_not_met",
        }
    };
    row.extend([
        field(rep, "ln_boundary"),
        field(rep, "ln_hypothesis_bound"),
        hyp.to_string(),
        field(rep, "slope_min"),
        field(rep, "slope_max"),
        field(rep, "lower"),
        field(rep, "upper"),
        label.into(),
    ]);
    t.rows.push(row);
    t.record(|| instance, outcome);
    Ok(t)
}

pub fn verify_lemma42(space: Option<&Path>, set: Option<&Path>, a: SlopeArgs, suite: &SuiteArgs, out: &Out) -> Run {
    if let Some(p) = space {
        let space: PLConcave = read_json(p)?;
        let set = input::set(set)?;
        let instance = Counterexample::SlopeWindow {
            space,
            set,
            h: input::required(a.h, "h")?,
            eps: input::required(a.eps, "eps")?,
            l: input::required(a.l, "l")?,
            r: input::required(a.r, "r")?,
            contrapositive: false,
        };
        let t = lemma42_trial("input", "0", instance, false)?;
        finish(out, "verify-lemma42", "lemma42.csv", &LEMMA42_HEADER, vec![t], None)?;
        return Ok(());
    }
    let n = suite.trials.unwrap_or(2000);
    let epsilons = [1e-3f64, 1e-4];
    let mut all = Vec::new();
    for (e, &eps) in epsilons.iter().enumerate() {
        let trials = run_trials(e * n..(e + 1) * n, |k| {
            let mut rng = trial_rng(suite.seed, k);
            let h = rng.random_range(0.5..2.0);
            let d = 2.0 * ((1.0 / eps).ln() + 2.0 * LN2) / (eps * h);
            let b = ((1.0 + 1.0 / eps).ln() + 1.0) / h;
            let space = sample::near_linear(&mut rng, h, eps, d);
            let set = IntervalSet::interval(0.0, b);
            // Largest radius the mass condition allows.
            let r = -space.log_mass(&set) / ((1.0 - eps) * h) * (1.0 - 1e-12);
            let instance = Counterexample::SlopeWindow { space, set, h, eps, l: b, r, contrapositive: false };
            lemma42_trial("random", &k.to_string(), instance, true)
        })?;
        all.extend(trials);
        // Slope 2h on the first half of the domain: the hypothesis must fail.
        let h = 1.0;
        let d = 2.0 * ((1.0 / eps).ln() + 2.0 * LN2) / (eps * h);
        for s2 in [0.0, 0.25, 0.5, 0.9] {
            let w = PLConcave::new((0.0, d), vec![d / 2.0], vec![0.0], [Some(2.0 * h), Some(s2 * h)])?;
            let space = w.shift_values(-w.log_total_mass());
            let r = (d * (1.0 - 2.0 * eps) * h + LN2 + 1.0) / ((1.0 - eps) * h);
            let instance = Counterexample::SlopeWindow {
                space,
                set: IntervalSet::interval(0.0, 1.0),
                h,
                eps,
                l: 1.0,
                r,
                contrapositive: true,
            };
            all.push(lemma42_trial("contrapositive", &format!("s2={s2}"), instance, false)?);
        }
    }
    finish(out, "verify-lemma42", "lemma42.csv", &LEMMA42_HEADER, all, Some(suite.seed))?;
    Ok(())
}
