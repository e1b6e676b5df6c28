//! Commands on a single one-dimensional space.

use needlekit_core::density1d::{
    cheeger_constant, cheeger_ratio, isoperimetric_profile, milman_profile, rigidity_1d, volume_entropy, Attainment,
    IntervalSet, PLConcave, Rigidity,
};
use needlekit_core::io::fmt_f64;

use crate::input;
use crate::output::{Failure, Out, Run};
use crate::svg::line_chart;
use crate::SpaceArgs;

fn load(args: &SpaceArgs) -> Run<PLConcave> {
    input::space_1d(args.space.as_deref(), args.model.as_deref())
}

fn intervals_text(set: &IntervalSet) -> String {
    let parts: Vec<String> =
        set.intervals().iter().map(|&(a, b)| format!("[{},{}]", fmt_f64(a), fmt_f64(b))).collect();
    parts.join(" ")
}

pub fn entropy(args: &SpaceArgs, x0: Option<f64>, out: &Out) -> Run {
    let space = load(args)?;
    let x0 = x0.unwrap_or(space.breakpoints()[0]);
    let rep = volume_entropy(&space, x0)?;
    let row = vec![fmt_f64(x0), fmt_f64(rep.h), fmt_f64(rep.estimator_slope), fmt_f64(rep.window.0), fmt_f64(rep.window.1)];
    out.csv("entropy.csv", &["x0", "h", "estimator_slope", "window_lo", "window_hi"], &[row])?;
    println!("entropy: h = {}, estimator slope = {}", rep.h, rep.estimator_slope);
    Ok(())
}

/// Values of `b` spanning the breakpoints with some margin, inside the domain.
fn b_grid(space: &PLConcave, points: usize) -> Vec<f64> {
    let bps = space.breakpoints();
    let (lo, hi) = space.domain();
    let a = (bps[0] - 5.0).max(lo);
    let b = (bps[bps.len() - 1] + 5.0).min(hi);
    let n = points.max(2);
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).filter(|&x| x > lo && x < hi).collect()
}

pub fn cheeger(args: &SpaceArgs, points: usize, out: &Out, svg: bool) -> Run {
    let space = load(args)?;
    let c = cheeger_constant(&space)?;
    let (attained, lo, hi) = match &c.attainment {
        Attainment::Attained(set) => {
            (true, set.inf().map(fmt_f64).unwrap_or_default(), set.sup().map(fmt_f64).unwrap_or_default())
        }
        Attainment::NotAttained => (false, String::new(), String::new()),
    };
    out.csv("cheeger.csv", &["mu", "attained", "minimizer_lo", "minimizer_hi"], &[vec![
        fmt_f64(c.mu),
        attained.to_string(),
        lo,
        hi,
    ]])?;

    let (dlo, dhi) = space.domain();
    let bs = b_grid(&space, points);
    let ratio = |set: IntervalSet| cheeger_ratio(&space, &set);
    let left: Vec<Option<f64>> = bs.iter().map(|&b| ratio(IntervalSet::interval(dlo, b))).collect();
    let right: Vec<Option<f64>> = bs.iter().map(|&b| ratio(IntervalSet::interval(b, dhi))).collect();
    let cell = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    let rows: Vec<Vec<String>> =
        (0..bs.len()).map(|k| vec![fmt_f64(bs[k]), cell(left[k]), cell(right[k])]).collect();
    out.csv("cheeger_curve.csv", &["b", "left_ratio", "right_ratio"], &rows)?;
    if svg {
        // Plot whichever half-line family has finite mass.
        let (label, ys) = if left.iter().any(Option::is_some) { ("(lo, b]", &left) } else { ("[b, hi)", &right) };
        let ys: Vec<f64> = ys.iter().map(|v| v.unwrap_or(f64::NAN)).collect();
        out.text("cheeger_curve.svg", &line_chart(&format!("Cheeger ratio of {label}"), "b", "m+/m", &bs, &ys))?;
    }
    println!("cheeger: mu = {}, attained = {attained}", c.mu);
    Ok(())
}

pub fn profile(args: &SpaceArgs, milman: Option<f64>, points: usize, out: &Out, svg: bool) -> Run {
    let n = points.max(1);
    let (vs, values, name) = if let Some(d) = milman {
        if args.space.is_some() || args.model.is_some() {
            return Err(Failure::Input("--milman takes no space".into()));
        }
        let vs: Vec<f64> = (1..=n).map(|k| 0.5 * k as f64 / n as f64).collect();
        let values = vs.iter().map(|&v| milman_profile(d, v)).collect::<Result<Vec<_>, _>>()?;
        let rows: Vec<Vec<String>> = vs.iter().zip(&values).map(|(v, p)| vec![fmt_f64(*v), fmt_f64(*p)]).collect();
        out.csv("milman.csv", &["v", "profile"], &rows)?;
        (vs, values, "milman")
    } else {
        let space = load(args)?;
        let total = space.log_total_mass().exp();
        if !total.is_finite() {
            return Err(Failure::Input("the isoperimetric profile needs a finite-mass space".into()));
        }
        let vs: Vec<f64> = (1..=n).map(|k| total * k as f64 / (n + 1) as f64).collect();
        let mut rows = Vec::with_capacity(n);
        let mut values = Vec::with_capacity(n);
        for &v in &vs {
            let p = isoperimetric_profile(&space, v)?;
            rows.push(vec![fmt_f64(v), fmt_f64(p.value), intervals_text(&p.minimizer)]);
            values.push(p.value);
        }
        out.csv("profile.csv", &["v", "profile", "minimizer"], &rows)?;
        (vs, values, "profile")
    };
    if svg {
        out.text(&format!("{name}.svg"), &line_chart("Isoperimetric profile", "v", "I(v)", &vs, &values))?;
    }
    println!("{name}: {} volumes", vs.len());
    Ok(())
}

pub fn rigidity(args: &SpaceArgs, out: &Out) -> Run {
    let space = load(args)?;
    let row = match rigidity_1d(&space)? {
        Rigidity::Rigid { b, h } => vec!["true".into(), fmt_f64(b), fmt_f64(h)],
        Rigidity::NotRigid => vec!["false".into(), String::new(), String::new()],
    };
    println!("rigidity1d: rigid = {}", row[0]);
    out.csv("rigidity.csv", &["rigid", "b", "h"], &[row])?;
    Ok(())
}
