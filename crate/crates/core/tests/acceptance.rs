//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use needlekit_core::density1d::*;
use needlekit_core::interpolate1d::*;
use needlekit_core::localize::*;
use needlekit_core::models::*;
use needlekit_core::sample::{self, Shape};
use needlekit_core::Error;
use rand::Rng;

use common::*;

const INF: f64 = f64::INFINITY;
const LN2: f64 = std::f64::consts::LN_2;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_time(t: Instant, limit: Duration) -> Result<(), String> {
    ensure(t.elapsed() < limit, || format!("took {:?}, limit {:?}", t.elapsed(), limit))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Log-linear spaces: Cheeger constant, volume entropy and slope agree, a
/// half-line attains, and half-lines have boundary exactly `h` times mass.
fn c01_log_linear_equality() -> Outcome {
    let t0 = Instant::now();
    let mut r = sample::rng(101);
    for h in [0.5, 1.0, 2.0] {
        let m = build_1d(&ModelSpec::LogLinear { h }).map_err(|e| e.to_string())?;
        let c = cheeger_constant(&m.space).map_err(|e| e.to_string())?;
        let e = volume_entropy(&m.space, 0.0).map_err(|e| e.to_string())?;
        ensure((c.mu - h).abs() < 1e-9, || format!("h={h}: mu={}", c.mu))?;
        ensure((e.h - h).abs() < 1e-9, || format!("h={h}: entropy={}", e.h))?;
        let Attainment::Attained(set) = &c.attainment else {
            return Err(format!("h={h}: infimum reported as not attained"));
        };
        ensure(set.len() == 1 && set.inf() == Some(-INF), || format!("h={h}: minimizer {set:?}"))?;
        for _ in 0..10 {
            let b = r.random_range(-20.0..20.0);
            let set = IntervalSet::left_half_line(b);
            let Mass::Finite(v) = mass(&m.space, &set) else { return Err("infinite half-line".into()) };
            let plus = minkowski_content(&m.space, &set);
            ensure(rel(plus, h * v) < 1e-12, || format!("h={h}, b={b}: m+={plus}, h m={}", h * v))?;
            // Closed form e^{hb}/h, independent of the library.
            ensure(rel(v, (h * b).exp() / h) < 1e-12, || format!("h={h}, b={b}: mass {v}"))?;
        }
    }
    within_time(t0, Duration::from_secs(1))?;
    Ok(format!("3 slopes, 30 half-lines, {:?}", t0.elapsed()))
}

/// `m+(Ω) >= h m(Ω)` with `h` the volume entropy, over random spaces and sets.
fn c02_isoperimetric_inequality() -> Outcome {
    let t0 = Instant::now();
    let mut r = sample::rng(202);
    let mut checked = 0;
    let mut oracle_checked = 0;
    for k in 0..10_000 {
        let shape = Shape::ALL[k % 4];
        let space = sample::random_space(&mut r, shape, 6);
        let h = volume_entropy(&space, space.breakpoints()[0]).map_err(|e| e.to_string())?.h;
        let set = sample::random_interval_set(&mut r, &space, 3);
        let Mass::Finite(v) = mass(&space, &set) else { continue };
        let plus = minkowski_content(&space, &set);
        ensure(plus >= h * v - 1e-9 * (h * v).max(1e-300), || {
            format!("violation #{k}: {space:?} {set:?}: m+={plus} < h m={}", h * v)
        })?;
        if k % 50 == 0 && set.is_bounded() {
            let q = quad_set_mass(&space, &set);
            ensure(rel(q, v) < 1e-9, || format!("mass {v} vs quadrature {q} on {space:?} {set:?}"))?;
            let bd = boundary_by_density(&space, &set);
            ensure(rel(bd, plus) < 1e-12 || (bd == 0.0 && plus == 0.0), || format!("m+ {plus} vs {bd}"))?;
            oracle_checked += 1;
        }
        checked += 1;
    }
    within_time(t0, Duration::from_secs(30))?;
    Ok(format!("{checked} finite-mass sets, 0 violations, {oracle_checked} quadrature cross-checks, {:?}", t0.elapsed()))
}

fn c03_long_interval_lemma() -> Outcome {
    let t0 = Instant::now();
    let mut r = sample::rng(303);
    let mut admissible = 0;
    while admissible < 1000 {
        let space = sample::long_interval_space(&mut r);
        let omega = sample::random_interval_set(&mut r, &space, 2);
        let v = space.log_mass(&omega).exp();
        if !(v < 1.0) {
            continue;
        }
        let hr = r.random_range(0.01..1.0) * -v.ln();
        let h = r.random_range(0.1..3.0);
        let rep = lemma_1dim_check(&space, &omega, h, hr / h).map_err(|e| e.to_string())?;
        ensure(rep.holds, || format!("violation: {space:?} {omega:?} h={h} R={}: {rep:?}", hr / h))?;
        admissible += 1;
    }
    // W = -t on [0, 10], set [9, 10], h = 0.9, R = 10.
    let w = PLConcave::affine((0.0, 10.0), 0.0, -1.0).map_err(|e| e.to_string())?;
    let omega = IntervalSet::interval(9.0, 10.0);
    let rep = lemma_1dim_check(&w, &omega, 0.9, 10.0).map_err(|e| e.to_string())?;
    let lhs = (-9.0f64).exp();
    let rhs = quad_set_mass(&w, &omega) * (-LN2 + 9.0) / 10.0;
    ensure(rel(rep.lhs, lhs) < 1e-12, || format!("example lhs {}", rep.lhs))?;
    ensure(rel(rep.rhs, rhs) < 1e-9, || format!("example rhs {} vs oracle {rhs}", rep.rhs))?;
    ensure(rep.holds, || "example does not hold".into())?;
    Ok(format!(
        "1000 admissible instances, 0 violations; example lhs={:.4e} >= rhs={:.5e}, {:?}",
        rep.lhs,
        rep.rhs,
        t0.elapsed()
    ))
}

fn c04_quantitative_lemma() -> Outcome {
    let t0 = Instant::now();
    let mut r = sample::rng(404);
    let mut summary = Vec::new();
    for eps in [1e-3f64, 1e-4] {
        let mut passes = 0;
        let mut informative = 0;
        let mut rejected = 0;
        for _ in 0..12_000 {
            let h = r.random_range(0.5..2.0);
            let d = 2.0 * ((1.0 / eps).ln() + 2.0 * LN2) / (eps * h);
            let b = ((1.0 + 1.0 / eps).ln() + 1.0) / h;
            let space = sample::near_linear(&mut r, h, eps, d);
            let omega = IntervalSet::interval(0.0, b);
            // Largest radius the mass condition allows.
            let rr = -space.log_mass(&omega) / ((1.0 - eps) * h) * (1.0 - 1e-12);
            let rep = match quantitative_rigidity_check(&space, &omega, h, eps, b, rr) {
                Ok(rep) => rep,
                Err(Error::Precondition(_)) => {
                    rejected += 1;
                    continue;
                }
                Err(e) => return Err(e.to_string()),
            };
            if rep.verdict == RigidityVerdict::HypothesisNotMet {
                rejected += 1;
                continue;
            }
            ensure(rep.verdict == RigidityVerdict::Pass, || format!("eps={eps}: {space:?}: {rep:?}"))?;
            passes += 1;
            let all = space.slopes();
            let band = (1.0 - 4.0 * eps) * h..=(1.0 + 3.0 * eps.sqrt()) * h;
            if all.iter().any(|s| !band.contains(s)) {
                informative += 1;
            }
        }
        ensure(passes >= 100, || format!("eps={eps}: only {passes} admissible instances"))?;
        ensure(informative > 0, || format!("eps={eps}: no admissible instance leaves the band anywhere"))?;

        // Slope 2h on the first half: the hypothesis must fail.
        let h = 1.0;
        let d = 2.0 * ((1.0 / eps).ln() + 2.0 * LN2) / (eps * h);
        let mut contra = 0;
        for s2 in [0.0, 0.25, 0.5, 0.9] {
            let w = PLConcave::new((0.0, d), vec![d / 2.0], vec![0.0], [Some(2.0 * h), Some(s2 * h)]).unwrap();
            let w = w.shift_values(-w.log_total_mass());
            let b = 1.0;
            let omega = IntervalSet::interval(0.0, b);
            let rr = (d * (1.0 - 2.0 * eps) * h + LN2 + 1.0) / ((1.0 - eps) * h);
            let rep = quantitative_rigidity_check(&w, &omega, h, eps, b, rr)
                .map_err(|e| format!("eps={eps}, s2={s2}: contrapositive instance inadmissible: {e}"))?;
            ensure(!rep.hypothesis_holds, || format!("eps={eps}, s2={s2}: hypothesis holds: {rep:?}"))?;
            contra += 1;
        }
        summary.push(format!(
            "eps={eps:e}: {passes} pass ({informative} with slopes outside the band beyond the window), {rejected} rejected, {contra} slope-2h instances fail the hypothesis"
        ));
    }
    within_time(t0, Duration::from_secs(10))?;
    Ok(format!("{}; {:?}", summary.join("; "), t0.elapsed()))
}

fn c05_rigidity() -> Outcome {
    let t0 = Instant::now();
    let mut r = sample::rng(505);
    for _ in 0..20 {
        let h = r.random_range(0.1..3.0);
        let w = PLConcave::affine((-INF, INF), r.random_range(-2.0..2.0), h).unwrap();
        let v = rigidity_1d(&w).map_err(|e| e.to_string())?;
        ensure(matches!(v, Rigidity::Rigid { h: hh, .. } if (hh - h).abs() < 1e-12), || format!("affine h={h}: {v:?}"))?;
    }
    for _ in 0..100 {
        let w = sample::random_space(&mut r, Shape::InfiniteWholeLine, 4);
        ensure(w.slopes().len() >= 2, || "perturbation has no kink".into())?;
        let v = rigidity_1d(&w).map_err(|e| e.to_string())?;
        ensure(v == Rigidity::NotRigid, || format!("{w:?}: {v:?}"))?;
    }
    within_time(t0, Duration::from_secs(1))?;
    Ok(format!("20 affine rigid, 100 kinked not rigid, {:?}", t0.elapsed()))
}

fn c06_neighborhood_growth() -> Outcome {
    let mut r = sample::rng(606);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let h = r.random_range(0.2..3.0);
        let m = build_1d(&ModelSpec::LogLinear { h }).map_err(|e| e.to_string())?;
        let b = r.random_range(-5.0..5.0);
        let sigma = r.random_range(0.01..4.0);
        let omega = IntervalSet::left_half_line(b);
        let rep = neighborhood_growth_check(&m.space, &omega, sigma).map_err(|e| e.to_string())?;
        ensure(rep.holds, || format!("h={h} b={b} sigma={sigma}: {rep:?}"))?;
        let grown = rep.ln_mass_grown.exp();
        let expected = (h * b).exp() / h * (sigma * h).exp();
        worst = worst.max(rel(grown, expected));
        ensure(rel(grown, expected) < 1e-12, || format!("h={h} b={b} sigma={sigma}: {grown} vs {expected}"))?;
    }
    Ok(format!("20 pairs, worst relative error {worst:.1e}"))
}

fn c07_convexity() -> Outcome {
    let t0 = Instant::now();
    let mut r = sample::rng(707);
    let grid = default_t_grid();
    let mut worst = f64::NEG_INFINITY;
    for k in 0..500 {
        let shape = if k % 2 == 0 { Shape::Bounded } else { Shape::FiniteWholeLine };
        let space = sample::random_space(&mut r, shape, 5);
        let (lo, hi) = space.domain();
        let (a, b) = (lo.max(-6.0), hi.min(6.0));
        let (c0, c1) = (r.random_range(1..5), r.random_range(1..5));
        let mu0 = sample::random_density(&mut r, &space, a, b, c0);
        let mu1 = sample::random_density(&mut r, &space, a, b, c1);
        let rep = displacement_convexity_check(&space, &mu0, &mu1, &grid, DEFAULT_QUANTILES)
            .map_err(|e| e.to_string())?;
        worst = worst.max(rep.max_violation);
        ensure(rep.max_violation <= 1e-6, || format!("pair {k}: {space:?}: {rep:?}"))?;
    }
    let mut worst_bm = f64::NEG_INFINITY;
    for k in 0..500 {
        let space = sample::random_space(&mut r, Shape::ALL[k % 4], 5);
        let (lo, hi) = space.domain();
        let clip = |s: IntervalSet| s.clip(lo.max(-8.0), hi.min(8.0));
        let omega = clip(sample::random_interval_set(&mut r, &space, 2));
        let b = clip(sample::random_interval_set(&mut r, &space, 2));
        if omega.is_empty() || b.is_empty() {
            continue;
        }
        let rep = brunn_minkowski_check(&space, &omega, &b, &grid).map_err(|e| e.to_string())?;
        let v = rep.rows.iter().map(|row| row.bound - row.ln_mass).fold(f64::NEG_INFINITY, f64::max);
        worst_bm = worst_bm.max(v);
        ensure(v <= 1e-6 && rep.holds, || format!("pair {k}: {space:?} {omega:?} {b:?}: {rep:?}"))?;
    }
    // Convex log-density: W = 3|t| on [-1, 1].
    let convex = PLConcave::new_unchecked_concavity((-1.0, 1.0), vec![0.0], vec![0.0], [Some(-3.0), Some(3.0)])
        .map_err(|e| e.to_string())?;
    let mu0 = Density1D::uniform(convex.clone(), &IntervalSet::interval(-1.0, -0.5)).map_err(|e| e.to_string())?;
    let mu1 = Density1D::uniform(convex.clone(), &IntervalSet::interval(0.5, 1.0)).map_err(|e| e.to_string())?;
    let neg = displacement_convexity_check(&convex, &mu0, &mu1, &grid, DEFAULT_QUANTILES).map_err(|e| e.to_string())?;
    ensure(neg.max_violation > 1e-3, || format!("convex control violation only {}", neg.max_violation))?;
    within_time(t0, Duration::from_secs(60))?;
    Ok(format!(
        "500 entropy pairs (max violation {worst:.2e}), 500 set pairs (max violation {worst_bm:.2e}), convex control violation {:.3}, {:?}",
        neg.max_violation,
        t0.elapsed()
    ))
}

fn c08_growth_inequality() -> Outcome {
    let mut r = sample::rng(808);
    for k in 0..1000 {
        let space = sample::random_space(&mut r, Shape::ALL[k % 4], 6);
        let (lo, hi) = space.domain();
        let x0 = r.random_range(lo.max(-6.0)..hi.min(6.0));
        let eps = r.random_range(0.01..2.0);
        let rr = eps + r.random_range(0.01..10.0);
        let delta = r.random_range(0.01..10.0);
        let rep = entropy_growth_inequality_check(&space, x0, rr, delta, eps).map_err(|e| e.to_string())?;
        ensure(rep.holds, || format!("#{k}: {space:?} x0={x0} r={rr} delta={delta} eps={eps}: {rep:?}"))?;
    }
    Ok("1000 instances, 0 violations".into())
}

fn small_space(r: &mut sample::SampleRng, n: usize) -> DiscreteSpace {
    if r.random_bool(0.5) {
        let dim = r.random_range(1..4);
        sample::random_discrete_space(r, n, dim, 3.0)
    } else {
        let mut d = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let x = r.random_range(0.5..3.0);
                d[i][j] = x;
                d[j][i] = x;
            }
        }
        let weights = (0..n).map(|_| r.random_range(0.5..2.0)).collect();
        DiscreteSpace::from_distances(shortest_paths(d), weights).unwrap()
    }
}

fn c09_transport_optimality() -> Outcome {
    let t0 = Instant::now();
    let mut r = sample::rng(909);
    let mut worst = 0.0f64;
    for k in 0..500 {
        let n = r.random_range(2..=8);
        let space = small_space(&mut r, n);
        let mut g = sample::random_balanced(&mut r, &space);
        // Idle points exercise the potential extension.
        if n > 3 && r.random_bool(0.5) {
            let i = r.random_range(2..n);
            let w = space.weights();
            g.g[i] = 0.0;
            let (pos, neg): (f64, f64) = (0..n).fold((0.0, 0.0), |(p, q), j| {
                let m = g.g[j] * w[j];
                if m > 0.0 { (p + m, q) } else { (p, q - m) }
            });
            for x in g.g.iter_mut().filter(|x| **x < 0.0) {
                *x *= pos / neg;
            }
        }
        let sol = solve_l1(&space, &g).map_err(|e| e.to_string())?;
        let lp = lp_transport_cost(&space, &g);
        let err = (sol.total_cost - lp).abs();
        worst = worst.max(err);
        ensure(err <= 1e-9 * lp.max(1.0), || format!("#{k}: cost {} vs LP {lp}", sol.total_cost))?;
        let lip = sol.lipschitz_excess(&space);
        ensure(lip <= 1e-9, || format!("#{k}: Lipschitz excess {lip}"))?;
        let gap = sol.slackness_gap();
        ensure(gap <= 1e-9, || format!("#{k}: slackness gap {gap}"))?;
        let net = sol.net_outflow(n);
        for i in 0..n {
            ensure((net[i] - g.g[i] * space.weights()[i]).abs() < 1e-9, || format!("#{k}: conservation at {i}"))?;
        }
    }
    Ok(format!("500 spaces of 2..8 points, worst cost gap {worst:.1e}, {:?}", t0.elapsed()))
}

fn c10_splitting() -> Outcome {
    let t0 = Instant::now();
    let spec = ModelSpec::ProductStrip { h: 1.0, n_rows: 10, n_cols: 200, spacing: 0.05 };
    let strip = build_strip(&spec).map_err(|e| e.to_string())?;
    let run = |mask: &[bool]| -> Result<(NeedleReport, SplitVerdict), String> {
        let g = balanced_function(&strip.space, mask, strip.center, strip.radius).map_err(|e| e.to_string())?;
        let sol = solve_l1(&strip.space, &g).map_err(|e| e.to_string())?;
        let rep = extract_needles(&strip.space, &g, &sol);
        let verdict = splitting_detector(&strip.space, &rep.needles, mask, SplitOptions::default())
            .map_err(|e| e.to_string())?;
        Ok((rep, verdict))
    };
    let (rep, verdict) = run(&strip.omega_mask)?;
    let exact = rep.needles.iter().filter(|q| strip.rows.contains(&q.points)).count();
    ensure(exact * 100 >= 95 * rep.needles.len() && !rep.needles.is_empty(), || {
        format!("{exact} of {} needles are rows", rep.needles.len())
    })?;
    let mut worst_balance = 0.0f64;
    let mut worst_slope = 0.0f64;
    for q in &rep.needles {
        let d = needle_diagnostics(q).map_err(|e| e.to_string())?;
        if !q.touches_boundary {
            worst_balance = worst_balance.max(d.balance.abs());
        }
        worst_slope = worst_slope.max((d.slope_fit - strip.h).abs() / strip.h);
    }
    ensure(worst_balance <= 1e-8, || format!("needle balance {worst_balance}"))?;
    ensure(worst_slope <= 0.05, || format!("slope error {worst_slope}"))?;
    ensure(verdict.splits, || format!("half-strip not detected: {verdict:?}"))?;
    ensure((verdict.h_est - strip.h).abs() <= 2.0 * strip.spacing * strip.h, || format!("h_est {}", verdict.h_est))?;
    let (_, wedge) = run(&strip.wedge_mask(0.5))?;
    ensure(!wedge.splits, || "wedge control reported a split".into())?;
    within_time(t0, Duration::from_secs(120))?;
    Ok(format!(
        "{exact}/{} needles are rows, balance {worst_balance:.1e}, slope error {worst_slope:.1e}, h_est {:.6}, wedge splits=false, {:?}",
        rep.needles.len(),
        verdict.h_est,
        t0.elapsed()
    ))
}

fn c11_milman() -> Outcome {
    let mut r = sample::rng(1111);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let d = r.random_range(0.2..5.0);
        let v = r.random_range(0.01..0.5);
        let p = milman_profile(d, v).map_err(|e| e.to_string())?;
        let o = milman_grid(d, v, 1_000_000, 1e-12, 1e6);
        worst = worst.max((p - o).abs());
        ensure((p - o).abs() <= 1e-8, || format!("D={d} v={v}: {p} vs grid {o}"))?;
    }
    let half = milman_profile(1.0, 0.5).map_err(|e| e.to_string())?;
    ensure((half - 1.0).abs() < 1e-12, || format!("I(1/2) = {half}"))?;
    Ok(format!("100 (D, v) pairs, worst gap to grid {worst:.1e}; I(0.5, D=1) = {half}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("log-linear equality case", c01_log_linear_equality),
        ("isoperimetric inequality", c02_isoperimetric_inequality),
        ("long-interval lemma", c03_long_interval_lemma),
        ("quantitative slope lemma", c04_quantitative_lemma),
        ("one-dimensional rigidity", c05_rigidity),
        ("neighborhood growth", c06_neighborhood_growth),
        ("displacement convexity and Brunn-Minkowski", c07_convexity),
        ("ball growth inequality", c08_growth_inequality),
        ("L1 transport optimality", c09_transport_optimality),
        ("product splitting signature", c10_splitting),
        ("Milman profile", c11_milman),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match outcome {
            Ok(msg) => println!("PASS {:>2} {name}: {msg}", k + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {msg}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
