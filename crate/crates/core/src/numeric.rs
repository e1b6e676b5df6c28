//! Small numeric helpers shared across modules.

/// `ln(e^a + e^b)` without overflow. Either argument may be `-inf`.
#[inline]
pub fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a == f64::INFINITY || b == f64::INFINITY {
        return f64::INFINITY;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln Σ e^{x_i}`; `-inf` for an empty iterator.
pub fn log_sum_exp<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    xs.into_iter().fold(f64::NEG_INFINITY, log_add)
}

/// Ordinary least-squares slope of `ys` against `xs`.
///
/// Returns `None` with fewer than two points or zero spread in `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    if sxx <= 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// `a >= b` up to a relative slack of `rel` (absolute near zero).
#[inline]
pub fn ge_tol(a: f64, b: f64, rel: f64) -> bool {
    a >= b - rel * (1.0 + a.abs().max(b.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_add_matches_direct_sum() {
        let v = log_add(1.0_f64.ln(), 2.0_f64.ln());
        assert!((v - 3.0_f64.ln()).abs() < 1e-15);
        assert_eq!(log_add(f64::NEG_INFINITY, 0.5), 0.5);
        assert!((log_add(800.0, 800.0) - (800.0 + 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn ls_slope_recovers_line() {
        let xs: Vec<f64> = (0..10).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 1.0).collect();
        assert!((ls_slope(&xs, &ys).unwrap() - 3.0).abs() < 1e-12);
        assert!(ls_slope(&[1.0], &[1.0]).is_none());
    }
}
