//! Small numeric helpers shared across the crate.

pub mod interp;

/// Compensated (Kahan-Babuska-Neumaier) sum of an iterator of f64 terms.
pub fn kahan_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            c += (sum - s) + t;
        } else {
            c += (t - s) + sum;
        }
        sum = s;
    }
    sum + c
}

/// Least-squares line fit `y = a + b x`; returns `(a, b, r_squared)`.
///
/// `r_squared` is 1 for a perfect fit and degrades toward 0; fitting fewer
/// than two points or a degenerate abscissa returns `b = 0, r_squared = 0`.
pub fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    if x.len() < 2 {
        return (y.first().copied().unwrap_or(0.0), 0.0, 0.0);
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|&v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(&u, &v)| (u - mx) * (v - my)).sum();
    let syy: f64 = y.iter().map(|&v| (v - my) * (v - my)).sum();
    if sxx == 0.0 {
        return (my, 0.0, 0.0);
    }
    let b = sxy / sxx;
    let a = my - b * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(&u, &v)| {
            let e = v - (a + b * u);
            e * e
        })
        .sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    (a, b, r2)
}

/// Log-log slope fit for scaling studies: fits `log y = a + p log x`.
/// Returns `(p, r_squared)`. Non-positive samples are rejected with `None`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    if x.iter().any(|&v| v <= 0.0) || y.iter().any(|&v| v <= 0.0) {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|&v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|&v| v.ln()).collect();
    let (_, p, r2) = line_fit(&lx, &ly);
    Some((p, r2))
}

/// Format a float for CSV output: shortest round-trip representation,
/// deterministic across runs and thread counts.
pub fn fmt_f64(v: f64) -> String {
    let mut s = format!("{v}");
    if !s.contains('.') && !s.contains('e') && !s.contains("inf") && !s.contains("NaN") {
        s.push_str(".0");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_fit_recovers_exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|&v| 2.5 - 0.75 * v).collect();
        let (a, b, r2) = line_fit(&x, &y);
        assert!((a - 2.5).abs() < 1e-12);
        assert!((b + 0.75).abs() < 1e-12);
        assert!((r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn loglog_slope_recovers_power() {
        let x: [f64; 4] = [0.2, 0.1, 0.05, 0.025];
        let y: Vec<f64> = x.iter().map(|&v| 3.0 * v.powf(1.5)).collect();
        let (p, r2) = loglog_slope(&x, &y).unwrap();
        assert!((p - 1.5).abs() < 1e-10);
        assert!(r2 > 0.999_999);
    }

    #[test]
    fn kahan_sum_beats_naive_on_adversarial_input() {
        let terms = [1.0e16, 1.0, -1.0e16];
        assert_eq!(kahan_sum(terms.iter().copied()), 1.0);
        let naive: f64 = terms.iter().sum();
        assert_eq!(naive, 0.0); // demonstrates why compensation matters
    }
}
