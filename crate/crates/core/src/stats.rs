//! Small statistics helpers used by the simulation and verification paths.

/// 95% Wilson score interval for a binomial proportion.
///
/// Returns `(low, high)`; degenerate inputs (`trials == 0`) give `(0, 1)`.
pub fn wilson_interval_95(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.96f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // The boundary cases are exact; don't leave rounding residue there.
    let low = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let high = if successes == trials {
        1.0
    } else {
        (center + half).min(1.0)
    };
    (low, high)
}

/// Two-sample Kolmogorov-Smirnov test.
#[derive(Debug, Clone, Copy)]
pub struct KsResult {
    /// Supremum distance between the empirical CDFs.
    pub statistic: f64,
    /// Rejection threshold at the requested level.
    pub threshold: f64,
    pub reject: bool,
}

/// Two-sample KS statistic with the asymptotic threshold
/// `c(alpha) * sqrt((n+m)/(n*m))`, `c(alpha) = sqrt(-ln(alpha/2)/2)`.
pub fn ks_two_sample(a: &[f64], b: &[f64], alpha: f64) -> KsResult {
    assert!(!a.is_empty() && !b.is_empty(), "empty KS sample");
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(|p, q| p.total_cmp(q));
    ys.sort_by(|p, q| p.total_cmp(q));

    let (n, m) = (xs.len(), ys.len());
    let mut i = 0usize;
    let mut j = 0usize;
    let mut stat = 0.0f64;
    while i < n && j < m {
        let t = xs[i].min(ys[j]);
        while i < n && xs[i] <= t {
            i += 1;
        }
        while j < m && ys[j] <= t {
            j += 1;
        }
        let d = (i as f64 / n as f64 - j as f64 / m as f64).abs();
        stat = stat.max(d);
    }
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    let threshold = c * (((n + m) as f64) / ((n * m) as f64)).sqrt();
    KsResult {
        statistic: stat,
        threshold,
        reject: stat > threshold,
    }
}

/// Ordinary least-squares slope of `y` on `x`.
pub fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2, "need at least two points for a slope");
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
    }
    sxy / sxx
}
