//! Small statistics helpers shared by the validation code.

/// Least-squares slope of `y` against `x`.
pub fn regression_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    if points.len() < 2 {
        return f64::NAN;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Weighted mean and (population) variance of scalar samples.
pub fn weighted_mean_var(samples: impl Iterator<Item = (f64, f64)>) -> (f64, f64, f64) {
    let (mut w_sum, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for (x, w) in samples {
        w_sum += w;
        m1 += w * x;
        m2 += w * x * x;
    }
    if w_sum == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let mean = m1 / w_sum;
    (mean, (m2 / w_sum - mean * mean).max(0.0), w_sum)
}
