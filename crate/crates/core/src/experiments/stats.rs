/// Mean and standard error (sample standard deviation over `√m`).
///
/// Infinite entries make both infinite; an empty slice gives NaN.
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let m = values.len();
    if m == 0 {
        return (f64::NAN, f64::NAN);
    }
    if values.iter().any(|v| v.is_infinite()) {
        return (f64::INFINITY, f64::INFINITY);
    }
    let mean = values.iter().sum::<f64>() / m as f64;
    if m == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m as f64 - 1.0);
    (mean, (var / m as f64).sqrt())
}

/// Least-squares slope of `y` against `x`.
pub fn slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Whether `mean ± 2 se` bands of two estimates overlap.
pub fn bands_overlap(a: (f64, f64), b: (f64, f64)) -> bool {
    (a.0 - b.0).abs() <= 2.0 * (a.1 + b.1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_se() {
        let (m, s) = mean_se(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_se(&[4.0]), (4.0, 0.0));
        assert!(mean_se(&[]).0.is_nan());
        assert_eq!(mean_se(&[1.0, f64::INFINITY]).0, f64::INFINITY);
    }

    #[test]
    fn line_fit() {
        let pts: Vec<(f64, f64)> = (0..5).map(|i| (i as f64, 3.0 - 0.5 * i as f64)).collect();
        assert!((slope(&pts).unwrap() + 0.5).abs() < 1e-14);
        assert!(slope(&pts[..1]).is_none());
        assert!(slope(&[(1.0, 0.0), (1.0, 2.0)]).is_none());
    }

    #[test]
    fn overlap() {
        assert!(bands_overlap((1.0, 0.1), (1.3, 0.06)));
        assert!(!bands_overlap((1.0, 0.1), (1.5, 0.1)));
    }
}
