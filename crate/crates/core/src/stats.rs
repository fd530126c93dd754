//! Small least-squares helpers shared by the fitting routines.

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope; infinite with fewer than three points.
    pub slope_stderr: f64,
    pub rms_residual: f64,
}

/// Ordinary least squares `y ≈ slope · x + intercept`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> LinearFit {
    weighted_linear_fit(x, y, &vec![1.0; x.len()])
}

/// Weighted least squares with nonnegative weights `w`. Degenerate inputs
/// (fewer than two distinct abscissae) give a NaN slope.
pub fn weighted_linear_fit(x: &[f64], y: &[f64], w: &[f64]) -> LinearFit {
    assert!(x.len() == y.len() && x.len() == w.len());
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for ((xi, yi), wi) in x.iter().zip(y).zip(w) {
        sxx += wi * (xi - mx) * (xi - mx);
        sxy += wi * (xi - mx) * (yi - my);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { f64::NAN };
    let intercept = my - slope * mx;
    let mut ssr = 0.0;
    for ((xi, yi), wi) in x.iter().zip(y).zip(w) {
        let r = yi - slope * xi - intercept;
        ssr += wi * r * r;
    }
    let n = x.len() as f64;
    let slope_stderr = if x.len() > 2 && sxx > 0.0 {
        // Weights rescaled to sum to n so the usual n-2 dof estimate applies.
        let sigma2 = ssr * n / sw / (n - 2.0);
        (sigma2 / (sxx * n / sw)).sqrt()
    } else {
        f64::INFINITY
    };
    LinearFit { slope, intercept, slope_stderr, rms_residual: (ssr / sw).sqrt() }
}
