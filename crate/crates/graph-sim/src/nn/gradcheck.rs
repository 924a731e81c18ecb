//! Central finite-difference utilities used by the gradient-verification
//! suites. These stay independent of the layer backward implementations.

/// Central difference gradient of a scalar function at `x`.
pub fn central_difference<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x: &[f64],
    step: f64,
) -> Vec<f64> {
    let mut grad = vec![0.0; x.len()];
    let mut probe = x.to_vec();
    for k in 0..x.len() {
        probe[k] = x[k] + step;
        let plus = f(&probe);
        probe[k] = x[k] - step;
        let minus = f(&probe);
        probe[k] = x[k];
        grad[k] = (plus - minus) / (2.0 * step);
    }
    grad
}

/// Worst relative error between two gradient vectors, with a small floor so
/// near-zero entries compare absolutely.
pub fn max_relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(1e-6))
        .fold(0.0, f64::max)
}

/// Default step for the checks in this crate.
pub const FD_STEP: f64 = 1e-5;

/// Required agreement between analytic and central-difference gradients.
pub const FD_TOLERANCE: f64 = 1e-4;
