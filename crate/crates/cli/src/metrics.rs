//! Image quality metrics.

use crate::error::Result;
use tgv_core::{ScalarField, TgvError};

/// Mean squared difference between two fields of the same geometry.
pub fn mse(u: &ScalarField, reference: &ScalarField) -> Result<f64> {
    if u.geometry() != reference.geometry() {
        return Err(TgvError::GeometryMismatch("mse: image grids differ".into()).into());
    }
    let n = u.values().len() as f64;
    let sum: f64 = u
        .values()
        .iter()
        .zip(reference.values())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sum / n)
}

/// Root mean squared difference.
pub fn rmse(u: &ScalarField, reference: &ScalarField) -> Result<f64> {
    Ok(mse(u, reference)?.sqrt())
}

/// Peak signal-to-noise ratio `10 log10(peak^2 / MSE)` in dB;
/// `+inf` when the images are identical.
pub fn psnr(u: &ScalarField, reference: &ScalarField, peak: f64) -> Result<f64> {
    if !(peak > 0.0) || !peak.is_finite() {
        return Err(TgvError::ContractViolation(format!("peak must be positive, got {peak}")).into());
    }
    let m = mse(u, reference)?;
    if m == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (peak * peak / m).log10())
}
