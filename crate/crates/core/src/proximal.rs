//! Resolvent and projection maps used by the saddle-point solver.
//!
//! The two dual-ball projections realize the constraint sets of the TGV
//! dual formulation; the tensor ball uses the same doubled-xy magnitude as
//! the primal norm, so the pair is exactly polar. The data-term resolvent
//! is the closed-form prox of the conjugate of a squared-L2 fidelity.

use crate::error::{Result, TgvError};
use crate::fields::{ScalarField, SymTensorField, VectorField};

fn ensure_radius(radius: f64) -> Result<()> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(TgvError::ContractViolation(format!(
            "projection radius must be positive and finite, got {radius}"
        )));
    }
    Ok(())
}

/// Pointwise radial projection onto the Euclidean ball of the given radius:
/// `p <- p / max(1, |p| / radius)`. Idempotent and nonexpansive.
///
/// The scale factor is shaved by single ulps until the recomputed magnitude
/// is feasible, so projecting twice reproduces the first output exactly.
pub fn proj_ball_vec(p: &VectorField, radius: f64) -> Result<VectorField> {
    ensure_radius(radius)?;
    let mut out = p.clone();
    let (x, y) = out.channels_mut();
    for i in 0..x.len() {
        let mag = x[i].hypot(y[i]);
        if mag > radius {
            let mut s = radius / mag;
            let (mut nx, mut ny) = (x[i] * s, y[i] * s);
            while nx.hypot(ny) > radius {
                s *= 1.0 - f64::EPSILON;
                nx = x[i] * s;
                ny = y[i] * s;
            }
            x[i] = nx;
            y[i] = ny;
        }
    }
    Ok(out)
}

/// Pointwise projection onto the tensor ball measured by
/// `sqrt(xx^2 + yy^2 + 2 xy^2)`. Idempotent and nonexpansive.
pub fn proj_ball_sym(q: &SymTensorField, radius: f64) -> Result<SymTensorField> {
    ensure_radius(radius)?;
    let mag_of = |a: f64, b: f64, c: f64| (a * a + b * b + 2.0 * c * c).sqrt();
    let mut out = q.clone();
    let (xx, yy, xy) = out.channels_mut();
    for i in 0..xx.len() {
        let mag = mag_of(xx[i], yy[i], xy[i]);
        if mag > radius {
            let mut s = radius / mag;
            let (mut a, mut b, mut c) = (xx[i] * s, yy[i] * s, xy[i] * s);
            while mag_of(a, b, c) > radius {
                s *= 1.0 - f64::EPSILON;
                a = xx[i] * s;
                b = yy[i] * s;
                c = xy[i] * s;
            }
            xx[i] = a;
            yy[i] = b;
            xy[i] = c;
        }
    }
    Ok(out)
}

/// Resolvent of the dualized quadratic data term: `r <- (r + residual) / (1 + step)`,
/// where the caller supplies `residual = step * (K u_bar - f)` pre-multiplied.
/// This is the exact prox of `step * F*` for `F*(r) = ||r||^2 / 2 + <f, r>`,
/// an affine contraction with factor `1 / (1 + step)`.
pub fn prox_data_dual(r: &ScalarField, step: f64, residual: &ScalarField) -> Result<ScalarField> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(TgvError::ContractViolation(format!(
            "prox step must be positive and finite, got {step}"
        )));
    }
    if r.geometry() != residual.geometry() {
        return Err(TgvError::GeometryMismatch(
            "prox_data_dual: r and residual grids differ".into(),
        ));
    }
    let mut out = r.clone();
    let scale = 1.0 / (1.0 + step);
    for (o, &res) in out.values_mut().iter_mut().zip(residual.values()) {
        *o = (*o + res) * scale;
    }
    Ok(out)
}
