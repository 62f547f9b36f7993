//! Deterministic synthetic test patterns in [0, 1].

use crate::error::{CliError, Result};
use std::str::FromStr;
use tgv_core::{GridGeometry, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternKind {
    /// Linear in x.
    Ramp,
    /// Centered circle indicator, radius min(nx, ny) / 4.
    Disk,
    /// (x + 2y) rescaled to [0, 1].
    Affine,
    /// Alternating unit blocks.
    Checker,
    /// Half-plane jump across the vertical midline.
    Step,
}

impl FromStr for PatternKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ramp" => Ok(PatternKind::Ramp),
            "disk" => Ok(PatternKind::Disk),
            "affine" => Ok(PatternKind::Affine),
            "checker" => Ok(PatternKind::Checker),
            "step" => Ok(PatternKind::Step),
            _ => Err(CliError::Usage(format!(
                "unknown pattern `{s}` (expected ramp, disk, affine, checker or step)"
            ))),
        }
    }
}

pub fn synth_pattern(kind: PatternKind, nx: usize, ny: usize) -> Result<ScalarField> {
    if nx < 2 || ny < 2 {
        return Err(CliError::Usage(format!(
            "patterns need at least a 2x2 grid, got {nx}x{ny}"
        )));
    }
    let g = GridGeometry::unit(nx, ny)?;
    let field = match kind {
        PatternKind::Ramp => ScalarField::from_fn(g, |_, j| j as f64 / (nx - 1) as f64),
        PatternKind::Affine => {
            let denom = (nx - 1) as f64 + 2.0 * (ny - 1) as f64;
            ScalarField::from_fn(g, |i, j| (j as f64 + 2.0 * i as f64) / denom)
        }
        PatternKind::Disk => {
            let cx = (nx as f64 - 1.0) / 2.0;
            let cy = (ny as f64 - 1.0) / 2.0;
            let r = nx.min(ny) as f64 / 4.0;
            let r2 = r * r;
            ScalarField::from_fn(g, |i, j| {
                let dx = j as f64 - cx;
                let dy = i as f64 - cy;
                if dx * dx + dy * dy <= r2 {
                    1.0
                } else {
                    0.0
                }
            })
        }
        PatternKind::Checker => ScalarField::from_fn(g, |i, j| ((i + j) % 2) as f64),
        PatternKind::Step => ScalarField::from_fn(g, |_, j| if j >= nx / 2 { 1.0 } else { 0.0 }),
    };
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tgv_core::{affine_projection, grad_forward, InnerSpace};

    #[test]
    fn affine_pattern_is_its_own_affine_projection() {
        let u = synth_pattern(PatternKind::Affine, 4, 4).unwrap();
        let mut d = affine_projection(&u);
        d.axpy(-1.0, &u);
        assert!(d.norm() <= 1e-12);
    }

    #[test]
    fn disk_pixel_count_is_near_its_area() {
        let u = synth_pattern(PatternKind::Disk, 32, 32).unwrap();
        let ones = u.values().iter().filter(|&&v| v == 1.0).count() as f64;
        let area = std::f64::consts::PI * 64.0;
        assert!(ones >= 0.8 * area && ones <= 1.2 * area, "{ones}");
        assert!(u.values().iter().all(|&v| v == 0.0 || v == 1.0));
    }

    #[test]
    fn ramp_gradient_is_constant_off_the_last_column() {
        let n = 9;
        let u = synth_pattern(PatternKind::Ramp, n, n).unwrap();
        let g = grad_forward(&u);
        let expect = 1.0 / (n - 1) as f64;
        for i in 0..n {
            for j in 0..n - 1 {
                let (gx, _) = g.at(i, j);
                assert!((gx - expect).abs() < 1e-15);
            }
            let (gx, _) = g.at(i, n - 1);
            assert_eq!(gx, 0.0);
        }
    }

    #[test]
    fn values_stay_in_unit_interval() {
        for kind in [
            PatternKind::Ramp,
            PatternKind::Disk,
            PatternKind::Affine,
            PatternKind::Checker,
            PatternKind::Step,
        ] {
            let u = synth_pattern(kind, 13, 7).unwrap();
            assert!(u.values().iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }

    #[test]
    fn unknown_kind_and_tiny_grid_are_usage_errors() {
        assert!("blob".parse::<PatternKind>().is_err());
        assert!(synth_pattern(PatternKind::Ramp, 1, 5).is_err());
    }
}
