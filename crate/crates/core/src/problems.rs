//! Assembly of concrete problem instances, the standalone TGV^2 evaluator,
//! the affine projection, and kernel admissibility checks.

use crate::error::{Result, TgvError};
use crate::fields::{norm_21_sym, norm_21_vec, GridGeometry, InnerSpace, ScalarField, SymTensorField, VectorField};
use crate::operators::{
    estimate_operator_norm, grad_forward, sym_div, sym_grad, ConvOp, ConvolutionKernel,
    LinearOperator,
};
use crate::proximal::{proj_ball_sym, proj_ball_vec};
use crate::solver::{ForwardOp, RegParams, Regularizer, SaddleProblem};

/// Denoising: `K = I`, `f` on the full grid.
pub fn assemble_denoise_tgv2(f: &ScalarField, params: RegParams) -> Result<SaddleProblem> {
    SaddleProblem::new(
        f.clone(),
        ForwardOp::Identity(*f.geometry()),
        Regularizer::Tgv2(params),
    )
}

/// Deblurring: `f` lives on the interior crop produced by the kernel; the
/// unknown image lives on the full grid extending `f` by the kernel radius
/// on every side. Kernels with zero mean are rejected (they are not
/// injective on affine images).
pub fn assemble_deblur_tgv2(
    f: &ScalarField,
    kernel: &ConvolutionKernel,
    params: RegParams,
) -> Result<SaddleProblem> {
    let stats = kernel_stats(kernel);
    if !stats.injective_on_affines() {
        return Err(TgvError::KernelNotAdmissible(
            "kernel mean is zero; deblurring needs a nonzero-mean kernel".into(),
        ));
    }
    let full = GridGeometry::new(
        f.geometry().width() + 2 * kernel.radius_x(),
        f.geometry().height() + 2 * kernel.radius_y(),
        f.geometry().spacing(),
    )?;
    let op = ConvOp::new(kernel.clone(), full)?;
    SaddleProblem::new(
        f.clone(),
        ForwardOp::Convolution(op),
        Regularizer::Tgv2(params),
    )
}

/// TV baseline: same solver loop with the w-block disabled.
pub fn assemble_denoise_tv(f: &ScalarField, lambda: f64) -> Result<SaddleProblem> {
    SaddleProblem::new(
        f.clone(),
        ForwardOp::Identity(*f.geometry()),
        Regularizer::Tv { lambda },
    )
}

/// Infimal-convolution baseline: first-order TV of `u - u2` plus
/// second-order smoothness of `u2` (discrete second derivative is the
/// composite `sym_grad . grad_forward`).
pub fn assemble_denoise_infconv(f: &ScalarField, a: f64, b: f64) -> Result<SaddleProblem> {
    SaddleProblem::new(
        f.clone(),
        ForwardOp::Identity(*f.geometry()),
        Regularizer::InfConv { a, b },
    )
}

/// Kernel integrals used by the injectivity argument for deconvolution:
/// total mass `kbar` and first moment `m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelStats {
    pub kbar: f64,
    pub m: (f64, f64),
}

impl KernelStats {
    /// A kernel is injective on affine images iff its mean is nonzero.
    pub fn injective_on_affines(&self) -> bool {
        self.kbar != 0.0
    }
}

/// `kbar = sum(w) h^2`, `m_i = sum(offset_i h) w h^2` with offsets measured
/// from the center tap.
pub fn kernel_stats(kernel: &ConvolutionKernel) -> KernelStats {
    let h = kernel.spacing();
    let area = h * h;
    let (cx, cy) = (kernel.radius_x() as isize, kernel.radius_y() as isize);
    let mut kbar = 0.0;
    let mut mx = 0.0;
    let mut my = 0.0;
    for row in 0..kernel.height() {
        for col in 0..kernel.width() {
            let w = kernel.weights()[row * kernel.width() + col];
            kbar += w * area;
            mx += (col as isize - cx) as f64 * h * w * area;
            my += (row as isize - cy) as f64 * h * w * area;
        }
    }
    KernelStats { kbar, m: (mx, my) }
}

/// L2-orthogonal projection onto `span{1, x, y}` over pixel centers.
/// Idempotent and linear; a 1xN or Nx1 grid degenerates gracefully to the
/// affine span of the remaining coordinate, and a 1x1 grid to the constant.
pub fn affine_projection(u: &ScalarField) -> ScalarField {
    let g = *u.geometry();
    let (nx, ny) = (g.width(), g.height());
    let n = (nx * ny) as f64;
    // centered coordinates make {1, x, y} exactly orthogonal on the grid
    let cx = (nx as f64 - 1.0) / 2.0;
    let cy = (ny as f64 - 1.0) / 2.0;

    let mut sum = 0.0;
    let mut sux = 0.0;
    let mut suy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for i in 0..ny {
        let yt = i as f64 - cy;
        for j in 0..nx {
            let xt = j as f64 - cx;
            let v = u.at(i, j);
            sum += v;
            sux += v * xt;
            suy += v * yt;
            sxx += xt * xt;
            syy += yt * yt;
        }
    }
    let mean = sum / n;
    let ax = if sxx > 0.0 { sux / sxx } else { 0.0 };
    let ay = if syy > 0.0 { suy / syy } else { 0.0 };
    ScalarField::from_fn(g, |i, j| {
        mean + ax * (j as f64 - cx) + ay * (i as f64 - cy)
    })
}

/// Result of evaluating the TGV^2 functional by inner minimization.
#[derive(Debug, Clone, Copy)]
pub struct TgvEvaluation {
    /// Best objective value seen; an upper bound on the discrete minimum.
    pub value: f64,
    /// Certified bound on `value - minimum`, from the dual lower bound
    /// `<grad u, p> - R ||p + sym_div q||`.
    pub certified_gap: f64,
    /// RMS of the w-stationarity residual at the final duals.
    pub residual: f64,
    pub iterations: usize,
}

const EVAL_MAX_ITERS: usize = 400_000;

/// Evaluates `TGV^2(u) = min_w alpha1 ||grad u - w|| + alpha0 ||E w||` with
/// the primal-dual engine, u held fixed. Converged means both the
/// stationarity residual and the certified duality gap are at most `tol`;
/// the returned value never exceeds the `w = 0` candidate
/// `alpha1 * ||grad u||`.
pub fn evaluate_tgv2(u: &ScalarField, params: &RegParams, tol: f64) -> Result<TgvEvaluation> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(TgvError::ContractViolation(format!(
            "evaluator tolerance must be positive, got {tol}"
        )));
    }
    let g = *u.geometry();
    let h = g.spacing();
    let (a0, a1) = (params.alpha0(), params.alpha1());
    let grad_u = grad_forward(u);
    let grad_u_norm = grad_u.norm();

    let op = EvalStack { geometry: g };
    let l = estimate_operator_norm(&op, 200, 0).max(1e-12);
    let tau = 1.0 / (1.02 * l);
    let sigma = tau;

    let objective = |w: &VectorField| {
        let mut d = grad_u.clone();
        d.axpy(-1.0, w);
        a1 * norm_21_vec(&d) + a0 * norm_21_sym(&sym_grad(w))
    };

    let mut w = VectorField::zeros(g);
    let mut w_bar = VectorField::zeros(g);
    let mut p = VectorField::zeros(g);
    let mut q = SymTensorField::zeros(g);
    let mut best = objective(&w);
    let mut residual = f64::INFINITY;

    for it in 0..EVAL_MAX_ITERS {
        let mut p_hat = grad_u.clone();
        p_hat.axpy(-1.0, &w_bar);
        p_hat.scale_mut(sigma);
        p_hat.axpy(1.0, &p);
        p = proj_ball_vec(&p_hat, a1)?;

        let mut q_hat = sym_grad(&w_bar);
        q_hat.scale_mut(sigma);
        q_hat.axpy(1.0, &q);
        q = proj_ball_sym(&q_hat, a0)?;

        let mut stationarity = p.clone();
        stationarity.axpy(1.0, &sym_div(&q));

        let w_old = w.clone();
        w.axpy(tau, &stationarity);
        w_bar = w.clone();
        w_bar.scale_mut(2.0);
        w_bar.axpy(-1.0, &w_old);

        best = best.min(objective(&w));
        residual = stationarity.rms();
        if residual <= tol {
            // Any minimizer w* satisfies ||w*|| <= ||grad u|| + value/(a1 h),
            // which turns the stationarity defect into a certified bound.
            let radius = grad_u_norm + best / (a1 * h);
            let lower = grad_u.dot(&p) - radius * stationarity.norm();
            let gap = (best - lower).max(0.0);
            if gap <= tol {
                return Ok(TgvEvaluation {
                    value: best,
                    certified_gap: gap,
                    residual,
                    iterations: it + 1,
                });
            }
        }
    }

    Err(TgvError::EvaluatorDidNotConverge {
        best_value: best,
        residual,
    })
}

/// `w -> (-w, E w)`; its norm fixes the evaluator step sizes.
struct EvalStack {
    geometry: GridGeometry,
}

impl LinearOperator for EvalStack {
    type Domain = VectorField;
    type Range = (VectorField, SymTensorField);

    fn apply(&self, w: &VectorField) -> Self::Range {
        let mut neg = w.clone();
        neg.scale_mut(-1.0);
        (neg, sym_grad(w))
    }

    fn adjoint_apply(&self, y: &Self::Range) -> VectorField {
        let (p, q) = y;
        let mut w = p.clone();
        w.scale_mut(-1.0);
        w.axpy(-1.0, &sym_div(q));
        w
    }

    fn domain_zero(&self) -> VectorField {
        VectorField::zeros(self.geometry)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;
    use crate::solver::{cp_solve, SolverConfig};

    fn geom(nx: usize, ny: usize) -> GridGeometry {
        GridGeometry::unit(nx, ny).unwrap()
    }

    fn params(a0: f64, a1: f64) -> RegParams {
        RegParams::new(a0, a1).unwrap()
    }

    #[test]
    fn denoise_assembly_solves_constant_exactly() {
        let g = geom(6, 6);
        let f = ScalarField::constant(g, 0.4);
        let problem = assemble_denoise_tgv2(&f, params(1.0, 1.0)).unwrap();
        let report = cp_solve(&problem, &SolverConfig::default().with_tol(1e-10)).unwrap();
        assert!(report.converged());
        let mut d = report.state.u.clone();
        d.axpy(-1.0, &f);
        assert!(d.norm() < 1e-8);
    }

    #[test]
    fn tv_assembly_solves_constant_exactly() {
        let g = geom(5, 5);
        let f = ScalarField::constant(g, -0.2);
        let problem = assemble_denoise_tv(&f, 0.3).unwrap();
        let report = cp_solve(&problem, &SolverConfig::default().with_tol(1e-10)).unwrap();
        assert!(report.converged());
        let mut d = report.state.u.clone();
        d.axpy(-1.0, &f);
        assert!(d.norm() < 1e-8);
    }

    #[test]
    fn infconv_assembly_solves_constant_exactly() {
        let g = geom(5, 5);
        let f = ScalarField::constant(g, 0.9);
        let problem = assemble_denoise_infconv(&f, 0.3, 0.6).unwrap();
        let report = cp_solve(&problem, &SolverConfig::default().with_tol(1e-10)).unwrap();
        assert!(report.converged());
        let mut d = report.state.u.clone();
        d.axpy(-1.0, &f);
        assert!(d.norm() < 1e-8);
    }

    #[test]
    fn deblur_assembly_checks_admissibility() {
        let k_zero = ConvolutionKernel::new(3, 3, 1.0, vec![0.0; 9]).unwrap();
        let f = ScalarField::zeros(geom(4, 4));
        assert!(matches!(
            assemble_deblur_tgv2(&f, &k_zero, params(1.0, 1.0)),
            Err(TgvError::KernelNotAdmissible(_))
        ));
    }

    #[test]
    fn deblur_with_delta_kernel_reduces_to_denoising() {
        // A 1x1 unit-mass delta leaves the grid uncropped, so the deblur
        // problem coincides with plain denoising of f.
        let g = geom(8, 8);
        let mut rng = SplitMix64::new(2);
        let mut f = ScalarField::zeros(g);
        f.fill_randn(&mut rng);
        let k = ConvolutionKernel::delta(1, 1.0).unwrap();

        let p = params(0.2, 0.1);
        let deblur = assemble_deblur_tgv2(&f, &k, p).unwrap();
        let denoise = assemble_denoise_tgv2(&f, p).unwrap();
        let cfg = SolverConfig::default().with_tol(1e-8);
        let ud = cp_solve(&deblur, &cfg).unwrap().state.u;
        let un = cp_solve(&denoise, &cfg).unwrap().state.u;
        let mut d = ud.clone();
        d.axpy(-1.0, &un);
        assert!(d.norm() < 1e-6, "{}", d.norm());
    }

    #[test]
    fn kernel_stats_examples() {
        // normalized symmetric 3x3 kernel
        let w = vec![0.0, 0.1, 0.0, 0.1, 0.6, 0.1, 0.0, 0.1, 0.0];
        let k = ConvolutionKernel::new(3, 3, 1.0, w).unwrap();
        let s = kernel_stats(&k);
        assert!((s.kbar - 1.0).abs() < 1e-15);
        assert!(s.m.0.abs() < 1e-15 && s.m.1.abs() < 1e-15);
        assert!(s.injective_on_affines());

        // unit-mass delta at offset (+1, 0): m = (1, 0)
        let mut w = vec![0.0; 9];
        w[3 * 1 + 2] = 1.0;
        let k = ConvolutionKernel::new(3, 3, 1.0, w).unwrap();
        let s = kernel_stats(&k);
        assert!((s.kbar - 1.0).abs() < 1e-15);
        assert!((s.m.0 - 1.0).abs() < 1e-15);
        assert!(s.m.1.abs() < 1e-15);

        let zero = ConvolutionKernel::new(3, 3, 1.0, vec![0.0; 9]).unwrap();
        let s = kernel_stats(&zero);
        assert_eq!(s.kbar, 0.0);
        assert!(!s.injective_on_affines());
    }

    #[test]
    fn affine_projection_fixes_affine_fields() {
        let g = geom(7, 5);
        let u = ScalarField::from_fn(g, |i, j| 0.3 + 0.2 * j as f64 - 0.1 * i as f64);
        let proj = affine_projection(&u);
        let mut d = proj.clone();
        d.axpy(-1.0, &u);
        assert!(d.norm() <= 1e-12);

        let c = ScalarField::constant(g, 5.0);
        let mut d = affine_projection(&c);
        d.axpy(-1.0, &c);
        assert!(d.norm() <= 1e-12);
    }

    #[test]
    fn affine_projection_removes_orthogonal_bump() {
        // bump = x~ * y~ is orthogonal to {1, x, y} on the centered grid
        let g = geom(6, 4);
        let cx = (6.0 - 1.0) / 2.0;
        let cy = (4.0 - 1.0) / 2.0;
        let affine = ScalarField::from_fn(g, |i, j| 1.0 + 0.5 * j as f64 + 0.25 * i as f64);
        let mut u = affine.clone();
        for i in 0..4 {
            for j in 0..6 {
                let b = (j as f64 - cx) * (i as f64 - cy);
                u.set(i, j, u.at(i, j) + 0.7 * b);
            }
        }
        let proj = affine_projection(&u);
        let mut d = proj.clone();
        d.axpy(-1.0, &affine);
        assert!(d.norm() <= 1e-12, "{}", d.norm());

        // oracle: solve the 3x3 normal equations directly
        let basis = |i: usize, j: usize| [1.0, j as f64, i as f64];
        let mut ata = [[0.0; 3]; 3];
        let mut atu = [0.0; 3];
        for i in 0..4 {
            for j in 0..6 {
                let b = basis(i, j);
                for r in 0..3 {
                    for c in 0..3 {
                        ata[r][c] += b[r] * b[c];
                    }
                    atu[r] += b[r] * u.at(i, j);
                }
            }
        }
        // Gaussian elimination on the tiny system
        let mut m = ata;
        let mut rhs = atu;
        for col in 0..3 {
            let piv = (col..3).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs())).unwrap();
            m.swap(col, piv);
            rhs.swap(col, piv);
            for row in col + 1..3 {
                let fac = m[row][col] / m[col][col];
                for c in col..3 {
                    m[row][c] -= fac * m[col][c];
                }
                rhs[row] -= fac * rhs[col];
            }
        }
        let mut coef = [0.0; 3];
        for row in (0..3).rev() {
            let mut acc = rhs[row];
            for c in row + 1..3 {
                acc -= m[row][c] * coef[c];
            }
            coef[row] = acc / m[row][row];
        }
        for i in 0..4 {
            for j in 0..6 {
                let expect = coef[0] + coef[1] * j as f64 + coef[2] * i as f64;
                assert!((proj.at(i, j) - expect).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn affine_projection_is_idempotent_on_random_fields() {
        let g = geom(9, 8);
        let mut rng = SplitMix64::new(13);
        let mut u = ScalarField::zeros(g);
        u.fill_randn(&mut rng);
        let once = affine_projection(&u);
        let twice = affine_projection(&once);
        let mut d = twice.clone();
        d.axpy(-1.0, &once);
        assert!(d.norm() <= 1e-12);
    }

    #[test]
    fn affine_projection_degenerates_to_constant_on_1x1() {
        let g = geom(1, 1);
        let u = ScalarField::from_values(g, vec![3.5]).unwrap();
        assert_eq!(affine_projection(&u).values(), &[3.5]);
    }

    #[test]
    fn evaluate_tgv2_of_constant_is_zero() {
        let u = ScalarField::constant(geom(8, 8), 0.7);
        let ev = evaluate_tgv2(&u, &params(1.0, 1.0), 1e-8).unwrap();
        assert!(ev.value <= 1e-8, "{}", ev.value);
    }

    #[test]
    fn evaluate_tgv2_of_ramp_stays_under_boundary_bound() {
        // u[i,j] = j on n x n: candidates w = (1,0) and w = grad u show
        // TGV <= min(alpha0, alpha1) * n.
        let n = 8;
        let u = ScalarField::from_fn(geom(n, n), |_, j| j as f64);
        for (a0, a1) in [(1.0, 1.0), (0.5, 1.0), (1.0, 0.25)] {
            let tol = 1e-5;
            let ev = evaluate_tgv2(&u, &params(a0, a1), tol).unwrap();
            let bound = a0.min(a1) * n as f64;
            assert!(ev.value <= bound + tol, "{} vs {}", ev.value, bound);
        }
    }

    #[test]
    fn evaluate_tgv2_checkerboard_fixture() {
        // 2x2 checkerboard, alpha = (1,1): the discrete minimum is 2 + sqrt(2)
        let u = ScalarField::from_values(geom(2, 2), vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let ev = evaluate_tgv2(&u, &params(1.0, 1.0), 1e-8).unwrap();
        let expect = 2.0 + 2f64.sqrt();
        assert!((ev.value - expect).abs() < 1e-6, "{} vs {}", ev.value, expect);
        assert!(ev.certified_gap <= 1e-8);
    }

    #[test]
    fn evaluate_tgv2_never_exceeds_tv_bound() {
        let g = geom(8, 8);
        let mut rng = SplitMix64::new(31);
        let p = params(0.8, 0.5);
        for _ in 0..5 {
            let mut u = ScalarField::zeros(g);
            u.fill_randn(&mut rng);
            let tol = 1e-6;
            let ev = evaluate_tgv2(&u, &p, tol).unwrap();
            let tv_bound = 0.5 * norm_21_vec(&grad_forward(&u));
            assert!(ev.value <= tv_bound + tol);
        }
    }

    #[test]
    fn evaluate_tgv2_rejects_bad_tolerance() {
        let u = ScalarField::zeros(geom(2, 2));
        assert!(evaluate_tgv2(&u, &params(1.0, 1.0), 0.0).is_err());
    }
}
