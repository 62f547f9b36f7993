//! Primal-dual saddle-point solver.
//!
//! One iteration loop covers all three regularizers. The quadratic data
//! term is always dualized (variable `r`), so denoising and deblurring run
//! through the identical code path:
//!
//! ```text
//!   p <- proj_{a1-ball}(p + sigma (grad u_bar - w_bar))
//!   q <- proj_{a0-ball}(q + sigma E w_bar)
//!   r <- (r + sigma (K u_bar - f)) / (1 + sigma)
//!   u <- u - tau (K* r - div p)
//!   w <- w + tau (p + sym_div q)
//!   u_bar <- u + theta (u - u_old),   likewise w_bar
//! ```
//!
//! The TV mode runs the same loop with the w/q block disabled; the
//! infimal-convolution mode replaces the w block by a second scalar image
//! `u2` with `w = grad u2` maintained implicitly.
//!
//! Convergence is declared on first-order optimality residuals (RMS per
//! entry), which are computable every iteration; all three vanish at a
//! saddle point.

use crate::error::{Result, TgvError};
use crate::fields::{norm_21_sym, norm_21_vec, GridGeometry, InnerSpace, ScalarField, SymTensorField, VectorField};
use crate::operators::{
    div_vec, estimate_operator_norm, grad_forward, sym_div, sym_grad, ConvOp, LinearOperator,
};
use crate::proximal::{proj_ball_sym, proj_ball_vec, prox_data_dual};

/// TGV^2 weights: `alpha1` multiplies the first-order term `||Du - w||`,
/// `alpha0` the second-order term `||Ew||`. Both must be positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegParams {
    alpha0: f64,
    alpha1: f64,
}

impl RegParams {
    pub fn new(alpha0: f64, alpha1: f64) -> Result<Self> {
        if !(alpha0 > 0.0) || !(alpha1 > 0.0) || !alpha0.is_finite() || !alpha1.is_finite() {
            return Err(TgvError::ContractViolation(format!(
                "regularization weights must be positive, got alpha0={alpha0}, alpha1={alpha1}"
            )));
        }
        Ok(Self { alpha0, alpha1 })
    }

    /// The `(2 lambda, lambda)` convenience ratio.
    pub fn from_lambda(lambda: f64) -> Result<Self> {
        Self::new(2.0 * lambda, lambda)
    }

    #[inline]
    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    #[inline]
    pub fn alpha1(&self) -> f64 {
        self.alpha1
    }
}

/// Forward operator of the data term.
#[derive(Debug, Clone)]
pub enum ForwardOp {
    Identity(GridGeometry),
    Convolution(ConvOp),
}

impl ForwardOp {
    pub fn apply(&self, u: &ScalarField) -> ScalarField {
        match self {
            ForwardOp::Identity(_) => u.clone(),
            ForwardOp::Convolution(op) => op.apply(u),
        }
    }

    pub fn adjoint(&self, r: &ScalarField) -> ScalarField {
        match self {
            ForwardOp::Identity(_) => r.clone(),
            ForwardOp::Convolution(op) => op.adjoint_apply(r),
        }
    }

    pub fn domain_geometry(&self) -> GridGeometry {
        match self {
            ForwardOp::Identity(g) => *g,
            ForwardOp::Convolution(op) => *op.domain_zero().geometry(),
        }
    }

    pub fn range_geometry(&self) -> GridGeometry {
        match self {
            ForwardOp::Identity(g) => *g,
            ForwardOp::Convolution(op) => *op.range_geometry(),
        }
    }
}

impl LinearOperator for ForwardOp {
    type Domain = ScalarField;
    type Range = ScalarField;

    fn apply(&self, x: &ScalarField) -> ScalarField {
        ForwardOp::apply(self, x)
    }

    fn adjoint_apply(&self, y: &ScalarField) -> ScalarField {
        ForwardOp::adjoint(self, y)
    }

    fn domain_zero(&self) -> ScalarField {
        ScalarField::zeros(self.domain_geometry())
    }
}

/// Which regularizer the problem minimizes alongside `||Ku - f||^2 / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regularizer {
    /// `alpha1 ||grad u - w|| + alpha0 ||E w||`, minimized jointly over w.
    Tgv2(RegParams),
    /// `lambda ||grad u||` (no auxiliary field).
    Tv { lambda: f64 },
    /// `a ||grad (u - u2)|| + b ||E grad u2||`, minimized jointly over u2.
    InfConv { a: f64, b: f64 },
}

impl Regularizer {
    /// Weights `(c0, c1)` of the second- and first-order terms in the
    /// shared energy formula `c1 ||grad u - w|| + c0 ||E w||`.
    pub(crate) fn weights(&self) -> (f64, f64) {
        match *self {
            Regularizer::Tgv2(p) => (p.alpha0, p.alpha1),
            Regularizer::Tv { lambda } => (0.0, lambda),
            Regularizer::InfConv { a, b } => (b, a),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Regularizer::Tgv2(_) => Ok(()),
            Regularizer::Tv { lambda } if lambda > 0.0 && lambda.is_finite() => Ok(()),
            Regularizer::InfConv { a, b } if a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite() => {
                Ok(())
            }
            _ => Err(TgvError::ContractViolation(format!(
                "regularizer weights must be positive: {self:?}"
            ))),
        }
    }
}

/// One assembled min-max problem instance.
#[derive(Debug, Clone)]
pub struct SaddleProblem {
    data: ScalarField,
    forward: ForwardOp,
    regularizer: Regularizer,
    geometry: GridGeometry,
}

impl SaddleProblem {
    pub fn new(data: ScalarField, forward: ForwardOp, regularizer: Regularizer) -> Result<Self> {
        regularizer.validate()?;
        if *data.geometry() != forward.range_geometry() {
            return Err(TgvError::GeometryMismatch(format!(
                "data grid {}x{} does not match operator range {}x{}",
                data.geometry().width(),
                data.geometry().height(),
                forward.range_geometry().width(),
                forward.range_geometry().height()
            )));
        }
        let geometry = forward.domain_geometry();
        Ok(Self {
            data,
            forward,
            regularizer,
            geometry,
        })
    }

    #[inline]
    pub fn data(&self) -> &ScalarField {
        &self.data
    }

    #[inline]
    pub fn forward(&self) -> &ForwardOp {
        &self.forward
    }

    #[inline]
    pub fn regularizer(&self) -> &Regularizer {
        &self.regularizer
    }

    /// Grid of the unknown image `u`.
    #[inline]
    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    /// TGV^2 weights if this is a TGV^2 problem.
    pub fn params(&self) -> Option<RegParams> {
        match self.regularizer {
            Regularizer::Tgv2(p) => Some(p),
            _ => None,
        }
    }
}

/// Iteration control. `tau`/`sigma` left at `None` are derived from a power
/// iteration estimate `L` of the stacked operator norm as `1 / (1.02 L)`;
/// explicitly set steps are kept but `sigma` is rescaled down if
/// `tau * sigma * L^2 > 1`.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub max_iters: usize,
    pub tol: f64,
    pub tau: Option<f64>,
    pub sigma: Option<f64>,
    pub theta: f64,
    pub norm_estimate_iters: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 20_000,
            tol: 1e-6,
            tau: None,
            sigma: None,
            theta: 1.0,
            norm_estimate_iters: 200,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(TgvError::ContractViolation(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(TgvError::ContractViolation(format!(
                "theta must lie in [0, 1], got {}",
                self.theta
            )));
        }
        for (name, v) in [("tau", self.tau), ("sigma", self.sigma)] {
            if let Some(v) = v {
                if !(v > 0.0) || !v.is_finite() {
                    return Err(TgvError::ContractViolation(format!(
                        "{name} must be positive, got {v}"
                    )));
                }
            }
        }
        if self.norm_estimate_iters == 0 {
            return Err(TgvError::ContractViolation(
                "norm_estimate_iters must be >= 1".into(),
            ));
        }
        Ok(())
    }

    /// Estimates the stacked operator norm and fixes the step sizes so that
    /// `tau * sigma * L^2 <= 1`.
    pub fn resolve_steps(&self, problem: &SaddleProblem) -> Result<ResolvedSteps> {
        self.validate()?;
        let l = stacked_operator_norm(problem, self.norm_estimate_iters, self.seed).max(1e-12);
        let default = 1.0 / (1.02 * l);
        let tau = self.tau.unwrap_or(default);
        let mut sigma = self.sigma.unwrap_or(default);
        if tau * sigma * l * l > 1.0 {
            sigma = 1.0 / (tau * l * l);
        }
        Ok(ResolvedSteps {
            tau,
            sigma,
            theta: self.theta,
            operator_norm: l,
        })
    }
}

/// Concrete step sizes used by one iteration.
#[derive(Debug, Clone, Copy)]
pub struct ResolvedSteps {
    pub tau: f64,
    pub sigma: f64,
    pub theta: f64,
    pub operator_norm: f64,
}

/// All primal and dual iterates of the saddle-point method.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub u: ScalarField,
    pub w: VectorField,
    /// Second primal image of the infimal-convolution splitting.
    pub u2: Option<ScalarField>,
    /// Dual to `grad u - w`, pointwise norm bounded by the first-order weight.
    pub p: VectorField,
    /// Dual to `E w`, pointwise norm bounded by the second-order weight.
    pub q: SymTensorField,
    /// Dual to the data term.
    pub r: ScalarField,
    pub u_bar: ScalarField,
    pub w_bar: VectorField,
    pub u2_bar: Option<ScalarField>,
    pub iter: usize,
}

impl SolverState {
    /// Deterministic all-zero start.
    pub fn zeros(problem: &SaddleProblem) -> Self {
        let g = *problem.geometry();
        let infconv = matches!(problem.regularizer(), Regularizer::InfConv { .. });
        Self {
            u: ScalarField::zeros(g),
            w: VectorField::zeros(g),
            u2: infconv.then(|| ScalarField::zeros(g)),
            p: VectorField::zeros(g),
            q: SymTensorField::zeros(g),
            r: ScalarField::zeros(*problem.data().geometry()),
            u_bar: ScalarField::zeros(g),
            w_bar: VectorField::zeros(g),
            u2_bar: infconv.then(|| ScalarField::zeros(g)),
            iter: 0,
        }
    }
}

/// First-order optimality residuals, RMS per stored entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals {
    /// u-stationarity `||K* r - div p||`.
    pub res_u: f64,
    /// w-stationarity `||p + sym_div q||` (u2-stationarity for inf-conv).
    pub res_w: f64,
    /// r-optimality `||r - (K u - f)||` of the dualized quadratic.
    pub res_dual: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.res_u.max(self.res_w).max(self.res_dual)
    }
}

/// Why the iteration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIters,
}

/// Final iterates plus per-iteration history.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub state: SolverState,
    pub energy_history: Vec<f64>,
    pub residual_history: Vec<Residuals>,
    pub termination: Termination,
    pub steps: ResolvedSteps,
}

impl SolveReport {
    pub fn iterations(&self) -> usize {
        self.residual_history.len()
    }

    pub fn final_energy(&self) -> f64 {
        *self.energy_history.last().unwrap_or(&f64::NAN)
    }

    pub fn final_residuals(&self) -> Residuals {
        *self.residual_history.last().unwrap_or(&Residuals {
            res_u: f64::NAN,
            res_w: f64::NAN,
            res_dual: f64::NAN,
        })
    }

    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }
}

fn ensure_finite<F: InnerSpace>(field: &F, variable: &'static str, iteration: usize) -> Result<()> {
    if !field.sum_sq().is_finite() {
        return Err(TgvError::Divergence {
            variable,
            iteration,
        });
    }
    Ok(())
}

/// One primal-dual iteration; pure in the state. `steps.sigma == 0` is
/// allowed and leaves the dual variables unchanged (degenerate step).
pub fn cp_iterate(
    state: &SolverState,
    problem: &SaddleProblem,
    steps: &ResolvedSteps,
) -> Result<SolverState> {
    let mut next = state.clone();
    iterate_in_place(&mut next, problem, steps)?;
    Ok(next)
}

pub(crate) fn iterate_in_place(
    state: &mut SolverState,
    problem: &SaddleProblem,
    steps: &ResolvedSteps,
) -> Result<()> {
    let (sigma, tau, theta) = (steps.sigma, steps.tau, steps.theta);
    let (c0, c1) = problem.regularizer().weights();
    let iteration = state.iter;

    match problem.regularizer() {
        Regularizer::Tgv2(_) => {
            // dual ascent
            if sigma > 0.0 {
                let mut p_hat = grad_forward(&state.u_bar);
                p_hat.axpy(-1.0, &state.w_bar);
                p_hat.scale_mut(sigma);
                p_hat.axpy(1.0, &state.p);
                state.p = proj_ball_vec(&p_hat, c1)?;

                let mut q_hat = sym_grad(&state.w_bar);
                q_hat.scale_mut(sigma);
                q_hat.axpy(1.0, &state.q);
                state.q = proj_ball_sym(&q_hat, c0)?;

                let mut resid = problem.forward().apply(&state.u_bar);
                resid.axpy(-1.0, problem.data());
                resid.scale_mut(sigma);
                state.r = prox_data_dual(&state.r, sigma, &resid)?;
            }

            // primal descent
            let u_old = state.u.clone();
            let mut grad_u = problem.forward().adjoint(&state.r);
            grad_u.axpy(-1.0, &div_vec(&state.p));
            state.u.axpy(-tau, &grad_u);

            let w_old = state.w.clone();
            let mut asc_w = state.p.clone();
            asc_w.axpy(1.0, &sym_div(&state.q));
            state.w.axpy(tau, &asc_w);

            // extrapolation
            state.u_bar = state.u.clone();
            state.u_bar.scale_mut(1.0 + theta);
            state.u_bar.axpy(-theta, &u_old);
            state.w_bar = state.w.clone();
            state.w_bar.scale_mut(1.0 + theta);
            state.w_bar.axpy(-theta, &w_old);

            ensure_finite(&state.w, "w", iteration)?;
            ensure_finite(&state.q, "q", iteration)?;
        }
        Regularizer::Tv { lambda } => {
            if sigma > 0.0 {
                let mut p_hat = grad_forward(&state.u_bar);
                p_hat.scale_mut(sigma);
                p_hat.axpy(1.0, &state.p);
                state.p = proj_ball_vec(&p_hat, *lambda)?;

                let mut resid = problem.forward().apply(&state.u_bar);
                resid.axpy(-1.0, problem.data());
                resid.scale_mut(sigma);
                state.r = prox_data_dual(&state.r, sigma, &resid)?;
            }

            let u_old = state.u.clone();
            let mut grad_u = problem.forward().adjoint(&state.r);
            grad_u.axpy(-1.0, &div_vec(&state.p));
            state.u.axpy(-tau, &grad_u);

            state.u_bar = state.u.clone();
            state.u_bar.scale_mut(1.0 + theta);
            state.u_bar.axpy(-theta, &u_old);
        }
        Regularizer::InfConv { a, b } => {
            let u2_bar = state.u2_bar.as_ref().expect("inf-conv state carries u2");
            if sigma > 0.0 {
                let grad_u2_bar = grad_forward(u2_bar);
                let mut p_hat = grad_forward(&state.u_bar);
                p_hat.axpy(-1.0, &grad_u2_bar);
                p_hat.scale_mut(sigma);
                p_hat.axpy(1.0, &state.p);
                state.p = proj_ball_vec(&p_hat, *a)?;

                let mut q_hat = sym_grad(&grad_u2_bar);
                q_hat.scale_mut(sigma);
                q_hat.axpy(1.0, &state.q);
                state.q = proj_ball_sym(&q_hat, *b)?;

                let mut resid = problem.forward().apply(&state.u_bar);
                resid.axpy(-1.0, problem.data());
                resid.scale_mut(sigma);
                state.r = prox_data_dual(&state.r, sigma, &resid)?;
            }

            let u_old = state.u.clone();
            let mut grad_u = problem.forward().adjoint(&state.r);
            grad_u.axpy(-1.0, &div_vec(&state.p));
            state.u.axpy(-tau, &grad_u);

            let u2 = state.u2.as_mut().expect("inf-conv state carries u2");
            let u2_old = u2.clone();
            let mut grad_u2 = div_vec(&state.p);
            grad_u2.axpy(1.0, &div_vec(&sym_div(&state.q)));
            u2.axpy(-tau, &grad_u2);

            state.u_bar = state.u.clone();
            state.u_bar.scale_mut(1.0 + theta);
            state.u_bar.axpy(-theta, &u_old);
            let mut u2_bar = u2.clone();
            u2_bar.scale_mut(1.0 + theta);
            u2_bar.axpy(-theta, &u2_old);
            state.u2_bar = Some(u2_bar);

            ensure_finite(state.u2.as_ref().unwrap(), "u2", iteration)?;
            ensure_finite(&state.q, "q", iteration)?;
        }
    }

    ensure_finite(&state.u, "u", iteration)?;
    ensure_finite(&state.p, "p", iteration)?;
    ensure_finite(&state.r, "r", iteration)?;
    state.iter += 1;
    Ok(())
}

/// First-order optimality residuals of the current state; all three vanish
/// at a saddle point.
pub fn optimality_residuals(state: &SolverState, problem: &SaddleProblem) -> Residuals {
    let mut stat_u = problem.forward().adjoint(&state.r);
    stat_u.axpy(-1.0, &div_vec(&state.p));
    let res_u = stat_u.rms();

    let res_w = match problem.regularizer() {
        Regularizer::Tgv2(_) => {
            let mut s = state.p.clone();
            s.axpy(1.0, &sym_div(&state.q));
            s.rms()
        }
        Regularizer::Tv { .. } => 0.0,
        Regularizer::InfConv { .. } => {
            let mut s = div_vec(&state.p);
            s.axpy(1.0, &div_vec(&sym_div(&state.q)));
            s.rms()
        }
    };

    let mut dual_gap = problem.forward().apply(&state.u);
    dual_gap.axpy(-1.0, problem.data());
    dual_gap.scale_mut(-1.0);
    dual_gap.axpy(1.0, &state.r);
    let res_dual = dual_gap.rms();

    Residuals {
        res_u,
        res_w,
        res_dual,
    }
}

/// Primal energy `||Ku - f||^2 / 2 + c1 ||grad u - w|| + c0 ||E w||`.
/// For TV pass `w = 0`; for the infimal convolution `w` is `grad u2`.
pub fn primal_energy(u: &ScalarField, w: &VectorField, problem: &SaddleProblem) -> Result<f64> {
    if u.geometry() != problem.geometry() {
        return Err(TgvError::GeometryMismatch(
            "primal_energy: u grid differs from problem grid".into(),
        ));
    }
    let (c0, c1) = problem.regularizer().weights();
    let mut misfit = problem.forward().apply(u);
    misfit.axpy(-1.0, problem.data());
    let data_term = 0.5 * misfit.dot(&misfit);

    let mut d = grad_forward(u);
    d.axpy(-1.0, w);
    let first = c1 * norm_21_vec(&d);
    let second = if c0 > 0.0 {
        c0 * norm_21_sym(&sym_grad(w))
    } else {
        0.0
    };
    Ok(data_term + first + second)
}

/// Energy of a solver state (resolves the auxiliary field per regularizer).
pub fn state_energy(state: &SolverState, problem: &SaddleProblem) -> Result<f64> {
    match problem.regularizer() {
        Regularizer::InfConv { .. } => {
            let u2 = state.u2.as_ref().expect("inf-conv state carries u2");
            primal_energy(&state.u, &grad_forward(u2), problem)
        }
        _ => primal_energy(&state.u, &state.w, problem),
    }
}

/// Runs the primal-dual iteration from the zero state until the residuals
/// drop below `config.tol` or `config.max_iters` is reached. Deterministic
/// for fixed inputs and seed.
pub fn cp_solve(problem: &SaddleProblem, config: &SolverConfig) -> Result<SolveReport> {
    let steps = config.resolve_steps(problem)?;
    let mut state = SolverState::zeros(problem);
    let mut energy_history = Vec::new();
    let mut residual_history = Vec::new();
    let mut termination = Termination::MaxIters;

    for _ in 0..config.max_iters {
        iterate_in_place(&mut state, problem, &steps)?;
        energy_history.push(state_energy(&state, problem)?);
        let res = optimality_residuals(&state, problem);
        residual_history.push(res);
        if res.max() <= config.tol {
            termination = Termination::Converged;
            break;
        }
    }

    Ok(SolveReport {
        state,
        energy_history,
        residual_history,
        termination,
        steps,
    })
}

/// Norm of the stacked linear operator coupling primal and dual blocks.
fn stacked_operator_norm(problem: &SaddleProblem, iterations: usize, seed: u64) -> f64 {
    match problem.regularizer() {
        Regularizer::Tgv2(_) => {
            let op = Tgv2Stack { problem };
            estimate_operator_norm(&op, iterations, seed)
        }
        Regularizer::Tv { .. } => {
            let op = TvStack { problem };
            estimate_operator_norm(&op, iterations, seed)
        }
        Regularizer::InfConv { .. } => {
            let op = InfConvStack { problem };
            estimate_operator_norm(&op, iterations, seed)
        }
    }
}

/// `(u, w) -> (grad u - w, E w, K u)`
struct Tgv2Stack<'a> {
    problem: &'a SaddleProblem,
}

impl LinearOperator for Tgv2Stack<'_> {
    type Domain = (ScalarField, VectorField);
    type Range = (VectorField, SymTensorField, ScalarField);

    fn apply(&self, x: &Self::Domain) -> Self::Range {
        let (u, w) = x;
        let mut first = grad_forward(u);
        first.axpy(-1.0, w);
        (first, sym_grad(w), self.problem.forward().apply(u))
    }

    fn adjoint_apply(&self, y: &Self::Range) -> Self::Domain {
        let (p, q, r) = y;
        let mut u = self.problem.forward().adjoint(r);
        u.axpy(-1.0, &div_vec(p));
        let mut w = p.clone();
        w.scale_mut(-1.0);
        w.axpy(-1.0, &sym_div(q));
        (u, w)
    }

    fn domain_zero(&self) -> Self::Domain {
        let g = *self.problem.geometry();
        (ScalarField::zeros(g), VectorField::zeros(g))
    }
}

/// `u -> (grad u, K u)`
struct TvStack<'a> {
    problem: &'a SaddleProblem,
}

impl LinearOperator for TvStack<'_> {
    type Domain = ScalarField;
    type Range = (VectorField, ScalarField);

    fn apply(&self, u: &ScalarField) -> Self::Range {
        (grad_forward(u), self.problem.forward().apply(u))
    }

    fn adjoint_apply(&self, y: &Self::Range) -> ScalarField {
        let (p, r) = y;
        let mut u = self.problem.forward().adjoint(r);
        u.axpy(-1.0, &div_vec(p));
        u
    }

    fn domain_zero(&self) -> ScalarField {
        ScalarField::zeros(*self.problem.geometry())
    }
}

/// `(u, u2) -> (grad u - grad u2, E grad u2, K u)`
struct InfConvStack<'a> {
    problem: &'a SaddleProblem,
}

impl LinearOperator for InfConvStack<'_> {
    type Domain = (ScalarField, ScalarField);
    type Range = (VectorField, SymTensorField, ScalarField);

    fn apply(&self, x: &Self::Domain) -> Self::Range {
        let (u, u2) = x;
        let g2 = grad_forward(u2);
        let mut first = grad_forward(u);
        first.axpy(-1.0, &g2);
        (first, sym_grad(&g2), self.problem.forward().apply(u))
    }

    fn adjoint_apply(&self, y: &Self::Range) -> Self::Domain {
        let (p, q, r) = y;
        let mut u = self.problem.forward().adjoint(r);
        u.axpy(-1.0, &div_vec(p));
        let mut u2 = div_vec(p);
        u2.axpy(1.0, &div_vec(&sym_div(q)));
        (u, u2)
    }

    fn domain_zero(&self) -> Self::Domain {
        let g = *self.problem.geometry();
        (ScalarField::zeros(g), ScalarField::zeros(g))
    }
}
