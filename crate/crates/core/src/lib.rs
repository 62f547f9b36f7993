//! Second-order Total Generalized Variation (TGV^2) regularization for
//! linear inverse imaging problems.
//!
//! The library assembles and solves Tikhonov problems of the form
//!
//! ```text
//!   min_u  ||K u - f||^2 / 2  +  TGV^2_alpha(u)
//! ```
//!
//! where `K` is the identity (denoising) or a convolution restricted to an
//! interior crop (deblurring), and
//!
//! ```text
//!   TGV^2_alpha(u) = min_w  alpha1 ||grad u - w||  +  alpha0 ||E w||
//! ```
//!
//! balances first- and second-order smoothness through the auxiliary
//! vector field `w` and its symmetrized gradient `E w`. A first-order
//! primal-dual solver handles the saddle-point form; TV and
//! infimal-convolution baselines run through the same loop. The `verify`
//! module holds algorithmically independent oracles used to certify the
//! main path on small instances.

pub mod error;
pub mod fields;
pub mod operators;
pub mod problems;
pub mod proximal;
pub mod rng;
pub mod solver;
pub mod verify;

pub use error::{Result, TgvError};
pub use fields::{
    norm_21_sym, norm_21_vec, GridGeometry, InnerSpace, ScalarField, SymTensorField, VectorField,
};
pub use operators::{
    adjoint_convolve, convolve, div_vec, estimate_operator_norm, grad_forward, sym_div, sym_grad,
    ConvOp, ConvolutionKernel, GradOp, IdentityOp, LinearOperator, SymGradOp,
};
pub use problems::{
    affine_projection, assemble_deblur_tgv2, assemble_denoise_infconv, assemble_denoise_tgv2,
    assemble_denoise_tv, evaluate_tgv2, kernel_stats, KernelStats, TgvEvaluation,
};
pub use proximal::{proj_ball_sym, proj_ball_vec, prox_data_dual};
pub use solver::{
    cp_iterate, cp_solve, optimality_residuals, primal_energy, state_energy, ForwardOp, RegParams,
    Regularizer, Residuals, ResolvedSteps, SaddleProblem, SolveReport, SolverConfig, SolverState,
    Termination,
};
pub use verify::{
    adjoint_certification, adjoint_check, denoise_oracle_exact_prox, tgv_oracle_small,
    tgv_oracle_with_iters, CheckLine,
};
