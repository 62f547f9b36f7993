//! Batch front end for TGV^2 denoising, deblurring and evaluation: image
//! and kernel I/O, synthetic patterns, seeded noise, metrics, experiment
//! drivers and CSV emission.

pub mod commands;
pub mod error;
pub mod kernel_spec;
pub mod metrics;
pub mod noise;
pub mod patterns;
pub mod pgm;

pub use commands::{
    resolve_reg_params, run_adjoint_check, run_compare, run_eval, run_single, run_synth,
    CompareConfig, CompareOutcome, Method, MethodRow, SolveSettings, CSV_COLUMNS,
    CSV_VERSION_COMMENT,
};
pub use error::{CliError, Result};
pub use kernel_spec::{gaussian_kernel, parse_kernel_spec, read_kernel_file, write_kernel_file};
pub use metrics::{mse, psnr, rmse};
pub use noise::add_gaussian_noise;
pub use patterns::{synth_pattern, PatternKind};
pub use pgm::{pgm_bytes, read_pgm, read_pgm_bytes, write_pgm, MaxVal, PgmFormat};
