//! `tgv2` — batch TGV^2 denoising, deblurring and evaluation experiments.
//!
//! Exit codes: 0 when every solve converged within tolerance, 2 when a
//! solve stopped at its iteration cap, 1 on any usage, I/O or solver error.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use tgv_cli::{
    read_pgm, resolve_reg_params, run_adjoint_check, run_compare, run_eval, run_single, run_synth,
    CliError, CompareConfig, MaxVal, Method, SolveSettings,
};

#[derive(Parser)]
#[command(
    name = "tgv2",
    about = "Total Generalized Variation (second order) imaging experiments",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RegArgs {
    /// Second-order weight (with --alpha1; exclusive with --lambda)
    #[arg(long)]
    alpha0: Option<f64>,
    /// First-order weight (with --alpha0; exclusive with --lambda)
    #[arg(long)]
    alpha1: Option<f64>,
    /// Convenience weight, expands to (alpha0, alpha1) = (2*lambda, lambda)
    #[arg(long)]
    lambda: Option<f64>,
}

#[derive(Args, Clone)]
struct IterArgs {
    /// Iteration cap for the primal-dual solver
    #[arg(long, default_value_t = 20_000)]
    iters: usize,
    /// Stopping tolerance on the optimality residuals (RMS)
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Seed for noise and power-iteration starts
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Clone)]
struct OutputArgs {
    /// Maximum sample value of written PGMs (255 or 65535)
    #[arg(long, default_value_t = 65535)]
    maxval: u32,
}

#[derive(Subcommand)]
enum Command {
    /// Denoise an image (K = identity)
    Denoise {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Regularizer: tgv2, tv or infconv
        #[arg(long, default_value = "tgv2")]
        method: String,
        #[command(flatten)]
        reg: RegArgs,
        #[command(flatten)]
        iter: IterArgs,
        /// Add Gaussian noise of this standard deviation before solving
        #[arg(long, default_value_t = 0.0)]
        noise_sd: f64,
        /// Write a one-row result CSV here
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Deblur an observed image given the blur kernel
    Deblur {
        /// The observed (blurred, noisy) image f on the cropped grid
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Regularizer: tgv2 or tv
        #[arg(long, default_value = "tgv2")]
        method: String,
        /// Kernel file path or gaussian:sd=<s>,size=<n>
        #[arg(long)]
        kernel: String,
        #[command(flatten)]
        reg: RegArgs,
        #[command(flatten)]
        iter: IterArgs,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Evaluate the TGV^2 value of an image
    Eval {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        reg: RegArgs,
        /// Certification tolerance for the reported value
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Run several methods on one synthetic problem and tabulate results
    Compare {
        /// Clean source image
        #[arg(long)]
        input: PathBuf,
        /// Comma-separated methods, e.g. tv,tgv2
        #[arg(long, default_value = "tv,tgv2")]
        methods: String,
        /// Blur kernel (switches the pipeline to deblurring)
        #[arg(long)]
        kernel: Option<String>,
        #[command(flatten)]
        reg: RegArgs,
        #[command(flatten)]
        iter: IterArgs,
        #[arg(long, default_value_t = 0.0)]
        noise_sd: f64,
        /// Results CSV path
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Directory for data and per-method images
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Certify the discrete adjoint pairs and print a report
    AdjointCheck {
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Generate a synthetic test pattern
    Synth {
        /// ramp, disk, affine, checker or step
        #[arg(long)]
        pattern: String,
        /// Image size as WIDTHxHEIGHT, e.g. 128x128
        #[arg(long)]
        size: String,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        noise_sd: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
}

fn parse_size(size: &str) -> Result<(usize, usize), CliError> {
    let (w, h) = size
        .split_once(['x', 'X'])
        .ok_or_else(|| CliError::Usage(format!("size must look like 128x128, got `{size}`")))?;
    let nx = w
        .parse()
        .map_err(|_| CliError::Usage(format!("bad width `{w}`")))?;
    let ny = h
        .parse()
        .map_err(|_| CliError::Usage(format!("bad height `{h}`")))?;
    Ok((nx, ny))
}

fn parse_maxval(v: u32) -> Result<MaxVal, CliError> {
    MaxVal::from_value(v)
        .ok_or_else(|| CliError::Usage(format!("maxval must be 255 or 65535, got {v}")))
}

fn parse_methods(list: &str) -> Result<Vec<Method>, CliError> {
    let methods: Result<Vec<Method>, CliError> =
        list.split(',').map(|m| m.trim().parse()).collect();
    let methods = methods?;
    if methods.is_empty() {
        return Err(CliError::Usage("no methods given".into()));
    }
    Ok(methods)
}

fn settings(reg: &RegArgs, iter: &IterArgs) -> Result<SolveSettings, CliError> {
    Ok(SolveSettings {
        params: resolve_reg_params(reg.alpha0, reg.alpha1, reg.lambda)?,
        iters: iter.iters,
        tol: iter.tol,
        seed: iter.seed,
    })
}

/// Ok(true): done, everything converged. Ok(false): done, but some solve
/// hit its iteration cap.
fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Denoise {
            input,
            output,
            method,
            reg,
            iter,
            noise_sd,
            csv,
            out,
        } => {
            let row = run_single(
                method.parse()?,
                &input,
                output.as_deref(),
                None,
                &settings(&reg, &iter)?,
                noise_sd,
                csv.as_deref(),
                parse_maxval(out.maxval)?,
            )?;
            println!("{}", row.csv());
            Ok(row.converged)
        }
        Command::Deblur {
            input,
            output,
            method,
            kernel,
            reg,
            iter,
            csv,
            out,
        } => {
            let row = run_single(
                method.parse()?,
                &input,
                output.as_deref(),
                Some(&kernel),
                &settings(&reg, &iter)?,
                0.0,
                csv.as_deref(),
                parse_maxval(out.maxval)?,
            )?;
            println!("{}", row.csv());
            Ok(row.converged)
        }
        Command::Eval { input, reg, tol } => {
            let params = resolve_reg_params(reg.alpha0, reg.alpha1, reg.lambda)?;
            let line = run_eval(&input, params, tol)?;
            println!("{line}");
            Ok(true)
        }
        Command::Compare {
            input,
            methods,
            kernel,
            reg,
            iter,
            noise_sd,
            csv,
            output,
            out,
        } => {
            let clean = read_pgm(&input)?;
            let kernel = match kernel {
                Some(spec) => Some(tgv_cli::parse_kernel_spec(
                    &spec,
                    clean.geometry().spacing(),
                )?),
                None => None,
            };
            let config = CompareConfig {
                clean,
                methods: parse_methods(&methods)?,
                settings: settings(&reg, &iter)?,
                kernel,
                noise_sd,
                csv_path: csv,
                output_dir: output,
                maxval: parse_maxval(out.maxval)?,
            };
            let outcome = run_compare(&config)?;
            for row in &outcome.rows {
                println!("{}", row.csv());
            }
            Ok(outcome.all_converged)
        }
        Command::AdjointCheck { trials, seed } => {
            let (report, ok) = run_adjoint_check(trials, seed);
            print!("{report}");
            Ok(ok)
        }
        Command::Synth {
            pattern,
            size,
            output,
            noise_sd,
            seed,
            out,
        } => {
            let (nx, ny) = parse_size(&size)?;
            run_synth(
                &pattern,
                nx,
                ny,
                noise_sd,
                seed,
                &output,
                parse_maxval(out.maxval)?,
            )?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("tgv2: finished without reaching the stopping tolerance");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("tgv2: {e}");
            ExitCode::from(1)
        }
    }
}
