//! Experiment drivers behind the CLI subcommands.
//!
//! Every run is deterministic given its flags and seeds; the only
//! non-reproducible output column is `wall_seconds`. Compare runs its
//! methods in parallel workers (capped by `TGV2_THREADS`) but always
//! writes CSV rows in the declared method order.

use crate::error::{CliError, Result};
use crate::kernel_spec::parse_kernel_spec;
use crate::metrics::psnr;
use crate::noise::add_gaussian_noise;
use crate::patterns::{synth_pattern, PatternKind};
use crate::pgm::{read_pgm, write_pgm, MaxVal, PgmFormat};
use std::fmt;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;
use tgv_core::{
    assemble_deblur_tgv2, assemble_denoise_infconv, assemble_denoise_tgv2, assemble_denoise_tv,
    cp_solve, evaluate_tgv2, verify, ConvolutionKernel, RegParams, Residuals, SaddleProblem,
    ScalarField, SolveReport, SolverConfig,
};

pub const CSV_VERSION_COMMENT: &str = "# tgv2-csv v1";
pub const CSV_COLUMNS: &str =
    "method,alpha0,alpha1,iters_used,final_energy,res_u,res_w,res_dual,psnr,wall_seconds";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Tgv2,
    Tv,
    InfConv,
}

impl FromStr for Method {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tgv2" => Ok(Method::Tgv2),
            "tv" => Ok(Method::Tv),
            "infconv" => Ok(Method::InfConv),
            _ => Err(CliError::Usage(format!(
                "unknown method `{s}` (expected tgv2, tv or infconv)"
            ))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Tgv2 => "tgv2",
            Method::Tv => "tv",
            Method::InfConv => "infconv",
        })
    }
}

/// Enforces "exactly one of (alpha0 & alpha1) or lambda"; lambda expands
/// to `(2 lambda, lambda)`.
pub fn resolve_reg_params(
    alpha0: Option<f64>,
    alpha1: Option<f64>,
    lambda: Option<f64>,
) -> Result<RegParams> {
    match (alpha0, alpha1, lambda) {
        (Some(a0), Some(a1), None) => Ok(RegParams::new(a0, a1)?),
        (None, None, Some(l)) => Ok(RegParams::from_lambda(l)?),
        (None, None, None) => Err(CliError::Usage(
            "give either --lambda or both --alpha0 and --alpha1".into(),
        )),
        _ => Err(CliError::Usage(
            "give exactly one of --lambda or the pair --alpha0/--alpha1".into(),
        )),
    }
}

/// Denoising problem for a method; TV uses `alpha1` as its weight, the
/// infimal convolution uses `(a, b) = (alpha1, alpha0)`.
fn build_denoise(method: Method, f: &ScalarField, params: RegParams) -> Result<SaddleProblem> {
    Ok(match method {
        Method::Tgv2 => assemble_denoise_tgv2(f, params)?,
        Method::Tv => assemble_denoise_tv(f, params.alpha1())?,
        Method::InfConv => assemble_denoise_infconv(f, params.alpha1(), params.alpha0())?,
    })
}

fn build_deblur(
    method: Method,
    f: &ScalarField,
    kernel: &ConvolutionKernel,
    params: RegParams,
) -> Result<SaddleProblem> {
    match method {
        Method::Tgv2 => Ok(assemble_deblur_tgv2(f, kernel, params)?),
        Method::Tv => {
            // reuse the admissibility and geometry checks, then swap the regularizer
            let tgv = assemble_deblur_tgv2(f, kernel, params)?;
            Ok(SaddleProblem::new(
                tgv.data().clone(),
                tgv.forward().clone(),
                tgv_core::Regularizer::Tv {
                    lambda: params.alpha1(),
                },
            )?)
        }
        Method::InfConv => Err(CliError::Usage(
            "method infconv supports denoising only".into(),
        )),
    }
}

/// One CSV row of a solve.
#[derive(Debug, Clone)]
pub struct MethodRow {
    pub method: Method,
    pub alpha0: f64,
    pub alpha1: f64,
    pub iters_used: usize,
    pub final_energy: f64,
    pub residuals: Residuals,
    pub psnr_db: f64,
    pub wall_seconds: f64,
    pub converged: bool,
}

impl MethodRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{:.3}",
            self.method,
            self.alpha0,
            self.alpha1,
            self.iters_used,
            self.final_energy,
            self.residuals.res_u,
            self.residuals.res_w,
            self.residuals.res_dual,
            self.psnr_db,
            self.wall_seconds
        )
    }
}

#[derive(Debug, Clone)]
pub struct SolveSettings {
    pub params: RegParams,
    pub iters: usize,
    pub tol: f64,
    pub seed: u64,
}

impl SolveSettings {
    fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            max_iters: self.iters,
            tol: self.tol,
            seed: self.seed,
            ..SolverConfig::default()
        }
    }
}

fn solve_row(
    method: Method,
    problem: &SaddleProblem,
    settings: &SolveSettings,
    reference: &ScalarField,
    crop_margins: Option<(usize, usize)>,
    maxval: MaxVal,
) -> Result<(MethodRow, SolveReport)> {
    let start = Instant::now();
    let report = cp_solve(problem, &settings.solver_config())?;
    let wall_seconds = start.elapsed().as_secs_f64();
    let solution_for_metric = match crop_margins {
        Some((mx, my)) => report.state.u.interior_crop(mx, my)?,
        None => report.state.u.clone(),
    };
    // psnr describes the images as written to disk, so both sides are
    // quantized at the output maxval
    let psnr_db = psnr(
        &crate::pgm::quantized(&solution_for_metric, maxval),
        &crate::pgm::quantized(reference, maxval),
        1.0,
    )?;
    let row = MethodRow {
        method,
        alpha0: settings.params.alpha0(),
        alpha1: settings.params.alpha1(),
        iters_used: report.iterations(),
        final_energy: report.final_energy(),
        residuals: report.final_residuals(),
        psnr_db,
        wall_seconds,
        converged: report.converged(),
    };
    Ok((row, report))
}

fn write_csv(path: &Path, rows: &[MethodRow]) -> Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(file, "{CSV_VERSION_COMMENT}")?;
    writeln!(file, "{CSV_COLUMNS}")?;
    for row in rows {
        writeln!(file, "{}", row.csv())?;
        file.flush()?;
    }
    Ok(())
}

pub fn thread_cap(methods: usize) -> usize {
    let hw = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    let cap = std::env::var("TGV2_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(hw);
    cap.min(methods).max(1)
}

#[derive(Debug, Clone)]
pub struct CompareConfig {
    pub clean: ScalarField,
    pub methods: Vec<Method>,
    pub settings: SolveSettings,
    pub kernel: Option<ConvolutionKernel>,
    pub noise_sd: f64,
    pub csv_path: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub maxval: MaxVal,
}

#[derive(Debug)]
pub struct CompareOutcome {
    pub rows: Vec<MethodRow>,
    pub all_converged: bool,
}

/// Runs every method on the same synthetic data and writes one CSV row and
/// one output image per method. On a solve failure the rows completed so
/// far are still flushed before the error propagates.
pub fn run_compare(config: &CompareConfig) -> Result<CompareOutcome> {
    if config.methods.is_empty() {
        return Err(CliError::Usage("compare needs at least one --method".into()));
    }
    if config.iters() == 0 {
        return Err(CliError::Usage("--iters must be at least 1".into()));
    }

    // synthetic data pipeline: (blur ->) noise
    let (data, reference, crop_margins) = match &config.kernel {
        Some(kernel) => {
            let blurred = tgv_core::convolve(&config.clean, kernel)?;
            let data = add_gaussian_noise(&blurred, config.noise_sd, config.settings.seed)?;
            let margins = (kernel.radius_x(), kernel.radius_y());
            let reference = config.clean.interior_crop(margins.0, margins.1)?;
            (data, reference, Some(margins))
        }
        None => {
            let data = add_gaussian_noise(&config.clean, config.noise_sd, config.settings.seed)?;
            (data, config.clean.clone(), None)
        }
    };

    if let Some(dir) = &config.output_dir {
        std::fs::create_dir_all(dir)?;
        write_pgm(&data, dir.join("data.pgm"), config.maxval, PgmFormat::Binary)?;
    }

    // solve in parallel batches, keeping declared order for the results
    let n = config.methods.len();
    let mut results: Vec<Option<Result<(MethodRow, SolveReport)>>> = (0..n).map(|_| None).collect();
    let cap = thread_cap(n);
    let indices: Vec<usize> = (0..n).collect();
    for batch in indices.chunks(cap) {
        let mut batch_results: Vec<(usize, Result<(MethodRow, SolveReport)>)> =
            Vec::with_capacity(batch.len());
        std::thread::scope(|scope| {
            let handles: Vec<_> = batch
                .iter()
                .map(|&i| {
                    let method = config.methods[i];
                    let data = &data;
                    let reference = &reference;
                    let settings = &config.settings;
                    let kernel = &config.kernel;
                    let maxval = config.maxval;
                    scope.spawn(move || {
                        let problem = match kernel {
                            Some(k) => build_deblur(method, data, k, settings.params)?,
                            None => build_denoise(method, data, settings.params)?,
                        };
                        solve_row(method, &problem, settings, reference, crop_margins, maxval)
                    })
                })
                .collect();
            for (&i, handle) in batch.iter().zip(handles) {
                batch_results.push((i, handle.join().expect("solver worker panicked")));
            }
        });
        for (i, r) in batch_results {
            results[i] = Some(r);
        }
    }

    // flush rows in declared order; stop at the first failure
    let mut rows = Vec::new();
    let mut failure: Option<CliError> = None;
    for (i, slot) in results.into_iter().enumerate() {
        match slot.expect("every method ran") {
            Ok((row, report)) => {
                if let Some(dir) = &config.output_dir {
                    write_pgm(
                        &report.state.u,
                        dir.join(format!("{}.pgm", config.methods[i])),
                        config.maxval,
                        PgmFormat::Binary,
                    )?;
                }
                rows.push(row);
            }
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }
    if let Some(path) = &config.csv_path {
        write_csv(path, &rows)?;
    }
    if let Some(e) = failure {
        return Err(e);
    }
    let all_converged = rows.iter().all(|r| r.converged);
    Ok(CompareOutcome {
        rows,
        all_converged,
    })
}

impl CompareConfig {
    fn iters(&self) -> usize {
        self.settings.iters
    }
}

/// `denoise` / `deblur`: solve one problem, write the image, optionally a
/// one-row CSV. Returns the row for exit-code logic.
#[allow(clippy::too_many_arguments)]
pub fn run_single(
    method: Method,
    input: &Path,
    output: Option<&Path>,
    kernel_spec: Option<&str>,
    settings: &SolveSettings,
    noise_sd: f64,
    csv_path: Option<&Path>,
    maxval: MaxVal,
) -> Result<MethodRow> {
    let input_image = read_pgm(input)?;
    let (row, report) = match kernel_spec {
        Some(spec) => {
            // the input already is the blurred observation f
            let kernel = parse_kernel_spec(spec, input_image.geometry().spacing())?;
            if noise_sd > 0.0 {
                return Err(CliError::Usage(
                    "--noise-sd applies to denoise and compare runs; deblur takes f as-is".into(),
                ));
            }
            let problem = build_deblur(method, &input_image, &kernel, settings.params)?;
            let margins = (kernel.radius_x(), kernel.radius_y());
            solve_row(method, &problem, settings, &input_image, Some(margins), maxval)?
        }
        None => {
            let data = add_gaussian_noise(&input_image, noise_sd, settings.seed)?;
            let problem = build_denoise(method, &data, settings.params)?;
            solve_row(method, &problem, settings, &input_image, None, maxval)?
        }
    };
    if let Some(path) = output {
        write_pgm(&report.state.u, path, maxval, PgmFormat::Binary)?;
    }
    if let Some(path) = csv_path {
        write_csv(path, std::slice::from_ref(&row))?;
    }
    Ok(row)
}

/// `eval`: TGV^2 value of an image with its certificate.
pub fn run_eval(input: &Path, params: RegParams, tol: f64) -> Result<String> {
    let u = read_pgm(input)?;
    let ev = evaluate_tgv2(&u, &params, tol)?;
    Ok(format!(
        "tgv2_value={} certified_gap={} residual={} iterations={}",
        ev.value, ev.certified_gap, ev.residual, ev.iterations
    ))
}

/// `synth`: deterministic pattern, optional noise, written as PGM.
pub fn run_synth(
    pattern: &str,
    nx: usize,
    ny: usize,
    noise_sd: f64,
    seed: u64,
    output: &Path,
    maxval: MaxVal,
) -> Result<()> {
    let kind: PatternKind = pattern.parse()?;
    let field = synth_pattern(kind, nx, ny)?;
    let field = add_gaussian_noise(&field, noise_sd, seed)?;
    write_pgm(&field, output, maxval, PgmFormat::Binary)?;
    Ok(())
}

/// `adjoint-check`: certification report, one line per check.
pub fn run_adjoint_check(trials: usize, seed: u64) -> (String, bool) {
    let lines = verify::adjoint_certification(trials, seed, 1e-10);
    let all_pass = lines.iter().all(|l| l.pass);
    let mut text = String::from("check                                              metric threshold  result\n");
    for line in &lines {
        text.push_str(&line.render());
        text.push('\n');
    }
    text.push_str(if all_pass {
        "all adjoint checks passed\n"
    } else {
        "ADJOINT CHECKS FAILED\n"
    });
    (text, all_pass)
}
