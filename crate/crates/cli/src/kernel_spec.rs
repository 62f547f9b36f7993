//! Convolution kernel sources: text files and generated Gaussians.
//!
//! File format: first line `width height h`, then `height` rows of `width`
//! space-separated decimal weights. The spec string `gaussian:sd=<s>,size=<n>`
//! generates a truncated, unit-mass Gaussian instead.

use crate::error::{CliError, Result};
use std::fs;
use std::path::Path;
use tgv_core::ConvolutionKernel;

/// Truncated Gaussian of odd size, normalized to unit mass
/// (`sum(w) h^2 = 1`), offsets measured in pixels.
pub fn gaussian_kernel(sd: f64, size: usize, spacing: f64) -> Result<ConvolutionKernel> {
    if !(sd > 0.0) || !sd.is_finite() {
        return Err(CliError::Usage(format!("gaussian sd must be positive, got {sd}")));
    }
    if size == 0 || size % 2 == 0 {
        return Err(CliError::Usage(format!("gaussian size must be odd, got {size}")));
    }
    let c = (size / 2) as f64;
    let mut weights = Vec::with_capacity(size * size);
    let mut sum = 0.0;
    for i in 0..size {
        for j in 0..size {
            let dx = j as f64 - c;
            let dy = i as f64 - c;
            let w = (-(dx * dx + dy * dy) / (2.0 * sd * sd)).exp();
            weights.push(w);
            sum += w;
        }
    }
    let norm = 1.0 / (sum * spacing * spacing);
    for w in weights.iter_mut() {
        *w *= norm;
    }
    Ok(ConvolutionKernel::new(size, size, spacing, weights)?)
}

/// Reads the kernel text format.
pub fn read_kernel_file(path: impl AsRef<Path>) -> Result<ConvolutionKernel> {
    let text = fs::read_to_string(&path)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| CliError::KernelFile("empty kernel file".into()))?;
    let mut parts = header.split_whitespace();
    let width: usize = parts
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| CliError::KernelFile("header must start with the width".into()))?;
    let height: usize = parts
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| CliError::KernelFile("header is missing the height".into()))?;
    let spacing: f64 = parts
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| CliError::KernelFile("header is missing the spacing h".into()))?;
    if parts.next().is_some() {
        return Err(CliError::KernelFile("header has trailing tokens".into()));
    }

    let mut weights = Vec::with_capacity(width * height);
    for (row, line) in lines.enumerate() {
        if row >= height {
            return Err(CliError::KernelFile(format!(
                "more than {height} weight rows"
            )));
        }
        for tok in line.split_whitespace() {
            let w: f64 = tok
                .parse()
                .map_err(|_| CliError::KernelFile(format!("bad weight `{tok}` in row {row}")))?;
            weights.push(w);
        }
        if weights.len() != (row + 1) * width {
            return Err(CliError::KernelFile(format!(
                "row {row} does not hold exactly {width} weights"
            )));
        }
    }
    if weights.len() != width * height {
        return Err(CliError::KernelFile(format!(
            "expected {height} weight rows, found fewer"
        )));
    }
    Ok(ConvolutionKernel::new(width, height, spacing, weights)?)
}

/// Writes the kernel text format (used by experiments to pin kernels).
pub fn write_kernel_file(kernel: &ConvolutionKernel, path: impl AsRef<Path>) -> Result<()> {
    let mut text = format!(
        "{} {} {}\n",
        kernel.width(),
        kernel.height(),
        kernel.spacing()
    );
    for row in 0..kernel.height() {
        let line: Vec<String> = (0..kernel.width())
            .map(|col| kernel.weights()[row * kernel.width() + col].to_string())
            .collect();
        text.push_str(&line.join(" "));
        text.push('\n');
    }
    fs::write(path, text)?;
    Ok(())
}

/// Resolves a `--kernel` argument: `gaussian:sd=<s>,size=<n>` or a file path.
pub fn parse_kernel_spec(spec: &str, spacing: f64) -> Result<ConvolutionKernel> {
    if let Some(rest) = spec.strip_prefix("gaussian:") {
        let mut sd = None;
        let mut size = None;
        for part in rest.split(',') {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("bad kernel spec component `{part}`")))?;
            match key {
                "sd" => {
                    sd = Some(value.parse::<f64>().map_err(|_| {
                        CliError::Usage(format!("bad gaussian sd `{value}`"))
                    })?)
                }
                "size" => {
                    size = Some(value.parse::<usize>().map_err(|_| {
                        CliError::Usage(format!("bad gaussian size `{value}`"))
                    })?)
                }
                _ => return Err(CliError::Usage(format!("unknown kernel spec key `{key}`"))),
            }
        }
        let sd = sd.ok_or_else(|| CliError::Usage("gaussian spec needs sd=<s>".into()))?;
        let size = size.ok_or_else(|| CliError::Usage("gaussian spec needs size=<n>".into()))?;
        gaussian_kernel(sd, size, spacing)
    } else {
        read_kernel_file(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use tgv_core::kernel_stats;

    #[test]
    fn gaussian_kernel_has_unit_mass_and_zero_moment() {
        let k = gaussian_kernel(2.0, 9, 1.0).unwrap();
        let s = kernel_stats(&k);
        assert!((s.kbar - 1.0).abs() < 1e-12);
        assert!(s.m.0.abs() < 1e-12 && s.m.1.abs() < 1e-12);
    }

    #[test]
    fn kernel_file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("k.txt");
        let k = gaussian_kernel(1.0, 3, 0.5).unwrap();
        write_kernel_file(&k, &path).unwrap();
        let back = read_kernel_file(&path).unwrap();
        assert_eq!(k, back);
    }

    #[test]
    fn kernel_file_parse_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("k.txt");
        std::fs::write(&path, "3 3\n").unwrap();
        assert!(matches!(read_kernel_file(&path), Err(CliError::KernelFile(_))));
        std::fs::write(&path, "3 1 1.0\n0.1 0.2\n").unwrap();
        assert!(read_kernel_file(&path).is_err());
        std::fs::write(&path, "2 1 1.0\n0.1 0.2\n").unwrap();
        // even width is rejected by the kernel type itself
        assert!(read_kernel_file(&path).is_err());
    }

    #[test]
    fn spec_strings() {
        assert!(parse_kernel_spec("gaussian:sd=2,size=9", 1.0).is_ok());
        assert!(parse_kernel_spec("gaussian:sd=2", 1.0).is_err());
        assert!(parse_kernel_spec("gaussian:sd=0,size=9", 1.0).is_err());
        assert!(parse_kernel_spec("gaussian:sd=1,size=4", 1.0).is_err());
        assert!(parse_kernel_spec("/no/such/file", 1.0).is_err());
    }
}
