//! PGM (P2 ASCII / P5 binary) image reading and writing.
//!
//! Pixels map to [0, 1] by division by maxval on read; writing inverts
//! with round-half-away-from-zero and clamps. Only maxval 255 and 65535
//! are accepted; 16-bit samples are big-endian per the format.

use crate::error::{CliError, Result};
use std::fs;
use std::path::Path;
use tgv_core::{GridGeometry, ScalarField};

/// Supported maximum sample values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaxVal {
    Eight,
    Sixteen,
}

impl MaxVal {
    pub fn value(self) -> u32 {
        match self {
            MaxVal::Eight => 255,
            MaxVal::Sixteen => 65535,
        }
    }

    pub fn from_value(v: u32) -> Option<Self> {
        match v {
            255 => Some(MaxVal::Eight),
            65535 => Some(MaxVal::Sixteen),
            _ => None,
        }
    }
}

/// On-disk encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgmFormat {
    Ascii,
    Binary,
}

struct Scanner<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Scanner<'a> {
    fn new(data: &'a [u8]) -> Self {
        Self { data, pos: 0 }
    }

    fn skip_whitespace_and_comments(&mut self) {
        while self.pos < self.data.len() {
            let b = self.data[self.pos];
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn read_number(&mut self, what: &str) -> Result<u32> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.pos < self.data.len() && self.data[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(CliError::pgm(start, format!("expected {what}")));
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| CliError::pgm(start, format!("invalid {what}")))
    }
}

/// Parses a P2 or P5 PGM from raw bytes.
pub fn read_pgm_bytes(data: &[u8]) -> Result<ScalarField> {
    if data.len() < 2 {
        return Err(CliError::pgm(0, "truncated header"));
    }
    let binary = match &data[..2] {
        b"P2" => false,
        b"P5" => true,
        _ => return Err(CliError::pgm(0, "magic number must be P2 or P5")),
    };
    let mut sc = Scanner::new(data);
    sc.pos = 2;
    let width = sc.read_number("width")? as usize;
    let height = sc.read_number("height")? as usize;
    let maxval_raw = sc.read_number("maxval")?;
    let maxval = MaxVal::from_value(maxval_raw)
        .ok_or_else(|| CliError::pgm(sc.pos, format!("maxval must be 255 or 65535, got {maxval_raw}")))?;
    if width == 0 || height == 0 {
        return Err(CliError::pgm(sc.pos, "image dimensions must be positive"));
    }

    let geometry = GridGeometry::unit(width, height)?;
    let count = width * height;
    let scale = 1.0 / maxval.value() as f64;
    let mut values = Vec::with_capacity(count);

    if binary {
        // exactly one whitespace byte separates the header from the payload
        if sc.pos >= data.len() || !data[sc.pos].is_ascii_whitespace() {
            return Err(CliError::pgm(sc.pos, "expected whitespace before binary payload"));
        }
        sc.pos += 1;
        let bytes_per = if maxval == MaxVal::Eight { 1 } else { 2 };
        let need = count * bytes_per;
        let have = data.len() - sc.pos;
        if have < need {
            return Err(CliError::pgm(
                data.len(),
                format!("truncated payload: need {need} bytes, have {have}"),
            ));
        }
        let payload = &data[sc.pos..sc.pos + need];
        match maxval {
            MaxVal::Eight => {
                for &b in payload {
                    values.push(b as f64 * scale);
                }
            }
            MaxVal::Sixteen => {
                for chunk in payload.chunks_exact(2) {
                    let v = u16::from_be_bytes([chunk[0], chunk[1]]);
                    values.push(v as f64 * scale);
                }
            }
        }
    } else {
        for _ in 0..count {
            let v = sc.read_number("pixel value")?;
            if v > maxval.value() {
                return Err(CliError::pgm(
                    sc.pos,
                    format!("pixel value {v} exceeds maxval {}", maxval.value()),
                ));
            }
            values.push(v as f64 * scale);
        }
    }

    Ok(ScalarField::from_values(geometry, values)?)
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<ScalarField> {
    read_pgm_bytes(&fs::read(path)?)
}

fn quantize(v: f64, maxval: u32) -> u32 {
    let scaled = (v * maxval as f64).round(); // round half away from zero
    scaled.clamp(0.0, maxval as f64) as u32
}

/// The field as it survives a write/read roundtrip at the given maxval.
pub fn quantized(field: &ScalarField, maxval: MaxVal) -> ScalarField {
    let mv = maxval.value();
    let scale = 1.0 / mv as f64;
    let mut out = field.clone();
    for v in out.values_mut() {
        *v = quantize(*v, mv) as f64 * scale;
    }
    out
}

/// Encodes a field to PGM bytes.
pub fn pgm_bytes(field: &ScalarField, maxval: MaxVal, format: PgmFormat) -> Vec<u8> {
    let (w, h) = (field.geometry().width(), field.geometry().height());
    let mv = maxval.value();
    let mut out = Vec::new();
    match format {
        PgmFormat::Binary => {
            out.extend_from_slice(format!("P5\n{w} {h}\n{mv}\n").as_bytes());
            for &v in field.values() {
                let q = quantize(v, mv);
                match maxval {
                    MaxVal::Eight => out.push(q as u8),
                    MaxVal::Sixteen => out.extend_from_slice(&(q as u16).to_be_bytes()),
                }
            }
        }
        PgmFormat::Ascii => {
            out.extend_from_slice(format!("P2\n{w} {h}\n{mv}\n").as_bytes());
            for (i, &v) in field.values().iter().enumerate() {
                let q = quantize(v, mv);
                let sep = if (i + 1) % w == 0 { "\n" } else { " " };
                out.extend_from_slice(format!("{q}{sep}").as_bytes());
            }
        }
    }
    out
}

pub fn write_pgm(
    field: &ScalarField,
    path: impl AsRef<Path>,
    maxval: MaxVal,
    format: PgmFormat,
) -> Result<()> {
    fs::write(path, pgm_bytes(field, maxval, format))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use tgv_core::rng::SplitMix64;
    use tgv_core::InnerSpace;

    #[test]
    fn p5_header_example() {
        // "P5 3 2 255" followed by 6 bytes
        let mut data = b"P5 3 2 255\n".to_vec();
        data.extend_from_slice(&[0, 51, 102, 153, 204, 255]);
        let f = read_pgm_bytes(&data).unwrap();
        assert_eq!(f.geometry().width(), 3);
        assert_eq!(f.geometry().height(), 2);
        for (got, want) in f.values().iter().zip([0.0, 51.0, 102.0, 153.0, 204.0, 255.0]) {
            assert!((got - want / 255.0).abs() < 1e-15);
        }
    }

    #[test]
    fn p2_and_p5_read_identically() {
        let g = GridGeometry::unit(5, 4).unwrap();
        let mut rng = SplitMix64::new(12);
        let mut f = ScalarField::zeros(g);
        for v in f.values_mut() {
            *v = rng.next_f64();
        }
        for maxval in [MaxVal::Eight, MaxVal::Sixteen] {
            let a = read_pgm_bytes(&pgm_bytes(&f, maxval, PgmFormat::Ascii)).unwrap();
            let b = read_pgm_bytes(&pgm_bytes(&f, maxval, PgmFormat::Binary)).unwrap();
            assert_eq!(a.values(), b.values());
        }
    }

    #[test]
    fn sixteen_bit_roundtrip_is_within_quantization_bound() {
        let g = GridGeometry::unit(16, 16).unwrap();
        let mut rng = SplitMix64::new(77);
        let mut f = ScalarField::zeros(g);
        for v in f.values_mut() {
            *v = rng.next_f64();
        }
        let back = read_pgm_bytes(&pgm_bytes(&f, MaxVal::Sixteen, PgmFormat::Binary)).unwrap();
        let bound = 0.5 / 65535.0;
        for (a, b) in f.values().iter().zip(back.values()) {
            assert!((a - b).abs() <= bound + 1e-15, "{a} vs {b}");
        }
    }

    #[test]
    fn read_write_read_is_idempotent() {
        let g = GridGeometry::unit(7, 3).unwrap();
        let mut rng = SplitMix64::new(5);
        let mut f = ScalarField::zeros(g);
        for v in f.values_mut() {
            *v = rng.next_f64();
        }
        let once = read_pgm_bytes(&pgm_bytes(&f, MaxVal::Eight, PgmFormat::Binary)).unwrap();
        let twice = read_pgm_bytes(&pgm_bytes(&once, MaxVal::Eight, PgmFormat::Binary)).unwrap();
        assert_eq!(once.values(), twice.values());
    }

    #[test]
    fn rejects_malformed_inputs_with_offsets() {
        assert!(matches!(
            read_pgm_bytes(b"P3 1 1 255 0"),
            Err(CliError::PgmParse { offset: 0, .. })
        ));
        // truncated binary payload: error carries the end-of-data offset
        let mut data = b"P5 3 2 255\n".to_vec();
        data.extend_from_slice(&[0, 1, 2]);
        match read_pgm_bytes(&data) {
            Err(CliError::PgmParse { offset, message }) => {
                assert_eq!(offset, data.len());
                assert!(message.contains("truncated"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        // unsupported maxval
        assert!(read_pgm_bytes(b"P2 1 1 300\n0").is_err());
        // comments are fine
        let f = read_pgm_bytes(b"P2 # comment\n2 1 255\n7 250").unwrap();
        assert_eq!(f.geometry().width(), 2);
    }

    #[test]
    fn writer_clamps_and_rounds_half_away_from_zero() {
        let g = GridGeometry::unit(4, 1).unwrap();
        let f = ScalarField::from_values(g, vec![-0.2, 0.5 / 255.0, 1.5, 0.9999]).unwrap();
        let bytes = pgm_bytes(&f, MaxVal::Eight, PgmFormat::Binary);
        let payload = &bytes[bytes.len() - 4..];
        assert_eq!(payload, &[0, 1, 255, 255]);
    }

    #[test]
    fn roundtrip_error_is_small_in_l2() {
        let g = GridGeometry::unit(10, 10).unwrap();
        let mut rng = SplitMix64::new(3);
        let mut f = ScalarField::zeros(g);
        for v in f.values_mut() {
            *v = rng.next_f64();
        }
        let back = read_pgm_bytes(&pgm_bytes(&f, MaxVal::Sixteen, PgmFormat::Binary)).unwrap();
        let mut d = back;
        let mut neg = f.clone();
        neg.scale_mut(-1.0);
        d.axpy(1.0, &neg);
        assert!(d.norm() < 1e-4);
    }
}
