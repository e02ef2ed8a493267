//! PGM raster export/import (P2 ASCII and P5 binary, maxval 255).
//!
//! Pattern rasters are kept in floating point internally; quantization to
//! 8 bits happens only here, with round-half-even. Complex patterns export
//! as a co-registered pair with `_i`/`_q` suffixes, mapping `[-I_0, +I_0]`
//! onto `[0, 255]`; real patterns map `[0, I_0]` onto `[0, 255]`.

use super::IoError;
use crate::signal::PatternImage;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgmFormat {
    /// P2, ASCII samples.
    Ascii,
    /// P5, one byte per sample.
    Binary,
}

/// Round-half-even quantization of `v` from `[lo, hi]` onto 0..=255.
pub fn quantize(v: f64, lo: f64, hi: f64) -> u8 {
    let unit = ((v - lo) / (hi - lo)).clamp(0.0, 1.0);
    (unit * 255.0).round_ties_even() as u8
}

pub fn write_pgm(
    path: &Path,
    width: usize,
    height: usize,
    data: &[u8],
    format: PgmFormat,
) -> Result<(), IoError> {
    assert_eq!(data.len(), width * height, "raster size mismatch");
    let file = fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    match format {
        PgmFormat::Binary => {
            write!(w, "P5\n{width} {height}\n255\n")?;
            w.write_all(data)?;
        }
        PgmFormat::Ascii => {
            write!(w, "P2\n{width} {height}\n255\n")?;
            for row in data.chunks(width) {
                let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                writeln!(w, "{}", line.join(" "))?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_pgm(path: &Path) -> Result<(usize, usize, Vec<u8>), IoError> {
    let raw = fs::read(path)?;
    let mut pos = 0usize;

    fn next_token(raw: &[u8], pos: &mut usize) -> Result<String, IoError> {
        // skip whitespace and '#' comment lines
        loop {
            while *pos < raw.len() && raw[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if *pos < raw.len() && raw[*pos] == b'#' {
                while *pos < raw.len() && raw[*pos] != b'\n' {
                    *pos += 1;
                }
            } else {
                break;
            }
        }
        let start = *pos;
        while *pos < raw.len() && !raw[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if start == *pos {
            return Err(IoError::Format("unexpected end of PGM header".into()));
        }
        Ok(String::from_utf8_lossy(&raw[start..*pos]).into_owned())
    }

    let magic = next_token(&raw, &mut pos)?;
    let width: usize = next_token(&raw, &mut pos)?
        .parse()
        .map_err(|_| IoError::Format("bad PGM width".into()))?;
    let height: usize = next_token(&raw, &mut pos)?
        .parse()
        .map_err(|_| IoError::Format("bad PGM height".into()))?;
    let maxval: usize = next_token(&raw, &mut pos)?
        .parse()
        .map_err(|_| IoError::Format("bad PGM maxval".into()))?;
    if maxval != 255 {
        return Err(IoError::Format(format!(
            "unsupported PGM maxval {maxval}, expected 255"
        )));
    }
    match magic.as_str() {
        "P5" => {
            pos += 1; // single whitespace after maxval
            let need = width * height;
            if raw.len() < pos + need {
                return Err(IoError::Format("truncated P5 payload".into()));
            }
            Ok((width, height, raw[pos..pos + need].to_vec()))
        }
        "P2" => {
            let mut data = Vec::with_capacity(width * height);
            for _ in 0..width * height {
                let v: u16 = next_token(&raw, &mut pos)?
                    .parse()
                    .map_err(|_| IoError::Format("bad P2 sample".into()))?;
                if v > 255 {
                    return Err(IoError::Format(format!("P2 sample {v} exceeds maxval")));
                }
                data.push(v as u8);
            }
            Ok((width, height, data))
        }
        other => Err(IoError::Format(format!("not a PGM file (magic {other})"))),
    }
}

/// Quantized rasters of a pattern, as exported: complex mode yields the
/// in-phase/quadrature pair, real mode a single raster.
pub fn quantize_pattern(img: &PatternImage) -> Vec<Vec<u8>> {
    let amp = img.config.amplitude;
    match &img.quadrature {
        Some(q) => {
            let i = img.in_phase.iter().map(|&v| quantize(v, -amp, amp)).collect();
            let qq = q.iter().map(|&v| quantize(v, -amp, amp)).collect();
            vec![i, qq]
        }
        None => vec![img.in_phase.iter().map(|&v| quantize(v, 0.0, amp)).collect()],
    }
}

/// Writes a pattern to `base` with the conventional suffixes; returns the
/// paths written (`base_i.pgm` + `base_q.pgm`, or `base.pgm`).
pub fn export_pattern(
    img: &PatternImage,
    base: &Path,
    format: PgmFormat,
) -> Result<Vec<PathBuf>, IoError> {
    let rasters = quantize_pattern(img);
    let (w, h) = (img.config.width, img.config.height);
    let with_suffix = |suffix: &str| -> PathBuf {
        let stem = base.file_name().map_or_else(String::new, |s| {
            s.to_string_lossy().into_owned()
        });
        base.with_file_name(format!("{stem}{suffix}.pgm"))
    };
    let paths = if rasters.len() == 2 {
        vec![with_suffix("_i"), with_suffix("_q")]
    } else {
        vec![with_suffix("")]
    };
    for (path, raster) in paths.iter().zip(&rasters) {
        write_pgm(path, w, h, raster, format)?;
    }
    Ok(paths)
}
