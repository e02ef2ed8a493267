//! Minimal SVG line charts for report artifacts.
//!
//! One polyline per series over an implicit 0..n x-axis, auto-scaled
//! y-axis, a frame and a small legend. Nothing interactive; the files are
//! plot artifacts for eyeballing recovered signals and spectra.

use super::IoError;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

const COLORS: [&str; 5] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];
const MARGIN: f64 = 46.0;

pub struct Series<'a> {
    pub label: &'a str,
    pub values: &'a [f64],
}

pub fn write_line_chart(
    path: &Path,
    title: &str,
    series: &[Series<'_>],
    width: u32,
    height: u32,
) -> Result<(), IoError> {
    if series.is_empty() || series.iter().all(|s| s.values.is_empty()) {
        return Err(IoError::Format("nothing to plot".into()));
    }
    let (w, h) = (width as f64, height as f64);
    let xmax = series.iter().map(|s| s.values.len()).max().unwrap_or(1) as f64 - 1.0;
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for s in series {
        for &v in s.values {
            ymin = ymin.min(v);
            ymax = ymax.max(v);
        }
    }
    if !(ymin.is_finite() && ymax.is_finite()) {
        return Err(IoError::Format("non-finite values in plot".into()));
    }
    if ymax - ymin < 1e-300 {
        ymax += 0.5;
        ymin -= 0.5;
    }
    let sx = |i: f64| MARGIN + i / xmax.max(1.0) * (w - 2.0 * MARGIN);
    let sy = |v: f64| h - MARGIN - (v - ymin) / (ymax - ymin) * (h - 2.0 * MARGIN);

    let file = fs::File::create(path)?;
    let mut out = BufWriter::new(file);
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    )?;
    writeln!(
        out,
        r#"<rect width="{width}" height="{height}" fill="white"/>"#
    )?;
    writeln!(
        out,
        r#"<text x="{}" y="18" font-family="sans-serif" font-size="13">{}</text>"#,
        MARGIN,
        xml_escape(title)
    )?;
    writeln!(
        out,
        r##"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#888"/>"##,
        MARGIN,
        MARGIN,
        w - 2.0 * MARGIN,
        h - 2.0 * MARGIN
    )?;
    for (tick, v) in [(0.0, ymin), (0.5, (ymin + ymax) / 2.0), (1.0, ymax)] {
        let y = h - MARGIN - tick * (h - 2.0 * MARGIN);
        writeln!(
            out,
            r#"<text x="4" y="{:.1}" font-family="sans-serif" font-size="10">{v:.3e}</text>"#,
            y + 3.0
        )?;
    }
    for (k, s) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let points: Vec<String> = s
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| format!("{:.2},{:.2}", sx(i as f64), sy(v)))
            .collect();
        writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1" points="{}"/>"#,
            points.join(" ")
        )?;
        writeln!(
            out,
            r#"<text x="{}" y="{:.1}" font-family="sans-serif" font-size="11" fill="{color}">{}</text>"#,
            w - MARGIN + 4.0,
            MARGIN + 14.0 * k as f64 + 10.0,
            xml_escape(s.label)
        )?;
    }
    writeln!(out, "</svg>")?;
    out.flush()?;
    Ok(())
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn chart_contains_one_polyline_per_series() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("c.svg");
        let a: Vec<f64> = (0..32).map(|i| (i as f64 * 0.3).sin()).collect();
        let b: Vec<f64> = (0..32).map(|i| (i as f64 * 0.3).cos()).collect();
        write_line_chart(
            &path,
            "probe",
            &[
                Series { label: "re", values: &a },
                Series { label: "im", values: &b },
            ],
            480,
            240,
        )
        .unwrap();
        let raw = std::fs::read_to_string(&path).unwrap();
        assert_eq!(raw.matches("<polyline").count(), 2);
        assert!(raw.contains("</svg>"));
    }

    #[test]
    fn empty_series_is_an_error() {
        let dir = tempdir().unwrap();
        assert!(write_line_chart(&dir.path().join("x.svg"), "t", &[], 100, 100).is_err());
    }
}
