//! CSV formats: sampled/dense signals, recovered signals with phase, and
//! calibration correspondences.
//!
//! Single-column signal files carry the header `t,re,im`; image-wide files
//! prepend the column index: `x,t,re,im`. Recovered files append
//! `mag,phase`. Readers accept either shape.

use super::{fmt_f64, IoError};
use crate::geometry::{CameraPixel, Correspondence, CorrespondenceSet, ProjectorRow, WorldPoint};
use crate::recovery::{DenseSignal, PhaseSignal};
use crate::signal::SampledSignal;
use num_complex::Complex64;
use std::path::Path;

/// One column's worth of `(t, value)` rows, tagged with its image column.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalColumn {
    pub x: usize,
    pub rows: Vec<(usize, Complex64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalTable {
    pub columns: Vec<SignalColumn>,
    /// Whether the file carried an explicit `x` column.
    pub per_column: bool,
}

impl SignalTable {
    /// Interprets each column as a sampled signal with the given period.
    /// Instants must be exactly `0, T_s, 2·T_s, …`.
    pub fn to_sampled(&self, sampling_period: usize) -> Result<Vec<(usize, SampledSignal)>, IoError> {
        self.columns
            .iter()
            .map(|col| {
                for (n, (t, _)) in col.rows.iter().enumerate() {
                    if *t != n * sampling_period {
                        return Err(IoError::Format(format!(
                            "column {}: instant {} at row {} does not match T_s = {}",
                            col.x, t, n, sampling_period
                        )));
                    }
                }
                let values: Vec<Complex64> = col.rows.iter().map(|(_, v)| *v).collect();
                let dense_len = values.len() * sampling_period;
                SampledSignal::new(values, sampling_period, dense_len)
                    .map(|s| (col.x, s))
                    .map_err(|e| IoError::Format(e.to_string()))
            })
            .collect()
    }

    /// Interprets each column as a dense signal (unit instant spacing).
    pub fn to_dense(&self) -> Result<Vec<(usize, DenseSignal)>, IoError> {
        self.columns
            .iter()
            .map(|col| {
                for (n, (t, _)) in col.rows.iter().enumerate() {
                    if *t != n {
                        return Err(IoError::Format(format!(
                            "column {}: dense signal has gap at instant {}",
                            col.x, t
                        )));
                    }
                }
                Ok((
                    col.x,
                    DenseSignal {
                        values: col.rows.iter().map(|(_, v)| *v).collect(),
                    },
                ))
            })
            .collect()
    }
}

/// Writes one signal as `t,re,im`.
pub fn write_signal(path: &Path, s: &SampledSignal) -> Result<(), IoError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "re", "im"])?;
    for (n, v) in s.values.iter().enumerate() {
        w.write_record([
            s.instant(n).to_string(),
            fmt_f64(v.re),
            fmt_f64(v.im),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes per-column rows as `x,t,re,im`. The iterator yields
/// `(column, instant, value)` triples.
pub fn write_signal_table<I>(path: &Path, rows: I) -> Result<(), IoError>
where
    I: IntoIterator<Item = (usize, usize, Complex64)>,
{
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x", "t", "re", "im"])?;
    for (x, t, v) in rows {
        w.write_record([x.to_string(), t.to_string(), fmt_f64(v.re), fmt_f64(v.im)])?;
    }
    w.flush()?;
    Ok(())
}

fn parse_f64(field: &str, what: &str) -> Result<f64, IoError> {
    field
        .trim()
        .parse()
        .map_err(|_| IoError::Format(format!("bad {what}: {field:?}")))
}

fn parse_usize(field: &str, what: &str) -> Result<usize, IoError> {
    field
        .trim()
        .parse()
        .map_err(|_| IoError::Format(format!("bad {what}: {field:?}")))
}

/// Reads a `t,re,im` or `x,t,re,im` file (recovered files with trailing
/// `mag,phase` columns are accepted too; the extras are ignored).
pub fn read_signal_table(path: &Path) -> Result<SignalTable, IoError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let headers = rdr.headers()?.clone();
    let fields: Vec<&str> = headers.iter().map(|h| h.trim()).collect();
    let per_column = match fields.as_slice() {
        ["x", "t", "re", "im", ..] => true,
        ["t", "re", "im", ..] => false,
        other => {
            return Err(IoError::Format(format!(
                "unrecognized signal header {other:?}"
            )))
        }
    };
    let mut columns: Vec<SignalColumn> = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let (x, off) = if per_column {
            (parse_usize(&record[0], "column index")?, 1)
        } else {
            (0, 0)
        };
        let t = parse_usize(&record[off], "instant")?;
        let re = parse_f64(&record[off + 1], "re")?;
        let im = parse_f64(&record[off + 2], "im")?;
        // Files are written column-major, so the right column is almost
        // always the last one touched.
        if columns.last().is_none_or(|c| c.x != x) {
            if let Some(c) = columns.iter_mut().find(|c| c.x == x) {
                c.rows.push((t, Complex64::new(re, im)));
                continue;
            }
            columns.push(SignalColumn { x, rows: Vec::new() });
        }
        columns
            .last_mut()
            .expect("column pushed above")
            .rows
            .push((t, Complex64::new(re, im)));
    }
    if columns.is_empty() || columns.iter().all(|c| c.rows.is_empty()) {
        return Err(IoError::Format("signal file has no data rows".into()));
    }
    Ok(SignalTable { columns, per_column })
}

/// One recovered column ready for serialization.
pub struct RecoveredColumn<'a> {
    pub x: usize,
    pub dense: &'a DenseSignal,
    /// Carrier-removed unwrapped phase; raw `arg` is written when absent.
    pub phase: Option<&'a PhaseSignal>,
}

/// Writes recovered columns as `x,t,re,im,mag,phase` (or `t,re,im,mag,phase`
/// when a single anonymous column is given).
pub fn write_recovered(
    path: &Path,
    columns: &[RecoveredColumn<'_>],
    with_x: bool,
) -> Result<(), IoError> {
    let mut w = csv::Writer::from_path(path)?;
    if with_x {
        w.write_record(["x", "t", "re", "im", "mag", "phase"])?;
    } else {
        w.write_record(["t", "re", "im", "mag", "phase"])?;
    }
    for col in columns {
        for (t, v) in col.dense.values.iter().enumerate() {
            let (mag, phase) = match col.phase {
                Some(ph) => (ph.magnitude[t], ph.phase[t]),
                None => (v.norm(), v.arg()),
            };
            let mut record = Vec::with_capacity(6);
            if with_x {
                record.push(col.x.to_string());
            }
            record.extend([
                t.to_string(),
                fmt_f64(v.re),
                fmt_f64(v.im),
                fmt_f64(mag),
                fmt_f64(phase),
            ]);
            w.write_record(&record)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// A recovered-phase row used by the reconstruction stage.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseColumn {
    pub x: usize,
    /// `(t, magnitude, phase)` per pixel.
    pub rows: Vec<(usize, f64, f64)>,
}

/// Reads the `mag,phase` channels of a recovered file.
pub fn read_phase_table(path: &Path) -> Result<Vec<PhaseColumn>, IoError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let headers = rdr.headers()?.clone();
    let fields: Vec<&str> = headers.iter().map(|h| h.trim()).collect();
    let per_column = match fields.as_slice() {
        ["x", "t", "re", "im", "mag", "phase"] => true,
        ["t", "re", "im", "mag", "phase"] => false,
        other => {
            return Err(IoError::Format(format!(
                "unrecognized recovered-signal header {other:?}"
            )))
        }
    };
    let mut columns: Vec<PhaseColumn> = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let (x, off) = if per_column {
            (parse_usize(&record[0], "column index")?, 1)
        } else {
            (0, 0)
        };
        let t = parse_usize(&record[off], "instant")?;
        let mag = parse_f64(&record[off + 3], "mag")?;
        let phase = parse_f64(&record[off + 4], "phase")?;
        if columns.last().is_none_or(|c| c.x != x) {
            if let Some(c) = columns.iter_mut().find(|c| c.x == x) {
                c.rows.push((t, mag, phase));
                continue;
            }
            columns.push(PhaseColumn { x, rows: Vec::new() });
        }
        columns
            .last_mut()
            .expect("column pushed above")
            .rows
            .push((t, mag, phase));
    }
    if columns.is_empty() {
        return Err(IoError::Format("recovered file has no data rows".into()));
    }
    Ok(columns)
}

/// Writes correspondences as `Xw,Yw,Zw,xc,yc,yp`; the `yp` column is
/// omitted when no record carries a projector row.
pub fn write_correspondences(path: &Path, set: &CorrespondenceSet) -> Result<(), IoError> {
    let any_rows = set.records.iter().any(|c| c.row.is_some());
    let mut w = csv::Writer::from_path(path)?;
    if any_rows {
        w.write_record(["Xw", "Yw", "Zw", "xc", "yc", "yp"])?;
    } else {
        w.write_record(["Xw", "Yw", "Zw", "xc", "yc"])?;
    }
    for c in &set.records {
        let mut record = vec![
            fmt_f64(c.world.x),
            fmt_f64(c.world.y),
            fmt_f64(c.world.z),
            fmt_f64(c.pixel.x),
            fmt_f64(c.pixel.y),
        ];
        if any_rows {
            record.push(c.row.map_or_else(String::new, |r| fmt_f64(r.0)));
        }
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a correspondence file; `yp` is optional both as a column and as
/// individual (empty) fields.
pub fn read_correspondences(path: &Path) -> Result<CorrespondenceSet, IoError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)?;
    let headers = rdr.headers()?.clone();
    let fields: Vec<&str> = headers.iter().map(|h| h.trim()).collect();
    let has_yp = match fields.as_slice() {
        ["Xw", "Yw", "Zw", "xc", "yc"] => false,
        ["Xw", "Yw", "Zw", "xc", "yc", "yp"] => true,
        other => {
            return Err(IoError::Format(format!(
                "unrecognized correspondence header {other:?}"
            )))
        }
    };
    let mut records = Vec::new();
    for record in rdr.records() {
        let record = record?;
        if record.len() < 5 {
            return Err(IoError::Format(format!(
                "correspondence row has {} fields, expected at least 5",
                record.len()
            )));
        }
        let world = WorldPoint::new(
            parse_f64(&record[0], "Xw")?,
            parse_f64(&record[1], "Yw")?,
            parse_f64(&record[2], "Zw")?,
        );
        let pixel = CameraPixel::new(parse_f64(&record[3], "xc")?, parse_f64(&record[4], "yc")?);
        let row = if has_yp && record.len() > 5 && !record[5].trim().is_empty() {
            Some(ProjectorRow(parse_f64(&record[5], "yp")?))
        } else {
            None
        };
        records.push(Correspondence { world, pixel, row });
    }
    if records.is_empty() {
        return Err(IoError::Format("correspondence file has no rows".into()));
    }
    Ok(CorrespondenceSet::new(records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn signal_round_trip_single_column() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let s = SampledSignal::new(
            vec![
                Complex64::new(1.0, -0.25),
                // 0.1 + 0.2 needs all 17 digits to round-trip
                Complex64::new(0.1 + 0.2, 2.0),
                Complex64::new(-3.5, 0.125),
                Complex64::new(0.1, 0.2),
            ],
            4,
            16,
        )
        .unwrap();
        write_signal(&path, &s).unwrap();
        let table = read_signal_table(&path).unwrap();
        assert!(!table.per_column);
        let back = table.to_sampled(4).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].1, s);
    }

    #[test]
    fn signal_table_round_trip_multi_column() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let rows = vec![
            (0usize, 0usize, Complex64::new(0.5, 0.0)),
            (0, 3, Complex64::new(-0.5, 1.0)),
            (2, 0, Complex64::new(0.25, 0.125)),
            (2, 3, Complex64::new(1e-17, -1e300)),
        ];
        write_signal_table(&path, rows.clone()).unwrap();
        let table = read_signal_table(&path).unwrap();
        assert!(table.per_column);
        let sampled = table.to_sampled(3).unwrap();
        assert_eq!(sampled.len(), 2);
        assert_eq!(sampled[0].0, 0);
        assert_eq!(sampled[1].0, 2);
        assert_eq!(sampled[1].1.values[1], Complex64::new(1e-17, -1e300));
    }

    #[test]
    fn sampled_conversion_rejects_wrong_period() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        write_signal_table(&path, vec![(0, 0, Complex64::new(1.0, 0.0)), (0, 5, Complex64::new(2.0, 0.0))])
            .unwrap();
        let table = read_signal_table(&path).unwrap();
        assert!(table.to_sampled(4).is_err());
    }

    #[test]
    fn correspondences_round_trip_with_and_without_rows() {
        let dir = tempdir().unwrap();
        let with = CorrespondenceSet::new(vec![
            Correspondence {
                world: WorldPoint::new(1.0, 2.0, 3.0),
                pixel: CameraPixel::new(4.5, 5.5),
                row: Some(ProjectorRow(6.25)),
            },
            Correspondence {
                world: WorldPoint::new(-1.0, 0.5, 0.0),
                pixel: CameraPixel::new(0.0, 1.0),
                row: None,
            },
        ]);
        let path = dir.path().join("c.csv");
        write_correspondences(&path, &with).unwrap();
        assert_eq!(read_correspondences(&path).unwrap(), with);

        let without = CorrespondenceSet::new(
            with.records
                .iter()
                .map(|c| Correspondence { row: None, ..*c })
                .collect(),
        );
        let path2 = dir.path().join("c2.csv");
        write_correspondences(&path2, &without).unwrap();
        assert_eq!(read_correspondences(&path2).unwrap(), without);
    }

    #[test]
    fn recovered_file_round_trips_phase_channel() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let dense = DenseSignal {
            values: vec![Complex64::new(1.0, 0.5), Complex64::new(-0.5, 0.25)],
        };
        let ph = PhaseSignal {
            phase: vec![0.1, 0.2],
            magnitude: vec![1.1, 0.9],
        };
        write_recovered(
            &path,
            &[RecoveredColumn {
                x: 3,
                dense: &dense,
                phase: Some(&ph),
            }],
            true,
        )
        .unwrap();
        let cols = read_phase_table(&path).unwrap();
        assert_eq!(cols.len(), 1);
        assert_eq!(cols[0].x, 3);
        assert_eq!(cols[0].rows, vec![(0, 1.1, 0.1), (1, 0.9, 0.2)]);
        // the same file also reads back as a signal table
        let sig = read_signal_table(&path).unwrap();
        assert_eq!(sig.columns[0].rows[1].1, Complex64::new(-0.5, 0.25));
    }
}
