//! ASCII PLY point clouds with a per-point validity flag.
//!
//! Pixels whose phase was undefined or whose triangulation was
//! ill-conditioned are written as `0 0 0` with `valid = 0` so the raster
//! structure of the cloud is preserved for downstream tools.

use super::{fmt_f64, IoError};
use crate::geometry::WorldPoint;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloudPoint {
    pub point: WorldPoint,
    pub valid: bool,
}

impl CloudPoint {
    pub fn valid(point: WorldPoint) -> Self {
        Self { point, valid: true }
    }

    pub fn invalid() -> Self {
        Self {
            point: WorldPoint::new(0.0, 0.0, 0.0),
            valid: false,
        }
    }
}

pub fn write_ply(path: &Path, cloud: &[CloudPoint]) -> Result<(), IoError> {
    let file = fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    writeln!(w, "ply")?;
    writeln!(w, "format ascii 1.0")?;
    writeln!(w, "element vertex {}", cloud.len())?;
    writeln!(w, "property double x")?;
    writeln!(w, "property double y")?;
    writeln!(w, "property double z")?;
    writeln!(w, "property uchar valid")?;
    writeln!(w, "end_header")?;
    for p in cloud {
        writeln!(
            w,
            "{} {} {} {}",
            fmt_f64(p.point.x),
            fmt_f64(p.point.y),
            fmt_f64(p.point.z),
            u8::from(p.valid)
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Minimal reader for the clouds this crate writes (and any ASCII PLY with
/// leading x/y/z vertex properties).
pub fn read_ply(path: &Path) -> Result<Vec<CloudPoint>, IoError> {
    let raw = fs::read_to_string(path)?;
    let mut lines = raw.lines();
    if lines.next().map(str::trim) != Some("ply") {
        return Err(IoError::Format("missing ply magic".into()));
    }
    let mut vertex_count: Option<usize> = None;
    let mut property_count = 0usize;
    let mut has_valid = false;
    for line in lines.by_ref() {
        let line = line.trim();
        if line == "end_header" {
            break;
        }
        if let Some(rest) = line.strip_prefix("element vertex ") {
            vertex_count = Some(
                rest.trim()
                    .parse()
                    .map_err(|_| IoError::Format("bad vertex count".into()))?,
            );
        } else if line.starts_with("property") {
            property_count += 1;
            if line.ends_with(" valid") {
                has_valid = true;
            }
        } else if line.starts_with("element") {
            return Err(IoError::Format("only vertex elements are supported".into()));
        }
    }
    let count = vertex_count.ok_or_else(|| IoError::Format("no vertex element".into()))?;
    if property_count < 3 {
        return Err(IoError::Format("vertex element needs x, y, z".into()));
    }
    let mut cloud = Vec::with_capacity(count);
    for _ in 0..count {
        let line = lines
            .next()
            .ok_or_else(|| IoError::Format("truncated vertex list".into()))?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < property_count {
            return Err(IoError::Format(format!(
                "vertex row has {} fields, expected {}",
                fields.len(),
                property_count
            )));
        }
        let parse = |i: usize| -> Result<f64, IoError> {
            fields[i]
                .parse()
                .map_err(|_| IoError::Format(format!("bad vertex field {:?}", fields[i])))
        };
        let point = WorldPoint::new(parse(0)?, parse(1)?, parse(2)?);
        let valid = if has_valid {
            fields[property_count - 1] != "0"
        } else {
            true
        };
        cloud.push(CloudPoint { point, valid });
    }
    Ok(cloud)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn cloud_round_trips_with_declared_count() {
        let cloud = vec![
            CloudPoint::valid(WorldPoint::new(1.0, -2.5, 0.125)),
            CloudPoint::invalid(),
            CloudPoint::valid(WorldPoint::new(0.1 + 0.2, 1e-300, 3e5)),
        ];
        let dir = tempdir().unwrap();
        let path = dir.path().join("cloud.ply");
        write_ply(&path, &cloud).unwrap();

        let raw = std::fs::read_to_string(&path).unwrap();
        assert!(raw.contains("element vertex 3"));

        let back = read_ply(&path).unwrap();
        assert_eq!(back.len(), 3);
        assert_eq!(back, cloud);
    }

    #[test]
    fn truncated_file_is_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.ply");
        std::fs::write(
            &path,
            "ply\nformat ascii 1.0\nelement vertex 2\nproperty double x\nproperty double y\nproperty double z\nend_header\n0 0 0\n",
        )
        .unwrap();
        assert!(matches!(read_ply(&path), Err(IoError::Format(_))));
    }
}
