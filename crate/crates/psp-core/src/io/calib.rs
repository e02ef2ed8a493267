//! Calibration result file: both parameter vectors with their residuals.

use super::IoError;
use crate::geometry::{CameraProjection, GeometryError, ProjectorProjection};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationFile {
    /// The 11 camera parameters.
    pub theta_c: Vec<f64>,
    /// The 7 projector parameters; absent for camera-only calibrations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_p: Option<Vec<f64>>,
    pub residual_c: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_p: Option<f64>,
}

impl CalibrationFile {
    pub fn camera(&self) -> Result<CameraProjection, IoError> {
        let params: [f64; 11] = self
            .theta_c
            .as_slice()
            .try_into()
            .map_err(|_| IoError::Format(format!("theta_c has {} entries, expected 11", self.theta_c.len())))?;
        CameraProjection::new(params).map_err(geometry_to_format)
    }

    pub fn projector(&self) -> Result<ProjectorProjection, IoError> {
        let theta = self
            .theta_p
            .as_ref()
            .ok_or_else(|| IoError::Format("calibration file carries no projector solve".into()))?;
        let params: [f64; 7] = theta
            .as_slice()
            .try_into()
            .map_err(|_| IoError::Format(format!("theta_p has {} entries, expected 7", theta.len())))?;
        ProjectorProjection::new(params).map_err(geometry_to_format)
    }
}

fn geometry_to_format(e: GeometryError) -> IoError {
    IoError::Format(e.to_string())
}

pub fn save_calibration(path: &Path, calib: &CalibrationFile) -> Result<(), IoError> {
    let json = serde_json::to_string_pretty(calib)
        .map_err(|e| IoError::Format(e.to_string()))?;
    fs::write(path, json + "\n")?;
    Ok(())
}

pub fn load_calibration(path: &Path) -> Result<CalibrationFile, IoError> {
    let raw = fs::read_to_string(path)?;
    serde_json::from_str(&raw).map_err(|e| IoError::Format(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn calibration_round_trip() {
        let calib = CalibrationFile {
            theta_c: (1..=11).map(f64::from).collect(),
            theta_p: Some((1..=7).map(f64::from).collect()),
            residual_c: 1e-12,
            residual_p: Some(2e-12),
        };
        let dir = tempdir().unwrap();
        let path = dir.path().join("calib.json");
        save_calibration(&path, &calib).unwrap();
        let back = load_calibration(&path).unwrap();
        assert_eq!(back, calib);
        assert_eq!(back.camera().unwrap().params()[4], 5.0);
        assert_eq!(back.projector().unwrap().params()[6], 7.0);
    }

    #[test]
    fn camera_only_file_has_no_projector() {
        let calib = CalibrationFile {
            theta_c: vec![0.0; 11],
            theta_p: None,
            residual_c: 0.0,
            residual_p: None,
        };
        let dir = tempdir().unwrap();
        let path = dir.path().join("calib.json");
        save_calibration(&path, &calib).unwrap();
        let raw = std::fs::read_to_string(&path).unwrap();
        assert!(!raw.contains("theta_p"));
        assert!(load_calibration(&path).unwrap().projector().is_err());
    }

    #[test]
    fn wrong_arity_is_a_format_error() {
        let calib = CalibrationFile {
            theta_c: vec![0.0; 10],
            theta_p: None,
            residual_c: 0.0,
            residual_p: None,
        };
        assert!(matches!(calib.camera(), Err(IoError::Format(_))));
    }
}
