use super::print_summary;
use crate::error::CliError;
use clap::Args;
use psp_core::geometry::{triangulate, CameraPixel};
use psp_core::io::calib::load_calibration;
use psp_core::io::csvio::read_phase_table;
use psp_core::io::ply::{write_ply, CloudPoint};
use psp_core::recovery::{phase_to_projector_row, EPSILON_MAG_RELATIVE};
use serde_json::json;
use std::path::PathBuf;

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    /// Calibration JSON with camera and projector solves.
    #[arg(long)]
    pub calib: PathBuf,
    /// Recovered-signal CSV with the phase channel (`x,t,...,mag,phase`).
    #[arg(long)]
    pub input: PathBuf,
    /// Carrier frequency the phase was extracted against.
    #[arg(long)]
    pub f0: f64,
    /// Designed amplitude I_0 (validity masking of dark pixels).
    #[arg(long, default_value_t = 1.0)]
    pub amplitude: f64,
    /// Output PLY path.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: ReconstructArgs, verbose: bool) -> Result<(), CliError> {
    if !(args.f0 > 0.0 && args.f0 < 0.5) {
        return Err(CliError::validation(format!(
            "carrier frequency must satisfy 0 < f0 < 0.5, got {}",
            args.f0
        )));
    }
    let calib = load_calibration(&args.calib)?;
    let camera = calib.camera()?;
    let projector = calib.projector()?;
    let columns = read_phase_table(&args.input)?;
    let mag_floor = EPSILON_MAG_RELATIVE * args.amplitude;

    let mut cloud = Vec::new();
    let mut invalid = 0usize;
    for col in &columns {
        for &(t, mag, phase) in &col.rows {
            if mag < mag_floor {
                cloud.push(CloudPoint::invalid());
                invalid += 1;
                continue;
            }
            let row = phase_to_projector_row(phase, args.f0, t as f64);
            let pixel = CameraPixel::new(col.x as f64, t as f64);
            match triangulate(&camera, &projector, pixel, row) {
                Ok(p) => cloud.push(CloudPoint::valid(p)),
                Err(_) => {
                    cloud.push(CloudPoint::invalid());
                    invalid += 1;
                }
            }
        }
    }
    write_ply(&args.out, &cloud)?;

    if verbose {
        eprintln!(
            "reconstruct: {} points ({} masked invalid)",
            cloud.len(),
            invalid
        );
    }
    print_summary(json!({
        "command": "reconstruct",
        "out": args.out,
        "points": cloud.len(),
        "invalid": invalid,
    }));
    Ok(())
}
