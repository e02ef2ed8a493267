use super::print_summary;
use crate::error::CliError;
use clap::Args;
use psp_core::geometry::{solve_camera, solve_projector};
use psp_core::io::calib::{save_calibration, CalibrationFile};
use psp_core::io::csvio::read_correspondences;
use serde_json::json;
use std::path::PathBuf;

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Correspondence CSV (`Xw,Yw,Zw,xc,yc[,yp]`).
    #[arg(long)]
    pub input: PathBuf,
    /// Calibration JSON output.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: CalibrateArgs, verbose: bool) -> Result<(), CliError> {
    let set = read_correspondences(&args.input)?;
    let camera = solve_camera(&set)?;
    let has_rows = set.records.iter().any(|c| c.row.is_some());
    let projector = if has_rows {
        Some(solve_projector(&set)?)
    } else {
        None
    };

    let file = CalibrationFile {
        theta_c: camera.projection.params().to_vec(),
        theta_p: projector
            .as_ref()
            .map(|p| p.projection.params().to_vec()),
        residual_c: camera.residual,
        residual_p: projector.as_ref().map(|p| p.residual),
    };
    save_calibration(&args.out, &file)?;

    if verbose {
        eprintln!(
            "calibrate: {} records, camera residual {:.3e}",
            set.len(),
            camera.residual
        );
    }
    print_summary(json!({
        "command": "calibrate",
        "out": args.out,
        "records": set.len(),
        "residual_c": camera.residual,
        "residual_p": projector.as_ref().map(|p| p.residual),
    }));
    Ok(())
}
