use super::{print_summary, ModeArg, PgmFormatArg};
use crate::error::CliError;
use clap::Args;
use psp_core::io::pgm::export_pattern;
use psp_core::signal::{generate_pattern, PatternConfig};
use serde_json::json;
use std::path::PathBuf;

#[derive(Debug, Args)]
pub struct PatternArgs {
    /// Raster height in pixels (must be a multiple of --ts).
    #[arg(long)]
    pub height: usize,
    /// Raster width in pixels.
    #[arg(long)]
    pub width: usize,
    /// Sampling period T_s in pixels.
    #[arg(long)]
    pub ts: usize,
    /// Carrier frequency f0 in cycles per pixel (0 < f0 < 0.5).
    #[arg(long)]
    pub f0: f64,
    /// Carrier amplitude I_0.
    #[arg(long, default_value_t = 1.0)]
    pub amplitude: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Complex)]
    pub mode: ModeArg,
    /// Output base path; complex mode writes <out>_i.pgm and <out>_q.pgm.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = PgmFormatArg::P5)]
    pub pgm_format: PgmFormatArg,
}

impl PatternArgs {
    pub fn config(&self) -> Result<PatternConfig, CliError> {
        let cfg = PatternConfig {
            height: self.height,
            width: self.width,
            sampling_period: self.ts,
            carrier_freq: self.f0,
            amplitude: self.amplitude,
            mode: self.mode.into(),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn run(args: PatternArgs, verbose: bool) -> Result<(), CliError> {
    let cfg = args.config()?;
    let image = generate_pattern(&cfg)?;
    let paths = export_pattern(&image, &args.out, args.pgm_format.into())?;
    if verbose {
        eprintln!("pattern: {} sample rows", cfg.sample_count());
    }
    print_summary(json!({
        "command": "pattern",
        "paths": paths,
        "height": cfg.height,
        "width": cfg.width,
        "ts": cfg.sampling_period,
        "f0": cfg.carrier_freq,
        "sample_rows": cfg.sample_count(),
    }));
    Ok(())
}
