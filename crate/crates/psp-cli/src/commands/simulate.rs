use super::{print_summary, ModeArg, PgmFormatArg};
use crate::error::CliError;
use clap::{Args, ValueEnum};
use psp_core::io::calib::load_calibration;
use psp_core::io::csvio::write_signal_table;
use psp_core::io::pgm::export_pattern;
use psp_core::io::{fmt_f64, IoError};
use psp_core::signal::{
    deform_pattern, dense_ground_truth, extract_column, generate_pattern, PatternConfig,
};
use psp_core::simkit::{
    make_scene, scene_from_geometry, ReflectivityProfile, SceneKind, SceneSpec, StereoGeometry,
};
use serde_json::json;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SceneArg {
    Flat,
    GaussianBump,
    Ramp,
    SinusoidalRelief,
}

impl From<SceneArg> for SceneKind {
    fn from(s: SceneArg) -> Self {
        match s {
            SceneArg::Flat => SceneKind::Flat,
            SceneArg::GaussianBump => SceneKind::GaussianBump,
            SceneArg::Ramp => SceneKind::Ramp,
            SceneArg::SinusoidalRelief => SceneKind::SinusoidalRelief,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReflectivityArg {
    Uniform,
    LinearGradient,
    Speckle,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub height: usize,
    #[arg(long)]
    pub width: usize,
    #[arg(long)]
    pub ts: usize,
    #[arg(long)]
    pub f0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub amplitude: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Complex)]
    pub mode: ModeArg,

    #[arg(long, value_enum, default_value_t = SceneArg::Flat)]
    pub scene: SceneArg,
    /// Scene amplitude: radians, or mm when --calib makes the scene a
    /// world surface.
    #[arg(long, default_value_t = 0.0)]
    pub scene_amplitude: f64,
    /// Scene scale: pixels (phase mode) or mm (geometry mode).
    #[arg(long, default_value_t = 1.0)]
    pub scene_scale: f64,
    #[arg(long, value_enum, default_value_t = ReflectivityArg::Uniform)]
    pub reflectivity: ReflectivityArg,
    /// Minimum reflectivity for the gradient and speckle profiles.
    #[arg(long, default_value_t = 0.2)]
    pub reflectivity_min: f64,
    /// Seed for the speckle profile.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Calibration JSON; when given, the scene describes a world surface
    /// observed through this rig and gt3d.csv is written as well.
    #[arg(long)]
    pub calib: Option<PathBuf>,

    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = PgmFormatArg::P5)]
    pub pgm_format: PgmFormatArg,
}

pub fn run(args: SimulateArgs, verbose: bool) -> Result<(), CliError> {
    let cfg = PatternConfig {
        height: args.height,
        width: args.width,
        sampling_period: args.ts,
        carrier_freq: args.f0,
        amplitude: args.amplitude,
        mode: args.mode.into(),
    };
    cfg.validate()?;
    let spec = SceneSpec {
        kind: args.scene.into(),
        amplitude: args.scene_amplitude,
        scale: args.scene_scale,
        reflectivity: match args.reflectivity {
            ReflectivityArg::Uniform => ReflectivityProfile::Uniform,
            ReflectivityArg::LinearGradient => ReflectivityProfile::LinearGradient {
                min: args.reflectivity_min,
            },
            ReflectivityArg::Speckle => ReflectivityProfile::Speckle {
                seed: args.seed,
                min: args.reflectivity_min,
            },
        },
    };

    let geometry: Option<StereoGeometry> = match &args.calib {
        Some(path) => {
            let calib = load_calibration(path)?;
            Some(StereoGeometry {
                camera: calib.camera()?,
                projector: calib.projector()?,
            })
        }
        None => None,
    };

    let (scene, gt3d) = match &geometry {
        Some(g) => {
            let (scene, gt) = scene_from_geometry(&spec, g, &cfg)?;
            (scene, Some(gt))
        }
        None => (make_scene(&spec, cfg.height, cfg.width)?, None),
    };

    let deformed = deform_pattern(&generate_pattern(&cfg)?, &scene)?;
    fs::create_dir_all(&args.out)?;

    let pgm_paths = export_pattern(&deformed, &args.out.join("deformed"), args.pgm_format.into())?;

    // Lossless sampled signal, all columns.
    let signal_path = args.out.join("signal.csv");
    let mut rows = Vec::new();
    for x in 0..cfg.width {
        let s = extract_column(&deformed, x)?;
        for (n, v) in s.values.iter().enumerate() {
            rows.push((x, s.instant(n), *v));
        }
    }
    write_signal_table(&signal_path, rows)?;

    // Analytic dense ground truth, all columns.
    let gt_path = args.out.join("gt.csv");
    let mut rows = Vec::new();
    for x in 0..cfg.width {
        let truth = dense_ground_truth(&cfg, &scene, x)?;
        for (t, v) in truth.iter().enumerate() {
            rows.push((x, t, *v));
        }
    }
    write_signal_table(&gt_path, rows)?;

    let gt3d_path = match gt3d {
        Some(gt) => {
            let path = args.out.join("gt3d.csv");
            let file = fs::File::create(&path).map_err(IoError::Io)?;
            let mut w = std::io::BufWriter::new(file);
            writeln!(w, "x,t,Xw,Yw,Zw").map_err(IoError::Io)?;
            for t in 0..cfg.height {
                for x in 0..cfg.width {
                    let p = gt.point(x, t);
                    writeln!(
                        w,
                        "{x},{t},{},{},{}",
                        fmt_f64(p.x),
                        fmt_f64(p.y),
                        fmt_f64(p.z)
                    )
                    .map_err(IoError::Io)?;
                }
            }
            Some(path)
        }
        None => None,
    };

    if verbose {
        eprintln!(
            "simulate: {} columns x {} samples, scene {:?}",
            cfg.width,
            cfg.sample_count(),
            spec.kind
        );
    }
    print_summary(json!({
        "command": "simulate",
        "pattern_paths": pgm_paths,
        "signal": signal_path,
        "ground_truth": gt_path,
        "ground_truth_3d": gt3d_path,
        "columns": cfg.width,
        "samples_per_column": cfg.sample_count(),
    }));
    Ok(())
}
