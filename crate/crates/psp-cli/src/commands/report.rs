use super::print_summary;
use crate::error::CliError;
use clap::Args;
use psp_core::io::fmt_f64;
use psp_core::io::svg::{write_line_chart, Series};
use psp_core::simkit::{
    nyquist_satisfied_default, run_experiment, sub_nyquist_default, sweep_sampling_period,
    ExperimentReport, ExperimentSpec, SweepTable,
};
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Experiment config, JSON or TOML. Defaults to the built-in
    /// sub-Nyquist and Nyquist-satisfied presets.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "report")]
    pub out: PathBuf,
    /// Comma-separated sampling periods: sweep the first experiment over
    /// them instead of running every experiment once.
    #[arg(long, value_delimiter = ',')]
    pub sweep: Option<Vec<usize>>,
    /// Override every experiment's RNG seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Config file shape: one or more experiment specs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportConfig {
    pub experiments: Vec<ExperimentSpec>,
}

impl ReportConfig {
    fn builtin() -> Self {
        Self {
            experiments: vec![sub_nyquist_default(), nyquist_satisfied_default()],
        }
    }
}

/// Everything one `report` invocation produced. Serialized as the hashed
/// report body; contains no timestamps, so identical configs give
/// byte-identical files.
#[derive(Debug, Serialize)]
struct ReportBundle {
    experiments: Vec<ExperimentReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: Option<SweepTable>,
}

fn load_config(path: &Path) -> Result<ReportConfig, CliError> {
    let raw = fs::read_to_string(path)?;
    let is_toml = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("toml"));
    if is_toml {
        toml::from_str(&raw).map_err(|e| CliError::Validation(format!("config: {e}")))
    } else {
        serde_json::from_str(&raw).map_err(|e| CliError::Validation(format!("config: {e}")))
    }
}

fn write_errors_csv(path: &Path, reports: &[ExperimentReport]) -> Result<(), CliError> {
    let file = fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    writeln!(
        w,
        "experiment,ts,f0,method,mean_abs_error,max_abs_error,phase_mean_abs_error,depth_rms_mm,nyquist_satisfied"
    )?;
    for (i, r) in reports.iter().enumerate() {
        for m in &r.methods {
            writeln!(
                w,
                "{i},{},{},{},{},{},{},{},{}",
                r.pattern.sampling_period,
                fmt_f64(r.pattern.carrier_freq),
                m.method.name(),
                fmt_f64(m.mean_abs_error),
                fmt_f64(m.max_abs_error),
                m.phase_mean_abs_error.map_or_else(String::new, fmt_f64),
                m.depth_rms_mm.map_or_else(String::new, fmt_f64),
                r.nyquist_satisfied,
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_sweep_csv(path: &Path, table: &SweepTable) -> Result<(), CliError> {
    let file = fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    writeln!(w, "ts,method,mean_abs_error,max_abs_error,nyquist_satisfied")?;
    for row in &table.rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            row.sampling_period,
            row.method.name(),
            fmt_f64(row.mean_abs_error),
            fmt_f64(row.max_abs_error),
            row.nyquist_satisfied,
        )?;
    }
    w.flush()?;
    Ok(())
}

fn write_plots(dir: &Path, index: usize, report: &ExperimentReport) -> Result<(), CliError> {
    let mut series = vec![Series {
        label: "truth re",
        values: &report.probe_truth.re,
    }];
    for probe in &report.probe_recovered {
        series.push(Series {
            label: probe.method.name(),
            values: &probe.trace.re,
        });
    }
    write_line_chart(
        &dir.join(format!("experiment_{index}_signal.svg")),
        &format!(
            "probe column {} (T_s = {})",
            report.probe_column, report.pattern.sampling_period
        ),
        &series,
        960,
        320,
    )?;
    write_line_chart(
        &dir.join(format!("experiment_{index}_spectrum.svg")),
        "sampled-signal magnitude spectrum",
        &[Series {
            label: "|F|",
            values: &report.spectrum_magnitude,
        }],
        960,
        320,
    )?;
    Ok(())
}

pub fn run(args: ReportArgs, verbose: bool) -> Result<(), CliError> {
    let mut config = match &args.config {
        Some(path) => load_config(path)?,
        None => ReportConfig::builtin(),
    };
    if config.experiments.is_empty() {
        return Err(CliError::validation("config lists no experiments"));
    }
    if let Some(seed) = args.seed {
        for e in &mut config.experiments {
            e.seed = seed;
        }
    }
    fs::create_dir_all(&args.out)?;

    let bundle = match &args.sweep {
        Some(periods) => {
            let table = sweep_sampling_period(&config.experiments[0], periods)?;
            write_sweep_csv(&args.out.join("sweep.csv"), &table)?;
            ReportBundle {
                experiments: Vec::new(),
                sweep: Some(table),
            }
        }
        None => {
            let mut reports = Vec::with_capacity(config.experiments.len());
            for (i, spec) in config.experiments.iter().enumerate() {
                let report = run_experiment(spec)?;
                write_plots(&args.out, i, &report)?;
                if verbose {
                    eprintln!(
                        "experiment {i}: T_s = {}, nyquist_satisfied = {}",
                        report.pattern.sampling_period, report.nyquist_satisfied
                    );
                }
                reports.push(report);
            }
            write_errors_csv(&args.out.join("errors.csv"), &reports)?;
            ReportBundle {
                experiments: reports,
                sweep: None,
            }
        }
    };

    let report_path = args.out.join("report.json");
    fs::write(&report_path, serde_json::to_string_pretty(&bundle)? + "\n")?;

    let nyquist_violations = bundle
        .experiments
        .iter()
        .filter(|r| !r.nyquist_satisfied)
        .count();
    print_summary(json!({
        "command": "report",
        "out": args.out,
        "report": report_path,
        "experiments": bundle.experiments.len(),
        "sweep_rows": bundle.sweep.as_ref().map(|s| s.rows.len()),
        "nyquist_violations": nyquist_violations,
    }));
    Ok(())
}
