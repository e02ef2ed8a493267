use super::print_summary;
use crate::error::CliError;
use clap::{Args, ValueEnum};
use psp_core::io::csvio::{
    read_signal_table, write_recovered, RecoveredColumn,
};
use psp_core::recovery::{
    extract_phase, recover_frequency, recover_spline, reconstruct_sinc, recovery_error,
    to_analytic, DenseSignal, ErrorStats, PhaseSignal,
};
use serde::Serialize;
use serde_json::json;
use std::f64::consts::PI;
use std::fs;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Freq,
    Spline,
    Sinc,
}

impl MethodArg {
    fn name(self) -> &'static str {
        match self {
            MethodArg::Freq => "frequency",
            MethodArg::Spline => "spline",
            MethodArg::Sinc => "sinc",
        }
    }
}

#[derive(Debug, Args)]
pub struct RecoverArgs {
    /// Sampled-signal CSV (`t,re,im` or `x,t,re,im`).
    #[arg(long)]
    pub input: PathBuf,
    /// Sampling period T_s the signal was acquired with.
    #[arg(long)]
    pub ts: usize,
    #[arg(long, value_enum)]
    pub method: MethodArg,
    /// Dense ground-truth CSV; enables the error fields of the report.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Extract the unwrapped phase field (requires --f0).
    #[arg(long)]
    pub phase: bool,
    /// Carrier frequency, cycles per pixel (used by --phase).
    #[arg(long)]
    pub f0: Option<f64>,
    /// Designed amplitude I_0 (phase-validity masking).
    #[arg(long, default_value_t = 1.0)]
    pub amplitude: f64,
    /// Form the analytic signal before phase extraction (real-mode input).
    #[arg(long)]
    pub analytic: bool,
    /// Recovered-signal CSV path.
    #[arg(long)]
    pub out_signal: PathBuf,
    /// Report JSON path.
    #[arg(long)]
    pub out_report: PathBuf,
}

#[derive(Serialize)]
struct RecoverReport {
    method: &'static str,
    #[serde(rename = "T_s")]
    t_s: usize,
    columns: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    mean_abs_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_abs_error: Option<f64>,
}

pub fn run(args: RecoverArgs, verbose: bool) -> Result<(), CliError> {
    if args.ts == 0 {
        return Err(CliError::validation("T_s must be >= 1"));
    }
    if args.phase && args.f0.is_none() {
        return Err(CliError::validation("--phase requires --f0"));
    }
    let table = read_signal_table(&args.input)?;
    let sampled = table.to_sampled(args.ts)?;

    let truth: Option<Vec<(usize, DenseSignal)>> = match &args.truth {
        Some(path) => Some(read_signal_table(path)?.to_dense()?),
        None => None,
    };

    let mut recovered: Vec<(usize, DenseSignal, Option<PhaseSignal>)> = Vec::new();
    let mut stats: Option<ErrorStats> = None;
    let mut pixels = 0usize;
    for (x, s) in &sampled {
        let dense = match args.method {
            MethodArg::Freq => recover_frequency(s)?,
            MethodArg::Spline => recover_spline(s)?,
            MethodArg::Sinc => reconstruct_sinc(s, PI / s.sampling_period as f64),
        };
        if let Some(truth_cols) = &truth {
            let t = truth_cols
                .iter()
                .find(|(tx, _)| tx == x)
                .ok_or_else(|| CliError::validation(format!("truth file has no column {x}")))?;
            let e = recovery_error(&dense, &t.1)?;
            stats = Some(match stats {
                None => ErrorStats {
                    mean_abs: e.mean_abs * dense.len() as f64,
                    max_abs: e.max_abs,
                },
                Some(acc) => ErrorStats {
                    mean_abs: acc.mean_abs + e.mean_abs * dense.len() as f64,
                    max_abs: acc.max_abs.max(e.max_abs),
                },
            });
            pixels += dense.len();
        }
        let phase = if args.phase {
            let f0 = args.f0.expect("checked above");
            let for_phase = if args.analytic { to_analytic(&dense) } else { dense.clone() };
            Some(extract_phase(&for_phase, f0, args.amplitude)?)
        } else {
            None
        };
        recovered.push((*x, dense, phase));
    }

    let columns: Vec<RecoveredColumn<'_>> = recovered
        .iter()
        .map(|(x, dense, phase)| RecoveredColumn {
            x: *x,
            dense,
            phase: phase.as_ref(),
        })
        .collect();
    write_recovered(&args.out_signal, &columns, table.per_column)?;

    let report = RecoverReport {
        method: args.method.name(),
        t_s: args.ts,
        columns: recovered.len(),
        mean_abs_error: stats.map(|s| s.mean_abs / pixels as f64),
        max_abs_error: stats.map(|s| s.max_abs),
    };
    fs::write(
        &args.out_report,
        serde_json::to_string_pretty(&report)? + "\n",
    )?;

    if verbose {
        eprintln!(
            "recover: {} column(s) via {}",
            recovered.len(),
            args.method.name()
        );
    }
    print_summary(json!({
        "command": "recover",
        "signal": args.out_signal,
        "report": args.out_report,
        "method": args.method.name(),
        "columns": recovered.len(),
        "mean_abs_error": report.mean_abs_error,
        "max_abs_error": report.max_abs_error,
    }));
    Ok(())
}
