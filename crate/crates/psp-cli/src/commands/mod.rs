pub mod calibrate;
pub mod pattern;
pub mod recover;
pub mod reconstruct;
pub mod report;
pub mod simulate;

use clap::ValueEnum;
use psp_core::signal::CarrierMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Complex,
    Real,
}

impl From<ModeArg> for CarrierMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Complex => CarrierMode::ComplexQuadrature,
            ModeArg::Real => CarrierMode::RealCosine,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PgmFormatArg {
    P2,
    P5,
}

impl From<PgmFormatArg> for psp_core::io::pgm::PgmFormat {
    fn from(f: PgmFormatArg) -> Self {
        match f {
            PgmFormatArg::P2 => psp_core::io::pgm::PgmFormat::Ascii,
            PgmFormatArg::P5 => psp_core::io::pgm::PgmFormat::Binary,
        }
    }
}

/// One-line JSON summary on stdout; the machine-readable success signal.
pub fn print_summary(value: serde_json::Value) {
    println!("{value}");
}
