//! Pattern synthesis, scene deformation, and 1D column sampling.
//!
//! The projected pattern is an impulse train along the vertical axis `t`:
//! only rows at multiples of the sampling period `T_s` carry the carrier,
//! all other rows are zero. The carrier is `I_0·e^{i·2π·f0·t}` and is
//! constant along the horizontal axis. A scene deforms the pattern by a
//! per-pixel phase offset `φ(x,t)` and a multiplicative reflectivity
//! `γ(x,t)`, and a column of the deformed image read at the sample rows is
//! the 1D sampled signal everything downstream works on.
//!
//! Two carrier representations are provided. `ComplexQuadrature` stores
//! the complex carrier as a co-registered in-phase/quadrature raster pair
//! and is the representation the reconstruction theory is stated in.
//! `RealCosine` stores the single nonnegative raster
//! `I_0·(1 + cos(2π·f0·t + φ))/2` that a physical projector can emit.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use thiserror::Error;

/// Acceptable deviation of `f0 · height` from a whole number of carrier
/// cycles. Exactly integral cycles keep the discrete spectrum leakage-free;
/// the slack only absorbs decimal round-off in user-supplied frequencies.
pub const CYCLE_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SignalError {
    #[error("T_s must be >= 1")]
    InvalidSamplingPeriod,
    #[error("carrier frequency must satisfy 0 < f0 < 0.5, got {0}")]
    InvalidCarrierFrequency(f64),
    #[error("amplitude must be > 0, got {0}")]
    InvalidAmplitude(f64),
    #[error("raster dimensions must be positive, got {height}x{width}")]
    EmptyRaster { height: usize, width: usize },
    #[error("height {height} is not a multiple of T_s = {sampling_period}")]
    HeightNotDivisible { height: usize, sampling_period: usize },
    #[error("f0*height = {cycles} is not an integral number of carrier cycles")]
    NonIntegralCycles { cycles: f64 },
    #[error("scene is {got_height}x{got_width}, pattern is {height}x{width}")]
    DimensionMismatch {
        got_height: usize,
        got_width: usize,
        height: usize,
        width: usize,
    },
    #[error("column {x} out of range (width {width})")]
    ColumnOutOfRange { x: usize, width: usize },
    #[error("reflectivity must be positive and finite everywhere")]
    InvalidReflectivity,
    #[error("phase field must be finite everywhere")]
    InvalidPhase,
}

/// Carrier representation of the projected pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CarrierMode {
    ComplexQuadrature,
    RealCosine,
}

/// Everything that defines the designed pattern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternConfig {
    /// Raster height in pixels; the vertical axis is the signal axis.
    pub height: usize,
    /// Raster width in pixels.
    pub width: usize,
    /// Sampling period `T_s` in pixels between carrier-bearing rows.
    pub sampling_period: usize,
    /// Carrier frequency `f0` in cycles per pixel, `0 < f0 < 0.5`.
    pub carrier_freq: f64,
    /// Carrier amplitude `I_0` in intensity units.
    pub amplitude: f64,
    pub mode: CarrierMode,
}

impl PatternConfig {
    pub fn validate(&self) -> Result<(), SignalError> {
        if self.sampling_period < 1 {
            return Err(SignalError::InvalidSamplingPeriod);
        }
        if !(self.carrier_freq > 0.0 && self.carrier_freq < 0.5) {
            return Err(SignalError::InvalidCarrierFrequency(self.carrier_freq));
        }
        if !(self.amplitude > 0.0 && self.amplitude.is_finite()) {
            return Err(SignalError::InvalidAmplitude(self.amplitude));
        }
        if self.height == 0 || self.width == 0 {
            return Err(SignalError::EmptyRaster {
                height: self.height,
                width: self.width,
            });
        }
        if !self.height.is_multiple_of(self.sampling_period) {
            return Err(SignalError::HeightNotDivisible {
                height: self.height,
                sampling_period: self.sampling_period,
            });
        }
        let cycles = self.carrier_freq * self.height as f64;
        if (cycles - cycles.round()).abs() > CYCLE_TOLERANCE {
            return Err(SignalError::NonIntegralCycles { cycles });
        }
        Ok(())
    }

    /// Number of carrier-bearing rows, `height / T_s`.
    pub fn sample_count(&self) -> usize {
        self.height / self.sampling_period
    }

    /// Sampling angular frequency `w_s = 2π / T_s` in radians per pixel.
    pub fn sampling_freq(&self) -> f64 {
        TAU / self.sampling_period as f64
    }

    /// Carrier angular frequency `2π·f0` in radians per pixel.
    pub fn carrier_angular_freq(&self) -> f64 {
        TAU * self.carrier_freq
    }
}

/// Per-pixel phase offset and reflectivity fields, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    height: usize,
    width: usize,
    phase: Vec<f64>,
    reflectivity: Vec<f64>,
}

impl Scene {
    pub fn new(
        height: usize,
        width: usize,
        phase: Vec<f64>,
        reflectivity: Vec<f64>,
    ) -> Result<Self, SignalError> {
        if phase.len() != height * width || reflectivity.len() != height * width {
            return Err(SignalError::DimensionMismatch {
                got_height: phase.len() / width.max(1),
                got_width: width,
                height,
                width,
            });
        }
        if phase.iter().any(|v| !v.is_finite()) {
            return Err(SignalError::InvalidPhase);
        }
        if reflectivity.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(SignalError::InvalidReflectivity);
        }
        Ok(Self {
            height,
            width,
            phase,
            reflectivity,
        })
    }

    /// The undisturbed scene: zero phase offset, unit reflectivity.
    pub fn identity(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            phase: vec![0.0; height * width],
            reflectivity: vec![1.0; height * width],
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn phi(&self, x: usize, t: usize) -> f64 {
        self.phase[t * self.width + x]
    }

    pub fn gamma(&self, x: usize, t: usize) -> f64 {
        self.reflectivity[t * self.width + x]
    }

    pub fn max_gamma(&self) -> f64 {
        self.reflectivity.iter().copied().fold(0.0, f64::max)
    }

    /// Largest absolute first difference of the phase field along `t`,
    /// the instantaneous-frequency contribution of the scene.
    pub fn max_phase_slope(&self) -> f64 {
        let mut best = 0.0f64;
        for x in 0..self.width {
            for t in 1..self.height {
                best = best.max((self.phi(x, t) - self.phi(x, t - 1)).abs());
            }
        }
        best
    }
}

/// A rendered pattern raster (designed or deformed).
///
/// Rows not congruent to `0 mod T_s` are exactly zero; this impulse-train
/// structure is what makes the column signal a sampled signal.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternImage {
    pub config: PatternConfig,
    /// `I_0·γ·cos(…)` per pixel (or the offset cosine in real mode).
    pub in_phase: Vec<f64>,
    /// `I_0·γ·sin(…)` per pixel; absent in real mode.
    pub quadrature: Option<Vec<f64>>,
}

impl PatternImage {
    pub fn is_sample_row(&self, t: usize) -> bool {
        t.is_multiple_of(self.config.sampling_period)
    }

    /// Pixel value as a complex number (imaginary part zero in real mode).
    pub fn value(&self, x: usize, t: usize) -> Complex64 {
        let k = t * self.config.width + x;
        let re = self.in_phase[k];
        let im = self.quadrature.as_ref().map_or(0.0, |q| q[k]);
        Complex64::new(re, im)
    }
}

fn carrier_value(cfg: &PatternConfig, phase_offset: f64, gamma: f64, t: usize) -> (f64, f64) {
    let angle = cfg.carrier_angular_freq() * t as f64 + phase_offset;
    match cfg.mode {
        CarrierMode::ComplexQuadrature => (
            gamma * cfg.amplitude * angle.cos(),
            gamma * cfg.amplitude * angle.sin(),
        ),
        CarrierMode::RealCosine => (gamma * cfg.amplitude * (1.0 + angle.cos()) / 2.0, 0.0),
    }
}

/// Renders the designed pattern: the carrier on every `T_s`-th row,
/// constant along the horizontal axis, zero elsewhere.
pub fn generate_pattern(cfg: &PatternConfig) -> Result<PatternImage, SignalError> {
    cfg.validate()?;
    let mut in_phase = vec![0.0; cfg.height * cfg.width];
    let mut quadrature = match cfg.mode {
        CarrierMode::ComplexQuadrature => Some(vec![0.0; cfg.height * cfg.width]),
        CarrierMode::RealCosine => None,
    };
    for t in (0..cfg.height).step_by(cfg.sampling_period) {
        let (re, im) = carrier_value(cfg, 0.0, 1.0, t);
        for x in 0..cfg.width {
            in_phase[t * cfg.width + x] = re;
            if let Some(q) = quadrature.as_mut() {
                q[t * cfg.width + x] = im;
            }
        }
    }
    Ok(PatternImage {
        config: cfg.clone(),
        in_phase,
        quadrature,
    })
}

/// Applies a scene to a pattern: sample rows pick up the scene's phase
/// offset and reflectivity, zero rows stay zero.
pub fn deform_pattern(img: &PatternImage, scene: &Scene) -> Result<PatternImage, SignalError> {
    let cfg = &img.config;
    if scene.dims() != (cfg.height, cfg.width) {
        let (gh, gw) = scene.dims();
        return Err(SignalError::DimensionMismatch {
            got_height: gh,
            got_width: gw,
            height: cfg.height,
            width: cfg.width,
        });
    }
    let mut in_phase = vec![0.0; cfg.height * cfg.width];
    let mut quadrature = img.quadrature.as_ref().map(|_| vec![0.0; cfg.height * cfg.width]);
    for t in (0..cfg.height).step_by(cfg.sampling_period) {
        for x in 0..cfg.width {
            let (re, im) = carrier_value(cfg, scene.phi(x, t), scene.gamma(x, t), t);
            in_phase[t * cfg.width + x] = re;
            if let Some(q) = quadrature.as_mut() {
                q[t * cfg.width + x] = im;
            }
        }
    }
    Ok(PatternImage {
        config: cfg.clone(),
        in_phase,
        quadrature,
    })
}

/// The 1D signal of one column read at the sample instants `n·T_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    /// Sample values in instant order (imaginary parts zero in real mode).
    pub values: Vec<Complex64>,
    /// Sampling period `T_s` in pixels.
    pub sampling_period: usize,
    /// Length of the dense signal the samples were taken from.
    pub dense_len: usize,
}

impl SampledSignal {
    pub fn new(
        values: Vec<Complex64>,
        sampling_period: usize,
        dense_len: usize,
    ) -> Result<Self, SignalError> {
        if sampling_period < 1 {
            return Err(SignalError::InvalidSamplingPeriod);
        }
        if dense_len == 0 || !dense_len.is_multiple_of(sampling_period) {
            return Err(SignalError::HeightNotDivisible {
                height: dense_len,
                sampling_period,
            });
        }
        if values.len() != dense_len / sampling_period {
            return Err(SignalError::DimensionMismatch {
                got_height: values.len(),
                got_width: 1,
                height: dense_len / sampling_period,
                width: 1,
            });
        }
        Ok(Self {
            values,
            sampling_period,
            dense_len,
        })
    }

    pub fn sample_count(&self) -> usize {
        self.values.len()
    }

    /// Pixel position of the n-th sample.
    pub fn instant(&self, n: usize) -> usize {
        n * self.sampling_period
    }

    /// Sampling angular frequency `w_s = 2π / T_s`.
    pub fn sampling_freq(&self) -> f64 {
        TAU / self.sampling_period as f64
    }
}

/// The analytic dense ground truth of column `x` under a scene: the
/// carrier value at every pixel, not just the sample rows. This is what a
/// perfect reconstruction must reproduce.
pub fn dense_ground_truth(
    cfg: &PatternConfig,
    scene: &Scene,
    x: usize,
) -> Result<Vec<Complex64>, SignalError> {
    if scene.dims() != (cfg.height, cfg.width) {
        let (gh, gw) = scene.dims();
        return Err(SignalError::DimensionMismatch {
            got_height: gh,
            got_width: gw,
            height: cfg.height,
            width: cfg.width,
        });
    }
    if x >= cfg.width {
        return Err(SignalError::ColumnOutOfRange {
            x,
            width: cfg.width,
        });
    }
    Ok((0..cfg.height)
        .map(|t| {
            let (re, im) = carrier_value(cfg, scene.phi(x, t), scene.gamma(x, t), t);
            Complex64::new(re, im)
        })
        .collect())
}

/// Reads column `x` of a pattern at the sample instants.
pub fn extract_column(img: &PatternImage, x: usize) -> Result<SampledSignal, SignalError> {
    let cfg = &img.config;
    if x >= cfg.width {
        return Err(SignalError::ColumnOutOfRange {
            x,
            width: cfg.width,
        });
    }
    let values = (0..cfg.height)
        .step_by(cfg.sampling_period)
        .map(|t| img.value(x, t))
        .collect();
    SampledSignal::new(values, cfg.sampling_period, cfg.height)
}
