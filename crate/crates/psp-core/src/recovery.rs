//! Full-resolution signal recovery from the sampled column signal.
//!
//! The frequency-domain route zero-expands the samples onto the dense
//! pixel grid, takes the DFT, keeps the baseband with a rectangular window
//! of gain `T_s`, and inverts. The DFT convention is: forward transform
//! unnormalized, inverse carrying `1/N`. Under that convention the `T_s`
//! passband gain is exactly the calibration that makes the chain the
//! identity on constants: a constant sample train of value `c` has replica
//! lines of height `c·N/T_s`, so keeping the zero-frequency line with gain
//! `T_s` and dividing by `N` returns `c`.
//!
//! The passband is the half-open interval `(-w_s/2, +w_s/2]`: the bin at
//! exactly `+w_s/2` is kept, its mirror at `-w_s/2` is dropped. Keeping
//! both would count the Nyquist-rate replica twice (a carrier at exactly
//! `w_s/2` would come back with its mirror image added on top); the
//! half-open choice reconstructs such a carrier exactly in
//! complex-quadrature mode.
//!
//! The time-domain route sums sample-weighted sinc kernels over the
//! periodically extended sample sequence. At the matched cutoff
//! `w_m = π/T_s` the infinite periodic summation has a closed form (the
//! periodized sinc collapses to a Dirichlet-style kernel), which is what
//! [`reconstruct_sinc`] evaluates; it agrees with the frequency route to
//! machine precision on band-limited inputs and serves as its independent
//! oracle. A replica-truncated direct summation is kept for unmatched
//! cutoffs; its truncation error decays only like `1/(π·R·M)`, so it is
//! not suitable for tight cross-checks.

use crate::geometry::ProjectorRow;
use crate::signal::SampledSignal;
use crate::spline::{CubicSpline, SplineError};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use thiserror::Error;

/// Replica count (each side) for the truncated sinc summation.
pub const DEFAULT_SINC_REPLICAS: usize = 3;

/// Phase is considered undefined where the demodulated magnitude falls
/// below `EPSILON_MAG_RELATIVE * amplitude`.
pub const EPSILON_MAG_RELATIVE: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RecoveryError {
    #[error("EmptySignal: no samples to transform")]
    EmptySignal,
    #[error("TooFewSamples: {0}")]
    TooFewSamples(#[from] SplineError),
    #[error("NearZeroMagnitude: |signal| = {magnitude:.3e} at index {index}, phase undefined")]
    NearZeroMagnitude { index: usize, magnitude: f64 },
    #[error("LengthMismatch: {got} vs {want}")]
    LengthMismatch { got: usize, want: usize },
}

/// A full-resolution signal at unit pixel spacing, starting at instant 0.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSignal {
    pub values: Vec<Complex64>,
}

impl DenseSignal {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// DFT coefficients in standard order (bin `k` holds angular frequency
/// `2πk/N` for `k <= N/2`, `2π(k-N)/N` above), annotated with the sampling
/// angular frequency of the signal they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub bins: Vec<Complex64>,
    /// `w_s = 2π / T_s` in radians per pixel.
    pub sampling_freq: f64,
}

impl Spectrum {
    /// Signed angular frequency of bin `k`.
    pub fn angular_freq(&self, k: usize) -> f64 {
        let n = self.bins.len();
        let signed = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
        TAU * signed / n as f64
    }
}

/// Recovery route identifier, used in reports and on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecoveryMethod {
    Frequency,
    Spline,
    Sinc,
}

impl RecoveryMethod {
    pub fn name(&self) -> &'static str {
        match self {
            RecoveryMethod::Frequency => "frequency",
            RecoveryMethod::Spline => "spline",
            RecoveryMethod::Sinc => "sinc",
        }
    }
}

/// Mean and maximum absolute deviation between two signals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub mean_abs: f64,
    pub max_abs: f64,
}

/// Demodulated phase and magnitude channels of a dense signal.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSignal {
    /// Unwrapped phase offset `φ(t)` in radians, carrier removed.
    pub phase: Vec<f64>,
    /// Magnitude channel `γ(t)·I_0`.
    pub magnitude: Vec<f64>,
}

fn fft_in_place(values: &mut [Complex64], inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(values.len())
    } else {
        planner.plan_fft_forward(values.len())
    };
    fft.process(values);
}

/// Places the samples on the dense grid (`n·T_s` positions, zeros between).
pub fn zero_expand(s: &SampledSignal) -> DenseSignal {
    let mut values = vec![Complex64::new(0.0, 0.0); s.dense_len];
    for (n, v) in s.values.iter().enumerate() {
        values[s.instant(n)] = *v;
    }
    DenseSignal { values }
}

/// DFT of the zero-expanded sample train. The result is periodic with
/// period `N/T_s` bins: replicas of the underlying baseband spectrum at
/// every multiple of `w_s`.
pub fn spectrum_of(s: &SampledSignal) -> Result<Spectrum, RecoveryError> {
    if s.values.is_empty() || s.dense_len == 0 {
        return Err(RecoveryError::EmptySignal);
    }
    let mut bins = zero_expand(s).values;
    fft_in_place(&mut bins, false);
    Ok(Spectrum {
        bins,
        sampling_freq: s.sampling_freq(),
    })
}

/// Applies the rectangular baseband window: bins inside `(-w_s/2, +w_s/2]`
/// are scaled by `T_s = 2π/w_s`, everything else is zeroed.
pub fn rect_window(sp: &Spectrum, sampling_freq: f64) -> Spectrum {
    debug_assert!(
        (sp.sampling_freq - sampling_freq).abs() < 1e-9 * sampling_freq.abs().max(1.0),
        "window frequency disagrees with the spectrum annotation"
    );
    let gain = TAU / sampling_freq;
    let half = sampling_freq / 2.0;
    let tol = half * 1e-9;
    let bins = sp
        .bins
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let w = sp.angular_freq(k);
            if w <= half + tol && w > -half + tol {
                v * gain
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    Spectrum {
        bins,
        sampling_freq: sp.sampling_freq,
    }
}

/// Frequency-domain reconstruction: zero-expand, transform, window at the
/// signal's own `w_s`, invert. Exact (to rounding) whenever the underlying
/// dense signal is band-limited inside the passband and spans a whole
/// number of periods.
pub fn recover_frequency(s: &SampledSignal) -> Result<DenseSignal, RecoveryError> {
    let spectrum = spectrum_of(s)?;
    let windowed = rect_window(&spectrum, s.sampling_freq());
    let mut values = windowed.bins;
    fft_in_place(&mut values, true);
    let scale = 1.0 / values.len() as f64;
    for v in values.iter_mut() {
        *v *= scale;
    }
    Ok(DenseSignal { values })
}

/// Dirichlet-style kernel: the closed form of the sinc kernel summed over
/// the infinite periodic extension, valid at the matched cutoff
/// `w_m = π/T_s`. `x` is the integer pixel offset from the sample.
fn periodized_sinc_kernel(x: i64, sampling_period: usize, dense_len: usize) -> f64 {
    let ts = sampling_period as i64;
    let n = dense_len as i64;
    if x % ts == 0 {
        return if x % n == 0 { 1.0 } else { 0.0 };
    }
    let m = (dense_len / sampling_period) as f64;
    let inner = PI * x as f64 / ts as f64;
    let outer = PI * x as f64 / n as f64;
    if (dense_len / sampling_period).is_multiple_of(2) {
        inner.sin() * outer.cos() / (m * outer.sin())
    } else {
        inner.sin() / (m * outer.sin())
    }
}

/// Time-domain reconstruction by sinc summation over the periodically
/// extended samples.
///
/// At the matched cutoff `w_m = π/T_s` the periodic extension is summed in
/// closed form (infinitely many replicas); this is the variant that serves
/// as the independent oracle for [`recover_frequency`]. Any other cutoff
/// falls back to direct summation over [`DEFAULT_SINC_REPLICAS`] replica
/// copies each side.
pub fn reconstruct_sinc(s: &SampledSignal, max_freq: f64) -> DenseSignal {
    let matched = (max_freq * s.sampling_period as f64 - PI).abs() < 1e-9 * PI;
    if !matched {
        return reconstruct_sinc_truncated(s, max_freq, DEFAULT_SINC_REPLICAS);
    }
    let n = s.dense_len;
    let values = (0..n)
        .map(|t| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (idx, v) in s.values.iter().enumerate() {
                let x = t as i64 - s.instant(idx) as i64;
                acc += v * periodized_sinc_kernel(x, s.sampling_period, n);
            }
            acc
        })
        .collect();
    DenseSignal { values }
}

/// Direct sinc summation over `replicas` periodic copies of the sample
/// sequence on each side. Truncation error decays like `1/(π·replicas·M)`
/// for `M` samples, so this is a demonstration variant, not an oracle.
pub fn reconstruct_sinc_truncated(
    s: &SampledSignal,
    max_freq: f64,
    replicas: usize,
) -> DenseSignal {
    let n = s.dense_len as i64;
    let r = replicas as i64;
    let values = (0..s.dense_len)
        .map(|t| {
            let mut acc = Complex64::new(0.0, 0.0);
            for rep in -r..=r {
                for (idx, v) in s.values.iter().enumerate() {
                    let x = (t as i64 - s.instant(idx) as i64 - rep * n) as f64;
                    let arg = max_freq * x;
                    let k = if arg.abs() < 1e-12 { 1.0 } else { arg.sin() / arg };
                    acc += v * k;
                }
            }
            acc
        })
        .collect();
    DenseSignal { values }
}

/// Natural-cubic-spline baseline: interpolates real and imaginary parts
/// independently through the sample knots and evaluates at every pixel.
pub fn recover_spline(s: &SampledSignal) -> Result<DenseSignal, RecoveryError> {
    let xs: Vec<f64> = (0..s.sample_count()).map(|i| s.instant(i) as f64).collect();
    let re: Vec<f64> = s.values.iter().map(|v| v.re).collect();
    let im: Vec<f64> = s.values.iter().map(|v| v.im).collect();
    let spline_re = CubicSpline::new(&xs, &re)?;
    let spline_im = CubicSpline::new(&xs, &im)?;
    let values = (0..s.dense_len)
        .map(|t| Complex64::new(spline_re.eval(t as f64), spline_im.eval(t as f64)))
        .collect();
    Ok(DenseSignal { values })
}

/// Forms the analytic signal of a real-mode recovery: the DC bin is
/// removed, negative-frequency bins are zeroed, positive bins doubled
/// (the shared Nyquist bin, when present, keeps unit gain). For the offset
/// cosine pattern the result is `(γ·I_0/2)·e^{i(2π·f0·t + φ)}`.
pub fn to_analytic(d: &DenseSignal) -> DenseSignal {
    let n = d.len();
    let mut bins = d.values.clone();
    fft_in_place(&mut bins, false);
    for (k, v) in bins.iter_mut().enumerate() {
        if k == 0 {
            *v = Complex64::new(0.0, 0.0);
        } else if n.is_multiple_of(2) && k == n / 2 {
            // shared Nyquist bin: unit gain
        } else if k < n.div_ceil(2) {
            *v *= 2.0;
        } else {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    fft_in_place(&mut bins, true);
    let scale = 1.0 / n as f64;
    for v in bins.iter_mut() {
        *v *= scale;
    }
    DenseSignal { values: bins }
}

/// Removes the designed carrier and returns the unwrapped phase offset and
/// the magnitude channel.
///
/// `amplitude` is the designed `I_0`; magnitudes below
/// `EPSILON_MAG_RELATIVE · amplitude` make the phase meaningless and are
/// reported as [`RecoveryError::NearZeroMagnitude`]. Unwrapping is the
/// plain sequential rule: consecutive differences beyond π in magnitude
/// pull in the nearest 2π multiple.
pub fn extract_phase(
    d: &DenseSignal,
    carrier_freq: f64,
    amplitude: f64,
) -> Result<PhaseSignal, RecoveryError> {
    let eps = EPSILON_MAG_RELATIVE * amplitude;
    let mut phase = Vec::with_capacity(d.len());
    let mut magnitude = Vec::with_capacity(d.len());
    let mut offset = 0.0;
    let mut prev_raw = 0.0;
    for (t, v) in d.values.iter().enumerate() {
        let demod = v * Complex64::from_polar(1.0, -TAU * carrier_freq * t as f64);
        let mag = demod.norm();
        if mag < eps {
            return Err(RecoveryError::NearZeroMagnitude {
                index: t,
                magnitude: mag,
            });
        }
        let raw = demod.arg();
        if t > 0 {
            let diff = raw - prev_raw;
            if diff > PI {
                offset -= TAU;
            } else if diff < -PI {
                offset += TAU;
            }
        }
        prev_raw = raw;
        phase.push(raw + offset);
        magnitude.push(mag);
    }
    Ok(PhaseSignal { phase, magnitude })
}

/// Maps an observed phase offset at pixel `t` to the projector row whose
/// designed carrier phase matches: `y_p = t + φ/(2π·f0)`.
pub fn phase_to_projector_row(phase: f64, carrier_freq: f64, t: f64) -> ProjectorRow {
    ProjectorRow(t + phase / (TAU * carrier_freq))
}

/// Mean and max absolute deviation (complex modulus) between two dense
/// signals. The mean uses compensated summation so the result does not
/// depend on how callers chunk their work.
pub fn recovery_error(
    recovered: &DenseSignal,
    truth: &DenseSignal,
) -> Result<ErrorStats, RecoveryError> {
    if recovered.len() != truth.len() {
        return Err(RecoveryError::LengthMismatch {
            got: recovered.len(),
            want: truth.len(),
        });
    }
    if recovered.is_empty() {
        return Err(RecoveryError::EmptySignal);
    }
    let mut sum = 0.0;
    let mut comp = 0.0;
    let mut max = 0.0f64;
    for (a, b) in recovered.values.iter().zip(&truth.values) {
        let e = (a - b).norm();
        max = max.max(e);
        // Kahan step
        let y = e - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    Ok(ErrorStats {
        mean_abs: sum / recovered.len() as f64,
        max_abs: max,
    })
}
