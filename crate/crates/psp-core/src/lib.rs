//! Phase sampling profilometry.
//!
//! A structured-light measurement pipeline built around a row-sampled
//! sinusoidal projector pattern. A single captured image of the sparse
//! pattern is enough to recover the full-resolution phase signal, because
//! the designed sampling rate makes the 1D column signal band-limited in
//! the classical sampling-theorem sense: an ideal low-pass (rectangular
//! window in the frequency domain, equivalently sinc interpolation in the
//! time domain) reconstructs the dense signal exactly when the sampling
//! angular frequency `w_s = 2π/T_s` is at least twice the signal bandwidth.
//!
//! The crate is organised along the pipeline:
//!
//! - [`signal`] — pattern synthesis, scene deformation, and extraction of
//!   1D sampled column signals,
//! - [`recovery`] — frequency-domain reconstruction, the time-domain sinc
//!   oracle, the cubic-spline baseline, and phase extraction,
//! - [`geometry`] — projective camera/projector models, least-squares
//!   calibration and per-pixel triangulation,
//! - [`simkit`] — synthetic scenes, stereo rigs and the experiment harness,
//! - [`io`] — the on-disk formats (PGM, CSV, JSON, PLY, SVG).

pub mod geometry;
pub mod io;
pub mod recovery;
pub mod signal;
pub mod simkit;
pub mod spline;

pub use num_complex::Complex64;
