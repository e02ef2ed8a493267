//! Natural cubic spline interpolation.
//!
//! This is the time-domain baseline the frequency-domain reconstruction is
//! compared against: piecewise cubics through the sample knots with
//! continuous first and second derivatives and zero second derivative at
//! the ends. Evaluation outside the knot range extends the boundary
//! polynomial.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SplineError {
    #[error("TooFewSamples: spline needs at least {needed} knots, got {got}")]
    TooFewSamples { got: usize, needed: usize },
    #[error("knots must be strictly increasing at index {0}")]
    NonIncreasingKnots(usize),
    #[error("knot and value arrays differ in length: {xs} vs {ys}")]
    LengthMismatch { xs: usize, ys: usize },
}

/// A natural cubic spline over real-valued data.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Second derivatives at the knots, from the tridiagonal solve.
    y2: Vec<f64>,
}

impl CubicSpline {
    pub fn new(xs: &[f64], ys: &[f64]) -> Result<Self, SplineError> {
        if xs.len() != ys.len() {
            return Err(SplineError::LengthMismatch {
                xs: xs.len(),
                ys: ys.len(),
            });
        }
        if xs.len() < 4 {
            return Err(SplineError::TooFewSamples {
                got: xs.len(),
                needed: 4,
            });
        }
        for i in 1..xs.len() {
            if xs[i] <= xs[i - 1] {
                return Err(SplineError::NonIncreasingKnots(i));
            }
        }

        let n = xs.len();
        let mut y2 = vec![0.0; n];
        let mut u = vec![0.0; n - 1];

        // Forward sweep of the tridiagonal system; natural boundary keeps
        // y2[0] = y2[n-1] = 0.
        for i in 1..n - 1 {
            let sig = (xs[i] - xs[i - 1]) / (xs[i + 1] - xs[i - 1]);
            let p = sig * y2[i - 1] + 2.0;
            y2[i] = (sig - 1.0) / p;
            u[i] = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])
                - (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1]);
            u[i] = (6.0 * u[i] / (xs[i + 1] - xs[i - 1]) - sig * u[i - 1]) / p;
        }
        for k in (0..n - 2).rev() {
            y2[k + 1] = y2[k + 1] * y2[k + 2] + u[k + 1];
        }

        Ok(Self {
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            y2,
        })
    }

    /// Evaluates the spline; outside the knots the boundary segment's
    /// polynomial is extended.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        let mut lo = 0;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.xs[mid] > x {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let h = self.xs[hi] - self.xs[lo];
        let a = (self.xs[hi] - x) / h;
        let b = (x - self.xs[lo]) / h;
        a * self.ys[lo]
            + b * self.ys[hi]
            + ((a * a * a - a) * self.y2[lo] + (b * b * b - b) * self.y2[hi]) * h * h / 6.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_knots_exactly() {
        let xs = [0.0, 1.0, 2.5, 4.0, 5.0];
        let ys = [2.0, -1.0, 0.5, 3.0, 3.5];
        let s = CubicSpline::new(&xs, &ys).unwrap();
        for (x, y) in xs.iter().zip(ys.iter()) {
            assert!((s.eval(*x) - y).abs() < 1e-12);
        }
    }

    #[test]
    fn reproduces_linear_data_including_extrapolation() {
        let xs: Vec<f64> = (0..8).map(|i| i as f64 * 3.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x - 5.0).collect();
        let s = CubicSpline::new(&xs, &ys).unwrap();
        for i in 0..60 {
            let x = i as f64 * 0.5 - 3.0; // runs past both ends
            assert!(
                (s.eval(x) - (2.0 * x - 5.0)).abs() < 1e-10,
                "linear reproduction failed at {x}"
            );
        }
    }

    #[test]
    fn too_few_knots() {
        let err = CubicSpline::new(&[0.0, 1.0, 2.0], &[0.0, 1.0, 2.0]).unwrap_err();
        assert_eq!(err, SplineError::TooFewSamples { got: 3, needed: 4 });
    }

    #[test]
    fn rejects_unsorted_knots() {
        let err = CubicSpline::new(&[0.0, 2.0, 1.0, 3.0], &[0.0; 4]).unwrap_err();
        assert_eq!(err, SplineError::NonIncreasingKnots(2));
    }

    #[test]
    fn smooth_function_error_shrinks_with_knot_density() {
        let f = |x: f64| (0.3 * x).sin();
        let make = |step: f64| {
            let xs: Vec<f64> = (0..).map(|i| i as f64 * step).take_while(|&x| x <= 30.0).collect();
            let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
            CubicSpline::new(&xs, &ys).unwrap()
        };
        let coarse = make(3.0);
        let fine = make(1.0);
        let err = |s: &CubicSpline| {
            (0..280)
                .map(|i| {
                    let x = 1.0 + i as f64 * 0.1;
                    (s.eval(x) - f(x)).abs()
                })
                .fold(0.0, f64::max)
        };
        assert!(err(&fine) < err(&coarse));
    }
}
