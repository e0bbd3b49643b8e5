//! Estimators for `n z_n -> -1` and `log(n) u_n -> -1` along an orbit.

use num_complex::Complex64;
use serde::Serialize;

use super::AnalysisError;
use crate::fit::least_squares_complex;
use crate::mapchain::{OrbitTrace, Point};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AsymptoticSample {
    pub n: usize,
    /// `n z_n`.
    pub nz: Complex64,
    /// `log(n) u_n`.
    pub log_n_u: Complex64,
}

/// `a + b / log n` fitted through the checkpoints.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InverseLogFit {
    pub a: Complex64,
    pub b: Complex64,
    pub residuals: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymptoticsReport {
    pub seed: Point,
    pub samples: Vec<AsymptoticSample>,
    pub z_fit: InverseLogFit,
    pub u_fit: InverseLogFit,
    /// `|n z_n + 1|` strictly decreases across the checkpoints.
    pub z_error_decreasing: bool,
}

impl AsymptoticsReport {
    pub fn a_z(&self) -> Complex64 {
        self.z_fit.a
    }

    pub fn a_u(&self) -> Complex64 {
        self.u_fit.a
    }
}

/// Least-squares fit of `a + b / log n`.
pub fn fit_inverse_log(ns: &[usize], values: &[Complex64]) -> InverseLogFit {
    let rows: Vec<Vec<Complex64>> = ns.iter().map(|&n| vec![Complex64::new(1.0, 0.0), Complex64::new(1.0 / (n as f64).ln(), 0.0)]).collect();
    let c = least_squares_complex(&rows, values);
    let residuals = rows.iter().zip(values).map(|(r, v)| (c[0] * r[0] + c[1] * r[1] - v).norm()).collect();
    InverseLogFit { a: c[0], b: c[1], residuals }
}

/// Samples at exactly the given checkpoints and the two fits. The trace must
/// carry `u_n = w_n - γ(z_n)`.
pub fn asymptotics(trace: &OrbitTrace, checkpoints: &[usize]) -> Result<AsymptoticsReport, AnalysisError> {
    if checkpoints.len() < 3 {
        return Err(AnalysisError::TooFewCheckpoints(checkpoints.len()));
    }
    let u = trace.u.as_ref().ok_or(AnalysisError::NoCurve)?;
    let need = checkpoints.iter().copied().max().unwrap_or(0);
    if need >= trace.len() {
        return Err(if trace.truncated { AnalysisError::Escaped(trace.len()) } else { AnalysisError::TraceTooShort { need, got: trace.len() } });
    }
    let samples: Vec<AsymptoticSample> = checkpoints
        .iter()
        .map(|&n| {
            let nf = n as f64;
            AsymptoticSample { n, nz: trace.points[n].0 * nf, log_n_u: u[n] * nf.ln() }
        })
        .collect();
    let z: Vec<Complex64> = samples.iter().map(|s| s.nz).collect();
    let lu: Vec<Complex64> = samples.iter().map(|s| s.log_n_u).collect();
    let z_fit = fit_inverse_log(checkpoints, &z);
    let u_fit = fit_inverse_log(checkpoints, &lu);
    let z_error_decreasing = z.windows(2).all(|w| (w[1] + 1.0).norm() < (w[0] + 1.0).norm());
    Ok(AsymptoticsReport { seed: trace.seed, samples, z_fit, u_fit, z_error_decreasing })
}
