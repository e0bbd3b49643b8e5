//! Small least-squares helpers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Ordinary least squares; each row of `design` is one observation.
pub fn least_squares(design: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let cols = design.first().map_or(0, Vec::len);
    let a = DMatrix::from_fn(design.len(), cols, |i, j| design[i][j]);
    let b = DVector::from_column_slice(y);
    let svd = a.svd(true, true);
    svd.solve(&b, 1e-300).map(|x| x.iter().copied().collect()).unwrap_or_else(|_| vec![f64::NAN; cols])
}

pub fn least_squares_complex(design: &[Vec<Complex64>], y: &[Complex64]) -> Vec<Complex64> {
    let cols = design.first().map_or(0, Vec::len);
    let a = DMatrix::from_fn(design.len(), cols, |i, j| design[i][j]);
    let b = DVector::from_column_slice(y);
    let svd = a.svd(true, true);
    svd.solve(&b, 1e-300)
        .map(|x| x.iter().copied().collect())
        .unwrap_or_else(|_| vec![Complex64::new(f64::NAN, f64::NAN); cols])
}

/// Slope and intercept of the best line through `(x, y)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let rows: Vec<Vec<f64>> = x.iter().map(|&t| vec![t, 1.0]).collect();
    let c = least_squares(&rows, y);
    (c[0], c[1])
}

/// Slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly).0
}
