//! Classification rasters over affine real two-parameter slices.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::classify::{Classifier, Verdict};
use super::AnalysisError;
use crate::mapchain::Point;

/// `p(s, t) = origin + s·ds + t·dt` over `[s.0, s.1] × [t.0, t.1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slice {
    pub origin: Point,
    pub ds: Point,
    pub dt: Point,
    pub s: (f64, f64),
    pub t: (f64, f64),
}

impl Slice {
    /// The `z`-plane at fixed `w`, with `s = Re z` and `t = Im z`.
    pub fn z_plane(w: Complex64, re: (f64, f64), im: (f64, f64)) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Slice {
            origin: (zero, w),
            ds: (Complex64::new(1.0, 0.0), zero),
            dt: (Complex64::new(0.0, 1.0), zero),
            s: re,
            t: im,
        }
    }

    /// `w = -0.005`, `Re z ∈ [-0.05, 0.01]`, `Im z ∈ [-0.03, 0.03]`.
    pub fn standard() -> Self {
        Self::z_plane(Complex64::new(-0.005, 0.0), (-0.05, 0.01), (-0.03, 0.03))
    }

    pub fn point(&self, s: f64, t: f64) -> Point {
        (self.origin.0 + self.ds.0 * s + self.dt.0 * t, self.origin.1 + self.ds.1 * s + self.dt.1 * t)
    }
}

/// Cell centres as `centre + k · span/(2n)` with integer `k`, so a range
/// symmetric about zero gives exactly symmetric centres.
fn centres(range: (f64, f64), n: usize) -> Vec<f64> {
    let mid = 0.5 * (range.0 + range.1);
    let step = (range.1 - range.0) / (2 * n) as f64;
    (0..n).map(|j| ((2 * j + 1) as f64 - n as f64) * step + mid).map(|v| if v == 0.0 { 0.0 } else { v }).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Raster {
    pub slice: Slice,
    pub width: usize,
    pub height: usize,
    pub budget: usize,
    /// Row-major; row 0 has the largest `t`.
    pub cells: Vec<Verdict>,
}

pub fn raster(cl: &Classifier<'_>, slice: Slice, width: usize, height: usize, budget: usize) -> Result<Raster, AnalysisError> {
    if width < 2 || height < 2 {
        return Err(AnalysisError::GridTooSmall { width, height });
    }
    let ss = centres(slice.s, width);
    let mut ts = centres(slice.t, height);
    ts.reverse();
    let rows: Vec<Vec<Verdict>> = ts
        .par_iter()
        .map(|&t| ss.iter().map(|&s| cl.classify(slice.point(s, t), budget).verdict).collect())
        .collect();
    Ok(Raster { slice, width, height, budget, cells: rows.concat() })
}

impl Raster {
    pub fn at(&self, row: usize, col: usize) -> Verdict {
        self.cells[row * self.width + col]
    }

    /// Binary greymap.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend(self.cells.iter().map(|v| v.code()));
        out
    }

    pub fn count(&self, v: Verdict) -> usize {
        self.cells.iter().filter(|&&c| c == v).count()
    }

    /// Cells with a 4-neighbour of a different verdict.
    pub fn boundary_cells(&self) -> usize {
        let (w, h) = (self.width, self.height);
        (0..h)
            .flat_map(|r| (0..w).map(move |c| (r, c)))
            .filter(|&(r, c)| {
                let v = self.at(r, c);
                (r > 0 && self.at(r - 1, c) != v)
                    || (r + 1 < h && self.at(r + 1, c) != v)
                    || (c > 0 && self.at(r, c - 1) != v)
                    || (c + 1 < w && self.at(r, c + 1) != v)
            })
            .count()
    }

    /// Whether row `r` equals row `height - 1 - r` for every `r`.
    pub fn symmetric_in_t(&self) -> bool {
        (0..self.height / 2).all(|r| (0..self.width).all(|c| self.at(r, c) == self.at(self.height - 1 - r, c)))
    }

    pub fn sidecar(&self) -> Value {
        json!({
            "format": "P5",
            "width": self.width,
            "height": self.height,
            "budget": self.budget,
            "slice": self.slice,
            "window": {"s": [self.slice.s.0, self.slice.s.1], "t": [self.slice.t.0, self.slice.t.1]},
            "row_order": "row 0 at the largest t",
            "codes": {"basin": 255, "on_curve": 128, "axis": 64, "undecided": 0},
            "counts": {
                "basin": self.count(Verdict::Basin),
                "on_curve": self.count(Verdict::OnCurve),
                "axis": self.count(Verdict::Axis),
                "undecided": self.count(Verdict::Undecided),
            },
            "boundary_cells": self.boundary_cells(),
        })
    }
}
