//! Sectors around the negative real axis and the domains built from them.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::CurveSeries;

pub const APERTURE: f64 = PI / 8.0;
pub const NARROW_APERTURE: f64 = PI / 20.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegionError {
    #[error("parameters fail certification: {0}")]
    Uncertified(String),
}

/// Radii of the sectors. `eps` bounds the z- and u-sectors of the invariant
/// domain; `r` is the inner radius used by the shrunken domain in (t, y).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionParams {
    pub eps: f64,
    #[serde(rename = "R")]
    pub r: f64,
}

impl Default for RegionParams {
    fn default() -> Self {
        RegionParams { eps: 0.05, r: 100.0 }
    }
}

impl RegionParams {
    /// Parameters that pass the analytic certification checks.
    pub fn new(eps: f64, r: f64) -> Result<Self, RegionError> {
        let report = certify_params(eps, r, None);
        match report.checks.iter().find(|c| !c.pass) {
            Some(c) => Err(RegionError::Uncertified(c.name.clone())),
            None => Ok(RegionParams { eps, r }),
        }
    }

    /// Parameters without any checks, for experiments.
    pub fn unchecked(eps: f64, r: f64) -> Self {
        RegionParams { eps, r }
    }

    pub fn aperture(&self) -> f64 {
        APERTURE
    }

    pub fn narrow_aperture(&self) -> f64 {
        NARROW_APERTURE
    }
}

/// Angular distance from the negative real axis, in [0, pi].
pub fn angle_from_axis(z: Complex64) -> f64 {
    (-z).arg().abs()
}

fn in_sector(z: Complex64, aperture: f64) -> bool {
    angle_from_axis(z) < aperture
}

/// `0 < |z| < eps` and `|Arg z - pi| < pi/8`.
pub fn in_v(z: Complex64, eps: f64) -> bool {
    let m = z.norm();
    m > 0.0 && m < eps && in_sector(z, APERTURE)
}

/// `|zeta| > radius` and `|Arg zeta - pi| < pi/8`.
pub fn in_u(zeta: Complex64, radius: f64) -> bool {
    zeta.norm() > radius && in_sector(zeta, APERTURE)
}

/// `zeta` in `U_b` with `|zeta| < a`.
pub fn in_t(zeta: Complex64, b: f64, a: f64) -> bool {
    in_u(zeta, b) && zeta.norm() < a
}

/// `a < |zeta| < b` and `|Arg zeta - pi| < pi/20`.
pub fn in_t_narrow(zeta: Complex64, a: f64, b: f64) -> bool {
    let m = zeta.norm();
    m > a && m < b && in_sector(zeta, NARROW_APERTURE)
}

/// The invariant domain in (z, w).
pub fn in_d(p: (Complex64, Complex64), params: &RegionParams, curve: &CurveSeries) -> bool {
    let (z, w) = p;
    if !in_v(z, params.eps) {
        return false;
    }
    let u = w - curve.gamma_unchecked(z);
    in_v(u, params.eps) && z.norm() < u.norm()
}

/// The invariant domain in the chart x = 1/z, y = 1/u.
pub fn in_d_xy(x: Complex64, y: Complex64, params: &RegionParams) -> bool {
    let radius = 1.0 / params.eps;
    in_u(x, radius) && in_u(y, radius) && y.norm() < x.norm()
}

/// `(t, y)` in `U_{2R} x U_R` with `|y| < |t|/2`.
pub fn in_dprime_ty(t: Complex64, y: Complex64, params: &RegionParams) -> bool {
    in_u(t, 2.0 * params.r) && in_u(y, params.r) && y.norm() < t.norm() / 2.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub eps: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub checks: Vec<Check>,
}

impl CertificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Maximum of `|g(1/y)|` and `|h(1/y)|` over the boundary of `U_R`.
pub trait BoundarySeries {
    fn g_at(&self, s: Complex64) -> Complex64;
    fn h_at(&self, s: Complex64) -> Complex64;
}

/// Points on the boundary of `U_R`: the arc `|y| = R` and the two rays.
pub fn boundary_samples(r: f64, n: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(3 * n);
    for k in 0..n {
        let a = -APERTURE + 2.0 * APERTURE * k as f64 / (n - 1) as f64;
        out.push(-Complex64::from_polar(r, a));
    }
    for k in 0..n {
        let m = r * (1000f64).powf(k as f64 / (n - 1) as f64);
        out.push(-Complex64::from_polar(m, APERTURE));
        out.push(-Complex64::from_polar(m, -APERTURE));
    }
    out
}

pub fn certify_params(eps: f64, r: f64, series: Option<&dyn BoundarySeries>) -> CertificationReport {
    let mut checks = Vec::new();
    let mut push = |name: &str, lhs: f64, rhs: f64, pass: bool| {
        checks.push(Check { name: name.to_string(), lhs, rhs, pass });
    };
    let valid = eps > 0.0 && r > 0.0 && eps.is_finite() && r.is_finite();
    push("R >= 1/eps", r, 1.0 / eps, valid && r >= 1.0 / eps);
    push("2R - 2 log(2R) > R + 2 log R", 2.0 * r - 2.0 * (2.0 * r).ln(), r + 2.0 * r.ln(), valid && 2.0 * r - 2.0 * (2.0 * r).ln() > r + 2.0 * r.ln());
    push("2R sin(pi/8) > 4 log R", 2.0 * r * APERTURE.sin(), 4.0 * r.ln(), valid && 2.0 * r * APERTURE.sin() > 4.0 * r.ln());
    if let Some(s) = series {
        let pts = boundary_samples(r, 64);
        let hmax = pts.iter().map(|y| s.h_at(y.inv()).norm()).fold(0.0, f64::max);
        let gmax = pts.iter().map(|y| s.g_at(y.inv()).norm()).fold(0.0, f64::max);
        push("sup |h(1/y)| < 1/4 on the boundary of U_R", hmax, 0.25, hmax < 0.25);
        push("sup |g(1/y)| < 1/8 on the boundary of U_R", gmax, 0.125, gmax < 0.125);
    }
    CertificationReport { eps, r, checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn sector_membership() {
        let eps = 0.05;
        assert!(in_v(c(-eps / 2.0, 0.0), eps));
        assert!(!in_v(c(eps / 2.0, 0.0), eps));
        assert!(!in_v(c(0.0, 0.0), eps));
        assert!(!in_v(c(-eps, 0.0), eps));
        let r = 100.0;
        assert!(in_u(c(-2.0 * r, 0.0), r));
        assert!(!in_u(c(-r / 2.0, 0.0), r));
        assert!(!in_u(Complex64::from_polar(2.0 * r, PI - PI / 8.0), r));
        assert!(in_u(Complex64::from_polar(2.0 * r, PI - PI / 8.0 + 1e-9), r));
        // just below the negative axis is in the sector too
        assert!(in_u(c(-2.0 * r, -1e-12), r));
    }

    #[test]
    fn dprime_membership() {
        let p = RegionParams::default();
        let r = p.r;
        assert!(in_dprime_ty(c(-4.0 * r, 0.0), c(-1.5 * r, 0.0), &p));
        assert!(!in_dprime_ty(c(-4.0 * r, 0.0), c(-3.0 * r, 0.0), &p));
        assert!(!in_dprime_ty(c(-r, 0.0), c(-1.5 * r, 0.0), &p));
    }

    #[test]
    fn nesting() {
        for k in 0..2000 {
            let zeta = Complex64::from_polar(1.0 + k as f64 * 0.37, -3.2 + k as f64 * 0.0033);
            if in_u(zeta, 200.0) {
                assert!(in_u(zeta, 100.0));
            }
            let z = zeta * 1e-4;
            if in_v(z, 0.05) {
                assert!(in_v(z, 0.06));
            }
        }
    }

    #[test]
    fn certification_numbers() {
        let rep = certify_params(0.05, 100.0, None);
        assert!(rep.passed());
        let c = &rep.checks[1];
        assert!((c.lhs - 189.40).abs() < 5e-3 && (c.rhs - 109.21).abs() < 5e-3);
        let c = &rep.checks[2];
        assert!((c.lhs - 76.54).abs() < 5e-3 && (c.rhs - 18.42).abs() < 5e-3);

        let rep = certify_params(0.5, 2.0, None);
        let c = &rep.checks[1];
        assert!(!c.pass);
        assert!((c.lhs - 1.23).abs() < 5e-3 && (c.rhs - 3.39).abs() < 5e-3);

        let rep = certify_params(0.05, 1.0 / 0.05, None);
        let c = &rep.checks[1];
        assert!(c.pass && (c.lhs - 32.62).abs() < 5e-3 && (c.rhs - 25.99).abs() < 5e-3);
        assert!(RegionParams::new(0.5, 2.0).is_err());
        assert!(RegionParams::new(0.05, 100.0).is_ok());
    }

    #[test]
    fn report_json_shape() {
        let v = serde_json::to_value(certify_params(0.05, 100.0, None)).unwrap();
        assert_eq!(v["R"], 100.0);
        assert_eq!(v["checks"][0]["pass"], true);
        assert!(v["checks"][0].get("lhs").is_some());
    }
}
