//! The holomorphic solution of `(1 + h(1/y)) β' - (1 - g(1/y)) β = -g(1/y)`
//! with `β = O(1/y)` on the sector around the negative real axis.
//!
//! Every solution differs from the wanted one by a multiple of a homogeneous
//! solution of size `e^y`, which decays towards `-∞` along the sector. The
//! equation is therefore integrated outward (decreasing real part), starting
//! from an anchor where the asymptotic series is accurate. Away from the
//! anchor the optimally truncated series is accurate to `e^{-|y|}` and is used
//! as the fast evaluator; the cached integration nodes cross-check it.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::ddouble::{Dd, DdComplex};
use crate::jets::rational_to_f64;
use crate::ode::{dopri5, OdeError, Tolerance};
use crate::scalar::{dd_from_rational, Scalar};

/// Number of asymptotic coefficients kept.
const SERIES_TERMS: usize = 60;
/// Far end of the cached segment.
const CACHE_FAR: f64 = 1e6;
const CACHE_NODES: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaNode {
    pub y: f64,
    pub beta: Complex64,
}

#[derive(Clone, Debug)]
pub struct Beta {
    g: Vec<Complex64>,
    h: Vec<Complex64>,
    g_dd: Vec<DdComplex>,
    h_dd: Vec<DdComplex>,
    series: Vec<f64>,
    series_dd: Vec<Dd>,
    anchor: f64,
    nodes: Vec<BetaNode>,
}

/// Value with an estimate of its absolute error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate<S> {
    pub value: S,
    pub err: f64,
}

/// `b_m` in `β ~ Σ b_m y^{-m}` for exact `g`, `h` (index = power of `1/y`).
pub fn asymptotic_coefficients(g: &[BigRational], h: &[BigRational], terms: usize) -> Vec<BigRational> {
    let at = |v: &[BigRational], j: usize| v.get(j).cloned().unwrap_or_else(BigRational::zero);
    let hh = |j: usize| if j == 0 { BigRational::one() } else { at(h, j) };
    let mut b = vec![BigRational::zero(); terms + 1];
    for m in 1..=terms {
        let mut acc = at(g, m);
        for j in 1..m {
            acc += at(g, j) * &b[m - j];
        }
        for (k, bk) in b.iter().enumerate().take(m).skip(1) {
            acc -= BigRational::from_integer(k.into()) * bk * hh(m - 1 - k);
        }
        b[m] = acc;
    }
    b
}

fn poly<S: Scalar>(c: &[S], v: S) -> S {
    c.iter().rev().fold(S::zero(), |acc, &a| acc * v + a)
}

fn poly_dd<S: Scalar>(c: &[DdComplex], v: S) -> S {
    c.iter().rev().fold(S::zero(), |acc, &a| acc * v + S::from_dd(a))
}

impl Beta {
    /// Build the solution for series `g`, `h` (exact, no constant term) and
    /// anchor `-anchor` on the negative real axis.
    pub fn new(g: &[BigRational], h: &[BigRational], anchor: f64) -> Result<Self, OdeError> {
        let b = asymptotic_coefficients(g, h, SERIES_TERMS);
        let to_c = |q: &BigRational| Complex64::new(rational_to_f64(q), 0.0);
        let to_dd = |q: &BigRational| DdComplex::new(dd_from_rational(q), Dd::ZERO);
        let mut beta = Beta {
            g: g.iter().map(to_c).collect(),
            h: h.iter().map(to_c).collect(),
            g_dd: g.iter().map(to_dd).collect(),
            h_dd: h.iter().map(to_dd).collect(),
            series: b.iter().map(rational_to_f64).collect(),
            series_dd: b.iter().map(dd_from_rational).collect(),
            anchor,
            nodes: Vec::new(),
        };
        beta.fill_cache()?;
        Ok(beta)
    }

    pub fn anchor(&self) -> f64 {
        self.anchor
    }

    pub fn nodes(&self) -> &[BetaNode] {
        &self.nodes
    }

    /// Leading asymptotic coefficients `b_1, b_2, ...`.
    pub fn series_coefficients(&self) -> &[f64] {
        &self.series[1..]
    }

    pub fn g<S: Scalar>(&self, v: S) -> S {
        poly_dd(&self.g_dd, v)
    }

    pub fn h<S: Scalar>(&self, v: S) -> S {
        poly_dd(&self.h_dd, v)
    }

    /// Right-hand side `β'(y)`.
    pub fn rhs(&self, y: Complex64, beta: Complex64) -> Complex64 {
        let v = y.inv();
        let g = poly(&self.g, v);
        let h = poly(&self.h, v);
        ((1.0 - g) * beta - g) / (1.0 + h)
    }

    /// `(1 + h) β' - (1 - g) β + g` for a given value and derivative.
    pub fn residual(&self, y: Complex64, beta: Complex64, dbeta: Complex64) -> Complex64 {
        let v = y.inv();
        let g = poly(&self.g, v);
        let h = poly(&self.h, v);
        (1.0 + h) * dbeta - (1.0 - g) * beta + g
    }

    /// Optimally truncated asymptotic series in binary64.
    pub fn series(&self, y: Complex64) -> Estimate<Complex64> {
        let v = y.inv();
        let mut sum = Complex64::new(0.0, 0.0);
        let mut p = v;
        let mut last = f64::INFINITY;
        let mut err = 0.0;
        for &b in &self.series[1..] {
            let t = p * b;
            let m = t.norm();
            if m > last {
                err = last;
                break;
            }
            sum += t;
            last = m;
            err = m;
            if m <= 1e-18 * sum.norm() {
                break;
            }
            p *= v;
        }
        Estimate { value: sum, err }
    }

    /// Optimally truncated series in any scalar type.
    pub fn series_in<S: Scalar>(&self, y: S) -> Estimate<S> {
        let v = S::one() / y;
        let mut sum = S::zero();
        let mut p = v;
        let mut last = f64::INFINITY;
        let mut err = 0.0;
        for &b in &self.series_dd[1..] {
            let t = p * S::from_dd(DdComplex::new(b, Dd::ZERO));
            let m = t.abs();
            if m > last {
                err = last;
                break;
            }
            sum = sum + t;
            last = m;
            err = m;
            if m <= 1e-34 * sum.abs() {
                break;
            }
            p = p * v;
        }
        Estimate { value: sum, err }
    }

    /// Derivative of the truncated series.
    pub fn series_derivative(&self, y: Complex64) -> Complex64 {
        let v = y.inv();
        let mut sum = Complex64::new(0.0, 0.0);
        let mut p = v * v;
        let mut last = f64::INFINITY;
        for (m, &b) in self.series.iter().enumerate().skip(1) {
            let t = -p * b * m as f64;
            if t.norm() > last {
                break;
            }
            last = t.norm();
            sum += t;
            if last <= 1e-18 * sum.norm() {
                break;
            }
            p *= v;
        }
        sum
    }

    /// β(y): the series where it is accurate to binary64, otherwise
    /// integration from the cache.
    pub fn eval(&self, y: Complex64) -> Result<Complex64, OdeError> {
        let e = self.series(y);
        if e.err <= 1e-16 * e.value.norm() {
            return Ok(e.value);
        }
        self.integrate(y)
    }

    fn fill_cache(&mut self) -> Result<(), OdeError> {
        let start = -self.anchor;
        let mut y = start;
        let mut b = self.series(Complex64::new(start, 0.0)).value;
        self.nodes.push(BetaNode { y, beta: b });
        let (lo, hi) = (self.anchor.ln(), CACHE_FAR.ln());
        let mut targets: Vec<f64> = (0..CACHE_NODES)
            .map(|j| {
                let c = (PI * (j as f64 + 0.5) / CACHE_NODES as f64).cos();
                -(0.5 * (lo + hi) + 0.5 * (hi - lo) * c).exp()
            })
            .collect();
        targets.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        for t in targets {
            let s = dopri5(|s, beta| self.rhs(Complex64::new(s, 0.0), beta), y, b, t, Tolerance::default())?;
            y = t;
            b = s.value;
            self.nodes.push(BetaNode { y, beta: b });
        }
        Ok(())
    }

    /// Cached node with the largest modulus not beyond `-Re y`, so the path to
    /// `y` never increases the real part.
    fn start_node(&self, y: Complex64) -> Option<&BetaNode> {
        self.nodes.iter().filter(|n| n.y >= y.re).min_by(|a, b| a.y.partial_cmp(&b.y).unwrap_or(std::cmp::Ordering::Equal))
    }

    /// Integrate along the straight segment from `a` (value `ba`) to `b`.
    pub fn segment(&self, a: Complex64, ba: Complex64, b: Complex64) -> Result<Complex64, OdeError> {
        let d = b - a;
        let tol = Tolerance { rtol: 1e-13, atol: 1e-18 };
        Ok(dopri5(|s, beta| d * self.rhs(a + d * s, beta), 0.0, ba, 1.0, tol)?.value)
    }

    /// Integration along the straight segment from the nearest admissible
    /// cached node.
    pub fn integrate(&self, y: Complex64) -> Result<Complex64, OdeError> {
        self.integrate_via(y, &[])
    }

    /// Integration through the given waypoints.
    pub fn integrate_via(&self, y: Complex64, waypoints: &[Complex64]) -> Result<Complex64, OdeError> {
        let first = waypoints.first().copied().unwrap_or(y);
        let node = self.start_node(first).ok_or(OdeError::NonFinite(y.re))?;
        let mut at = Complex64::new(node.y, 0.0);
        let mut b = node.beta;
        for &p in waypoints.iter().chain(std::iter::once(&y)) {
            b = self.segment(at, b, p)?;
            at = p;
        }
        Ok(b)
    }
}
