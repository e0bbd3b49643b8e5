//! The fiber coordinate `Υ` and the global map `G = (ψ, Υ)`.
//!
//! `ξ_n(t, y) = y_n + a log y_n + log t_n` along the orbit, with `t_n = t - n`.
//! Writing `β(y) ~ b_1/y` and `h(v) = h_1 v + ...`, one step changes `y` by
//! `(1 + h_1/y)/x`, `log y` by `1/(xy)` and `log t` by `-1/x + b_1/(xy)`, so the
//! `1/(xy)` part of `ξ_{n+1} - ξ_n` is `(h_1 + a + b_1)/(xy)`. The increments
//! are summable only for `a = -(h_1 + b_1)`, which is `4/3` for this map. The
//! weight `a = -1` is kept as [`Fibers::literal`]: its increments decay like
//! `-(7/3)/(n log n)` and the sequence drifts like `log log n`.

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::fmt::Write as _;
use thiserror::Error;

use crate::fatou::{finite, log_spaced, FatouError, FatouMachine};
use crate::fit::loglog_slope;
use crate::jets::rational_to_f64;
use crate::mapchain::Point;
use crate::regions::{in_d, in_dprime_ty, in_t_narrow};
use crate::scalar::ln_axis;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FiberError {
    #[error(transparent)]
    Fatou(#[from] FatouError),
    #[error("Newton iteration stalled with residual {0:e}")]
    Newton(f64),
}

/// Stopping rule for `ξ`: first iterate in `D'` whose increment is below `tol`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FiberPolicy {
    pub n_max: usize,
    pub tol: f64,
}

impl Default for FiberPolicy {
    fn default() -> Self {
        FiberPolicy { n_max: 2_000_000, tol: 1e-8 }
    }
}

/// A converged fiber coordinate at a point with Abel-Fatou value `t` and
/// chart coordinate `y`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FiberPoint {
    pub t: Complex64,
    pub y: Complex64,
    pub upsilon: Complex64,
    /// Iterate at which `ξ` was truncated.
    pub n: usize,
    pub err_est: f64,
}

impl FiberPoint {
    /// `|Υ - y| < 2 log|y| + log|t|`.
    pub fn closeness_holds(&self) -> bool {
        (self.upsilon - self.y).norm() < 2.0 * self.y.norm().ln() + self.t.norm().ln()
    }
}

/// A traced fiber sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TracePoint {
    pub p: Point,
    pub fiber: FiberPoint,
}

/// Result of the coverage sweep for one `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Coverage {
    pub n: usize,
    pub samples: usize,
    pub covered: usize,
    /// Largest `|Υ - ζ|` over the solved targets.
    pub max_mismatch: f64,
}

impl Coverage {
    pub fn complete(&self) -> bool {
        self.covered == self.samples
    }
}

/// `-(h_1 + b_1)` with `b_1 = g_1` the leading coefficient of `β`.
pub fn derived_weight(g: &[BigRational], h: &[BigRational]) -> BigRational {
    let at = |v: &[BigRational], j: usize| v.get(j).cloned().unwrap_or_else(BigRational::zero);
    -(at(h, 1) + at(g, 1))
}

#[derive(Clone, Copy, Debug)]
pub struct Fibers<'a> {
    m: &'a FatouMachine,
    weight: Complex64,
    pub policy: FiberPolicy,
}

impl<'a> Fibers<'a> {
    /// The summable fiber coordinate.
    pub fn new(m: &'a FatouMachine) -> Self {
        let s = m.series();
        let a = rational_to_f64(&derived_weight(&s.g, &s.h));
        Self::with_weight(m, Complex64::new(a, 0.0))
    }

    /// `ξ_n = y_n - log y_n + log t_n`.
    pub fn literal(m: &'a FatouMachine) -> Self {
        Self::with_weight(m, Complex64::new(-1.0, 0.0))
    }

    pub fn with_weight(m: &'a FatouMachine, weight: Complex64) -> Self {
        Fibers { m, weight, policy: FiberPolicy::default() }
    }

    pub fn weight(&self) -> Complex64 {
        self.weight
    }

    pub fn machine(&self) -> &'a FatouMachine {
        self.m
    }

    /// `ξ_0(t, y)`.
    pub fn xi0(&self, t: Complex64, y: Complex64) -> Complex64 {
        y + self.weight * ln_axis(y) + ln_axis(t)
    }

    /// `ξ_n(t, y)`, pulling `(t, y)` back to the basin first.
    pub fn xi(&self, t: Complex64, y: Complex64, n: usize) -> Result<Complex64, FiberError> {
        let p = self.theta_inverse(t, y)?;
        Ok(*self.xi_sequence(p, t, n)?.last().expect("n + 1 terms"))
    }

    /// `ξ_0, ..., ξ_n` along the orbit of `p` with `t = ψ(p)` given.
    pub fn xi_sequence(&self, p: Point, t: Complex64, n: usize) -> Result<Vec<Complex64>, FiberError> {
        let mut q = p;
        let mut out = Vec::with_capacity(n + 1);
        for m in 0..=n {
            let (_, y) = self.m.to_xy(q)?;
            out.push(self.xi0(t - m as f64, y));
            if m < n {
                q = self.m.chain().eval_forward(q);
                if !finite(q) {
                    return Err(FatouError::Escaped(m + 1).into());
                }
            }
        }
        Ok(out)
    }

    /// Slope of `log |ξ_{n+1} - ξ_n|` against `log n` over `[lo, hi]`.
    pub fn increment_slope(&self, p: Point, lo: usize, hi: usize) -> Result<f64, FiberError> {
        let t = self.m.psi(p)?.value;
        let xi = self.xi_sequence(p, t, hi + 1)?;
        let ns = log_spaced(lo, hi, 24);
        let x: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
        let y: Vec<f64> = ns.iter().map(|&n| (xi[n + 1] - xi[n]).norm()).collect();
        Ok(loglog_slope(&x, &y))
    }

    fn admissible(&self, t: Complex64, x: Complex64, y: Complex64) -> bool {
        in_dprime_ty(t, y, self.m.params()) && self.m.admissible(x, y)
    }

    /// The limit of `ξ_n` along the orbit of `p`, given `t = ψ(p)`.
    pub fn upsilon_with_t(&self, p: Point, t: Complex64) -> Result<FiberPoint, FiberError> {
        let (_, y0) = self.m.to_xy(p)?;
        let mut q = p;
        let (mut x, mut y) = self.m.to_xy(q)?;
        for m in 0..=self.policy.n_max {
            let q1 = self.m.chain().eval_forward(q);
            if !finite(q1) {
                return Err(FatouError::Escaped(m + 1).into());
            }
            let (x1, y1) = self.m.to_xy(q1)?;
            let tm = t - m as f64;
            let t1 = tm - 1.0;
            if self.admissible(tm, x, y) && self.admissible(t1, x1, y1) {
                let xi = self.xi0(tm, y);
                let d = (self.xi0(t1, y1) - xi).norm();
                if d < self.policy.tol {
                    return Ok(FiberPoint { t, y: y0, upsilon: xi, n: m, err_est: d * x.norm() });
                }
            }
            (q, x, y) = (q1, x1, y1);
        }
        Err(FatouError::Budget(self.policy.n_max).into())
    }

    /// `Υ(p)`: the fiber coordinate at any point whose orbit enters `D'`.
    pub fn upsilon(&self, p: Point) -> Result<FiberPoint, FiberError> {
        let t = self.m.psi(p)?.value;
        self.upsilon_with_t(p, t)
    }

    /// `G(p) = (ψ(p), Υ(p))`.
    pub fn global_map(&self, p: Point) -> Result<(Complex64, Complex64), FiberError> {
        let f = self.upsilon(p)?;
        Ok((f.t, f.upsilon))
    }

    /// `x` with `μ_0(x, y) ≈ t`, the starting guess for the fiber solve.
    fn mu0_inverse(&self, t: Complex64, y: Complex64) -> Result<Complex64, FiberError> {
        let b = self.m.beta_at(y)?;
        let mut x = t;
        for _ in 0..12 {
            let f = self.m.mu0(x, y)? - t;
            x -= f / (1.0 + self.m.r() / x + b);
        }
        Ok(x)
    }

    /// Chart `x` with `μ_n(x, y) = t`, where `n` is the truncation index of
    /// `ψ` at `guess`. A fixed index keeps the equation smooth in `x`: the
    /// stopping index of `ψ` itself jumps by about a hundred between nearby
    /// points, so `ψ` is only resolved to about `1e-7` along a fiber. The
    /// iteration uses the derivative `1 + r/x + β(y)` of `μ_0`, which differs
    /// from the true one by the small derivative of `η`.
    pub fn solve_x(&self, t: Complex64, y: Complex64, guess: Complex64) -> Result<Complex64, FiberError> {
        let n = self.m.mu_limit(guess, y)?.n;
        let d = 1.0 + self.m.r() / guess + self.m.beta_at(y)?;
        let mut x = guess;
        let mut res = f64::INFINITY;
        for _ in 0..30 {
            let f = self.m.mu(x, y, n)? - t;
            res = f.norm();
            if res < 1e-12 * t.norm().max(1.0) {
                return Ok(x);
            }
            x -= f / d;
        }
        Err(FiberError::Newton(res))
    }

    /// The point of `D` with `Θ(p) = (t, y)`.
    pub fn theta_inverse(&self, t: Complex64, y: Complex64) -> Result<Point, FiberError> {
        let x = self.solve_x(t, y, self.mu0_inverse(t, y)?)?;
        let p = self.m.from_xy((x, y));
        if !in_d(p, self.m.params(), self.m.curve()) {
            return Err(FatouError::OutsideDomain.into());
        }
        Ok(p)
    }

    /// Samples of the fiber `ψ = t` at the given chart values `y`, marching
    /// with a secant predictor in `x` and a Newton corrector.
    pub fn trace(&self, t: Complex64, ys: &[Complex64]) -> Result<Vec<TracePoint>, FiberError> {
        let mut out: Vec<TracePoint> = Vec::with_capacity(ys.len());
        let mut prev: Vec<(Complex64, Complex64)> = Vec::new();
        for &y in ys {
            let guess = match prev.as_slice() {
                [.., (y0, x0), (y1, x1)] => x1 + (x1 - x0) * (y - y1) / (y1 - y0),
                [(_, x1)] => *x1,
                [] => self.mu0_inverse(t, y)?,
            };
            let x = self.solve_x(t, y, guess)?;
            let p = self.m.from_xy((x, y));
            out.push(TracePoint { p, fiber: self.upsilon_with_t(p, t)? });
            prev.push((y, x));
        }
        Ok(out)
    }

    /// Parallel traces of several fibers.
    pub fn trace_many(&self, ts: &[Complex64], ys: &[Complex64]) -> Vec<Result<Vec<TracePoint>, FiberError>> {
        ts.par_iter().map(|&t| self.trace(t, ys)).collect()
    }

    /// Targets `ζ` of the truncated narrow sector `T'_{2R, n} + log n`:
    /// `radii` moduli strictly inside `(2R, n)` and `angles` directions.
    pub fn coverage_targets(&self, n: usize, radii: usize, angles: usize) -> Vec<Complex64> {
        let (lo, hi) = (2.0 * self.m.params().r * 1.05, n as f64 * 0.95);
        if lo >= hi || radii == 0 || angles == 0 {
            return Vec::new();
        }
        let shift = (n as f64).ln();
        let half = 0.9 * PI / 20.0;
        let mut out = Vec::new();
        for i in 0..radii {
            let r = if radii == 1 { (lo * hi).sqrt() } else { lo * (hi / lo).powf(i as f64 / (radii - 1) as f64) };
            for j in 0..angles {
                let a = if angles == 1 { 0.0 } else { -half + 2.0 * half * j as f64 / (angles - 1) as f64 };
                let z = Complex64::from_polar(r, PI + a);
                debug_assert!(in_t_narrow(z, 2.0 * self.m.params().r, n as f64));
                out.push(z + shift);
            }
        }
        out
    }

    /// Point on the fiber `ψ = t` with `Υ = ζ`, found by Newton in `y`.
    pub fn solve_upsilon(&self, t: Complex64, zeta: Complex64) -> Result<(Point, FiberPoint), FiberError> {
        let mut y = zeta - self.weight * ln_axis(zeta) - ln_axis(t);
        let mut x = self.mu0_inverse(t, y)?;
        let mut res = f64::INFINITY;
        for _ in 0..12 {
            x = self.solve_x(t, y, x)?;
            let p = self.m.from_xy((x, y));
            let f = self.upsilon_with_t(p, t)?;
            let e = f.upsilon - zeta;
            res = e.norm();
            if res < 1e-8 * zeta.norm() {
                return Ok((p, f));
            }
            y -= e / (1.0 + self.weight / y);
        }
        Err(FiberError::Newton(res))
    }

    /// Whether `Υ` restricted to `ψ^{-1}(t) ∩ F^{-n}(D')` reaches every target
    /// of `T'_{2R, n} + log n`: each target is solved on the fiber `t - n`
    /// and the solution must lie in `D'`.
    pub fn coverage(&self, t: Complex64, n: usize, radii: usize, angles: usize) -> Coverage {
        let tn = t - n as f64;
        let targets = self.coverage_targets(n, radii, angles);
        let results: Vec<Option<f64>> = targets
            .par_iter()
            .map(|&z| {
                let (p, f) = self.solve_upsilon(tn, z).ok()?;
                let inside = in_dprime_ty(tn, f.y, self.m.params()) && in_d(p, self.m.params(), self.m.curve());
                inside.then(|| (f.upsilon - z).norm())
            })
            .collect();
        Coverage {
            n,
            samples: targets.len(),
            covered: results.iter().flatten().count(),
            max_mismatch: results.iter().flatten().fold(0.0, |a: f64, &b| a.max(b)),
        }
    }
}

/// CSV rows `re_t,im_t,re_z,im_z,re_w,im_w,re_upsilon,im_upsilon`.
pub fn trace_csv(points: &[TracePoint]) -> String {
    let mut out = String::from("re_t,im_t,re_z,im_z,re_w,im_w,re_upsilon,im_upsilon\n");
    for tp in points {
        let (t, (z, w), u) = (tp.fiber.t, tp.p, tp.fiber.upsilon);
        let _ = writeln!(out, "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}", t.re, t.im, z.re, z.im, w.re, w.im, u.re, u.im);
    }
    out
}
