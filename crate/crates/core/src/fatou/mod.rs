//! Fatou coordinate on the invariant domain: the chart `(x, y) = (1/z, 1/(w - γ(z)))`,
//! the series `g`, `h` and constants `c`, `k`, the correction `β`, the partial
//! coordinates `μ_n`, their limit `ψ` and the map `Θ = (ψ, y)`.

pub mod beta;

use std::fmt::Write as _;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::curve::{solve_curve, CurveError, CurveSeries};
use crate::ddouble::DdComplex;
use crate::fit::{least_squares_complex, loglog_slope};
use crate::jets::{germ_of_chain, rational_to_f64, Jet2, JetError, MapJet};
use crate::mapchain::{MapChain, Point};
use crate::ode::OdeError;
use crate::regions::{in_d, in_d_xy, in_u, BoundarySeries, RegionParams};
use crate::scalar::{ln_axis, Scalar};

pub use beta::{asymptotic_coefficients, Beta, BetaNode, Estimate};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FatouError {
    #[error("chart pole: z = 0 (the w-axis)")]
    AxisPole,
    #[error("chart pole: w = γ(z) (the curve)")]
    CurvePole,
    #[error("curve of order {got} is too low for series order {need}")]
    CurveOrderTooLow { need: usize, got: usize },
    #[error("curve has no exact coefficients")]
    CurveNotExact,
    #[error("unexpected series structure: {0}")]
    Structure(String),
    #[error("point outside the domain")]
    OutsideDomain,
    #[error("orbit left the numerical range after {0} iterates")]
    Escaped(usize),
    #[error("no admissible iterate within {0} iterates")]
    Budget(usize),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error("beta: {0}")]
    Beta(#[from] OdeError),
}

/// Iteration budget and stopping tolerance of the limits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncPolicy {
    pub n_max: usize,
    pub tol: f64,
}

impl Default for TruncPolicy {
    fn default() -> Self {
        TruncPolicy { n_max: 200_000, tol: 1e-9 }
    }
}

/// Construction settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MachineConfig {
    pub params: RegionParams,
    /// Order of the curve; the map jet is taken one higher.
    pub curve_order: usize,
    /// Number of coefficients of `g` and `h`.
    pub series_order: usize,
    pub policy: TruncPolicy,
}

impl Default for MachineConfig {
    fn default() -> Self {
        MachineConfig { params: RegionParams::default(), curve_order: 12, series_order: 10, policy: TruncPolicy::default() }
    }
}

/// Exact data read off the jets in the coordinates `(z, u)`, `u = w - γ(z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesData {
    /// `g[j]` is the coefficient of `u^j` (so `g[0] = 0`).
    pub g: Vec<BigRational>,
    /// `h[j]` is the coefficient of `(1/y)^j` (so `h[0] = 0`).
    pub h: Vec<BigRational>,
    /// Coefficient of `z` in `1/z_1`.
    pub c: BigRational,
    /// `1 - c_3` with `F_1(z, γ(z)) = z + z^2 + c_3 z^3 + ...`.
    pub c_from_curve: BigRational,
    /// Coefficient of `z u` in `1/z_1`.
    pub a_zu: BigRational,
    /// Aggregate `1/(xy)` coefficient of the increment with `r = c`, `s = 0`.
    pub k: BigRational,
}

fn shift_out(j: &Jet2<BigRational>, dz: usize, du: usize) -> Result<Jet2<BigRational>, FatouError> {
    let n = j.order() - dz.max(du);
    let mut out = Jet2::zero(n);
    for (i, k, c) in j.terms() {
        if i < dz || k < du {
            if !c.is_zero() {
                return Err(FatouError::Structure(format!("nonzero coefficient at z^{i} u^{k}")));
            }
            continue;
        }
        if i - dz + k - du <= n {
            out.set(i - dz, k - du, c.clone());
        }
    }
    Ok(out)
}

/// Substitute `w = u + γ(z)` and expand `1/z_1` and `1/u_1`.
pub fn extract_series(m: &MapJet<BigRational>, curve: &CurveSeries, order: usize) -> Result<SeriesData, FatouError> {
    let jet = m.order();
    let gam = curve.exact_coefficients().ok_or(FatouError::CurveNotExact)?;
    // the pure-z part of u_1 vanishes only up to z^{N+1}
    if jet > curve.order() + 1 {
        return Err(FatouError::CurveOrderTooLow { need: jet - 1, got: curve.order() });
    }
    if order + 3 > jet {
        return Err(FatouError::CurveOrderTooLow { need: order + 2, got: curve.order() });
    }
    let mut gpoly = vec![BigRational::zero(); 3];
    gpoly.extend(gam.iter().cloned());
    let gamma = Jet2::from_z_poly(jet, &gpoly);
    let z = Jet2::var_z(jet);
    let u = Jet2::var_w(jet);
    let w = u.add(&gamma)?;
    let z1 = m.first.compose(&z, &w)?;
    let w1 = m.second.compose(&z, &w)?;
    let u1 = w1.sub(&gamma.compose(&z1, &Jet2::zero(jet))?)?;
    let inv_p = shift_out(&z1, 1, 0)?.recip()?;
    let inv_q = shift_out(&u1, 0, 1)?.recip()?;
    // 1/z_1 = Σ P_ij z^{i-1} u^j, 1/u_1 = Σ Q_ij z^i u^{j-1}
    let mut g = vec![BigRational::zero()];
    let mut h = vec![BigRational::zero()];
    for j in 1..=order {
        g.push(inv_p.coeff(1, j));
        h.push(inv_q.coeff(1, j + 1));
    }
    if inv_p.coeff(1, 0) != -BigRational::one() {
        return Err(FatouError::Structure("1/z_1 - 1/z does not start with -1".into()));
    }
    if inv_q.coeff(1, 1) != BigRational::one() {
        return Err(FatouError::Structure("y_1 - y does not start with 1/x".into()));
    }
    for i in 1..=2 {
        if !inv_q.coeff(i, 0).is_zero() {
            return Err(FatouError::Structure(format!("y/x^{i} term in y_1")));
        }
    }
    let c = inv_p.coeff(2, 0);
    let a_zu = inv_p.coeff(2, 1);
    let c3 = z1.coeff(3, 0);
    let c_from_curve = BigRational::one() - c3;
    // the 1/(xy) terms: A from x_1, r g_1 from r log x_1, c b_1 from x_1 β(y_1), with b_1 = g_1
    let k = &a_zu + &c * &g[1] + &c * &g[1];
    Ok(SeriesData { g, h, c, c_from_curve, a_zu, k })
}

/// `(x, y) = (1/z, 1/(w - γ(z)))`.
pub fn to_xy(p: Point, curve: &CurveSeries) -> Result<Point, FatouError> {
    let (z, w) = p;
    if z == Complex64::new(0.0, 0.0) {
        return Err(FatouError::AxisPole);
    }
    let u = w - curve.gamma_unchecked(z);
    if u == Complex64::new(0.0, 0.0) {
        return Err(FatouError::CurvePole);
    }
    Ok((z.inv(), u.inv()))
}

pub fn from_xy(q: Point, curve: &CurveSeries) -> Point {
    let z = q.0.inv();
    (z, q.1.inv() + curve.gamma_unchecked(z))
}

fn to_xy_in<S: Scalar>(p: (S, S), curve: &CurveSeries) -> (S, S) {
    let u = p.1 - curve.gamma_in(p.0);
    (S::one() / p.0, S::one() / u)
}

fn from_xy_in<S: Scalar>(q: (S, S), curve: &CurveSeries) -> (S, S) {
    let z = S::one() / q.0;
    (z, S::one() / q.1 + curve.gamma_in(z))
}

/// A limit value with its stopping index and tail estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Limit {
    pub value: Complex64,
    /// Iterate at which the limit was truncated.
    pub n: usize,
    pub err_est: f64,
    /// Chart coordinates of the stopping iterate.
    pub x: Complex64,
    pub y: Complex64,
}

#[derive(Clone, Debug)]
pub struct FatouMachine {
    chain: MapChain,
    jet: MapJet<BigRational>,
    curve: CurveSeries,
    params: RegionParams,
    series: SeriesData,
    c: Complex64,
    k: Complex64,
    beta: Beta,
    pub policy: TruncPolicy,
}

impl FatouMachine {
    /// Germ, curve, series and β for `chain`.
    pub fn build(chain: &MapChain, cfg: &MachineConfig) -> Result<Self, FatouError> {
        let jet = germ_of_chain(chain, cfg.curve_order + 1)?;
        let curve = solve_curve(&jet, cfg.curve_order, cfg.params.eps)?;
        Self::from_parts(chain, jet, curve, cfg)
    }

    pub fn from_parts(chain: &MapChain, jet: MapJet<BigRational>, curve: CurveSeries, cfg: &MachineConfig) -> Result<Self, FatouError> {
        let series = extract_series(&jet, &curve, cfg.series_order)?;
        let beta = Beta::new(&series.g, &series.h, cfg.params.r / 2.0)?;
        let c = Complex64::new(rational_to_f64(&series.c), 0.0);
        let k = Complex64::new(rational_to_f64(&series.k), 0.0);
        Ok(FatouMachine { chain: chain.clone(), jet, curve, params: cfg.params, series, c, k, beta, policy: cfg.policy })
    }

    pub fn chain(&self) -> &MapChain {
        &self.chain
    }

    pub fn jet(&self) -> &MapJet<BigRational> {
        &self.jet
    }

    pub fn curve(&self) -> &CurveSeries {
        &self.curve
    }

    pub fn params(&self) -> &RegionParams {
        &self.params
    }

    pub fn series(&self) -> &SeriesData {
        &self.series
    }

    pub fn beta(&self) -> &Beta {
        &self.beta
    }

    pub fn c(&self) -> Complex64 {
        self.c
    }

    pub fn k(&self) -> Complex64 {
        self.k
    }

    /// Weight of `log x_n`.
    pub fn r(&self) -> Complex64 {
        self.c
    }

    /// Weight of `log y_n`.
    pub fn s(&self) -> Complex64 {
        -self.k
    }

    pub fn to_xy(&self, p: Point) -> Result<Point, FatouError> {
        to_xy(p, &self.curve)
    }

    pub fn from_xy(&self, q: Point) -> Point {
        from_xy(q, &self.curve)
    }

    /// One step of the map in the chart.
    pub fn step_xy(&self, q: Point) -> Result<Point, FatouError> {
        self.to_xy(self.chain.eval_forward(self.from_xy(q)))
    }

    /// Chart points where `μ` is evaluated: the domain in (x, y) with `y` in `U_R`.
    pub fn admissible(&self, x: Complex64, y: Complex64) -> bool {
        in_d_xy(x, y, &self.params) && in_u(y, self.params.r)
    }

    pub fn beta_at(&self, y: Complex64) -> Result<Complex64, FatouError> {
        Ok(self.beta.eval(y)?)
    }

    /// `μ_0(x, y) = x + r log x + s log y + x β(y)`.
    pub fn mu0(&self, x: Complex64, y: Complex64) -> Result<Complex64, FatouError> {
        Ok(x + self.r() * ln_axis(x) + self.s() * ln_axis(y) + x * self.beta_at(y)?)
    }

    /// `μ_0` in double-double with a chosen weight of `log y`.
    pub fn mu0_dd(&self, x: DdComplex, y: DdComplex, s: Complex64) -> DdComplex {
        let r = DdComplex::from_c64(self.r());
        x + r * x.ln_axis() + DdComplex::from_c64(s) * y.ln_axis() + x * self.beta.series_in(y).value
    }

    /// `μ_n(x, y) = μ_0(F̃^n(x, y)) + n`.
    pub fn mu(&self, x: Complex64, y: Complex64, n: usize) -> Result<Complex64, FatouError> {
        let q = self.orbit_point(self.from_xy((x, y)), n)?;
        let (xn, yn) = self.to_xy(q)?;
        Ok(self.mu0(xn, yn)? + n as f64)
    }

    fn orbit_point(&self, p: Point, n: usize) -> Result<Point, FatouError> {
        let mut q = p;
        for m in 0..n {
            q = self.chain.eval_forward(q);
            if !finite(q) {
                return Err(FatouError::Escaped(m + 1));
            }
        }
        Ok(q)
    }

    /// `μ_0(F^m p) + m` for `m = 0..=n`; every iterate must be admissible.
    pub fn mu_sequence(&self, p: Point, n: usize) -> Result<Vec<Complex64>, FatouError> {
        let mut out = Vec::with_capacity(n + 1);
        let mut q = p;
        for m in 0..=n {
            let (x, y) = self.to_xy(q)?;
            if !self.admissible(x, y) {
                return Err(FatouError::OutsideDomain);
            }
            out.push(self.mu0(x, y)? + m as f64);
            q = self.chain.eval_forward(q);
            if !finite(q) {
                return Err(FatouError::Escaped(m + 1));
            }
        }
        Ok(out)
    }

    /// Increments `|μ_{m+1} - μ_m|` along the orbit of `p`, in double-double.
    pub fn mu_increments_dd(&self, p: Point, n: usize) -> Vec<f64> {
        let s = self.s();
        let mut q = (DdComplex::from_c64(p.0), DdComplex::from_c64(p.1));
        let mut xy = to_xy_in(q, &self.curve);
        let mut mu = self.mu0_dd(xy.0, xy.1, s);
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            q = self.chain.apply(q);
            xy = to_xy_in(q, &self.curve);
            let next = self.mu0_dd(xy.0, xy.1, s);
            out.push((next - mu + DdComplex::from_c64(Complex64::new(1.0, 0.0))).to_c64().norm());
            mu = next;
        }
        out
    }

    /// `μ_1 - μ_0 + ... ` at a chart point: the one-step increment of `μ`
    /// with weight `s` on `log y`, in double-double.
    pub fn increment_dd(&self, x: Complex64, y: Complex64, s: Complex64) -> Complex64 {
        let q = (DdComplex::from_c64(x), DdComplex::from_c64(y));
        let p = from_xy_in(q, &self.curve);
        let q1 = to_xy_in(self.chain.apply(p), &self.curve);
        let one = DdComplex::from_c64(Complex64::new(1.0, 0.0));
        (self.mu0_dd(q1.0, q1.1, s) - self.mu0_dd(q.0, q.1, s) + one).to_c64()
    }

    /// The limit `lim μ_n` from `p`: truncated at the first admissible iterate
    /// whose increment is below the tolerance, so `F(p)` stops at the same
    /// orbit point one step earlier.
    pub fn psi(&self, p: Point) -> Result<Limit, FatouError> {
        self.psi_with(p, self.policy)
    }

    pub fn psi_with(&self, p: Point, policy: TruncPolicy) -> Result<Limit, FatouError> {
        let mut q = p;
        let mut cur: Option<(Complex64, Complex64, Complex64)> = None;
        for m in 0..=policy.n_max {
            let (x, y) = match cur {
                Some((x, y, _)) => (x, y),
                None => self.to_xy(q)?,
            };
            let mu = match cur {
                Some((_, _, mu)) => Some(mu),
                None if self.admissible(x, y) => Some(self.mu0(x, y)?),
                None => None,
            };
            let q1 = self.chain.eval_forward(q);
            if !finite(q1) {
                return Err(FatouError::Escaped(m + 1));
            }
            let (x1, y1) = self.to_xy(q1)?;
            let next = if self.admissible(x1, y1) { Some(self.mu0(x1, y1)?) } else { None };
            if let (Some(mu), Some(mu1)) = (mu, next) {
                let d = (mu1 - mu + 1.0).norm();
                if d < policy.tol {
                    return Ok(Limit { value: mu + m as f64, n: m, err_est: d * x.norm() * y.norm(), x, y });
                }
            }
            cur = next.map(|mu1| (x1, y1, mu1));
            q = q1;
        }
        Err(FatouError::Budget(policy.n_max))
    }

    /// `ψ` at a chart point.
    pub fn mu_limit(&self, x: Complex64, y: Complex64) -> Result<Limit, FatouError> {
        self.psi(self.from_xy((x, y)))
    }

    /// `η = lim μ_n - μ_0` at a chart point.
    pub fn eta(&self, x: Complex64, y: Complex64) -> Result<Complex64, FatouError> {
        Ok(self.mu_limit(x, y)?.value - self.mu0(x, y)?)
    }

    /// `Θ(p) = (ψ(p), 1/(w - γ(z)))` on the invariant domain.
    pub fn theta(&self, p: Point) -> Result<(Complex64, Complex64), FatouError> {
        if !in_d(p, &self.params, &self.curve) {
            return Err(FatouError::OutsideDomain);
        }
        let (_, y) = self.to_xy(p)?;
        Ok((self.psi(p)?.value, y))
    }

    /// Least-squares fit of the `1/(xy)` coefficient of the increment with
    /// `s = 0`, which is `k` by definition.
    pub fn fit_k(&self) -> KFit {
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for &xm in &[1e3, 3e3, 1e4, 3e4, 1e5, 3e5, 1e6] {
            for &ym in &[100.0, 150.0, 250.0, 400.0, 650.0, 1000.0] {
                for &(ax, ay) in &[(0.0, 0.0), (0.2, -0.1), (-0.15, 0.25)] {
                    let x = -Complex64::from_polar(xm, ax);
                    let y = -Complex64::from_polar(ym, ay);
                    let d = self.increment_dd(x, y, Complex64::new(0.0, 0.0));
                    let (xi, yi) = (x.inv(), y.inv());
                    rows.push(vec![xi * yi, xi * yi * yi, xi * yi * yi * yi, xi * yi.powi(4), xi * xi, xi * xi * yi, xi * xi * yi * yi, xi * xi * xi]);
                    rhs.push(d);
                }
            }
        }
        let coef = least_squares_complex(&rows, &rhs);
        let resid = rows
            .iter()
            .zip(&rhs)
            .map(|(r, d)| {
                let fit: Complex64 = r.iter().zip(&coef).map(|(a, b)| a * b).sum();
                ((fit - d) / r[0]).norm()
            })
            .fold(0.0, f64::max);
        KFit { k: coef[0], symbolic: self.k, max_relative_residual: resid, samples: rhs.len() }
    }

    /// Numerical form of the injectivity contraction bound.
    pub fn injectivity_margin(&self) -> Result<Margin, FatouError> {
        let rr = self.params.r;
        let mut sup_beta: f64 = 0.0;
        for y in crate::regions::boundary_samples(rr * 1.0001, 64) {
            sup_beta = sup_beta.max((y * self.beta_at(y)?).norm());
        }
        // oscillation of η in x: finite differences over a band of D'
        let mut osc: f64 = 0.0;
        for &xm in &[4.0 * rr, 8.0 * rr] {
            for &ym in &[1.2 * rr, 1.6 * rr] {
                for &a in &[-0.2, 0.0, 0.2] {
                    let x = -Complex64::from_polar(xm, a);
                    let y = -Complex64::from_polar(ym, a / 2.0);
                    let dx = Complex64::new(-1.0, 0.0);
                    let e0 = self.eta(x, y)?;
                    let e1 = self.eta(x + dx, y)?;
                    osc = osc.max((e1 - e0).norm());
                }
            }
        }
        let r_term = self.r().norm() / rr;
        let c_term = sup_beta / rr;
        let total = r_term + c_term + osc;
        Ok(Margin { r_term, c_term, eta_oscillation: osc, total, pass: total < 1.0 })
    }

    /// Slope of `log |μ_{n+1} - μ_n|` against `log n` over `n` in `[lo, hi]`.
    pub fn increment_slope(&self, p: Point, lo: usize, hi: usize) -> f64 {
        let inc = self.mu_increments_dd(p, hi + 1);
        let ns: Vec<usize> = log_spaced(lo, hi, 24);
        let x: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
        let y: Vec<f64> = ns.iter().map(|&n| inc[n]).collect();
        loglog_slope(&x, &y)
    }

    pub fn to_json_value(&self) -> Value {
        let q = |v: &BigRational| v.to_string();
        let list = |v: &[BigRational]| v.iter().enumerate().skip(1).map(|(j, c)| json!([j, q(c)])).collect::<Vec<_>>();
        json!({
            "params": self.params,
            "curve_order": self.curve.order(),
            "g": list(&self.series.g),
            "h": list(&self.series.h),
            "c": q(&self.series.c),
            "c_from_curve": q(&self.series.c_from_curve),
            "k": q(&self.series.k),
            "r": q(&self.series.c),
            "s": q(&-self.series.k.clone()),
            "policy": {"n_max": self.policy.n_max, "tol": self.policy.tol},
            "beta": {
                "anchor": -self.beta.anchor(),
                "series": self.beta.series_coefficients().iter().take(12).collect::<Vec<_>>(),
                "nodes": self.beta.nodes().iter().map(|n| json!([n.y, n.beta.re, n.beta.im])).collect::<Vec<_>>(),
            },
        })
    }

    /// CSV rows `re_z,im_z,re_w,im_w,re_psi,im_psi,err_est`; points outside
    /// the basin get NaN.
    pub fn psi_csv(&self, points: &[Point]) -> String {
        let mut out = String::from("re_z,im_z,re_w,im_w,re_psi,im_psi,err_est\n");
        for &p in points {
            let (v, e) = match self.psi(p) {
                Ok(l) => (l.value, l.err_est),
                Err(_) => (Complex64::new(f64::NAN, f64::NAN), f64::NAN),
            };
            let _ = writeln!(out, "{:e},{:e},{:e},{:e},{:e},{:e},{:e}", p.0.re, p.0.im, p.1.re, p.1.im, v.re, v.im, e);
        }
        out
    }
}

impl BoundarySeries for FatouMachine {
    fn g_at(&self, s: Complex64) -> Complex64 {
        self.beta.g(s)
    }

    fn h_at(&self, s: Complex64) -> Complex64 {
        self.beta.h(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KFit {
    pub k: Complex64,
    pub symbolic: Complex64,
    /// Largest fit residual relative to the `1/(xy)` scale.
    pub max_relative_residual: f64,
    pub samples: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Margin {
    pub r_term: f64,
    pub c_term: f64,
    pub eta_oscillation: f64,
    pub total: f64,
    pub pass: bool,
}

pub(crate) fn finite(p: Point) -> bool {
    p.0.re.is_finite() && p.0.im.is_finite() && p.1.re.is_finite() && p.1.im.is_finite()
}

/// About `count` distinct integers spaced geometrically in `[lo, hi]`.
pub fn log_spaced(lo: usize, hi: usize, count: usize) -> Vec<usize> {
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let mut v: Vec<usize> = (0..count).map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp().round() as usize).collect();
    v.dedup();
    v
}

#[cfg(test)]
mod tests;
