//! The invariant curve `w = γ(z)` tangent to the z-axis, and the
//! one-dimensional Fatou coordinate of the map restricted to it.

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::bigprec::{BigComplex, BigCtx};
use crate::ddouble::{Dd, DdComplex};
use crate::fit::linear_fit;
use crate::jets::{parse_rational, rational_to_f64, Coeff, Jet2, JetError, MapJet};
use crate::mapchain::{MapChain, Point};
use crate::regions::{in_v, APERTURE};
use crate::scalar::dd_from_rational;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurveError {
    #[error("zero pivot at order {0}: the curve equation is resonant")]
    Resonance(usize),
    #[error("map jet has order {got}, need {need}")]
    MapOrderTooLow { need: usize, got: usize },
    #[error("curve order must be at least 3, got {0}")]
    OrderTooLow(usize),
    #[error("the map moves the z-axis at order {0}, no curve of order 3")]
    NotTangent(usize),
    #[error("point {0} is outside the sector V_eps")]
    OutsideDomain(Complex64),
    #[error("no convergence within {0} iterations")]
    NoConvergence(usize),
    #[error("orbit did not approach the curve within {0} iterations")]
    NotAttracted(usize),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("malformed curve json: {0}")]
    Json(String),
}

/// Coefficients `γ_0..γ_N` of the invariant curve, solved from
/// `γ(F1(z, γ(z))) = F2(z, γ(z))` one power of z at a time.
pub fn solve_coefficients<T: Coeff>(m: &MapJet<T>, n: usize) -> Result<Vec<T>, CurveError> {
    if n < 3 {
        return Err(CurveError::OrderTooLow(n));
    }
    if m.order() < n + 1 {
        return Err(CurveError::MapOrderTooLow { need: n + 1, got: m.order() });
    }
    let order = n + 1;
    let map = MapJet { first: m.first.truncate(order), second: m.second.truncate(order) };
    let mut gamma = vec![T::zero(); n + 1];
    let first = residual(&map, &gamma)?;
    if let Some(k) = (1..=3).find(|&k| !first.coeff(k, 0).is_zero()) {
        return Err(CurveError::NotTangent(k));
    }
    // the z^k equation is affine in γ_{k-1}; probe it at 0 and 1
    for k in 4..=order {
        gamma[k - 1] = T::zero();
        let r0 = residual(&map, &gamma)?.coeff(k, 0);
        gamma[k - 1] = T::one();
        let r1 = residual(&map, &gamma)?.coeff(k, 0);
        let pivot = r1 - r0.clone();
        let inv = match pivot.inverse() {
            Some(inv) if T::EXACT || pivot.to_c64().norm() > 1e-12 => inv,
            _ => return Err(CurveError::Resonance(k)),
        };
        gamma[k - 1] = -(r0 * inv);
    }
    Ok(gamma)
}

/// `F2(z, γ(z)) - γ(F1(z, γ(z)))` as a series in z.
fn residual<T: Coeff>(map: &MapJet<T>, gamma: &[T]) -> Result<Jet2<T>, JetError> {
    let order = map.order();
    let z = Jet2::var_z(order);
    let g = Jet2::from_z_poly(order, gamma);
    let f1 = map.first.compose(&z, &g)?;
    let f2 = map.second.compose(&z, &g)?;
    let back = g.compose(&f1, &Jet2::zero(order))?;
    f2.sub(&back)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveEval {
    pub gamma: Complex64,
    pub gamma_prime: Complex64,
    pub trunc_error_bound: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurveSeries {
    order: usize,
    /// `γ_3..γ_N`.
    coeffs: Vec<Complex64>,
    exact: Option<Vec<BigRational>>,
    /// Coefficients to double-double accuracy when exact ones are known.
    coeffs_dd: Vec<DdComplex>,
    eps: f64,
    measured_c1: f64,
    measured_c2: f64,
    /// Tail constant: `|γ - γ_N-truncation| <= m |z|^{N+1}` on `V_eps`.
    growth_m: f64,
}

/// Solve the curve from a map jet and measure its bound constants on `V_eps`.
pub fn solve_curve<T: Coeff>(m: &MapJet<T>, n: usize, eps: f64) -> Result<CurveSeries, CurveError> {
    let gamma = solve_coefficients(m, n)?;
    let exact: Option<Vec<BigRational>> = gamma[3..].iter().map(Coeff::to_rational).collect();
    let coeffs = gamma[3..].iter().map(Coeff::to_c64).collect();
    Ok(CurveSeries::from_parts(n, coeffs, exact, eps))
}

impl CurveSeries {
    pub fn from_parts(order: usize, coeffs: Vec<Complex64>, exact: Option<Vec<BigRational>>, eps: f64) -> Self {
        let coeffs_dd = match &exact {
            Some(e) => e.iter().map(|q| DdComplex::new(dd_from_rational(q), Dd::ZERO)).collect(),
            None => coeffs.iter().map(|c| DdComplex::from_c64(*c)).collect(),
        };
        let mut c = CurveSeries { order, coeffs, exact, coeffs_dd, eps, measured_c1: 0.0, measured_c2: 0.0, growth_m: 0.0 };
        c.growth_m = c.tail_constant();
        let (c1, c2) = c.measure_constants(64, 33);
        c.measured_c1 = c1;
        c.measured_c2 = c2;
        c
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// `γ_k` (zero for k < 3 or k > N).
    pub fn coefficient(&self, k: usize) -> Complex64 {
        if (3..=self.order).contains(&k) {
            self.coeffs[k - 3]
        } else {
            Complex64::zero()
        }
    }

    pub fn exact_coefficient(&self, k: usize) -> Option<BigRational> {
        if !(3..=self.order).contains(&k) {
            return Some(BigRational::zero());
        }
        self.exact.as_ref().map(|e| e[k - 3].clone())
    }

    pub fn exact_coefficients(&self) -> Option<&[BigRational]> {
        self.exact.as_deref()
    }

    pub fn measured_c1(&self) -> f64 {
        self.measured_c1
    }

    pub fn measured_c2(&self) -> f64 {
        self.measured_c2
    }

    pub fn growth_constant(&self) -> f64 {
        self.growth_m
    }

    /// Horner evaluation of the truncated series anywhere.
    pub fn gamma_unchecked(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::zero(), |acc, c| acc * z + c) * z * z * z
    }

    /// γ in any scalar type, without domain checks.
    pub fn gamma_in<S: crate::scalar::Scalar>(&self, z: S) -> S {
        self.coeffs_dd.iter().rev().fold(S::zero(), |acc, c| acc * z + S::from_dd(*c)) * z * z * z
    }

    pub fn gamma_prime_unchecked(&self, z: Complex64) -> Complex64 {
        let d = self.coeffs.iter().enumerate().rev().fold(Complex64::zero(), |acc, (i, c)| acc * z + c * (i + 3) as f64);
        d * z * z
    }

    pub fn trunc_error_bound(&self, z: Complex64) -> f64 {
        self.growth_m * z.norm().powi(self.order as i32 + 1)
    }

    /// γ, γ' and the truncation bound on the closure of `V_eps`.
    pub fn eval(&self, z: Complex64) -> Result<CurveEval, CurveError> {
        if z == Complex64::zero() {
            return Ok(CurveEval { gamma: z, gamma_prime: z, trunc_error_bound: 0.0 });
        }
        let on_closure = z.norm() <= self.eps && (-z).arg().abs() <= APERTURE;
        if !on_closure {
            return Err(CurveError::OutsideDomain(z));
        }
        Ok(CurveEval {
            gamma: self.gamma_unchecked(z),
            gamma_prime: self.gamma_prime_unchecked(z),
            trunc_error_bound: self.trunc_error_bound(z),
        })
    }

    /// Geometric envelope `|γ_k| <= A ρ^k` over the stored coefficients,
    /// summed past N on the disk of radius eps.
    fn tail_constant(&self) -> f64 {
        let pts: Vec<(f64, f64)> = (3..=self.order)
            .map(|k| (k as f64, self.coefficient(k).norm()))
            .filter(|(_, c)| *c > 0.0)
            .map(|(k, c)| (k, c.ln()))
            .collect();
        if pts.len() < 2 {
            return 0.0;
        }
        let (ks, ls): (Vec<f64>, Vec<f64>) = pts.iter().copied().unzip();
        let (slope, _) = linear_fit(&ks, &ls);
        let rho = slope.exp();
        let a = pts.iter().map(|(k, l)| (l - k * slope).exp()).fold(0.0, f64::max);
        let q = rho * self.eps;
        if q >= 1.0 {
            return f64::INFINITY;
        }
        a * rho.powi(self.order as i32 + 1) / (1.0 - q)
    }

    /// Sup of `|γ|/|z|^3` and `|γ'|/|z|^2` over a polar grid in `V_eps`.
    fn measure_constants(&self, radii: usize, angles: usize) -> (f64, f64) {
        let mut c1: f64 = 0.0;
        let mut c2: f64 = 0.0;
        for z in sector_grid(self.eps, radii, angles) {
            let m = z.norm();
            c1 = c1.max(self.gamma_unchecked(z).norm() / m.powi(3));
            c2 = c2.max(self.gamma_prime_unchecked(z).norm() / m.powi(2));
        }
        (c1, c2)
    }

    pub fn to_json_value(&self) -> Value {
        let coeffs: Vec<Value> = (3..=self.order).map(|k| json!([k, self.coefficient(k).re, self.coefficient(k).im])).collect();
        let mut v = json!({
            "order": self.order,
            "coeffs": coeffs,
            "C1": self.measured_c1,
            "C2": self.measured_c2,
            "M": self.growth_m,
            "eps": self.eps,
        });
        if let Some(e) = &self.exact {
            let ex: Vec<Value> = e.iter().enumerate().map(|(i, c)| json!([i + 3, c.to_json()])).collect();
            v["exact"] = Value::Array(ex);
        }
        v
    }

    pub fn from_json_value(v: &Value) -> Result<Self, CurveError> {
        let bad = |m: &str| CurveError::Json(m.to_string());
        let order = v["order"].as_u64().ok_or_else(|| bad("order"))? as usize;
        let eps = v["eps"].as_f64().unwrap_or(0.05);
        let mut coeffs = vec![Complex64::zero(); order.saturating_sub(2)];
        for t in v["coeffs"].as_array().ok_or_else(|| bad("coeffs"))? {
            let k = t[0].as_u64().ok_or_else(|| bad("k"))? as usize;
            if !(3..=order).contains(&k) {
                return Err(bad("coefficient index out of range"));
            }
            coeffs[k - 3] = Complex64::new(t[1].as_f64().ok_or_else(|| bad("re"))?, t[2].as_f64().ok_or_else(|| bad("im"))?);
        }
        let exact = match v.get("exact").and_then(Value::as_array) {
            Some(list) => {
                let mut e = vec![BigRational::zero(); order.saturating_sub(2)];
                for t in list {
                    let k = t[0].as_u64().ok_or_else(|| bad("k"))? as usize;
                    let c = t[1].as_str().and_then(parse_rational).ok_or_else(|| bad("exact coefficient"))?;
                    if !(3..=order).contains(&k) {
                        return Err(bad("coefficient index out of range"));
                    }
                    e[k - 3] = c;
                }
                Some(e)
            }
            None => None,
        };
        let mut c = CurveSeries::from_parts(order, coeffs, exact, eps);
        if let (Some(c1), Some(c2)) = (v["C1"].as_f64(), v["C2"].as_f64()) {
            c.measured_c1 = c1;
            c.measured_c2 = c2;
        }
        Ok(c)
    }

    /// `|F2(z, γ(z)) - γ(F1(z, γ(z)))|` evaluated with `bits` of binary
    /// precision through the elementary chain.
    pub fn invariance_residual(&self, chain: &MapChain, z: Complex64, bits: usize) -> f64 {
        let mut ctx = BigCtx::new(bits);
        let coeffs: Vec<BigComplex> = match &self.exact {
            Some(e) => e.iter().map(|c| {
                let r = ctx.rational(c);
                ctx.from_real(r)
            }).collect(),
            None => self.coeffs.iter().map(|c| ctx.complex(*c)).collect(),
        };
        let gamma = |ctx: &BigCtx, z: &BigComplex| {
            let mut acc = ctx.complex(Complex64::zero());
            for c in coeffs.iter().rev() {
                acc = ctx.add(&ctx.mul(&acc, z), c);
            }
            let z3 = ctx.mul(&ctx.mul(z, z), z);
            ctx.mul(&acc, &z3)
        };
        let zb = ctx.complex(z);
        let g = gamma(&ctx, &zb);
        let (f1, f2) = ctx.apply_chain(chain, zb, g);
        let back = gamma(&ctx, &f1);
        let r = ctx.sub(&f2, &back);
        ctx.to_c64(&r).norm()
    }

    pub fn invariance_residual_real(&self, chain: &MapChain, z: f64, bits: usize) -> f64 {
        self.invariance_residual(chain, Complex64::new(z, 0.0), bits)
    }
}

/// Polar grid strictly inside `V_eps`: radii from `1e-6 eps` to just below eps.
pub fn sector_grid(eps: f64, radii: usize, angles: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(radii * angles);
    for i in 0..radii {
        let m = 0.999 * eps * 10f64.powf(-6.0 * i as f64 / (radii - 1).max(1) as f64);
        for j in 0..angles {
            let a = 0.999 * APERTURE * (2.0 * j as f64 / (angles - 1).max(1) as f64 - 1.0);
            out.push(-Complex64::from_polar(m, a));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// one-variable exact series, used for the Fatou coordinate corrections

fn s_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let n = a.len();
    let mut out = vec![BigRational::zero(); n];
    for (i, x) in a.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
        for (j, y) in b.iter().enumerate().take(n - i) {
            out[i + j] += x * y;
        }
    }
    out
}

fn s_recip(a: &[BigRational]) -> Vec<BigRational> {
    let n = a.len();
    let inv0 = a[0].recip();
    let mut out = vec![BigRational::zero(); n];
    out[0] = inv0.clone();
    for k in 1..n {
        let s: BigRational = (1..=k).map(|j| &a[j] * &out[k - j]).sum();
        out[k] = -(s * &inv0);
    }
    out
}

/// `log(1 + q)` for `q` without constant term.
fn s_log1p(q: &[BigRational]) -> Vec<BigRational> {
    let n = q.len();
    let mut out = vec![BigRational::zero(); n];
    let mut pow = q.to_vec();
    for m in 1..n {
        let sign = if m % 2 == 1 { BigRational::one() } else { -BigRational::one() };
        let c = sign / BigRational::from_integer(m.into());
        for (o, p) in out.iter_mut().zip(&pow) {
            *o += &c * p;
        }
        pow = s_mul(&pow, q);
    }
    out
}

/// Fatou coordinate of the on-curve map `z -> F1(z, γ(z))`.
///
/// With `τ = -1/z` the map reads `τ -> τ + 1 + b/τ + ...`, and
/// `ζ = lim (τ_n - n - b log τ_n)`; the iteration uses the corrected
/// approximant `E(τ) = τ - b log τ + Σ a_k τ^{-k}` whose increments decay
/// like `τ^{-(K+2)}`.
#[derive(Clone, Debug)]
pub struct CurveFatou {
    chain: MapChain,
    curve: CurveSeries,
    c3: BigRational,
    b: f64,
    corrections: Vec<f64>,
    /// Leading coefficient of the uncorrected increment.
    remainder: f64,
    pub budget: usize,
}

impl CurveFatou {
    pub fn new(map: &MapJet<BigRational>, curve: &CurveSeries, chain: &MapChain) -> Result<Self, CurveError> {
        let exact = curve.exact_coefficients().ok_or(CurveError::Json("curve lacks exact coefficients".into()))?;
        let order = map.order();
        let mut gamma = vec![BigRational::zero(); 3];
        gamma.extend(exact.iter().cloned());
        let zj = Jet2::var_z(order);
        let g = Jet2::from_z_poly(order, &gamma);
        let f = map.first.compose(&zj, &g)?;
        // coefficients of f are exact through z^{min(order, N+2)}
        let known = order.min(curve.order() + 2);
        if known < 4 {
            return Err(CurveError::MapOrderTooLow { need: 4, got: order });
        }
        let len = known; // series in s = 1/τ through s^{known-1}
        // f(z)/z at z = -s
        let ratio: Vec<BigRational> = (0..len)
            .map(|k| {
                let c = f.coeff(k + 1, 0);
                if k % 2 == 1 {
                    -c
                } else {
                    c
                }
            })
            .collect();
        // τ1/τ = z/f(z)
        let p = s_recip(&ratio);
        let c3 = f.coeff(3, 0);
        let d1 = p[2].clone();
        let mut q = p.clone();
        q[0] = BigRational::zero();
        let log_p = s_log1p(&q);
        // base increment: τ(P - 1) - 1 - b log P
        let mut base = vec![BigRational::zero(); len];
        base[..len - 1].clone_from_slice(&p[1..len]);
        base[0] -= BigRational::one();
        for k in 0..len {
            base[k] -= &d1 * &log_p[k];
        }
        let pinv = s_recip(&p);
        let mut pinv_pow = vec![BigRational::zero(); len];
        pinv_pow[0] = BigRational::one();
        let mut corr: Vec<BigRational> = Vec::new();
        // leave the last coefficient as the measured remainder
        let k_max = len - 3;
        for k in 1..=k_max {
            pinv_pow = s_mul(&pinv_pow, &pinv);
            // a_k s^k (P^{-k} - 1); the s^{k+1} coefficient of the total must vanish
            let mut term = vec![BigRational::zero(); len];
            for (i, c) in pinv_pow.iter().enumerate().skip(1) {
                if i + k < len {
                    term[i + k] = c.clone();
                }
            }
            let pivot = term[k + 1].clone();
            let a = -(&base[k + 1]) / pivot;
            for i in 0..len {
                base[i] += &a * &term[i];
            }
            corr.push(a);
        }
        let remainder = rational_to_f64(&base[len - 1]).abs();
        Ok(CurveFatou {
            chain: chain.clone(),
            curve: curve.clone(),
            c3,
            b: rational_to_f64(&d1),
            corrections: corr.iter().map(rational_to_f64).collect(),
            remainder,
            budget: 1_000_000,
        })
    }

    /// The cubic coefficient of the on-curve map.
    pub fn c3(&self) -> &BigRational {
        &self.c3
    }

    /// The log weight `b = 1 - c3`.
    pub fn log_weight(&self) -> f64 {
        self.b
    }

    pub fn curve(&self) -> &CurveSeries {
        &self.curve
    }

    /// One step of the on-curve map.
    pub fn step(&self, z: Complex64) -> Complex64 {
        self.chain.eval_forward((z, self.curve.gamma_unchecked(z))).0
    }

    fn approximant(&self, tau: Complex64) -> Complex64 {
        let s = tau.inv();
        let corr = self.corrections.iter().rev().fold(Complex64::zero(), |acc, a| (acc + a) * s);
        tau - self.b * tau.ln() + corr
    }

    /// Bound on the tail still missing from `E(τ)`.
    fn tail(&self, tau: Complex64) -> f64 {
        let k = self.corrections.len() as i32 + 1;
        let lead = if self.remainder > 0.0 { 2.0 * self.remainder } else { 1.0 };
        lead * tau.norm().powi(-k) / k as f64
    }

    /// ζ(z) for `z` in `V_eps`.
    pub fn zeta(&self, z: Complex64, tol: f64) -> Result<Complex64, CurveError> {
        if !in_v(z, self.curve.eps()) {
            return Err(CurveError::OutsideDomain(z));
        }
        self.zeta_from(z, 0, tol)
    }

    fn zeta_from(&self, z: Complex64, shift: usize, tol: f64) -> Result<Complex64, CurveError> {
        let mut z = z;
        for n in 0..=self.budget {
            let tau = -z.inv();
            if self.tail(tau) < tol {
                return Ok(self.approximant(tau) - (n + shift) as f64);
            }
            z = self.step(z);
            if !(z.re.is_finite() && z.im.is_finite()) || z == Complex64::zero() {
                break;
            }
        }
        Err(CurveError::NoConvergence(self.budget))
    }

    /// `Φ(p) = ζ(π1 F^N p) - N` for the first `N` whose iterate is within
    /// `tol` of the curve over `V_eps`.
    pub fn phi(&self, p: Point, tol: f64, budget: usize) -> Result<Complex64, CurveError> {
        let mut q = p;
        for n in 0..=budget {
            if in_v(q.0, self.curve.eps()) && (q.1 - self.curve.gamma_unchecked(q.0)).norm() < tol {
                return self.zeta_from(q.0, n, tol);
            }
            q = self.chain.eval_forward(q);
        }
        Err(CurveError::NotAttracted(budget))
    }
}
