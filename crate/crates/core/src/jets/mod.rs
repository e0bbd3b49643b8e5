//! Truncated bivariate power series at the origin.
//!
//! A [`Jet2`] keeps every monomial `z^i w^j` with `i + j <= order`; all
//! arithmetic drops terms of higher total degree. The coefficient field is a
//! type parameter, so exact (`BigRational`) and floating (`Complex64`) jets
//! can never be mixed by accident.

mod coeff;
mod directions;

use num_complex::Complex64;
use num_rational::BigRational;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};
use thiserror::Error;

pub use coeff::{complex_roots, parse_rational, rational_to_f64, Coeff, Root};
pub use directions::{characteristic_directions, director, CharacteristicDirection, Director, FieldDirection};

use crate::mapchain::MapChain;

pub type RationalJet = Jet2<BigRational>;
pub type ComplexJet = Jet2<Complex64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JetError {
    #[error("order mismatch: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },
    #[error("jet order must be at least {min}, got {got}")]
    OrderTooLow { min: usize, got: usize },
    #[error("exp needs a jet without constant term")]
    NonzeroConstant,
    #[error("jet is not a unit (zero constant term)")]
    NotUnit,
    #[error("map does not fix the origin")]
    NotFixingOrigin,
    #[error("map is not tangent to the identity")]
    NotTangent,
    #[error("nonlinear part vanishes through order {0}")]
    NoNonlinearPart(usize),
    #[error("every direction is characteristic")]
    Dicritical,
    #[error("direction is degenerate")]
    Degenerate,
    #[error("direction [0:1] needs a chart swap")]
    ChartAtInfinity,
    #[error("malformed jet json: {0}")]
    Json(String),
}

#[inline]
fn index(i: usize, j: usize) -> usize {
    let d = i + j;
    d * (d + 1) / 2 + j
}

#[derive(Clone, Debug, PartialEq)]
pub struct Jet2<T> {
    order: usize,
    coeffs: Vec<T>,
}

impl<T: Coeff> Jet2<T> {
    pub fn zero(order: usize) -> Self {
        Jet2 { order, coeffs: vec![T::zero(); index(0, order + 1)] }
    }

    pub fn constant(order: usize, c: T) -> Self {
        let mut j = Self::zero(order);
        j.coeffs[0] = c;
        j
    }

    pub fn one(order: usize) -> Self {
        Self::constant(order, T::one())
    }

    pub fn monomial(order: usize, i: usize, j: usize, c: T) -> Self {
        let mut out = Self::zero(order);
        out.set(i, j, c);
        out
    }

    pub fn var_z(order: usize) -> Self {
        Self::monomial(order, 1, 0, T::one())
    }

    pub fn var_w(order: usize) -> Self {
        Self::monomial(order, 0, 1, T::one())
    }

    /// Jet of a polynomial in `z` alone (ascending coefficients).
    pub fn from_z_poly(order: usize, coeffs: &[T]) -> Self {
        let mut out = Self::zero(order);
        for (k, c) in coeffs.iter().enumerate().take(order + 1) {
            out.set(k, 0, c.clone());
        }
        out
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeff(&self, i: usize, j: usize) -> T {
        if i + j > self.order {
            T::zero()
        } else {
            self.coeffs[index(i, j)].clone()
        }
    }

    /// Sets a coefficient; monomials above the order are dropped.
    pub fn set(&mut self, i: usize, j: usize, c: T) {
        if i + j <= self.order {
            self.coeffs[index(i, j)] = c;
        }
    }

    /// Nonzero terms sorted by (total degree, power of z).
    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, &T)> + '_ {
        (0..=self.order).flat_map(move |d| {
            (0..=d).map(move |i| (i, d - i, &self.coeffs[index(i, d - i)])).filter(|(_, _, c)| !c.is_zero())
        })
    }

    /// Coefficients of the homogeneous part of degree `d`, indexed by the power of w.
    pub fn homogeneous(&self, d: usize) -> Vec<T> {
        (0..=d).map(|j| self.coeff(d - j, j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn truncate(&self, order: usize) -> Self {
        let mut out = Self::zero(order.min(self.order));
        for (i, j, c) in self.terms() {
            out.set(i, j, c.clone());
        }
        out
    }

    pub fn map_coeffs<U: Coeff>(&self, f: impl Fn(&T) -> U) -> Jet2<U> {
        Jet2 { order: self.order, coeffs: self.coeffs.iter().map(f).collect() }
    }

    pub fn to_complex(&self) -> ComplexJet {
        self.map_coeffs(|c| c.to_c64())
    }

    fn check(&self, other: &Self) -> Result<(), JetError> {
        if self.order != other.order {
            return Err(JetError::OrderMismatch { left: self.order, right: other.order });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, JetError> {
        self.check(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.clone() + b.clone()).collect();
        Ok(Jet2 { order: self.order, coeffs })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, JetError> {
        self.check(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.clone() - b.clone()).collect();
        Ok(Jet2 { order: self.order, coeffs })
    }

    pub fn neg(&self) -> Self {
        self.map_coeffs(|c| -c.clone())
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map_coeffs(|c| c.clone() * s.clone())
    }

    /// Truncated product.
    pub fn mul(&self, other: &Self) -> Result<Self, JetError> {
        self.check(other)?;
        let n = self.order;
        let mut out = Self::zero(n);
        let rhs: Vec<(usize, usize, &T)> = other.terms().collect();
        for (i1, j1, a) in self.terms() {
            for &(i2, j2, b) in &rhs {
                if i1 + j1 + i2 + j2 > n {
                    // rhs is sorted by degree
                    break;
                }
                let k = index(i1 + i2, j1 + j2);
                out.coeffs[k] = out.coeffs[k].clone() + a.clone() * b.clone();
            }
        }
        Ok(out)
    }

    pub fn pow(&self, e: usize) -> Self {
        let mut out = Self::one(self.order);
        for _ in 0..e {
            out = out.mul(self).expect("same order");
        }
        out
    }

    /// `exp(a) = sum a^m / m!`, defined for jets without constant term.
    pub fn exp(&self) -> Result<Self, JetError> {
        if !self.coeffs[0].is_zero() {
            return Err(JetError::NonzeroConstant);
        }
        let mut sum = Self::one(self.order);
        let mut term = Self::one(self.order);
        for m in 1..=self.order as i64 {
            term = term.mul(self)?.scale(&T::from_ratio(1, m));
            sum = sum.add(&term)?;
        }
        Ok(sum)
    }

    /// Multiplicative inverse of a unit.
    pub fn recip(&self) -> Result<Self, JetError> {
        let c0 = self.coeffs[0].inverse().ok_or(JetError::NotUnit)?;
        // 1/a = c0^{-1} * sum (-q)^m with a = a0 (1 + q)
        let mut q = self.scale(&c0);
        q.coeffs[0] = T::zero();
        let mq = q.neg();
        let mut sum = Self::one(self.order);
        let mut term = Self::one(self.order);
        for _ in 1..=self.order {
            term = term.mul(&mq)?;
            sum = sum.add(&term)?;
        }
        Ok(sum.scale(&c0))
    }

    /// Substitute `z -> a`, `w -> b`; both must vanish at the origin.
    pub fn compose(&self, a: &Self, b: &Self) -> Result<Self, JetError> {
        self.check(a)?;
        self.check(b)?;
        if !a.coeffs[0].is_zero() || !b.coeffs[0].is_zero() {
            return Err(JetError::NotFixingOrigin);
        }
        let n = self.order;
        let mut bpow = vec![Self::one(n)];
        for j in 1..=n {
            bpow.push(bpow[j - 1].mul(b)?);
        }
        // Horner in a over columns that are linear combinations of powers of b
        let mut acc = Self::zero(n);
        for i in (0..=n).rev() {
            let mut col = Self::zero(n);
            for (j, bp) in bpow.iter().enumerate().take(n - i + 1) {
                let c = &self.coeffs[index(i, j)];
                if !c.is_zero() {
                    col = col.add(&bp.scale(c))?;
                }
            }
            acc = acc.mul(a)?.add(&col)?;
        }
        Ok(acc)
    }

    /// Numeric evaluation of the truncated polynomial.
    pub fn eval(&self, z: Complex64, w: Complex64) -> Complex64 {
        let n = self.order;
        let mut zp = vec![Complex64::new(1.0, 0.0); n + 1];
        let mut wp = zp.clone();
        for k in 1..=n {
            zp[k] = zp[k - 1] * z;
            wp[k] = wp[k - 1] * w;
        }
        self.terms().map(|(i, j, c)| c.to_c64() * zp[i] * wp[j]).sum()
    }

    pub fn to_json_value(&self) -> Value {
        let coeffs: Vec<Value> = self.terms().map(|(i, j, c)| json!([i, j, c.to_json()])).collect();
        json!({ "order": self.order, "coeffs": coeffs })
    }

    pub fn from_json_value(v: &Value) -> Result<Self, JetError> {
        let bad = |m: &str| JetError::Json(m.to_string());
        let order = v.get("order").and_then(Value::as_u64).ok_or_else(|| bad("missing order"))? as usize;
        let mut out = Self::zero(order);
        let list = v.get("coeffs").and_then(Value::as_array).ok_or_else(|| bad("missing coeffs"))?;
        for t in list {
            let t = t.as_array().filter(|t| t.len() == 3).ok_or_else(|| bad("term must be [i, j, c]"))?;
            let i = t[0].as_u64().ok_or_else(|| bad("bad i"))? as usize;
            let j = t[1].as_u64().ok_or_else(|| bad("bad j"))? as usize;
            if i + j > order {
                return Err(bad("monomial above order"));
            }
            let c = T::from_json(&t[2]).ok_or_else(|| bad("bad coefficient"))?;
            out.set(i, j, c);
        }
        Ok(out)
    }
}

impl<T: Coeff> Serialize for Jet2<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json_value().serialize(s)
    }
}

impl<'de, T: Coeff> Deserialize<'de> for Jet2<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        Jet2::from_json_value(&v).map_err(D::Error::custom)
    }
}

/// Jet of a self-map of (C^2, 0).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Coeff", deserialize = "T: Coeff"))]
pub struct MapJet<T> {
    pub first: Jet2<T>,
    pub second: Jet2<T>,
}

impl<T: Coeff> MapJet<T> {
    pub fn new(first: Jet2<T>, second: Jet2<T>) -> Result<Self, JetError> {
        first.check(&second)?;
        if !first.coeff(0, 0).is_zero() || !second.coeff(0, 0).is_zero() {
            return Err(JetError::NotFixingOrigin);
        }
        Ok(MapJet { first, second })
    }

    pub fn identity(order: usize) -> Self {
        MapJet { first: Jet2::var_z(order), second: Jet2::var_w(order) }
    }

    pub fn order(&self) -> usize {
        self.first.order
    }

    /// Jet of `self ∘ inner`.
    pub fn compose(&self, inner: &Self) -> Result<Self, JetError> {
        Ok(MapJet {
            first: self.first.compose(&inner.first, &inner.second)?,
            second: self.second.compose(&inner.first, &inner.second)?,
        })
    }

    pub fn is_tangent_to_identity(&self) -> bool {
        self.first.coeff(1, 0) == T::one()
            && self.first.coeff(0, 1).is_zero()
            && self.second.coeff(1, 0).is_zero()
            && self.second.coeff(0, 1) == T::one()
    }

    /// Lowest degree `k >= 2` with a nonvanishing homogeneous part.
    pub fn nonlinear_order(&self) -> Result<usize, JetError> {
        (2..=self.order())
            .find(|&d| {
                self.first.homogeneous(d).iter().chain(&self.second.homogeneous(d)).any(|c| !c.is_zero())
            })
            .ok_or(JetError::NoNonlinearPart(self.order()))
    }

    pub fn eval(&self, z: Complex64, w: Complex64) -> (Complex64, Complex64) {
        (self.first.eval(z, w), self.second.eval(z, w))
    }

    pub fn to_complex(&self) -> MapJet<Complex64> {
        MapJet { first: self.first.to_complex(), second: self.second.to_complex() }
    }
}

/// Exact germ of the chain composition up to total degree `order`.
pub fn germ_of_chain(chain: &MapChain, order: usize) -> Result<MapJet<BigRational>, JetError> {
    if order < 2 {
        return Err(JetError::OrderTooLow { min: 2, got: order });
    }
    let mut acc = MapJet::identity(order);
    for map in chain.maps() {
        acc = map.jet(order).compose(&acc)?;
    }
    Ok(acc)
}
