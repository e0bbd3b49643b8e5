//! The automorphism as a composition of shears, overshears and diagonal
//! scalings, with exact inverses and orbit tracing.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::{BigRational, Rational64};
use num_traits::Zero;

use crate::bigprec::BigCtx;
use crate::curve::CurveSeries;
use crate::ddouble::DdComplex;
use crate::jets::{Jet2, MapJet};
use crate::scalar::Scalar;

pub type Point = (Complex64, Complex64);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    /// Adds `f(other)` to the coordinate.
    Shear,
    /// Multiplies the coordinate by `exp(g(other))`.
    Overshear,
    /// Multiplies the coordinate by a constant.
    Diagonal,
}

/// Coordinate an elementary map changes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    First,
    Second,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ElementaryMap {
    pub kind: Kind,
    pub axis: Axis,
    /// Ascending polynomial coefficients, or `[scale]` for a diagonal map.
    pub data: Vec<Rational64>,
}

fn r(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

fn poly_eval<S: Scalar>(coeffs: &[Rational64], x: S) -> S {
    coeffs.iter().rev().fold(S::zero(), |acc, c| acc * x + S::from_ratio(*c.numer(), *c.denom()))
}

fn big(c: &Rational64) -> BigRational {
    BigRational::new(BigInt::from(*c.numer()), BigInt::from(*c.denom()))
}

impl ElementaryMap {
    pub fn shear(axis: Axis, f: Vec<Rational64>) -> Self {
        ElementaryMap { kind: Kind::Shear, axis, data: f }
    }

    pub fn overshear(axis: Axis, g: Vec<Rational64>) -> Self {
        ElementaryMap { kind: Kind::Overshear, axis, data: g }
    }

    pub fn diagonal(axis: Axis, scale: Rational64) -> Self {
        ElementaryMap { kind: Kind::Diagonal, axis, data: vec![scale] }
    }

    pub fn inverse(&self) -> Self {
        let data = match self.kind {
            Kind::Shear | Kind::Overshear => self.data.iter().map(|c| -c).collect(),
            Kind::Diagonal => vec![self.data[0].recip()],
        };
        ElementaryMap { kind: self.kind, axis: self.axis, data }
    }

    pub fn apply<S: Scalar>(&self, (z, w): (S, S)) -> (S, S) {
        let (moved, other) = match self.axis {
            Axis::First => (z, w),
            Axis::Second => (w, z),
        };
        let moved = match self.kind {
            Kind::Shear => moved + poly_eval(&self.data, other),
            Kind::Overshear => {
                if moved == S::zero() {
                    moved
                } else {
                    moved * poly_eval(&self.data, other).exp()
                }
            }
            Kind::Diagonal => moved * S::from_ratio(*self.data[0].numer(), *self.data[0].denom()),
        };
        match self.axis {
            Axis::First => (moved, w),
            Axis::Second => (z, moved),
        }
    }

    /// Exact jet of the map at the origin.
    pub fn jet(&self, order: usize) -> MapJet<BigRational> {
        let z = Jet2::var_z(order);
        let w = Jet2::var_w(order);
        let (moved, other) = match self.axis {
            Axis::First => (&z, &w),
            Axis::Second => (&w, &z),
        };
        let poly = || {
            self.data.iter().enumerate().fold(Jet2::zero(order), |acc, (k, c)| {
                acc.add(&other.pow(k).scale(&big(c))).expect("same order")
            })
        };
        let moved = match self.kind {
            Kind::Shear => moved.add(&poly()).expect("same order"),
            Kind::Overshear => {
                let mut g = poly();
                // the constant of g is a pure scaling
                let c0 = g.coeff(0, 0);
                assert!(c0.is_zero(), "overshear exponent must vanish at the origin");
                g.set(0, 0, BigRational::zero());
                moved.mul(&g.exp().expect("no constant term")).expect("same order")
            }
            Kind::Diagonal => moved.scale(&big(&self.data[0])),
        };
        match self.axis {
            Axis::First => MapJet { first: moved, second: w },
            Axis::Second => MapJet { first: z, second: moved },
        }
    }
}

/// Which arithmetic an orbit is iterated in.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Precision {
    #[default]
    Binary64,
    /// Double-double (about 32 digits).
    Extended,
}

/// Maps applied left to right.
#[derive(Clone, Debug, PartialEq)]
pub struct MapChain {
    maps: Vec<ElementaryMap>,
}

impl Default for MapChain {
    fn default() -> Self {
        Self::standard()
    }
}

impl MapChain {
    pub fn new(maps: Vec<ElementaryMap>) -> Self {
        MapChain { maps }
    }

    /// The ten-map chain: scale w by 2, two pairs of shear/overshear, the
    /// cubic correction shears, two overshears of w, and the scaling back.
    pub fn standard() -> Self {
        use Axis::*;
        MapChain::new(vec![
            ElementaryMap::diagonal(Second, r(2, 1)),
            ElementaryMap::shear(Second, vec![r(0, 1), r(1, 1)]),
            ElementaryMap::overshear(First, vec![r(0, 1), r(1, 1)]),
            ElementaryMap::shear(Second, vec![r(0, 1), r(-1, 1)]),
            ElementaryMap::overshear(First, vec![r(0, 1), r(-1, 1)]),
            ElementaryMap::shear(Second, vec![r(0, 1), r(0, 1), r(1, 1)]),
            ElementaryMap::shear(Second, vec![r(0, 1), r(0, 1), r(0, 1), r(-3, 2)]),
            ElementaryMap::overshear(Second, vec![r(0, 1), r(1, 1)]),
            ElementaryMap::overshear(Second, vec![r(0, 1), r(0, 1), r(1, 2)]),
            ElementaryMap::diagonal(Second, r(1, 2)),
        ])
    }

    pub fn maps(&self) -> &[ElementaryMap] {
        &self.maps
    }

    pub fn inverse(&self) -> Self {
        MapChain { maps: self.maps.iter().rev().map(ElementaryMap::inverse).collect() }
    }

    pub fn apply<S: Scalar>(&self, p: (S, S)) -> (S, S) {
        self.maps.iter().fold(p, |acc, m| m.apply(acc))
    }

    pub fn apply_inverse<S: Scalar>(&self, p: (S, S)) -> (S, S) {
        self.maps.iter().rev().fold(p, |acc, m| m.inverse().apply(acc))
    }

    pub fn eval_forward(&self, p: Point) -> Point {
        self.apply(p)
    }

    pub fn eval_inverse(&self, p: Point) -> Point {
        self.apply_inverse(p)
    }

    /// `F^{-1}(F(p))`. Runs in double-double arithmetic when every
    /// intermediate stays inside the binary64 exponent range, and with wide
    /// exponent arbitrary precision otherwise, where exponential factors are
    /// carried as logarithms.
    pub fn round_trip(&self, p: Point) -> Point {
        let dd = (DdComplex::from_c64(p.0), DdComplex::from_c64(p.1));
        let forward = self.apply_in_range(self.maps.iter().cloned(), dd);
        if let Some(q) = forward {
            if let Some(back) = self.apply_in_range(self.maps.iter().rev().map(ElementaryMap::inverse), q) {
                return (back.0.to_c64(), back.1.to_c64());
            }
        }
        BigCtx::new(256).round_trip(self, p)
    }

    fn apply_in_range<S: Scalar>(&self, maps: impl Iterator<Item = ElementaryMap>, mut p: (S, S)) -> Option<(S, S)> {
        let ok = |x: S| {
            let m = x.to_c64().norm();
            m == 0.0 || (m > 1e-280 && m < 1e280)
        };
        for m in maps {
            let q = m.apply(p);
            let vanished = |a: S, b: S| b == S::zero() && a != S::zero();
            if !ok(q.0) || !ok(q.1) || vanished(p.0, q.0) || vanished(p.1, q.1) {
                return None;
            }
            p = q;
        }
        Some(p)
    }

    pub fn eval_forward_extended(&self, p: Point) -> Point {
        let (z, w) = self.apply((DdComplex::from_c64(p.0), DdComplex::from_c64(p.1)));
        (z.to_c64(), w.to_c64())
    }

    pub fn orbit(&self, seed: Point, n: usize, curve: Option<&CurveSeries>, precision: Precision) -> OrbitTrace {
        match precision {
            Precision::Binary64 => orbit_in::<Complex64>(self, seed, n, curve),
            Precision::Extended => orbit_in::<DdComplex>(self, seed, n, curve),
        }
    }
}

/// Closed-form first and second coordinates of the standard chain.
pub fn closed_form<S: Scalar>((z, w): (S, S)) -> (S, S) {
    let two = S::from_ratio(2, 1);
    let half = S::from_ratio(1, 2);
    let e = (two * w + z).exp();
    let ze = z * e;
    let first = z * ze.exp();
    let a = ze.exp();
    let b = (two * ze).exp();
    let c = (S::from_ratio(3, 1) * ze).exp();
    let z2 = z * z;
    let bracket = w + half * z - half * z * e + half * z2 * b - S::from_ratio(3, 4) * z2 * z * c;
    let second = bracket * (z * a + half * z2 * b).exp();
    (first, second)
}

fn orbit_in<S: Scalar>(chain: &MapChain, seed: Point, n: usize, curve: Option<&CurveSeries>) -> OrbitTrace {
    let mut points = Vec::with_capacity(n + 1);
    points.push(seed);
    let mut p = (S::from_c64(seed.0), S::from_c64(seed.1));
    let mut truncated = false;
    for _ in 0..n {
        p = chain.apply(p);
        if !(p.0.is_finite() && p.1.is_finite()) {
            truncated = true;
            break;
        }
        points.push((p.0.to_c64(), p.1.to_c64()));
    }
    let u = curve.map(|c| points.iter().map(|&(z, w)| w - c.gamma_unchecked(z)).collect());
    OrbitTrace { seed, points, u, truncated }
}

#[derive(Clone, Debug)]
pub struct OrbitTrace {
    pub seed: Point,
    pub points: Vec<Point>,
    /// `w_n - γ(z_n)` when a curve was attached.
    pub u: Option<Vec<Complex64>>,
    /// Set when a non-finite value stopped the iteration early.
    pub truncated: bool,
}

impl OrbitTrace {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,re_z,im_z,re_w,im_w,re_u,im_u\n");
        for (n, (z, w)) in self.points.iter().enumerate() {
            let _ = write!(s, "{n},{:e},{:e},{:e},{:e},", z.re, z.im, w.re, w.im);
            match &self.u {
                Some(u) => {
                    let _ = writeln!(s, "{:e},{:e}", u[n].re, u[n].im);
                }
                None => s.push_str(",\n"),
            }
        }
        s
    }
}
