//! Arbitrary-precision complex arithmetic with a wide exponent range, for
//! evaluations whose intermediates leave the binary64 range.

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use num_complex::Complex64;
use num_rational::{BigRational, Rational64};

use crate::mapchain::{Axis, ElementaryMap, Kind, MapChain};

#[derive(Clone, Debug)]
pub struct BigComplex {
    pub re: BigFloat,
    pub im: BigFloat,
}

pub struct BigCtx {
    p: usize,
    rm: RoundingMode,
    cc: Consts,
}

impl BigCtx {
    pub fn new(bits: usize) -> Self {
        BigCtx { p: bits, rm: RoundingMode::ToEven, cc: Consts::new().expect("constants cache") }
    }

    pub fn bits(&self) -> usize {
        self.p
    }

    pub fn real(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, self.p)
    }

    pub fn complex(&self, z: Complex64) -> BigComplex {
        BigComplex { re: self.real(z.re), im: self.real(z.im) }
    }

    pub fn from_real(&self, re: BigFloat) -> BigComplex {
        BigComplex { re, im: self.real(0.0) }
    }

    pub fn rational(&mut self, c: &BigRational) -> BigFloat {
        let n = BigFloat::parse(&c.numer().to_string(), Radix::Dec, self.p, self.rm, &mut self.cc);
        let d = BigFloat::parse(&c.denom().to_string(), Radix::Dec, self.p, self.rm, &mut self.cc);
        n.div(&d, self.p, self.rm)
    }

    pub fn ratio(&self, c: Rational64) -> BigFloat {
        self.real(*c.numer() as f64).div(&self.real(*c.denom() as f64), self.p, self.rm)
    }

    pub fn to_f64(&mut self, x: &BigFloat) -> f64 {
        if x.is_zero() {
            return 0.0;
        }
        let s = x.format(Radix::Dec, self.rm, &mut self.cc).unwrap_or_default();
        s.parse::<f64>().unwrap_or(f64::NAN)
    }

    pub fn to_c64(&mut self, z: &BigComplex) -> Complex64 {
        Complex64::new(self.to_f64(&z.re), self.to_f64(&z.im))
    }

    pub fn add(&self, a: &BigComplex, b: &BigComplex) -> BigComplex {
        BigComplex { re: a.re.add(&b.re, self.p, self.rm), im: a.im.add(&b.im, self.p, self.rm) }
    }

    pub fn sub(&self, a: &BigComplex, b: &BigComplex) -> BigComplex {
        BigComplex { re: a.re.sub(&b.re, self.p, self.rm), im: a.im.sub(&b.im, self.p, self.rm) }
    }

    pub fn mul(&self, a: &BigComplex, b: &BigComplex) -> BigComplex {
        let (p, rm) = (self.p, self.rm);
        let re = a.re.mul(&b.re, p, rm).sub(&a.im.mul(&b.im, p, rm), p, rm);
        let im = a.re.mul(&b.im, p, rm).add(&a.im.mul(&b.re, p, rm), p, rm);
        BigComplex { re, im }
    }

    pub fn scale(&self, a: &BigComplex, s: &BigFloat) -> BigComplex {
        BigComplex { re: a.re.mul(s, self.p, self.rm), im: a.im.mul(s, self.p, self.rm) }
    }

    pub fn exp(&mut self, a: &BigComplex) -> BigComplex {
        let m = a.re.exp(self.p, self.rm, &mut self.cc);
        if a.im.is_zero() {
            return BigComplex { re: m, im: self.real(0.0) };
        }
        let c = a.im.cos(self.p, self.rm, &mut self.cc);
        let s = a.im.sin(self.p, self.rm, &mut self.cc);
        BigComplex { re: m.mul(&c, self.p, self.rm), im: m.mul(&s, self.p, self.rm) }
    }

    /// Horner evaluation of a polynomial with small rational coefficients.
    pub fn poly(&self, coeffs: &[Rational64], x: &BigComplex) -> BigComplex {
        let mut acc = self.complex(Complex64::new(0.0, 0.0));
        for c in coeffs.iter().rev() {
            acc = self.mul(&acc, x);
            acc.re = acc.re.add(&self.ratio(*c), self.p, self.rm);
        }
        acc
    }

    pub fn apply_map(&mut self, m: &ElementaryMap, z: BigComplex, w: BigComplex) -> (BigComplex, BigComplex) {
        let (moved, other) = match m.axis {
            Axis::First => (&z, &w),
            Axis::Second => (&w, &z),
        };
        let new = match m.kind {
            Kind::Shear => self.add(moved, &self.poly(&m.data, other)),
            Kind::Overshear => {
                let g = self.poly(&m.data, other);
                let e = self.exp(&g);
                self.mul(moved, &e)
            }
            Kind::Diagonal => self.scale(moved, &self.ratio(m.data[0])),
        };
        match m.axis {
            Axis::First => (new, w),
            Axis::Second => (z, new),
        }
    }

    pub fn apply_chain(&mut self, chain: &MapChain, z: BigComplex, w: BigComplex) -> (BigComplex, BigComplex) {
        chain.maps().iter().fold((z, w), |(z, w), m| self.apply_map(m, z, w))
    }

    /// Collapse `m e^l` to a plain number when that is representable.
    /// Values far below the range are flushed to zero; far above they stay
    /// unchanged, so later sums are absorbed.
    fn settle(&mut self, x: &Scaled) -> Result<BigComplex, ()> {
        if x.l.re.is_zero() && x.l.im.is_zero() {
            return Ok(x.m.clone());
        }
        let lr = self.to_f64(&x.l.re);
        if lr > SETTLE_LIMIT {
            return Err(());
        }
        if lr < -SETTLE_LIMIT {
            return Ok(self.complex(Complex64::new(0.0, 0.0)));
        }
        let e = self.exp(&x.l);
        Ok(self.mul(&x.m, &e))
    }

    fn apply_scaled(&mut self, m: &ElementaryMap, z: Scaled, w: Scaled) -> Result<(Scaled, Scaled), ()> {
        let (moved, other) = match m.axis {
            Axis::First => (z, w),
            Axis::Second => (w, z),
        };
        let moved = match m.kind {
            Kind::Shear => {
                let o = self.settle(&other)?;
                let f = self.poly(&m.data, &o);
                match self.settle(&moved) {
                    Ok(v) => Scaled::plain(self.add(&v, &f), self),
                    Err(()) => moved,
                }
            }
            Kind::Overshear => {
                let o = self.settle(&other)?;
                let g = self.poly(&m.data, &o);
                Scaled { m: moved.m, l: self.add(&moved.l, &g) }
            }
            Kind::Diagonal => Scaled { m: self.scale(&moved.m, &self.ratio(m.data[0])), l: moved.l },
        };
        Ok(match m.axis {
            Axis::First => (moved, other),
            Axis::Second => (other, moved),
        })
    }

    /// `F^{-1}(F(p))` with every coordinate held as `m e^l`, so the products
    /// of exponentials that overflow any float format cancel exactly.
    pub fn round_trip(&mut self, chain: &MapChain, p: (Complex64, Complex64)) -> (Complex64, Complex64) {
        let nan = (Complex64::new(f64::NAN, f64::NAN), Complex64::new(f64::NAN, f64::NAN));
        let mut q = (Scaled::plain(self.complex(p.0), self), Scaled::plain(self.complex(p.1), self));
        let inverse = chain.inverse();
        for m in chain.maps().iter().chain(inverse.maps()) {
            match self.apply_scaled(m, q.0, q.1) {
                Ok(r) => q = r,
                Err(()) => return nan,
            }
        }
        match (self.settle(&q.0), self.settle(&q.1)) {
            (Ok(z), Ok(w)) => (self.to_c64(&z), self.to_c64(&w)),
            _ => nan,
        }
    }
}

/// Real part of a log-scale beyond which `e^l` is not formed.
const SETTLE_LIMIT: f64 = 1e8;

/// `m e^l`.
#[derive(Clone, Debug)]
struct Scaled {
    m: BigComplex,
    l: BigComplex,
}

impl Scaled {
    fn plain(m: BigComplex, ctx: &BigCtx) -> Self {
        Scaled { m, l: ctx.complex(Complex64::new(0.0, 0.0)) }
    }
}
