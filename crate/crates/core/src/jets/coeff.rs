use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

/// Coefficient field of a jet: exact rationals or binary64 complex numbers.
pub trait Coeff:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    const EXACT: bool;

    fn from_ratio(num: i64, den: i64) -> Self;
    fn from_rational(r: &BigRational) -> Self;
    fn inverse(&self) -> Option<Self>;
    fn to_c64(&self) -> Complex64;
    fn to_rational(&self) -> Option<BigRational>;
    fn to_json(&self) -> Value;
    fn from_json(v: &Value) -> Option<Self>;

    /// Roots of `poly` (ascending coefficients) with multiplicities.
    fn roots(poly: &[Self]) -> Vec<Root<Self>>;
}

/// A polynomial root: a floating approximation plus the value in the
/// coefficient field when the root lies in it.
#[derive(Clone, Debug)]
pub struct Root<T> {
    pub approx: Complex64,
    pub exact: Option<T>,
    pub multiplicity: usize,
}

impl Coeff for BigRational {
    const EXACT: bool = true;

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
    fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.recip())
        }
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(rational_to_f64(self), 0.0)
    }
    fn to_rational(&self) -> Option<BigRational> {
        Some(self.clone())
    }
    fn to_json(&self) -> Value {
        json!(format!("{}/{}", self.numer(), self.denom()))
    }
    fn from_json(v: &Value) -> Option<Self> {
        parse_rational(v.as_str()?)
    }
    fn roots(poly: &[Self]) -> Vec<Root<Self>> {
        rational_roots(poly)
    }
}

impl Coeff for Complex64 {
    const EXACT: bool = false;

    fn from_ratio(num: i64, den: i64) -> Self {
        Complex64::new(num as f64 / den as f64, 0.0)
    }
    fn from_rational(r: &BigRational) -> Self {
        Complex64::new(rational_to_f64(r), 0.0)
    }
    fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.inv())
        }
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
    fn to_rational(&self) -> Option<BigRational> {
        None
    }
    fn to_json(&self) -> Value {
        json!([self.re, self.im])
    }
    fn from_json(v: &Value) -> Option<Self> {
        let a = v.as_array()?;
        if a.len() != 2 {
            return None;
        }
        Some(Complex64::new(a[0].as_f64()?, a[1].as_f64()?))
    }
    fn roots(poly: &[Self]) -> Vec<Root<Self>> {
        cluster(complex_roots(poly))
            .into_iter()
            .map(|(z, m)| Root { approx: z, exact: Some(z), multiplicity: m })
            .collect()
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            // scale down huge operands before dividing
            let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000);
            let n = (r.numer() >> shift as usize).to_f64().unwrap_or(f64::NAN);
            let d = (r.denom() >> shift as usize).to_f64().unwrap_or(f64::NAN);
            n / d
        }
    }
}

pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(BigRational::new(n.trim().parse().ok()?, d))
        }
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}

fn trim<T: Zero>(p: &mut Vec<T>) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

fn eval_rational(p: &[BigRational], x: &BigRational) -> BigRational {
    p.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
}

/// Divide by (u - x), assuming x is a root.
fn deflate(p: &[BigRational], x: &BigRational) -> Vec<BigRational> {
    let n = p.len() - 1;
    let mut q = vec![BigRational::zero(); n];
    let mut carry = BigRational::zero();
    for k in (1..=n).rev() {
        carry = carry * x + &p[k];
        q[k - 1] = carry.clone();
    }
    q
}

fn divisors(n: &BigInt) -> Option<Vec<BigInt>> {
    let n = n.abs().to_u64()?;
    if n > 1_000_000_000_000 {
        return None;
    }
    let mut out = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(BigInt::from(d));
            if d * d != n {
                out.push(BigInt::from(n / d));
            }
        }
        d += 1;
    }
    Some(out)
}

/// Exact rational roots by the rational root test; the irreducible
/// remainder is solved numerically.
fn rational_roots(poly: &[BigRational]) -> Vec<Root<BigRational>> {
    let mut p = poly.to_vec();
    trim(&mut p);
    let mut out = Vec::new();
    if p.len() <= 1 {
        return out;
    }
    let zero_mult = p.iter().take_while(|c| c.is_zero()).count();
    if zero_mult > 0 {
        out.push(Root {
            approx: Complex64::new(0.0, 0.0),
            exact: Some(BigRational::zero()),
            multiplicity: zero_mult,
        });
        p.drain(..zero_mult);
    }
    // integer coefficients
    let lcm = p.iter().fold(BigInt::one(), |acc, c| num_integer::Integer::lcm(&acc, c.denom()));
    let ints: Vec<BigInt> = p.iter().map(|c| (c * &lcm).to_integer()).collect();
    if let (Some(ps), Some(qs)) = (divisors(&ints[0]), divisors(ints.last().unwrap())) {
        let mut cands: Vec<BigRational> = Vec::new();
        for a in &ps {
            for b in &qs {
                for s in [BigRational::new(a.clone(), b.clone()), -BigRational::new(a.clone(), b.clone())] {
                    if !cands.contains(&s) {
                        cands.push(s);
                    }
                }
            }
        }
        cands.sort();
        for x in cands {
            let mut m = 0;
            while p.len() > 1 && eval_rational(&p, &x).is_zero() {
                p = deflate(&p, &x);
                m += 1;
            }
            if m > 0 {
                out.push(Root { approx: x.to_c64(), exact: Some(x), multiplicity: m });
            }
        }
    }
    if p.len() > 1 {
        let cp: Vec<Complex64> = p.iter().map(|c| c.to_c64()).collect();
        for (z, m) in cluster(complex_roots(&cp)) {
            out.push(Root { approx: z, exact: None, multiplicity: m });
        }
    }
    out
}

/// All roots of a complex polynomial by Aberth-Ehrlich iteration.
pub fn complex_roots(poly: &[Complex64]) -> Vec<Complex64> {
    let mut p = poly.to_vec();
    while p.last().is_some_and(|c| c.norm() == 0.0) {
        p.pop();
    }
    let n = p.len().saturating_sub(1);
    if n == 0 {
        return Vec::new();
    }
    let lead = p[n];
    let p: Vec<Complex64> = p.iter().map(|c| c / lead).collect();
    let bound = 1.0 + p[..n].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(0.5 * bound, 0.4 + 2.0 * std::f64::consts::PI * k as f64 / n as f64))
        .collect();
    let dp: Vec<Complex64> = (1..=n).map(|k| p[k] * k as f64).collect();
    let horner = |c: &[Complex64], x: Complex64| c.iter().rev().fold(Complex64::zero(), |a, &b| a * x + b);
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let f = horner(&p, z[i]);
            if f.norm() == 0.0 {
                continue;
            }
            let ratio = f / horner(&dp, z[i]);
            let s: Complex64 = (0..n).filter(|&j| j != i).map(|j| (z[i] - z[j]).inv()).sum();
            let step = ratio / (Complex64::one() - ratio * s);
            if step.is_finite() {
                z[i] -= step;
                moved = moved.max(step.norm() / z[i].norm().max(1.0));
            }
        }
        if moved < 1e-16 {
            break;
        }
    }
    z
}

/// Merge numerically coincident roots into one root with multiplicity.
fn cluster(roots: Vec<Complex64>) -> Vec<(Complex64, usize)> {
    let mut groups: Vec<(Complex64, usize)> = Vec::new();
    for z in roots {
        match groups.iter_mut().find(|(c, m)| (*c / *m as f64 - z).norm() < 1e-5 * z.norm().max(1.0)) {
            Some(g) => {
                g.0 += z;
                g.1 += 1;
            }
            None => groups.push((z, 1)),
        }
    }
    groups.into_iter().map(|(s, m)| (s / m as f64, m)).collect()
}
