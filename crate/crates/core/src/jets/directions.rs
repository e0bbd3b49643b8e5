//! Characteristic directions `P_k(v) = λ v` and the director of a
//! non-degenerate direction.

use num_complex::Complex64;
use num_traits::Zero;

use super::{Coeff, JetError, MapJet};

/// Direction and eigen-factor expressed in the coefficient field.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldDirection<T> {
    pub direction: [T; 2],
    pub lambda: T,
}

#[derive(Clone, Debug)]
pub struct CharacteristicDirection<T> {
    /// `[v1 : v2]` with the larger-modulus entry equal to 1.
    pub direction: [Complex64; 2],
    pub lambda: Complex64,
    pub degenerate: bool,
    pub multiplicity: usize,
    /// Present when the direction lies in the coefficient field (always for
    /// complex jets; for rational jets when the root is rational).
    pub exact: Option<FieldDirection<T>>,
    /// Lowest nonlinear degree the direction was computed from.
    pub degree: usize,
}

impl<T: Coeff> CharacteristicDirection<T> {
    /// True for `[0:1]`, the point outside the chart `[1:u]`.
    pub fn at_infinity(&self) -> bool {
        self.direction[0].norm() == 0.0
    }

    /// Chart coordinate `u` with `[1:u]` proportional to the direction.
    fn chart(&self) -> Option<(Complex64, Option<T>)> {
        if self.at_infinity() {
            return None;
        }
        let approx = self.direction[1] / self.direction[0];
        let exact = self
            .exact
            .as_ref()
            .and_then(|e| e.direction[0].inverse().map(|inv| e.direction[1].clone() * inv));
        Some((approx, exact))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Director<T> {
    pub value: Complex64,
    pub exact: Option<T>,
}

fn horner<T: Coeff>(p: &[T], x: &T) -> T {
    p.iter().rev().fold(T::zero(), |acc, c| acc * x.clone() + c.clone())
}

fn horner_c(p: &[Complex64], x: Complex64) -> Complex64 {
    p.iter().rev().fold(Complex64::zero(), |acc, c| acc * x + c)
}

fn derivative<T: Coeff>(p: &[T]) -> Vec<T> {
    p.iter().enumerate().skip(1).map(|(k, c)| c.clone() * T::from_ratio(k as i64, 1)).collect()
}

/// Pieces of `r(u) = Q_k(1,u) - u P_k(1,u)` for the map's lowest nonlinear part.
struct Chart<T> {
    k: usize,
    p1: Vec<T>,
    r: Vec<T>,
}

fn chart_polys<T: Coeff>(m: &MapJet<T>) -> Result<Chart<T>, JetError> {
    let k = m.nonlinear_order()?;
    // homogeneous(k)[j] is the coefficient of z^{k-j} w^j, so P(1,u) = sum_j c_j u^j
    let p1 = m.first.homogeneous(k);
    let q1 = m.second.homogeneous(k);
    let mut r = vec![T::zero(); k + 2];
    for j in 0..=k {
        r[j] = r[j].clone() + q1[j].clone();
        r[j + 1] = r[j + 1].clone() - p1[j].clone();
    }
    Ok(Chart { k, p1, r })
}

/// All characteristic directions of a map tangent to the identity.
pub fn characteristic_directions<T: Coeff>(m: &MapJet<T>) -> Result<Vec<CharacteristicDirection<T>>, JetError> {
    if !m.is_tangent_to_identity() {
        return Err(JetError::NotTangent);
    }
    let Chart { k, p1, r } = chart_polys(m)?;
    if r.iter().all(|c| c.is_zero()) {
        return Err(JetError::Dicritical);
    }
    let p1c: Vec<Complex64> = p1.iter().map(|c| c.to_c64()).collect();
    let mut out = Vec::new();
    for root in T::roots(&r) {
        let u = root.approx;
        let lambda = horner_c(&p1c, u);
        let exact = root.exact.as_ref().map(|ue| FieldDirection {
            direction: [T::one(), ue.clone()],
            lambda: horner(&p1, ue),
        });
        let degenerate = match &exact {
            Some(e) if T::EXACT => e.lambda.is_zero(),
            _ => lambda.norm() < 1e-12,
        };
        let mut dir = CharacteristicDirection {
            direction: [Complex64::new(1.0, 0.0), u],
            lambda,
            degenerate,
            multiplicity: root.multiplicity,
            exact,
            degree: k,
        };
        if u.norm() > 1.0 {
            // rescale by 1/u: lambda picks up u^{-(k-1)}
            let inv = u.inv();
            dir.direction = [inv, Complex64::new(1.0, 0.0)];
            dir.lambda = lambda * inv.powu(k as u32 - 1);
            if let Some(e) = dir.exact.as_mut() {
                if let Some(ui) = e.direction[1].inverse() {
                    let mut scale = T::one();
                    for _ in 0..k - 1 {
                        scale = scale * ui.clone();
                    }
                    e.lambda = e.lambda.clone() * scale;
                    e.direction = [ui, T::one()];
                }
            }
        }
        out.push(dir);
    }
    // [0:1] is characteristic iff the first component of P_k(0,1) vanishes
    let p01 = m.first.coeff(0, k);
    if p01.is_zero() {
        let lambda = m.second.coeff(0, k);
        let degenerate = if T::EXACT { lambda.is_zero() } else { lambda.to_c64().norm() < 1e-12 };
        out.push(CharacteristicDirection {
            direction: [Complex64::zero(), Complex64::new(1.0, 0.0)],
            lambda: lambda.to_c64(),
            degenerate,
            // drop in the degree of r counts how often [0:1] is hit
            multiplicity: (k + 1) - r.iter().rposition(|c| !c.is_zero()).unwrap_or(0),
            exact: Some(FieldDirection { direction: [T::zero(), T::one()], lambda }),
            degree: k,
        });
    }
    Ok(out)
}

/// Director `A(v) = r'(u0) / P_k(1, u0)` in the chart `[1:u]`.
pub fn director<T: Coeff>(m: &MapJet<T>, d: &CharacteristicDirection<T>) -> Result<Director<T>, JetError> {
    if d.degenerate {
        return Err(JetError::Degenerate);
    }
    let (u, ue) = d.chart().ok_or(JetError::ChartAtInfinity)?;
    let Chart { p1, r, .. } = chart_polys(m)?;
    let dr = derivative(&r);
    let to_c = |p: &[T]| p.iter().map(|c| c.to_c64()).collect::<Vec<_>>();
    let value = horner_c(&to_c(&dr), u) / horner_c(&to_c(&p1), u);
    let exact = ue.and_then(|ue| horner(&p1, &ue).inverse().map(|inv| horner(&dr, &ue) * inv));
    Ok(Director { value, exact })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::{Jet2, RationalJet};
    use num_rational::BigRational;

    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        Q::from_ratio(n, d)
    }

    /// Identity plus the given quadratic parts (coefficients of z^2, zw, w^2).
    fn quadratic(p: [Q; 3], qq: [Q; 3], order: usize) -> MapJet<Q> {
        let mut f: RationalJet = Jet2::var_z(order);
        let mut s: RationalJet = Jet2::var_w(order);
        for (k, (a, b)) in p.into_iter().zip(qq).enumerate() {
            f.set(2 - k, k, a);
            s.set(2 - k, k, b);
        }
        MapJet::new(f, s).unwrap()
    }

    fn check_eigen(m: &MapJet<Q>, d: &CharacteristicDirection<Q>) {
        let e = d.exact.as_ref().unwrap();
        let k = d.degree;
        let ev = |j: &RationalJet| {
            j.homogeneous(k)
                .iter()
                .enumerate()
                .map(|(jw, c)| {
                    let mut t = c.clone();
                    for _ in 0..(k - jw) {
                        t *= e.direction[0].clone();
                    }
                    for _ in 0..jw {
                        t *= e.direction[1].clone();
                    }
                    t
                })
                .fold(q(0, 1), |a, b| a + b)
        };
        assert_eq!(ev(&m.first), e.lambda.clone() * e.direction[0].clone());
        assert_eq!(ev(&m.second), e.lambda.clone() * e.direction[1].clone());
    }

    #[test]
    fn z_squared_only() {
        let m = quadratic([q(1, 1), q(0, 1), q(0, 1)], [q(0, 1), q(0, 1), q(0, 1)], 3);
        let dirs = characteristic_directions(&m).unwrap();
        assert_eq!(dirs.len(), 2);
        let horiz = dirs.iter().find(|d| !d.at_infinity()).unwrap();
        assert_eq!(horiz.exact.as_ref().unwrap().direction, [q(1, 1), q(0, 1)]);
        assert_eq!(horiz.exact.as_ref().unwrap().lambda, q(1, 1));
        assert!(!horiz.degenerate);
        let vert = dirs.iter().find(|d| d.at_infinity()).unwrap();
        assert!(vert.degenerate);
        for d in &dirs {
            check_eigen(&m, d);
        }
    }

    #[test]
    fn both_squares_give_three_directions() {
        let m = quadratic([q(1, 1), q(0, 1), q(0, 1)], [q(0, 1), q(0, 1), q(1, 1)], 3);
        let dirs = characteristic_directions(&m).unwrap();
        assert_eq!(dirs.len(), 3);
        for d in &dirs {
            assert_eq!(d.exact.as_ref().unwrap().lambda, q(1, 1));
            assert!(!d.degenerate);
            check_eigen(&m, d);
        }
        assert!(dirs.iter().any(|d| d.exact.as_ref().unwrap().direction == [q(1, 1), q(1, 1)]));
    }

    #[test]
    fn cubic_part_used_when_quadratic_vanishes() {
        let mut f: RationalJet = Jet2::var_z(4);
        f.set(3, 0, q(1, 1));
        let m = MapJet::new(f, Jet2::var_w(4)).unwrap();
        let dirs = characteristic_directions(&m).unwrap();
        assert!(dirs.iter().all(|d| d.degree == 3));
        assert!(dirs.iter().any(|d| !d.at_infinity() && !d.degenerate));
    }

    #[test]
    fn identity_has_no_nonlinear_part() {
        let m = MapJet::<Q>::identity(4);
        assert_eq!(characteristic_directions(&m).unwrap_err(), JetError::NoNonlinearPart(4));
    }

    #[test]
    fn director_of_zw_family() {
        for a in [-3i64, 0, 2, 5] {
            let m = quadratic([q(1, 1), q(0, 1), q(0, 1)], [q(0, 1), q(a, 1), q(0, 1)], 3);
            let dirs = characteristic_directions(&m).unwrap();
            let d = dirs.iter().find(|d| !d.at_infinity()).unwrap();
            assert_eq!(director(&m, d).unwrap().exact, Some(q(a - 1, 1)));
        }
    }

    #[test]
    fn director_errors() {
        // z^2 + z w: every direction is characteristic
        let m = quadratic([q(1, 1), q(0, 1), q(0, 1)], [q(0, 1), q(1, 1), q(0, 1)], 3);
        assert_eq!(characteristic_directions(&m).unwrap_err(), JetError::Dicritical);
        let m = quadratic([q(1, 1), q(0, 1), q(0, 1)], [q(0, 1), q(0, 1), q(0, 1)], 3);
        let dirs = characteristic_directions(&m).unwrap();
        let vert = dirs.iter().find(|d| d.at_infinity()).unwrap();
        assert_eq!(director(&m, vert).unwrap_err(), JetError::Degenerate);
        let m2 = quadratic([q(1, 1), q(0, 1), q(0, 1)], [q(0, 1), q(0, 1), q(1, 1)], 3);
        let dirs = characteristic_directions(&m2).unwrap();
        let vert = dirs.iter().find(|d| d.at_infinity()).unwrap();
        assert_eq!(director(&m2, vert).unwrap_err(), JetError::ChartAtInfinity);
    }

    #[test]
    fn complex_mode_matches_rational() {
        let m = quadratic([q(1, 1), q(0, 1), q(0, 1)], [q(0, 1), q(0, 1), q(1, 1)], 3);
        let c = m.to_complex();
        let dirs = characteristic_directions(&c).unwrap();
        assert_eq!(dirs.len(), 3);
        for d in &dirs {
            assert!((d.lambda - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }
}
