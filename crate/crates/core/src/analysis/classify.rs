//! Basin, curve and axis verdicts by certified entry into `D'`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fatou::{finite, FatouError, FatouMachine};
use crate::mapchain::Point;
use crate::regions::{angle_from_axis, in_d, in_u, APERTURE};

/// Relative floor of the curve tolerance, against `|z|^3`.
const CURVE_FLOOR: f64 = 1e-13;
/// Safety factor over the measured supremum of `|η|`.
const ETA_SAFETY: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Basin,
    OnCurve,
    Axis,
    Undecided,
}

impl Verdict {
    /// Grey level in the raster.
    pub fn code(self) -> u8 {
        match self {
            Verdict::Basin => 255,
            Verdict::OnCurve => 128,
            Verdict::Axis => 64,
            Verdict::Undecided => 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub verdict: Verdict,
    /// Iterate at which `D'` was entered.
    pub entry_index: Option<usize>,
    pub budget: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct Classifier<'a> {
    m: &'a FatouMachine,
    eta_bound: f64,
}

impl<'a> Classifier<'a> {
    /// Uses `10 sup |η|` measured on a grid of `D'` as the bound on `ψ - μ_0`.
    pub fn new(m: &'a FatouMachine) -> Result<Self, FatouError> {
        let r = m.params().r;
        let mut sup: f64 = 0.0;
        for &xm in &[2.05 * r, 3.0 * r, 6.0 * r, 20.0 * r] {
            for &ym in &[1.2 * r, 1.5 * r] {
                for &a in &[-0.3, 0.0, 0.3] {
                    let x = -Complex64::from_polar(xm, a);
                    let y = -Complex64::from_polar(ym, a / 2.0);
                    sup = sup.max(m.eta(x, y)?.norm());
                }
            }
        }
        Ok(Self::with_eta_bound(m, ETA_SAFETY * sup))
    }

    pub fn with_eta_bound(m: &'a FatouMachine, eta_bound: f64) -> Self {
        Classifier { m, eta_bound }
    }

    pub fn eta_bound(&self) -> f64 {
        self.eta_bound
    }

    pub fn machine(&self) -> &'a FatouMachine {
        self.m
    }

    /// `q ∈ D'`: `q ∈ D`, `y ∈ U_R`, and every `t` within the `η` bound of
    /// `μ_0(x, y)` lies in `U_{2R}` with `|y| < |t|/2`.
    pub fn in_dprime_certified(&self, q: Point) -> bool {
        let params = self.m.params();
        if !in_d(q, params, self.m.curve()) {
            return false;
        }
        let Ok((x, y)) = self.m.to_xy(q) else { return false };
        if !in_u(y, params.r) {
            return false;
        }
        let Ok(mu) = self.m.mu0(x, y) else { return false };
        let (m, b) = (mu.norm(), self.eta_bound);
        if b >= m {
            return false;
        }
        let low = m - b;
        low > 2.0 * params.r && angle_from_axis(mu) + (b / m).asin() < APERTURE && y.norm() < low / 2.0
    }

    /// Within `10` truncation bounds of the curve over the closure of `V_eps`.
    pub fn near_curve(&self, p: Point) -> bool {
        let curve = self.m.curve();
        let Ok(e) = curve.eval(p.0) else { return false };
        let tol = 10.0 * e.trunc_error_bound + CURVE_FLOOR * p.0.norm().powi(3);
        (p.1 - e.gamma).norm() <= tol
    }

    pub fn classify(&self, p: Point, budget: usize) -> Classification {
        let done = |verdict, entry_index| Classification { verdict, entry_index, budget };
        if p.0 == Complex64::new(0.0, 0.0) {
            return done(Verdict::Axis, None);
        }
        let mut q = p;
        for n in 0..=budget {
            if !finite(q) {
                break;
            }
            if self.in_dprime_certified(q) {
                return done(Verdict::Basin, Some(n));
            }
            if n < budget {
                q = self.m.chain().eval_forward(q);
            }
        }
        if self.near_curve(p) {
            done(Verdict::OnCurve, None)
        } else {
            done(Verdict::Undecided, None)
        }
    }

}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fatou::MachineConfig;
    use crate::mapchain::MapChain;
    use std::sync::OnceLock;

    fn machine() -> &'static FatouMachine {
        static M: OnceLock<FatouMachine> = OnceLock::new();
        M.get_or_init(|| FatouMachine::build(&MapChain::standard(), &MachineConfig::default()).unwrap())
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eta_bound_is_small_and_certification_agrees_with_psi() {
        let cl = Classifier::new(machine()).unwrap();
        assert!(cl.eta_bound() > 0.0 && cl.eta_bound() < 1.0, "{}", cl.eta_bound());
        let m = machine();
        // a point well inside D': the true t is in U_{2R} with room to spare
        let p = m.from_xy((c(-1000.0, 10.0), c(-150.0, 5.0)));
        assert!(cl.in_dprime_certified(p));
        let t = m.psi(p).unwrap().value;
        assert!(crate::regions::in_dprime_ty(t, m.to_xy(p).unwrap().1, m.params()));
        // |t| below 2R is rejected
        assert!(!cl.in_dprime_certified(m.from_xy((c(-150.0, 0.0), c(-110.0, 0.0)))));
    }

    #[test]
    fn verdicts() {
        let cl = Classifier::new(machine()).unwrap();
        assert_eq!(cl.classify((c(0.0, 0.0), c(0.2, 0.0)), 1000).verdict, Verdict::Axis);
        let b = cl.classify((c(-1e-3, 0.0), c(-1e-2, 0.0)), 1000);
        assert_eq!(b.verdict, Verdict::Basin);
        assert!(b.entry_index.unwrap() < 1000);
        let z = c(-1e-3, 0.0);
        let g = machine().curve().gamma_unchecked(z);
        assert_eq!(cl.classify((z, g), 10_000).verdict, Verdict::OnCurve);
        assert_eq!(cl.classify((z, g - 1e-3), 10_000).verdict, Verdict::Basin);
        // repelled or escaping points stay undecided
        assert_eq!(cl.classify((c(0.3, 0.0), c(0.3, 0.0)), 100).verdict, Verdict::Undecided);
    }

    #[test]
    fn budget_monotonicity() {
        let cl = Classifier::new(machine()).unwrap();
        for k in 0..20 {
            let p = (c(-0.002 - 0.001 * k as f64, 0.0005 * k as f64), c(-0.005, 1e-4 * k as f64));
            let a = cl.classify(p, 300);
            let b = cl.classify(p, 600);
            if a.verdict == Verdict::Basin {
                assert_eq!(b.verdict, Verdict::Basin);
                assert_eq!(a.entry_index, b.entry_index);
            }
        }
    }
}
