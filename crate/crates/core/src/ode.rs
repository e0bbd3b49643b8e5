//! Adaptive Dormand-Prince 5(4) for a complex scalar ODE along a real parameter.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("step size underflow at t = {0}")]
    StepUnderflow(f64),
    #[error("non-finite state at t = {0}")]
    NonFinite(f64),
    #[error("step budget exhausted at t = {0}")]
    Budget(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rtol: 1e-13, atol: 1e-16 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Solution {
    pub value: Complex64,
    pub steps: usize,
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth minus fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const MAX_STEPS: usize = 10_000_000;

/// Integrate `y' = f(t, y)` from `t0` to `t1`.
pub fn dopri5<F>(f: F, t0: f64, y0: Complex64, t1: f64, tol: Tolerance) -> Result<Solution, OdeError>
where
    F: Fn(f64, Complex64) -> Complex64,
{
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(Solution { value: y0, steps: 0 });
    }
    let dir = span.signum();
    let mut t = t0;
    let mut y = y0;
    let mut h = dir * (span.abs() * 1e-3).min(1.0);
    let mut k1 = f(t, y);
    let mut steps = 0;
    while (t1 - t) * dir > 0.0 {
        if steps >= MAX_STEPS {
            return Err(OdeError::Budget(t));
        }
        if (t1 - t - h) * dir < 0.0 {
            h = t1 - t;
        }
        let k2 = f(t + h / 5.0, y + k1 * (h * A21));
        let k3 = f(t + 3.0 * h / 10.0, y + (k1 * A31 + k2 * A32) * h);
        let k4 = f(t + 4.0 * h / 5.0, y + (k1 * A41 + k2 * A42 + k3 * A43) * h);
        let k5 = f(t + 8.0 * h / 9.0, y + (k1 * A51 + k2 * A52 + k3 * A53 + k4 * A54) * h);
        let k6 = f(t + h, y + (k1 * A61 + k2 * A62 + k3 * A63 + k4 * A64 + k5 * A65) * h);
        let y5 = y + (k1 * B1 + k3 * B3 + k4 * B4 + k5 * B5 + k6 * B6) * h;
        let k7 = f(t + h, y5);
        let err_vec = (k1 * E1 + k3 * E3 + k4 * E4 + k5 * E5 + k6 * E6 + k7 * E7) * h;
        let scale = tol.atol + tol.rtol * y.norm().max(y5.norm());
        let err = err_vec.norm() / scale;
        if !err.is_finite() && (!y5.re.is_finite() || !y5.im.is_finite()) {
            return Err(OdeError::NonFinite(t));
        }
        if err <= 1.0 {
            t += h;
            y = y5;
            k1 = k7;
            steps += 1;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h.abs() < 1e-14 * t.abs().max(1.0) {
            return Err(OdeError::StepUnderflow(t));
        }
    }
    Ok(Solution { value: y, steps })
}
