//! Adaptive Dormand-Prince 5(4) integration for small autonomous systems.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("step size underflow at x = {x}")]
    StepUnderflow { x: f64 },
    #[error("non-finite state at x = {x}")]
    NonFinite { x: f64 },
}

// Butcher tableau (the system is autonomous, so the nodes c_i are not needed).
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
// Fifth minus fourth order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrator for `y' = f(y)` with `D`-dimensional state.
pub struct Dopri5<F, const D: usize> {
    rhs: F,
    pub atol: f64,
    pub rtol: f64,
    pub h_min: f64,
    pub h_max: f64,
}

pub struct StepResult<const D: usize> {
    pub y: [f64; D],
    pub err: f64,
}

impl<F, const D: usize> Dopri5<F, D>
where
    F: Fn(&[f64; D]) -> [f64; D],
{
    pub fn new(rhs: F, tol: f64) -> Self {
        Self { rhs, atol: tol, rtol: tol, h_min: 1e-14, h_max: f64::INFINITY }
    }

    /// One trial step of size `h` from `y`; `err` is the scaled error norm.
    pub fn trial_step(&self, y: &[f64; D], h: f64) -> StepResult<D> {
        let f = &self.rhs;
        let stage = |coef: &[(f64, &[f64; D])]| {
            let mut out = *y;
            for (c, k) in coef {
                for i in 0..D {
                    out[i] += h * c * k[i];
                }
            }
            out
        };
        let k1 = f(y);
        let k2 = f(&stage(&[(A21, &k1)]));
        let k3 = f(&stage(&[(A31, &k1), (A32, &k2)]));
        let k4 = f(&stage(&[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(&stage(&[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = f(&stage(&[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
        let y_new = stage(&[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = f(&y_new);
        let mut sq = 0.0;
        for i in 0..D {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
            sq += (e / sc).powi(2);
        }
        StepResult { y: y_new, err: (sq / D as f64).sqrt() }
    }

    /// Take one accepted adaptive step of at most `h_limit`, starting with
    /// trial size `h`. Returns the step actually taken, the new state and the
    /// suggested next step size.
    pub fn adaptive_step(
        &self,
        x: f64,
        y: &[f64; D],
        mut h: f64,
        h_limit: f64,
    ) -> Result<(f64, [f64; D], f64), OdeError> {
        h = h.min(h_limit).min(self.h_max);
        loop {
            if h < self.h_min {
                return Err(OdeError::StepUnderflow { x });
            }
            let r = self.trial_step(y, h);
            if !r.err.is_finite() || r.y.iter().any(|v| !v.is_finite()) {
                h *= 0.25;
                continue;
            }
            if r.err <= 1.0 {
                let grow = if r.err == 0.0 { 5.0 } else { (0.9 * r.err.powf(-0.2)).clamp(0.2, 5.0) };
                return Ok((h, r.y, h * grow));
            }
            h *= (0.9 * r.err.powf(-0.2)).clamp(0.1, 0.9);
        }
    }

    /// Integrate from `x0` to `x1` (> `x0`).
    pub fn integrate(&self, x0: f64, y0: [f64; D], x1: f64, h0: f64) -> Result<([f64; D], f64), OdeError> {
        let mut x = x0;
        let mut y = y0;
        let mut h = h0;
        while x1 - x > 1e-15 * x1.abs().max(1.0) {
            let (taken, y_new, next) = self.adaptive_step(x, &y, h, x1 - x)?;
            if y_new.iter().any(|v| !v.is_finite()) {
                return Err(OdeError::NonFinite { x });
            }
            x += taken;
            y = y_new;
            h = next;
        }
        Ok((y, h))
    }
}
