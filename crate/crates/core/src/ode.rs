//! Dormand–Prince 5(4) with embedded error control.
//!
//! The stepper keeps its state between calls so a trajectory can be
//! advanced to a sequence of output abscissae without restarting the step
//! size. A right-hand side may refuse a trial point by returning `Err`;
//! the step is then rejected and retried with a smaller step.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
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
// 5th-order minus embedded 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rtol: 1e-11,
            atol: 1e-14,
            max_steps: 200_000,
        }
    }
}

/// What the observer wants after an accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Stop,
}

pub struct Dopri5<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    h: f64,
    tol: Tolerances,
    steps: usize,
}

fn axpy<const N: usize>(y: &[f64; N], terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += c * k[i];
        }
    }
    out
}

impl<const N: usize> Dopri5<N> {
    pub fn new(t0: f64, y0: [f64; N], h0: f64, tol: Tolerances) -> Self {
        Dopri5 {
            t: t0,
            y: y0,
            h: h0.abs(),
            tol,
            steps: 0,
        }
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Advances to exactly `t_end`, calling `observe` after every accepted
    /// step. Returns early (without reaching `t_end`) if the observer
    /// answers [`Flow::Stop`].
    pub fn advance<F, O>(&mut self, t_end: f64, mut rhs: F, mut observe: O) -> Result<Flow>
    where
        F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
        O: FnMut(f64, &[f64; N]) -> Flow,
    {
        let span = t_end - self.t;
        if span == 0.0 {
            return Ok(Flow::Continue);
        }
        let dir = span.signum();
        let h_floor = 1e-15 * (self.t.abs() + t_end.abs()).max(1e-300);
        if self.h == 0.0 || !self.h.is_finite() {
            self.h = span.abs() * 1e-3;
        }
        let mut k1 = rhs(self.t, &self.y)?;
        loop {
            let remaining = t_end - self.t;
            if remaining * dir <= 0.0 {
                return Ok(Flow::Continue);
            }
            let last = self.h >= remaining.abs();
            let h = if last { remaining } else { self.h * dir };
            self.steps += 1;
            if self.steps > self.tol.max_steps {
                return Err(Error::Convergence(format!(
                    "integrator exceeded {} steps near t={}",
                    self.tol.max_steps, self.t
                )));
            }
            match self.trial(&mut rhs, &k1, h) {
                Ok((y_new, k7, err)) if err <= 1.0 => {
                    self.t = if last { t_end } else { self.t + h };
                    self.y = y_new;
                    k1 = k7;
                    let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                    if !last || grow < 1.0 {
                        self.h = h.abs() * grow;
                    }
                    if observe(self.t, &self.y) == Flow::Stop {
                        return Ok(Flow::Stop);
                    }
                }
                Ok((_, _, err)) => {
                    let shrink = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 0.9) } else { 0.1 };
                    self.h = h.abs() * shrink;
                }
                Err(_) => {
                    self.h = h.abs() * 0.25;
                }
            }
            if self.h < h_floor {
                return Err(Error::Convergence(format!(
                    "step size underflow at t={} (h={:e})",
                    self.t, self.h
                )));
            }
        }
    }

    #[allow(clippy::type_complexity)]
    fn trial<F>(&self, rhs: &mut F, k1: &[f64; N], h: f64) -> Result<([f64; N], [f64; N], f64)>
    where
        F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
    {
        let (t, y) = (self.t, &self.y);
        let k2 = rhs(t + C2 * h, &axpy(y, &[(h * A21, k1)]))?;
        let k3 = rhs(t + C3 * h, &axpy(y, &[(h * A31, k1), (h * A32, &k2)]))?;
        let k4 = rhs(t + C4 * h, &axpy(y, &[(h * A41, k1), (h * A42, &k2), (h * A43, &k3)]))?;
        let k5 = rhs(
            t + C5 * h,
            &axpy(y, &[(h * A51, k1), (h * A52, &k2), (h * A53, &k3), (h * A54, &k4)]),
        )?;
        let k6 = rhs(
            t + h,
            &axpy(y, &[(h * A61, k1), (h * A62, &k2), (h * A63, &k3), (h * A64, &k4), (h * A65, &k5)]),
        )?;
        let y_new = axpy(y, &[(h * B1, k1), (h * B3, &k3), (h * B4, &k4), (h * B5, &k5), (h * B6, &k6)]);
        let k7 = rhs(t + h, &y_new)?;
        let mut acc = 0.0;
        for i in 0..N {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = self.tol.atol + self.tol.rtol * y[i].abs().max(y_new[i].abs());
            acc += (e / sc).powi(2);
        }
        let err = (acc / N as f64).sqrt();
        if y_new.iter().any(|v| !v.is_finite()) {
            return Err(Error::Computation("non-finite state".into()));
        }
        Ok((y_new, k7, err))
    }
}
