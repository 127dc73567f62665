//! Adaptive Dormand-Prince 5(4) integration of complex ODE systems.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Right-hand side `dy/dt = f(t, y)` over a flat complex state.
pub trait OdeSystem {
    fn len(&self) -> usize;
    fn rhs(&self, t: f64, y: &[C64], dy: &mut [C64]);
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on the step (us); zero means unbounded.
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rtol: 1e-8, atol: 1e-10, max_step: 0.0, max_steps: 5_000_000 }
    }
}

impl Tolerances {
    pub fn with_rtol(rtol: f64) -> Self {
        Tolerances { rtol, atol: rtol * 1e-2, ..Default::default() }
    }

    pub fn halved(&self) -> Self {
        Tolerances { rtol: 0.5 * self.rtol, atol: 0.5 * self.atol, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0) || !(self.atol > 0.0) {
            return Err(Error::InvalidParams("integrator tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

impl std::ops::AddAssign for StepStats {
    fn add_assign(&mut self, o: Self) {
        self.accepted += o.accepted;
        self.rejected += o.rejected;
        self.evaluations += o.evaluations;
    }
}

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
// Fifth- minus fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Reusable DOPRI5 stepper. Keeps the last accepted step size so that
/// consecutive [`Dopri5::integrate`] calls continue smoothly.
pub struct Dopri5 {
    tol: Tolerances,
    h: f64,
    k: [Vec<C64>; 7],
    ytmp: Vec<C64>,
    ynew: Vec<C64>,
    fsal_valid: bool,
    stats: StepStats,
}

impl Dopri5 {
    pub fn new(len: usize, tol: Tolerances) -> Self {
        let z = || vec![C64::new(0.0, 0.0); len];
        Dopri5 {
            tol,
            h: 0.0,
            k: [z(), z(), z(), z(), z(), z(), z()],
            ytmp: z(),
            ynew: z(),
            fsal_valid: false,
            stats: StepStats::default(),
        }
    }

    pub fn stats(&self) -> StepStats {
        self.stats
    }

    /// Marks the cached derivative stale, e.g. after the state was changed
    /// outside the integrator.
    pub fn reset(&mut self) {
        self.fsal_valid = false;
    }

    fn error_norm(&self, y: &[C64], ynew: &[C64], err: &[C64]) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..y.len() {
            let scale = self.tol.atol + self.tol.rtol * y[i].norm().max(ynew[i].norm());
            worst = worst.max(err[i].norm() / scale);
        }
        worst
    }

    fn initial_step<S: OdeSystem>(&mut self, sys: &S, t: f64, y: &[C64], span: f64) -> f64 {
        let f0 = &self.k[0];
        let mut d0: f64 = 0.0;
        let mut d1: f64 = 0.0;
        for i in 0..y.len() {
            let sc = self.tol.atol + self.tol.rtol * y[i].norm();
            d0 = d0.max(y[i].norm() / sc);
            d1 = d1.max(f0[i].norm() / sc);
        }
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(span.abs());
        for i in 0..y.len() {
            self.ytmp[i] = y[i] + self.k[0][i] * h0;
        }
        sys.rhs(t + h0, &self.ytmp, &mut self.k[1]);
        self.stats.evaluations += 1;
        let mut d2: f64 = 0.0;
        for i in 0..y.len() {
            let sc = self.tol.atol + self.tol.rtol * y[i].norm();
            d2 = d2.max((self.k[1][i] - self.k[0][i]).norm() / sc / h0);
        }
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(span.abs())
    }

    /// Integrates from `t0` to `t1`, calling `on_sample` at each requested
    /// sample time inside `(t0, t1]` (sorted). The state is updated in place.
    pub fn integrate<S, F>(
        &mut self,
        sys: &S,
        t0: f64,
        t1: f64,
        y: &mut [C64],
        samples: &[f64],
        segment: &str,
        mut on_sample: F,
    ) -> Result<()>
    where
        S: OdeSystem,
        F: FnMut(f64, &[C64]) -> Result<()>,
    {
        self.tol.validate()?;
        if t1 <= t0 {
            return Ok(());
        }
        let n = y.len();
        if !self.fsal_valid {
            sys.rhs(t0, y, &mut self.k[0]);
            self.stats.evaluations += 1;
            self.fsal_valid = true;
        }
        if self.h <= 0.0 {
            self.h = self.initial_step(sys, t0, y, t1 - t0);
        }
        let mut t = t0;
        let mut next_sample = samples.iter().copied().filter(|&s| s > t0 && s <= t1).peekable();
        let mut steps = 0usize;
        while t < t1 {
            let target = next_sample.peek().copied().unwrap_or(t1);
            let mut h = self.h;
            if self.tol.max_step > 0.0 {
                h = h.min(self.tol.max_step);
            }
            let landing = t + h >= target - 1e-12 * target.abs().max(1.0);
            if landing {
                h = target - t;
            }
            let h_min = 1e-13 * t.abs().max(1.0);
            if h < h_min && !landing {
                return Err(Error::Stiffness { segment: segment.to_string(), t, h });
            }
            steps += 1;
            if steps > self.tol.max_steps {
                return Err(Error::Stiffness { segment: segment.to_string(), t, h });
            }

            let err = self.try_step(sys, t, h, y);
            self.stats.evaluations += 6;
            if !err.is_finite() {
                self.h = 0.25 * h;
                self.stats.rejected += 1;
                if self.h < h_min {
                    return Err(Error::Stiffness { segment: segment.to_string(), t, h });
                }
                continue;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                t = if landing { target } else { t + h };
                y[..n].copy_from_slice(&self.ynew);
                self.k.swap(0, 6);
                self.stats.accepted += 1;
                // a step shortened to land on a sample says nothing about the
                // natural step size, so only grow from it
                self.h = if landing { self.h.max(h * factor) } else { h * factor };
                if landing && next_sample.peek() == Some(&target) {
                    next_sample.next();
                    on_sample(t, y)?;
                }
            } else {
                self.stats.rejected += 1;
                self.h = h * factor.min(1.0);
                if self.h < h_min {
                    return Err(Error::Stiffness { segment: segment.to_string(), t, h: self.h });
                }
            }
        }
        Ok(())
    }

    /// One trial step; fills `ynew` and `k[6]` and returns the error norm.
    fn try_step<S: OdeSystem>(&mut self, sys: &S, t: f64, h: f64, y: &[C64]) -> f64 {
        let n = y.len();
        let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
        let yt = &mut self.ytmp;
        for i in 0..n {
            yt[i] = y[i] + k1[i] * (h * A21);
        }
        sys.rhs(t + C2 * h, yt, k2);
        for i in 0..n {
            yt[i] = y[i] + (k1[i] * A31 + k2[i] * A32) * h;
        }
        sys.rhs(t + C3 * h, yt, k3);
        for i in 0..n {
            yt[i] = y[i] + (k1[i] * A41 + k2[i] * A42 + k3[i] * A43) * h;
        }
        sys.rhs(t + C4 * h, yt, k4);
        for i in 0..n {
            yt[i] = y[i] + (k1[i] * A51 + k2[i] * A52 + k3[i] * A53 + k4[i] * A54) * h;
        }
        sys.rhs(t + C5 * h, yt, k5);
        for i in 0..n {
            yt[i] = y[i] + (k1[i] * A61 + k2[i] * A62 + k3[i] * A63 + k4[i] * A64 + k5[i] * A65) * h;
        }
        sys.rhs(t + h, yt, k6);
        let yn = &mut self.ynew;
        for i in 0..n {
            yn[i] = y[i] + (k1[i] * B1 + k3[i] * B3 + k4[i] * B4 + k5[i] * B5 + k6[i] * B6) * h;
        }
        sys.rhs(t + h, yn, k7);
        // reuse ytmp as the error estimate
        for i in 0..n {
            yt[i] = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
        }
        let (ynew, err) = (&self.ynew, &self.ytmp);
        self.error_norm(y, ynew, err)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Oscillator {
        omega: f64,
        decay: f64,
    }

    impl OdeSystem for Oscillator {
        fn len(&self) -> usize {
            1
        }
        fn rhs(&self, _t: f64, y: &[C64], dy: &mut [C64]) {
            dy[0] = C64::new(-self.decay, -self.omega) * y[0];
        }
    }

    struct Forced;

    impl OdeSystem for Forced {
        fn len(&self) -> usize {
            1
        }
        fn rhs(&self, t: f64, _y: &[C64], dy: &mut [C64]) {
            dy[0] = C64::new(t.cos(), 0.0);
        }
    }

    #[test]
    fn damped_rotation_matches_closed_form() {
        let sys = Oscillator { omega: 7.0, decay: 0.3 };
        let mut y = vec![C64::new(1.0, 0.0)];
        let mut st = Dopri5::new(1, Tolerances::default());
        let samples: Vec<f64> = (1..=20).map(|i| i as f64 * 0.25).collect();
        let mut seen = Vec::new();
        st.integrate(&sys, 0.0, 5.0, &mut y, &samples, "test", |t, y| {
            seen.push((t, y[0]));
            Ok(())
        })
        .unwrap();
        assert_eq!(seen.len(), 20);
        for (t, v) in seen {
            let exact = C64::new(-0.3 * t, -7.0 * t).exp();
            assert!((v - exact).norm() < 1e-7, "t = {t}");
        }
    }

    #[test]
    fn lands_exactly_on_samples() {
        let mut y = vec![C64::new(0.0, 0.0)];
        let mut st = Dopri5::new(1, Tolerances::default());
        let samples = [0.1, 0.7, 1.3];
        let mut times = Vec::new();
        st.integrate(&Forced, 0.0, 1.3, &mut y, &samples, "test", |t, _| {
            times.push(t);
            Ok(())
        })
        .unwrap();
        assert_eq!(times, samples);
        assert!((y[0].re - 1.3f64.sin()).abs() < 1e-9);
    }

    #[test]
    fn tiny_step_budget_reports_segment() {
        let sys = Oscillator { omega: 1e3, decay: 0.0 };
        let mut y = vec![C64::new(1.0, 0.0)];
        let tol = Tolerances { max_steps: 10, ..Default::default() };
        let mut st = Dopri5::new(1, tol);
        let err = st.integrate(&sys, 0.0, 10.0, &mut y, &[], "hold", |_, _| Ok(())).unwrap_err();
        match err {
            Error::Stiffness { segment, .. } => assert_eq!(segment, "hold"),
            e => panic!("unexpected {e}"),
        }
    }
}
