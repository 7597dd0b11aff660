//! Adaptive Dormand–Prince 5(4) integrator on fixed-size states.

use std::ops::ControlFlow;

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug)]
pub struct Rk45<T> {
    pub rtol: T,
    pub atol: T,
    /// Largest allowed |step|; also sets the density of observed points.
    pub h_max: T,
    pub h_min: T,
}

impl<T: Real> Default for Rk45<T> {
    fn default() -> Self {
        Rk45 { rtol: T::c(1e-10), atol: T::c(1e-12), h_max: T::c(0.05), h_min: T::c(1e-14) }
    }
}

/// How an integration ended.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Finish<T, const D: usize> {
    Reached { s: T, y: [T; D] },
    Stopped { s: T, y: [T; D] },
}

impl<T: Copy, const D: usize> Finish<T, D> {
    pub fn state(&self) -> (T, [T; D]) {
        match *self {
            Finish::Reached { s, y } | Finish::Stopped { s, y } => (s, y),
        }
    }
}

const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
// fifth-order weights minus embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

impl<T: Real> Rk45<T> {
    /// Integrates `y' = f(s, y)` from `s0` to `s_end` (either direction).
    /// `observe(s, y, f(s, y))` sees the initial point and every accepted step;
    /// returning `Break` stops the run there.
    pub fn integrate<const D: usize, F, O>(&self, f: F, s0: T, y0: [T; D], s_end: T, mut observe: O) -> Result<Finish<T, D>>
    where
        F: Fn(T, &[T; D]) -> [T; D],
        O: FnMut(T, &[T; D], &[T; D]) -> ControlFlow<()>,
    {
        let dir = if s_end >= s0 { T::one() } else { -T::one() };
        let span = (s_end - s0).abs();
        let mut s = s0;
        let mut y = y0;
        let mut k0 = f(s, &y);
        if observe(s, &y, &k0).is_break() {
            return Ok(Finish::Stopped { s, y });
        }
        let mut h = self.h_max.min(span).min(T::c(1e-3).max(span * T::c(1e-4)));
        let fifth = T::c(0.2);
        while (s_end - s) * dir > T::zero() {
            let remaining = (s_end - s).abs();
            let last = h >= remaining;
            if last {
                h = remaining;
            }
            let mut k = [[T::zero(); D]; 7];
            k[0] = k0;
            for st in 0..6 {
                let mut yt = y;
                for (i, yi) in yt.iter_mut().enumerate() {
                    let mut acc = T::zero();
                    for (j, kj) in k.iter().enumerate().take(st + 1) {
                        acc += T::c(A[st][j]) * kj[i];
                    }
                    *yi += dir * h * acc;
                }
                k[st + 1] = f(s + dir * h * T::c(C[st]), &yt);
            }
            // stage 7 is evaluated at the fifth-order solution (FSAL)
            let mut y5 = y;
            for (i, yi) in y5.iter_mut().enumerate() {
                let mut acc = T::zero();
                for (j, kj) in k.iter().enumerate().take(6) {
                    acc += T::c(A[5][j]) * kj[i];
                }
                *yi += dir * h * acc;
            }
            let mut err = T::zero();
            for i in 0..D {
                let mut e = T::zero();
                for (j, kj) in k.iter().enumerate() {
                    e += T::c(E[j]) * kj[i];
                }
                let sc = self.atol + self.rtol * y[i].abs().max(y5[i].abs());
                let r = h * e / sc;
                err += r * r;
            }
            err = (err / T::from_usize_(D)).sqrt();
            if !err.is_finite() {
                h *= T::c(0.25);
                if h < self.h_min {
                    return Err(Error::StepFailure(s.to_f64_()));
                }
                continue;
            }
            if err <= T::one() {
                s = if last { s_end } else { s + dir * h };
                y = y5;
                k0 = k[6];
                if observe(s, &y, &k0).is_break() {
                    return Ok(Finish::Stopped { s, y });
                }
                let grow = if err == T::zero() { T::c(5.0) } else { (T::c(0.9) * err.powf(-fifth)).min(T::c(5.0)) };
                h = (h * grow).min(self.h_max);
            } else {
                h *= (T::c(0.9) * err.powf(-fifth)).max(T::c(0.2));
                if h < self.h_min {
                    return Err(Error::StepFailure(s.to_f64_()));
                }
            }
        }
        Ok(Finish::Reached { s, y })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_period() {
        let rk = Rk45::<f64>::default();
        let tau = 2.0 * std::f64::consts::PI;
        let end = rk.integrate(|_, y| [y[1], -y[0]], 0.0, [1.0, 0.0], tau, |_, _, _| ControlFlow::Continue(())).unwrap();
        let (s, y) = end.state();
        assert_eq!(s, tau);
        assert!((y[0] - 1.0).abs() < 1e-9 && y[1].abs() < 1e-9, "{y:?}");
    }

    #[test]
    fn backward_exponential() {
        let rk = Rk45::<f64>::default();
        let (_, y) = rk.integrate(|_, y| [y[0]], 3.0, [1.0], 0.0, |_, _, _| ControlFlow::Continue(())).unwrap().state();
        assert!((y[0] - (-3.0f64).exp()).abs() < 1e-11);
    }

    #[test]
    fn observer_can_stop() {
        let rk = Rk45::<f64>::default();
        let end = rk
            .integrate(|_, _| [1.0], 0.0, [0.0], 10.0, |_, y, _| if y[0] > 2.0 { ControlFlow::Break(()) } else { ControlFlow::Continue(()) })
            .unwrap();
        assert!(matches!(end, Finish::Stopped { .. }));
        assert!(end.state().1[0] > 2.0 && end.state().1[0] < 2.1);
    }

    #[test]
    fn single_precision() {
        let rk = Rk45::<f32> { rtol: 1e-5, atol: 1e-6, ..Default::default() };
        let (_, y) = rk.integrate(|_, y| [-y[0]], 0.0f32, [1.0], 1.0, |_, _, _| ControlFlow::Continue(())).unwrap().state();
        assert!((y[0] - (-1.0f32).exp()).abs() < 1e-4);
    }
}
