//! Localised solution of the radial Ginzburg–Landau amplitude equation
//!
//! ```text
//! q'' + q'/s − q/(4s²) = c0 q + c3 q³,   q(s) ≈ q0 √s (s → 0),   q(s) ≈ q₊ e^{−√c0 s}/√s (s → ∞)
//! ```
//!
//! Writing `q = w/√s` removes the singular terms: `w'' = c0 w + c3 w³ / s`, with
//! `w = q0 s + (c0 q0/6) s³ + (c3 q0³/12) s⁴ + (c0² q0/120) s⁵ + …` near 0 and
//! `w = q₊ e^{−√c0 s}` up to `O(e^{−3√c0 s})` in the tail. The derivative stored
//! alongside `q` is `dq = (d/ds + 1/(2s)) q = w'/√s`.
//!
//! Shooting from `s_min` classifies trajectories by how they leave the hump.
//! Measured on (c0, c3) = (1, −1): for `q0 < q0*` the solution turns back up
//! while still positive ([`ExitClass::GrowsPositive`]); for `q0 > q0*` it
//! overshoots through zero ([`ExitClass::CrossesZero`]). Small `q0` therefore
//! sits on the growing side, large `q0` on the crossing side.
//!
//! After bisection the pair `(q0, q₊)` is polished by matching a forward
//! shot against a backward shot from the exact linear tail, which removes the
//! exponential divergence the forward shot alone cannot avoid.

use std::io::Write;
use std::ops::ControlFlow;

use crate::error::{Error, Result};
use crate::linalg::{solve_dense, Matrix};
use crate::ode::Rk45;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitClass {
    GrowsPositive,
    CrossesZero,
    Decayed,
}

#[derive(Clone, Copy, Debug)]
pub struct GlOptions<T> {
    pub s_min: T,
    /// `None` selects `30/√c0`.
    pub s_max: Option<T>,
    pub rtol: T,
    pub atol: T,
    pub h_max: T,
    pub bisect_width: T,
}

impl<T: Real> Default for GlOptions<T> {
    fn default() -> Self {
        GlOptions {
            s_min: T::c(1e-3),
            s_max: None,
            rtol: T::c(1e-10),
            atol: T::c(1e-12),
            h_max: T::c(0.02),
            bisect_width: T::c(1e-12),
        }
    }
}

impl<T: Real> GlOptions<T> {
    fn s_max_for(&self, c0: T) -> T {
        self.s_max.unwrap_or(T::c(30.0) / c0.sqrt())
    }

    fn rk(&self, c0: T) -> Rk45<T> {
        Rk45 { rtol: self.rtol, atol: self.atol, h_max: self.h_max / c0.sqrt(), h_min: T::c(1e-14) }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Shot<T> {
    pub exit: ExitClass,
    pub s_exit: T,
    /// Location of the largest `q` seen before exit.
    pub s_peak: T,
}

#[derive(Clone, Debug)]
pub struct GLSolution<T> {
    pub c0: T,
    pub c3: T,
    pub q0: T,
    pub q_plus: T,
    /// Least-squares slope of `log(q√s)` over the tail window.
    pub tail_slope: T,
    pub s_grid: Vec<T>,
    pub q_samples: Vec<T>,
    pub dq_samples: Vec<T>,
}

fn check_params<T: Real>(c0: T, c3: T) -> Result<()> {
    if !(c0 > T::zero()) || !c0.is_finite() {
        return Err(Error::DomainError(format!("c0 must be positive, got {c0}")));
    }
    if !(c3 < T::zero()) {
        return Err(Error::Supercritical(c3.to_f64_()));
    }
    Ok(())
}

fn rhs<T: Real>(c0: T, c3: T) -> impl Fn(T, &[T; 2]) -> [T; 2] {
    move |s, y| [y[1], c0 * y[0] + c3 * y[0] * y[0] * y[0] / s]
}

/// `(w, w')` from the small-s series.
fn series<T: Real>(c0: T, c3: T, q0: T, s: T) -> [T; 2] {
    let (s2, q3) = (s * s, q0 * q0 * q0);
    let w = q0 * s + c0 * q0 / T::c(6.0) * s2 * s + c3 * q3 / T::c(12.0) * s2 * s2 + c0 * c0 * q0 / T::c(120.0) * s2 * s2 * s;
    let dw = q0 + c0 * q0 / T::c(2.0) * s2 + c3 * q3 / T::c(3.0) * s2 * s + c0 * c0 * q0 / T::c(24.0) * s2 * s2;
    [w, dw]
}

/// Integrates from the series start and classifies the exit.
pub fn shoot<T: Real>(c0: T, c3: T, q0_trial: T, s_max: T, opts: &GlOptions<T>) -> Result<Shot<T>> {
    if !(c0 > T::zero()) || !(q0_trial > T::zero()) {
        return Err(Error::DomainError(format!("shoot needs c0 > 0 and q0 > 0, got c0={c0}, q0={q0_trial}")));
    }
    let cap = T::c(10.0) * (c0 / c3.abs().max(T::epsilon())).sqrt();
    let floor = T::c(1e-10);
    let y0 = series(c0, c3, q0_trial, opts.s_min);
    let mut exit = None;
    let mut s_exit = s_max;
    let (mut q_peak, mut s_peak) = (T::zero(), opts.s_min);
    let mut descending = false;
    opts.rk(c0).integrate(rhs(c0, c3), opts.s_min, y0, s_max, |s, y, _| {
        let q = y[0] / s.sqrt();
        if q > q_peak {
            q_peak = q;
            s_peak = s;
        }
        let class = if y[0] < T::zero() {
            Some(ExitClass::CrossesZero)
        } else if q > cap || (descending && y[1] > T::zero()) {
            Some(ExitClass::GrowsPositive)
        } else {
            None
        };
        descending |= y[1] < T::zero();
        match class {
            Some(c) => {
                exit = Some(c);
                s_exit = s;
                ControlFlow::Break(())
            }
            None => {
                if s >= s_max && q.abs() < floor {
                    exit = Some(ExitClass::Decayed);
                }
                ControlFlow::Continue(())
            }
        }
    })?;
    // reaching s_max still positive and descending: treat as decayed
    let exit = exit.unwrap_or(ExitClass::Decayed);
    Ok(Shot { exit, s_exit, s_peak })
}

/// Forward state at `s_m` and backward (tail-started) state at `s_m`.
fn match_states<T: Real>(c0: T, c3: T, q0: T, q_plus: T, s_m: T, s_max: T, opts: &GlOptions<T>) -> Result<([T; 2], [T; 2])> {
    let rk = opts.rk(c0);
    let k = c0.sqrt();
    let go = |_: T, _: &[T; 2], _: &[T; 2]| ControlFlow::Continue(());
    let (_, fw) = rk.integrate(rhs(c0, c3), opts.s_min, series(c0, c3, q0, opts.s_min), s_m, go)?.state();
    let wt = q_plus * (-k * s_max).exp();
    let (_, bw) = rk.integrate(rhs(c0, c3), s_max, [wt, -k * wt], s_m, go)?.state();
    Ok((fw, bw))
}

/// Bisects for the single-hump homoclinic and polishes it by two-sided matching.
pub fn find_homoclinic<T: Real>(c0: T, c3: T) -> Result<GLSolution<T>> {
    find_homoclinic_with(c0, c3, &GlOptions::default())
}

pub fn find_homoclinic_with<T: Real>(c0: T, c3: T, opts: &GlOptions<T>) -> Result<GLSolution<T>> {
    check_params(c0, c3)?;
    let s_max = opts.s_max_for(c0);
    let upper = T::c(4.0) * (c0 / -c3).sqrt() * c0.powf(T::c(0.25));

    // bracket: scan geometrically from small q0 upward
    let mut prev: Option<(T, ExitClass)> = None;
    let mut bracket = None;
    for i in 0..=40 {
        let q = upper * T::c(10f64.powf(-3.0 * (40 - i) as f64 / 40.0));
        let e = shoot(c0, c3, q, s_max, opts)?.exit;
        if let Some((qp, ep)) = prev {
            if ep != e && ep != ExitClass::Decayed && e != ExitClass::Decayed {
                bracket = Some((qp, ep, q, e));
                break;
            }
        }
        prev = Some((q, e));
    }
    let Some((mut lo, lo_class, mut hi, hi_class)) = bracket else {
        return Err(Error::ClassificationAmbiguous(format!("no class change for q0 in (0, {upper}]")));
    };
    let mut s_peak = T::zero();
    while hi - lo > opts.bisect_width {
        let mid = (lo + hi) / T::c(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        let shot = shoot(c0, c3, mid, s_max, opts)?;
        s_peak = shot.s_peak;
        match shot.exit {
            e if e == lo_class => lo = mid,
            e if e == hi_class => hi = mid,
            _ => {
                lo = mid;
                hi = mid;
            }
        }
    }
    let mut q0 = (lo + hi) / T::c(2.0);
    if s_peak == T::zero() {
        s_peak = shoot(c0, c3, q0, s_max, opts)?.s_peak;
    }

    // two-sided polish
    let k = c0.sqrt();
    let s_m = (s_peak + T::c(3.0) / k).min(T::c(0.5) * s_max);
    let (fw, _) = match_states(c0, c3, q0, T::one(), s_m, s_max, opts)?;
    let mut qp = fw[0] / (-k * s_m).exp();
    let mismatch = |q0: T, qp: T| -> Result<[T; 2]> {
        let (f, b) = match_states(c0, c3, q0, qp, s_m, s_max, opts)?;
        Ok([(f[0] - b[0]) / f[0].abs(), (f[1] - b[1]) / f[0].abs()])
    };
    let mut converged = false;
    for _ in 0..12 {
        let r = mismatch(q0, qp)?;
        let (h0, h1) = (q0 * T::c(1e-6), qp * T::c(1e-6));
        let r0 = mismatch(q0 + h0, qp)?;
        let r1 = mismatch(q0, qp + h1)?;
        let mut jac = Matrix::zeros(2);
        for i in 0..2 {
            *jac.get_mut(i, 0) = (r0[i] - r[i]) / h0;
            *jac.get_mut(i, 1) = (r1[i] - r[i]) / h1;
        }
        let d = solve_dense(jac, &[-r[0], -r[1]])?;
        q0 += d[0];
        qp += d[1];
        if d[0].abs() <= T::c(1e-14) * q0 && d[1].abs() <= T::c(1e-12) * qp.abs() {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence("homoclinic matching did not settle".into()));
    }

    // dense record: forward to s_m, backward from s_max to s_m
    let rk = opts.rk(c0);
    let mut fwd: Vec<(T, [T; 2])> = Vec::new();
    rk.integrate(rhs(c0, c3), opts.s_min, series(c0, c3, q0, opts.s_min), s_m, |s, y, _| {
        fwd.push((s, *y));
        ControlFlow::Continue(())
    })?;
    let mut bwd: Vec<(T, [T; 2])> = Vec::new();
    let wt = qp * (-k * s_max).exp();
    rk.integrate(rhs(c0, c3), s_max, [wt, -k * wt], s_m, |s, y, _| {
        bwd.push((s, *y));
        ControlFlow::Continue(())
    })?;
    bwd.pop(); // s_m already recorded by the forward sweep
    fwd.extend(bwd.into_iter().rev());
    let s_grid: Vec<T> = fwd.iter().map(|p| p.0).collect();
    let q_samples: Vec<T> = fwd.iter().map(|(s, y)| y[0] / s.sqrt()).collect();
    let dq_samples: Vec<T> = fwd.iter().map(|(s, y)| y[1] / s.sqrt()).collect();
    if q_samples.iter().any(|q| !(*q > T::zero())) {
        return Err(Error::NoConvergence("matched profile is not single-signed".into()));
    }

    let (tail_slope, intercept) = tail_fit(&s_grid, &q_samples, s_max);
    if ((tail_slope + k) / k).abs() > T::c(0.01) {
        return Err(Error::NoConvergence(format!("tail slope {tail_slope} not near {}", -k)));
    }
    Ok(GLSolution { c0, c3, q0, q_plus: intercept.exp(), tail_slope, s_grid, q_samples, dq_samples })
}

/// Least squares of `log(q√s)` against `s` on `[0.6, 0.85]·s_max`.
fn tail_fit<T: Real>(s: &[T], q: &[T], s_max: T) -> (T, T) {
    let (a, b) = (T::c(0.6) * s_max, T::c(0.85) * s_max);
    let pts: Vec<(T, T)> = s.iter().zip(q).filter(|(s, _)| **s >= a && **s <= b).map(|(s, q)| (*s, (*q * s.sqrt()).ln())).collect();
    let n = T::from_usize_(pts.len());
    let mx = pts.iter().fold(T::zero(), |acc, p| acc + p.0) / n;
    let my = pts.iter().fold(T::zero(), |acc, p| acc + p.1) / n;
    let sxy = pts.iter().fold(T::zero(), |acc, p| acc + (p.0 - mx) * (p.1 - my));
    let sxx = pts.iter().fold(T::zero(), |acc, p| acc + (p.0 - mx) * (p.0 - mx));
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

impl<T: Real> GLSolution<T> {
    pub fn s_min(&self) -> T {
        self.s_grid[0]
    }

    pub fn s_max(&self) -> T {
        *self.s_grid.last().expect("non-empty grid")
    }

    /// `(q, dq)` at `s > 0`: series below the grid, Hermite inside, exact tail above.
    pub fn evaluate(&self, s: T) -> (T, T) {
        let rs = s.sqrt();
        if s < self.s_min() {
            let [w, dw] = series(self.c0, self.c3, self.q0, s);
            return (w / rs, dw / rs);
        }
        if s > self.s_max() {
            let w = self.q_plus * (-self.c0.sqrt() * s).exp();
            return (w / rs, -self.c0.sqrt() * w / rs);
        }
        let i = match self.s_grid.binary_search_by(|x| x.partial_cmp(&s).expect("finite grid")) {
            Ok(i) => return (self.q_samples[i], self.dq_samples[i]),
            Err(i) => i - 1,
        };
        let (s0, s1) = (self.s_grid[i], self.s_grid[i + 1]);
        let y0 = self.w_state(i);
        let y1 = self.w_state(i + 1);
        let f = rhs(self.c0, self.c3);
        let (f0, f1) = (f(s0, &y0), f(s1, &y1));
        let h = s1 - s0;
        let t = (s - s0) / h;
        let w = hermite(t, h, y0[0], f0[0], y1[0], f1[0]);
        let dw = hermite(t, h, y0[1], f0[1], y1[1], f1[1]);
        (w / rs, dw / rs)
    }

    fn w_state(&self, i: usize) -> [T; 2] {
        let rs = self.s_grid[i].sqrt();
        [self.q_samples[i] * rs, self.dq_samples[i] * rs]
    }

    pub fn max_q(&self) -> (T, T) {
        self.s_grid.iter().zip(&self.q_samples).fold((T::zero(), T::zero()), |m, (s, q)| if *q > m.1 { (*s, *q) } else { m })
    }

    /// Largest local defect of the samples against the regularised form
    /// `w' = v`, `v' = c0 w + c3 w³/s` (`w = q√s`, `v = dq√s`), measured with
    /// the endpoint-corrected trapezoid rule and divided by the step.
    pub fn residual(&self) -> T {
        let (c0, c3) = (self.c0, self.c3);
        let (two, three, twelve) = (T::c(2.0), T::c(3.0), T::c(12.0));
        let d1 = |s: T, w: T, v: T| (v, c0 * w + c3 * w * w * w / s);
        let d2 = |s: T, w: T, v: T| {
            let (_, dv) = d1(s, w, v);
            (dv, c0 * v + c3 * (three * w * w * v / s - w * w * w / (s * s)))
        };
        let mut worst = T::zero();
        for i in 0..self.s_grid.len() - 1 {
            let (s0, s1) = (self.s_grid[i], self.s_grid[i + 1]);
            let h = s1 - s0;
            let ([w0, v0], [w1, v1]) = (self.w_state(i), self.w_state(i + 1));
            let (a0, b0) = d1(s0, w0, v0);
            let (a1, b1) = d1(s1, w1, v1);
            let (aa0, bb0) = d2(s0, w0, v0);
            let (aa1, bb1) = d2(s1, w1, v1);
            let ew = w1 - w0 - h / two * (a0 + a1) + h * h / twelve * (aa1 - aa0);
            let ev = v1 - v0 - h / two * (b0 + b1) + h * h / twelve * (bb1 - bb0);
            worst = worst.max(ew.abs().max(ev.abs()) / h);
        }
        worst
    }

    /// CSV dump `s,q,dq`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# c0={} c3={} q0={:.16e} q_plus={:.16e}", self.c0, self.c3, self.q0, self.q_plus)?;
        writeln!(out, "s,q,dq")?;
        for ((s, q), dq) in self.s_grid.iter().zip(&self.q_samples).zip(&self.dq_samples) {
            writeln!(out, "{s:.16e},{q:.16e},{dq:.16e}")?;
        }
        Ok(())
    }
}

fn hermite<T: Real>(t: T, h: T, y0: T, d0: T, y1: T, d1: T) -> T {
    let (t2, t3) = (t * t, t * t * t);
    let (two, three) = (T::c(2.0), T::c(3.0));
    (two * t3 - three * t2 + T::one()) * y0 + (t3 - two * t2 + t) * h * d0 + (three * t2 - two * t3) * y1 + (t3 - t2) * h * d1
}
