//! Bessel functions of the first and second kind at integer order.
//!
//! `J_n` comes from Miller's backward recurrence normalised by
//! `J_0 + 2 Σ J_{2k} = 1`, switching to the Hankel expansion once
//! `x ≥ max(50, 2(n+1)²)`. `Y_0`, `Y_1` use the Neumann series in the
//! even/odd `J_k` already produced by the recurrence; higher orders recur
//! forward, which is stable for `Y`.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Value and first derivative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BesselEval<T> {
    pub value: T,
    pub derivative: T,
}

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn hankel_threshold<T: Real>(order: u32) -> T {
    let n1 = T::from_u32(order + 1).unwrap();
    T::c(50.0).max(T::c(2.0) * n1 * n1)
}

/// Miller backward recurrence: returns J_0..=J_top where `top >= kmax`.
/// All entries up to the starting index are returned so callers can form
/// Neumann sums.
fn miller<T: Real>(kmax: usize, x: T) -> Vec<T> {
    let xf = x.to_f64_();
    let base = (kmax as f64).max(xf);
    let mut start = (base + 50.0 + 10.0 * base.cbrt()).ceil() as usize;
    start += start % 2;
    let mut j = vec![T::zero(); start + 2];
    j[start] = T::c(1e-30);
    let big = T::max_value().sqrt();
    let two = T::c(2.0);
    for k in (1..=start).rev() {
        let v = two * T::from_usize_(k) / x * j[k] - j[k + 1];
        j[k - 1] = v;
        if v.abs() > big {
            let inv = T::one() / big;
            for e in j[k - 1..].iter_mut() {
                *e *= inv;
            }
        }
    }
    let mut s = j[0];
    let mut k = 2;
    while k <= start {
        s += two * j[k];
        k += 2;
    }
    for e in j.iter_mut() {
        *e /= s;
    }
    j.truncate(start + 1);
    j
}

/// Hankel asymptotic expansion; returns (J_n, Y_n).
fn hankel<T: Real>(n: u32, x: T) -> (T, T) {
    let mu = T::c(4.0) * T::from_u32(n).unwrap() * T::from_u32(n).unwrap();
    let eight_x = T::c(8.0) * x;
    let (mut p, mut q) = (T::one(), T::zero());
    let mut term = T::one();
    let mut last = T::infinity();
    for k in 1..200usize {
        let odd = T::from_usize_(2 * k - 1);
        term = term * (mu - odd * odd) / (T::from_usize_(k) * eight_x);
        let a = term.abs();
        if a > last {
            break;
        }
        last = a;
        let sign = if (k / 2) % 2 == 0 { T::one() } else { -T::one() };
        if k % 2 == 1 {
            q += sign * term;
        } else {
            p += sign * term;
        }
        if a < T::epsilon() * T::c(1e-2) * (p.abs() + q.abs()) {
            break;
        }
    }
    // phase (2n+1)π/4 reduced mod 2π without rounding
    let h = T::FRAC_1_SQRT_2();
    let (cphi, sphi) = match (2 * n + 1) % 8 {
        1 => (h, h),
        3 => (-h, h),
        5 => (-h, -h),
        _ => (h, -h),
    };
    let (sx, cx) = x.sin_cos();
    let cchi = cx * cphi + sx * sphi;
    let schi = sx * cphi - cx * sphi;
    let amp = (T::c(2.0) / (T::PI() * x)).sqrt();
    (amp * (p * cchi - q * schi), amp * (p * schi + q * cchi))
}

fn j_values<T: Real>(n: u32, x: T) -> (T, T, T) {
    // returns (J_{n-1}, J_n, J_{n+1}); J_{-1} = -J_1
    if x >= hankel_threshold::<T>(n) {
        let jn = hankel(n, x).0;
        let jp = hankel(n + 1, x).0;
        let jm = if n == 0 { -jp } else { hankel(n - 1, x).0 };
        return (jm, jn, jp);
    }
    let j = miller(n as usize + 1, x);
    let n = n as usize;
    let jm = if n == 0 { -j[1] } else { j[n - 1] };
    (jm, j[n], j[n + 1])
}

/// `J_order(r)` and its derivative.
pub fn bessel_j<T: Real>(order: u32, r: T) -> Result<BesselEval<T>> {
    if !(r >= T::zero()) {
        return Err(Error::DomainError(format!("bessel_j needs r >= 0, got {r}")));
    }
    if r == T::zero() {
        let value = if order == 0 { T::one() } else { T::zero() };
        let derivative = if order == 1 { T::c(0.5) } else { T::zero() };
        return Ok(BesselEval { value, derivative });
    }
    let (jm, jn, jp) = j_values(order, r);
    let derivative = if order == 0 { -jp } else { (jm - jp) * T::c(0.5) };
    Ok(BesselEval { value: jn, derivative })
}

/// (Y_0, Y_1) by the Neumann series over the Miller table.
fn y01_series<T: Real>(x: T) -> (T, T) {
    let j = miller(2, x);
    let two_pi = T::c(2.0) / T::PI();
    let lg = (x / T::c(2.0)).ln() + T::c(EULER_GAMMA);
    let mut s0 = T::zero();
    let mut s1 = T::zero();
    let mut k = 1usize;
    while 2 * k + 1 < j.len() {
        let sign = if k.is_multiple_of(2) { T::one() } else { -T::one() };
        let kk = T::from_usize_(k);
        s0 += sign * j[2 * k] / kk;
        s1 += sign * (j[2 * k - 1] - j[2 * k + 1]) / kk;
        k += 1;
    }
    let y0 = two_pi * lg * j[0] - T::c(2.0) * two_pi * s0;
    let y1 = -two_pi * (j[0] / x - lg * j[1]) + two_pi * s1;
    (y0, y1)
}

/// `Y_order(r)` and its derivative, `r > 0`.
pub fn bessel_y<T: Real>(order: u32, r: T) -> Result<BesselEval<T>> {
    if !(r > T::zero()) {
        return Err(Error::DomainError(format!("bessel_y needs r > 0, got {r}")));
    }
    let (ym, yn, yp) = if r >= hankel_threshold::<T>(order) {
        let yn = hankel(order, r).1;
        let yp = hankel(order + 1, r).1;
        let ym = if order == 0 { -yp } else { hankel(order - 1, r).1 };
        (ym, yn, yp)
    } else {
        let (y0, y1) = y01_series(r);
        let mut prev = -y1; // Y_{-1}
        let mut cur = y0;
        let mut next = y1;
        for k in 1..=order {
            let nn = T::c(2.0) * T::from_u32(k).unwrap() / r * next - cur;
            prev = cur;
            cur = next;
            next = nn;
        }
        (prev, cur, next)
    };
    let derivative = if order == 0 { -yp } else { (ym - yp) * T::c(0.5) };
    Ok(BesselEval { value: yn, derivative })
}
