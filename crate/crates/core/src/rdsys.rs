//! Two-component reaction–diffusion systems, expanded at the Turing point as
//!
//! ```text
//! 0 = Δu − M1 u − μ M2 u − Q(u,u) − C(u,u,u)
//! ```
//!
//! Swift–Hohenberg `u_t = −(1+Δ)²u − μu + γu² − u³` becomes a first-order
//! system in `(u1, u2) = (u, (1+Δ)u)`:
//!
//! ```text
//! Δu1 = u2 − u1
//! Δu2 = −u2 − μ u1 + γ u1² − u1³
//! ```
//!
//! so `M1 = [[−1, 1], [0, −1]]`, `M2 = [[0, 0], [−1, 0]]`,
//! `Q(u,v) = (0, γ u1 v1)` and `C(u,v,w) = (0, −u1 v1 w1)`.

use crate::error::{Error, Result};
use crate::scalar::Real;

pub type Vec2<T> = [T; 2];
pub type Mat2<T> = [[T; 2]; 2];

#[derive(Clone, Debug, PartialEq)]
pub struct RDSystem<T> {
    pub m1: Mat2<T>,
    pub m2: Mat2<T>,
    /// `q[out][i][j]`, symmetric in (i, j).
    q: [Mat2<T>; 2],
    /// `c[out][i][j][k]`, symmetric in (i, j, k).
    c: [[Mat2<T>; 2]; 2],
    pub label: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TuringData<T> {
    pub kc: T,
    pub u0: Vec2<T>,
    pub u1: Vec2<T>,
    pub u0s: Vec2<T>,
    pub u1s: Vec2<T>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BifCoefficients<T> {
    pub c0: T,
    pub c3: T,
    pub nu: T,
}

#[inline]
pub fn dot<T: Real>(a: &Vec2<T>, b: &Vec2<T>) -> T {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn mat_vec<T: Real>(m: &Mat2<T>, v: &Vec2<T>) -> Vec2<T> {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

impl<T: Real> RDSystem<T> {
    /// Builds a system; `q` and `c` are symmetrised on the way in.
    pub fn new(m1: Mat2<T>, m2: Mat2<T>, q: [Mat2<T>; 2], c: [[Mat2<T>; 2]; 2], label: &str) -> Self {
        let half = T::c(0.5);
        let sixth = T::one() / T::c(6.0);
        let mut qs = q;
        let mut cs = c;
        for o in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    qs[o][i][j] = (q[o][i][j] + q[o][j][i]) * half;
                    for k in 0..2 {
                        let t = &c[o];
                        cs[o][i][j][k] = (t[i][j][k] + t[i][k][j] + t[j][i][k] + t[j][k][i] + t[k][i][j] + t[k][j][i]) * sixth;
                    }
                }
            }
        }
        RDSystem { m1, m2, q: qs, c: cs, label: label.to_string() }
    }

    pub fn q_coeffs(&self) -> &[Mat2<T>; 2] {
        &self.q
    }

    pub fn c_coeffs(&self) -> &[[Mat2<T>; 2]; 2] {
        &self.c
    }

    pub fn quad(&self, u: &Vec2<T>, v: &Vec2<T>) -> Vec2<T> {
        let mut out = [T::zero(); 2];
        for (o, slot) in out.iter_mut().enumerate() {
            for i in 0..2 {
                for j in 0..2 {
                    *slot += self.q[o][i][j] * u[i] * v[j];
                }
            }
        }
        out
    }

    pub fn cubic(&self, u: &Vec2<T>, v: &Vec2<T>, w: &Vec2<T>) -> Vec2<T> {
        let mut out = [T::zero(); 2];
        for (o, slot) in out.iter_mut().enumerate() {
            for i in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        *slot += self.c[o][i][j][k] * u[i] * v[j] * w[k];
                    }
                }
            }
        }
        out
    }

    pub fn has_quadratic(&self) -> bool {
        self.q.iter().flatten().flatten().any(|v| *v != T::zero())
    }
}

/// Swift–Hohenberg with quadratic coefficient `gamma`.
pub fn sh_system<T: Real>(gamma: T) -> RDSystem<T> {
    let (z, o) = (T::zero(), T::one());
    let m1 = [[-o, o], [z, -o]];
    let m2 = [[z, z], [-o, z]];
    let zq = [[z, z], [z, z]];
    let q = [zq, [[gamma, z], [z, z]]];
    let zc = [zq, zq];
    let mut c1 = zc;
    c1[0][0][0] = -o;
    let c = [zc, c1];
    RDSystem::new(m1, m2, q, c, &format!("swift-hohenberg gamma={gamma}"))
}

pub fn verify_turing<T: Real>(sys: &RDSystem<T>) -> Result<TuringData<T>> {
    let m = &sys.m1;
    let norm = m.iter().flatten().fold(T::zero(), |a, v| a.max(v.abs())).max(T::one() * T::min_positive_value());
    let tol = T::c(1e-9) * norm;
    let a = [[m[0][0] + T::one(), m[0][1]], [m[1][0], m[1][1] + T::one()]];
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if det.abs() > tol {
        return Err(Error::NotTuring(format!("det(M1 + I) = {det}")));
    }
    let trace = a[0][0] + a[1][1];
    if trace.abs() > tol {
        return Err(Error::NotDoubleEigenvalue(format!("eigenvalue -1 is simple (trace(M1) + 2 = {trace})")));
    }
    let amax = a.iter().flatten().fold(T::zero(), |acc, v| acc.max(v.abs()));
    if amax <= tol {
        return Err(Error::NotDoubleEigenvalue("M1 + I vanishes: eigenvalue -1 is geometrically double".into()));
    }
    // kernel from the dominant row
    let r0 = a[0][0].abs() + a[0][1].abs();
    let r1 = a[1][0].abs() + a[1][1].abs();
    let row = if r0 >= r1 { a[0] } else { a[1] };
    let mut u0 = [-row[1], row[0]];
    let big = if u0[0].abs() >= u0[1].abs() { u0[0] } else { u0[1] };
    u0 = [u0[0] / big, u0[1] / big];
    // A = U0 wᵀ, so U1 = w/|w|² gives A U1 = U0 and U1 ⟂ U0
    let n0 = dot(&u0, &u0);
    let w = [(a[0][0] * u0[0] + a[1][0] * u0[1]) / n0, (a[0][1] * u0[0] + a[1][1] * u0[1]) / n0];
    let nw = dot(&w, &w);
    let u1 = [w[0] / nw, w[1] / nw];
    // adjoints are the rows of [U0 U1]^{-1}
    let d = u0[0] * u1[1] - u1[0] * u0[1];
    let u0s = [u1[1] / d, -u1[0] / d];
    let u1s = [-u0[1] / d, u0[0] / d];
    Ok(TuringData { kc: T::one(), u0, u1, u0s, u1s })
}

pub fn coefficients<T: Real>(sys: &RDSystem<T>) -> Result<BifCoefficients<T>> {
    let td = verify_turing(sys)?;
    Ok(coefficients_with(sys, &td))
}

pub fn coefficients_with<T: Real>(sys: &RDSystem<T>, td: &TuringData<T>) -> BifCoefficients<T> {
    let m2u0 = mat_vec(&sys.m2, &td.u0);
    let c0 = T::c(0.25) * -dot(&td.u1s, &m2u0);
    let q00 = sys.quad(&td.u0, &td.u0);
    let q01 = sys.quad(&td.u0, &td.u1);
    let c000 = sys.cubic(&td.u0, &td.u0, &td.u0);
    let p = dot(&td.u1s, &q00);
    let inner = T::c(5.0 / 6.0) * (dot(&td.u0s, &q00) + dot(&td.u1s, &q01)) + T::c(19.0 / 18.0) * p;
    let c3 = -(inner * p + T::c(0.75) * dot(&td.u1s, &c000));
    let nu = T::c(0.5) * (T::PI() / T::c(6.0)).sqrt() * p;
    BifCoefficients { c0, c3, nu }
}

pub fn check_subcriticality<T: Real>(sys: &RDSystem<T>) -> Result<bool> {
    let c = coefficients(sys)?;
    Ok(c.c0 > T::zero() && c.c3 < T::zero())
}

/// Parses the plain-text system format.
///
/// ```text
/// # comment
/// label = brusselator-ish
/// M1 = -1 1 0 -1          # row-major
/// M2 = 0 0 -1 0
/// Q0 = 0 0 0 0            # output component 0, 2x2 row-major
/// Q1 = 1.6 0 0 0
/// C0 = 0 0 0 0 0 0 0 0    # output component 0, index (i,j,k) row-major
/// C1 = -1 0 0 0 0 0 0 0
/// ```
///
/// A line `sh gamma=<val>` yields the Swift–Hohenberg system directly.
/// Missing Q/C blocks default to zero; M1 and M2 are required.
pub fn parse_system(text: &str) -> Result<RDSystem<f64>> {
    let mut m1 = None;
    let mut m2 = None;
    let mut q = [[[0.0; 2]; 2]; 2];
    let mut c = [[[[0.0; 2]; 2]; 2]; 2];
    let mut label = String::from("custom");
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse(format!("line {}: {msg}", lineno + 1));
        if let Some(rest) = line.strip_prefix("sh") {
            if rest.is_empty() || rest.starts_with(char::is_whitespace) {
                let rest = rest.trim();
                let g = rest
                    .strip_prefix("gamma")
                    .map(|r| r.trim_start().trim_start_matches('=').trim())
                    .ok_or_else(|| err(format!("expected `sh gamma=<val>`, got `{line}`")))?;
                let g: f64 = g.parse().map_err(|_| err(format!("bad gamma `{g}`")))?;
                return Ok(sh_system(g));
            }
        }
        let (key, val) = line.split_once('=').ok_or_else(|| err(format!("expected key=value, got `{line}`")))?;
        let key = key.trim();
        let val = val.trim();
        if key == "label" {
            label = val.to_string();
            continue;
        }
        let nums: Vec<f64> = val
            .split(|ch: char| ch.is_whitespace() || ch == ',')
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>().map_err(|_| err(format!("bad number `{s}`"))))
            .collect::<Result<_>>()?;
        let want = |n: usize| -> Result<()> {
            if nums.len() != n {
                Err(err(format!("{key} needs {n} numbers, got {}", nums.len())))
            } else {
                Ok(())
            }
        };
        match key {
            "M1" | "M2" => {
                want(4)?;
                let mat = [[nums[0], nums[1]], [nums[2], nums[3]]];
                if key == "M1" {
                    m1 = Some(mat)
                } else {
                    m2 = Some(mat)
                }
            }
            "Q0" | "Q1" => {
                want(4)?;
                let o = usize::from(key == "Q1");
                q[o] = [[nums[0], nums[1]], [nums[2], nums[3]]];
            }
            "C0" | "C1" => {
                want(8)?;
                let o = usize::from(key == "C1");
                for (idx, v) in nums.iter().enumerate() {
                    c[o][idx >> 2][(idx >> 1) & 1][idx & 1] = *v;
                }
            }
            _ => return Err(err(format!("unknown key `{key}`"))),
        }
    }
    let m1 = m1.ok_or_else(|| Error::Parse("missing M1".into()))?;
    let m2 = m2.ok_or_else(|| Error::Parse("missing M2".into()))?;
    Ok(RDSystem::new(m1, m2, q, c, &label))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sh_turing_vectors() {
        let td = verify_turing(&sh_system(1.6)).unwrap();
        assert_eq!(td.kc, 1.0);
        assert_eq!(td.u0, [1.0, 0.0]);
        assert_eq!(td.u1, [0.0, 1.0]);
        assert_eq!(td.u0s, [1.0, 0.0]);
        assert_eq!(td.u1s, [0.0, 1.0]);
    }

    #[test]
    fn sh_gamma_zero_has_no_quadratic() {
        assert!(!sh_system(0.0).has_quadratic());
        assert!(sh_system(1.6).has_quadratic());
    }

    #[test]
    fn rejects_non_double_eigenvalues() {
        let z = [[0.0f64; 2]; 2];
        let q = [z, z];
        let c = [[z, z], [z, z]];
        let s = RDSystem::new([[-1.0, 0.0], [0.0, -1.0]], z, q, c, "minus identity");
        assert!(matches!(verify_turing(&s), Err(Error::NotDoubleEigenvalue(_))));
        let s = RDSystem::new([[-1.0, 0.0], [0.0, -2.0]], z, q, c, "diag");
        assert!(matches!(verify_turing(&s), Err(Error::NotDoubleEigenvalue(_))));
        let s = RDSystem::new([[-2.0, 0.0], [0.0, -3.0]], z, q, c, "stable");
        assert!(matches!(verify_turing(&s), Err(Error::NotTuring(_))));
    }

    #[test]
    fn sh_coefficients() {
        let c = coefficients(&sh_system(1.6f64)).unwrap();
        assert!((c.c0 - 0.25).abs() < 1e-15);
        assert!((c.c3 - (0.75 - 19.0 * 2.56 / 18.0)).abs() < 1e-14);
        assert!((c.c3 + 1.952222222222222).abs() < 1e-12);
        assert!(check_subcriticality(&sh_system(1.6)).unwrap());
        assert!(!check_subcriticality(&sh_system(0.5)).unwrap());
        let z = [[0.0f64; 2]; 2];
        let mut s = sh_system(1.6);
        s.m2 = z;
        assert!(!check_subcriticality(&s).unwrap());
    }

    /// Independent evaluation of the coefficient formula on a non-SH system whose chain is
    /// worked out by hand: M1 = [[-2, 1], [-1, 0]] has (M1+I) = [[-1, 1], [-1, 1]].
    #[test]
    fn general_system_chain() {
        let z = [[0.0f64; 2]; 2];
        let sys = RDSystem::new([[-2.0, 1.0], [-1.0, 0.0]], z, [z, z], [[z, z], [z, z]], "x");
        let td = verify_turing(&sys).unwrap();
        // kernel (1,1); A = U0 (-1, 1)ᵀ so U1 = (-1,1)/2
        assert_eq!(td.u0, [1.0, 1.0]);
        assert!((td.u1[0] + 0.5).abs() < 1e-15 && (td.u1[1] - 0.5).abs() < 1e-15);
        let a = [[-1.0f64, 1.0], [-1.0, 1.0]];
        let au1 = mat_vec(&a, &td.u1);
        assert!((au1[0] - 1.0).abs() < 1e-15 && (au1[1] - 1.0).abs() < 1e-15);
        for (i, s) in [td.u0s, td.u1s].iter().enumerate() {
            for (j, u) in [td.u0, td.u1].iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot(s, u) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn parse_roundtrip_and_errors() {
        let s = parse_system("sh gamma=1.6").unwrap();
        assert_eq!(s, sh_system(1.6));
        let text = "label = sh by hand\nM1 = -1 1 0 -1\nM2 = 0 0 -1 0\nQ1 = 1.6 0 0 0\nC1 = -1 0 0 0 0 0 0 0\n";
        let p = parse_system(text).unwrap();
        assert_eq!(p.q_coeffs(), sh_system(1.6).q_coeffs());
        assert_eq!(p.c_coeffs(), sh_system(1.6).c_coeffs());
        assert!(matches!(parse_system("M1 = 1 2 3"), Err(Error::Parse(_))));
        assert!(matches!(parse_system("M1 = -1 1 0 -1"), Err(Error::Parse(_))));
        assert!(matches!(parse_system("bogus"), Err(Error::Parse(_))));
    }

    #[test]
    fn storage_is_symmetrised() {
        let z = [[0.0f64; 2]; 2];
        let mut c1 = [z, z];
        c1[0][0][1] = 3.0;
        let s = RDSystem::new([[-1.0, 1.0], [0.0, -1.0]], z, [z, [[0.0, 2.0], [0.0, 0.0]]], [[z, z], c1], "asym");
        let q = s.q_coeffs();
        assert_eq!(q[1][0][1], q[1][1][0]);
        let c = s.c_coeffs();
        assert_eq!(c[1][0][0][1], c[1][1][0][0]);
        assert_eq!(c[1][0][1][0], 1.0);
    }

    fn arb_vec() -> impl Strategy<Value = [f64; 2]> {
        (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| [a, b])
    }

    proptest! {
        #[test]
        fn c3_closed_form(g in 0.0..3.0f64) {
            let c = coefficients(&sh_system(g)).unwrap();
            prop_assert!((c.c3 - (0.75 - 19.0 * g * g / 18.0)).abs() < 1e-12);
            prop_assert!((c.c0 - 0.25).abs() < 1e-12);
            prop_assert!((c.nu - 0.5 * (std::f64::consts::PI / 6.0).sqrt() * g).abs() < 1e-12);
        }

        #[test]
        fn multilinearity(u in arb_vec(), v in arb_vec(), w in arb_vec(), x in arb_vec(), al in -2.0..2.0f64, be in -2.0..2.0f64) {
            let sys = sh_system(1.3);
            let comb = [al * u[0] + be * v[0], al * u[1] + be * v[1]];
            let lhs = sys.quad(&comb, &w);
            let (a, b) = (sys.quad(&u, &w), sys.quad(&v, &w));
            for k in 0..2 {
                prop_assert!((lhs[k] - (al * a[k] + be * b[k])).abs() < 1e-12);
            }
            let lhs = sys.cubic(&w, &comb, &x);
            let (a, b) = (sys.cubic(&w, &u, &x), sys.cubic(&w, &v, &x));
            for k in 0..2 {
                prop_assert!((lhs[k] - (al * a[k] + be * b[k])).abs() < 1e-12);
            }
        }
    }
}
