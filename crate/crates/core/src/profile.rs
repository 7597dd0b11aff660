//! Piecewise radial amplitudes of a localised dihedral ring and the planar
//! field built from them.
//!
//! Mode `n` of the approximate solution is
//!
//! ```text
//! core (r ≤ r0):  2aₙ μ^{3/4} q0 √(π/2) [r J_{mn+1}(r) Û0 + 2 J_{mn}(r) Û1]
//! middle:         2aₙ μ^{3/4} q0 [√r sin ψₙ Û0 + 2 r^{-1/2} cos ψₙ Û1]
//! far:            2aₙ μ^{1/2} [q(s) sin ψₙ Û0 + 2 √μ dq(s) cos ψₙ Û1],  s = √μ r
//! ```
//!
//! with `ψₙ = r − mnπ/2 − π/4`. The `√μ` on the far `Û1` term is the chain
//! rule: `(d/dr + 1/(2r)) q(√μ r) = √μ dq(s)`. Since `q(s) ≈ q0 √s` for small
//! `s`, the far branch already reproduces the middle one, so by default only
//! core and far are used and the middle branch is kept for [`Regions::Strict`].

use std::io::{BufRead, Write};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::glradial::{find_homoclinic, GLSolution};
use crate::rdsys::{coefficients_with, dot, verify_turing, BifCoefficients, RDSystem, TuringData, Vec2};
use crate::scalar::Real;
use crate::specfun::bessel_j;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regions {
    /// Core up to `r0`, far field beyond.
    TwoRegion,
    /// Core, middle up to `r1/√μ`, far field.
    Strict,
    /// Two-region with a cosine ramp over `[0.95 r0, 1.05 r0]`.
    Blend,
    /// Core branch times the envelope ratios `q(s)/(q0√s)` (on Û0) and
    /// `√s dq(s)/q0` (on Û1): uniform in `r`, reduces to core for small `r`
    /// and to the far branch once `J` is asymptotic. Used to seed Newton.
    Composite,
}

#[derive(Clone, Debug)]
pub struct ProfileContext<T> {
    pub m: u32,
    pub n: usize,
    pub mu: T,
    pub a: Vec<T>,
    pub r0: T,
    pub r1: T,
    pub gl: GLSolution<T>,
    pub turing: TuringData<T>,
    pub coeffs: BifCoefficients<T>,
    pub sign: T,
    pub regions: Regions,
}

/// `max(60, 2(mN)² + 20)`.
pub fn default_r0<T: Real>(m: u32, n: usize) -> T {
    let mn = T::from_usize_(m as usize * n);
    T::c(60.0).max(T::c(2.0) * mn * mn + T::c(20.0))
}

impl<T: Real> ProfileContext<T> {
    /// Checks the Turing hypotheses, computes `(c0, c3)` and the homoclinic.
    pub fn new(sys: &RDSystem<T>, m: u32, a: &[T], mu: T) -> Result<Self> {
        let turing = verify_turing(sys)?;
        let coeffs = coefficients_with(sys, &turing);
        let gl = find_homoclinic(coeffs.c0, coeffs.c3)?;
        Self::from_parts(turing, coeffs, gl, m, a, mu)
    }

    /// Builds a context around an already computed homoclinic.
    pub fn from_parts(turing: TuringData<T>, coeffs: BifCoefficients<T>, gl: GLSolution<T>, m: u32, a: &[T], mu: T) -> Result<Self> {
        if !(mu > T::zero()) {
            return Err(Error::DomainError(format!("mu must be positive, got {mu}")));
        }
        if a.is_empty() {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        let n = a.len() - 1;
        Ok(ProfileContext {
            m,
            n,
            mu,
            a: a.to_vec(),
            r0: default_r0(m, n),
            r1: T::c(0.5),
            gl,
            turing,
            coeffs,
            sign: T::one(),
            regions: Regions::TwoRegion,
        })
    }

    pub fn with_mu(&self, mu: T) -> Result<Self> {
        let mut c = self.clone();
        if !(mu > T::zero()) {
            return Err(Error::DomainError(format!("mu must be positive, got {mu}")));
        }
        c.mu = mu;
        Ok(c)
    }

    /// Region ordering; the `r1/√μ > r0` requirement only matters when the
    /// middle branch is in use.
    pub fn validate(&self) -> Result<()> {
        let min_r0 = T::c(2.0) * T::from_usize_(self.m as usize * self.n).powi(2) + T::c(20.0);
        if self.r0 < min_r0 {
            return Err(Error::DomainError(format!("r0 = {} below 2(mN)² + 20 = {min_r0}", self.r0)));
        }
        if !(self.r1 > T::zero() && self.r1 <= T::one()) {
            return Err(Error::DomainError(format!("r1 = {} outside (0, 1]", self.r1)));
        }
        if self.regions == Regions::Strict && self.r1 / self.mu.sqrt() <= self.r0 {
            return Err(Error::DomainError(format!("r1/√μ = {} does not exceed r0 = {}", self.r1 / self.mu.sqrt(), self.r0)));
        }
        if self.sign.abs() != T::one() {
            return Err(Error::DomainError(format!("sign must be ±1, got {}", self.sign)));
        }
        Ok(())
    }

    fn psi(&self, n: usize, r: T) -> T {
        r - T::from_usize_(self.m as usize * n) * T::FRAC_PI_2() - T::FRAC_PI_4()
    }

    fn combine(&self, c0: T, c1: T) -> Vec2<T> {
        let (u0, u1) = (self.turing.u0, self.turing.u1);
        [c0 * u0[0] + c1 * u1[0], c0 * u0[1] + c1 * u1[1]]
    }

    /// Core branch without the `2aₙ` prefactor.
    fn core(&self, n: usize, r: T) -> Vec2<T> {
        let order = self.m * n as u32;
        let jn = bessel_j(order, r).expect("r >= 0");
        // J_{ν+1} = ν/r J_ν − J_ν'
        let jp = if r == T::zero() {
            T::zero()
        } else {
            T::from_usize_(order as usize) / r * jn.value - jn.derivative
        };
        let k = self.mu.powf(T::c(0.75)) * self.gl.q0 * (T::PI() / T::c(2.0)).sqrt();
        self.combine(k * r * jp, k * T::c(2.0) * jn.value)
    }

    fn composite(&self, n: usize, r: T) -> Vec2<T> {
        let c = self.core(n, r);
        let s = self.mu.sqrt() * r;
        let (e0, e1) = if s == T::zero() {
            (T::one(), T::one())
        } else {
            let (q, dq) = self.gl.evaluate(s);
            (q / (self.gl.q0 * s.sqrt()), dq * s.sqrt() / self.gl.q0)
        };
        // back to (Û0, Û1) coordinates through the adjoints
        let (p0, p1) = (dot(&self.turing.u0s, &c), dot(&self.turing.u1s, &c));
        self.combine(p0 * e0, p1 * e1)
    }

    fn middle(&self, n: usize, r: T) -> Vec2<T> {
        let psi = self.psi(n, r);
        let k = self.mu.powf(T::c(0.75)) * self.gl.q0;
        self.combine(k * r.sqrt() * psi.sin(), k * T::c(2.0) / r.sqrt() * psi.cos())
    }

    fn far(&self, n: usize, r: T) -> Vec2<T> {
        let psi = self.psi(n, r);
        let sm = self.mu.sqrt();
        let (q, dq) = self.gl.evaluate(sm * r);
        self.combine(sm * q * psi.sin(), sm * T::c(2.0) * sm * dq * psi.cos())
    }

    /// Branches at `r` before the `2aₙ·sign` factor.
    fn shape(&self, n: usize, r: T) -> Vec2<T> {
        match self.regions {
            Regions::TwoRegion => {
                if r <= self.r0 {
                    self.core(n, r)
                } else {
                    self.far(n, r)
                }
            }
            Regions::Strict => {
                if r <= self.r0 {
                    self.core(n, r)
                } else if r <= self.r1 / self.mu.sqrt() {
                    self.middle(n, r)
                } else {
                    self.far(n, r)
                }
            }
            Regions::Blend => {
                let (lo, hi) = (T::c(0.95) * self.r0, T::c(1.05) * self.r0);
                if r <= lo {
                    self.core(n, r)
                } else if r >= hi {
                    self.far(n, r)
                } else {
                    let t = (r - lo) / (hi - lo);
                    let w = T::c(0.5) * (T::one() - (T::PI() * t).cos());
                    let (c, f) = (self.core(n, r), self.far(n, r));
                    [c[0] + w * (f[0] - c[0]), c[1] + w * (f[1] - c[1])]
                }
            }
            Regions::Composite => self.composite(n, r),
        }
    }

    /// `uₙ(r)`; zero for `n > N`.
    pub fn radial_amplitude(&self, n: usize, r: T) -> Vec2<T> {
        let Some(&an) = self.a.get(n) else {
            return [T::zero(); 2];
        };
        if an == T::zero() {
            return [T::zero(); 2];
        }
        let v = self.shape(n, r);
        let k = T::c(2.0) * an * self.sign;
        [k * v[0], k * v[1]]
    }

    /// Relative jump of mode `n` between the core and far branches at `r0`.
    pub fn seam_mismatch(&self, n: usize) -> T {
        let (c, f) = (self.core(n, self.r0), self.far(n, self.r0));
        let d = ((c[0] - f[0]).powi(2) + (c[1] - f[1]).powi(2)).sqrt();
        d / (c[0] * c[0] + c[1] * c[1]).sqrt().max(T::min_positive_value())
    }

    /// `u(r, θ) = u0(r) + 2 Σ uₙ(r) cos(mnθ)`.
    pub fn field_vector(&self, r: T, theta: T) -> Vec2<T> {
        let mut u = [T::zero(); 2];
        for n in 0..=self.n {
            let un = self.radial_amplitude(n, r);
            let w = if n == 0 { T::one() } else { T::c(2.0) * (T::from_usize_(self.m as usize * n) * theta).cos() };
            u[0] += w * un[0];
            u[1] += w * un[1];
        }
        u
    }

    /// `(⟨Û0*, u⟩, ⟨Û1*, u⟩)` at polar `(r, θ)`.
    pub fn projections(&self, r: T, theta: T) -> (T, T) {
        let u = self.field_vector(r, theta);
        (dot(&self.turing.u0s, &u), dot(&self.turing.u1s, &u))
    }

    /// Largest `|uₙ|` over `[0, r_max]` sampled every `dr`.
    pub fn max_amplitude(&self, n: usize, r_max: T, dr: T) -> (T, T) {
        let steps = (r_max / dr).to_f64_().ceil() as usize;
        (0..=steps)
            .map(|k| {
                let r = dr * T::from_usize_(k);
                let u = self.radial_amplitude(n, r);
                (r, (u[0] * u[0] + u[1] * u[1]).sqrt())
            })
            .fold((T::zero(), T::zero()), |m, p| if p.1 > m.1 { p } else { m })
    }
}

/// Planar sampling layout.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PlanarGrid<T> {
    /// Square `[−half_width, half_width]²` with `points` samples per side.
    Square { half_width: T, points: usize },
    /// The same lattice restricted to the closed disc of that radius.
    Disc { radius: T, points: usize },
}

impl<T: Real> PlanarGrid<T> {
    fn lattice(&self) -> (T, usize) {
        match *self {
            PlanarGrid::Square { half_width, points } | PlanarGrid::Disc { radius: half_width, points } => (half_width, points),
        }
    }

    /// Sample coordinates in row-major order (y outer, x inner).
    pub fn points(&self) -> Vec<(T, T)> {
        let (hw, p) = self.lattice();
        let coord = |i: usize| if p == 1 { T::zero() } else { -hw + T::c(2.0) * hw * T::from_usize_(i) / T::from_usize_(p - 1) };
        let mut out = Vec::with_capacity(p * p);
        for j in 0..p {
            for i in 0..p {
                let (x, y) = (coord(i), coord(j));
                if let PlanarGrid::Disc { radius, .. } = *self {
                    if x * x + y * y > radius * radius * (T::one() + T::epsilon() * T::c(4.0)) {
                        continue;
                    }
                }
                out.push((x, y));
            }
        }
        out
    }

    fn extent(&self) -> T {
        match *self {
            PlanarGrid::Square { half_width, .. } => half_width * T::SQRT_2(),
            PlanarGrid::Disc { radius, .. } => radius,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldMeta {
    pub m: u32,
    pub n: usize,
    pub mu: f64,
    pub id: String,
    /// Extra `key=value` pairs echoed in the header.
    pub extra: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RingField<T> {
    pub points: Vec<(T, T)>,
    /// `⟨Û0*, u⟩` per point.
    pub values: Vec<T>,
    /// `⟨Û1*, u⟩` per point, when requested.
    pub values1: Option<Vec<T>>,
    pub radial_grid: Vec<T>,
    /// `mode_amplitudes[n][k] = uₙ(radial_grid[k])`.
    pub mode_amplitudes: Vec<Vec<Vec2<T>>>,
    pub meta: FieldMeta,
}

/// Evaluates the field on every grid point (rows in parallel, order kept).
pub fn synthesize_field<T: Real>(ctx: &ProfileContext<T>, grid: &PlanarGrid<T>, both: bool, id: &str) -> Result<RingField<T>> {
    let (_, p) = grid.lattice();
    if p == 0 {
        return Err(Error::DomainError("grid resolution must be positive".into()));
    }
    let points = grid.points();
    let proj: Vec<(T, T)> = points
        .par_iter()
        .map(|&(x, y)| {
            let r = (x * x + y * y).sqrt();
            ctx.projections(r, y.atan2(x))
        })
        .collect();
    let dr = T::c(0.05);
    let steps = (grid.extent() / dr).to_f64_().ceil() as usize;
    let radial_grid: Vec<T> = (0..=steps).map(|k| dr * T::from_usize_(k)).collect();
    let mode_amplitudes = (0..=ctx.n).map(|n| radial_grid.iter().map(|&r| ctx.radial_amplitude(n, r)).collect()).collect();
    let extra = vec![
        ("sign".into(), format!("{}", ctx.sign)),
        ("r0".into(), format!("{}", ctx.r0)),
        ("r1".into(), format!("{}", ctx.r1)),
        ("regions".into(), format!("{:?}", ctx.regions)),
        ("c0".into(), format!("{:e}", ctx.coeffs.c0)),
        ("c3".into(), format!("{:e}", ctx.coeffs.c3)),
        ("q0".into(), format!("{:e}", ctx.gl.q0)),
        ("a".into(), ctx.a.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(" ")),
    ];
    Ok(RingField {
        points,
        values: proj.iter().map(|p| p.0).collect(),
        values1: both.then(|| proj.iter().map(|p| p.1).collect()),
        radial_grid,
        mode_amplitudes,
        meta: FieldMeta { m: ctx.m, n: ctx.n, mu: ctx.mu.to_f64_(), id: id.to_string(), extra },
    })
}

/// Largest deviation between the field of `ℛa` and the field of `a` rotated
/// by `π/m`, over the given polar points.
pub fn r_rotation_deviation<T: Real>(ctx: &ProfileContext<T>, polar: &[(T, T)]) -> T {
    let mut rotated = ctx.clone();
    rotated.a = ctx.a.iter().enumerate().map(|(n, v)| if n % 2 == 1 { -*v } else { *v }).collect();
    let shift = T::PI() / T::from_usize_(ctx.m as usize);
    polar.iter().fold(T::zero(), |acc, &(r, th)| {
        let (p, _) = rotated.projections(r, th);
        let (q, _) = ctx.projections(r, th + shift);
        acc.max((p - q).abs())
    })
}

/// CSV with `# key=value` header lines and `x,y,value[,value1]` rows.
pub fn export_field<T: Real, W: Write>(field: &RingField<T>, mut out: W) -> Result<()> {
    let m = &field.meta;
    writeln!(out, "# m={} N={} mu={:e} id={}", m.m, m.n, m.mu, m.id)?;
    for (k, v) in &m.extra {
        writeln!(out, "# {k}={v}")?;
    }
    match &field.values1 {
        None => {
            writeln!(out, "x,y,value")?;
            for ((x, y), v) in field.points.iter().zip(&field.values) {
                writeln!(out, "{x:e},{y:e},{v:e}")?;
            }
        }
        Some(v1) => {
            writeln!(out, "x,y,value,value1")?;
            for (((x, y), v), w) in field.points.iter().zip(&field.values).zip(v1) {
                writeln!(out, "{x:e},{y:e},{v:e},{w:e}")?;
            }
        }
    }
    Ok(())
}

fn parse_num<T: Real>(s: &str) -> Result<T> {
    let v: f64 = s.trim().parse().map_err(|_| Error::Parse(format!("bad number {s:?}")))?;
    Ok(T::c(v))
}

/// Reads back what [`export_field`] wrote; radial data is not stored.
pub fn import_field<T: Real, R: BufRead>(input: R) -> Result<RingField<T>> {
    let mut meta = FieldMeta { m: 0, n: 0, mu: 0.0, id: String::new(), extra: Vec::new() };
    let mut points = Vec::new();
    let mut values = Vec::new();
    let mut values1: Option<Vec<T>> = None;
    let mut first_header = true;
    for line in input.lines() {
        let line = line?;
        if let Some(h) = line.strip_prefix("# ") {
            if first_header {
                first_header = false;
                for kv in h.splitn(4, ' ') {
                    let (k, v) = kv.split_once('=').ok_or_else(|| Error::Parse(format!("bad header {h:?}")))?;
                    match k {
                        "m" => meta.m = v.parse().map_err(|_| Error::Parse(format!("bad m {v:?}")))?,
                        "N" => meta.n = v.parse().map_err(|_| Error::Parse(format!("bad N {v:?}")))?,
                        "mu" => meta.mu = v.parse().map_err(|_| Error::Parse(format!("bad mu {v:?}")))?,
                        "id" => meta.id = v.to_string(),
                        _ => return Err(Error::Parse(format!("unknown header key {k:?}"))),
                    }
                }
            } else {
                let (k, v) = h.split_once('=').ok_or_else(|| Error::Parse(format!("bad header {h:?}")))?;
                meta.extra.push((k.to_string(), v.to_string()));
            }
            continue;
        }
        if line.starts_with("x,y") {
            if line.ends_with("value1") {
                values1 = Some(Vec::new());
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        let want = if values1.is_some() { 4 } else { 3 };
        if cols.len() != want {
            return Err(Error::Parse(format!("expected {want} columns: {line:?}")));
        }
        points.push((parse_num(cols[0])?, parse_num(cols[1])?));
        values.push(parse_num(cols[2])?);
        if let Some(v1) = values1.as_mut() {
            v1.push(parse_num(cols[3])?);
        }
    }
    Ok(RingField { points, values, values1, radial_grid: Vec::new(), mode_amplitudes: Vec::new(), meta })
}

/// Radial dump `n,r,u_n_comp0,u_n_comp1`.
pub fn export_radial<T: Real, W: Write>(field: &RingField<T>, mut out: W) -> Result<()> {
    writeln!(out, "n,r,u_n_comp0,u_n_comp1")?;
    for (n, modes) in field.mode_amplitudes.iter().enumerate() {
        for (r, u) in field.radial_grid.iter().zip(modes) {
            writeln!(out, "{n},{r:e},{:e},{:e}", u[0], u[1])?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdsys::sh_system;
    use proptest::prelude::*;
    use std::sync::OnceLock;

    fn sh_ctx(m: u32, a: &[f64], mu: f64) -> ProfileContext<f64> {
        static BASE: OnceLock<ProfileContext<f64>> = OnceLock::new();
        let base = BASE.get_or_init(|| ProfileContext::new(&sh_system(1.6), 2, &[0.0, 0.577], 0.08).unwrap());
        let mut c = base.clone();
        c.m = m;
        c.a = a.to_vec();
        c.n = a.len() - 1;
        c.r0 = default_r0(m, c.n);
        c.mu = mu;
        c
    }

    #[test]
    fn origin_projection_vanishes() {
        let ctx = sh_ctx(2, &[0.447, 0.365], 0.05);
        for n in 0..=1 {
            let u = ctx.radial_amplitude(n, 0.0);
            assert!(dot(&ctx.turing.u0s, &u).abs() < 1e-15);
        }
        assert!(ctx.projections(0.0, 0.3).0.abs() < 1e-15);
    }

    #[test]
    fn zero_coefficient_gives_zero_mode() {
        let ctx = sh_ctx(2, &[0.0, 0.577], 0.05);
        for r in [0.0, 3.0, 80.0, 400.0] {
            assert_eq!(ctx.radial_amplitude(0, r), [0.0, 0.0]);
        }
    }

    #[test]
    fn core_matches_middle_asymptotically() {
        // r J_{ν+1}(r) √(π/2) → √r sin ψ at large r, so core and middle agree to O(1/r)
        let ctx = sh_ctx(2, &[0.0, 0.577], 0.01);
        for r in [200.0, 800.0] {
            let (c, m) = (ctx.core(1, r), ctx.middle(1, r));
            let scale = ctx.mu.powf(0.75) * ctx.gl.q0 * r.sqrt();
            assert!((c[0] - m[0]).abs() / scale < 3.0 / r, "r={r}");
        }
    }

    #[test]
    fn seam_shrinks_with_mu() {
        let ctx = sh_ctx(2, &[0.0, 0.577], 0.01);
        let e1 = ctx.seam_mismatch(1);
        let e2 = ctx.with_mu(0.005).unwrap().seam_mismatch(1);
        assert!(e2 < e1, "{e2} >= {e1}");
        // deep in the asymptotic regime the jump is O(1/r0 + μ^{1/4})
        let mu = 1e-4;
        let e = ctx.with_mu(mu).unwrap().seam_mismatch(1);
        assert!(e < 3.0 * (1.0 / ctx.r0 + mu.powf(0.25)), "{e}");
    }

    #[test]
    fn axisymmetric_field_is_radial() {
        let ctx = sh_ctx(3, &[1.0, 0.0, 0.0], 0.04);
        for r in [0.5, 4.0, 17.0, 90.0] {
            let v0 = ctx.projections(r, 0.0).0;
            for th in [0.3, 1.1, 2.9, -2.0] {
                assert!((ctx.projections(r, th).0 - v0).abs() <= 1e-12 * v0.abs().max(1e-3));
            }
        }
    }

    #[test]
    fn dm_minus_half_turn_negates() {
        let ctx = sh_ctx(2, &[0.0, 0.577], 0.08);
        for (r, th) in [(2.0, 0.1), (9.0, 1.3), (15.0, -0.7)] {
            let (p, q) = (ctx.projections(r, th).0, ctx.projections(r, th + std::f64::consts::PI / 2.0).0);
            assert!((p + q).abs() < 1e-12);
        }
    }

    #[test]
    fn strict_mode_needs_ordered_regions() {
        let mut ctx = sh_ctx(2, &[0.0, 0.577], 0.04);
        ctx.validate().unwrap();
        ctx.regions = Regions::Strict;
        assert!(ctx.validate().is_err());
        ctx.mu = 1e-5;
        ctx.validate().unwrap();
        ctx.r1 = 1.5;
        assert!(ctx.validate().is_err());
    }

    #[test]
    fn blend_is_continuous() {
        let mut ctx = sh_ctx(2, &[0.0, 0.577], 0.01);
        ctx.regions = Regions::Blend;
        for r in [0.95 * ctx.r0, 1.05 * ctx.r0] {
            let (a, b) = (ctx.radial_amplitude(1, r - 1e-9), ctx.radial_amplitude(1, r + 1e-9));
            assert!((a[0] - b[0]).abs() < 1e-8);
        }
    }

    #[test]
    fn composite_joins_core_and_far() {
        let mut ctx = sh_ctx(2, &[0.0, 0.577], 0.01);
        let core = ctx.radial_amplitude(1, 0.7);
        let far = ctx.radial_amplitude(1, 150.0);
        ctx.regions = Regions::Composite;
        let (cc, cf) = (ctx.radial_amplitude(1, 0.7), ctx.radial_amplitude(1, 150.0));
        assert!((cc[0] - core[0]).abs() < 1e-3 * core[0].abs());
        assert!((cf[0] - far[0]).abs() < 0.05 * far[0].abs().max(1e-12) + 1e-12, "{cf:?} {far:?}");
    }

    #[test]
    fn csv_roundtrip_is_exact() {
        let ctx = sh_ctx(2, &[0.447, 0.365], 0.08);
        let f = synthesize_field(&ctx, &PlanarGrid::Square { half_width: 5.0, points: 7 }, true, "t").unwrap();
        let mut buf = Vec::new();
        export_field(&f, &mut buf).unwrap();
        let g: RingField<f64> = import_field(&buf[..]).unwrap();
        assert_eq!((g.points, g.values, g.values1, g.meta), (f.points, f.values, f.values1, f.meta));
    }

    #[test]
    fn csv_shapes() {
        let ctx = sh_ctx(2, &[0.447, 0.365], 0.08);
        let two = synthesize_field(&ctx, &PlanarGrid::Square { half_width: 1.0, points: 2 }, false, "t").unwrap();
        let mut buf = Vec::new();
        export_field(&two, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
        assert_eq!(rows.len(), 4);
        assert!(rows[0].starts_with("-1e0,-1e0,") && rows[1].starts_with("1e0,-1e0,"));
        let empty = RingField::<f64> { points: vec![], values: vec![], values1: None, ..two };
        let mut buf = Vec::new();
        export_field(&empty, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().all(|l| l.starts_with('#') || l == "x,y,value"));
    }

    #[test]
    fn r_rotation_identity() {
        let ctx = sh_ctx(2, &[0.447, 0.365], 0.08);
        let pts: Vec<(f64, f64)> = (0..50).map(|k| (0.37 * k as f64, 0.13 * k as f64 - 3.0)).collect();
        assert!(r_rotation_deviation(&ctx, &pts) < 1e-8);
        let axis = sh_ctx(2, &[1.0, 0.0], 0.08);
        assert!(r_rotation_deviation(&axis, &pts) < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn dihedral_membership(r in 0.0f64..120.0, th in -3.2f64..3.2, m in 1u32..5) {
            let ctx = sh_ctx(m, &[0.447, 0.365], 0.02);
            let v = ctx.projections(r, th).0;
            let turn = 2.0 * std::f64::consts::PI / m as f64;
            prop_assert!((v - ctx.projections(r, th + turn).0).abs() <= 1e-10);
            prop_assert!((v - ctx.projections(r, -th).0).abs() <= 1e-10);
        }

        #[test]
        fn pitchfork_pair(r in 0.0f64..120.0, th in -3.2f64..3.2) {
            let ctx = sh_ctx(2, &[0.447, 0.365], 0.02);
            let mut neg = ctx.clone();
            neg.sign = -1.0;
            prop_assert_eq!(ctx.projections(r, th).0, -neg.projections(r, th).0);
        }
    }
}
