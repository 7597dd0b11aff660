//! Finite-difference discretisation of the radial Galerkin system
//!
//! ```text
//! 0 = Δₙuₙ − M1 uₙ − μ M2 uₙ − Σ_{i+j=n} Q(u_|i|, u_|j|) − Σ_{i+j+k=n} C(u_|i|, u_|j|, u_|k|)
//! ```
//!
//! with `Δₙ = ∂rr + r⁻¹∂r − (mn)² r⁻²` and `|i|, |j|, |k| ≤ N`.
//!
//! Nodes are cell centred, `r_i = (i + ½)h`. At `r_0 = h/2` the ghost value
//! `u_{−1}` enters the stencil with weight `1/h² − 1/(2h r_0) = 0`, so the
//! parity conditions at the origin are satisfied without storing ghosts.
//! The outer face at `R_max = M h` is Dirichlet: `u_M = −u_{M−1}`.
//!
//! Unknowns are node-major: `u[i·B + 2n + c]`, `B = 2(N+1)`, so the Jacobian
//! is block tridiagonal and fits a band with `kl = ku = 2B − 1`.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{norm2, norm_inf, Banded};
use crate::profile::ProfileContext;
use crate::rdsys::{mat_vec, RDSystem, Vec2};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct GalerkinGrid<T> {
    pub r_max: T,
    pub h: T,
    pub nodes: Vec<T>,
    pub n_modes: usize,
    pub m: u32,
}

impl<T: Real> GalerkinGrid<T> {
    /// `round(r_max/h)` cell-centred nodes on `(0, r_max)`.
    pub fn new(r_max: T, h: T, m: u32, n: usize) -> Result<Self> {
        if !(h > T::zero() && r_max > h) {
            return Err(Error::DomainError(format!("need 0 < h < r_max, got h={h}, r_max={r_max}")));
        }
        let cells = (r_max / h).round().to_f64_() as usize;
        let h = r_max / T::from_usize_(cells);
        let nodes = (0..cells).map(|i| (T::from_usize_(i) + T::c(0.5)) * h).collect();
        Ok(GalerkinGrid { r_max, h, nodes, n_modes: n + 1, m })
    }

    /// Defaults `R_max = 100`, `h = 0.05`.
    pub fn default_for(m: u32, n: usize) -> Self {
        Self::new(T::c(100.0), T::c(0.05), m, n).expect("valid defaults")
    }

    pub fn block(&self) -> usize {
        2 * self.n_modes
    }

    pub fn len(&self) -> usize {
        self.nodes.len() * self.block()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `R_max ≥ 4/√μ`, so the far-field envelope has decayed.
    pub fn check_extent(&self, mu: T) -> Result<()> {
        let need = T::c(4.0) / mu.sqrt();
        if self.r_max < need {
            return Err(Error::DomainError(format!("R_max = {} below 4/√μ = {need}", self.r_max)));
        }
        Ok(())
    }

    #[inline]
    pub fn index(&self, node: usize, mode: usize, comp: usize) -> usize {
        node * self.block() + 2 * mode + comp
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GalerkinState<T> {
    pub u: Vec<T>,
    pub mu: T,
    pub residual_norm: T,
}

impl<T: Real> GalerkinState<T> {
    pub fn zeros(grid: &GalerkinGrid<T>, mu: T) -> Self {
        GalerkinState { u: vec![T::zero(); grid.len()], mu, residual_norm: T::zero() }
    }

    /// Samples the radial amplitudes of a profile onto the nodes.
    pub fn from_profile(grid: &GalerkinGrid<T>, ctx: &ProfileContext<T>) -> Result<Self> {
        if ctx.n + 1 != grid.n_modes || ctx.m != grid.m {
            return Err(Error::DimensionMismatch { expected: grid.n_modes, got: ctx.n + 1 });
        }
        let mut u = vec![T::zero(); grid.len()];
        for (i, &r) in grid.nodes.iter().enumerate() {
            for n in 0..grid.n_modes {
                let v = ctx.radial_amplitude(n, r);
                u[grid.index(i, n, 0)] = v[0];
                u[grid.index(i, n, 1)] = v[1];
            }
        }
        Ok(GalerkinState { u, mu: ctx.mu, residual_norm: T::nan() })
    }

    pub fn mode(&self, grid: &GalerkinGrid<T>, node: usize, n: usize) -> Vec2<T> {
        [self.u[grid.index(node, n, 0)], self.u[grid.index(node, n, 1)]]
    }
}

/// Which terms enter the residual.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Terms {
    Full,
    Linear,
}

/// Coefficients of `(u_{i−1}, u_i, u_{i+1})` in `Δₙ` at node `i`.
fn stencil<T: Real>(grid: &GalerkinGrid<T>, i: usize, mode: usize) -> (T, T, T) {
    let (h, r) = (grid.h, grid.nodes[i]);
    let mn = T::from_usize_(grid.m as usize * mode);
    let lo = T::one() / (h * h) - T::one() / (T::c(2.0) * h * r);
    let hi = T::one() / (h * h) + T::one() / (T::c(2.0) * h * r);
    let mut mid = -T::c(2.0) / (h * h) - mn * mn / (r * r);
    if i + 1 == grid.nodes.len() {
        // Dirichlet face: u_M = −u_{M−1}
        mid -= hi;
    }
    (lo, mid, hi)
}

fn check_dims<T: Real>(grid: &GalerkinGrid<T>, state: &GalerkinState<T>) -> Result<()> {
    if state.u.len() != grid.len() {
        return Err(Error::DimensionMismatch { expected: grid.len(), got: state.u.len() });
    }
    Ok(())
}

/// Mode-`n` convolutions `Σ Q(u_|i|, u_|j|)` and `Σ C(u_|i|, u_|j|, u_|k|)` at one node.
fn nonlinear<T: Real>(sys: &RDSystem<T>, modes: &[Vec2<T>], n: usize) -> Vec2<T> {
    let nn = modes.len() as i64 - 1;
    let mut out = [T::zero(); 2];
    let n = n as i64;
    for i in -nn..=nn {
        let ui = &modes[i.unsigned_abs() as usize];
        let j = n - i;
        if j.abs() <= nn && sys.has_quadratic() {
            let q = sys.quad(ui, &modes[j.unsigned_abs() as usize]);
            out[0] += q[0];
            out[1] += q[1];
        }
        for j in -nn..=nn {
            let k = n - i - j;
            if k.abs() <= nn {
                let c = sys.cubic(ui, &modes[j.unsigned_abs() as usize], &modes[k.unsigned_abs() as usize]);
                out[0] += c[0];
                out[1] += c[1];
            }
        }
    }
    out
}

/// `∂/∂(u_p)_c` of the mode-`n` nonlinearity, as `d[p][c]`.
fn nonlinear_jac<T: Real>(sys: &RDSystem<T>, modes: &[Vec2<T>], n: usize) -> Vec<[Vec2<T>; 2]> {
    let nn = modes.len() as i64 - 1;
    let e = [[T::one(), T::zero()], [T::zero(), T::one()]];
    let mut d = vec![[[T::zero(); 2]; 2]; modes.len()];
    let n = n as i64;
    let (two, three) = (T::c(2.0), T::c(3.0));
    for i in -nn..=nn {
        let p = i.unsigned_abs() as usize;
        let j = n - i;
        for c in 0..2 {
            if j.abs() <= nn && sys.has_quadratic() {
                let q = sys.quad(&e[c], &modes[j.unsigned_abs() as usize]);
                d[p][c][0] += two * q[0];
                d[p][c][1] += two * q[1];
            }
            for j in -nn..=nn {
                let k = n - i - j;
                if k.abs() <= nn {
                    let v = sys.cubic(&e[c], &modes[j.unsigned_abs() as usize], &modes[k.unsigned_abs() as usize]);
                    d[p][c][0] += three * v[0];
                    d[p][c][1] += three * v[1];
                }
            }
        }
    }
    d
}

fn node_modes<T: Real>(grid: &GalerkinGrid<T>, u: &[T], i: usize) -> Vec<Vec2<T>> {
    (0..grid.n_modes).map(|n| [u[grid.index(i, n, 0)], u[grid.index(i, n, 1)]]).collect()
}

pub fn residual<T: Real>(sys: &RDSystem<T>, grid: &GalerkinGrid<T>, state: &GalerkinState<T>) -> Result<Vec<T>> {
    residual_with(sys, grid, state, Terms::Full)
}

pub fn residual_with<T: Real>(sys: &RDSystem<T>, grid: &GalerkinGrid<T>, state: &GalerkinState<T>, terms: Terms) -> Result<Vec<T>> {
    check_dims(grid, state)?;
    let b = grid.block();
    let mu = state.mu;
    let u = &state.u;
    let last = grid.nodes.len() - 1;
    let mut out = vec![T::zero(); grid.len()];
    out.par_chunks_mut(b).enumerate().for_each(|(i, row)| {
        let modes = node_modes(grid, u, i);
        for n in 0..grid.n_modes {
            let (lo, mid, hi) = stencil(grid, i, n);
            let un = modes[n];
            let m1 = mat_vec(&sys.m1, &un);
            let m2 = mat_vec(&sys.m2, &un);
            let nl = if terms == Terms::Full { nonlinear(sys, &modes, n) } else { [T::zero(); 2] };
            for c in 0..2 {
                let mut lap = mid * un[c];
                if i > 0 {
                    lap += lo * u[grid.index(i - 1, n, c)];
                }
                if i < last {
                    lap += hi * u[grid.index(i + 1, n, c)];
                }
                row[2 * n + c] = lap - m1[c] - mu * m2[c] - nl[c];
            }
        }
    });
    Ok(out)
}

/// Banded Jacobian of [`residual`].
pub fn jacobian<T: Real>(sys: &RDSystem<T>, grid: &GalerkinGrid<T>, state: &GalerkinState<T>) -> Result<Banded<T>> {
    check_dims(grid, state)?;
    let b = grid.block();
    let nodes = grid.nodes.len();
    let blocks: Vec<Vec<(usize, usize, T)>> = (0..nodes)
        .into_par_iter()
        .map(|i| {
            let modes = node_modes(grid, &state.u, i);
            let mut e = Vec::with_capacity(b * (b + 4));
            for n in 0..grid.n_modes {
                let (lo, mid, hi) = stencil(grid, i, n);
                let d = nonlinear_jac(sys, &modes, n);
                for c in 0..2 {
                    let row = grid.index(i, n, c);
                    if i > 0 {
                        e.push((row, grid.index(i - 1, n, c), lo));
                    }
                    if i + 1 < nodes {
                        e.push((row, grid.index(i + 1, n, c), hi));
                    }
                    e.push((row, row, mid));
                    for cc in 0..2 {
                        let lin = -sys.m1[c][cc] - state.mu * sys.m2[c][cc];
                        e.push((row, grid.index(i, n, cc), lin));
                    }
                    for (p, dp) in d.iter().enumerate() {
                        for cc in 0..2 {
                            e.push((row, grid.index(i, p, cc), -dp[cc][c]));
                        }
                    }
                }
            }
            e
        })
        .collect();
    let mut jac = Banded::zeros(grid.len(), 2 * b - 1, 2 * b - 1);
    for (r, c, v) in blocks.into_iter().flatten() {
        jac.add(r, c, v);
    }
    Ok(jac)
}

/// Planar `L²` norm: `‖u‖² = Σₙ wₙ ∫ |uₙ|² r dr`, `w0 = 2π`, `wₙ = 4π`
/// (from `∫ (2cos mnθ)² dθ = 4π`), midpoint rule on the cell centres.
pub fn l2_norm<T: Real>(grid: &GalerkinGrid<T>, state: &GalerkinState<T>) -> T {
    let mut acc = T::zero();
    for (i, &r) in grid.nodes.iter().enumerate() {
        for n in 0..grid.n_modes {
            let w = if n == 0 { T::c(2.0) * T::PI() } else { T::c(4.0) * T::PI() };
            let v = state.mode(grid, i, n);
            acc += w * (v[0] * v[0] + v[1] * v[1]) * r * grid.h;
        }
    }
    acc.sqrt()
}

#[derive(Clone, Debug)]
pub struct NewtonReport<T> {
    pub iterations: usize,
    /// `‖F‖∞` before each step and after the last.
    pub residual_history: Vec<T>,
    /// `‖u − seed‖₂ / ‖seed‖₂` (absolute when the seed is zero).
    pub relative_correction: T,
    pub converged: bool,
}

impl<T: Real> NewtonReport<T> {
    /// Smallest `K` with `r_{k+1} ≤ K r_k²` over the last three residuals.
    pub fn quadratic_constant(&self) -> Option<T> {
        let h = &self.residual_history;
        if h.len() < 3 {
            return None;
        }
        let t = &h[h.len() - 3..];
        Some((t[1] / (t[0] * t[0])).max(t[2] / (t[1] * t[1])))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct NewtonOptions<T> {
    pub tol: T,
    pub max_iter: usize,
}

impl<T: Real> Default for NewtonOptions<T> {
    fn default() -> Self {
        NewtonOptions { tol: T::c(1e-9), max_iter: 40 }
    }
}

/// Damped Newton with a banded LU per iteration.
pub fn newton_refine<T: Real>(sys: &RDSystem<T>, grid: &GalerkinGrid<T>, seed: &GalerkinState<T>, opts: &NewtonOptions<T>) -> Result<(GalerkinState<T>, NewtonReport<T>)> {
    check_dims(grid, seed)?;
    let mut u = seed.clone();
    let mut f = residual(sys, grid, &u)?;
    let mut fn_ = norm_inf(&f);
    let mut history = vec![fn_];
    let mut it = 0;
    while fn_ > opts.tol {
        if it == opts.max_iter {
            return Err(Error::NoConvergence(format!("Galerkin Newton: ‖F‖∞ = {fn_:e} after {it} iterations")));
        }
        let lu = jacobian(sys, grid, &u)?.factor()?;
        let step = lu.solve(&f);
        let mut lambda = T::one();
        loop {
            let trial = GalerkinState { u: u.u.iter().zip(&step).map(|(a, d)| *a - lambda * *d).collect(), ..u.clone() };
            let ft = residual(sys, grid, &trial)?;
            let nt = norm_inf(&ft);
            if nt < fn_ || lambda < T::c(1.0 / 64.0) {
                u = trial;
                f = ft;
                fn_ = nt;
                break;
            }
            lambda *= T::c(0.5);
        }
        history.push(fn_);
        it += 1;
        if !fn_.is_finite() {
            return Err(Error::NoConvergence("Galerkin Newton diverged".into()));
        }
    }
    u.residual_norm = fn_;
    let diff: Vec<T> = u.u.iter().zip(&seed.u).map(|(a, b)| *a - *b).collect();
    let base = norm2(&seed.u);
    let rel = if base > T::zero() { norm2(&diff) / base } else { norm2(&diff) };
    Ok((u, NewtonReport { iterations: it, residual_history: history, relative_correction: rel, converged: true }))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchRow<T> {
    pub mu: T,
    pub l2: T,
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub struct Branch<T> {
    pub rows: Vec<BranchRow<T>>,
    /// `(last converged μ, first failed μ)` when the corrector gave up.
    pub fold_bracket: Option<(T, T)>,
    pub last_state: GalerkinState<T>,
}

/// Natural-parameter continuation from `start.mu` to `mu_end` in `steps`
/// geometrically spaced steps, secant predictor and Newton corrector.
pub fn continue_mu<T: Real>(sys: &RDSystem<T>, grid: &GalerkinGrid<T>, start: &GalerkinState<T>, mu_end: T, steps: usize, opts: &NewtonOptions<T>) -> Result<Branch<T>> {
    check_dims(grid, start)?;
    if !(mu_end > T::zero() && start.mu > T::zero()) || steps == 0 {
        return Err(Error::DomainError("continuation needs positive μ and at least one step".into()));
    }
    let ratio = (mu_end / start.mu).powf(T::one() / T::from_usize_(steps));
    let mut rows = vec![BranchRow { mu: start.mu, l2: l2_norm(grid, start), converged: true }];
    let mut prev: Option<GalerkinState<T>> = None;
    let mut cur = start.clone();
    for k in 1..=steps {
        let mu = start.mu * ratio.powi(k as i32);
        let mut pred = cur.clone();
        pred.mu = mu;
        if let Some(p) = &prev {
            let scale = (mu - cur.mu) / (cur.mu - p.mu);
            for ((x, c), q) in pred.u.iter_mut().zip(&cur.u).zip(&p.u) {
                *x = *c + scale * (*c - *q);
            }
        }
        match newton_refine(sys, grid, &pred, opts) {
            Ok((next, _)) => {
                rows.push(BranchRow { mu, l2: l2_norm(grid, &next), converged: true });
                prev = Some(std::mem::replace(&mut cur, next));
            }
            Err(e) => {
                if k == 1 {
                    return Err(e);
                }
                rows.push(BranchRow { mu, l2: T::nan(), converged: false });
                return Ok(Branch { rows, fold_bracket: Some((cur.mu, mu)), last_state: cur });
            }
        }
    }
    Ok(Branch { rows, fold_bracket: None, last_state: cur })
}

/// Least-squares slope of `log l2` against `log μ` over converged rows with `l2 > 0`.
pub fn loglog_slope<T: Real>(rows: &[BranchRow<T>]) -> Option<T> {
    let pts: Vec<(T, T)> = rows.iter().filter(|r| r.converged && r.l2 > T::zero()).map(|r| (r.mu.ln(), r.l2.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = T::from_usize_(pts.len());
    let mx = pts.iter().fold(T::zero(), |a, p| a + p.0) / n;
    let my = pts.iter().fold(T::zero(), |a, p| a + p.1) / n;
    let sxy = pts.iter().fold(T::zero(), |a, p| a + (p.0 - mx) * (p.1 - my));
    let sxx = pts.iter().fold(T::zero(), |a, p| a + (p.0 - mx) * (p.0 - mx));
    Some(sxy / sxx)
}

pub fn write_branch<T: Real, W: Write>(branch: &Branch<T>, mut out: W) -> Result<()> {
    writeln!(out, "mu,l2_norm,converged")?;
    for r in &branch.rows {
        writeln!(out, "{:e},{:e},{}", r.mu, r.l2, r.converged)?;
    }
    Ok(())
}

/// Snapshot rows `r,mode,comp0,comp1`.
pub fn write_snapshot<T: Real, W: Write>(grid: &GalerkinGrid<T>, state: &GalerkinState<T>, mut out: W) -> Result<()> {
    check_dims(grid, state)?;
    writeln!(out, "# m={} N={} mu={:e} h={:e} R_max={:e}", grid.m, grid.n_modes - 1, state.mu, grid.h, grid.r_max)?;
    writeln!(out, "r,mode,comp0,comp1")?;
    for (i, r) in grid.nodes.iter().enumerate() {
        for n in 0..grid.n_modes {
            let v = state.mode(grid, i, n);
            writeln!(out, "{r:e},{n},{:e},{:e}", v[0], v[1])?;
        }
    }
    Ok(())
}
