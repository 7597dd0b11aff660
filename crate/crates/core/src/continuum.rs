//! Continuum limit of the even-m matching equation.
//!
//! Rescaling a root of the discrete map by `t = n/N`, `α(t) = N a_n` turns the
//! convolution sum into a Riemann sum of a cubic integral operator on `[0, 1]`.
//! Written out over the folded domain, the operator is the sum of seven double
//! integrals; all their limits and arguments land on grid points when `t` does,
//! so the nested trapezoid rule below never interpolates between nodes.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{norm_inf, Lu, Matrix};
use crate::matching::{newton_matching, MatchProblem, TripleTable};
use crate::scalar::Real;

pub const MIN_APPLY_GRID: usize = 8;
pub const MIN_SOLVE_GRID: usize = 32;

/// The all-positive even-m root at N = 4 that starts the large-N family.
pub const FAMILY_START: [f64; 5] = [0.153, 0.150, 0.140, 0.125, 0.105];

#[derive(Clone, Debug, PartialEq)]
pub struct ContinuumSolution<T> {
    pub t_grid: Vec<T>,
    pub alpha: Vec<T>,
    pub residual_norm: T,
    pub iterations: usize,
}

impl<T: Real> ContinuumSolution<T> {
    /// Piecewise linear evaluation, clamped to `[0, 1]`.
    pub fn evaluate(&self, t: T) -> T {
        interp_uniform(&self.alpha, t)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,alpha")?;
        for (t, a) in self.t_grid.iter().zip(&self.alpha) {
            writeln!(w, "{:.17e},{:.17e}", t, a)?;
        }
        Ok(())
    }
}

/// Calls `f(weight, p, q, r)` for every quadrature node of the seven integrals
/// at `t = k h`; the weight is in units of `h²` and `p, q, r` index `α`.
fn for_each_term<F: FnMut(f64, usize, usize, usize)>(k: usize, last: usize, mut f: F) {
    // trapezoid weight of node i on [0, n]
    let tw = |i: usize, n: usize| if i == 0 || i == n { 0.5 } else { 1.0 };
    let l = last;
    // ∫₀^{1−t} ds
    let n_out = l - k;
    if n_out > 0 {
        for i in 0..=n_out {
            let wi = tw(i, n_out);
            let n1 = l - i;
            if n1 > 0 {
                for j in 0..=n1 {
                    f(2.0 * wi * tw(j, n1), k + i, j, i + j);
                }
            }
            let n2 = l - i - k;
            if n2 > 0 {
                for j in 0..=n2 {
                    f(2.0 * wi * tw(j, n2), i, j, i + k + j);
                }
            }
            if i > 0 {
                for j in 0..=i {
                    f(wi * tw(j, i), k + i, j, i - j);
                }
            }
            let n4 = i + k;
            if n4 > 0 {
                for j in 0..=n4 {
                    f(wi * tw(j, n4), i, j, i + k - j);
                }
            }
        }
    }
    // ∫₀^{t} ds
    if k > 0 {
        for i in 0..=k {
            let wi = tw(i, k);
            let n5 = l - i;
            if n5 > 0 {
                for j in 0..=n5 {
                    let wj = tw(j, n5);
                    f(2.0 * wi * wj, k - i, j, i + j);
                    f(wi * wj, i + l - k, j + i, l - j);
                }
            }
            if i > 0 {
                for j in 0..=i {
                    f(wi * tw(j, i), k - i, j, i - j);
                }
            }
        }
    }
}

fn check_grid(len: usize, m: usize, min: usize) -> Result<()> {
    if len != m {
        return Err(Error::DimensionMismatch { expected: m, got: len });
    }
    if m < min {
        return Err(Error::DomainError(format!("grid size {m} below {min}")));
    }
    Ok(())
}

/// Right-hand side of the continuum equation at `t_k = k/(M−1)`.
pub fn continuum_apply<T: Real>(alpha: &[T], m: usize) -> Result<Vec<T>> {
    check_grid(alpha.len(), m, MIN_APPLY_GRID)?;
    let last = m - 1;
    let h = T::one() / T::from_usize_(last);
    Ok((0..m)
        .into_par_iter()
        .map(|k| {
            let mut acc = T::zero();
            for_each_term(k, last, |w, p, q, r| acc += T::c(w) * alpha[p] * alpha[q] * alpha[r]);
            acc * h * h
        })
        .collect())
}

/// Jacobian of [`continuum_apply`], row-major `M × M`.
pub fn continuum_jacobian<T: Real>(alpha: &[T], m: usize) -> Result<Matrix<T>> {
    check_grid(alpha.len(), m, MIN_APPLY_GRID)?;
    let last = m - 1;
    let h = T::one() / T::from_usize_(last);
    let rows: Vec<Vec<T>> = (0..m)
        .into_par_iter()
        .map(|k| {
            let mut row = vec![T::zero(); m];
            for_each_term(k, last, |w, p, q, r| {
                let w = T::c(w);
                row[p] += w * alpha[q] * alpha[r];
                row[q] += w * alpha[p] * alpha[r];
                row[r] += w * alpha[p] * alpha[q];
            });
            row
        })
        .collect();
    let mut j = Matrix::zeros(m);
    for (k, row) in rows.into_iter().enumerate() {
        for (c, v) in row.into_iter().enumerate() {
            *j.get_mut(k, c) = v * h * h;
        }
    }
    Ok(j)
}

fn interp_uniform<T: Real>(v: &[T], t: T) -> T {
    let last = v.len() - 1;
    let x = t.max(T::zero()).min(T::one()) * T::from_usize_(last);
    let i = x.floor().to_f64_() as usize;
    if i >= last {
        return v[last];
    }
    let f = x - T::from_usize_(i);
    v[i] * (T::one() - f) + v[i + 1] * f
}

/// Rescaled profile `(n/N, N a_n)` of an even-m root with `N = a.len() − 1`.
pub fn rescale(a: &[f64]) -> Vec<f64> {
    let n = (a.len() - 1) as f64;
    a.iter().map(|x| n * x).collect()
}

/// Newton on `α − apply(α)` from an explicit seed on `M` nodes.
pub fn solve_continuum_from<T: Real>(seed: &[T], m: usize, tol: T, max_iter: usize) -> Result<ContinuumSolution<T>> {
    check_grid(seed.len(), m, MIN_SOLVE_GRID)?;
    let res = |a: &[T]| -> Result<Vec<T>> {
        let c = continuum_apply(a, m)?;
        Ok(a.iter().zip(&c).map(|(x, y)| *x - *y).collect())
    };
    let mut a = seed.to_vec();
    let mut f = res(&a)?;
    let mut fnorm = norm_inf(&f);
    for it in 0..max_iter {
        if fnorm <= tol {
            return finish(a, fnorm, it, m);
        }
        let dc = continuum_jacobian(&a, m)?;
        let mut jm = Matrix::identity(m);
        for r in 0..m {
            for c in 0..m {
                *jm.get_mut(r, c) -= *dc.get(r, c);
            }
        }
        let step = Lu::new(jm)?.solve(&f);
        let mut lam = T::one();
        loop {
            let trial: Vec<T> = a.iter().zip(&step).map(|(x, s)| *x - lam * *s).collect();
            let ft = res(&trial)?;
            let nt = norm_inf(&ft);
            if nt < fnorm || lam < T::c(1.0 / 1024.0) {
                a = trial;
                f = ft;
                fnorm = nt;
                break;
            }
            lam *= T::c(0.5);
        }
        if !fnorm.is_finite() {
            break;
        }
    }
    if fnorm <= tol {
        return finish(a, fnorm, max_iter, m);
    }
    Err(Error::NoConvergence(format!("continuum Newton residual {:e} after {max_iter} iterations", fnorm.to_f64_())))
}

fn finish<T: Real>(alpha: Vec<T>, residual_norm: T, iterations: usize, m: usize) -> Result<ContinuumSolution<T>> {
    if alpha.iter().any(|a| *a <= T::zero()) {
        return Err(Error::NoConvergence("continuum Newton left the positive branch".into()));
    }
    let last = T::from_usize_(m - 1);
    let t_grid = (0..m).map(|k| T::from_usize_(k) / last).collect();
    Ok(ContinuumSolution { t_grid, alpha, residual_norm, iterations })
}

/// Solves on `M` nodes, seeded from the N = 40 member of [`discrete_family`].
pub fn solve_continuum(m: usize) -> Result<ContinuumSolution<f64>> {
    if m < MIN_SOLVE_GRID {
        return Err(Error::DomainError(format!("grid size {m} below {MIN_SOLVE_GRID}")));
    }
    let fam = discrete_family(&[40])?;
    let prof = rescale(&fam[0].1);
    let last = (m - 1) as f64;
    let seed: Vec<f64> = (0..m).map(|k| interp_uniform(&prof, k as f64 / last)).collect();
    solve_continuum_from(&seed, m, 1e-10, 40)
}

/// Continues [`FAMILY_START`] to each requested `N` (ascending, ≥ 4) by
/// appending one zero coefficient at a time and re-solving with Newton.
pub fn discrete_family(ns: &[usize]) -> Result<Vec<(usize, Vec<f64>)>> {
    let top = ns.iter().copied().max().unwrap_or(4);
    if ns.iter().any(|&n| n < 4) {
        return Err(Error::DomainError("family starts at N = 4".into()));
    }
    let mut out = Vec::new();
    let mut a = FAMILY_START.to_vec();
    for n in 4..=top {
        if n > 4 {
            a.push(0.0);
        }
        let table = TripleTable::new(MatchProblem { m: 2, n });
        let run = newton_matching(&table, &a, 1e-13, 60);
        if !run.converged {
            return Err(Error::NoConvergence(format!("family continuation at N = {n}, residual {:e}", run.residual)));
        }
        a = run.a;
        if ns.contains(&n) {
            out.push((n, a.clone()));
        }
    }
    Ok(out)
}

/// Sup distance between two piecewise linear profiles on `[0, 1]` given as
/// samples on uniform grids; exact, since the extrema sit on the union of nodes.
pub fn sup_distance(u: &[f64], v: &[f64]) -> f64 {
    let nodes = |len: usize| (0..len).map(move |i| i as f64 / (len - 1) as f64);
    nodes(u.len()).chain(nodes(v.len())).map(|t| (interp_uniform(u, t) - interp_uniform(v, t)).abs()).fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTable {
    /// `(N1, N2, sup distance)` for consecutive inputs.
    pub pairs: Vec<(usize, usize, f64)>,
    /// `(N, sup distance to the continuum solution)`.
    pub to_continuum: Vec<(usize, f64)>,
}

impl ConvergenceTable {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "N1,N2,sup_distance")?;
        for (a, b, d) in &self.pairs {
            writeln!(w, "{a},{b},{d:.17e}")?;
        }
        for (a, d) in &self.to_continuum {
            writeln!(w, "{a},inf,{d:.17e}")?;
        }
        Ok(())
    }
}

/// Rescales each `(N, a)` and measures consecutive and continuum distances.
pub fn compare_large_n(solutions: &[(usize, Vec<f64>)], continuum: Option<&ContinuumSolution<f64>>) -> ConvergenceTable {
    let profs: Vec<(usize, Vec<f64>)> = solutions.iter().map(|(n, a)| (*n, rescale(a))).collect();
    let pairs = profs.windows(2).map(|w| (w[0].0, w[1].0, sup_distance(&w[0].1, &w[1].1))).collect();
    let to_continuum = match continuum {
        Some(c) => profs.iter().map(|(n, p)| (*n, sup_distance(p, &c.alpha))).collect(),
        None => Vec::new(),
    };
    ConvergenceTable { pairs, to_continuum }
}
