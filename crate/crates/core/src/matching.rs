//! The cubic matching map `C^m_N` and its roots.
//!
//! `[C(a)]_n = Σ_{i+j+k=n, |i|,|j|,|k|≤N} (−1)^{m(|i|+|j|−|k|−n)/2} a_|i| a_|j| a_|k|`.
//! The exponent is an integer because `|i|+|j|−|k|−n ≡ −2k (mod 2)`, and only
//! the parity of `m` matters.
//!
//! Roots are reported up to the symmetries `R: a_n ↦ (−1)^n a_n` and
//! `S: a ↦ −a`. `solve_matching` returns every root its multi-start search
//! found; completeness is not guaranteed.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{norm_inf, Lu, Matrix};
use crate::scalar::{Real, Ring};

pub mod fixtures;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MatchProblem {
    pub m: u32,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatchSolution {
    pub a: Vec<f64>,
    pub residual_norm: f64,
    pub harmonic_of: Option<usize>,
    /// Smallest `N' < N` with `a_n = 0` for all `n > N'`.
    pub padded_from: Option<usize>,
    pub dm_minus: bool,
    pub canonical: bool,
}

impl MatchSolution {
    /// Whether the root belongs to the published per-N lists: harmonic roots
    /// are left out, and so are D_m⁻ roots carried over from a smaller N.
    pub fn listed(&self) -> bool {
        self.harmonic_of.is_none() && !(self.dm_minus && self.padded_from.is_some())
    }
}

#[derive(Clone, Copy, Debug)]
struct Triple {
    i: u16,
    j: u16,
    k: u16,
    neg: bool,
}

/// Index triples of every summand, grouped by output component.
#[derive(Clone, Debug)]
pub struct TripleTable {
    n: usize,
    rows: Vec<Vec<Triple>>,
}

impl TripleTable {
    pub fn new(p: MatchProblem) -> Self {
        let nn = p.n as i64;
        let odd = p.m % 2 == 1;
        let rows = (0..=nn)
            .map(|n| {
                let mut row = Vec::new();
                for i in -nn..=nn {
                    for j in -nn..=nn {
                        let k = n - i - j;
                        if k.abs() > nn {
                            continue;
                        }
                        let e = i.abs() + j.abs() - k.abs() - n;
                        debug_assert!(e % 2 == 0);
                        let neg = odd && (e / 2).rem_euclid(2) == 1;
                        row.push(Triple { i: i.unsigned_abs() as u16, j: j.unsigned_abs() as u16, k: k.unsigned_abs() as u16, neg });
                    }
                }
                row
            })
            .collect();
        TripleTable { n: p.n, rows }
    }

    pub fn apply<T: Ring>(&self, a: &[T]) -> Vec<T> {
        self.rows
            .iter()
            .map(|row| {
                row.iter().fold(T::zero(), |acc, t| {
                    let p = a[t.i as usize].clone() * a[t.j as usize].clone() * a[t.k as usize].clone();
                    if t.neg {
                        acc - p
                    } else {
                        acc + p
                    }
                })
            })
            .collect()
    }

    /// Row-major `(N+1)²` Jacobian, `J[n][l] = ∂C_n/∂a_l`.
    pub fn jacobian<T: Ring>(&self, a: &[T]) -> Vec<T> {
        let d = self.n + 1;
        let mut jac = vec![T::zero(); d * d];
        for (n, row) in self.rows.iter().enumerate() {
            for t in row {
                let (i, j, k) = (t.i as usize, t.j as usize, t.k as usize);
                let terms = [(i, a[j].clone() * a[k].clone()), (j, a[i].clone() * a[k].clone()), (k, a[i].clone() * a[j].clone())];
                for (l, v) in terms {
                    let slot = &mut jac[n * d + l];
                    let cur = std::mem::replace(slot, T::zero());
                    *slot = if t.neg { cur - v } else { cur + v };
                }
            }
        }
        jac
    }
}

fn check_len(p: MatchProblem, a_len: usize) -> Result<()> {
    if a_len != p.n + 1 {
        return Err(Error::DimensionMismatch { expected: p.n + 1, got: a_len });
    }
    Ok(())
}

pub fn cubic_map<T: Ring>(p: MatchProblem, a: &[T]) -> Result<Vec<T>> {
    check_len(p, a.len())?;
    Ok(TripleTable::new(p).apply(a))
}

/// Dense Jacobian of `cubic_map`, row-major.
pub fn jacobian<T: Ring>(p: MatchProblem, a: &[T]) -> Result<Vec<T>> {
    check_len(p, a.len())?;
    Ok(TripleTable::new(p).jacobian(a))
}

/// `a_n ↦ (−1)^n a_n`.
pub fn reflect_r<T: Ring>(a: &[T]) -> Vec<T> {
    a.iter().enumerate().map(|(n, v)| if n % 2 == 1 { -v.clone() } else { v.clone() }).collect()
}

/// The four orbit members in the order a, Ra, Sa, RSa.
pub fn orbit(a: &[f64]) -> [Vec<f64>; 4] {
    let r = reflect_r(a);
    let s: Vec<f64> = a.iter().map(|v| -v).collect();
    let rs: Vec<f64> = r.iter().map(|v| -v).collect();
    [a.to_vec(), r, s, rs]
}

const ZERO_SNAP: f64 = 1e-9;

fn lex_cmp(x: &[f64], y: &[f64]) -> std::cmp::Ordering {
    for (p, q) in x.iter().zip(y) {
        if (p - q).abs() > ZERO_SNAP {
            return p.partial_cmp(q).unwrap_or(std::cmp::Ordering::Equal);
        }
    }
    std::cmp::Ordering::Equal
}

/// Lexicographically greatest orbit member; ties keep the earliest, so the
/// map is idempotent.
pub fn canonicalize(a: &[f64]) -> Vec<f64> {
    let mut best: Option<Vec<f64>> = None;
    for cand in orbit(a) {
        match &best {
            Some(b) if lex_cmp(&cand, b) != std::cmp::Ordering::Greater => {}
            _ => best = Some(cand),
        }
    }
    best.unwrap_or_default()
}

/// `H^k`: places `a_i` at index `i·k` of a length-`N+1` vector.
pub fn harmonic_lift<T: Ring>(a: &[T], k: usize, n: usize) -> Result<Vec<T>> {
    if k < 2 || a.is_empty() || (a.len() - 1) * k > n {
        return Err(Error::DimensionMismatch { expected: n / k.max(1) + 1, got: a.len() });
    }
    let mut out = vec![T::zero(); n + 1];
    for (i, v) in a.iter().enumerate() {
        out[i * k] = v.clone();
    }
    Ok(out)
}

fn harmonic_index(a: &[f64]) -> Option<usize> {
    let n = a.len() - 1;
    if n == 0 {
        return None;
    }
    (2..=n.max(2)).find(|&k| a.iter().enumerate().all(|(i, v)| i % k == 0 || v.abs() < ZERO_SNAP))
}

/// Fills `dm_minus`, `harmonic_of` and `padded_from`.
pub fn classify(sol: &MatchSolution, _p: MatchProblem) -> MatchSolution {
    let mut s = sol.clone();
    s.dm_minus = s.a.iter().step_by(2).all(|v| v.abs() < ZERO_SNAP);
    s.harmonic_of = harmonic_index(&s.a);
    let last = s.a.iter().rposition(|v| v.abs() >= ZERO_SNAP).unwrap_or(0);
    s.padded_from = (last + 1 < s.a.len()).then_some(last);
    s
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    /// Random starts; `None` means `500 (N+1)²`.
    pub starts: Option<usize>,
    pub seed: u64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { starts: None, seed: 0x5eed, tol: 1e-12, max_iter: 60 }
    }
}

/// Outcome of a single damped Newton run on `a − C(a) = 0`.
#[derive(Clone, Debug)]
pub struct NewtonRun<T> {
    pub a: Vec<T>,
    pub residual: T,
    pub iterations: usize,
    pub converged: bool,
}

pub fn residual_of(table: &TripleTable, a: &[f64]) -> Vec<f64> {
    let c = table.apply(a);
    a.iter().zip(&c).map(|(x, y)| x - y).collect()
}

/// Damped Newton with step halving; generic over the float type.
pub fn newton_matching<T: Real + Ring>(table: &TripleTable, start: &[T], tol: T, max_iter: usize) -> NewtonRun<T> {
    let d = table.n + 1;
    let res = |a: &[T]| -> Vec<T> {
        let c = table.apply(a);
        a.iter().zip(&c).map(|(x, y)| *x - *y).collect()
    };
    let lu_at = |a: &[T]| {
        let dc = table.jacobian(a);
        let mut jm = Matrix::<T>::zeros(d);
        for r in 0..d {
            for c in 0..d {
                let id = if r == c { T::one() } else { T::zero() };
                *jm.get_mut(r, c) = id - dc[r * d + c];
            }
        }
        Lu::new(jm)
    };
    let mut a = start.to_vec();
    let mut f = res(&a);
    let mut fn_ = norm_inf(&f);
    for it in 0..max_iter {
        if fn_ <= tol {
            return NewtonRun { a, residual: fn_, iterations: it, converged: true };
        }
        let Ok(lu) = lu_at(&a) else {
            return NewtonRun { a, residual: fn_, iterations: it, converged: false };
        };
        let step = lu.solve(&f);
        let mut lam = T::one();
        loop {
            let trial: Vec<T> = a.iter().zip(&step).map(|(x, s)| *x - lam * *s).collect();
            let ft = res(&trial);
            let nt = norm_inf(&ft);
            if nt < fn_ || lam < T::c(1.0 / 1024.0) {
                a = trial;
                f = ft;
                fn_ = nt;
                break;
            }
            lam *= T::c(0.5);
        }
        if !fn_.is_finite() || norm_inf(&a) > T::c(1e3) {
            return NewtonRun { a, residual: fn_, iterations: it + 1, converged: false };
        }
    }
    let converged = fn_ <= tol;
    NewtonRun { a, residual: fn_, iterations: max_iter, converged }
}

/// Near a degenerate root (odd m around the axisymmetric state, harmonic
/// lifts) the residual is tiny along a whole valley and Newton stalls at
/// spurious points there. Their `I − DC` is numerically singular (cond ≳ 1e10)
/// while isolated roots sit below ~1e3; exact degenerate roots are added
/// separately.
const DEGENERATE_COND: f64 = 1e8;

/// ∞-norm condition number of `I − DC(a)`.
pub fn condition_number(table: &TripleTable, a: &[f64]) -> f64 {
    let d = a.len();
    let dc = table.jacobian(a);
    let mut j = Matrix::<f64>::zeros(d);
    for r in 0..d {
        for c in 0..d {
            *j.get_mut(r, c) = if r == c { 1.0 } else { 0.0 } - dc[r * d + c];
        }
    }
    j.cond_inf()
}

fn run_newton(table: &TripleTable, start: &[f64], opts: &SolveOptions) -> Option<Vec<f64>> {
    let run = newton_matching(table, start, opts.tol, opts.max_iter);
    let (mut a, r) = (run.a, run.residual);
    if !run.converged || condition_number(table, &a) > DEGENERATE_COND {
        return None;
    }
    let amax = norm_inf(&a);
    if !(1e-4..=2.0).contains(&amax) {
        return None;
    }
    // snap exact zeros produced by symmetry, keeping the residual bound
    let snapped: Vec<f64> = a.iter().map(|v| if v.abs() < 1e-11 { 0.0 } else { *v }).collect();
    if norm_inf(&residual_of(table, &snapped)) <= r.max(opts.tol) {
        a = snapped;
    }
    Some(a)
}

fn total_lex(x: &[f64], y: &[f64]) -> std::cmp::Ordering {
    for (p, q) in x.iter().zip(y) {
        match p.total_cmp(q) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    std::cmp::Ordering::Equal
}

/// Exact candidates win over numerically found neighbours; output sorted.
fn dedupe(mut exact: Vec<Vec<f64>>, mut found: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    exact.sort_by(|x, y| total_lex(x, y));
    found.sort_by(|x, y| total_lex(x, y));
    let mut kept: Vec<Vec<f64>> = Vec::new();
    for r in exact.into_iter().chain(found) {
        if !kept.iter().any(|k| k.iter().zip(&r).all(|(p, q)| (p - q).abs() < 1e-6)) {
            kept.push(r);
        }
    }
    kept.sort_by(|x, y| total_lex(x, y));
    kept
}

/// Multi-start solver with a per-(parity, N) memo of canonical roots.
#[derive(Default)]
pub struct MatchSolver {
    opts: SolveOptions,
    cache: HashMap<(bool, usize), Vec<Vec<f64>>>,
}

impl MatchSolver {
    pub fn new(opts: SolveOptions) -> Self {
        MatchSolver { opts, cache: HashMap::new() }
    }

    fn roots(&mut self, odd: bool, n: usize) -> Vec<Vec<f64>> {
        if let Some(r) = self.cache.get(&(odd, n)) {
            return r.clone();
        }
        let p = MatchProblem { m: if odd { 1 } else { 2 }, n };
        let table = TripleTable::new(p);
        let d = n + 1;
        let mut seeds: Vec<Vec<f64>> = Vec::new();
        let mut axis = vec![0.0; d];
        axis[0] = 1.0;
        seeds.push(axis.clone());
        let mut exact: Vec<Vec<f64>> = vec![axis];
        for lower in 0..n {
            for r in self.roots(odd, lower) {
                let mut padded = r.clone();
                padded.resize(d, 0.0);
                exact.push(padded.clone());
                seeds.push(padded);
            }
        }
        for k in 2..=n {
            // m·k is odd only when both m and k are
            let sub_odd = odd && k % 2 == 1;
            for r in self.roots(sub_odd, n / k) {
                for o in orbit(&r) {
                    if let Ok(l) = harmonic_lift(&o, k, n) {
                        exact.push(l.clone());
                        seeds.push(l);
                    }
                }
            }
        }
        let count = self.opts.starts.unwrap_or(500 * d * d);
        let mut rng = ChaCha8Rng::seed_from_u64(self.opts.seed ^ ((n as u64) << 1 | odd as u64));
        for _ in 0..count {
            seeds.push((0..d).map(|_| rng.gen_range(-1.2..1.2)).collect());
        }
        let opts = self.opts.clone();
        let found: Vec<Vec<f64>> = seeds
            .par_iter()
            .filter_map(|s| run_newton(&table, s, &opts))
            .map(|a| canonicalize(&a))
            .collect();
        let exact: Vec<Vec<f64>> = exact.iter().filter(|l| norm_inf(&residual_of(&table, l)) <= 1e-10).map(|l| canonicalize(l)).collect();
        let roots = dedupe(exact, found);
        self.cache.insert((odd, n), roots.clone());
        roots
    }

    pub fn solve(&mut self, p: MatchProblem) -> Result<Vec<MatchSolution>> {
        if p.m == 0 {
            return Err(Error::DomainError("m must be positive".into()));
        }
        let roots = self.roots(p.m % 2 == 1, p.n);
        if roots.is_empty() {
            return Err(Error::NoConvergence("no nonzero root found; the axisymmetric root should always exist".into()));
        }
        let table = TripleTable::new(p);
        Ok(roots
            .into_iter()
            .map(|a| {
                let residual_norm = norm_inf(&residual_of(&table, &a));
                let s = MatchSolution { a, residual_norm, harmonic_of: None, padded_from: None, dm_minus: false, canonical: true };
                classify(&s, p)
            })
            .collect())
    }
}

/// All canonical, deduplicated nonzero roots found for `p`, harmonic ones flagged.
pub fn solve_matching(p: MatchProblem, opts: &SolveOptions) -> Result<Vec<MatchSolution>> {
    MatchSolver::new(opts.clone()).solve(p)
}

fn flags(s: &MatchSolution) -> String {
    let mut f = Vec::new();
    if let Some(k) = s.harmonic_of {
        f.push(format!("harmonic={k}"));
    }
    if let Some(k) = s.padded_from {
        f.push(format!("padded={k}"));
    }
    if s.dm_minus {
        f.push("dm_minus".to_string());
    }
    if s.canonical {
        f.push("canonical".to_string());
    }
    if f.is_empty() {
        "-".to_string()
    } else {
        f.join(",")
    }
}

/// One root per line: `m N a_0 … a_N residual flags`, 17 significant digits.
pub fn write_table(p: MatchProblem, sols: &[MatchSolution]) -> String {
    let mut out = String::new();
    for s in sols {
        let _ = write!(out, "{} {}", p.m, p.n);
        for v in &s.a {
            let _ = write!(out, " {v:.16e}");
        }
        let _ = writeln!(out, " {:.16e} {}", s.residual_norm, flags(s));
    }
    out
}

pub fn read_table(text: &str) -> Result<Vec<(MatchProblem, MatchSolution)>> {
    let mut rows = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = || Error::Parse(format!("line {}: malformed solution row", ln + 1));
        let tok: Vec<&str> = line.split_whitespace().collect();
        if tok.len() < 5 {
            return Err(err());
        }
        let m: u32 = tok[0].parse().map_err(|_| err())?;
        let n: usize = tok[1].parse().map_err(|_| err())?;
        if tok.len() != n + 5 {
            return Err(err());
        }
        let nums: Vec<f64> = tok[2..n + 4].iter().map(|t| t.parse().map_err(|_| err())).collect::<Result<_>>()?;
        let fl = tok[n + 4];
        let harmonic_of = fl.split(',').find_map(|f| f.strip_prefix("harmonic=")).map(|k| k.parse().map_err(|_| err())).transpose()?;
        let padded_from = fl.split(',').find_map(|f| f.strip_prefix("padded=")).map(|k| k.parse().map_err(|_| err())).transpose()?;
        let sol = MatchSolution {
            a: nums[..=n].to_vec(),
            residual_norm: nums[n + 1],
            harmonic_of,
            padded_from,
            dm_minus: fl.split(',').any(|f| f == "dm_minus"),
            canonical: fl.split(',').any(|f| f == "canonical"),
        };
        rows.push((MatchProblem { m, n }, sol));
    }
    Ok(rows)
}
