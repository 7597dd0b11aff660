//! Small dense and banded linear solvers (partial pivoting).

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Row-major dense square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    pub n: usize,
    pub data: Vec<T>,
}

impl<T: Clone> Matrix<T> {
    pub fn filled(n: usize, v: T) -> Self {
        Matrix { n, data: vec![v; n * n] }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.n + j]
    }

    #[inline]
    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}

impl<T: Real> Matrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self::filled(n, T::zero())
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| {
                let row = &self.data[i * self.n..(i + 1) * self.n];
                row.iter().zip(x).fold(T::zero(), |acc, (a, b)| acc + *a * *b)
            })
            .collect()
    }
}

impl<T: Real> Matrix<T> {
    pub fn norm_inf(&self) -> T {
        (0..self.n).map(|i| self.data[i * self.n..(i + 1) * self.n].iter().fold(T::zero(), |s, v| s + v.abs())).fold(T::zero(), |m, v| m.max(v))
    }

    /// `‖A‖∞ ‖A⁻¹‖∞`, infinite when singular.
    pub fn cond_inf(&self) -> T {
        let n = self.n;
        let na = self.norm_inf();
        let Ok(lu) = Lu::new(self.clone()) else { return T::infinity() };
        let mut inv = Matrix::zeros(n);
        for c in 0..n {
            let mut e = vec![T::zero(); n];
            e[c] = T::one();
            for (r, v) in lu.solve(&e).into_iter().enumerate() {
                *inv.get_mut(r, c) = v;
            }
        }
        na * inv.norm_inf()
    }
}

/// LU factorisation with partial pivoting of a dense matrix.
#[derive(Clone, Debug)]
pub struct Lu<T> {
    lu: Matrix<T>,
    piv: Vec<usize>,
}

impl<T: Real> Lu<T> {
    pub fn new(mut a: Matrix<T>) -> Result<Self> {
        let n = a.n;
        let scale = a.data.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let tiny = scale * T::epsilon() * T::from_usize_(n.max(1));
        let mut piv: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut best = a.get(k, k).abs();
            for i in k + 1..n {
                let v = a.get(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > tiny) {
                return Err(Error::SingularJacobian);
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
                piv.swap(k, p);
            }
            let d = *a.get(k, k);
            for i in k + 1..n {
                let l = *a.get(i, k) / d;
                *a.get_mut(i, k) = l;
                if l != T::zero() {
                    for j in k + 1..n {
                        let u = *a.get(k, j);
                        *a.get_mut(i, j) -= l * u;
                    }
                }
            }
        }
        Ok(Lu { lu: a, piv })
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.lu.n;
        let mut x: Vec<T> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let l = *self.lu.get(i, j);
                let xj = x[j];
                x[i] -= l * xj;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let u = *self.lu.get(i, j);
                let xj = x[j];
                x[i] -= u * xj;
            }
            x[i] /= *self.lu.get(i, i);
        }
        x
    }
}

/// Convenience: solve `a x = b` once.
pub fn solve_dense<T: Real>(a: Matrix<T>, b: &[T]) -> Result<Vec<T>> {
    Ok(Lu::new(a)?.solve(b))
}

/// Banded matrix with `kl` sub- and `ku` super-diagonals, stored with room for
/// the `kl` extra super-diagonals produced by pivoting.
#[derive(Clone, Debug)]
pub struct Banded<T> {
    pub n: usize,
    pub kl: usize,
    pub ku: usize,
    width: usize,
    data: Vec<T>,
}

impl<T: Real> Banded<T> {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Banded { n, kl, ku, width, data: vec![T::zero(); n * width] }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.width + (j + self.kl - i)
    }

    /// Adds `v` to entry (i, j); panics if outside the declared band.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        assert!(j + self.kl >= i && j <= i + self.ku, "entry ({i},{j}) outside band");
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        if j + self.kl < i || j > i + self.ku + self.kl {
            return T::zero();
        }
        self.data[self.idx(i, j)]
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).fold(T::zero(), |acc, j| acc + self.get(i, j) * x[j])
            })
            .collect()
    }

    /// In-place banded LU with partial pivoting; consumes the matrix.
    pub fn factor(mut self) -> Result<BandedLu<T>> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let scale = self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let tiny = scale * T::epsilon();
        let mut piv = vec![0usize; n];
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).abs();
            for i in k + 1..=last_row {
                let v = self.get(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > tiny) {
                return Err(Error::SingularJacobian);
            }
            piv[k] = p;
            let last_col = (k + ku + kl).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let a = self.idx(k, j);
                    let b = self.idx(p, j);
                    self.data.swap(a, b);
                }
            }
            let d = self.data[self.idx(k, k)];
            for i in k + 1..=last_row {
                let ik = self.idx(i, k);
                let l = self.data[ik] / d;
                self.data[ik] = l;
                if l != T::zero() {
                    for j in k + 1..=last_col {
                        let u = self.data[self.idx(k, j)];
                        let ij = self.idx(i, j);
                        self.data[ij] -= l * u;
                    }
                }
            }
        }
        Ok(BandedLu { m: self, piv })
    }
}

#[derive(Clone, Debug)]
pub struct BandedLu<T> {
    m: Banded<T>,
    piv: Vec<usize>,
}

impl<T: Real> BandedLu<T> {
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.m.n;
        let (kl, ku) = (self.m.kl, self.m.ku);
        let mut x = b.to_vec();
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            for i in k + 1..=(k + kl).min(n - 1) {
                x[i] -= self.m.data[self.m.idx(i, k)] * xk;
            }
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..=(i + ku + kl).min(n - 1) {
                s -= self.m.data[self.m.idx(i, j)] * x[j];
            }
            x[i] = s / self.m.data[self.m.idx(i, i)];
        }
        x
    }
}

pub fn norm_inf<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

pub fn norm2<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m + *x * *x).sqrt()
}
