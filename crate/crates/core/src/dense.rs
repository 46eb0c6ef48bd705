//! Small row-major square matrices for the period-switching chains.
//!
//! The chains have a handful of states, so plain `Vec` storage and naive
//! products are all that is needed. The same type is reused with complex
//! entries for the spectral formula.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_traits::Num;

use crate::scalar::{lit, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix<E> {
    n: usize,
    data: Vec<E>,
}

impl<E: Copy + Num> SquareMatrix<E> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![E::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = E::one();
        }
        m
    }

    /// Builds a matrix from rows; returns `None` if the rows are ragged.
    pub fn from_rows(rows: &[Vec<E>]) -> Option<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return None;
        }
        Some(Self { n, data: rows.iter().flatten().copied().collect() })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> E) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[E] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[E]> {
        self.data.chunks(self.n.max(1))
    }

    pub fn as_slice(&self) -> &[E] {
        &self.data
    }

    pub fn map<F: Copy + Num>(&self, f: impl Fn(E) -> F) -> SquareMatrix<F> {
        SquareMatrix { n: self.n, data: self.data.iter().map(|&x| f(x)).collect() }
    }

    pub fn scale(&self, s: E) -> Self {
        self.map(|x| x * s)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    /// `self - s·I`
    pub fn shift(&self, s: E) -> Self {
        let mut m = self.clone();
        for i in 0..self.n {
            m[(i, i)] = m[(i, i)] - s;
        }
        m
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] = out.data[i * n + j] + a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl<T: Scalar> SquareMatrix<T> {
    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> T {
        self.rows().map(|r| r.iter().map(|x| x.abs()).sum::<T>()).fold(T::zero(), T::max)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    pub fn row_sums(&self) -> Vec<T> {
        self.rows().map(|r| r.iter().copied().sum()).collect()
    }

    /// Matrix exponential `exp(self · t)` by scaling and squaring of a
    /// truncated Taylor series.
    pub fn expm_scaled(&self, t: T) -> Self {
        let n = self.n;
        let norm = self.norm_inf() * t.abs();
        let half: T = lit(0.5);
        let mut squarings = 0usize;
        if norm > half {
            squarings = (norm / half).log2().ceil().to_usize().unwrap_or(0);
        }
        let scale = t / lit::<T>(2f64.powi(squarings as i32));
        let a = self.scale(scale);
        let mut sum = Self::identity(n);
        let mut term = Self::identity(n);
        for k in 1..=30 {
            term = term.matmul(&a).scale(T::one() / lit::<T>(k as f64));
            sum = &sum + &term;
            if term.max_abs() <= T::epsilon() * sum.max_abs() {
                break;
            }
        }
        for _ in 0..squarings {
            sum = sum.matmul(&sum);
        }
        sum
    }

    /// Solves `self · x = rhs` by Gaussian elimination with partial pivoting.
    /// Returns `None` when a pivot falls below `tol`.
    pub fn solve(&self, rhs: &[T], tol: T) -> Option<Vec<T>> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut b = rhs.to_vec();
        for col in 0..n {
            let (piv, val) =
                (col..n)
                    .map(|r| (r, a[r * n + col].abs()))
                    .fold((col, T::zero()), |best, c| if c.1 > best.1 { c } else { best });
            if val <= tol {
                return None;
            }
            if piv != col {
                for j in 0..n {
                    a.swap(col * n + j, piv * n + j);
                }
                b.swap(col, piv);
            }
            let d = a[col * n + col];
            for r in col + 1..n {
                let f = a[r * n + col] / d;
                if f.is_zero() {
                    continue;
                }
                for j in col..n {
                    a[r * n + j] = a[r * n + j] - f * a[col * n + j];
                }
                b[r] = b[r] - f * b[col];
            }
        }
        let mut x = vec![T::zero(); n];
        for i in (0..n).rev() {
            let s: T = (i + 1..n).map(|j| a[i * n + j] * x[j]).sum();
            x[i] = (b[i] - s) / a[i * n + i];
        }
        Some(x)
    }

    /// Numerical rank from Gaussian elimination with full pivoting.
    pub fn rank(&self, tol: T) -> usize {
        let n = self.n;
        let mut a = self.data.clone();
        let mut rank = 0;
        let mut rows: Vec<usize> = (0..n).collect();
        let mut cols: Vec<usize> = (0..n).collect();
        for step in 0..n {
            let mut best = (step, step, T::zero());
            for (ri, &r) in rows.iter().enumerate().skip(step) {
                for (ci, &c) in cols.iter().enumerate().skip(step) {
                    let v = a[r * n + c].abs();
                    if v > best.2 {
                        best = (ri, ci, v);
                    }
                }
            }
            if best.2 <= tol {
                break;
            }
            rows.swap(step, best.0);
            cols.swap(step, best.1);
            let (pr, pc) = (rows[step], cols[step]);
            let d = a[pr * n + pc];
            for &r in rows.iter().skip(step + 1) {
                let f = a[r * n + pc] / d;
                for &c in cols.iter().skip(step) {
                    a[r * n + c] = a[r * n + c] - f * a[pr * n + c];
                }
            }
            rank += 1;
        }
        rank
    }
}

impl<E> Index<(usize, usize)> for SquareMatrix<E> {
    type Output = E;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &E {
        &self.data[i * self.n + j]
    }
}

impl<E> IndexMut<(usize, usize)> for SquareMatrix<E> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut E {
        &mut self.data[i * self.n + j]
    }
}

impl<E: Copy + Num> Add for &SquareMatrix<E> {
    type Output = SquareMatrix<E>;
    fn add(self, rhs: Self) -> SquareMatrix<E> {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        SquareMatrix { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect() }
    }
}

impl<E: Copy + Num> Sub for &SquareMatrix<E> {
    type Output = SquareMatrix<E>;
    fn sub(self, rhs: Self) -> SquareMatrix<E> {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        SquareMatrix { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect() }
    }
}

impl<E: Copy + Num> Mul for &SquareMatrix<E> {
    type Output = SquareMatrix<E>;
    fn mul(self, rhs: Self) -> SquareMatrix<E> {
        self.matmul(rhs)
    }
}
