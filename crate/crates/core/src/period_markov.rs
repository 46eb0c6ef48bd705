//! Continuous-time Markov chain for switching between fluorescence periods.
//!
//! Rates `p[i][j]` give the probability per unit time of jumping from period
//! `i` to period `j`. The induced generator `B` drives the occupation matrix
//! `P(τ) = exp(Bτ)`, whose entry `(i, j)` is the probability of being in
//! period `j` a time `τ` after having been in period `i`.
//!
//! Times are in units of `1/A₃` and rates in units of `A₃` throughout.

use num_complex::Complex;

use crate::dense::SquareMatrix;
use crate::error::{domain, Error, Result};
use crate::scalar::{lit, to_f64, Scalar};

/// Relative eigenvalue separation below which the spectral formula is
/// abandoned in favour of the series exponential.
pub const EIGEN_GAP_TOLERANCE: f64 = 1e-8;

fn tolerance<T: Scalar>(base: f64) -> T {
    lit::<T>(base).max(T::epsilon() * lit(1e4))
}

/// Period-switching rates. The diagonal is identically zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionRates<T> {
    p: SquareMatrix<T>,
}

impl<T: Scalar> TransitionRates<T> {
    pub fn new(rows: &[Vec<T>]) -> Result<Self> {
        let p = SquareMatrix::from_rows(rows).ok_or_else(|| Error::Validation("rate matrix must be square".into()))?;
        Self::from_matrix(p)
    }

    pub fn from_matrix(p: SquareMatrix<T>) -> Result<Self> {
        let n = p.dim();
        if n < 2 {
            return Err(Error::Validation(format!("need at least 2 periods, got {n}")));
        }
        for i in 0..n {
            for j in 0..n {
                let r = p[(i, j)];
                if !r.is_finite() {
                    return Err(Error::Validation(format!("rate p[{i}][{j}] is not finite")));
                }
                if i == j && r != T::zero() {
                    return Err(Error::Validation(format!("diagonal rate p[{i}][{i}] = {r} must be zero")));
                }
                if r < T::zero() {
                    return Err(Error::Validation(format!("rate p[{i}][{j}] = {r} is negative")));
                }
            }
        }
        Ok(Self { p })
    }

    /// Dark/light chain with `p₀₁ = 1/T₀`, `p₁₀ = 1/T₁`.
    pub fn two_period(p01: T, p10: T) -> Result<Self> {
        let z = T::zero();
        Self::new(&[vec![z, p01], vec![p10, z]])
    }

    /// Three-period chain with `p₀₂ = p₂₀ = 0`.
    pub fn three_period(p01: T, p10: T, p12: T, p21: T) -> Result<Self> {
        let z = T::zero();
        Self::new(&[vec![z, p01, z], vec![p10, z, p12], vec![z, p21, z]])
    }

    /// The degenerate one-period chain: no switching at all.
    pub fn trivial() -> Self {
        Self { p: SquareMatrix::zeros(1) }
    }

    pub fn n(&self) -> usize {
        self.p.dim()
    }

    pub fn rate(&self, from: usize, to: usize) -> T {
        self.p[(from, to)]
    }

    pub fn matrix(&self) -> &SquareMatrix<T> {
        &self.p
    }

    /// Total escape rate `Σ_k p_ik` out of period `i`.
    pub fn escape_rate(&self, i: usize) -> T {
        self.p.row(i).iter().copied().sum()
    }
}

/// Generator `B_ij = p_ij − δ_ij Σ_k p_ik`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix<T> {
    b: SquareMatrix<T>,
}

impl<T: Scalar> GeneratorMatrix<T> {
    /// Validates a raw matrix as a generator: nonnegative off-diagonal and
    /// zero row sums.
    pub fn from_matrix(b: SquareMatrix<T>) -> Result<Self> {
        let n = b.dim();
        let tol = tolerance::<T>(1e-12);
        for i in 0..n {
            let mut sum = T::zero();
            let mut scale = T::zero();
            for j in 0..n {
                let v = b[(i, j)];
                if !v.is_finite() {
                    return Err(Error::Validation(format!("B[{i}][{j}] is not finite")));
                }
                if i != j && v < T::zero() {
                    return Err(Error::Validation(format!("off-diagonal B[{i}][{j}] = {v} is negative")));
                }
                sum = sum + v;
                scale = scale + v.abs();
            }
            if sum.abs() > tol * scale.max(T::min_positive_value()) {
                return Err(Error::Validation(format!("row {i} of B sums to {sum}, not zero")));
            }
        }
        Ok(Self { b })
    }

    pub fn n(&self) -> usize {
        self.b.dim()
    }

    pub fn matrix(&self) -> &SquareMatrix<T> {
        &self.b
    }

    /// Eigenvalues in closed form for `n ≤ 3`, numerically otherwise. The
    /// first entry is always the exact zero eigenvalue.
    pub fn eigenvalues(&self) -> Vec<Complex<T>> {
        let b = &self.b;
        let zero = Complex::new(T::zero(), T::zero());
        match self.n() {
            1 => vec![zero],
            2 => vec![zero, Complex::new(b[(0, 0)] + b[(1, 1)], T::zero())],
            3 => {
                // det B = 0, so the characteristic polynomial is μ(μ² − tr·μ + m₂).
                let tr = b[(0, 0)] + b[(1, 1)] + b[(2, 2)];
                let minor = |i: usize, j: usize| b[(i, i)] * b[(j, j)] - b[(i, j)] * b[(j, i)];
                let m2 = minor(0, 1) + minor(0, 2) + minor(1, 2);
                let (r1, r2) = quadratic_roots(-tr, m2);
                vec![zero, r1, r2]
            }
            n => {
                let m = nalgebra::DMatrix::<f64>::from_fn(n, n, |i, j| to_f64(b[(i, j)]));
                let mut eig: Vec<Complex<T>> =
                    m.complex_eigenvalues().iter().map(|z| Complex::new(lit(z.re), lit(z.im))).collect();
                let (k, _) = eig.iter().enumerate().fold((0, T::infinity()), |best, (k, z)| {
                    if z.norm() < best.1 {
                        (k, z.norm())
                    } else {
                        best
                    }
                });
                eig.swap(0, k);
                eig[0] = zero;
                eig
            }
        }
    }
}

/// Roots of `μ² + b·μ + c` using the cancellation-free form.
fn quadratic_roots<T: Scalar>(b: T, c: T) -> (Complex<T>, Complex<T>) {
    let two: T = lit(2.0);
    let disc = b * b - lit::<T>(4.0) * c;
    if disc >= T::zero() {
        let s = disc.sqrt();
        let q = -(b + b.signum() * s) / two;
        if q == T::zero() {
            return (Complex::new(T::zero(), T::zero()), Complex::new(T::zero(), T::zero()));
        }
        (Complex::new(c / q, T::zero()), Complex::new(q, T::zero()))
    } else {
        let re = -b / two;
        let im = (-disc).sqrt() / two;
        (Complex::new(re, im), Complex::new(re, -im))
    }
}

/// Occupation matrix `P(τ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyMatrix<T> {
    pub tau: T,
    pub p: SquareMatrix<T>,
}

impl<T: Scalar> OccupancyMatrix<T> {
    pub fn get(&self, i: usize, j: usize) -> T {
        self.p[(i, j)]
    }

    fn checked(tau: T, p: SquareMatrix<T>) -> Result<Self> {
        let tol = tolerance::<T>(1e-10);
        for (i, row) in p.rows().enumerate() {
            let sum: T = row.iter().copied().sum();
            if (sum - T::one()).abs() > tol {
                return Err(Error::Numerical(format!("row {i} of P({tau}) sums to {sum}")));
            }
            if let Some(v) = row.iter().find(|&&v| v < -tol || v > T::one() + tol || !v.is_finite()) {
                return Err(Error::Numerical(format!("P({tau}) entry {v} outside [0, 1] in row {i}")));
            }
        }
        Ok(Self { tau, p })
    }
}

/// Stationary occupation probabilities `P_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyProbabilities<T> {
    pub p: Vec<T>,
}

impl<T: Scalar> SteadyProbabilities<T> {
    pub fn get(&self, i: usize) -> T {
        self.p[i]
    }
}

pub fn build_generator<T: Scalar>(rates: &TransitionRates<T>) -> GeneratorMatrix<T> {
    let n = rates.n();
    let mut b = rates.matrix().clone();
    for i in 0..n {
        b[(i, i)] = -rates.escape_rate(i);
    }
    GeneratorMatrix { b }
}

/// Spectral-formula exponential `Σ_i e^{μ_i τ} Π_{α≠i} (B − μ_α)/(μ_i − μ_α)`.
/// Returns `None` if two eigenvalues are closer than the gap tolerance.
pub fn exp_spectral<T: Scalar>(gen: &GeneratorMatrix<T>, tau: T) -> Option<SquareMatrix<T>> {
    let n = gen.n();
    let mu = gen.eigenvalues();
    let scale = mu.iter().fold(T::zero(), |m, z| m.max(z.norm()));
    if scale == T::zero() {
        return None;
    }
    for i in 0..n {
        for j in i + 1..n {
            if (mu[i] - mu[j]).norm() < lit::<T>(EIGEN_GAP_TOLERANCE) * scale {
                return None;
            }
        }
    }
    let bc = gen.matrix().map(|x| Complex::new(x, T::zero()));
    let mut acc = SquareMatrix::<Complex<T>>::zeros(n);
    for i in 0..n {
        let mut prod = SquareMatrix::<Complex<T>>::identity(n);
        for (alpha, &m) in mu.iter().enumerate() {
            if alpha != i {
                prod = prod.matmul(&bc.shift(m)).scale(Complex::new(T::one(), T::zero()) / (mu[i] - m));
            }
        }
        let w = (mu[i] * tau).exp();
        acc = &acc + &prod.scale(w);
    }
    Some(acc.map(|z| z.re))
}

/// `P(τ) = exp(Bτ)`, by the spectral formula when the eigenvalues are well
/// separated and by scaling-and-squaring otherwise.
pub fn occupancy_matrix<T: Scalar>(gen: &GeneratorMatrix<T>, tau: T) -> Result<OccupancyMatrix<T>> {
    if !(tau >= T::zero()) || !tau.is_finite() {
        return Err(domain("tau", to_f64(tau), "finite and >= 0"));
    }
    if tau == T::zero() {
        return Ok(OccupancyMatrix { tau, p: SquareMatrix::identity(gen.n()) });
    }
    let p = exp_spectral(gen, tau).unwrap_or_else(|| gen.matrix().expm_scaled(tau));
    OccupancyMatrix::checked(tau, p)
}

/// Stationary distribution: the left null vector of `B` normalised to one.
pub fn steady_probabilities<T: Scalar>(gen: &GeneratorMatrix<T>) -> Result<SteadyProbabilities<T>> {
    let n = gen.n();
    let b = gen.matrix();
    let scale = b.max_abs();
    if n == 1 {
        return Ok(SteadyProbabilities { p: vec![T::one()] });
    }
    let tol = lit::<T>(1e-12) * lit::<T>(n as f64) * scale;
    let rank = b.rank(tol);
    if rank + 1 != n {
        return Err(Error::Degenerate(format!("generator has {} zero eigenvalues; the chain is reducible", n - rank)));
    }
    // Bᵀπ = 0 with the last equation replaced by Σπ = 1.
    let mut m = b.transpose();
    for j in 0..n {
        m[(n - 1, j)] = T::one();
    }
    let mut rhs = vec![T::zero(); n];
    rhs[n - 1] = T::one();
    let mut p = m.solve(&rhs, tol).ok_or_else(|| Error::Degenerate("stationary system is singular".into()))?;
    let tol = tolerance::<T>(1e-12);
    for (i, v) in p.iter_mut().enumerate() {
        if *v < -tol {
            return Err(Error::Numerical(format!("stationary probability P_{i} = {v} is negative")));
        }
        *v = v.max(T::zero());
    }
    let total: T = p.iter().copied().sum();
    p.iter_mut().for_each(|v| *v = *v / total);
    Ok(SteadyProbabilities { p })
}

/// Closed-form occupation entries for the dark/single/double chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreePeriodOccupancy<T> {
    pub p11: T,
    pub p12: T,
    pub p21: T,
    pub p22: T,
    pub mu1: T,
    pub mu2: T,
}

/// Nonzero eigenvalues `μ₁ > μ₂` of the three-period generator with
/// `p₀₂ = p₂₀ = 0`.
pub fn three_period_eigenvalues<T: Scalar>(p01: T, p10: T, p12: T, p21: T) -> Result<(T, T)> {
    let half: T = lit(0.5);
    let sum = p01 + p10 + p12 + p21;
    let d = p01 + p10 - p12 - p21;
    let disc = d * d + lit::<T>(4.0) * p10 * p12;
    if disc <= lit::<T>(1e-12) * sum * sum {
        return Err(Error::Degenerate("μ₁ = μ₂: discriminant vanishes".into()));
    }
    let mu2 = -half * (sum + disc.sqrt());
    // μ₁μ₂ = p₀₁p₁₂ + p₀₁p₂₁ + p₁₀p₂₁
    let mu1 = (p01 * p12 + p01 * p21 + p10 * p21) / mu2;
    Ok((mu1, mu2))
}

pub fn three_period_occupancy<T: Scalar>(p01: T, p10: T, p12: T, p21: T, tau: T) -> Result<ThreePeriodOccupancy<T>> {
    for (name, v) in [("p01", p01), ("p10", p10), ("p12", p12), ("p21", p21)] {
        if !(v > T::zero()) || !v.is_finite() {
            return Err(domain(name, to_f64(v), "finite and > 0"));
        }
    }
    if !(tau >= T::zero()) {
        return Err(domain("tau", to_f64(tau), ">= 0"));
    }
    let (mu1, mu2) = three_period_eigenvalues(p01, p10, p12, p21)?;
    let e1 = (mu1 * tau).exp();
    let e2 = (mu2 * tau).exp();
    let d1 = mu1 * (mu1 - mu2);
    let d2 = mu2 * (mu1 - mu2);
    let prod = mu1 * mu2;

    let p11 = p01 * p21 / prod - e1 / d1 * (p10 * (p21 + mu1) + p12 * (p01 + mu1))
        + e2 / d2 * (p10 * (p21 + mu2) + p12 * (p01 + mu2));
    let p12v = p01 * p12 / prod + p12 * e1 / d1 * (p01 + mu1) - p12 * e2 / d2 * (p01 + mu2);
    let p21v = p01 * p21 / prod + p21 * e1 / d1 * (p01 + mu1) - p21 * e2 / d2 * (p01 + mu2);
    let p22 = p01 * p12 / prod + p21 * e1 / d1 * (p12 + p21 + mu2) - p21 * e2 / d2 * (p12 + p21 + mu1);

    Ok(ThreePeriodOccupancy { p11, p12: p12v, p21: p21v, p22, mu1, mu2 })
}

/// Mean durations `T_i = 1 / Σ_{k≠i} p_ik`.
pub fn mean_durations<T: Scalar>(rates: &TransitionRates<T>) -> Result<Vec<T>> {
    (0..rates.n())
        .map(|i| {
            let out = rates.escape_rate(i);
            if out > T::zero() {
                Ok(T::one() / out)
            } else {
                Err(Error::InfiniteDuration { period: i })
            }
        })
        .collect()
}
