//! Photon statistics of the simple subsystems that make up each period: a
//! single resonantly driven two-level atom and a dipole-coupled pair of them.
//!
//! Conventions: resonant driving `H = (Ω/2)(σ⁺ + σ⁻)` and spontaneous decay
//! rate `A`. The complex coupling `C` enters the pair dynamics with `Re C` as
//! the collective decay rate and `Im C / 2` as the coherent exchange.

use num_complex::Complex;

use crate::error::{domain, Error, Result};
use crate::scalar::{lit, to_f64, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelParams<T> {
    /// Einstein coefficient of the transition.
    pub a: T,
    /// Rabi frequency of the driving laser.
    pub omega: T,
}

impl<T: Scalar> TwoLevelParams<T> {
    pub fn new(a: T, omega: T) -> Result<Self> {
        if !(a > T::zero()) || !a.is_finite() {
            return Err(domain("A", to_f64(a), "finite and > 0"));
        }
        if !(omega >= T::zero()) || !omega.is_finite() {
            return Err(domain("Omega", to_f64(omega), "finite and >= 0"));
        }
        Ok(Self { a, omega })
    }

    /// `γ² = (16Ω² − A²)/16`; negative below the Rabi threshold.
    pub fn gamma_squared(&self) -> T {
        self.omega * self.omega - self.a * self.a / lit(16.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingGeometry<T> {
    /// Dimensionless separation `k·r = 2πr/λ`.
    pub kr: T,
    /// Angle between the dipole moments and the connecting line.
    pub theta: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipoleCoupling<T> {
    pub c: Complex<T>,
    /// Present when the coupling was computed from a separation.
    pub geometry: Option<CouplingGeometry<T>>,
}

impl<T: Scalar> DipoleCoupling<T> {
    pub fn none() -> Self {
        Self::direct(T::zero(), T::zero())
    }

    pub fn direct(re: T, im: T) -> Self {
        Self { c: Complex::new(re, im), geometry: None }
    }

    pub fn re(&self) -> T {
        self.c.re
    }

    pub fn im(&self) -> T {
        self.c.im
    }

    /// Coupling multiplied by `factor`; geometry is dropped.
    pub fn scaled(&self, factor: T) -> Self {
        Self::direct(self.c.re * factor, self.c.im * factor)
    }
}

/// Which constant multiplies the non-secular `sin γτ` term in the
/// first-order pair correlator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum G2SineConstant {
    /// `(512Ω⁶ + 41A⁶ + 2A²Ω²(776Ω² − 391A²)) / (64Aγ³)`, as published.
    #[default]
    Published,
    /// `(512Ω⁶ + 112A²Ω⁴ + 28A⁴Ω² − 4A⁶) / (64Aγ³)`, the value that makes the
    /// first-order term agree with the exact pair dynamics. It differs from
    /// the published constant by `45(A² − 16Ω²)(A² − 2Ω²)/(64Aγ³)`.
    Corrected,
}

impl G2SineConstant {
    pub fn label(self) -> &'static str {
        match self {
            Self::Published => "published",
            Self::Corrected => "corrected",
        }
    }
}

impl std::str::FromStr for G2SineConstant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "published" => Ok(Self::Published),
            "corrected" => Ok(Self::Corrected),
            other => Err(Error::Parse(format!("unknown sine constant '{other}' (published|corrected)"))),
        }
    }
}

/// Damped oscillation terms, each already multiplied by `e^{−dτ}`:
/// `cos γτ`, `sin γτ / γ` and `(τ cos γτ − sin γτ / γ) / γ²`. All three are
/// even in `γ`, hence analytic in `γ²` and finite at `γ = 0`.
struct Oscillation<T> {
    cos: Complex<T>,
    sinc: Complex<T>,
    secular: Complex<T>,
}

fn oscillation<T: Scalar>(gamma_sq: T, tau: T, decay: T) -> Oscillation<T> {
    let z2 = gamma_sq * tau * tau;
    if z2.abs() < lit(0.25) {
        let env = (-decay * tau).exp();
        // Power series in z² = (γτ)².
        let (mut cos, mut sinc, mut secular) = (T::zero(), T::zero(), T::zero());
        let mut pow = T::one(); // (−z²)^k
        let mut fact_even = T::one(); // (2k)!
        for k in 0..20usize {
            let fact_odd = fact_even * lit((2 * k + 1) as f64);
            cos = cos + pow / fact_even;
            sinc = sinc + pow / fact_odd;
            if k >= 1 {
                // (−1)^k z^{2k−2}: divide (−z²)^k by −z² without dividing by zero.
                secular = secular + pow_km1(z2, k) * (T::one() / fact_even - T::one() / fact_odd);
            }
            pow = -pow * z2;
            fact_even = fact_odd * lit((2 * k + 2) as f64);
        }
        let c = |x: T| Complex::new(x, T::zero());
        return Oscillation {
            cos: c(env * cos),
            sinc: c(env * tau * sinc),
            secular: c(env * tau * tau * tau * secular),
        };
    }
    let i = Complex::new(T::zero(), T::one());
    let gamma = Complex::new(gamma_sq, T::zero()).sqrt();
    let d = Complex::new(decay, T::zero());
    let two: T = lit(2.0);
    let ep = ((i * gamma - d) * tau).exp();
    let em = ((-i * gamma - d) * tau).exp();
    let cos = (ep + em) / two;
    let sin = (ep - em) / (i * two);
    let sinc = sin / gamma;
    let secular = (cos * tau - sinc) / (gamma * gamma);
    Oscillation { cos, sinc, secular }
}

/// `(−1)^k (z²)^{k−1}` for `k ≥ 1`.
fn pow_km1<T: Scalar>(z2: T, k: usize) -> T {
    let sign = if k.is_multiple_of(2) { T::one() } else { -T::one() };
    sign * z2.powi(k as i32 - 1)
}

fn real_part<T: Scalar>(z: Complex<T>, what: &str) -> Result<T> {
    let tol = lit::<T>(1e-12).max(T::epsilon() * lit(64.0));
    if z.im.abs() > tol * (T::one() + z.re.abs()) {
        return Err(Error::Numerical(format!("{what}: imaginary residue {} too large", z.im)));
    }
    Ok(z.re)
}

fn check_tau<T: Scalar>(tau: T) -> Result<()> {
    if !(tau >= T::zero()) || !tau.is_finite() {
        return Err(domain("tau", to_f64(tau), "finite and >= 0"));
    }
    Ok(())
}

/// `g₁(τ) = 1 − e^{−3Aτ/4}(cos γτ + (3A/4γ) sin γτ)` for one two-level atom.
pub fn g1_correlation<T: Scalar>(params: &TwoLevelParams<T>, tau: T) -> Result<T> {
    check_tau(tau)?;
    let a = params.a;
    let three_quarters: T = lit(0.75);
    let osc = oscillation(params.gamma_squared(), tau, three_quarters * a);
    let g = Complex::new(T::one(), T::zero()) - (osc.cos + osc.sinc * (three_quarters * a));
    real_part(g, "g1")
}

/// Mean photon emission rate `I₁ = AΩ²/(A² + 2Ω²)`.
pub fn intensity_single<T: Scalar>(params: &TwoLevelParams<T>) -> T {
    let (a, w2) = (params.a, params.omega * params.omega);
    a * w2 / (a * a + lit::<T>(2.0) * w2)
}

/// First-order-in-`C` intensity correlation of two dipole-coupled two-level
/// atoms, using the published sine constant.
pub fn g2_pair_correlation<T: Scalar>(params: &TwoLevelParams<T>, coupling: &DipoleCoupling<T>, tau: T) -> Result<T> {
    g2_pair_correlation_with(params, coupling, tau, G2SineConstant::Published)
}

/// Same as [`g2_pair_correlation`] with an explicit choice of sine constant.
///
/// The coefficients `K/(64Aγ³)` of `sin γτ` and `X/(16γ²)·τ` of `cos γτ`
/// are individually singular at `γ = 0`. Their singular parts cancel, so the
/// combination is evaluated as `(X/16)·w + (D/γ²)·sin γτ/γ` with
/// `w = (τ cos γτ − sin γτ/γ)/γ²`, where `D/γ²` is the polynomial quotient of
/// `X/16 − K/(64A)` by `γ²`.
pub fn g2_pair_correlation_with<T: Scalar>(
    params: &TwoLevelParams<T>,
    coupling: &DipoleCoupling<T>,
    tau: T,
    sine: G2SineConstant,
) -> Result<T> {
    check_tau(tau)?;
    let a = params.a;
    let u = params.omega * params.omega;
    let aa = a * a;
    let half: T = lit(0.5);
    let three_quarters: T = lit(0.75);
    let s = aa + lit::<T>(2.0) * u;
    let osc = oscillation(params.gamma_squared(), tau, three_quarters * a);

    let base = Complex::new(T::one(), T::zero()) - (osc.cos + osc.sinc * (three_quarters * a)) * half;

    let x = a * s * (aa - lit::<T>(22.0) * u);
    let l = (aa - lit::<T>(6.0) * u) * s;
    let d_over_gamma_sq = match sine {
        G2SineConstant::Published => {
            (lit::<T>(37.0) * aa * aa - lit::<T>(110.0) * aa * u - lit::<T>(32.0) * u * u) / (lit::<T>(4.0) * a)
        }
        G2SineConstant::Corrected => -(lit::<T>(8.0) * u * u + lit::<T>(5.0) * aa * u + lit::<T>(2.0) * aa * aa) / a,
    };
    let bracket = osc.cos * (lit::<T>(4.0) * u) + osc.secular * (x / lit(16.0)) + osc.sinc * d_over_gamma_sq
        - osc.sinc * (l / lit::<T>(4.0) * tau);
    let prefactor = half * a * coupling.re() / (s * s);
    real_part(base - bracket * prefactor, "g2")
}

/// `g₂(0)` of the coupled pair to all orders in `C`, for angle-averaged
/// detection.
pub fn g2_zero<T: Scalar>(params: &TwoLevelParams<T>, coupling: &DipoleCoupling<T>) -> Result<T> {
    let (a, u) = (params.a, params.omega * params.omega);
    let (re, im) = (coupling.re(), coupling.im());
    let den = lit::<T>(2.0) * u + a * (a + re);
    if den.abs() <= T::epsilon() * (a * a + u) {
        return Err(Error::Singular("2Ω² + A(A + Re C) vanishes".into()));
    }
    let lead = (a * a + re * re) / (lit::<T>(2.0) * a * a);
    Ok(lead * (T::one() + a * (a * im * im - lit::<T>(4.0) * u * re) / (den * den)))
}

/// Mean emission rate of the coupled pair, all orders in `C`.
pub fn intensity_pair<T: Scalar>(params: &TwoLevelParams<T>, coupling: &DipoleCoupling<T>) -> T {
    let (a, u) = (params.a, params.omega * params.omega);
    if u == T::zero() {
        return T::zero();
    }
    let (re, im) = (coupling.re(), coupling.im());
    let two: T = lit(2.0);
    let s = a * a + two * u;
    two * a * u * (two * u + a * (a + re)) / (s * s + a * a * re * (two * a + re) + a * a * im * im)
}

/// Dipole–dipole coupling constant at separation `kr` and dipole angle `theta`.
pub fn dipole_coupling<T: Scalar>(kr: T, theta: T, a: T) -> Result<DipoleCoupling<T>> {
    if !(kr > T::zero()) || !kr.is_finite() {
        return Err(domain("kr", to_f64(kr), "finite and > 0"));
    }
    if !(theta >= T::zero() && theta <= T::PI()) {
        return Err(domain("theta", to_f64(theta), "within [0, pi]"));
    }
    let i = Complex::new(T::zero(), T::one());
    let one = Complex::new(T::one(), T::zero());
    let x = Complex::new(kr, T::zero());
    let cos2 = theta.cos() * theta.cos();
    let transverse = one / (i * x) * (T::one() - cos2);
    let near = (one / (x * x) - one / (i * x * x * x)) * (T::one() - lit::<T>(3.0) * cos2);
    let c = (i * x).exp() * (transverse + near) * (lit::<T>(1.5) * a);
    Ok(DipoleCoupling { c, geometry: Some(CouplingGeometry { kr, theta }) })
}
