//! Composition of per-period correlators into the full intensity correlation
//! of a blinking emitter, and its application to two dipole-coupled V systems.
//!
//! With stationary period probabilities `P_i`, occupation matrix `P_ij(τ)`,
//! period intensities `I_i` and period correlators `g_i(τ)`:
//!
//! ```text
//! g(τ) = Σ_ij P_i I_i I_j P_ij(τ) g_j(τ) / (Σ_α P_α I_α)²
//! ```
//!
//! Periods are indexed `0 = dark`, `1 = single`, `2 = double` for the V-pair.

use std::fmt;
use std::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::period_markov::{
    build_generator, mean_durations, occupancy_matrix, steady_probabilities, three_period_occupancy, GeneratorMatrix,
    SteadyProbabilities, TransitionRates,
};
use crate::scalar::{lit, to_f64, Scalar};
use crate::subsystem_optics::{
    g1_correlation, g2_pair_correlation_with, intensity_pair, intensity_single, DipoleCoupling, G2SineConstant,
    TwoLevelParams,
};

/// Default lower edge (in units of `1/A₃`) of the regime where the period
/// correlators have relaxed to one.
pub const DEFAULT_PLATEAU_ONSET: f64 = 10.0;

/// Intensity correlator of a single period.
#[derive(Clone)]
pub enum Correlator<T> {
    /// No emission; the correlator is never evaluated.
    Dark,
    /// `g ≡ 1`.
    Uncorrelated,
    TwoLevel(TwoLevelParams<T>),
    Pair {
        params: TwoLevelParams<T>,
        coupling: DipoleCoupling<T>,
        sine: G2SineConstant,
    },
    Custom(Arc<dyn Fn(T) -> T + Send + Sync>),
}

impl<T: Scalar> Correlator<T> {
    pub fn eval(&self, tau: T) -> Result<T> {
        match self {
            Correlator::Dark | Correlator::Uncorrelated => Ok(T::one()),
            Correlator::TwoLevel(p) => g1_correlation(p, tau),
            Correlator::Pair { params, coupling, sine } => g2_pair_correlation_with(params, coupling, tau, *sine),
            Correlator::Custom(f) => Ok(f(tau)),
        }
    }
}

impl<T: fmt::Debug> fmt::Debug for Correlator<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Correlator::Dark => write!(f, "Dark"),
            Correlator::Uncorrelated => write!(f, "Uncorrelated"),
            Correlator::TwoLevel(p) => f.debug_tuple("TwoLevel").field(p).finish(),
            Correlator::Pair { params, coupling, sine } => {
                f.debug_struct("Pair").field("params", params).field("coupling", coupling).field("sine", sine).finish()
            }
            Correlator::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Period<T> {
    pub intensity: T,
    pub correlator: Correlator<T>,
}

impl<T: Scalar> Period<T> {
    pub fn dark() -> Self {
        Self { intensity: T::zero(), correlator: Correlator::Dark }
    }

    pub fn new(intensity: T, correlator: Correlator<T>) -> Self {
        Self { intensity, correlator }
    }

    pub fn is_dark(&self) -> bool {
        self.intensity == T::zero()
    }
}

/// Intensities and correlators of every period. Mean durations come from the
/// accompanying [`TransitionRates`] via [`PeriodSpec::durations`].
#[derive(Debug, Clone)]
pub struct PeriodSpec<T> {
    periods: Vec<Period<T>>,
}

impl<T: Scalar> PeriodSpec<T> {
    pub fn new(periods: Vec<Period<T>>) -> Result<Self> {
        if periods.is_empty() {
            return Err(Error::Validation("at least one period is required".into()));
        }
        for (i, p) in periods.iter().enumerate() {
            if !(p.intensity >= T::zero()) || !p.intensity.is_finite() {
                return Err(Error::Validation(format!("period {i} intensity {} must be finite and >= 0", p.intensity)));
            }
        }
        Ok(Self { periods })
    }

    pub fn len(&self) -> usize {
        self.periods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.periods.is_empty()
    }

    pub fn periods(&self) -> &[Period<T>] {
        &self.periods
    }

    pub fn intensities(&self) -> Vec<T> {
        self.periods.iter().map(|p| p.intensity).collect()
    }

    pub fn durations(&self, rates: &TransitionRates<T>) -> Result<Vec<T>> {
        mean_durations(rates)
    }
}

/// A period spec bound to its switching chain, with the stationary state
/// solved once so the model can be evaluated cheaply on a grid.
#[derive(Debug, Clone)]
pub struct BlinkingModel<T> {
    spec: PeriodSpec<T>,
    generator: GeneratorMatrix<T>,
    steady: SteadyProbabilities<T>,
    mean_intensity: T,
    plateau_onset: T,
}

impl<T: Scalar> BlinkingModel<T> {
    pub fn new(spec: PeriodSpec<T>, rates: &TransitionRates<T>) -> Result<Self> {
        if spec.len() != rates.n() {
            return Err(Error::Validation(format!(
                "{} periods but {} x {} rate matrix",
                spec.len(),
                rates.n(),
                rates.n()
            )));
        }
        let generator = build_generator(rates);
        let steady = steady_probabilities(&generator)?;
        let mean_intensity: T = spec.periods.iter().zip(&steady.p).map(|(p, &w)| w * p.intensity).sum();
        if !(mean_intensity > T::zero()) {
            return Err(Error::UndefinedCorrelation);
        }
        Ok(Self { spec, generator, steady, mean_intensity, plateau_onset: lit(DEFAULT_PLATEAU_ONSET) })
    }

    pub fn with_plateau_onset(mut self, onset: T) -> Self {
        self.plateau_onset = onset;
        self
    }

    pub fn steady(&self) -> &SteadyProbabilities<T> {
        &self.steady
    }

    /// Steady-state intensity `I_ss = Σ P_i I_i`.
    pub fn mean_intensity(&self) -> T {
        self.mean_intensity
    }

    /// True once `τ` exceeds the configured correlator-relaxation heuristic.
    pub fn in_plateau_regime(&self, tau: T) -> bool {
        tau > self.plateau_onset
    }

    fn weighted_sum(&self, tau: T, with_correlators: bool) -> Result<T> {
        let occ = occupancy_matrix(&self.generator, tau)?;
        let periods = &self.spec.periods;
        let mut g_vals = Vec::with_capacity(periods.len());
        for p in periods {
            g_vals.push(if with_correlators && !p.is_dark() { p.correlator.eval(tau)? } else { T::one() });
        }
        let mut num = T::zero();
        for (i, pi) in periods.iter().enumerate() {
            if pi.is_dark() {
                continue;
            }
            for (j, pj) in periods.iter().enumerate() {
                if pj.is_dark() {
                    continue;
                }
                num = num + self.steady.p[i] * pi.intensity * pj.intensity * occ.get(i, j) * g_vals[j];
            }
        }
        Ok(num / (self.mean_intensity * self.mean_intensity))
    }

    /// Full composed correlation `g(τ)`.
    pub fn g(&self, tau: T) -> Result<T> {
        self.weighted_sum(tau, true)
    }

    /// Long-time form with every period correlator replaced by one.
    pub fn plateau(&self, tau: T) -> Result<T> {
        self.weighted_sum(tau, false)
    }

    /// `Σ P_i I_i² / (Σ P_α I_α)²`: the plateau while `P_ij ≈ δ_ij`.
    pub fn intermediate_plateau(&self) -> T {
        let s: T = self.spec.periods.iter().zip(&self.steady.p).map(|(p, &w)| w * p.intensity * p.intensity).sum();
        s / (self.mean_intensity * self.mean_intensity)
    }

    /// Small-`τ` form `Σ P_i I_i² g_i(τ) / (Σ P_α I_α)²`, valid for `τ ≪ min T_i`.
    pub fn small_tau(&self, tau: T) -> Result<T> {
        let mut s = T::zero();
        for (p, &w) in self.spec.periods.iter().zip(&self.steady.p) {
            if !p.is_dark() {
                s = s + w * p.intensity * p.intensity * p.correlator.eval(tau)?;
            }
        }
        Ok(s / (self.mean_intensity * self.mean_intensity))
    }
}

pub fn compose_g<T: Scalar>(spec: &PeriodSpec<T>, rates: &TransitionRates<T>, tau: T) -> Result<T> {
    BlinkingModel::new(spec.clone(), rates)?.g(tau)
}

pub fn plateau_g<T: Scalar>(spec: &PeriodSpec<T>, rates: &TransitionRates<T>, tau: T) -> Result<T> {
    BlinkingModel::new(spec.clone(), rates)?.plateau(tau)
}

/// Dark/light emitter: `g(τ) = P₁₁(τ) g₁(τ) / P₁`.
pub fn g_dark_light<T: Scalar>(t0: T, t1: T, g1: &Correlator<T>, tau: T) -> Result<T> {
    if !(t0 > T::zero()) || !t0.is_finite() {
        return Err(domain("T0", to_f64(t0), "finite and > 0"));
    }
    if !(t1 > T::zero()) || !t1.is_finite() {
        return Err(domain("T1", to_f64(t1), "finite and > 0"));
    }
    if !(tau >= T::zero()) {
        return Err(domain("tau", to_f64(tau), ">= 0"));
    }
    let total = t0 + t1;
    let p1 = t1 / total;
    let p11 = p1 + t0 / total * (-(T::one() / t0 + T::one() / t1) * tau).exp();
    Ok(p11 * g1.eval(tau)? / p1)
}

/// Two dipole-coupled V systems driven on the strong (1–3) and weak (1–2)
/// transitions. `A₂` and `C₂` are fixed to zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VPairParams<T> {
    pub a3: T,
    pub omega2: T,
    pub omega3: T,
    pub c3: DipoleCoupling<T>,
}

impl<T: Scalar> VPairParams<T> {
    pub fn new(a3: T, omega2: T, omega3: T, c3: DipoleCoupling<T>) -> Result<Self> {
        if !(a3 > T::zero()) || !a3.is_finite() {
            return Err(domain("A3", to_f64(a3), "finite and > 0"));
        }
        if !(omega2 >= T::zero()) || !omega2.is_finite() {
            return Err(domain("Omega2", to_f64(omega2), "finite and >= 0"));
        }
        if !(omega3 >= T::zero()) || !omega3.is_finite() {
            return Err(domain("Omega3", to_f64(omega3), "finite and >= 0"));
        }
        if !c3.c.re.is_finite() || !c3.c.im.is_finite() {
            return Err(Error::Validation("C3 must be finite".into()));
        }
        Ok(Self { a3, omega2, omega3, c3 })
    }

    /// Warns when the weak drive leaves the regime where the rates hold.
    pub fn validity_warning(&self) -> Option<String> {
        let limit = lit::<T>(0.1) * self.a3.min(self.omega3);
        (self.omega2 > limit).then(|| {
            format!(
                "Omega2 = {} exceeds 0.1 min(A3, Omega3) = {}; switching rates assume Omega2 << A3, Omega3",
                self.omega2, limit
            )
        })
    }

    pub fn strong_transition(&self) -> TwoLevelParams<T> {
        TwoLevelParams { a: self.a3, omega: self.omega3 }
    }
}

/// Switching rates and mean durations of the V-pair periods.
#[derive(Debug, Clone, PartialEq)]
pub struct VPairRates<T> {
    pub p01: T,
    pub p10: T,
    pub p12: T,
    pub p21: T,
    pub t0: T,
    pub t1: T,
    pub t2: T,
}

impl<T: Scalar> VPairRates<T> {
    pub fn transition_rates(&self) -> Result<TransitionRates<T>> {
        TransitionRates::three_period(self.p01, self.p10, self.p12, self.p21)
    }

    pub fn durations(&self) -> [T; 3] {
        [self.t0, self.t1, self.t2]
    }
}

/// Rates to second order in `Ω₂` and first order in `C₃`, zero detuning.
pub fn vpair_rates<T: Scalar>(params: &VPairParams<T>) -> Result<VPairRates<T>> {
    let (a, o2, o3) = (params.a3, params.omega2, params.omega3);
    if o3 == T::zero() {
        return Err(Error::Singular("switching rates diverge at Omega3 = 0".into()));
    }
    let re = params.c3.re();
    let two: T = lit(2.0);
    let w2 = o2 * o2;
    let w3 = o3 * o3;
    let s = a * a + two * w3;
    let p01 = two * a * w2 / w3;
    let p10 = a * a * a * w2 / (s * w3);
    let p12 = w2 * (a / w3 + re * two * a * a / (s * w3));
    let p21 = w2
        * (two * a * a * a / (s * w3)
            + re * lit::<T>(4.0) * a.powi(4) * (a * a + lit::<T>(4.0) * w3) / (s * s * s * w3));
    for (i, (name, v)) in [("p01", p01), ("p10", p10), ("p12", p12), ("p21", p21)].into_iter().enumerate() {
        if !(v > T::zero()) {
            if o2 == T::zero() {
                return Err(Error::InfiniteDuration { period: [0, 1, 1, 2][i] });
            }
            return Err(Error::Validation(format!(
                "{name} = {v} is not positive; Re C3 = {re} is outside the first-order regime"
            )));
        }
    }
    Ok(VPairRates { p01, p10, p12, p21, t0: T::one() / p01, t1: T::one() / (p10 + p12), t2: T::one() / p21 })
}

/// Precomputed V-pair model for repeated evaluation.
#[derive(Debug, Clone)]
pub struct VPairModel<T> {
    pub params: VPairParams<T>,
    pub rates: VPairRates<T>,
    pub steady: SteadyProbabilities<T>,
    pub i1: T,
    pub i2: T,
    pub sine: G2SineConstant,
    generator: GeneratorMatrix<T>,
}

impl<T: Scalar> VPairModel<T> {
    pub fn new(params: VPairParams<T>, sine: G2SineConstant) -> Result<Self> {
        let rates = vpair_rates(&params)?;
        let generator = build_generator(&rates.transition_rates()?);
        let steady = steady_probabilities(&generator)?;
        let strong = params.strong_transition();
        Ok(Self {
            i1: intensity_single(&strong),
            i2: intensity_pair(&strong, &params.c3),
            params,
            rates,
            steady,
            sine,
            generator,
        })
    }

    fn occupancy(&self, tau: T) -> Result<[T; 4]> {
        let r = &self.rates;
        match three_period_occupancy(r.p01, r.p10, r.p12, r.p21, tau) {
            Ok(o) => Ok([o.p11, o.p12, o.p21, o.p22]),
            Err(Error::Degenerate(_)) => {
                let o = occupancy_matrix(&self.generator, tau)?;
                Ok([o.get(1, 1), o.get(1, 2), o.get(2, 1), o.get(2, 2)])
            }
            Err(e) => Err(e),
        }
    }

    /// `g(τ)` of the coupled V pair.
    pub fn g(&self, tau: T) -> Result<T> {
        let [p11, p12, p21, p22] = self.occupancy(tau)?;
        let strong = self.params.strong_transition();
        let g1 = g1_correlation(&strong, tau)?;
        let g2 = g2_pair_correlation_with(&strong, &self.params.c3, tau, self.sine)?;
        let (p1, p2) = (self.steady.p[1], self.steady.p[2]);
        let (i1, i2) = (self.i1, self.i2);
        let num = p1 * i1 * i1 * p11 * g1 + p1 * i1 * i2 * p12 * g2 + p2 * i1 * i2 * p21 * g1 + p2 * i2 * i2 * p22 * g2;
        let den = p1 * i1 + p2 * i2;
        Ok(num / (den * den))
    }

    /// Small-`τ` form with `P_ij = δ_ij`.
    pub fn g_small_tau(&self, tau: T) -> Result<T> {
        let strong = self.params.strong_transition();
        let g1 = g1_correlation(&strong, tau)?;
        let g2 = g2_pair_correlation_with(&strong, &self.params.c3, tau, self.sine)?;
        let (p1, p2) = (self.steady.p[1], self.steady.p[2]);
        let den = p1 * self.i1 + p2 * self.i2;
        Ok((p1 * self.i1 * self.i1 * g1 + p2 * self.i2 * self.i2 * g2) / (den * den))
    }

    /// The same system as a generic [`BlinkingModel`].
    pub fn as_blinking_model(&self) -> Result<BlinkingModel<T>> {
        let strong = self.params.strong_transition();
        let spec = PeriodSpec::new(vec![
            Period::dark(),
            Period::new(self.i1, Correlator::TwoLevel(strong)),
            Period::new(self.i2, Correlator::Pair { params: strong, coupling: self.params.c3, sine: self.sine }),
        ])?;
        BlinkingModel::new(spec, &self.rates.transition_rates()?)
    }
}

pub fn g_two_vsystems<T: Scalar>(params: &VPairParams<T>, tau: T) -> Result<T> {
    VPairModel::new(*params, G2SineConstant::Published)?.g(tau)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CouplingOrder {
    First,
    #[default]
    All,
}

impl CouplingOrder {
    pub fn label(self) -> &'static str {
        match self {
            Self::First => "first",
            Self::All => "all",
        }
    }
}

impl std::str::FromStr for CouplingOrder {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first" => Ok(Self::First),
            "all" => Ok(Self::All),
            other => Err(Error::Parse(format!("unknown order '{other}' (first|all)"))),
        }
    }
}

/// `g(0)` of the coupled V pair.
///
/// `All` evaluates `P₂I₂²g₂(0)/(P₁I₁ + P₂I₂)²` in the closed form
/// `2P₂s²(A² + Re C²)N / (A²(P₁N + 2P₂s(s + A Re C))²)` with `s = A² + 2Ω₃²`
/// and `N = s² + A²|C|² + 2A³ Re C`. `First` is its expansion to first order
/// in `C₃`, which is independent of `Ω₂`.
pub fn g0_two_vsystems<T: Scalar>(params: &VPairParams<T>, order: CouplingOrder) -> Result<T> {
    let a = params.a3;
    let w3 = params.omega3 * params.omega3;
    let re = params.c3.re();
    let two: T = lit(2.0);
    match order {
        CouplingOrder::First => {
            let q = a * a + w3;
            let coef = a / two * (q * q + w3 * w3) / (q * q * (a * a + two * w3));
            Ok(lit::<T>(0.5) - coef * re)
        }
        CouplingOrder::All => {
            let rates = vpair_rates(params)?;
            let steady = steady_probabilities(&build_generator(&rates.transition_rates()?))?;
            let (p1, p2) = (steady.p[1], steady.p[2]);
            let s = a * a + two * w3;
            let n = s * s + a * a * params.c3.c.norm_sqr() + two * a * a * a * re;
            let den = p1 * n + two * p2 * s * (s + a * re);
            Ok(two * p2 * s * s * (a * a + re * re) * n / (a * a * den * den))
        }
    }
}
