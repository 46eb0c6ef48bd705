//! Lindblad master-equation reference solver.
//!
//! Steady states come from the null space of the `d² × d²` Liouvillian and
//! two-time intensity correlations from the quantum regression theorem:
//!
//! ```text
//! G(τ) = Tr[J e^{ℒτ} J ρ_ss],   g(τ) = G(τ) / Tr[J ρ_ss]²
//! ```
//!
//! where `J ρ = Σ_ab Γ_ab L_b ρ L_a†` sums over the detected channels.
//! Density matrices are vectorized row-major, so `vec(XρY) = (X ⊗ Yᵀ) vec ρ`.
//!
//! Coupled atoms share the damping matrix `[[A, Re C], [Re C, A]]` and the
//! exchange Hamiltonian `(Im C / 2)(S₁⁺S₂⁻ + S₂⁺S₁⁻)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::blinking_model::VPairParams;
use crate::curve::{validate_grid, CorrelationCurve, Metadata};
use crate::error::{Error, Result};
use crate::subsystem_optics::{g2_pair_correlation_with, DipoleCoupling, G2SineConstant, TwoLevelParams};

type CMatrix = DMatrix<Complex64>;
type CVector = DVector<Complex64>;

const HERMITIAN_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;
const STEADY_RESIDUAL_TOL: f64 = 1e-10;
const TRACE_FAILURE_TOL: f64 = 1e-6;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn max_norm(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

#[derive(Debug, Clone)]
pub struct DecayChannel {
    pub op: CMatrix,
    pub rate: f64,
    pub detected: bool,
}

/// Which physical system to build.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    TwoLevel(TwoLevelParams<f64>),
    /// Two identical atoms; `phase` is the laser phase at the second atom.
    AtomPair {
        params: TwoLevelParams<f64>,
        coupling: DipoleCoupling<f64>,
        phase: f64,
    },
    /// Two V systems, levels `0 = ground`, `1 = metastable`, `2 = strong upper`.
    VPair {
        params: VPairParams<f64>,
        phase: f64,
    },
}

#[derive(Debug, Clone)]
pub struct OpenSystemModel {
    dim: usize,
    hamiltonian: CMatrix,
    channels: Vec<DecayChannel>,
    /// Hermitian damping matrix; the diagonal holds the channel rates.
    damping: CMatrix,
    label: String,
}

impl OpenSystemModel {
    /// `cross` lists collective couplings `(a, b, Γ_ab)`; `Γ_ba` is set to the
    /// conjugate.
    pub fn new(
        hamiltonian: CMatrix,
        channels: Vec<DecayChannel>,
        cross: &[(usize, usize, Complex64)],
        label: impl Into<String>,
    ) -> Result<Self> {
        let dim = hamiltonian.nrows();
        if dim == 0 || hamiltonian.ncols() != dim {
            return Err(Error::Validation("Hamiltonian must be square and nonempty".into()));
        }
        let herm = max_norm(&(&hamiltonian - hamiltonian.adjoint()));
        if herm > HERMITIAN_TOL {
            return Err(Error::Validation(format!("Hamiltonian not Hermitian (deviation {herm:e})")));
        }
        let n = channels.len();
        let mut damping = CMatrix::zeros(n, n);
        for (i, ch) in channels.iter().enumerate() {
            if ch.op.nrows() != dim || ch.op.ncols() != dim {
                return Err(Error::Validation(format!("channel {i} operator is not {dim} x {dim}")));
            }
            if !(ch.rate >= 0.0) || !ch.rate.is_finite() {
                return Err(Error::Validation(format!("channel {i} rate {} must be finite and >= 0", ch.rate)));
            }
            damping[(i, i)] = c(ch.rate);
        }
        for &(a, b, g) in cross {
            if a >= n || b >= n || a == b {
                return Err(Error::Validation(format!("invalid collective coupling indices ({a}, {b})")));
            }
            damping[(a, b)] = g;
            damping[(b, a)] = g.conj();
        }
        if n > 0 {
            let min_eig = damping.clone().symmetric_eigen().eigenvalues.min();
            if min_eig < -PSD_TOL {
                return Err(Error::UnphysicalCoupling(format!(
                    "damping matrix has eigenvalue {min_eig:e}; collective rates exceed the single-channel rates"
                )));
            }
        }
        Ok(Self { dim, hamiltonian, channels, damping, label: label.into() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    pub fn channels(&self) -> &[DecayChannel] {
        &self.channels
    }

    pub fn damping(&self) -> &CMatrix {
        &self.damping
    }

    fn pairs(&self, detected_only: bool) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        let n = self.channels.len();
        (0..n).flat_map(move |a| (0..n).map(move |b| (a, b))).filter_map(move |(a, b)| {
            let g = self.damping[(a, b)];
            let keep = g != Complex64::new(0.0, 0.0)
                && (!detected_only || (self.channels[a].detected && self.channels[b].detected));
            keep.then_some((a, b, g))
        })
    }

    /// Liouvillian superoperator acting on row-major `vec ρ`.
    pub fn liouvillian(&self) -> CMatrix {
        let d = self.dim;
        let id = CMatrix::identity(d, d);
        let i = Complex64::new(0.0, 1.0);
        let mut l = (self.hamiltonian.kronecker(&id) - id.kronecker(&self.hamiltonian.transpose())) * (-i);
        for (a, b, g) in self.pairs(false) {
            let la = &self.channels[a].op;
            let lb = &self.channels[b].op;
            let k = la.adjoint() * lb;
            l += (lb.kronecker(&la.conjugate()) - (k.kronecker(&id) + id.kronecker(&k.transpose())) * c(0.5)) * g;
        }
        l
    }

    /// Detected-emission superoperator `J`.
    pub fn jump_superoperator(&self) -> CMatrix {
        let d = self.dim;
        let mut j = CMatrix::zeros(d * d, d * d);
        for (a, b, g) in self.pairs(true) {
            j += self.channels[b].op.kronecker(&self.channels[a].op.conjugate()) * g;
        }
        j
    }

    /// Detected intensity operator `K = Σ Γ_ab L_a† L_b`, so `I = Tr[K ρ]`.
    pub fn intensity_operator(&self) -> CMatrix {
        let d = self.dim;
        let mut k = CMatrix::zeros(d, d);
        for (a, b, g) in self.pairs(true) {
            k += self.channels[a].op.adjoint() * &self.channels[b].op * g;
        }
        k
    }
}

fn basis_op(d: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    m[(i, j)] = c(1.0);
    m
}

fn pair_model(
    h1: &CMatrix,
    h2: &CMatrix,
    lowering: &CMatrix,
    a: f64,
    coupling: &DipoleCoupling<f64>,
    label: &str,
) -> Result<OpenSystemModel> {
    let d = h1.nrows();
    let id = CMatrix::identity(d, d);
    let s1 = lowering.kronecker(&id);
    let s2 = id.kronecker(lowering);
    let h_exchange = (s1.adjoint() * &s2 + s2.adjoint() * &s1) * c(coupling.im() / 2.0);
    let h = h1.kronecker(&id) + id.kronecker(h2) + h_exchange;
    let channels =
        vec![DecayChannel { op: s1, rate: a, detected: true }, DecayChannel { op: s2, rate: a, detected: true }];
    if coupling.re().abs() > a * (1.0 + PSD_TOL) {
        return Err(Error::UnphysicalCoupling(format!("|Re C| = {} exceeds A = {a}", coupling.re().abs())));
    }
    OpenSystemModel::new(h, channels, &[(0, 1, c(coupling.re()))], label)
}

pub fn build_model(kind: &ModelKind) -> Result<OpenSystemModel> {
    match kind {
        ModelKind::TwoLevel(p) => {
            let p = TwoLevelParams::new(p.a, p.omega)?;
            // basis |g⟩ = 0, |e⟩ = 1
            let sm = basis_op(2, 0, 1);
            let h = (&sm + sm.adjoint()) * c(p.omega / 2.0);
            let channel = DecayChannel { op: sm, rate: p.a, detected: true };
            OpenSystemModel::new(h, vec![channel], &[], "two_level")
        }
        ModelKind::AtomPair { params, coupling, phase } => {
            let p = TwoLevelParams::new(params.a, params.omega)?;
            let sm = basis_op(2, 0, 1);
            let h1 = (&sm + sm.adjoint()) * c(p.omega / 2.0);
            let ph = Complex64::from_polar(1.0, *phase);
            let h2 = (sm.adjoint() * ph + &sm * ph.conj()) * c(p.omega / 2.0);
            pair_model(&h1, &h2, &sm, p.a, coupling, "atom_pair")
        }
        ModelKind::VPair { params, phase } => {
            let p = VPairParams::new(params.a3, params.omega2, params.omega3, params.c3)?;
            let strong = basis_op(3, 0, 2);
            let weak = basis_op(3, 0, 1);
            let local = |ph: Complex64| {
                (strong.adjoint() * ph + &strong * ph.conj()) * c(p.omega3 / 2.0)
                    + (weak.adjoint() * ph + &weak * ph.conj()) * c(p.omega2 / 2.0)
            };
            let h1 = local(c(1.0));
            let h2 = local(Complex64::from_polar(1.0, *phase));
            pair_model(&h1, &h2, &strong, p.a3, &p.c3, "v_pair")
        }
    }
}

#[derive(Debug, Clone)]
pub struct DensityState {
    pub rho: CMatrix,
}

impl DensityState {
    pub fn trace(&self) -> Complex64 {
        self.rho.trace()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_min_eigenvalue(&self.rho)
    }

    pub fn expectation(&self, op: &CMatrix) -> Complex64 {
        (op * &self.rho).trace()
    }

    pub fn vectorize(&self) -> CVector {
        let d = self.rho.nrows();
        CVector::from_iterator(d * d, (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).map(|(i, j)| self.rho[(i, j)]))
    }
}

fn hermitian_min_eigenvalue(m: &CMatrix) -> f64 {
    let h = (m + m.adjoint()) * c(0.5);
    h.symmetric_eigen().eigenvalues.min()
}

fn unvec(v: &CVector, d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |i, j| v[i * d + j])
}

fn vec_trace(v: &CVector, d: usize) -> Complex64 {
    (0..d).map(|i| v[i * d + i]).sum()
}

/// Steady state with its Liouvillian residual.
#[derive(Debug, Clone)]
pub struct SteadyState {
    pub state: DensityState,
    pub residual: f64,
    pub intensity: f64,
}

pub fn steady_state(model: &OpenSystemModel) -> Result<SteadyState> {
    steady_state_with(model, &model.liouvillian())
}

fn steady_state_with(model: &OpenSystemModel, l: &CMatrix) -> Result<SteadyState> {
    let d = model.dim;
    let svd = l.clone().svd(false, true);
    let v_t = svd.v_t.as_ref().ok_or_else(|| Error::Numerical("SVD did not return right singular vectors".into()))?;
    let sv = &svd.singular_values;
    let smax = sv.max().max(1.0);
    let zero_modes = sv.iter().filter(|&&s| s <= 1e-10 * smax).count();
    if zero_modes > 1 {
        return Err(Error::NonUniqueSteadyState { zero_modes });
    }
    let k = sv.imin();
    let null = CVector::from_iterator(d * d, v_t.row(k).iter().map(|z| z.conj()));
    let tr = vec_trace(&null, d);
    if tr.norm() < 1e-300 {
        return Err(Error::Numerical("steady-state null vector is traceless".into()));
    }
    let rho = unvec(&(null / tr), d);
    let rho = (&rho + rho.adjoint()) * c(0.5);
    let state = DensityState { rho };
    let residual = (l * state.vectorize()).norm();
    if residual > STEADY_RESIDUAL_TOL {
        return Err(Error::Numerical(format!("steady-state residual {residual:e} exceeds {STEADY_RESIDUAL_TOL:e}")));
    }
    let intensity = state.expectation(&model.intensity_operator()).re;
    Ok(SteadyState { state, residual, intensity })
}

/// `exp(ℒt)` applied to vectors for arbitrary nonnegative `t`, built from a
/// base step `h` with `‖ℒ‖h ≤ 1/2` and its binary powers.
struct Propagator {
    l: CMatrix,
    h: f64,
    powers: Vec<CMatrix>,
}

fn taylor_apply(l: &CMatrix, t: f64, v: &CVector) -> CVector {
    let mut sum = v.clone();
    let mut term = v.clone();
    let scale = v.norm().max(f64::MIN_POSITIVE);
    for k in 1..=40 {
        term = (l * term) * c(t / k as f64);
        sum += &term;
        if term.norm() <= 1e-18 * scale {
            break;
        }
    }
    sum
}

fn taylor_matrix(l: &CMatrix, t: f64) -> CMatrix {
    let n = l.nrows();
    let a = l * c(t);
    let mut sum = CMatrix::identity(n, n);
    let mut term = CMatrix::identity(n, n);
    for k in 1..=40 {
        term = (&term * &a) * c(1.0 / k as f64);
        sum += &term;
        if max_norm(&term) <= 1e-18 * max_norm(&sum) {
            break;
        }
    }
    sum
}

fn one_norm(m: &CMatrix) -> f64 {
    m.column_iter().map(|col| col.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

impl Propagator {
    fn new(l: CMatrix) -> Self {
        let norm = one_norm(&l).max(1e-300);
        let h = (0.5 / norm).min(1.0);
        let base = taylor_matrix(&l, h);
        Self { l, h, powers: vec![base] }
    }

    fn power(&mut self, k: usize) -> &CMatrix {
        while self.powers.len() <= k {
            let last = self.powers.last().expect("base step present");
            let next = last * last;
            self.powers.push(next);
        }
        &self.powers[k]
    }

    fn advance(&mut self, v: &CVector, dt: f64) -> CVector {
        let m = (dt / self.h).floor();
        let r = dt - m * self.h;
        let mut out = v.clone();
        let mut m = m as u64;
        let mut k = 0;
        while m > 0 {
            if m & 1 == 1 {
                out = self.power(k) * out;
            }
            m >>= 1;
            k += 1;
        }
        if r > 0.0 {
            out = taylor_apply(&self.l, r, &out);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleDiagnostics {
    pub steady_residual: f64,
    /// Largest `|Tr ρ_c(τ) − 1|` of the normalized conditional state.
    pub max_trace_error: f64,
    /// Smallest eigenvalue of the normalized conditional state over the grid.
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone)]
pub struct NumericCorrelation {
    pub curve: CorrelationCurve,
    pub intensity: f64,
    pub diagnostics: OracleDiagnostics,
}

/// Quantum-regression `g(τ)` on a strictly increasing grid.
pub fn correlation_numeric(model: &OpenSystemModel, taus: &[f64]) -> Result<NumericCorrelation> {
    validate_grid(taus)?;
    let l = model.liouvillian();
    let ss = steady_state_with(model, &l)?;
    if !(ss.intensity > 0.0) {
        return Err(Error::UndefinedCorrelation);
    }
    let d = model.dim;
    let j = model.jump_superoperator();
    let mut v = &j * ss.state.vectorize();
    let norm = vec_trace(&v, d).re;
    let mut prop = Propagator::new(l);
    let mut g = Vec::with_capacity(taus.len());
    let mut diag =
        OracleDiagnostics { steady_residual: ss.residual, max_trace_error: 0.0, min_eigenvalue: f64::INFINITY };
    let mut t = 0.0;
    for &tau in taus {
        v = prop.advance(&v, tau - t);
        t = tau;
        let tr = vec_trace(&v, d);
        let trace_err = (tr / norm - 1.0).norm();
        let state = unvec(&v, d) / c(norm);
        diag.max_trace_error = diag.max_trace_error.max(trace_err);
        diag.min_eigenvalue = diag.min_eigenvalue.min(hermitian_min_eigenvalue(&state));
        let gv = vec_trace(&(&j * &v), d).re / (ss.intensity * ss.intensity);
        if !gv.is_finite() || trace_err > TRACE_FAILURE_TOL {
            return Err(Error::Numerical(format!(
                "propagation failed at tau = {tau}: trace error {trace_err:e}, g = {gv}, min eigenvalue {:e}",
                diag.min_eigenvalue
            )));
        }
        g.push(gv);
    }
    let params = Metadata::new().with("dim", d).with("intensity", ss.intensity);
    let curve = CorrelationCurve::new(taus.to_vec(), g, format!("oracle_{}", model.label))?.with_params(params);
    Ok(NumericCorrelation { curve, intensity: ss.intensity, diagnostics: diag })
}

/// Residual scaling of the first-order pair correlator against the oracle
/// under `Re C → Re C / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingReport {
    pub residual_full: f64,
    pub residual_half: f64,
    pub ratio: f64,
    /// Set when the ratio leaves `[3, 5]`, i.e. the residual is not second
    /// order in the coupling and a first-order coefficient is wrong.
    pub coefficient_flag: bool,
}

pub fn first_order_scaling_check(
    params: &TwoLevelParams<f64>,
    re_c: f64,
    taus: &[f64],
    sine: G2SineConstant,
) -> Result<ScalingReport> {
    let residual = |re: f64| -> Result<f64> {
        let coupling = DipoleCoupling::direct(re, 0.0);
        let model = build_model(&ModelKind::AtomPair { params: *params, coupling, phase: 0.0 })?;
        let numeric = correlation_numeric(&model, taus)?;
        let mut worst = 0.0f64;
        for (&t, &gn) in taus.iter().zip(&numeric.curve.g) {
            worst = worst.max((g2_pair_correlation_with(params, &coupling, t, sine)? - gn).abs());
        }
        Ok(worst)
    };
    let residual_full = residual(re_c)?;
    let residual_half = residual(re_c / 2.0)?;
    let ratio = residual_full / residual_half;
    Ok(ScalingReport { residual_full, residual_half, ratio, coefficient_flag: !(3.0..=5.0).contains(&ratio) })
}
