//! Weighted least-squares fits of the algebraic correlation models.
//!
//! The optimizer is a Levenberg–Marquardt iteration with Marquardt's diagonal
//! scaling, run in unconstrained internal coordinates: each bounded parameter
//! is mapped through a logistic function onto its interval, in log space when
//! the interval is positive.

use std::fmt::{self, Write as _};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::blinking_model::{g_dark_light, BlinkingModel, Correlator, PeriodSpec, VPairModel, VPairParams};
use crate::curve::{format_value, validate_grid, CorrelationCurve, Metadata};
use crate::error::{Error, Result};
use crate::period_markov::TransitionRates;
use crate::subsystem_optics::{DipoleCoupling, G2SineConstant, TwoLevelParams};

/// Smallest `|g|` used to scale synthetic noise, so points near `g = 0` still
/// carry a usable error bar.
pub const NOISE_FLOOR: f64 = 0.05;

pub const DARK_LIGHT_PARAMS: [&str; 4] = ["t0", "t1", "a", "omega"];
pub const TWO_VSYSTEMS_PARAMS: [&str; 5] = ["a3", "omega2", "omega3", "re_c3", "im_c3"];

type GridFn = dyn Fn(&[f64], &[f64]) -> Result<Vec<f64>> + Send + Sync;

/// User model: parameter names and a function mapping `(values, τ grid)` to `g`.
#[derive(Clone)]
pub struct CustomModel {
    pub names: Vec<String>,
    eval: Arc<GridFn>,
}

impl CustomModel {
    pub fn new(names: Vec<String>, eval: impl Fn(&[f64], &[f64]) -> Result<Vec<f64>> + Send + Sync + 'static) -> Self {
        Self { names, eval: Arc::new(eval) }
    }

    /// Model built from a parameter-dependent period spec and switching chain.
    pub fn from_periods(
        names: Vec<String>,
        build: impl Fn(&[f64]) -> Result<(PeriodSpec<f64>, TransitionRates<f64>)> + Send + Sync + 'static,
    ) -> Self {
        Self::new(names, move |values, taus| {
            let (spec, rates) = build(values)?;
            let model = BlinkingModel::new(spec, &rates)?;
            taus.iter().map(|&t| model.g(t)).collect()
        })
    }
}

impl fmt::Debug for CustomModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomModel").field("names", &self.names).finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum ModelFamily {
    /// Parameters `t0, t1, a, omega`.
    DarkLight,
    /// Parameters `a3, omega2, omega3, re_c3, im_c3`. Period durations follow
    /// from these and cannot be fitted separately.
    TwoVSystems {
        sine: G2SineConstant,
    },
    Custom(CustomModel),
}

impl ModelFamily {
    pub fn name(&self) -> &'static str {
        match self {
            Self::DarkLight => "dark_light",
            Self::TwoVSystems { .. } => "two_vsystems",
            Self::Custom(_) => "custom",
        }
    }

    pub fn param_names(&self) -> Vec<String> {
        match self {
            Self::DarkLight => DARK_LIGHT_PARAMS.iter().map(|s| s.to_string()).collect(),
            Self::TwoVSystems { .. } => TWO_VSYSTEMS_PARAMS.iter().map(|s| s.to_string()).collect(),
            Self::Custom(m) => m.names.clone(),
        }
    }

    /// Evaluates the model with `values` ordered as [`Self::param_names`].
    pub fn evaluate(&self, values: &[f64], taus: &[f64]) -> Result<Vec<f64>> {
        match self {
            Self::DarkLight => {
                let [t0, t1, a, omega] = values else {
                    return Err(Error::Validation("dark_light takes 4 parameters".into()));
                };
                let g1 = Correlator::TwoLevel(TwoLevelParams::new(*a, *omega)?);
                taus.iter().map(|&t| g_dark_light(*t0, *t1, &g1, t)).collect()
            }
            Self::TwoVSystems { sine } => {
                let [a3, omega2, omega3, re, im] = values else {
                    return Err(Error::Validation("two_vsystems takes 5 parameters".into()));
                };
                let params = VPairParams::new(*a3, *omega2, *omega3, DipoleCoupling::direct(*re, *im))?;
                let model = VPairModel::new(params, *sine)?;
                taus.iter().map(|&t| model.g(t)).collect()
            }
            Self::Custom(m) => {
                let g = (m.eval)(values, taus)?;
                if g.len() != taus.len() {
                    return Err(Error::Validation(format!(
                        "custom model returned {} values for {} points",
                        g.len(),
                        taus.len()
                    )));
                }
                Ok(g)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamSpec {
    pub name: String,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub free: bool,
}

impl ParamSpec {
    pub fn free(name: impl Into<String>, initial: f64, lower: f64, upper: f64) -> Self {
        Self { name: name.into(), value: initial, lower, upper, free: true }
    }

    pub fn fixed(name: impl Into<String>, value: f64) -> Self {
        Self { name: name.into(), value, lower: value, upper: value, free: false }
    }

    fn log_space(&self) -> bool {
        self.lower > 0.0
    }

    fn span(&self) -> (f64, f64) {
        if self.log_space() {
            (self.lower.ln(), self.upper.ln())
        } else {
            (self.lower, self.upper)
        }
    }

    fn to_internal(&self, v: f64) -> f64 {
        let (lo, hi) = self.span();
        let u = if self.log_space() { v.ln() } else { v };
        let f = ((u - lo) / (hi - lo)).clamp(1e-12, 1.0 - 1e-12);
        (f / (1.0 - f)).ln()
    }

    fn to_natural(&self, x: f64) -> f64 {
        let (lo, hi) = self.span();
        let u = lo + (hi - lo) * logistic(x);
        if self.log_space() {
            u.exp()
        } else {
            u
        }
    }

    /// `dθ/dx` at internal coordinate `x`.
    fn derivative(&self, x: f64) -> f64 {
        let (lo, hi) = self.span();
        let s = logistic(x);
        let du = (hi - lo) * s * (1.0 - s);
        if self.log_space() {
            self.to_natural(x) * du
        } else {
            du
        }
    }
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone)]
pub struct FitProblem {
    pub data: CorrelationCurve,
    pub family: ModelFamily,
    pub params: Vec<ParamSpec>,
}

impl FitProblem {
    /// Checks the parameter set against the family and the data size. The
    /// parameters may be given in any order but every family parameter must
    /// appear exactly once.
    pub fn new(data: CorrelationCurve, family: ModelFamily, params: Vec<ParamSpec>) -> Result<Self> {
        data.validate()?;
        let names = family.param_names();
        if let ModelFamily::TwoVSystems { .. } = family {
            if let Some(p) = params.iter().find(|p| matches!(p.name.as_str(), "t0" | "t1" | "t2")) {
                return Err(Error::Validation(format!(
                    "'{}' is derived from omega2, omega3 and re_c3 in the two_vsystems family; fit omega2 instead",
                    p.name
                )));
            }
        }
        let mut ordered = Vec::with_capacity(names.len());
        for name in &names {
            let mut hits = params.iter().filter(|p| &p.name == name);
            let p = hits.next().ok_or_else(|| Error::Validation(format!("parameter '{name}' not specified")))?;
            if hits.next().is_some() {
                return Err(Error::Validation(format!("parameter '{name}' given twice")));
            }
            ordered.push(p.clone());
        }
        if let Some(p) = params.iter().find(|p| !names.contains(&p.name)) {
            return Err(Error::Validation(format!("unknown parameter '{}' for {}", p.name, family.name())));
        }
        for p in &ordered {
            if !p.value.is_finite() {
                return Err(Error::Validation(format!("parameter '{}' is not finite", p.name)));
            }
            if p.free {
                if !(p.lower.is_finite() && p.upper.is_finite() && p.lower < p.upper) {
                    return Err(Error::Validation(format!("parameter '{}' needs finite bounds lower < upper", p.name)));
                }
                if p.value < p.lower || p.value > p.upper {
                    return Err(Error::Validation(format!(
                        "initial {} = {} outside [{}, {}]",
                        p.name, p.value, p.lower, p.upper
                    )));
                }
            }
        }
        let free = ordered.iter().filter(|p| p.free).count();
        if free == 0 {
            return Err(Error::Validation("no free parameters".into()));
        }
        if data.len() < 2 * free {
            return Err(Error::Validation(format!(
                "{} data points for {free} free parameters; need at least {}",
                data.len(),
                2 * free
            )));
        }
        if let Some(s) = &data.sigma {
            if s.iter().any(|&s| !(s > 0.0)) {
                return Err(Error::Validation("standard errors must be > 0".into()));
            }
        }
        Ok(Self { data, family, params: ordered })
    }

    pub fn free_names(&self) -> Vec<String> {
        self.params.iter().filter(|p| p.free).map(|p| p.name.clone()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iterations: usize,
    pub initial_lambda: f64,
    pub chi2_tolerance: f64,
    pub gradient_tolerance: f64,
    pub jacobian_step: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            initial_lambda: 1e-3,
            chi2_tolerance: 1e-10,
            gradient_tolerance: 1e-8,
            jacobian_step: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Chi2Change,
    Gradient,
    /// Exact fit: chi-square is at rounding level.
    ZeroResidual,
    /// No downhill step exists at any damping.
    Stalled,
    MaxIterations,
}

impl Termination {
    pub fn label(self) -> &'static str {
        match self {
            Self::Chi2Change => "chi2_change",
            Self::Gradient => "gradient",
            Self::ZeroResidual => "zero_residual",
            Self::Stalled => "stalled",
            Self::MaxIterations => "max_iterations",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub family: String,
    pub names: Vec<String>,
    pub values: Vec<f64>,
    pub free: Vec<bool>,
    /// Standard errors; zero for fixed parameters.
    pub std_errors: Vec<f64>,
    /// Covariance of the free parameters, in the order of [`Self::free_names`].
    pub covariance: Vec<Vec<f64>>,
    pub chi2: f64,
    pub initial_chi2: f64,
    pub dof: usize,
    pub chi2_per_dof: f64,
    pub iterations: usize,
    pub termination: Termination,
    pub warnings: Vec<String>,
}

impl FitResult {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.values[i])
    }

    pub fn std_error(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.std_errors[i])
    }

    pub fn free_names(&self) -> Vec<&str> {
        self.names.iter().zip(&self.free).filter(|(_, &f)| f).map(|(n, _)| n.as_str()).collect()
    }

    /// Human-readable summary.
    pub fn report(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "fit of {} model: {} after {} iterations",
            self.family,
            self.termination.label(),
            self.iterations
        );
        let _ = writeln!(
            s,
            "chi2 = {:.6e} ({} dof, {:.6} per dof; initial {:.6e})",
            self.chi2, self.dof, self.chi2_per_dof, self.initial_chi2
        );
        for i in 0..self.names.len() {
            if self.free[i] {
                let _ =
                    writeln!(s, "  {:<8} = {:>14.8e} +/- {:.3e}", self.names[i], self.values[i], self.std_errors[i]);
            } else {
                let _ = writeln!(s, "  {:<8} = {:>14.8e} (fixed)", self.names[i], self.values[i]);
            }
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        s
    }

    /// Machine-readable `key = value` block.
    pub fn key_values(&self) -> Metadata {
        let mut m = Metadata::new()
            .with("family", &self.family)
            .with("termination", self.termination.label())
            .with("iterations", self.iterations)
            .with("chi2", format_value(self.chi2))
            .with("chi2_per_dof", format_value(self.chi2_per_dof))
            .with("dof", self.dof);
        for i in 0..self.names.len() {
            m.set(format!("param.{}", self.names[i]), format_value(self.values[i]));
            m.set(format!("stderr.{}", self.names[i]), format_value(self.std_errors[i]));
            m.set(format!("free.{}", self.names[i]), self.free[i]);
        }
        let free = self.free_names();
        for (a, na) in free.iter().enumerate() {
            for (b, nb) in free.iter().enumerate().skip(a) {
                m.set(format!("cov.{na}.{nb}"), format_value(self.covariance[a][b]));
            }
        }
        for (i, w) in self.warnings.iter().enumerate() {
            m.set(format!("warning.{i}"), w);
        }
        m
    }

    pub fn key_value_text(&self) -> String {
        self.key_values().iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

struct Objective<'a> {
    problem: &'a FitProblem,
    free_idx: Vec<usize>,
    weights: Vec<f64>,
}

impl<'a> Objective<'a> {
    fn natural(&self, x: &[f64]) -> Vec<f64> {
        let mut v: Vec<f64> = self.problem.params.iter().map(|p| p.value).collect();
        for (k, &i) in self.free_idx.iter().enumerate() {
            v[i] = self.problem.params[i].to_natural(x[k]);
        }
        v
    }

    fn residuals(&self, x: &[f64]) -> Result<DVector<f64>> {
        let d = &self.problem.data;
        let g = self.problem.family.evaluate(&self.natural(x), &d.tau)?;
        let r = DVector::from_iterator(d.len(), g.iter().zip(&d.g).zip(&self.weights).map(|((m, y), w)| (m - y) * w));
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("model produced a non-finite value".into()));
        }
        Ok(r)
    }

    fn jacobian(&self, x: &[f64], r0: &DVector<f64>, step: f64) -> Result<DMatrix<f64>> {
        let m = x.len();
        let mut jac = DMatrix::zeros(r0.len(), m);
        for j in 0..m {
            let h = step * x[j].abs().max(1.0);
            let mut xp = x.to_vec();
            xp[j] += h;
            let rp = self.residuals(&xp)?;
            jac.set_column(j, &((rp - r0) / h));
        }
        Ok(jac)
    }
}

/// Directions of a normal matrix that carry (numerically) no curvature.
fn null_directions(normal: &DMatrix<f64>, names: &[String]) -> Vec<String> {
    let m = normal.nrows();
    let diag: Vec<f64> = (0..m).map(|i| normal[(i, i)]).collect();
    let mut out: Vec<String> = (0..m).filter(|&i| !(diag[i] > 0.0)).map(|i| names[i].clone()).collect();
    if !out.is_empty() {
        return out;
    }
    let scaled = DMatrix::from_fn(m, m, |i, j| normal[(i, j)] / (diag[i] * diag[j]).sqrt());
    let eig = scaled.symmetric_eigen();
    let max = eig.eigenvalues.max();
    for (k, &ev) in eig.eigenvalues.iter().enumerate() {
        if ev <= 1e-12 * max {
            let v = eig.eigenvectors.column(k);
            let combo: Vec<String> =
                (0..m).filter(|&i| v[i].abs() > 0.2).map(|i| format!("{:+.3}*{}", v[i], names[i])).collect();
            out.push(combo.join(" "));
        }
    }
    out
}

pub fn fit(problem: &FitProblem) -> Result<FitResult> {
    fit_with(problem, &FitOptions::default())
}

pub fn fit_with(problem: &FitProblem, opts: &FitOptions) -> Result<FitResult> {
    let free_idx: Vec<usize> = (0..problem.params.len()).filter(|&i| problem.params[i].free).collect();
    let names: Vec<String> = free_idx.iter().map(|&i| problem.params[i].name.clone()).collect();
    let weights = match &problem.data.sigma {
        Some(s) => s.iter().map(|s| 1.0 / s).collect(),
        None => vec![1.0; problem.data.len()],
    };
    let obj = Objective { problem, free_idx, weights };
    let mut x: Vec<f64> =
        obj.free_idx.iter().map(|&i| problem.params[i].to_internal(problem.params[i].value)).collect();
    let mut r = obj.residuals(&x)?;
    let mut chi2 = r.norm_squared();
    let initial_chi2 = chi2;
    let n = r.len();
    let mut jac = obj.jacobian(&x, &r, opts.jacobian_step)?;
    let normal0 = jac.transpose() * &jac;
    let null0 = null_directions(&normal0, &names);
    if !null0.is_empty() {
        return Err(Error::Unidentifiable { directions: null0 });
    }
    let mut lambda = opts.initial_lambda;
    let mut iterations = 0;
    let termination = loop {
        if chi2 <= 1e-30 * n as f64 {
            break Termination::ZeroResidual;
        }
        let normal = jac.transpose() * &jac;
        let grad = jac.transpose() * &r;
        if 2.0 * grad.amax() < opts.gradient_tolerance {
            break Termination::Gradient;
        }
        if iterations >= opts.max_iterations {
            break Termination::MaxIterations;
        }
        iterations += 1;
        let mut accepted = None;
        while lambda < 1e16 {
            let mut a = normal.clone();
            for i in 0..a.nrows() {
                a[(i, i)] += lambda * normal[(i, i)].max(1e-30);
            }
            let step = a.cholesky().map(|c| c.solve(&(-&grad)));
            if let Some(step) = step {
                let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
                if let Ok(rt) = obj.residuals(&trial) {
                    let c = rt.norm_squared();
                    if c < chi2 {
                        accepted = Some((trial, rt, c));
                        lambda = (lambda / 10.0).max(1e-12);
                        break;
                    }
                }
            }
            lambda *= 10.0;
        }
        let Some((xt, rt, ct)) = accepted else {
            break Termination::Stalled;
        };
        let rel = (chi2 - ct) / chi2;
        x = xt;
        r = rt;
        chi2 = ct;
        jac = obj.jacobian(&x, &r, opts.jacobian_step)?;
        if rel < opts.chi2_tolerance {
            break Termination::Chi2Change;
        }
    };

    let dof = n - obj.free_idx.len();
    let natural = obj.natural(&x);
    let normal = jac.transpose() * &jac;
    let deriv: Vec<f64> = obj.free_idx.iter().zip(&x).map(|(&i, &xi)| problem.params[i].derivative(xi)).collect();
    let scale = if problem.data.sigma.is_some() { 1.0 } else { chi2 / dof.max(1) as f64 };
    let m = deriv.len();
    let mut warnings = Vec::new();
    let cov_internal = match normal.clone().try_inverse() {
        Some(inv) if inv.iter().all(|v| v.is_finite()) => inv,
        _ => {
            let dirs = null_directions(&normal, &names);
            return Err(Error::Unidentifiable { directions: if dirs.is_empty() { names.clone() } else { dirs } });
        }
    };
    let covariance: Vec<Vec<f64>> =
        (0..m).map(|a| (0..m).map(|b| cov_internal[(a, b)] * deriv[a] * deriv[b] * scale).collect()).collect();
    let mut std_errors = vec![0.0; problem.params.len()];
    for (k, &i) in obj.free_idx.iter().enumerate() {
        std_errors[i] = covariance[k][k].max(0.0).sqrt();
    }
    for (k, &i) in obj.free_idx.iter().enumerate() {
        let p = &problem.params[i];
        let frac = (p.to_natural(x[k]) - p.lower) / (p.upper - p.lower);
        if !(1e-6..=1.0 - 1e-6).contains(&frac) {
            warnings.push(format!("{} is at its bound", p.name));
        }
        if p.name == "im_c3" {
            warnings.push(format!(
                "im_c3 is weakly constrained by g(tau): it enters only through |C3|^2 in g(0) (stderr {:.3e})",
                std_errors[i]
            ));
        }
    }
    let result = FitResult {
        family: problem.family.name().to_string(),
        names: problem.params.iter().map(|p| p.name.clone()).collect(),
        values: natural,
        free: problem.params.iter().map(|p| p.free).collect(),
        std_errors,
        covariance,
        chi2,
        initial_chi2,
        dof,
        chi2_per_dof: chi2 / dof.max(1) as f64,
        iterations,
        termination,
        warnings,
    };
    if termination == Termination::MaxIterations {
        return Err(Error::NonConvergence { iterations, best: Box::new(result) });
    }
    Ok(result)
}

/// Model curve with independent Gaussian noise of standard deviation
/// `noise · max(|g|, NOISE_FLOOR)` per point. With `noise = 0` the exact
/// curve is returned without error bars.
pub fn synthesize_data(
    family: &ModelFamily,
    values: &[f64],
    taus: &[f64],
    noise: f64,
    seed: u64,
) -> Result<CorrelationCurve> {
    if !(noise >= 0.0) || !noise.is_finite() {
        return Err(Error::Validation(format!("noise level {noise} must be finite and >= 0")));
    }
    validate_grid(taus)?;
    let exact = family.evaluate(values, taus)?;
    let mut params = Metadata::new().with("family", family.name()).with("noise", noise).with("seed", seed);
    for (k, v) in family.param_names().iter().zip(values) {
        params.set(k.as_str(), v);
    }
    if noise == 0.0 {
        return Ok(CorrelationCurve::new(taus.to_vec(), exact, "synthetic")?.with_params(params));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sigma: Vec<f64> = exact.iter().map(|g| noise * g.abs().max(NOISE_FLOOR)).collect();
    let g = exact
        .iter()
        .zip(&sigma)
        .map(|(g, s)| {
            let z: f64 = StandardNormal.sample(&mut rng);
            g + s * z
        })
        .collect();
    CorrelationCurve::new(taus.to_vec(), g, "synthetic")?.with_sigma(sigma).map(|c| c.with_params(params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{make_grid, GridSpacing};

    fn dark_light_params(v: &[f64; 4]) -> Vec<ParamSpec> {
        let b = [(1.0, 1e4), (1.0, 1e4), (0.1, 10.0), (0.05, 20.0)];
        DARK_LIGHT_PARAMS.iter().zip(v).zip(b).map(|((n, &x), (lo, hi))| ParamSpec::free(*n, x, lo, hi)).collect()
    }

    #[test]
    fn transforms_round_trip() {
        for p in [ParamSpec::free("a", 0.3, 0.01, 10.0), ParamSpec::free("b", -0.05, -0.5, 0.5)] {
            let w = p.upper - p.lower;
            for &v in &[p.lower + 1e-3 * w, p.value, p.upper - 1e-3 * w] {
                assert!((p.to_natural(p.to_internal(v)) - v).abs() < 1e-10 * v.abs().max(1.0));
            }
            let x = p.to_internal(p.value);
            let h = 1e-6;
            let num = (p.to_natural(x + h) - p.to_natural(x - h)) / (2.0 * h);
            assert!((num - p.derivative(x)).abs() < 1e-6 * num.abs().max(1e-12));
        }
    }

    #[test]
    fn noiseless_start_at_truth_is_fixed_point() {
        let truth = [60.0, 30.0, 1.0, 1.2];
        let taus = make_grid(0.01, 500.0, 80, GridSpacing::Log).unwrap();
        let data = synthesize_data(&ModelFamily::DarkLight, &truth, &taus, 0.0, 1).unwrap();
        let problem = FitProblem::new(data, ModelFamily::DarkLight, dark_light_params(&truth)).unwrap();
        let res = fit(&problem).unwrap();
        assert!(res.chi2 < 1e-16, "chi2 {}", res.chi2);
        for (v, t) in res.values.iter().zip(&truth) {
            assert!((v - t).abs() < 1e-8 * t);
        }
    }

    #[test]
    fn rejects_bad_problems() {
        let taus = make_grid(0.1, 10.0, 6, GridSpacing::Log).unwrap();
        let truth = [60.0, 30.0, 1.0, 1.2];
        let data = synthesize_data(&ModelFamily::DarkLight, &truth, &taus, 0.0, 1).unwrap();
        assert!(FitProblem::new(data.clone(), ModelFamily::DarkLight, dark_light_params(&truth)[..3].to_vec()).is_err());
        assert!(FitProblem::new(data.clone(), ModelFamily::DarkLight, dark_light_params(&truth)).is_err());
        let mut p = dark_light_params(&truth);
        p.truncate(3);
        p.push(ParamSpec::fixed("omega", 1.2));
        assert!(FitProblem::new(data.clone(), ModelFamily::DarkLight, p).is_ok());
        let vp = vec![
            ParamSpec::fixed("a3", 1.0),
            ParamSpec::free("t0", 100.0, 1.0, 1e5),
            ParamSpec::fixed("omega3", 0.3),
            ParamSpec::fixed("re_c3", 0.0),
            ParamSpec::fixed("im_c3", 0.0),
        ];
        let fam = ModelFamily::TwoVSystems { sine: G2SineConstant::Published };
        assert!(matches!(FitProblem::new(data, fam, vp), Err(Error::Validation(m)) if m.contains("derived")));
    }

    #[test]
    fn unidentifiable_direction_is_named() {
        // g depends on p and q only through p + q.
        let fam = ModelFamily::Custom(CustomModel::new(vec!["p".into(), "q".into()], |v, t| {
            Ok(t.iter().map(|&x| (-(v[0] + v[1]) * x).exp()).collect())
        }));
        let taus = make_grid(0.0, 5.0, 20, GridSpacing::Linear).unwrap();
        let data = synthesize_data(&fam, &[0.5, 0.5], &taus, 0.0, 0).unwrap();
        let problem = FitProblem::new(
            data,
            fam,
            vec![ParamSpec::free("p", 0.4, -2.0, 2.0), ParamSpec::free("q", 0.7, -2.0, 2.0)],
        )
        .unwrap();
        match fit(&problem) {
            Err(Error::Unidentifiable { directions }) => {
                assert!(directions[0].contains('p') && directions[0].contains('q'));
            }
            other => panic!("expected unidentifiable, got {other:?}"),
        }
    }

    #[test]
    fn synthetic_noise_is_reproducible() {
        let taus = make_grid(0.01, 100.0, 30, GridSpacing::Log).unwrap();
        let v = [60.0, 30.0, 1.0, 1.2];
        let a = synthesize_data(&ModelFamily::DarkLight, &v, &taus, 0.01, 42).unwrap();
        let b = synthesize_data(&ModelFamily::DarkLight, &v, &taus, 0.01, 42).unwrap();
        assert_eq!(a, b);
        assert!(a.sigma.is_some());
    }

    #[test]
    fn key_values_contain_parameters() {
        let truth = [60.0, 30.0, 1.0, 1.2];
        let taus = make_grid(0.01, 500.0, 40, GridSpacing::Log).unwrap();
        let data = synthesize_data(&ModelFamily::DarkLight, &truth, &taus, 0.01, 3).unwrap();
        let res =
            fit(&FitProblem::new(data, ModelFamily::DarkLight, dark_light_params(&[50.0, 35.0, 1.1, 1.1])).unwrap())
                .unwrap();
        let text = res.key_value_text();
        assert!(text.contains("param.t0 = ") && text.contains("cov.t0.t1 = "));
        assert!(res.chi2 <= res.initial_chi2);
        assert!(res.report().contains("omega"));
    }
}
