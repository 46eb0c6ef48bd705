//! Monte Carlo counterparts of the analytic models: semi-Markov period
//! trajectories, quantum-jump photon streams of a driven two-level atom, and
//! coincidence-histogram estimates of `g(τ)`.
//!
//! Every trajectory or stream owns a ChaCha8 generator seeded with the master
//! seed and switched to the stream given by its ensemble index, so ensembles
//! are reproducible regardless of how they are scheduled.

use std::io::{BufRead, Write};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;

use crate::curve::{format_value, validate_grid, CorrelationCurve, Metadata};
use crate::dense::SquareMatrix;
use crate::error::{domain, Error, Result};
use crate::period_markov::{build_generator, steady_probabilities, TransitionRates};
use crate::subsystem_optics::TwoLevelParams;

pub const MIN_PHOTONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SeedRecord {
    pub master: u64,
    pub index: u64,
}

impl SeedRecord {
    pub fn new(master: u64, index: u64) -> Self {
        Self { master, index }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(self.index);
        rng
    }
}

/// Period trajectory as `(period, entry time)` segments.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodTrajectory {
    pub segments: Vec<(usize, f64)>,
    pub duration: f64,
    pub seed: SeedRecord,
    /// The chain reached a period with no exit before `duration`.
    pub absorbed: bool,
}

impl PeriodTrajectory {
    /// Period occupied at time `t` (`0 ≤ t ≤ duration`).
    pub fn period_at(&self, t: f64) -> usize {
        let k = self.segments.partition_point(|&(_, s)| s <= t);
        self.segments[k.saturating_sub(1)].0
    }

    /// Completed dwell times, excluding the segment cut off by `duration`.
    pub fn dwell_times(&self) -> Vec<(usize, f64)> {
        self.segments.windows(2).map(|w| (w[0].0, w[1].1 - w[0].1)).collect()
    }

    /// Fraction of the duration spent in each of `n` periods.
    pub fn occupation_fractions(&self, n: usize) -> Vec<f64> {
        let mut time = vec![0.0; n];
        for (k, &(p, start)) in self.segments.iter().enumerate() {
            let end = self.segments.get(k + 1).map_or(self.duration, |s| s.1);
            time[p] += end - start;
        }
        time.iter().map(|t| t / self.duration).collect()
    }

    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# kind = period_trajectory")?;
        writeln!(out, "# duration = {}", self.duration)?;
        writeln!(out, "# seed = {}", self.seed.master)?;
        writeln!(out, "# index = {}", self.seed.index)?;
        writeln!(out, "# absorbed = {}", self.absorbed)?;
        writeln!(out, "# columns = period time")?;
        for &(p, t) in &self.segments {
            writeln!(out, "{p} {}", format_value(t))?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(input: R) -> Result<Self> {
        let (meta, body) = read_commented(input)?;
        let mut segments = Vec::with_capacity(body.len());
        for line in body {
            let mut it = line.split_whitespace();
            let (Some(p), Some(t), None) = (it.next(), it.next(), it.next()) else {
                return Err(Error::Parse(format!("bad trajectory line '{line}'")));
            };
            let p = p.parse().map_err(|_| Error::Parse(format!("bad period index '{p}'")))?;
            segments.push((p, parse_f64(t)?));
        }
        Ok(Self {
            segments,
            duration: meta_f64(&meta, "duration")?,
            seed: meta_seed(&meta)?,
            absorbed: meta.get("absorbed") == Some("true"),
        })
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| Error::Parse(format!("'{s}' is not a number")))
}

fn meta_f64(meta: &Metadata, key: &str) -> Result<f64> {
    parse_f64(meta.get(key).ok_or_else(|| Error::Parse(format!("missing '# {key} =' header")))?)
}

fn meta_seed(meta: &Metadata) -> Result<SeedRecord> {
    let get = |k: &str| -> Result<u64> {
        meta.get(k).unwrap_or("0").parse().map_err(|_| Error::Parse(format!("bad '{k}' header")))
    };
    Ok(SeedRecord::new(get("seed")?, get("index")?))
}

fn read_commented<R: BufRead>(input: R) -> Result<(Metadata, Vec<String>)> {
    let mut meta = Metadata::new();
    let mut body = Vec::new();
    for line in input.lines() {
        let line = line?;
        let t = line.trim();
        if let Some(rest) = t.strip_prefix('#') {
            if let Some((k, v)) = rest.split_once('=') {
                meta.set(k.trim(), v.trim());
            }
        } else if !t.is_empty() {
            body.push(t.to_string());
        }
    }
    Ok((meta, body))
}

fn check_duration(duration: f64) -> Result<()> {
    if !(duration > 0.0) || !duration.is_finite() {
        return Err(domain("duration", duration, "finite and > 0"));
    }
    Ok(())
}

/// Semi-Markov trajectory with exponential dwell times of mean `1/Σ_k p_ik`.
/// The first period is drawn from the stationary distribution when it exists,
/// otherwise the trajectory starts in period 0.
pub fn simulate_periods(rates: &TransitionRates<f64>, duration: f64, seed: SeedRecord) -> Result<PeriodTrajectory> {
    check_duration(duration)?;
    let start = steady_probabilities(&build_generator(rates)).ok().map(|s| s.p);
    simulate_from(rates, duration, seed, start.as_deref())
}

fn pick(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

fn simulate_from(
    rates: &TransitionRates<f64>,
    duration: f64,
    seed: SeedRecord,
    start: Option<&[f64]>,
) -> Result<PeriodTrajectory> {
    let mut rng = seed.rng();
    let n = rates.n();
    let mut period = start.map_or(0, |p| pick(&mut rng, p));
    let mut t = 0.0;
    let mut segments = vec![(period, 0.0)];
    let mut absorbed = false;
    loop {
        let escape = rates.escape_rate(period);
        if escape <= 0.0 {
            absorbed = true;
            break;
        }
        let dwell: f64 = Exp::new(escape).map_err(|e| Error::Numerical(e.to_string()))?.sample(&mut rng);
        t += dwell;
        if t >= duration {
            break;
        }
        let weights: Vec<f64> = (0..n).map(|j| rates.rate(period, j)).collect();
        period = pick(&mut rng, &weights);
        segments.push((period, t));
    }
    Ok(PeriodTrajectory { segments, duration, seed, absorbed: absorbed && n > 1 })
}

/// `count` independent trajectories with indices `0..count`, run in parallel.
pub fn simulate_ensemble(
    rates: &TransitionRates<f64>,
    duration: f64,
    master_seed: u64,
    count: usize,
) -> Result<Vec<PeriodTrajectory>> {
    check_duration(duration)?;
    let start = steady_probabilities(&build_generator(rates)).ok().map(|s| s.p);
    (0..count as u64)
        .into_par_iter()
        .map(|i| simulate_from(rates, duration, SeedRecord::new(master_seed, i), start.as_deref()))
        .collect()
}

/// Burn-in of ten times the longest mean dwell time.
pub fn default_burn_in(rates: &TransitionRates<f64>) -> f64 {
    (0..rates.n()).map(|i| rates.escape_rate(i)).filter(|&r| r > 0.0).map(|r| 10.0 / r).fold(0.0, f64::max)
}

/// Empirical `P̂_ij(τ)` with binomial standard errors. Rows whose start
/// period never occurred are `NaN` and reported as missing by [`Self::get`].
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyEstimate {
    pub tau: Vec<f64>,
    pub p: Vec<SquareMatrix<f64>>,
    pub se: Vec<SquareMatrix<f64>>,
    /// Number of sampled start points in each period.
    pub starts: Vec<usize>,
}

impl OccupancyEstimate {
    pub fn get(&self, k: usize, i: usize, j: usize) -> Option<(f64, f64)> {
        let v = self.p[k][(i, j)];
        (!v.is_nan()).then(|| (v, self.se[k][(i, j)]))
    }

    pub fn missing_rows(&self) -> Vec<usize> {
        (0..self.starts.len()).filter(|&i| self.starts[i] == 0).collect()
    }
}

/// One start point per trajectory at `burn_in`, followed to every `τ`.
pub fn empirical_occupancy(
    trajectories: &[PeriodTrajectory],
    n: usize,
    taus: &[f64],
    burn_in: f64,
) -> Result<OccupancyEstimate> {
    if trajectories.is_empty() {
        return Err(Error::Validation("need at least one trajectory".into()));
    }
    validate_grid(taus)?;
    let tau_max = *taus.last().expect("validated nonempty");
    let mut counts = vec![vec![0usize; n * n]; taus.len()];
    let mut starts = vec![0usize; n];
    for tr in trajectories {
        if burn_in + tau_max > tr.duration {
            return Err(Error::Validation(format!(
                "trajectory duration {} shorter than burn-in {burn_in} + max tau {tau_max}",
                tr.duration
            )));
        }
        let i = tr.period_at(burn_in);
        if i >= n {
            return Err(Error::Validation(format!("period index {i} out of range for {n} periods")));
        }
        starts[i] += 1;
        for (k, &tau) in taus.iter().enumerate() {
            let j = tr.period_at(burn_in + tau);
            counts[k][i * n + j] += 1;
        }
    }
    let mut p = Vec::with_capacity(taus.len());
    let mut se = Vec::with_capacity(taus.len());
    for c in &counts {
        let est = SquareMatrix::from_fn(n, |i, j| match starts[i] {
            0 => f64::NAN,
            m => c[i * n + j] as f64 / m as f64,
        });
        se.push(SquareMatrix::from_fn(n, |i, j| match starts[i] {
            0 => f64::NAN,
            m => {
                let q = est[(i, j)];
                (q * (1.0 - q) / m as f64).sqrt()
            }
        }));
        p.push(est);
    }
    Ok(OccupancyEstimate { tau: taus.to_vec(), p, se, starts })
}

/// Sorted photon arrival times on `[0, duration]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonStream {
    pub times: Vec<f64>,
    pub duration: f64,
    pub source: String,
    pub seed: SeedRecord,
}

impl PhotonStream {
    pub fn new(times: Vec<f64>, duration: f64, source: impl Into<String>, seed: SeedRecord) -> Result<Self> {
        check_duration(duration)?;
        if times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Validation("photon times must be sorted".into()));
        }
        if times.first().is_some_and(|&t| t < 0.0) || times.last().is_some_and(|&t| t > duration) {
            return Err(Error::Validation("photon times must lie within [0, duration]".into()));
        }
        Ok(Self { times, duration, source: source.into(), seed })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn mean_rate(&self) -> f64 {
        self.times.len() as f64 / self.duration
    }

    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# kind = photon_stream")?;
        writeln!(out, "# source = {}", self.source)?;
        writeln!(out, "# duration = {}", self.duration)?;
        writeln!(out, "# seed = {}", self.seed.master)?;
        writeln!(out, "# index = {}", self.seed.index)?;
        writeln!(out, "# photons = {}", self.times.len())?;
        for &t in &self.times {
            writeln!(out, "{}", format_value(t))?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(input: R) -> Result<Self> {
        let (meta, body) = read_commented(input)?;
        let times = body.iter().map(|l| parse_f64(l)).collect::<Result<Vec<_>>>()?;
        Self::new(times, meta_f64(&meta, "duration")?, meta.get("source").unwrap_or("unknown"), meta_seed(&meta)?)
    }
}

/// No-jump evolution from the ground state under
/// `H_eff = (Ω/2)σ_x − (iA/2)|e⟩⟨e|`.
struct NoJump {
    a: f64,
    omega: f64,
    /// `ν² = Ω²/4 − A²/16`; the amplitudes oscillate at `ν`.
    nu_sq: f64,
}

impl NoJump {
    /// `(e^{−At/4} cos νt, e^{−At/4} sin(νt)/ν)`, overflow-free when `ν² < 0`.
    fn terms(&self, t: f64) -> (f64, f64) {
        let q = self.a / 4.0;
        if self.nu_sq.abs() * t * t < 1e-6 {
            let z = self.nu_sq * t * t;
            let e = (-q * t).exp();
            return (e * (1.0 - z / 2.0 + z * z / 24.0), e * t * (1.0 - z / 6.0 + z * z / 120.0));
        }
        if self.nu_sq > 0.0 {
            let nu = self.nu_sq.sqrt();
            let e = (-q * t).exp();
            (e * (nu * t).cos(), e * (nu * t).sin() / nu)
        } else {
            let k = (-self.nu_sq).sqrt();
            let (ep, em) = (((k - q) * t).exp(), ((-k - q) * t).exp());
            ((ep + em) / 2.0, (ep - em) / (2.0 * k))
        }
    }

    /// Survival probability `‖ψ(t)‖²` and the excited amplitude squared.
    fn survival(&self, t: f64) -> (f64, f64) {
        let (c, s) = self.terms(t);
        let g = c + self.a / 4.0 * s;
        let e2 = (self.omega / 2.0 * s).powi(2);
        (g * g + e2, e2)
    }

    /// Solves `S(t) = u` by Newton steps safeguarded by bisection.
    fn waiting_time(&self, u: f64) -> f64 {
        let mut lo = 0.0;
        let mut hi = 4.0 / self.a;
        while self.survival(hi).0 > u {
            lo = hi;
            hi *= 2.0;
        }
        let mut t = 0.5 * (lo + hi);
        let mut last_step = hi - lo;
        for _ in 0..200 {
            let (s, e2) = self.survival(t);
            let f = s - u;
            if f > 0.0 {
                lo = t;
            } else {
                hi = t;
            }
            let slope = -self.a * e2;
            let newton = t - f / slope;
            // Bisect whenever Newton leaves the bracket or fails to halve the step.
            let next = if slope < 0.0 && newton > lo && newton < hi && (newton - t).abs() < 0.5 * last_step {
                newton
            } else {
                0.5 * (lo + hi)
            };
            last_step = (next - t).abs();
            t = next;
            if hi - lo <= 1e-14 * hi || last_step <= 1e-15 * t {
                break;
            }
        }
        t
    }
}

/// Quantum-jump photon stream: waiting times from the no-jump survival, with
/// a reset to the ground state after every emission.
pub fn photon_stream_two_level(params: &TwoLevelParams<f64>, duration: f64, seed: SeedRecord) -> Result<PhotonStream> {
    let params = TwoLevelParams::new(params.a, params.omega)?;
    check_duration(duration)?;
    let source = format!("two_level A={} Omega={}", params.a, params.omega);
    if params.omega == 0.0 {
        return PhotonStream::new(Vec::new(), duration, source, seed);
    }
    let nj = NoJump {
        a: params.a,
        omega: params.omega,
        nu_sq: params.omega * params.omega / 4.0 - params.a * params.a / 16.0,
    };
    let mut rng = seed.rng();
    let mut times = Vec::with_capacity((duration * params.a).min(1e8) as usize);
    let mut t = 0.0;
    loop {
        let u = 1.0 - rng.random::<f64>();
        t += nj.waiting_time(u);
        if t > duration {
            break;
        }
        times.push(t);
    }
    PhotonStream::new(times, duration, source, seed)
}

/// Homogeneous Poisson stream of the given rate.
pub fn poisson_stream(rate: f64, duration: f64, seed: SeedRecord) -> Result<PhotonStream> {
    check_duration(duration)?;
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(domain("rate", rate, "finite and > 0"));
    }
    let exp = Exp::new(rate).map_err(|e| Error::Numerical(e.to_string()))?;
    let mut rng = seed.rng();
    let mut times = Vec::new();
    let mut t = 0.0;
    loop {
        t += exp.sample(&mut rng);
        if t > duration {
            break;
        }
        times.push(t);
    }
    PhotonStream::new(times, duration, format!("poisson rate={rate}"), seed)
}

/// Keeps only photons that fall into the light periods of an independent
/// dark/light telegraph with mean durations `t0` (dark) and `t1` (light).
pub fn gate_stream(stream: &PhotonStream, t0: f64, t1: f64, seed: SeedRecord) -> Result<PhotonStream> {
    if !(t0 > 0.0) {
        return Err(domain("T0", t0, "> 0"));
    }
    if !(t1 > 0.0) {
        return Err(domain("T1", t1, "> 0"));
    }
    let rates = TransitionRates::two_period(1.0 / t0, 1.0 / t1)?;
    let telegraph = simulate_periods(&rates, stream.duration, seed)?;
    let times = stream.times.iter().copied().filter(|&t| telegraph.period_at(t) == 1).collect();
    PhotonStream::new(times, stream.duration, format!("{} gated T0={t0} T1={t1}", stream.source), stream.seed)
}

/// Coincidence estimate of `g(τ)` over all ordered photon pairs, normalized
/// bin by bin to the edge-corrected pair count of a uniform stream with the
/// same number of photons. Bins are `[kΔ, (k+1)Δ)` reported at their centers.
pub fn coincidence_g(stream: &PhotonStream, bin_width: f64, max_tau: f64) -> Result<CorrelationCurve> {
    if !(bin_width > 0.0) || !bin_width.is_finite() {
        return Err(domain("bin_width", bin_width, "finite and > 0"));
    }
    if !(max_tau >= bin_width) || max_tau > stream.duration {
        return Err(domain("max_tau", max_tau, "in [bin_width, duration]"));
    }
    let n = stream.len();
    if n < MIN_PHOTONS {
        return Err(Error::InsufficientStatistics { found: n, needed: MIN_PHOTONS });
    }
    let bins = (max_tau / bin_width).round() as usize;
    let span = bins as f64 * bin_width;
    let mut counts = vec![0u64; bins];
    let t = &stream.times;
    for i in 0..n {
        for &tj in &t[i + 1..] {
            let d = tj - t[i];
            if d >= span {
                break;
            }
            let k = ((d / bin_width) as usize).min(bins - 1);
            counts[k] += 1;
        }
    }
    let dur = stream.duration;
    let density = n as f64 * (n as f64 - 1.0) / (dur * dur);
    let mut tau = Vec::with_capacity(bins);
    let mut g = Vec::with_capacity(bins);
    let mut sigma = Vec::with_capacity(bins);
    for (k, &c) in counts.iter().enumerate() {
        let (a, b) = (k as f64 * bin_width, (k + 1) as f64 * bin_width);
        let expected = density * ((b - a) * dur - (b * b - a * a) / 2.0);
        tau.push(0.5 * (a + b));
        g.push(c as f64 / expected);
        sigma.push((c as f64).sqrt().max(1.0) / expected);
    }
    let params = Metadata::new()
        .with("source", &stream.source)
        .with("photons", n)
        .with("duration", dur)
        .with("bin_width", bin_width)
        .with("seed", stream.seed.master);
    CorrelationCurve::new(tau, g, "coincidence")?.with_sigma(sigma).map(|c| c.with_params(params))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_period_is_one_segment() {
        let tr = simulate_periods(&TransitionRates::trivial(), 50.0, SeedRecord::new(1, 0)).unwrap();
        assert_eq!(tr.segments, vec![(0, 0.0)]);
        assert!(!tr.absorbed);
        assert_eq!(tr.occupation_fractions(1), vec![1.0]);
    }

    #[test]
    fn absorbing_period_flags_truncation() {
        let r = TransitionRates::new(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let tr = simulate_periods(&r, 1e4, SeedRecord::new(3, 0)).unwrap();
        assert!(tr.absorbed);
        assert_eq!(tr.segments.last().unwrap().0, 1);
    }

    #[test]
    fn trajectories_are_reproducible() {
        let r = TransitionRates::three_period(0.1, 0.2, 0.3, 0.4).unwrap();
        let a = simulate_periods(&r, 500.0, SeedRecord::new(9, 4)).unwrap();
        let b = simulate_periods(&r, 500.0, SeedRecord::new(9, 4)).unwrap();
        let c = simulate_periods(&r, 500.0, SeedRecord::new(9, 5)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.segments.windows(2).all(|w| w[1].1 > w[0].1));
    }

    #[test]
    fn occupancy_identity_at_zero() {
        let r = TransitionRates::two_period(0.5, 0.25).unwrap();
        let trs = simulate_ensemble(&r, 100.0, 7, 200).unwrap();
        let est = empirical_occupancy(&trs, 2, &[0.0, 1.0], 20.0).unwrap();
        assert_eq!(est.get(0, 0, 0).unwrap().0, 1.0);
        assert_eq!(est.get(0, 1, 0).unwrap().0, 0.0);
        assert!(est.missing_rows().is_empty());
    }

    #[test]
    fn missing_rows_are_flagged() {
        let r = TransitionRates::new(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let trs = simulate_ensemble(&r, 100.0, 1, 20).unwrap();
        let est = empirical_occupancy(&trs, 2, &[0.0, 1.0], 90.0).unwrap();
        assert_eq!(est.missing_rows(), vec![0]);
        assert!(est.get(1, 0, 1).is_none());
    }

    #[test]
    fn undriven_atom_is_silent() {
        let s = photon_stream_two_level(&TwoLevelParams::new(1.0, 0.0).unwrap(), 100.0, SeedRecord::default()).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn survival_decreases_and_matches_derivative() {
        for &om in &[0.1, 0.25, 1.0, 5.0] {
            let nj = NoJump { a: 1.0, omega: om, nu_sq: om * om / 4.0 - 1.0 / 16.0 };
            let mut prev = 1.0;
            for k in 1..200 {
                let t = k as f64 * 0.1;
                let (s, e2) = nj.survival(t);
                assert!(s <= prev + 1e-15);
                let h = 1e-6;
                let num = (nj.survival(t + h).0 - nj.survival(t - h).0) / (2.0 * h);
                assert!((num + e2).abs() < 1e-7, "om {om} t {t}");
                prev = s;
            }
            for k in 1..200 {
                let u = k as f64 / 200.0;
                let t = nj.waiting_time(u);
                assert!((nj.survival(t).0 - u).abs() < 1e-12, "om {om} u {u} t {t} S {}", nj.survival(t).0);
            }
        }
    }

    #[test]
    fn coincidence_needs_photons() {
        let s = PhotonStream::new(vec![1.0, 2.0], 10.0, "x", SeedRecord::default()).unwrap();
        assert!(matches!(coincidence_g(&s, 0.1, 1.0), Err(Error::InsufficientStatistics { found: 2, .. })));
    }

    #[test]
    fn stream_text_round_trip() {
        let s = poisson_stream(2.0, 100.0, SeedRecord::new(5, 2)).unwrap();
        let mut buf = Vec::new();
        s.write_text(&mut buf).unwrap();
        let back = PhotonStream::read_text(buf.as_slice()).unwrap();
        assert_eq!(back.seed, s.seed);
        assert_eq!(back.len(), s.len());
        for (a, b) in back.times.iter().zip(&s.times) {
            assert!((a - b).abs() <= 1e-14 * b);
        }
    }

    #[test]
    fn trajectory_text_round_trip() {
        let r = TransitionRates::two_period(0.3, 0.2).unwrap();
        let tr = simulate_periods(&r, 200.0, SeedRecord::new(2, 1)).unwrap();
        let mut buf = Vec::new();
        tr.write_text(&mut buf).unwrap();
        let back = PeriodTrajectory::read_text(buf.as_slice()).unwrap();
        assert_eq!(back.seed, tr.seed);
        assert_eq!(back.segments.len(), tr.segments.len());
        assert_eq!(back.duration, tr.duration);
    }
}
