use std::f64::consts::FRAC_PI_2;
use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use blinking::blinking_model::{g0_two_vsystems, vpair_rates, CouplingOrder, VPairModel, VPairParams};
use blinking::curve::{format_value, Metadata, Table};
use blinking::lindblad_oracle::{build_model, correlation_numeric, ModelKind};
use blinking::period_markov::{build_generator, occupancy_matrix};
use blinking::stochastic_sim::{
    coincidence_g, default_burn_in, empirical_occupancy, gate_stream, photon_stream_two_level, simulate_ensemble,
    SeedRecord,
};
use blinking::subsystem_optics::{dipole_coupling, DipoleCoupling, G2SineConstant};
use blinking::Result;
use clap::{Args, ValueEnum};
use rayon::prelude::*;

use crate::args::{
    key_value_text, record_coupling, GridArgs, GridDefaults, OrderArg, OutputArgs, SineArg, SpacingArg, SystemArgs,
    MIN_KR,
};
use crate::error::{CliError, CliResult};

/// Column label for one value of Re C₃.
pub fn coupling_column(prefix: &str, re: f64) -> String {
    format!("{prefix}_re_c3_{re}")
}

fn warn(meta: &mut Metadata, params: &VPairParams<f64>) {
    if let Some(w) = params.validity_warning() {
        eprintln!("warning: {w}");
        meta.set("warning", w);
    }
}

#[derive(Debug, Args)]
pub struct GtauArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Constant of the sin γτ term in the first-order pair correlator.
    #[arg(long, value_enum, default_value_t = SineArg::Published)]
    pub sine_constant: SineArg,
    #[command(flatten)]
    pub out: OutputArgs,
}

pub fn gtau(a: &GtauArgs) -> CliResult<()> {
    let params = a.system.vpair()?;
    let sine: G2SineConstant = a.sine_constant.into();
    let model = VPairModel::new(params, sine)?;
    let mut meta = Metadata::new().with("command", "gtau").with("model", "two_vsystems").with("g2_order", "first");
    a.system.record(&mut meta, true);
    record_coupling(&mut meta, &params.c3);
    meta.set("sine_constant", sine.label());
    warn(&mut meta, &params);
    let taus = a.grid.build(GridDefaults::TAU, &mut meta)?;
    let g = taus.par_iter().map(|&t| model.g(t)).collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(meta, vec!["tau".into(), "g".into()]);
    table.rows = taus.iter().zip(&g).map(|(&t, &g)| vec![t, g]).collect();
    a.out.table(&table)
}

#[derive(Debug, Args)]
pub struct GzeroScanArgs {
    /// Decay rate A₃ of the strong transition.
    #[arg(long, default_value_t = 1.0)]
    pub a3: f64,
    /// Rabi frequency Ω₂ of the weak transition.
    #[arg(long, default_value_t = 0.005)]
    pub omega2: f64,
    #[arg(long, default_value_t = 0.1)]
    pub omega3_min: f64,
    #[arg(long, default_value_t = 10.0)]
    pub omega3_max: f64,
    #[arg(long, default_value_t = 200)]
    pub points: usize,
    #[arg(long, value_enum, default_value_t = SpacingArg::Log)]
    pub spacing: SpacingArg,
    /// Comma-separated values of Re C₃.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, default_values_t = [0.2, -0.1, 0.1, -0.09])]
    pub re_c3: Vec<f64>,
    /// Imaginary part of C₃ shared by all curves.
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub im_c3: f64,
    /// Order in C₃ of the g(0) expression.
    #[arg(long, value_enum, default_value_t = OrderArg::All)]
    pub order: OrderArg,
    #[command(flatten)]
    pub out: OutputArgs,
}

pub fn gzero_scan(a: &GzeroScanArgs) -> CliResult<()> {
    let order: CouplingOrder = a.order.into();
    let mut meta = Metadata::new()
        .with("command", "gzero-scan")
        .with("model", "two_vsystems")
        .with("a3", a.a3)
        .with("omega2", a.omega2)
        .with("im_c3", a.im_c3)
        .with("order", order.label());
    let grid = GridArgs {
        tau_min: Some(a.omega3_min),
        tau_max: Some(a.omega3_max),
        points: Some(a.points),
        spacing: Some(a.spacing),
    };
    let omegas = grid.build(GridDefaults::TAU, &mut meta)?;
    let table = gzero_table(meta, "omega3", &omegas, &a.re_c3, |omega3, re| {
        let p = VPairParams::new(a.a3, a.omega2, omega3, DipoleCoupling::direct(re, a.im_c3))?;
        g0_two_vsystems(&p, order)
    })?;
    a.out.table(&table)
}

/// One row per `x`, one column per Re C₃.
pub fn gzero_table(
    mut meta: Metadata,
    x_name: &str,
    xs: &[f64],
    re_c3: &[f64],
    f: impl Fn(f64, f64) -> Result<f64> + Sync,
) -> CliResult<Table> {
    if re_c3.is_empty() {
        return Err(CliError::Usage("at least one Re C3 value is required".into()));
    }
    let list: Vec<String> = re_c3.iter().map(|r| r.to_string()).collect();
    meta.set("re_c3_values", list.join(" "));
    let mut columns = vec![x_name.to_string()];
    columns.extend(re_c3.iter().map(|&r| coupling_column("g0", r)));
    let rows = xs
        .par_iter()
        .map(|&x| {
            let mut row = vec![x];
            for &r in re_c3 {
                row.push(f(x, r)?);
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(meta, columns);
    table.rows = rows;
    Ok(table)
}

#[derive(Debug, Args)]
pub struct CouplingCmdArgs {
    /// A single separation k·r; otherwise a scan is written.
    #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["kr_min", "kr_max", "points"])]
    pub kr: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub kr_min: f64,
    #[arg(long, default_value_t = 100.0)]
    pub kr_max: f64,
    #[arg(long, default_value_t = 400)]
    pub points: usize,
    #[arg(long, value_enum, default_value_t = SpacingArg::Log)]
    pub spacing: SpacingArg,
    /// Angle between dipoles and the connecting line (radians).
    #[arg(long, default_value_t = FRAC_PI_2)]
    pub theta: f64,
    /// Single-atom decay rate A.
    #[arg(long, default_value_t = 1.0)]
    pub a3: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

pub fn coupling(a: &CouplingCmdArgs) -> CliResult<()> {
    let mut meta = Metadata::new().with("command", "coupling").with("theta", a.theta).with("a3", a.a3);
    let krs = match a.kr {
        Some(kr) => vec![kr],
        None => GridArgs {
            tau_min: Some(a.kr_min),
            tau_max: Some(a.kr_max),
            points: Some(a.points),
            spacing: Some(a.spacing),
        }
        .build(GridDefaults::TAU, &mut meta)?,
    };
    if let Some(&kr) = krs.iter().find(|&&kr| !(kr >= MIN_KR)) {
        return Err(CliError::Usage(format!("kr = {kr} is below the supported minimum {MIN_KR}")));
    }
    let mut table = Table::new(meta, ["kr", "re_c", "im_c", "abs_c"].map(String::from).to_vec());
    for kr in krs {
        let c = dipole_coupling(kr, a.theta, a.a3)?.c;
        table.push(vec![kr, c.re, c.im, c.norm()])?;
    }
    a.out.table(&table)
}

#[derive(Debug, Args)]
pub struct RatesArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

pub fn rates(a: &RatesArgs) -> CliResult<()> {
    let params = a.system.vpair()?;
    let model = VPairModel::new(params, G2SineConstant::Published)?;
    let r = &model.rates;
    let mut meta = Metadata::new().with("command", "rates");
    a.system.record(&mut meta, true);
    record_coupling(&mut meta, &params.c3);
    for (k, v) in
        [("p01", r.p01), ("p10", r.p10), ("p12", r.p12), ("p21", r.p21), ("t0", r.t0), ("t1", r.t1), ("t2", r.t2)]
    {
        meta.set(k, v);
    }
    for k in 0..3 {
        meta.set(format!("P{k}"), model.steady.get(k));
    }
    meta.set("I1", model.i1);
    meta.set("I2", model.i2);
    meta.set("plateau", model.as_blinking_model()?.intermediate_plateau());
    meta.set("g0_all", g0_two_vsystems(&params, CouplingOrder::All)?);
    meta.set("g0_first", g0_two_vsystems(&params, CouplingOrder::First)?);
    warn(&mut meta, &params);
    a.out.text(&key_value_text(&meta))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleModel {
    #[value(name = "two_level")]
    TwoLevel,
    #[value(name = "atom_pair")]
    AtomPair,
    #[value(name = "v_pair")]
    VPair,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// System to integrate.
    #[arg(long, value_enum)]
    pub model: OracleModel,
    #[command(flatten)]
    pub system: SystemArgs,
    /// Laser phase at the second atom (radians).
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub phase: f64,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

pub fn oracle(a: &OracleArgs) -> CliResult<()> {
    let mut meta = Metadata::new().with("command", "oracle");
    let kind = match a.model {
        OracleModel::TwoLevel => {
            if a.system.coupling.given() {
                return Err(CliError::Usage("two_level takes no coupling".into()));
            }
            a.system.record(&mut meta, false);
            ModelKind::TwoLevel(a.system.two_level()?)
        }
        OracleModel::AtomPair => {
            let coupling = a.system.coupling.require(a.system.a3)?;
            a.system.record(&mut meta, false);
            record_coupling(&mut meta, &coupling);
            meta.set("phase", a.phase);
            ModelKind::AtomPair { params: a.system.two_level()?, coupling, phase: a.phase }
        }
        OracleModel::VPair => {
            let params = a.system.vpair()?;
            a.system.record(&mut meta, true);
            record_coupling(&mut meta, &params.c3);
            meta.set("phase", a.phase);
            ModelKind::VPair { params, phase: a.phase }
        }
    };
    let taus = a.grid.build(GridDefaults::TAU, &mut meta)?;
    let numeric = correlation_numeric(&build_model(&kind)?, &taus)?;
    let d = numeric.diagnostics;
    meta.set("intensity", numeric.intensity);
    meta.set("steady_residual", format_value(d.steady_residual));
    meta.set("max_trace_error", format_value(d.max_trace_error));
    meta.set("min_eigenvalue", format_value(d.min_eigenvalue));
    let mut curve = numeric.curve;
    curve.params = meta;
    a.out.table(&curve.to_table())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimKind {
    /// Period trajectories and the empirical P_ij(τ).
    Periods,
    /// A two-level photon stream and its coincidence ĝ(τ).
    Stream,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub kind: SimKind,
    #[command(flatten)]
    pub system: SystemArgs,
    /// Master seed; trajectory k uses stream k.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Trajectory or stream length.
    #[arg(long)]
    pub duration: Option<f64>,
    /// Number of period trajectories.
    #[arg(long, default_value_t = 1000)]
    pub trajectories: usize,
    /// Start time of the occupation estimates; 10·max T_i by default.
    #[arg(long)]
    pub burn_in: Option<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Histogram bin width of ĝ(τ).
    #[arg(long, default_value_t = 0.1)]
    pub bin_width: f64,
    /// Largest delay of ĝ(τ).
    #[arg(long, default_value_t = 10.0)]
    pub max_tau: f64,
    /// Gate the stream with dark periods of this mean length.
    #[arg(long, requires = "t1")]
    pub t0: Option<f64>,
    /// Mean light-period length of the gate.
    #[arg(long, requires = "t0")]
    pub t1: Option<f64>,
    /// Also write the raw stream, or the first trajectory, as text.
    #[arg(long)]
    pub events: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutputArgs,
}

fn events_file(path: &PathBuf) -> CliResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn simulate(a: &SimulateArgs) -> CliResult<()> {
    let mut meta = Metadata::new().with("command", "simulate").with("seed", a.seed);
    match a.kind {
        SimKind::Periods => {
            let params = a.system.vpair()?;
            a.system.record(&mut meta, true);
            record_coupling(&mut meta, &params.c3);
            let rates = vpair_rates(&params)?.transition_rates()?;
            let burn = a.burn_in.unwrap_or_else(|| default_burn_in(&rates));
            let t_max = burn / 10.0;
            let defaults = GridDefaults { min: 0.0, max: 2.5 * t_max, points: 11, spacing: SpacingArg::Linear };
            let taus = a.grid.build(defaults, &mut meta)?;
            let duration = a.duration.unwrap_or(burn + taus[taus.len() - 1]);
            meta.set("duration", duration);
            meta.set("burn_in", burn);
            meta.set("trajectories", a.trajectories);
            let trajs = simulate_ensemble(&rates, duration, a.seed, a.trajectories)?;
            if let (Some(path), Some(first)) = (&a.events, trajs.first()) {
                first.write_text(events_file(path)?)?;
            }
            let est = empirical_occupancy(&trajs, 3, &taus, burn)?;
            for i in est.missing_rows() {
                eprintln!("warning: no trajectory started in period {i}");
            }
            let gen = build_generator(&rates);
            let mut columns = vec!["tau".to_string()];
            for prefix in ["p", "se", "exact"] {
                for i in 0..3 {
                    for j in 0..3 {
                        columns.push(format!("{prefix}{i}{j}"));
                    }
                }
            }
            let mut table = Table::new(meta, columns);
            for (k, &tau) in taus.iter().enumerate() {
                let exact = occupancy_matrix(&gen, tau)?;
                let mut row = vec![tau];
                row.extend(est.p[k].as_slice());
                row.extend(est.se[k].as_slice());
                row.extend(exact.p.as_slice());
                table.push(row)?;
            }
            a.out.table(&table)
        }
        SimKind::Stream => {
            if a.system.coupling.given() {
                return Err(CliError::Usage("the stream simulation takes no coupling".into()));
            }
            let params = a.system.two_level()?;
            a.system.record(&mut meta, false);
            let duration = a.duration.unwrap_or(1e5);
            let mut stream = photon_stream_two_level(&params, duration, SeedRecord::new(a.seed, 0))?;
            if let (Some(t0), Some(t1)) = (a.t0, a.t1) {
                stream = gate_stream(&stream, t0, t1, SeedRecord::new(a.seed, 1))?;
                meta.set("gate_t0", t0);
                meta.set("gate_t1", t1);
            }
            if let Some(path) = &a.events {
                stream.write_text(events_file(path)?)?;
            }
            let curve = coincidence_g(&stream, a.bin_width, a.max_tau)?;
            meta.extend(&curve.params);
            let mut table = curve.to_table();
            let mut full = Metadata::new().with("model", &curve.model);
            full.extend(&meta);
            table.metadata = full;
            a.out.table(&table)
        }
    }
}
