use std::f64::consts::FRAC_PI_2;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use blinking::blinking_model::{CouplingOrder, VPairParams};
use blinking::curve::{make_grid, GridSpacing, Metadata, Table};
use blinking::subsystem_optics::{dipole_coupling, DipoleCoupling, G2SineConstant, TwoLevelParams};
use clap::{Args, ValueEnum};

use crate::error::{CliError, CliResult};

/// Smallest separation accepted by `--kr`.
pub const MIN_KR: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SineArg {
    Published,
    Corrected,
}

impl From<SineArg> for G2SineConstant {
    fn from(s: SineArg) -> Self {
        match s {
            SineArg::Published => G2SineConstant::Published,
            SineArg::Corrected => G2SineConstant::Corrected,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OrderArg {
    First,
    All,
}

impl From<OrderArg> for CouplingOrder {
    fn from(o: OrderArg) -> Self {
        match o {
            OrderArg::First => CouplingOrder::First,
            OrderArg::All => CouplingOrder::All,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpacingArg {
    Linear,
    Log,
}

impl From<SpacingArg> for GridSpacing {
    fn from(s: SpacingArg) -> Self {
        match s {
            SpacingArg::Linear => GridSpacing::Linear,
            SpacingArg::Log => GridSpacing::Log,
        }
    }
}

impl SpacingArg {
    fn label(self) -> &'static str {
        match self {
            Self::Linear => "linear",
            Self::Log => "log",
        }
    }
}

/// Dipole coupling of the strong transition, given either directly or from
/// the geometry.
#[derive(Debug, Clone, Default, Args)]
pub struct CouplingArgs {
    /// Real part of C₃ (units of A₃).
    #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["kr", "theta"])]
    pub re_c3: Option<f64>,
    /// Imaginary part of C₃ (units of A₃); defaults to 0.
    #[arg(long, allow_negative_numbers = true, requires = "re_c3")]
    pub im_c3: Option<f64>,
    /// Separation k·r = 2πr/λ, as an alternative to --re-c3.
    #[arg(long, allow_negative_numbers = true)]
    pub kr: Option<f64>,
    /// Angle between dipoles and the connecting line (radians); defaults to π/2.
    #[arg(long, requires = "kr")]
    pub theta: Option<f64>,
}

impl CouplingArgs {
    pub fn given(&self) -> bool {
        self.re_c3.is_some() || self.kr.is_some()
    }

    pub fn resolve(&self, a3: f64) -> CliResult<Option<DipoleCoupling<f64>>> {
        if let Some(re) = self.re_c3 {
            return Ok(Some(DipoleCoupling::direct(re, self.im_c3.unwrap_or(0.0))));
        }
        let Some(kr) = self.kr else {
            return Ok(None);
        };
        if !(kr >= MIN_KR) {
            return Err(CliError::Usage(format!("--kr {kr} is below the supported minimum {MIN_KR}")));
        }
        Ok(Some(dipole_coupling(kr, self.theta.unwrap_or(FRAC_PI_2), a3)?))
    }

    pub fn require(&self, a3: f64) -> CliResult<DipoleCoupling<f64>> {
        self.resolve(a3)?
            .ok_or_else(|| CliError::Usage("a coupling is required: give --re-c3 [--im-c3] or --kr [--theta]".into()))
    }
}

pub fn record_coupling(meta: &mut Metadata, c: &DipoleCoupling<f64>) {
    meta.set("re_c3", c.re());
    meta.set("im_c3", c.im());
    if let Some(g) = c.geometry {
        meta.set("kr", g.kr);
        meta.set("theta", g.theta);
    }
}

/// Parameters of two V systems; `--a3` and `--omega3` also describe a
/// single two-level atom or a two-level pair.
#[derive(Debug, Clone, Args)]
pub struct SystemArgs {
    /// Decay rate A₃ of the strong transition.
    #[arg(long, default_value_t = 1.0)]
    pub a3: f64,
    /// Rabi frequency Ω₂ of the weak transition.
    #[arg(long, default_value_t = 0.005)]
    pub omega2: f64,
    /// Rabi frequency Ω₃ of the strong transition.
    #[arg(long, default_value_t = 0.3)]
    pub omega3: f64,
    #[command(flatten)]
    pub coupling: CouplingArgs,
}

impl SystemArgs {
    pub fn two_level(&self) -> CliResult<TwoLevelParams<f64>> {
        Ok(TwoLevelParams::new(self.a3, self.omega3)?)
    }

    pub fn vpair(&self) -> CliResult<VPairParams<f64>> {
        let c = self.coupling.require(self.a3)?;
        Ok(VPairParams::new(self.a3, self.omega2, self.omega3, c)?)
    }

    pub fn record(&self, meta: &mut Metadata, with_weak: bool) {
        meta.set("a3", self.a3);
        if with_weak {
            meta.set("omega2", self.omega2);
        }
        meta.set("omega3", self.omega3);
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct GridArgs {
    /// First grid point.
    #[arg(long)]
    pub tau_min: Option<f64>,
    /// Last grid point.
    #[arg(long)]
    pub tau_max: Option<f64>,
    /// Number of grid points.
    #[arg(long)]
    pub points: Option<usize>,
    /// Grid spacing.
    #[arg(long, value_enum)]
    pub spacing: Option<SpacingArg>,
}

#[derive(Debug, Clone, Copy)]
pub struct GridDefaults {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub spacing: SpacingArg,
}

impl GridDefaults {
    pub const TAU: Self = Self { min: 1e-2, max: 1e4, points: 400, spacing: SpacingArg::Log };
}

impl GridArgs {
    pub fn build(&self, defaults: GridDefaults, meta: &mut Metadata) -> CliResult<Vec<f64>> {
        let min = self.tau_min.unwrap_or(defaults.min);
        let max = self.tau_max.unwrap_or(defaults.max);
        let points = self.points.unwrap_or(defaults.points);
        let spacing = self.spacing.unwrap_or(defaults.spacing);
        meta.set("grid_min", min);
        meta.set("grid_max", max);
        meta.set("grid_points", points);
        meta.set("grid_spacing", spacing.label());
        Ok(make_grid(min, max, points, spacing.into())?)
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct OutputArgs {
    /// Output file; standard output when absent.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

impl OutputArgs {
    pub fn writer(&self) -> CliResult<Box<dyn Write>> {
        Ok(match &self.output {
            Some(path) => Box::new(BufWriter::new(
                File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
            )),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }

    pub fn table(&self, table: &Table) -> CliResult<()> {
        let mut w = self.writer()?;
        table.write_csv(&mut w)?;
        w.flush().map_err(|e| CliError::Io(e.to_string()))
    }

    pub fn text(&self, text: &str) -> CliResult<()> {
        let mut w = self.writer()?;
        w.write_all(text.as_bytes()).and_then(|_| w.flush()).map_err(|e| CliError::Io(e.to_string()))
    }
}

/// `key = value` lines.
pub fn key_value_text(meta: &Metadata) -> String {
    meta.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}
