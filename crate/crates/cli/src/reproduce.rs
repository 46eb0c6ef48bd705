use blinking::blinking_model::{g0_two_vsystems, CouplingOrder, VPairModel, VPairParams};
use blinking::curve::{format_value, Metadata, Table};
use blinking::lindblad_oracle::{build_model, correlation_numeric, ModelKind};
use blinking::subsystem_optics::{g2_zero, DipoleCoupling, G2SineConstant, TwoLevelParams};
use blinking::Result;
use clap::{Args, ValueEnum};
use rayon::prelude::*;

use crate::args::{record_coupling, GridArgs, GridDefaults, OutputArgs, SineArg};
use crate::commands::gzero_table;
use crate::error::CliResult;

/// Coupling of atoms 2.7 wavelengths apart with perpendicular dipoles.
pub const RE_C3_FAR: f64 = -0.09;
pub const RE_C3_SCAN: [f64; 4] = [0.2, -0.1, 0.1, -0.09];
pub const FIG5_OMEGA3: [f64; 5] = [0.3, 0.5, 1.0, 2.0, 5.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    /// g(τ), closed form and master equation, Ω₃ = 0.3, Ω₂ = 0.005.
    Fig2a,
    /// g(τ), closed form and master equation, Ω₃ = 5, Ω₂ = 0.05.
    Fig2b,
    /// g(0) of two V systems against Ω₃.
    Fig3,
    /// g(0) of two two-level atoms against Ω.
    Fig4,
    /// First-order g(τ) for several Ω₃.
    Fig5,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    #[arg(value_enum)]
    pub figure: Figure,
    /// Overrides the preset τ grid (Ω grid for fig3 and fig4).
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, value_enum, default_value_t = SineArg::Published)]
    pub sine_constant: SineArg,
    #[command(flatten)]
    pub out: OutputArgs,
}

const OMEGA_SCAN: GridDefaults =
    GridDefaults { min: 0.1, max: 10.0, points: 200, spacing: crate::args::SpacingArg::Log };

fn vpair(omega2: f64, omega3: f64) -> Result<VPairParams<f64>> {
    VPairParams::new(1.0, omega2, omega3, DipoleCoupling::direct(RE_C3_FAR, 0.0))
}

fn with_oracle(
    meta: &mut Metadata,
    grid: &GridArgs,
    params: VPairParams<f64>,
    sine: G2SineConstant,
) -> CliResult<Table> {
    let taus = grid.build(GridDefaults::TAU, meta)?;
    let model = VPairModel::new(params, sine)?;
    let g_model = taus.par_iter().map(|&t| model.g(t)).collect::<Result<Vec<_>>>()?;
    let numeric = correlation_numeric(&build_model(&ModelKind::VPair { params, phase: 0.0 })?, &taus)?;
    meta.set("oracle_max_trace_error", format_value(numeric.diagnostics.max_trace_error));
    let mut table = Table::new(meta.clone(), ["tau", "g_model", "g_oracle"].map(String::from).to_vec());
    for ((&t, &gm), &go) in taus.iter().zip(&g_model).zip(&numeric.curve.g) {
        table.push(vec![t, gm, go])?;
    }
    Ok(table)
}

pub fn reproduce(a: &ReproduceArgs) -> CliResult<()> {
    let sine: G2SineConstant = a.sine_constant.into();
    let mut meta = Metadata::new().with("command", "reproduce").with("a3", 1.0);
    let table = match a.figure {
        Figure::Fig2a | Figure::Fig2b => {
            let (name, omega2, omega3) =
                if a.figure == Figure::Fig2a { ("fig2a", 0.005, 0.3) } else { ("fig2b", 0.05, 5.0) };
            let params = vpair(omega2, omega3)?;
            meta.set("figure", name);
            meta.set("model", "two_vsystems");
            meta.set("omega2", omega2);
            meta.set("omega3", omega3);
            record_coupling(&mut meta, &params.c3);
            meta.set("g2_order", "first");
            meta.set("sine_constant", sine.label());
            with_oracle(&mut meta, &a.grid, params, sine)?
        }
        Figure::Fig3 => {
            meta.set("figure", "fig3");
            meta.set("model", "two_vsystems");
            meta.set("omega2", 0.005);
            meta.set("im_c3", 0.0);
            meta.set("order", CouplingOrder::All.label());
            let omegas = a.grid.build(OMEGA_SCAN, &mut meta)?;
            gzero_table(meta, "omega3", &omegas, &RE_C3_SCAN, |omega3, re| {
                let p = VPairParams::new(1.0, 0.005, omega3, DipoleCoupling::direct(re, 0.0))?;
                g0_two_vsystems(&p, CouplingOrder::All)
            })?
        }
        Figure::Fig4 => {
            meta.set("figure", "fig4");
            meta.set("model", "atom_pair");
            meta.set("im_c3", 0.0);
            meta.set("order", CouplingOrder::All.label());
            let omegas = a.grid.build(OMEGA_SCAN, &mut meta)?;
            gzero_table(meta, "omega", &omegas, &RE_C3_SCAN, |omega, re| {
                g2_zero(&TwoLevelParams::new(1.0, omega)?, &DipoleCoupling::direct(re, 0.0))
            })?
        }
        Figure::Fig5 => {
            meta.set("figure", "fig5");
            meta.set("model", "two_vsystems");
            meta.set("omega2", 0.005);
            meta.set("re_c3", RE_C3_FAR);
            meta.set("im_c3", 0.0);
            meta.set("g2_order", "first");
            meta.set("sine_constant", sine.label());
            let list: Vec<String> = FIG5_OMEGA3.iter().map(|o| o.to_string()).collect();
            meta.set("omega3_values", list.join(" "));
            let taus = a.grid.build(GridDefaults::TAU, &mut meta)?;
            let models =
                FIG5_OMEGA3.iter().map(|&o| VPairModel::new(vpair(0.005, o)?, sine)).collect::<Result<Vec<_>>>()?;
            let mut columns = vec!["tau".to_string()];
            columns.extend(FIG5_OMEGA3.iter().map(|o| format!("g_omega3_{o}")));
            let rows = taus
                .par_iter()
                .map(|&t| {
                    let mut row = vec![t];
                    for m in &models {
                        row.push(m.g(t)?);
                    }
                    Ok(row)
                })
                .collect::<Result<Vec<_>>>()?;
            let mut table = Table::new(meta, columns);
            table.rows = rows;
            table
        }
    };
    a.out.table(&table)
}
