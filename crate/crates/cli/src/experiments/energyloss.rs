use serde::{Deserialize, Serialize};
use zerotemp::master_eq::{delta_rho_first_order, energy_change_full, evolve, EnergyLossReport, EvolutionControl};
use zerotemp::state::DensityMatrix;

use super::evolve::CouplingChoice;
use super::{indexed, Context, Experiment, Outcome};
use crate::config::{parse_params, StateConfig};
use crate::error::CliResult;
use crate::table::{Cell, Table};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct Params {
    state: StateConfig,
    t: f64,
    coupling: CouplingChoice,
    control: EvolutionControl,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            state: StateConfig::Fock { n: 0 },
            t: 0.01,
            coupling: CouplingChoice::default(),
            control: EvolutionControl::default(),
        }
    }
}

fn order_name(report: &EnergyLossReport) -> &'static str {
    match report.order {
        zerotemp::master_eq::Order::FirstOrder => "first_order",
        zerotemp::master_eq::Order::FullEvolution => "full_evolution",
    }
}

/// First-order population shifts and energy change against full evolution.
pub struct EnergyLoss;

impl Experiment for EnergyLoss {
    fn name(&self) -> &'static str {
        "energyloss"
    }

    fn run(&self, ctx: &Context<'_>) -> CliResult<Outcome> {
        let (p, resolved) = parse_params::<Params>(ctx.params)?;
        let dim = ctx.system.dim();
        let system = p.coupling.apply(&ctx.system, &ctx.units)?;
        let rho0 = DensityMatrix::from_pure(&p.state.build(dim)?);
        let first = delta_rho_first_order(&rho0, &system, &ctx.bath, p.t, &ctx.units)?;
        let trajectory = evolve(&rho0, &system, &ctx.bath, &[0.0, p.t], &p.control, &ctx.units)?;
        let full = energy_change_full(&trajectory, &system, &ctx.units)?;

        let mut columns: Vec<String> = ["order", "elapsed", "delta_e"].map(String::from).to_vec();
        columns.extend(indexed("delta_rho", dim));
        let mut table = Table::new(columns);
        for report in [&first, &full] {
            let mut row: Vec<Cell> = vec![order_name(report).into(), report.elapsed.into(), report.delta_e.into()];
            row.extend(report.delta_rho_diag.iter().map(|&d| Cell::from(d)));
            table.push(row);
        }
        Ok(Outcome::new(table, resolved))
    }
}
