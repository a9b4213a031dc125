use serde::{Deserialize, Serialize};
use zerotemp::master_eq::{coupling_operator_override, evolve, EvolutionControl};
use zerotemp::oscillator::{hamiltonian, number_operator, OscillatorSystem};
use zerotemp::state::DensityMatrix;
use zerotemp::units::UnitSystem;

use super::{indexed, sample_times, Context, Experiment, Outcome};
use crate::config::{parse_params, StateConfig};
use crate::error::CliResult;
use crate::table::{Cell, Table};

/// Operator that couples to the bath.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingChoice {
    #[default]
    Position,
    Number,
    Hamiltonian,
}

impl CouplingChoice {
    pub fn apply(self, system: &OscillatorSystem, units: &UnitSystem) -> CliResult<OscillatorSystem> {
        Ok(match self {
            CouplingChoice::Position => system.clone(),
            CouplingChoice::Number => coupling_operator_override(system, number_operator(system.dim()))?,
            CouplingChoice::Hamiltonian => coupling_operator_override(system, hamiltonian(system, units))?,
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct Params {
    state: StateConfig,
    t_final: f64,
    n_samples: usize,
    coupling: CouplingChoice,
    control: EvolutionControl,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            state: StateConfig::Cat { re: 1.0, im: 0.0 },
            t_final: 10.0,
            n_samples: 101,
            coupling: CouplingChoice::default(),
            control: EvolutionControl::default(),
        }
    }
}

/// Master-equation trajectory with populations and summary observables.
pub struct Evolve;

impl Experiment for Evolve {
    fn name(&self) -> &'static str {
        "evolve"
    }

    fn run(&self, ctx: &Context<'_>) -> CliResult<Outcome> {
        let (p, resolved) = parse_params::<Params>(ctx.params)?;
        let dim = ctx.system.dim();
        let system = p.coupling.apply(&ctx.system, &ctx.units)?;
        let rho0 = DensityMatrix::from_pure(&p.state.build(dim)?);
        let times = sample_times(p.t_final, p.n_samples)?;
        let trajectory = evolve(&rho0, &system, &ctx.bath, &times, &p.control, &ctx.units)?;

        let h = hamiltonian(&system, &ctx.units);
        let mut columns = vec!["t", "trace", "purity", "energy", "coherence_l1"]
            .into_iter()
            .map(String::from)
            .collect::<Vec<_>>();
        columns.extend(indexed("population", dim));
        let mut table = Table::new(columns);
        for (t, state) in trajectory.times.iter().zip(&trajectory.states) {
            let mut row: Vec<Cell> = vec![
                (*t).into(),
                state.trace().re.into(),
                state.purity().into(),
                state.expectation(&h).re.into(),
                state.coherence_l1().into(),
            ];
            row.extend(state.populations().into_iter().map(Cell::from));
            table.push(row);
        }
        Ok(Outcome::new(table, resolved))
    }
}
