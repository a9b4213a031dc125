use serde::{Deserialize, Serialize};
use zerotemp::oscillator::position_operator;
use zerotemp::validation::{exact_system_bath, ground_product_state, BathModeSet};

use super::{indexed, sample_times, Context, Experiment, Outcome};
use crate::config::{parse_params, StateConfig};
use crate::error::CliResult;
use crate::table::{Cell, Table};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct Params {
    n_modes: usize,
    mode_dim: usize,
    coupling_scale: f64,
    state: StateConfig,
    t_final: f64,
    n_samples: usize,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            n_modes: 4,
            mode_dim: 3,
            coupling_scale: 1.0,
            state: StateConfig::Cat { re: 1.0, im: 0.0 },
            t_final: std::f64::consts::FRAC_PI_2,
            n_samples: 13,
        }
    }
}

/// Exact unitary evolution with explicit bath oscillators.
pub struct Oracle;

impl Experiment for Oracle {
    fn name(&self) -> &'static str {
        "oracle"
    }

    fn run(&self, ctx: &Context<'_>) -> CliResult<Outcome> {
        let (p, resolved) = parse_params::<Params>(ctx.params)?;
        let dim = ctx.system.dim();
        let modes = BathModeSet::ohmic(p.n_modes, p.mode_dim, &ctx.bath)?.scaled(p.coupling_scale)?;
        let psi0 = ground_product_state(&p.state.build(dim)?, &modes);
        let times = sample_times(p.t_final, p.n_samples)?;
        let coupling = position_operator(&ctx.system, &ctx.units);
        let run = exact_system_bath(&ctx.system, &modes, &coupling, &psi0, &times, &ctx.units)?;

        let mut columns: Vec<String> = ["t", "purity", "joint_norm", "coherence_l1"].map(String::from).to_vec();
        columns.extend(indexed("population", dim));
        let mut table = Table::new(columns);
        for (k, state) in run.reduced.iter().enumerate() {
            let mut row: Vec<Cell> = vec![
                run.times[k].into(),
                run.purity[k].into(),
                run.joint_norm[k].into(),
                state.coherence_l1().into(),
            ];
            row.extend(state.populations().into_iter().map(Cell::from));
            table.push(row);
        }
        Ok(Outcome::new(table, resolved))
    }
}
