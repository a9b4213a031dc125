use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use serde_json::json;
use zerotemp::grid::{state_on_grid, GridSpec, GridWavefunction};
use zerotemp::state::StateVector;
use zerotemp::validation::{hamilton_jacobi_residual, Convention};
use zerotemp::Complex64;

use super::{Context, Experiment, Outcome};
use crate::config::{parse_params, StateConfig};
use crate::error::CliResult;
use crate::table::Table;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum Case {
    /// Free plane wave of wavenumber k.
    PlaneWave { k: f64 },
    /// Exact Fock-basis evolution of an oscillator state.
    Oscillator { state: StateConfig },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct Params {
    case: Case,
    grid: GridSpec,
    dt: f64,
    convention: Convention,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            case: Case::Oscillator {
                state: StateConfig::Fock { n: 0 },
            },
            grid: GridSpec {
                x_min: -8.0,
                x_max: 8.0,
                n_points: 2048,
            },
            dt: 0.01,
            convention: Convention::StandardMadelung,
        }
    }
}

/// Quantum Hamilton–Jacobi residual along a grid.
pub struct HjCheck;

impl Experiment for HjCheck {
    fn name(&self) -> &'static str {
        "hjcheck"
    }

    fn run(&self, ctx: &Context<'_>) -> CliResult<Outcome> {
        let (p, resolved) = parse_params::<Params>(ctx.params)?;
        let mass = ctx.system.mass();
        let hbar = ctx.units.hbar;
        let times = [0.0, p.dt];
        let report = match p.case {
            Case::PlaneWave { k } => {
                let slice = |t: f64| {
                    GridWavefunction::from_fn(p.grid, |x| Complex64::from_polar(1.0, k * x - hbar * k * k * t / (2.0 * mass)))
                };
                let series = times.iter().map(|&t| Ok((t, slice(t)?))).collect::<zerotemp::Result<Vec<_>>>()?;
                hamilton_jacobi_residual(&series, |_| 0.0, mass, &ctx.units, p.convention)?
            }
            Case::Oscillator { state } => {
                let initial = state.build(ctx.system.dim())?;
                let energies = ctx.system.energies(&ctx.units);
                let series = times
                    .iter()
                    .map(|&t| {
                        let evolved = DVector::from_iterator(
                            initial.dim(),
                            initial
                                .amplitudes()
                                .iter()
                                .zip(&energies)
                                .map(|(c, e)| c * Complex64::from_polar(1.0, -e * t / hbar)),
                        );
                        let state = StateVector::new(evolved)?;
                        Ok((t, state_on_grid(&state, &ctx.system, &p.grid, &ctx.units)?))
                    })
                    .collect::<zerotemp::Result<Vec<_>>>()?;
                let spring = mass * ctx.system.omega().powi(2);
                hamilton_jacobi_residual(&series, |x| 0.5 * spring * x * x, mass, &ctx.units, p.convention)?
            }
        };
        let mut table = Table::new(["x", "lhs", "rhs", "residual"]);
        for i in 0..report.x.len() {
            table.push(vec![
                report.x[i].into(),
                report.lhs[i].into(),
                report.rhs[i].into(),
                report.residual[i].into(),
            ]);
        }
        let mut outcome = Outcome::new(table, resolved);
        outcome.summary = Some(json!({
            "interior_max": report.interior_max,
            "interior_first_index": report.interior.0,
            "interior_last_index": report.interior.1,
        }));
        Ok(outcome)
    }
}
