use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;
use zerotemp::histories::{classify_decoherent, functional_matrix, ProjectorFamily, TimeSlot};
use zerotemp::linalg::hermitian_part;
use zerotemp::oscillator::hamiltonian;
use zerotemp::state::{DensityMatrix, StateVector};
use zerotemp::{CMatrix, Complex64};

use super::{Context, Experiment, Outcome};
use crate::config::{parse_params, StateConfig};
use crate::error::{CliError, CliResult};
use crate::table::Table;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum FamilyKind {
    /// One projector per Fock level.
    Fock,
    /// Even and odd Fock levels.
    Parity,
    /// Projectors onto a random orthonormal basis drawn from the seed.
    Random,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SlotParams {
    time: f64,
    family: FamilyKind,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct Params {
    state: StateConfig,
    slots: Vec<SlotParams>,
    epsilon: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            state: StateConfig::Cat { re: 1.0, im: 0.0 },
            slots: vec![
                SlotParams {
                    time: 0.0,
                    family: FamilyKind::Parity,
                },
                SlotParams {
                    time: 1.0,
                    family: FamilyKind::Parity,
                },
            ],
            epsilon: 1e-6,
        }
    }
}

fn family(kind: FamilyKind, dim: usize, rng: &mut ChaCha8Rng) -> CliResult<ProjectorFamily> {
    let family = match kind {
        FamilyKind::Fock => {
            let basis: Vec<StateVector> = (0..dim).map(|n| StateVector::basis(dim, n)).collect::<Result<_, _>>()?;
            ProjectorFamily::from_basis(&basis, 1)?
        }
        FamilyKind::Parity => {
            let projector = |parity: usize| {
                CMatrix::from_fn(dim, dim, |i, j| {
                    Complex64::new(if i == j && i % 2 == parity { 1.0 } else { 0.0 }, 0.0)
                })
            };
            ProjectorFamily::new(vec![
                zerotemp::histories::Projector::new(projector(0))?,
                zerotemp::histories::Projector::new(projector(1))?,
            ])?
        }
        FamilyKind::Random => {
            let m = CMatrix::from_fn(dim, dim, |_, _| {
                Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
            });
            let eig = hermitian_part(&m).symmetric_eigen();
            let basis: Vec<StateVector> = (0..dim)
                .map(|k| StateVector::normalized(eig.eigenvectors.column(k).into_owned()))
                .collect::<Result<_, _>>()?;
            ProjectorFamily::from_basis(&basis, 1)?
        }
    };
    Ok(family)
}

fn label(history: &[usize]) -> String {
    history.iter().map(|k| k.to_string()).collect::<Vec<_>>().join("-")
}

/// Decoherence functional over all histories of the configured slots.
pub struct Histories;

impl Experiment for Histories {
    fn name(&self) -> &'static str {
        "histories"
    }

    fn run(&self, ctx: &Context<'_>) -> CliResult<Outcome> {
        let (p, resolved) = parse_params::<Params>(ctx.params)?;
        if p.slots.is_empty() {
            return Err(CliError::config("histories needs at least one slot"));
        }
        let dim = ctx.system.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
        let slots: Vec<TimeSlot> = p
            .slots
            .iter()
            .map(|s| Ok(TimeSlot::new(s.time, Arc::new(family(s.family, dim, &mut rng)?))))
            .collect::<CliResult<_>>()?;
        let rho0 = DensityMatrix::from_pure(&p.state.build(dim)?);
        let h = hamiltonian(&ctx.system, &ctx.units);
        let fm = functional_matrix(&slots, &rho0, &h, &ctx.units)?;
        let verdict = classify_decoherent(&fm.matrix, p.epsilon);

        let mut table = Table::new(["history_left", "history_right", "re", "im"]);
        for (i, left) in fm.histories.iter().enumerate() {
            for (j, right) in fm.histories.iter().enumerate() {
                let d = fm.matrix[(i, j)];
                table.push(vec![label(left).into(), label(right).into(), d.re.into(), d.im.into()]);
            }
        }
        let mut outcome = Outcome::new(table, resolved);
        outcome.summary = Some(json!({
            "history_count": fm.histories.len(),
            "decoherent": verdict.decoherent,
            "max_off_diagonal": verdict.max_off_diagonal,
            "max_ratio": verdict.max_ratio,
        }));
        Ok(outcome)
    }
}
