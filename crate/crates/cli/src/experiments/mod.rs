//! Experiment registry. Each subcommand implements [`Experiment`] and is
//! looked up by the configuration's `command` field.

mod energyloss;
mod evolve;
mod histories;
mod hjcheck;
mod influence;
mod kernel;
mod oracle;
mod tdec;

use serde_json::Value;
use zerotemp::bath::BathSpec;
use zerotemp::oscillator::OscillatorSystem;
use zerotemp::units::UnitSystem;

use crate::error::{CliError, CliResult};
use crate::table::Table;

pub struct Context<'a> {
    pub system: OscillatorSystem,
    pub bath: BathSpec,
    pub units: UnitSystem,
    pub params: &'a Value,
    pub seed: u64,
}

pub struct Outcome {
    pub table: Table,
    /// Parameters after defaults were applied.
    pub resolved_params: Value,
    /// Scalar results that do not fit the table.
    pub summary: Option<Value>,
}

impl Outcome {
    pub fn new(table: Table, resolved_params: Value) -> Self {
        Self {
            table,
            resolved_params,
            summary: None,
        }
    }
}

pub trait Experiment: Sync {
    fn name(&self) -> &'static str;
    fn run(&self, ctx: &Context<'_>) -> CliResult<Outcome>;
}

pub fn registry() -> Vec<Box<dyn Experiment>> {
    vec![
        Box::new(kernel::Kernel),
        Box::new(influence::Influence),
        Box::new(tdec::DecoherenceTime),
        Box::new(evolve::Evolve),
        Box::new(energyloss::EnergyLoss),
        Box::new(histories::Histories),
        Box::new(hjcheck::HjCheck),
        Box::new(oracle::Oracle),
    ]
}

pub fn lookup(name: &str) -> CliResult<Box<dyn Experiment>> {
    let mut all = registry();
    match all.iter().position(|e| e.name() == name) {
        Some(index) => Ok(all.swap_remove(index)),
        None => {
            let known: Vec<&str> = all.iter().map(|e| e.name()).collect();
            Err(CliError::config(format!(
                "unknown command `{name}`; expected one of {}",
                known.join(", ")
            )))
        }
    }
}

/// `prefix_0, prefix_1, …` column names.
fn indexed(prefix: &str, count: usize) -> impl Iterator<Item = String> + '_ {
    (0..count).map(move |k| format!("{prefix}_{k}"))
}

/// `count` evenly spaced sample times on [0, t_final].
fn sample_times(t_final: f64, count: usize) -> CliResult<Vec<f64>> {
    if !(t_final >= 0.0 && t_final.is_finite()) || count < 1 {
        return Err(CliError::config("need t_final ≥ 0 and at least one sample"));
    }
    if count == 1 {
        return Ok(vec![t_final]);
    }
    Ok((0..count).map(|k| t_final * k as f64 / (count - 1) as f64).collect())
}
