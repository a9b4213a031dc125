use serde::{Deserialize, Serialize};
use zerotemp::bath::{alpha_imag, alpha_real_finite_temp};

use super::{Context, Experiment, Outcome};
use crate::config::parse_params;
use crate::error::{CliError, CliResult};
use crate::table::Table;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct Params {
    tau_min: f64,
    tau_max: f64,
    n_tau: usize,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            tau_min: -5.0,
            tau_max: 5.0,
            n_tau: 101,
        }
    }
}

/// Tabulates the real and imaginary bath kernels over a lag grid.
pub struct Kernel;

impl Experiment for Kernel {
    fn name(&self) -> &'static str {
        "kernel"
    }

    fn run(&self, ctx: &Context<'_>) -> CliResult<Outcome> {
        let (p, resolved) = parse_params::<Params>(ctx.params)?;
        if p.n_tau < 2 || !(p.tau_max > p.tau_min) {
            return Err(CliError::config("kernel needs n_tau ≥ 2 and tau_max > tau_min"));
        }
        let mut table = Table::new(["tau", "alpha_real", "alpha_imag"]);
        for k in 0..p.n_tau {
            let tau = p.tau_min + (p.tau_max - p.tau_min) * k as f64 / (p.n_tau - 1) as f64;
            let real = alpha_real_finite_temp(tau, &ctx.bath, &ctx.units)?;
            table.push(vec![tau.into(), real.into(), alpha_imag(tau, &ctx.bath).into()]);
        }
        Ok(Outcome::new(table, resolved))
    }
}
