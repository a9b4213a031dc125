use serde::{Deserialize, Serialize};
use zerotemp::influence::{decoherence_time_thermal, decoherence_time_zero_temp, optical_estimate, OpticalSpec};

use super::{Context, Experiment, Outcome};
use crate::config::parse_params;
use crate::error::CliResult;
use crate::table::{Cell, Table};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OpticalParams {
    n_photons: Vec<f64>,
    gain: f64,
    #[serde(default = "default_light_speed")]
    light_speed: f64,
}

fn default_light_speed() -> f64 {
    OpticalSpec::LIGHT_SPEED_CGS
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct Params {
    delta_x: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    optical: Option<OpticalParams>,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            delta_x: vec![1.0],
            optical: None,
        }
    }
}

/// Decoherence-time estimates: zero temperature, high temperature when the
/// bath is warm, and the optical amplifier estimate.
pub struct DecoherenceTime;

impl Experiment for DecoherenceTime {
    fn name(&self) -> &'static str {
        "tdec"
    }

    fn run(&self, ctx: &Context<'_>) -> CliResult<Outcome> {
        let (p, resolved) = parse_params::<Params>(ctx.params)?;
        let mut table = Table::new(["estimate", "parameter", "t_d", "ratio_to_zero_temperature"]);
        for &dx in &p.delta_x {
            let cold = decoherence_time_zero_temp(dx, &ctx.bath, &ctx.units)?;
            table.push(vec!["zero_temperature".into(), dx.into(), cold.t_d.into(), Cell::Num(1.0)]);
            if !ctx.bath.is_zero_temperature() {
                let warm = decoherence_time_thermal(dx, &ctx.bath, &ctx.units)?;
                let ratio = warm.ratio_to_zero_temperature.unwrap_or(f64::NAN);
                table.push(vec!["thermal".into(), dx.into(), warm.t_d.into(), ratio.into()]);
            }
        }
        if let Some(optical) = &p.optical {
            for &n in &optical.n_photons {
                let spec = OpticalSpec {
                    n_photons: n,
                    gain: optical.gain,
                    light_speed: optical.light_speed,
                };
                let t_d = optical_estimate(&spec)?;
                table.push(vec!["optical".into(), n.into(), t_d.into(), f64::NAN.into()]);
            }
        }
        Ok(Outcome::new(table, resolved))
    }
}
