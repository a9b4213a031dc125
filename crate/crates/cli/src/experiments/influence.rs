use serde::{Deserialize, Serialize};
use serde_json::json;
use zerotemp::influence::{influence_phase, w_imag_asymptotic, w_imag_discrete, IntegrationRegion, PathPair};

use super::{Context, Experiment, Outcome};
use crate::config::parse_params;
use crate::error::{CliError, CliResult};
use crate::table::Table;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SuppliedPaths {
    x: Vec<f64>,
    y: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct Params {
    t_final: f64,
    n_steps: usize,
    /// Constant separation of generated paths; ignored when `paths` is given.
    separation: f64,
    /// Explicit samples on n + 1 uniform nodes over [0, t_final].
    #[serde(skip_serializing_if = "Option::is_none")]
    paths: Option<SuppliedPaths>,
    region: IntegrationRegion,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            t_final: 1.0,
            n_steps: 1024,
            separation: 1.0,
            paths: None,
            region: IntegrationRegion::default(),
        }
    }
}

/// Influence phase of a path pair and, at zero temperature, its ratio to the
/// large-cutoff form.
pub struct Influence;

impl Experiment for Influence {
    fn name(&self) -> &'static str {
        "influence"
    }

    fn run(&self, ctx: &Context<'_>) -> CliResult<Outcome> {
        let (p, resolved) = parse_params::<Params>(ctx.params)?;
        let paths = match &p.paths {
            Some(supplied) => {
                if supplied.x.len() < 2 {
                    return Err(CliError::config("supplied paths need at least two samples"));
                }
                let n = supplied.x.len() - 1;
                let t_grid = (0..=n).map(|k| p.t_final * k as f64 / n as f64).collect();
                PathPair::new(t_grid, supplied.x.clone(), supplied.y.clone())?
            }
            None => PathPair::constant_separation(p.t_final, p.n_steps, p.separation)?,
        };
        let w = influence_phase(&paths, &ctx.bath, &ctx.units, p.region)?;
        let (discrete, asymptotic) = if ctx.bath.is_zero_temperature() {
            (
                w_imag_discrete(&paths, &ctx.bath)?,
                w_imag_asymptotic(&paths, &ctx.bath, &ctx.units)?.w_imag,
            )
        } else {
            (f64::NAN, f64::NAN)
        };
        let mut table = Table::new([
            "n_steps",
            "t_final",
            "region",
            "w_real",
            "w_imag",
            "w_imag_full_square",
            "w_imag_asymptotic",
            "ratio",
        ]);
        table.push(vec![
            paths.n_steps().into(),
            paths.duration().into(),
            p.region.name().into(),
            w.re.into(),
            w.im.into(),
            discrete.into(),
            asymptotic.into(),
            (discrete / asymptotic).into(),
        ]);
        let mut outcome = Outcome::new(table, resolved);
        outcome.summary = Some(json!({ "exponent": w.im / ctx.units.hbar }));
        Ok(outcome)
    }
}
