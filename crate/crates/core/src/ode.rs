//! Adaptive Dormand–Prince 5(4) integration of matrix-valued ODEs.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::CMatrix;
use crate::Complex64;

/// Step-size control for the adaptive integrator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolutionControl {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: Option<f64>,
    pub initial_step: Option<f64>,
}

impl Default for EvolutionControl {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-11,
            max_step: None,
            initial_step: None,
        }
    }
}

impl EvolutionControl {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) {
            return Err(invalid("rel_tol", "must be positive"));
        }
        if !(self.abs_tol > 0.0) {
            return Err(invalid("abs_tol", "must be positive"));
        }
        for (name, value) in [("max_step", self.max_step), ("initial_step", self.initial_step)] {
            if let Some(h) = value {
                if !(h > 0.0 && h.is_finite()) {
                    return Err(invalid(name, format!("must be positive, got {h}")));
                }
            }
        }
        Ok(())
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;

fn combine(y: &CMatrix, h: f64, terms: &[(f64, &CMatrix)]) -> CMatrix {
    let mut out = y.clone();
    for &(coef, k) in terms {
        out.zip_apply(k, |o, v| *o += v * Complex64::new(h * coef, 0.0));
    }
    out
}

fn error_norm(err: &CMatrix, y0: &CMatrix, y1: &CMatrix, ctrl: &EvolutionControl) -> f64 {
    let mut sum = 0.0;
    for ((e, a), b) in err.iter().zip(y0.iter()).zip(y1.iter()) {
        let scale = ctrl.abs_tol + ctrl.rel_tol * a.norm().max(b.norm());
        sum += (e.norm() / scale).powi(2);
    }
    (sum / err.len() as f64).sqrt()
}

/// Integrates dy/dt = f(t, y) from `t0`, returning y at every entry of
/// `sample_times` (non-decreasing, all ≥ `t0`).
///
/// `after_step` runs on every accepted step and may modify the state in place
/// (projection) or abort the integration.
pub fn integrate<F, G>(
    f: F,
    t0: f64,
    y0: CMatrix,
    sample_times: &[f64],
    ctrl: &EvolutionControl,
    mut after_step: G,
) -> Result<Vec<CMatrix>>
where
    F: Fn(f64, &CMatrix) -> CMatrix,
    G: FnMut(f64, &mut CMatrix) -> Result<()>,
{
    ctrl.validate()?;
    if sample_times.windows(2).any(|w| w[1] < w[0]) || sample_times.first().is_some_and(|&s| s < t0) {
        return Err(invalid("sample_times", "must be non-decreasing and not before the start time"));
    }
    let t_end = sample_times.last().copied().unwrap_or(t0);
    let span = (t_end - t0).max(f64::MIN_POSITIVE);
    let max_step = ctrl.max_step.unwrap_or(span);
    let mut h = ctrl.initial_step.unwrap_or(span * 1e-3).min(max_step);

    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut out = Vec::with_capacity(sample_times.len());
    let mut next = 0;

    loop {
        while next < sample_times.len() && sample_times[next] <= t {
            out.push(y.clone());
            next += 1;
        }
        if next == sample_times.len() {
            return Ok(out);
        }
        let target = sample_times[next];
        let mut step = h.min(target - t);
        // land exactly on the sample instead of leaving a sliver
        if target - t - step < 1e-12 * span {
            step = target - t;
        }
        if step <= f64::EPSILON * t.abs().max(1.0) {
            return Err(Error::StepUnderflow { t, step });
        }

        let k2 = f(t + C2 * step, &combine(&y, step, &[(A21, &k1)]));
        let k3 = f(t + C3 * step, &combine(&y, step, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(
            t + C4 * step,
            &combine(&y, step, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
        );
        let k5 = f(
            t + C5 * step,
            &combine(&y, step, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            t + step,
            &combine(&y, step, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y_new = combine(&y, step, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = f(t + step, &y_new);
        let err = combine(
            &CMatrix::zeros(y.nrows(), y.ncols()),
            step,
            &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
        );
        let norm = error_norm(&err, &y, &y_new, ctrl);
        if !norm.is_finite() {
            return Err(Error::StepUnderflow { t, step });
        }

        let factor = if norm == 0.0 {
            MAX_FACTOR
        } else {
            (SAFETY * norm.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
        };
        if norm <= 1.0 {
            t = if step == target - t { target } else { t + step };
            y = y_new;
            after_step(t, &mut y)?;
            k1 = f(t, &y);
            h = (step * factor).min(max_step);
        } else {
            h = step * factor.min(1.0);
        }
    }
}
