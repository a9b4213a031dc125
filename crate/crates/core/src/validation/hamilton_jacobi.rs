//! Quantum Hamilton–Jacobi check for the phase of a wavefunction.
//!
//! Writing ψ = √p e^{iφ}, the left-hand side
//! `ħ∂φ/∂t + (ħ²/2m)(∇φ)² + V` is compared against one of two quantum
//! potentials built from the density p.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::GridWavefunction;
use crate::units::UnitSystem;

/// Densities below this value are treated as nodes.
pub const DENSITY_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// (ħ²/2m)[½(∇ln p)² + ∇²ln p]
    AsPrinted,
    /// (ħ²/2m)∇²√p/√p = (ħ²/2m)[¼(∇ln p)² + ½∇²ln p]
    StandardMadelung,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub x: Vec<f64>,
    /// NaN outside the evaluated interior.
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub residual: Vec<f64>,
    pub interior_max: f64,
    /// First and last evaluated grid indices.
    pub interior: (usize, usize),
}

/// Fourth-order central first and second derivatives at index i.
fn derivatives(f: &[f64], i: usize, h: f64) -> (f64, f64) {
    let (m2, m1, c, p1, p2) = (f[i - 2], f[i - 1], f[i], f[i + 1], f[i + 2]);
    let d1 = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
    let d2 = (-m2 + 16.0 * m1 - 30.0 * c + 16.0 * p1 - p2) / (12.0 * h * h);
    (d1, d2)
}

fn unwrap(phase: &mut [f64]) {
    use std::f64::consts::TAU;
    for i in 1..phase.len() {
        let jump = phase[i] - phase[i - 1];
        phase[i] -= TAU * (jump / TAU).round();
    }
}

/// Spatial part of both sides at one time slice: ((∇φ)², ∇ln p, ∇²ln p).
struct SliceTerms {
    grad_phase_sq: Vec<f64>,
    grad_log: Vec<f64>,
    lap_log: Vec<f64>,
}

fn slice_terms(psi: &GridWavefunction, lo: usize, hi: usize) -> SliceTerms {
    let h = psi.grid().spacing();
    let mut phase = psi.phase();
    unwrap(&mut phase[lo..=hi]);
    let log_p: Vec<f64> = psi.density().iter().map(|p| p.ln()).collect();
    let n = psi.values().len();
    let mut terms = SliceTerms {
        grad_phase_sq: vec![f64::NAN; n],
        grad_log: vec![f64::NAN; n],
        lap_log: vec![f64::NAN; n],
    };
    for i in lo + 2..=hi - 2 {
        let (dphi, _) = derivatives(&phase, i, h);
        let (dl, d2l) = derivatives(&log_p, i, h);
        terms.grad_phase_sq[i] = dphi * dphi;
        terms.grad_log[i] = dl;
        terms.lap_log[i] = d2l;
    }
    terms
}

/// Residual of the quantum Hamilton–Jacobi equation for a time series of
/// two or three slices.
///
/// With two slices (t, t + dt) the time derivative is a forward difference and
/// the spatial terms are averaged over both slices; with three equally spaced
/// slices the derivative is central and the spatial terms come from the middle
/// slice.
pub fn hamilton_jacobi_residual(
    series: &[(f64, GridWavefunction)],
    potential: impl Fn(f64) -> f64,
    mass: f64,
    units: &UnitSystem,
    convention: Convention,
) -> Result<ResidualReport> {
    if !(2..=3).contains(&series.len()) {
        return Err(invalid("series", format!("need 2 or 3 time slices, got {}", series.len())));
    }
    if !(mass > 0.0) {
        return Err(invalid("mass", "must be positive"));
    }
    let grid = *series[0].1.grid();
    if series.iter().any(|(_, psi)| *psi.grid() != grid) {
        return Err(invalid("series", "slices must share one grid"));
    }
    let times: Vec<f64> = series.iter().map(|(t, _)| *t).collect();
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("series", "slice times must increase"));
    }
    if series.len() == 3 && ((times[2] - times[1]) - (times[1] - times[0])).abs() > 1e-12 * times[2].abs().max(1.0) {
        return Err(invalid("series", "three slices must be equally spaced"));
    }

    // evaluated span: first to last grid point above the floor in every slice
    let mut lo = 0;
    let mut hi = grid.n_points - 1;
    for (_, psi) in series {
        let p = psi.density();
        let first = p.iter().position(|&v| v > DENSITY_FLOOR);
        let last = p.iter().rposition(|&v| v > DENSITY_FLOOR);
        let (Some(first), Some(last)) = (first, last) else {
            return Err(Error::NodalRegion { index: 0, density: 0.0 });
        };
        lo = lo.max(first);
        hi = hi.min(last);
    }
    if hi < lo + 4 {
        return Err(invalid("series", "fewer than five grid points above the density floor"));
    }
    for (_, psi) in series {
        for (offset, &density) in psi.density()[lo..=hi].iter().enumerate() {
            if density <= DENSITY_FLOOR {
                return Err(Error::NodalRegion {
                    index: lo + offset,
                    density,
                });
            }
        }
    }

    let slices: Vec<SliceTerms> = series.iter().map(|(_, psi)| slice_terms(psi, lo, hi)).collect();
    let (spatial, time_weight): (Vec<&SliceTerms>, f64) = match series.len() {
        2 => (slices.iter().collect(), 0.5),
        _ => (vec![&slices[1]], 1.0),
    };
    let (early, late) = (&series[0].1, &series[series.len() - 1].1);
    let dt = times[times.len() - 1] - times[0];

    let hbar = units.hbar;
    let kinetic = hbar * hbar / (2.0 * mass);
    let xs = grid.points();
    let n = grid.n_points;
    let mut lhs = vec![f64::NAN; n];
    let mut rhs = vec![f64::NAN; n];
    let mut residual = vec![f64::NAN; n];
    let mut interior_max = 0.0_f64;
    for i in lo + 2..=hi - 2 {
        // phase increment without temporal unwrapping ambiguity
        let dphi_dt = (late.values()[i] * early.values()[i].conj()).arg() / dt;
        let mean = |f: fn(&SliceTerms) -> &Vec<f64>| spatial.iter().map(|s| f(s)[i]).sum::<f64>() * time_weight;
        let grad_phase_sq = mean(|s| &s.grad_phase_sq);
        let lap_log = mean(|s| &s.lap_log);
        let grad_log_sq = spatial.iter().map(|s| s.grad_log[i].powi(2)).sum::<f64>() * time_weight;
        lhs[i] = hbar * dphi_dt + kinetic * grad_phase_sq + potential(xs[i]);
        rhs[i] = kinetic
            * match convention {
                Convention::AsPrinted => 0.5 * grad_log_sq + lap_log,
                Convention::StandardMadelung => 0.25 * grad_log_sq + 0.5 * lap_log,
            };
        residual[i] = lhs[i] - rhs[i];
        interior_max = interior_max.max(residual[i].abs());
    }
    Ok(ResidualReport {
        x: xs,
        lhs,
        rhs,
        residual,
        interior_max,
        interior: (lo + 2, hi - 2),
    })
}
