//! Position-basis evaluation of the first-order population shift
//!
//! ```text
//! Δρ_nn = −(ηΩ/πħ) t ∬ ρ₀(x, y) ψ_n(x) (x − y)² ψ_n(y) dx dy
//! ```

use crate::bath::BathSpec;
use crate::error::{Error, Result};
use crate::grid::{eigenfunction_grid, GridSpec, TAIL_MASS_LIMIT};
use crate::oscillator::OscillatorSystem;
use crate::units::UnitSystem;
use crate::CMatrix;

/// Edge magnitude of ρ₀ relative to its peak above which the grid is judged
/// too small for the state.
const EDGE_LIMIT: f64 = 1e-8;

fn edge_ratio(rho: &CMatrix) -> f64 {
    let n = rho.nrows();
    let peak = rho.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut edge = 0.0_f64;
    for k in 0..n {
        for (i, j) in [(0, k), (n - 1, k), (k, 0), (k, n - 1)] {
            edge = edge.max(rho[(i, j)].norm());
        }
    }
    if peak > 0.0 {
        edge / peak
    } else {
        0.0
    }
}

/// 2-D trapezoidal quadrature of the shift of level `n` over an interval `t`,
/// with `rho0_grid[(i, j)] = ρ₀(x_i, x_j)` sampled on `grid` × `grid`.
pub fn delta_rho_quadrature(
    rho0_grid: &CMatrix,
    grid: &GridSpec,
    system: &OscillatorSystem,
    n: usize,
    bath: &BathSpec,
    t: f64,
    units: &UnitSystem,
) -> Result<f64> {
    grid.validate()?;
    if rho0_grid.nrows() != grid.n_points || rho0_grid.ncols() != grid.n_points {
        return Err(Error::DimensionMismatch {
            expected: grid.n_points,
            found: rho0_grid.nrows(),
        });
    }
    let edge = edge_ratio(rho0_grid);
    if edge > EDGE_LIMIT {
        return Err(Error::GridTooSmall {
            tail_mass: edge,
            limit: TAIL_MASS_LIMIT,
        });
    }
    let psi = eigenfunction_grid(system, n, grid, units)?;
    let xs = grid.points();
    let weighted: Vec<f64> = psi
        .values()
        .iter()
        .zip(grid.weights())
        .map(|(v, w)| v.re * w)
        .collect();

    let mut integral = 0.0;
    for (i, (&x, &a)) in xs.iter().zip(&weighted).enumerate() {
        let mut row = 0.0;
        for (j, (&y, &b)) in xs.iter().zip(&weighted).enumerate() {
            row += rho0_grid[(i, j)].re * b * (x - y) * (x - y);
        }
        integral += a * row;
    }
    Ok(-bath.dephasing_rate(units) * t * integral)
}
