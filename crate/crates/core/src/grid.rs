//! Uniform spatial grids, grid wavefunctions and the Fock-to-position map.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::CMatrix;
use crate::oscillator::OscillatorSystem;
use crate::state::StateVector;
use crate::units::UnitSystem;

pub const MIN_POINTS: usize = 16;
/// Probability allowed outside a grid before it is considered too small.
pub const TAIL_MASS_LIMIT: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        let spec = Self {
            x_min,
            x_max,
            n_points,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_points < MIN_POINTS {
            return Err(invalid(
                "n_points",
                format!("need at least {MIN_POINTS}, got {}", self.n_points),
            ));
        }
        if !(self.x_max > self.x_min && self.x_min.is_finite() && self.x_max.is_finite()) {
            return Err(invalid("grid", "x_max must exceed x_min"));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    pub fn points(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.n_points)
            .map(|i| {
                if i + 1 == self.n_points {
                    self.x_max
                } else {
                    self.x_min + i as f64 * h
                }
            })
            .collect()
    }

    /// Trapezoidal quadrature weights.
    pub fn weights(&self) -> Vec<f64> {
        trapezoid_weights(self.n_points, self.spacing())
    }
}

pub(crate) fn trapezoid_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![h; n];
    w[0] *= 0.5;
    w[n - 1] *= 0.5;
    w
}

/// Complex wavefunction sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridWavefunction {
    grid: GridSpec,
    values: Vec<Complex64>,
    normalized: bool,
}

impl GridWavefunction {
    pub fn new(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.n_points {
            return Err(Error::DimensionMismatch {
                expected: grid.n_points,
                found: values.len(),
            });
        }
        Ok(Self {
            grid,
            values,
            normalized: false,
        })
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values = grid.points().into_iter().map(f).collect();
        Self::new(grid, values)
    }

    /// Rescales to unit discrete norm and sets the normalized flag.
    pub fn normalize(mut self) -> Result<Self> {
        let norm = self.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(invalid("values", "cannot normalize a vanishing wavefunction"));
        }
        let inv = 1.0 / norm;
        self.values.iter_mut().for_each(|v| *v *= inv);
        self.normalized = true;
        Ok(self)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Trapezoidal √∫|ψ|².
    pub fn norm(&self) -> f64 {
        self.grid
            .weights()
            .iter()
            .zip(&self.values)
            .map(|(w, v)| w * v.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// p(x) = |ψ(x)|².
    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    /// Wrapped phase arg ψ(x) in (-π, π].
    pub fn phase(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.arg()).collect()
    }

    /// Trapezoidal ∫ ψ*(x) f(x) φ(x) dx against another function on the same grid.
    pub fn matrix_element(&self, other: &GridWavefunction, f: impl Fn(f64) -> f64) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(invalid("grid", "wavefunctions live on different grids"));
        }
        let points = self.grid.points();
        Ok(self
            .grid
            .weights()
            .iter()
            .zip(&points)
            .zip(self.values.iter().zip(&other.values))
            .map(|((w, &x), (a, b))| a.conj() * b * (w * f(x)))
            .sum())
    }
}

/// Hermite functions ψ_0..ψ_{levels-1} evaluated at `xs`, indexed `[n][i]`.
pub fn hermite_functions(
    system: &OscillatorSystem,
    units: &UnitSystem,
    levels: usize,
    xs: &[f64],
) -> Vec<Vec<f64>> {
    let length = system.length_scale(units);
    let prefactor = std::f64::consts::PI.powf(-0.25) / length.sqrt();
    let mut table = vec![vec![0.0; xs.len()]; levels];
    for (i, &x) in xs.iter().enumerate() {
        let xi = x / length;
        let mut prev = 0.0;
        let mut cur = prefactor * (-0.5 * xi * xi).exp();
        for (n, row) in table.iter_mut().enumerate() {
            row[i] = cur;
            let next = (2.0 / (n + 1) as f64).sqrt() * xi * cur
                - (n as f64 / (n + 1) as f64).sqrt() * prev;
            prev = cur;
            cur = next;
        }
    }
    table
}

fn tail_mass(system: &OscillatorSystem, units: &UnitSystem, n: usize, grid: &GridSpec) -> f64 {
    const SAMPLES: usize = 4001;
    let span = 16.0 * system.length_scale(units) + (2.0 * n as f64 + 1.0).sqrt() * system.length_scale(units);
    let h = span / (SAMPLES - 1) as f64;
    let weights = trapezoid_weights(SAMPLES, h);
    let right: Vec<f64> = (0..SAMPLES).map(|i| grid.x_max + i as f64 * h).collect();
    let left: Vec<f64> = (0..SAMPLES).map(|i| grid.x_min - i as f64 * h).collect();
    [right, left]
        .iter()
        .map(|xs| {
            let psi = &hermite_functions(system, units, n + 1, xs)[n];
            psi.iter().zip(&weights).map(|(p, w)| w * p * p).sum::<f64>()
        })
        .sum()
}

/// Energy eigenfunction ψ_n on `grid`, discretely normalized.
pub fn eigenfunction_grid(
    system: &OscillatorSystem,
    n: usize,
    grid: &GridSpec,
    units: &UnitSystem,
) -> Result<GridWavefunction> {
    grid.validate()?;
    if n >= system.dim() {
        return Err(invalid(
            "n",
            format!("level {n} outside truncation dimension {}", system.dim()),
        ));
    }
    let tail = tail_mass(system, units, n, grid);
    if tail > TAIL_MASS_LIMIT {
        return Err(Error::GridTooSmall {
            tail_mass: tail,
            limit: TAIL_MASS_LIMIT,
        });
    }
    let xs = grid.points();
    let psi = &hermite_functions(system, units, n + 1, &xs)[n];
    GridWavefunction::new(*grid, psi.iter().map(|&v| Complex64::new(v, 0.0)).collect())?
        .normalize()
}

/// Position-space wavefunction Σ c_n ψ_n(x) of a Fock-basis state.
pub fn state_on_grid(
    state: &StateVector,
    system: &OscillatorSystem,
    grid: &GridSpec,
    units: &UnitSystem,
) -> Result<GridWavefunction> {
    let xs = grid.points();
    let table = hermite_functions(system, units, state.dim(), &xs);
    let values = (0..xs.len())
        .map(|i| {
            state
                .amplitudes()
                .iter()
                .zip(&table)
                .map(|(c, row)| c * row[i])
                .sum()
        })
        .collect();
    GridWavefunction::new(*grid, values)
}

/// ρ(x, y) = Σ_nm ρ_nm ψ_n(x) ψ_m(y) with rows indexed by `xs`, columns by `ys`.
pub fn position_representation(
    rho: &CMatrix,
    system: &OscillatorSystem,
    units: &UnitSystem,
    xs: &[f64],
    ys: &[f64],
) -> CMatrix {
    let dim = rho.nrows();
    let to_matrix = |points: &[f64]| {
        let table = hermite_functions(system, units, dim, points);
        CMatrix::from_fn(points.len(), dim, |i, n| Complex64::new(table[n][i], 0.0))
    };
    let psi_x = to_matrix(xs);
    let psi_y = to_matrix(ys);
    &psi_x * rho * psi_y.transpose()
}
