//! Truncated Fock-space harmonic oscillator.

use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::linalg::{c, CMatrix};
use crate::units::UnitSystem;

pub const DEFAULT_DIM: usize = 32;

/// Harmonic oscillator of mass `mass` and angular frequency `omega`, truncated
/// to the lowest `dim` Fock levels.
///
/// An optional coupling operator replaces the position operator wherever the
/// oscillator couples to its environment (see
/// [`coupling_operator_override`](crate::master_eq::coupling_operator_override)).
#[derive(Debug, Clone)]
pub struct OscillatorSystem {
    mass: f64,
    omega: f64,
    dim: usize,
    coupling: Option<Arc<CMatrix>>,
}

impl Default for OscillatorSystem {
    fn default() -> Self {
        Self {
            mass: 1.0,
            omega: 1.0,
            dim: DEFAULT_DIM,
            coupling: None,
        }
    }
}

impl OscillatorSystem {
    pub fn new(mass: f64, omega: f64, dim: usize) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(invalid("mass", format!("must be positive, got {mass}")));
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(invalid("omega", format!("must be positive, got {omega}")));
        }
        if dim < 2 {
            return Err(invalid("dim", format!("must be at least 2, got {dim}")));
        }
        Ok(Self {
            mass,
            omega,
            dim,
            coupling: None,
        })
    }

    pub fn with_dim(dim: usize) -> Result<Self> {
        Self::new(1.0, 1.0, dim)
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coupling_override(&self) -> Option<&CMatrix> {
        self.coupling.as_deref()
    }

    pub(crate) fn set_coupling(mut self, op: CMatrix) -> Self {
        self.coupling = Some(Arc::new(op));
        self
    }

    /// Oscillator length √(ħ/mω).
    pub fn length_scale(&self, units: &UnitSystem) -> f64 {
        (units.hbar / (self.mass * self.omega)).sqrt()
    }

    /// E_n = ħω(n + ½) for n < dim.
    pub fn energies(&self, units: &UnitSystem) -> Vec<f64> {
        (0..self.dim)
            .map(|n| units.hbar * self.omega * (n as f64 + 0.5))
            .collect()
    }

    /// Bohr frequency ω_nm = (E_n - E_m)/ħ.
    pub fn bohr_frequency(&self, n: usize, m: usize) -> f64 {
        self.omega * (n as f64 - m as f64)
    }

    /// The operator that couples to the bath: the override if present, x otherwise.
    pub fn coupling_operator(&self, units: &UnitSystem) -> CMatrix {
        match &self.coupling {
            Some(op) => (**op).clone(),
            None => position_operator(self, units),
        }
    }
}

/// Position operator x = √(ħ/2mω)(a + a†) in the Fock basis.
pub fn position_operator(system: &OscillatorSystem, units: &UnitSystem) -> CMatrix {
    let scale = (units.hbar / (2.0 * system.mass * system.omega)).sqrt();
    let dim = system.dim;
    let mut x = CMatrix::zeros(dim, dim);
    for n in 0..dim - 1 {
        let element = c(scale * ((n + 1) as f64).sqrt());
        x[(n, n + 1)] = element;
        x[(n + 1, n)] = element;
    }
    x
}

/// Diagonal oscillator Hamiltonian with entries ħω(n + ½).
pub fn hamiltonian(system: &OscillatorSystem, units: &UnitSystem) -> CMatrix {
    let energies = system.energies(units);
    CMatrix::from_fn(system.dim, system.dim, |i, j| {
        if i == j {
            c(energies[i])
        } else {
            c(0.0)
        }
    })
}

pub fn number_operator(dim: usize) -> CMatrix {
    CMatrix::from_fn(dim, dim, |i, j| if i == j { c(i as f64) } else { c(0.0) })
}

/// Parity operator (-1)^n.
pub fn parity_operator(dim: usize) -> CMatrix {
    CMatrix::from_fn(dim, dim, |i, j| {
        if i != j {
            c(0.0)
        } else if i % 2 == 0 {
            c(1.0)
        } else {
            c(-1.0)
        }
    })
}
