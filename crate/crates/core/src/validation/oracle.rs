//! Brute-force unitary evolution of the oscillator together with a handful of
//! explicit bath oscillators.
//!
//! Joint states use the system-major product ordering
//! `index = s · env_dim + e`, with the bath modes themselves ordered
//! lexicographically.

use std::collections::BTreeMap;

use nalgebra::DVector;
use serde::Serialize;

use crate::bath::BathSpec;
use crate::error::{invalid, Error, Result};
use crate::linalg::{ensure_hermitian, identity, kron, unitary_propagator, CMatrix};
use crate::oscillator::{hamiltonian, OscillatorSystem};
use crate::state::{DensityMatrix, StateVector};
use crate::units::UnitSystem;
use crate::Complex64;

pub const JOINT_DIM_CAP: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BathMode {
    pub frequency: f64,
    pub coupling: f64,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BathModeSet {
    modes: Vec<BathMode>,
}

impl BathModeSet {
    pub fn new(modes: Vec<BathMode>) -> Result<Self> {
        let mut total = 1usize;
        for mode in &modes {
            if !(mode.frequency > 0.0 && mode.frequency.is_finite()) {
                return Err(invalid("frequency", format!("must be positive, got {}", mode.frequency)));
            }
            if !mode.coupling.is_finite() {
                return Err(invalid("coupling", "must be finite"));
            }
            if mode.dim < 2 {
                return Err(invalid("dim", format!("bath modes need at least 2 levels, got {}", mode.dim)));
            }
            total = total.saturating_mul(mode.dim);
        }
        if total > JOINT_DIM_CAP {
            return Err(Error::DimensionCap {
                dim: total,
                cap: JOINT_DIM_CAP,
            });
        }
        Ok(Self { modes })
    }

    /// `count` modes spaced uniformly over (0, Ω] with c_k² = ηω_kΔω/π.
    pub fn ohmic(count: usize, local_dim: usize, bath: &BathSpec) -> Result<Self> {
        if count == 0 {
            return Err(invalid("count", "need at least one mode"));
        }
        let spacing = bath.omega_cut / count as f64;
        Self::new(
            (1..=count)
                .map(|k| {
                    let frequency = k as f64 * spacing;
                    BathMode {
                        frequency,
                        coupling: (bath.eta * frequency * spacing / std::f64::consts::PI).sqrt(),
                        dim: local_dim,
                    }
                })
                .collect(),
        )
    }

    /// Same modes with every coupling multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.modes
                .iter()
                .map(|m| BathMode {
                    coupling: m.coupling * factor,
                    ..*m
                })
                .collect(),
        )
    }

    pub fn modes(&self) -> &[BathMode] {
        &self.modes
    }

    pub fn env_dim(&self) -> usize {
        self.modes.iter().map(|m| m.dim).product()
    }
}

/// Number operator and unit-mass position q = √(ħ/2ω)(b + b†) of one mode.
fn mode_operators(mode: &BathMode, units: &UnitSystem) -> (CMatrix, CMatrix) {
    let d = mode.dim;
    let scale = (units.hbar / (2.0 * mode.frequency)).sqrt();
    let number = CMatrix::from_fn(d, d, |i, j| Complex64::new(if i == j { i as f64 } else { 0.0 }, 0.0));
    let q = CMatrix::from_fn(d, d, |i, j| {
        let k = i.max(j);
        if i.abs_diff(j) == 1 {
            Complex64::new(scale * (k as f64).sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    (number, q)
}

/// Embeds a single-mode operator into the full bath space.
fn embed(op: &CMatrix, position: usize, modes: &[BathMode]) -> CMatrix {
    let mut out = CMatrix::identity(1, 1);
    for (k, mode) in modes.iter().enumerate() {
        let factor = if k == position { op.clone() } else { identity(mode.dim) };
        out = kron(&out, &factor);
    }
    out
}

/// H = H_s ⊗ I + I ⊗ Σ ħω_k b_k†b_k + Σ c_k X ⊗ q_k.
fn joint_hamiltonian(system: &OscillatorSystem, coupling: &CMatrix, modes: &BathModeSet, units: &UnitSystem) -> CMatrix {
    let env_dim = modes.env_dim();
    let mut h_bath = CMatrix::zeros(env_dim, env_dim);
    let mut h = kron(&hamiltonian(system, units), &identity(env_dim));
    for (k, mode) in modes.modes.iter().enumerate() {
        let (number, q) = mode_operators(mode, units);
        h_bath += embed(&number, k, &modes.modes) * Complex64::new(units.hbar * mode.frequency, 0.0);
        if mode.coupling != 0.0 {
            h += kron(coupling, &embed(&q, k, &modes.modes)) * Complex64::new(mode.coupling, 0.0);
        }
    }
    h + kron(&identity(system.dim()), &h_bath)
}

/// Product of a system state with every bath mode in its ground state.
pub fn ground_product_state(system_state: &StateVector, modes: &BathModeSet) -> DVector<Complex64> {
    let env_dim = modes.env_dim();
    let mut joint = DVector::zeros(system_state.dim() * env_dim);
    for (s, amp) in system_state.amplitudes().iter().enumerate() {
        joint[s * env_dim] = *amp;
    }
    joint
}

/// Tr_env of a joint density matrix.
pub fn partial_trace_env(rho: &CMatrix, sys_dim: usize, env_dim: usize) -> Result<CMatrix> {
    if rho.nrows() != sys_dim * env_dim || rho.ncols() != sys_dim * env_dim {
        return Err(Error::DimensionMismatch {
            expected: sys_dim * env_dim,
            found: rho.nrows(),
        });
    }
    Ok(CMatrix::from_fn(sys_dim, sys_dim, |a, b| {
        (0..env_dim).map(|e| rho[(a * env_dim + e, b * env_dim + e)]).sum()
    }))
}

/// Reduced density matrix of a joint pure state: M M† with M_{s,e} = ψ_{s·env+e}.
fn reduce_pure(psi: &DVector<Complex64>, sys_dim: usize, env_dim: usize) -> CMatrix {
    let m = CMatrix::from_fn(sys_dim, env_dim, |s, e| psi[s * env_dim + e]);
    &m * m.adjoint()
}

#[derive(Debug, Clone)]
pub struct OracleRun {
    pub times: Vec<f64>,
    pub reduced: Vec<DensityMatrix>,
    pub purity: Vec<f64>,
    pub joint_norm: Vec<f64>,
    pub final_state: DVector<Complex64>,
}

/// Evolves `psi0` under the joint Hamiltonian and samples the reduced system
/// state at each of `t_samples` (any order; negative increments run backwards).
pub fn exact_system_bath(
    system: &OscillatorSystem,
    modes: &BathModeSet,
    coupling: &CMatrix,
    psi0: &DVector<Complex64>,
    t_samples: &[f64],
    units: &UnitSystem,
) -> Result<OracleRun> {
    let sys_dim = system.dim();
    let env_dim = modes.env_dim();
    let joint_dim = sys_dim * env_dim;
    if joint_dim > JOINT_DIM_CAP {
        return Err(Error::DimensionCap {
            dim: joint_dim,
            cap: JOINT_DIM_CAP,
        });
    }
    if coupling.nrows() != sys_dim || coupling.ncols() != sys_dim {
        return Err(Error::DimensionMismatch {
            expected: sys_dim,
            found: coupling.nrows(),
        });
    }
    ensure_hermitian(coupling, 1e-12)?;
    if psi0.len() != joint_dim {
        return Err(Error::DimensionMismatch {
            expected: joint_dim,
            found: psi0.len(),
        });
    }
    let h = joint_hamiltonian(system, coupling, modes, units);

    let mut propagators: BTreeMap<u64, CMatrix> = BTreeMap::new();
    let mut psi = psi0.clone();
    let mut t = 0.0;
    let mut run = OracleRun {
        times: t_samples.to_vec(),
        reduced: Vec::with_capacity(t_samples.len()),
        purity: Vec::with_capacity(t_samples.len()),
        joint_norm: Vec::with_capacity(t_samples.len()),
        final_state: psi0.clone(),
    };
    for &sample in t_samples {
        let dt = sample - t;
        if dt != 0.0 {
            let u = match propagators.entry(dt.to_bits()) {
                std::collections::btree_map::Entry::Occupied(e) => e.into_mut(),
                std::collections::btree_map::Entry::Vacant(e) => e.insert(unitary_propagator(&h, dt, units.hbar)?),
            };
            psi = &*u * &psi;
            t = sample;
        }
        let reduced = DensityMatrix::new_unchecked(reduce_pure(&psi, sys_dim, env_dim));
        run.purity.push(reduced.purity());
        run.joint_norm.push(psi.norm());
        run.reduced.push(reduced);
    }
    run.final_state = psi;
    Ok(run)
}
