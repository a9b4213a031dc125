//! Zero-temperature master equation for the oscillator density matrix in the
//! Fock basis:
//!
//! ```text
//! dρ_nm/dt = −iω_nm ρ_nm − (ηΩ/πħ) [x, [x, ρ]]_nm
//! ```
//!
//! The friction contribution of the bath is left out.

use log::warn;
use serde::Serialize;

use crate::bath::BathSpec;
use crate::error::{Error, Result};
use crate::linalg::{ensure_hermitian, hermitian_part, CMatrix};
use crate::oscillator::{hamiltonian, OscillatorSystem};
use crate::state::DensityMatrix;
use crate::units::UnitSystem;
use crate::Complex64;

pub use crate::ode::EvolutionControl;

/// Most negative eigenvalue tolerated at a sample time.
pub const POSITIVITY_TOL: f64 = 1e-6;
/// Largest population allowed in either of the two highest Fock levels.
pub const TRUNCATION_GUARD: f64 = 1e-6;
/// |Δρ_nn| above which the first-order result is flagged as unreliable.
pub const FIRST_ORDER_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Order {
    FirstOrder,
    FullEvolution,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyLossReport {
    pub delta_rho_diag: Vec<f64>,
    /// Signed change E(t) − E(0).
    pub delta_e: f64,
    pub elapsed: f64,
    pub order: Order,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn first(&self) -> Option<&DensityMatrix> {
        self.states.first()
    }

    pub fn last(&self) -> Option<&DensityMatrix> {
        self.states.last()
    }
}

fn check_dim(rho: &DensityMatrix, system: &OscillatorSystem) -> Result<()> {
    if rho.dim() != system.dim() {
        return Err(Error::DimensionMismatch {
            expected: system.dim(),
            found: rho.dim(),
        });
    }
    Ok(())
}

fn double_commutator(x: &CMatrix, x2: &CMatrix, rho: &CMatrix) -> CMatrix {
    let x_rho = x * rho;
    let mut out = x2 * rho + rho * x2;
    out -= (&x_rho * x) * Complex64::new(2.0, 0.0);
    out
}

/// −(ηΩ/πħ)[x, [x, ρ]] with x replaced by any coupling override.
pub fn dissipator(
    rho: &DensityMatrix,
    system: &OscillatorSystem,
    bath: &BathSpec,
    units: &UnitSystem,
) -> Result<CMatrix> {
    check_dim(rho, system)?;
    let x = system.coupling_operator(units);
    let x2 = &x * &x;
    Ok(double_commutator(&x, &x2, rho.matrix()) * Complex64::new(-bath.dephasing_rate(units), 0.0))
}

/// Right-hand side of the master equation, with operators precomputed.
struct Generator {
    x: CMatrix,
    x2: CMatrix,
    bohr: CMatrix,
    rate: f64,
}

impl Generator {
    fn new(system: &OscillatorSystem, bath: &BathSpec, units: &UnitSystem) -> Self {
        let dim = system.dim();
        let x = system.coupling_operator(units);
        let x2 = &x * &x;
        // −iω_nm as an entrywise factor
        let bohr = CMatrix::from_fn(dim, dim, |n, m| Complex64::new(0.0, -system.bohr_frequency(n, m)));
        Self {
            x,
            x2,
            bohr,
            rate: bath.dephasing_rate(units),
        }
    }

    fn apply(&self, rho: &CMatrix) -> CMatrix {
        let mut out = rho.component_mul(&self.bohr);
        if self.rate != 0.0 {
            out -= double_commutator(&self.x, &self.x2, rho) * Complex64::new(self.rate, 0.0);
        }
        out
    }
}

fn check_truncation(t: f64, rho: &CMatrix) -> Result<()> {
    let dim = rho.nrows();
    let population = rho[(dim - 1, dim - 1)].re.max(rho[(dim - 2, dim - 2)].re);
    if population > TRUNCATION_GUARD {
        return Err(Error::TruncationExceeded { t, population });
    }
    Ok(())
}

/// Propagates `rho0` from t = 0 and samples ρ at each of `times`.
///
/// Zero-temperature only: a bath with T > 0 is rejected.
pub fn evolve(
    rho0: &DensityMatrix,
    system: &OscillatorSystem,
    bath: &BathSpec,
    times: &[f64],
    ctrl: &EvolutionControl,
    units: &UnitSystem,
) -> Result<Trajectory> {
    check_dim(rho0, system)?;
    bath.validate()?;
    units.validate()?;
    if !bath.is_zero_temperature() {
        return Err(Error::Regime {
            temperature: bath.temperature,
        });
    }
    check_truncation(0.0, rho0.matrix())?;
    let generator = Generator::new(system, bath, units);
    let samples = crate::ode::integrate(
        |_, rho| generator.apply(rho),
        0.0,
        rho0.matrix().clone(),
        times,
        ctrl,
        |t, rho| {
            *rho = hermitian_part(rho);
            check_truncation(t, rho)
        },
    )?;
    let mut states = Vec::with_capacity(samples.len());
    for (&t, matrix) in times.iter().zip(samples) {
        let state = DensityMatrix::new_unchecked(matrix);
        let min_eigenvalue = state.min_eigenvalue();
        if min_eigenvalue < -POSITIVITY_TOL {
            return Err(Error::PositivityViolation { t, min_eigenvalue });
        }
        states.push(state);
    }
    Ok(Trajectory {
        times: times.to_vec(),
        states,
    })
}

/// First-order diagonal shifts Δρ_nn = −(ηΩ/πħ) t ⟨n|[x,[x,ρ₀]]|n⟩ over an
/// interval of length `t`.
pub fn delta_rho_first_order(
    rho0: &DensityMatrix,
    system: &OscillatorSystem,
    bath: &BathSpec,
    t: f64,
    units: &UnitSystem,
) -> Result<EnergyLossReport> {
    let rate = dissipator(rho0, system, bath, units)?;
    let delta_rho_diag: Vec<f64> = rate.diagonal().iter().map(|z| z.re * t).collect();
    let largest = delta_rho_diag.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
    if largest > FIRST_ORDER_LIMIT {
        warn!("first-order shift {largest:.3e} exceeds {FIRST_ORDER_LIMIT}; perturbative result unreliable");
    }
    let delta_e = delta_rho_diag
        .iter()
        .zip(system.energies(units))
        .map(|(d, e)| d * e)
        .sum();
    Ok(EnergyLossReport {
        delta_rho_diag,
        delta_e,
        elapsed: t,
        order: Order::FirstOrder,
    })
}

/// Non-perturbative energy change between the first and last trajectory samples.
pub fn energy_change_full(
    trajectory: &Trajectory,
    system: &OscillatorSystem,
    units: &UnitSystem,
) -> Result<EnergyLossReport> {
    let (Some(first), Some(last)) = (trajectory.first(), trajectory.last()) else {
        return Err(crate::error::invalid("trajectory", "is empty"));
    };
    check_dim(first, system)?;
    let h = hamiltonian(system, units);
    let delta_e = last.expectation(&h).re - first.expectation(&h).re;
    let delta_rho_diag = last
        .populations()
        .iter()
        .zip(first.populations())
        .map(|(b, a)| b - a)
        .collect();
    Ok(EnergyLossReport {
        delta_rho_diag,
        delta_e,
        elapsed: trajectory.times.last().unwrap() - trajectory.times[0],
        order: Order::FullEvolution,
    })
}

/// Replaces x by `operator` in every subsequent dissipator and evolution.
pub fn coupling_operator_override(system: &OscillatorSystem, operator: CMatrix) -> Result<OscillatorSystem> {
    if operator.nrows() != system.dim() || operator.ncols() != system.dim() {
        return Err(Error::DimensionMismatch {
            expected: system.dim(),
            found: operator.nrows(),
        });
    }
    ensure_hermitian(&operator, 1e-12)?;
    Ok(system.clone().set_coupling(operator))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, trace};
    use crate::oscillator::{number_operator, position_operator};
    use crate::state::{cat_state, coherent_state, StateVector};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn unit_rate_bath() -> BathSpec {
        // ηΩ/π = 1
        BathSpec::zero_temperature(PI, 1.0).unwrap()
    }

    fn random_density(n: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
        let a = CMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let m = &a * a.adjoint();
        let tr = trace(&m);
        DensityMatrix::new(hermitian_part(&(m / tr))).unwrap()
    }

    fn ground(dim: usize) -> DensityMatrix {
        DensityMatrix::from_pure(&StateVector::basis(dim, 0).unwrap())
    }

    #[test]
    fn dissipator_annihilates_identity() {
        let sys = OscillatorSystem::with_dim(8).unwrap();
        let d = dissipator(&DensityMatrix::maximally_mixed(8), &sys, &unit_rate_bath(), &UnitSystem::natural()).unwrap();
        assert!(d.iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn dissipator_is_traceless() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let sys = OscillatorSystem::with_dim(10).unwrap();
        for _ in 0..5 {
            let rho = random_density(10, &mut rng);
            let d = dissipator(&rho, &sys, &unit_rate_bath(), &UnitSystem::natural()).unwrap();
            assert!(trace(&d).norm() < 1e-12);
        }
    }

    #[test]
    fn dissipator_on_ground_state() {
        let sys = OscillatorSystem::with_dim(6).unwrap();
        let d = dissipator(&ground(6), &sys, &unit_rate_bath(), &UnitSystem::natural()).unwrap();
        let diag: Vec<f64> = d.diagonal().iter().map(|z| z.re).collect();
        assert_abs_diff_eq!(diag[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(diag[1], 1.0, epsilon = 1e-14);
        for v in &diag[2..] {
            assert_abs_diff_eq!(*v, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn first_order_ground_state_oracle() {
        let sys = OscillatorSystem::with_dim(8).unwrap();
        let report = delta_rho_first_order(&ground(8), &sys, &unit_rate_bath(), 0.01, &UnitSystem::natural()).unwrap();
        assert_abs_diff_eq!(report.delta_rho_diag[0], -0.01, epsilon = 1e-15);
        assert_abs_diff_eq!(report.delta_rho_diag[1], 0.01, epsilon = 1e-15);
        assert_abs_diff_eq!(report.delta_e, 0.01, epsilon = 1e-15);
        assert_eq!(report.order, Order::FirstOrder);
    }

    #[test]
    fn first_order_zero_coupling_and_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let sys = OscillatorSystem::with_dim(12).unwrap();
        let rho = random_density(12, &mut rng);
        let free = BathSpec::zero_temperature(0.0, 5.0).unwrap();
        let report = delta_rho_first_order(&rho, &sys, &free, 1.0, &UnitSystem::natural()).unwrap();
        assert!(report.delta_rho_diag.iter().all(|&d| d == 0.0));
        let report = delta_rho_first_order(&rho, &sys, &unit_rate_bath(), 0.05, &UnitSystem::natural()).unwrap();
        assert!(report.delta_rho_diag.iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn free_evolution_keeps_populations() {
        let sys = OscillatorSystem::with_dim(24).unwrap();
        let rho = DensityMatrix::from_pure(&cat_state(c(1.0), 24).unwrap());
        let free = BathSpec::zero_temperature(0.0, 1.0).unwrap();
        let times: Vec<f64> = (0..=10).map(|k| k as f64).collect();
        let traj = evolve(&rho, &sys, &free, &times, &EvolutionControl::default(), &UnitSystem::natural()).unwrap();
        let p0 = rho.populations();
        for state in &traj.states {
            for (a, b) in state.populations().iter().zip(&p0) {
                assert_abs_diff_eq!(*a, *b, epsilon = 1e-9);
            }
        }
        let report = energy_change_full(&traj, &sys, &UnitSystem::natural()).unwrap();
        assert_abs_diff_eq!(report.delta_e, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn free_evolution_matches_phases() {
        let sys = OscillatorSystem::with_dim(16).unwrap();
        let rho = DensityMatrix::from_pure(&coherent_state(c(0.8), 16).unwrap());
        let free = BathSpec::zero_temperature(0.0, 1.0).unwrap();
        let t = 2.5;
        let traj = evolve(&rho, &sys, &free, &[t], &EvolutionControl::default(), &UnitSystem::natural()).unwrap();
        let got = traj.states[0].matrix();
        for n in 0..16 {
            for m in 0..16 {
                let phase = Complex64::new(0.0, -sys.bohr_frequency(n, m) * t).exp();
                assert!((got[(n, m)] - rho.matrix()[(n, m)] * phase).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn full_and_first_order_agree_at_small_times() {
        let sys = OscillatorSystem::with_dim(12).unwrap();
        let units = UnitSystem::natural();
        let bath = unit_rate_bath();
        let t = 1e-3;
        let traj = evolve(&ground(12), &sys, &bath, &[0.0, t], &EvolutionControl::default(), &units).unwrap();
        let full = energy_change_full(&traj, &sys, &units).unwrap();
        let first = delta_rho_first_order(&ground(12), &sys, &bath, t, &units).unwrap();
        assert!((full.delta_e - first.delta_e).abs() < 1e-5);
        // the two summation orders of ΔE agree
        let resummed: f64 = full.delta_rho_diag.iter().zip(sys.energies(&units)).map(|(d, e)| d * e).sum();
        assert_abs_diff_eq!(resummed, full.delta_e, epsilon = 1e-12);
        assert_eq!(full.order, Order::FullEvolution);
    }

    #[test]
    fn identity_override_is_bitwise_identical() {
        let units = UnitSystem::natural();
        let sys = OscillatorSystem::with_dim(12).unwrap();
        let overridden = coupling_operator_override(&sys, position_operator(&sys, &units)).unwrap();
        let rho = DensityMatrix::from_pure(&coherent_state(c(0.7), 12).unwrap());
        let bath = BathSpec::zero_temperature(0.05, 1.0).unwrap();
        let times = [0.5, 1.0];
        let a = evolve(&rho, &sys, &bath, &times, &EvolutionControl::default(), &units).unwrap();
        let b = evolve(&rho, &overridden, &bath, &times, &EvolutionControl::default(), &units).unwrap();
        for (x, y) in a.states.iter().zip(&b.states) {
            assert_eq!(x.matrix(), y.matrix());
        }
    }

    #[test]
    fn hamiltonian_override_keeps_populations() {
        let units = UnitSystem::natural();
        let sys = OscillatorSystem::with_dim(10).unwrap();
        let overridden = coupling_operator_override(&sys, hamiltonian(&sys, &units)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rho = random_density(10, &mut rng);
        let report = delta_rho_first_order(&rho, &overridden, &unit_rate_bath(), 0.1, &units).unwrap();
        assert!(report.delta_rho_diag.iter().all(|d| d.abs() < 1e-13));
    }

    #[test]
    fn number_override_dephases_by_level_gap() {
        let units = UnitSystem::natural();
        let dim = 20;
        let sys = OscillatorSystem::with_dim(dim).unwrap();
        let overridden = coupling_operator_override(&sys, number_operator(dim)).unwrap();
        let bath = BathSpec::zero_temperature(0.3, 1.0).unwrap();
        let gamma = bath.dephasing_rate(&units);
        let rho = DensityMatrix::from_pure(&cat_state(c(1.2), dim).unwrap());
        let t = 1.3;
        let traj = evolve(&rho, &overridden, &bath, &[t], &EvolutionControl::default(), &units).unwrap();
        let got = traj.states[0].matrix();
        for n in 0..8 {
            for m in 0..8 {
                let k = (n as f64 - m as f64).powi(2);
                let decay = (-gamma * k * t).exp();
                let phase = Complex64::new(0.0, -sys.bohr_frequency(n, m) * t).exp();
                assert!((got[(n, m)] - rho.matrix()[(n, m)] * phase * decay).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn override_rejects_non_hermitian() {
        let sys = OscillatorSystem::with_dim(4).unwrap();
        let mut op = CMatrix::zeros(4, 4);
        op[(0, 1)] = c(1.0);
        assert!(matches!(
            coupling_operator_override(&sys, op),
            Err(Error::NotHermitian { .. })
        ));
        assert!(coupling_operator_override(&sys, CMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn truncation_guard_fires() {
        let units = UnitSystem::natural();
        let sys = OscillatorSystem::with_dim(6).unwrap();
        let rho = DensityMatrix::from_pure(&StateVector::basis(6, 3).unwrap());
        let err = evolve(&rho, &sys, &unit_rate_bath(), &[5.0], &EvolutionControl::default(), &units).unwrap_err();
        assert!(matches!(err, Error::TruncationExceeded { .. }));
    }

    #[test]
    fn thermal_bath_rejected() {
        let sys = OscillatorSystem::with_dim(6).unwrap();
        let bath = BathSpec::new(0.1, 1.0, 0.5).unwrap();
        let err = evolve(&ground(6), &sys, &bath, &[1.0], &EvolutionControl::default(), &UnitSystem::natural());
        assert!(matches!(err, Err(Error::Regime { .. })));
    }
}
