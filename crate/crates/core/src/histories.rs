//! Consistent-histories machinery on a finite system ⊗ environment space.
//!
//! A history is a time-ordered choice of one projector from each slot's
//! complete family. The decoherence functional of two histories α', α is
//!
//! ```text
//! D(α', α) = Tr[ P_{α'_n}(t_n) … P_{α'_1}(t_1) ρ₀ P_{α_1}(t_1) … P_{α_n}(t_n) ]
//! ```
//!
//! with Heisenberg-picture projectors P(t) = e^{iHt/ħ} P e^{−iHt/ħ}.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::linalg::{ensure_hermitian, hermitian_deviation, identity, kron, unitary_propagator, CMatrix};
use crate::state::{DensityMatrix, StateVector};
use crate::units::UnitSystem;

/// Largest total dimension handled by the histories machinery.
pub const HISTORY_DIM_CAP: usize = 256;

const PROJECTOR_HERMITIAN_TOL: f64 = 1e-12;
const PROJECTOR_IDEMPOTENT_TOL: f64 = 1e-10;
const COMPLETENESS_TOL: f64 = 1e-10;

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Orthogonal projector P = P† = P².
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    matrix: CMatrix,
}

impl Projector {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let dim = matrix.nrows();
        if dim > HISTORY_DIM_CAP {
            return Err(Error::DimensionCap {
                dim,
                cap: HISTORY_DIM_CAP,
            });
        }
        let deviation = hermitian_deviation(&matrix);
        if matrix.ncols() != dim || deviation > PROJECTOR_HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let idempotency = max_abs(&(&matrix * &matrix - &matrix));
        if idempotency > PROJECTOR_IDEMPOTENT_TOL {
            return Err(invalid(
                "projector",
                format!("P² differs from P by {idempotency:.3e}"),
            ));
        }
        Ok(Self { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn rank(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }
}

/// |α⟩⟨α| ⊗ I_env in the lexicographic (system-major) product basis.
pub fn make_projector(state: &StateVector, env_dim: usize) -> Result<Projector> {
    if env_dim < 1 {
        return Err(invalid("env_dim", "must be at least 1"));
    }
    let v = state.amplitudes();
    let system = v * v.adjoint();
    let matrix = if env_dim == 1 {
        system
    } else {
        kron(&system, &identity(env_dim))
    };
    Projector::new(matrix)
}

/// Heisenberg-picture projector e^{iHt/ħ} P e^{−iHt/ħ}.
pub fn evolve_projector(p: &Projector, hamiltonian: &CMatrix, t: f64, units: &UnitSystem) -> Result<Projector> {
    check_hamiltonian(hamiltonian, p.dim())?;
    if t == 0.0 {
        return Ok(p.clone());
    }
    let u = unitary_propagator(hamiltonian, t, units.hbar)?;
    Ok(heisenberg(p, &u))
}

fn heisenberg(p: &Projector, u: &CMatrix) -> Projector {
    let evolved = u.adjoint() * &p.matrix * u;
    // re-symmetrize: the product is Hermitian only up to rounding
    Projector {
        matrix: (&evolved + evolved.adjoint()) * Complex64::new(0.5, 0.0),
    }
}

fn check_hamiltonian(h: &CMatrix, dim: usize) -> Result<()> {
    if h.nrows() != dim || h.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: h.nrows(),
        });
    }
    ensure_hermitian(h, 1e-12)
}

/// Projectors that sum to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorFamily {
    projectors: Vec<Projector>,
}

impl ProjectorFamily {
    pub fn new(projectors: Vec<Projector>) -> Result<Self> {
        let Some(first) = projectors.first() else {
            return Err(invalid("projectors", "family is empty"));
        };
        let dim = first.dim();
        let mut total = CMatrix::zeros(dim, dim);
        for p in &projectors {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.dim(),
                });
            }
            total += p.matrix();
        }
        let defect = max_abs(&(total - identity(dim)));
        if defect > COMPLETENESS_TOL {
            return Err(invalid(
                "projectors",
                format!("family is incomplete: Σ P − I has entries up to {defect:.3e}"),
            ));
        }
        Ok(Self { projectors })
    }

    /// One projector per basis state, each tensored with I_env.
    pub fn from_basis(states: &[StateVector], env_dim: usize) -> Result<Self> {
        Self::new(
            states
                .iter()
                .map(|s| make_projector(s, env_dim))
                .collect::<Result<_>>()?,
        )
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].dim()
    }

    pub fn get(&self, index: usize) -> Option<&Projector> {
        self.projectors.get(index)
    }

    pub fn projectors(&self) -> &[Projector] {
        &self.projectors
    }
}

#[derive(Debug, Clone)]
pub struct TimeSlot {
    pub time: f64,
    pub family: Arc<ProjectorFamily>,
}

impl TimeSlot {
    pub fn new(time: f64, family: Arc<ProjectorFamily>) -> Self {
        Self { time, family }
    }

    fn same_as(&self, other: &TimeSlot) -> bool {
        self.time == other.time
            && (Arc::ptr_eq(&self.family, &other.family) || self.family == other.family)
    }
}

/// A coarse-grained history: one projector index per time slot.
#[derive(Debug, Clone)]
pub struct HistorySpec {
    slots: Vec<TimeSlot>,
    choice: Vec<usize>,
}

impl HistorySpec {
    pub fn new(slots: Vec<TimeSlot>, choice: Vec<usize>) -> Result<Self> {
        if slots.is_empty() {
            return Err(invalid("slots", "history needs at least one slot"));
        }
        if slots.len() != choice.len() {
            return Err(Error::DimensionMismatch {
                expected: slots.len(),
                found: choice.len(),
            });
        }
        let dim = slots[0].family.dim();
        for (k, (slot, &index)) in slots.iter().zip(&choice).enumerate() {
            if slot.family.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: slot.family.dim(),
                });
            }
            if index >= slot.family.len() {
                return Err(invalid(
                    "choice",
                    format!("slot {k} has {} projectors, index {index}", slot.family.len()),
                ));
            }
            if k > 0 && slot.time < slots[k - 1].time {
                return Err(invalid("slots", "slot times must be non-decreasing"));
            }
        }
        Ok(Self { slots, choice })
    }

    pub fn slots(&self) -> &[TimeSlot] {
        &self.slots
    }

    pub fn choice(&self) -> &[usize] {
        &self.choice
    }

    pub fn dim(&self) -> usize {
        self.slots[0].family.dim()
    }

    fn shares_slots_with(&self, other: &HistorySpec) -> bool {
        self.slots.len() == other.slots.len()
            && self.slots.iter().zip(&other.slots).all(|(a, b)| a.same_as(b))
    }
}

/// Read-only memo of e^{−iHt/ħ} for each distinct slot time.
#[derive(Debug)]
pub struct PropagatorCache {
    propagators: BTreeMap<u64, CMatrix>,
}

impl PropagatorCache {
    pub fn build(hamiltonian: &CMatrix, times: impl IntoIterator<Item = f64>, units: &UnitSystem) -> Result<Self> {
        let mut propagators = BTreeMap::new();
        for t in times {
            if let std::collections::btree_map::Entry::Vacant(slot) = propagators.entry(t.to_bits()) {
                slot.insert(unitary_propagator(hamiltonian, t, units.hbar)?);
            }
        }
        Ok(Self { propagators })
    }

    pub fn get(&self, t: f64) -> Option<&CMatrix> {
        self.propagators.get(&t.to_bits())
    }

    pub fn len(&self) -> usize {
        self.propagators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.propagators.is_empty()
    }
}

/// Chain operator C = P_n(t_n) … P_1(t_1) of one history.
fn chain_operator(slots: &[TimeSlot], choice: &[usize], cache: &PropagatorCache) -> CMatrix {
    let dim = slots[0].family.dim();
    let mut chain = identity(dim);
    for (slot, &index) in slots.iter().zip(choice) {
        let p = slot.family.get(index).expect("index validated on construction");
        let u = cache.get(slot.time).expect("cache covers every slot time");
        chain = heisenberg(p, u).matrix() * chain;
    }
    chain
}

/// Tr[A B†] = Σ_ij A_ij conj(B_ij).
fn trace_with_adjoint(a: &CMatrix, b: &CMatrix) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y.conj()).sum()
}

fn check_state(rho0: &DensityMatrix, hamiltonian: &CMatrix, dim: usize) -> Result<()> {
    if dim > HISTORY_DIM_CAP {
        return Err(Error::DimensionCap {
            dim,
            cap: HISTORY_DIM_CAP,
        });
    }
    if rho0.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: rho0.dim(),
        });
    }
    check_hamiltonian(hamiltonian, dim)
}

/// D(hist_a, hist_b), with `hist_a` on the left of ρ₀ and `hist_b` on the right.
pub fn decoherence_functional(
    hist_a: &HistorySpec,
    hist_b: &HistorySpec,
    rho0: &DensityMatrix,
    hamiltonian: &CMatrix,
    units: &UnitSystem,
) -> Result<Complex64> {
    if !hist_a.shares_slots_with(hist_b) {
        return Err(Error::MismatchedSlots(
            "histories must share slot times and projector families".into(),
        ));
    }
    check_state(rho0, hamiltonian, hist_a.dim())?;
    let cache = PropagatorCache::build(hamiltonian, hist_a.slots.iter().map(|s| s.time), units)?;
    let left = chain_operator(&hist_a.slots, &hist_a.choice, &cache);
    let right = chain_operator(&hist_b.slots, &hist_b.choice, &cache);
    Ok(trace_with_adjoint(&(left * rho0.matrix()), &right))
}

/// Every history of a slot sequence, in lexicographic order of indices.
pub fn enumerate_histories(slots: &[TimeSlot]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for slot in slots {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..slot.family.len()).map(move |k| {
                    let mut next = prefix.clone();
                    next.push(k);
                    next
                })
            })
            .collect();
    }
    out
}

/// Decoherence functional over all history pairs of a slot sequence.
#[derive(Debug, Clone)]
pub struct FunctionalMatrix {
    pub histories: Vec<Vec<usize>>,
    /// Row α', column α.
    pub matrix: CMatrix,
}

pub fn functional_matrix(
    slots: &[TimeSlot],
    rho0: &DensityMatrix,
    hamiltonian: &CMatrix,
    units: &UnitSystem,
) -> Result<FunctionalMatrix> {
    let first = slots
        .first()
        .ok_or_else(|| invalid("slots", "need at least one slot"))?;
    // validates ordering and dimensions
    HistorySpec::new(slots.to_vec(), vec![0; slots.len()])?;
    check_state(rho0, hamiltonian, first.family.dim())?;
    let cache = PropagatorCache::build(hamiltonian, slots.iter().map(|s| s.time), units)?;
    let histories = enumerate_histories(slots);
    let chains: Vec<CMatrix> = histories
        .iter()
        .map(|h| chain_operator(slots, h, &cache))
        .collect();
    let left: Vec<CMatrix> = chains.iter().map(|c| c * rho0.matrix()).collect();
    let count = histories.len();
    let matrix = CMatrix::from_fn(count, count, |i, j| trace_with_adjoint(&left[i], &chains[j]));
    Ok(FunctionalMatrix { histories, matrix })
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Classification {
    pub decoherent: bool,
    pub max_off_diagonal: f64,
    /// Largest |D(α',α)| / (√(D(α',α')D(α,α)) + 1e-300).
    pub max_ratio: f64,
}

/// Decoherent iff every off-diagonal magnitude is at most ε times the
/// geometric mean of the corresponding diagonal entries.
pub fn classify_decoherent(matrix: &CMatrix, epsilon: f64) -> Classification {
    let n = matrix.nrows();
    let mut max_off_diagonal = 0.0_f64;
    let mut max_ratio = 0.0_f64;
    let mut decoherent = true;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let magnitude = matrix[(i, j)].norm();
            let scale = (matrix[(i, i)].re.max(0.0) * matrix[(j, j)].re.max(0.0)).sqrt() + 1e-300;
            max_off_diagonal = max_off_diagonal.max(magnitude);
            max_ratio = max_ratio.max(magnitude / scale);
            if magnitude > epsilon * scale {
                decoherent = false;
            }
        }
    }
    Classification {
        decoherent,
        max_off_diagonal,
        max_ratio,
    }
}
