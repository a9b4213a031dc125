//! Pure states and density matrices in the truncated Fock basis.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::linalg::{hermitian_deviation, hermitian_eigenvalues, trace, CMatrix};

/// Truncation weight above which a factory reports a warning.
pub const TRUNCATION_WARNING: f64 = 1e-8;

const NORM_TOL: f64 = 1e-12;

/// Normalized state vector.
///
/// `truncation_weight` is the probability that the untruncated state carries
/// above the top Fock level (zero for states built directly from amplitudes).
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: DVector<Complex64>,
    truncation_weight: f64,
}

impl StateVector {
    /// Wraps amplitudes that are already normalized.
    pub fn new(amplitudes: DVector<Complex64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(invalid("amplitudes", format!("norm is {norm}, expected 1")));
        }
        Ok(Self {
            amplitudes,
            truncation_weight: 0.0,
        })
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized(amplitudes: DVector<Complex64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(invalid("amplitudes", "cannot normalize a zero vector"));
        }
        Ok(Self {
            amplitudes: amplitudes / Complex64::new(norm, 0.0),
            truncation_weight: 0.0,
        })
    }

    pub fn basis(dim: usize, n: usize) -> Result<Self> {
        if n >= dim {
            return Err(invalid("n", format!("level {n} outside dimension {dim}")));
        }
        let mut amplitudes = DVector::zeros(dim);
        amplitudes[n] = Complex64::new(1.0, 0.0);
        Ok(Self {
            amplitudes,
            truncation_weight: 0.0,
        })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn truncation_weight(&self) -> f64 {
        self.truncation_weight
    }

    pub fn truncation_warning(&self) -> bool {
        self.truncation_weight > TRUNCATION_WARNING
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// ⟨ψ|op|ψ⟩.
    pub fn expectation(&self, op: &CMatrix) -> Complex64 {
        self.amplitudes.dotc(&(op * &self.amplitudes))
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }
}

/// ln(|α|^n / √n!) built incrementally, returned per level.
fn coherent_log_moduli(modulus: f64, dim: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(dim);
    let mut acc = -0.5 * modulus * modulus;
    out.push(acc);
    for n in 1..dim {
        acc += modulus.ln() - 0.5 * (n as f64).ln();
        out.push(acc);
    }
    out
}

/// Unnormalized amplitudes e^{-|α|²/2} αⁿ/√n! for n < dim.
fn coherent_amplitudes(alpha: Complex64, dim: usize) -> DVector<Complex64> {
    let modulus = alpha.norm();
    if modulus == 0.0 {
        let mut v = DVector::zeros(dim);
        v[0] = Complex64::new(1.0, 0.0);
        return v;
    }
    let phase = alpha.arg();
    let logs = coherent_log_moduli(modulus, dim);
    DVector::from_iterator(
        dim,
        logs.iter()
            .enumerate()
            .map(|(n, &l)| Complex64::from_polar(l.exp(), n as f64 * phase)),
    )
}

fn warn_if_truncated(state: &StateVector, what: &str) {
    if state.truncation_warning() {
        log::warn!(
            "{what}: truncation weight {:.3e} above the top Fock level (dim {})",
            state.truncation_weight,
            state.dim()
        );
    }
}

/// Truncated, renormalized coherent state |α⟩.
pub fn coherent_state(alpha: Complex64, dim: usize) -> Result<StateVector> {
    if dim < 1 {
        return Err(invalid("dim", "must be at least 1"));
    }
    let raw = coherent_amplitudes(alpha, dim);
    let captured = raw.norm_squared();
    let mut state = StateVector::normalized(raw)?;
    state.truncation_weight = (1.0 - captured).max(0.0);
    warn_if_truncated(&state, "coherent_state");
    Ok(state)
}

/// Even cat state (|α⟩ + |-α⟩)/N, truncated and renormalized.
pub fn cat_state(alpha: Complex64, dim: usize) -> Result<StateVector> {
    if dim < 1 {
        return Err(invalid("dim", "must be at least 1"));
    }
    let plus = coherent_amplitudes(alpha, dim);
    let minus = coherent_amplitudes(-alpha, dim);
    let raw = plus + minus;
    let full_norm_sq = 2.0 * (1.0 + (-2.0 * alpha.norm_sqr()).exp());
    let captured = raw.norm_squared() / full_norm_sq;
    let mut state = StateVector::normalized(raw)?;
    state.truncation_weight = (1.0 - captured).max(0.0);
    warn_if_truncated(&state, "cat_state");
    Ok(state)
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub const HERMITIAN_TOL: f64 = 1e-12;
    pub const TRACE_TOL: f64 = 1e-10;
    pub const EIGEN_TOL: f64 = 1e-10;

    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        let deviation = hermitian_deviation(&matrix);
        if deviation > Self::HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let tr = trace(&matrix);
        if (tr.re - 1.0).abs() > Self::TRACE_TOL || tr.im.abs() > Self::TRACE_TOL {
            return Err(Error::InvalidDensity(format!("trace is {tr}")));
        }
        let min_eig = hermitian_eigenvalues(&matrix)[0];
        if min_eig < -Self::EIGEN_TOL {
            return Err(Error::InvalidDensity(format!(
                "smallest eigenvalue {min_eig:.3e} is negative"
            )));
        }
        Ok(Self { matrix })
    }

    /// Wraps a matrix without validation; used for propagated states whose
    /// invariants are monitored by the integrator at looser tolerances.
    pub fn new_unchecked(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    pub fn from_pure(state: &StateVector) -> Self {
        let v = state.amplitudes();
        Self {
            matrix: v * v.adjoint(),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: CMatrix::identity(dim, dim) / Complex64::new(dim as f64, 0.0),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        trace(&self.matrix)
    }

    /// Tr ρ².
    pub fn purity(&self) -> f64 {
        // Tr(ρ²) = Σ_ij |ρ_ij|² for Hermitian ρ
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().map(|z| z.re).collect()
    }

    pub fn expectation(&self, op: &CMatrix) -> Complex64 {
        // Tr(ρ A) without forming the product
        let n = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += self.matrix[(i, j)] * op[(j, i)];
            }
        }
        acc
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.matrix)[0]
    }

    /// l1 norm of the off-diagonal entries.
    pub fn coherence_l1(&self) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    acc += self.matrix[(i, j)].norm();
                }
            }
        }
        acc
    }

    /// max |ρ² - ρ|.
    pub fn idempotency_deviation(&self) -> f64 {
        (&self.matrix * &self.matrix - &self.matrix)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}
