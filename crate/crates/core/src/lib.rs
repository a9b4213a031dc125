//! Phase decoherence and zero-temperature energy dissipation of a harmonic
//! oscillator coupled to an ohmic bath.

pub mod bath;
pub mod error;
pub mod grid;
pub mod histories;
pub mod influence;
pub mod linalg;
pub mod master_eq;
pub mod ode;
pub mod oscillator;
pub mod quadrature;
pub mod state;
pub mod units;
pub mod validation;

pub use error::{Error, Result};
pub use linalg::CMatrix;
pub use num_complex::Complex64;
