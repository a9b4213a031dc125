//! Independent numerical cross-checks of the main simulator.

mod energy_quadrature;
mod hamilton_jacobi;
mod oracle;

pub use energy_quadrature::delta_rho_quadrature;
pub use hamilton_jacobi::{hamilton_jacobi_residual, Convention, ResidualReport, DENSITY_FLOOR};
pub use oracle::{
    exact_system_bath, ground_product_state, partial_trace_env, BathMode, BathModeSet, OracleRun, JOINT_DIM_CAP,
};
