//! Dense complex linear algebra, fixed-step matrix ODE integration,
//! quadrature and determinant utilities shared by every other module.
//!
//! All operations are pure functions of their inputs and safe to call
//! concurrently.

pub mod eigen;
pub mod grid;
pub mod lu;
pub mod matrix;
pub mod ode;
pub mod quad;

pub use eigen::{
    eigenvalues, hermitian_eigen, hermitian_eigenvalues, hermitian_sqrt_with_inverse,
    numerical_rank,
};
pub use grid::{
    derivative_at, scalar_derivative_at, scalar_second_derivative_at, second_derivative_at,
    unwrap_phases, GridFunction,
};
pub use lu::{det, inverse, log_det, solve, LuFactors, SINGULAR_PIVOT_REL};
pub use matrix::{c64, CMatrix};
pub use ode::{fundamental_solution, integrate_blocks, rk4_step, steps_for, DEFAULT_STEPS_PER_UNIT};
pub use quad::{gauss_legendre, simpson_weights};
