//! vessel-lab: a numerical laboratory for operator vessels.
//!
//! A vessel is a collection `(A, B(x), X(x); sigma_1, sigma_2, gamma,
//! gamma_*)` of matrices tied together by one differential equation for
//! `B`, a Lyapunov equation, a derivative formula for `X` and a linkage
//! formula for `gamma_*`. Each vessel generates a family of transfer
//! functions `S(lambda, x)` that intertwine the solutions of an input
//! linear differential equation with those of an output equation, and a
//! tau function `det(X(x0)^{-1} X(x))` whose logarithmic derivatives
//! produce Sturm-Liouville potentials.
//!
//! The crate constructs vessels from initial data, evolves them along `x`,
//! evaluates transfer functions, tau functions and generated potentials,
//! and machine-verifies the algebraic identities each object must satisfy.

pub mod curve;
pub mod error;
pub mod fixtures;
pub mod numerics;
pub mod params;
pub mod schema;
pub mod sl;
pub mod tau;
pub mod transfer;
pub mod vessel;

pub use error::{Error, Result};
pub use numerics::{c64, CMatrix, GridFunction};
pub use params::{Family, VesselParameters};
pub use vessel::{ConditionResiduals, Vessel, VesselClassification};
