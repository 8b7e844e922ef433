use num_complex::Complex64;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by construction and evaluation routines.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("matrix numerically singular (smallest pivot {pivot:.3e}, threshold {threshold:.3e})")]
    Singular { pivot: f64, threshold: f64 },

    #[error("x = {x} lies outside the valid interval [{lo}, {hi}]")]
    OutsideInterval { x: f64, lo: f64, hi: f64 },

    #[error("lambda = {lambda} within {distance:.3e} of the spectrum of A")]
    NearSpectrum { lambda: Complex64, distance: f64 },

    #[error("Lyapunov residual {residual:.3e} at the base point exceeds {tolerance:.1e}")]
    LyapunovResidual { residual: f64, tolerance: f64 },

    #[error("matrix not positive definite (smallest eigenvalue {0:.3e})")]
    NotPositiveDefinite(f64),

    #[error("operation requires the {expected} parameter family, vessel has {found}")]
    WrongFamily { expected: String, found: String },

    #[error("phase undefined: |h| = {0:.3e} below threshold")]
    PhaseUndefined(f64),

    #[error("no convergence after {iters} iterations (last delta {delta:.3e})")]
    NoConvergence { iters: usize, delta: f64 },

    #[error("singular Cauchy pairing between curve nodes {i} and {j}: |mu_i + conj(mu_j)| = {gap:.3e} with nonzero numerator {numerator:.3e}")]
    SingularPairing {
        i: usize,
        j: usize,
        gap: f64,
        numerator: f64,
    },

    #[error("ill-conditioned construction: sigma_min = {0:.3e}")]
    IllConditioned(f64),
}
