use thiserror::Error;

/// Errors raised by grid construction, time stepping, filtering and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "quadrature singularity at node {node}: |cos(omega_bar t)| = {value:.3e}; \
         perturb the number of time steps by one"
    )]
    QuadratureSingularity { node: usize, value: f64 },

    #[error("operator is not positive definite (p^T A p = {curvature:.3e} at iteration {iteration}); {hint}")]
    NotPositiveDefinite {
        iteration: usize,
        curvature: f64,
        hint: String,
    },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("dense assembly of dimension {dim} exceeds the guard of {limit}")]
    SizeGuard { dim: usize, limit: usize },

    #[error("frequency is at a discrete resonance (delta_h = {delta:.3e})")]
    Resonance { delta: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
