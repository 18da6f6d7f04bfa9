use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("invalid mode layout: {0}")]
    InvalidLayout(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("matrix is not positive definite (min eigenvalue {0:e})")]
    NotPositiveDefinite(f64),

    #[error("initial state is not pure (largest symplectic eigenvalue {0})")]
    NotPure(f64),

    #[error("initial state is not a product across the bipartition (cross block norm {0:e})")]
    NotProduct(f64),

    #[error("non-finite entries in {0}")]
    NonFinite(&'static str),

    #[error("outside the perturbative regime: {quantity} = {value} exceeds {limit}")]
    OutOfRegime {
        quantity: &'static str,
        value: f64,
        limit: f64,
    },

    #[error("rotated coupling vector leaves its mode sector (max deviation {max_deviation:e}, angle {max_angle:e} rad)")]
    NotParallel { max_deviation: f64, max_angle: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("Gauss-Hermite quadrature did not converge up to order {order} (last change {change:e})")]
    Quadrature { order: usize, change: f64 },

    #[error("Fock truncation leakage {leakage:e} exceeds {limit:e}")]
    Leakage { leakage: f64, limit: f64 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_mismatch(expected: impl ToString, found: impl ToString) -> Error {
    Error::DimensionMismatch {
        expected: expected.to_string(),
        found: found.to_string(),
    }
}
