use thiserror::Error;

/// Errors raised by the linear-algebra and inference layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("subspaces are not complementary: dim K = {k}, dim D = {d}, ambient {n}")]
    NotComplementary { k: usize, d: usize, n: usize },
    #[error("relation is not left-total")]
    NotLeftTotal,
    #[error("form is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("observation is infeasible: distance {distance:e} to the affine support exceeds {bound:e}")]
    InfeasibleObservation { distance: f64, bound: f64 },
    #[error("affine subspaces do not meet (residual {residual:e})")]
    EmptyIntersection { residual: f64 },
    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),
    #[error("malformed data: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}
