use thiserror::Error;

use crate::majorant::Violation;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate shape: {0}")]
    DegenerateShape(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("facet is not the distinguished boundary part Gamma")]
    NotDistinguishedFacet,

    #[error("quadrature did not converge after {refinements} refinements")]
    QuadratureNonConvergence { refinements: u32 },

    #[error("Cholesky factorization of the stiffness matrix failed at pivot {pivot}")]
    CholeskyFailure { pivot: usize },

    #[error("stiffness matrix too ill-conditioned (estimated condition {estimate:.3e}) even at {digits} digits")]
    IllConditioned { estimate: f64, digits: u32 },

    #[error("eigenpair residual {residual:.3e} exceeds tolerance {tolerance:.1e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },

    #[error("Jacobi iteration did not converge in {sweeps} sweeps")]
    JacobiNonConvergence { sweeps: usize },

    #[error("flux is not admissible ({} violated condition(s))", .0.len())]
    Inadmissible(Vec<Violation>),

    #[error("flux has nonzero normal jumps across interior edges")]
    NonConformingFlux,

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code used by the CLI: 2 input, 3 numerical, 4 admissibility.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DegenerateShape(_)
            | Error::InvalidInput(_)
            | Error::NotDistinguishedFacet
            | Error::NonConformingFlux
            | Error::Io(_)
            | Error::Json(_)
            | Error::Csv(_) => 2,
            Error::QuadratureNonConvergence { .. }
            | Error::CholeskyFailure { .. }
            | Error::IllConditioned { .. }
            | Error::ResidualTooLarge { .. }
            | Error::JacobiNonConvergence { .. } => 3,
            Error::Inadmissible(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
