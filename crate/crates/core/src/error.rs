use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("frequency {value} Ha is outside the tabulated range [{min}, {max}] Ha")]
    OutOfRange { value: f64, min: f64, max: f64 },

    #[error("parse error in {path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("passivity violated: {0}")]
    Passivity(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("quadrature did not converge: estimate {estimate:e}, error bound {error:e} after {intervals} subintervals")]
    Quadrature {
        estimate: f64,
        error: f64,
        intervals: usize,
    },

    #[error("pole in reflection function: |1 - r_b r_t exp(2i kz d)| = {0:e}")]
    Pole(f64),

    #[error("no sign change of (peak centre - target) in radius bracket: {0}")]
    Bracketing(String),

    #[error("overlap matrix is rank deficient (min eigenvalue {min_eigenvalue:e}); drop dark orientations")]
    RankDeficient { min_eigenvalue: f64 },

    #[error("degenerate bright-mode basis: orientation {0} has zero spectral density but couples to others")]
    DegenerateBasis(usize),

    #[error("unstable coupled system: eigenvalue {eigenvalue:e} below tolerance {tolerance:e}")]
    Instability { eigenvalue: f64, tolerance: f64 },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Coarse classification used to map failures onto process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Numerical,
    Capacity,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Config(_) | Error::Validation(_) | Error::Parse { .. } | Error::Io { .. } => {
                ErrorClass::Config
            }
            Error::Capacity(_) => ErrorClass::Capacity,
            _ => ErrorClass::Numerical,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
