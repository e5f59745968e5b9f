use thiserror::Error;

use crate::hamiltonian::{DomainError, ParseError};

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown Hamiltonian `{0}`")]
    UnknownHamiltonian(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("nmax = {given} is below the truncation rule minimum {required} for |alpha| = {abs_alpha}")]
    Truncation {
        given: usize,
        required: usize,
        abs_alpha: f64,
    },
    #[error("f'(r^2/2) vanishes at r = {radius}")]
    SingularFrequency { radius: f64 },
    #[error("state became non-finite at t = {t}: x = {x}, p = {p}")]
    NonFinite { t: f64, x: f64, p: f64 },
    #[error("f(E_{level}) is not finite ({value})")]
    NonFiniteSpectrum { level: usize, value: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Numeric failures as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::SingularFrequency { .. }
                | Error::NonFinite { .. }
                | Error::NonFiniteSpectrum { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
