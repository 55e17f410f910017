use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("singularity at z = {0}")]
    Singularity(Complex64),

    #[error("unknown system id `{0}`")]
    UnknownSystem(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("Newton iteration from seed {seed} did not converge after {iterations} iterations")]
    NonConvergence { seed: Complex64, iterations: usize },

    #[error("trajectory from {z_start} never recrossed the real axis (wanted crossing #{wanted}, found {found})")]
    NoRecross {
        z_start: Complex64,
        wanted: usize,
        found: usize,
    },

    #[error("trajectory terminated early ({status}) at t = {t}")]
    Propagation { status: String, t: f64 },

    #[error("quadrature failed near z = {0}: integrand singular")]
    Quadrature(Complex64),
}

pub type Result<T> = std::result::Result<T, Error>;
