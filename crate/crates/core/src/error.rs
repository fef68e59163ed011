use thiserror::Error;

use crate::trajectory::Trajectory;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("dimension m = {0} is even; smooth profiles exist only for odd m")]
    EvenDimension(u32),

    #[error("abscissa {at} is outside the domain of the {coordinate} equation")]
    Domain { coordinate: &'static str, at: f64 },

    #[error("step size underflow at abscissa {at}")]
    StepFailure { at: f64, partial: Box<Trajectory> },

    #[error("no shooting bracket found for n = {n}: {reason}")]
    BracketNotFound { n: usize, reason: String },

    #[error("Newton iteration diverged after {iterations} iterations (last residual {residual:e})")]
    NewtonDivergence { iterations: usize, residual: f64 },

    #[error("quadrature did not converge: partial value {value}, error estimate {error:e}")]
    Quadrature { value: f64, error: f64 },

    #[error("the energy functional is only available for m = 3 (got m = {0})")]
    EnergyUnavailable(u32),

    #[error("linear stability is only implemented for m = 3, l = 1")]
    StabilityUnsupported,

    #[error("found {found} positive eigenvalues, expected {expected}")]
    CountMismatch {
        expected: usize,
        found: usize,
        eigenvalues: Vec<f64>,
    },

    #[error("root polish did not converge in [{lo}, {hi}]")]
    RootNotConverged { lo: f64, hi: f64 },
}
