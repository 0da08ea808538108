use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// Damped Newton did not reach the residual tolerance at some point of
    /// the continuation path in the deformation parameter.
    #[error("steady-state solver did not converge at eta = {eta:e} after {iterations} iterations (scaled residual {residual:e})")]
    NoConvergence {
        eta: f64,
        iterations: usize,
        residual: f64,
    },

    /// A steady state exists but at least one drift eigenvalue has a
    /// non-negative real part.
    #[error("steady state is unstable (max Re lambda = {max_re_lambda:e})")]
    Unstable { max_re_lambda: f64 },

    #[error("mean-field trajectory diverged at t = {t}")]
    Overflow { t: f64 },

    /// The deformation function is imaginary beyond level N + 1.
    #[error("level {n} lies outside the deformed Fock space for eta = {eta}")]
    Domain { n: usize, eta: f64 },

    #[error("singular linear solve: {0}")]
    SingularSolve(String),

    #[error("Fock truncation not converged: {0}")]
    Truncation(String),
}
