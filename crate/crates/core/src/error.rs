use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {param} = {value} ({reason})")]
    Domain {
        param: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid mesh: node {index} ({value}) does not increase on its predecessor")]
    NonMonotoneMesh { index: usize, value: f64 },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("level {level} out of range 1..={max}")]
    LevelOutOfRange { level: usize, max: usize },

    #[error(
        "omega_{alpha} is singular at s = 0; integrate with the omega_{{alpha+1}} antiderivative"
    )]
    Singularity { alpha: f64 },

    #[error("series did not converge within {terms} terms (last term {last_term:e})")]
    Precision { terms: usize, last_term: f64 },

    #[error("quadrature did not reach tolerance {tol:e} (estimate {estimate:e})")]
    Quadrature { tol: f64, estimate: f64 },

    #[error("kernel a_0 at level {level} is {value}; complementary kernels need a_0 > 0")]
    KernelDegeneracy { level: usize, value: f64 },

    #[error(
        "implicit step not solvable at level {level}: a_0 = {a0} <= kappa = {kappa}; refine the mesh"
    )]
    StepSize { level: usize, a0: f64, kappa: f64 },

    #[error("singular tridiagonal system at row {row}")]
    SingularSystem { row: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("value out of floating-point range: {0}")]
    Range(String),

    #[error("run (r = {r}, N = {n}) failed: {source}")]
    Sweep {
        r: f64,
        n: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
