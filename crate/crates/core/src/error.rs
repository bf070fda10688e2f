use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the numerical pipeline and the command-line front end.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("malformed measure: {0}")]
    MalformedMeasure(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical degeneracy: {0}")]
    Degenerate(String),

    #[error("root solver failed after {iterations} iterations, bracket [{lo:e}, {hi:e}]")]
    SolverFailure { iterations: usize, lo: f64, hi: f64 },

    #[error("unsupported measure: {0}")]
    UnsupportedMeasure(String),

    #[error("the balance equation has no root in (0, inf)")]
    NoBalanceRoot,

    #[error("singular resolvent: {0}")]
    Singular(String),

    #[error("lambda = {0} is an atom candidate; no density is defined there")]
    AtomCandidate(Complex64),

    #[error("atom-dominated point: both boundary values vanish")]
    AtomDominated,

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("Jacobi eigensolver did not converge in {0} sweeps")]
    NoConvergence(usize),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by bad input rather than by the numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::MalformedMeasure(_)
                | Error::Domain(_)
                | Error::Shape(_)
                | Error::Config(_)
                | Error::Io(_)
                | Error::UnsupportedMeasure(_)
        )
    }

    /// Short machine-readable tag used in JSON error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::MalformedMeasure(_) => "malformed-measure",
            Error::Domain(_) => "domain",
            Error::Degenerate(_) => "degenerate",
            Error::SolverFailure { .. } => "solver-failure",
            Error::UnsupportedMeasure(_) => "unsupported-measure",
            Error::NoBalanceRoot => "no-balance-root",
            Error::Singular(_) => "singular",
            Error::AtomCandidate(_) => "atom-candidate",
            Error::AtomDominated => "atom-dominated",
            Error::Shape(_) => "shape",
            Error::NoConvergence(_) => "no-convergence",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
