use thiserror::Error;

/// Errors surfaced by the solver library.
#[derive(Debug, Error)]
pub enum GpError {
    #[error("field has {got} values but the grid holds {expected} interior nodes")]
    ShapeMismatch { got: usize, expected: usize },

    #[error("cannot retract the zero field")]
    ZeroField,

    #[error("rayleigh quotient of a zero-mass field is undefined")]
    ZeroMass,

    #[error("eigenproblem residual requires a unit-mass field (mass = {mass})")]
    NotNormalized { mass: f64 },

    #[error(
        "{metric} solve stalled after {iterations} iterations \
         (residual {residual:.3e}, target {target:.3e})"
    )]
    SolverStalled {
        metric: &'static str,
        iterations: usize,
        residual: f64,
        target: f64,
    },

    #[error(
        "{metric} metric is not positive definite \
         (negative curvature at CG iteration {iteration}); \
         the trapping potential may violate the admissibility condition"
    )]
    IndefiniteMetric {
        metric: &'static str,
        iteration: usize,
    },

    #[error(
        "energy dissipation bound violated at iteration {iteration}: \
         decrease {decrease:.6e} < required {required:.6e} (step {alpha})"
    )]
    DissipationViolated {
        iteration: usize,
        decrease: f64,
        required: f64,
        alpha: f64,
    },

    #[error("convergence-rate estimate needs positive errors, found {value} at index {index}")]
    NonPositiveError { index: usize, value: f64 },

    #[error("convergence-rate estimate over a window of {window} needs at least {} entries, got {got}", window + 1)]
    TooFewErrors { window: usize, got: usize },

    #[error("field file: {0}")]
    FieldFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, GpError>;
