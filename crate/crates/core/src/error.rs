use thiserror::Error;

/// Coarse classification of failures, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad input: dimensions, configuration, series shapes.
    Input,
    /// The model could not be evaluated or its equilibrium could not be found.
    Model,
    /// The Hopf point could not be located or violates the non-resonance assumption.
    Hopf,
    /// The order-by-order solve broke down.
    Solvability,
    /// No expansion amplitude reproduces the requested delay.
    EpsilonRoot,
    /// Numerical integration or comparison against it failed.
    Validation,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operation requires scalar (dim = 1) trigonometric polynomials, found dim {0}")]
    NotScalar(usize),

    #[error("series order mismatch: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },

    #[error("leading series coefficient must be a constant, found harmonics of size {0:e}")]
    NonConstantLeading(f64),

    #[error("division by a series with zero leading coefficient")]
    ZeroLeading,

    #[error("{function} is undefined at {value}")]
    Domain { function: &'static str, value: f64 },

    #[error("delay shift mismatch: series starts at {found}, expected {expected}")]
    ShiftMismatch { expected: f64, found: f64 },

    #[error("equilibrium Newton iteration did not converge at lambda = {lambda} after {iterations} iterations")]
    EquilibriumNonConvergence { lambda: f64, iterations: usize },

    #[error("singular Jacobian while {0}")]
    SingularJacobian(&'static str),

    #[error("Hopf Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    HopfNonConvergence { iterations: usize, residual: f64 },

    #[error("Hopf frequency must be positive, found {0}")]
    NonPositiveFrequency(f64),

    #[error("harmonic {harmonic} of the critical frequency is also a characteristic root")]
    Resonance { harmonic: usize },

    #[error("degenerate null-space basis: {0}")]
    DegenerateBasis(&'static str),

    #[error("solvability matrix is singular (|det| = {det:e})")]
    SolvabilitySingular { det: f64 },

    #[error("harmonic block {harmonic} of the linear operator is singular")]
    SingularBlock { harmonic: usize },

    #[error("forcing is not orthogonal to the adjoint null space (least-squares residual {residual:e})")]
    SolvabilityViolated { residual: f64 },

    #[error("homogeneous correction is degenerate (|det| = {det:e})")]
    DegenerateNormalization { det: f64 },

    #[error("harmonic {harmonic} exceeds the degree bound {bound} (relative size {size:e})")]
    DegreeBound { harmonic: usize, bound: usize, size: f64 },

    #[error("at expansion order {order}: {source}")]
    AtOrder {
        order: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("delay {lambda} is below the bifurcation threshold {lambda0}; no periodic orbit on this side")]
    BelowThreshold { lambda: f64, lambda0: f64 },

    #[error("no real amplitude root for delay {lambda}; the delay lies beyond the validity of the series")]
    NoEpsilonRoot { lambda: f64 },

    #[error("integrator step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("integrator produced a non-finite state at t = {t}")]
    NonFinite { t: f64 },

    #[error("trajectory did not reach a steady oscillation: {0}")]
    NotConverged(String),

    #[error("period mismatch between expansion ({expansion}) and integration ({numeric})")]
    PeriodMismatch { expansion: f64, numeric: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        use Error::*;
        match self {
            DimensionMismatch { .. }
            | NotScalar(_)
            | OrderMismatch { .. }
            | NonConstantLeading(_)
            | ZeroLeading
            | ShiftMismatch { .. }
            | InvalidInput(_)
            | Json(_) => ErrorKind::Input,
            Domain { .. } | EquilibriumNonConvergence { .. } | SingularJacobian(_) => ErrorKind::Model,
            HopfNonConvergence { .. } | NonPositiveFrequency(_) | Resonance { .. } | DegenerateBasis(_) => {
                ErrorKind::Hopf
            }
            SolvabilitySingular { .. }
            | SingularBlock { .. }
            | SolvabilityViolated { .. }
            | DegenerateNormalization { .. }
            | DegreeBound { .. } => ErrorKind::Solvability,
            AtOrder { source, .. } => match source.kind() {
                ErrorKind::Input => ErrorKind::Solvability,
                other => other,
            },
            BelowThreshold { .. } | NoEpsilonRoot { .. } => ErrorKind::EpsilonRoot,
            StepUnderflow { .. } | NonFinite { .. } | NotConverged(_) | PeriodMismatch { .. } => {
                ErrorKind::Validation
            }
        }
    }

    pub(crate) fn at_order(self, order: usize) -> Self {
        Error::AtOrder { order, source: Box::new(self) }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
