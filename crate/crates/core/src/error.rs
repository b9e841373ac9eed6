use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("field length {got} does not match grid size {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("singular complex-kink profile: x1 hits the pole of branch k = {k}")]
    SingularProfile { k: i64 },

    #[error("operation not supported for profile kind {0}")]
    UnsupportedKind(String),

    #[error("ill-posed linear solve: {what} pairing is {value:e}")]
    IllPosed { what: &'static str, value: f64 },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("solution of {what} does not decay at the grid edge (|u| = {edge:e})")]
    NotDecaying { what: &'static str, edge: f64 },

    #[error("boundary limit is not stationary (spread {spread:e})")]
    LimitUndefined { spread: f64 },

    #[error("{what} violates its Backlund relation (sup residual {residual:e})")]
    InputResidual { what: &'static str, residual: f64 },

    #[error("double Backlund composition is singular")]
    CompositionSingular,

    #[error("time step {dt} violates the CFL bound 0.5*h = {bound}")]
    Cfl { dt: f64, bound: f64 },

    #[error("state is outside the modulation neighborhood (distance {distance:e})")]
    OutOfNeighborhood { distance: f64 },

    #[error("modulation Jacobian is singular (det {det:e})")]
    SingularJacobian { det: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
