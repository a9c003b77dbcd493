//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("x = {0} is outside [0, 1]")]
    XOutOfRange(f64),

    #[error("invalid boundary graph: {0}")]
    InvalidBoundary(String),

    #[error("grid too coarse: need n >= {min}, got {n}")]
    GridTooCoarse { n: usize, min: usize },

    #[error("domain thinner than two cells at column {column} (top row {j_top})")]
    DomainTooThin { column: usize, j_top: usize },

    #[error("kernel arguments outside the triangle 0 <= xi <= y <= 1: y = {y}, xi = {xi}")]
    OutsideTriangle { y: f64, xi: f64 },

    #[error("|lambda| = {0} exceeds the supported cap 200")]
    LambdaTooLarge(f64),

    #[error("iteration did not converge after {iterations} sweeps (last change {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("dt = {dt:.6e} exceeds the stability bound h^2/(4 + |lambda| h^2) = {dt_max:.6e}")]
    CflViolation { dt: f64, dt_max: f64 },

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    #[error("unknown initial condition kind: {0}")]
    UnknownInitialCondition(String),

    #[error("state diverged (non-finite value) at step {step}")]
    Diverged { step: usize },

    #[error("kernel table does not match grid: {0}")]
    KernelMismatch(String),

    #[error("inverse transform diagonal nearly singular at row {row}: 1 - (h/2) K_jj = {value:.3e}")]
    SingularDiagonal { row: usize, value: f64 },

    #[error("need at least {min} snapshots, got {got}")]
    TooFewSnapshots { got: usize, min: usize },

    #[error("snapshot times are not equally spaced")]
    UnevenSnapshots,

    #[error("decay-rate window must contain at least {min} usable samples, got {got}")]
    WindowTooSmall { got: usize, min: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
