use thiserror::Error;

/// Errors surfaced by the simulation and verification routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid size {grid} too small for max mode {max_mode} (need at least {needed})")]
    GridTooSmall {
        grid: usize,
        max_mode: usize,
        needed: usize,
    },
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("state became non-finite at step {step} (t = {time})")]
    BlowUp { step: usize, time: f64 },
    #[error("effective sample size {ess:.2} below the minimum {min:.0}; ensemble statistics refused")]
    InsufficientEss { ess: f64, min: f64 },
    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("power iteration failed to converge after {0} steps")]
    NonConvergence(usize),
    #[error("malformed file: {0}")]
    Format(String),
    #[error("observable parse error: {0}")]
    ObservableParse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
