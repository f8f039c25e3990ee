use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("topology error: {0}")]
    Topology(String),

    #[error("objective error: {0}")]
    Objective(String),

    #[error("oracle error: {0}")]
    Oracle(String),

    #[error("schedule error: {0}")]
    Schedule(String),

    #[error("step size {alpha} exceeds the claimed range (max {max}); bound not evaluated")]
    StepOutOfRange { alpha: f64, max: f64 },

    #[error("run diverged at iteration {k}")]
    Diverged { k: u64 },

    #[error("analysis error: {0}")]
    Analysis(String),

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
