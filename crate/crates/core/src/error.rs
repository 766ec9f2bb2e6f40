use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("degenerate geometry: PU/SU distance is zero")]
    DegenerateGeometry,

    #[error("causality violated: action cost {cost:.4} exceeds battery level {level:.4}")]
    CausalityViolated { cost: f64, level: f64 },

    #[error("warmup incomplete: buffer holds {have} transitions, batch needs {need}")]
    WarmupIncomplete { have: usize, need: usize },

    #[error("discretization too coarse: {0}")]
    DiscretizationTooCoarse(String),

    #[error("transition row (state {state}, action {action}) sums to {sum}, expected 1")]
    NonStochasticRow {
        state: usize,
        action: usize,
        sum: f64,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid sweep axis `{0}` (expected `b_max` or `p_pu`)")]
    InvalidSweepAxis(String),

    #[error("missing series for scheme(s): {0}")]
    MissingScheme(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("corrupt weight file: {0}")]
    BadWeightFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, SimError>;
