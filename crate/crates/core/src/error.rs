use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid instance spec: {0}")]
    InvalidSpec(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("iterate diverged at iteration {iteration}")]
    Divergence { iteration: usize },

    #[error("budget of {budget} iterations exhausted; best squared gradient norm {best_grad_sq:e}")]
    BudgetExceeded { budget: usize, best_grad_sq: f64 },

    #[error("inner loop hit K_max = {k_max}; best ratio {best_ratio:e} against target {target:e}")]
    InnerLoopExceeded {
        k_max: usize,
        best_ratio: f64,
        target: f64,
    },

    #[error("svrg needs a finite-sum problem with more than one component; use extragradient instead")]
    NeedsComponents,

    #[error("linear-span protocol violated: coordinate {coord} of {block} activated at call {call} without prior support")]
    ProtocolViolation {
        block: &'static str,
        coord: usize,
        call: u64,
    },

    #[error("scaling fit needs at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("ascent for y*(x) did not converge: gradient norm {residual:e} after {iterations} steps")]
    AscentNotConverged { residual: f64, iterations: usize },

    #[error("operation interrupted by the oracle (budget or monitor)")]
    Interrupted,
}

pub type Result<T> = std::result::Result<T, Error>;
