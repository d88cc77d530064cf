//! Stationarity measurement, lower-bound verification and scaling fits.

mod lower_bound;
mod primal;
mod scaling;
mod trace;

pub use lower_bound::{
    measure_run, tail_rule, verify_lower_bound, Algorithm, FloorCheck, LowerBoundReport, LowerBoundRow, MeasureConfig,
};
pub use primal::{maximize_y, primal_grad_norm, AscentResult, PrimalGradNorm};
pub use scaling::{average_by_kappa, fit_scaling, MIN_SCALING_POINTS};
pub use trace::{RunTrace, TraceRow};
