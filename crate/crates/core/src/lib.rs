//! Nonconvex-strongly-concave minimax toolkit: hard instances with exact
//! oracle accounting, baseline saddle solvers and two-level Catalyst
//! acceleration.

pub mod catalyst;
pub mod error;
pub mod instances;
pub mod linalg;
pub mod metrics;
pub mod oracle;
pub mod problem;
pub mod solvers;

pub use error::{Error, Result};
pub use oracle::{finite_difference_check, wrap_with_logging, Logged, OracleLog, TailRule};
pub use problem::{Gradient, Regularized, SaddlePoint, SaddleProblem};
