//! The hard-instance families: Γ, the chain matrix, the scaled deterministic
//! instance, the block finite-sum instance and the linear case-1 instance.

mod case1;
mod chain;
mod deterministic;
mod finite_sum;
mod gamma;
mod smoothness;
mod spec;

pub use case1::Case1Instance;
pub use chain::ChainMatrix;
pub use deterministic::{ChainFunction, DeterministicInstance};
pub use finite_sum::{BlockEmbedding, FiniteSumInstance};
pub use gamma::{gamma, gamma_prime};
pub use smoothness::{estimate_smoothness, SmoothnessEstimate};
pub use spec::{HardInstanceSpec, InstanceMode};

use crate::error::Result;
use crate::problem::SaddleProblem;

pub fn make_deterministic_instance(spec: &HardInstanceSpec) -> Result<DeterministicInstance> {
    DeterministicInstance::new(spec)
}

pub fn make_finite_sum_instance(spec: &HardInstanceSpec) -> Result<FiniteSumInstance> {
    FiniteSumInstance::new(spec)
}

pub fn make_case1_instance(
    n: usize,
    l: f64,
    mu: f64,
    delta: f64,
    d_total: usize,
) -> Result<Case1Instance> {
    Case1Instance::from_params(n, l, mu, delta, d_total)
}

/// Builds the instance described by a [`HardInstanceSpec`].
pub fn build_instance(spec: &HardInstanceSpec) -> Result<Box<dyn SaddleProblem + Send + Sync>> {
    Ok(match spec.mode {
        InstanceMode::Deterministic => Box::new(DeterministicInstance::new(spec)?),
        InstanceMode::FiniteSum => Box::new(FiniteSumInstance::new(spec)?),
        InstanceMode::Case1 => Box::new(Case1Instance::new(spec)?),
    })
}
