use super::spec::{HardInstanceSpec, InstanceMode};
use crate::error::{Error, Result};
use crate::linalg;
use crate::problem::SaddleProblem;

/// `hᵢ(x, y) = θ⟨vᵢ, x⟩ + L⟨x, y⟩ − (μ/2)‖y‖²`, with `vᵢ` the indicator of
/// the `i`-th of `n` equal coordinate blocks.
#[derive(Debug, Clone)]
pub struct Case1Instance {
    n: usize,
    dim: usize,
    theta: f64,
    l: f64,
    mu: f64,
    spec: HardInstanceSpec,
}

impl Case1Instance {
    pub fn new(spec: &HardInstanceSpec) -> Result<Self> {
        if spec.mode != InstanceMode::Case1 {
            return Err(Error::InvalidSpec(format!("expected a case1 spec, got {}", spec.mode)));
        }
        spec.validate()?;
        Ok(Self {
            n: spec.n,
            dim: spec.d,
            theta: spec.theta,
            l: spec.l,
            mu: spec.mu,
            spec: spec.clone(),
        })
    }

    pub fn from_params(n: usize, l: f64, mu: f64, delta: f64, d_total: usize) -> Result<Self> {
        Self::new(&HardInstanceSpec::case1(n, l, mu, delta, d_total)?)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn block_len(&self) -> usize {
        self.dim / self.n
    }

    pub fn block(&self, i: usize) -> std::ops::Range<usize> {
        i * self.block_len()..(i + 1) * self.block_len()
    }

    pub fn spec(&self) -> &HardInstanceSpec {
        &self.spec
    }

    /// `x* = −(μθ/(L²n)) Σ vᵢ`
    pub fn primal_minimizer(&self) -> Vec<f64> {
        vec![-self.mu * self.theta / (self.l * self.l * self.n as f64); self.dim]
    }

    /// `(θ/n)√(d/2)`, the gradient floor while at most `n/2` blocks are touched.
    pub fn gradient_floor(&self) -> f64 {
        self.theta / self.n as f64 * (self.dim as f64 / 2.0).sqrt()
    }
}

impl SaddleProblem for Case1Instance {
    fn dim_x(&self) -> usize {
        self.dim
    }
    fn dim_y(&self) -> usize {
        self.dim
    }
    fn n_components(&self) -> usize {
        self.n
    }
    fn smoothness(&self) -> f64 {
        self.l.max(self.mu)
    }
    fn strong_concavity(&self) -> f64 {
        self.mu
    }
    fn value(&self, x: &[f64], y: &[f64]) -> f64 {
        let lin: f64 = x.iter().sum::<f64>() * self.theta / self.n as f64;
        lin + self.l * linalg::dot(x, y) - 0.5 * self.mu * linalg::norm_sq(y)
    }
    fn grad(&self, x: &[f64], y: &[f64], gx: &mut [f64], gy: &mut [f64]) {
        let c = self.theta / self.n as f64;
        for j in 0..self.dim {
            gx[j] = c + self.l * y[j];
            gy[j] = self.l * x[j] - self.mu * y[j];
        }
    }
    fn component_grad(&self, i: usize, x: &[f64], y: &[f64], gx: &mut [f64], gy: &mut [f64]) {
        for j in 0..self.dim {
            gx[j] = self.l * y[j];
            gy[j] = self.l * x[j] - self.mu * y[j];
        }
        for j in self.block(i) {
            gx[j] += self.theta;
        }
    }
    fn primal(&self, x: &[f64], grad: &mut [f64]) -> Option<f64> {
        let q = self.l * self.l / self.mu;
        let c = self.theta / self.n as f64;
        for (g, v) in grad.iter_mut().zip(x) {
            *g = q * v + c;
        }
        Some(0.5 * q * linalg::norm_sq(x) + c * x.iter().sum::<f64>())
    }
    fn best_response(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(x.iter().map(|v| self.l / self.mu * v).collect())
    }
    fn sampling_scale(&self) -> f64 {
        self.mu * self.theta / (self.l * self.l * self.n as f64)
    }
}
