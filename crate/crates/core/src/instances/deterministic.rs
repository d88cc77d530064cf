use super::chain::ChainMatrix;
use super::gamma::{gamma, gamma_prime};
use super::spec::{HardInstanceSpec, InstanceMode};
use crate::error::{Error, Result};
use crate::linalg;
use crate::problem::SaddleProblem;

/// Unscaled chain function
///
/// ```text
/// H_d(x, y) = λ₁⟨Bx, y⟩ − λ₂‖y‖² − (λ₁²√α/2λ₂)x₁ − (λ₁²α/4λ₂)x²_{d+1} + λ₁²√α/4λ₂
/// F_d(x, y) = H_d(x, y) + (λ₁²α/2λ₂) Σ_{i≤d} Γ(xᵢ)
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainFunction {
    pub b: ChainMatrix,
    pub lambda1: f64,
    pub lambda2: f64,
    lin: f64,
    quad: f64,
    offset: f64,
    gamma_weight: f64,
}

impl ChainFunction {
    pub fn new(d: usize, lambda1: f64, lambda2: f64, alpha: f64) -> Result<Self> {
        if !(lambda1 > 0.0 && lambda2 > 0.0) {
            return Err(Error::InvalidSpec("lambda1 and lambda2 must be positive".into()));
        }
        let b = ChainMatrix::new(d, alpha)?;
        let r = lambda1 * lambda1 / lambda2;
        let sqrt_alpha = alpha.sqrt();
        Ok(Self {
            b,
            lambda1,
            lambda2,
            lin: r * sqrt_alpha / 2.0,
            quad: r * alpha / 4.0,
            offset: r * sqrt_alpha / 4.0,
            gamma_weight: r * alpha / 2.0,
        })
    }

    pub fn d(&self) -> usize {
        self.b.d()
    }

    pub fn alpha(&self) -> f64 {
        self.b.alpha()
    }

    /// Weight `λ₁²α/2λ₂` of the Γ penalty.
    pub fn gamma_weight(&self) -> f64 {
        self.gamma_weight
    }

    /// `max{200λ₁²α/λ₂, 2λ₁, 2λ₂}`.
    pub fn smoothness(&self) -> f64 {
        let l = self.lambda1;
        (200.0 * l * l * self.alpha() / self.lambda2)
            .max(2.0 * l)
            .max(2.0 * self.lambda2)
    }

    pub fn h_value(&self, x: &[f64], y: &[f64]) -> f64 {
        let d = self.d();
        let mut bx = vec![0.0; d + 2];
        self.b.apply_into(x, &mut bx);
        self.lambda1 * linalg::dot(&bx, y) - self.lambda2 * linalg::norm_sq(y) - self.lin * x[0]
            - self.quad * x[d] * x[d]
            + self.offset
    }

    pub fn h_grad(&self, x: &[f64], y: &[f64], gx: &mut [f64], gy: &mut [f64]) {
        let d = self.d();
        self.b.apply_t_into(y, gx);
        linalg::scale(self.lambda1, gx);
        gx[0] -= self.lin;
        gx[d] -= 2.0 * self.quad * x[d];
        self.b.apply_into(x, gy);
        for (g, v) in gy.iter_mut().zip(y) {
            *g = self.lambda1 * *g - 2.0 * self.lambda2 * v;
        }
    }

    pub fn gamma_sum(&self, x: &[f64]) -> f64 {
        x[..self.d()].iter().map(|v| gamma(*v)).sum()
    }

    /// Adds `weight · Γ'(xᵢ)` for `i < d`.
    pub fn add_gamma_grad(&self, weight: f64, x: &[f64], gx: &mut [f64]) {
        for (g, v) in gx[..self.d()].iter_mut().zip(x) {
            *g += weight * gamma_prime(*v);
        }
    }

    pub fn value(&self, x: &[f64], y: &[f64]) -> f64 {
        self.h_value(x, y) + self.gamma_weight * self.gamma_sum(x)
    }

    pub fn grad(&self, x: &[f64], y: &[f64], gx: &mut [f64], gy: &mut [f64]) {
        self.h_grad(x, y, gx, gy);
        self.add_gamma_grad(self.gamma_weight, x, gx);
    }

    /// `y*(x) = (λ₁/2λ₂) B x`
    pub fn best_response_into(&self, x: &[f64], out: &mut [f64]) {
        self.b.apply_into(x, out);
        linalg::scale(self.lambda1 / (2.0 * self.lambda2), out);
    }

    /// `Φ_d(x)` and `∇Φ_d(x)`.
    pub fn primal(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let d = self.d();
        let c = self.lambda1 * self.lambda1 / (2.0 * self.lambda2);
        self.b.gram_apply_into(x, grad);
        linalg::scale(c, grad);
        grad[0] -= self.lin;
        grad[d] -= 2.0 * self.quad * x[d];
        self.add_gamma_grad(self.gamma_weight, x, grad);
        0.5 * c * self.b.norm_sq_of_apply(x) - self.lin * x[0] - self.quad * x[d] * x[d]
            + self.offset
            + self.gamma_weight * self.gamma_sum(x)
    }
}

/// `f(x, y) = η² F_d(x/η, y/η)` over `R^{d+1} × R^{d+2}`.
#[derive(Debug, Clone)]
pub struct DeterministicInstance {
    chain: ChainFunction,
    eta: f64,
    l: f64,
    mu: f64,
    spec: Option<HardInstanceSpec>,
}

impl DeterministicInstance {
    pub fn new(spec: &HardInstanceSpec) -> Result<Self> {
        if spec.mode != InstanceMode::Deterministic {
            return Err(Error::InvalidSpec(format!(
                "expected a deterministic spec, got {}",
                spec.mode
            )));
        }
        spec.validate()?;
        Ok(Self {
            chain: ChainFunction::new(spec.d, spec.lambda1, spec.lambda2, spec.alpha)?,
            eta: spec.eta,
            l: spec.l,
            mu: spec.mu,
            spec: Some(spec.clone()),
        })
    }

    /// Raw `F_d(·; λ, α)` with `η = 1`; advertises `L_F = max{200λ₁²α/λ₂, 2λ₁, 2λ₂}`
    /// and `μ_F = 2λ₂`.
    pub fn unscaled(d: usize, lambda1: f64, lambda2: f64, alpha: f64) -> Result<Self> {
        let chain = ChainFunction::new(d, lambda1, lambda2, alpha)?;
        Ok(Self {
            l: chain.smoothness(),
            mu: 2.0 * lambda2,
            chain,
            eta: 1.0,
            spec: None,
        })
    }

    pub fn chain(&self) -> &ChainFunction {
        &self.chain
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn d(&self) -> usize {
        self.chain.d()
    }

    pub fn spec(&self) -> Option<&HardInstanceSpec> {
        self.spec.as_ref()
    }

    fn unscale(&self, v: &[f64]) -> Vec<f64> {
        v.iter().map(|a| a / self.eta).collect()
    }
}

impl SaddleProblem for DeterministicInstance {
    fn dim_x(&self) -> usize {
        self.chain.d() + 1
    }
    fn dim_y(&self) -> usize {
        self.chain.d() + 2
    }
    fn smoothness(&self) -> f64 {
        self.l
    }
    fn strong_concavity(&self) -> f64 {
        self.mu
    }
    fn value(&self, x: &[f64], y: &[f64]) -> f64 {
        self.eta * self.eta * self.chain.value(&self.unscale(x), &self.unscale(y))
    }
    fn grad(&self, x: &[f64], y: &[f64], gx: &mut [f64], gy: &mut [f64]) {
        if self.eta == 1.0 {
            self.chain.grad(x, y, gx, gy);
            return;
        }
        self.chain.grad(&self.unscale(x), &self.unscale(y), gx, gy);
        linalg::scale(self.eta, gx);
        linalg::scale(self.eta, gy);
    }
    fn primal(&self, x: &[f64], grad: &mut [f64]) -> Option<f64> {
        let v = self.chain.primal(&self.unscale(x), grad);
        linalg::scale(self.eta, grad);
        Some(self.eta * self.eta * v)
    }
    fn best_response(&self, x: &[f64]) -> Option<Vec<f64>> {
        // y* is linear in x, so scaling cancels
        let mut out = vec![0.0; self.dim_y()];
        self.chain.best_response_into(x, &mut out);
        Some(out)
    }
    fn sampling_scale(&self) -> f64 {
        self.eta
    }
}
