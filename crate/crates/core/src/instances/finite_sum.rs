use super::deterministic::ChainFunction;
use super::spec::{HardInstanceSpec, InstanceMode};
use crate::error::{Error, Result};
use crate::linalg;
use crate::problem::SaddleProblem;

/// Block layout of the finite-sum instance: `U^(i)x` is the length-`d+1` slice
/// of `x` at offset `i(d+1)`, `V^(i)y` the length-`d+2` slice of `y` at
/// offset `i(d+2)` (0-based `i`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockEmbedding {
    pub n: usize,
    pub block_x: usize,
    pub block_y: usize,
}

impl BlockEmbedding {
    pub fn new(n: usize, d: usize) -> Self {
        Self {
            n,
            block_x: d + 1,
            block_y: d + 2,
        }
    }

    pub fn x_range(&self, i: usize) -> std::ops::Range<usize> {
        i * self.block_x..(i + 1) * self.block_x
    }

    pub fn y_range(&self, i: usize) -> std::ops::Range<usize> {
        i * self.block_y..(i + 1) * self.block_y
    }

    pub fn dim_x(&self) -> usize {
        self.n * self.block_x
    }

    pub fn dim_y(&self) -> usize {
        self.n * self.block_y
    }

    /// `U^(i) x`
    pub fn restrict_x<'a>(&self, i: usize, x: &'a [f64]) -> &'a [f64] {
        &x[self.x_range(i)]
    }

    /// `(U^(i))ᵀ u`, written into a zeroed vector.
    pub fn extend_x(&self, i: usize, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim_x()];
        out[self.x_range(i)].copy_from_slice(u);
        out
    }
}

/// `fᵢ(x, y) = η²[H_d(U^(i)x/η, V^(i)y/η) + (λ₁²α/2nλ₂)Γ_d^n(x/η)]`, where
/// `Γ_d^n` sums Γ over the first `d` coordinates of every x-block.
#[derive(Debug, Clone)]
pub struct FiniteSumInstance {
    chain: ChainFunction,
    blocks: BlockEmbedding,
    eta: f64,
    l: f64,
    mu: f64,
    spec: HardInstanceSpec,
}

impl FiniteSumInstance {
    pub fn new(spec: &HardInstanceSpec) -> Result<Self> {
        if spec.mode != InstanceMode::FiniteSum {
            return Err(Error::InvalidSpec(format!(
                "expected a finite-sum spec, got {}",
                spec.mode
            )));
        }
        spec.validate()?;
        Ok(Self {
            chain: ChainFunction::new(spec.d, spec.lambda1, spec.lambda2, spec.alpha)?,
            blocks: BlockEmbedding::new(spec.n, spec.d),
            eta: spec.eta,
            l: spec.l,
            mu: spec.mu,
            spec: spec.clone(),
        })
    }

    pub fn blocks(&self) -> BlockEmbedding {
        self.blocks
    }

    pub fn chain(&self) -> &ChainFunction {
        &self.chain
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn spec(&self) -> &HardInstanceSpec {
        &self.spec
    }

    fn shared_gamma_weight(&self) -> f64 {
        self.chain.gamma_weight() / self.blocks.n as f64
    }

    fn unscale(&self, v: &[f64]) -> Vec<f64> {
        v.iter().map(|a| a / self.eta).collect()
    }

    /// Unscaled `Γ_d^n` contribution to `∇ₓ`, weighted.
    fn add_shared_gamma_grad(&self, weight: f64, xs: &[f64], gx: &mut [f64]) {
        for i in 0..self.blocks.n {
            let r = self.blocks.x_range(i);
            self.chain.add_gamma_grad(weight, &xs[r.clone()], &mut gx[r]);
        }
    }

    fn shared_gamma_sum(&self, xs: &[f64]) -> f64 {
        (0..self.blocks.n)
            .map(|i| self.chain.gamma_sum(&xs[self.blocks.x_range(i)]))
            .sum()
    }

    fn component_value(&self, i: usize, xs: &[f64], ys: &[f64]) -> f64 {
        self.chain
            .h_value(&xs[self.blocks.x_range(i)], &ys[self.blocks.y_range(i)])
            + self.shared_gamma_weight() * self.shared_gamma_sum(xs)
    }

    /// `∇Φ` assembled as `(1/n) Σᵢ (U^(i))ᵀ ∇Φ(U^(i)x)` one block at a time.
    pub fn primal_blockwise_grad(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.blocks.dim_x()];
        let n = self.blocks.n as f64;
        for i in 0..self.blocks.n {
            let u: Vec<f64> = self.blocks.restrict_x(i, x).to_vec();
            let mut g = vec![0.0; self.blocks.block_x];
            let _ = self.chain.primal(&self.unscale(&u), &mut g);
            linalg::scale(self.eta / n, &mut g);
            let lifted = self.blocks.extend_x(i, &g);
            linalg::axpy(1.0, &lifted, &mut out);
        }
        out
    }
}

impl SaddleProblem for FiniteSumInstance {
    fn dim_x(&self) -> usize {
        self.blocks.dim_x()
    }
    fn dim_y(&self) -> usize {
        self.blocks.dim_y()
    }
    fn n_components(&self) -> usize {
        self.blocks.n
    }
    fn smoothness(&self) -> f64 {
        self.l
    }
    fn strong_concavity(&self) -> f64 {
        self.mu
    }
    fn value(&self, x: &[f64], y: &[f64]) -> f64 {
        let (xs, ys) = (self.unscale(x), self.unscale(y));
        let h: f64 = (0..self.blocks.n)
            .map(|i| {
                self.chain
                    .h_value(&xs[self.blocks.x_range(i)], &ys[self.blocks.y_range(i)])
            })
            .sum();
        let n = self.blocks.n as f64;
        self.eta * self.eta * (h / n + self.shared_gamma_weight() * self.shared_gamma_sum(&xs))
    }
    fn grad(&self, x: &[f64], y: &[f64], gx: &mut [f64], gy: &mut [f64]) {
        let (xs, ys) = (self.unscale(x), self.unscale(y));
        let n = self.blocks.n as f64;
        for i in 0..self.blocks.n {
            let (rx, ry) = (self.blocks.x_range(i), self.blocks.y_range(i));
            self.chain
                .h_grad(&xs[rx.clone()], &ys[ry.clone()], &mut gx[rx.clone()], &mut gy[ry.clone()]);
            linalg::scale(1.0 / n, &mut gx[rx]);
            linalg::scale(1.0 / n, &mut gy[ry]);
        }
        self.add_shared_gamma_grad(self.shared_gamma_weight(), &xs, gx);
        linalg::scale(self.eta, gx);
        linalg::scale(self.eta, gy);
    }
    fn component_grad(&self, i: usize, x: &[f64], y: &[f64], gx: &mut [f64], gy: &mut [f64]) {
        let (xs, ys) = (self.unscale(x), self.unscale(y));
        gx.iter_mut().for_each(|v| *v = 0.0);
        gy.iter_mut().for_each(|v| *v = 0.0);
        let (rx, ry) = (self.blocks.x_range(i), self.blocks.y_range(i));
        self.chain
            .h_grad(&xs[rx.clone()], &ys[ry.clone()], &mut gx[rx], &mut gy[ry]);
        self.add_shared_gamma_grad(self.shared_gamma_weight(), &xs, gx);
        linalg::scale(self.eta, gx);
        linalg::scale(self.eta, gy);
    }
    fn primal(&self, x: &[f64], grad: &mut [f64]) -> Option<f64> {
        let xs = self.unscale(x);
        let n = self.blocks.n as f64;
        let mut total = 0.0;
        for i in 0..self.blocks.n {
            let r = self.blocks.x_range(i);
            total += self.chain.primal(&xs[r.clone()], &mut grad[r]);
        }
        linalg::scale(self.eta / n, grad);
        Some(self.eta * self.eta * total / n)
    }
    fn best_response(&self, x: &[f64]) -> Option<Vec<f64>> {
        let mut out = vec![0.0; self.dim_y()];
        for i in 0..self.blocks.n {
            let (rx, ry) = (self.blocks.x_range(i), self.blocks.y_range(i));
            self.chain.best_response_into(&x[rx], &mut out[ry]);
        }
        Some(out)
    }
    fn sampling_scale(&self) -> f64 {
        self.eta
    }
}

impl FiniteSumInstance {
    /// Value of component `i` (used by tests and the verify suite).
    pub fn component_value_at(&self, i: usize, x: &[f64], y: &[f64]) -> f64 {
        self.eta * self.eta * self.component_value(i, &self.unscale(x), &self.unscale(y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn instance() -> FiniteSumInstance {
        let spec = HardInstanceSpec::finite_sum(3, 12.0, 1.0, 1.0, 0.01, Some(4)).unwrap();
        FiniteSumInstance::new(&spec).unwrap()
    }

    #[test]
    fn embedding_is_orthogonal_slicing() {
        let b = BlockEmbedding::new(3, 4);
        assert_eq!(b.x_range(1), 5..10);
        assert_eq!(b.y_range(2), 12..18);
        let u = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let lifted = b.extend_x(1, &u);
        assert_eq!(b.restrict_x(1, &lifted), &u[..]);
        assert!(b.restrict_x(0, &lifted).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn y_gradient_lives_on_own_block() {
        let f = instance();
        let x: Vec<f64> = (0..15).map(|i| 0.01 * (i as f64).cos()).collect();
        let y: Vec<f64> = (0..18).map(|i| 0.01 * (i as f64).sin()).collect();
        let mut gx = vec![0.0; 15];
        let mut gy = vec![0.0; 18];
        for i in 0..3 {
            f.component_grad(i, &x, &y, &mut gx, &mut gy);
            for (j, v) in gy.iter().enumerate() {
                if !f.blocks().y_range(i).contains(&j) {
                    assert_eq!(*v, 0.0);
                }
            }
        }
    }

    #[test]
    fn average_of_component_values() {
        let f = instance();
        let x: Vec<f64> = (0..15).map(|i| 0.02 * (i as f64 + 0.3).cos()).collect();
        let y: Vec<f64> = (0..18).map(|i| 0.02 * (i as f64).sin()).collect();
        let avg = (0..3).map(|i| f.component_value_at(i, &x, &y)).sum::<f64>() / 3.0;
        assert!((avg - f.value(&x, &y)).abs() <= 1e-12 * (1.0 + avg.abs()));
    }
}
