/// Linear-rate model `(1 − 1/Λ)^N` of a subproblem solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateModel {
    pub lambda_m: f64,
}

impl RateModel {
    pub const MIN_LAMBDA: f64 = 2.0;

    /// `(L + max{2L, τ}) / (4 min{L, μ+τ})`
    pub fn extragradient(l: f64, mu: f64, tau: f64) -> Self {
        Self {
            lambda_m: (l + (2.0 * l).max(tau)) / (4.0 * l.min(mu + tau)),
        }
    }

    /// `n + ((L + √2 max{2L, τ}) / min{L, μ+τ})²`, known only up to a constant.
    pub fn svrg(n: usize, l: f64, mu: f64, tau: f64) -> Self {
        let r = (l + std::f64::consts::SQRT_2 * (2.0 * l).max(tau)) / l.min(mu + tau);
        Self {
            lambda_m: n as f64 + r * r,
        }
    }

    /// Λ clamped to at least 2 so that `1 − 1/Λ` is a usable contraction.
    pub fn effective(&self) -> f64 {
        self.lambda_m.max(Self::MIN_LAMBDA)
    }

    pub fn contraction(&self) -> f64 {
        1.0 - 1.0 / self.effective()
    }

    /// Smallest `N` with `(1 − 1/Λ)^N ≤ reduction`.
    pub fn iterations_for(&self, reduction: f64) -> usize {
        if reduction >= 1.0 {
            return 0;
        }
        (reduction.ln() / self.contraction().ln()).ceil() as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eg_constant_below_one_is_clamped() {
        let r = RateModel::extragradient(10.0, 1.0, 9.0);
        assert!((r.lambda_m - 0.75).abs() < 1e-15);
        assert_eq!(r.effective(), 2.0);
        assert_eq!(r.iterations_for(0.25), 2);
    }

    #[test]
    fn svrg_constant() {
        let r = RateModel::svrg(4, 1.0, 1.0, 0.0);
        let expected = 4.0 + (1.0 + 2.0 * std::f64::consts::SQRT_2).powi(2);
        assert!((r.lambda_m - expected).abs() < 1e-12);
    }
}
