use super::{build_aux_problem, inner_loop, CatalystConfig};
use crate::error::{Error, Result};
use crate::linalg;
use crate::problem::{SaddlePoint, SaddleProblem};

/// Approximate `prox_{Φ/2L}(x) = argmin_z Φ(z) + L‖z − x‖²` whose distance to
/// the true prox is at most `accuracy / (2L)`.
pub fn prox_point(problem: &(impl SaddleProblem + ?Sized), x: &[f64], accuracy: f64) -> Result<Vec<f64>> {
    if !(accuracy > 0.0) {
        return Err(Error::InvalidConfig("accuracy must be positive".into()));
    }
    let l = problem.smoothness();
    let mu = problem.strong_concavity();
    if problem.has_primal() {
        return prox_closed_form(problem, x, accuracy, l, mu);
    }
    // min_z max_y f(z, y) + L‖z − x‖² is (L, μ)-SC-SC; a gradient of size g
    // certifies ‖z − z*‖ ≤ g / min{L, μ}
    let aux = build_aux_problem(problem, x.to_vec());
    let start = SaddlePoint::new(x.to_vec(), vec![0.0; problem.dim_y()]);
    let entry = aux.grad_at(&start).norm_sq();
    let m = l.min(mu);
    let target = (accuracy * m / (2.0 * l)).powi(2);
    if entry <= target {
        return Ok(x.to_vec());
    }
    let cfg = CatalystConfig {
        k_max: 100_000,
        ..CatalystConfig::default()
    };
    let params = cfg.resolve(l, mu, 1)?;
    let (z, _) = inner_loop(&aux, &start, &cfg, &params, target / entry, 0)?;
    Ok(z.x)
}

/// Accelerated gradient descent on `ψ(z) = Φ(z) + L‖z − x‖²`, which is
/// `L`-strongly convex and `(L(1+κ) + 2L)`-smooth. Stops once
/// `‖∇ψ‖ ≤ accuracy/2`, so that `‖z − prox‖ ≤ ‖∇ψ‖/L ≤ accuracy/(2L)`.
fn prox_closed_form(
    problem: &(impl SaddleProblem + ?Sized),
    x: &[f64],
    accuracy: f64,
    l: f64,
    mu: f64,
) -> Result<Vec<f64>> {
    let smooth = l * (1.0 + l / mu) + 2.0 * l;
    let sk = (smooth / l).sqrt();
    let beta = (sk - 1.0) / (sk + 1.0);
    let tol = accuracy / 2.0;
    let n = x.len();
    let mut g = vec![0.0; n];
    let mut w = x.to_vec();
    let mut z_prev = x.to_vec();
    let max_iters = 10_000_000usize;
    let mut norm = f64::INFINITY;
    for _ in 0..max_iters {
        problem.primal(&w, &mut g);
        for j in 0..n {
            g[j] += 2.0 * l * (w[j] - x[j]);
        }
        norm = linalg::norm(&g);
        if norm <= tol {
            return Ok(w);
        }
        let mut z = w.clone();
        linalg::axpy(-1.0 / smooth, &g, &mut z);
        for j in 0..n {
            w[j] = z[j] + beta * (z[j] - z_prev[j]);
        }
        z_prev = z;
    }
    Err(Error::AscentNotConverged {
        residual: norm,
        iterations: max_iters,
    })
}

/// `‖∇Φ_{1/2L}(x)‖ = 2L‖x − prox_{Φ/2L}(x)‖`, accurate to `accuracy`.
pub fn moreau_stationarity(problem: &(impl SaddleProblem + ?Sized), x: &[f64], accuracy: f64) -> Result<f64> {
    let p = prox_point(problem, x, accuracy)?;
    Ok(2.0 * problem.smoothness() * linalg::dist_sq(x, &p).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::QuadraticSaddle;

    #[test]
    fn quadratic_primal_prox() {
        // f = x²/2 + xy − y²: Φ = x²/2 + x²/4 = (3/4) x², a = 3/2, L = 2
        let f = QuadraticSaddle::scalar(1.0, 1.0, 2.0);
        let l = f.smoothness();
        let a = 1.5;
        let x = 0.8;
        let expected = 2.0 * l * x * a / (a + 2.0 * l);
        let got = moreau_stationarity(&f, &[x], 1e-10).unwrap();
        assert!((got - expected).abs() <= 1e-10, "{got} vs {expected}");
        let p = prox_point(&f, &[x], 1e-10).unwrap();
        assert!((p[0] - x * 2.0 * l / (a + 2.0 * l)).abs() < 1e-10);
    }

    #[test]
    fn stationary_point_has_zero_envelope_gradient() {
        let f = QuadraticSaddle::scalar(1.0, 1.0, 2.0);
        assert!(moreau_stationarity(&f, &[0.0], 1e-9).unwrap() <= 1e-9);
    }
}
