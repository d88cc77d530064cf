use crate::error::{Error, Result};
use crate::linalg;
use crate::problem::SaddleProblem;

/// Outcome of maximizing `f(x, ·)` at fixed `x`.
#[derive(Debug, Clone)]
pub struct AscentResult {
    pub y: Vec<f64>,
    /// `∇ₓf(x, y)` at the returned `y`.
    pub grad_x: Vec<f64>,
    /// `‖∇ᵧf(x, y)‖` at the returned `y`.
    pub residual: f64,
    pub calls: u64,
}

/// Nesterov's accelerated ascent on the `μ`-strongly concave, `L`-smooth map
/// `y ↦ f(x, y)`, stopped once `‖∇ᵧf‖ ≤ tolerance` at the extrapolated point.
pub fn maximize_y(
    problem: &(impl SaddleProblem + ?Sized),
    x: &[f64],
    y0: &[f64],
    tolerance: f64,
    max_iters: usize,
) -> Result<AscentResult> {
    let l = problem.smoothness();
    let mu = problem.strong_concavity().min(l);
    let sk = (l / mu).sqrt();
    let beta = (sk - 1.0) / (sk + 1.0);
    let dy = problem.dim_y();
    let mut gx = vec![0.0; problem.dim_x()];
    let mut gy = vec![0.0; dy];
    let mut w = y0.to_vec();
    let mut y_prev = y0.to_vec();
    let mut calls = 0;
    let mut residual = f64::INFINITY;
    for _ in 0..=max_iters {
        problem.grad(x, &w, &mut gx, &mut gy);
        calls += 1;
        residual = linalg::norm(&gy);
        if residual <= tolerance {
            return Ok(AscentResult {
                y: w,
                grad_x: gx,
                residual,
                calls,
            });
        }
        if problem.interrupted() {
            return Err(Error::Interrupted);
        }
        let mut y_next = w.clone();
        linalg::axpy(1.0 / l, &gy, &mut y_next);
        for j in 0..dy {
            w[j] = y_next[j] + beta * (y_next[j] - y_prev[j]);
        }
        y_prev = y_next;
    }
    Err(Error::AscentNotConverged {
        residual,
        iterations: max_iters,
    })
}

/// `‖∇Φ(x)‖` with an error bar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimalGradNorm {
    pub value: f64,
    /// Upper bound on `|value − ‖∇Φ(x)‖|`; zero for closed forms.
    pub slack: f64,
    pub calls: u64,
}

/// Closed-form `‖∇Φ(x)‖` when the problem has one; otherwise `‖∇ₓf(x, ŷ)‖`
/// for an ascent iterate `ŷ` with `‖∇ᵧf(x, ŷ)‖ ≤ inner_tolerance`, with slack
/// `2L‖∇ᵧf(x, ŷ)‖/μ`.
pub fn primal_grad_norm(
    problem: &(impl SaddleProblem + ?Sized),
    x: &[f64],
    inner_tolerance: f64,
) -> Result<PrimalGradNorm> {
    if !(inner_tolerance > 0.0) {
        return Err(Error::InvalidConfig("inner tolerance must be positive".into()));
    }
    let mut g = vec![0.0; problem.dim_x()];
    if problem.primal(x, &mut g).is_some() {
        return Ok(PrimalGradNorm {
            value: linalg::norm(&g),
            slack: 0.0,
            calls: 0,
        });
    }
    let y0 = vec![0.0; problem.dim_y()];
    let r = maximize_y(problem, x, &y0, inner_tolerance, 1_000_000)?;
    Ok(PrimalGradNorm {
        value: linalg::norm(&r.grad_x),
        slack: 2.0 * problem.smoothness() * r.residual / problem.strong_concavity(),
        calls: r.calls,
    })
}
