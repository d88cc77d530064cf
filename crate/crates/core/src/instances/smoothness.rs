use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg;
use crate::problem::SaddleProblem;

/// Sampled lower bounds on the smoothness constants of a problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothnessEstimate {
    /// max over pairs of `max(‖Δ∇ₓf‖, ‖Δ∇ᵧf‖) / (‖Δx‖ + ‖Δy‖)`
    pub lipschitz: f64,
    /// max over pairs of `√((1/n) Σᵢ ‖Δ∇fᵢ‖² / ‖Δz‖²)`
    pub averaged: f64,
}

/// Draws `sample_count` point pairs around the origin at the problem's
/// sampling scale; the second point of each pair is a perturbation whose size
/// cycles through four decades.
pub fn estimate_smoothness(
    problem: &(impl SaddleProblem + ?Sized),
    sample_count: usize,
    seed: u64,
) -> SmoothnessEstimate {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (dx, dy) = (problem.dim_x(), problem.dim_y());
    let n = problem.n_components();
    let scale = problem.sampling_scale();
    let radii = [1.0, 0.1, 1e-2, 1e-3];

    let mut g1 = (vec![0.0; dx], vec![0.0; dy]);
    let mut g2 = (vec![0.0; dx], vec![0.0; dy]);
    let mut lipschitz = 0.0_f64;
    let mut averaged = 0.0_f64;

    for s in 0..sample_count.max(1) {
        let mut draw = |len: usize, sd: f64| -> Vec<f64> {
            (0..len)
                .map(|_| sd * rng.sample::<f64, _>(StandardNormal))
                .collect()
        };
        let x1 = draw(dx, scale);
        let y1 = draw(dy, scale);
        let r = radii[s % radii.len()] * scale;
        let mut x2 = draw(dx, r);
        let mut y2 = draw(dy, r);
        linalg::axpy(1.0, &x1, &mut x2);
        linalg::axpy(1.0, &y1, &mut y2);

        let ddx = linalg::dist_sq(&x1, &x2);
        let ddy = linalg::dist_sq(&y1, &y2);
        if ddx + ddy == 0.0 {
            continue;
        }

        problem.grad(&x1, &y1, &mut g1.0, &mut g1.1);
        problem.grad(&x2, &y2, &mut g2.0, &mut g2.1);
        let gxd = linalg::dist_sq(&g1.0, &g2.0).sqrt();
        let gyd = linalg::dist_sq(&g1.1, &g2.1).sqrt();
        lipschitz = lipschitz.max(gxd.max(gyd) / (ddx.sqrt() + ddy.sqrt()));

        let mut acc = 0.0;
        for i in 0..n {
            problem.component_grad(i, &x1, &y1, &mut g1.0, &mut g1.1);
            problem.component_grad(i, &x2, &y2, &mut g2.0, &mut g2.1);
            acc += linalg::dist_sq(&g1.0, &g2.0) + linalg::dist_sq(&g1.1, &g2.1);
        }
        averaged = averaged.max((acc / n as f64 / (ddx + ddy)).sqrt());
    }

    SmoothnessEstimate {
        lipschitz,
        averaged,
    }
}
