use approx::assert_abs_diff_eq;
use nalgebra::{DMatrix, DVector};
use ncsc_core::instances::{
    estimate_smoothness, gamma, gamma_prime, Case1Instance, ChainFunction, ChainMatrix, DeterministicInstance,
    FiniteSumInstance, HardInstanceSpec,
};
use ncsc_core::metrics::maximize_y;
use ncsc_core::problem::Bilinear;
use ncsc_core::{finite_difference_check, linalg, Regularized, SaddlePoint, SaddleProblem};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn normal_vec(rng: &mut ChaCha8Rng, len: usize, scale: f64) -> Vec<f64> {
    (0..len).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect()
}

fn integrand(t: f64) -> f64 {
    120.0 * t * t * (t - 1.0) / (1.0 + t * t)
}

/// Composite 5-point Gauss-Legendre rule on 400 panels.
fn quadrature_gamma(x: f64) -> f64 {
    const NODES: [(f64, f64); 5] = [
        (0.0, 0.568_888_888_888_888_9),
        (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
        (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
        (-0.906_179_845_938_664_0, 0.236_926_885_056_189_1),
        (0.906_179_845_938_664_0, 0.236_926_885_056_189_1),
    ];
    let panels = 400;
    let h = (x - 1.0) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = 1.0 + (p as f64 + 0.5) * h;
        for (t, w) in NODES {
            total += w * integrand(mid + 0.5 * h * t);
        }
    }
    0.5 * h * total
}

#[test]
fn gamma_matches_quadrature_on_grid() {
    for i in -300..=300 {
        let x = i as f64 / 100.0;
        let q = quadrature_gamma(x);
        assert!((gamma(x) - q).abs() <= 1e-8, "x = {x}: closed {} quadrature {q}", gamma(x));
    }
    assert_abs_diff_eq!(quadrature_gamma(0.0), 7.34105, epsilon = 1e-5);
    assert_abs_diff_eq!(gamma_prime(2.0), 96.0, epsilon = 1e-12);
}

/// Dense `B_d` read off the printed matrix: anti-diagonal of ones, a −1 band
/// to its right, and `α^{1/4}` in the bottom-left corner.
fn dense_chain(d: usize, alpha: f64) -> DMatrix<f64> {
    let mut b = DMatrix::zeros(d + 2, d + 1);
    for r in 0..=d {
        b[(r, d - r)] = 1.0;
        if r > 0 {
            b[(r, d - r + 1)] = -1.0;
        }
    }
    b[(d + 1, 0)] = alpha.powf(0.25);
    b
}

#[test]
fn chain_matrix_d1_columns() {
    let b = ChainMatrix::new(1, 1.0 / 16.0).unwrap();
    assert_eq!(b.apply(&[1.0, 0.0]).unwrap(), vec![0.0, 1.0, 0.5]);
    assert_eq!(b.apply(&[0.0, 1.0]).unwrap(), vec![1.0, -1.0, 0.0]);
    assert_eq!(b.apply(&[0.0, 0.0]).unwrap(), vec![0.0; 3]);
    assert!(b.apply(&[1.0]).is_err());
}

#[test]
fn chain_matrix_matches_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for &(d, alpha) in &[(1, 0.3), (7, 1e-3), (50, 0.01)] {
        let b = ChainMatrix::new(d, alpha).unwrap();
        let dense = dense_chain(d, alpha);
        let smax = dense.clone().svd(false, false).singular_values.max();
        assert!(smax <= 2.0, "operator norm {smax}");
        for _ in 0..20 {
            let x = normal_vec(&mut rng, d + 1, 1.0);
            let y = normal_vec(&mut rng, d + 2, 1.0);
            let bx = b.apply(&x).unwrap();
            let bty = b.apply_t(&y).unwrap();
            let want_bx = &dense * DVector::from_column_slice(&x);
            let want_bty = dense.transpose() * DVector::from_column_slice(&y);
            for (g, w) in bx.iter().zip(want_bx.iter()) {
                assert!((g - w).abs() <= 1e-12);
            }
            for (g, w) in bty.iter().zip(want_bty.iter()) {
                assert!((g - w).abs() <= 1e-12);
            }
            assert!(linalg::norm(&bx) <= 2.0 * linalg::norm(&x));
        }
    }
}

/// `Φ_d` from the printed quadratic form `A_d = BᵀB − e_{d+1}e_{d+1}ᵀ`.
fn dense_primal(d: usize, l1: f64, l2: f64, alpha: f64, x: &[f64]) -> (f64, Vec<f64>) {
    let b = dense_chain(d, alpha);
    let mut a = b.transpose() * &b;
    a[(d, d)] -= 1.0;
    let xv = DVector::from_column_slice(x);
    let ax = &a * &xv;
    let c = l1 * l1 / (2.0 * l2);
    let sa = alpha.sqrt();
    let gsum: f64 = x[..d].iter().map(|&v| gamma(v)).sum();
    let value = c * (0.5 * xv.dot(&ax) - sa * x[0] + sa / 2.0 + alpha * gsum + (1.0 - alpha) / 2.0 * x[d] * x[d]);
    let mut grad: Vec<f64> = ax.iter().map(|v| c * v).collect();
    grad[0] -= c * sa;
    for i in 0..d {
        grad[i] += c * alpha * gamma_prime(x[i]);
    }
    grad[d] += c * (1.0 - alpha) * x[d];
    (value, grad)
}

#[test]
fn d1_quadratic_form_corner() {
    let alpha: f64 = 0.04;
    let b = dense_chain(1, alpha);
    let mut a = b.transpose() * &b;
    a[(1, 1)] -= 1.0;
    assert_abs_diff_eq!(a[(0, 0)], 1.0 + alpha.sqrt(), epsilon = 1e-15);
    assert_eq!(a[(0, 1)], -1.0);
    assert_eq!(a[(1, 0)], -1.0);
    assert_eq!(a[(1, 1)], 1.0);
}

#[test]
fn primal_matches_dense_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for &(d, l1, l2, alpha) in &[(1, 1.0, 1.0, 0.01), (6, 0.5, 0.125, 2.5e-3), (20, 2.0, 0.7, 1e-3)] {
        let f = ChainFunction::new(d, l1, l2, alpha).unwrap();
        let mut g = vec![0.0; d + 1];
        for _ in 0..30 {
            let x = normal_vec(&mut rng, d + 1, 1.5);
            let v = f.primal(&x, &mut g);
            let (wv, wg) = dense_primal(d, l1, l2, alpha, &x);
            assert!((v - wv).abs() <= 1e-10 * (1.0 + wv.abs()), "{v} vs {wv}");
            for (a, b) in g.iter().zip(&wg) {
                assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()));
            }
        }
    }
}

#[test]
fn unscaled_primal_at_origin() {
    let f = DeterministicInstance::unscaled(1, 1.0, 1.0, 0.01).unwrap();
    let (v, _) = f.primal_value_and_grad(&[0.0, 0.0]).unwrap();
    let want = 0.5 * (0.05 + 0.01 * quadrature_gamma(0.0));
    assert_abs_diff_eq!(v, want, epsilon = 1e-10);
    assert_abs_diff_eq!(v, 0.061705, epsilon = 1e-6);
}

#[test]
fn best_response_first_order_condition() {
    let f = DeterministicInstance::unscaled(1, 1.0, 1.0, 1.0 / 16.0).unwrap();
    let y = f.best_response(&[1.0, 0.0]).unwrap();
    assert_eq!(y, vec![0.0, 0.5, 0.25]);
    let r = maximize_y(&f, &[1.0, 0.0], &[0.0; 3], 1e-12, 100_000).unwrap();
    for (a, b) in r.y.iter().zip(&y) {
        assert!((a - b).abs() < 1e-11);
    }
}

#[test]
fn origin_gradient_support() {
    let spec = HardInstanceSpec::deterministic(1.0, 0.25, 1.0, 0.01, Some(10)).unwrap();
    let f = DeterministicInstance::new(&spec).unwrap();
    let g = f.grad_at(&SaddlePoint::origin_of(&f));
    assert!(g.x[0] != 0.0);
    assert!(g.x[1..].iter().all(|&v| v == 0.0));
    assert!(g.y.iter().all(|&v| v == 0.0));
}

fn central_difference_error(f: &dyn SaddleProblem, z: &SaddlePoint, h: f64) -> f64 {
    let g = f.grad_at(z);
    let mut worst = 0.0_f64;
    let dx = f.dim_x();
    for k in 0..dx + f.dim_y() {
        let mut p = z.clone();
        let mut m = z.clone();
        let analytic = if k < dx {
            p.x[k] += h;
            m.x[k] -= h;
            g.x[k]
        } else {
            p.y[k - dx] += h;
            m.y[k - dx] -= h;
            g.y[k - dx]
        };
        let fd = (f.value(&p.x, &p.y) - f.value(&m.x, &m.y)) / (2.0 * h);
        worst = worst.max((fd - analytic).abs() / (1.0 + analytic.abs()));
    }
    worst
}

fn random_point(f: &dyn SaddleProblem, rng: &mut ChaCha8Rng) -> SaddlePoint {
    let s = f.sampling_scale();
    SaddlePoint::new(normal_vec(rng, f.dim_x(), s), normal_vec(rng, f.dim_y(), s))
}

#[test]
fn gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let fd_spec = HardInstanceSpec::finite_sum(3, 1.0, 1.0 / 32.0, 1.0, 0.01, Some(4)).unwrap();
    let problems: Vec<Box<dyn SaddleProblem>> = vec![
        Box::new(DeterministicInstance::unscaled(5, 1.0, 1.0, 0.01).unwrap()),
        Box::new(FiniteSumInstance::new(&fd_spec).unwrap()),
        Box::new(Case1Instance::from_params(4, 1.0, 0.1, 1.0, 8).unwrap()),
    ];
    for f in &problems {
        for _ in 0..10 {
            let z = random_point(f.as_ref(), &mut rng);
            let h = 1e-6 * f.sampling_scale().max(1e-300);
            assert!(central_difference_error(f.as_ref(), &z, h) <= 1e-5);
            assert!(finite_difference_check(f.as_ref(), &z, h).unwrap() <= 1e-5);
        }
    }
    let z = SaddlePoint::new(vec![0.3, -1.0], vec![2.0, 0.5]);
    assert!(finite_difference_check(&Bilinear { dim: 2 }, &z, 1e-5).unwrap() <= 1e-8);
}

#[test]
fn component_average_equals_full_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let spec = HardInstanceSpec::finite_sum(4, 1.0, 1.0 / 32.0, 1.0, 0.01, Some(6)).unwrap();
    let fsum = FiniteSumInstance::new(&spec).unwrap();
    let case1 = Case1Instance::from_params(8, 1.0, 0.1, 1.0, 64).unwrap();
    for f in [&fsum as &dyn SaddleProblem, &case1] {
        let n = f.n_components();
        for _ in 0..20 {
            let z = random_point(f, &mut rng);
            let full = f.grad_at(&z);
            let mut avg = SaddlePoint::zeros(f.dim_x(), f.dim_y());
            for i in 0..n {
                let g = f.component_grad_at(i, &z);
                linalg::axpy(1.0 / n as f64, &g.x, &mut avg.x);
                linalg::axpy(1.0 / n as f64, &g.y, &mut avg.y);
            }
            let scale = full.norm_sq().sqrt().max(1e-300);
            let err = (linalg::dist_sq(&avg.x, &full.x) + linalg::dist_sq(&avg.y, &full.y)).sqrt();
            assert!(err <= 1e-12 * scale, "{err} vs {scale}");
        }
    }
}

#[test]
fn finite_sum_y_gradient_on_own_block() {
    let spec = HardInstanceSpec::finite_sum(4, 1.0, 1.0 / 32.0, 1.0, 0.01, Some(6)).unwrap();
    let f = FiniteSumInstance::new(&spec).unwrap();
    let blocks = f.blocks();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let z = random_point(&f, &mut rng);
    for i in 0..4 {
        let g = f.component_grad_at(i, &z);
        for (j, v) in g.y.iter().enumerate() {
            if !blocks.y_range(i).contains(&j) {
                assert_eq!(*v, 0.0);
            }
        }
    }
}

#[test]
fn finite_sum_primal_is_block_average() {
    let spec = HardInstanceSpec::finite_sum(4, 1.0, 1.0 / 32.0, 1.0, 0.01, Some(6)).unwrap();
    let f = FiniteSumInstance::new(&spec).unwrap();
    let eta = f.eta();
    let chain = *f.chain();
    let blocks = f.blocks();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut local = vec![0.0; 7];
    for _ in 0..20 {
        let x = normal_vec(&mut rng, blocks.dim_x(), f.sampling_scale());
        let (phi, grad) = f.primal_value_and_grad(&x).unwrap();
        let mut want_v = 0.0;
        let mut want_g = vec![0.0; x.len()];
        for i in 0..4 {
            let u: Vec<f64> = blocks.restrict_x(i, &x).iter().map(|v| v / eta).collect();
            want_v += eta * eta * chain.primal(&u, &mut local) / 4.0;
            for (k, j) in blocks.x_range(i).enumerate() {
                want_g[j] += eta * local[k] / 4.0;
            }
        }
        assert!((phi - want_v).abs() <= 1e-12 * (1.0 + want_v.abs()));
        let blockwise = f.primal_blockwise_grad(&x);
        for ((a, b), c) in grad.iter().zip(&want_g).zip(&blockwise) {
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
            assert!((c - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }
}

#[test]
fn primal_identity_on_all_families() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let det = DeterministicInstance::new(&HardInstanceSpec::deterministic(1.0, 0.0625, 1.0, 0.01, Some(12)).unwrap())
        .unwrap();
    let fsum =
        FiniteSumInstance::new(&HardInstanceSpec::finite_sum(2, 1.0, 1.0 / 16.0, 1.0, 0.01, Some(5)).unwrap()).unwrap();
    let case1 = Case1Instance::from_params(4, 2.0, 0.5, 1.0, 12).unwrap();
    for f in [&det as &dyn SaddleProblem, &fsum, &case1] {
        let mut g = vec![0.0; f.dim_x()];
        for _ in 0..50 {
            let x = normal_vec(&mut rng, f.dim_x(), f.sampling_scale());
            let phi = f.primal(&x, &mut g).unwrap();
            let y = f.best_response(&x).unwrap();
            assert!((phi - f.value(&x, &y)).abs() <= 1e-10 * (1.0 + phi.abs()));
            let r = f.grad_at(&SaddlePoint::new(x.clone(), y));
            assert!(linalg::norm(&r.y) <= 1e-10 * (1.0 + linalg::norm(&r.x)));
        }
    }
}

fn support_within(v: &[f64], allowed: impl Fn(usize) -> bool) -> bool {
    v.iter().enumerate().all(|(i, &a)| a == 0.0 || allowed(i))
}

/// First `k+1` entries of a `(d+2)`-vector's tail: indices `≥ d+1−k`.
fn in_y_span(d: usize, k: usize) -> impl Fn(usize) -> bool {
    move |i| k > 0 && i + k >= d + 1
}

fn chain_point(d: usize, kx: usize, ky: usize, vals: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; d + 1];
    let mut y = vec![0.0; d + 2];
    for (i, xi) in x.iter_mut().enumerate().take(kx) {
        *xi = vals[i % vals.len()];
    }
    if ky > 0 {
        for i in d + 1 - ky..=d + 1 {
            y[i] = vals[(i + 7) % vals.len()];
        }
    }
    (x, y)
}

proptest! {
    #[test]
    fn zero_chain_x_advances(k in 0usize..20, vals in prop::collection::vec(-3.0f64..3.0, 8)) {
        let d = 20;
        let f = ChainFunction::new(d, 1.0, 0.5, 1e-3).unwrap();
        let (x, y) = chain_point(d, k, k, &vals);
        let mut gx = vec![0.0; d + 1];
        let mut gy = vec![0.0; d + 2];
        f.grad(&x, &y, &mut gx, &mut gy);
        prop_assert!(support_within(&gx, |i| i < k + 1));
        prop_assert!(support_within(&gy, in_y_span(d, k)));
    }

    #[test]
    fn zero_chain_y_advances(k in 0usize..20, vals in prop::collection::vec(-3.0f64..3.0, 8)) {
        let d = 20;
        let f = ChainFunction::new(d, 1.0, 0.5, 1e-3).unwrap();
        let (x, y) = chain_point(d, k + 1, k, &vals);
        let mut gx = vec![0.0; d + 1];
        let mut gy = vec![0.0; d + 2];
        f.grad(&x, &y, &mut gx, &mut gy);
        prop_assert!(support_within(&gx, |i| i < k + 1));
        prop_assert!(support_within(&gy, in_y_span(d, k + 1)));
    }

    #[test]
    fn gradient_floor_before_tail(d in 2usize..25, seed in any::<u64>(), l1 in 0.1f64..4.0, l2 in 0.05f64..2.0) {
        let alpha = 1e-3;
        let f = ChainFunction::new(d, l1, l2, alpha).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = normal_vec(&mut rng, d + 1, 2.0);
        x[d - 1] = 0.0;
        x[d] = 0.0;
        let mut g = vec![0.0; d + 1];
        f.primal(&x, &mut g);
        prop_assert!(linalg::norm(&g) >= l1 * l1 / (8.0 * l2) * alpha.powf(0.75));
    }
}

#[test]
fn scaled_floor_equals_epsilon() {
    for &(l, mu, eps) in &[(1.0, 0.25, 0.01), (10.0, 1.0, 0.05), (3.0, 0.03, 2e-3)] {
        let s = HardInstanceSpec::deterministic(l, mu, 1.0, eps, Some(10)).unwrap();
        let floor = s.eta * l * l / (16.0 * mu) * s.alpha.powf(0.75);
        assert!((floor - eps).abs() <= 1e-12 * eps);
    }
}

#[test]
fn derived_parameters() {
    let s = HardInstanceSpec::deterministic(10.0, 1.0, 1.0, 0.05, None).unwrap();
    assert_eq!((s.lambda1, s.lambda2), (5.0, 0.5));
    assert_abs_diff_eq!(s.alpha, 1e-3, epsilon = 1e-18);
    let want_d = (1.0 * 10.0 * 10f64.sqrt() / (12800.0 * 0.05 * 0.05)).floor() as usize;
    assert_eq!(s.d, want_d.max(1));
    let f = HardInstanceSpec::finite_sum(4, 1.0, 1.0 / 32.0, 1.0, 0.01, Some(6)).unwrap();
    assert_abs_diff_eq!(f.lambda1, (4.0f64 / 40.0).sqrt(), epsilon = 1e-15);
    assert_abs_diff_eq!(f.lambda2, 4.0 / 64.0, epsilon = 1e-15);
    assert_abs_diff_eq!(f.alpha, 4.0 / (32.0 * 50.0), epsilon = 1e-15);
    assert!(HardInstanceSpec::finite_sum(4, 1.0, 0.2, 1.0, 0.01, Some(6)).is_err());
}

#[test]
fn finite_sum_initial_gap_bound() {
    let spec = HardInstanceSpec::finite_sum(2, 1.0, 1.0 / 16.0, 1.0, 0.01, Some(3)).unwrap();
    let f = FiniteSumInstance::new(&spec).unwrap();
    let chain = *f.chain();
    let eta = f.eta();
    // every block is an independent copy, so inf Φ̄ = η² inf Φ_d
    let d = chain.d();
    let mut best = f64::INFINITY;
    let mut g = vec![0.0; d + 1];
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for restart in 0..40 {
        let mut x = if restart == 0 { vec![1.0; d + 1] } else { normal_vec(&mut rng, d + 1, 1.5) };
        let mut step = 1e-3;
        let mut v = chain.primal(&x, &mut g);
        for _ in 0..200_000 {
            let mut trial = x.clone();
            linalg::axpy(-step, &g, &mut trial);
            let mut gt = vec![0.0; d + 1];
            let vt = chain.primal(&trial, &mut gt);
            if vt <= v {
                x = trial;
                v = vt;
                g = gt;
                step *= 1.1;
            } else {
                step *= 0.5;
            }
            if linalg::norm(&g) < 1e-12 {
                break;
            }
        }
        best = best.min(v);
    }
    let phi0 = f.primal_value_and_grad(&vec![0.0; f.dim_x()]).unwrap().0;
    let gap = phi0 - eta * eta * best;
    let c = chain.lambda1 * chain.lambda1 / (2.0 * chain.lambda2);
    let bound = eta * eta * c * (chain.alpha().sqrt() / 2.0 + 10.0 * chain.alpha() * d as f64);
    assert!(gap <= bound * (1.0 + 1e-6), "gap {gap} bound {bound}");
}

#[test]
fn case1_closed_forms() {
    let f = Case1Instance::from_params(8, 1.0, 0.1, 1.0, 64).unwrap();
    let spec = f.spec();
    let xs = f.primal_minimizer();
    let (phi_star, g_star) = f.primal_value_and_grad(&xs).unwrap();
    assert!(linalg::norm(&g_star) <= 1e-12);
    let phi0 = f.primal_value_and_grad(&vec![0.0; 64]).unwrap().0;
    let theta = f.theta();
    let want = 0.1 * theta * theta * 64.0 / (2.0 * 64.0);
    assert_abs_diff_eq!(phi0 - phi_star, want, epsilon = 1e-12);
    assert!(phi0 - phi_star <= spec.delta * (1.0 + 1e-12));
    let z = SaddlePoint::new(vec![0.5; 64], vec![0.2; 64]);
    let g = f.grad_at(&z);
    assert!(g.y.iter().all(|v| (v - (0.5 - 0.1 * 0.2)).abs() < 1e-15));
    let y_eq = SaddlePoint::new(vec![0.5; 64], vec![5.0; 64]);
    assert!(f.grad_at(&y_eq).y.iter().all(|&v| v.abs() < 1e-14));
}

#[test]
fn case1_untouched_blocks_keep_gradient_large() {
    let f = Case1Instance::from_params(8, 1.0, 0.1, 1.0, 64).unwrap();
    let floor = f.gradient_floor();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut g = vec![0.0; 64];
    for _ in 0..200 {
        let mut x = vec![0.0; 64];
        let mut touched: Vec<usize> = (0..8).collect();
        for i in 0..8 {
            touched.swap(i, rng.random_range(i..8));
        }
        for &b in &touched[..4] {
            for j in f.block(b) {
                x[j] = rng.sample::<f64, _>(StandardNormal);
            }
        }
        f.primal(&x, &mut g);
        assert!(linalg::norm(&g) >= floor * (1.0 - 1e-12));
    }
}

#[test]
fn smoothness_estimates_respect_constants() {
    let est = estimate_smoothness(&Bilinear { dim: 3 }, 500, 1);
    assert!(est.lipschitz <= 1.0 + 1e-9 && est.averaged <= 1.0 + 1e-9);

    let det = DeterministicInstance::new(&HardInstanceSpec::deterministic(2.0, 0.125, 1.0, 0.01, Some(8)).unwrap())
        .unwrap();
    let est = estimate_smoothness(&det, 2000, 2);
    assert!(est.lipschitz <= 2.0 * (1.0 + 1e-6));

    let spec = HardInstanceSpec::finite_sum(4, 1.0, 1.0 / 32.0, 1.0, 0.01, Some(6)).unwrap();
    let fsum = FiniteSumInstance::new(&spec).unwrap();
    let est = estimate_smoothness(&fsum, 2000, 3);
    assert!(est.averaged <= 1.0 + 1e-6);

    let (tx, ty) = (0.7, 0.3);
    let dx = fsum.dim_x();
    let dy = fsum.dim_y();
    let reg = Regularized::new(&fsum, tx, vec![0.1; dx], ty, vec![-0.2; dy]);
    let est = estimate_smoothness(&reg, 2000, 4);
    assert!(est.averaged <= 2f64.sqrt() * (1.0 + tx.max(ty)) * (1.0 + 1e-6));
}

#[test]
fn scaling_preserves_smoothness() {
    let s = HardInstanceSpec::deterministic(1.0, 0.0625, 1.0, 0.01, Some(6)).unwrap();
    let scaled = DeterministicInstance::new(&s).unwrap();
    let raw = DeterministicInstance::unscaled(6, s.lambda1, s.lambda2, s.alpha).unwrap();
    let a = estimate_smoothness(&scaled, 4000, 9);
    let b = estimate_smoothness(&raw, 4000, 9);
    assert!((a.lipschitz - b.lipschitz).abs() <= 0.1 * b.lipschitz, "{a:?} {b:?}");
}
