use ncsc_core::catalyst::{
    build_aux_problem, build_subproblem, catalyst_run, inner_loop, moreau_stationarity, CatalystConfig,
};
use ncsc_core::instances::{estimate_smoothness, DeterministicInstance, FiniteSumInstance, HardInstanceSpec, InstanceMode};
use ncsc_core::linalg;
use ncsc_core::problem::QuadraticSaddle;
use ncsc_core::solvers::SolverKind;
use ncsc_core::{SaddlePoint, SaddleProblem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn kappa16_instance() -> DeterministicInstance {
    let eps = HardInstanceSpec::epsilon_for_dimension(InstanceMode::Deterministic, 1, 1.0, 1.0 / 16.0, 1.0, 8).unwrap();
    let spec = HardInstanceSpec::deterministic(1.0, 1.0 / 16.0, 1.0, eps, None).unwrap();
    assert_eq!(spec.d, 8);
    DeterministicInstance::new(&spec).unwrap()
}

#[test]
fn toy_quadratic_reaches_small_primal_gradient() {
    // Φ(x) = −x²/4 + x² for f = −x²/4 + 2xy − y²
    let f = QuadraticSaddle::scalar(-0.5, 2.0, 2.0);
    let cfg = CatalystConfig {
        t_max: 200,
        ..CatalystConfig::default()
    };
    let out = catalyst_run(&f, &cfg, SaddlePoint::new(vec![3.0], vec![0.0])).unwrap();
    let best = out
        .trace
        .outer_iterates()
        .iter()
        .map(|x| (1.5 * x[0]).abs())
        .fold(f64::INFINITY, f64::min);
    assert!(best < 1e-4, "{best}");
    assert!((1.5 * out.best_x[0]).abs() < 1e-4);
}

#[test]
fn outer_rounds_meet_exit_criterion_and_schedule() {
    let f = kappa16_instance();
    let cfg = CatalystConfig {
        t_max: 6,
        record_points: true,
        ..CatalystConfig::default()
    };
    let out = catalyst_run(&f, &cfg, SaddlePoint::origin_of(&f)).unwrap();
    let rho = out.trace.params.rho;
    assert_eq!(out.trace.rounds.len(), 6);
    for r in &out.trace.rounds {
        assert!(r.inner.criterion_met());
        assert!(r.inner.exit_grad_sq <= r.inner.alpha * r.inner.entry_grad_sq);
        for w in r.inner.records.windows(2) {
            assert!(w[1].eps_k < w[0].eps_k);
            let ratio = w[1].eps_k / w[0].eps_k;
            assert!((ratio - (1.0 - rho)).abs() <= 1e-12);
            assert_eq!(w[1].start.as_ref().unwrap(), w[0].exit.as_ref().unwrap());
        }
    }
    for w in out.trace.rounds.windows(2) {
        assert_eq!(&w[1].x_start, &w[0].inner.records.last().unwrap().exit.as_ref().unwrap().x);
        assert!(w[1].calls > w[0].calls);
    }
}

#[test]
fn inner_loop_count_scales_with_log_alpha() {
    let f = kappa16_instance();
    let cfg = CatalystConfig {
        t_max: 8,
        ..CatalystConfig::default()
    };
    let out = catalyst_run(&f, &cfg, SaddlePoint::origin_of(&f)).unwrap();
    let p = out.trace.params;
    let mu = f.strong_concavity();
    let ratios: Vec<f64> = out
        .trace
        .rounds
        .iter()
        .map(|r| r.inner.k() as f64 / (((p.tau + mu) / mu).sqrt() * (1.0 / r.inner.alpha).ln()))
        .collect();
    let c = ratios[..4].iter().cloned().fold(0.0, f64::max);
    for r in &ratios[4..] {
        assert!(*r <= 2.0 * c, "{ratios:?}");
    }
}

#[test]
fn averaged_outer_bound_along_trace() {
    let f = kappa16_instance();
    let spec = f.spec().unwrap().clone();
    let cfg = CatalystConfig {
        t_max: 40,
        ..CatalystConfig::default()
    };
    let out = catalyst_run(&f, &cfg, SaddlePoint::origin_of(&f)).unwrap();
    let l = spec.l;
    // y₀ = 0 = y*(0)
    let d_y = 0.0;
    let mut sum = 0.0;
    for (t, r) in out.trace.rounds.iter().enumerate() {
        sum += r.grad_phi_end * r.grad_phi_end;
        let big_t = (t + 1) as f64;
        let bound = 268.0 * l / (5.0 * big_t) * spec.delta + 28.0 * l / (5.0 * big_t) * d_y;
        assert!(sum / big_t <= bound);
    }
}

#[test]
fn moreau_sum_bound() {
    let f = kappa16_instance();
    let spec = f.spec().unwrap().clone();
    let cfg = CatalystConfig {
        t_max: 10,
        ..CatalystConfig::default()
    };
    let out = catalyst_run(&f, &cfg, SaddlePoint::origin_of(&f)).unwrap();
    let xs = out.trace.outer_iterates();
    let mut sum = 0.0;
    for x in &xs[..xs.len() - 1] {
        let m = moreau_stationarity(&f, x, 1e-8).unwrap();
        sum += m * m;
    }
    // initial gap bound of the chain instance, scaled by η²
    let c = spec.lambda1 * spec.lambda1 / (2.0 * spec.lambda2);
    let gap0 = spec.eta * spec.eta * c * (spec.alpha.sqrt() / 2.0 + 10.0 * spec.alpha * spec.d as f64);
    assert!(gap0 <= spec.delta);
    assert!(sum <= 87.0 * spec.l / 5.0 * gap0, "{sum} vs {}", 87.0 * spec.l / 5.0 * gap0);
}

#[test]
fn best_iterate_ignores_seed() {
    let f = kappa16_instance();
    let run = |seed| {
        let cfg = CatalystConfig {
            t_max: 6,
            seed,
            ..CatalystConfig::default()
        };
        catalyst_run(&f, &cfg, SaddlePoint::origin_of(&f)).unwrap()
    };
    let outs: Vec<_> = (0..6).map(run).collect();
    for o in &outs[1..] {
        assert_eq!(o.best_x, outs[0].best_x);
    }
    let idx: Vec<usize> = outs.iter().map(|o| o.trace.sampled_index).collect();
    assert!(idx.iter().any(|&i| i != idx[0]), "{idx:?}");
    for o in &outs {
        let i = o.trace.sampled_index;
        assert!((1..=6).contains(&i));
        assert_eq!(o.sampled_x.as_slice(), o.trace.outer_iterates()[i]);
    }
}

#[test]
fn stationary_start_exits_immediately() {
    let f = QuadraticSaddle::scalar(-0.5, 2.0, 2.0);
    let aux = build_aux_problem(&f, vec![0.0]);
    let cfg = CatalystConfig::default();
    let p = cfg.resolve(2.0, 2.0, 1).unwrap();
    let (z, tr) = inner_loop(&aux, &SaddlePoint::zeros(1, 1), &cfg, &p, 1e-6, 0).unwrap();
    assert_eq!(tr.k(), 1);
    assert_eq!(tr.records[0].iterations, 0);
    assert_eq!(z, SaddlePoint::zeros(1, 1));
}

#[test]
fn aux_problem_is_strongly_convex_in_x() {
    let l = 2.0;
    let f = QuadraticSaddle::scalar(-l, 0.5, 1.0);
    let aux = build_aux_problem(&f, vec![0.3]);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let (x1, x2, y) = (rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        let g1 = aux.grad_at(&SaddlePoint::new(vec![x1], vec![y])).x[0];
        let g2 = aux.grad_at(&SaddlePoint::new(vec![x2], vec![y])).x[0];
        assert!((g2 - g1) * (x2 - x1) >= l * (x2 - x1) * (x2 - x1) * (1.0 - 1e-6));
    }
}

#[test]
fn regularized_problems_respect_advertised_smoothness() {
    let f = kappa16_instance();
    let l = f.smoothness();
    let aux = build_aux_problem(&f, vec![0.01; f.dim_x()]);
    assert!(estimate_smoothness(&aux, 2000, 5).lipschitz <= 3.0 * l * (1.0 + 1e-6));

    let spec = HardInstanceSpec::finite_sum(4, 1.0, 1.0 / 32.0, 1.0, 0.01, Some(6)).unwrap();
    let g = FiniteSumInstance::new(&spec).unwrap();
    let aux = build_aux_problem(&g, vec![0.0; g.dim_x()]);
    for tau in [0.0, 0.5, 3.0] {
        let sub = build_subproblem(&aux, tau, vec![0.0; g.dim_y()]);
        let est = estimate_smoothness(&sub, 2000, 6);
        assert!(est.averaged <= 2f64.sqrt() * (spec.l + (2.0 * spec.l).max(tau)) * (1.0 + 1e-6));
    }
}

#[test]
fn moreau_measure_bounds_primal_gradient() {
    let f = kappa16_instance();
    let (l, mu) = (f.smoothness(), f.strong_concavity());
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let s = f.sampling_scale();
    for _ in 0..10 {
        let x: Vec<f64> = (0..f.dim_x()).map(|_| rng.random_range(-s..s)).collect();
        let m = moreau_stationarity(&f, &x, 1e-9).unwrap();
        let g = linalg::norm(&f.primal_value_and_grad(&x).unwrap().1);
        // ‖∇Φ(x)‖ ≤ ‖∇Φ_λ(x)‖ + L_Φ‖x − prox‖ with L_Φ ≤ L(1+κ)
        let l_phi = l * (1.0 + l / mu);
        assert!(g <= m * (1.0 + l_phi / (2.0 * l)) + 1e-8);
    }
    let q = QuadraticSaddle::scalar(-0.5, 2.0, 2.0);
    assert!(moreau_stationarity(&q, &[0.0], 1e-10).unwrap() <= 1e-10);
}

#[test]
fn svrg_subsolver_on_finite_sum() {
    let spec = HardInstanceSpec::finite_sum(4, 1.0, 1.0 / 32.0, 1.0, 0.01, Some(3)).unwrap();
    let g = FiniteSumInstance::new(&spec).unwrap();
    let cfg = CatalystConfig {
        t_max: 3,
        ..CatalystConfig::default().with_subsolver(SolverKind::Svrg)
    };
    let out = catalyst_run(&g, &cfg, SaddlePoint::origin_of(&g)).unwrap();
    assert!((out.trace.params.tau - (0.5 - 1.0 / 32.0)).abs() < 1e-15);
    assert!(out.trace.rounds.iter().all(|r| r.inner.criterion_met()));
}
