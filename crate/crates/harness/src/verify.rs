//! Property suite behind `ncsc verify`, plus the reusable checks it is built from.

use std::fmt;
use std::time::Instant;

use ncsc_core::catalyst::{build_aux_problem, catalyst_run, moreau_stationarity, CatalystConfig};
use ncsc_core::instances::{
    estimate_smoothness, gamma, gamma_prime, Case1Instance, ChainMatrix, DeterministicInstance, FiniteSumInstance,
    HardInstanceSpec,
};
use ncsc_core::linalg;
use ncsc_core::metrics::{fit_scaling, maximize_y, Algorithm};
use ncsc_core::problem::{Bilinear, QuadraticSaddle};
use ncsc_core::solvers::{run_solver, SolverConfig, SolverKind};
use ncsc_core::{Logged, Regularized, SaddlePoint, SaddleProblem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::output::{read_results, write_results, ResultRow};
use crate::spec_file::{parse_spec, render_spec};
use crate::suites::{lower_bound_specs, ExperimentConfig, Suite};

fn gaussian(rng: &mut ChaCha8Rng, len: usize, scale: f64) -> Vec<f64> {
    (0..len)
        .map(|_| scale * rng.sample::<f64, _>(rand_distr::StandardNormal))
        .collect()
}

/// Largest `max_k |central difference_k − ∂_k f| / ‖∇f‖_∞` over `points`
/// random points at the problem's sampling scale.
pub fn gradient_error(problem: &dyn SaddleProblem, points: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = problem.sampling_scale();
    let h = 1e-5 * s;
    let (dx, dy) = (problem.dim_x(), problem.dim_y());
    let mut worst = 0.0_f64;
    for _ in 0..points {
        let mut z: Vec<f64> = gaussian(&mut rng, dx + dy, s);
        let g = problem.grad_at(&SaddlePoint::new(z[..dx].to_vec(), z[dx..].to_vec()));
        let analytic: Vec<f64> = g.x.iter().chain(&g.y).copied().collect();
        let gmax = analytic.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-300);
        for k in 0..dx + dy {
            let base = z[k];
            z[k] = base + h;
            let fp = problem.value(&z[..dx], &z[dx..]);
            z[k] = base - h;
            let fm = problem.value(&z[..dx], &z[dx..]);
            z[k] = base;
            let fd = (fp - fm) / (2.0 * h);
            worst = worst.max((fd - analytic[k]).abs() / gmax);
        }
    }
    worst
}

/// Largest `|Φ(x) − f(x, y*(x))| / (1 + |Φ(x)|)` over random `x`.
pub fn primal_identity_error(problem: &dyn SaddleProblem, points: usize, seed: u64) -> Result<f64, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = problem.sampling_scale();
    let mut g = vec![0.0; problem.dim_x()];
    let mut worst = 0.0_f64;
    for _ in 0..points {
        let x = gaussian(&mut rng, problem.dim_x(), s);
        let phi = problem.primal(&x, &mut g).ok_or("no closed-form primal")?;
        let y = problem.best_response(&x).ok_or("no closed-form best response")?;
        let f = problem.value(&x, &y);
        worst = worst.max((phi - f).abs() / (1.0 + phi.abs()));
    }
    Ok(worst)
}

/// Which support statement of the zero-chain property to sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainCase {
    /// At the origin: `∇ₓ ∈ X₁`, `∇ᵧ = 0`.
    Origin,
    /// `x ∈ X_k`, `y ∈ Y_k` give `∇ₓ ∈ X_{k+1}`, `∇ᵧ ∈ Y_k`.
    XAdvances,
    /// `x ∈ X_{k+1}`, `y ∈ Y_k` give `∇ₓ ∈ X_{k+1}`, `∇ᵧ ∈ Y_{k+1}`.
    YAdvances,
}

/// First index of `Y_k` in `y` (0-based, `dim_y = d + 2`); `Y_0 = {0}`.
fn y_first(d: usize, k: usize) -> usize {
    if k == 0 {
        d + 2
    } else {
        d + 1 - k
    }
}

/// Number of sampled points whose gradient leaves the predicted support
/// (exact `!= 0.0` comparisons).
pub fn zero_chain_violations(instance: &DeterministicInstance, case: ChainCase, trials: usize, seed: u64) -> usize {
    let d = instance.d();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = instance.sampling_scale();
    let mut bad = 0;
    for _ in 0..trials {
        let (kx, ky, gx_len, gy_k) = match case {
            ChainCase::Origin => (0, 0, 1, 0),
            ChainCase::XAdvances => {
                let k = rng.random_range(1..d);
                (k, k, k + 1, k)
            }
            ChainCase::YAdvances => {
                let k = rng.random_range(0..d);
                (k + 1, k, k + 1, k + 1)
            }
        };
        let mut x = vec![0.0; d + 1];
        let mut y = vec![0.0; d + 2];
        for v in x.iter_mut().take(kx) {
            *v = s * rng.sample::<f64, _>(rand_distr::StandardNormal);
        }
        for v in y.iter_mut().skip(y_first(d, ky)) {
            *v = s * rng.sample::<f64, _>(rand_distr::StandardNormal);
        }
        let g = instance.grad_at(&SaddlePoint::new(x, y));
        let x_ok = g.x[gx_len..].iter().all(|v| *v == 0.0);
        let y_ok = g.y[..y_first(d, gy_k).min(d + 2)].iter().all(|v| *v == 0.0);
        if !(x_ok && y_ok) {
            bad += 1;
        }
    }
    bad
}

/// Samples `x` with its last two chain coordinates zero and returns
/// `(violations of ‖∇Φ_d(x)‖ ≥ floor, smallest ‖∇Φ_d‖ / floor)` for the
/// unscaled chain `(λ₁, λ₂, α)`, floor `(λ₁²/8λ₂)α^{3/4}`.
pub fn floor_violations(d: usize, lambda1: f64, lambda2: f64, alpha: f64, trials: usize, seed: u64) -> (usize, f64) {
    let f = DeterministicInstance::unscaled(d, lambda1, lambda2, alpha).expect("valid chain parameters");
    let floor = lambda1 * lambda1 / (8.0 * lambda2) * alpha.powf(0.75);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = vec![0.0; d + 1];
    let (mut bad, mut worst) = (0, f64::INFINITY);
    for t in 0..trials {
        // mix of scales, plus points sitting on Γ's flat spots 0 and 1
        let mut x: Vec<f64> = match t % 4 {
            0 => gaussian(&mut rng, d + 1, 1.0),
            1 => gaussian(&mut rng, d + 1, 0.1),
            2 => (0..d + 1).map(|_| rng.random_range(-0.5..1.5)).collect(),
            _ => (0..d + 1)
                .map(|_| if rng.random_bool(0.5) { 1.0 } else { 0.0 } + 1e-3 * rng.sample::<f64, _>(rand_distr::StandardNormal))
                .collect(),
        };
        x[d - 1] = 0.0;
        x[d] = 0.0;
        f.primal(&x, &mut g);
        let r = linalg::norm(&g) / floor;
        worst = worst.min(r);
        if r < 1.0 {
            bad += 1;
        }
    }
    (bad, worst)
}

/// `|(ηL²/16μ)α^{3/4} − ε| / ε` for a deterministic spec.
pub fn scaled_floor_error(spec: &HardInstanceSpec) -> f64 {
    let floor = spec.eta * spec.l * spec.l / (16.0 * spec.mu) * spec.alpha.powf(0.75);
    (floor - spec.epsilon).abs() / spec.epsilon
}

/// Largest sampled `(1/n) Σᵢ ‖Δ∇fᵢ‖² / ‖Δz‖²` divided by `bound`.
pub fn average_smoothness_ratio(problem: &dyn SaddleProblem, pairs: usize, seed: u64, bound: f64) -> f64 {
    let e = estimate_smoothness(problem, pairs, seed);
    e.averaged * e.averaged / bound
}

/// Random linear-span runs on the case-1 instance that only ever query the
/// components in a random subset of size `touched ≤ n/2`; returns the smallest
/// `‖∇φ‖ / ε` seen along the runs.
pub fn case1_partial_floor(instance: &Case1Instance, touched: usize, runs: usize, steps: usize, seed: u64) -> f64 {
    let n = instance.n_components();
    let eps = instance.gradient_floor();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (dx, dy) = (instance.dim_x(), instance.dim_y());
    let mut worst = f64::INFINITY;
    let mut g = vec![0.0; dx];
    let (mut gx, mut gy) = (vec![0.0; dx], vec![0.0; dy]);
    for _ in 0..runs {
        let mut order: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        let allowed = &order[..touched];
        let mut x = vec![0.0; dx];
        let mut y = vec![0.0; dy];
        for _ in 0..steps {
            let i = allowed[rng.random_range(0..touched)];
            instance.component_grad(i, &x, &y, &mut gx, &mut gy);
            let a = rng.random_range(0.0..1.0) / instance.smoothness();
            let b = rng.random_range(0.0..1.0) / instance.smoothness();
            linalg::axpy(-a, &gx, &mut x);
            linalg::axpy(b, &gy, &mut y);
            instance.primal(&x, &mut g);
            worst = worst.min(linalg::norm(&g) / eps);
        }
    }
    worst
}

#[derive(Debug, Clone)]
pub struct PropertyResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub millis: f64,
}

#[derive(Debug, Clone, Default)]
pub struct VerifyReport {
    pub results: Vec<PropertyResult>,
}

impl VerifyReport {
    pub fn failed(&self) -> usize {
        self.results.iter().filter(|r| !r.passed).count()
    }

    fn check(&mut self, name: &str, f: impl FnOnce() -> Result<String, String>) {
        let t = Instant::now();
        let (passed, detail) = match std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)) {
            Ok(Ok(d)) => (true, d),
            Ok(Err(d)) => (false, d),
            Err(_) => (false, "panicked".to_string()),
        };
        self.results.push(PropertyResult {
            name: name.to_string(),
            passed,
            detail,
            millis: t.elapsed().as_secs_f64() * 1e3,
        });
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.results {
            writeln!(
                f,
                "{} {:<40} {}",
                if r.passed { "PASS" } else { "FAIL" },
                r.name,
                r.detail
            )?;
        }
        writeln!(
            f,
            "{} properties, {} passed, {} failed",
            self.results.len(),
            self.results.len() - self.failed(),
            self.failed()
        )
    }
}

fn at_most(value: f64, bound: f64, what: &str) -> Result<String, String> {
    if value <= bound {
        Ok(format!("{what} = {value:.3e} <= {bound:.1e}"))
    } else {
        Err(format!("{what} = {value:.3e} exceeds {bound:.1e}"))
    }
}

fn det_spec(d: usize) -> HardInstanceSpec {
    let eps = HardInstanceSpec::epsilon_for_dimension(ncsc_core::instances::InstanceMode::Deterministic, 1, 1.0, 0.25, 1.0, d)
        .expect("valid parameters");
    HardInstanceSpec::deterministic(1.0, 0.25, 1.0, eps, None).expect("valid parameters")
}

fn fs_spec(n: usize, d: usize) -> HardInstanceSpec {
    let mu = 1.0 / (8.0 * n as f64);
    let eps = HardInstanceSpec::epsilon_for_dimension(ncsc_core::instances::InstanceMode::FiniteSum, n, 1.0, mu, 1.0, d)
        .expect("valid parameters");
    HardInstanceSpec::finite_sum(n, 1.0, mu, 1.0, eps, None).expect("valid parameters")
}

/// Runs every property and returns the report.
pub fn run_all() -> VerifyReport {
    let mut rep = VerifyReport::default();

    for d in [1, 5, 20] {
        rep.check(&format!("gradient_fd_deterministic_d{d}"), || {
            let f = DeterministicInstance::new(&det_spec(d)).map_err(|e| e.to_string())?;
            at_most(gradient_error(&f, 20, d as u64), 1e-5, "max relative error")
        });
    }
    for n in [2, 4] {
        for d in [3, 6] {
            rep.check(&format!("gradient_fd_finite_sum_n{n}_d{d}"), || {
                let f = FiniteSumInstance::new(&fs_spec(n, d)).map_err(|e| e.to_string())?;
                at_most(gradient_error(&f, 20, (n * 10 + d) as u64), 1e-5, "max relative error")
            });
        }
    }
    rep.check("gradient_fd_case1", || {
        let f = Case1Instance::from_params(4, 1.0, 0.1, 1.0, 16).map_err(|e| e.to_string())?;
        at_most(gradient_error(&f, 20, 7), 1e-5, "max relative error")
    });

    rep.check("primal_identity_deterministic", || {
        let f = DeterministicInstance::new(&det_spec(8)).map_err(|e| e.to_string())?;
        at_most(primal_identity_error(&f, 100, 1)?, 1e-10, "relative gap")
    });
    rep.check("primal_identity_finite_sum", || {
        let f = FiniteSumInstance::new(&fs_spec(4, 5)).map_err(|e| e.to_string())?;
        at_most(primal_identity_error(&f, 100, 2)?, 1e-10, "relative gap")
    });
    rep.check("primal_identity_case1", || {
        let f = Case1Instance::from_params(4, 1.0, 0.1, 1.0, 16).map_err(|e| e.to_string())?;
        at_most(primal_identity_error(&f, 100, 3)?, 1e-10, "relative gap")
    });

    for (case, name) in [
        (ChainCase::Origin, "zero_chain_origin"),
        (ChainCase::XAdvances, "zero_chain_x_advances"),
        (ChainCase::YAdvances, "zero_chain_y_advances"),
    ] {
        rep.check(name, || {
            let f = DeterministicInstance::new(&det_spec(20)).map_err(|e| e.to_string())?;
            let bad = zero_chain_violations(&f, case, 100, 11);
            if bad == 0 {
                Ok("100 points, supports exact".into())
            } else {
                Err(format!("{bad} of 100 points left the support"))
            }
        });
    }

    rep.check("gradient_floor_unscaled_chain", || {
        let (bad, worst) = floor_violations(12, 1.0, 0.5, 0.01, 500, 5);
        if bad == 0 {
            Ok(format!("min ratio to floor {worst:.4}"))
        } else {
            Err(format!("{bad} violations, min ratio {worst:.4}"))
        }
    });
    rep.check("gradient_floor_equals_epsilon", || {
        at_most(scaled_floor_error(&det_spec(10)), 1e-12, "relative error")
    });
    rep.check("span_restricted_primal_norm_above_epsilon", || {
        let spec = det_spec(10);
        let f = DeterministicInstance::new(&spec).map_err(|e| e.to_string())?;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut g = vec![0.0; spec.d + 1];
        let mut worst = f64::INFINITY;
        for _ in 0..200 {
            let mut x = gaussian(&mut rng, spec.d + 1, spec.eta);
            x[spec.d - 1] = 0.0;
            x[spec.d] = 0.0;
            f.primal(&x, &mut g);
            worst = worst.min(linalg::norm(&g) / spec.epsilon);
        }
        if worst >= 1.0 {
            Ok(format!("min |grad Phi| / eps = {worst:.4}"))
        } else {
            Err(format!("min |grad Phi| / eps = {worst:.4}"))
        }
    });

    rep.check("lipschitz_estimate_deterministic", || {
        let f = DeterministicInstance::new(&det_spec(6)).map_err(|e| e.to_string())?;
        let e = estimate_smoothness(&f, 500, 1);
        at_most(e.lipschitz / f.smoothness(), 1.0 + 1e-6, "sampled L / advertised L")
    });
    rep.check("average_smoothness_finite_sum", || {
        let f = FiniteSumInstance::new(&fs_spec(4, 4)).map_err(|e| e.to_string())?;
        let l = f.smoothness();
        at_most(average_smoothness_ratio(&f, 1000, 2, l * l), 1.0 + 1e-6, "sampled AS / L^2")
    });
    rep.check("average_smoothness_regularized", || {
        let f = FiniteSumInstance::new(&fs_spec(4, 4)).map_err(|e| e.to_string())?;
        let l = f.smoothness();
        let (tx, ty) = (3.0 * l, 0.5 * l);
        let c = SaddlePoint::gaussian_x(f.dim_x(), f.dim_y(), f.sampling_scale(), 3);
        let r = Regularized::new(&f, tx, c.x, ty, c.y);
        let bound = 2.0 * (l + tx.max(ty)).powi(2);
        at_most(average_smoothness_ratio(&r, 1000, 4, bound), 1.0 + 1e-6, "sampled AS / 2(L+tau)^2")
    });
    rep.check("chain_matrix_adjoint", || {
        let b = ChainMatrix::new(9, 0.02).map_err(|e| e.to_string())?;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut worst = 0.0_f64;
        for _ in 0..50 {
            let x = gaussian(&mut rng, 10, 1.0);
            let y = gaussian(&mut rng, 11, 1.0);
            let lhs = linalg::dot(&b.apply(&x).map_err(|e| e.to_string())?, &y);
            let rhs = linalg::dot(&x, &b.apply_t(&y).map_err(|e| e.to_string())?);
            worst = worst.max((lhs - rhs).abs() / (1.0 + lhs.abs()));
        }
        at_most(worst, 1e-13, "<Bx,y> - <x,B^T y>")
    });
    rep.check("gamma_derivative_and_anchor", || {
        let mut worst = gamma(1.0).abs();
        for i in -20..=30 {
            let x = i as f64 / 10.0;
            let h = 1e-5;
            let fd = (gamma(x + h) - gamma(x - h)) / (2.0 * h);
            worst = worst.max((fd - gamma_prime(x)).abs() / (1.0 + gamma_prime(x).abs()));
        }
        at_most(worst, 1e-7, "max error")
    });

    rep.check("lower_bound_deterministic", || {
        let spec = &lower_bound_specs().map_err(|e| e.to_string())?[0];
        let algs = ExperimentConfig::new(Suite::LowerBound, ".").algorithms;
        let r = ncsc_core::metrics::verify_lower_bound(spec, &algs, &[0], 20_000_000).map_err(|e| e.to_string())?;
        let min = r.checks.iter().map(|c| c.epsilon_calls).fold(f64::INFINITY, f64::min);
        if r.passed() {
            Ok(format!("branch {}, min calls to eps {min} >= {}", r.branch(), r.floor))
        } else {
            Err(r.to_string())
        }
    });
    rep.check("lower_bound_finite_sum_svrg", || {
        let spec = &lower_bound_specs().map_err(|e| e.to_string())?[1];
        let r = ncsc_core::metrics::verify_lower_bound(spec, &[Algorithm::Plain(SolverKind::Svrg)], &[0, 1, 2, 3], 5_000_000)
            .map_err(|e| e.to_string())?;
        if r.passed() {
            Ok(format!("branch {}, mean calls {} >= {}", r.branch(), r.checks[0].epsilon_calls, r.floor))
        } else {
            Err(r.to_string())
        }
    });
    rep.check("lower_bound_case1", || {
        let spec = &lower_bound_specs().map_err(|e| e.to_string())?[2];
        let algs = [Algorithm::Plain(SolverKind::Svrg), Algorithm::Plain(SolverKind::Extragradient)];
        let r = ncsc_core::metrics::verify_lower_bound(spec, &algs, &[0, 1], 1_000_000).map_err(|e| e.to_string())?;
        if r.passed() {
            Ok(format!("activation floor {} met", r.floor))
        } else {
            Err(r.to_string())
        }
    });
    rep.check("case1_half_the_components_is_not_enough", || {
        let f = Case1Instance::from_params(8, 1.0, 0.1, 1.0, 64).map_err(|e| e.to_string())?;
        let worst = case1_partial_floor(&f, 4, 20, 50, 6);
        if worst >= 1.0 - 1e-12 {
            Ok(format!("min |grad phi| / eps = {worst:.4}"))
        } else {
            Err(format!("min |grad phi| / eps = {worst:.4}"))
        }
    });

    rep.check("primal_grad_norm_closed_form_vs_ascent", || {
        let f = DeterministicInstance::new(&det_spec(6)).map_err(|e| e.to_string())?;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut g = vec![0.0; f.dim_x()];
        let mut worst = 0.0_f64;
        for _ in 0..20 {
            let x = gaussian(&mut rng, f.dim_x(), f.eta());
            f.primal(&x, &mut g);
            let tol = 1e-10 * f.eta();
            let r = maximize_y(&f, &x, &vec![0.0; f.dim_y()], tol, 1_000_000).map_err(|e| e.to_string())?;
            let slack = 2.0 * f.smoothness() * r.residual / f.strong_concavity();
            let diff = (linalg::norm(&g) - linalg::norm(&r.grad_x)).abs();
            worst = worst.max(diff / (slack + 1e-300));
        }
        at_most(worst, 1.0, "difference / reported slack")
    });
    rep.check("moreau_quadratic_closed_form", || {
        let f = QuadraticSaddle::scalar(1.0, 1.0, 2.0);
        let (l, a, x) = (f.smoothness(), 1.5, 0.8);
        let expected = 2.0 * l * x * a / (a + 2.0 * l);
        let got = moreau_stationarity(&f, &[x], 1e-10).map_err(|e| e.to_string())?;
        at_most((got - expected).abs(), 1e-9, "error")
    });
    rep.check("extragradient_contracts_on_bilinear", || {
        let f = Bilinear { dim: 3 };
        let cfg = SolverConfig::new(0.25, 0.25, 200);
        let z0 = SaddlePoint::new(vec![1.0, -0.5, 0.2], vec![0.3, 0.7, -1.0]);
        let n0 = z0.norm();
        let out = run_solver(&f, SolverKind::Extragradient, &cfg, z0).map_err(|e| e.to_string())?;
        let rate = (out.point.norm() / n0).powf(1.0 / 200.0);
        at_most(rate, 1.0 - 1e-3, "per-step contraction")
    });
    rep.check("catalyst_toy_quadratic", || {
        let f = QuadraticSaddle::scalar(-0.5, 2.0, 2.0);
        let cfg = CatalystConfig {
            t_max: 60,
            ..CatalystConfig::default()
        };
        let out = catalyst_run(&f, &cfg, SaddlePoint::new(vec![1.0], vec![0.0])).map_err(|e| e.to_string())?;
        let mut g = [0.0];
        f.primal(&out.best_x, &mut g);
        at_most(g[0].abs(), 1e-3, "|grad Phi| at best outer iterate")
    });
    rep.check("inner_accuracy_schedule_is_geometric", || {
        let f = QuadraticSaddle::scalar(-0.5, 2.0, 1.0);
        let cfg = CatalystConfig {
            t_max: 3,
            ..CatalystConfig::default()
        };
        let out = catalyst_run(&f, &cfg, SaddlePoint::new(vec![1.0], vec![3.0])).map_err(|e| e.to_string())?;
        let q = 1.0 - out.trace.params.rho;
        let mut worst = 0.0_f64;
        for r in &out.trace.rounds {
            for w in r.inner.records.windows(2) {
                worst = worst.max((w[1].eps_k / w[0].eps_k - q).abs());
            }
        }
        at_most(worst, 1e-12, "deviation of eps_(k+1)/eps_k from 1-rho")
    });
    rep.check("aux_problem_matches_definition", || {
        let f = QuadraticSaddle::scalar(-0.5, 2.0, 2.0);
        let aux = build_aux_problem(&f, vec![0.4]);
        let z = SaddlePoint::new(vec![1.1], vec![-0.2]);
        let expected = f.value(&z.x, &z.y) + f.smoothness() * (1.1f64 - 0.4).powi(2);
        at_most((aux.value(&z.x, &z.y) - expected).abs(), 1e-14, "value error")
    });
    rep.check("fit_scaling_exact_power_law", || {
        let pts: Vec<(f64, f64)> = [4.0f64, 16.0, 64.0, 256.0].iter().map(|k| (*k, 3.0 * k.powf(0.5))).collect();
        let fit = fit_scaling(&pts).map_err(|e| e.to_string())?;
        at_most((fit.slope - 0.5).abs(), 1e-9, "slope error")
    });
    rep.check("spec_file_round_trip", || {
        let mut worst = 0;
        for spec in lower_bound_specs().map_err(|e| e.to_string())? {
            if parse_spec(&render_spec(&spec)).map_err(|e| e.to_string())? != spec {
                worst += 1;
            }
        }
        if worst == 0 {
            Ok("3 specs identical after round trip".into())
        } else {
            Err(format!("{worst} specs changed"))
        }
    });
    rep.check("gen_example_parameters", || {
        let s = HardInstanceSpec::deterministic(10.0, 1.0, 1.0, 0.05, None).map_err(|e| e.to_string())?;
        if s.lambda1 == 5.0 && s.lambda2 == 0.5 && (s.alpha - 1e-3).abs() < 1e-18 {
            Ok(format!("lambda = ({}, {}), alpha = {:e}, d = {}", s.lambda1, s.lambda2, s.alpha, s.d))
        } else {
            Err(format!("got lambda = ({}, {}), alpha = {:e}", s.lambda1, s.lambda2, s.alpha))
        }
    });
    rep.check("csv_round_trip", || {
        let dir = std::env::temp_dir().join(format!("ncsc-verify-{}", std::process::id()));
        let path = dir.join("rows.csv");
        let rows: Vec<ResultRow> = (0..3)
            .map(|i| ResultRow {
                suite: "verify".into(),
                instance_id: "x".into(),
                solver: "eg".into(),
                seed: i,
                kappa: 1.0 / 3.0 + i as f64,
                n: 1,
                epsilon: 1e-3 / 7.0,
                oracle_calls: 17 * i,
                grad_phi_norm: std::f64::consts::PI * 1e-9,
                moreau_norm: f64::NAN,
                wall_ms: 0.0,
            })
            .collect();
        write_results(&path, &rows).map_err(|e| e.to_string())?;
        let back = read_results(&path).map_err(|e| e.to_string())?;
        let _ = std::fs::remove_dir_all(&dir);
        let same = back.len() == rows.len()
            && back.iter().zip(&rows).all(|(a, b)| {
                a.kappa == b.kappa && a.epsilon == b.epsilon && a.grad_phi_norm == b.grad_phi_norm && a.moreau_norm.is_nan()
            });
        if same {
            Ok("3 rows identical".into())
        } else {
            Err("rows differ after round trip".into())
        }
    });
    rep.check("oracle_count_matches_solver_count", || {
        let f = DeterministicInstance::new(&det_spec(5)).map_err(|e| e.to_string())?;
        let mut msgs = Vec::new();
        for kind in [SolverKind::Gda, SolverKind::AltGda, SolverKind::Extragradient, SolverKind::Ogda] {
            let logged = Logged::new(&f);
            let cfg = SolverConfig::for_problem(kind, &f, 50);
            let out = run_solver(&logged, kind, &cfg, SaddlePoint::origin_of(&f)).map_err(|e| e.to_string())?;
            if out.calls != logged.log().total_calls() {
                msgs.push(format!("{}: solver {} vs log {}", kind.as_str(), out.calls, logged.log().total_calls()));
            }
        }
        if msgs.is_empty() {
            Ok("4 solvers agree".into())
        } else {
            Err(msgs.join("; "))
        }
    });
    rep.check("svrg_call_count_and_span", || {
        let f = FiniteSumInstance::new(&fs_spec(3, 4)).map_err(|e| e.to_string())?;
        let logged = Logged::new(&f);
        let cfg = SolverConfig::for_problem(SolverKind::Svrg, &f, 40).with_seed(5);
        let out = run_solver(&logged, SolverKind::Svrg, &cfg, SaddlePoint::origin_of(&f)).map_err(|e| e.to_string())?;
        let log = logged.log();
        if out.calls == log.total_calls() && log.protocol_violation.is_none() {
            Ok(format!("{} IFO calls, no span violation", log.ifo_calls))
        } else {
            Err(format!("solver {} vs log {}, violation {:?}", out.calls, log.total_calls(), log.protocol_violation))
        }
    });
    rep.check("runs_are_deterministic", || {
        let f = DeterministicInstance::new(&det_spec(4)).map_err(|e| e.to_string())?;
        let cfg = CatalystConfig {
            t_max: 5,
            seed: 3,
            ..CatalystConfig::default()
        };
        let a = catalyst_run(&f, &cfg, SaddlePoint::origin_of(&f)).map_err(|e| e.to_string())?;
        let b = catalyst_run(&f, &cfg, SaddlePoint::origin_of(&f)).map_err(|e| e.to_string())?;
        if a.sampled_x == b.sampled_x && a.trace.total_calls() == b.trace.total_calls() {
            Ok("identical outputs".into())
        } else {
            Err("outputs differ".into())
        }
    });
    rep
}
