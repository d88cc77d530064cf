//! Two-level inexact proximal point scheme for NC-SC problems: an outer
//! proximal loop on `x` and an accelerated proximal loop on `y`, with
//! subproblems handed to a linearly convergent saddle solver.

mod moreau;

pub use moreau::{moreau_stationarity, prox_point};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg;
use crate::metrics::{maximize_y, RunTrace, TraceRow};
use crate::problem::{Regularized, SaddlePoint, SaddleProblem};
use crate::solvers::{solve_until, SolverConfig, SolverKind};

/// `f̂(x, y) = f(x, y) + L‖x − center‖²`, advertised as `(L, μ)`-SC-SC and
/// `3L`-smooth.
pub fn build_aux_problem<P: SaddleProblem>(problem: P, center_x: Vec<f64>) -> Regularized<P> {
    let l = problem.smoothness();
    let mu = problem.strong_concavity();
    let dy = problem.dim_y();
    Regularized::new(problem, 2.0 * l, center_x, 0.0, vec![0.0; dy]).with_constants(3.0 * l, l, mu)
}

/// `f̃(x, y) = f̂(x, y) − (τ/2)‖y − z‖²`, advertised as `(L, μ+τ)`-SC-SC and
/// `(L + max{2L, τ})`-smooth, where `L` is the smoothness of the problem
/// inside `aux`.
pub fn build_subproblem<P: SaddleProblem>(aux: &Regularized<P>, tau: f64, z_center: Vec<f64>) -> Regularized<&Regularized<P>> {
    let l = aux.inner().smoothness();
    let mu = aux.inner().strong_concavity();
    let dx = aux.dim_x();
    Regularized::new(aux, 0.0, vec![0.0; dx], tau, z_center).with_constants(
        l + (2.0 * l).max(tau),
        l,
        mu + tau,
    )
}

/// Outer tolerance ratios `α_t`: `α₀ = μ⁵/(c₀ max{1, L⁷})`,
/// `α_t = μ⁵/(c L⁵)` for `t > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaSchedule {
    pub first_constant: f64,
    pub constant: f64,
    pub first_override: Option<f64>,
    pub override_all: Option<f64>,
}

impl Default for AlphaSchedule {
    fn default() -> Self {
        Self {
            first_constant: 576.0,
            constant: 504.0,
            first_override: None,
            override_all: None,
        }
    }
}

impl AlphaSchedule {
    pub fn alpha(&self, t: usize, l: f64, mu: f64) -> f64 {
        if let Some(a) = self.override_all {
            return a;
        }
        if t == 0 {
            if let Some(a) = self.first_override {
                return a;
            }
            mu.powi(5) / (self.first_constant * l.powi(7).max(1.0))
        } else {
            mu.powi(5) / (self.constant * l.powi(5))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalystConfig {
    /// Regularization `τ`; `None` picks `L − μ` (EG/OGDA) or
    /// `max{L/√n − μ, 0}` (SVRG), and `0` whenever `μ ≥ L`.
    pub tau: Option<f64>,
    /// Inner decay rate; `None` picks `0.9√q`.
    pub rho: Option<f64>,
    pub alpha: AlphaSchedule,
    pub subsolver: SolverKind,
    pub t_max: usize,
    pub k_max: usize,
    /// Iteration budget of each subproblem solve.
    pub n_max: usize,
    pub seed: u64,
    /// Tolerance on `‖∇ᵧf(x₀, y)‖` for the optional initial ascent in `y`.
    pub y_warmup_tolerance: Option<f64>,
    /// Stop once `‖∇Φ(x₀ᵗ)‖ ≤ ε` (closed-form primal only).
    pub epsilon: Option<f64>,
    /// Constant in `ε_k = c (1−ρ)^k ‖∇f̂(x₀, y₀)‖²`; `√2/4` from the gap bound.
    pub inner_constant: f64,
    /// Subsolver step as a multiple of `1/L_sub`; `None` uses `1/4` (EG/OGDA)
    /// or `1/8` (SVRG).
    pub step_scale: Option<f64>,
    /// Keep every subsolver start and exit point in the trace.
    pub record_points: bool,
}

impl Default for CatalystConfig {
    fn default() -> Self {
        Self {
            tau: None,
            rho: None,
            alpha: AlphaSchedule::default(),
            subsolver: SolverKind::Extragradient,
            t_max: 100,
            k_max: 10_000,
            n_max: 1_000_000,
            seed: 0,
            y_warmup_tolerance: None,
            epsilon: None,
            inner_constant: std::f64::consts::SQRT_2 / 4.0,
            step_scale: None,
            record_points: false,
        }
    }
}

/// Resolved `(τ, q, ρ)` for a problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatalystParams {
    pub tau: f64,
    pub q: f64,
    pub rho: f64,
    /// `(√q − q)/(√q + q)`
    pub momentum: f64,
}

impl CatalystConfig {
    pub fn with_subsolver(mut self, kind: SolverKind) -> Self {
        self.subsolver = kind;
        self
    }

    pub fn resolve(&self, l: f64, mu: f64, n: usize) -> Result<CatalystParams> {
        if !matches!(
            self.subsolver,
            SolverKind::Extragradient | SolverKind::Ogda | SolverKind::Svrg
        ) {
            return Err(Error::InvalidConfig(format!(
                "subsolver must be eg, ogda or svrg, got {}",
                self.subsolver
            )));
        }
        if self.t_max == 0 || self.k_max == 0 || self.n_max == 0 {
            return Err(Error::InvalidConfig("T_max, K_max and N_max must be positive".into()));
        }
        let tau = if mu >= l {
            0.0
        } else {
            match self.tau {
                Some(t) if t >= 0.0 && t.is_finite() => t,
                Some(t) => return Err(Error::InvalidConfig(format!("tau must be nonnegative, got {t}"))),
                None => match self.subsolver {
                    SolverKind::Svrg => (l / (n as f64).sqrt() - mu).max(0.0),
                    _ => l - mu,
                },
            }
        };
        let q = mu / (mu + tau);
        let sq = q.sqrt();
        let rho = self.rho.unwrap_or(0.9 * sq);
        if q < 1.0 && !(rho > 0.0 && rho < sq) {
            return Err(Error::InvalidConfig(format!(
                "rho = {rho} must lie in (0, sqrt(q) = {sq})"
            )));
        }
        if q >= 1.0 && !(rho > 0.0 && rho <= 1.0) {
            return Err(Error::InvalidConfig(format!("rho = {rho} must lie in (0, 1]")));
        }
        Ok(CatalystParams {
            tau,
            q,
            rho,
            momentum: (sq - q) / (sq + q),
        })
    }

    fn solver_config(&self, sub_smoothness: f64, seed: u64) -> SolverConfig {
        let scale = self.step_scale.unwrap_or(match self.subsolver {
            SolverKind::Svrg => 0.125,
            _ => 0.25,
        });
        let s = scale / sub_smoothness;
        SolverConfig::new(s, s, self.n_max).with_seed(seed)
    }
}

/// One subproblem solve.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerRecord {
    pub k: usize,
    pub eps_k: f64,
    pub iterations: usize,
    pub calls: u64,
    /// Exit criterion value `‖∇f̂(x_k, y_k)‖²`.
    pub aux_grad_sq: f64,
    pub start: Option<SaddlePoint>,
    pub exit: Option<SaddlePoint>,
}

/// Inner-loop history of one outer round.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerTrace {
    pub entry_grad_sq: f64,
    pub exit_grad_sq: f64,
    pub alpha: f64,
    pub calls: u64,
    pub records: Vec<InnerRecord>,
}

impl InnerTrace {
    pub fn k(&self) -> usize {
        self.records.len()
    }

    pub fn criterion_met(&self) -> bool {
        self.exit_grad_sq <= self.alpha * self.entry_grad_sq
    }
}

fn mix_seed(seed: u64, t: usize, k: usize) -> u64 {
    let mut h = seed ^ 0x9E37_79B9_7F4A_7C15;
    for v in [t as u64, k as u64] {
        h = (h ^ v).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        h ^= h >> 31;
    }
    h
}

/// Accelerated proximal loop on `y` for one auxiliary problem `f̂`, starting
/// from `start = (x₀, y₀)`, with exit ratio `alpha`.
pub fn inner_loop<P: SaddleProblem>(
    aux: &Regularized<P>,
    start: &SaddlePoint,
    config: &CatalystConfig,
    params: &CatalystParams,
    alpha: f64,
    round: usize,
) -> Result<(SaddlePoint, InnerTrace)> {
    let l = aux.inner().smoothness();
    let sub_l = l + (2.0 * l).max(params.tau);
    let entry = aux.grad_at(start).norm_sq();
    let mut calls = 1;
    let target = alpha * entry;
    let mut records = Vec::new();
    let mut prev = start.clone();
    let mut z = start.y.clone();
    let mut best_ratio = f64::INFINITY;

    for k in 1..=config.k_max {
        let eps_k = config.inner_constant * (1.0 - params.rho).powi(k as i32) * entry;
        let sub = build_subproblem(aux, params.tau, z.clone());
        let cfg = config.solver_config(sub_l, mix_seed(config.seed, round, k));
        let out = solve_until(&sub, config.subsolver, &cfg, prev.clone(), eps_k)?;
        let aux_sq = aux.grad_at(&out.point).norm_sq();
        calls += out.calls + 1;
        records.push(InnerRecord {
            k,
            eps_k,
            iterations: out.iterations,
            calls: out.calls,
            aux_grad_sq: aux_sq,
            start: config.record_points.then(|| prev.clone()),
            exit: config.record_points.then(|| out.point.clone()),
        });
        if entry > 0.0 {
            best_ratio = best_ratio.min(aux_sq / entry);
        }
        if aux_sq <= target {
            let trace = InnerTrace {
                entry_grad_sq: entry,
                exit_grad_sq: aux_sq,
                alpha,
                calls,
                records,
            };
            return Ok((out.point, trace));
        }
        if aux.interrupted() {
            return Err(Error::Interrupted);
        }
        let y_prev = std::mem::replace(&mut prev, out.point).y;
        for j in 0..z.len() {
            z[j] = prev.y[j] + params.momentum * (prev.y[j] - y_prev[j]);
        }
    }
    Err(Error::InnerLoopExceeded {
        k_max: config.k_max,
        best_ratio,
        target: alpha,
    })
}

/// One outer round.
#[derive(Debug, Clone, PartialEq)]
pub struct OuterRecord {
    pub t: usize,
    /// Cumulative oracle calls at the end of the round.
    pub calls: u64,
    pub inner: InnerTrace,
    /// `x₀ᵗ`, the center of this round.
    pub x_start: Vec<f64>,
    /// `‖∇Φ(x₀ᵗ)‖` (NaN without closed-form primal).
    pub grad_phi_start: f64,
    /// `‖∇Φ(x₀ᵗ⁺¹)‖`.
    pub grad_phi_end: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalystTrace {
    pub params: CatalystParams,
    pub warmup_calls: u64,
    pub rounds: Vec<OuterRecord>,
    /// Index `t` (1-based) of the sampled output `x₀ᵗ`.
    pub sampled_index: usize,
    /// Which quantity stands in for the duality gap in `ε_k`.
    pub gap_surrogate: &'static str,
    /// Final iterate `x₀ᵀ`.
    pub x_final: Vec<f64>,
    pub y_final: Vec<f64>,
}

impl CatalystTrace {
    pub fn total_calls(&self) -> u64 {
        self.rounds.last().map_or(self.warmup_calls, |r| r.calls)
    }

    /// `x₀ᵗ` for `t = 0..=T`.
    pub fn outer_iterates(&self) -> Vec<&[f64]> {
        let mut v: Vec<&[f64]> = self.rounds.iter().map(|r| r.x_start.as_slice()).collect();
        v.push(&self.x_final);
        v
    }

    pub fn run_trace(&self) -> RunTrace {
        let mut tr = RunTrace::default();
        for r in &self.rounds {
            tr.push(TraceRow {
                calls: r.calls,
                iteration: r.t + 1,
                grad_phi_norm: r.grad_phi_end,
                grad_sq: r.inner.exit_grad_sq,
                wall_ms: 0.0,
            });
        }
        tr
    }
}

#[derive(Debug, Clone)]
pub struct CatalystOutput {
    /// `x̂_T`, drawn uniformly from `x₀¹, …, x₀ᵀ`.
    pub sampled_x: Vec<f64>,
    /// Outer iterate with the smallest `‖∇Φ‖` (smallest exit `‖∇f̂‖²`
    /// without a closed-form primal).
    pub best_x: Vec<f64>,
    pub trace: CatalystTrace,
    /// `Some(false)` when an `ε` target was set and not reached.
    pub reached_epsilon: Option<bool>,
}

fn grad_phi(problem: &(impl SaddleProblem + ?Sized), x: &[f64]) -> f64 {
    let mut g = vec![0.0; problem.dim_x()];
    match problem.primal(x, &mut g) {
        Some(_) => linalg::norm(&g),
        None => f64::NAN,
    }
}

/// Full two-level scheme from `start`.
pub fn catalyst_run<P: SaddleProblem + ?Sized>(
    problem: &P,
    config: &CatalystConfig,
    start: SaddlePoint,
) -> Result<CatalystOutput> {
    start.check_dims(problem)?;
    let l = problem.smoothness();
    let mu = problem.strong_concavity();
    let params = config.resolve(l, mu, problem.n_components())?;

    let mut z0 = start;
    let mut calls = 0;
    if let Some(tol) = config.y_warmup_tolerance {
        let r = maximize_y(problem, &z0.x, &z0.y, tol, config.n_max)?;
        calls += r.calls;
        z0.y = r.y;
    }
    let warmup_calls = calls;

    let mut rounds = Vec::new();
    let mut gphi_start = grad_phi(problem, &z0.x);
    let mut best = (z0.x.clone(), gphi_start, f64::INFINITY);
    let mut reached = config.epsilon.map(|e| gphi_start <= e);

    for t in 0..config.t_max {
        if reached == Some(true) || problem.interrupted() {
            break;
        }
        let alpha = config.alpha.alpha(t, l, mu);
        let aux = build_aux_problem(problem, z0.x.clone());
        let (next, inner) = match inner_loop(&aux, &z0, config, &params, alpha, t) {
            Ok(v) => v,
            Err(Error::Interrupted) => break,
            Err(e) => return Err(e),
        };
        calls += inner.calls;
        let gphi_end = grad_phi(problem, &next.x);
        let score_better = if gphi_end.is_nan() {
            inner.exit_grad_sq < best.2
        } else {
            gphi_end < best.1 || best.1.is_nan()
        };
        if score_better {
            best = (next.x.clone(), gphi_end, inner.exit_grad_sq);
        }
        rounds.push(OuterRecord {
            t,
            calls,
            inner,
            x_start: z0.x.clone(),
            grad_phi_start: gphi_start,
            grad_phi_end: gphi_end,
        });
        if let Some(e) = config.epsilon {
            if gphi_end <= e {
                reached = Some(true);
            }
        }
        z0 = next;
        gphi_start = gphi_end;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let sampled_index = if rounds.is_empty() {
        0
    } else {
        rng.random_range(1..=rounds.len())
    };
    let sampled_x = if sampled_index == 0 {
        z0.x.clone()
    } else if sampled_index == rounds.len() {
        z0.x.clone()
    } else {
        rounds[sampled_index].x_start.clone()
    };

    Ok(CatalystOutput {
        sampled_x,
        best_x: best.0,
        reached_epsilon: reached,
        trace: CatalystTrace {
            params,
            warmup_calls,
            rounds,
            sampled_index,
            gap_surrogate: "sqrt(2)/4 * ||grad f_hat(x0, y0)||^2 (gradient bound on the gap)",
            x_final: z0.x,
            y_final: z0.y,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::QuadraticSaddle;

    #[test]
    fn alpha_schedule_values() {
        let s = AlphaSchedule::default();
        assert!((s.alpha(1, 10.0, 1.0) - 1.0 / (504.0 * 1e5)).abs() < 1e-20);
        assert!((s.alpha(0, 10.0, 1.0) - 1.0 / (576.0 * 1e7)).abs() < 1e-22);
        assert!((s.alpha(0, 0.5, 1.0) - 1.0 / 576.0).abs() < 1e-15);
    }

    #[test]
    fn momentum_for_q_one_percent() {
        let cfg = CatalystConfig {
            tau: Some(99.0),
            ..Default::default()
        };
        let p = cfg.resolve(100.0, 1.0, 1).unwrap();
        assert!((p.q - 0.01).abs() < 1e-15);
        assert!((p.momentum - 0.09 / 0.11).abs() < 1e-12);
        assert!((p.rho - 0.09).abs() < 1e-12);
    }

    #[test]
    fn degenerate_condition_number() {
        let p = CatalystConfig::default().resolve(1.0, 2.0, 1).unwrap();
        assert_eq!(p.tau, 0.0);
        assert_eq!(p.q, 1.0);
    }

    #[test]
    fn aux_gradient_at_center() {
        let f = QuadraticSaddle::scalar(-0.5, 2.0, 2.0);
        let aux = build_aux_problem(&f, vec![0.7]);
        let z = SaddlePoint::new(vec![0.7], vec![0.3]);
        assert_eq!(aux.grad_at(&z), f.grad_at(&z));
        assert_eq!(aux.smoothness(), 3.0 * f.smoothness());
        let sub = build_subproblem(&aux, 0.0, vec![5.0]);
        assert_eq!(sub.grad_at(&z), aux.grad_at(&z));
        let sub = build_subproblem(&aux, 3.0, vec![0.3]);
        assert_eq!(sub.grad_at(&z).y, aux.grad_at(&z).y);
    }

    #[test]
    fn rejects_gda_subsolver() {
        let cfg = CatalystConfig::default().with_subsolver(SolverKind::Gda);
        assert!(cfg.resolve(2.0, 1.0, 1).is_err());
    }
}
