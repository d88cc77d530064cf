//! Gradient-based saddle solvers: GDA, alternating GDA, extragradient,
//! optimistic GDA and an SVRG-style variance-reduced method.
//!
//! Every solver is a state machine whose first act at each iterate is a
//! gradient evaluation there; that gradient is cached, so checking a
//! gradient-norm criterion between steps costs no extra oracle calls.

mod rate;

pub use rate::RateModel;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg;
use crate::metrics::{RunTrace, TraceRow};
use crate::problem::{Gradient, SaddlePoint, SaddleProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverKind {
    Gda,
    AltGda,
    Extragradient,
    Ogda,
    Svrg,
}

impl SolverKind {
    pub const ALL: [SolverKind; 5] = [
        SolverKind::Gda,
        SolverKind::AltGda,
        SolverKind::Extragradient,
        SolverKind::Ogda,
        SolverKind::Svrg,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SolverKind::Gda => "gda",
            SolverKind::AltGda => "alt_gda",
            SolverKind::Extragradient => "eg",
            SolverKind::Ogda => "ogda",
            SolverKind::Svrg => "svrg",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "gda" => Ok(SolverKind::Gda),
            "alt_gda" | "altgda" | "agda" => Ok(SolverKind::AltGda),
            "eg" | "extragradient" => Ok(SolverKind::Extragradient),
            "ogda" => Ok(SolverKind::Ogda),
            "svrg" => Ok(SolverKind::Svrg),
            other => Err(Error::InvalidConfig(format!("unknown solver '{other}'"))),
        }
    }
}

pub type StopPredicate = Arc<dyn Fn(&SaddlePoint) -> bool + Send + Sync>;

#[derive(Clone)]
pub struct SolverConfig {
    pub step_x: f64,
    pub step_y: f64,
    pub max_iters: usize,
    pub seed: u64,
    /// Inner steps per SVRG epoch; `None` means `2n`.
    pub epoch_length: Option<usize>,
    pub stop_predicate: Option<StopPredicate>,
    /// Record a trace row every this many iterations (0: start and end only).
    pub trace_every: usize,
}

impl fmt::Debug for SolverConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SolverConfig")
            .field("step_x", &self.step_x)
            .field("step_y", &self.step_y)
            .field("max_iters", &self.max_iters)
            .field("seed", &self.seed)
            .field("epoch_length", &self.epoch_length)
            .field("stop_predicate", &self.stop_predicate.is_some())
            .field("trace_every", &self.trace_every)
            .finish()
    }
}

impl SolverConfig {
    pub fn new(step_x: f64, step_y: f64, max_iters: usize) -> Self {
        Self {
            step_x,
            step_y,
            max_iters,
            seed: 0,
            epoch_length: None,
            stop_predicate: None,
            trace_every: 0,
        }
    }

    /// Default steps for `kind` on a problem with advertised smoothness `L`
    /// and strong concavity `μ`:
    /// EG/OGDA `1/(4L)`, SVRG `1/(8L)`, GDA and alternating GDA the
    /// two-timescale pair `(1/(16(κ+1)²L), 1/L)`.
    pub fn for_problem(kind: SolverKind, problem: &(impl SaddleProblem + ?Sized), max_iters: usize) -> Self {
        let l = problem.smoothness();
        let (sx, sy) = match kind {
            SolverKind::Extragradient | SolverKind::Ogda => (0.25 / l, 0.25 / l),
            SolverKind::Svrg => (0.125 / l, 0.125 / l),
            SolverKind::Gda | SolverKind::AltGda => {
                let kappa = l / problem.strong_concavity();
                (1.0 / (16.0 * (kappa + 1.0).powi(2) * l), 1.0 / l)
            }
        };
        Self::new(sx, sy, max_iters)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_trace_every(mut self, every: usize) -> Self {
        self.trace_every = every;
        self
    }

    pub fn with_stop(mut self, predicate: StopPredicate) -> Self {
        self.stop_predicate = Some(predicate);
        self
    }

    pub fn with_epoch_length(mut self, m: usize) -> Self {
        self.epoch_length = Some(m);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step_x > 0.0 && self.step_y > 0.0) || !self.step_x.is_finite() || !self.step_y.is_finite() {
            return Err(Error::InvalidConfig("step sizes must be positive and finite".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
        }
        if self.epoch_length == Some(0) {
            return Err(Error::InvalidConfig("epoch length must be at least 1".into()));
        }
        Ok(())
    }
}

/// Why a fixed-budget run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Budget,
    Predicate,
    Interrupted,
}

/// Stepwise solver over a borrowed problem.
pub struct Solver<'p, P: ?Sized> {
    problem: &'p P,
    kind: SolverKind,
    cfg: SolverConfig,
    z: SaddlePoint,
    g: Option<Gradient>,
    prev_g: Option<Gradient>,
    rng: ChaCha8Rng,
    fo_calls: u64,
    ifo_calls: u64,
    iterations: usize,
    gi: Gradient,
    gs: Gradient,
}

impl<'p, P: SaddleProblem + ?Sized> Solver<'p, P> {
    pub fn new(problem: &'p P, kind: SolverKind, cfg: SolverConfig, start: SaddlePoint) -> Result<Self> {
        cfg.validate()?;
        start.check_dims(problem)?;
        if !start.is_finite() {
            return Err(Error::NonFinite("start point".into()));
        }
        if kind == SolverKind::Svrg && problem.n_components() < 2 {
            return Err(Error::NeedsComponents);
        }
        let (dx, dy) = (problem.dim_x(), problem.dim_y());
        Ok(Self {
            problem,
            kind,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            cfg,
            z: start,
            g: None,
            prev_g: None,
            fo_calls: 0,
            ifo_calls: 0,
            iterations: 0,
            gi: Gradient::zeros(dx, dy),
            gs: Gradient::zeros(dx, dy),
        })
    }

    pub fn point(&self) -> &SaddlePoint {
        &self.z
    }

    pub fn into_point(self) -> SaddlePoint {
        self.z
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn calls(&self) -> u64 {
        self.fo_calls + self.ifo_calls
    }

    pub fn fo_calls(&self) -> u64 {
        self.fo_calls
    }

    pub fn ifo_calls(&self) -> u64 {
        self.ifo_calls
    }

    fn eval(&mut self, x: &[f64], y: &[f64]) -> Gradient {
        let mut g = Gradient::zeros(self.problem.dim_x(), self.problem.dim_y());
        self.problem.grad(x, y, &mut g.x, &mut g.y);
        self.fo_calls += 1;
        g
    }

    /// Full gradient at the current iterate (cached). SVRG assembles it
    /// from `n` component calls.
    pub fn grad(&mut self) -> &Gradient {
        if self.g.is_none() {
            let g = if self.kind == SolverKind::Svrg {
                let n = self.problem.n_components();
                let mut acc = Gradient::zeros(self.problem.dim_x(), self.problem.dim_y());
                for i in 0..n {
                    self.problem
                        .component_grad(i, &self.z.x, &self.z.y, &mut self.gi.x, &mut self.gi.y);
                    linalg::axpy(1.0, &self.gi.x, &mut acc.x);
                    linalg::axpy(1.0, &self.gi.y, &mut acc.y);
                }
                self.ifo_calls += n as u64;
                linalg::scale(1.0 / n as f64, &mut acc.x);
                linalg::scale(1.0 / n as f64, &mut acc.y);
                acc
            } else {
                let (x, y) = (self.z.x.clone(), self.z.y.clone());
                self.eval(&x, &y)
            };
            self.g = Some(g);
        }
        self.g.as_ref().expect("gradient cached")
    }

    /// One iteration (one epoch for SVRG).
    pub fn step(&mut self) -> Result<()> {
        self.grad();
        let g = self.g.take().expect("gradient cached");
        let (sx, sy) = (self.cfg.step_x, self.cfg.step_y);
        match self.kind {
            SolverKind::Gda => {
                linalg::axpy(-sx, &g.x, &mut self.z.x);
                linalg::axpy(sy, &g.y, &mut self.z.y);
            }
            SolverKind::AltGda => {
                linalg::axpy(-sx, &g.x, &mut self.z.x);
                let (x, y) = (self.z.x.clone(), self.z.y.clone());
                let mid = self.eval(&x, &y);
                linalg::axpy(sy, &mid.y, &mut self.z.y);
            }
            SolverKind::Extragradient => {
                let mut half = self.z.clone();
                linalg::axpy(-sx, &g.x, &mut half.x);
                linalg::axpy(sy, &g.y, &mut half.y);
                let gh = self.eval(&half.x, &half.y);
                linalg::axpy(-sx, &gh.x, &mut self.z.x);
                linalg::axpy(sy, &gh.y, &mut self.z.y);
            }
            SolverKind::Ogda => {
                let prev = self.prev_g.take().unwrap_or_else(|| g.clone());
                for j in 0..self.z.x.len() {
                    self.z.x[j] -= sx * (2.0 * g.x[j] - prev.x[j]);
                }
                for j in 0..self.z.y.len() {
                    self.z.y[j] += sy * (2.0 * g.y[j] - prev.y[j]);
                }
                self.prev_g = Some(g.clone());
            }
            SolverKind::Svrg => self.svrg_epoch(&g),
        }
        self.iterations += 1;
        if !self.z.is_finite() {
            return Err(Error::Divergence {
                iteration: self.iterations,
            });
        }
        Ok(())
    }

    fn svrg_epoch(&mut self, full: &Gradient) {
        let n = self.problem.n_components();
        let m = self.cfg.epoch_length.unwrap_or(2 * n);
        let snapshot = self.z.clone();
        let (sx, sy) = (self.cfg.step_x, self.cfg.step_y);
        for _ in 0..m {
            let i = self.rng.random_range(0..n);
            self.problem
                .component_grad(i, &self.z.x, &self.z.y, &mut self.gi.x, &mut self.gi.y);
            self.problem
                .component_grad(i, &snapshot.x, &snapshot.y, &mut self.gs.x, &mut self.gs.y);
            self.ifo_calls += 2;
            for j in 0..self.z.x.len() {
                self.z.x[j] -= sx * (self.gi.x[j] - self.gs.x[j] + full.x[j]);
            }
            for j in 0..self.z.y.len() {
                self.z.y[j] += sy * (self.gi.y[j] - self.gs.y[j] + full.y[j]);
            }
            if self.problem.interrupted() {
                break;
            }
        }
    }
}

/// Result of a fixed-budget run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub point: SaddlePoint,
    pub trace: RunTrace,
    pub iterations: usize,
    pub calls: u64,
    pub reason: StopReason,
}

fn trace_row<P: SaddleProblem + ?Sized>(
    problem: &P,
    solver: &mut Solver<'_, P>,
    started: Instant,
) -> TraceRow {
    let grad_sq = solver.grad().norm_sq();
    let mut gphi = vec![0.0; problem.dim_x()];
    let grad_phi_norm = match problem.primal(&solver.point().x, &mut gphi) {
        Some(_) => linalg::norm(&gphi),
        None => f64::NAN,
    };
    TraceRow {
        calls: solver.calls(),
        iteration: solver.iterations(),
        grad_phi_norm,
        grad_sq,
        wall_ms: started.elapsed().as_secs_f64() * 1e3,
    }
}

/// Runs `kind` for `max_iters` iterations, or until the stop predicate holds
/// at the current iterate, or until the problem reports an interruption.
pub fn run_solver<P: SaddleProblem + ?Sized>(
    problem: &P,
    kind: SolverKind,
    config: &SolverConfig,
    start: SaddlePoint,
) -> Result<RunOutcome> {
    let started = Instant::now();
    let mut solver = Solver::new(problem, kind, config.clone(), start)?;
    let mut trace = RunTrace::default();
    trace.push(trace_row(problem, &mut solver, started));
    let reason = loop {
        if let Some(p) = &config.stop_predicate {
            if p(solver.point()) {
                break StopReason::Predicate;
            }
        }
        if problem.interrupted() {
            break StopReason::Interrupted;
        }
        if solver.iterations() >= config.max_iters {
            break StopReason::Budget;
        }
        solver.step()?;
        if config.trace_every > 0 && solver.iterations() % config.trace_every == 0 {
            trace.push(trace_row(problem, &mut solver, started));
        }
    };
    if reason != StopReason::Interrupted {
        trace.push(trace_row(problem, &mut solver, started));
    }
    Ok(RunOutcome {
        iterations: solver.iterations(),
        calls: solver.calls(),
        point: solver.into_point(),
        trace,
        reason,
    })
}

pub fn gda<P: SaddleProblem + ?Sized>(problem: &P, config: &SolverConfig, start: SaddlePoint) -> Result<RunOutcome> {
    run_solver(problem, SolverKind::Gda, config, start)
}

pub fn alt_gda<P: SaddleProblem + ?Sized>(problem: &P, config: &SolverConfig, start: SaddlePoint) -> Result<RunOutcome> {
    run_solver(problem, SolverKind::AltGda, config, start)
}

pub fn extragradient<P: SaddleProblem + ?Sized>(
    problem: &P,
    config: &SolverConfig,
    start: SaddlePoint,
) -> Result<RunOutcome> {
    run_solver(problem, SolverKind::Extragradient, config, start)
}

pub fn ogda<P: SaddleProblem + ?Sized>(problem: &P, config: &SolverConfig, start: SaddlePoint) -> Result<RunOutcome> {
    run_solver(problem, SolverKind::Ogda, config, start)
}

pub fn svrg_saddle<P: SaddleProblem + ?Sized>(
    problem: &P,
    config: &SolverConfig,
    start: SaddlePoint,
) -> Result<RunOutcome> {
    run_solver(problem, SolverKind::Svrg, config, start)
}

/// Result of [`solve_until`].
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub point: SaddlePoint,
    pub iterations: usize,
    pub calls: u64,
    /// `‖∇f‖²` at `point`.
    pub grad_sq: f64,
}

/// Iterates until `‖∇f(z)‖² ≤ threshold` at the current iterate, checking
/// after every iteration (every epoch for SVRG).
pub fn solve_until<P: SaddleProblem + ?Sized>(
    problem: &P,
    kind: SolverKind,
    config: &SolverConfig,
    start: SaddlePoint,
    threshold: f64,
) -> Result<SolveOutcome> {
    if !(threshold >= 0.0) {
        return Err(Error::InvalidConfig(format!("threshold must be nonnegative, got {threshold}")));
    }
    let mut solver = Solver::new(problem, kind, config.clone(), start)?;
    let mut best = f64::INFINITY;
    loop {
        let gsq = solver.grad().norm_sq();
        best = best.min(gsq);
        if gsq <= threshold {
            return Ok(SolveOutcome {
                iterations: solver.iterations(),
                calls: solver.calls(),
                grad_sq: gsq,
                point: solver.into_point(),
            });
        }
        if problem.interrupted() {
            return Err(Error::Interrupted);
        }
        if solver.iterations() >= config.max_iters {
            return Err(Error::BudgetExceeded {
                budget: config.max_iters,
                best_grad_sq: best,
            });
        }
        solver.step()?;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{Bilinear, QuadraticSaddle};

    #[test]
    fn gda_contracts_on_decoupled_quadratic() {
        let f = QuadraticSaddle::scalar(1.0, 0.0, 1.0);
        let cfg = SolverConfig::new(0.1, 0.1, 1);
        let mut z = SaddlePoint::new(vec![1.0], vec![-2.0]);
        let mut last = z.norm();
        for _ in 0..80 {
            z = gda(&f, &cfg, z).unwrap().point;
            assert!(z.norm() < last);
            last = z.norm();
        }
        assert!(last < 1e-2);
    }

    #[test]
    fn gda_spirals_out_on_bilinear() {
        let f = Bilinear { dim: 1 };
        let cfg = SolverConfig::new(0.1, 0.1, 1);
        let mut z = SaddlePoint::new(vec![1.0], vec![0.5]);
        let mut last = z.norm();
        for _ in 0..100 {
            z = gda(&f, &cfg, z).unwrap().point;
            assert!(z.norm() >= last);
            last = z.norm();
        }
    }

    #[test]
    fn call_accounting_per_iteration() {
        let f = QuadraticSaddle::scalar(1.0, 0.5, 1.0);
        let z0 = SaddlePoint::new(vec![1.0], vec![1.0]);
        let cases = [
            (SolverKind::Gda, 1),
            (SolverKind::AltGda, 2),
            (SolverKind::Extragradient, 2),
            (SolverKind::Ogda, 1),
        ];
        for (kind, per_iter) in cases {
            let mut s = Solver::new(&f, kind, SolverConfig::new(0.1, 0.1, 10), z0.clone()).unwrap();
            for _ in 0..7 {
                s.step().unwrap();
            }
            assert_eq!(s.calls(), 7 * per_iter, "{kind}");
        }
    }

    #[test]
    fn svrg_rejects_single_component() {
        let f = QuadraticSaddle::scalar(1.0, 0.5, 1.0);
        let cfg = SolverConfig::new(0.1, 0.1, 10);
        assert!(matches!(
            svrg_saddle(&f, &cfg, SaddlePoint::zeros(1, 1)),
            Err(Error::NeedsComponents)
        ));
    }

    #[test]
    fn solve_until_trivial_cases() {
        let f = QuadraticSaddle::scalar(1.0, 0.5, 1.0);
        let cfg = SolverConfig::new(0.2, 0.2, 5);
        let out = solve_until(&f, SolverKind::Extragradient, &cfg, SaddlePoint::zeros(1, 1), 1e-12).unwrap();
        assert_eq!(out.iterations, 0);
        let err = solve_until(&f, SolverKind::Extragradient, &cfg, SaddlePoint::new(vec![1.0], vec![1.0]), 0.0);
        assert!(matches!(err, Err(Error::BudgetExceeded { budget: 5, .. })));
    }

    #[test]
    fn divergence_names_iteration() {
        let f = QuadraticSaddle::scalar(-1.0, 0.0, 1.0);
        let cfg = SolverConfig::new(1e200, 0.1, 10);
        let err = gda(&f, &cfg, SaddlePoint::new(vec![1.0], vec![0.0])).unwrap_err();
        assert!(matches!(err, Error::Divergence { iteration: 2 }));
    }

    #[test]
    fn solver_names_round_trip() {
        for k in SolverKind::ALL {
            assert_eq!(k.as_str().parse::<SolverKind>().unwrap(), k);
        }
    }
}
