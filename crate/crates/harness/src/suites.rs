//! Experiment suites over instance/solver/seed grids.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use ncsc_core::catalyst::{catalyst_run, moreau_stationarity, CatalystConfig};
use ncsc_core::instances::{
    build_instance, DeterministicInstance, FiniteSumInstance, HardInstanceSpec, InstanceMode,
};
use ncsc_core::linalg::LineFit;
use ncsc_core::metrics::{
    average_by_kappa, fit_scaling, measure_run, verify_lower_bound, Algorithm, LowerBoundReport, MeasureConfig,
};
use ncsc_core::solvers::{run_solver, SolverConfig, SolverKind};
use ncsc_core::{Logged, SaddlePoint, SaddleProblem};
use rayon::prelude::*;

use crate::error::{HarnessError, HarnessResult};
use crate::output::{write_lower_bound, write_results, ResultRow};
use crate::spec_file::{instance_id, read_spec};
use crate::svg::{log_log_plot, Series};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    KappaSweep,
    NSweep,
    LowerBound,
    SingleRun,
    VerifyAll,
}

impl Suite {
    pub fn as_str(&self) -> &'static str {
        match self {
            Suite::KappaSweep => "kappa_sweep",
            Suite::NSweep => "n_sweep",
            Suite::LowerBound => "lower_bound",
            Suite::SingleRun => "single_run",
            Suite::VerifyAll => "verify_all",
        }
    }

    fn stochastic(&self) -> bool {
        !matches!(self, Suite::VerifyAll)
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = HarnessError;

    fn from_str(s: &str) -> HarnessResult<Self> {
        match s.replace('-', "_").as_str() {
            "kappa_sweep" => Ok(Suite::KappaSweep),
            "n_sweep" => Ok(Suite::NSweep),
            "lower_bound" => Ok(Suite::LowerBound),
            "single_run" => Ok(Suite::SingleRun),
            "verify_all" => Ok(Suite::VerifyAll),
            _ => Err(HarnessError::Config(format!(
                "unknown suite `{s}` (kappa_sweep, n_sweep, lower_bound, single_run, verify_all)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub suite: Suite,
    /// Instance file for `single_run`.
    pub instance: Option<PathBuf>,
    pub algorithms: Vec<Algorithm>,
    pub tau: Option<f64>,
    pub rho: Option<f64>,
    pub seeds: Vec<u64>,
    pub jobs: usize,
    pub out_dir: PathBuf,
    pub kappas: Vec<f64>,
    pub ns: Vec<usize>,
    /// Target accuracy for the sweeps.
    pub epsilon: f64,
    /// Oracle-cost cap per run.
    pub budget: u64,
    /// Start `x ~ N(0, (σ·η)² I)` with `σ` this value; `0` starts at the origin.
    pub start_noise: f64,
    /// Record wall-clock times (otherwise `wall_ms = 0`, keeping output reproducible).
    pub timing: bool,
    pub trace_every: usize,
}

impl ExperimentConfig {
    pub fn new(suite: Suite, out_dir: impl Into<PathBuf>) -> Self {
        let algorithms = match suite {
            Suite::NSweep => vec![
                Algorithm::Plain(SolverKind::Svrg),
                Algorithm::Plain(SolverKind::Extragradient),
            ],
            Suite::LowerBound => vec![
                Algorithm::Plain(SolverKind::Gda),
                Algorithm::Plain(SolverKind::AltGda),
                Algorithm::Plain(SolverKind::Extragradient),
                Algorithm::Plain(SolverKind::Ogda),
                Algorithm::Catalyst(SolverKind::Extragradient),
            ],
            Suite::SingleRun => vec![Algorithm::Catalyst(SolverKind::Extragradient)],
            _ => vec![
                Algorithm::Plain(SolverKind::Gda),
                Algorithm::Catalyst(SolverKind::Extragradient),
            ],
        };
        let seeds = match suite {
            Suite::LowerBound => (0..20).collect(),
            Suite::SingleRun => vec![0],
            _ => (0..5).collect(),
        };
        Self {
            suite,
            instance: None,
            algorithms,
            tau: None,
            rho: None,
            seeds,
            jobs: 1,
            out_dir: out_dir.into(),
            kappas: vec![4.0, 16.0, 64.0, 256.0],
            ns: vec![2, 4, 8, 16],
            epsilon: 6e-3,
            budget: 200_000_000,
            start_noise: 1e-2,
            timing: false,
            trace_every: 100,
        }
    }

    pub fn validate(&self) -> HarnessResult<()> {
        let cfg = |m: String| Err(HarnessError::Config(m));
        if self.suite.stochastic() && self.seeds.is_empty() {
            return cfg(format!("suite {} needs at least one seed", self.suite));
        }
        if self.suite == Suite::SingleRun {
            match &self.instance {
                None => return cfg("single_run needs an instance file".into()),
                Some(p) if !p.is_file() => return cfg(format!("instance file {} does not exist", p.display())),
                _ => {}
            }
            if self.algorithms.len() != 1 {
                return cfg("single_run takes exactly one solver".into());
            }
        }
        if self.algorithms.is_empty() && self.suite != Suite::VerifyAll {
            return cfg("no solver given".into());
        }
        if self.jobs == 0 {
            return cfg("--jobs must be at least 1".into());
        }
        if !(self.epsilon > 0.0) || self.budget == 0 {
            return cfg("epsilon and budget must be positive".into());
        }
        if self.kappas.iter().any(|k| !(*k >= 1.0)) {
            return cfg("every kappa must be at least 1".into());
        }
        if !(self.start_noise >= 0.0) {
            return cfg("start noise must be nonnegative".into());
        }
        Ok(())
    }

    fn catalyst_template(&self) -> CatalystConfig {
        CatalystConfig {
            tau: self.tau,
            rho: self.rho,
            ..CatalystConfig::default()
        }
    }

    fn pool(&self) -> HarnessResult<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs)
            .build()
            .map_err(|e| HarnessError::Config(format!("cannot start worker pool: {e}")))
    }
}

/// What a suite produced.
#[derive(Debug, Clone, Default)]
pub struct SuiteOutput {
    pub rows: Vec<ResultRow>,
    /// `(algorithm, fit of log calls against log κ or log n)`.
    pub fits: Vec<(String, LineFit)>,
    pub reports: Vec<LowerBoundReport>,
    pub files: Vec<PathBuf>,
    pub summary: String,
}

/// Deterministic instance `(L, μ, Δ) = (1, 1/κ, 1)` at accuracy `ε`.
pub fn kappa_instance(kappa: f64, epsilon: f64) -> HarnessResult<DeterministicInstance> {
    let spec = HardInstanceSpec::deterministic(1.0, 1.0 / kappa, 1.0, epsilon, None)?;
    Ok(DeterministicInstance::new(&spec)?)
}

/// Finite-sum instance `(L, μ, Δ) = (1, 1/128, 1)` with `n` components.
pub fn n_instance(n: usize, epsilon: f64) -> HarnessResult<FiniteSumInstance> {
    let spec = HardInstanceSpec::finite_sum(n, 1.0, 1.0 / 128.0, 1.0, epsilon, None)?;
    Ok(FiniteSumInstance::new(&spec)?)
}

struct GridPoint {
    index: usize,
    algorithm: Algorithm,
    seed: u64,
}

fn grid(values: usize, cfg: &ExperimentConfig) -> Vec<GridPoint> {
    let mut g = Vec::new();
    for index in 0..values {
        for &algorithm in &cfg.algorithms {
            for &seed in &cfg.seeds {
                g.push(GridPoint { index, algorithm, seed });
            }
        }
    }
    g
}

fn sweep_row<P: SaddleProblem>(
    problem: &P,
    spec: &HardInstanceSpec,
    eta: f64,
    p: &GridPoint,
    cfg: &ExperimentConfig,
) -> HarnessResult<ResultRow> {
    let started = Instant::now();
    let start = SaddlePoint::gaussian_x(problem.dim_x(), problem.dim_y(), cfg.start_noise * eta, p.seed);
    let fo_weight = if spec.mode == InstanceMode::Deterministic {
        1
    } else {
        spec.n as u64
    };
    let mc = MeasureConfig {
        seed: p.seed,
        fo_weight,
        catalyst: cfg.catalyst_template(),
        ..MeasureConfig::new(cfg.epsilon, cfg.budget)
    };
    let log = measure_run(problem, p.algorithm, start, &mc)?;
    let calls = log.calls_to_stationarity().unwrap_or(log.total_calls());
    Ok(ResultRow {
        suite: cfg.suite.as_str().to_string(),
        instance_id: instance_id(spec),
        solver: p.algorithm.name(),
        seed: p.seed,
        kappa: spec.kappa(),
        n: spec.n,
        epsilon: cfg.epsilon,
        oracle_calls: calls,
        grad_phi_norm: log.min_grad_phi.unwrap_or(f64::NAN),
        moreau_norm: f64::NAN,
        wall_ms: if cfg.timing {
            started.elapsed().as_secs_f64() * 1e3
        } else {
            0.0
        },
    })
}

fn fits_by_algorithm(
    rows: &[ResultRow],
    algorithms: &[Algorithm],
    x_of: impl Fn(&ResultRow) -> f64,
) -> Vec<(String, LineFit, Vec<(f64, f64)>)> {
    algorithms
        .iter()
        .filter_map(|a| {
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.solver == a.name())
                .map(|r| (x_of(r), r.oracle_calls as f64))
                .collect();
            let avg = average_by_kappa(&pts);
            fit_scaling(&avg).ok().map(|f| (a.name(), f, avg))
        })
        .collect()
}

fn write_plot(
    path: &Path,
    title: &str,
    x_label: &str,
    fits: &[(String, LineFit, Vec<(f64, f64)>)],
) -> HarnessResult<()> {
    let series: Vec<Series> = fits
        .iter()
        .map(|(name, fit, pts)| Series {
            label: name.clone(),
            points: pts.clone(),
            fit: Some((fit.slope, fit.intercept)),
        })
        .collect();
    let svg = log_log_plot(title, x_label, "oracle calls to epsilon", &series);
    std::fs::write(path, svg).map_err(|e| HarnessError::io(path, e))
}

fn finish_sweep(
    cfg: &ExperimentConfig,
    rows: Vec<ResultRow>,
    x_label: &str,
    x_of: impl Fn(&ResultRow) -> f64,
) -> HarnessResult<SuiteOutput> {
    let name = cfg.suite.as_str();
    let csv = cfg.out_dir.join(format!("{name}.csv"));
    write_results(&csv, &rows)?;
    let fits = fits_by_algorithm(&rows, &cfg.algorithms, x_of);
    let svg = cfg.out_dir.join(format!("{name}.svg"));
    write_plot(&svg, &format!("{name}: oracle calls vs {x_label}"), x_label, &fits)?;
    let mut summary = String::new();
    for (a, f, _) in &fits {
        summary.push_str(&format!(
            "{a}: slope {:.3} (r^2 {:.4}, residual {:.3e})\n",
            f.slope, f.r_squared, f.residual
        ));
    }
    Ok(SuiteOutput {
        rows,
        fits: fits.into_iter().map(|(a, f, _)| (a, f)).collect(),
        reports: Vec::new(),
        files: vec![csv, svg],
        summary,
    })
}

/// One row per `(κ, algorithm, seed)`; fits log calls against log κ.
pub fn kappa_sweep(cfg: &ExperimentConfig) -> HarnessResult<SuiteOutput> {
    let instances = cfg
        .kappas
        .iter()
        .map(|&k| kappa_instance(k, cfg.epsilon))
        .collect::<HarnessResult<Vec<_>>>()?;
    let points = grid(instances.len(), cfg);
    let rows = cfg.pool()?.install(|| {
        points
            .par_iter()
            .map(|p| {
                let inst = &instances[p.index];
                let spec = inst.spec().expect("built from a spec");
                sweep_row(inst, spec, inst.eta(), p, cfg)
            })
            .collect::<HarnessResult<Vec<_>>>()
    })?;
    finish_sweep(cfg, rows, "kappa", |r| r.kappa)
}

/// One row per `(n, algorithm, seed)` on finite-sum instances; fits log calls
/// against log n.
pub fn n_sweep(cfg: &ExperimentConfig) -> HarnessResult<SuiteOutput> {
    let instances = cfg
        .ns
        .iter()
        .map(|&n| n_instance(n, cfg.epsilon))
        .collect::<HarnessResult<Vec<_>>>()?;
    let points = grid(instances.len(), cfg);
    let rows = cfg.pool()?.install(|| {
        points
            .par_iter()
            .map(|p| {
                let inst = &instances[p.index];
                sweep_row(inst, inst.spec(), inst.eta(), p, cfg)
            })
            .collect::<HarnessResult<Vec<_>>>()
    })?;
    finish_sweep(cfg, rows, "n", |r| r.n as f64)
}

/// Specs exercised by the lower-bound suite.
pub fn lower_bound_specs() -> HarnessResult<Vec<HardInstanceSpec>> {
    let eps_det = HardInstanceSpec::epsilon_for_dimension(InstanceMode::Deterministic, 1, 1.0, 0.25, 1.0, 10)?;
    let mu_fs = 1.0 / 32.0;
    let eps_fs = HardInstanceSpec::epsilon_for_dimension(InstanceMode::FiniteSum, 4, 1.0, mu_fs, 1.0, 6)?;
    Ok(vec![
        HardInstanceSpec::deterministic(1.0, 0.25, 1.0, eps_det, None)?,
        HardInstanceSpec::finite_sum(4, 1.0, mu_fs, 1.0, eps_fs, None)?,
        HardInstanceSpec::case1(8, 1.0, 0.1, 1.0, 64)?,
    ])
}

/// Deterministic chain (`d = 10`) with the configured algorithms, then the
/// finite-sum chain (`n = 4`, `d = 6`) and the linear case-1 instance
/// (`n = 8`) with the incremental ones (SVRG if none is configured).
pub fn lower_bound(cfg: &ExperimentConfig) -> HarnessResult<SuiteOutput> {
    let specs = lower_bound_specs()?;
    let mut incremental: Vec<Algorithm> = cfg.algorithms.iter().copied().filter(|a| a.is_incremental()).collect();
    if incremental.is_empty() {
        incremental.push(Algorithm::Plain(SolverKind::Svrg));
    }
    let full: Vec<Algorithm> = cfg.algorithms.iter().copied().filter(|a| !a.is_incremental()).collect();
    let jobs: Vec<(&HardInstanceSpec, Vec<Algorithm>)> = vec![
        (&specs[0], full.clone()),
        (&specs[1], incremental.clone()),
        (&specs[2], [incremental, full].concat()),
    ];
    let budget = cfg.budget.min(50_000_000);
    let reports = cfg.pool()?.install(|| {
        jobs.par_iter()
            .filter(|(_, algs)| !algs.is_empty())
            .map(|(spec, algs)| verify_lower_bound(spec, algs, &cfg.seeds, budget))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let csv = cfg.out_dir.join("lower_bound.csv");
    write_lower_bound(&csv, &reports)?;
    let summary: String = reports.iter().map(|r| r.to_string()).collect::<Vec<_>>().join("\n");
    let txt = cfg.out_dir.join("lower_bound.txt");
    std::fs::write(&txt, &summary).map_err(|e| HarnessError::io(&txt, e))?;
    if let Some(bad) = reports.iter().find(|r| !r.passed()) {
        return Err(HarnessError::Verification(format!(
            "measured oracle calls fell below the floor\n{bad}"
        )));
    }
    Ok(SuiteOutput {
        reports,
        files: vec![csv, txt],
        summary,
        ..SuiteOutput::default()
    })
}

/// Trace of one algorithm on the instance file, one row per trace point.
pub fn single_run(cfg: &ExperimentConfig) -> HarnessResult<SuiteOutput> {
    let path = cfg
        .instance
        .as_ref()
        .ok_or_else(|| HarnessError::Config("single_run needs an instance file".into()))?;
    let spec = read_spec(path)?;
    let problem = build_instance(&spec)?;
    let algorithm = cfg.algorithms[0];
    let seed = cfg.seeds[0];
    let fo_weight = if spec.mode == InstanceMode::Deterministic {
        1
    } else {
        spec.n as u64
    };
    let logged = Logged::new(&*problem)
        .monitor_stationarity(spec.epsilon, true)
        .with_budget(cfg.budget)
        .with_fo_weight(fo_weight);
    let started = Instant::now();
    let start = SaddlePoint::origin_of(&*problem);
    let (trace, points): (Vec<(u64, f64, f64)>, Vec<Vec<f64>>) = match algorithm {
        Algorithm::Plain(kind) => {
            let sc = SolverConfig::for_problem(kind, &*problem, usize::MAX)
                .with_seed(seed)
                .with_trace_every(cfg.trace_every);
            let out = run_solver(&logged, kind, &sc, start)?;
            let rows = out
                .trace
                .rows
                .iter()
                .map(|r| (r.calls, r.grad_phi_norm, r.wall_ms))
                .collect();
            (rows, vec![out.point.x])
        }
        Algorithm::Catalyst(kind) => {
            let cc = CatalystConfig {
                subsolver: kind,
                seed,
                t_max: usize::MAX,
                ..cfg.catalyst_template()
            };
            let out = catalyst_run(&logged, &cc, start)?;
            let rows = out
                .trace
                .rounds
                .iter()
                .map(|r| (r.calls, r.grad_phi_end, 0.0))
                .collect();
            let pts = out.trace.outer_iterates()[1..].iter().map(|x| x.to_vec()).collect();
            (rows, pts)
        }
    };
    let elapsed = started.elapsed().as_secs_f64() * 1e3;
    let id = instance_id(&spec);
    let last = points.len().saturating_sub(1);
    let rows: Vec<ResultRow> = trace
        .iter()
        .enumerate()
        .map(|(i, &(calls, g, wall))| {
            let moreau = match &algorithm {
                Algorithm::Catalyst(_) => moreau_stationarity(&*problem, &points[i], spec.epsilon * 1e-3).unwrap_or(f64::NAN),
                Algorithm::Plain(_) if i + 1 == trace.len() => {
                    moreau_stationarity(&*problem, &points[last], spec.epsilon * 1e-3).unwrap_or(f64::NAN)
                }
                _ => f64::NAN,
            };
            ResultRow {
                suite: Suite::SingleRun.as_str().to_string(),
                instance_id: id.clone(),
                solver: algorithm.name(),
                seed,
                kappa: spec.kappa(),
                n: spec.n,
                epsilon: spec.epsilon,
                oracle_calls: calls,
                grad_phi_norm: g,
                moreau_norm: moreau,
                wall_ms: match (cfg.timing, &algorithm) {
                    (false, _) => 0.0,
                    (true, Algorithm::Plain(_)) => wall,
                    (true, Algorithm::Catalyst(_)) if i + 1 == trace.len() => elapsed,
                    (true, _) => f64::NAN,
                },
            }
        })
        .collect();
    let csv = cfg.out_dir.join(format!("run_{}_{}.csv", id, algorithm.name()));
    write_results(&csv, &rows)?;
    let log = logged.log();
    let summary = format!(
        "{} on {id}: {} oracle calls, first epsilon-stationary query after {} calls",
        algorithm.name(),
        log.total_calls(),
        log.calls_to_stationarity().map_or("(not reached)".to_string(), |c| c.to_string())
    );
    Ok(SuiteOutput {
        rows,
        files: vec![csv],
        summary,
        ..SuiteOutput::default()
    })
}

pub fn run_suite(cfg: &ExperimentConfig) -> HarnessResult<SuiteOutput> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| HarnessError::io(&cfg.out_dir, e))?;
    match cfg.suite {
        Suite::KappaSweep => kappa_sweep(cfg),
        Suite::NSweep => n_sweep(cfg),
        Suite::LowerBound => lower_bound(cfg),
        Suite::SingleRun => single_run(cfg),
        Suite::VerifyAll => {
            let report = crate::verify::run_all();
            let txt = cfg.out_dir.join("verify.txt");
            std::fs::write(&txt, report.to_string()).map_err(|e| HarnessError::io(&txt, e))?;
            if report.failed() > 0 {
                return Err(HarnessError::Verification(format!(
                    "{} of {} properties failed",
                    report.failed(),
                    report.results.len()
                )));
            }
            Ok(SuiteOutput {
                files: vec![txt],
                summary: report.to_string(),
                ..SuiteOutput::default()
            })
        }
    }
}
