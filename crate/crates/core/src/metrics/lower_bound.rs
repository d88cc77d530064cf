use std::fmt;
use std::str::FromStr;

use crate::catalyst::{catalyst_run, CatalystConfig};
use crate::error::{Error, Result};
use crate::instances::{
    BlockEmbedding, Case1Instance, DeterministicInstance, FiniteSumInstance, HardInstanceSpec, InstanceMode,
};
use crate::oracle::{Logged, OracleLog, TailRule};
use crate::problem::{SaddlePoint, SaddleProblem};
use crate::solvers::{run_solver, SolverConfig, SolverKind};

/// A solver from the zoo, optionally wrapped in the Catalyst outer loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Plain(SolverKind),
    Catalyst(SolverKind),
}

impl Algorithm {
    pub fn name(&self) -> String {
        match self {
            Algorithm::Plain(k) => k.as_str().to_string(),
            Algorithm::Catalyst(k) => format!("catalyst_{}", k.as_str()),
        }
    }

    /// Whether the algorithm only touches component gradients (plus full
    /// gradients charged as `n` component calls).
    pub fn is_incremental(&self) -> bool {
        matches!(self, Algorithm::Plain(SolverKind::Svrg) | Algorithm::Catalyst(SolverKind::Svrg))
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.strip_prefix("catalyst_").or_else(|| s.strip_prefix("catalyst-")) {
            Some(rest) => Ok(Algorithm::Catalyst(rest.parse()?)),
            None => Ok(Algorithm::Plain(s.parse()?)),
        }
    }
}

/// Limits for one measured run.
#[derive(Debug, Clone)]
pub struct MeasureConfig {
    pub epsilon: f64,
    /// Oracle cost after which the run is cut off.
    pub budget: u64,
    pub seed: u64,
    pub tail: TailRule,
    /// Charge for a full gradient in units of component calls.
    pub fo_weight: u64,
    /// Template for Catalyst runs; subsolver and seed are overwritten.
    pub catalyst: CatalystConfig,
}

impl MeasureConfig {
    pub fn new(epsilon: f64, budget: u64) -> Self {
        Self {
            epsilon,
            budget,
            seed: 0,
            tail: TailRule::None,
            fo_weight: 1,
            catalyst: CatalystConfig::default(),
        }
    }
}

/// Runs `algorithm` from `start` until a queried `x` has `‖∇Φ(x)‖ ≤ ε` (by the
/// closed-form primal) or the budget is spent, and returns the oracle log.
pub fn measure_run<P: SaddleProblem>(
    problem: &P,
    algorithm: Algorithm,
    start: SaddlePoint,
    config: &MeasureConfig,
) -> Result<OracleLog> {
    let logged = Logged::new(problem)
        .with_tail_rule(config.tail.clone())
        .monitor_stationarity(config.epsilon, true)
        .with_budget(config.budget)
        .with_fo_weight(config.fo_weight);
    match algorithm {
        Algorithm::Plain(kind) => {
            let cfg = SolverConfig::for_problem(kind, problem, usize::MAX).with_seed(config.seed);
            run_solver(&logged, kind, &cfg, start)?;
        }
        Algorithm::Catalyst(kind) => {
            let cfg = CatalystConfig {
                subsolver: kind,
                t_max: usize::MAX,
                seed: config.seed,
                ..config.catalyst.clone()
            };
            catalyst_run(&logged, &cfg, start)?;
        }
    }
    Ok(logged.log())
}

/// One `(algorithm, seed)` run.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundRow {
    pub algorithm: Algorithm,
    pub seed: u64,
    /// Oracle cost before the chain tail became nonzero, `None` if it never did.
    pub calls_to_activation: Option<u64>,
    /// Oracle cost before the first `ε`-stationary query, `None` if none.
    pub calls_to_epsilon: Option<u64>,
    pub total_calls: u64,
    pub min_grad_phi: f64,
}

impl LowerBoundRow {
    /// Calls to `ε`, or the whole budget when `ε` was never reached.
    pub fn measured_epsilon_calls(&self) -> u64 {
        self.calls_to_epsilon.unwrap_or(self.total_calls)
    }

    pub fn measured_activation_calls(&self) -> u64 {
        self.calls_to_activation.unwrap_or(self.total_calls)
    }
}

/// Per-algorithm comparison against the floor. For finite sums the measured
/// values are means over seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct FloorCheck {
    pub algorithm: Algorithm,
    pub activation_calls: f64,
    pub epsilon_calls: f64,
    pub activation_ok: bool,
    /// `None` when the accuracy preconditions fail and the check was skipped.
    pub epsilon_ok: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundReport {
    pub spec: HardInstanceSpec,
    pub epsilon: f64,
    pub floor: f64,
    pub preconditions: Vec<(String, bool)>,
    pub rows: Vec<LowerBoundRow>,
    pub checks: Vec<FloorCheck>,
}

impl LowerBoundReport {
    pub fn preconditions_hold(&self) -> bool {
        self.preconditions.iter().all(|(_, ok)| *ok)
    }

    /// `"epsilon"` when the ε floor was checked, `"activation"` otherwise.
    pub fn branch(&self) -> &'static str {
        if self.preconditions_hold() {
            "epsilon"
        } else {
            "activation"
        }
    }

    pub fn passed(&self) -> bool {
        self.checks
            .iter()
            .all(|c| c.activation_ok && c.epsilon_ok != Some(false))
    }
}

impl fmt::Display for LowerBoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} instance: L={:e} mu={:e} Delta={:e} n={} d={} epsilon={:e}",
            self.spec.mode, self.spec.l, self.spec.mu, self.spec.delta, self.spec.n, self.spec.d, self.epsilon
        )?;
        writeln!(f, "floor = {} oracle calls; checked branch: {}", self.floor, self.branch())?;
        for (name, ok) in &self.preconditions {
            writeln!(f, "  precondition {name}: {}", if *ok { "holds" } else { "fails" })?;
        }
        for c in &self.checks {
            let eps = match c.epsilon_ok {
                Some(true) => "ok",
                Some(false) => "VIOLATED",
                None => "skipped",
            };
            writeln!(
                f,
                "  {:<14} activation {:>12.1} ({})  epsilon {:>12.1} ({})",
                c.algorithm.name(),
                c.activation_calls,
                if c.activation_ok { "ok" } else { "VIOLATED" },
                c.epsilon_calls,
                eps
            )?;
        }
        Ok(())
    }
}

/// Tail-activation rule matching the instance's gradient-floor argument.
pub fn tail_rule(spec: &HardInstanceSpec) -> TailRule {
    match spec.mode {
        InstanceMode::Deterministic => TailRule::Coordinates { first: spec.d - 1 },
        InstanceMode::FiniteSum => TailRule::BlockMajority {
            blocks: BlockEmbedding::new(spec.n, spec.d),
            offset: spec.d - 1,
        },
        InstanceMode::Case1 => {
            let len = spec.d / spec.n;
            TailRule::BlockMajority {
                blocks: BlockEmbedding {
                    n: spec.n,
                    block_x: len,
                    block_y: len,
                },
                offset: 0,
            }
        }
    }
}

fn run_rows<P: SaddleProblem>(
    problem: &P,
    spec: &HardInstanceSpec,
    algorithms: &[Algorithm],
    seeds: &[u64],
    budget: u64,
) -> Result<Vec<LowerBoundRow>> {
    let fo_weight = if spec.mode == InstanceMode::Deterministic {
        1
    } else {
        spec.n as u64
    };
    let mut rows = Vec::new();
    for &algorithm in algorithms {
        for &seed in seeds {
            let cfg = MeasureConfig {
                seed,
                tail: tail_rule(spec),
                fo_weight,
                ..MeasureConfig::new(spec.epsilon, budget)
            };
            let log = measure_run(problem, algorithm, SaddlePoint::origin_of(problem), &cfg)?;
            if let Some(e) = log.protocol_error() {
                return Err(e);
            }
            rows.push(LowerBoundRow {
                algorithm,
                seed,
                calls_to_activation: log.calls_to_activation(),
                calls_to_epsilon: log.calls_to_stationarity(),
                total_calls: log.total_calls(),
                min_grad_phi: log.min_grad_phi.unwrap_or(f64::NAN),
            });
        }
    }
    Ok(rows)
}

/// Runs every algorithm from the origin on the instance described by `spec`
/// and compares the oracle cost before tail activation and before the first
/// `ε`-stationary query with the call floor. The ε comparison only runs when
/// the accuracy preconditions hold. Finite-sum floors are compared with means
/// over `seeds`, the others run by run (worst seed).
pub fn verify_lower_bound(
    spec: &HardInstanceSpec,
    algorithms: &[Algorithm],
    seeds: &[u64],
    budget: u64,
) -> Result<LowerBoundReport> {
    if algorithms.is_empty() || seeds.is_empty() {
        return Err(Error::InvalidConfig("need at least one algorithm and one seed".into()));
    }
    spec.validate()?;
    let rows = match spec.mode {
        InstanceMode::Deterministic => {
            run_rows(&DeterministicInstance::new(spec)?, spec, algorithms, seeds, budget)?
        }
        InstanceMode::FiniteSum => run_rows(&FiniteSumInstance::new(spec)?, spec, algorithms, seeds, budget)?,
        InstanceMode::Case1 => run_rows(&Case1Instance::new(spec)?, spec, algorithms, seeds, budget)?,
    };
    let floor = spec.call_floor();
    let preconditions = spec.epsilon_preconditions();
    let check_eps = preconditions.iter().all(|(_, ok)| *ok);
    let checks = algorithms
        .iter()
        .map(|&algorithm| {
            let mine: Vec<&LowerBoundRow> = rows.iter().filter(|r| r.algorithm == algorithm).collect();
            let agg = |f: &dyn Fn(&LowerBoundRow) -> u64| -> f64 {
                let v = mine.iter().map(|r| f(r) as f64);
                if spec.mode == InstanceMode::FiniteSum {
                    v.sum::<f64>() / mine.len() as f64
                } else {
                    v.fold(f64::INFINITY, f64::min)
                }
            };
            let activation_calls = agg(&LowerBoundRow::measured_activation_calls);
            let epsilon_calls = agg(&LowerBoundRow::measured_epsilon_calls);
            FloorCheck {
                algorithm,
                activation_calls,
                epsilon_calls,
                activation_ok: activation_calls >= floor,
                epsilon_ok: check_eps.then_some(epsilon_calls >= floor),
            }
        })
        .collect();
    Ok(LowerBoundReport {
        spec: spec.clone(),
        epsilon: spec.epsilon,
        floor,
        preconditions,
        rows,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algorithm_names_round_trip() {
        for a in [
            Algorithm::Plain(SolverKind::Gda),
            Algorithm::Plain(SolverKind::Svrg),
            Algorithm::Catalyst(SolverKind::Extragradient),
        ] {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("catalyst_nope".parse::<Algorithm>().is_err());
    }

    #[test]
    fn empty_algorithm_list_is_rejected() {
        let spec = HardInstanceSpec::deterministic(1.0, 0.25, 1.0, 0.01, Some(3)).unwrap();
        assert!(verify_lower_bound(&spec, &[], &[0], 100).is_err());
    }
}
