//! Oracle instrumentation: call counting, coordinate-activation history and
//! linear-span protocol checks on top of any [`SaddleProblem`].

use std::cell::RefCell;

use crate::error::{Error, Result};
use crate::instances::BlockEmbedding;
use crate::linalg;
use crate::problem::{SaddlePoint, SaddleProblem};

/// Per-run oracle accounting. Coordinates are 0-based, call indices 1-based
/// and shared between FO and IFO calls. A call index is the cost spent before
/// the call plus one, so with the default FO weight it is the call number.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OracleLog {
    pub fo_calls: u64,
    pub ifo_calls: u64,
    /// `ifo_calls + w·fo_calls` where `w` is the FO weight (1 by default).
    pub cost: u64,
    pub x_activation: Vec<(usize, u64)>,
    pub y_activation: Vec<(usize, u64)>,
    pub first_call_with_xd_nonzero: Option<u64>,
    /// First call whose query `x` had `‖∇Φ(x)‖ ≤ ε` (needs a monitor).
    pub first_stationary_call: Option<u64>,
    /// Smallest `‖∇Φ‖` among monitored queries.
    pub min_grad_phi: Option<f64>,
    /// First query that left the span of earlier queries and gradients:
    /// `(block, coordinate, call)`.
    pub protocol_violation: Option<(&'static str, usize, u64)>,
}

impl OracleLog {
    /// Weighted oracle cost.
    pub fn total_calls(&self) -> u64 {
        self.cost
    }

    /// Oracle calls spent before an ε-stationary point was queried.
    pub fn calls_to_stationarity(&self) -> Option<u64> {
        self.first_stationary_call.map(|c| c - 1)
    }

    /// Oracle calls spent before the tracked tail coordinate became nonzero.
    pub fn calls_to_activation(&self) -> Option<u64> {
        self.first_call_with_xd_nonzero.map(|c| c - 1)
    }

    pub fn protocol_error(&self) -> Option<Error> {
        self.protocol_violation
            .map(|(block, coord, call)| Error::ProtocolViolation { block, coord, call })
    }
}

/// Which event counts as "the chain tail is active".
#[derive(Debug, Clone, PartialEq)]
pub enum TailRule {
    None,
    /// Any coordinate with index ≥ `first` is nonzero.
    Coordinates { first: usize },
    /// At least half of the blocks have a nonzero coordinate at block offset
    /// ≥ `offset`.
    BlockMajority { blocks: BlockEmbedding, offset: usize },
}

struct State {
    log: OracleLog,
    seen_x: Vec<bool>,
    seen_y: Vec<bool>,
    span_x: Vec<bool>,
    span_y: Vec<bool>,
    scratch: Vec<f64>,
}

/// Logging wrapper. Every gradient evaluation is counted and its query point
/// scanned for newly nonzero coordinates (exact `!= 0.0` comparison).
pub struct Logged<P> {
    inner: P,
    state: RefCell<State>,
    tail: TailRule,
    monitor_epsilon: Option<f64>,
    stop_on_stationary: bool,
    budget: Option<u64>,
    fo_weight: u64,
}

impl<P: SaddleProblem> Logged<P> {
    pub fn new(inner: P) -> Self {
        let (dx, dy) = (inner.dim_x(), inner.dim_y());
        Self {
            state: RefCell::new(State {
                log: OracleLog::default(),
                seen_x: vec![false; dx],
                seen_y: vec![false; dy],
                span_x: vec![false; dx],
                span_y: vec![false; dy],
                scratch: vec![0.0; dx],
            }),
            inner,
            tail: TailRule::None,
            monitor_epsilon: None,
            stop_on_stationary: false,
            budget: None,
            fo_weight: 1,
        }
    }

    pub fn with_tail_rule(mut self, rule: TailRule) -> Self {
        self.tail = rule;
        self
    }

    /// Records the first query with `‖∇Φ(x)‖ ≤ ε`, using the closed-form primal.
    pub fn monitor_stationarity(mut self, epsilon: f64, stop: bool) -> Self {
        self.monitor_epsilon = Some(epsilon);
        self.stop_on_stationary = stop;
        self
    }

    /// After `calls` oracle calls, [`SaddleProblem::interrupted`] turns true.
    pub fn with_budget(mut self, calls: u64) -> Self {
        self.budget = Some(calls);
        self
    }

    /// Charge each full-gradient call as `weight` IFO calls.
    pub fn with_fo_weight(mut self, weight: u64) -> Self {
        self.fo_weight = weight.max(1);
        self
    }

    pub fn log(&self) -> OracleLog {
        self.state.borrow().log.clone()
    }

    pub fn inner(&self) -> &P {
        &self.inner
    }

    pub fn into_parts(self) -> (P, OracleLog) {
        (self.inner, self.state.into_inner().log)
    }

    fn record(&self, ifo: bool, x: &[f64], y: &[f64], gx: &[f64], gy: &[f64]) {
        let mut st = self.state.borrow_mut();
        let st = &mut *st;
        let call = st.log.cost + 1;
        if ifo {
            st.log.ifo_calls += 1;
            st.log.cost += 1;
        } else {
            st.log.fo_calls += 1;
            st.log.cost += self.fo_weight;
        }

        for (block, q, seen, span, acts) in [
            ("x", x, &mut st.seen_x, &mut st.span_x, &mut st.log.x_activation),
            ("y", y, &mut st.seen_y, &mut st.span_y, &mut st.log.y_activation),
        ] {
            for (j, v) in q.iter().enumerate() {
                if *v != 0.0 {
                    if !seen[j] {
                        seen[j] = true;
                        acts.push((j, call));
                    }
                    if !span[j] && st.log.protocol_violation.is_none() {
                        st.log.protocol_violation = Some((block, j, call));
                    }
                }
            }
        }
        for (q, g, span) in [(x, gx, &mut st.span_x), (y, gy, &mut st.span_y)] {
            for j in 0..q.len() {
                if q[j] != 0.0 || g[j] != 0.0 {
                    span[j] = true;
                }
            }
        }

        if st.log.first_call_with_xd_nonzero.is_none() && tail_active(&self.tail, x) {
            st.log.first_call_with_xd_nonzero = Some(call);
        }

        if let Some(eps) = self.monitor_epsilon {
            if self.inner.primal(x, &mut st.scratch).is_some() {
                let g = linalg::norm(&st.scratch);
                st.log.min_grad_phi = Some(st.log.min_grad_phi.map_or(g, |m| m.min(g)));
                if g <= eps && st.log.first_stationary_call.is_none() {
                    st.log.first_stationary_call = Some(call);
                }
            }
        }
    }
}

fn tail_active(rule: &TailRule, x: &[f64]) -> bool {
    match rule {
        TailRule::None => false,
        TailRule::Coordinates { first } => x[*first..].iter().any(|v| *v != 0.0),
        TailRule::BlockMajority { blocks, offset } => {
            let active = (0..blocks.n)
                .filter(|i| x[blocks.x_range(*i)][*offset..].iter().any(|v| *v != 0.0))
                .count();
            2 * active >= blocks.n
        }
    }
}

impl<P: SaddleProblem> SaddleProblem for Logged<P> {
    fn dim_x(&self) -> usize {
        self.inner.dim_x()
    }
    fn dim_y(&self) -> usize {
        self.inner.dim_y()
    }
    fn n_components(&self) -> usize {
        self.inner.n_components()
    }
    fn smoothness(&self) -> f64 {
        self.inner.smoothness()
    }
    fn strong_concavity(&self) -> f64 {
        self.inner.strong_concavity()
    }
    fn strong_convexity(&self) -> f64 {
        self.inner.strong_convexity()
    }
    fn value(&self, x: &[f64], y: &[f64]) -> f64 {
        self.inner.value(x, y)
    }
    fn grad(&self, x: &[f64], y: &[f64], gx: &mut [f64], gy: &mut [f64]) {
        self.inner.grad(x, y, gx, gy);
        self.record(false, x, y, gx, gy);
    }
    fn component_grad(&self, i: usize, x: &[f64], y: &[f64], gx: &mut [f64], gy: &mut [f64]) {
        self.inner.component_grad(i, x, y, gx, gy);
        self.record(true, x, y, gx, gy);
    }
    fn primal(&self, x: &[f64], grad: &mut [f64]) -> Option<f64> {
        self.inner.primal(x, grad)
    }
    fn best_response(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.inner.best_response(x)
    }
    fn sampling_scale(&self) -> f64 {
        self.inner.sampling_scale()
    }
    fn interrupted(&self) -> bool {
        let st = self.state.borrow();
        if let Some(b) = self.budget {
            if st.log.total_calls() >= b {
                return true;
            }
        }
        (self.stop_on_stationary && st.log.first_stationary_call.is_some())
            || self.inner.interrupted()
    }
}

pub fn wrap_with_logging<P: SaddleProblem>(problem: P) -> Logged<P> {
    Logged::new(problem)
}

/// Max over coordinates of `|central difference − analytic| / (1 + |analytic|)`.
pub fn finite_difference_check(
    problem: &(impl SaddleProblem + ?Sized),
    point: &SaddlePoint,
    h: f64,
) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidConfig(format!("finite-difference step must be positive, got {h}")));
    }
    point.check_dims(problem)?;
    let g = problem.grad_at(point);
    let mut worst = 0.0_f64;
    let mut z = point.clone();
    let dx = problem.dim_x();
    for k in 0..dx + problem.dim_y() {
        let (base, analytic) = if k < dx {
            (z.x[k], g.x[k])
        } else {
            (z.y[k - dx], g.y[k - dx])
        };
        let set = |z: &mut SaddlePoint, v: f64| {
            if k < dx {
                z.x[k] = v;
            } else {
                z.y[k - dx] = v;
            }
        };
        set(&mut z, base + h);
        let fp = problem.value(&z.x, &z.y);
        set(&mut z, base - h);
        let fm = problem.value(&z.x, &z.y);
        set(&mut z, base);
        if !fp.is_finite() || !fm.is_finite() {
            return Err(Error::NonFinite(format!(
                "objective is not finite near coordinate {k}; check the instance parameters"
            )));
        }
        let fd = (fp - fm) / (2.0 * h);
        worst = worst.max((fd - analytic).abs() / (1.0 + analytic.abs()));
    }
    Ok(worst)
}
