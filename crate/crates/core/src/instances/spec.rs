use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InstanceMode {
    Deterministic,
    FiniteSum,
    Case1,
}

impl InstanceMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            InstanceMode::Deterministic => "deterministic",
            InstanceMode::FiniteSum => "finite_sum",
            InstanceMode::Case1 => "case1",
        }
    }
}

impl fmt::Display for InstanceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InstanceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "deterministic" | "det" => Ok(InstanceMode::Deterministic),
            "finite_sum" | "finitesum" | "fs" => Ok(InstanceMode::FiniteSum),
            "case1" | "case_1" => Ok(InstanceMode::Case1),
            other => Err(Error::InvalidSpec(format!("unknown instance mode '{other}'"))),
        }
    }
}

/// Target class `(L, μ, Δ, ε)` plus the derived hard-instance parameters.
///
/// For `Case1`, `d` is the total dimension, `theta` the linear-term weight,
/// and the chain parameters are unused (`lambda1 = L`, `lambda2 = μ/2`,
/// `alpha = 1`, `eta = 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct HardInstanceSpec {
    pub mode: InstanceMode,
    pub l: f64,
    pub mu: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub n: usize,
    pub lambda1: f64,
    pub lambda2: f64,
    pub alpha: f64,
    pub eta: f64,
    pub d: usize,
    pub theta: f64,
}

/// Floor that tolerates the last-ulp loss of `C / ε²` when `ε` was itself
/// computed from a target `d`.
fn robust_floor(v: f64) -> f64 {
    (v * (1.0 + 1e-12)).floor()
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!("{name} must be positive and finite, got {v}")))
    }
}

fn check_base(l: f64, mu: f64, delta: f64, epsilon: f64) -> Result<()> {
    check_positive("L", l)?;
    check_positive("mu", mu)?;
    check_positive("Delta", delta)?;
    check_positive("epsilon", epsilon)?;
    if mu > l {
        return Err(Error::InvalidSpec(format!("need L >= mu, got L = {l}, mu = {mu}")));
    }
    Ok(())
}

impl HardInstanceSpec {
    pub fn kappa(&self) -> f64 {
        self.l / self.mu
    }

    /// Single-function instance with `λ* = (L/2, μ/2)`, `α = μ/(100L)`,
    /// `η = (16μ/L²)α^{−3/4}ε`, `d = ⌊ΔL√κ/(12800ε²)⌋` (clamped to ≥ 1).
    pub fn deterministic(
        l: f64,
        mu: f64,
        delta: f64,
        epsilon: f64,
        d_override: Option<usize>,
    ) -> Result<Self> {
        check_base(l, mu, delta, epsilon)?;
        let kappa = l / mu;
        let alpha = mu / (100.0 * l);
        let eta = 16.0 * mu / (l * l) * alpha.powf(-0.75) * epsilon;
        let d_formula = robust_floor(delta * l * kappa.sqrt() / (12800.0 * epsilon * epsilon));
        let d = match d_override {
            Some(0) => return Err(Error::InvalidSpec("d override must be at least 1".into())),
            Some(d) => d,
            None => clamp_dimension(d_formula)?,
        };
        let spec = Self {
            mode: InstanceMode::Deterministic,
            l,
            mu,
            delta,
            epsilon,
            n: 1,
            lambda1: l / 2.0,
            lambda2: mu / 2.0,
            alpha,
            eta,
            d,
            theta: 0.0,
        };
        Ok(spec)
    }

    /// Finite-sum instance with `λ* = (√(n/40)L, nμ/2)`, `α = nμ/(50L)`,
    /// `η = (160√(2n)μ/L²)α^{−3/4}ε`, `d = ⌊√α L²Δ/(25600nμ ε²)⌋`.
    pub fn finite_sum(
        n: usize,
        l: f64,
        mu: f64,
        delta: f64,
        epsilon: f64,
        d_override: Option<usize>,
    ) -> Result<Self> {
        check_base(l, mu, delta, epsilon)?;
        if n < 2 {
            return Err(Error::InvalidSpec("finite-sum instance needs n >= 2".into()));
        }
        let nf = n as f64;
        if l < 2.0 * nf * mu {
            return Err(Error::InvalidSpec(format!(
                "finite-sum instance needs L >= 2 n mu ({l} < {})",
                2.0 * nf * mu
            )));
        }
        let alpha = nf * mu / (50.0 * l);
        let eta = 160.0 * (2.0 * nf).sqrt() * mu / (l * l) * alpha.powf(-0.75) * epsilon;
        let d_formula =
            robust_floor(alpha.sqrt() * l * l * delta / (25600.0 * nf * mu * epsilon * epsilon));
        let d = match d_override {
            Some(0) => return Err(Error::InvalidSpec("d override must be at least 1".into())),
            Some(d) => d,
            None => clamp_dimension(d_formula)?,
        };
        Ok(Self {
            mode: InstanceMode::FiniteSum,
            l,
            mu,
            delta,
            epsilon,
            n,
            lambda1: (nf / 40.0).sqrt() * l,
            lambda2: nf * mu / 2.0,
            alpha,
            eta,
            d,
            theta: 0.0,
        })
    }

    /// The `Ω(n)` linear instance in total dimension `d_total`.
    pub fn case1(n: usize, l: f64, mu: f64, delta: f64, d_total: usize) -> Result<Self> {
        check_positive("L", l)?;
        check_positive("mu", mu)?;
        check_positive("Delta", delta)?;
        if n == 0 || d_total == 0 || d_total % n != 0 {
            return Err(Error::InvalidSpec(format!(
                "case-1 instance needs d_total ({d_total}) to be a positive multiple of n ({n})"
            )));
        }
        let nf = n as f64;
        let theta = (2.0 * l * l * nf * nf * delta / (mu * d_total as f64)).sqrt();
        // the gradient floor (θ/n)√(d/2) is the natural accuracy scale
        let epsilon = theta / nf * (d_total as f64 / 2.0).sqrt();
        Ok(Self {
            mode: InstanceMode::Case1,
            l,
            mu,
            delta,
            epsilon,
            n,
            lambda1: l,
            lambda2: mu / 2.0,
            alpha: 1.0,
            eta: 1.0,
            d: d_total,
            theta,
        })
    }

    /// Largest `ε` for which the dimension formula yields exactly `d`.
    pub fn epsilon_for_dimension(
        mode: InstanceMode,
        n: usize,
        l: f64,
        mu: f64,
        delta: f64,
        d: usize,
    ) -> Result<f64> {
        check_positive("L", l)?;
        check_positive("mu", mu)?;
        check_positive("Delta", delta)?;
        if d == 0 {
            return Err(Error::InvalidSpec("d must be at least 1".into()));
        }
        let numer = match mode {
            InstanceMode::Deterministic => delta * l * (l / mu).sqrt() / 12800.0,
            InstanceMode::FiniteSum => {
                let nf = n as f64;
                let alpha = nf * mu / (50.0 * l);
                alpha.sqrt() * l * l * delta / (25600.0 * nf * mu)
            }
            InstanceMode::Case1 => {
                return Err(Error::InvalidSpec("case-1 instances have no dimension formula".into()))
            }
        };
        // midpoint of the floor cell keeps rounding away from the boundary
        Ok((numer / (d as f64 + 0.5)).sqrt())
    }

    /// Re-checks every derived-parameter invariant (used after reading a
    /// spec file that may have been edited by hand).
    pub fn validate(&self) -> Result<()> {
        match self.mode {
            InstanceMode::Case1 => {
                check_positive("L", self.l)?;
                check_positive("mu", self.mu)?;
                check_positive("theta", self.theta)?;
                if self.n == 0 || self.d == 0 || self.d % self.n != 0 {
                    return Err(Error::InvalidSpec("case-1 d must be a multiple of n".into()));
                }
                Ok(())
            }
            InstanceMode::Deterministic | InstanceMode::FiniteSum => {
                check_base(self.l, self.mu, self.delta, self.epsilon)?;
                check_positive("lambda1", self.lambda1)?;
                check_positive("lambda2", self.lambda2)?;
                check_positive("eta", self.eta)?;
                if self.d == 0 {
                    return Err(Error::InvalidSpec("d must be at least 1".into()));
                }
                let alpha_max = match self.mode {
                    InstanceMode::Deterministic => self.mu / (100.0 * self.l),
                    _ => {
                        if self.l < 2.0 * self.n as f64 * self.mu {
                            return Err(Error::InvalidSpec("finite-sum needs L >= 2 n mu".into()));
                        }
                        self.n as f64 * self.mu / (50.0 * self.l)
                    }
                };
                if !(self.alpha > 0.0 && self.alpha <= alpha_max * (1.0 + 1e-12) && self.alpha <= 1.0)
                {
                    return Err(Error::InvalidSpec(format!(
                        "alpha = {} outside (0, {alpha_max}]",
                        self.alpha
                    )));
                }
                Ok(())
            }
        }
    }

    /// Accuracy preconditions under which the lower-bound theorem applies,
    /// as `(description, holds)` pairs.
    pub fn epsilon_preconditions(&self) -> Vec<(String, bool)> {
        let e2 = self.epsilon * self.epsilon;
        let (l, mu, delta) = (self.l, self.mu, self.delta);
        let mut out = Vec::new();
        let mut push = |name: &str, bound: f64| out.push((format!("eps^2 <= {name}"), e2 <= bound * (1.0 + 1e-12)));
        match self.mode {
            InstanceMode::Deterministic => {
                push("Delta L / 64000", delta * l / 64000.0);
                push("Delta L sqrt(kappa) / 38400", delta * l * (l / mu).sqrt() / 38400.0);
            }
            InstanceMode::FiniteSum => {
                let nf = self.n as f64;
                let a = self.alpha;
                push(
                    "sqrt(alpha) L^2 Delta / (76800 n mu)",
                    a.sqrt() * l * l * delta / (76800.0 * nf * mu),
                );
                push("alpha L^2 Delta / (1280 n mu)", a * l * l * delta / (1280.0 * nf * mu));
                push("L^2 Delta / mu", l * l * delta / mu);
            }
            InstanceMode::Case1 => {
                push("L^2 Delta / mu", l * l * delta / mu);
            }
        }
        out
    }

    /// Guaranteed oracle-call floor before an ε-stationary query.
    pub fn call_floor(&self) -> f64 {
        let chain = 2.0 * self.d as f64 - 1.0;
        match self.mode {
            InstanceMode::Deterministic => chain,
            InstanceMode::FiniteSum => self.n as f64 / 2.0 * chain,
            InstanceMode::Case1 => self.n as f64 / 2.0,
        }
    }
}

fn clamp_dimension(d_formula: f64) -> Result<usize> {
    if !d_formula.is_finite() || d_formula > 1e8 {
        return Err(Error::InvalidSpec(format!(
            "dimension formula gives d = {d_formula:e}; pass an explicit d override"
        )));
    }
    Ok((d_formula as usize).max(1))
}
