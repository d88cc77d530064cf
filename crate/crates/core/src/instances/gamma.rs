//! The nonconvex scalar penalty `Γ(x) = 120 ∫₁ˣ t²(t−1)/(1+t²) dt`.

use std::f64::consts::{LN_2, PI};

const GAMMA_SCALE: f64 = 120.0;

/// Antiderivative offset: value of `x²/2 − x − ½ln(1+x²) + arctan x` at `x = 1`.
const GAMMA_OFFSET: f64 = -0.5 - 0.5 * LN_2 + PI / 4.0;

pub fn gamma(x: f64) -> f64 {
    GAMMA_SCALE * (0.5 * x * x - x - 0.5 * (x * x).ln_1p() + x.atan() - GAMMA_OFFSET)
}

pub fn gamma_prime(x: f64) -> f64 {
    let x2 = x * x;
    GAMMA_SCALE * x2 * (x - 1.0) / (1.0 + x2)
}
