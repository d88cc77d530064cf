use crate::error::{Error, Result};

/// The `(d+2)×(d+1)` anti-bidiagonal coupling matrix
///
/// ```text
/// row 0      : x_{d}
/// row j=1..d : x_{d−j} − x_{d−j+1}
/// row d+1    : α^{1/4} x_0
/// ```
///
/// (0-based indices). Never stored densely.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainMatrix {
    d: usize,
    alpha: f64,
    alpha_quarter: f64,
}

impl ChainMatrix {
    pub fn new(d: usize, alpha: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidSpec("chain length d must be at least 1".into()));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidSpec(format!("alpha = {alpha} outside (0, 1]")));
        }
        Ok(Self {
            d,
            alpha,
            alpha_quarter: (0.25 * alpha.ln()).exp(),
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn alpha_quarter(&self) -> f64 {
        self.alpha_quarter
    }

    pub fn rows(&self) -> usize {
        self.d + 2
    }

    pub fn cols(&self) -> usize {
        self.d + 1
    }

    /// `out = B x`
    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        let d = self.d;
        debug_assert_eq!(x.len(), d + 1);
        debug_assert_eq!(out.len(), d + 2);
        out[0] = x[d];
        for j in 1..=d {
            out[j] = x[d - j] - x[d - j + 1];
        }
        out[d + 1] = self.alpha_quarter * x[0];
    }

    /// `out = Bᵀ y`
    pub fn apply_t_into(&self, y: &[f64], out: &mut [f64]) {
        let d = self.d;
        debug_assert_eq!(y.len(), d + 2);
        debug_assert_eq!(out.len(), d + 1);
        // column c collects +y[d−c] (c < d), −y[d−c+1] (c ≥ 1)
        for c in 0..=d {
            let mut v = 0.0;
            if c < d {
                v += y[d - c];
            }
            if c >= 1 {
                v -= y[d - c + 1];
            }
            out[c] = v;
        }
        out[d] += y[0];
        out[0] += self.alpha_quarter * y[d + 1];
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols() {
            return Err(Error::DimensionMismatch {
                expected: self.cols(),
                got: x.len(),
            });
        }
        let mut out = vec![0.0; self.rows()];
        self.apply_into(x, &mut out);
        Ok(out)
    }

    pub fn apply_t(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.rows() {
            return Err(Error::DimensionMismatch {
                expected: self.rows(),
                got: y.len(),
            });
        }
        let mut out = vec![0.0; self.cols()];
        self.apply_t_into(y, &mut out);
        Ok(out)
    }

    /// `‖B x‖²` without allocating.
    pub fn norm_sq_of_apply(&self, x: &[f64]) -> f64 {
        let d = self.d;
        let mut s = x[d] * x[d];
        for j in 1..=d {
            let v = x[d - j] - x[d - j + 1];
            s += v * v;
        }
        let last = self.alpha_quarter * x[0];
        s + last * last
    }

    /// `out = BᵀB x`, the tridiagonal form with corner `1 + √α` and unit
    /// bottom-right entry plus one.
    pub fn gram_apply_into(&self, x: &[f64], out: &mut [f64]) {
        let d = self.d;
        let sqrt_alpha = self.alpha_quarter * self.alpha_quarter;
        for c in 0..=d {
            let mut v = 0.0;
            if c >= 1 {
                v += x[c] - x[c - 1];
            }
            if c < d {
                v += x[c] - x[c + 1];
            }
            out[c] = v;
        }
        out[0] += sqrt_alpha * x[0];
        out[d] += x[d];
    }
}
