//! The concave sparsity penalty φ(x) = x^p on [0, ∞).

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phi {
    p: f64,
}

impl Phi {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::param(format!("p must lie in (0, 1), got {p}")));
        }
        Ok(Self { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// φ(|x|). Zero at zero.
    pub fn value(&self, x: f64) -> f64 {
        let a = x.abs();
        if a == 0.0 {
            0.0
        } else {
            a.powf(self.p)
        }
    }

    /// φ′(x) = p·x^(p−1) for x > 0.
    ///
    /// φ′ is unbounded at 0, so a non-positive argument is an error rather than
    /// an infinity: the outer iteration only evaluates weights on the current
    /// support, and a zero there means the support bookkeeping is broken.
    pub fn derivative(&self, x: f64) -> Result<f64> {
        if x > 0.0 && x.is_finite() {
            Ok(self.p * x.powf(self.p - 1.0))
        } else {
            Err(Error::NonLipschitzPoint(x))
        }
    }

    /// Lipschitz constant of φ′ on [c, ∞): sup |φ″| = p(1−p)c^(p−2).
    pub fn lipschitz_const(&self, c: f64) -> Result<f64> {
        if c > 0.0 {
            Ok(self.p * (1.0 - self.p) * c.powf(self.p - 2.0))
        } else {
            Err(Error::NonLipschitzPoint(c))
        }
    }
}
