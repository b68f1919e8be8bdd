//! Scalar shrinkage operators for the ADMM splitting.

use nalgebra::DVector;

use crate::error::{check_len, Error, Result};

const LQ_PROX_MAX_STEPS: usize = 100;
const LQ_PROX_RTOL: f64 = 1e-12;

/// sgn(v)·max(|v| − thresh, 0).
#[inline]
pub fn shrink(v: f64, thresh: f64) -> f64 {
    if v > thresh {
        v - thresh
    } else if v < -thresh {
        v + thresh
    } else {
        0.0
    }
}

/// Minimizer of w|s| + (γ/2)(s − v)².
pub fn soft_threshold(v: f64, w: f64, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::param(format!("gamma must be positive, got {gamma}")));
    }
    if !(w >= 0.0) {
        return Err(Error::param(format!("weight must be nonnegative, got {w}")));
    }
    Ok(shrink(v, w / gamma))
}

/// Componentwise [`soft_threshold`].
pub fn weighted_l1_prox_vec(v: &DVector<f64>, w: &DVector<f64>, gamma: f64) -> Result<DVector<f64>> {
    check_len("weight vector", v.len(), w.len())?;
    if !(gamma > 0.0) {
        return Err(Error::param(format!("gamma must be positive, got {gamma}")));
    }
    if let Some(bad) = w.iter().find(|x| !(**x >= 0.0)) {
        return Err(Error::param(format!("weight must be nonnegative, got {bad}")));
    }
    Ok(v.zip_map(w, |vi, wi| shrink(vi, wi / gamma)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LqProxParams {
    q: f64,
    alpha: f64,
    delta: f64,
}

impl LqProxParams {
    pub fn new(q: f64, alpha: f64, delta: f64) -> Result<Self> {
        if !(q >= 1.0 && q.is_finite()) {
            return Err(Error::param(format!("q must be finite and >= 1, got {q}")));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::param(format!("alpha must be positive, got {alpha}")));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::param(format!("delta must be positive, got {delta}")));
        }
        Ok(Self { q, alpha, delta })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// Minimizer of (1/(qα))|t|^q + (δ/2)(t − v)².
///
/// Closed forms for q = 1 and q = 2. Otherwise the stationarity equation
/// (1/α)t^(q−1) + δ(t − |v|) = 0 is solved for σ = ln t, where it reads
/// e^((q−1)σ)/α + δe^σ − δ|v| = 0: convex and increasing in σ for every q > 1.
/// Newton started to the right of the root therefore descends monotonically,
/// with no blow-up of the derivative near t = 0 when q < 2.
pub fn lq_prox(v: f64, params: &LqProxParams) -> Result<f64> {
    let LqProxParams { q, alpha, delta } = *params;
    if q == 1.0 {
        return Ok(shrink(v, (1.0 / alpha) / delta));
    }
    if q == 2.0 {
        let da = delta * alpha;
        return Ok(da * v / (1.0 + da));
    }
    if v == 0.0 {
        return Ok(0.0);
    }
    let target = v.abs();
    let tol = LQ_PROX_RTOL * target.max(1.0);
    let a = q - 1.0;

    // t ≤ |v| always; for q < 2 also t^(q−1) ≤ αδ|v|.
    let mut sigma = target.ln();
    if q < 2.0 {
        sigma = sigma.min((alpha * delta * target).ln() / a);
    }
    for _ in 0..LQ_PROX_MAX_STEPS {
        let pow_term = (a * sigma).exp() / alpha;
        let lin_term = delta * sigma.exp();
        let g = pow_term + lin_term - delta * target;
        if g.abs() <= tol {
            return Ok(v.signum() * sigma.exp().min(target));
        }
        let slope = a * pow_term + lin_term;
        let step = g / slope;
        if !step.is_finite() {
            break;
        }
        if step.abs() <= f64::EPSILON * sigma.abs().max(1.0) {
            return Ok(v.signum() * sigma.exp().min(target));
        }
        sigma -= step;
    }
    Err(Error::Numerical(format!(
        "lq prox did not converge for v = {v}, q = {q}"
    )))
}
