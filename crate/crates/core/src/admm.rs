//! ADMM for the support-restricted, proximally linearized subproblem
//!
//! ```text
//! min_z  Σ_j w_j|z_j| + (1/(qα))‖Bz − y‖_q^q + (β/2)‖z − z̄‖²
//! ```
//!
//! split as z = s, Bz − y = t. Each sweep updates (s, t) by shrinkage, z by a
//! solve against the cached Cholesky factor of (β+γ)I + δBᵀB, then the
//! multipliers (λ, μ). Termination uses the primal/dual residual rule; when a
//! [`CertificateRule`] is given the solver keeps going until it can exhibit an
//! explicit subgradient û ∈ ∂Ê(ẑ) with ‖û‖₂ ≤ (β/2)·ε·‖ẑ − z̄‖₂.

use std::io::Write;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{check_len, Error, Result};
use crate::problem::{lq_grad_scalar, lq_power_sum};
use crate::prox::{lq_prox, shrink, LqProxParams};
use crate::subgradient::min_norm_selection;

/// Roundoff floor on the certificate bound, relative to the size of the
/// subgradient terms. Without it a step of length ~1e-16 demands û = 0 exactly.
pub const CERTIFICATE_ROUNDOFF: f64 = 1e-12;

/// (β/2)·ε·‖ẑ − z̄‖₂, floored at roundoff level.
pub fn certificate_bound(spec: &SubproblemSpec, eps: f64, z_hat: &DVector<f64>) -> f64 {
    let scale = 1.0 + spec.w.amax() + spec.beta * spec.z_bar.amax();
    (0.5 * spec.beta * eps * (z_hat - &spec.z_bar).norm()).max(CERTIFICATE_ROUNDOFF * scale)
}

/// Residual rows with |r_i| at or below this (times max(1, ‖y‖∞)) count as
/// exactly fitted when building a q = 1 subgradient.
pub const ROW_ZERO_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemSpec {
    pub b: DMatrix<f64>,
    pub y: DVector<f64>,
    pub w: DVector<f64>,
    pub z_bar: DVector<f64>,
    pub q: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl SubproblemSpec {
    pub fn new(
        b: DMatrix<f64>,
        y: DVector<f64>,
        w: DVector<f64>,
        z_bar: DVector<f64>,
        q: f64,
        alpha: f64,
        beta: f64,
    ) -> Result<Self> {
        check_len("subproblem observation", b.nrows(), y.len())?;
        check_len("subproblem weights", b.ncols(), w.len())?;
        check_len("subproblem anchor", b.ncols(), z_bar.len())?;
        if let Some(bad) = w.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
            return Err(Error::param(format!("weights must be finite and nonnegative, got {bad}")));
        }
        if !(q >= 1.0 && q.is_finite()) {
            return Err(Error::param(format!("q must be finite and >= 1, got {q}")));
        }
        if !(alpha > 0.0 && beta > 0.0) {
            return Err(Error::param(format!(
                "alpha and beta must be positive, got {alpha}, {beta}"
            )));
        }
        Ok(Self { b, y, w, z_bar, q, alpha, beta })
    }

    pub fn n(&self) -> usize {
        self.b.ncols()
    }

    pub fn m(&self) -> usize {
        self.b.nrows()
    }

    /// Ê(z).
    pub fn objective(&self, z: &DVector<f64>) -> f64 {
        let mut r = self.y.clone();
        r.gemv(1.0, &self.b, z, -1.0);
        let l1: f64 = self.w.iter().zip(z.iter()).map(|(w, v)| w * v.abs()).sum();
        l1 + lq_power_sum(&r, self.q) / (self.q * self.alpha)
            + 0.5 * self.beta * (z - &self.z_bar).norm_squared()
    }
}

/// ADMM penalty parameters γ (for z = s) and δ (for Bz − y = t).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Penalties {
    pub gamma: f64,
    pub delta: f64,
}

impl Default for Penalties {
    fn default() -> Self {
        Self { gamma: 1.0, delta: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmmTols {
    pub eps_abs: f64,
    pub eps_rel: f64,
    pub max_iters: usize,
}

impl Default for AdmmTols {
    fn default() -> Self {
        Self {
            eps_abs: 1e-7,
            eps_rel: 1e-5,
            max_iters: 1000,
        }
    }
}

impl AdmmTols {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_abs > 0.0 && self.eps_rel > 0.0 && self.max_iters > 0) {
            return Err(Error::param(format!("ADMM tolerances must be positive: {self:?}")));
        }
        Ok(())
    }
}

/// Inexact-optimality requirement ‖û‖₂ ≤ (β/2)·eps·‖ẑ − z̄‖₂.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateRule {
    pub eps: f64,
    /// Hard cap on sweeps while waiting for the certificate.
    pub max_iters: usize,
}

impl CertificateRule {
    pub fn new(eps: f64) -> Self {
        Self {
            eps,
            max_iters: 20_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmmOptions {
    pub tols: AdmmTols,
    pub penalties: Penalties,
    pub certificate: Option<CertificateRule>,
    /// Offer the active-set solution (q ∈ {1, 2}) as a candidate ẑ; it is
    /// returned only when its certificate norm is smaller.
    pub polish: bool,
}

impl Default for AdmmOptions {
    fn default() -> Self {
        Self {
            tols: AdmmTols::default(),
            penalties: Penalties::default(),
            certificate: None,
            polish: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdmmStatus {
    /// Residual rule satisfied (no certificate requested).
    Converged,
    /// Certificate witnessed.
    CertificateMet,
    /// Residual rule not reached within `tols.max_iters`.
    MaxIterations,
    /// Certificate requested but not witnessed before the cap.
    CertificateUnmet,
}

impl AdmmStatus {
    pub fn is_success(self) -> bool {
        matches!(self, AdmmStatus::Converged | AdmmStatus::CertificateMet)
    }
}

/// An explicit element of ∂Ê at `point`.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub point: DVector<f64>,
    pub u_hat: DVector<f64>,
    pub norm: f64,
    /// The fidelity part (1/α)Bᵀζ of û, with ζ the chosen (sub)gradient of
    /// |·|^q/q at Bz − y.
    pub fidelity_term: DVector<f64>,
}

/// Residual quantities at the last sweep.
///
/// The dual operator diag(I, B)ᵀ is printed block-diagonally but sized like
/// [I; B]ᵀ. `dual`/`dual_tol` use the summed reading γΔs + δBᵀΔt and
/// ‖λ + Bᵀμ‖; `dual_block`/`dual_block_tol` stack the two blocks instead. The
/// rule requires both.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualCheck {
    pub primal: f64,
    pub dual: f64,
    pub primal_tol: f64,
    pub dual_tol: f64,
    pub dual_block: f64,
    pub dual_block_tol: f64,
}

impl ResidualCheck {
    pub fn satisfied(&self) -> bool {
        self.primal <= self.primal_tol && self.dual <= self.dual_tol && self.dual_block <= self.dual_block_tol
    }
}

/// Iterates needed to recompute the stopping rule from scratch.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub z: DVector<f64>,
    pub s: DVector<f64>,
    pub t: DVector<f64>,
    pub s_prev: DVector<f64>,
    pub t_prev: DVector<f64>,
    pub lambda: DVector<f64>,
    pub mu: DVector<f64>,
}

#[derive(Debug, Clone)]
pub struct AdmmResult {
    pub z_hat: DVector<f64>,
    pub iterations: usize,
    pub primal_residual_trace: Vec<f64>,
    pub dual_residual_trace: Vec<f64>,
    pub certificate_norm: f64,
    pub certificate: Certificate,
    pub status: AdmmStatus,
    pub polished: bool,
    pub last_check: Option<ResidualCheck>,
    pub snapshot: Snapshot,
}

#[derive(Debug, Clone)]
pub struct AdmmState {
    z: DVector<f64>,
    s: DVector<f64>,
    t: DVector<f64>,
    lambda: DVector<f64>,
    mu: DVector<f64>,
    s_prev: DVector<f64>,
    t_prev: DVector<f64>,
    /// Bz − y at the current z.
    r: DVector<f64>,
    bt_y: DVector<f64>,
    bt_t: DVector<f64>,
    bt_t_prev: DVector<f64>,
    bt_mu: DVector<f64>,
    penalties: Penalties,
    prox: LqProxParams,
    factor: Cholesky<f64, Dyn>,
}

impl AdmmState {
    /// z⁽⁰⁾ = z̄, λ⁽⁰⁾ = 0, μ⁽⁰⁾ = 0, with s⁽⁰⁾ = z̄ and t⁽⁰⁾ = Bz̄ − y.
    pub fn new(spec: &SubproblemSpec, penalties: Penalties) -> Result<Self> {
        let Penalties { gamma, delta } = penalties;
        if !(gamma > 0.0 && delta > 0.0 && gamma.is_finite() && delta.is_finite()) {
            return Err(Error::param(format!("penalties must be positive: {penalties:?}")));
        }
        if spec.b.iter().any(|v| !v.is_finite()) || spec.y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite entry in subproblem data".into()));
        }
        let prox = LqProxParams::new(spec.q, spec.alpha, delta)?;
        let n = spec.n();
        let mut h = spec.b.tr_mul(&spec.b) * delta;
        for i in 0..n {
            h[(i, i)] += spec.beta + gamma;
        }
        let factor = Cholesky::new(h)
            .ok_or_else(|| Error::Numerical("normal matrix is not positive definite".into()))?;

        let z = spec.z_bar.clone();
        let mut r = spec.y.clone();
        r.gemv(1.0, &spec.b, &z, -1.0);
        let bt_y = spec.b.tr_mul(&spec.y);
        let bt_t = spec.b.tr_mul(&r);
        Ok(Self {
            s: z.clone(),
            s_prev: z.clone(),
            t: r.clone(),
            t_prev: r.clone(),
            z,
            lambda: DVector::zeros(n),
            mu: DVector::zeros(spec.m()),
            r,
            bt_y,
            bt_t_prev: bt_t.clone(),
            bt_t,
            bt_mu: DVector::zeros(n),
            penalties,
            prox,
            factor,
        })
    }

    pub fn penalties(&self) -> Penalties {
        self.penalties
    }

    pub fn z(&self) -> &DVector<f64> {
        &self.z
    }

    pub fn s(&self) -> &DVector<f64> {
        &self.s
    }

    pub fn t(&self) -> &DVector<f64> {
        &self.t
    }

    pub fn lambda(&self) -> &DVector<f64> {
        &self.lambda
    }

    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }

    /// Overwrites (z, s, t, λ, μ) and refreshes the cached products.
    pub fn set_iterate(
        &mut self,
        spec: &SubproblemSpec,
        z: DVector<f64>,
        s: DVector<f64>,
        t: DVector<f64>,
        lambda: DVector<f64>,
        mu: DVector<f64>,
    ) -> Result<()> {
        let (n, m) = (spec.n(), spec.m());
        check_len("z", n, z.len())?;
        check_len("s", n, s.len())?;
        check_len("t", m, t.len())?;
        check_len("lambda", n, lambda.len())?;
        check_len("mu", m, mu.len())?;
        self.r.copy_from(&spec.y);
        self.r.gemv(1.0, &spec.b, &z, -1.0);
        self.bt_t = spec.b.tr_mul(&t);
        self.bt_mu = spec.b.tr_mul(&mu);
        (self.z, self.s, self.t, self.lambda, self.mu) = (z, s, t, lambda, mu);
        Ok(())
    }

    /// Current Bz − y.
    pub fn fit_residual(&self) -> &DVector<f64> {
        &self.r
    }

    /// (s, t) ← argmin L(z, s, t; λ, μ).
    pub fn update_s_t(&mut self, spec: &SubproblemSpec) -> Result<()> {
        let Penalties { gamma, delta } = self.penalties;
        std::mem::swap(&mut self.s_prev, &mut self.s);
        std::mem::swap(&mut self.t_prev, &mut self.t);
        std::mem::swap(&mut self.bt_t_prev, &mut self.bt_t);
        for j in 0..spec.n() {
            let v = self.z[j] + self.lambda[j] / gamma;
            self.s[j] = shrink(v, spec.w[j] / gamma);
        }
        for i in 0..spec.m() {
            let v = self.r[i] + self.mu[i] / delta;
            self.t[i] = lq_prox(v, &self.prox)?;
        }
        self.bt_t = spec.b.tr_mul(&self.t);
        Ok(())
    }

    /// Solves (β+γ+δBᵀB)z = βz̄ + γs + δBᵀ(y+t) − λ − Bᵀμ with the cached factor.
    pub fn update_z(&mut self, spec: &SubproblemSpec) -> Result<()> {
        let Penalties { gamma, delta } = self.penalties;
        let mut rhs = &spec.z_bar * spec.beta + &self.s * gamma - &self.lambda;
        rhs += (&self.bt_y + &self.bt_t) * delta - &self.bt_mu;
        self.factor.solve_mut(&mut rhs);
        if rhs.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite z update".into()));
        }
        self.z = rhs;
        self.r.copy_from(&spec.y);
        self.r.gemv(1.0, &spec.b, &self.z, -1.0);
        Ok(())
    }

    /// λ ← λ + γ(z − s), μ ← μ + δ((Bz − y) − t).
    pub fn update_multipliers(&mut self, spec: &SubproblemSpec) {
        let Penalties { gamma, delta } = self.penalties;
        self.lambda.axpy(gamma, &(&self.z - &self.s), 1.0);
        self.mu.axpy(delta, &(&self.r - &self.t), 1.0);
        self.bt_mu = spec.b.tr_mul(&self.mu);
    }

    /// Evaluates the primal/dual residual rule at the current sweep.
    pub fn residual_check(&self, spec: &SubproblemSpec, tols: &AdmmTols) -> ResidualCheck {
        let Penalties { gamma, delta } = self.penalties;
        let (n, m) = (spec.n() as f64, spec.m() as f64);
        let primal = ((&self.z - &self.s).norm_squared() + (&self.r - &self.t).norm_squared()).sqrt();
        let ds = (&self.s_prev - &self.s) * gamma;
        let dt = (&self.bt_t_prev - &self.bt_t) * delta;
        let dual = (&ds + &dt).norm();
        let dual_block = (ds.norm_squared() + dt.norm_squared()).sqrt();

        let bz_sq = (&self.r + &spec.y).norm_squared();
        let stacked_z = (self.z.norm_squared() + bz_sq).sqrt();
        let stacked_st = (self.s.norm_squared() + self.t.norm_squared()).sqrt();
        let scale = stacked_z.max(stacked_st).max(spec.y.norm());
        let primal_tol = m.sqrt() * tols.eps_abs + tols.eps_rel * scale;
        let dual_tol = n.sqrt() * tols.eps_abs + tols.eps_rel * (&self.lambda + &self.bt_mu).norm();
        let block_scale = (self.lambda.norm_squared() + self.bt_mu.norm_squared()).sqrt();
        let dual_block_tol = n.sqrt() * tols.eps_abs + tols.eps_rel * block_scale;
        ResidualCheck { primal, dual, primal_tol, dual_tol, dual_block, dual_block_tol }
    }

    /// Subgradient certificate at the sparse variable s.
    pub fn certificate(&self, spec: &SubproblemSpec) -> Certificate {
        let hint = (spec.q == 1.0).then(|| &self.mu * spec.alpha);
        certificate_at(spec, &self.s, hint.as_ref())
    }

    fn snapshot(&self) -> Snapshot {
        Snapshot {
            z: self.z.clone(),
            s: self.s.clone(),
            t: self.t.clone(),
            s_prev: self.s_prev.clone(),
            t_prev: self.t_prev.clone(),
            lambda: self.lambda.clone(),
            mu: self.mu.clone(),
        }
    }

    fn active_signature(&self) -> Vec<i8> {
        self.s.iter().map(|v| sign_i8(*v)).collect()
    }
}

fn sign_i8(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

fn sign0(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v.signum()
    }
}

/// Minimal-norm û ∈ ∂Ê(z).
///
/// Coordinates with z_j = 0 carry the interval [−w_j, w_j]. For q = 1, rows
/// with a (numerically) zero residual carry η_i ∈ [−1, 1]; `eta_hint`, indexed
/// by row, seeds their selection.
pub fn certificate_at(
    spec: &SubproblemSpec,
    z: &DVector<f64>,
    eta_hint: Option<&DVector<f64>>,
) -> Certificate {
    let n = spec.n();
    let mut r = spec.y.clone();
    r.gemv(1.0, &spec.b, z, -1.0);
    let inv_alpha = 1.0 / spec.alpha;

    let mut base = DVector::from_fn(n, |j, _| spec.w[j] * sign0(z[j]) + spec.beta * (z[j] - spec.z_bar[j]));
    let radius: Vec<f64> = (0..n).map(|j| if z[j] == 0.0 { spec.w[j] } else { 0.0 }).collect();

    if spec.q > 1.0 {
        let zeta = r.map(|v| lq_grad_scalar(v, spec.q));
        let fid = spec.b.tr_mul(&zeta) * inv_alpha;
        base += &fid;
        let sel = min_norm_selection(&base, &radius, &DMatrix::zeros(n, 0), None);
        let norm = sel.u.norm();
        return Certificate {
            point: z.clone(),
            u_hat: sel.u,
            norm,
            fidelity_term: fid,
        };
    }

    let row_tol = ROW_ZERO_TOL * spec.y.amax().max(1.0);
    let zero_rows: Vec<usize> = (0..spec.m()).filter(|&i| r[i].abs() <= row_tol).collect();
    let zeta = DVector::from_fn(spec.m(), |i, _| if r[i].abs() <= row_tol { 0.0 } else { r[i].signum() });
    let fixed = spec.b.tr_mul(&zeta) * inv_alpha;
    base += &fixed;
    let g = spec.b.select_rows(&zero_rows).transpose() * inv_alpha;
    let eta0 = eta_hint.map(|h| DVector::from_iterator(zero_rows.len(), zero_rows.iter().map(|&i| h[i])));
    let sel = min_norm_selection(&base, &radius, &g, eta0);
    let fid = if zero_rows.is_empty() { fixed } else { fixed + &g * &sel.eta };
    let norm = sel.u.norm();
    Certificate {
        point: z.clone(),
        u_hat: sel.u,
        norm,
        fidelity_term: fid,
    }
}

/// Solves the optimality system on the active set read off the ADMM iterate:
/// support and signs from s for q = 2, and the active-set method started at s
/// for q = 1. Returns the candidate point and, for q = 1, the row multipliers η.
fn polish(spec: &SubproblemSpec, state: &AdmmState) -> Option<(DVector<f64>, Option<DVector<f64>>)> {
    let n = spec.n();
    let active: Vec<usize> = (0..n).filter(|&j| state.s[j] != 0.0).collect();
    let sigma = DVector::from_iterator(active.len(), active.iter().map(|&j| state.s[j].signum()));
    let w_a = DVector::from_iterator(active.len(), active.iter().map(|&j| spec.w[j]));
    let zb_a = DVector::from_iterator(active.len(), active.iter().map(|&j| spec.z_bar[j]));
    let inv_alpha = 1.0 / spec.alpha;
    let embed = |za: &DVector<f64>| {
        let mut z = DVector::zeros(n);
        for (k, &j) in active.iter().enumerate() {
            z[j] = za[k];
        }
        z
    };

    if active.is_empty() {
        return Some((DVector::zeros(n), None));
    }
    let b_a = spec.b.select_columns(&active);

    if spec.q == 2.0 {
        let mut h = b_a.tr_mul(&b_a) * inv_alpha;
        for i in 0..active.len() {
            h[(i, i)] += spec.beta;
        }
        let rhs = &zb_a * spec.beta - w_a.component_mul(&sigma) + b_a.tr_mul(&spec.y) * inv_alpha;
        let za = Cholesky::new(h)?.solve(&rhs);
        return Some((embed(&za), None));
    }

    if spec.q == 1.0 {
        let (z, eta) = active_set_q1(spec, &state.s)?;
        return Some((z, Some(eta)));
    }
    None
}

/// Primal active-set method for the q = 1 subproblem, started from `z0`.
///
/// The working set fixes coordinate signs σ (0 = held at zero) and row signs
/// ρ (0 = row held fitted, b_iᵀz = y_i). On a working set the objective is a
/// smooth quadratic; each pass steps toward its equality-constrained minimizer
/// and stops at the first coordinate or residual that would change sign. At a
/// working-set minimizer the most violated multiplier is released. Returns the
/// point and the row multipliers η.
fn active_set_q1(spec: &SubproblemSpec, z0: &DVector<f64>) -> Option<(DVector<f64>, DVector<f64>)> {
    let (m, n) = (spec.m(), spec.n());
    let inv_alpha = 1.0 / spec.alpha;
    let mut z = z0.clone();
    let mut sigma = z.map(sign0);
    let mut r = spec.y.clone();
    r.gemv(1.0, &spec.b, &z, -1.0);
    let mut rho = r.map(|v| if v < 0.0 { -1.0 } else { 1.0 });

    for _ in 0..4 * (n + m) {
        let active: Vec<usize> = (0..n).filter(|&j| sigma[j] != 0.0).collect();
        let fitted: Vec<usize> = (0..m).filter(|&i| rho[i] == 0.0).collect();

        // Minimizer of the working-set quadratic.
        let mut target = DVector::zeros(n);
        let mut eta = rho.clone();
        if !active.is_empty() {
            let b_a = spec.b.select_columns(&active);
            let c = DVector::from_iterator(
                active.len(),
                active.iter().map(|&j| spec.z_bar[j] - spec.w[j] * sigma[j] / spec.beta),
            ) - b_a.tr_mul(&rho) * (inv_alpha / spec.beta);
            let mut za = c.clone();
            if !fitted.is_empty() {
                let b_fa = b_a.select_rows(&fitted);
                let y_f = DVector::from_iterator(fitted.len(), fitted.iter().map(|&i| spec.y[i]));
                let eta_f = Cholesky::new(&b_fa * b_fa.transpose())?
                    .solve(&((&b_fa * &c - y_f) * (spec.alpha * spec.beta)));
                za -= b_fa.tr_mul(&eta_f) * (inv_alpha / spec.beta);
                for (k, &i) in fitted.iter().enumerate() {
                    eta[i] = eta_f[k];
                }
            }
            for (k, &j) in active.iter().enumerate() {
                target[j] = za[k];
            }
        }
        if !target.iter().all(|v| v.is_finite()) {
            return None;
        }

        // Ratio test along the segment z → target.
        let d = &target - &z;
        let dr = &spec.b * &d;
        let mut tau = 1.0;
        let mut block = None;
        for &j in &active {
            if sigma[j] * d[j] < 0.0 {
                let step = (z[j] / d[j]).abs();
                if step < tau {
                    tau = step;
                    block = Some((true, j));
                }
            }
        }
        for i in 0..m {
            if rho[i] != 0.0 && rho[i] * dr[i] < 0.0 {
                let step = (r[i] / dr[i]).abs();
                if step < tau {
                    tau = step;
                    block = Some((false, i));
                }
            }
        }
        if let Some((is_coord, k)) = block {
            z.axpy(tau, &d, 1.0);
            if is_coord {
                z[k] = 0.0;
                sigma[k] = 0.0;
            } else {
                rho[k] = 0.0;
            }
            r = spec.y.clone();
            r.gemv(1.0, &spec.b, &z, -1.0);
            continue;
        }

        z = target;
        r = spec.y.clone();
        r.gemv(1.0, &spec.b, &z, -1.0);
        let g = spec.b.tr_mul(&eta) * inv_alpha - &spec.z_bar * spec.beta;
        let mut worst = (0.0, None);
        for j in 0..n {
            if sigma[j] == 0.0 && g[j].abs() - spec.w[j] > worst.0 {
                worst = (g[j].abs() - spec.w[j], Some((true, j)));
            }
        }
        for &i in &fitted {
            if eta[i].abs() - 1.0 > worst.0 {
                worst = (eta[i].abs() - 1.0, Some((false, i)));
            }
        }
        match worst.1 {
            None => return Some((z, eta)),
            Some((true, j)) => sigma[j] = -g[j].signum(),
            Some((false, i)) => rho[i] = eta[i].signum(),
        }
    }
    None
}

/// Certificate at s, or at the active-set point when that one is smaller.
/// The active-set solve is skipped while the sign pattern of s is unchanged.
fn candidate(
    spec: &SubproblemSpec,
    state: &AdmmState,
    use_polish: bool,
    last_signature: &mut Option<Vec<i8>>,
) -> (Certificate, bool) {
    let mut cand = (state.certificate(spec), false);
    if use_polish {
        let sig = state.active_signature();
        if last_signature.as_ref() != Some(&sig) {
            if let Some((zp, eta)) = polish(spec, state) {
                let c = certificate_at(spec, &zp, eta.as_ref());
                if c.norm.is_finite() && c.norm < cand.0.norm {
                    cand = (c, true);
                }
            }
            *last_signature = Some(sig);
        }
    }
    cand
}

pub fn admm_solve(spec: &SubproblemSpec, opts: &AdmmOptions) -> Result<AdmmResult> {
    admm_solve_traced(spec, opts, None)
}

/// As [`admm_solve`], writing one CSV record per sweep
/// (`iteration,primal_residual,dual_residual,certificate_norm`) to `trace`.
pub fn admm_solve_traced(
    spec: &SubproblemSpec,
    opts: &AdmmOptions,
    mut trace: Option<&mut dyn Write>,
) -> Result<AdmmResult> {
    opts.tols.validate()?;
    if let Some(rule) = &opts.certificate {
        if !(rule.eps >= 0.0 && rule.eps < 1.0) {
            return Err(Error::param(format!("certificate eps must lie in [0, 1), got {}", rule.eps)));
        }
    }
    let io_err = |e: std::io::Error| Error::Numerical(format!("trace sink: {e}"));
    if let Some(sink) = trace.as_deref_mut() {
        writeln!(sink, "iteration,primal_residual,dual_residual,certificate_norm").map_err(io_err)?;
    }

    let mut state = AdmmState::new(spec, opts.penalties)?;
    if spec.n() == 0 {
        let cert = state.certificate(spec);
        return Ok(AdmmResult {
            z_hat: DVector::zeros(0),
            iterations: 0,
            primal_residual_trace: Vec::new(),
            dual_residual_trace: Vec::new(),
            certificate_norm: cert.norm,
            certificate: cert,
            status: if opts.certificate.is_some() {
                AdmmStatus::CertificateMet
            } else {
                AdmmStatus::Converged
            },
            polished: false,
            last_check: None,
            snapshot: state.snapshot(),
        });
    }

    let cap = match &opts.certificate {
        Some(rule) => rule.max_iters.max(opts.tols.max_iters),
        None => opts.tols.max_iters,
    };
    let mut primal_trace = Vec::new();
    let mut dual_trace = Vec::new();
    let mut residual_met = false;
    let mut last_check = None;
    let mut best: Option<(Certificate, bool)> = None;
    let mut last_signature: Option<Vec<i8>> = None;
    let mut status = AdmmStatus::MaxIterations;

    for l in 0..cap {
        state.update_s_t(spec)?;
        state.update_z(spec)?;
        state.update_multipliers(spec);
        let check = state.residual_check(spec, &opts.tols);
        primal_trace.push(check.primal);
        dual_trace.push(check.dual);
        last_check = Some(check);
        residual_met |= check.satisfied();

        let mut cert_norm = None;
        match &opts.certificate {
            None => {
                if let Some(sink) = trace.as_deref_mut() {
                    writeln!(sink, "{},{:e},{:e},", l + 1, check.primal, check.dual).map_err(io_err)?;
                }
                if check.satisfied() {
                    status = AdmmStatus::Converged;
                    break;
                }
            }
            Some(rule) => {
                if residual_met || l + 1 >= opts.tols.max_iters {
                    let cand = candidate(spec, &state, opts.polish, &mut last_signature);
                    let bound = certificate_bound(spec, rule.eps, &cand.0.point);
                    let met = cand.0.norm <= bound;
                    cert_norm = Some(cand.0.norm);
                    // keep the certificate with the best margin
                    let better = match &best {
                        None => true,
                        Some((b, _)) => {
                            let b_bound = certificate_bound(spec, rule.eps, &b.point);
                            cand.0.norm - bound < b.norm - b_bound
                        }
                    };
                    if better {
                        best = Some(cand);
                    }
                    if met {
                        status = AdmmStatus::CertificateMet;
                    }
                }
                if let Some(sink) = trace.as_deref_mut() {
                    match cert_norm {
                        Some(c) => writeln!(sink, "{},{:e},{:e},{:e}", l + 1, check.primal, check.dual, c),
                        None => writeln!(sink, "{},{:e},{:e},", l + 1, check.primal, check.dual),
                    }
                    .map_err(io_err)?;
                }
                if status == AdmmStatus::CertificateMet {
                    break;
                }
            }
        }
    }
    if opts.certificate.is_some() && status != AdmmStatus::CertificateMet {
        status = AdmmStatus::CertificateUnmet;
    }

    let (certificate, polished) = match best {
        Some(b) => b,
        None => candidate(spec, &state, opts.polish, &mut None),
    };
    Ok(AdmmResult {
        z_hat: certificate.point.clone(),
        iterations: primal_trace.len(),
        primal_residual_trace: primal_trace,
        dual_residual_trace: dual_trace,
        certificate_norm: certificate.norm,
        certificate,
        status,
        polished,
        last_check,
        snapshot: state.snapshot(),
    })
}
