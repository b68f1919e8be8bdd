//! Iterative support shrinking with proximal linearization.
//!
//! Each outer step freezes the support S of the current iterate, linearizes
//! φ(|x_j|) at x_j for j ∈ S, and solves the convex weighted-ℓ1 subproblem over
//! the columns A_S with a proximal term (β/2)‖z − x_S‖². Entries outside S stay
//! exactly zero, so the support can only shrink.
//!
//! Three drivers share the loop:
//! - [`solve_inissapl`]: inner ADMM stopped by the inexactness certificate.
//! - [`solve_issapl`]: inner ADMM run to a tight residual tolerance.
//! - [`solve_issa_reference`]: each outer step minimizes the restricted
//!   nonconvex objective to stagnation. Small problems only; used as a test
//!   oracle.

use std::io::Write;

use nalgebra::{DMatrix, DVector};

use crate::admm::{
    admm_solve, certificate_bound, AdmmOptions, AdmmStatus, AdmmTols, CertificateRule, Penalties, SubproblemSpec,
    ROW_ZERO_TOL,
};
use crate::error::{check_len, Error, Result};
use crate::problem::{lq_grad_scalar, Problem};
use crate::subgradient::{box_least_squares, min_norm_selection};
use crate::support::{support_of, SupportSet};

/// Largest N accepted by [`solve_issa_reference`].
pub const ISSA_REFERENCE_MAX_N: usize = 200;

/// Relative slack allowed in the sufficient-decrease check.
pub const DECREASE_RTOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Proximal weight β.
    pub beta: f64,
    /// Inexactness ε ∈ [0, 1).
    pub eps: f64,
    /// Stop once ‖x⁽ᵏ⁺¹⁾ − x⁽ᵏ⁾‖ / ‖x⁽ᵏ⁾‖ falls to this.
    pub outer_tol: f64,
    pub max_outer: usize,
    pub admm_tols: AdmmTols,
    pub penalties: Penalties,
    /// Sweep cap for the inner solver while it waits for the certificate.
    pub certificate_max_iters: usize,
    pub polish: bool,
    /// Record violations of the convergence-theory invariants.
    pub checked_mode: bool,
}

impl SolverOptions {
    /// Defaults with β = 10⁻⁴·‖A‖_F²/(αN) and [`default_penalties`].
    pub fn for_problem(prob: &Problem) -> Self {
        Self {
            beta: default_beta(prob),
            eps: 0.5,
            outer_tol: 1e-3,
            max_outer: 500,
            admm_tols: AdmmTols::default(),
            penalties: default_penalties(prob),
            certificate_max_iters: 20_000,
            polish: true,
            checked_mode: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::param(format!("beta must be positive, got {}", self.beta)));
        }
        if !(self.eps >= 0.0 && self.eps < 1.0) {
            return Err(Error::param(format!("eps must lie in [0, 1), got {}", self.eps)));
        }
        if !(self.outer_tol > 0.0) || self.max_outer == 0 {
            return Err(Error::param("outer tolerance and iteration cap must be positive"));
        }
        self.admm_tols.validate()
    }
}

pub fn default_beta(prob: &Problem) -> f64 {
    1e-4 * prob.a().norm_squared() / (prob.alpha() * prob.n() as f64)
}

/// ADMM penalties matched to the fidelity: (0.3/α, 1/α) when q > 1, where
/// 1/α is the curvature scale of the fidelity; (10, 10) for q = 1.
pub fn default_penalties(prob: &Problem) -> Penalties {
    if prob.q() > 1.0 {
        Penalties { gamma: 0.3 / prob.alpha(), delta: 1.0 / prob.alpha() }
    } else {
        Penalties { gamma: 10.0, delta: 10.0 }
    }
}

/// Least-squares start: Aᵀ(AAᵀ)⁻¹y when M ≤ N, (AᵀA)⁻¹Aᵀy when M > N. Falls
/// back to Aᵀy scaled to unit max-norm if the Gram matrix is singular.
pub fn default_start(prob: &Problem) -> DVector<f64> {
    let a = prob.a();
    let y = prob.y();
    let lsq = if prob.m() <= prob.n() {
        (a * a.transpose()).cholesky().map(|c| a.tr_mul(&c.solve(y)))
    } else {
        a.tr_mul(a).cholesky().map(|c| c.solve(&a.tr_mul(y)))
    };
    match lsq {
        Some(x) if x.iter().all(|v| v.is_finite()) => x,
        _ => scaled_correlation(prob),
    }
}

/// Aᵀy scaled to unit max-norm.
pub fn scaled_correlation(prob: &Problem) -> DVector<f64> {
    let g = prob.a().tr_mul(prob.y());
    let m = g.amax();
    if m > 0.0 {
        g / m
    } else {
        g
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ViolationKind {
    SupportGrew,
    SufficientDecrease { slack: f64, tolerance: f64 },
    CertificateUnmet { norm: f64, bound: f64 },
    /// The final step still changed the support.
    NotStabilized,
    /// A nonzero decayed below 10⁻³ of its value at stabilization.
    IterateBound { min_abs: f64, reference: f64 },
    SubgradientBound { norm: f64, bound: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub k: usize,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerWarning {
    pub k: usize,
    pub status: AdmmStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OuterState {
    pub x: DVector<f64>,
    pub support: SupportSet,
    /// Number of outer steps taken.
    pub k: usize,
    /// E(x⁽⁰⁾), …, E(x⁽ᵏ⁾).
    pub objective_trace: Vec<f64>,
    pub support_size_trace: Vec<usize>,
    /// Smallest nonzero magnitude of each iterate (0 for the zero vector).
    pub min_abs_trace: Vec<f64>,
    /// E(x⁽ᵏ⁾) − E(x⁽ᵏ⁺¹⁾) − (β/2)(1−ε)‖x⁽ᵏ⁺¹⁾ − x⁽ᵏ⁾‖², one per step.
    pub decrease_slack_trace: Vec<f64>,
    pub step_norm_trace: Vec<f64>,
    pub inner_iterations_trace: Vec<usize>,
    pub certificate_trace: Vec<f64>,
    /// First index from which the support never changes again.
    pub stabilized_at: Option<usize>,
    pub converged: bool,
    pub warnings: Vec<InnerWarning>,
    pub violations: Vec<Violation>,
}

impl OuterState {
    fn new(prob: &Problem, x0: &DVector<f64>) -> Result<Self> {
        let support = support_of(x0, 0.0);
        Ok(Self {
            x: x0.clone(),
            k: 0,
            objective_trace: vec![prob.objective(x0)?],
            support_size_trace: vec![support.len()],
            min_abs_trace: vec![min_nonzero(x0)],
            support,
            decrease_slack_trace: Vec::new(),
            step_norm_trace: Vec::new(),
            inner_iterations_trace: Vec::new(),
            certificate_trace: Vec::new(),
            stabilized_at: None,
            converged: false,
            warnings: Vec::new(),
            violations: Vec::new(),
        })
    }

    pub fn total_inner_iterations(&self) -> usize {
        self.inner_iterations_trace.iter().sum()
    }

    pub fn final_objective(&self) -> f64 {
        *self.objective_trace.last().expect("trace starts with E(x0)")
    }

    fn finish(&mut self) {
        let last = *self.support_size_trace.last().unwrap();
        let first_equal = self
            .support_size_trace
            .iter()
            .rposition(|&s| s != last)
            .map_or(0, |i| i + 1);
        self.stabilized_at = Some(first_equal);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationarityReport {
    /// Smallest nonzero |x_j| (0 when x = 0).
    pub min_nonzero: f64,
    pub max_abs: f64,
    /// Norm of the minimal-norm element of ∂E(x).
    pub residual_norm: f64,
    /// Norm of the fidelity part of that element on the support; the scale
    /// the residual should be judged against.
    pub gradient_scale: f64,
    pub support: SupportSet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub x_star: DVector<f64>,
    pub state: OuterState,
    pub report: StationarityReport,
}

fn min_nonzero(x: &DVector<f64>) -> f64 {
    let m = x
        .iter()
        .filter(|v| **v != 0.0)
        .fold(f64::INFINITY, |acc, v| acc.min(v.abs()));
    if m.is_finite() {
        m
    } else {
        0.0
    }
}

/// Minimal-norm element of ∂E(x).
///
/// Off the support ∂φ(|0|) = (−∞, ∞) absorbs every component. On the support
/// the regularizer contributes sgn(x_j)φ′(|x_j|); for q = 1 the fitted rows
/// choose η_i ∈ [−1, 1] to shorten the vector.
pub fn stationarity_check(prob: &Problem, x: &DVector<f64>) -> Result<StationarityReport> {
    check_len("signal length", prob.n(), x.len())?;
    let support = support_of(x, 0.0);
    let max_abs = x.amax();
    let min_nz = min_nonzero(x);
    if support.is_empty() {
        return Ok(StationarityReport {
            min_nonzero: 0.0,
            max_abs,
            residual_norm: 0.0,
            gradient_scale: 0.0,
            support,
        });
    }
    let r = prob.residual(x)?;
    let a_s = prob.restrict(&support)?;
    let inv_alpha = 1.0 / prob.alpha();
    let phi = prob.phi();
    let mut reg = DVector::zeros(support.len());
    for (k, &j) in support.indices().iter().enumerate() {
        reg[k] = x[j].signum() * phi.derivative(x[j].abs())?;
    }
    let radius = vec![0.0; support.len()];

    let (u, fid) = if prob.q() > 1.0 {
        let zeta = r.map(|v| lq_grad_scalar(v, prob.q()));
        let fid = a_s.tr_mul(&zeta) * inv_alpha;
        (&reg + &fid, fid)
    } else {
        let row_tol = ROW_ZERO_TOL * prob.y().amax().max(1.0);
        let zero_rows: Vec<usize> = (0..prob.m()).filter(|&i| r[i].abs() <= row_tol).collect();
        let zeta = r.map(|v| if v.abs() <= row_tol { 0.0 } else { v.signum() });
        let fixed = a_s.tr_mul(&zeta) * inv_alpha;
        let g: DMatrix<f64> = a_s.select_rows(&zero_rows).transpose() * inv_alpha;
        let base = &reg + &fixed;
        let rough = min_norm_selection(&base, &radius, &g, None);
        let sel = box_least_squares(&base, &g, &rough.eta);
        let fid = if zero_rows.is_empty() { fixed } else { fixed + &g * &sel.eta };
        (sel.u, fid)
    };
    Ok(StationarityReport {
        min_nonzero: min_nz,
        max_abs,
        residual_norm: u.norm(),
        gradient_scale: fid.norm(),
        support,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum InnerMode {
    Certificate,
    Tight,
}

fn inner_options(opts: &SolverOptions, mode: InnerMode) -> AdmmOptions {
    match mode {
        InnerMode::Certificate => AdmmOptions {
            tols: opts.admm_tols,
            penalties: opts.penalties,
            certificate: Some(CertificateRule {
                eps: opts.eps,
                max_iters: opts.certificate_max_iters,
            }),
            polish: opts.polish,
        },
        InnerMode::Tight => AdmmOptions {
            tols: AdmmTols {
                eps_abs: opts.admm_tols.eps_abs / 100.0,
                eps_rel: opts.admm_tols.eps_rel / 100.0,
                max_iters: opts.admm_tols.max_iters * 10,
            },
            penalties: opts.penalties,
            certificate: None,
            polish: opts.polish,
        },
    }
}

/// Record written to the outer trace sink.
pub const OUTER_TRACE_HEADER: &str = "k,support_size,objective,step_norm,inner_iterations,certificate_norm";

fn run(
    prob: &Problem,
    x0: &DVector<f64>,
    opts: &SolverOptions,
    mode: InnerMode,
    mut trace: Option<&mut dyn Write>,
) -> Result<SolveOutcome> {
    opts.validate()?;
    check_len("initial point", prob.n(), x0.len())?;
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("initial point is not finite".into()));
    }
    let io_err = |e: std::io::Error| Error::Numerical(format!("trace sink: {e}"));
    if let Some(sink) = trace.as_deref_mut() {
        writeln!(sink, "{OUTER_TRACE_HEADER}").map_err(io_err)?;
    }

    // ISSAPL's decrease guarantee is the ε = 0 case.
    let eps_eff = match mode {
        InnerMode::Certificate => opts.eps,
        InnerMode::Tight => 0.0,
    };
    let admm_opts = inner_options(opts, mode);
    let phi = prob.phi();
    let mut state = OuterState::new(prob, x0)?;

    for k in 0..opts.max_outer {
        let support = support_of(&state.x, 0.0);
        if support.is_empty() {
            state.converged = true;
            break;
        }
        let z_bar = support.gather(&state.x)?;
        let w = z_bar.map(|v| phi.derivative(v.abs())).iter().cloned().collect::<Result<Vec<_>>>()?;
        let spec = SubproblemSpec::new(
            prob.restrict(&support)?,
            prob.y().clone(),
            DVector::from_vec(w),
            z_bar.clone(),
            prob.q(),
            prob.alpha(),
            opts.beta,
        )?;
        let inner = admm_solve(&spec, &admm_opts)?;
        if !inner.status.is_success() {
            state.warnings.push(InnerWarning { k, status: inner.status });
        }
        let x_new = support.scatter(&inner.z_hat)?;
        if x_new.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("non-finite iterate at outer step {k}")));
        }

        let e_old = state.final_objective();
        let e_new = prob.objective(&x_new)?;
        let step = (&x_new - &state.x).norm();
        let slack = e_old - e_new - 0.5 * opts.beta * (1.0 - eps_eff) * step * step;
        let new_support = support_of(&x_new, 0.0);

        if opts.checked_mode {
            if !new_support.is_subset_of(&support) {
                state.violations.push(Violation { k, kind: ViolationKind::SupportGrew });
            }
            let tolerance = DECREASE_RTOL * (1.0 + e_old.abs());
            if slack < -tolerance {
                state.violations.push(Violation {
                    k,
                    kind: ViolationKind::SufficientDecrease { slack, tolerance },
                });
            }
            if mode == InnerMode::Certificate {
                let bound = certificate_bound(&spec, opts.eps, &inner.z_hat);
                if inner.status != AdmmStatus::CertificateMet || inner.certificate_norm > bound {
                    state.violations.push(Violation {
                        k,
                        kind: ViolationKind::CertificateUnmet {
                            norm: inner.certificate_norm,
                            bound,
                        },
                    });
                }
                if new_support.len() == support.len() {
                    check_subgradient_bound(prob, opts, k, &state.x, &x_new, &support, &inner.certificate.fidelity_term, step, &mut state.violations)?;
                }
            }
        }

        if let Some(sink) = trace.as_deref_mut() {
            writeln!(
                sink,
                "{},{},{:e},{:e},{},{:e}",
                k,
                support.len(),
                e_old,
                step,
                inner.iterations,
                inner.certificate_norm
            )
            .map_err(io_err)?;
        }

        let rel = step / state.x.norm();
        state.objective_trace.push(e_new);
        state.support_size_trace.push(new_support.len());
        state.min_abs_trace.push(min_nonzero(&x_new));
        state.decrease_slack_trace.push(slack);
        state.step_norm_trace.push(step);
        state.inner_iterations_trace.push(inner.iterations);
        state.certificate_trace.push(inner.certificate_norm);
        state.x = x_new;
        state.support = new_support;
        state.k = k + 1;
        if rel <= opts.outer_tol {
            state.converged = true;
            break;
        }
    }
    state.finish();
    if opts.checked_mode {
        check_tail(&mut state);
    }
    let report = stationarity_check(prob, &state.x)?;
    Ok(SolveOutcome {
        x_star: state.x.clone(),
        state,
        report,
    })
}

/// ‖v⁽ᵏ⁺¹⁾‖ ≤ (L_c + (β/2)(ε+2))‖x⁽ᵏ⁺¹⁾ − x⁽ᵏ⁾‖ on a step that keeps the
/// support, with v⁽ᵏ⁺¹⁾ ∈ ∂E(x⁽ᵏ⁺¹⁾) built from the inner certificate.
#[allow(clippy::too_many_arguments)]
fn check_subgradient_bound(
    prob: &Problem,
    opts: &SolverOptions,
    k: usize,
    x_old: &DVector<f64>,
    x_new: &DVector<f64>,
    support: &SupportSet,
    fidelity_term: &DVector<f64>,
    step: f64,
    violations: &mut Vec<Violation>,
) -> Result<()> {
    let phi = prob.phi();
    let mut c = f64::INFINITY;
    let mut v_sq = 0.0;
    for (idx, &j) in support.indices().iter().enumerate() {
        c = c.min(x_old[j].abs()).min(x_new[j].abs());
        let vj = x_new[j].signum() * phi.derivative(x_new[j].abs())? + fidelity_term[idx];
        v_sq += vj * vj;
    }
    let norm = v_sq.sqrt();
    let bound = (phi.lipschitz_const(c)? + 0.5 * opts.beta * (opts.eps + 2.0)) * step;
    if norm > bound * (1.0 + 1e-6) + 1e-10 {
        violations.push(Violation {
            k,
            kind: ViolationKind::SubgradientBound { norm, bound },
        });
    }
    Ok(())
}

fn check_tail(state: &mut OuterState) {
    let last = state.support_size_trace.len() - 1;
    if state.converged && last >= 1 && state.support_size_trace[last] != state.support_size_trace[last - 1] {
        state.violations.push(Violation {
            k: last,
            kind: ViolationKind::NotStabilized,
        });
    }
    if let Some(kk) = state.stabilized_at {
        let reference = state.min_abs_trace[kk];
        if reference > 0.0 {
            for (k, &m) in state.min_abs_trace.iter().enumerate().skip(kk) {
                if m < 1e-3 * reference {
                    state.violations.push(Violation {
                        k,
                        kind: ViolationKind::IterateBound { min_abs: m, reference },
                    });
                }
            }
        }
    }
}

/// InISSAPL: inner solves stop once ‖û‖₂ ≤ (β/2)ε‖ẑ − z̄‖₂ is witnessed.
pub fn solve_inissapl(prob: &Problem, x0: &DVector<f64>, opts: &SolverOptions) -> Result<SolveOutcome> {
    run(prob, x0, opts, InnerMode::Certificate, None)
}

/// [`solve_inissapl`] with a per-outer-step CSV trace.
pub fn solve_inissapl_traced(
    prob: &Problem,
    x0: &DVector<f64>,
    opts: &SolverOptions,
    trace: &mut dyn Write,
) -> Result<SolveOutcome> {
    run(prob, x0, opts, InnerMode::Certificate, Some(trace))
}

/// ISSAPL: inner solves run to ε_abs/100, ε_rel/100 without a certificate.
pub fn solve_issapl(prob: &Problem, x0: &DVector<f64>, opts: &SolverOptions) -> Result<SolveOutcome> {
    run(prob, x0, opts, InnerMode::Tight, None)
}

/// ISSA: each outer step minimizes Σ_{j∈S} φ(|x_j|) + fidelity over x with
/// x_j = 0 off S, by running ISSAPL on the restricted problem to stagnation.
pub fn solve_issa_reference(prob: &Problem, x0: &DVector<f64>, opts: &SolverOptions) -> Result<SolveOutcome> {
    if prob.n() > ISSA_REFERENCE_MAX_N {
        return Err(Error::SizeGuard {
            n: prob.n(),
            limit: ISSA_REFERENCE_MAX_N,
        });
    }
    opts.validate()?;
    check_len("initial point", prob.n(), x0.len())?;
    let inner_opts = SolverOptions {
        outer_tol: 1e-10,
        max_outer: 5000,
        checked_mode: false,
        ..*opts
    };
    let mut state = OuterState::new(prob, x0)?;
    for k in 0..opts.max_outer {
        let support = support_of(&state.x, 0.0);
        if support.is_empty() {
            state.converged = true;
            break;
        }
        let restricted = Problem::new(prob.restrict(&support)?, prob.y().clone(), prob.p(), prob.q(), prob.alpha())?;
        let inner = run(&restricted, &support.gather(&state.x)?, &inner_opts, InnerMode::Tight, None)?;
        let x_new = support.scatter(&inner.x_star)?;
        let e_old = state.final_objective();
        let e_new = prob.objective(&x_new)?;
        let step = (&x_new - &state.x).norm();
        let rel = step / state.x.norm();
        let new_support = support_of(&x_new, 0.0);
        if opts.checked_mode && !new_support.is_subset_of(&support) {
            state.violations.push(Violation { k, kind: ViolationKind::SupportGrew });
        }
        state.objective_trace.push(e_new);
        state.support_size_trace.push(new_support.len());
        state.min_abs_trace.push(min_nonzero(&x_new));
        state.decrease_slack_trace.push(e_old - e_new);
        state.step_norm_trace.push(step);
        state.inner_iterations_trace.push(inner.state.total_inner_iterations());
        state.certificate_trace.push(inner.state.certificate_trace.last().copied().unwrap_or(0.0));
        state.x = x_new;
        state.support = new_support;
        state.k = k + 1;
        if rel <= opts.outer_tol {
            state.converged = true;
            break;
        }
    }
    state.finish();
    let report = stationarity_check(prob, &state.x)?;
    Ok(SolveOutcome {
        x_star: state.x.clone(),
        state,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_problem() -> Problem {
        Problem::new(
            DMatrix::identity(4, 4),
            DVector::from_vec(vec![2.0, 0.0, 0.0, 0.0]),
            0.5,
            2.0,
            0.01,
        )
        .unwrap()
    }

    #[test]
    fn zero_start_is_a_fixed_point() {
        let prob = identity_problem();
        let opts = SolverOptions::for_problem(&prob);
        let out = solve_inissapl(&prob, &DVector::zeros(4), &opts).unwrap();
        assert_eq!(out.x_star, DVector::zeros(4));
        assert_eq!(out.state.k, 0);
        assert!(out.state.converged);
        assert_eq!(out.report.residual_norm, 0.0);
        let out = solve_issa_reference(&prob, &DVector::zeros(4), &opts).unwrap();
        assert_eq!(out.x_star, DVector::zeros(4));
    }

    #[test]
    fn stationarity_at_zero_is_absorbed() {
        let prob = identity_problem();
        let rep = stationarity_check(&prob, &DVector::zeros(4)).unwrap();
        assert_eq!(rep.residual_norm, 0.0);
        assert_eq!(rep.min_nonzero, 0.0);
        assert!(rep.support.is_empty());
    }

    #[test]
    fn generic_point_is_not_stationary() {
        let prob = identity_problem();
        let rep = stationarity_check(&prob, &DVector::from_vec(vec![1.0, 0.5, 0.0, -0.3])).unwrap();
        assert!(rep.residual_norm > 1.0);
        assert_eq!(rep.min_nonzero, 0.3);
        assert_eq!(rep.max_abs, 1.0);
    }

    #[test]
    fn invalid_options_rejected() {
        let prob = identity_problem();
        let mut opts = SolverOptions::for_problem(&prob);
        opts.eps = 1.0;
        assert!(solve_inissapl(&prob, prob.y(), &opts).is_err());
        opts.eps = 0.5;
        opts.beta = 0.0;
        assert!(solve_inissapl(&prob, prob.y(), &opts).is_err());
        let opts = SolverOptions::for_problem(&prob);
        assert!(solve_inissapl(&prob, &DVector::zeros(3), &opts).is_err());
        let bad = DVector::from_vec(vec![f64::NAN, 0.0, 0.0, 0.0]);
        assert!(matches!(solve_inissapl(&prob, &bad, &opts), Err(Error::Numerical(_))));
    }

    #[test]
    fn issa_reference_size_guard() {
        let prob = Problem::new(DMatrix::zeros(2, 201), DVector::zeros(2), 0.5, 2.0, 1.0).unwrap();
        let opts = SolverOptions {
            beta: 1.0,
            ..SolverOptions::for_problem(&identity_problem())
        };
        assert!(matches!(
            solve_issa_reference(&prob, &DVector::zeros(201), &opts),
            Err(Error::SizeGuard { n: 201, limit: 200 })
        ));
    }

    #[test]
    fn default_start_fits_wide_systems() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 0.0, 0.0, 1.0, 1.0]);
        let y = DVector::from_vec(vec![1.0, -1.0]);
        let prob = Problem::new(a.clone(), y.clone(), 0.5, 2.0, 1.0).unwrap();
        let x0 = default_start(&prob);
        assert!((&a * &x0 - &y).amax() < 1e-12);
        // minimum norm: x0 lies in the row space of A
        let c = (&a * a.transpose()).cholesky().unwrap().solve(&y);
        assert!((x0 - a.tr_mul(&c)).amax() < 1e-12);
    }

    #[test]
    fn default_start_falls_back_on_rank_deficiency() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        let prob = Problem::new(a, DVector::from_vec(vec![1.0, 3.0]), 0.5, 2.0, 1.0).unwrap();
        let x0 = default_start(&prob);
        assert_eq!(x0, scaled_correlation(&prob));
        assert_eq!(x0.amax(), 1.0);
    }
}
