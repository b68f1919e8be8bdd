//! Invariant suite: checked-mode InISSAPL runs plus a stationarity test at
//! each converged point.

use lpq_core::issapl::{default_start, solve_inissapl, Violation};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, Noise};
use crate::error::Result;
use crate::experiments::in_pool;
use crate::instance::{gen_instance, trial_seed};

/// Stationarity passes when residual ≤ this · (1 + gradient scale).
pub const STATIONARITY_RTOL: f64 = 1e-4;
/// Relative slack allowed in the independent decrease recheck.
pub const DECREASE_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRun {
    pub seed: u64,
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    pub outer_iters: usize,
    pub converged: bool,
    pub stabilized_at: Option<usize>,
    pub violations: Vec<Violation>,
    pub inner_warnings: usize,
    /// Support sizes never grew and every decrease slack met the tolerance,
    /// rechecked from the traces.
    pub traces_ok: bool,
    pub residual_norm: f64,
    pub gradient_scale: f64,
    pub min_nonzero: f64,
    pub support_size: usize,
}

impl CheckRun {
    pub fn invariants_ok(&self) -> bool {
        self.converged && self.stabilized_at.is_some() && self.violations.is_empty() && self.traces_ok
    }

    pub fn stationary(&self) -> bool {
        self.residual_norm <= STATIONARITY_RTOL * (1.0 + self.gradient_scale)
            && (self.support_size == 0 || self.min_nonzero > 0.0)
    }
}

/// 100×200, κ = 20, σ = 0.01, p ∈ {0.3, 0.5, 0.7}, 20 instances, outer
/// tolerance 10⁻⁶.
pub fn check_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig {
        m: 100,
        n: 200,
        kappa: 20,
        p_grid: vec![0.3, 0.5, 0.7],
        noise: Noise::Gaussian { sigma: 0.01 },
        trials: 20,
        scale_tag: "check".into(),
        ..ExperimentConfig::default()
    };
    cfg.solver.outer_tol = 1e-6;
    cfg
}

/// α used by the suite when none is configured.
pub fn default_check_alpha(q: f64) -> f64 {
    if q == 1.0 {
        0.3
    } else {
        0.01
    }
}

fn check_one(cfg: &ExperimentConfig, trial: usize, p: f64, q: f64) -> Result<CheckRun> {
    let seed = trial_seed(cfg, trial);
    let inst = gen_instance(cfg, seed);
    let alpha = cfg.alpha.unwrap_or_else(|| default_check_alpha(q));
    let prob = inst.problem(p, q, alpha)?;
    let mut opts = cfg.solver.options(&prob);
    opts.checked_mode = true;
    let out = solve_inissapl(&prob, &default_start(&prob), &opts)?;
    let st = &out.state;
    let sizes_ok = st.support_size_trace.windows(2).all(|w| w[1] <= w[0]);
    let slack_ok = st
        .decrease_slack_trace
        .iter()
        .zip(&st.objective_trace)
        .all(|(s, e)| *s >= -DECREASE_SLACK * (1.0 + e.abs()));
    Ok(CheckRun {
        seed,
        p,
        q,
        alpha,
        outer_iters: st.k,
        converged: st.converged,
        stabilized_at: st.stabilized_at,
        violations: st.violations.clone(),
        inner_warnings: st.warnings.len(),
        traces_ok: sizes_ok && slack_ok,
        residual_norm: out.report.residual_norm,
        gradient_scale: out.report.gradient_scale,
        min_nonzero: out.report.min_nonzero,
        support_size: out.report.support.len(),
    })
}

/// Every trial instance × p in `cfg.p_grid` × q in `qs`.
pub fn run_checks(cfg: &ExperimentConfig, qs: &[f64]) -> Result<Vec<CheckRun>> {
    cfg.validate()?;
    let jobs: Vec<(usize, f64, f64)> = (0..cfg.trials)
        .flat_map(|t| cfg.p_grid.iter().flat_map(move |&p| qs.iter().map(move |&q| (t, p, q))))
        .collect();
    in_pool(|| jobs.par_iter().map(|&(t, p, q)| check_one(cfg, t, p, q)).collect())
}
