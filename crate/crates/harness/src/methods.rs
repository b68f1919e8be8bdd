use std::time::Instant;

use lpq_core::issapl::{default_start, solve_inissapl, ViolationKind};
use lpq_core::lasso::{lasso_solve, LassoSpec};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::config::SolverSettings;
use crate::error::Result;
use crate::instance::Instance;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Method {
    Lasso,
    Lpq { p: f64, q: f64 },
}

impl Method {
    /// `lasso` or e.g. `l0.5-l2`.
    pub fn label(&self) -> String {
        match self {
            Method::Lasso => "lasso".into(),
            Method::Lpq { p, q } => format!("l{p}-l{q}"),
        }
    }

    pub fn p(&self) -> Option<f64> {
        match self {
            Method::Lasso => None,
            Method::Lpq { p, .. } => Some(*p),
        }
    }

    pub fn q(&self) -> Option<f64> {
        match self {
            Method::Lasso => None,
            Method::Lpq { q, .. } => Some(*q),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub x: DVector<f64>,
    pub outer_iters: usize,
    pub total_inner_iters: usize,
    pub wall_time: f64,
    pub converged: bool,
    pub violations: usize,
    pub decrease_violations: usize,
}

/// Runs one method on one instance. `param` is α for ℓp-ℓq and λ for LASSO.
pub fn run_method(inst: &Instance, method: Method, param: f64, settings: &SolverSettings) -> Result<RunOutcome> {
    let start = Instant::now();
    match method {
        Method::Lasso => {
            let spec = LassoSpec::new(inst.a.clone(), inst.y.clone(), param, settings.lasso_rho, settings.lasso_tols())?;
            let res = lasso_solve(&spec)?;
            Ok(RunOutcome {
                x: res.x,
                outer_iters: 0,
                total_inner_iters: res.iterations,
                wall_time: start.elapsed().as_secs_f64(),
                converged: res.converged,
                violations: 0,
                decrease_violations: 0,
            })
        }
        Method::Lpq { p, q } => {
            let prob = inst.problem(p, q, param)?;
            let opts = settings.options(&prob);
            let out = solve_inissapl(&prob, &default_start(&prob), &opts)?;
            let decrease = out
                .state
                .violations
                .iter()
                .filter(|v| matches!(v.kind, ViolationKind::SufficientDecrease { .. }))
                .count();
            Ok(RunOutcome {
                outer_iters: out.state.k,
                total_inner_iters: out.state.total_inner_iterations(),
                wall_time: start.elapsed().as_secs_f64(),
                converged: out.state.converged,
                violations: out.state.violations.len(),
                decrease_violations: decrease,
                x: out.x_star,
            })
        }
    }
}
