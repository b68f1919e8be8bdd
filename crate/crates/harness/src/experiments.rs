//! Table 1 and the impulsive-noise experiment. Every (method, parameter,
//! instance) run is an independent job on the work pool; results are collected
//! in job order, so reports do not depend on scheduling.

use nalgebra::DVector;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, Noise};
use crate::error::{config_err, Result};
use crate::instance::{gen_instance, trial_seed, tuning_seed};
use crate::methods::{run_method, Method, RunOutcome};
use crate::metrics::{mean, rel_l2_error, support_recovered};
use crate::report::{OutlierRecord, PlotSeries, Report, TrialReport, TuningRecord};

pub const THREADS_ENV: &str = "LPQ_THREADS";

/// Pool size: available parallelism, capped by `LPQ_THREADS` when set.
pub fn thread_count() -> usize {
    let avail = std::thread::available_parallelism().map_or(1, |n| n.get());
    match std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        Some(cap) if cap > 0 => cap.min(avail),
        _ => avail,
    }
}

pub fn in_pool<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    match rayon::ThreadPoolBuilder::new().num_threads(thread_count()).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

fn grid_for(cfg: &ExperimentConfig, method: Method) -> Vec<f64> {
    match method {
        Method::Lasso => cfg.lambda_grid(),
        Method::Lpq { q, .. } => cfg.alpha_grid_for(q),
    }
}

fn held_out_error(cfg: &ExperimentConfig, method: Method, param: f64, trial: usize) -> Option<f64> {
    let inst = gen_instance(cfg, tuning_seed(cfg, trial));
    let out = run_method(&inst, method, param, &cfg.solver).ok()?;
    rel_l2_error(&out.x, &inst.x_true)
}

/// Picks the grid value with the smallest mean held-out error (first on ties).
fn tune(cfg: &ExperimentConfig, methods: &[Method]) -> Vec<TuningRecord> {
    let grids: Vec<Vec<f64>> = methods.iter().map(|m| grid_for(cfg, *m)).collect();
    let jobs: Vec<(usize, usize, usize)> = grids
        .iter()
        .enumerate()
        .filter(|(_, g)| g.len() > 1)
        .flat_map(|(mi, g)| (0..g.len()).flat_map(move |gi| (0..cfg.tuning_trials).map(move |t| (mi, gi, t))))
        .collect();
    let errors: Vec<Option<f64>> = jobs
        .par_iter()
        .map(|&(mi, gi, t)| held_out_error(cfg, methods[mi], grids[mi][gi], t))
        .collect();

    methods
        .iter()
        .enumerate()
        .map(|(mi, method)| {
            let grid = grids[mi].clone();
            let mean_errors: Vec<Option<f64>> = (0..grid.len())
                .map(|gi| {
                    let errs: Option<Vec<f64>> = jobs
                        .iter()
                        .zip(&errors)
                        .filter(|((m, g, _), _)| *m == mi && *g == gi)
                        .map(|(_, e)| *e)
                        .collect();
                    errs.map(|e| mean(&e))
                })
                .collect();
            let mut best = 0;
            for gi in 1..grid.len() {
                let cur = mean_errors[gi].unwrap_or(f64::INFINITY);
                if cur < mean_errors[best].unwrap_or(f64::INFINITY) {
                    best = gi;
                }
            }
            TuningRecord { method: method.label(), noise: cfg.noise.level(), chosen: grid[best], grid, mean_errors }
        })
        .collect()
}

struct TrialOut {
    report: TrialReport,
    x: Option<DVector<f64>>,
    outliers: Vec<usize>,
}

fn run_trial(cfg: &ExperimentConfig, experiment: &str, hash: &str, method: Method, param: f64, trial: usize) -> TrialOut {
    let seed = trial_seed(cfg, trial);
    let inst = gen_instance(cfg, seed);
    let outcome = run_method(&inst, method, param, &cfg.solver);
    let mut report = TrialReport {
        experiment: experiment.into(),
        method: method.label(),
        p: method.p(),
        q: method.q(),
        noise: cfg.noise.level(),
        trial,
        seed,
        param,
        rel_l2_error: None,
        support_recovered: 0.0,
        support_size: 0,
        outer_iters: 0,
        total_inner_iters: 0,
        wall_time: 0.0,
        converged: false,
        violations: 0,
        decrease_violations: 0,
        config_hash: hash.into(),
        error: None,
    };
    let x = match outcome {
        Ok(RunOutcome { x, outer_iters, total_inner_iters, wall_time, converged, violations, decrease_violations }) => {
            report.rel_l2_error = rel_l2_error(&x, &inst.x_true);
            if report.rel_l2_error.is_none() {
                report.error = Some("recovered signal is zero".into());
            }
            report.support_recovered = support_recovered(&x, &inst.x_true);
            report.support_size = x.iter().filter(|v| **v != 0.0).count();
            report.outer_iters = outer_iters;
            report.total_inner_iters = total_inner_iters;
            report.wall_time = wall_time;
            report.converged = converged;
            report.violations = violations;
            report.decrease_violations = decrease_violations;
            Some(x)
        }
        Err(e) => {
            report.error = Some(e.to_string());
            None
        }
    };
    TrialOut { report, x: if trial == 0 { x } else { None }, outliers: inst.outliers }
}

/// Tunes each method on held-out instances, then runs it on `cfg.trials`
/// instances. Also returns each method's recovered signal on trial 0.
fn run_methods(
    cfg: &ExperimentConfig,
    experiment: &str,
    methods: &[Method],
) -> Result<(Report, Vec<Option<DVector<f64>>>)> {
    cfg.validate()?;
    let hash = cfg.hash();
    in_pool(|| {
        let tuning = tune(cfg, methods);
        let jobs: Vec<(usize, usize)> =
            (0..methods.len()).flat_map(|mi| (0..cfg.trials).map(move |t| (mi, t))).collect();
        let outs: Vec<TrialOut> = jobs
            .par_iter()
            .map(|&(mi, t)| run_trial(cfg, experiment, &hash, methods[mi], tuning[mi].chosen, t))
            .collect();

        let mut first_x = vec![None; methods.len()];
        let mut outliers = Vec::new();
        let mut trials = Vec::with_capacity(outs.len());
        for (&(mi, t), out) in jobs.iter().zip(outs) {
            if t == 0 {
                first_x[mi] = out.x;
            }
            if mi == 0 && matches!(cfg.noise, Noise::Cauchy { .. }) {
                outliers.push(OutlierRecord { seed: out.report.seed, positions: out.outliers });
            }
            trials.push(out.report);
        }
        let report = Report {
            experiment: experiment.into(),
            configs: vec![cfg.clone()],
            tuning,
            trials,
            outliers,
            plots: Vec::new(),
        };
        Ok((report, first_x))
    })
}

pub fn table1_methods(cfg: &ExperimentConfig) -> Vec<Method> {
    std::iter::once(Method::Lasso).chain(cfg.p_grid.iter().map(|&p| Method::Lpq { p, q: cfg.q })).collect()
}

/// LASSO and ℓp-ℓ2 for each p at one noise level.
pub fn run_table1(cfg: &ExperimentConfig) -> Result<Report> {
    if cfg.q != 2.0 {
        return Err(config_err(format!("table 1 uses q = 2, got {}", cfg.q)));
    }
    Ok(run_methods(cfg, "table1", &table1_methods(cfg))?.0)
}

/// One table over several noise levels; the configs must share p_grid.
pub fn run_table1_levels(cfgs: &[ExperimentConfig]) -> Result<Report> {
    let mut report = Report::default();
    for cfg in cfgs {
        if cfgs[0].p_grid != cfg.p_grid {
            return Err(config_err("noise levels of one table must share p_grid"));
        }
        report.merge(run_table1(cfg)?);
    }
    Ok(report)
}

pub fn cauchy_methods(cfg: &ExperimentConfig) -> Vec<Method> {
    let mut methods = vec![Method::Lasso];
    for &p in &cfg.p_grid {
        methods.push(Method::Lpq { p, q: 2.0 });
        methods.push(Method::Lpq { p, q: 1.0 });
    }
    methods
}

/// LASSO, ℓp-ℓ2 and ℓp-ℓ1 under the configured noise. Plot data come from
/// trial 0: the observations, then the truth and each recovery.
pub fn run_cauchy_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    let methods = cauchy_methods(cfg);
    let (mut report, first_x) = run_methods(cfg, "cauchy", &methods)?;
    let inst = gen_instance(cfg, trial_seed(cfg, 0));
    report.plots.push(PlotSeries {
        name: "cauchy_observations".into(),
        columns: vec!["noiseless".into(), "observed".into()],
        rows: (0..cfg.m).map(|i| (i, vec![inst.y_clean[i], inst.y[i]])).collect(),
    });
    for (method, x) in methods.iter().zip(first_x) {
        let Some(x) = x else { continue };
        report.plots.push(PlotSeries {
            name: format!("cauchy_{}", method.label()),
            columns: vec!["true".into(), "recovered".into()],
            rows: (0..cfg.n).map(|j| (j, vec![inst.x_true[j], x[j]])).collect(),
        });
    }
    Ok(report)
}
