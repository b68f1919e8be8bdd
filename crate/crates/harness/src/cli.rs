use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use lpq_core::io::{load_matrix, load_vector, save_vector};
use nalgebra::DVector;

use crate::check::{check_config, run_checks};
use crate::config::{ExperimentConfig, Noise};
use crate::error::{config_err, Result};
use crate::experiments::{run_cauchy_experiment, run_table1_levels};
use crate::instance::{gen_instance, trial_seed, Instance};
use crate::methods::{run_method, Method};
use crate::metrics::{rel_l2_error, support_recovered};
use crate::report::{emit_report, Format, Report, TrialReport};

#[derive(Debug, Parser)]
#[command(name = "lpq", about = "Sparse recovery experiments with lp-lq support shrinking")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Gaussian-noise comparison of LASSO and lp-l2 over the p grid
    Table1(CommonArgs),
    /// Cauchy-noise comparison of LASSO, lp-l2 and lp-l1
    Cauchy(CommonArgs),
    /// Solve one problem, generated or loaded from files
    Solve(SolveArgs),
    /// Run the checked-mode invariant suite
    Check(CommonArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON experiment config; flags override its fields
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub kappa: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub p: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub q: Vec<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Gaussian noise levels; table1 runs one block per value
    #[arg(long, value_delimiter = ',')]
    pub sigma: Vec<f64>,
    #[arg(long)]
    pub cauchy_scale: Option<f64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub outer_tol: Option<f64>,
    #[arg(long)]
    pub max_outer: Option<usize>,
    #[arg(long)]
    pub admm_eps_abs: Option<f64>,
    #[arg(long)]
    pub admm_eps_rel: Option<f64>,
    #[arg(long)]
    pub admm_max_iters: Option<usize>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Output format; all applicable formats when omitted
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Record convergence-theory invariants (always on for table1, cauchy, check)
    #[arg(long)]
    pub checked: bool,
    /// Full-size problems (3000x5000, kappa = 500); slow
    #[arg(long)]
    pub full_scale: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Measurement matrix (.csv or binary); generated when omitted
    #[arg(long = "matrix")]
    pub matrix: Option<PathBuf>,
    /// Observation vector (.csv or binary)
    #[arg(long = "obs")]
    pub obs: Option<PathBuf>,
}

impl CommonArgs {
    /// Preset, then config file, then flags.
    pub fn resolve(&self, preset: ExperimentConfig) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
            None => preset,
        };
        if self.full_scale {
            eprintln!("warning: full scale runs 3000x5000 problems and can take hours");
            cfg.m = 3000;
            cfg.n = 5000;
            cfg.kappa = 500;
            cfg.scale_tag = "full".into();
        }
        macro_rules! set {
            ($($flag:ident => $($field:ident).+),* $(,)?) => {
                $(if let Some(v) = self.$flag { cfg.$($field).+ = v; })*
            };
        }
        set!(m => m, n => n, kappa => kappa, trials => trials, seed => seed,
             eps => solver.eps, outer_tol => solver.outer_tol, max_outer => solver.max_outer,
             admm_eps_abs => solver.admm_eps_abs, admm_eps_rel => solver.admm_eps_rel,
             admm_max_iters => solver.admm_max_iters);
        if self.alpha.is_some() {
            cfg.alpha = self.alpha;
        }
        if self.beta.is_some() {
            cfg.solver.beta = self.beta;
        }
        if !self.p.is_empty() {
            cfg.p_grid = self.p.clone();
        }
        if let Some(&q) = self.q.first() {
            cfg.q = q;
        }
        if let Some(scale) = self.cauchy_scale {
            cfg.noise = Noise::Cauchy { scale };
        } else if let Some(&sigma) = self.sigma.first() {
            cfg.noise = Noise::Gaussian { sigma };
        }
        if self.checked {
            cfg.solver.checked = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn formats(&self, default: &[Format]) -> Vec<Format> {
        self.format.map_or_else(|| default.to_vec(), |f| vec![f])
    }
}

fn print_written(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn suite_status(report: &Report) -> i32 {
    if report.decrease_violations() > 0 {
        eprintln!("error: {} sufficient-decrease violations", report.decrease_violations());
        1
    } else {
        0
    }
}

fn table1(args: &CommonArgs) -> Result<i32> {
    let base = args.resolve(ExperimentConfig::table1_desk(0.01))?;
    let sigmas = if !args.sigma.is_empty() {
        args.sigma.clone()
    } else if args.config.is_some() {
        vec![base.noise.level()]
    } else {
        vec![0.01, 0.1]
    };
    let cfgs: Vec<ExperimentConfig> =
        sigmas.iter().map(|&sigma| ExperimentConfig { noise: Noise::Gaussian { sigma }, ..base.clone() }).collect();
    let report = run_table1_levels(&cfgs)?;
    for cfg in &cfgs {
        let noise = cfg.noise.level();
        let cells: Vec<String> = crate::experiments::table1_methods(cfg)
            .iter()
            .map(|m| format!("{} {:.5}", m.label(), report.mean_error(&m.label(), noise)))
            .collect();
        println!("sigma={noise}: {}", cells.join("  "));
    }
    print_written(&emit_report(&report, &args.formats(&[Format::Csv, Format::Json]), &args.out)?);
    Ok(suite_status(&report))
}

fn cauchy(args: &CommonArgs) -> Result<i32> {
    let cfg = args.resolve(ExperimentConfig::cauchy_desk())?;
    let report = run_cauchy_experiment(&cfg)?;
    for m in crate::experiments::cauchy_methods(&cfg) {
        println!("{}: median error {:.5}", m.label(), report.median_error(&m.label(), cfg.noise.level()));
    }
    for rec in &report.outliers {
        println!("seed {}: outliers at {:?}", rec.seed, rec.positions);
    }
    let formats = args.formats(&[Format::Csv, Format::Json, Format::Plotdata]);
    print_written(&emit_report(&report, &formats, &args.out)?);
    Ok(suite_status(&report))
}

fn check(args: &CommonArgs) -> Result<i32> {
    let cfg = args.resolve(check_config())?;
    let qs = if args.q.is_empty() { vec![1.0, 2.0] } else { args.q.clone() };
    let runs = run_checks(&cfg, &qs)?;
    let mut bad = 0;
    for r in &runs {
        let ok = r.invariants_ok() && r.stationary();
        if !ok {
            bad += 1;
        }
        println!(
            "{} seed={} p={} q={} alpha={} k={} violations={} residual={:.3e} min_nonzero={:.3e}",
            if ok { "ok  " } else { "FAIL" },
            r.seed,
            r.p,
            r.q,
            r.alpha,
            r.outer_iters,
            r.violations.len(),
            r.residual_norm,
            r.min_nonzero
        );
        for v in &r.violations {
            println!("    step {}: {:?}", v.k, v.kind);
        }
    }
    println!("{} of {} runs failed", bad, runs.len());
    Ok(i32::from(bad > 0))
}

fn load_instance(args: &SolveArgs, cfg: &ExperimentConfig) -> Result<Option<Instance>> {
    match (&args.matrix, &args.obs) {
        (Some(a), Some(y)) => {
            let a = load_matrix(a)?;
            let y = load_vector(y)?;
            let n = a.ncols();
            Ok(Some(Instance {
                y_clean: y.clone(),
                a,
                y,
                x_true: DVector::zeros(n),
                seed: cfg.seed,
                outliers: Vec::new(),
            }))
        }
        (None, None) => Ok(None),
        _ => Err(config_err("--matrix and --obs must be given together")),
    }
}

fn solve(args: &SolveArgs) -> Result<i32> {
    let c = &args.common;
    let mut cfg = c.resolve(ExperimentConfig { p_grid: vec![0.5], ..ExperimentConfig::table1_desk(0.01) })?;
    cfg.solver.checked = c.checked;
    let (inst, known_truth) = match load_instance(args, &cfg)? {
        Some(inst) => (inst, false),
        None => (gen_instance(&cfg, trial_seed(&cfg, 0)), true),
    };
    let method = Method::Lpq { p: cfg.p_grid[0], q: cfg.q };
    let alpha = cfg.alpha.unwrap_or(0.01);
    let out = run_method(&inst, method, alpha, &cfg.solver)?;
    let (err, rec) = if known_truth {
        (rel_l2_error(&out.x, &inst.x_true), support_recovered(&out.x, &inst.x_true))
    } else {
        (None, 0.0)
    };
    println!(
        "{} alpha={alpha}: outer {} inner {} support {} time {:.2}s{}",
        method.label(),
        out.outer_iters,
        out.total_inner_iters,
        out.x.iter().filter(|v| **v != 0.0).count(),
        out.wall_time,
        err.map_or_else(String::new, |e| format!(" rel error {e:.5}"))
    );
    std::fs::create_dir_all(&c.out)?;
    let x_path = solution_path(&c.out, c.format);
    save_vector(&x_path, &out.x)?;
    println!("wrote {}", x_path.display());
    let report = Report {
        experiment: "solve".into(),
        configs: vec![cfg.clone()],
        trials: vec![TrialReport {
            experiment: "solve".into(),
            method: method.label(),
            p: method.p(),
            q: method.q(),
            noise: cfg.noise.level(),
            trial: 0,
            seed: inst.seed,
            param: alpha,
            rel_l2_error: err,
            support_recovered: rec,
            support_size: out.x.iter().filter(|v| **v != 0.0).count(),
            outer_iters: out.outer_iters,
            total_inner_iters: out.total_inner_iters,
            wall_time: out.wall_time,
            converged: out.converged,
            violations: out.violations,
            decrease_violations: out.decrease_violations,
            config_hash: cfg.hash(),
            error: None,
        }],
        ..Report::default()
    };
    print_written(&emit_report(&report, &[Format::Json], &c.out)?);
    Ok(i32::from(out.decrease_violations > 0))
}

fn solution_path(dir: &Path, format: Option<Format>) -> PathBuf {
    match format {
        Some(Format::Csv) | None => dir.join("x.csv"),
        _ => dir.join("x.bin"),
    }
}

/// Runs one command and returns the process exit code.
pub fn run(cli: Cli) -> Result<i32> {
    match &cli.command {
        Command::Table1(a) => table1(a),
        Command::Cauchy(a) => cauchy(a),
        Command::Solve(a) => solve(a),
        Command::Check(a) => check(a),
    }
}
