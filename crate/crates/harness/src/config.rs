//! Experiment configuration. JSON files deserialize into [`ExperimentConfig`];
//! missing fields take the desk-scale defaults.

use lpq_core::admm::AdmmTols;
use lpq_core::issapl::SolverOptions;
use lpq_core::problem::Problem;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{config_err, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Noise {
    Gaussian { sigma: f64 },
    /// scale · standard Cauchy
    Cauchy { scale: f64 },
}

impl Noise {
    pub fn level(&self) -> f64 {
        match *self {
            Noise::Gaussian { sigma } => sigma,
            Noise::Cauchy { scale } => scale,
        }
    }
}

/// Entry distribution of A. `Normalized` draws N(0, 1/M), i.e. unit expected
/// column norm; `Standard` draws N(0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixScaling {
    #[default]
    Normalized,
    Standard,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSettings {
    /// None selects the default β for each problem.
    pub beta: Option<f64>,
    pub eps: f64,
    pub outer_tol: f64,
    pub max_outer: usize,
    pub admm_eps_abs: f64,
    pub admm_eps_rel: f64,
    pub admm_max_iters: usize,
    pub checked: bool,
    pub lasso_rho: f64,
    pub lasso_max_iters: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        let tols = AdmmTols::default();
        Self {
            beta: None,
            eps: 0.5,
            outer_tol: 1e-3,
            max_outer: 500,
            admm_eps_abs: tols.eps_abs,
            admm_eps_rel: tols.eps_rel,
            admm_max_iters: tols.max_iters,
            checked: true,
            lasso_rho: 1.0,
            lasso_max_iters: 10_000,
        }
    }
}

impl SolverSettings {
    pub fn options(&self, prob: &Problem) -> SolverOptions {
        let mut opts = SolverOptions::for_problem(prob);
        if let Some(beta) = self.beta {
            opts.beta = beta;
        }
        opts.eps = self.eps;
        opts.outer_tol = self.outer_tol;
        opts.max_outer = self.max_outer;
        opts.admm_tols = AdmmTols {
            eps_abs: self.admm_eps_abs,
            eps_rel: self.admm_eps_rel,
            max_iters: self.admm_max_iters,
        };
        opts.checked_mode = self.checked;
        opts
    }

    pub fn lasso_tols(&self) -> AdmmTols {
        AdmmTols {
            eps_abs: self.admm_eps_abs,
            eps_rel: self.admm_eps_rel,
            max_iters: self.lasso_max_iters,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub m: usize,
    pub n: usize,
    pub kappa: usize,
    pub p_grid: Vec<f64>,
    pub q: f64,
    pub noise: Noise,
    /// Fixed α for every ℓp run; None tunes over the grids below.
    pub alpha: Option<f64>,
    /// Fixed LASSO weight; None tunes over `lambda_grid`.
    pub lambda: Option<f64>,
    pub alpha_grid: Vec<f64>,
    /// α grid used instead of `alpha_grid` when q = 1.
    pub alpha_grid_l1: Vec<f64>,
    pub lambda_grid: Vec<f64>,
    pub trials: usize,
    /// Held-out instances used only for picking α and λ.
    pub tuning_trials: usize,
    pub seed: u64,
    pub scale_tag: String,
    pub matrix_scaling: MatrixScaling,
    pub solver: SolverSettings,
}

pub const DEFAULT_P_GRID: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::table1_desk(0.01)
    }
}

impl ExperimentConfig {
    /// 300×500, κ = 50: the full-size shape ratios at a tenth of the size.
    pub fn table1_desk(sigma: f64) -> Self {
        Self {
            m: 300,
            n: 500,
            kappa: 50,
            p_grid: DEFAULT_P_GRID.to_vec(),
            q: 2.0,
            noise: Noise::Gaussian { sigma },
            alpha: None,
            lambda: None,
            alpha_grid: vec![1e-3, 3e-3, 1e-2, 3e-2, 1e-1, 3e-1, 1.0],
            alpha_grid_l1: vec![0.1, 0.3, 0.5, 1.0, 2.0],
            lambda_grid: vec![1e-3, 3e-3, 1e-2, 3e-2, 1e-1, 3e-1, 1.0],
            trials: 5,
            tuning_trials: 2,
            seed: 1,
            scale_tag: "desk".into(),
            matrix_scaling: MatrixScaling::Normalized,
            solver: SolverSettings::default(),
        }
    }

    pub fn table1_full(sigma: f64) -> Self {
        Self { m: 3000, n: 5000, kappa: 500, scale_tag: "full".into(), ..Self::table1_desk(sigma) }
    }

    /// 256×512, κ = 25, Cauchy noise scaled by 10⁻², p = 0.5.
    pub fn cauchy_desk() -> Self {
        Self {
            m: 256,
            n: 512,
            kappa: 25,
            p_grid: vec![0.5],
            noise: Noise::Cauchy { scale: 1e-2 },
            trials: 10,
            ..Self::table1_desk(0.0)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(config_err(format!("empty shape {}x{}", self.m, self.n)));
        }
        if self.kappa > self.n {
            return Err(config_err(format!("kappa {} exceeds N = {}", self.kappa, self.n)));
        }
        if self.trials == 0 {
            return Err(config_err("trials must be at least 1"));
        }
        if let Some(p) = self.p_grid.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
            return Err(config_err(format!("p = {p} outside (0, 1)")));
        }
        if !(self.q >= 1.0 && self.q.is_finite()) {
            return Err(config_err(format!("q = {} below 1", self.q)));
        }
        let level = self.noise.level();
        if !(level >= 0.0 && level.is_finite()) {
            return Err(config_err(format!("noise level {level} must be finite and non-negative")));
        }
        let positive = |v: &f64| *v > 0.0 && v.is_finite();
        for (name, fixed, grid) in [
            ("alpha", self.alpha, &self.alpha_grid),
            ("alpha_l1", self.alpha, &self.alpha_grid_l1),
            ("lambda", self.lambda, &self.lambda_grid),
        ] {
            match fixed {
                Some(v) if !positive(&v) => return Err(config_err(format!("{name} = {v} must be positive"))),
                Some(_) => {}
                None if grid.is_empty() || !grid.iter().all(positive) => {
                    return Err(config_err(format!("{name} grid must be non-empty and positive")))
                }
                None => {}
            }
        }
        if self.alpha.is_none() && self.tuning_trials == 0 {
            return Err(config_err("tuning needs at least one held-out trial"));
        }
        Ok(())
    }

    pub fn alpha_grid_for(&self, q: f64) -> Vec<f64> {
        match self.alpha {
            Some(a) => vec![a],
            None if q == 1.0 => self.alpha_grid_l1.clone(),
            None => self.alpha_grid.clone(),
        }
    }

    pub fn lambda_grid(&self) -> Vec<f64> {
        match self.lambda {
            Some(l) => vec![l],
            None => self.lambda_grid.clone(),
        }
    }

    /// First 16 hex digits of SHA-256 over the JSON encoding.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&json)[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }
}
