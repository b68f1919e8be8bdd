use lpq_core::problem::Problem;
use lpq_core::rng::RngSpec;
use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::{ExperimentConfig, MatrixScaling, Noise};
use crate::error::Result;

const MATRIX_STREAM: u64 = 0;
const SIGNAL_STREAM: u64 = 1;
const NOISE_STREAM: u64 = 2;

/// Tuning instances draw from seeds offset by this much.
pub const TUNING_SEED_OFFSET: u64 = 1 << 32;

/// Noise entries larger than this many noise scales are reported as outliers.
pub const OUTLIER_FACTOR: f64 = 50.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub a: DMatrix<f64>,
    pub x_true: DVector<f64>,
    /// A·x_true
    pub y_clean: DVector<f64>,
    pub y: DVector<f64>,
    pub seed: u64,
    pub outliers: Vec<usize>,
}

impl Instance {
    pub fn problem(&self, p: f64, q: f64, alpha: f64) -> Result<Problem> {
        Ok(Problem::new(self.a.clone(), self.y.clone(), p, q, alpha)?)
    }
}

pub fn trial_seed(cfg: &ExperimentConfig, trial: usize) -> u64 {
    cfg.seed.wrapping_add(trial as u64)
}

pub fn tuning_seed(cfg: &ExperimentConfig, trial: usize) -> u64 {
    cfg.seed.wrapping_add(TUNING_SEED_OFFSET).wrapping_add(trial as u64)
}

pub fn sample_noise<R: Rng>(noise: Noise, m: usize, rng: &mut R) -> DVector<f64> {
    match noise {
        Noise::Gaussian { sigma } => DVector::from_fn(m, |_, _| {
            let e: f64 = StandardNormal.sample(rng);
            sigma * e
        }),
        Noise::Cauchy { scale } => DVector::from_fn(m, |_, _| {
            let u: f64 = rng.random();
            scale * (std::f64::consts::PI * (u - 0.5)).tan()
        }),
    }
}

/// Draws A, a κ-sparse standard normal x_true on a uniform random support, and
/// y = A·x_true + noise. Matrix, signal and noise use separate streams of `seed`.
pub fn gen_instance(cfg: &ExperimentConfig, seed: u64) -> Instance {
    let mut rng = RngSpec::new(seed, MATRIX_STREAM).rng();
    let scale = match cfg.matrix_scaling {
        MatrixScaling::Normalized => 1.0 / (cfg.m as f64).sqrt(),
        MatrixScaling::Standard => 1.0,
    };
    let a = DMatrix::from_fn(cfg.m, cfg.n, |_, _| {
        let v: f64 = StandardNormal.sample(&mut rng);
        scale * v
    });

    let mut rng = RngSpec::new(seed, SIGNAL_STREAM).rng();
    let mut support = sample(&mut rng, cfg.n, cfg.kappa).into_vec();
    support.sort_unstable();
    let mut x_true = DVector::zeros(cfg.n);
    for j in support {
        x_true[j] = StandardNormal.sample(&mut rng);
    }

    let y_clean = &a * &x_true;
    let noise = sample_noise(cfg.noise, cfg.m, &mut RngSpec::new(seed, NOISE_STREAM).rng());
    let outliers = match cfg.noise {
        Noise::Cauchy { scale } if scale > 0.0 => {
            (0..cfg.m).filter(|&i| noise[i].abs() > OUTLIER_FACTOR * scale).collect()
        }
        _ => Vec::new(),
    };
    let y = &y_clean + noise;
    Instance { a, x_true, y_clean, y, seed, outliers }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn support_has_kappa_entries() {
        let cfg = ExperimentConfig { m: 20, n: 40, kappa: 7, ..Default::default() };
        let inst = gen_instance(&cfg, 3);
        assert_eq!(inst.x_true.iter().filter(|v| **v != 0.0).count(), 7);
        assert_eq!(inst.a.shape(), (20, 40));
    }

    #[test]
    fn standard_scaling_is_larger() {
        let cfg = ExperimentConfig { m: 100, n: 50, kappa: 5, ..Default::default() };
        let norm = gen_instance(&cfg, 1).a;
        let std = gen_instance(&ExperimentConfig { matrix_scaling: MatrixScaling::Standard, ..cfg }, 1).a;
        assert!((std / 10.0 - norm).amax() < 1e-12);
    }

    #[test]
    fn cauchy_outliers_are_large_noise_entries() {
        let cfg = ExperimentConfig { m: 2000, n: 10, kappa: 2, noise: Noise::Cauchy { scale: 0.1 }, ..Default::default() };
        let inst = gen_instance(&cfg, 5);
        assert!(!inst.outliers.is_empty());
        for i in 0..cfg.m {
            let big = (inst.y[i] - inst.y_clean[i]).abs() > OUTLIER_FACTOR * 0.1;
            assert_eq!(big, inst.outliers.contains(&i));
        }
    }
}
