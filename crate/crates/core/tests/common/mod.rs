#![allow(dead_code)]

use lpq_core::admm::SubproblemSpec;
use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(m, n, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

/// Random subproblem with positive weights.
pub fn random_spec(rng: &mut ChaCha8Rng, m: usize, n: usize, q: f64) -> SubproblemSpec {
    let b = gaussian_matrix(rng, m, n) / (m as f64).sqrt();
    let y = gaussian_vector(rng, m);
    let w = DVector::from_fn(n, |_, _| rng.random_range(0.05..0.5));
    let z_bar = gaussian_vector(rng, n);
    let alpha = rng.random_range(0.2..2.0);
    let beta = rng.random_range(0.2..2.0);
    SubproblemSpec::new(b, y, w, z_bar, q, alpha, beta).unwrap()
}

/// A with N(0, 1/m) entries, κ-sparse Gaussian signal, y = A x + σ·noise.
pub fn sparse_instance(
    rng: &mut ChaCha8Rng,
    m: usize,
    n: usize,
    kappa: usize,
    sigma: f64,
) -> (DMatrix<f64>, DVector<f64>, DVector<f64>) {
    let a = gaussian_matrix(rng, m, n) / (m as f64).sqrt();
    let mut x = DVector::zeros(n);
    for j in sample(rng, n, kappa).into_iter() {
        x[j] = rng.sample(StandardNormal);
    }
    let y = &a * &x + gaussian_vector(rng, m) * sigma;
    (a, y, x)
}

/// Golden-section search for a unimodal f on [lo, hi].
pub fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    while hi - lo > tol {
        if f(c) < f(d) {
            hi = d;
        } else {
            lo = c;
        }
        c = hi - g * (hi - lo);
        d = lo + g * (hi - lo);
    }
    0.5 * (lo + hi)
}

/// Best of `points` equispaced samples on [lo, hi]; returns (argmin, spacing).
pub fn grid_argmin(f: impl Fn(f64) -> f64, lo: f64, hi: f64, points: usize) -> (f64, f64) {
    let h = (hi - lo) / (points - 1) as f64;
    let mut best = (lo, f(lo));
    for k in 1..points {
        let x = lo + h * k as f64;
        let v = f(x);
        if v < best.1 {
            best = (x, v);
        }
    }
    (best.0, h)
}
