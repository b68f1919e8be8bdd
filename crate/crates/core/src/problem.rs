//! The ℓp-ℓq objective
//!
//! ```text
//! E(x) = Σ_j |x_j|^p + (1/(qα)) Σ_i |A_iᵀx − y_i|^q
//! ```

use nalgebra::{DMatrix, DVector};

use crate::error::{check_len, Error, Result};
use crate::phi::Phi;
use crate::support::SupportSet;

#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    a: DMatrix<f64>,
    y: DVector<f64>,
    phi: Phi,
    q: f64,
    alpha: f64,
}

impl Problem {
    pub fn new(a: DMatrix<f64>, y: DVector<f64>, p: f64, q: f64, alpha: f64) -> Result<Self> {
        let phi = Phi::new(p)?;
        if !(q >= 1.0 && q.is_finite()) {
            return Err(Error::param(format!("q must be finite and >= 1, got {q}")));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::param(format!("alpha must be positive, got {alpha}")));
        }
        if a.nrows() == 0 || a.ncols() == 0 {
            return Err(Error::param("measurement matrix must be non-empty"));
        }
        check_len("observation length", a.nrows(), y.len())?;
        Ok(Self { a, y, phi, q, alpha })
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn phi(&self) -> Phi {
        self.phi
    }

    pub fn p(&self) -> f64 {
        self.phi.p()
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Number of measurements M.
    pub fn m(&self) -> usize {
        self.a.nrows()
    }

    /// Signal dimension N.
    pub fn n(&self) -> usize {
        self.a.ncols()
    }

    /// Same data with a different exponent or weight.
    pub fn with_params(&self, p: f64, q: f64, alpha: f64) -> Result<Self> {
        Problem::new(self.a.clone(), self.y.clone(), p, q, alpha)
    }

    /// Ax − y.
    pub fn residual(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_len("signal length", self.n(), x.len())?;
        let mut r = self.y.clone();
        r.gemv(1.0, &self.a, x, -1.0);
        Ok(r)
    }

    pub fn regularizer(&self, x: &DVector<f64>) -> f64 {
        x.iter().map(|&v| self.phi.value(v)).sum()
    }

    /// (1/(qα))‖r‖_q^q for a given residual.
    pub fn fidelity_of_residual(&self, r: &DVector<f64>) -> f64 {
        lq_power_sum(r, self.q) / (self.q * self.alpha)
    }

    pub fn objective(&self, x: &DVector<f64>) -> Result<f64> {
        let r = self.residual(x)?;
        Ok(self.regularizer(x) + self.fidelity_of_residual(&r))
    }

    /// Column submatrix A_S.
    pub fn restrict(&self, support: &SupportSet) -> Result<DMatrix<f64>> {
        check_len("support ambient dimension", self.n(), support.ambient_dim())?;
        Ok(self.a.select_columns(support.indices()))
    }
}

/// Σ|r_i|^q, with the q = 1 and q = 2 cases kept free of `powf`.
pub fn lq_power_sum(r: &DVector<f64>, q: f64) -> f64 {
    if q == 2.0 {
        r.norm_squared()
    } else if q == 1.0 {
        r.lp_norm(1)
    } else {
        r.iter().map(|v| v.abs().powf(q)).sum()
    }
}

/// sgn(r)|r|^(q−1), the derivative of |r|^q / q for q > 1.
pub fn lq_grad_scalar(r: f64, q: f64) -> f64 {
    if q == 2.0 {
        r
    } else if r == 0.0 {
        0.0
    } else {
        r.signum() * r.abs().powf(q - 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngSpec;
    use crate::support::support_of;
    use proptest::prelude::*;
    use rand::Rng;

    fn random_problem(m: usize, n: usize, seed: u64, q: f64) -> Problem {
        let mut rng = RngSpec::new(seed, 0).rng();
        let a = DMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0));
        let y = DVector::from_fn(m, |_, _| rng.random_range(-1.0..1.0));
        Problem::new(a, y, 0.4, q, 0.7).unwrap()
    }

    #[test]
    fn objective_at_zero_is_scaled_lq_norm() {
        let prob = random_problem(5, 8, 1, 1.5);
        let x = DVector::zeros(8);
        let expected = prob.y().iter().map(|v| v.abs().powf(1.5)).sum::<f64>() / (1.5 * 0.7);
        assert!((prob.objective(&x).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn objective_exact_fit_unit_entry() {
        let prob = Problem::new(
            DMatrix::identity(2, 2),
            DVector::from_vec(vec![1.0, 0.0]),
            0.5,
            2.0,
            1.0,
        )
        .unwrap();
        let x = DVector::from_vec(vec![1.0, 0.0]);
        assert_eq!(prob.objective(&x).unwrap(), 1.0);
    }

    #[test]
    fn objective_matches_two_loop_sum() {
        for &q in &[1.0, 1.5, 2.0, 3.0] {
            let prob = random_problem(5, 8, 7, q);
            let mut rng = RngSpec::new(8, 0).rng();
            let x = DVector::<f64>::from_fn(8, |_, _| rng.random_range(-2.0..2.0));
            let mut reg = 0.0;
            for j in 0..8 {
                reg += x[j].abs().powf(prob.p());
            }
            let mut fid = 0.0;
            for i in 0..5 {
                let mut ax = 0.0;
                for j in 0..8 {
                    ax += prob.a()[(i, j)] * x[j];
                }
                fid += (ax - prob.y()[i]).abs().powf(q);
            }
            let oracle = reg + fid / (q * prob.alpha());
            let got = prob.objective(&x).unwrap();
            assert!(((got - oracle) / oracle).abs() < 1e-12, "q={q}: {got} vs {oracle}");
        }
    }

    #[test]
    fn dimension_errors() {
        let prob = random_problem(3, 4, 2, 2.0);
        assert!(matches!(
            prob.objective(&DVector::zeros(3)),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(Problem::new(DMatrix::zeros(3, 4), DVector::zeros(2), 0.5, 2.0, 1.0).is_err());
        assert!(Problem::new(DMatrix::zeros(3, 4), DVector::zeros(3), 0.5, 0.5, 1.0).is_err());
        assert!(Problem::new(DMatrix::zeros(3, 4), DVector::zeros(3), 0.5, 2.0, 0.0).is_err());
        assert!(Problem::new(DMatrix::zeros(0, 4), DVector::zeros(0), 0.5, 2.0, 1.0).is_err());
    }

    #[test]
    fn restrict_full_and_empty() {
        let prob = random_problem(4, 6, 3, 2.0);
        assert_eq!(&prob.restrict(&SupportSet::full(6)).unwrap(), prob.a());
        let b = prob.restrict(&SupportSet::empty(6)).unwrap();
        assert_eq!(b.shape(), (4, 0));
        assert_eq!(&b * DVector::<f64>::zeros(0), DVector::zeros(4));
    }

    #[test]
    fn restricted_product_matches_scatter_then_multiply() {
        let prob = random_problem(4, 6, 4, 2.0);
        let s = SupportSet::new(vec![1, 4], 6).unwrap();
        let b = prob.restrict(&s).unwrap();
        let mut rng = RngSpec::new(5, 0).rng();
        for _ in 0..20 {
            let z = DVector::from_fn(2, |_, _| rng.random_range(-3.0..3.0));
            let mut x = vec![0.0; 6];
            x[1] = z[0];
            x[4] = z[1];
            let mut ax = vec![0.0; 4];
            for i in 0..4 {
                for j in 0..6 {
                    ax[i] += prob.a()[(i, j)] * x[j];
                }
            }
            let bz = &b * &z;
            for i in 0..4 {
                assert!((bz[i] - ax[i]).abs() < 1e-14);
            }
        }
    }

    proptest! {
        #[test]
        fn objective_invariant_under_row_permutation(seed in 0u64..1000, shift in 1usize..5) {
            let prob = random_problem(5, 6, seed, 1.5);
            let perm: Vec<usize> = (0..5).map(|i| (i + shift) % 5).collect();
            let a = DMatrix::from_fn(5, 6, |i, j| prob.a()[(perm[i], j)]);
            let y = DVector::from_fn(5, |i, _| prob.y()[perm[i]]);
            let permuted = Problem::new(a, y, prob.p(), prob.q(), prob.alpha()).unwrap();
            let x = DVector::from_fn(6, |j, _| (j as f64 * 0.37 + seed as f64 * 0.01).sin());
            let e1 = prob.objective(&x).unwrap();
            let e2 = permuted.objective(&x).unwrap();
            prop_assert!((e1 - e2).abs() <= 1e-12 * (1.0 + e1.abs()));
        }

        #[test]
        fn restricted_objective_agrees_on_support(seed in 0u64..1000) {
            let prob = random_problem(4, 7, seed, 2.0);
            let x = DVector::from_fn(7, |j, _| if j % 3 == 0 { 0.0 } else { (seed as f64 + j as f64).cos() });
            let s = support_of(&x, 0.0);
            let b = prob.restrict(&s).unwrap();
            let bz = &b * s.gather(&x).unwrap();
            let ax = prob.a() * &x;
            prop_assert!((bz - ax).norm() < 1e-12);
        }
    }
}
