//! ADMM-LASSO baseline: min ½‖Ax − y‖² + λ‖x‖₁.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::admm::AdmmTols;
use crate::error::{check_len, Error, Result};
use crate::prox::shrink;

#[derive(Debug, Clone, PartialEq)]
pub struct LassoSpec {
    pub a: DMatrix<f64>,
    pub y: DVector<f64>,
    pub lambda_reg: f64,
    pub rho: f64,
    pub tols: AdmmTols,
}

impl LassoSpec {
    pub fn new(a: DMatrix<f64>, y: DVector<f64>, lambda_reg: f64, rho: f64, tols: AdmmTols) -> Result<Self> {
        check_len("lasso observation", a.nrows(), y.len())?;
        if !(lambda_reg > 0.0 && rho > 0.0) {
            return Err(Error::param(format!(
                "lambda and rho must be positive, got {lambda_reg}, {rho}"
            )));
        }
        tols.validate()?;
        Ok(Self { a, y, lambda_reg, rho, tols })
    }

    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        let mut r = self.y.clone();
        r.gemv(1.0, &self.a, x, -1.0);
        0.5 * r.norm_squared() + self.lambda_reg * x.lp_norm(1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LassoResult {
    /// The sparse split variable at termination.
    pub x: DVector<f64>,
    pub iterations: usize,
    pub primal_residual_trace: Vec<f64>,
    pub dual_residual_trace: Vec<f64>,
    pub converged: bool,
}

/// Solves (AᵀA + ρI)x = v, factoring whichever Gram matrix is smaller.
enum RidgeSolver {
    Primal(Cholesky<f64, Dyn>),
    /// Woodbury form with the factor of I + AAᵀ/ρ.
    Dual(Cholesky<f64, Dyn>),
}

impl RidgeSolver {
    fn new(a: &DMatrix<f64>, rho: f64) -> Result<Self> {
        let (m, n) = a.shape();
        let fail = || Error::Numerical("lasso normal matrix is not positive definite".into());
        if m >= n {
            let mut h = a.tr_mul(a);
            for i in 0..n {
                h[(i, i)] += rho;
            }
            Ok(Self::Primal(Cholesky::new(h).ok_or_else(fail)?))
        } else {
            let mut h = a * a.transpose() / rho;
            for i in 0..m {
                h[(i, i)] += 1.0;
            }
            Ok(Self::Dual(Cholesky::new(h).ok_or_else(fail)?))
        }
    }

    fn solve(&self, a: &DMatrix<f64>, rho: f64, v: &DVector<f64>) -> DVector<f64> {
        match self {
            Self::Primal(f) => f.solve(v),
            Self::Dual(f) => {
                let av = f.solve(&(a * v));
                v / rho - a.tr_mul(&av) / (rho * rho)
            }
        }
    }
}

pub fn lasso_solve(spec: &LassoSpec) -> Result<LassoResult> {
    let a = &spec.a;
    if a.iter().any(|v| !v.is_finite()) || spec.y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite entry in lasso data".into()));
    }
    let n = a.ncols();
    let rho = spec.rho;
    let solver = RidgeSolver::new(a, rho)?;
    let aty = a.tr_mul(&spec.y);
    let thresh = spec.lambda_reg / rho;
    let sqrt_n = (n as f64).sqrt();

    let mut x = DVector::zeros(n);
    let mut z = DVector::<f64>::zeros(n);
    let mut u = DVector::<f64>::zeros(n);
    let mut primal_trace = Vec::new();
    let mut dual_trace = Vec::new();
    let mut converged = false;
    for _ in 0..spec.tols.max_iters {
        x = solver.solve(a, rho, &(&aty + (&z - &u) * rho));
        let z_prev = std::mem::replace(&mut z, (&x + &u).map(|v| shrink(v, thresh)));
        u += &x - &z;

        let r = (&x - &z).norm();
        let s = rho * (&z - &z_prev).norm();
        primal_trace.push(r);
        dual_trace.push(s);
        let eps_pri = sqrt_n * spec.tols.eps_abs + spec.tols.eps_rel * x.norm().max(z.norm());
        let eps_dual = sqrt_n * spec.tols.eps_abs + spec.tols.eps_rel * rho * u.norm();
        if r <= eps_pri && s <= eps_dual {
            converged = true;
            break;
        }
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite lasso iterate".into()));
    }
    Ok(LassoResult {
        x: z,
        iterations: primal_trace.len(),
        primal_residual_trace: primal_trace,
        dual_residual_trace: dual_trace,
        converged,
    })
}

/// max_j dist(−A_jᵀ(Ax − y), λ∂|x_j|): zero exactly at a LASSO minimizer.
pub fn lasso_kkt_residual(spec: &LassoSpec, x: &DVector<f64>) -> f64 {
    let mut r = spec.y.clone();
    r.gemv(1.0, &spec.a, x, -1.0);
    let g = spec.a.tr_mul(&r);
    g.iter()
        .zip(x.iter())
        .map(|(gj, xj)| {
            if *xj == 0.0 {
                (gj.abs() - spec.lambda_reg).max(0.0)
            } else {
                (gj + spec.lambda_reg * xj.signum()).abs()
            }
        })
        .fold(0.0, f64::max)
}
