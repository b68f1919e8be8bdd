//! Minimal-norm subgradient selection.
//!
//! Both the inner certificate and the stationarity report need the shortest
//! vector of the form
//!
//! ```text
//! u = base + ξ + G η,   ξ_j ∈ [−r_j, r_j],   η ∈ [−1, 1]^k
//! ```
//!
//! where `r_j` is the half-width of the subdifferential interval carried by
//! coordinate j (0 when that coordinate's subgradient is single-valued, ∞ when
//! it absorbs everything) and the columns of `G` come from fidelity rows whose
//! residual is zero. For fixed η the best ξ is a shrinkage, so only η needs an
//! iterative solve: projected accelerated gradient on ½‖shrink(base + Gη, r)‖².

use nalgebra::{DMatrix, DVector};

use crate::prox::shrink;

const MAX_STEPS: usize = 500;
const POWER_STEPS: usize = 30;

#[derive(Debug, Clone)]
pub struct Selection {
    pub u: DVector<f64>,
    pub eta: DVector<f64>,
}

fn evaluate(base: &DVector<f64>, radius: &[f64], g: &DMatrix<f64>, eta: &DVector<f64>) -> DVector<f64> {
    let mut v = base.clone();
    if g.ncols() > 0 {
        v.gemv(1.0, g, eta, 1.0);
    }
    for (vj, &rj) in v.iter_mut().zip(radius) {
        *vj = shrink(*vj, rj);
    }
    v
}

fn spectral_norm_sq(g: &DMatrix<f64>) -> f64 {
    let k = g.ncols();
    let mut x = DVector::from_element(k, 1.0 / (k as f64).sqrt());
    let mut est = 0.0;
    for _ in 0..POWER_STEPS {
        let gx = g * &x;
        let y = g.tr_mul(&gx);
        let nrm = y.norm();
        if nrm == 0.0 {
            return 0.0;
        }
        est = nrm;
        x = y / nrm;
    }
    est
}

pub fn min_norm_selection(
    base: &DVector<f64>,
    radius: &[f64],
    g: &DMatrix<f64>,
    eta0: Option<DVector<f64>>,
) -> Selection {
    debug_assert_eq!(base.len(), radius.len());
    debug_assert_eq!(g.nrows(), base.len());
    let k = g.ncols();
    let clip = |e: &mut DVector<f64>| e.apply(|v| *v = v.clamp(-1.0, 1.0));

    let mut eta = eta0.unwrap_or_else(|| DVector::zeros(k));
    clip(&mut eta);
    let mut best_u = evaluate(base, radius, g, &eta);
    if k == 0 {
        return Selection { u: best_u, eta };
    }
    let mut best_eta = eta.clone();
    let mut best = best_u.norm();

    let lip = 1.05 * spectral_norm_sq(g);
    if lip == 0.0 || best == 0.0 {
        return Selection { u: best_u, eta: best_eta };
    }
    let step = 1.0 / lip;
    let mut prev = eta.clone();
    let mut momentum = 1.0f64;
    let mut probe = eta.clone();
    for _ in 0..MAX_STEPS {
        let u = evaluate(base, radius, g, &probe);
        let grad = g.tr_mul(&u);
        let mut next = &probe - grad * step;
        clip(&mut next);

        let next_u = evaluate(base, radius, g, &next);
        let n = next_u.norm();
        if n < best {
            let gain = best - n;
            best = n;
            best_u = next_u;
            best_eta = next.clone();
            if gain <= 1e-14 * (1.0 + best) {
                break;
            }
        }
        let m_next = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
        probe = &next + (&next - &prev) * ((momentum - 1.0) / m_next);
        clip(&mut probe);
        momentum = m_next;
        prev = next;
        if best == 0.0 {
            break;
        }
    }
    Selection { u: best_u, eta: best_eta }
}

/// Exact minimizer of ‖c + Gη‖ over η ∈ [−1, 1]^k for the zero-radius case,
/// by a bounded-variable active-set method with a ratio test, warm started
/// from `eta0`. Returns whichever of the start and the result is shorter.
pub fn box_least_squares(c: &DVector<f64>, g: &DMatrix<f64>, eta0: &DVector<f64>) -> Selection {
    let k = g.ncols();
    let mut eta = eta0.map(|v| v.clamp(-1.0, 1.0));
    let start = Selection { u: c + g * &eta, eta: eta.clone() };
    if k == 0 {
        return start;
    }
    let mut free: Vec<bool> = eta.iter().map(|v| v.abs() < 1.0).collect();
    let tol = 1e-13 * (1.0 + g.norm() * (c.norm() + g.norm()));

    for _ in 0..4 * k + 10 {
        let f: Vec<usize> = (0..k).filter(|&i| free[i]).collect();
        if !f.is_empty() {
            let mut rhs = -c;
            for i in (0..k).filter(|&i| !free[i]) {
                rhs.axpy(-eta[i], &g.column(i), 1.0);
            }
            let svd = g.select_columns(&f).svd(true, true);
            let cut = 1e-12 * svd.singular_values.max();
            let Ok(target) = svd.solve(&rhs, cut) else { break };

            let mut t = 1.0;
            let mut block = None;
            for (a, &i) in f.iter().enumerate() {
                let d = target[a] - eta[i];
                let room = if d > 0.0 { 1.0 - eta[i] } else { -1.0 - eta[i] };
                if d != 0.0 && d.abs() * t > room.abs() {
                    t = room / d;
                    block = Some(i);
                }
            }
            for (a, &i) in f.iter().enumerate() {
                eta[i] += t * (target[a] - eta[i]);
            }
            if let Some(i) = block {
                eta[i] = if eta[i] > 0.0 { 1.0 } else { -1.0 };
                free[i] = false;
                continue;
            }
        }
        // subspace optimum: release the pinned coordinate whose gradient
        // points most strongly into the box
        let grad = g.tr_mul(&(c + g * &eta));
        let release = (0..k)
            .filter(|&i| !free[i])
            .map(|i| (i, if eta[i] > 0.0 { grad[i] } else { -grad[i] }))
            .filter(|&(_, v)| v > tol)
            .max_by(|a, b| a.1.total_cmp(&b.1));
        match release {
            Some((i, _)) => free[i] = true,
            None => break,
        }
    }
    let u = c + g * &eta;
    if u.norm() < start.u.norm() {
        Selection { u, eta }
    } else {
        start
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_free_rows_is_plain_shrink() {
        let base = DVector::from_vec(vec![3.0, -0.5, 2.0]);
        let radius = [1.0, 1.0, 0.0];
        let sel = min_norm_selection(&base, &radius, &DMatrix::zeros(3, 0), None);
        assert_eq!(sel.u, DVector::from_vec(vec![2.0, 0.0, 2.0]));
    }

    #[test]
    fn infinite_radius_absorbs() {
        let base = DVector::from_vec(vec![1e9, -4.0]);
        let sel = min_norm_selection(&base, &[f64::INFINITY; 2], &DMatrix::zeros(2, 0), None);
        assert_eq!(sel.u, DVector::zeros(2));
    }

    #[test]
    fn free_row_cancels_when_reachable() {
        // base + g·η with g = (2, 2): η = −0.5 zeroes it.
        let base = DVector::from_vec(vec![1.0, 1.0]);
        let g = DMatrix::from_column_slice(2, 1, &[2.0, 2.0]);
        let sel = min_norm_selection(&base, &[0.0, 0.0], &g, None);
        assert!(sel.u.norm() < 1e-10, "{}", sel.u);
        assert!((sel.eta[0] + 0.5).abs() < 1e-10);
    }

    #[test]
    fn free_row_saturates_at_box() {
        // η ∈ [−1, 1] cannot cancel base = 5 with g = 1.
        let base = DVector::from_vec(vec![5.0]);
        let g = DMatrix::from_column_slice(1, 1, &[1.0]);
        let sel = min_norm_selection(&base, &[0.0], &g, None);
        assert!((sel.u[0] - 4.0).abs() < 1e-12);
        assert!((sel.eta[0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn matches_brute_force_on_small_box() {
        let base = DVector::from_vec(vec![0.7, -1.3, 0.4]);
        let g = DMatrix::from_row_slice(3, 2, &[1.0, 0.5, -0.3, 1.2, 0.8, -0.4]);
        let radius = [0.0, 0.2, 0.0];
        let sel = min_norm_selection(&base, &radius, &g, None);
        let mut best = f64::INFINITY;
        let n = 400;
        for a in 0..=n {
            for b in 0..=n {
                let eta = DVector::from_vec(vec![
                    -1.0 + 2.0 * a as f64 / n as f64,
                    -1.0 + 2.0 * b as f64 / n as f64,
                ]);
                best = best.min(evaluate(&base, &radius, &g, &eta).norm());
            }
        }
        assert!(sel.u.norm() <= best + 1e-6, "{} vs {}", sel.u.norm(), best);
    }

    #[test]
    fn box_least_squares_solves_square_systems() {
        // η = −G⁻¹c lies inside the box, so the optimum is exact
        let g = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 2.0]);
        let eta_star = DVector::from_vec(vec![0.3, -0.9, 0.5]);
        let c = -(&g * &eta_star);
        let sel = box_least_squares(&c, &g, &DVector::zeros(3));
        assert!(sel.u.norm() < 1e-12);
        assert!((sel.eta - eta_star).amax() < 1e-12);
    }

    #[test]
    fn box_least_squares_matches_grid_with_active_bounds() {
        let base = DVector::from_vec(vec![2.5, -1.3, 0.4]);
        let g = DMatrix::from_row_slice(3, 2, &[1.0, 0.5, -0.3, 1.2, 0.8, -0.4]);
        let sel = box_least_squares(&base, &g, &DVector::zeros(2));
        let mut best = f64::INFINITY;
        let n = 400;
        for a in 0..=n {
            for b in 0..=n {
                let eta = DVector::from_vec(vec![-1.0 + 2.0 * a as f64 / n as f64, -1.0 + 2.0 * b as f64 / n as f64]);
                best = best.min((&base + &g * eta).norm());
            }
        }
        assert!(sel.u.norm() <= best + 1e-9, "{} vs {}", sel.u.norm(), best);
        assert!(sel.eta.iter().all(|v| v.abs() <= 1.0));
    }
}
