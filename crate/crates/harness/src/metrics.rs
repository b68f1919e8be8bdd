use nalgebra::DVector;

/// ‖x* − x°‖₂ / ‖x*‖₂, normalized by the recovered signal. None when x* = 0.
pub fn rel_l2_error(x_star: &DVector<f64>, x_true: &DVector<f64>) -> Option<f64> {
    let denom = x_star.norm();
    (denom > 0.0).then(|| (x_star - x_true).norm() / denom)
}

/// Fraction of supp(x°) that is also in supp(x*); 1 when x° = 0.
pub fn support_recovered(x_star: &DVector<f64>, x_true: &DVector<f64>) -> f64 {
    let truth = x_true.iter().filter(|v| **v != 0.0).count();
    if truth == 0 {
        return 1.0;
    }
    let hit = x_true.iter().zip(x_star.iter()).filter(|(t, s)| **t != 0.0 && **s != 0.0).count();
    hit as f64 / truth as f64
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation; 0 for fewer than two values.
pub fn std_dev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let mu = mean(values);
    (values.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len() / 2;
    if v.len() % 2 == 1 {
        v[k]
    } else {
        0.5 * (v[k - 1] + v[k])
    }
}
