/// Euclidean projection onto `{α ≥ 0, Σα = 1}` by sort and threshold.
pub fn project_simplex(y: &[f64]) -> Vec<f64> {
    let mut out = y.to_vec();
    project_simplex_into(&mut out);
    out
}

pub fn project_simplex_into(y: &mut [f64]) {
    let r = y.len();
    if r == 0 {
        return;
    }
    // Members of the simplex (up to rounding of the sum) are fixed points.
    let sum: f64 = y.iter().sum();
    if y.iter().all(|v| *v >= 0.0) && (sum - 1.0).abs() <= 4.0 * f64::EPSILON * r as f64 {
        return;
    }
    let mut u = y.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut css = 0.0;
    let mut theta = 0.0;
    for (j, uj) in u.iter().enumerate() {
        css += uj;
        let t = (css - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    for v in y.iter_mut() {
        *v = (*v - theta).max(0.0);
    }
}
