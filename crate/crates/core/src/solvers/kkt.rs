use crate::augmented::AugmentedOperator;
use crate::error::{check_exponent, check_positive, Error, Result};
use crate::linalg::ProblemInstance;
use crate::prox::{infconv_argmin_prox, threshold_profile, InfConvPenaltyParams, ProxParams};

fn penalty_derivative(alpha: f64, q: f64, x: f64) -> f64 {
    alpha * x.signum() * x.abs().powf(q - 1.0)
}

/// Largest stationarity violation of `u` for the augmented objective, in
/// gradient units.
///
/// On the support: `|α sgn(u_i)|u_i|^(q−1) + ∇_i|`. Off the support the
/// thresholding step must keep the entry at zero: `(|μ∇_i| − τ_μ)₊ / μ`.
pub fn kkt_residual_augmented(u: &[f64], aug: &AugmentedOperator, alpha: f64, q: f64, mu: f64) -> Result<f64> {
    if u.len() != aug.b_matrix.cols() {
        return Err(Error::DimensionMismatch(format!("u has length {}, expected {}", u.len(), aug.b_matrix.cols())));
    }
    let tau = threshold_profile(&ProxParams::new(q, alpha / q, mu)?).tau;
    let mut r = aug.b_matrix.mul_vec(u);
    for (ri, yi) in r.iter_mut().zip(aug.y_beta.iter()) {
        *ri -= yi;
    }
    let grad = aug.b_matrix.tr_mul_vec(&r);
    let worst = u.iter().zip(&grad).fold(0.0f64, |acc, (&ui, &gi)| {
        let viol = if ui != 0.0 { (penalty_derivative(alpha, q, ui) + gi).abs() } else { ((mu * gi).abs() - tau).max(0.0) / mu };
        acc.max(viol)
    });
    Ok(worst)
}

/// Largest violation of the stationarity conditions of `½‖Aw − y‖² + g(w)`
/// in their step-scaled form, with `u` the minimizer attaining `g(w)`:
/// `μ|α sgn(u_i)|u_i|^(q−1) + ∇_i|` on the support of `u` and `μ|βw_i + ∇_i|`
/// off it.
pub fn kkt_residual_infconv(w: &[f64], problem: &ProblemInstance, pen: &InfConvPenaltyParams, mu: f64) -> Result<f64> {
    check_positive("mu", mu)?;
    check_exponent(pen.q)?;
    let a = &problem.matrix;
    if w.len() != a.cols() {
        return Err(Error::DimensionMismatch(format!("w has length {}, expected {}", w.len(), a.cols())));
    }
    let u = infconv_argmin_prox(pen)?.apply_vec(w)?;
    let mut r = a.mul_vec(w);
    for (ri, yi) in r.iter_mut().zip(problem.observation.iter()) {
        *ri -= yi;
    }
    let grad = a.tr_mul_vec(&r);
    let mut worst = 0.0f64;
    for i in 0..w.len() {
        let viol = if u[i] != 0.0 {
            (penalty_derivative(pen.alpha, pen.q, u[i]) + grad[i]).abs()
        } else {
            (pen.beta * w[i] + grad[i]).abs()
        };
        worst = worst.max(mu * viol);
    }
    Ok(worst)
}
