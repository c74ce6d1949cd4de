use crate::augmented::AugmentedOperator;
use crate::linalg::{norm2, ProblemInstance};
use crate::prox::{infconv_value_and_argmin, lq_quasi_norm_pow, InfConvPenaltyParams};
use crate::Result;

fn half_residual_sq(pred: &[f64], target: &[f64]) -> f64 {
    0.5 * pred.iter().zip(target).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
}

/// `½‖A(u+v) − y‖² + (α/q)‖u‖_q^q + (β/2)‖v‖²`.
pub fn objective_t(u: &[f64], v: &[f64], problem: &ProblemInstance, alpha: f64, beta: f64, q: f64) -> f64 {
    let w: Vec<f64> = u.iter().zip(v).map(|(a, b)| a + b).collect();
    let pred = problem.matrix.mul_vec(&w);
    let nv = norm2(v);
    half_residual_sq(&pred, &problem.observation) + alpha / q * lq_quasi_norm_pow(u, q) + 0.5 * beta * nv * nv
}

/// `½‖B_βu − y_β‖² + (α/q)‖u‖_q^q`.
pub fn objective_f(u: &[f64], aug: &AugmentedOperator, alpha: f64, q: f64) -> f64 {
    let pred = aug.b_matrix.mul_vec(u);
    half_residual_sq(&pred, &aug.y_beta) + alpha / q * lq_quasi_norm_pow(u, q)
}

/// `½‖Aw − y‖² + g(w)`.
pub fn objective_ic(w: &[f64], problem: &ProblemInstance, pen: &InfConvPenaltyParams) -> Result<f64> {
    let pred = problem.matrix.mul_vec(w);
    let (g, _) = infconv_value_and_argmin(w, pen)?;
    Ok(half_residual_sq(&pred, &problem.observation) + g)
}

pub(crate) fn half_sq(r: &[f64]) -> f64 {
    0.5 * r.iter().map(|x| x * x).sum::<f64>()
}
