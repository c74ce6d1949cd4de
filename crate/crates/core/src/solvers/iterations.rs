use log::warn;

use super::objective::half_sq;
use super::trace::{support_and_signs, IterationRecord, IterationTrace, Stopwatch};
use super::{ReferenceKind, SolverConfig, SolverResult, Status};
use crate::augmented::{build_augmented, AugmentedOperator, NoiseComponentMap};
use crate::error::{Error, Result};
use crate::linalg::{dist2, spectral_norm, LeftSpectralFactors, ProblemInstance};
use crate::prox::{infconv_argmin_prox, infconv_value_at, lq_quasi_norm_pow, InfConvPenaltyParams, InfConvProx, LqPenalty, LqProx};

fn lq_prox(config: &SolverConfig, mu: f64) -> Result<LqProx> {
    Ok(LqProx::new(LqPenalty::new(config.q, config.alpha / config.q)?.with_step(mu)?))
}

fn all_finite(x: &[f64]) -> bool {
    x.iter().all(|v| v.is_finite())
}

/// `out = x − μ·g`.
fn gradient_step(x: &[f64], grad: &[f64], mu: f64, out: &mut [f64]) {
    for ((o, &a), &g) in out.iter_mut().zip(x).zip(grad) {
        *o = a - mu * g;
    }
}

/// `out = M x − b`.
fn residual_into(m: &crate::linalg::DenseMatrix, x: &[f64], b: &[f64], out: &mut [f64]) {
    m.mul_vec_into(x, out);
    for (o, &bi) in out.iter_mut().zip(b) {
        *o -= bi;
    }
}

struct Recorder<'a> {
    config: &'a SolverConfig,
    clock: Stopwatch,
    trace: IterationTrace,
    prox_calls: u64,
}

impl<'a> Recorder<'a> {
    fn new(config: &'a SolverConfig, clock: Stopwatch) -> Self {
        Self { config, clock, trace: IterationTrace::default(), prox_calls: 0 }
    }

    /// `u` decides support and signs; the error is measured on `u` or `w`
    /// depending on the reference kind, with `w` produced lazily.
    fn push(&mut self, u: &[f64], w: impl FnOnce() -> Vec<f64>, step_norm: f64, objective: f64) {
        let err_to_ref = self.config.reference.as_ref().map(|r| match r.kind {
            ReferenceKind::U => r.relative_error(u),
            ReferenceKind::W => r.relative_error(&w()),
        });
        let (support, signs) = support_and_signs(u);
        self.trace.records.push(IterationRecord {
            iter: self.trace.records.len() + 1,
            err_to_ref,
            step_norm,
            objective,
            support,
            signs,
            prox_calls: self.prox_calls,
            elapsed_seconds: self.clock.elapsed_seconds(),
        });
    }
}

/// Thresholded Landweber iteration on the augmented operator. Timing starts
/// before `B_β` is formed.
pub fn solve_augmented(problem: &ProblemInstance, config: &SolverConfig) -> Result<SolverResult> {
    let clock = Stopwatch::start();
    config.validate(problem.matrix.cols())?;
    let aug = build_augmented(&problem.matrix, &problem.observation, config.beta)?;
    run_augmented(&aug, problem, config, clock)
}

/// [`solve_augmented`] with a prebuilt operator; setup time is then zero.
pub fn solve_augmented_with(
    aug: &AugmentedOperator,
    problem: &ProblemInstance,
    config: &SolverConfig,
) -> Result<SolverResult> {
    if (aug.beta - config.beta).abs() > 1e-15 * config.beta.max(1.0) {
        return Err(Error::InvalidInput(format!("operator built for beta={} but config has {}", aug.beta, config.beta)));
    }
    if aug.b_matrix.rows() != problem.matrix.rows() || aug.b_matrix.cols() != problem.matrix.cols() {
        return Err(Error::DimensionMismatch("augmented operator does not match the problem".into()));
    }
    run_augmented(aug, problem, config, Stopwatch::start())
}

fn run_augmented(
    aug: &AugmentedOperator,
    problem: &ProblemInstance,
    config: &SolverConfig,
    clock: Stopwatch,
) -> Result<SolverResult> {
    let (m, n) = problem.dims();
    config.validate(n)?;
    if config.check_hypotheses {
        let lip = aug.lipschitz();
        if lip > 0.0 && config.mu >= 1.0 / lip {
            warn!("step {} is not below ‖A‖⁻² + β⁻¹ = {}; convergence is not guaranteed", config.mu, 1.0 / lip);
        }
    }
    let prox = lq_prox(config, config.mu)?;
    let noise_map = NoiseComponentMap::new(&problem.matrix, &aug.spectrum, config.beta)?;
    let v_of = |u: &[f64]| noise_map.apply(&problem.observation, u);
    let weight = config.alpha / config.q;
    let setup_seconds = clock.elapsed_seconds();

    let mut rec = Recorder::new(config, clock);
    let mut u = config.initial_point(n);
    let mut next = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut grad = vec![0.0; n];
    let mut resid = vec![0.0; m];
    residual_into(&aug.b_matrix, &u, &aug.y_beta, &mut resid);

    let mut status = Status::MaxIters;
    let mut iterations = 0;
    for _ in 0..config.max_iters {
        aug.b_matrix.tr_mul_vec_into(&resid, &mut grad);
        gradient_step(&u, &grad, config.mu, &mut z);
        prox.apply_into(&z, &mut next)?;
        rec.prox_calls += 1;
        if !all_finite(&next) {
            status = Status::Diverged;
            break;
        }
        iterations += 1;
        let step = dist2(&next, &u);
        std::mem::swap(&mut u, &mut next);
        residual_into(&aug.b_matrix, &u, &aug.y_beta, &mut resid);
        let objective = half_sq(&resid) + weight * lq_quasi_norm_pow(&u, config.q);
        rec.push(
            &u,
            || {
                let v = v_of(&u);
                u.iter().zip(&v).map(|(a, b)| a + b).collect()
            },
            step,
            objective,
        );
        if step <= config.stop_tol {
            status = Status::Converged;
            break;
        }
    }
    let v = v_of(&u);
    SolverResult::assemble(u, v, rec.trace, status, iterations, setup_seconds)
}

/// Proximal descent on `½‖Aw − y‖² + g(w)`; `u^k` is the minimizer attaining
/// `g(w^k)` and `v^k = w^k − u^k`.
pub fn solve_infconv(problem: &ProblemInstance, config: &SolverConfig) -> Result<SolverResult> {
    let clock = Stopwatch::start();
    let (m, n) = problem.dims();
    config.validate(n)?;
    let a = &problem.matrix;
    let y = &problem.observation;
    if config.check_hypotheses {
        let norm = spectral_norm(a)?;
        if norm > 0.0 && config.mu >= 1.0 / (norm * norm) {
            warn!("step {} is not below ‖A‖⁻² = {}; convergence is not guaranteed", config.mu, 1.0 / (norm * norm));
        }
    }
    let pen = InfConvPenaltyParams::new(config.alpha, config.beta, config.q)?;
    let prox_g = InfConvProx::new(&pen, config.mu)?;
    let split = infconv_argmin_prox(&pen)?;
    let setup_seconds = clock.elapsed_seconds();

    let mut rec = Recorder::new(config, clock);
    let mut w = config.initial_point(n);
    let mut next = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut grad = vec![0.0; n];
    let mut u = vec![0.0; n];
    let mut resid = vec![0.0; m];
    residual_into(a, &w, y, &mut resid);

    let mut status = Status::MaxIters;
    let mut iterations = 0;
    for _ in 0..config.max_iters {
        a.tr_mul_vec_into(&resid, &mut grad);
        gradient_step(&w, &grad, config.mu, &mut z);
        prox_g.apply_into(&z, &mut next)?;
        rec.prox_calls += 1;
        if !all_finite(&next) {
            status = Status::Diverged;
            break;
        }
        iterations += 1;
        let step = dist2(&next, &w);
        std::mem::swap(&mut w, &mut next);
        residual_into(a, &w, y, &mut resid);
        split.apply_into(&w, &mut u)?;
        let objective = half_sq(&resid) + infconv_value_at(&w, &u, &pen);
        rec.push(&u, || w.clone(), step, objective);
        if step <= config.stop_tol {
            status = Status::Converged;
            break;
        }
    }
    split.apply_into(&w, &mut u)?;
    let v: Vec<f64> = w.iter().zip(&u).map(|(a, b)| a - b).collect();
    SolverResult::assemble(u, v, rec.trace, status, iterations, setup_seconds)
}

/// Alternating minimization: iterative thresholding in `u` to `inner_tol`,
/// then the closed-form `v`. Every inner prox call is one trace record.
pub fn solve_alternating(problem: &ProblemInstance, config: &SolverConfig) -> Result<SolverResult> {
    let clock = Stopwatch::start();
    let (m, n) = problem.dims();
    config.validate(n)?;
    let a = &problem.matrix;
    let y = &problem.observation;
    let spectrum = LeftSpectralFactors::compute(a)?;
    let norm_sq = spectrum.spectral_norm_squared();
    let inner_mu = match config.inner_mu {
        Some(mu) => mu,
        None if norm_sq > 0.0 => 0.99 / norm_sq,
        None => 1.0,
    };
    if config.check_hypotheses && norm_sq > 0.0 && inner_mu >= 1.0 / norm_sq {
        warn!("inner step {inner_mu} is not below ‖A‖⁻² = {}", 1.0 / norm_sq);
    }
    let prox = lq_prox(config, inner_mu)?;
    let noise_map = NoiseComponentMap::new(a, &spectrum, config.beta)?;
    let setup_seconds = clock.elapsed_seconds();

    let mut rec = Recorder::new(config, clock);
    let mut u = config.initial_point(n);
    let mut v = vec![0.0; n];
    let mut av = vec![0.0; m];
    let mut au = a.mul_vec(&u);
    let mut target = vec![0.0; m];
    let mut resid = vec![0.0; m];
    let mut next = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut grad = vec![0.0; n];
    let v_norm_sq = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();

    let mut status = Status::MaxIters;
    let mut iterations = 0;
    'outer: for _ in 0..config.max_iters {
        for ((t, &yi), &avi) in target.iter_mut().zip(y.iter()).zip(&av) {
            *t = yi - avi;
        }
        let u_start = u.clone();
        let penalty_v = 0.5 * config.beta * v_norm_sq(&v);
        for _ in 0..config.max_inner_iters {
            for ((r, &p), &t) in resid.iter_mut().zip(&au).zip(&target) {
                *r = p - t;
            }
            a.tr_mul_vec_into(&resid, &mut grad);
            gradient_step(&u, &grad, inner_mu, &mut z);
            prox.apply_into(&z, &mut next)?;
            rec.prox_calls += 1;
            if !all_finite(&next) {
                status = Status::Diverged;
                break 'outer;
            }
            let step = dist2(&next, &u);
            std::mem::swap(&mut u, &mut next);
            a.mul_vec_into(&u, &mut au);
            for ((r, &p), &t) in resid.iter_mut().zip(&au).zip(&target) {
                *r = p - t;
            }
            let objective = half_sq(&resid) + config.alpha / config.q * lq_quasi_norm_pow(&u, config.q) + penalty_v;
            rec.push(&u, || u.iter().zip(&v).map(|(a, b)| a + b).collect(), step, objective);
            if step <= config.inner_tol {
                break;
            }
        }
        let r: Vec<f64> = y.iter().zip(&au).map(|(a, b)| a - b).collect();
        let v_new = noise_map.from_residual(&r);
        iterations += 1;
        let dv = dist2(&v_new, &v);
        let du = dist2(&u, &u_start);
        v = v_new;
        a.mul_vec_into(&v, &mut av);
        if du <= config.stop_tol && dv <= config.stop_tol {
            status = Status::Converged;
            break;
        }
    }
    SolverResult::assemble(u, v, rec.trace, status, iterations, setup_seconds)
}

/// One thresholded gradient step on `T(·, v(·))` in the original variables.
pub fn am_single_step(u_k: &[f64], problem: &ProblemInstance, config: &SolverConfig) -> Result<Vec<f64>> {
    let n = problem.matrix.cols();
    config.validate(n)?;
    if u_k.len() != n {
        return Err(Error::DimensionMismatch(format!("u has length {}, expected {n}", u_k.len())));
    }
    let a = &problem.matrix;
    let spectrum = LeftSpectralFactors::compute(a)?;
    let v = NoiseComponentMap::new(a, &spectrum, config.beta)?.apply(&problem.observation, u_k);
    let w: Vec<f64> = u_k.iter().zip(&v).map(|(x, y)| x + y).collect();
    let mut r = a.mul_vec(&w);
    for (ri, yi) in r.iter_mut().zip(problem.observation.iter()) {
        *ri -= yi;
    }
    let grad = a.tr_mul_vec(&r);
    let mut z = vec![0.0; n];
    gradient_step(u_k, &grad, config.mu, &mut z);
    lq_prox(config, config.mu)?.apply_vec(&z)
}
