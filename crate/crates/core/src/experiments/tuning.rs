use log::debug;
use serde::Serialize;

use crate::augmented::{build_augmented, AugmentedOperator};
use crate::error::{Error, Result};
use crate::linalg::{spectral_norm, ProblemInstance};
use crate::solvers::{solve, solve_augmented_with, SolverConfig, SolverKind, SolverResult, Status};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum AlphaTuning {
    Found { alpha: f64, support_size: usize, evaluations: usize },
    NotFound { closest_alpha: f64, closest_support: usize, evaluations: usize },
}

impl AlphaTuning {
    /// The matching `α`, or the closest one tried.
    pub fn alpha(&self) -> f64 {
        match *self {
            AlphaTuning::Found { alpha, .. } => alpha,
            AlphaTuning::NotFound { closest_alpha, .. } => closest_alpha,
        }
    }

    pub fn found(&self) -> bool {
        matches!(self, AlphaTuning::Found { .. })
    }
}

const MAX_BISECTIONS: usize = 40;
const MAX_EXPANSIONS: usize = 30;
const RELATIVE_WIDTH: f64 = 1e-3;
const LOWER_RATIO: f64 = 1e-6;
const GRID_POINTS: usize = 48;

/// `α` at which the threshold of the `ℓq` prox with the given step reaches
/// `level`; above it a step from zero returns zero.
pub fn alpha_zero_threshold(level: f64, step: f64, q: f64) -> f64 {
    if q >= 1.0 {
        return level / step;
    }
    let c = (2.0 - q) / (2.0 - 2.0 * q);
    q * (level / c).powf(2.0 - q) / (2.0 * step * (1.0 - q))
}

fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Bisection in `log α` for the largest `α` whose converged support size
/// equals `target`.
///
/// `run(α)` solves once and returns the support size. `start_hi` is a guess
/// for an `α` with support below the target; it is doubled until that holds.
/// The lower end is found by halving, down to `1e-6` times the upper end.
pub fn tune_alpha_with(
    target: usize,
    start_hi: f64,
    mut run: impl FnMut(f64) -> Result<usize>,
) -> Result<AlphaTuning> {
    if !(start_hi.is_finite() && start_hi > 0.0) {
        return Err(Error::InvalidParameter { name: "alpha", reason: format!("initial upper bracket {start_hi} invalid") });
    }
    let mut evaluations = 0;
    let mut closest = (start_hi, usize::MAX);
    let best: std::cell::Cell<Option<(f64, usize)>> = std::cell::Cell::new(None);
    let mut eval = |alpha: f64, evaluations: &mut usize| -> Result<usize> {
        *evaluations += 1;
        let size = run(alpha)?;
        debug!("alpha {alpha:.6e} -> support {size}");
        if size.abs_diff(target) < closest.1.abs_diff(target) || (size == target && alpha > closest.0) {
            closest = (alpha, size);
        }
        if size == target && best.get().is_none_or(|(a, _)| alpha > a) {
            best.set(Some((alpha, size)));
        }
        Ok(size)
    };

    let mut hi = start_hi;
    let mut hi_size = eval(hi, &mut evaluations)?;
    let mut expansions = 0;
    while hi_size > target && expansions < MAX_EXPANSIONS {
        hi *= 2.0;
        hi_size = eval(hi, &mut evaluations)?;
        expansions += 1;
    }
    if hi_size >= target {
        return Ok(finish(best.get(), closest, evaluations));
    }
    // Halve down from the upper end so the dense, slowly converging runs at
    // tiny penalties are only reached when needed.
    let floor = hi * LOWER_RATIO;
    let mut lo = hi;
    loop {
        let next = (lo / 2.0).max(floor);
        if eval(next, &mut evaluations)? >= target {
            lo = next;
            break;
        }
        if next == floor {
            return Ok(finish(best.get(), closest, evaluations));
        }
        hi = next;
        lo = next;
    }
    let (lo0, hi0) = (lo, hi);
    for _ in 0..MAX_BISECTIONS {
        if hi / lo < 1.0 + RELATIVE_WIDTH {
            break;
        }
        let mid = (lo * hi).sqrt();
        if eval(mid, &mut evaluations)? >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if best.get().is_none() {
        // The support size need not be monotone in α and can skip the
        // target at the jump bisection converges to; scan the first bracket.
        for k in 1..GRID_POINTS {
            let alpha = hi0 * (lo0 / hi0).powf(k as f64 / GRID_POINTS as f64);
            if eval(alpha, &mut evaluations)? == target {
                break;
            }
        }
    }
    Ok(finish(best.get(), closest, evaluations))
}

fn finish(best: Option<(f64, usize)>, closest: (f64, usize), evaluations: usize) -> AlphaTuning {
    match best {
        Some((alpha, support_size)) => AlphaTuning::Found { alpha, support_size, evaluations },
        None => AlphaTuning::NotFound { closest_alpha: closest.0, closest_support: closest.1, evaluations },
    }
}

fn converged_support(result: &SolverResult) -> Result<usize> {
    if result.status == Status::Diverged {
        return Err(Error::InvalidInput("solver diverged while tuning alpha".into()));
    }
    Ok(result.u.iter().filter(|&&x| x != 0.0).count())
}

/// Tunes the augmented solver on a prebuilt operator.
pub fn tune_alpha_augmented(
    aug: &AugmentedOperator,
    problem: &ProblemInstance,
    template: &SolverConfig,
    target: usize,
) -> Result<AlphaTuning> {
    let z = aug.b_matrix.tr_mul_vec(&aug.y_beta);
    let hi = alpha_zero_threshold(template.mu * max_abs(&z), template.mu, template.q);
    let mut cfg = template.clone();
    cfg.reference = None;
    tune_alpha_with(target, hi.max(f64::MIN_POSITIVE), |alpha| {
        cfg.alpha = alpha;
        converged_support(&solve_augmented_with(aug, problem, &cfg)?)
    })
}

/// Finds the largest `α` whose converged `u` has exactly `target` nonzeros,
/// using the penalty at which zero becomes a fixed point as the upper bracket.
pub fn tune_alpha_for_support(
    problem: &ProblemInstance,
    kind: SolverKind,
    template: &SolverConfig,
    target: usize,
) -> Result<AlphaTuning> {
    template.validate(problem.matrix.cols())?;
    if kind == SolverKind::Augmented {
        let aug = build_augmented(&problem.matrix, &problem.observation, template.beta)?;
        return tune_alpha_augmented(&aug, problem, template, target);
    }
    let z = problem.matrix.tr_mul_vec(&problem.observation);
    let step = match (kind, template.inner_mu) {
        (SolverKind::Alternating, Some(mu)) => mu,
        (SolverKind::Alternating, None) => {
            let norm = spectral_norm(&problem.matrix)?;
            if norm > 0.0 {
                0.99 / (norm * norm)
            } else {
                1.0
            }
        }
        _ => template.mu,
    };
    let hi = alpha_zero_threshold(step * max_abs(&z), step, template.q);
    let mut cfg = template.clone();
    cfg.reference = None;
    tune_alpha_with(target, hi.max(f64::MIN_POSITIVE), |alpha| {
        cfg.alpha = alpha;
        converged_support(&solve(kind, problem, &cfg)?)
    })
}
