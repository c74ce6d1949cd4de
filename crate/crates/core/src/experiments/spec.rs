use serde::{Deserialize, Serialize};

use super::generate::{MagnitudeLaw, MatrixEnsemble, NoiseSpec, ProblemSpec};
use crate::error::{check_exponent, check_positive, Error, Result};

fn one() -> usize {
    1
}
fn five() -> usize {
    5
}
fn three() -> usize {
    3
}
fn fifty() -> usize {
    50
}
fn mu_factor() -> f64 {
    0.99
}
fn max_iters() -> usize {
    100_000
}
fn tail_fraction() -> f64 {
    crate::analysis::DEFAULT_TAIL_FRACTION
}
fn err_1e6() -> f64 {
    1e-6
}
fn err_1e4() -> f64 {
    1e-4
}
fn inner_tol() -> f64 {
    1e-8
}

/// Augmented solver over a grid of `β`, step `mu_factor·(‖A‖⁻² + β⁻¹)`,
/// `α` tuned to the target support.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VaryBetaSpec {
    pub seed: u64,
    #[serde(default = "one")]
    pub trials: usize,
    pub problem: ProblemSpec,
    pub q: f64,
    pub betas: Vec<f64>,
    #[serde(default = "mu_factor")]
    pub mu_factor: f64,
    /// Defaults to the sparsity of the generated signal.
    #[serde(default)]
    pub target_support: Option<usize>,
    #[serde(default = "err_1e6")]
    pub target_error: f64,
    #[serde(default = "max_iters")]
    pub max_iters: usize,
    #[serde(default = "tail_fraction")]
    pub tail_fraction: f64,
}

/// Augmented solver over a grid of row counts; `problem.ensemble.m` is
/// replaced by each grid value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VaryMSpec {
    pub seed: u64,
    #[serde(default = "five")]
    pub trials: usize,
    pub problem: ProblemSpec,
    pub q: f64,
    pub beta: f64,
    pub ms: Vec<usize>,
    /// Also run `m = n`.
    #[serde(default)]
    pub square_control: bool,
    #[serde(default = "mu_factor")]
    pub mu_factor: f64,
    #[serde(default)]
    pub target_support: Option<usize>,
    #[serde(default = "max_iters")]
    pub max_iters: usize,
    #[serde(default = "tail_fraction")]
    pub tail_fraction: f64,
}

/// All three solvers tuned to the same support size; error against
/// cumulative prox calls.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IterationCountSpec {
    pub seed: u64,
    #[serde(default = "one")]
    pub trials: usize,
    pub problem: ProblemSpec,
    pub q: f64,
    pub beta: f64,
    #[serde(default = "mu_factor")]
    pub mu_factor: f64,
    pub target_support: usize,
    #[serde(default = "err_1e4")]
    pub target_error: f64,
    #[serde(default = "inner_tol")]
    pub inner_tol: f64,
    #[serde(default = "max_iters")]
    pub max_iters: usize,
}

/// Wall time of a fixed number of iterations; `problem.ensemble.m` is
/// replaced by each grid value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimingSpec {
    pub seed: u64,
    #[serde(default = "five")]
    pub trials: usize,
    pub problem: ProblemSpec,
    pub ms: Vec<usize>,
    pub q: f64,
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
    #[serde(default = "fifty")]
    pub iterations: usize,
    #[serde(default = "three")]
    pub repetitions: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum ExperimentSpec {
    VaryBeta(VaryBetaSpec),
    VaryM(VaryMSpec),
    IterationCount(IterationCountSpec),
    Timing(TimingSpec),
}

pub const EXPERIMENT_NAMES: [&str; 4] = ["vary-beta", "vary-m", "iteration-count", "timing"];

fn gaussian_problem(m: usize, n: usize, s: usize) -> ProblemSpec {
    ProblemSpec { ensemble: MatrixEnsemble::gaussian(m, n), s, magnitude: MagnitudeLaw::default(), noise: NoiseSpec::default() }
}

impl ExperimentSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentSpec::VaryBeta(_) => "vary-beta",
            ExperimentSpec::VaryM(_) => "vary-m",
            ExperimentSpec::IterationCount(_) => "iteration-count",
            ExperimentSpec::Timing(_) => "timing",
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            ExperimentSpec::VaryBeta(s) => s.seed,
            ExperimentSpec::VaryM(s) => s.seed,
            ExperimentSpec::IterationCount(s) => s.seed,
            ExperimentSpec::Timing(s) => s.seed,
        }
    }

    pub fn set_seed(&mut self, seed: u64) {
        match self {
            ExperimentSpec::VaryBeta(s) => s.seed = seed,
            ExperimentSpec::VaryM(s) => s.seed = seed,
            ExperimentSpec::IterationCount(s) => s.seed = seed,
            ExperimentSpec::Timing(s) => s.seed = seed,
        }
    }

    /// Default configuration of each experiment. `full_scale` only changes
    /// the timing grid.
    pub fn preset(name: &str, full_scale: bool) -> Result<Self> {
        let spec = match name {
            "vary-beta" => ExperimentSpec::VaryBeta(VaryBetaSpec {
                seed: 1,
                trials: 1,
                problem: gaussian_problem(200, 600, 20),
                q: 0.5,
                betas: vec![0.05, 0.2, 1.0, 5.0],
                mu_factor: mu_factor(),
                target_support: None,
                target_error: 1e-6,
                max_iters: max_iters(),
                tail_fraction: tail_fraction(),
            }),
            "vary-m" => ExperimentSpec::VaryM(VaryMSpec {
                seed: 1,
                trials: 5,
                problem: gaussian_problem(200, 600, 20),
                q: 0.5,
                beta: 0.2,
                ms: vec![100, 200, 300, 400],
                square_control: false,
                mu_factor: mu_factor(),
                target_support: None,
                max_iters: max_iters(),
                tail_fraction: tail_fraction(),
            }),
            "iteration-count" => ExperimentSpec::IterationCount(IterationCountSpec {
                seed: 1,
                trials: 1,
                problem: gaussian_problem(100, 500, 14),
                q: 0.5,
                beta: 0.2,
                mu_factor: mu_factor(),
                target_support: 13,
                target_error: 1e-4,
                inner_tol: 1e-8,
                max_iters: max_iters(),
            }),
            "timing" if full_scale => ExperimentSpec::Timing(TimingSpec {
                seed: 1,
                trials: 20,
                problem: gaussian_problem(1000, 5000, 100),
                ms: vec![1000, 2000, 3000, 4000, 5000, 6000, 7000, 8000],
                q: 0.5,
                alpha: 0.02,
                beta: 0.2,
                mu: 0.1,
                iterations: 50,
                repetitions: 1,
            }),
            "timing" => ExperimentSpec::Timing(TimingSpec {
                seed: 1,
                trials: 5,
                problem: gaussian_problem(250, 1000, 20),
                ms: vec![250, 500, 1000, 2000],
                q: 0.5,
                alpha: 0.02,
                beta: 0.2,
                mu: 0.1,
                iterations: 50,
                repetitions: 3,
            }),
            other => return Err(Error::InvalidInput(format!("unknown experiment `{other}`"))),
        };
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let nonempty = |name: &'static str, len: usize| {
            if len == 0 {
                Err(Error::InvalidParameter { name, reason: "grid must be nonempty".into() })
            } else {
                Ok(())
            }
        };
        let at_least_one = |name: &'static str, k: usize| {
            if k == 0 {
                Err(Error::InvalidParameter { name, reason: "must be at least 1".into() })
            } else {
                Ok(())
            }
        };
        let problem_ok = |p: &ProblemSpec| {
            if p.s > p.ensemble.n {
                Err(Error::InvalidParameter { name: "s", reason: format!("{} exceeds n = {}", p.s, p.ensemble.n) })
            } else {
                Ok(())
            }
        };
        match self {
            ExperimentSpec::VaryBeta(s) => {
                at_least_one("trials", s.trials)?;
                nonempty("betas", s.betas.len())?;
                problem_ok(&s.problem)?;
                check_exponent(s.q)?;
                for &b in &s.betas {
                    check_positive("betas", b)?;
                }
                check_positive("mu_factor", s.mu_factor)?;
                check_positive("target_error", s.target_error)?;
                at_least_one("max_iters", s.max_iters)?;
            }
            ExperimentSpec::VaryM(s) => {
                at_least_one("trials", s.trials)?;
                nonempty("ms", s.ms.len())?;
                problem_ok(&s.problem)?;
                check_exponent(s.q)?;
                check_positive("beta", s.beta)?;
                check_positive("mu_factor", s.mu_factor)?;
                for &m in &s.ms {
                    at_least_one("ms", m)?;
                }
                at_least_one("max_iters", s.max_iters)?;
            }
            ExperimentSpec::IterationCount(s) => {
                at_least_one("trials", s.trials)?;
                problem_ok(&s.problem)?;
                check_exponent(s.q)?;
                check_positive("beta", s.beta)?;
                check_positive("mu_factor", s.mu_factor)?;
                check_positive("target_error", s.target_error)?;
                check_positive("inner_tol", s.inner_tol)?;
                at_least_one("max_iters", s.max_iters)?;
            }
            ExperimentSpec::Timing(s) => {
                at_least_one("trials", s.trials)?;
                nonempty("ms", s.ms.len())?;
                problem_ok(&s.problem)?;
                check_exponent(s.q)?;
                check_positive("alpha", s.alpha)?;
                check_positive("beta", s.beta)?;
                check_positive("mu", s.mu)?;
                at_least_one("iterations", s.iterations)?;
                at_least_one("repetitions", s.repetitions)?;
                for &m in &s.ms {
                    at_least_one("ms", m)?;
                }
            }
        }
        Ok(())
    }
}
