use std::path::PathBuf;

use serde::Deserialize;

use crate::experiments::{make_problem, ExperimentSpec, MatrixEnsemble, ProblemSpec};
use crate::linalg::{DenseMatrix, ProblemInstance, RealVector};
use crate::solvers::SolverKind;
use crate::Result;

pub const SCHEMA_VERSION: u32 = 1;

/// Where the measurement model comes from.
#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProblemSource {
    Explicit {
        matrix: Vec<Vec<f64>>,
        observation: Vec<f64>,
    },
    Generated {
        spec: ProblemSpec,
        #[serde(default = "default_seed")]
        seed: u64,
        #[serde(default)]
        trial: u64,
    },
}

fn default_seed() -> u64 {
    1
}

impl ProblemSource {
    pub fn build(&self, seed_override: Option<u64>) -> Result<ProblemInstance> {
        match self {
            ProblemSource::Explicit { matrix, observation } => {
                ProblemInstance::new(DenseMatrix::from_rows(matrix)?, RealVector::new(observation.clone())?)
            }
            ProblemSource::Generated { spec, seed, trial } => make_problem(spec, seed_override.unwrap_or(*seed), *trial),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum MatrixSource {
    Explicit {
        rows: Vec<Vec<f64>>,
    },
    Generated {
        ensemble: MatrixEnsemble,
        #[serde(default = "default_seed")]
        seed: u64,
        #[serde(default)]
        trial: u64,
    },
}

impl MatrixSource {
    pub fn build(&self, seed_override: Option<u64>) -> Result<DenseMatrix> {
        match self {
            MatrixSource::Explicit { rows } => DenseMatrix::from_rows(rows),
            MatrixSource::Generated { ensemble, seed, trial } => {
                crate::experiments::gen_matrix(ensemble, seed_override.unwrap_or(*seed), *trial)
            }
        }
    }
}

fn all_solvers() -> Vec<SolverKind> {
    SolverKind::ALL.to_vec()
}
fn yes() -> bool {
    true
}
fn max_iters() -> usize {
    100_000
}
fn stop_tol() -> f64 {
    1e-10
}
fn inner_tol() -> f64 {
    1e-8
}
fn tail_fraction() -> f64 {
    crate::analysis::DEFAULT_TAIL_FRACTION
}
fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub schema_version: u32,
    pub problem: ProblemSource,
    #[serde(default = "all_solvers")]
    pub solvers: Vec<SolverKind>,
    pub alpha: f64,
    pub beta: f64,
    pub q: f64,
    pub mu: f64,
    #[serde(default = "max_iters")]
    pub max_iters: usize,
    #[serde(default = "stop_tol")]
    pub stop_tol: f64,
    #[serde(default = "inner_tol")]
    pub inner_tol: f64,
    #[serde(default)]
    pub inner_mu: Option<f64>,
    #[serde(default = "yes")]
    pub reference: bool,
    #[serde(default)]
    pub trace_times: bool,
}

pub const SOLVE_HELP: &str = "\
Solve one problem with one or more solvers.

Writes solve.json (u, v, w, status, objective and KKT residual per solver)
and solve_<solver>_trace.csv.

Config keys:
  schema_version   must be 1
  problem          {\"explicit\": {\"matrix\": [[..], ..], \"observation\": [..]}}
                   or {\"generated\": {\"spec\": PROBLEM_SPEC, \"seed\": 1, \"trial\": 0}}
  solvers          subset of [\"alternating\", \"augmented\", \"infconv\"] (default: all)
  alpha            weight of the lq penalty, > 0
  beta             weight of the quadratic noise penalty, > 0
  q                exponent in (0, 1]
  mu               step size; for alternating only used when inner_mu is unset
  max_iters        outer iteration cap (default 100000)
  stop_tol         stop when the step norm is at most this (default 1e-10)
  inner_tol        inner tolerance of alternating minimization (default 1e-8)
  inner_mu         inner step of alternating minimization (default 0.99/|A|^2)
  reference        solve to 1e-14 first and record relative errors (default true)
  trace_times      add an elapsed_seconds column to traces (default false)

PROBLEM_SPEC keys:
  ensemble         {\"kind\": \"gaussian\" | \"partial-toeplitz\" | \"partial-circulant\",
                    \"entry_law\": \"gaussian\" | \"rademacher\", \"m\": rows, \"n\": columns}
  s                sparsity of the ground truth
  magnitude        {\"low\": 0.5, \"high\": 1.5}, nonzero magnitudes with random signs
  noise            {\"pre_level\": 0.1, \"post_level\": 0.1}, |v|/|u| and |xi|/|u|

--seed replaces the seed of a generated problem.";

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProxTableConfig {
    pub schema_version: u32,
    pub q: Vec<f64>,
    pub nu: Vec<f64>,
    pub mu: Vec<f64>,
    pub u_min: f64,
    pub u_max: f64,
    pub points: usize,
}

pub const PROX_TABLE_HELP: &str = "\
Sample the scalar lq proximal map on a grid.

Writes prox_table.csv with columns u, q, nu, mu, prox.

Config keys:
  schema_version   must be 1
  q                list of exponents in (0, 1]
  nu               list of penalty weights, > 0
  mu               list of step sizes, > 0
  u_min, u_max     sampling interval
  points           number of evenly spaced samples, >= 2";

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeConfig {
    pub schema_version: u32,
    /// Relative paths are resolved against the directory of the config file.
    pub trace: PathBuf,
    pub problem: ProblemSource,
    pub solver: SolverKind,
    pub alpha: f64,
    pub beta: f64,
    pub q: f64,
    pub mu: f64,
    #[serde(default = "tail_fraction")]
    pub tail_fraction: f64,
}

pub const ANALYZE_HELP: &str = "\
Compare the measured rate of a trace with the theoretical constant.

Reads a trace CSV written by `solve` (columns iter, err_to_ref and
support_size are used), recomputes the stationary point of the problem and
writes analyze.json with empirical_rate, theoretical_rate, admissible and
alpha_star. The alternating solver has no rate constant; its theoretical
fields are null.

Config keys:
  schema_version   must be 1
  trace            path of the trace CSV, relative to the config file
  problem          as for `solve`
  solver           \"alternating\", \"augmented\" or \"infconv\"
  alpha, beta, q   penalty parameters used for the trace
  mu               step size used for the trace
  tail_fraction    fraction of post-stabilization points fitted (default 0.3)";

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub experiment: ExperimentSpec,
}

pub const EXPERIMENT_HELP: &str = "\
Run one of the experiment drivers and write its CSV files and JSON sidecar.

Use either --config FILE or --preset NAME. Every CSV starts with a
`# spec_sha256:` line. Wall-clock data goes only to *_times*.csv.

Config keys:
  schema_version   must be 1
  experiment       object with \"name\" and the keys of that experiment

All experiments:
  name             \"vary-beta\", \"vary-m\", \"iteration-count\" or \"timing\"
  seed             master seed
  trials           number of random instances
  problem          PROBLEM_SPEC (see `solve --help`)
  q                exponent in (0, 1]

vary-beta:
  betas            grid of beta values
  mu_factor        step is mu_factor*(|A|^-2 + 1/beta) (default 0.99)
  target_support   support size alpha is tuned to (default: problem.s)
  target_error     relative error for iterations_to_target (default 1e-6)
  max_iters        iteration cap (default 100000)
  tail_fraction    empirical rate window (default 0.3)

vary-m:
  beta             noise penalty weight
  ms               grid of row counts, replacing problem.ensemble.m
  square_control   also run m = n (default false)
  mu_factor, target_support, max_iters, tail_fraction   as for vary-beta

iteration-count:
  beta             noise penalty weight
  mu_factor        scale of the steps (default 0.99)
  target_support   support size every solver is tuned to
  target_error     relative error at which prox calls are counted (default 1e-4)
  inner_tol        inner tolerance of alternating minimization (default 1e-8)
  max_iters        iteration cap (default 100000)

timing:
  ms               grid of row counts, replacing problem.ensemble.m
  alpha, beta, mu  fixed solver parameters
  iterations       iterations timed per run (default 50)
  repetitions      repetitions per trial, median reported (default 3)

--seed replaces the master seed; --full-scale selects the large timing grid
for --preset timing.";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RipMethodChoice {
    BruteForce,
    GaussianOrder,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RipConfig {
    pub schema_version: u32,
    pub matrix: MatrixSource,
    pub orders: Vec<usize>,
    pub method: RipMethodChoice,
    #[serde(default = "one")]
    pub c: f64,
}

pub const RIP_HELP: &str = "\
Estimate restricted isometry constants.

Writes rip.json with one estimate per order.

Config keys:
  schema_version   must be 1
  matrix           {\"explicit\": {\"rows\": [[..], ..]}}
                   or {\"generated\": {\"ensemble\": ENSEMBLE, \"seed\": 1, \"trial\": 0}}
  orders           list of sparsity orders s
  method           \"brute-force\" (all supports, at most 1e6 of them)
                   or \"gaussian-order\" (c*sqrt(s ln(e n/s)/m))
  c                constant of the gaussian-order estimate (default 1)";
