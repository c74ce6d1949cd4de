//! Alternating minimization, augmented thresholding and infimal-convolution
//! descent for the two-component model, with objectives and KKT checks.

mod iterations;
mod kkt;
mod objective;
pub mod trace;

use serde::{Deserialize, Serialize};

use crate::error::{check_exponent, check_positive, Error, Result};
use crate::linalg::{norm2, ProblemInstance, RealVector};

pub use iterations::{am_single_step, solve_alternating, solve_augmented, solve_augmented_with, solve_infconv};
pub use kkt::{kkt_residual_augmented, kkt_residual_infconv};
pub use objective::{objective_f, objective_ic, objective_t};
pub use trace::{IterationRecord, IterationTrace, Stopwatch};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Alternating,
    Augmented,
    Infconv,
}

impl SolverKind {
    pub const ALL: [SolverKind; 3] = [SolverKind::Alternating, SolverKind::Augmented, SolverKind::Infconv];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Alternating => "alternating",
            SolverKind::Augmented => "augmented",
            SolverKind::Infconv => "infconv",
        }
    }

    /// Which iterate the error trace is measured on.
    pub fn natural_reference(self) -> ReferenceKind {
        match self {
            SolverKind::Infconv => ReferenceKind::W,
            _ => ReferenceKind::U,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub enum Init {
    #[default]
    Zero,
    Provided(Vec<f64>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReferenceKind {
    U,
    W,
}

/// Point the error column of the trace is measured against.
#[derive(Clone, Debug, PartialEq)]
pub struct Reference {
    pub kind: ReferenceKind,
    pub point: Vec<f64>,
}

impl Reference {
    pub fn u(point: Vec<f64>) -> Self {
        Self { kind: ReferenceKind::U, point }
    }

    pub fn w(point: Vec<f64>) -> Self {
        Self { kind: ReferenceKind::W, point }
    }

    pub(crate) fn relative_error(&self, x: &[f64]) -> f64 {
        let d: f64 = x.iter().zip(&self.point).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let scale = norm2(&self.point);
        if scale > 0.0 {
            d / scale
        } else {
            d
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub alpha: f64,
    pub beta: f64,
    pub q: f64,
    pub mu: f64,
    pub max_iters: usize,
    pub stop_tol: f64,
    /// Tolerance of the inner thresholding loop of alternating minimization.
    pub inner_tol: f64,
    /// Inner step of alternating minimization; `0.99‖A‖⁻²` when unset.
    pub inner_mu: Option<f64>,
    pub max_inner_iters: usize,
    pub init: Init,
    pub reference: Option<Reference>,
    /// Warn when the step size violates the convergence hypothesis. Costs one
    /// spectral norm for the infimal-convolution solver.
    pub check_hypotheses: bool,
}

impl SolverConfig {
    pub fn new(alpha: f64, beta: f64, q: f64, mu: f64) -> Self {
        Self {
            alpha,
            beta,
            q,
            mu,
            max_iters: 100_000,
            stop_tol: 1e-10,
            inner_tol: 1e-8,
            inner_mu: None,
            max_inner_iters: 100_000,
            init: Init::Zero,
            reference: None,
            check_hypotheses: true,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        check_positive("alpha", self.alpha)?;
        check_positive("beta", self.beta)?;
        check_exponent(self.q)?;
        check_positive("mu", self.mu)?;
        check_positive("stop_tol", self.stop_tol)?;
        check_positive("inner_tol", self.inner_tol)?;
        if let Some(m) = self.inner_mu {
            check_positive("inner_mu", m)?;
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter { name: "max_iters", reason: "must be at least 1".into() });
        }
        if self.max_inner_iters == 0 {
            return Err(Error::InvalidParameter { name: "max_inner_iters", reason: "must be at least 1".into() });
        }
        if let Init::Provided(x) = &self.init {
            if x.len() != n || x.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!("initial vector must be finite with length {n}")));
            }
        }
        if let Some(r) = &self.reference {
            if r.point.len() != n {
                return Err(Error::DimensionMismatch(format!("reference has length {}, expected {n}", r.point.len())));
            }
        }
        Ok(())
    }

    pub(crate) fn initial_point(&self, n: usize) -> Vec<f64> {
        match &self.init {
            Init::Zero => vec![0.0; n],
            Init::Provided(x) => x.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Converged,
    MaxIters,
    Diverged,
}

#[derive(Clone, Debug)]
pub struct SolverResult {
    pub u: RealVector,
    pub v: RealVector,
    /// Computed as `u + v`.
    pub w: RealVector,
    pub trace: IterationTrace,
    pub status: Status,
    /// Outer iterations performed.
    pub iterations: usize,
    /// Time spent before the first iteration (factorizations).
    pub setup_seconds: f64,
}

impl SolverResult {
    pub(crate) fn assemble(
        u: Vec<f64>,
        v: Vec<f64>,
        trace: IterationTrace,
        status: Status,
        iterations: usize,
        setup_seconds: f64,
    ) -> Result<Self> {
        let w: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
        Ok(Self {
            u: RealVector::new(u)?,
            v: RealVector::new(v)?,
            w: RealVector::new(w)?,
            trace,
            status,
            iterations,
            setup_seconds,
        })
    }
}

pub fn solve(kind: SolverKind, problem: &ProblemInstance, config: &SolverConfig) -> Result<SolverResult> {
    match kind {
        SolverKind::Alternating => solve_alternating(problem, config),
        SolverKind::Augmented => solve_augmented(problem, config),
        SolverKind::Infconv => solve_infconv(problem, config),
    }
}

pub const REFERENCE_STOP_TOL: f64 = 1e-14;

/// Runs `kind` to `stop_tol = 1e-14` and returns the stationary point used as
/// the error reference.
pub fn reference_point(kind: SolverKind, problem: &ProblemInstance, config: &SolverConfig) -> Result<SolverResult> {
    let mut cfg = config.clone();
    cfg.stop_tol = REFERENCE_STOP_TOL;
    cfg.reference = None;
    solve(kind, problem, &cfg)
}

/// Solves once to the reference tolerance, then again with the error trace
/// measured against that point.
pub fn solve_with_reference(
    kind: SolverKind,
    problem: &ProblemInstance,
    config: &SolverConfig,
) -> Result<(SolverResult, SolverResult)> {
    let reference = reference_point(kind, problem, config)?;
    let point = match kind.natural_reference() {
        ReferenceKind::U => reference.u.to_vec(),
        ReferenceKind::W => reference.w.to_vec(),
    };
    let mut cfg = config.clone();
    cfg.reference = Some(Reference { kind: kind.natural_reference(), point });
    let run = solve(kind, problem, &cfg)?;
    Ok((reference, run))
}
