use log::info;
use sha2::{Digest, Sha256};

use super::generate::{make_problem, ProblemSpec};
use super::spec::{ExperimentSpec, IterationCountSpec, TimingSpec, VaryBetaSpec, VaryMSpec};
use super::table::{median, Cell, Table};
use super::tuning::{tune_alpha_augmented, tune_alpha_for_support, AlphaTuning};
use crate::analysis::{alpha_star_augmented_at, empirical_rate, rate_augmented_at, RateBound};
use crate::augmented::build_augmented_with;
use crate::error::{Error, Result};
use crate::linalg::{LeftSpectralFactors, ProblemInstance};
use crate::solvers::{
    solve, solve_augmented, solve_augmented_with, solve_infconv, Reference, SolverConfig, SolverKind, SolverResult,
    Stopwatch, REFERENCE_STOP_TOL,
};

/// Everything one experiment run produces. `timings` and `timing_summary`
/// hold wall-clock data and are the only nondeterministic parts.
#[derive(Clone, Debug)]
pub struct RunRecord {
    pub spec: ExperimentSpec,
    pub spec_sha256: String,
    pub trials: Table,
    pub aggregates: Table,
    pub curves: Option<Table>,
    pub timings: Option<Table>,
    pub timing_summary: Option<Table>,
}

/// One output file: name, contents and whether it is reproducible bit for bit.
#[derive(Clone, Debug, PartialEq)]
pub struct OutputFile {
    pub name: String,
    pub contents: String,
    pub deterministic: bool,
}

impl RunRecord {
    pub fn files(&self) -> Vec<OutputFile> {
        let name = self.spec.name();
        let hash = Some(self.spec_sha256.as_str());
        let mut out = vec![
            OutputFile { name: format!("{name}.csv"), contents: self.trials.to_csv(hash), deterministic: true },
            OutputFile {
                name: format!("{name}_aggregates.csv"),
                contents: self.aggregates.to_csv(hash),
                deterministic: true,
            },
        ];
        if let Some(c) = &self.curves {
            out.push(OutputFile { name: format!("{name}_curves.csv"), contents: c.to_csv(hash), deterministic: true });
        }
        if let Some(t) = &self.timings {
            out.push(OutputFile { name: format!("{name}_times.csv"), contents: t.to_csv(hash), deterministic: false });
        }
        if let Some(t) = &self.timing_summary {
            out.push(OutputFile {
                name: format!("{name}_times_summary.csv"),
                contents: t.to_csv(hash),
                deterministic: false,
            });
        }
        let sidecar = serde_json::json!({
            "schema_version": 1,
            "experiment": name,
            "spec_sha256": self.spec_sha256,
            "spec": self.spec,
        });
        out.push(OutputFile {
            name: format!("{name}.json"),
            contents: serde_json::to_string_pretty(&sidecar).expect("spec serializes") + "\n",
            deterministic: true,
        });
        out
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// SHA-256 of the canonical JSON of the spec.
pub fn spec_sha256(spec: &ExperimentSpec) -> String {
    let text = serde_json::to_string(spec).expect("spec serializes");
    hex(&Sha256::digest(text.as_bytes()))
}

/// SHA-256 of the bit patterns of `x`.
pub fn vector_sha256(x: &[f64]) -> String {
    let mut h = Sha256::new();
    for v in x {
        h.update(v.to_bits().to_le_bytes());
    }
    hex(&h.finalize())
}

fn par_map<J: Sync, T: Send>(jobs: &[J], f: impl Fn(&J) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        jobs.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        jobs.iter().map(f).collect()
    }
}

/// Runs the experiment on `threads` worker threads (all cores when `None`).
/// Results do not depend on the thread count.
pub fn run_experiment(spec: &ExperimentSpec, threads: Option<usize>) -> Result<RunRecord> {
    spec.validate()?;
    #[cfg(feature = "parallel")]
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.unwrap_or(0))
            .build()
            .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
        pool.install(|| dispatch(spec))
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        dispatch(spec)
    }
}

fn dispatch(spec: &ExperimentSpec) -> Result<RunRecord> {
    let (trials, aggregates, curves, timings, timing_summary) = match spec {
        ExperimentSpec::VaryBeta(s) => {
            let (t, a, c) = run_vary_beta(s)?;
            (t, a, Some(c), None, None)
        }
        ExperimentSpec::VaryM(s) => {
            let (t, a, c) = run_vary_m(s)?;
            (t, a, Some(c), None, None)
        }
        ExperimentSpec::IterationCount(s) => {
            let (t, a, c) = run_iteration_count(s)?;
            (t, a, Some(c), None, None)
        }
        ExperimentSpec::Timing(s) => {
            let (t, a, times, summary) = run_timing(s)?;
            (t, a, None, Some(times), Some(summary))
        }
    };
    Ok(RunRecord { spec: spec.clone(), spec_sha256: spec_sha256(spec), trials, aggregates, curves, timings, timing_summary })
}

/// Tuned, referenced and traced run of the augmented solver on one instance.
#[derive(Clone, Debug)]
pub struct AugmentedStudy {
    pub tuning: AlphaTuning,
    pub mu: f64,
    pub reference: SolverResult,
    pub run: SolverResult,
    pub empirical_rate: Option<f64>,
    pub bound: Option<RateBound>,
    pub alpha_star: Option<f64>,
}

/// Augmented step `mu_factor·(‖A‖⁻² + β⁻¹)`.
pub fn augmented_step(spectral_norm_squared: f64, beta: f64, mu_factor: f64) -> f64 {
    let inv = if spectral_norm_squared > 0.0 { 1.0 / spectral_norm_squared } else { 0.0 };
    mu_factor * (inv + 1.0 / beta)
}

#[allow(clippy::too_many_arguments)]
pub fn augmented_study(
    problem: &ProblemInstance,
    spectrum: &LeftSpectralFactors,
    beta: f64,
    q: f64,
    mu_factor: f64,
    target_support: usize,
    max_iters: usize,
    tail_fraction: f64,
) -> Result<AugmentedStudy> {
    let a = &problem.matrix;
    let aug = build_augmented_with(a, &problem.observation, beta, spectrum.clone())?;
    let mu = augmented_step(spectrum.spectral_norm_squared(), beta, mu_factor);
    let mut cfg = SolverConfig::new(1.0, beta, q, mu);
    cfg.max_iters = max_iters;
    cfg.check_hypotheses = false;
    let tuning = tune_alpha_augmented(&aug, problem, &cfg, target_support)?;
    cfg.alpha = tuning.alpha();
    let mut ref_cfg = cfg.clone();
    ref_cfg.stop_tol = REFERENCE_STOP_TOL;
    let reference = solve_augmented_with(&aug, problem, &ref_cfg)?;
    cfg.reference = Some(Reference::u(reference.u.to_vec()));
    let run = solve_augmented_with(&aug, problem, &cfg)?;
    let empirical_rate = empirical_rate(&run.trace, tail_fraction).ok();
    let bound = rate_augmented_at(a, beta, mu, cfg.alpha, q, &reference.u).ok();
    let alpha_star = alpha_star_augmented_at(a, beta, q, &reference.u).ok().map(|r| r.alpha_star);
    Ok(AugmentedStudy { tuning, mu, reference, run, empirical_rate, bound, alpha_star })
}

fn status_cell(r: &SolverResult) -> Cell {
    Cell::Text(serde_json::to_value(r.status).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default())
}

fn support_size(x: &[f64]) -> usize {
    x.iter().filter(|&&v| v != 0.0).count()
}

fn study_cells(st: &AugmentedStudy) -> Vec<Cell> {
    vec![
        st.mu.into(),
        st.tuning.alpha().into(),
        st.tuning.found().into(),
        support_size(&st.reference.u).into(),
        st.run.iterations.into(),
        status_cell(&st.run),
        st.empirical_rate.into(),
        st.bound.as_ref().map(|b| b.constant).into(),
        st.bound.as_ref().map(|b| b.admissible).into(),
        st.alpha_star.into(),
    ]
}

const STUDY_COLUMNS: [&str; 10] = [
    "mu",
    "alpha",
    "alpha_found",
    "support_size",
    "iterations",
    "status",
    "empirical_rate",
    "theoretical_rate",
    "admissible",
    "alpha_star",
];

fn columns(prefix: &[&'static str], rest: &[&'static str]) -> Vec<&'static str> {
    prefix.iter().chain(rest).copied().collect()
}

fn run_vary_beta(spec: &VaryBetaSpec) -> Result<(Table, Table, Table)> {
    let jobs: Vec<u64> = (0..spec.trials as u64).collect();
    let per_trial = par_map(&jobs, |&trial| {
        let problem = make_problem(&spec.problem, spec.seed, trial)?;
        let spectrum = LeftSpectralFactors::compute(&problem.matrix)?;
        let target = spec.target_support.unwrap_or(spec.problem.s);
        spec.betas
            .iter()
            .map(|&beta| {
                info!("vary-beta trial {trial} beta {beta}");
                augmented_study(&problem, &spectrum, beta, spec.q, spec.mu_factor, target, spec.max_iters, spec.tail_fraction)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut cols = columns(&["trial", "beta"], &STUDY_COLUMNS);
    cols.push("iterations_to_target");
    let mut trials = Table::new(&cols);
    let mut curves = Table::new(&["trial", "beta", "iter", "err_to_ref"]);
    for (trial, studies) in per_trial.iter().enumerate() {
        for (st, &beta) in studies.iter().zip(&spec.betas) {
            let mut row = vec![trial.into(), beta.into()];
            row.extend(study_cells(st));
            row.push(st.run.trace.first_reaching(spec.target_error).map(|r| r.iter).into());
            trials.push(row);
            for r in &st.run.trace.records {
                curves.push(vec![trial.into(), beta.into(), r.iter.into(), r.err_to_ref.into()]);
            }
        }
    }
    let aggregates =
        trials.aggregate(&["beta"], &["iterations_to_target", "empirical_rate", "theoretical_rate", "alpha"]);
    Ok((trials, aggregates, curves))
}

fn with_rows(problem: &ProblemSpec, m: usize) -> ProblemSpec {
    let mut p = *problem;
    p.ensemble.m = m;
    p
}

fn run_vary_m(spec: &VaryMSpec) -> Result<(Table, Table, Table)> {
    let mut ms = spec.ms.clone();
    if spec.square_control && !ms.contains(&spec.problem.ensemble.n) {
        ms.push(spec.problem.ensemble.n);
    }
    let jobs: Vec<(usize, u64)> = ms.iter().flat_map(|&m| (0..spec.trials as u64).map(move |t| (m, t))).collect();
    let studies = par_map(&jobs, |&(m, trial)| {
        info!("vary-m m {m} trial {trial}");
        let problem = make_problem(&with_rows(&spec.problem, m), spec.seed, trial)?;
        let spectrum = LeftSpectralFactors::compute(&problem.matrix)?;
        let target = spec.target_support.unwrap_or(spec.problem.s);
        augmented_study(&problem, &spectrum, spec.beta, spec.q, spec.mu_factor, target, spec.max_iters, spec.tail_fraction)
    })?;
    let mut trials = Table::new(&columns(&["m", "trial", "beta"], &STUDY_COLUMNS));
    let mut curves = Table::new(&["m", "trial", "iter", "err_to_ref"]);
    for (&(m, trial), st) in jobs.iter().zip(&studies) {
        let mut row = vec![m.into(), trial.into(), spec.beta.into()];
        row.extend(study_cells(st));
        trials.push(row);
        for r in &st.run.trace.records {
            curves.push(vec![m.into(), trial.into(), r.iter.into(), r.err_to_ref.into()]);
        }
    }
    let aggregates = trials.aggregate(&["m"], &["empirical_rate", "theoretical_rate", "iterations", "alpha"]);
    Ok((trials, aggregates, curves))
}

/// One solver of the iteration-count comparison.
#[derive(Clone, Debug)]
pub struct ComparisonRun {
    pub kind: SolverKind,
    pub config: SolverConfig,
    pub tuning: AlphaTuning,
    pub reference: SolverResult,
    pub run: SolverResult,
}

impl ComparisonRun {
    /// Cumulative prox calls at the first record with relative `u` error at
    /// most `level`.
    pub fn prox_calls_to(&self, level: f64) -> Option<u64> {
        self.run.trace.first_reaching(level).map(|r| r.prox_calls)
    }
}

/// Tunes each solver to `target_support` nonzeros and traces its `u` error
/// against its own stationary point.
pub fn compare_solvers(problem: &ProblemInstance, spec: &IterationCountSpec) -> Result<Vec<ComparisonRun>> {
    let spectrum = LeftSpectralFactors::compute(&problem.matrix)?;
    let norm_sq = spectrum.spectral_norm_squared();
    let plain_step = if norm_sq > 0.0 { spec.mu_factor / norm_sq } else { 1.0 };
    let mut out: Vec<ComparisonRun> = Vec::with_capacity(3);
    for kind in [SolverKind::Augmented, SolverKind::Infconv, SolverKind::Alternating] {
        let mu = match kind {
            SolverKind::Augmented => augmented_step(norm_sq, spec.beta, spec.mu_factor),
            _ => plain_step,
        };
        let mut cfg = SolverConfig::new(1.0, spec.beta, spec.q, mu);
        cfg.max_iters = spec.max_iters;
        cfg.inner_tol = spec.inner_tol;
        cfg.inner_mu = Some(plain_step);
        cfg.check_hypotheses = false;
        let tuning = match kind {
            SolverKind::Augmented => {
                let aug = build_augmented_with(&problem.matrix, &problem.observation, spec.beta, spectrum.clone())?;
                tune_alpha_augmented(&aug, problem, &cfg, spec.target_support)?
            }
            SolverKind::Alternating => {
                // Alternating minimization and the augmented solver share
                // their stationary points, so the augmented α is tried first.
                let guess = out.iter().find(|r| r.kind == SolverKind::Augmented).map(|r| r.tuning);
                let reuse = match guess {
                    Some(t) if t.found() => {
                        cfg.alpha = t.alpha();
                        let size = support_size(&solve(kind, problem, &cfg)?.u);
                        (size == spec.target_support)
                            .then_some(AlphaTuning::Found { alpha: t.alpha(), support_size: size, evaluations: 1 })
                    }
                    _ => None,
                };
                match reuse {
                    Some(t) => t,
                    None => tune_alpha_for_support(problem, kind, &cfg, spec.target_support)?,
                }
            }
            SolverKind::Infconv => tune_alpha_for_support(problem, kind, &cfg, spec.target_support)?,
        };
        cfg.alpha = tuning.alpha();
        info!("iteration-count {} alpha {:.6e}", kind.name(), cfg.alpha);
        let mut ref_cfg = cfg.clone();
        ref_cfg.stop_tol = REFERENCE_STOP_TOL;
        let reference = solve(kind, problem, &ref_cfg)?;
        cfg.reference = Some(Reference::u(reference.u.to_vec()));
        let run = solve(kind, problem, &cfg)?;
        out.push(ComparisonRun { kind, config: cfg, tuning, reference, run });
    }
    Ok(out)
}

fn run_iteration_count(spec: &IterationCountSpec) -> Result<(Table, Table, Table)> {
    let jobs: Vec<u64> = (0..spec.trials as u64).collect();
    let per_trial = par_map(&jobs, |&trial| {
        let problem = make_problem(&spec.problem, spec.seed, trial)?;
        compare_solvers(&problem, spec)
    })?;
    let mut trials = Table::new(&[
        "trial",
        "solver",
        "alpha",
        "alpha_found",
        "mu",
        "support_size",
        "prox_calls_to_target",
        "total_prox_calls",
        "outer_iterations",
        "status",
    ]);
    let mut curves = Table::new(&["trial", "solver", "prox_calls", "err_to_ref"]);
    for (trial, runs) in per_trial.iter().enumerate() {
        for c in runs {
            let total = c.run.trace.last().map_or(0, |r| r.prox_calls);
            trials.push(vec![
                trial.into(),
                c.kind.name().into(),
                c.config.alpha.into(),
                c.tuning.found().into(),
                c.config.mu.into(),
                support_size(&c.reference.u).into(),
                c.prox_calls_to(spec.target_error).into(),
                total.into(),
                c.run.iterations.into(),
                status_cell(&c.run),
            ]);
            for r in &c.run.trace.records {
                curves.push(vec![trial.into(), c.kind.name().into(), r.prox_calls.into(), r.err_to_ref.into()]);
            }
        }
    }
    let aggregates = trials.aggregate(&["solver"], &["prox_calls_to_target", "total_prox_calls", "alpha"]);
    Ok((trials, aggregates, curves))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let pts: Vec<(f64, f64)> =
        xs.iter().zip(ys).filter(|(&x, &y)| x > 0.0 && y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return Err(Error::UndefinedRate("fewer than two positive points".into()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::UndefinedRate("all x values equal".into()));
    }
    Ok(sxy / sxx)
}

/// Wall time of one solver at fixed iteration count, setup included.
#[derive(Clone, Debug)]
pub struct TimingSample {
    pub m: usize,
    pub trial: u64,
    pub kind: SolverKind,
    pub iterations: usize,
    pub u_sha256: String,
    pub seconds: f64,
    pub setup_seconds: f64,
}

/// Serial timing runs over the row grid; each figure is the median over
/// repetitions.
pub fn timing_samples(spec: &TimingSpec) -> Result<Vec<TimingSample>> {
    let mut cfg = SolverConfig::new(spec.alpha, spec.beta, spec.q, spec.mu);
    cfg.max_iters = spec.iterations;
    cfg.stop_tol = f64::MIN_POSITIVE;
    cfg.check_hypotheses = false;
    let mut out = Vec::new();
    for &m in &spec.ms {
        for trial in 0..spec.trials as u64 {
            let problem = make_problem(&with_rows(&spec.problem, m), spec.seed, trial)?;
            for kind in [SolverKind::Augmented, SolverKind::Infconv] {
                let mut times = Vec::with_capacity(spec.repetitions);
                let mut setups = Vec::with_capacity(spec.repetitions);
                let mut last = None;
                for _ in 0..spec.repetitions {
                    let clock = Stopwatch::start();
                    let r = match kind {
                        SolverKind::Augmented => solve_augmented(&problem, &cfg)?,
                        _ => solve_infconv(&problem, &cfg)?,
                    };
                    times.push(clock.elapsed_seconds());
                    setups.push(r.setup_seconds);
                    last = Some(r);
                }
                let r = last.expect("at least one repetition");
                info!("timing m {m} trial {trial} {}: {:.4}s", kind.name(), median(&times).unwrap_or(0.0));
                out.push(TimingSample {
                    m,
                    trial,
                    kind,
                    iterations: r.iterations,
                    u_sha256: vector_sha256(&r.u),
                    seconds: median(&times).unwrap_or(0.0),
                    setup_seconds: median(&setups).unwrap_or(0.0),
                });
            }
        }
    }
    Ok(out)
}

fn run_timing(spec: &TimingSpec) -> Result<(Table, Table, Table, Table)> {
    let samples = timing_samples(spec)?;
    let mut trials = Table::new(&["m", "trial", "solver", "iterations", "u_sha256"]);
    let mut times = Table::new(&["m", "trial", "solver", "seconds", "setup_seconds"]);
    for s in &samples {
        trials.push(vec![s.m.into(), s.trial.into(), s.kind.name().into(), s.iterations.into(), s.u_sha256.clone().into()]);
        times.push(vec![s.m.into(), s.trial.into(), s.kind.name().into(), s.seconds.into(), s.setup_seconds.into()]);
    }
    let aggregates = trials.aggregate(&["solver", "m"], &["iterations"]);
    let mut summary = times.aggregate(&["solver", "m"], &["seconds", "setup_seconds"]);
    summary.columns.push("loglog_slope".into());
    let mean_col = summary.column_index("seconds_mean").expect("aggregate column");
    let mut slopes = Vec::new();
    for kind in [SolverKind::Augmented, SolverKind::Infconv] {
        let rows: Vec<&Vec<Cell>> = summary.rows.iter().filter(|r| r[0] == Cell::from(kind.name())).collect();
        let xs: Vec<f64> = rows.iter().filter_map(|r| r[1].as_f64()).collect();
        let ys: Vec<f64> = rows.iter().filter_map(|r| r[mean_col].as_f64()).collect();
        slopes.push((kind.name(), loglog_slope(&xs, &ys).ok()));
    }
    for row in &mut summary.rows {
        let slope = slopes.iter().find(|(k, _)| row[0] == Cell::from(*k)).and_then(|(_, s)| *s);
        row.push(slope.into());
    }
    Ok((trials, aggregates, times, summary))
}
