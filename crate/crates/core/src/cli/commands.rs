use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use super::config::{
    AnalyzeConfig, ExperimentConfig, ProxTableConfig, RipConfig, RipMethodChoice, SolveConfig,
};
use super::{check_schema, config_err, load_config, runtime_err, write_atomic, CliError, Context};
use crate::analysis::{
    alpha_star_augmented_at, alpha_star_infconv, empirical_rate_from_errors, rate_augmented_at, rate_infconv,
    rip_bruteforce, rip_gaussian_order, support_profile,
};
use crate::augmented::build_augmented;
use crate::experiments::{run_experiment, ExperimentSpec};
use crate::linalg::{spectral_norm, ProblemInstance};
use crate::prox::{prox_lq_scalar, InfConvPenaltyParams, ProxParams};
use crate::solvers::trace::format_float;
use crate::solvers::{
    kkt_residual_augmented, kkt_residual_infconv, objective_t, reference_point, solve as run_solver, solve_with_reference,
    SolverConfig, SolverKind,
};

type Outcome = Result<Vec<PathBuf>, CliError>;

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s.into_bytes()
}

fn solver_config(cfg: &SolveConfig) -> SolverConfig {
    let mut s = SolverConfig::new(cfg.alpha, cfg.beta, cfg.q, cfg.mu);
    s.max_iters = cfg.max_iters;
    s.stop_tol = cfg.stop_tol;
    s.inner_tol = cfg.inner_tol;
    s.inner_mu = cfg.inner_mu;
    s
}

/// Step at which alternating minimization's fixed points are stationary.
fn alternating_step(problem: &ProblemInstance, cfg: &SolverConfig) -> crate::Result<f64> {
    if let Some(mu) = cfg.inner_mu {
        return Ok(mu);
    }
    let norm = spectral_norm(&problem.matrix)?;
    Ok(if norm > 0.0 { 0.99 / (norm * norm) } else { 1.0 })
}

pub(super) fn solve(ctx: &Context, path: &Path) -> Outcome {
    let cfg: SolveConfig = load_config(path)?;
    check_schema(cfg.schema_version)?;
    let problem = cfg.problem.build(ctx.seed).map_err(config_err)?;
    let scfg = solver_config(&cfg);
    scfg.validate(problem.matrix.cols()).map_err(config_err)?;
    if cfg.solvers.is_empty() {
        return Err(CliError::Config("`solvers` must be nonempty".into()));
    }

    let mut results = Vec::new();
    let mut traces = Vec::new();
    for &kind in &cfg.solvers {
        let run = if cfg.reference {
            solve_with_reference(kind, &problem, &scfg).map_err(runtime_err)?.1
        } else {
            run_solver(kind, &problem, &scfg).map_err(runtime_err)?
        };
        let kkt = match kind {
            SolverKind::Infconv => {
                let pen = InfConvPenaltyParams::new(cfg.alpha, cfg.beta, cfg.q).map_err(runtime_err)?;
                kkt_residual_infconv(&run.w, &problem, &pen, cfg.mu)
            }
            SolverKind::Augmented | SolverKind::Alternating => {
                let mu = if kind == SolverKind::Augmented { cfg.mu } else { alternating_step(&problem, &scfg).map_err(runtime_err)? };
                build_augmented(&problem.matrix, &problem.observation, cfg.beta)
                    .and_then(|aug| kkt_residual_augmented(&run.u, &aug, cfg.alpha, cfg.q, mu))
            }
        }
        .map_err(runtime_err)?;
        results.push(json!({
            "solver": kind.name(),
            "status": run.status,
            "iterations": run.iterations,
            "prox_calls": run.trace.last().map_or(0, |r| r.prox_calls),
            "objective_t": objective_t(&run.u, &run.v, &problem, cfg.alpha, cfg.beta, cfg.q),
            "kkt_residual": kkt,
            "u": run.u.as_slice(),
            "v": run.v.as_slice(),
            "w": run.w.as_slice(),
        }));
        let mut csv = Vec::new();
        run.trace.write_csv(&mut csv, cfg.trace_times).map_err(runtime_err)?;
        traces.push((format!("solve_{}_trace.csv", kind.name()), csv));
    }

    let mut written = Vec::new();
    for (name, csv) in traces {
        written.push(write_atomic(&ctx.output_dir, &name, &csv)?);
    }
    let doc = json!({ "schema_version": super::SCHEMA_VERSION, "results": results });
    written.push(write_atomic(&ctx.output_dir, "solve.json", &to_json(&doc))?);
    Ok(written)
}

pub(super) fn prox_table(ctx: &Context, path: &Path) -> Outcome {
    let cfg: ProxTableConfig = load_config(path)?;
    check_schema(cfg.schema_version)?;
    if cfg.points < 2 || !(cfg.u_min.is_finite() && cfg.u_max.is_finite() && cfg.u_min < cfg.u_max) {
        return Err(CliError::Config("need points >= 2 and finite u_min < u_max".into()));
    }
    let mut params = Vec::new();
    for &q in &cfg.q {
        for &nu in &cfg.nu {
            for &mu in &cfg.mu {
                params.push(ProxParams::new(q, nu, mu).map_err(config_err)?);
            }
        }
    }
    let mut out = String::from("u,q,nu,mu,prox\n");
    let step = (cfg.u_max - cfg.u_min) / (cfg.points - 1) as f64;
    for p in &params {
        for k in 0..cfg.points {
            let u = cfg.u_min + step * k as f64;
            let x = prox_lq_scalar(u, p).map_err(runtime_err)?;
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                format_float(u),
                format_float(p.q),
                format_float(p.nu),
                format_float(p.mu),
                format_float(x)
            ));
        }
    }
    Ok(vec![write_atomic(&ctx.output_dir, "prox_table.csv", out.as_bytes())?])
}

type TraceColumns = (Vec<f64>, Vec<f64>, Vec<usize>);

/// Columns `iter`, `err_to_ref` and `support_size` of a trace CSV.
fn read_trace(path: &Path) -> Result<TraceColumns, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().ok_or_else(|| CliError::Config("trace is empty".into()))?.split(',').collect();
    let col = |name: &str| {
        header.iter().position(|h| h.trim() == name).ok_or_else(|| CliError::Config(format!("trace lacks column `{name}`")))
    };
    let (ci, ce, cs) = (col("iter")?, col("err_to_ref")?, col("support_size")?);
    let (mut iters, mut errs, mut sizes) = (Vec::new(), Vec::new(), Vec::new());
    for (lineno, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        let bad = || CliError::Config(format!("{}: malformed row {}", path.display(), lineno + 2));
        let get = |i: usize| cells.get(i).copied().ok_or_else(bad);
        iters.push(get(ci)?.parse::<f64>().map_err(|_| bad())?);
        let e = get(ce)?;
        if e.is_empty() {
            return Err(CliError::Config("trace has no reference errors; solve with \"reference\": true".into()));
        }
        errs.push(e.parse::<f64>().map_err(|_| bad())?);
        sizes.push(get(cs)?.parse::<usize>().map_err(|_| bad())?);
    }
    Ok((iters, errs, sizes))
}

pub(super) fn analyze(ctx: &Context, path: &Path) -> Outcome {
    let cfg: AnalyzeConfig = load_config(path)?;
    check_schema(cfg.schema_version)?;
    let trace_path = if cfg.trace.is_absolute() {
        cfg.trace.clone()
    } else {
        path.parent().unwrap_or(Path::new(".")).join(&cfg.trace)
    };
    let (iters, errs, sizes) = read_trace(&trace_path)?;
    let problem = cfg.problem.build(ctx.seed).map_err(config_err)?;
    let scfg = SolverConfig::new(cfg.alpha, cfg.beta, cfg.q, cfg.mu);
    scfg.validate(problem.matrix.cols()).map_err(config_err)?;

    // Support size is all a trace records of the pattern, so the fit starts
    // after its last change.
    let start = sizes.iter().rposition(|&s| Some(&s) != sizes.last()).map_or(0, |k| k + 1);
    let empirical = empirical_rate_from_errors(&iters[start..], &errs[start..], cfg.tail_fraction);

    let reference = reference_point(cfg.solver, &problem, &scfg).map_err(runtime_err)?;
    let a = &problem.matrix;
    let (bound, alpha_star) = match cfg.solver {
        SolverKind::Augmented => (
            rate_augmented_at(a, cfg.beta, cfg.mu, cfg.alpha, cfg.q, &reference.u),
            alpha_star_augmented_at(a, cfg.beta, cfg.q, &reference.u),
        ),
        SolverKind::Infconv => match support_profile(&reference.u) {
            Ok((support, d_min)) => (
                rate_infconv(a, &support, cfg.mu, cfg.alpha, cfg.beta, cfg.q, d_min),
                alpha_star_infconv(a, &support, cfg.mu, cfg.q, d_min),
            ),
            Err(e) => (Err(crate::Error::UndefinedRate(e.to_string())), Err(e)),
        },
        SolverKind::Alternating => {
            let none = || crate::Error::UndefinedRate("no rate constant for alternating minimization".into());
            (Err(none()), Err(none()))
        }
    };
    let mut notes = Vec::new();
    let empirical = empirical.map_err(|e| notes.push(format!("empirical_rate: {e}"))).ok();
    let bound = bound.map_err(|e| notes.push(format!("theoretical_rate: {e}"))).ok();
    let alpha_star = alpha_star.map_err(|e| notes.push(format!("alpha_star: {e}"))).ok();
    if let Some(d) = bound.as_ref().and_then(|b| b.diagnostic.clone()) {
        notes.push(d);
    }
    let doc = json!({
        "schema_version": super::SCHEMA_VERSION,
        "solver": cfg.solver.name(),
        "empirical_rate": empirical,
        "theoretical_rate": bound.as_ref().map(|b| b.constant),
        "admissible": bound.as_ref().map(|b| b.admissible),
        "alpha_star": alpha_star.map(|r| r.alpha_star).filter(|x| x.is_finite()),
        "components": bound.as_ref().map(|b| b.components.iter().map(|(k, v)| (k.to_string(), json!(v))).collect::<serde_json::Map<_, _>>()),
        "reference_support_size": reference.u.iter().filter(|&&x| x != 0.0).count(),
        "fitted_from_iter": iters.get(start),
        "notes": notes,
    });
    Ok(vec![write_atomic(&ctx.output_dir, "analyze.json", &to_json(&doc))?])
}

pub(super) fn experiment(ctx: &Context, path: Option<&Path>, preset: Option<&str>, full_scale: bool) -> Outcome {
    let mut spec = match (path, preset) {
        (Some(p), _) => {
            let cfg: ExperimentConfig = load_config(p)?;
            check_schema(cfg.schema_version)?;
            cfg.experiment
        }
        (None, Some(name)) => ExperimentSpec::preset(name, full_scale).map_err(config_err)?,
        (None, None) => return Err(CliError::Config("either --config or --preset is required".into())),
    };
    if let Some(seed) = ctx.seed {
        spec.set_seed(seed);
    }
    spec.validate().map_err(config_err)?;
    let record = run_experiment(&spec, ctx.threads).map_err(runtime_err)?;
    let mut written = Vec::new();
    for f in record.files() {
        written.push(write_atomic(&ctx.output_dir, &f.name, f.contents.as_bytes())?);
    }
    Ok(written)
}

pub(super) fn rip(ctx: &Context, path: &Path) -> Outcome {
    let cfg: RipConfig = load_config(path)?;
    check_schema(cfg.schema_version)?;
    let a = cfg.matrix.build(ctx.seed).map_err(config_err)?;
    if cfg.orders.is_empty() {
        return Err(CliError::Config("`orders` must be nonempty".into()));
    }
    let mut estimates = Vec::new();
    for &s in &cfg.orders {
        let est = match cfg.method {
            RipMethodChoice::BruteForce => rip_bruteforce(&a, s),
            RipMethodChoice::GaussianOrder => rip_gaussian_order(a.rows(), a.cols(), s, cfg.c),
        };
        estimates.push(est.map_err(|e| match e {
            crate::Error::TooManySupports { .. } | crate::Error::InvalidInput(_) | crate::Error::InvalidParameter { .. } => {
                config_err(e)
            }
            other => runtime_err(other),
        })?);
    }
    let doc = json!({
        "schema_version": super::SCHEMA_VERSION,
        "m": a.rows(),
        "n": a.cols(),
        "estimates": estimates,
    });
    Ok(vec![write_atomic(&ctx.output_dir, "rip.json", &to_json(&doc))?])
}
