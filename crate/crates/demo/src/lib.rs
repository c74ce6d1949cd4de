//! WebAssembly bindings for the browser demo in `www/`.

use foldsolve::experiments::{make_problem, MatrixEnsemble, ProblemSpec};
use foldsolve::prox::{prox_lq_scalar, threshold_profile as profile, ProxParams};
use foldsolve::solvers::{solve_with_reference, SolverConfig, SolverKind};
use wasm_bindgen::prelude::*;

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

/// `points` samples of the scalar prox on `[-u_max, u_max]`, as
/// interleaved `u, prox(u)` pairs.
#[wasm_bindgen]
pub fn prox_curve(q: f64, nu: f64, mu: f64, u_max: f64, points: usize) -> Result<Vec<f64>, JsError> {
    let p = ProxParams::new(q, nu, mu).map_err(js_err)?;
    if points < 2 || !(u_max > 0.0) {
        return Err(JsError::new("need points >= 2 and u_max > 0"));
    }
    let mut out = Vec::with_capacity(2 * points);
    for k in 0..points {
        let u = -u_max + 2.0 * u_max * k as f64 / (points - 1) as f64;
        out.push(u);
        out.push(prox_lq_scalar(u, &p).map_err(js_err)?);
    }
    Ok(out)
}

/// `[tau, lambda]`: the threshold and the smallest nonzero output.
#[wasm_bindgen]
pub fn threshold_profile(q: f64, nu: f64, mu: f64) -> Result<Vec<f64>, JsError> {
    let t = profile(&ProxParams::new(q, nu, mu).map_err(js_err)?);
    Ok(vec![t.tau, t.lambda_gap])
}

/// Relative error per iteration for the augmented and the
/// infimal-convolution solver on one random problem.
#[wasm_bindgen]
pub struct ConvergenceTrace {
    augmented: Vec<f64>,
    infconv: Vec<f64>,
}

#[wasm_bindgen]
impl ConvergenceTrace {
    #[wasm_bindgen(getter)]
    pub fn augmented(&self) -> Vec<f64> {
        self.augmented.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn infconv(&self) -> Vec<f64> {
        self.infconv.clone()
    }
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn convergence_demo(
    m: usize,
    n: usize,
    s: usize,
    alpha: f64,
    beta: f64,
    q: f64,
    max_iters: usize,
    seed: u64,
) -> Result<ConvergenceTrace, JsError> {
    let spec = ProblemSpec {
        ensemble: MatrixEnsemble::gaussian(m, n),
        s,
        magnitude: Default::default(),
        noise: Default::default(),
    };
    let problem = make_problem(&spec, seed, 0).map_err(js_err)?;
    let norm = foldsolve::linalg::spectral_norm(&problem.matrix).map_err(js_err)?;
    let errors = |kind: SolverKind, mu: f64| -> Result<Vec<f64>, JsError> {
        let mut cfg = SolverConfig::new(alpha, beta, q, mu);
        cfg.max_iters = max_iters;
        cfg.check_hypotheses = false;
        let (_, run) = solve_with_reference(kind, &problem, &cfg).map_err(js_err)?;
        Ok(run.trace.records.iter().map(|r| r.err_to_ref.unwrap_or(f64::NAN)).collect())
    };
    let aug_mu = 0.99 * (1.0 / (norm * norm) + 1.0 / beta);
    Ok(ConvergenceTrace {
        augmented: errors(SolverKind::Augmented, aug_mu)?,
        infconv: errors(SolverKind::Infconv, 0.9 / (norm * norm))?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_is_odd() {
        let c = prox_curve(0.5, 1.0, 1.0, 3.0, 7).unwrap();
        assert_eq!(c.len(), 14);
        assert_eq!(c[1], -c[13]);
        assert_eq!(c[7], 0.0);
    }

    #[test]
    fn traces_decrease() {
        let t = convergence_demo(30, 90, 4, 0.01, 1.0, 0.5, 2000, 1).unwrap();
        for e in [&t.augmented, &t.infconv] {
            assert!(e.last().unwrap() < &1e-6, "{:?}", e.last());
        }
    }
}
