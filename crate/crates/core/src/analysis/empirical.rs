use crate::error::{Error, Result};
use crate::solvers::IterationTrace;

pub const DEFAULT_TAIL_FRACTION: f64 = 0.3;
const MIN_POINTS: usize = 10;
const ERROR_FLOOR: f64 = 1e-13;

/// Per-step contraction ratio: `exp` of the least-squares slope of
/// `log(error)` against the iteration index, over the last `tail_fraction`
/// of the points above the error floor (at least ten of them).
pub fn empirical_rate_from_errors(iters: &[f64], errors: &[f64], tail_fraction: f64) -> Result<f64> {
    if iters.len() != errors.len() {
        return Err(Error::DimensionMismatch("iteration and error columns differ in length".into()));
    }
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::InvalidParameter { name: "tail_fraction", reason: format!("must lie in (0, 1], got {tail_fraction}") });
    }
    let usable: Vec<(f64, f64)> =
        iters.iter().zip(errors).filter(|(_, &e)| e.is_finite() && e > ERROR_FLOOR).map(|(&k, &e)| (k, e.ln())).collect();
    if usable.len() < MIN_POINTS {
        return Err(Error::UndefinedRate(format!("only {} tail points above {ERROR_FLOOR:e}", usable.len())));
    }
    let take = ((usable.len() as f64 * tail_fraction).ceil() as usize).max(MIN_POINTS);
    let tail = &usable[usable.len() - take..];
    let n = tail.len() as f64;
    let mx = tail.iter().map(|p| p.0).sum::<f64>() / n;
    let my = tail.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = tail.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = tail.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::UndefinedRate("tail has a single iteration index".into()));
    }
    Ok((sxy / sxx).exp())
}

/// [`empirical_rate_from_errors`] on the records after support and sign
/// pattern have stabilized.
pub fn empirical_rate(trace: &IterationTrace, tail_fraction: f64) -> Result<f64> {
    let errors = trace.errors().ok_or_else(|| Error::UndefinedRate("trace has no reference errors".into()))?;
    let start = trace.stabilization_index();
    let iters: Vec<f64> = trace.records[start..].iter().map(|r| r.iter as f64).collect();
    empirical_rate_from_errors(&iters, &errors[start..], tail_fraction)
}
