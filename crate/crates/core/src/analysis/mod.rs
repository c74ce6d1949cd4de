//! Theoretical contraction constants, admissible penalty ranges, RIP
//! estimates and empirical rates fitted to traces.

mod empirical;
mod rip;

use serde::Serialize;

use crate::error::{check_exponent, check_positive, Error, Result};
use crate::linalg::{min_singular_on_support, spectral_norm, DenseMatrix};

pub use empirical::{empirical_rate, empirical_rate_from_errors, DEFAULT_TAIL_FRACTION};
pub use rip::{rip_bruteforce, rip_gaussian_order, RipEstimate, RipMethod, RIP_SUPPORT_LIMIT};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateBound {
    pub constant: f64,
    pub admissible: bool,
    pub components: Vec<(&'static str, f64)>,
    /// Why the bound is not admissible, when it is not.
    pub diagnostic: Option<String>,
}

impl RateBound {
    pub fn component(&self, name: &str) -> Option<f64> {
        self.components.iter().find(|(k, _)| *k == name).map(|&(_, v)| v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AlphaRange {
    /// Supremum of admissible `α`; infinite for `q = 1`.
    pub alpha_star: f64,
}

impl AlphaRange {
    pub fn contains(&self, alpha: f64) -> bool {
        alpha > 0.0 && alpha < self.alpha_star
    }
}

/// Lower curvature of `A` on the support: either through an RIP constant,
/// `(1 − δ)²`, or the exact `λ_min(A_IᵀA_I)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum FloorTerm {
    Rip(f64),
    LambdaMin(f64),
}

impl FloorTerm {
    pub fn value(self) -> f64 {
        match self {
            FloorTerm::Rip(delta) => (1.0 - delta).powi(2),
            FloorTerm::LambdaMin(l) => l,
        }
    }

    fn check(self) -> Result<()> {
        let ok = match self {
            FloorTerm::Rip(d) => d.is_finite() && (0.0..1.0).contains(&d),
            FloorTerm::LambdaMin(l) => l.is_finite() && l >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter { name: "floor", reason: format!("{self:?} out of range") })
        }
    }
}

fn check_nonneg(name: &'static str, x: f64) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, reason: format!("must be finite and >= 0, got {x}") })
    }
}

/// `1 − μα(1−q)(d_min/2)^(q−2)`, exactly 1 at `q = 1`.
fn curvature_denominator(mu: f64, alpha: f64, q: f64, d_min: f64) -> f64 {
    if q >= 1.0 {
        1.0
    } else {
        1.0 - mu * alpha * (1.0 - q) * (d_min / 2.0).powf(q - 2.0)
    }
}

/// Contraction constant of the augmented iteration after support
/// stabilization.
pub fn rate_augmented(
    spec_norm_a: f64,
    beta: f64,
    mu: f64,
    alpha: f64,
    q: f64,
    floor: FloorTerm,
    d_min: f64,
) -> Result<RateBound> {
    check_nonneg("spec_norm_a", spec_norm_a)?;
    check_positive("beta", beta)?;
    check_positive("mu", mu)?;
    check_nonneg("alpha", alpha)?;
    check_exponent(q)?;
    check_positive("d_min", d_min)?;
    floor.check()?;
    let shrink = 1.0 / (1.0 + spec_norm_a * spec_norm_a / beta);
    let numerator = 1.0 - mu * shrink * floor.value();
    let denominator = curvature_denominator(mu, alpha, q, d_min);
    let step_bound = if spec_norm_a > 0.0 { 1.0 / (spec_norm_a * spec_norm_a) + 1.0 / beta } else { f64::INFINITY };
    let constant = if denominator > 0.0 { numerator / denominator } else { f64::INFINITY };
    let diagnostic = if denominator <= 0.0 {
        Some(format!("denominator {denominator} <= 0: alpha too large for d_min"))
    } else if mu >= step_bound {
        Some(format!("step {mu} not below ‖A‖⁻² + β⁻¹ = {step_bound}"))
    } else if constant >= 1.0 {
        Some(format!("constant {constant} >= 1"))
    } else if numerator < 0.0 {
        Some(format!("numerator {numerator} < 0"))
    } else {
        None
    };
    Ok(RateBound {
        constant,
        admissible: diagnostic.is_none(),
        components: vec![
            ("numerator", numerator),
            ("denominator", denominator),
            ("shrink", shrink),
            ("floor", floor.value()),
        ],
        diagnostic,
    })
}

/// Largest `α` for which the augmented constant stays below one.
pub fn alpha_star_augmented(spec_norm_a: f64, beta: f64, floor: FloorTerm, q: f64, d_min: f64) -> Result<AlphaRange> {
    check_nonneg("spec_norm_a", spec_norm_a)?;
    check_positive("beta", beta)?;
    check_exponent(q)?;
    check_positive("d_min", d_min)?;
    floor.check()?;
    if q >= 1.0 {
        return Ok(AlphaRange { alpha_star: f64::INFINITY });
    }
    let shrink = 1.0 / (1.0 + spec_norm_a * spec_norm_a / beta);
    Ok(AlphaRange { alpha_star: shrink * floor.value() / (1.0 - q) * (d_min / 2.0).powf(2.0 - q) })
}

fn check_support(n: usize, support: &[usize]) -> Result<()> {
    if support.is_empty() || support.len() >= n {
        return Err(Error::InvalidInput(format!("support must be a nonempty proper subset of 0..{n}")));
    }
    let mut seen = vec![false; n];
    for &i in support {
        if i >= n || seen[i] {
            return Err(Error::InvalidInput(format!("support index {i} out of range or repeated")));
        }
        seen[i] = true;
    }
    Ok(())
}

/// `‖P_I − μA_IᵀA‖` and `‖P_{I^c} − μA_{I^c}ᵀA‖`: row blocks of `I − μAᵀA`.
fn split_operator_norms(a: &DenseMatrix, support: &[usize], mu: f64) -> Result<(f64, f64)> {
    let n = a.cols();
    let mut in_support = vec![false; n];
    for &i in support {
        in_support[i] = true;
    }
    let complement: Vec<usize> = (0..n).filter(|&i| !in_support[i]).collect();
    let block = |rows: &[usize]| -> Result<f64> {
        let gram = a.select_columns(rows).transpose().matmul(a);
        let m = DenseMatrix::from_fn(rows.len(), n, |r, c| {
            let id = if rows[r] == c { 1.0 } else { 0.0 };
            id - mu * gram.get(r, c)
        });
        spectral_norm(&m)
    };
    Ok((block(support)?, block(&complement)?))
}

/// Contraction constant of the infimal-convolution iteration.
pub fn rate_infconv(
    a: &DenseMatrix,
    support: &[usize],
    mu: f64,
    alpha: f64,
    beta: f64,
    q: f64,
    d_min: f64,
) -> Result<RateBound> {
    check_positive("mu", mu)?;
    check_nonneg("alpha", alpha)?;
    check_positive("beta", beta)?;
    check_exponent(q)?;
    check_positive("d_min", d_min)?;
    check_support(a.cols(), support)?;
    let norm = spectral_norm(a)?;
    let (on, off) = split_operator_norms(a, support, mu)?;
    let denominator = curvature_denominator(mu, alpha, q, d_min);
    let off_term = off / (1.0 + mu * beta);
    let constant = if denominator > 0.0 { ((on / denominator).powi(2) + off_term.powi(2)).sqrt() } else { f64::INFINITY };
    let step_bound = if norm > 0.0 { 1.0 / (norm * norm) } else { f64::INFINITY };
    let diagnostic = if denominator <= 0.0 {
        Some(format!("denominator {denominator} <= 0: alpha too large for d_min"))
    } else if mu >= step_bound {
        Some(format!("step {mu} not below ‖A‖⁻² = {step_bound}"))
    } else if constant >= 1.0 {
        Some(format!("constant {constant} >= 1"))
    } else {
        None
    };
    Ok(RateBound {
        constant,
        admissible: diagnostic.is_none(),
        components: vec![
            ("on_support_norm", on),
            ("off_support_norm", off),
            ("denominator", denominator),
            ("on_support_term", if denominator > 0.0 { on / denominator } else { f64::INFINITY }),
            ("off_support_term", off_term),
        ],
        diagnostic,
    })
}

/// Largest `α` for which the on-support term of the infimal-convolution
/// constant stays below one.
pub fn alpha_star_infconv(a: &DenseMatrix, support: &[usize], mu: f64, q: f64, d_min: f64) -> Result<AlphaRange> {
    check_positive("mu", mu)?;
    check_exponent(q)?;
    check_positive("d_min", d_min)?;
    check_support(a.cols(), support)?;
    if q >= 1.0 {
        return Ok(AlphaRange { alpha_star: f64::INFINITY });
    }
    let (on, _) = split_operator_norms(a, support, mu)?;
    if on >= 1.0 {
        return Err(Error::UndefinedRate(format!("‖P_I − μA_IᵀA‖ = {on} >= 1, no admissible alpha")));
    }
    Ok(AlphaRange { alpha_star: (1.0 - on) / (mu * (1.0 - q)) * (d_min / 2.0).powf(2.0 - q) })
}

/// Support and smallest nonzero magnitude of a stationary point.
pub fn support_profile(x: &[f64]) -> Result<(Vec<usize>, f64)> {
    let support = crate::linalg::support(x);
    if support.is_empty() {
        return Err(Error::UndefinedRate("stationary point is zero".into()));
    }
    let d_min = support.iter().map(|&i| x[i].abs()).fold(f64::INFINITY, f64::min);
    Ok((support, d_min))
}

/// The augmented constant in its exact form on the support of `u_star`.
pub fn rate_augmented_at(a: &DenseMatrix, beta: f64, mu: f64, alpha: f64, q: f64, u_star: &[f64]) -> Result<RateBound> {
    let (support, d_min) = support_profile(u_star)?;
    let lambda = min_singular_on_support(a, &support)?;
    rate_augmented(spectral_norm(a)?, beta, mu, alpha, q, FloorTerm::LambdaMin(lambda), d_min)
}

/// `α★` in its exact form on the support of `u_star`.
pub fn alpha_star_augmented_at(a: &DenseMatrix, beta: f64, q: f64, u_star: &[f64]) -> Result<AlphaRange> {
    let (support, d_min) = support_profile(u_star)?;
    let lambda = min_singular_on_support(a, &support)?;
    alpha_star_augmented(spectral_norm(a)?, beta, FloorTerm::LambdaMin(lambda), q, d_min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn augmented_examples() {
        let r = rate_augmented(1.0, 1.0, 0.5, 0.0, 0.5, FloorTerm::Rip(0.0), 1.0).unwrap();
        assert!((r.constant - 0.75).abs() < 1e-15);
        assert!(r.admissible);
        let r = rate_augmented(1.3, 0.4, 0.5, 3.0, 1.0, FloorTerm::LambdaMin(0.2), 0.1).unwrap();
        assert_eq!(r.component("denominator"), Some(1.0));
        let a = alpha_star_augmented(1.0, 1.0, FloorTerm::Rip(0.0), 0.5, 2.0).unwrap();
        assert!((a.alpha_star - 1.0).abs() < 1e-15);
        assert!(alpha_star_augmented(1.0, 1.0, FloorTerm::Rip(0.2), 1.0, 2.0).unwrap().alpha_star.is_infinite());
    }

    #[test]
    fn alpha_star_is_admissibility_boundary() {
        for &(norm, beta, lam, q, d, mu) in
            &[(1.0, 1.0, 0.3, 0.5, 0.8, 0.9), (2.5, 0.2, 0.6, 0.3, 1.1, 0.1), (1.7, 5.0, 0.05, 0.9, 0.4, 0.3)]
        {
            let star = alpha_star_augmented(norm, beta, FloorTerm::LambdaMin(lam), q, d).unwrap().alpha_star;
            let below = rate_augmented(norm, beta, mu, 0.99 * star, q, FloorTerm::LambdaMin(lam), d).unwrap();
            let above = rate_augmented(norm, beta, mu, 1.01 * star, q, FloorTerm::LambdaMin(lam), d).unwrap();
            assert!(below.admissible, "{below:?}");
            assert!(!above.admissible);
        }
    }

    #[test]
    fn infconv_isometry() {
        // orthonormal columns: I − μAᵀA vanishes at μ = 1
        let a = DenseMatrix::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![0.0; 3]])
            .unwrap();
        let r = rate_infconv(&a, &[0], 1.0, 0.0, 1.0, 0.5, 1.0).unwrap();
        assert!(r.component("on_support_norm").unwrap() < 1e-14);
        assert!(r.constant < 1e-14);
        let star = alpha_star_infconv(&a, &[0, 2], 1.0, 0.5, 1.0).unwrap();
        assert!((star.alpha_star - 2.0 * 0.5f64.powf(1.5)).abs() < 1e-14);
        assert!(alpha_star_infconv(&a, &[1], 0.5, 1.0, 1.0).unwrap().alpha_star.is_infinite());
        assert!(rate_infconv(&a, &[], 1.0, 0.0, 1.0, 0.5, 1.0).is_err());
    }
}
