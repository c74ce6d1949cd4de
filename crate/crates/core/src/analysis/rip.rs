use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// Refuse brute-force enumeration beyond this many supports.
pub const RIP_SUPPORT_LIMIT: u128 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RipMethod {
    BruteForce,
    GaussianOrder,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RipEstimate {
    pub s: usize,
    pub delta: f64,
    pub method: RipMethod,
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Deviation of the singular values of `A_I` from one, in the unsquared
/// sense `(1−δ)‖u‖ ≤ ‖Au‖ ≤ (1+δ)‖u‖`.
fn deviation(a: &DenseMatrix, support: &[usize]) -> f64 {
    let sub = a.select_columns(support);
    let sv = sub.as_mat().singular_values().expect("singular values of a finite matrix");
    // A wide submatrix has structurally zero singular values.
    let smin = if sub.rows() < sub.cols() { 0.0 } else { sv.iter().cloned().fold(f64::INFINITY, f64::min) };
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    (smax - 1.0).max(1.0 - smin)
}

/// Calls `f` on every `s`-subset of `first..n` prefixed by `prefix`, in
/// lexicographic order.
fn for_each_subset(prefix: &mut Vec<usize>, first: usize, n: usize, s: usize, f: &mut impl FnMut(&[usize])) {
    if prefix.len() == s {
        f(prefix);
        return;
    }
    let remaining = s - prefix.len();
    for i in first..=(n - remaining) {
        prefix.push(i);
        for_each_subset(prefix, i + 1, n, s, f);
        prefix.pop();
    }
}

fn max_over_leading(a: &DenseMatrix, s: usize, lead: usize) -> f64 {
    let mut best = 0.0f64;
    let mut prefix = vec![lead];
    for_each_subset(&mut prefix, lead + 1, a.cols(), s, &mut |supp| best = best.max(deviation(a, supp)));
    best
}

/// Exact `δ_s` by enumerating every support of size `s`.
pub fn rip_bruteforce(a: &DenseMatrix, s: usize) -> Result<RipEstimate> {
    let n = a.cols();
    if s == 0 || s > n {
        return Err(Error::InvalidInput(format!("sparsity {s} must lie in 1..={n}")));
    }
    if !a.is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let count = binomial(n, s);
    if count > RIP_SUPPORT_LIMIT {
        return Err(Error::TooManySupports { count, limit: RIP_SUPPORT_LIMIT });
    }
    let leads = 0..=(n - s);
    // Max is order independent, so the parallel reduction is deterministic.
    #[cfg(feature = "parallel")]
    let delta = {
        use rayon::prelude::*;
        leads.into_par_iter().map(|lead| max_over_leading(a, s, lead)).reduce(|| 0.0, f64::max)
    };
    #[cfg(not(feature = "parallel"))]
    let delta = leads.map(|lead| max_over_leading(a, s, lead)).fold(0.0, f64::max);
    Ok(RipEstimate { s, delta: delta.max(0.0), method: RipMethod::BruteForce })
}

/// Order-of-magnitude RIP constant of a Gaussian matrix with variance `1/m`:
/// `C·m^(−1/2)·sqrt(s·log(e·n/s))`.
pub fn rip_gaussian_order(m: usize, n: usize, s: usize, c: f64) -> Result<RipEstimate> {
    if m == 0 || n == 0 || s == 0 || s > n {
        return Err(Error::InvalidInput(format!("need m, n, s >= 1 and s <= n (m={m}, n={n}, s={s})")));
    }
    crate::error::check_positive("C", c)?;
    let (m, n, s_f) = (m as f64, n as f64, s as f64);
    let delta = c / m.sqrt() * (s_f * (std::f64::consts::E * n / s_f).ln()).sqrt();
    Ok(RipEstimate { s, delta, method: RipMethod::GaussianOrder })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(30, 3), 4060);
        assert_eq!(binomial(5, 5), 1);
        assert_eq!(binomial(100, 50), 100891344545564193334812497256);
    }

    #[test]
    fn examples() {
        let id = DenseMatrix::identity(4);
        assert_eq!(rip_bruteforce(&id, 3).unwrap().delta, 0.0);
        let dup = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let r = rip_bruteforce(&dup, 2).unwrap();
        assert!((r.delta - 1.0).abs() < 1e-12);
        let wide = DenseMatrix::zeros(10, 100);
        assert!(matches!(rip_bruteforce(&wide, 5), Err(Error::TooManySupports { .. })));
    }

    #[test]
    fn gaussian_order_scaling() {
        let a = rip_gaussian_order(100, 600, 20, 1.0).unwrap().delta;
        let b = rip_gaussian_order(400, 600, 20, 1.0).unwrap().delta;
        assert!((a / b - 2.0).abs() < 1e-12);
        let full = rip_gaussian_order(50, 200, 200, 2.0).unwrap().delta;
        assert!((full - 2.0 * (200.0f64 / 50.0).sqrt()).abs() < 1e-12);
        let seq: Vec<f64> = [100, 200, 300, 400].iter().map(|&m| rip_gaussian_order(m, 600, 20, 1.0).unwrap().delta).collect();
        assert!(seq.windows(2).all(|w| w[1] < w[0]));
    }
}
