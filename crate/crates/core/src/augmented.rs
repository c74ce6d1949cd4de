//! The augmented single-penalty reduction.
//!
//! Eliminating the dense component `v` from the multi-penalty objective
//! leaves an `ℓq` problem in `u` alone, with operator
//! `B_β = (I + AAᵀ/β)^(-1/2) A` and datum `y_β = (I + AAᵀ/β)^(-1/2) y`.
//! Both are formed from the left spectral factors of `A`.

use crate::error::{check_positive, Error, Result};
use crate::linalg::{spectral_norm, DenseMatrix, LeftSpectralFactors, RealVector};

#[derive(Clone, Debug)]
pub struct AugmentedOperator {
    pub b_matrix: DenseMatrix,
    pub y_beta: RealVector,
    pub beta: f64,
    pub spectrum: LeftSpectralFactors,
}

impl AugmentedOperator {
    /// `L = ‖B_βᵀB_β‖ = (‖A‖⁻² + β⁻¹)⁻¹`, read off the cached spectrum.
    pub fn lipschitz(&self) -> f64 {
        lipschitz_from_norm_sq(self.spectrum.spectral_norm_squared(), self.beta)
    }

    /// Residual of `(I + AAᵀ/β)^(1/2) B_β = A`.
    pub fn reconstruction_residual(&self, a: &DenseMatrix) -> f64 {
        let beta = self.beta;
        let back = self.spectrum.apply_function_to_matrix(&self.b_matrix, |s2| (1.0 + s2 / beta).sqrt());
        back.sub(a).frobenius_norm()
    }
}

fn lipschitz_from_norm_sq(norm_sq: f64, beta: f64) -> f64 {
    if norm_sq == 0.0 {
        0.0
    } else {
        1.0 / (1.0 / norm_sq + 1.0 / beta)
    }
}

pub fn build_augmented(a: &DenseMatrix, y: &[f64], beta: f64) -> Result<AugmentedOperator> {
    check_positive("beta", beta)?;
    if y.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!("y has length {}, A has {} rows", y.len(), a.rows())));
    }
    let spectrum = LeftSpectralFactors::compute(a)?;
    build_augmented_with(a, y, beta, spectrum)
}

/// Same as [`build_augmented`] but reuses previously computed factors of `A`.
pub fn build_augmented_with(
    a: &DenseMatrix,
    y: &[f64],
    beta: f64,
    spectrum: LeftSpectralFactors,
) -> Result<AugmentedOperator> {
    check_positive("beta", beta)?;
    if spectrum.dim() != a.rows() || y.len() != a.rows() {
        return Err(Error::DimensionMismatch("spectral factors, A and y disagree".into()));
    }
    let shrink = |s2: f64| 1.0 / (1.0 + s2 / beta).sqrt();
    let b_matrix = spectrum.apply_function_to_matrix(a, shrink);
    let y_beta = RealVector::new(spectrum.apply_function(y, shrink))?;
    Ok(AugmentedOperator { b_matrix, y_beta, beta, spectrum })
}

/// The minimizing `v` for fixed `u`: `(βI + AᵀA)⁻¹ Aᵀ(y − Au)`.
///
/// Evaluated as `Aᵀ (βI + AAᵀ)⁻¹ (y − Au)` through the left factors, so no
/// `n × n` system is ever formed.
#[derive(Clone, Debug)]
pub struct NoiseComponentMap<'a> {
    a: &'a DenseMatrix,
    spectrum: &'a LeftSpectralFactors,
    beta: f64,
}

impl<'a> NoiseComponentMap<'a> {
    pub fn new(a: &'a DenseMatrix, spectrum: &'a LeftSpectralFactors, beta: f64) -> Result<Self> {
        check_positive("beta", beta)?;
        Ok(Self { a, spectrum, beta })
    }

    /// `v` for a precomputed residual `r = y − Au`.
    pub fn from_residual(&self, residual: &[f64]) -> Vec<f64> {
        let beta = self.beta;
        let z = self.spectrum.apply_function(residual, |s2| 1.0 / (beta + s2));
        self.a.tr_mul_vec(&z)
    }

    pub fn apply(&self, y: &[f64], u: &[f64]) -> Vec<f64> {
        let au = self.a.mul_vec(u);
        let r: Vec<f64> = y.iter().zip(&au).map(|(a, b)| a - b).collect();
        self.from_residual(&r)
    }
}

pub fn v_of_u(a: &DenseMatrix, y: &[f64], u: &[f64], beta: f64) -> Result<Vec<f64>> {
    check_positive("beta", beta)?;
    let spectrum = LeftSpectralFactors::compute(a)?;
    Ok(NoiseComponentMap::new(a, &spectrum, beta)?.apply(y, u))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OperatorBounds {
    pub lipschitz: f64,
    pub lambda_min_lower: f64,
}

pub fn operator_bounds(a: &DenseMatrix, beta: f64, support: &[usize]) -> Result<OperatorBounds> {
    check_positive("beta", beta)?;
    let norm = spectral_norm(a)?;
    let lambda_min = crate::linalg::min_singular_on_support(a, support)?;
    Ok(OperatorBounds {
        lipschitz: lipschitz_from_norm_sq(norm * norm, beta),
        lambda_min_lower: lambda_min / (1.0 + norm * norm / beta),
    })
}

/// Largest normalized inner product between two distinct columns.
pub fn coherence(m: &DenseMatrix) -> Result<f64> {
    let n = m.cols();
    let cols: Vec<Vec<f64>> = (0..n).map(|j| m.column(j)).collect();
    let norms: Vec<f64> = cols.iter().map(|c| crate::linalg::norm2(c)).collect();
    if let Some(j) = norms.iter().position(|&x| x == 0.0) {
        return Err(Error::InvalidInput(format!("column {j} is zero")));
    }
    let gram = m.transpose().matmul(m);
    let mut best = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            best = best.max(gram.get(i, j).abs() / (norms[i] * norms[j]));
        }
    }
    Ok(best.min(1.0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoherenceReport {
    pub coh_a: f64,
    pub coh_b: f64,
    /// `(1 + c_β) coh(A) + c_β` with `c_β = ‖A‖²/β`.
    pub bound: f64,
    /// `(1 + c_β)(coh(A) + c_β)`, the looser product form.
    pub product_bound: f64,
    /// The smaller of the two bounds.
    pub upper_bound: f64,
    /// `coh((AAᵀ)^(-1/2) A)`, `None` when `A` is numerically rank deficient.
    pub whitened_limit: Option<f64>,
}

const RANK_CUTOFF: f64 = 1e-12;

pub fn coherence_report(a: &DenseMatrix, beta: f64) -> Result<CoherenceReport> {
    check_positive("beta", beta)?;
    let spectrum = LeftSpectralFactors::compute(a)?;
    coherence_report_with(a, beta, &spectrum)
}

pub fn coherence_report_with(a: &DenseMatrix, beta: f64, spectrum: &LeftSpectralFactors) -> Result<CoherenceReport> {
    let coh_a = coherence(a)?;
    let shrink = |s2: f64| 1.0 / (1.0 + s2 / beta).sqrt();
    let coh_b = coherence(&spectrum.apply_function_to_matrix(a, shrink))?;
    let c = spectrum.spectral_norm_squared() / beta;
    let bound = (1.0 + c) * coh_a + c;
    let product_bound = (1.0 + c) * (coh_a + c);

    let s_max = spectrum.spectral_norm_squared().sqrt();
    let s_min = spectrum.squared_singular_values.last().copied().unwrap_or(0.0).sqrt();
    let whitened_limit = if a.rows() <= a.cols() && s_min > RANK_CUTOFF * s_max {
        Some(coherence(&spectrum.apply_function_to_matrix(a, |s2| 1.0 / s2.sqrt()))?)
    } else {
        None
    };
    Ok(CoherenceReport {
        coh_a,
        coh_b,
        bound,
        product_bound,
        upper_bound: bound.min(product_bound),
        whitened_limit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{compute_svd, norm2};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(m: usize, n: usize, seed: u64) -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DenseMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn identity_example() {
        let aug = build_augmented(&DenseMatrix::identity(2), &[2.0, 0.0], 1.0).unwrap();
        let r = 0.5f64.sqrt();
        for i in 0..2 {
            for j in 0..2 {
                let expected = if i == j { r } else { 0.0 };
                assert!((aug.b_matrix.get(i, j) - expected).abs() < 1e-15);
            }
        }
        assert!((aug.y_beta[0] - 2.0f64.sqrt()).abs() < 1e-15);
        assert!(aug.y_beta[1].abs() < 1e-15);
        assert!((aug.lipschitz() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn large_beta_recovers_a() {
        let a = random_matrix(4, 7, 1);
        let y = [1.0, -2.0, 0.5, 3.0];
        let aug = build_augmented(&a, &y, 1e12).unwrap();
        assert!(aug.b_matrix.sub(&a).frobenius_norm() <= 1e-5);
        assert!(crate::linalg::dist2(&aug.y_beta, &y) <= 1e-5);
    }

    #[test]
    fn reconstruction_and_lipschitz() {
        let a = random_matrix(6, 10, 2);
        let aug = build_augmented(&a, &[0.0; 6], 0.7).unwrap();
        assert!(aug.reconstruction_residual(&a) <= 1e-9 * (1.0 + spectral_norm(&a).unwrap()));
        let btb = aug.b_matrix.transpose().matmul(&aug.b_matrix);
        let expected = 1.0 / (spectral_norm(&a).unwrap().powi(-2) + 1.0 / 0.7);
        assert!((spectral_norm(&btb).unwrap() - expected).abs() <= 1e-9 * expected);
    }

    #[test]
    fn rejects_bad_beta() {
        assert!(build_augmented(&DenseMatrix::identity(2), &[0.0, 0.0], 0.0).is_err());
        assert!(build_augmented(&DenseMatrix::identity(2), &[0.0, 0.0], -1.0).is_err());
    }

    #[test]
    fn v_of_u_cases() {
        let a0 = DenseMatrix::zeros(3, 5);
        assert_eq!(v_of_u(&a0, &[1.0, 2.0, 3.0], &[0.0; 5], 1.0).unwrap(), vec![0.0; 5]);

        let a = random_matrix(5, 9, 4);
        let u: Vec<f64> = (0..9).map(|i| (i as f64 * 0.37).sin()).collect();
        let y = a.mul_vec(&u);
        assert!(norm2(&v_of_u(&a, &y, &u, 0.3).unwrap()) < 1e-12);

        // βv = Aᵀ(y − Au) − AᵀAv
        let y: Vec<f64> = (0..5).map(|i| i as f64 - 2.0).collect();
        let beta = 0.3;
        let v = v_of_u(&a, &y, &u, beta).unwrap();
        let au = a.mul_vec(&u);
        let r: Vec<f64> = y.iter().zip(&au).map(|(p, q)| p - q).collect();
        let rhs: Vec<f64> = a.tr_mul_vec(&r).iter().zip(a.tr_mul_vec(&a.mul_vec(&v))).map(|(p, q)| p - q).collect();
        let lhs: Vec<f64> = v.iter().map(|x| beta * x).collect();
        assert!(crate::linalg::dist2(&lhs, &rhs) <= 1e-10 * (1.0 + norm2(&rhs)));
    }

    #[test]
    fn bounds_examples() {
        let b = operator_bounds(&DenseMatrix::identity(3), 1.0, &[0, 1]).unwrap();
        assert!((b.lipschitz - 0.5).abs() < 1e-15);
        assert!((b.lambda_min_lower - 0.5).abs() < 1e-14);

        let two = DenseMatrix::diagonal(2, 3, &[2.0, 1.0]);
        let b = operator_bounds(&two, 4.0, &[0]).unwrap();
        assert!((b.lipschitz - 2.0).abs() < 1e-14);
        let aug = build_augmented(&two, &[0.0, 0.0], 4.0).unwrap();
        let btb = aug.b_matrix.transpose().matmul(&aug.b_matrix);
        assert!((spectral_norm(&btb).unwrap() - 2.0).abs() < 1e-12);

        let unit = DenseMatrix::diagonal(2, 2, &[1.0, 0.5]);
        assert!((operator_bounds(&unit, 1e15, &[0]).unwrap().lipschitz - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coherence_cases() {
        assert_eq!(coherence(&DenseMatrix::identity(4)).unwrap(), 0.0);
        let dup = DenseMatrix::from_rows(&[vec![1.0, 1.0, 0.0], vec![2.0, 2.0, 1.0]]).unwrap();
        assert!((coherence(&dup).unwrap() - 1.0).abs() < 1e-15);
        let zero_col = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![2.0, 0.0]]).unwrap();
        assert!(coherence(&zero_col).is_err());

        let a = random_matrix(5, 8, 6);
        let mut brute = 0.0f64;
        for i in 0..8 {
            for j in 0..8 {
                if i != j {
                    let (ci, cj) = (a.column(i), a.column(j));
                    let c: f64 = ci.iter().zip(&cj).map(|(x, y)| x * y).sum();
                    brute = brute.max(c.abs() / (norm2(&ci) * norm2(&cj)));
                }
            }
        }
        assert!((coherence(&a).unwrap() - brute).abs() < 1e-14);
    }

    #[test]
    fn coherence_report_limits() {
        let a = random_matrix(8, 16, 12);
        let big = coherence_report(&a, 1e12).unwrap();
        assert!((big.coh_b - big.coh_a).abs() <= 1e-4);
        assert!(big.coh_b <= big.upper_bound + 1e-9);

        let s_min = *compute_svd(&a).unwrap().singular_values.last().unwrap();
        let small = coherence_report(&a, 1e-8 * s_min * s_min).unwrap();
        assert!((small.coh_b - small.whitened_limit.unwrap()).abs() <= 1e-3);

        let rank_deficient = DenseMatrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0]]).unwrap();
        assert_eq!(coherence_report(&rank_deficient, 1.0).unwrap().whitened_limit, None);
    }

    #[test]
    fn orthogonal_rows_whitened() {
        // Rows orthogonal with different scales: whitening rescales them.
        let q = compute_svd(&random_matrix(6, 6, 8)).unwrap().left_basis;
        let a = DenseMatrix::from_fn(3, 6, |i, j| (i as f64 + 1.0) * q.get(i, j));
        let rep = coherence_report(&a, 0.5).unwrap();
        let expected = coherence(&q.select_rows(&[0, 1, 2])).unwrap();
        assert!((rep.whitened_limit.unwrap() - expected).abs() < 1e-10);
        assert!(rep.coh_b <= rep.upper_bound + 1e-9);
    }
}
