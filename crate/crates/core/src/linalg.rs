//! Dense linear-algebra substrate and the noise-folding problem model.
//!
//! Matrices are dense and backed by `faer`; decompositions are computed on
//! demand and meant to be cached by callers that need them repeatedly.

use faer::linalg::matmul::matmul;
use faer::{Accum, ColMut, ColRef, Mat, MatRef, Par, Side};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense real matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    inner: Mat<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from entries listed row by row.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if let Some(pos) = entries.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite entry at ({}, {})",
                pos / cols.max(1),
                pos % cols.max(1)
            )));
        }
        Ok(Self { inner: Mat::from_fn(rows, cols, |i, j| entries[i * cols + j]) })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::from_row_major(rows.len(), cols, rows.concat())
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> f64) -> Self {
        Self { inner: Mat::from_fn(rows, cols, f) }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { inner: Mat::zeros(rows, cols) }
    }

    pub fn identity(n: usize) -> Self {
        Self { inner: Mat::identity(n, n) }
    }

    pub fn diagonal(rows: usize, cols: usize, diag: &[f64]) -> Self {
        Self::from_fn(rows, cols, |i, j| if i == j && i < diag.len() { diag[i] } else { 0.0 })
    }

    pub(crate) fn from_mat(inner: Mat<f64>) -> Self {
        Self { inner }
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner[(i, j)]
    }

    pub fn as_mat(&self) -> MatRef<'_, f64> {
        self.inner.as_ref()
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            out.extend((0..self.cols()).map(|j| self.inner[(i, j)]));
        }
        out
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows()).map(|i| (0..self.cols()).map(|j| self.inner[(i, j)]).collect()).collect()
    }

    pub fn is_finite(&self) -> bool {
        (0..self.cols()).all(|j| self.inner.col(j).iter().all(|x| x.is_finite()))
    }

    pub fn transpose(&self) -> DenseMatrix {
        Self { inner: self.inner.transpose().to_owned() }
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.inner.col(j).iter().copied().collect()
    }

    pub fn select_columns(&self, idx: &[usize]) -> DenseMatrix {
        Self::from_fn(self.rows(), idx.len(), |i, k| self.inner[(i, idx[k])])
    }

    pub fn select_rows(&self, idx: &[usize]) -> DenseMatrix {
        Self::from_fn(idx.len(), self.cols(), |k, j| self.inner[(idx[k], j)])
    }

    pub fn matmul(&self, rhs: &DenseMatrix) -> DenseMatrix {
        Self { inner: &self.inner * &rhs.inner }
    }

    pub fn sub(&self, rhs: &DenseMatrix) -> DenseMatrix {
        Self { inner: &self.inner - &rhs.inner }
    }

    pub fn scale(&self, factor: f64) -> DenseMatrix {
        Self::from_fn(self.rows(), self.cols(), |i, j| factor * self.inner[(i, j)])
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.norm_l2()
    }

    /// `A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows()];
        self.mul_vec_into(x, &mut out);
        out
    }

    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.cols(), "mul_vec: operand length");
        assert_eq!(out.len(), self.rows(), "mul_vec: output length");
        matmul(
            ColMut::from_slice_mut(out).as_mat_mut(),
            Accum::Replace,
            self.inner.as_ref(),
            ColRef::from_slice(x).as_mat(),
            1.0,
            Par::Seq,
        );
    }

    /// `Aᵀ r`.
    pub fn tr_mul_vec(&self, r: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols()];
        self.tr_mul_vec_into(r, &mut out);
        out
    }

    pub fn tr_mul_vec_into(&self, r: &[f64], out: &mut [f64]) {
        assert_eq!(r.len(), self.rows(), "tr_mul_vec: operand length");
        assert_eq!(out.len(), self.cols(), "tr_mul_vec: output length");
        matmul(
            ColMut::from_slice_mut(out).as_mat_mut(),
            Accum::Replace,
            self.inner.transpose(),
            ColRef::from_slice(r).as_mat(),
            1.0,
            Par::Seq,
        );
    }
}

/// Dense real vector with finite entries.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RealVector(Vec<f64>);

impl RealVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if let Some(i) = entries.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite vector entry at {i}")));
        }
        Ok(Self(entries))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl std::ops::Deref for RealVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for RealVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dist2(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Indices of nonzero entries.
pub fn support(x: &[f64]) -> Vec<usize> {
    x.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, _)| i).collect()
}

/// Full singular value decomposition `A = U Σ Vᵀ` with square orthogonal
/// bases. `singular_values` has length `min(m, n)` and is nonincreasing.
#[derive(Clone, Debug)]
pub struct SvdFactors {
    pub left_basis: DenseMatrix,
    pub singular_values: Vec<f64>,
    pub right_basis: DenseMatrix,
}

impl SvdFactors {
    pub fn reconstruct(&self) -> DenseMatrix {
        let (m, n) = (self.left_basis.rows(), self.right_basis.rows());
        let sigma = DenseMatrix::diagonal(m, n, &self.singular_values);
        self.left_basis.matmul(&sigma).matmul(&self.right_basis.transpose())
    }
}

fn check_nonempty_finite(matrix: &DenseMatrix) -> Result<()> {
    if matrix.rows() == 0 || matrix.cols() == 0 {
        return Err(Error::InvalidInput("empty matrix".into()));
    }
    if !matrix.is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    Ok(())
}

pub fn compute_svd(matrix: &DenseMatrix) -> Result<SvdFactors> {
    check_nonempty_finite(matrix)?;
    let svd = matrix.inner.svd().map_err(|e| Error::Decomposition(format!("{e:?}")))?;
    let s = svd.S().column_vector();
    let r = s.nrows();
    let mut order: Vec<usize> = (0..r).collect();
    // faer already sorts, but the contract is ours to keep.
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    let singular_values: Vec<f64> = order.iter().map(|&k| s[k].max(0.0)).collect();
    let (u, v) = (svd.U(), svd.V());
    let permute = |basis: MatRef<'_, f64>| {
        Mat::from_fn(basis.nrows(), basis.ncols(), |i, j| {
            if j < r {
                basis[(i, order[j])]
            } else {
                basis[(i, j)]
            }
        })
    };
    Ok(SvdFactors {
        left_basis: DenseMatrix::from_mat(permute(u)),
        singular_values,
        right_basis: DenseMatrix::from_mat(permute(v)),
    })
}

/// Largest singular value.
pub fn spectral_norm(matrix: &DenseMatrix) -> Result<f64> {
    if matrix.rows() == 0 || matrix.cols() == 0 {
        return Ok(0.0);
    }
    if !matrix.is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let s = matrix.inner.singular_values().map_err(|e| Error::Decomposition(format!("{e:?}")))?;
    Ok(s.into_iter().fold(0.0, f64::max))
}

/// Eigenvalues of a symmetric matrix in nondecreasing order.
pub(crate) fn symmetric_eigenvalues(matrix: MatRef<'_, f64>) -> Result<Vec<f64>> {
    let mut ev = matrix
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Decomposition(format!("{e:?}")))?;
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Smallest eigenvalue of `A_Iᵀ A_I` for the column submatrix `A_I`.
pub fn min_singular_on_support(matrix: &DenseMatrix, support: &[usize]) -> Result<f64> {
    if support.is_empty() {
        return Err(Error::InvalidInput("empty support".into()));
    }
    if let Some(&bad) = support.iter().find(|&&j| j >= matrix.cols()) {
        return Err(Error::InvalidInput(format!("column index {bad} out of range")));
    }
    let sub = matrix.select_columns(support);
    let gram = sub.inner.transpose() * &sub.inner;
    let ev = symmetric_eigenvalues(gram.as_ref())?;
    Ok(ev[0].max(0.0))
}

/// Left singular factors of `A` obtained from the eigendecomposition of the
/// `m × m` Gram matrix `A Aᵀ`: an orthogonal `U` and the squared singular
/// values padded with zeros to length `m`, both in nonincreasing order.
///
/// This is the `O(m²n + m³)` precomputation behind every operator of the
/// form `f(A Aᵀ)`.
#[derive(Clone, Debug)]
pub struct LeftSpectralFactors {
    pub basis: DenseMatrix,
    pub squared_singular_values: Vec<f64>,
}

impl LeftSpectralFactors {
    pub fn compute(matrix: &DenseMatrix) -> Result<Self> {
        check_nonempty_finite(matrix)?;
        let gram = &matrix.inner * matrix.inner.transpose();
        let evd = gram.self_adjoint_eigen(Side::Lower).map_err(|e| Error::Decomposition(format!("{e:?}")))?;
        let s = evd.S().column_vector();
        let m = s.nrows();
        // faer returns eigenvalues in nondecreasing order.
        let order: Vec<usize> = (0..m).rev().collect();
        let u = evd.U();
        Ok(Self {
            basis: DenseMatrix::from_fn(m, m, |i, j| u[(i, order[j])]),
            squared_singular_values: order.iter().map(|&k| s[k].max(0.0)).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.squared_singular_values.len()
    }

    /// `U diag(f(σ²)) Uᵀ x`.
    pub fn apply_function(&self, x: &[f64], f: impl Fn(f64) -> f64) -> Vec<f64> {
        let mut coeffs = self.basis.tr_mul_vec(x);
        for (c, &s2) in coeffs.iter_mut().zip(&self.squared_singular_values) {
            *c *= f(s2);
        }
        self.basis.mul_vec(&coeffs)
    }

    /// `U diag(f(σ²)) Uᵀ M`.
    pub fn apply_function_to_matrix(&self, rhs: &DenseMatrix, f: impl Fn(f64) -> f64) -> DenseMatrix {
        let mut coeffs = self.basis.inner.transpose() * &rhs.inner;
        for (i, &s2) in self.squared_singular_values.iter().enumerate() {
            let w = f(s2);
            for j in 0..coeffs.ncols() {
                coeffs[(i, j)] *= w;
            }
        }
        DenseMatrix::from_mat(&self.basis.inner * &coeffs)
    }

    pub fn spectral_norm_squared(&self) -> f64 {
        self.squared_singular_values.first().copied().unwrap_or(0.0)
    }
}

/// Noise-folding measurement model `y = A(u† + v) + ξ`.
#[derive(Clone, Debug)]
pub struct ProblemInstance {
    pub matrix: DenseMatrix,
    pub observation: RealVector,
    pub ground_truth: Option<RealVector>,
    pub pre_noise: Option<RealVector>,
    pub post_noise: Option<RealVector>,
}

impl ProblemInstance {
    pub fn new(matrix: DenseMatrix, observation: RealVector) -> Result<Self> {
        if observation.len() != matrix.rows() {
            return Err(Error::DimensionMismatch(format!(
                "observation has length {}, matrix has {} rows",
                observation.len(),
                matrix.rows()
            )));
        }
        Ok(Self { matrix, observation, ground_truth: None, pre_noise: None, post_noise: None })
    }

    /// Attaches the generating components and checks they reproduce `y`.
    pub fn with_components(
        mut self,
        ground_truth: RealVector,
        pre_noise: RealVector,
        post_noise: RealVector,
    ) -> Result<Self> {
        let (m, n) = (self.matrix.rows(), self.matrix.cols());
        if ground_truth.len() != n || pre_noise.len() != n || post_noise.len() != m {
            return Err(Error::DimensionMismatch("component lengths do not match the matrix".into()));
        }
        self.ground_truth = Some(ground_truth);
        self.pre_noise = Some(pre_noise);
        self.post_noise = Some(post_noise);
        let residual = self.consistency_residual().unwrap_or(0.0);
        if residual > 1e-12 * (1.0 + norm2(&self.observation)) {
            return Err(Error::InvalidInput(format!("components do not reproduce y (residual {residual:e})")));
        }
        Ok(self)
    }

    /// `‖A(u† + v) + ξ − y‖` when all components are present.
    pub fn consistency_residual(&self) -> Option<f64> {
        let (u, v, xi) = (self.ground_truth.as_ref()?, self.pre_noise.as_ref()?, self.post_noise.as_ref()?);
        let signal: Vec<f64> = u.iter().zip(v.iter()).map(|(a, b)| a + b).collect();
        let mut pred = self.matrix.mul_vec(&signal);
        for (p, x) in pred.iter_mut().zip(xi.iter()) {
            *p += x;
        }
        Some(dist2(&pred, &self.observation))
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.matrix.rows(), self.matrix.cols())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(m: usize, n: usize, seed: u64) -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DenseMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0))
    }

    fn orthogonality_defect(q: &DenseMatrix) -> f64 {
        let g = q.transpose().matmul(q);
        spectral_norm(&g.sub(&DenseMatrix::identity(g.rows()))).unwrap()
    }

    #[test]
    fn svd_identity_and_diagonal() {
        let f = compute_svd(&DenseMatrix::identity(3)).unwrap();
        assert_eq!(f.singular_values, vec![1.0, 1.0, 1.0]);
        assert!(f.reconstruct().sub(&DenseMatrix::identity(3)).frobenius_norm() < 1e-14);

        let d = DenseMatrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let f = compute_svd(&d).unwrap();
        assert!((f.singular_values[0] - 2.0).abs() < 1e-15);
        assert!(f.singular_values[1].abs() < 1e-15);
    }

    #[test]
    fn svd_reconstructs_random_wide_matrix() {
        let a = random_matrix(5, 8, 3);
        let f = compute_svd(&a).unwrap();
        assert_eq!(f.left_basis.rows(), 5);
        assert_eq!(f.right_basis.rows(), 8);
        assert!(f.reconstruct().sub(&a).frobenius_norm() <= 1e-10);
        assert!(orthogonality_defect(&f.left_basis) <= 1e-10);
        assert!(orthogonality_defect(&f.right_basis) <= 1e-10);
        assert!(f.singular_values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn svd_rejects_non_finite() {
        assert!(DenseMatrix::from_row_major(1, 2, vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn spectral_norm_cases() {
        assert_eq!(spectral_norm(&DenseMatrix::zeros(3, 4)).unwrap(), 0.0);
        let d = DenseMatrix::diagonal(2, 2, &[3.0, 1.0]);
        assert!((spectral_norm(&d).unwrap() - 3.0).abs() < 1e-14);
        let a = random_matrix(4, 6, 11);
        let s = compute_svd(&a).unwrap().singular_values[0];
        assert!((spectral_norm(&a).unwrap() - s).abs() <= 1e-12);
    }

    #[test]
    fn min_singular_cases() {
        let q = compute_svd(&random_matrix(6, 6, 5)).unwrap().left_basis;
        assert!((min_singular_on_support(&q, &[0, 2, 5]).unwrap() - 1.0).abs() < 1e-12);

        let dup = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(min_singular_on_support(&dup, &[0, 1]).unwrap().abs() < 1e-14);
        assert!(min_singular_on_support(&dup, &[]).is_err());

        // Oracle: squared smallest singular value of the column submatrix.
        let a = random_matrix(10, 20, 9);
        let idx = [1, 7, 13];
        let sv = compute_svd(&a.select_columns(&idx)).unwrap().singular_values;
        let expected = sv.last().unwrap().powi(2);
        assert!((min_singular_on_support(&a, &idx).unwrap() - expected).abs() <= 1e-10);
    }

    #[test]
    fn left_factors_match_svd() {
        for (m, n) in [(5, 9), (9, 5)] {
            let a = random_matrix(m, n, 21);
            let left = LeftSpectralFactors::compute(&a).unwrap();
            let svd = compute_svd(&a).unwrap();
            for (k, s) in svd.singular_values.iter().enumerate() {
                assert!((left.squared_singular_values[k] - s * s).abs() < 1e-12);
            }
            assert!(orthogonality_defect(&left.basis) < 1e-12);
            // U diag(1) Uᵀ A = A
            let back = left.apply_function_to_matrix(&a, |_| 1.0);
            assert!(back.sub(&a).frobenius_norm() < 1e-12);
        }
    }

    #[test]
    fn operator_norm_bounds_matvec() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for seed in 0..20 {
            let a = random_matrix(7, 12, seed);
            let x: Vec<f64> = (0..12).map(|_| rng.random_range(-1.0..1.0)).collect();
            let lhs = norm2(&a.mul_vec(&x));
            assert!(lhs <= spectral_norm(&a).unwrap() * norm2(&x) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn problem_consistency() {
        let a = random_matrix(3, 4, 2);
        let u = vec![1.0, 0.0, -1.0, 0.0];
        let v = vec![0.1, 0.0, 0.0, -0.1];
        let xi = vec![0.01, -0.02, 0.0];
        let mut y = a.mul_vec(&[1.1, 0.0, -1.0, -0.1]);
        y.iter_mut().zip(&xi).for_each(|(a, b)| *a += b);
        let p = ProblemInstance::new(a, RealVector::new(y).unwrap())
            .unwrap()
            .with_components(RealVector::new(u).unwrap(), RealVector::new(v).unwrap(), RealVector::new(xi.clone()).unwrap())
            .unwrap();
        assert!(p.consistency_residual().unwrap() < 1e-14);
        let bad = ProblemInstance::new(p.matrix.clone(), RealVector::zeros(3)).unwrap().with_components(
            RealVector::zeros(4),
            RealVector::zeros(4),
            RealVector::new(xi).unwrap(),
        );
        assert!(bad.is_err());
    }
}
