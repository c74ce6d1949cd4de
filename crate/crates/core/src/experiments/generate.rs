use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{norm2, DenseMatrix, ProblemInstance, RealVector};

/// Random streams drawn for one trial. Each gets its own ChaCha20 stream
/// `(trial << 8) | component`, so trials are independent of scheduling.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Component {
    Matrix = 1,
    Signal = 2,
    PreNoise = 3,
    PostNoise = 4,
    Rows = 5,
}

pub fn stream_rng(seed: u64, trial: u64, component: Component) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream((trial << 8) | component as u64);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnsembleKind {
    Gaussian,
    PartialToeplitz,
    PartialCirculant,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntryLaw {
    Gaussian,
    Rademacher,
}

/// Entries are scaled by `1/sqrt(m)` so columns have unit norm on average.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixEnsemble {
    pub kind: EnsembleKind,
    #[serde(default = "default_law")]
    pub entry_law: EntryLaw,
    pub m: usize,
    pub n: usize,
}

fn default_law() -> EntryLaw {
    EntryLaw::Gaussian
}

impl MatrixEnsemble {
    pub fn gaussian(m: usize, n: usize) -> Self {
        Self { kind: EnsembleKind::Gaussian, entry_law: EntryLaw::Gaussian, m, n }
    }

    fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::InvalidInput("matrix dimensions must be positive".into()));
        }
        if self.kind != EnsembleKind::Gaussian && self.m > self.n {
            return Err(Error::InvalidInput(format!("cannot select {} rows from a {}-row structured matrix", self.m, self.n)));
        }
        Ok(())
    }
}

fn draw(rng: &mut ChaCha20Rng, law: EntryLaw) -> f64 {
    match law {
        EntryLaw::Gaussian => rng.sample(StandardNormal),
        EntryLaw::Rademacher => {
            if rng.random::<bool>() {
                1.0
            } else {
                -1.0
            }
        }
    }
}

/// Sorted row indices drawn uniformly without replacement.
fn select_rows(seed: u64, trial: u64, n: usize, m: usize) -> Vec<usize> {
    let mut rng = stream_rng(seed, trial, Component::Rows);
    let mut rows = sample(&mut rng, n, m).into_vec();
    rows.sort_unstable();
    rows
}

pub fn gen_matrix(ensemble: &MatrixEnsemble, seed: u64, trial: u64) -> Result<DenseMatrix> {
    ensemble.validate()?;
    let MatrixEnsemble { kind, entry_law, m, n } = *ensemble;
    let scale = 1.0 / (m as f64).sqrt();
    let mut rng = stream_rng(seed, trial, Component::Matrix);
    let matrix = match kind {
        EnsembleKind::Gaussian => {
            let entries: Vec<f64> = (0..m * n).map(|_| scale * draw(&mut rng, entry_law)).collect();
            DenseMatrix::from_row_major(m, n, entries)?
        }
        EnsembleKind::PartialToeplitz => {
            // T[i][j] = t[n − 1 + j − i]
            let t: Vec<f64> = (0..2 * n - 1).map(|_| scale * draw(&mut rng, entry_law)).collect();
            let rows = select_rows(seed, trial, n, m);
            DenseMatrix::from_fn(m, n, |r, j| t[n - 1 + j - rows[r]])
        }
        EnsembleKind::PartialCirculant => {
            // C[i][j] = c[(j − i) mod n]
            let c: Vec<f64> = (0..n).map(|_| scale * draw(&mut rng, entry_law)).collect();
            let rows = select_rows(seed, trial, n, m);
            DenseMatrix::from_fn(m, n, |r, j| c[(j + n - rows[r]) % n])
        }
    };
    Ok(matrix)
}

/// Nonzero magnitudes are uniform on `[low, high]` with a random sign.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MagnitudeLaw {
    pub low: f64,
    pub high: f64,
}

impl Default for MagnitudeLaw {
    fn default() -> Self {
        Self { low: 0.5, high: 1.5 }
    }
}

pub fn gen_sparse_signal(n: usize, s: usize, seed: u64, trial: u64, law: MagnitudeLaw) -> Result<RealVector> {
    if s > n {
        return Err(Error::InvalidInput(format!("sparsity {s} exceeds dimension {n}")));
    }
    if !(law.low.is_finite() && law.high.is_finite() && 0.0 < law.low && law.low <= law.high) {
        return Err(Error::InvalidInput(format!("magnitude range [{}, {}] is invalid", law.low, law.high)));
    }
    let mut rng = stream_rng(seed, trial, Component::Signal);
    let mut support = sample(&mut rng, n, s).into_vec();
    support.sort_unstable();
    let mut u = vec![0.0; n];
    for i in support {
        let mag = if law.high > law.low { rng.random_range(law.low..=law.high) } else { law.low };
        u[i] = if rng.random::<bool>() { mag } else { -mag };
    }
    RealVector::new(u)
}

/// Noise magnitudes relative to `‖u†‖`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub pre_level: f64,
    pub post_level: f64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self { pre_level: 0.1, post_level: 0.1 }
    }
}

fn scaled_direction(len: usize, target_norm: f64, rng: &mut ChaCha20Rng) -> Vec<f64> {
    if target_norm == 0.0 || len == 0 {
        return vec![0.0; len];
    }
    let g: Vec<f64> = (0..len).map(|_| rng.sample(StandardNormal)).collect();
    let factor = target_norm / norm2(&g);
    g.into_iter().map(|x| x * factor).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub ensemble: MatrixEnsemble,
    pub s: usize,
    #[serde(default)]
    pub magnitude: MagnitudeLaw,
    #[serde(default)]
    pub noise: NoiseSpec,
}

/// Draws `A`, `u†`, `v`, `ξ` and forms `y = A(u† + v) + ξ`.
pub fn make_problem(spec: &ProblemSpec, seed: u64, trial: u64) -> Result<ProblemInstance> {
    let NoiseSpec { pre_level, post_level } = spec.noise;
    for (name, x) in [("pre_level", pre_level), ("post_level", post_level)] {
        if !(x.is_finite() && x >= 0.0) {
            return Err(Error::InvalidParameter { name, reason: format!("must be finite and >= 0, got {x}") });
        }
    }
    let (m, n) = (spec.ensemble.m, spec.ensemble.n);
    let a = gen_matrix(&spec.ensemble, seed, trial)?;
    let u = gen_sparse_signal(n, spec.s, seed, trial, spec.magnitude)?;
    let scale = norm2(&u);
    let v = scaled_direction(n, pre_level * scale, &mut stream_rng(seed, trial, Component::PreNoise));
    let xi = scaled_direction(m, post_level * scale, &mut stream_rng(seed, trial, Component::PostNoise));
    let signal: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
    let mut y = a.mul_vec(&signal);
    for (yi, x) in y.iter_mut().zip(&xi) {
        *yi += x;
    }
    ProblemInstance::new(a, RealVector::new(y)?)?.with_components(u, RealVector::new(v)?, RealVector::new(xi)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_distinct_streams() {
        let e = MatrixEnsemble::gaussian(8, 12);
        let a = gen_matrix(&e, 7, 0).unwrap();
        assert_eq!(a, gen_matrix(&e, 7, 0).unwrap());
        assert_ne!(a, gen_matrix(&e, 7, 1).unwrap());
        assert_ne!(a, gen_matrix(&e, 8, 0).unwrap());
    }

    #[test]
    fn gaussian_variance() {
        let a = gen_matrix(&MatrixEnsemble::gaussian(200, 600), 1, 0).unwrap();
        let e = a.to_row_major();
        let mean = e.iter().sum::<f64>() / e.len() as f64;
        let var = e.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (e.len() - 1) as f64;
        assert!((var * 200.0 - 1.0).abs() < 0.05, "{var}");
    }

    #[test]
    fn structured_rows() {
        let n = 9;
        for law in [EntryLaw::Gaussian, EntryLaw::Rademacher] {
            let e = MatrixEnsemble { kind: EnsembleKind::PartialCirculant, entry_law: law, m: 4, n };
            let a = gen_matrix(&e, 3, 2).unwrap();
            let rows = select_rows(3, 2, n, 4);
            for r in 1..4 {
                let shift = rows[r] - rows[0];
                for j in 0..n {
                    assert_eq!(a.get(r, (j + shift) % n), a.get(0, j));
                }
            }
            let e = MatrixEnsemble { kind: EnsembleKind::PartialToeplitz, entry_law: law, m: 4, n };
            let t = gen_matrix(&e, 3, 2).unwrap();
            for r in 1..4 {
                let shift = rows[r] - rows[0];
                for j in 0..n - shift {
                    assert_eq!(t.get(r, j + shift), t.get(0, j));
                }
            }
        }
        let bad = MatrixEnsemble { kind: EnsembleKind::PartialToeplitz, entry_law: EntryLaw::Gaussian, m: 10, n: 5 };
        assert!(gen_matrix(&bad, 0, 0).is_err());
    }

    #[test]
    fn signals() {
        let law = MagnitudeLaw::default();
        assert!(gen_sparse_signal(10, 0, 1, 0, law).unwrap().iter().all(|&x| x == 0.0));
        assert!(gen_sparse_signal(10, 10, 1, 0, law).unwrap().iter().all(|&x| x.abs() >= 0.5));
        let u = gen_sparse_signal(600, 20, 5, 0, law).unwrap();
        assert_eq!(u.iter().filter(|&&x| x != 0.0).count(), 20);
        assert_eq!(u, gen_sparse_signal(600, 20, 5, 0, law).unwrap());
        assert!(gen_sparse_signal(3, 4, 1, 0, law).is_err());
    }

    #[test]
    fn noise_ratios_are_exact() {
        let spec = ProblemSpec { ensemble: MatrixEnsemble::gaussian(50, 120), s: 6, magnitude: MagnitudeLaw::default(), noise: NoiseSpec::default() };
        let p = make_problem(&spec, 11, 3).unwrap();
        let u = norm2(p.ground_truth.as_ref().unwrap());
        assert!((norm2(p.pre_noise.as_ref().unwrap()) / u - 0.1).abs() <= 1e-12);
        assert!((norm2(p.post_noise.as_ref().unwrap()) / u - 0.1).abs() <= 1e-12);
        assert!(p.consistency_residual().unwrap() <= 1e-12);
        let q = make_problem(&spec, 11, 3).unwrap();
        assert_eq!(p.observation, q.observation);

        let clean = ProblemSpec { noise: NoiseSpec { pre_level: 0.0, post_level: 0.0 }, ..spec };
        let p = make_problem(&clean, 11, 3).unwrap();
        assert_eq!(p.observation.to_vec(), p.matrix.mul_vec(p.ground_truth.as_ref().unwrap()));
    }
}
