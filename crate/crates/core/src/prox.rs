//! Proximal operators of the `ℓq` penalty (`0 < q ≤ 1`) and of its infimal
//! convolution with a quadratic.
//!
//! For `q < 1` the scalar map
//!
//! ```text
//! prox(u) = argmin_z (1/(2μ)) (z - u)² + ν |z|^q
//! ```
//!
//! is a thresholding operator: it returns zero for `|u| ≤ τ` and jumps to a
//! value of magnitude at least `λ` beyond the threshold. The nonzero branch
//! is the larger root of `z + νμq z^(q-1) = |u|`, found by safeguarded Newton
//! iteration. For `q = 1` it is soft thresholding at `μν`.

use serde::{Deserialize, Serialize};

use crate::error::{check_exponent, check_positive, Error, Result};

const ROOT_REL_TOL: f64 = 1e-13;
const ROOT_MAX_ITERS: usize = 200;

/// Exponent, weight and step of the scalar `ℓq` prox.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProxParams {
    pub q: f64,
    pub nu: f64,
    pub mu: f64,
}

impl ProxParams {
    pub fn new(q: f64, nu: f64, mu: f64) -> Result<Self> {
        check_exponent(q)?;
        check_positive("nu", nu)?;
        check_positive("mu", mu)?;
        Ok(Self { q, nu, mu })
    }
}

/// Jump threshold `tau` and range gap `lambda_gap` of the thresholding map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdProfile {
    pub tau: f64,
    pub lambda_gap: f64,
}

/// `ν |·|^q` without a step size; the function whose Moreau envelope is taken.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LqPenalty {
    pub q: f64,
    pub nu: f64,
}

impl LqPenalty {
    pub fn new(q: f64, nu: f64) -> Result<Self> {
        check_exponent(q)?;
        check_positive("nu", nu)?;
        Ok(Self { q, nu })
    }

    pub fn with_step(self, mu: f64) -> Result<ProxParams> {
        ProxParams::new(self.q, self.nu, mu)
    }
}

/// Parameters of `g(w) = inf_u (α/q)‖u‖_q^q + (β/2)‖w − u‖²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfConvPenaltyParams {
    pub alpha: f64,
    pub beta: f64,
    pub q: f64,
}

impl InfConvPenaltyParams {
    pub fn new(alpha: f64, beta: f64, q: f64) -> Result<Self> {
        check_positive("alpha", alpha)?;
        check_positive("beta", beta)?;
        check_exponent(q)?;
        Ok(Self { alpha, beta, q })
    }

    /// The `ℓq` part `(α/q)|·|^q`.
    pub fn lq_part(&self) -> LqPenalty {
        LqPenalty { q: self.q, nu: self.alpha / self.q }
    }
}

pub fn threshold_profile(params: &ProxParams) -> ThresholdProfile {
    let ProxParams { q, nu, mu } = *params;
    if q >= 1.0 {
        return ThresholdProfile { tau: mu * nu, lambda_gap: 0.0 };
    }
    let lambda_gap = (2.0 * mu * nu * (1.0 - q)).powf(1.0 / (2.0 - q));
    ThresholdProfile { tau: (2.0 - q) / (2.0 - 2.0 * q) * lambda_gap, lambda_gap }
}

/// Scalar `ℓq` prox with its threshold profile precomputed.
#[derive(Clone, Copy, Debug)]
pub struct LqProx {
    params: ProxParams,
    profile: ThresholdProfile,
}

impl LqProx {
    pub fn new(params: ProxParams) -> Self {
        Self { params, profile: threshold_profile(&params) }
    }

    pub fn params(&self) -> &ProxParams {
        &self.params
    }

    pub fn profile(&self) -> &ThresholdProfile {
        &self.profile
    }

    pub fn apply(&self, u: f64) -> Result<f64> {
        let a = u.abs();
        if self.params.q >= 1.0 {
            return Ok(u.signum() * (a - self.profile.tau).max(0.0));
        }
        // Ties at the threshold map to zero.
        if a <= self.profile.tau {
            return Ok(0.0);
        }
        let z = self.branch_root(a)?;
        Ok(u.signum() * z)
    }

    pub fn apply_into(&self, input: &[f64], out: &mut [f64]) -> Result<()> {
        for (o, &x) in out.iter_mut().zip(input) {
            *o = self.apply(x)?;
        }
        Ok(())
    }

    pub fn apply_vec(&self, input: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; input.len()];
        self.apply_into(input, &mut out)?;
        Ok(out)
    }

    /// Larger root of `h(z) = z + c z^(q-1) - a` on `[λ, a]` for `a > τ`.
    ///
    /// `h` is convex and increasing on `[λ, ∞)` with `h(λ) = τ - a < 0` and
    /// `h(a) > 0`, so Newton started at `a` decreases monotonically onto the
    /// root; the bracket only guards against rounding.
    fn branch_root(&self, a: f64) -> Result<f64> {
        let ProxParams { q, nu, mu } = self.params;
        let c = nu * mu * q;
        let h = |z: f64| z + c * z.powf(q - 1.0) - a;
        let dh = |z: f64| 1.0 + c * (q - 1.0) * z.powf(q - 2.0);
        let (mut lo, mut hi) = (self.profile.lambda_gap, a);
        let mut z = hi;
        for _ in 0..ROOT_MAX_ITERS {
            let hz = h(z);
            if hz > 0.0 {
                hi = z;
            } else {
                lo = z;
            }
            if hz == 0.0 {
                return Ok(z);
            }
            let slope = dh(z);
            let mut next = z - hz / slope;
            if !(slope > 0.0) || !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - z).abs() <= ROOT_REL_TOL * next.abs() {
                return Ok(next);
            }
            z = next;
        }
        Err(Error::Internal(format!(
            "lq prox root finder did not converge: a={a:e}, q={q}, nu={nu:e}, mu={mu:e}, bracket=[{lo:e}, {hi:e}]"
        )))
    }
}

pub fn prox_lq_scalar(u: f64, params: &ProxParams) -> Result<f64> {
    LqProx::new(*params).apply(u)
}

pub fn prox_lq_vector(u: &[f64], params: &ProxParams) -> Result<Vec<f64>> {
    LqProx::new(*params).apply_vec(u)
}

/// Closed-form half thresholding, valid only for `q = 1/2`.
///
/// Uses the trigonometric root of the depressed cubic in `√z`.
pub fn prox_half_closed_form(u: f64, params: &ProxParams) -> Result<f64> {
    if params.q != 0.5 {
        return Err(Error::InvalidParameter { name: "q", reason: "closed form requires q = 1/2".into() });
    }
    let a = u.abs();
    let tau = threshold_profile(params).tau;
    if a <= tau {
        return Ok(0.0);
    }
    let weight = 2.0 * params.mu * params.nu;
    let phi = ((weight / 8.0) * (a / 3.0).powf(-1.5)).clamp(-1.0, 1.0).acos();
    let z = 2.0 / 3.0 * a * (1.0 + (2.0 * std::f64::consts::PI / 3.0 - 2.0 * phi / 3.0).cos());
    Ok(u.signum() * z)
}

/// `Σ |x_i|^q`.
pub fn lq_quasi_norm_pow(x: &[f64], q: f64) -> f64 {
    if q >= 1.0 {
        x.iter().map(|v| v.abs()).sum()
    } else {
        x.iter().filter(|v| **v != 0.0).map(|v| v.abs().powf(q)).sum()
    }
}

/// Prox with step `mu` of `lambda · M_{t,f}` where `M_{t,f}` is the Moreau
/// envelope of `f = ν|·|^q` with parameter `t`:
///
/// `t/(t+μλ) · x + μλ/(t+μλ) · prox_{t+μλ, f}(x)`.
pub fn prox_moreau(x: &[f64], t: f64, f: LqPenalty, mu: f64, lambda: f64) -> Result<Vec<f64>> {
    check_positive("t", t)?;
    check_positive("mu", mu)?;
    check_positive("lambda", lambda)?;
    let s = t + mu * lambda;
    let inner = LqProx::new(f.with_step(s)?);
    let (keep, mix) = (t / s, mu * lambda / s);
    x.iter().map(|&xi| Ok(keep * xi + mix * inner.apply(xi)?)).collect()
}

/// Prox with step `mu` of the infimal-convolution penalty `g`.
#[derive(Clone, Copy, Debug)]
pub struct InfConvProx {
    inner: LqProx,
    keep: f64,
    mix: f64,
}

impl InfConvProx {
    pub fn new(pen: &InfConvPenaltyParams, mu: f64) -> Result<Self> {
        check_positive("mu", mu)?;
        // g is the Moreau envelope of (α/q)‖·‖_q^q with t = 1/β.
        let t = 1.0 / pen.beta;
        let s = t + mu;
        Ok(Self { inner: LqProx::new(pen.lq_part().with_step(s)?), keep: t / s, mix: mu / s })
    }

    pub fn apply_into(&self, input: &[f64], out: &mut [f64]) -> Result<()> {
        for (o, &x) in out.iter_mut().zip(input) {
            *o = self.keep * x + self.mix * self.inner.apply(x)?;
        }
        Ok(())
    }
}

pub fn prox_infconv_g(w: &[f64], pen: &InfConvPenaltyParams, mu: f64) -> Result<Vec<f64>> {
    let p = InfConvProx::new(pen, mu)?;
    let mut out = vec![0.0; w.len()];
    p.apply_into(w, &mut out)?;
    Ok(out)
}

/// The `u` attaining `g(w)`: the `ℓq` prox with step `1/β` and weight `α/q`.
pub fn infconv_argmin_prox(pen: &InfConvPenaltyParams) -> Result<LqProx> {
    Ok(LqProx::new(pen.lq_part().with_step(1.0 / pen.beta)?))
}

/// `(g(w), u)` with `u` the minimizer attaining the infimum.
pub fn infconv_value_and_argmin(w: &[f64], pen: &InfConvPenaltyParams) -> Result<(f64, Vec<f64>)> {
    let u = infconv_argmin_prox(pen)?.apply_vec(w)?;
    Ok((infconv_value_at(w, &u, pen), u))
}

pub(crate) fn infconv_value_at(w: &[f64], u: &[f64], pen: &InfConvPenaltyParams) -> f64 {
    let quad: f64 = w.iter().zip(u).map(|(a, b)| (a - b) * (a - b)).sum();
    pen.alpha / pen.q * lq_quasi_norm_pow(u, pen.q) + 0.5 * pen.beta * quad
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn objective(z: f64, u: f64, p: &ProxParams) -> f64 {
        (z - u).powi(2) / (2.0 * p.mu) + p.nu * z.abs().powf(p.q)
    }

    /// Dense scan followed by local zooming.
    fn grid_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
        let mut best = (f64::INFINITY, 0.0);
        for _ in 0..12 {
            let n = 2000;
            let h = (hi - lo) / n as f64;
            for k in 0..=n {
                let z = lo + k as f64 * h;
                let v = f(z);
                if v < best.0 {
                    best = (v, z);
                }
            }
            if f(0.0) <= best.0 {
                best = (f(0.0), 0.0);
            }
            lo = best.1 - 2.0 * h;
            hi = best.1 + 2.0 * h;
            if h < 1e-12 {
                break;
            }
        }
        best
    }

    #[test]
    fn profile_values() {
        let p = ProxParams::new(0.5, 1.0, 1.0).unwrap();
        let t = threshold_profile(&p);
        assert!((t.tau - 1.5).abs() < 1e-15);
        assert!((t.lambda_gap - 1.0).abs() < 1e-15);

        let p1 = ProxParams::new(1.0, 2.0, 0.5).unwrap();
        let t1 = threshold_profile(&p1);
        assert_eq!((t1.tau, t1.lambda_gap), (1.0, 0.0));

        let tiny = threshold_profile(&ProxParams::new(0.5, 1.0, 1e-12).unwrap());
        assert!(tiny.tau < 1e-7 && tiny.lambda_gap < 1e-7);
    }

    #[test]
    fn profile_tau_matches_jump_location() {
        // Locate the jump by bisection on "prox is zero" and compare with τ.
        let p = ProxParams::new(0.5, 1.0, 1.0).unwrap();
        let (mut lo, mut hi) = (1.0, 2.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            // Brute-force decision: is z = 0 a global minimizer?
            let (best, _) = grid_min(|z| objective(z, mid, &p), 0.0, 2.0 * mid);
            if objective(0.0, mid, &p) <= best + 1e-13 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((lo - 1.5).abs() < 1e-5, "jump located at {lo}");
    }

    #[test]
    fn scalar_examples() {
        let half = ProxParams::new(0.5, 1.0, 1.0).unwrap();
        assert_eq!(prox_lq_scalar(0.0, &half).unwrap(), 0.0);
        assert_eq!(prox_lq_scalar(1.4, &half).unwrap(), 0.0);
        assert_eq!(prox_lq_scalar(1.5, &half).unwrap(), 0.0);
        let soft = ProxParams::new(1.0, 1.0, 0.5).unwrap();
        assert_eq!(prox_lq_scalar(2.0, &soft).unwrap(), 1.5);

        let z = prox_lq_scalar(2.0, &half).unwrap();
        assert!(z >= 1.0);
        assert!((z + 0.5 * z.powf(-0.5) - 2.0).abs() < 1e-13);
        let (_, zg) = grid_min(|t| objective(t, 2.0, &half), -4.0, 4.0);
        assert!((z - zg).abs() < 1e-6);
    }

    #[test]
    fn vector_examples() {
        let half = ProxParams::new(0.5, 1.0, 1.0).unwrap();
        assert_eq!(prox_lq_vector(&[0.0; 4], &half).unwrap(), vec![0.0; 4]);
        let out = prox_lq_vector(&[1.4, 2.0], &half).unwrap();
        assert_eq!(out[0], 0.0);
        assert_eq!(out[1], prox_lq_scalar(2.0, &half).unwrap());
    }

    #[test]
    fn half_closed_form_agrees() {
        let p = ProxParams::new(0.5, 0.7, 1.3).unwrap();
        let f = LqProx::new(p);
        for k in 0..500 {
            let u = -6.0 + 12.0 * k as f64 / 499.0;
            let a = f.apply(u).unwrap();
            let b = prox_half_closed_form(u, &p).unwrap();
            assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()), "u={u}: {a} vs {b}");
        }
        assert!(prox_half_closed_form(1.0, &ProxParams::new(0.6, 1.0, 1.0).unwrap()).is_err());
    }

    #[test]
    fn moreau_examples() {
        let f = LqPenalty::new(1.0, 1.0).unwrap();
        assert_eq!(prox_moreau(&[0.0], 1.0, f, 1.0, 1.0).unwrap(), vec![0.0]);
        let x = [3.0, -0.5];
        let near = prox_moreau(&x, 1.0, f, 1.0, 1e-14).unwrap();
        assert!((near[0] - 3.0).abs() < 1e-12 && (near[1] + 0.5).abs() < 1e-12);
        // t = μ = λ = 1, f = |·|: ½·3 + ½·soft(3, 2) = 2.
        assert!((prox_moreau(&[3.0], 1.0, f, 1.0, 1.0).unwrap()[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn infconv_examples() {
        let pen = InfConvPenaltyParams::new(1.0, 1.0, 1.0).unwrap();
        assert_eq!(prox_infconv_g(&[0.0], &pen, 1.0).unwrap(), vec![0.0]);
        let (g, u) = infconv_value_and_argmin(&[2.0], &pen).unwrap();
        assert_eq!(u, vec![1.0]);
        assert!((g - 1.5).abs() < 1e-15);
        let (g0, u0) = infconv_value_and_argmin(&[0.0, 0.0], &pen).unwrap();
        assert_eq!((g0, u0), (0.0, vec![0.0, 0.0]));

        // β → ∞ collapses g onto the ℓq penalty.
        let big = InfConvPenaltyParams::new(0.5, 1e12, 0.5).unwrap();
        let w = [2.0, -0.3, 1.1];
        let a = prox_infconv_g(&w, &big, 0.8).unwrap();
        let b = prox_lq_vector(&w, &ProxParams::new(0.5, 1.0, 0.8).unwrap()).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-9);
        }

        // α → 0: penalty vanishes.
        let tiny = InfConvPenaltyParams::new(1e-14, 1.0, 0.5).unwrap();
        let (g, u) = infconv_value_and_argmin(&w, &tiny).unwrap();
        assert!(g < 1e-12);
        for (x, y) in u.iter().zip(&w) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_bad_params() {
        assert!(ProxParams::new(0.0, 1.0, 1.0).is_err());
        assert!(ProxParams::new(1.2, 1.0, 1.0).is_err());
        assert!(ProxParams::new(0.5, -1.0, 1.0).is_err());
        assert!(ProxParams::new(0.5, 1.0, 0.0).is_err());
        assert!(InfConvPenaltyParams::new(1.0, 0.0, 0.5).is_err());
    }

    proptest! {
        #[test]
        fn odd_symmetry(u in -50.0f64..50.0, q in 0.1f64..1.0, nu in 0.01f64..5.0, mu in 0.01f64..5.0) {
            let p = ProxParams::new(q, nu, mu).unwrap();
            prop_assert_eq!(prox_lq_scalar(-u, &p).unwrap(), -prox_lq_scalar(u, &p).unwrap());
        }

        #[test]
        fn range_gap(u in -50.0f64..50.0, q in 0.1f64..1.0, nu in 0.01f64..5.0, mu in 0.01f64..5.0) {
            let p = ProxParams::new(q, nu, mu).unwrap();
            let z = prox_lq_scalar(u, &p).unwrap();
            let lam = threshold_profile(&p).lambda_gap;
            prop_assert!(z == 0.0 || z.abs() >= lam - 1e-9);
        }

        #[test]
        fn monotone_on_branch(a in 0.0f64..20.0, d in 0.0f64..5.0, q in 0.1f64..1.0, nu in 0.01f64..5.0, mu in 0.01f64..5.0) {
            let p = ProxParams::new(q, nu, mu).unwrap();
            prop_assert!(prox_lq_scalar(a + d, &p).unwrap() >= prox_lq_scalar(a, &p).unwrap());
        }

        #[test]
        fn permutation_equivariant(v in proptest::collection::vec(-5.0f64..5.0, 1..12), shift in 0usize..12) {
            let p = ProxParams::new(0.5, 0.8, 1.1).unwrap();
            let mut rotated = v.clone();
            let k = shift % v.len();
            rotated.rotate_left(k);
            let mut expected = prox_lq_vector(&v, &p).unwrap();
            expected.rotate_left(k);
            prop_assert_eq!(prox_lq_vector(&rotated, &p).unwrap(), expected);
        }
    }
}
