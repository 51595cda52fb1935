//! Spectral data: eigenvalue remainders against the closed-form baselines, norming constants,
//! weighted `ℓ²` norms, the product function `w(λ)` and the boundary-parameter identity.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::SurfaceProfile;
use crate::scalar::Real;
use crate::sl_solver::{self, BoundaryCondition, SLProblem};

/// Distance to a pole of the product below which `w` is not evaluated.
pub const POLE_TOL: f64 = 1e-9;

/// `μ_n = μ_n⁰ + c0 + μ̃_n` for consecutive modes from the bc's first index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralData<T> {
    pub bc: BoundaryCondition<T>,
    pub mu: Vec<T>,
    pub tilde_mu: Vec<T>,
    pub c0: T,
    pub norming: Vec<T>,
    #[serde(skip)]
    pub baseline: Vec<T>,
}

#[derive(Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
struct SpectralWire<T> {
    bc: BoundaryCondition<T>,
    mu: Vec<T>,
    #[serde(default)]
    tilde_mu: Option<Vec<T>>,
    c0: T,
    #[serde(default)]
    norming: Vec<T>,
}

impl<'de, T: Real> Deserialize<'de> for SpectralData<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let w = SpectralWire::<T>::deserialize(d)?;
        let data = SpectralData::new(w.bc, w.mu, w.c0, w.norming).map_err(D::Error::custom)?;
        if let Some(t) = w.tilde_mu {
            let consistent = t.len() == data.tilde_mu.len()
                && t.iter().zip(&data.tilde_mu).zip(&data.mu).all(|((a, b), m)| {
                    (*a - *b).abs() <= T::lit(1e-9) * (T::one() + m.abs())
                });
            if !consistent {
                return Err(D::Error::custom("tilde_mu is inconsistent with mu, bc and c0"));
            }
        }
        Ok(data)
    }
}

/// `μ_n⁰`: `(nπ)²`, `π²(n+½)² + 2b` or `(nπ)² + 2(a+b)`.
pub fn baseline_mu0<T: Real>(bc: &BoundaryCondition<T>, n: usize) -> T {
    bc.baseline(n)
}

/// `c0 = ∫((q0 + q)² + E/r²)`.
pub fn c0_from_profile<T: Real>(profile: &SurfaceProfile<T>, e: T) -> T {
    let r = profile.radius();
    let slope = profile.log_derivative();
    slope.zip_with(&r, |d, rv| d * d + e / (rv * rv)).integrate()
}

/// Remainder with the `baseline + c0 + tilde = mu` reconstruction exact in floating point
/// whenever a representable remainder allows it.
fn remainder<T: Real>(mu: T, shift: T) -> T {
    let mut t = mu - shift;
    for _ in 0..4 {
        let back = shift + t;
        if back == mu {
            break;
        }
        t = t + (mu - back);
    }
    t
}

/// Fills remainders and baselines; norming constants are left empty.
pub fn decompose<T: Real>(mu: &[T], bc: BoundaryCondition<T>, c0: T) -> Result<SpectralData<T>> {
    SpectralData::new(bc, mu.to_vec(), c0, Vec::new())
}

impl<T: Real> SpectralData<T> {
    pub fn new(bc: BoundaryCondition<T>, mu: Vec<T>, c0: T, norming: Vec<T>) -> Result<Self> {
        bc.validate()?;
        if mu.iter().any(|v| !v.is_finite()) || !c0.is_finite() {
            return Err(Error::InvalidInput("spectral data must be finite".into()));
        }
        if mu.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidInput("eigenvalues must be strictly increasing".into()));
        }
        if !norming.is_empty() && norming.len() != mu.len() {
            return Err(Error::InvalidInput(format!(
                "{} norming constants for {} eigenvalues",
                norming.len(),
                mu.len()
            )));
        }
        let first = bc.first_index();
        let baseline: Vec<T> = (0..mu.len()).map(|k| bc.baseline(first + k)).collect();
        let tilde_mu = mu.iter().zip(&baseline).map(|(&m, &b)| remainder(m, b + c0)).collect();
        Ok(Self { bc, mu, tilde_mu, c0, norming, baseline })
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    /// Mode index of entry `k`.
    pub fn index(&self, k: usize) -> usize {
        self.bc.first_index() + k
    }

    /// `baseline + c0 + tilde_mu`.
    pub fn recompose(&self) -> Vec<T> {
        self.baseline.iter().zip(&self.tilde_mu).map(|(&b, &t)| (b + self.c0) + t).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,mu,tilde_mu,baseline,norming_constant\n");
        for k in 0..self.len() {
            let norm = self.norming.get(k).map(|v| v.to_string()).unwrap_or_default();
            out.push_str(&format!("{},{},{:e},{},{}\n", self.index(k), self.mu[k], self.tilde_mu[k], self.baseline[k], norm));
        }
        out
    }
}

/// Forward map: the first `n_modes` eigenvalues and norming constants of `prob`.
pub fn forward<T: Real>(prob: &SLProblem<T>, n_modes: usize) -> Result<SpectralData<T>> {
    let results = sl_solver::eigen_results(prob, n_modes)?;
    let mu = results.iter().map(|r| r.mu).collect();
    let norming = results.iter().map(|r| r.norming_constant).collect();
    SpectralData::new(prob.bc, mu, c0_from_profile(&prob.profile, prob.e), norming)
}

/// `μ⁰_k + h_k` strictly increasing over the supplied prefix.
pub fn m1_check<T: Real>(h: &[T], baseline: &[T]) -> Result<bool> {
    if h.len() != baseline.len() {
        return Err(Error::InvalidInput("h and baseline lengths differ".into()));
    }
    let shifted: Vec<T> = h.iter().zip(baseline).map(|(&a, &b)| a + b).collect();
    Ok(shifted.windows(2).all(|w| w[0] < w[1]))
}

/// `2 Σ_{n≥1} (2πn)^{2α} |h_n|²` with `h[0] = h_1`.
pub fn l2alpha_norm_squared<T: Real>(h: &[T], alpha: T) -> T {
    let two = T::lit(2.0);
    let two_pi = two * T::PI();
    h.iter()
        .enumerate()
        .map(|(k, &v)| two * (two_pi * T::from_usize_lossy(k + 1)).powf(two * alpha) * v * v)
        .sum()
}

/// Square root of [`l2alpha_norm_squared`].
pub fn l2alpha_norm<T: Real>(h: &[T], alpha: T) -> T {
    l2alpha_norm_squared(h, alpha).sqrt()
}

fn require_mixed<T: Real>(data: &SpectralData<T>, n_trunc: usize) -> Result<()> {
    if !matches!(data.bc, BoundaryCondition::Mixed { .. }) {
        return Err(Error::InvalidInput("the product function is defined for mixed data only".into()));
    }
    if n_trunc > data.len() {
        return Err(Error::InvalidInput(format!("n_trunc = {n_trunc} exceeds the {} data entries", data.len())));
    }
    Ok(())
}

/// Zeros `π²(n+½)²` of `cos√λ`.
fn cos_zero<T: Real>(n: usize) -> T {
    (T::PI() * (T::from_usize_lossy(n) + T::lit(0.5))).powi(2)
}

/// `tan s / s`, regular at `s = 0`.
fn tan_over<T: Real>(s: Complex<T>) -> Complex<T> {
    if s.norm() < T::lit(1e-4) {
        let s2 = s * s;
        Complex::new(T::one(), T::zero()) + s2 / T::lit(3.0) + s2 * s2 * T::lit(2.0 / 15.0)
    } else {
        s.tan() / s
    }
}

/// `exp(-d Σ_{n≥N} 1/(λ - λ_n⁰))` with `d = 2b + c0`, the asymptotic offset of `μ_n - λ_n⁰`.
fn tail_factor<T: Real>(lambda: Complex<T>, data: &SpectralData<T>, n_trunc: usize) -> Complex<T> {
    let b = match data.bc {
        BoundaryCondition::Mixed { b } => b,
        _ => T::zero(),
    };
    let d = T::lit(2.0) * b + data.c0;
    if d == T::zero() {
        return Complex::new(T::one(), T::zero());
    }
    let s = lambda.sqrt();
    let full = -tan_over(s) / T::lit(2.0);
    let head: Complex<T> = (0..n_trunc).map(|n| (lambda - cos_zero::<T>(n)).inv()).fold(Complex::new(T::zero(), T::zero()), |a, v| a + v);
    (-(full - head) * d).exp()
}

fn check_poles<T: Real>(lambda: Complex<T>, n_trunc: usize, skip: Option<usize>) -> Result<()> {
    let tol = T::lit(POLE_TOL);
    for n in (0..n_trunc).filter(|&n| Some(n) != skip) {
        let pole = cos_zero::<T>(n);
        if (lambda - pole).norm() < tol {
            return Err(Error::PoleHit { index: n, lambda: pole.to_f64_lossy(), tol: POLE_TOL });
        }
    }
    Ok(())
}

/// `w(λ) = cos√λ · Π_{n<N} (λ - μ_n)/(λ - λ_n⁰)` times the tail estimate, `λ_n⁰ = π²(n+½)²`.
pub fn w_eval<T: Real>(lambda: Complex<T>, data: &SpectralData<T>, n_trunc: usize) -> Result<Complex<T>> {
    require_mixed(data, n_trunc)?;
    check_poles(lambda, n_trunc, None)?;
    let mut w = lambda.sqrt().cos();
    for n in 0..n_trunc {
        w = w * (lambda - data.mu[n]) / (lambda - cos_zero::<T>(n));
    }
    Ok(w * tail_factor(lambda, data, n_trunc))
}

/// `∂w/∂λ` at the data eigenvalue `lambda = μ_k` (`k < n_trunc`): the vanishing factor is
/// differentiated analytically and `cos√λ/(λ - λ_k⁰)` is evaluated in its regular form.
pub fn w_dlambda<T: Real>(lambda: T, data: &SpectralData<T>, n_trunc: usize) -> Result<T> {
    require_mixed(data, n_trunc)?;
    let scale = T::one() + lambda.abs();
    let k = data.mu[..n_trunc]
        .iter()
        .position(|&m| (m - lambda).abs() <= T::lit(1e-9) * scale)
        .ok_or_else(|| Error::InvalidInput(format!("λ = {lambda} is not one of the first {n_trunc} eigenvalues")))?;
    let lam = Complex::new(lambda, T::zero());
    check_poles(lam, n_trunc, Some(k))?;
    let s = lam.sqrt();
    let sk = T::PI() * (T::from_usize_lossy(k) + T::lit(0.5));
    let delta = s - sk;
    let sinc = if delta.norm() < T::lit(1e-6) {
        Complex::new(T::one(), T::zero()) - delta * delta / T::lit(6.0)
    } else {
        delta.sin() / delta
    };
    let sign = if k % 2 == 0 { T::one() } else { -T::one() };
    // cos(s) = -(-1)^k sin(δ), λ - λ_k⁰ = δ (s + s_k)
    let mut w = -sinc * sign / (s + sk);
    for n in (0..n_trunc).filter(|&n| n != k) {
        w = w * (lam - data.mu[n]) / (lam - cos_zero::<T>(n));
    }
    Ok((w * tail_factor(lam, data, n_trunc)).re)
}

/// Partial sum `Σ_{n<n_terms} (2 - e^{χ_n}/|∂w/∂λ(μ_n)|)` and the magnitude of its last term.
pub fn b_from_identity<T: Real>(data: &SpectralData<T>, n_terms: usize) -> Result<(T, T)> {
    require_mixed(data, n_terms)?;
    if data.norming.len() != data.len() {
        return Err(Error::InvalidInput("the identity needs norming constants".into()));
    }
    let mut sum = T::zero();
    let mut last = T::zero();
    for n in 0..n_terms {
        let dw = w_dlambda(data.mu[n], data, n_terms)?;
        let mut term = T::lit(2.0) - data.norming[n].exp() / dw.abs();
        // below the rounding floor of e^χ / |w'| (which grows with |χ|) the term is noise
        if term.abs() <= T::lit(32.0) * T::epsilon() * (T::one() + data.norming[n].abs()) {
            term = T::zero();
        }
        sum = sum + term;
        last = term.abs();
    }
    Ok((sum, last))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridfn::GridFunction;
    use std::f64::consts::PI;

    fn flat_mixed(n_modes: usize) -> SpectralData<f64> {
        let bc = BoundaryCondition::Mixed { b: 0.0 };
        let mu: Vec<f64> = (0..n_modes).map(|n| bc.baseline(n)).collect();
        let norming = (0..n_modes).map(|n| -(PI * (n as f64 + 0.5)).ln()).collect();
        SpectralData::new(bc, mu, 0.0, norming).unwrap()
    }

    #[test]
    fn baselines() {
        assert_eq!(baseline_mu0(&BoundaryCondition::<f64>::Dirichlet, 1), PI * PI);
        assert!((baseline_mu0(&BoundaryCondition::Mixed { b: 0.0f64 }, 0) - 2.4674011).abs() < 1e-7);
        assert!((baseline_mu0(&BoundaryCondition::Robin { a: 1.0, b: 2.0 }, 1) - PI * PI - 6.0).abs() < 1e-14);
    }

    #[test]
    fn c0_examples() {
        assert_eq!(c0_from_profile(&SurfaceProfile::<f64>::cylinder(100, 1), 0.0), 0.0);
        let p = SurfaceProfile::new(1, 1.0, 0.0, GridFunction::from_fn(800, |x: f64| 0.2 * (2.0 * PI * x).sin())).unwrap();
        assert!((c0_from_profile(&p, 0.0) - 0.02).abs() < 1e-12);
        assert!((c0_from_profile(&SurfaceProfile::<f64>::cylinder(100, 2), 2.0) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn decompose_examples() {
        let mu: Vec<f64> = (1..=10).map(|n| (n as f64 * PI).powi(2)).collect();
        let d = decompose(&mu, BoundaryCondition::Dirichlet, 0.0).unwrap();
        assert!(d.tilde_mu.iter().all(|&t| t == 0.0));
        let shifted: Vec<f64> = mu.iter().map(|m| m + 3.0).collect();
        let d = decompose(&shifted, BoundaryCondition::Dirichlet, 3.0).unwrap();
        assert!(d.tilde_mu.iter().all(|t| t.abs() < 1e-12));
        assert_eq!(d.recompose(), shifted);
        assert!(decompose(&[2.0, 1.0], BoundaryCondition::Dirichlet, 0.0).is_err());
    }

    #[test]
    fn m1_and_norms() {
        let base: Vec<f64> = (1..=5).map(|n| (n as f64 * PI).powi(2)).collect();
        assert!(m1_check(&[0.0; 5], &base).unwrap());
        assert!(!m1_check(&[40.0, 0.0, 0.0, 0.0, 0.0], &base).unwrap());
        assert!((l2alpha_norm_squared(&[1.0], 1.0) - 8.0 * PI * PI).abs() < 1e-12);
        assert_eq!(l2alpha_norm_squared(&[0.0; 4], 1.0), 0.0);
        assert_eq!(l2alpha_norm_squared(&[0.0, 1.0], 0.0), 2.0);
        assert!((l2alpha_norm(&[0.0, 1.0], 0.0) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn flat_product_is_cosine() {
        let d = flat_mixed(30);
        let one = |x: f64| Complex::new(x, 0.0);
        assert!((w_eval(one(0.0), &d, 30).unwrap() - one(1.0)).norm() < 1e-14);
        assert!((w_eval(one(-1.0), &d, 30).unwrap().re - 1f64.cosh()).abs() < 1e-9);
        // flat data puts μ_0 on a window zero of cos√λ, which is refused
        assert!(matches!(w_eval(one(d.mu[0]), &d, 30), Err(Error::PoleHit { index: 0, .. })));
        for lam in [-90.0, -3.3, 7.1, 55.5, 99.0] {
            let w = w_eval(one(lam), &d, 30).unwrap();
            let c = one(lam).sqrt().cos();
            assert!((w - c).norm() <= 1e-12 * c.norm(), "{lam}");
        }
        let z = Complex::new(3.0, 4.0);
        assert!((w_eval(z, &d, 30).unwrap() - z.sqrt().cos()).norm() < 1e-12);
    }

    #[test]
    fn flat_derivatives_and_identity() {
        let d = flat_mixed(40);
        for k in 0..10 {
            let dw = w_dlambda(d.mu[k], &d, 40).unwrap();
            let expect = 1.0 / (2.0 * PI * (k as f64 + 0.5));
            assert!((dw.abs() - expect).abs() < 1e-12);
            assert_eq!(dw < 0.0, k % 2 == 0);
        }
        for n in [0, 1, 5, 40] {
            let (b, last) = b_from_identity(&d, n).unwrap();
            assert!(b.abs() < 1e-12 && last < 1e-12);
        }
    }

    #[test]
    fn pole_is_reported() {
        let d = flat_mixed(5);
        let mut mu = d.mu.clone();
        mu[1] += 0.5;
        let data = SpectralData::new(d.bc, mu, 0.0, vec![]).unwrap();
        let lam = Complex::new(cos_zero::<f64>(1), 0.0);
        assert!(matches!(w_eval(lam, &data, 5), Err(Error::PoleHit { index: 1, .. })));
        // away from the window the product vanishes at every data eigenvalue
        let w = w_eval(Complex::new(data.mu[1], 0.0), &data, 5).unwrap();
        assert!(w.norm() < 1e-14);
    }

    #[test]
    fn json_shape() {
        let d = flat_mixed(3);
        let v: serde_json::Value = serde_json::to_value(&d).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(|s| s.as_str()).collect();
        assert_eq!(keys.len(), 5);
        for k in ["bc", "mu", "tilde_mu", "c0", "norming"] {
            assert!(keys.contains(&k));
        }
        let back: SpectralData<f64> = serde_json::from_value(v).unwrap();
        assert_eq!(back, d);
    }
}
