//! Forward spectral problem for `-(1/ρ²)(ρ² f')' + (E/r²) f = μ f` on `[0, 1]`, `ρ = r^{m/2}`.
//!
//! The problem is solved through the unitary map `y = ρ f`, which turns it into
//! `-y'' + p y = σ y` with a zero-mean `p` and shifted boundary parameters; `μ = σ + c0`.

mod oracle;
mod prufer;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::SurfaceProfile;
use crate::gridfn::GridFunction;
use crate::scalar::Real;

pub use oracle::oracle_matrix_eigen;
use prufer::{Left, Mode, Right, Shooter};

/// Largest number of modes a single call computes.
pub const MAX_MODES: usize = 200;

/// Denominator magnitude below which a norming constant is refused.
pub const DEGENERATE_TOL: f64 = 1e-12;

/// * `Dirichlet`: `f(0) = f(1) = 0`, modes `n ≥ 1`;
/// * `Mixed { b }`: `f(0) = 0`, `f'(1) + b f(1) = 0`, modes `n ≥ 0`;
/// * `Robin { a, b }`: `f'(0) = a f(0)`, `f'(1) = -b f(1)`, modes `n ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BoundaryCondition<T> {
    Dirichlet,
    Mixed { b: T },
    Robin { a: T, b: T },
}

impl<T: Real> BoundaryCondition<T> {
    /// Lowest mode index.
    pub fn first_index(&self) -> usize {
        match self {
            Self::Dirichlet => 1,
            _ => 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = match *self {
            Self::Dirichlet => true,
            Self::Mixed { b } => b.is_finite(),
            Self::Robin { a, b } => a.is_finite() && b.is_finite(),
        };
        if finite {
            Ok(())
        } else {
            Err(Error::InvalidInput("boundary parameters must be finite".into()))
        }
    }

    pub fn check_index(&self, n: usize) -> Result<()> {
        if n < self.first_index() {
            return Err(Error::InvalidInput(format!(
                "mode index {n} is below the first index {} for this boundary condition",
                self.first_index()
            )));
        }
        Ok(())
    }

    /// Closed-form `μ_n` of the unperturbed problem (`r ≡ 1`, `E = 0`), to leading order
    /// for Robin-type conditions.
    pub fn baseline(&self, n: usize) -> T {
        let pi = T::PI();
        let nn = T::from_usize_lossy(n);
        let two = T::lit(2.0);
        match *self {
            Self::Dirichlet => (nn * pi).powi(2),
            Self::Mixed { b } => (pi * (nn + T::lit(0.5))).powi(2) + two * b,
            Self::Robin { a, b } => (nn * pi).powi(2) + two * (a + b),
        }
    }

    /// Oscillation count of mode `n`.
    fn zero_count(&self, n: usize) -> usize {
        n - self.first_index()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct SLProblem<T> {
    pub profile: SurfaceProfile<T>,
    /// Cross-section eigenvalue `E ≥ 0`.
    #[serde(rename = "E", alias = "e")]
    pub e: T,
    pub bc: BoundaryCondition<T>,
}

impl<T: Real> SLProblem<T> {
    pub fn new(profile: SurfaceProfile<T>, e: T, bc: BoundaryCondition<T>) -> Result<Self> {
        if !(e >= T::zero()) || !e.is_finite() {
            return Err(Error::InvalidInput(format!("E must be a finite non-negative number, got {e}")));
        }
        bc.validate()?;
        Ok(Self { profile, e, bc })
    }
}

/// `-y'' + p y` with `∫p = 0`; the weighted spectrum is `σ_n + c0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchrodingerForm<T> {
    pub p: GridFunction<T>,
    pub c0: T,
    pub bc: BoundaryCondition<T>,
    /// `log ρ(0)`, which separates weighted and Schrödinger norming constants.
    pub log_rho0: T,
}

/// Unitary reduction `y = ρ f`: `p = Q'' + Q'² + E/r² - c0`, `a' = a + Q'(0)`, `b' = b - Q'(1)`.
pub fn to_schrodinger<T: Real>(prob: &SLProblem<T>) -> SchrodingerForm<T> {
    let profile = &prob.profile;
    let slope = profile.log_derivative();
    let m = T::from_u32(profile.m).unwrap();
    let e_scaled = prob.e / (profile.r0 * profile.r0);
    let four = T::lit(4.0);
    let big_q = profile.big_q();
    let zeroth = slope.zip_with(&big_q, |d, bq| d * d + e_scaled * (-four * bq / m).exp());
    let g = &profile.q.differentiate_fourth_order() + &zeroth;
    let c0 = g.integrate();
    let p = g.offset(-c0);
    let bc = match prob.bc {
        BoundaryCondition::Dirichlet => BoundaryCondition::Dirichlet,
        BoundaryCondition::Mixed { b } => BoundaryCondition::Mixed { b: b - slope.last() },
        BoundaryCondition::Robin { a, b } => BoundaryCondition::Robin { a: a + slope.first(), b: b - slope.last() },
    };
    SchrodingerForm { p, c0, bc, log_rho0: profile.rho0().ln() }
}

impl<T: Real> SchrodingerForm<T> {
    /// A Schrödinger problem given directly by its potential; `c0` is the mean of `p`.
    pub fn from_potential(p: GridFunction<T>, bc: BoundaryCondition<T>) -> Result<Self> {
        bc.validate()?;
        if p.n_intervals() < 4 {
            return Err(Error::InvalidInput("potential needs at least 4 intervals".into()));
        }
        let c0 = p.integrate();
        Ok(Self { p: p.offset(-c0), c0, bc, log_rho0: T::zero() })
    }

    fn shooter(&self) -> Shooter<T> {
        let (left, right) = match self.bc {
            BoundaryCondition::Dirichlet => (Left::Dirichlet, Right::Dirichlet),
            BoundaryCondition::Mixed { b } => (Left::Dirichlet, Right::Robin(b)),
            BoundaryCondition::Robin { a, b } => (Left::Robin(a), Right::Robin(b)),
        };
        Shooter::new(&self.p, left, right)
    }

    fn mode_with(&self, shooter: &Shooter<T>, n: usize) -> Result<Mode<T>> {
        self.bc.check_index(n)?;
        shooter.solve(self.bc.zero_count(n), self.bc.baseline(n), n)
    }

    /// `σ_n` of the zero-mean operator for the first `n_max` modes.
    pub fn sigma(&self, n_max: usize) -> Result<Vec<T>> {
        check_count(n_max)?;
        let shooter = self.shooter();
        let first = self.bc.first_index();
        (first..first + n_max)
            .into_par_iter()
            .map(|n| self.mode_with(&shooter, n).map(|m| m.sigma))
            .collect()
    }

    /// Norming constant in the Schrödinger picture: `log|y'(1)/y'(0)|`, `log|y(1)/y'(0)|` or
    /// `log|y(1)/y(0)|` according to the boundary condition.
    pub fn norming_constant(&self, n: usize) -> Result<T> {
        let mode = self.mode_with(&self.shooter(), n)?;
        boundary_log_ratio(&self.bc, &mode, n, T::zero())
    }
}

fn check_count(n_max: usize) -> Result<()> {
    if n_max > MAX_MODES {
        return Err(Error::InvalidInput(format!("at most {MAX_MODES} modes per call, asked for {n_max}")));
    }
    Ok(())
}

/// `log|num/den|` for the bc-appropriate boundary values of the normalized weighted
/// eigenfunction, via `y(0) = ρ0 f(0)`, `y'(0) = ρ0 f'(0)` (when `f(0) = 0`) and `y(1) = ρ(1) f(1)`.
fn boundary_log_ratio<T: Real>(bc: &BoundaryCondition<T>, mode: &Mode<T>, index: usize, log_rho0: T) -> Result<T> {
    let shot = &mode.shot;
    let scale = (log_rho0.exp() * shot.norm2.sqrt()).recip();
    let r1 = shot.ln_r.exp();
    let (sin0, _) = mode.theta0.sin_cos();
    let (sin1, cos1) = shot.theta.sin_cos();
    let (num, den) = match bc {
        // ρ(1) f'(1) = y'(1) since y(1) = 0
        BoundaryCondition::Dirichlet => (mode.k * r1 * cos1, mode.k),
        BoundaryCondition::Mixed { .. } => (r1 * sin1, mode.k),
        BoundaryCondition::Robin { .. } => (r1 * sin1, sin0),
    };
    // both values as seen on the normalized f
    let (num_f, den_f) = (num * scale * log_rho0.exp(), den * scale);
    let tol = T::lit(DEGENERATE_TOL);
    if !(den_f.abs() >= tol) {
        return Err(Error::DegenerateBoundaryValue { index, value: den_f.to_f64_lossy() });
    }
    if !(num_f.abs() >= tol) {
        return Err(Error::DegenerateBoundaryValue { index, value: num_f.to_f64_lossy() });
    }
    Ok((num / den).abs().ln() + log_rho0)
}

/// One computed mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct EigenResult<T> {
    pub index: usize,
    pub mu: T,
    /// Normalized in `L²(r^m dx)`; `f'(0) > 0` (Dirichlet, Mixed) or `f(0) > 0` (Robin).
    pub eigenfunction: GridFunction<T>,
    pub norming_constant: T,
}

/// The first `n_max` eigenvalues `μ_n`, starting at the bc's first index.
pub fn eigenvalues<T: Real>(prob: &SLProblem<T>, n_max: usize) -> Result<Vec<T>> {
    let form = to_schrodinger(prob);
    Ok(form.sigma(n_max)?.into_iter().map(|s| s + form.c0).collect())
}

fn result_from_mode<T: Real>(prob: &SLProblem<T>, form: &SchrodingerForm<T>, mode: Mode<T>, n: usize) -> Result<EigenResult<T>> {
    let norming_constant = boundary_log_ratio(&prob.bc, &mode, n, form.log_rho0)?;
    let big_q = prob.profile.big_q();
    let inv = (form.log_rho0.exp() * mode.shot.norm2.sqrt()).recip();
    let nodes = mode.shot.nodes.as_ref().expect("recorded shot");
    let values = nodes
        .iter()
        .zip(big_q.values())
        .map(|(&(theta, ln_r), &bq)| (ln_r - bq).exp() * theta.sin() * inv)
        .collect();
    let eigenfunction = GridFunction::new(values)?;
    Ok(EigenResult { index: n, mu: mode.sigma + form.c0, eigenfunction, norming_constant })
}

/// Mode `n` with its normalized eigenfunction and norming constant.
pub fn eigenfunction<T: Real>(prob: &SLProblem<T>, n: usize) -> Result<EigenResult<T>> {
    let form = to_schrodinger(prob);
    let mode = form.mode_with(&form.shooter(), n)?;
    result_from_mode(prob, &form, mode, n)
}

/// The first `n_max` modes, solved in parallel.
pub fn eigen_results<T: Real>(prob: &SLProblem<T>, n_max: usize) -> Result<Vec<EigenResult<T>>> {
    check_count(n_max)?;
    let form = to_schrodinger(prob);
    let shooter = form.shooter();
    let first = prob.bc.first_index();
    (first..first + n_max)
        .into_par_iter()
        .map(|n| result_from_mode(prob, &form, form.mode_with(&shooter, n)?, n))
        .collect()
}

/// `κ_n = log|ρ(1) f'(1)/f'(0)|`, `χ_n = log|ρ(1) f(1)/f'(0)|` or `φ_n = log|ρ(1) f(1)/f(0)|`.
pub fn norming_constant<T: Real>(prob: &SLProblem<T>, n: usize) -> Result<T> {
    let form = to_schrodinger(prob);
    let mode = form.mode_with(&form.shooter(), n)?;
    boundary_log_ratio(&prob.bc, &mode, n, form.log_rho0)
}

/// The norming constant of an already computed mode, from one-sided fourth order stencils on
/// the sampled eigenfunction; agrees with [`norming_constant`] up to discretization error.
pub fn norming_constant_from_eigenfunction<T: Real>(prob: &SLProblem<T>, result: &EigenResult<T>) -> Result<T> {
    let f = &result.eigenfunction;
    let rho1 = prob.profile.rho0() * prob.profile.big_q().last().exp();
    let (num, den) = match prob.bc {
        BoundaryCondition::Dirichlet => (f.right_derivative(), f.left_derivative()),
        BoundaryCondition::Mixed { .. } => (f.last(), f.left_derivative()),
        BoundaryCondition::Robin { .. } => (f.last(), f.first()),
    };
    if !(den.abs() >= T::lit(DEGENERATE_TOL)) {
        return Err(Error::DegenerateBoundaryValue { index: result.index, value: den.to_f64_lossy() });
    }
    Ok((rho1 * num / den).abs().ln())
}

/// CSV with columns `index,mu,norming_constant`.
pub fn results_to_csv<T: Real>(results: &[EigenResult<T>]) -> String {
    let mut out = String::from("index,mu,norming_constant\n");
    for r in results {
        out.push_str(&format!("{},{},{}\n", r.index, r.mu, r.norming_constant));
    }
    out
}

/// Number of sign changes among the interior samples, ignoring exact zeros.
pub fn sign_changes<T: Real>(f: &GridFunction<T>) -> usize {
    let vals = f.values();
    let interior = &vals[1..vals.len() - 1];
    let scale = f.max_abs() * T::lit(1e-10);
    let mut last = T::zero();
    let mut count = 0;
    for &v in interior.iter().filter(|v| v.abs() > scale) {
        if last != T::zero() && (v > T::zero()) != (last > T::zero()) {
            count += 1;
        }
        last = v;
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn flat(n: usize) -> SurfaceProfile<f64> {
        SurfaceProfile::cylinder(n, 1)
    }

    fn bumpy(n: usize) -> SurfaceProfile<f64> {
        SurfaceProfile::new(1, 1.0, 0.0, GridFunction::from_fn(n, |x: f64| 0.2 * (2.0 * PI * x).sin())).unwrap()
    }

    #[test]
    fn flat_dirichlet_spectrum() {
        let prob = SLProblem::new(flat(800), 0.0, BoundaryCondition::Dirichlet).unwrap();
        let mu = eigenvalues(&prob, 10).unwrap();
        for (k, m) in mu.iter().enumerate() {
            let exact = ((k + 1) as f64 * PI).powi(2);
            assert!((m - exact).abs() <= 1e-9 * exact, "{k}: {m} vs {exact}");
        }
        assert!((mu[0] - 9.8696044).abs() < 1e-7);
    }

    #[test]
    fn constant_potential_shifts() {
        let prob = SLProblem::new(flat(200), 2.0, BoundaryCondition::Dirichlet).unwrap();
        let mu = eigenvalues(&prob, 5).unwrap();
        for (k, m) in mu.iter().enumerate() {
            let exact = ((k + 1) as f64 * PI).powi(2) + 2.0;
            assert!((m - exact).abs() <= 1e-10 * exact);
        }
    }

    #[test]
    fn schrodinger_examples() {
        let f = to_schrodinger(&SLProblem::new(flat(100), 0.0, BoundaryCondition::Dirichlet).unwrap());
        assert_eq!((f.p.max_abs(), f.c0, f.bc), (0.0, 0.0, BoundaryCondition::Dirichlet));

        let profile = SurfaceProfile::<f64>::new(2, 1.0, 0.4, GridFunction::zeros(100)).unwrap();
        let prob = SLProblem::new(profile, 0.0, BoundaryCondition::Robin { a: 1.0, b: 1.0 }).unwrap();
        let f = to_schrodinger(&prob);
        assert!(f.p.max_abs() < 1e-14 && (f.c0 - 0.16).abs() < 1e-14);
        match f.bc {
            BoundaryCondition::Robin { a, b } => assert!((a - 1.4).abs() < 1e-14 && (b - 0.6).abs() < 1e-14),
            other => panic!("{other:?}"),
        }

        let prob = SLProblem::new(bumpy(400), 0.0, BoundaryCondition::Dirichlet).unwrap();
        let f = to_schrodinger(&prob);
        let (g, _) = crate::riccati::map_g(&prob.profile.q, 0.0);
        assert!((&f.p - &g).max_abs() < 1e-12);
    }

    #[test]
    fn textbook_modes() {
        let prob = SLProblem::new(flat(800), 0.0, BoundaryCondition::Dirichlet).unwrap();
        let r = eigenfunction(&prob, 1).unwrap();
        let exact = GridFunction::from_fn(800, |x: f64| 2f64.sqrt() * (PI * x).sin());
        assert!((&r.eigenfunction - &exact).max_abs() < 1e-6);
        assert!(r.norming_constant.abs() < 1e-9);

        let prob = SLProblem::new(flat(400), 0.0, BoundaryCondition::Robin { a: 0.0, b: 0.0 }).unwrap();
        let r = eigenfunction(&prob, 0).unwrap();
        assert!(r.mu.abs() < 1e-9);
        assert!(r.eigenfunction.values().iter().all(|v| (v - 1.0).abs() < 1e-6));
        assert!(r.norming_constant.abs() < 1e-9);
    }

    #[test]
    fn mixed_flat_norming_constants() {
        let prob = SLProblem::new(flat(400), 0.0, BoundaryCondition::Mixed { b: 0.0 }).unwrap();
        for r in eigen_results(&prob, 6).unwrap() {
            let expect = -(PI * (r.index as f64 + 0.5)).ln();
            assert!((r.norming_constant - expect).abs() < 1e-9, "{}: {}", r.index, r.norming_constant);
            assert!((r.mu - prob.bc.baseline(r.index)).abs() < 1e-8);
        }
    }

    #[test]
    fn exact_robin_eigenvalues() {
        // cos-sin modes: tan k = (a + b) k / (k² - a b)
        let (a, b) = (1.0, 2.0);
        let prob = SLProblem::new(flat(400), 0.0, BoundaryCondition::Robin { a, b }).unwrap();
        for mu in eigenvalues(&prob, 5).unwrap() {
            let k = mu.sqrt();
            let resid = (k * k - a * b) * k.sin() - (a + b) * k * k.cos();
            assert!(resid.abs() < 1e-8, "{mu}: {resid}");
        }
    }

    #[test]
    fn oracle_agrees_on_bumpy_profile() {
        let prob = SLProblem::new(bumpy(800), 0.0, BoundaryCondition::Dirichlet).unwrap();
        let mu = eigenvalues(&prob, 10).unwrap();
        let oracle = oracle_matrix_eigen(&prob, 2000, 10);
        for (m, o) in mu.iter().zip(&oracle) {
            assert!((m - o).abs() <= 1e-5 * o.abs(), "{m} vs {o}");
        }
        let flat_prob = SLProblem::new(flat(100), 0.0, BoundaryCondition::Dirichlet).unwrap();
        let o = oracle_matrix_eigen(&flat_prob, 2000, 1)[0];
        assert!((o - PI * PI).abs() <= 1e-6 * PI * PI);
    }

    #[test]
    fn indices_below_origin_are_rejected() {
        let prob = SLProblem::new(flat(50), 0.0, BoundaryCondition::Dirichlet).unwrap();
        assert!(eigenfunction(&prob, 0).is_err());
        assert!(eigenvalues(&prob, 201).is_err());
        assert!(SLProblem::new(flat(50), -1.0, BoundaryCondition::Dirichlet).is_err());
    }

    #[test]
    fn bc_json_shape() {
        let s = serde_json::to_string(&BoundaryCondition::Robin { a: 1.0, b: 2.0 }).unwrap();
        assert_eq!(s, r#"{"kind":"robin","a":1.0,"b":2.0}"#);
        let d: BoundaryCondition<f64> = serde_json::from_str(r#"{"kind":"dirichlet"}"#).unwrap();
        assert_eq!(d, BoundaryCondition::Dirichlet);
    }
}
