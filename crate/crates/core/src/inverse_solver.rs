//! Reconstruction of `q` from truncated spectral data by Gauss–Newton over a sine basis,
//! and recovery of the profile and embedded surface from `q` plus two anchors.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, EmbeddedSurface, SurfaceProfile};
use crate::gridfn::{GridFunction, SpaceTag, DEFAULT_INTERVALS};
use crate::linalg::{weighted_least_squares, Matrix};
use crate::scalar::Real;
use crate::sl_solver::{BoundaryCondition, SLProblem};
use crate::spectral_data::{self, SpectralData};

/// What is matched and which `q` are representable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitMode {
    /// Remainders and norming constants; basis `sin(jπx)`.
    Full,
    /// Remainders only; `q` odd about `x = 1/2`, basis `sin(2jπx)`.
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct InverseConfig<T> {
    /// Number of data modes `N` that enter the fit.
    pub n_modes: usize,
    /// Number of sine coefficients `M` (at most `2N`).
    pub n_basis: usize,
    pub grid_n: usize,
    pub max_iter: usize,
    /// Stop once the Euclidean data residual falls below this.
    pub tol: T,
    pub mode: FitMode,
}

impl<T: Real> Default for InverseConfig<T> {
    fn default() -> Self {
        Self {
            n_modes: 16,
            n_basis: 12,
            grid_n: DEFAULT_INTERVALS,
            max_iter: 30,
            tol: T::lit(1e-9).max(T::epsilon().sqrt()),
            mode: FitMode::Full,
        }
    }
}

impl<T: Real> InverseConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.n_modes < 4 {
            return Err(Error::InvalidInput(format!("n_modes must be at least 4, got {}", self.n_modes)));
        }
        if self.n_basis == 0 || self.n_basis > 2 * self.n_modes {
            return Err(Error::InvalidInput(format!("n_basis must lie in 1..={}", 2 * self.n_modes)));
        }
        if !(self.tol > T::zero()) {
            return Err(Error::InvalidInput("tol must be positive".into()));
        }
        if self.grid_n < 8 {
            return Err(Error::InvalidInput("grid_n must be at least 8".into()));
        }
        Ok(())
    }
}

/// Everything the fit holds fixed: `q0`, `E`, `m`, `r0` and the boundary condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct FixedParameters<T> {
    pub q0: T,
    #[serde(rename = "E", alias = "e")]
    pub e: T,
    pub m: u32,
    #[serde(default = "one")]
    pub r0: T,
    pub bc: BoundaryCondition<T>,
}

fn one<T: Real>() -> T {
    T::one()
}

impl<T: Real> FixedParameters<T> {
    pub fn new(q0: T, e: T, m: u32, bc: BoundaryCondition<T>) -> Self {
        Self { q0, e, m, r0: T::one(), bc }
    }

    /// Reconstruction is supported for `q0 = 0`, or for `E = 0`.
    pub fn check_hypothesis(&self) -> Result<()> {
        if self.q0 != T::zero() && self.e > T::zero() {
            return Err(Error::HypothesisViolation { q0: self.q0.to_f64_lossy(), e: self.e.to_f64_lossy() });
        }
        Ok(())
    }

    pub fn problem(&self, q: GridFunction<T>) -> Result<SLProblem<T>> {
        SLProblem::new(SurfaceProfile::new(self.m, self.r0, self.q0, q)?, self.e, self.bc)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct InverseReport<T> {
    pub iterations: usize,
    /// Data residual before each iteration, ending with the final one; non-increasing.
    pub history: Vec<T>,
    pub residual: T,
    pub coefficients: Vec<T>,
    /// `false` when the iteration stopped at a stationary point above `tol`.
    pub reached_tol: bool,
}

fn basis_fn<T: Real>(mode: FitMode, j: usize, n: usize) -> GridFunction<T> {
    let freq = match mode {
        FitMode::Full => T::from_usize_lossy(j + 1),
        FitMode::Symmetric => T::from_usize_lossy(2 * (j + 1)),
    };
    let mut f = GridFunction::from_fn(n, |x| (freq * T::PI() * x).sin());
    // exact zeros at the ends keep every combination in W10
    let mut v = f.values().to_vec();
    v[0] = T::zero();
    v[n] = T::zero();
    if let Ok(g) = GridFunction::new(v) {
        f = g;
    }
    f
}

struct Fit<'a, T> {
    target: &'a SpectralData<T>,
    fixed: &'a FixedParameters<T>,
    cfg: &'a InverseConfig<T>,
    basis: Vec<GridFunction<T>>,
}

impl<T: Real> Fit<'_, T> {
    fn q_of(&self, c: &[T]) -> GridFunction<T> {
        let n = self.cfg.grid_n;
        let mut v = vec![T::zero(); n + 1];
        for (cj, phi) in c.iter().zip(&self.basis) {
            for (a, &b) in v.iter_mut().zip(phi.values()) {
                *a = *a + *cj * b;
            }
        }
        GridFunction::new(v).unwrap_or_else(|_| GridFunction::zeros(n))
    }

    fn residual(&self, c: &[T]) -> Result<Vec<T>> {
        let prob = self.fixed.problem(self.q_of(c))?;
        let n = self.cfg.n_modes;
        let data = spectral_data::forward(&prob, n)?;
        let mut r: Vec<T> = data.tilde_mu.iter().zip(&self.target.tilde_mu).map(|(&a, &b)| a - b).collect();
        if self.cfg.mode == FitMode::Full {
            r.extend(data.norming.iter().zip(&self.target.norming).map(|(&a, &b)| a - b));
        }
        Ok(r)
    }
}

fn euclid<T: Real>(v: &[T]) -> T {
    v.iter().map(|&x| x * x).sum::<T>().sqrt()
}

/// Fits `q` so that the first `cfg.n_modes` remainders (and, in full mode, norming constants)
/// of the forward problem match `target`.
pub fn reconstruct_q<T: Real>(
    target: &SpectralData<T>,
    fixed: &FixedParameters<T>,
    cfg: &InverseConfig<T>,
) -> Result<(GridFunction<T>, InverseReport<T>)> {
    cfg.validate()?;
    fixed.check_hypothesis()?;
    if target.bc != fixed.bc {
        return Err(Error::InvalidInput("target data and fixed parameters use different boundary conditions".into()));
    }
    if target.len() < cfg.n_modes {
        return Err(Error::InvalidInput(format!("target has {} modes, fit needs {}", target.len(), cfg.n_modes)));
    }
    if cfg.mode == FitMode::Full && target.norming.len() < cfg.n_modes {
        return Err(Error::InvalidInput("full fits need norming constants in the target".into()));
    }
    let truncated = SpectralData::new(
        target.bc,
        target.mu[..cfg.n_modes].to_vec(),
        target.c0,
        target.norming.get(..cfg.n_modes).map(|s| s.to_vec()).unwrap_or_default(),
    )?;
    let fit = Fit {
        target: &truncated,
        fixed,
        cfg,
        basis: (0..cfg.n_basis).map(|j| basis_fn(cfg.mode, j, cfg.grid_n)).collect(),
    };

    let mut c = vec![T::zero(); cfg.n_basis];
    let mut r = fit.residual(&c)?;
    let mut res = euclid(&r);
    let mut history = vec![res];
    let eps = T::lit(1e-5).max(T::epsilon().sqrt() * T::lit(10.0));
    let stationary = T::epsilon().sqrt() * T::lit(1e-2);

    let finish = |c: Vec<T>, it: usize, res: T, history: Vec<T>, reached: bool| {
        let q = fit.q_of(&c);
        (q, InverseReport { iterations: it, history, residual: res, coefficients: c, reached_tol: reached })
    };

    for it in 0..cfg.max_iter {
        if res <= cfg.tol {
            return Ok(finish(c, it, res, history, true));
        }
        let columns: Vec<Vec<T>> = (0..cfg.n_basis)
            .into_par_iter()
            .map(|j| {
                let mut cp = c.clone();
                cp[j] = cp[j] + eps;
                let rp = fit.residual(&cp)?;
                Ok(rp.iter().zip(&r).map(|(&a, &b)| (a - b) / eps).collect())
            })
            .collect::<Result<_>>()?;
        let jac = Matrix::from_columns(r.len(), &columns);
        let ones = vec![T::one(); r.len()];
        let Some(delta) = weighted_least_squares(&jac, &ones, &r) else {
            return Err(no_convergence(it, res, &history));
        };
        let size = delta.iter().fold(T::zero(), |m, d| m.max(d.abs()));
        if size <= stationary * (T::one() + c.iter().fold(T::zero(), |m, v| m.max(v.abs()))) {
            return Ok(finish(c, it, res, history, false));
        }
        let mut lambda = T::one();
        let mut accepted = None;
        for _ in 0..30 {
            let trial: Vec<T> = c.iter().zip(&delta).map(|(&a, &d)| a - lambda * d).collect();
            // a trial step may leave the region where the forward solve is admissible
            if let Ok(tr) = fit.residual(&trial) {
                let tres = euclid(&tr);
                if tres < res {
                    accepted = Some((trial, tr, tres));
                    break;
                }
            }
            lambda = lambda / T::lit(2.0);
        }
        match accepted {
            Some((nc, nr, nres)) => {
                c = nc;
                r = nr;
                res = nres;
                history.push(res);
            }
            None => return Ok(finish(c, it + 1, res, history, false)),
        }
    }
    if res <= cfg.tol {
        return Ok(finish(c, cfg.max_iter, res, history, true));
    }
    Err(no_convergence(cfg.max_iter, res, &history))
}

fn no_convergence<T: Real>(iterations: usize, residual: T, history: &[T]) -> Error {
    Error::NoConvergence {
        iterations,
        residual: residual.to_f64_lossy(),
        history: history.iter().map(|v| v.to_f64_lossy()).collect(),
    }
}

/// The second anchor fixing `r` from `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Anchors<T> {
    /// `r(0)` and `q0 = ρ'(0)/ρ(0)`.
    R0Q0 { r0: T, q0: T },
    /// `r(0)` and `r(1)`.
    R0R1 { r0: T, r1: T },
}

/// The profile fixed by `q` and the anchors; with `(r0, r1)`, `q0` solves
/// `ln(r1/r0) = (2/m)(q0 + ∫q)`.
pub fn profile_from_anchors<T: Real>(q: &GridFunction<T>, anchors: Anchors<T>, m: u32) -> Result<SurfaceProfile<T>> {
    let (r0, q0) = match anchors {
        Anchors::R0Q0 { r0, q0 } => (r0, q0),
        Anchors::R0R1 { r0, r1 } => {
            if !(r0 > T::zero() && r1 > T::zero()) {
                return Err(Error::NonpositiveRadius { node: 0, value: r0.min(r1).to_f64_lossy() });
            }
            let half_m = T::from_u32(m).unwrap() / T::lit(2.0);
            (r0, half_m * (r1 / r0).ln() - q.integrate())
        }
    };
    SurfaceProfile::new(m, r0, q0, q.clone())
}

/// Profile and embedded surface for `q` and the given anchors.
pub fn reconstruct_surface<T: Real>(
    q: &GridFunction<T>,
    anchors: Anchors<T>,
    m: u32,
) -> Result<(SurfaceProfile<T>, EmbeddedSurface<T>)> {
    let profile = profile_from_anchors(q, anchors, m)?;
    let surface = geometry::recover_embedding(&profile.radius())?;
    Ok((profile, surface))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct RoundtripReport<T> {
    pub noise: T,
    pub seed: u64,
    pub h0_error: T,
    pub w10_error: T,
    pub converged: bool,
    /// Solver message when the reconstruction failed.
    pub failure: Option<String>,
    pub iterations: usize,
    pub residual: T,
    pub history: Vec<T>,
    pub q_reconstructed: Option<GridFunction<T>>,
}

/// Forward-solves `q_true`, perturbs `μ` and the norming constants by relative Gaussian noise
/// of size `noise` (seeded), reconstructs and reports the errors. Solver failures are reported
/// rather than returned.
pub fn roundtrip_report<T: Real>(
    q_true: &GridFunction<T>,
    fixed: &FixedParameters<T>,
    cfg: &InverseConfig<T>,
    noise: T,
    seed: u64,
) -> Result<RoundtripReport<T>> {
    cfg.validate()?;
    fixed.check_hypothesis()?;
    if q_true.n_intervals() != cfg.grid_n {
        return Err(Error::InvalidInput(format!(
            "q has {} intervals but the fit grid has {}",
            q_true.n_intervals(),
            cfg.grid_n
        )));
    }
    let clean = spectral_data::forward(&fixed.problem(q_true.clone())?, cfg.n_modes)?;
    let data = if noise > T::zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut jitter = |v: T| {
            let z: f64 = StandardNormal.sample(&mut rng);
            v * (T::one() + noise * T::lit(z))
        };
        let mu: Vec<T> = clean.mu.iter().map(|&v| jitter(v)).collect();
        let norming: Vec<T> = clean.norming.iter().map(|&v| jitter(v)).collect();
        SpectralData::new(clean.bc, mu, clean.c0, norming)?
    } else {
        clean
    };
    let errors = |q: &GridFunction<T>| -> Result<(T, T)> {
        let d = q - q_true;
        Ok((d.norm(SpaceTag::l2())?, d.norm(SpaceTag::w10())?))
    };
    let report = match reconstruct_q(&data, fixed, cfg) {
        Ok((q, rep)) => {
            let (h0, w10) = errors(&q)?;
            RoundtripReport {
                noise,
                seed,
                h0_error: h0,
                w10_error: w10,
                converged: rep.reached_tol,
                failure: None,
                iterations: rep.iterations,
                residual: rep.residual,
                history: rep.history,
                q_reconstructed: Some(q),
            }
        }
        Err(e @ Error::NoConvergence { .. }) => {
            let (iterations, residual, history) = match &e {
                Error::NoConvergence { iterations, residual, history } => (*iterations, *residual, history.clone()),
                _ => unreachable!(),
            };
            RoundtripReport {
                noise,
                seed,
                h0_error: T::nan(),
                w10_error: T::nan(),
                converged: false,
                failure: Some(e.to_string()),
                iterations,
                residual: T::lit(residual),
                history: history.into_iter().map(T::lit).collect(),
                q_reconstructed: None,
            }
        }
        Err(e) => return Err(e),
    };
    Ok(report)
}
