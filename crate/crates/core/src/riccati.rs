//! Riccati-type maps from a log-derivative `q` to a zero-mean Schrödinger potential, their
//! directional derivatives and damped Gauss–Newton inversion.
//!
//! * `G(q) = q' + q² + 2 q0 q - c0`, `c0 = ∫(q² + 2 q0 q)`;
//! * `P(q) = q' + q² + u(Q) - c0`, `c0 = ∫(q' + q² + u(Q))`, `Q(x) = ∫₀ˣ q`.
//!
//! On the grid `q'` is the fourth-order five-point difference and the mean is removed with
//! the same quadrature used everywhere else, so discrete outputs have zero mean to rounding.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gridfn::GridFunction;
use crate::linalg::{weighted_least_squares, Matrix};
use crate::scalar::Real;

/// Potential `u` as a function of `Q`.
pub trait Potential<T: Real> {
    fn u(&self, big_q: T) -> T;
    fn du(&self, big_q: T) -> T;
}

/// `u ≡ 0`, or the warped-product law `u(Q) = E e^{-4Q/m}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PotentialLaw<T> {
    None,
    Warped { e: T, m: u32 },
}

impl<T: Real> PotentialLaw<T> {
    pub fn warped(e: T, m: u32) -> Result<Self> {
        if !(e >= T::zero()) || !e.is_finite() {
            return Err(Error::InvalidInput(format!("E must be non-negative, got {e}")));
        }
        if m == 0 {
            return Err(Error::InvalidInput("dimension m must be positive".into()));
        }
        Ok(Self::Warped { e, m })
    }
}

impl<T: Real> Potential<T> for PotentialLaw<T> {
    fn u(&self, big_q: T) -> T {
        match *self {
            Self::None => T::zero(),
            Self::Warped { e, m } => e * (-T::lit(4.0) * big_q / T::from_u32(m).unwrap()).exp(),
        }
    }

    fn du(&self, big_q: T) -> T {
        match *self {
            Self::None => T::zero(),
            Self::Warped { m, .. } => -T::lit(4.0) / T::from_u32(m).unwrap() * self.u(big_q),
        }
    }
}

/// `true` iff `u'(t) ≤ 1e-12` at 1001 equispaced samples of `[t_range.0, t_range.1]`.
pub fn condition_u_check<T: Real, P: Potential<T> + ?Sized>(law: &P, t_range: (T, T)) -> bool {
    let samples = 1000;
    let (lo, hi) = t_range;
    let tol = T::lit(1e-12);
    (0..=samples).all(|k| {
        let t = lo + (hi - lo) * T::from_usize_lossy(k) / T::from_usize_lossy(samples);
        law.du(t) <= tol
    })
}

fn remove_mean<T: Real>(g: GridFunction<T>) -> GridFunction<T> {
    let mean = g.integrate();
    g.offset(-mean)
}

/// `G(q)` and its constant `c0`.
pub fn map_g<T: Real>(q: &GridFunction<T>, q0: T) -> (GridFunction<T>, T) {
    let two = T::lit(2.0);
    let nonlinear = q.map(|v| v * v + two * q0 * v);
    let c0 = nonlinear.integrate();
    let p = remove_mean(&q.differentiate_fourth_order() + &nonlinear);
    (p, c0)
}

/// `P(q)` and its constant `c0` (with `q0 = 0`).
pub fn map_p<T: Real, P: Potential<T> + ?Sized>(q: &GridFunction<T>, law: &P) -> (GridFunction<T>, T) {
    let big_q = q.cumulative();
    let nonlinear = q.zip_with(&big_q, |v, bq| v * v + law.u(bq));
    let c0 = nonlinear.integrate();
    let p = remove_mean(&q.differentiate_fourth_order() + &nonlinear);
    (p, c0)
}

/// `(∂G/∂q) f = f' + 2(q0 + q) f - ∫ 2(q0 + q) f`.
pub fn grad_g<T: Real>(q: &GridFunction<T>, q0: T, f: &GridFunction<T>) -> GridFunction<T> {
    let two = T::lit(2.0);
    let lin = q.zip_with(f, |v, w| two * (q0 + v) * w);
    remove_mean(&f.differentiate_fourth_order() + &lin)
}

/// `(∂P/∂q) f = f' + 2 q f + u'(Q) F - ∫(…)`, `F(x) = ∫₀ˣ f`.
pub fn grad_p<T: Real, P: Potential<T> + ?Sized>(
    q: &GridFunction<T>,
    law: &P,
    f: &GridFunction<T>,
) -> GridFunction<T> {
    let two = T::lit(2.0);
    let big_q = q.cumulative();
    let big_f = f.cumulative();
    let du = big_q.map(|bq| law.du(bq));
    let lin = &q.zip_with(f, |v, w| two * v * w) + &du.zip_with(&big_f, |d, w| d * w);
    remove_mean(&f.differentiate_fourth_order() + &lin)
}

/// Controls for the damped Gauss–Newton inversions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions<T> {
    pub max_iter: usize,
    /// Stop once the `L²` residual falls below this.
    pub tol: T,
}

impl<T: Real> Default for NewtonOptions<T> {
    fn default() -> Self {
        let tol = T::lit(1e-10).max(T::epsilon() * T::lit(1e3));
        Self { max_iter: 50, tol }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonReport<T> {
    pub iterations: usize,
    pub residual: T,
    /// Residual before each iteration, ending with the final one.
    pub history: Vec<T>,
}

/// Solves `map(q) = target` for `q ∈ W10` by Gauss–Newton from `q = 0`.
///
/// The residual is taken at all nodes and the unknowns are the interior values; the square
/// interior-only system is singular at `q = 0` for even grids (odd-sized skew-symmetric
/// central differences) while the rectangular one is well conditioned. Steps are halved until
/// the residual decreases. A stationary least-squares point also ends the iteration, which
/// happens for targets outside the discrete image.
pub(crate) fn newton_solve<T: Real>(
    target: &GridFunction<T>,
    opts: &NewtonOptions<T>,
    map: impl Fn(&GridFunction<T>) -> GridFunction<T>,
    grad: impl Fn(&GridFunction<T>, &GridFunction<T>) -> GridFunction<T>,
) -> Result<(GridFunction<T>, NewtonReport<T>)> {
    let n = target.n_intervals();
    let weights = target.quadrature_weights();
    let residual = |q: &GridFunction<T>| &map(q) - target;
    let l2 = |r: &GridFunction<T>| r.inner(r).max(T::zero()).sqrt();

    let mut q = GridFunction::zeros(n);
    let mut r = residual(&q);
    let mut res = l2(&r);
    let mut history = vec![res];
    let stall = T::epsilon() * T::lit(1e3);

    for it in 0..opts.max_iter {
        if !(res >= opts.tol) {
            return Ok((q, NewtonReport { iterations: it, residual: res, history }));
        }
        let columns: Vec<Vec<T>> = (1..n)
            .map(|j| {
                let mut e = vec![T::zero(); n + 1];
                e[j] = T::one();
                grad(&q, &GridFunction::new(e).unwrap()).into_values()
            })
            .collect();
        let jac = Matrix::from_columns(n + 1, &columns);
        let Some(delta) = weighted_least_squares(&jac, &weights, r.values()) else {
            return Err(no_convergence(it, res, history));
        };
        let step_size = delta.iter().fold(T::zero(), |m, d| m.max(d.abs()));
        if step_size <= stall * (T::one() + q.max_abs()) {
            return Ok((q, NewtonReport { iterations: it, residual: res, history }));
        }
        let mut lambda = T::one();
        let mut accepted = None;
        for _ in 0..40 {
            let mut vals = q.values().to_vec();
            for (j, d) in delta.iter().enumerate() {
                vals[j + 1] = vals[j + 1] - lambda * *d;
            }
            let Ok(trial) = GridFunction::new(vals) else {
                lambda = lambda / T::lit(2.0);
                continue;
            };
            let tr = residual(&trial);
            let tres = l2(&tr);
            if tres < res {
                accepted = Some((trial, tr, tres));
                break;
            }
            lambda = lambda / T::lit(2.0);
        }
        match accepted {
            Some((nq, nr, nres)) => {
                q = nq;
                r = nr;
                res = nres;
                history.push(res);
            }
            // no descent along a non-negligible step: the least-squares minimum is reached
            // to working precision unless the residual is still large
            None if step_size <= T::epsilon().sqrt() * (T::one() + q.max_abs()) => {
                return Ok((q, NewtonReport { iterations: it + 1, residual: res, history }));
            }
            None => return Err(no_convergence(it + 1, res, history)),
        }
    }
    if res < opts.tol {
        let iterations = opts.max_iter;
        return Ok((q, NewtonReport { iterations, residual: res, history }));
    }
    Err(no_convergence(opts.max_iter, res, history))
}

fn no_convergence<T: Real>(iterations: usize, residual: T, history: Vec<T>) -> Error {
    Error::NoConvergence {
        iterations,
        residual: residual.to_f64_lossy(),
        history: history.into_iter().map(|v| v.to_f64_lossy()).collect(),
    }
}

fn check_zero_mean<T: Real>(p: &GridFunction<T>) -> Result<()> {
    let mean = p.integrate();
    if mean.abs() > T::lit(1e-6) {
        return Err(Error::InvalidInput(format!("p must have zero mean, found {mean:e}")));
    }
    Ok(())
}

/// Inverts [`map_g`] for fixed `q0`.
pub fn invert_g<T: Real>(
    p: &GridFunction<T>,
    q0: T,
    opts: &NewtonOptions<T>,
) -> Result<(GridFunction<T>, NewtonReport<T>)> {
    check_zero_mean(p)?;
    newton_solve(p, opts, |q| map_g(q, q0).0, |q, f| grad_g(q, q0, f))
}

/// Inverts [`map_p`].
pub fn invert_p<T: Real, P: Potential<T> + ?Sized>(
    p: &GridFunction<T>,
    law: &P,
    opts: &NewtonOptions<T>,
) -> Result<(GridFunction<T>, NewtonReport<T>)> {
    check_zero_mean(p)?;
    newton_solve(p, opts, |q| map_p(q, law).0, |q, f| grad_p(q, law, f))
}
