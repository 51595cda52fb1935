//! Scaled Prüfer shooting for `-y'' + p y = σ y` on `[0, 1]`.
//!
//! With `y = R sin θ`, `y' = k R cos θ` for a fixed scale `k > 0`:
//!
//! ```text
//! θ'     = k cos²θ + (σ - p)/k sin²θ
//! (ln R)' = (k - (σ - p)/k) sin θ cos θ
//! ```
//!
//! alongside `φ = ∂θ/∂σ` (for Newton polishing) and `N = ∫ y²` (for normalization).
//! `p` between grid nodes comes from piecewise cubic interpolation.

use crate::error::{Error, Result};
use crate::gridfn::GridFunction;
use crate::scalar::Real;

/// Left end: `y(0) = 0`, or `y'(0) = a y(0)`.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Left<T> {
    Dirichlet,
    Robin(T),
}

/// Right end: `y(1) = 0`, or `y'(1) = -b y(1)`.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Right<T> {
    Dirichlet,
    Robin(T),
}

pub(crate) struct Shooter<T> {
    n: usize,
    /// `p` on interval `i` as `c0 + c1 t + c2 t² + c3 t³`, `t ∈ [0, 1]` local.
    coeffs: Vec<[T; 4]>,
    pmax: T,
    left: Left<T>,
    right: Right<T>,
}

pub(crate) struct Shot<T> {
    pub theta: T,
    pub phi: T,
    pub ln_r: T,
    pub norm2: T,
    /// `(θ, ln R)` at every grid node when requested.
    pub nodes: Option<Vec<(T, T)>>,
}

/// A converged mode with the data needed for eigenfunctions and norming constants.
pub(crate) struct Mode<T> {
    pub sigma: T,
    pub k: T,
    pub theta0: T,
    pub shot: Shot<T>,
}

impl<T: Real> Shooter<T> {
    pub fn new(p: &GridFunction<T>, left: Left<T>, right: Right<T>) -> Self {
        let n = p.n_intervals();
        let v = p.values();
        let (two, three, six) = (T::lit(2.0), T::lit(3.0), T::lit(6.0));
        let coeffs = (0..n)
            .map(|i| {
                // cubic through nodes s..s+3 re-expressed in the local variable of [i, i+1]
                let s = i.saturating_sub(1).min(n.saturating_sub(3));
                let (f0, f1, f2, f3) = (v[s], v[s + 1], v[s + 2], v[s + 3]);
                let d1 = f1 - f0;
                let d2 = f2 - two * f1 + f0;
                let d3 = f3 - three * f2 + three * f1 - f0;
                // Newton form in u = t + (i - s): f0 + d1 u + d2 u(u-1)/2 + d3 u(u-1)(u-2)/6
                let o = T::from_usize_lossy(i - s);
                let a3 = d3 / six;
                let a2 = d2 / two - d3 / two;
                let a1 = d1 - d2 / two + d3 / three;
                let a0 = f0;
                // shift u = t + o
                let c3 = a3;
                let c2 = a2 + three * a3 * o;
                let c1 = a1 + two * a2 * o + three * a3 * o * o;
                let c0 = a0 + a1 * o + a2 * o * o + a3 * o * o * o;
                [c0, c1, c2, c3]
            })
            .collect();
        Self { n, coeffs, pmax: p.max_abs(), left, right }
    }

    #[inline]
    fn p_at(&self, i: usize, t: T) -> T {
        let c = &self.coeffs[i];
        c[0] + t * (c[1] + t * (c[2] + t * c[3]))
    }

    pub fn theta0(&self, k: T) -> T {
        match self.left {
            Left::Dirichlet => T::zero(),
            Left::Robin(a) => k.atan2(a),
        }
    }

    /// Target angle `θ(1)` for the mode with `count` prior oscillations.
    pub fn target(&self, k: T, count: usize) -> T {
        let base = match self.right {
            Right::Dirichlet => T::PI(),
            Right::Robin(b) => k.atan2(-b),
        };
        base + T::PI() * T::from_usize_lossy(count)
    }

    pub fn shoot(&self, sigma: T, k: T, record: bool) -> Shot<T> {
        let h = T::one() / T::from_usize_lossy(self.n);
        let omega = k + (sigma.abs() + self.pmax) / k;
        let per = (omega * h / T::lit(0.05)).ceil().to_usize().unwrap_or(1).max(1);
        let dt = T::one() / T::from_usize_lossy(per);
        let dx = h * dt;
        let half = T::lit(0.5);
        let (two, six) = (T::lit(2.0), T::lit(6.0));
        let inv_k = T::one() / k;

        let rhs = |p: T, s: &[T; 4]| -> [T; 4] {
            let v = sigma - p;
            let (sn, cs) = s[0].sin_cos();
            let vk = v * inv_k;
            [
                k * cs * cs + vk * sn * sn,
                two * sn * cs * (vk - k) * s[1] + sn * sn * inv_k,
                (k - vk) * sn * cs,
                (two * s[2]).exp() * sn * sn,
            ]
        };
        let axpy = |s: &[T; 4], d: &[T; 4], c: T| [s[0] + c * d[0], s[1] + c * d[1], s[2] + c * d[2], s[3] + c * d[3]];

        let mut s = [self.theta0(k), T::zero(), T::zero(), T::zero()];
        let mut nodes = record.then(|| {
            let mut v = Vec::with_capacity(self.n + 1);
            v.push((s[0], s[2]));
            v
        });
        for i in 0..self.n {
            for j in 0..per {
                let t = T::from_usize_lossy(j) * dt;
                let p0 = self.p_at(i, t);
                let pm = self.p_at(i, t + half * dt);
                let p1 = self.p_at(i, t + dt);
                let k1 = rhs(p0, &s);
                let k2 = rhs(pm, &axpy(&s, &k1, half * dx));
                let k3 = rhs(pm, &axpy(&s, &k2, half * dx));
                let k4 = rhs(p1, &axpy(&s, &k3, dx));
                for c in 0..4 {
                    s[c] = s[c] + dx / six * (k1[c] + two * (k2[c] + k3[c]) + k4[c]);
                }
            }
            if let Some(v) = nodes.as_mut() {
                v.push((s[0], s[2]));
            }
        }
        Shot { theta: s[0], phi: s[1], ln_r: s[2], norm2: s[3], nodes }
    }

    /// Finds the mode with `count` interior oscillations starting from `guess`.
    /// `index` only labels errors.
    pub fn solve(&self, count: usize, guess: T, index: usize) -> Result<Mode<T>> {
        let k = guess.max(T::one()).sqrt();
        let target = self.target(k, count);
        let f = |sigma: T| {
            let shot = self.shoot(sigma, k, false);
            (shot.theta - target, shot.phi)
        };
        let stall = |reason: String| Error::SolverStall { index, reason };

        let mut width = T::lit(10.0) + self.pmax;
        let (mut lo, mut hi) = (guess - width, guess + width);
        let (mut flo, _) = f(lo);
        let mut expansions = 0;
        while flo > T::zero() {
            width = width * T::lit(2.0);
            lo = lo - width;
            flo = f(lo).0;
            expansions += 1;
            if expansions > 60 || !lo.is_finite() {
                return Err(stall(format!("no lower bracket below {}", lo)));
            }
        }
        let (mut fhi, _) = f(hi);
        while fhi < T::zero() {
            width = width * T::lit(2.0);
            hi = hi + width;
            fhi = f(hi).0;
            expansions += 1;
            if expansions > 60 || !hi.is_finite() {
                return Err(stall(format!("no upper bracket above {}", hi)));
            }
        }
        if flo == T::zero() {
            hi = lo;
        }
        if fhi == T::zero() {
            lo = hi;
        }

        let tol = T::epsilon() * T::lit(4.0);
        let two = T::lit(2.0);
        let mut sigma = if flo == T::zero() || fhi == T::zero() {
            lo
        } else {
            // secant start inside the bracket
            lo - flo * (hi - lo) / (fhi - flo)
        };
        for _ in 0..200 {
            if hi - lo <= tol * lo.abs().max(hi.abs()).max(T::one()) {
                break;
            }
            let (fs, dfs) = f(sigma);
            if fs == T::zero() {
                lo = sigma;
                hi = sigma;
                break;
            }
            if fs < T::zero() {
                lo = sigma;
            } else {
                hi = sigma;
            }
            let newton = sigma - fs / dfs;
            let next = if dfs > T::zero() && newton > lo && newton < hi { newton } else { (lo + hi) / two };
            if (next - sigma).abs() <= tol * sigma.abs().max(T::one()) {
                sigma = next;
                lo = sigma;
                hi = sigma;
                break;
            }
            sigma = next;
        }
        if hi - lo > T::lit(1e3) * tol * lo.abs().max(hi.abs()).max(T::one()) {
            return Err(stall(format!("bracket [{lo}, {hi}] did not shrink")));
        }
        let sigma = (lo + hi) / two;
        let shot = self.shoot(sigma, k, true);
        Ok(Mode { sigma, k, theta0: self.theta0(k), shot })
    }
}
