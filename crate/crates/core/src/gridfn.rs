//! Real functions sampled on a uniform grid of `[0, 1]`.
//!
//! Every profile quantity (the log-derivative `q`, its antiderivative `Q`, radii, potentials,
//! eigenfunctions) is carried as a [`GridFunction`]. Quadrature is composite Simpson,
//! derivatives are second order central differences unless a fourth order variant is asked for.

use std::fmt::Write as _;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default number of grid intervals.
pub const DEFAULT_INTERVALS: usize = 800;

/// Samples `values[k] = f(k / n)` for `k = 0..=n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridFunction<T> {
    #[serde(rename = "n")]
    n_intervals: usize,
    values: Vec<T>,
}

#[derive(Deserialize)]
struct GridFunctionWire<T> {
    n: usize,
    values: Vec<T>,
}

impl<'de, T: Real> Deserialize<'de> for GridFunction<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = GridFunctionWire::<T>::deserialize(d)?;
        if wire.values.len() != wire.n + 1 {
            return Err(serde::de::Error::custom(format!(
                "grid function with n = {} needs {} values, got {}",
                wire.n,
                wire.n + 1,
                wire.values.len()
            )));
        }
        GridFunction::new(wire.values).map_err(serde::de::Error::custom)
    }
}

/// Which function space a grid function is checked or measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpaceKind {
    /// `q(0) = q(1) = 0`, normed by `‖q'‖`.
    W10,
    /// Zero mean of `q, q', …, q^(α)`, normed by `‖q^(α)‖`.
    H(u32),
    L2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Parity {
    #[default]
    Any,
    /// `f(x) = f(1 - x)`
    Even,
    /// `f(x) = -f(1 - x)`
    Odd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceTag {
    kind: SpaceKind,
    parity: Parity,
}

impl SpaceTag {
    pub fn new(kind: SpaceKind, parity: Parity) -> Result<Self> {
        if let SpaceKind::H(alpha) = kind {
            if alpha > 2 {
                return Err(Error::UnsupportedOrder(alpha));
            }
        }
        Ok(Self { kind, parity })
    }

    pub fn w10() -> Self {
        Self { kind: SpaceKind::W10, parity: Parity::Any }
    }

    pub fn h(alpha: u32) -> Result<Self> {
        Self::new(SpaceKind::H(alpha), Parity::Any)
    }

    pub fn l2() -> Self {
        Self { kind: SpaceKind::L2, parity: Parity::Any }
    }

    pub fn with_parity(self, parity: Parity) -> Self {
        Self { parity, ..self }
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }
}

/// Outcome of [`GridFunction::check_membership`].
#[derive(Debug, Clone, PartialEq)]
pub struct Membership {
    pub ok: bool,
    pub failures: Vec<String>,
}

impl<T: Real> GridFunction<T> {
    /// Wraps samples at `x_k = k / (len - 1)`.
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::InvalidInput(format!(
                "a grid function needs at least 2 intervals, got {} samples",
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite sample at node {k}")));
        }
        Ok(Self {
            n_intervals: values.len() - 1,
            values,
        })
    }

    pub fn from_fn(n_intervals: usize, f: impl Fn(T) -> T) -> Self {
        assert!(n_intervals >= 2, "a grid function needs at least 2 intervals");
        let n = T::from_usize_lossy(n_intervals);
        let values = (0..=n_intervals).map(|k| f(T::from_usize_lossy(k) / n)).collect();
        Self { n_intervals, values }
    }

    pub fn constant(n_intervals: usize, c: T) -> Self {
        Self::from_fn(n_intervals, |_| c)
    }

    pub fn zeros(n_intervals: usize) -> Self {
        Self::constant(n_intervals, T::zero())
    }

    pub fn n_intervals(&self) -> usize {
        self.n_intervals
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn step(&self) -> T {
        T::one() / T::from_usize_lossy(self.n_intervals)
    }

    pub fn node(&self, k: usize) -> T {
        T::from_usize_lossy(k) / T::from_usize_lossy(self.n_intervals)
    }

    pub fn nodes(&self) -> impl Iterator<Item = T> + '_ {
        (0..=self.n_intervals).map(move |k| self.node(k))
    }

    pub fn first(&self) -> T {
        self.values[0]
    }

    pub fn last(&self) -> T {
        self.values[self.n_intervals]
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            n_intervals: self.n_intervals,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        assert_eq!(self.n_intervals, other.n_intervals, "grid mismatch");
        Self {
            n_intervals: self.n_intervals,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn scale(&self, c: T) -> Self {
        self.map(|v| v * c)
    }

    pub fn offset(&self, c: T) -> Self {
        self.map(|v| v + c)
    }

    /// Composite Simpson weights. An odd interval count closes the last panel with the
    /// three-point rule `h/12 (-f_{n-2} + 8 f_{n-1} + 5 f_n)`.
    pub fn quadrature_weights(&self) -> Vec<T> {
        simpson_weights(self.n_intervals)
    }

    /// `∫₀¹ f dx`.
    pub fn integrate(&self) -> T {
        let w = self.quadrature_weights();
        w.iter().zip(&self.values).map(|(&w, &v)| w * v).sum()
    }

    /// `∫₀¹ f g dx`.
    pub fn inner(&self, other: &Self) -> T {
        assert_eq!(self.n_intervals, other.n_intervals, "grid mismatch");
        let w = self.quadrature_weights();
        w.iter()
            .zip(self.values.iter().zip(&other.values))
            .map(|(&w, (&a, &b))| w * a * b)
            .sum()
    }

    /// Antiderivative `F(x) = ∫₀ˣ f`, exact for cubics at even nodes (Simpson partial
    /// sums) and for quadratics at odd nodes; `F(1)` agrees with [`Self::integrate`].
    pub fn cumulative(&self) -> Self {
        let n = self.n_intervals;
        let f = &self.values;
        let h = self.step();
        let third = h / T::lit(3.0);
        let twelfth = h / T::lit(12.0);
        let (five, eight, four) = (T::lit(5.0), T::lit(8.0), T::lit(4.0));
        let mut out = vec![T::zero(); n + 1];
        for k in 1..=n {
            out[k] = if k % 2 == 0 {
                out[k - 2] + third * (f[k - 2] + four * f[k - 1] + f[k])
            } else if k < n {
                out[k - 1] + twelfth * (five * f[k - 1] + eight * f[k] - f[k + 1])
            } else {
                out[k - 1] + twelfth * (eight * f[k - 1] + five * f[k] - f[k - 2])
            };
        }
        Self { n_intervals: n, values: out }
    }

    /// Second order central differences, one-sided second order stencils at the ends.
    pub fn differentiate(&self) -> Self {
        let n = self.n_intervals;
        let f = &self.values;
        let inv2h = T::from_usize_lossy(n) / T::lit(2.0);
        let four = T::lit(4.0);
        let mut d = vec![T::zero(); n + 1];
        // written in difference form so that constants differentiate to exactly zero
        d[0] = (four * (f[1] - f[0]) - (f[2] - f[0])) * inv2h;
        d[n] = (four * (f[n] - f[n - 1]) - (f[n] - f[n - 2])) * inv2h;
        for k in 1..n {
            d[k] = (f[k + 1] - f[k - 1]) * inv2h;
        }
        Self { n_intervals: n, values: d }
    }

    /// Fourth order five-point differences (one-sided near the ends). Needs `n ≥ 4`.
    pub fn differentiate_fourth_order(&self) -> Self {
        let n = self.n_intervals;
        assert!(n >= 4, "fourth order derivative needs at least 4 intervals");
        let f = &self.values;
        let inv12h = T::from_usize_lossy(n) / T::lit(12.0);
        let c = |v: f64| T::lit(v);
        let mut d = vec![T::zero(); n + 1];
        d[0] = left5(&f[..5]) * inv12h;
        d[1] = (c(3.0) * (f[1] - f[0]) + c(18.0) * (f[2] - f[1]) - c(6.0) * (f[3] - f[1]) + (f[4] - f[1])) * inv12h;
        d[n] = -left5(&[f[n], f[n - 1], f[n - 2], f[n - 3], f[n - 4]]) * inv12h;
        d[n - 1] = -(c(3.0) * (f[n - 1] - f[n]) + c(18.0) * (f[n - 2] - f[n - 1]) - c(6.0) * (f[n - 3] - f[n - 1])
            + (f[n - 4] - f[n - 1]))
            * inv12h;
        for k in 2..n - 1 {
            d[k] = (f[k - 2] - c(8.0) * f[k - 1] + c(8.0) * f[k + 1] - f[k + 2]) * inv12h;
        }
        Self { n_intervals: n, values: d }
    }

    /// Second derivative: central three-point interior stencil, one-sided four-point ends.
    pub fn second_derivative(&self) -> Self {
        let n = self.n_intervals;
        assert!(n >= 3, "second derivative needs at least 3 intervals");
        let f = &self.values;
        let inv_h2 = T::from_usize_lossy(n * n);
        let (two, four, five) = (T::lit(2.0), T::lit(4.0), T::lit(5.0));
        let mut d = vec![T::zero(); n + 1];
        d[0] = (two * f[0] - five * f[1] + four * f[2] - f[3]) * inv_h2;
        d[n] = (two * f[n] - five * f[n - 1] + four * f[n - 2] - f[n - 3]) * inv_h2;
        for k in 1..n {
            d[k] = (f[k - 1] - two * f[k] + f[k + 1]) * inv_h2;
        }
        Self { n_intervals: n, values: d }
    }

    /// Fourth order one-sided derivative at `x = 0`.
    pub fn left_derivative(&self) -> T {
        let f = &self.values;
        left5(&f[..5]) * T::from_usize_lossy(self.n_intervals) / T::lit(12.0)
    }

    /// Fourth order one-sided derivative at `x = 1`.
    pub fn right_derivative(&self) -> T {
        let n = self.n_intervals;
        let f = &self.values;
        -left5(&[f[n], f[n - 1], f[n - 2], f[n - 3], f[n - 4]]) * T::from_usize_lossy(n) / T::lit(12.0)
    }

    fn derivative_of_order(&self, alpha: u32) -> Result<Self> {
        match alpha {
            0 => Ok(self.clone()),
            1 => Ok(self.differentiate()),
            2 => Ok(self.second_derivative()),
            a => Err(Error::UnsupportedOrder(a)),
        }
    }

    /// The norm of the space named by `tag`: `‖f'‖` for `W10`, `‖f^(α)‖` for `H(α)`,
    /// `‖f‖` for `L2`. Membership is not enforced.
    pub fn norm(&self, tag: SpaceTag) -> Result<T> {
        let g = match tag.kind {
            SpaceKind::W10 => self.differentiate(),
            SpaceKind::H(alpha) => self.derivative_of_order(alpha)?,
            SpaceKind::L2 => self.clone(),
        };
        Ok(g.inner(&g).max(T::zero()).sqrt())
    }

    /// Tolerance-based membership test with a description of every violated constraint.
    pub fn check_membership(&self, tag: SpaceTag, tol: T) -> Membership {
        let mut failures = Vec::new();
        match tag.kind {
            SpaceKind::W10 => {
                if self.first().abs() > tol {
                    failures.push(format!("|f(0)| = {:e} exceeds {:e}", self.first(), tol));
                }
                if self.last().abs() > tol {
                    failures.push(format!("|f(1)| = {:e} exceeds {:e}", self.last(), tol));
                }
            }
            SpaceKind::H(alpha) => {
                for j in 0..=alpha {
                    match self.derivative_of_order(j) {
                        Ok(d) => {
                            let m = d.integrate();
                            if m.abs() > tol {
                                failures.push(format!("|∫ f^({j})| = {:e} exceeds {:e}", m.abs(), tol));
                            }
                        }
                        Err(e) => failures.push(e.to_string()),
                    }
                }
            }
            SpaceKind::L2 => {}
        }
        if tag.parity != Parity::Any {
            let sign = if tag.parity == Parity::Even { T::one() } else { -T::one() };
            let n = self.n_intervals;
            let dev = (0..=n)
                .map(|k| (self.values[k] - sign * self.values[n - k]).abs())
                .fold(T::zero(), T::max);
            if dev > tol {
                failures.push(format!("{:?} symmetry violated by {:e}", tag.parity, dev));
            }
        }
        Membership {
            ok: failures.is_empty(),
            failures,
        }
    }

    /// `(f(x) ± f(1 - x)) / 2`; `Any` returns `f` unchanged.
    pub fn project_parity(&self, parity: Parity) -> Self {
        let n = self.n_intervals;
        let half = T::lit(0.5);
        let values = match parity {
            Parity::Any => self.values.clone(),
            Parity::Even => (0..=n).map(|k| half * (self.values[k] + self.values[n - k])).collect(),
            Parity::Odd => (0..=n).map(|k| half * (self.values[k] - self.values[n - k])).collect(),
        };
        Self { n_intervals: n, values }
    }

    /// Cubic Lagrange interpolation through the four nodes surrounding `x`.
    pub fn sample(&self, x: T) -> T {
        let n = self.n_intervals;
        let s = (x * T::from_usize_lossy(n)).max(T::zero()).min(T::from_usize_lossy(n));
        let mut k = s.floor().to_usize().unwrap_or(0).min(n - 1);
        let t = s - T::from_usize_lossy(k);
        if n < 3 {
            let f = &self.values;
            return f[k] + t * (f[k + 1] - f[k]);
        }
        // stencil nodes k-1..k+2 shifted inward at the ends
        let mut start = k.saturating_sub(1);
        if start + 3 > n {
            start = n - 3;
        }
        let u = t + T::from_usize_lossy(k) - T::from_usize_lossy(start);
        k = start;
        let f = &self.values[k..k + 4];
        lagrange4(f, u)
    }

    /// Rescales the samples' abscissa `[0, 1] → [0, length]` for CSV export.
    pub fn to_csv(&self, length: T) -> String {
        let mut out = String::from("x,value\n");
        for (k, v) in self.values.iter().enumerate() {
            let _ = writeln!(out, "{},{}", self.node(k) * length, v);
        }
        out
    }
}

/// `12 h f'(x0)` from five samples `f(x0 + k h)`, fourth order, exact zero on constants.
#[inline]
fn left5<T: Real>(f: &[T]) -> T {
    let c = |v: f64| T::lit(v);
    c(48.0) * (f[1] - f[0]) - c(36.0) * (f[2] - f[0]) + c(16.0) * (f[3] - f[0]) - c(3.0) * (f[4] - f[0])
}

/// Lagrange cubic through equispaced values at abscissae 0, 1, 2, 3, evaluated at `u`.
#[inline]
fn lagrange4<T: Real>(f: &[T], u: T) -> T {
    let (one, two, three, six) = (T::one(), T::lit(2.0), T::lit(3.0), T::lit(6.0));
    let l0 = -(u - one) * (u - two) * (u - three) / six;
    let l1 = u * (u - two) * (u - three) / two;
    let l2 = -u * (u - one) * (u - three) / two;
    let l3 = u * (u - one) * (u - two) / six;
    f[0] * l0 + f[1] * l1 + f[2] * l2 + f[3] * l3
}

pub(crate) fn simpson_weights<T: Real>(n: usize) -> Vec<T> {
    let h = T::one() / T::from_usize_lossy(n);
    let mut w = vec![T::zero(); n + 1];
    let even_n = if n.is_multiple_of(2) { n } else { n - 1 };
    let third = h / T::lit(3.0);
    for k in (0..even_n).step_by(2) {
        w[k] = w[k] + third;
        w[k + 1] = w[k + 1] + T::lit(4.0) * third;
        w[k + 2] = w[k + 2] + third;
    }
    if even_n < n {
        let twelfth = h / T::lit(12.0);
        w[n - 2] = w[n - 2] - twelfth;
        w[n - 1] = w[n - 1] + T::lit(8.0) * twelfth;
        w[n] = w[n] + T::lit(5.0) * twelfth;
    }
    w
}

/// Cubic Hermite interpolation on a strictly increasing abscissa table with prescribed
/// slopes; monotone data with positive slopes stays monotone for smooth inputs.
pub(crate) struct HermiteTable<'a, T> {
    pub xs: &'a [T],
    pub ys: &'a [T],
    pub slopes: &'a [T],
}

impl<T: Real> HermiteTable<'_, T> {
    pub fn eval(&self, x: T) -> T {
        let n = self.xs.len();
        let k = match self.xs.binary_search_by(|v| v.partial_cmp(&x).unwrap_or(std::cmp::Ordering::Less)) {
            Ok(i) => return self.ys[i],
            Err(0) => 0,
            Err(i) if i >= n => n - 2,
            Err(i) => i - 1,
        };
        let (x0, x1) = (self.xs[k], self.xs[k + 1]);
        let h = x1 - x0;
        let t = (x - x0) / h;
        let (one, two, three) = (T::one(), T::lit(2.0), T::lit(3.0));
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = two * t3 - three * t2 + one;
        let h10 = t3 - two * t2 + t;
        let h01 = -two * t3 + three * t2;
        let h11 = t3 - t2;
        h00 * self.ys[k] + h10 * h * self.slopes[k] + h01 * self.ys[k + 1] + h11 * h * self.slopes[k + 1]
    }
}

impl<T: Real> Add for &GridFunction<T> {
    type Output = GridFunction<T>;
    fn add(self, rhs: Self) -> GridFunction<T> {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl<T: Real> Sub for &GridFunction<T> {
    type Output = GridFunction<T>;
    fn sub(self, rhs: Self) -> GridFunction<T> {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl<T: Real> Mul for &GridFunction<T> {
    type Output = GridFunction<T>;
    fn mul(self, rhs: Self) -> GridFunction<T> {
        self.zip_with(rhs, |a, b| a * b)
    }
}

impl<T: Real> Neg for &GridFunction<T> {
    type Output = GridFunction<T>;
    fn neg(self) -> GridFunction<T> {
        self.map(|v| -v)
    }
}
