//! Rotation profiles, arclength normalization, embedding recovery and Gaussian curvature.
//!
//! A warped metric `dx² + r(x)² g_Y` is parametrized by `ρ = r^{m/2}` and its logarithmic
//! derivative `ρ'/ρ = q0 + q(x)` with `q(0) = q(1) = 0`, so that
//! `r(x) = r0 · exp(2 Q(x) / m)` and `Q(x) = ∫₀ˣ (q0 + q)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gridfn::{GridFunction, HermiteTable, SpaceTag};
use crate::riccati::{self, NewtonOptions, NewtonReport};
use crate::scalar::Real;

/// Tolerance on `|q(0)|, |q(1)|` accepted for a profile.
pub const PROFILE_W10_TOL: f64 = 1e-6;

/// Margin below 1 that `|r'(t)|` must respect for the profile to embed as a graph.
pub const SLOPE_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurfaceProfile<T> {
    /// Dimension of the cross-section `Y`.
    pub m: u32,
    /// `r(0)`.
    pub r0: T,
    /// `ρ'(0) / ρ(0)`.
    pub q0: T,
    pub q: GridFunction<T>,
}

#[derive(Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
struct ProfileWire<T> {
    m: u32,
    r0: T,
    q0: T,
    q: GridFunction<T>,
}

impl<'de, T: Real> Deserialize<'de> for SurfaceProfile<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = ProfileWire::<T>::deserialize(d)?;
        SurfaceProfile::new(w.m, w.r0, w.q0, w.q).map_err(serde::de::Error::custom)
    }
}

impl<T: Real> SurfaceProfile<T> {
    pub fn new(m: u32, r0: T, q0: T, q: GridFunction<T>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInput("dimension m must be positive".into()));
        }
        if !(r0 > T::zero()) || !r0.is_finite() {
            return Err(Error::NonpositiveRadius { node: 0, value: r0.to_f64_lossy() });
        }
        if !q0.is_finite() {
            return Err(Error::InvalidInput("q0 must be finite".into()));
        }
        let membership = q.check_membership(SpaceTag::w10(), T::lit(PROFILE_W10_TOL));
        if !membership.ok {
            return Err(Error::InvalidInput(format!(
                "q is not in W10: {}",
                membership.failures.join("; ")
            )));
        }
        Ok(Self { m, r0, q0, q })
    }

    /// The unit-radius cylinder `r ≡ 1`.
    pub fn cylinder(n_intervals: usize, m: u32) -> Self {
        Self { m, r0: T::one(), q0: T::zero(), q: GridFunction::zeros(n_intervals) }
    }

    pub fn n_intervals(&self) -> usize {
        self.q.n_intervals()
    }

    /// `Q' = q0 + q`.
    pub fn log_derivative(&self) -> GridFunction<T> {
        self.q.offset(self.q0)
    }

    /// `Q(x) = q0 x + ∫₀ˣ q`.
    pub fn big_q(&self) -> GridFunction<T> {
        antiderivative_with_slope(&self.q, self.q0)
    }

    /// `ρ(0) = r0^{m/2}`.
    pub fn rho0(&self) -> T {
        self.r0.powf(T::from_u32(self.m).unwrap() / T::lit(2.0))
    }

    pub fn radius(&self) -> GridFunction<T> {
        radius_from_q(self)
    }
}

fn antiderivative_with_slope<T: Real>(q: &GridFunction<T>, q0: T) -> GridFunction<T> {
    let c = q.cumulative();
    let n = q.n_intervals();
    let vals = c.values().iter().enumerate().map(|(k, &v)| q0 * c.node(k) + v).collect();
    debug_assert_eq!(c.values().len(), n + 1);
    GridFunction::new(vals).expect("finite antiderivative")
}

/// `r(x) = r0 · exp(2 Q(x) / m)`, with `r(0) = r0` exactly.
pub fn radius_from_q<T: Real>(profile: &SurfaceProfile<T>) -> GridFunction<T> {
    radius_from_parts(profile.m, profile.r0, profile.q0, &profile.q)
}

/// [`radius_from_q`] without the profile invariants (`q` need not vanish at the ends).
pub fn radius_from_parts<T: Real>(m: u32, r0: T, q0: T, q: &GridFunction<T>) -> GridFunction<T> {
    let scale = T::lit(2.0) / T::from_u32(m).unwrap();
    antiderivative_with_slope(q, q0).map(|big_q| r0 * (scale * big_q).exp())
}

/// Splits a positive radius into `(q0, q, r0)` with `q0 + q = (log ρ)'`, `ρ = r^{m/2}`.
/// The whole endpoint slope is assigned to `q0`; `q(1) = 0` is not enforced.
pub fn q_from_radius<T: Real>(r: &GridFunction<T>, m: u32) -> Result<(T, GridFunction<T>, T)> {
    check_positive(r)?;
    let half_m = T::from_u32(m).unwrap() / T::lit(2.0);
    let d = r.map(|v| half_m * v.ln()).differentiate();
    let q0 = d.first();
    Ok((q0, d.offset(-q0), r.first()))
}

fn check_positive<T: Real>(r: &GridFunction<T>) -> Result<()> {
    match r.values().iter().position(|&v| !(v > T::zero())) {
        Some(node) => Err(Error::NonpositiveRadius { node, value: r.values()[node].to_f64_lossy() }),
        None => Ok(()),
    }
}

/// Embedding of a surface of revolution `y = f(x) ω`, `x ∈ [0, x0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct EmbeddedSurface<T> {
    pub x0: T,
    /// `f` sampled uniformly on `[0, x0]`.
    pub f_samples: GridFunction<T>,
    /// Arclength `t(x)` at the same uniform `x` nodes.
    pub t_of_x: GridFunction<T>,
}

impl<T: Real> EmbeddedSurface<T> {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,f\n");
        for (k, v) in self.f_samples.values().iter().enumerate() {
            out.push_str(&format!("{},{}\n", self.f_samples.node(k) * self.x0, v));
        }
        out
    }

    /// Silhouette `±f(x)` of the surface.
    pub fn to_svg(&self) -> String {
        let pts: Vec<(f64, f64)> = self
            .f_samples
            .values()
            .iter()
            .enumerate()
            .map(|(k, v)| ((self.f_samples.node(k) * self.x0).to_f64_lossy(), v.to_f64_lossy()))
            .collect();
        let lower: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (x, -y)).collect();
        crate::plot::line_chart(
            "surface of revolution silhouette",
            "x",
            "±f(x)",
            &[("f(x)", &pts), ("-f(x)", &lower)],
        )
    }
}

/// Reparametrizes a profile `f` given on `[0, x0]` by arclength.
/// Returns `r(t) = f(x(t))` sampled uniformly on `[0, t0]` together with `t0`.
pub fn arclength_normalize<T: Real>(f: &GridFunction<T>, x0: T) -> Result<(GridFunction<T>, T)> {
    check_positive(f)?;
    if !(x0 > T::zero()) {
        return Err(Error::InvalidInput("x0 must be positive".into()));
    }
    let n = f.n_intervals();
    let fp = f.differentiate_fourth_order().scale(T::one() / x0);
    let speed = fp.map(|d| (T::one() + d * d).sqrt());
    let t = speed.cumulative().scale(x0);
    let t0 = t.last();
    let xs: Vec<T> = f.nodes().map(|x| x * x0).collect();
    let dxdt: Vec<T> = speed.values().iter().map(|&s| T::one() / s).collect();
    let x_of_t = HermiteTable { xs: t.values(), ys: &xs, slopes: &dxdt };
    let f_of_x = HermiteTable { xs: &xs, ys: f.values(), slopes: fp.values() };
    let r = GridFunction::from_fn(n, |u| f_of_x.eval(x_of_t.eval(u * t0)));
    let slope = r.differentiate_fourth_order().scale(T::one() / t0);
    check_slope(&slope, t0)?;
    Ok((r, t0))
}

fn check_slope<T: Real>(slope: &GridFunction<T>, length: T) -> Result<()> {
    let limit = T::one() - T::lit(SLOPE_MARGIN);
    for (k, &s) in slope.values().iter().enumerate() {
        if !(s.abs() < limit) {
            return Err(Error::SlopeTooSteep {
                t: (slope.node(k) * length).to_f64_lossy(),
                slope: s.to_f64_lossy(),
            });
        }
    }
    Ok(())
}

/// Recovers the embedded surface from an arclength-parametrized radius on `[0, 1]`.
pub fn recover_embedding<T: Real>(r: &GridFunction<T>) -> Result<EmbeddedSurface<T>> {
    recover_embedding_on(r, T::one())
}

/// As [`recover_embedding`] for a radius sampled uniformly on `[0, t0]`.
pub fn recover_embedding_on<T: Real>(r: &GridFunction<T>, t0: T) -> Result<EmbeddedSurface<T>> {
    check_positive(r)?;
    let n = r.n_intervals();
    let rp = r.differentiate_fourth_order().scale(T::one() / t0);
    check_slope(&rp, t0)?;
    let dxdt = rp.map(|d| (T::one() - d * d).sqrt());
    let x = dxdt.cumulative().scale(t0);
    let x0 = x.last();
    let ts: Vec<T> = r.nodes().map(|u| u * t0).collect();
    let dtdx: Vec<T> = dxdt.values().iter().map(|&s| T::one() / s).collect();
    let t_of_x_table = HermiteTable { xs: x.values(), ys: &ts, slopes: &dtdx };
    let r_of_t = HermiteTable { xs: &ts, ys: r.values(), slopes: rp.values() };
    let t_of_x = GridFunction::from_fn(n, |u| t_of_x_table.eval(u * x0));
    let f_samples = t_of_x.map(|t| r_of_t.eval(t));
    Ok(EmbeddedSurface { x0, f_samples, t_of_x })
}

/// Fits `μ_n ≈ (nπ / t0)² + c` over the upper half of the supplied modes (`n` from 1).
pub fn estimate_t0<T: Real>(mu: &[T]) -> Result<(T, T)> {
    if mu.len() < 8 {
        return Err(Error::InvalidInput(format!("need at least 8 eigenvalues, got {}", mu.len())));
    }
    if mu.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidInput("eigenvalues must be strictly increasing".into()));
    }
    let start = mu.len() / 2;
    let (mut s0, mut s1, mut s2, mut sy, mut sxy) = (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
    for (i, &m) in mu.iter().enumerate().skip(start) {
        let n = T::from_usize_lossy(i + 1);
        let x = n * n;
        s0 = s0 + T::one();
        s1 = s1 + x;
        s2 = s2 + x * x;
        sy = sy + m;
        sxy = sxy + x * m;
    }
    let det = s0 * s2 - s1 * s1;
    let lead = (s0 * sxy - s1 * sy) / det;
    let c = (s2 * sy - s1 * sxy) / det;
    if !(lead > T::zero()) {
        return Err(Error::FitFailed(lead.to_f64_lossy()));
    }
    Ok((T::PI() / lead.sqrt(), c))
}

/// Gaussian curvature `𝒦 = -r''/r` of a two-dimensional surface of revolution.
pub fn gaussian_curvature<T: Real>(r: &GridFunction<T>) -> Result<GridFunction<T>> {
    check_positive(r)?;
    if r.n_intervals() < 8 {
        return Err(Error::InvalidInput("curvature needs at least 8 intervals".into()));
    }
    Ok(r.second_derivative().zip_with(r, |d2, v| -d2 / v))
}

/// `𝒦 = -2q' - 4(q0 + q)²` for `r = r0 e^{2Q}`.
pub fn curvature_from_q<T: Real>(q: &GridFunction<T>, q0: T) -> GridFunction<T> {
    let four = T::lit(4.0);
    let two = T::lit(2.0);
    q.differentiate_fourth_order().zip_with(q, |dq, v| -two * dq - four * (q0 + v) * (q0 + v))
}

/// The curvature mapping `ξ = 2q' + 8 q0 q + 4 q² - 𝒦0`, `𝒦0 = 4∫(2 q0 q + q²)`,
/// so that `𝒦 = -ξ - 𝒦0 - 4 q0²` and `ξ` has zero mean.
pub fn curvature_map_g<T: Real>(q: &GridFunction<T>, q0: T) -> (GridFunction<T>, T) {
    let two = T::lit(2.0);
    riccati::map_g(&q.scale(two), two * q0)
}

/// Solves `curvature_map_g(q, q0).0 = xi` for `q ∈ W10` by damped Gauss–Newton from `q = 0`.
pub fn curvature_invert<T: Real>(
    xi: &GridFunction<T>,
    q0: T,
    opts: &NewtonOptions<T>,
) -> Result<(GridFunction<T>, NewtonReport<T>)> {
    let two = T::lit(2.0);
    let mean = xi.integrate();
    if mean.abs() > T::lit(1e-6) {
        return Err(Error::InvalidInput(format!("xi must have zero mean, found {:e}", mean)));
    }
    let (v, report) = riccati::invert_g(xi, two * q0, opts)?;
    Ok((v.scale(T::lit(0.5)), report))
}
