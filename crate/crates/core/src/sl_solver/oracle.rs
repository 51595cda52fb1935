//! Independent check on the shooting solver: a weighted finite-volume discretization of
//! `-(ρ² f')'/ρ² + V f = μ f` with lumped mass, reduced to a symmetric tridiagonal
//! eigenproblem and Richardson-extrapolated across two grids.

use crate::geometry::SurfaceProfile;
use crate::gridfn::HermiteTable;
use crate::linalg::SymTridiagonal;
use crate::scalar::Real;

use super::{BoundaryCondition, SLProblem};

struct Coefficients<T> {
    /// `ρ²` at nodes and midpoints: index `2i` is node `i`, `2i + 1` is the midpoint.
    weight: Vec<T>,
    potential: Vec<T>,
}

fn coefficients<T: Real>(profile: &SurfaceProfile<T>, e: T, n: usize) -> Coefficients<T> {
    let big_q = profile.big_q();
    let slopes = profile.log_derivative();
    let xs: Vec<T> = big_q.nodes().collect();
    let table = HermiteTable { xs: &xs, ys: big_q.values(), slopes: slopes.values() };
    let rho0_sq = profile.rho0() * profile.rho0();
    let m = T::from_u32(profile.m).unwrap();
    let e_scaled = e / (profile.r0 * profile.r0);
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let (weight, potential) = (0..=2 * n)
        .map(|j| {
            let x = T::from_usize_lossy(j) / T::from_usize_lossy(2 * n);
            let qv = table.eval(x);
            (rho0_sq * (two * qv).exp(), e_scaled * (-four * qv / m).exp())
        })
        .unzip();
    Coefficients { weight, potential }
}

fn spectrum<T: Real>(prob: &SLProblem<T>, n: usize, count: usize) -> Vec<T> {
    let c = coefficients(&prob.profile, prob.e, n);
    let h = T::one() / T::from_usize_lossy(n);
    let half = T::lit(0.5);
    let w = |i: usize| c.weight[2 * i];
    let v = |i: usize| c.potential[2 * i];
    let pm = |i: usize| c.weight[2 * i + 1]; // between nodes i and i+1

    let mut diag = Vec::with_capacity(n + 1);
    let mut mass = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let (mut a, mut m) = (T::zero(), T::zero());
        if i > 0 {
            a = a + pm(i - 1) / h;
            m = m + half * h * w(i);
        }
        if i < n {
            a = a + pm(i) / h;
            m = m + half * h * w(i);
        }
        a = a + m * v(i);
        diag.push(a);
        mass.push(m);
    }
    let off: Vec<T> = (0..n).map(|i| -pm(i) / h).collect();

    let (left_robin, right_robin) = match prob.bc {
        BoundaryCondition::Dirichlet => (None, None),
        BoundaryCondition::Mixed { b } => (None, Some(b)),
        BoundaryCondition::Robin { a, b } => (Some(a), Some(b)),
    };
    if let Some(a) = left_robin {
        diag[0] = diag[0] + a * w(0);
    }
    if let Some(b) = right_robin {
        diag[n] = diag[n] + b * w(n);
    }
    let lo = if left_robin.is_some() { 0 } else { 1 };
    let hi = if right_robin.is_some() { n } else { n - 1 };

    let d: Vec<T> = (lo..=hi).map(|i| diag[i] / mass[i]).collect();
    let o: Vec<T> = (lo..hi).map(|i| off[i] / (mass[i] * mass[i + 1]).sqrt()).collect();
    SymTridiagonal::new(d, o).lowest_eigenvalues(count)
}

/// The `n_max` lowest eigenvalues of the weighted problem on an `n_grid` finite-volume grid,
/// extrapolated with the `n_grid / 2` grid as `(4 μ_h - μ_{2h}) / 3`.
pub fn oracle_matrix_eigen<T: Real>(prob: &SLProblem<T>, n_grid: usize, n_max: usize) -> Vec<T> {
    let n_grid = n_grid.max(8) & !1;
    let fine = spectrum(prob, n_grid, n_max);
    let coarse = spectrum(prob, n_grid / 2, n_max);
    let three = T::lit(3.0);
    fine.iter().zip(&coarse).map(|(&f, &c)| (T::lit(4.0) * f - c) / three).collect()
}
