mod common;

use std::f64::consts::PI;

use common::{random_series, rng, Bc, SineSeries, WeightedOracle};
use rand::Rng;
use surfrev::geometry::SurfaceProfile;
use surfrev::gridfn::GridFunction;
use surfrev::sl_solver::{
    eigen_results, eigenvalues, norming_constant, oracle_matrix_eigen, sign_changes, to_schrodinger,
    BoundaryCondition, SLProblem,
};

fn problem(q: &SineSeries, q0: f64, m: u32, e: f64, bc: BoundaryCondition<f64>, n: usize) -> SLProblem<f64> {
    SLProblem::new(SurfaceProfile::new(m, 1.0, q0, q.grid(n)).unwrap(), e, bc).unwrap()
}

fn oracle_bc(bc: BoundaryCondition<f64>) -> Bc {
    match bc {
        BoundaryCondition::Dirichlet => Bc::Dirichlet,
        BoundaryCondition::Mixed { b } => Bc::Mixed(b),
        BoundaryCondition::Robin { a, b } => Bc::Robin(a, b),
    }
}

/// Schrödinger eigenvalues plus `c0` reproduce the weighted spectrum, and the shifted
/// Schrödinger norming constants the weighted ones, against an independent weighted shooter.
#[test]
fn unitary_equivalence_sweep() {
    let mut r = rng(31);
    let families = [
        BoundaryCondition::Dirichlet,
        BoundaryCondition::Mixed { b: 0.7 },
        BoundaryCondition::Robin { a: 1.2, b: -0.4 },
    ];
    let modes = 5;
    let mut worst = (0.0f64, 0.0f64);
    for bc in families {
        for _ in 0..20 {
            let q = random_series(&mut r, 4, 1.0, false);
            let q0 = r.gen_range(-0.5..0.5);
            let e = r.gen_range(0.0..2.0);
            let m = r.gen_range(1..=3);
            let prob = problem(&q, q0, m, e, bc, 800);
            let form = to_schrodinger(&prob);
            let sigma = form.sigma(modes).unwrap();
            let oracle = WeightedOracle::new(&q, q0, 1.0, m, e, oracle_bc(bc), 4000);
            let first = bc.first_index();
            for (j, s) in sigma.iter().enumerate() {
                let n = first + j;
                let o = oracle.mode(n - first);
                let rel = ((s + form.c0) - o.mu).abs() / o.mu.abs().max(1.0);
                let kappa = form.norming_constant(n).unwrap() + form.log_rho0;
                let abs = (kappa - o.norming).abs();
                worst = (worst.0.max(rel), worst.1.max(abs));
                assert!(rel <= 1e-6, "{bc:?} n={n}: μ {} vs {}", s + form.c0, o.mu);
                assert!(abs <= 1e-6, "{bc:?} n={n}: κ {kappa} vs {}", o.norming);
                assert!((norming_constant(&prob, n).unwrap() - kappa).abs() <= 1e-12);
            }
        }
    }
    eprintln!("worst relative eigenvalue gap {:e}, norming gap {:e}", worst.0, worst.1);
}

#[test]
fn oscillation_and_orthonormality() {
    let q = SineSeries::new(&[(2.0, 0.2), (3.0, -0.05)]);
    for bc in [BoundaryCondition::Dirichlet, BoundaryCondition::Mixed { b: 0.5 }, BoundaryCondition::Robin { a: 0.3, b: 1.0 }] {
        let prob = problem(&q, 0.2, 2, 1.0, bc, 800);
        let res = eigen_results(&prob, 7).unwrap();
        let weight = prob.profile.radius().map(|r| r * r);
        for (i, a) in res.iter().enumerate() {
            let expected = match bc {
                BoundaryCondition::Dirichlet => a.index - 1,
                _ => a.index,
            };
            assert_eq!(sign_changes(&a.eigenfunction), expected, "{bc:?} mode {}", a.index);
            if i > 0 {
                assert!(a.mu > res[i - 1].mu);
            }
            for b in &res[..=i] {
                let ip = (&(&a.eigenfunction * &b.eigenfunction) * &weight).integrate();
                let delta = if a.index == b.index { 1.0 } else { 0.0 };
                assert!((ip - delta).abs() <= 1e-6, "{bc:?} <f{}, f{}> = {ip}", a.index, b.index);
            }
        }
    }
}

#[test]
fn matrix_oracle_agreement() {
    let q = GridFunction::from_fn(800, |x: f64| 0.2 * (2.0 * PI * x).sin());
    let prob = SLProblem::new(SurfaceProfile::new(1, 1.0, 0.0, q).unwrap(), 0.0, BoundaryCondition::Dirichlet).unwrap();
    let mu = eigenvalues(&prob, 10).unwrap();
    let oracle = oracle_matrix_eigen(&prob, 2000, 10);
    for (a, b) in mu.iter().zip(&oracle) {
        assert!((a - b).abs() / b <= 1e-5, "{a} vs {b}");
    }
}

#[test]
fn single_precision_generic() {
    let prob = SLProblem::new(SurfaceProfile::<f32>::cylinder(200, 1), 0.0f32, BoundaryCondition::Dirichlet).unwrap();
    let mu = eigenvalues(&prob, 5).unwrap();
    for (n, m) in mu.iter().enumerate() {
        let exact = (std::f32::consts::PI * (n + 1) as f32).powi(2);
        assert!((m - exact).abs() / exact < 1e-4, "{m} vs {exact}");
    }
}
