mod common;

use common::{random_series, rng};
use rand::Rng;
use surfrev::gridfn::{GridFunction, SpaceTag};
use surfrev::riccati::{grad_g, grad_p, invert_g, invert_p, map_g, map_p, NewtonOptions, Potential, PotentialLaw};

const N: usize = 200;

fn l2(f: &GridFunction<f64>) -> f64 {
    f.inner(f).sqrt()
}

#[test]
fn g_estimates() {
    let mut r = rng(11);
    for _ in 0..100 {
        let q = random_series(&mut r, 6, 1.0, false).grid(N);
        let q0 = r.gen_range(-1.0..1.0);
        let (p, _) = map_g(&q, q0);
        let dq = q.differentiate_fourth_order();
        let q2 = q.map(|v| v * v);
        let cube = q.map(|v| v * v * v).integrate();
        let (np, ndq) = (l2(&p), l2(&dq));
        assert!(ndq <= np + 1e-8, "{ndq} > {np}");
        let upper = ndq * ndq + q2.inner(&q2) + 4.0 * q0 * q0 * q.inner(&q) + 4.0 * q0 * cube;
        assert!(np * np <= upper + 1e-8, "{} > {upper}", np * np);
    }
}

fn p_bounds(q: &GridFunction<f64>, law: &PotentialLaw<f64>) -> (f64, f64, f64) {
    let (p, c0) = map_p(q, law);
    let u = q.cumulative().map(|bq| law.u(bq));
    let dq = q.differentiate_fourth_order();
    let q2 = q.map(|v| v * v);
    let (np2, ndq2) = (p.inner(&p), dq.inner(&dq));
    (ndq2, np2, ndq2 + 2.0 * q2.inner(&q2) + 2.0 * u.inner(&u) - c0 * c0)
}

/// Warped laws with `E ≥ m`, the values taken by nonzero eigenvalues of the unit sphere.
#[test]
fn p_estimates() {
    let mut r = rng(12);
    for _ in 0..100 {
        let q = random_series(&mut r, 6, 1.0, false).grid(N);
        let m = r.gen_range(1..=3);
        let law = PotentialLaw::warped(m as f64 * r.gen_range(1.0..3.0), m).unwrap();
        let (lower, np2, upper) = p_bounds(&q, &law);
        assert!(lower <= np2 + 1e-8);
        assert!(np2 <= upper + 1e-8, "{np2} > {upper} for {law:?}");
    }
}

/// The upper bound needs `2(q', u) ≤ ‖q² - u‖²`; for small `E` the left side `≈ (8E/m)‖q‖²`
/// wins, so the bound is not universal.
#[test]
fn p_upper_bound_fails_for_small_e() {
    let q = GridFunction::from_fn(N, |x: f64| 0.3 * (std::f64::consts::PI * x).sin());
    let law = PotentialLaw::warped(0.05, 1).unwrap();
    let (lower, np2, upper) = p_bounds(&q, &law);
    assert!(lower <= np2);
    assert!(np2 > upper + 1e-4, "{np2} vs {upper}");
}

fn relative_gap(a: &GridFunction<f64>, b: &GridFunction<f64>) -> f64 {
    l2(&(a - b)) / l2(b)
}

#[test]
fn gradients_match_central_differences() {
    let mut r = rng(13);
    let eps = 1e-5;
    for _ in 0..20 {
        let q = random_series(&mut r, 5, 1.0, false).grid(N);
        let f = random_series(&mut r, 5, 1.0, false).grid(N);
        let q0 = r.gen_range(-1.0..1.0);
        let (qp, qm) = (&q + &f.scale(eps), &q - &f.scale(eps));
        let fd = (&map_g(&qp, q0).0 - &map_g(&qm, q0).0).scale(0.5 / eps);
        let gap = relative_gap(&grad_g(&q, q0, &f), &fd);
        assert!(gap <= 1e-6, "grad_G gap {gap:e}");

        let law = PotentialLaw::warped(r.gen_range(0.0..2.0), r.gen_range(1..=3)).unwrap();
        let fd = (&map_p(&qp, &law).0 - &map_p(&qm, &law).0).scale(0.5 / eps);
        let gap = relative_gap(&grad_p(&q, &law, &f), &fd);
        assert!(gap <= 1e-6, "grad_P gap {gap:e}");
    }
}

#[test]
fn g_round_trips() {
    let mut r = rng(14);
    let opts = NewtonOptions::default();
    for _ in 0..50 {
        let q = random_series(&mut r, 6, 1.0, false).grid(N);
        let q0 = r.gen_range(-1.0..1.0);
        let (back, rep) = invert_g(&map_g(&q, q0).0, q0, &opts).unwrap();
        let err = (&back - &q).norm(SpaceTag::w10()).unwrap();
        assert!(err <= 1e-7 && rep.iterations <= 25, "err {err:e}, {} iterations", rep.iterations);
        assert!(rep.history.windows(2).all(|w| w[1] <= w[0]));
    }
}

#[test]
fn p_round_trips() {
    let mut r = rng(15);
    let opts = NewtonOptions::default();
    for _ in 0..50 {
        let q = random_series(&mut r, 6, 1.0, false).grid(N);
        let law = PotentialLaw::warped(r.gen_range(0.0..2.0), r.gen_range(1..=3)).unwrap();
        let (back, rep) = invert_p(&map_p(&q, &law).0, &law, &opts).unwrap();
        let err = (&back - &q).norm(SpaceTag::w10()).unwrap();
        assert!(err <= 1e-7 && rep.iterations <= 25, "err {err:e}, {} iterations", rep.iterations);
    }
}

#[test]
fn odd_q_gives_even_p() {
    let mut r = rng(16);
    for _ in 0..10 {
        let q = random_series(&mut r, 8, 1.0, true).grid(N);
        let (p, _) = map_p(&q, &PotentialLaw::None);
        let v = p.values();
        let asym = (0..=N).map(|i| (v[i] - v[N - i]).abs()).fold(0.0, f64::max);
        assert!(asym <= 1e-10, "asymmetry {asym:e}");
    }
}
