//! Shared fixtures: seeded sine-series samples with closed forms, and an independent
//! shooting oracle for the weighted problem built on those closed forms.
#![allow(dead_code)]

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use surfrev::gridfn::GridFunction;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `q(x) = Σ c_j sin(k_j π x)`.
#[derive(Debug, Clone)]
pub struct SineSeries {
    pub terms: Vec<(f64, f64)>,
}

impl SineSeries {
    pub fn new(terms: &[(f64, f64)]) -> Self {
        Self { terms: terms.to_vec() }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.terms.iter().map(|&(k, c)| c * (k * PI * x).sin()).sum()
    }

    pub fn deriv(&self, x: f64) -> f64 {
        self.terms.iter().map(|&(k, c)| c * k * PI * (k * PI * x).cos()).sum()
    }

    /// `∫₀ˣ q`.
    pub fn primitive(&self, x: f64) -> f64 {
        self.terms.iter().map(|&(k, c)| c * (1.0 - (k * PI * x).cos()) / (k * PI)).sum()
    }

    /// `‖q'‖` in closed form (integer frequencies).
    pub fn w10_norm(&self) -> f64 {
        let mut s = 0.0;
        for &(k1, c1) in &self.terms {
            for &(k2, c2) in &self.terms {
                if k1 == k2 {
                    s += c1 * c2 * (k1 * PI).powi(2) / 2.0;
                }
            }
        }
        s.sqrt()
    }

    pub fn grid(&self, n: usize) -> GridFunction<f64> {
        let mut v: Vec<f64> = (0..=n).map(|i| self.eval(i as f64 / n as f64)).collect();
        v[0] = 0.0;
        v[n] = 0.0;
        GridFunction::new(v).unwrap()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { terms: self.terms.iter().map(|&(k, c)| (k, c * s)).collect() }
    }
}

/// Random `Σ_{k ≤ kmax} c_k sin(kπx)` (only even `k` when `odd_about_half`) with `‖q'‖` uniform in `(0, radius]`.
pub fn random_series(rng: &mut ChaCha8Rng, kmax: usize, radius: f64, odd_about_half: bool) -> SineSeries {
    let terms: Vec<(f64, f64)> = (1..=kmax)
        .filter(|k| !odd_about_half || k % 2 == 0)
        .map(|k| (k as f64, rng.gen_range(-1.0..1.0) / k as f64))
        .collect();
    let s = SineSeries { terms };
    let target = radius * rng.gen_range(0.05..1.0);
    let norm = s.w10_norm();
    s.scaled(target / norm)
}

/// Boundary condition in oracle form.
#[derive(Debug, Clone, Copy)]
pub enum Bc {
    Dirichlet,
    Mixed(f64),
    Robin(f64, f64),
}

/// `-(w f')'/w + V f = μ f`, `w = ρ²`, integrated by RK4 in Prüfer variables
/// `f = R sin θ`, `w f' = k R cos θ` directly from closed-form coefficients.
pub struct WeightedOracle {
    steps: usize,
    /// `(w, V)` at half steps: index `2i` is `x = i/steps`.
    table: Vec<(f64, f64)>,
    bc: Bc,
    rho1: f64,
}

pub struct OracleMode {
    pub mu: f64,
    pub norming: f64,
}

impl WeightedOracle {
    pub fn new(q: &SineSeries, q0: f64, r0: f64, m: u32, e: f64, bc: Bc, steps: usize) -> Self {
        let mf = m as f64;
        let big_q = |x: f64| q0 * x + q.primitive(x);
        let table = (0..=2 * steps)
            .map(|j| {
                let x = j as f64 / (2 * steps) as f64;
                let bq = big_q(x);
                let w = r0.powf(mf) * (2.0 * bq).exp();
                let v = e / (r0 * r0) * (-4.0 * bq / mf).exp();
                (w, v)
            })
            .collect();
        let rho0 = r0.powf(mf / 2.0);
        let rho1 = rho0 * big_q(1.0).exp();
        Self { steps, table, bc, rho1 }
    }

    fn theta0(&self, k: f64) -> f64 {
        let w0 = self.table[0].0;
        match self.bc {
            Bc::Dirichlet | Bc::Mixed(_) => 0.0,
            Bc::Robin(a, _) => k.atan2(a * w0),
        }
    }

    fn target(&self, k: f64, count: usize) -> f64 {
        let w1 = self.table.last().unwrap().0;
        let base = match self.bc {
            Bc::Dirichlet => PI,
            Bc::Mixed(b) | Bc::Robin(_, b) => k.atan2(-b * w1),
        };
        base + PI * count as f64
    }

    /// `(θ(1), ln R(1))` with `ln R(0) = 0`.
    fn shoot(&self, mu: f64, k: f64) -> (f64, f64) {
        let h = 1.0 / self.steps as f64;
        let rhs = |(w, v): (f64, f64), th: f64| {
            let (s, c) = th.sin_cos();
            let a = k / w;
            let b = w * (mu - v) / k;
            (a * c * c + b * s * s, (a - b) * s * c)
        };
        let (mut th, mut lr) = (self.theta0(k), 0.0);
        for i in 0..self.steps {
            let (c0, cm, c1) = (self.table[2 * i], self.table[2 * i + 1], self.table[2 * i + 2]);
            let k1 = rhs(c0, th);
            let k2 = rhs(cm, th + 0.5 * h * k1.0);
            let k3 = rhs(cm, th + 0.5 * h * k2.0);
            let k4 = rhs(c1, th + h * k3.0);
            th += h / 6.0 * (k1.0 + 2.0 * (k2.0 + k3.0) + k4.0);
            lr += h / 6.0 * (k1.1 + 2.0 * (k2.1 + k3.1) + k4.1);
        }
        (th, lr)
    }

    /// The mode with `count` interior zeros, by bisection on the angle mismatch.
    pub fn mode(&self, count: usize) -> OracleMode {
        let guess = (PI * (count as f64 + 1.0)).powi(2);
        let k = guess.sqrt();
        let target = self.target(k, count);
        let f = |mu: f64| self.shoot(mu, k).0 - target;
        let (mut lo, mut hi) = (-50.0, guess + 50.0);
        while f(lo) > 0.0 {
            lo = 2.0 * lo - 10.0;
        }
        while f(hi) < 0.0 {
            hi = 2.0 * hi + 10.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mu = 0.5 * (lo + hi);
        let (th1, lr1) = self.shoot(mu, k);
        let th0 = self.theta0(k);
        let (w0, w1) = (self.table[0].0, self.table.last().unwrap().0);
        // f = R sin θ, f' = k R cos θ / w
        let f0 = th0.sin();
        let df0 = k * th0.cos() / w0;
        let r1 = lr1.exp();
        let f1 = r1 * th1.sin();
        let df1 = k * r1 * th1.cos() / w1;
        let ratio = match self.bc {
            Bc::Dirichlet => df1 / df0,
            Bc::Mixed(_) => f1 / df0,
            Bc::Robin(..) => f1 / f0,
        };
        OracleMode { mu, norming: (self.rho1 * ratio).abs().ln() }
    }
}
