//! Independent oracles for the integration tests. Nothing here calls into the
//! optimizer or the closed-form prox maps.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rbc::{compose_probability, Dataset, FlowKind, ModelSpec, ObjectiveConfig};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Golden-section minimum of a convex scalar function on `[lo, hi]`.
pub fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - r * (hi - lo);
    let mut b = lo + r * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    while hi - lo > 1e-11 {
        if fa < fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - r * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + r * (hi - lo);
            fb = f(b);
        }
    }
    0.5 * (lo + hi)
}

/// Brute-force minimizer of `½(x - z)² + γ ψ(x)`: a grid scan followed by
/// golden-section refinement around the best grid cell.
pub fn brute_force_prox(z: f64, gamma: f64, psi: impl Fn(f64) -> f64) -> f64 {
    let h = |x: f64| 0.5 * (x - z) * (x - z) + gamma * psi(x);
    let radius = z.abs() + 1.0;
    let cells = 4000;
    let step = 2.0 * radius / cells as f64;
    let best = (0..=cells)
        .map(|i| -radius + i as f64 * step)
        .min_by(|a, b| h(*a).partial_cmp(&h(*b)).unwrap())
        .unwrap();
    golden_min(h, best - step, best + step)
}

/// Central finite differences of `f` at `x`.
pub fn finite_diff(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Plain Newton–Raphson for logistic regression with an intercept column.
pub fn newton_logistic(x: &Array2<f64>, y: &[u8]) -> Vec<f64> {
    let (n, d) = x.dim();
    let design = DMatrix::from_fn(n, d + 1, |i, j| if j == 0 { 1.0 } else { x[[i, j - 1]] });
    let target = DVector::from_iterator(n, y.iter().map(|&v| v as f64));
    let mut beta = DVector::zeros(d + 1);
    for _ in 0..100 {
        let eta = &design * &beta;
        let mu = eta.map(|e| 1.0 / (1.0 + (-e).exp()));
        let w = mu.map(|m| m * (1.0 - m));
        let grad = design.transpose() * (&target - &mu);
        let mut hess = DMatrix::zeros(d + 1, d + 1);
        for i in 0..n {
            let row = design.row(i);
            hess += w[i] * row.transpose() * row;
        }
        let delta = hess.cholesky().expect("positive definite").solve(&grad);
        beta += &delta;
        if delta.norm() < 1e-14 {
            break;
        }
    }
    beta.iter().copied().collect()
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, n: usize, d: usize, scale: f64) -> Array2<f64> {
    Array2::from_shape_fn((n, d), |_| scale * rng.sample::<f64, _>(StandardNormal))
}

/// Random data from a logistic model with modest effects.
pub fn logistic_data(seed: u64, n: usize, d: usize) -> Dataset {
    let mut r = rng(seed);
    let x = gaussian_matrix(&mut r, n, d, 1.0);
    let beta: Vec<f64> = (0..d).map(|_| r.random_range(-1.0..1.0)).collect();
    let y = x
        .rows()
        .into_iter()
        .map(|row| {
            let eta: f64 = row.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>() - 0.2;
            u8::from(r.random::<f64>() < 1.0 / (1.0 + (-eta).exp()))
        })
        .collect();
    Dataset::unnamed(x, y).unwrap()
}

/// Random three-flow model over `d` covariates with small coefficients, all intercepts on.
pub fn random_three_flow(r: &mut ChaCha8Rng, d: usize, scale: f64) -> ModelSpec {
    let idx: Vec<usize> = (0..d).collect();
    let mut m = ModelSpec::canonical(&idx, true);
    for f in &mut m.flows {
        f.has_intercept = true;
    }
    let params: Vec<f64> = (0..m.n_params()).map(|_| scale * r.random_range(-1.0..1.0)).collect();
    m.set_params(&params);
    m
}

pub fn uniform_config(penalty: rbc::PenaltySpec) -> ObjectiveConfig {
    ObjectiveConfig::uniform(&FlowKind::CANONICAL, penalty)
}

/// Records a fitted trace and asserts it never increases beyond 1e-12.
pub fn assert_monotone(trace: &[f64]) {
    for (t, w) in trace.windows(2).enumerate() {
        assert!(w[1] <= w[0] + 1e-12, "objective rose at step {t}: {} -> {}", w[0], w[1]);
    }
}

/// Logistic data with bounded covariates, so fitted probabilities stay inside (0, 1).
pub fn bounded_data(seed: u64, n: usize, d: usize) -> Dataset {
    let mut r = rng(seed);
    let x = Array2::from_shape_fn((n, d), |_| r.random_range(-1.0..1.0));
    let mut truth = ModelSpec::canonical(&(0..d).collect::<Vec<_>>(), true);
    truth.flows[0].coefficients = (0..d).map(|_| r.random_range(-0.5..0.5)).collect();
    let y = (0..n)
        .map(|i| {
            let p = compose_probability(&truth, x.row(i).as_slice().unwrap()).unwrap();
            u8::from(r.random::<f64>() < p.clamp(0.0, 1.0))
        })
        .collect();
    Dataset::unnamed(x, y).unwrap()
}

/// Smallest distance of a fitted probability from 0 or 1 over the rows of `data`.
pub fn boundary_margin(model: &ModelSpec, data: &Dataset) -> f64 {
    data.x()
        .rows()
        .into_iter()
        .map(|row| {
            let p = compose_probability(model, row.as_slice().unwrap()).unwrap();
            p.min(1.0 - p)
        })
        .fold(1.0, f64::min)
}
