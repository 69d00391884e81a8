//! Shared oracles for the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Normal};

pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let x = a + h * i as f64;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    s * h / 3.0
}

/// Normal density with mean `mu` and standard deviation `sd`.
pub fn normal_pdf(x: f64, mu: f64, sd: f64) -> f64 {
    let z = (x - mu) / sd;
    (-0.5 * z * z).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_draws(rng: &mut ChaCha8Rng, n: usize, mu: f64, sd: f64) -> Vec<f64> {
    let d = Normal::new(mu, sd).unwrap();
    (0..n).map(|_| d.sample(rng)).collect()
}

pub fn exp_draws(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| Exp1.sample(rng)).collect()
}

/// Equal-weight mixture of N(0, 1) and N(8, √2).
pub fn bimodal_draws(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let a = Normal::new(0.0, 1.0).unwrap();
    let b = Normal::new(8.0, 2f64.sqrt()).unwrap();
    (0..n)
        .map(|_| if rng.random_bool(0.5) { a.sample(rng) } else { b.sample(rng) })
        .collect()
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

pub fn mean_and_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
