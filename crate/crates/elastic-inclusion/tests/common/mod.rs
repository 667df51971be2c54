#![allow(dead_code)]

use elastic_inclusion::{Complex64, ConformalMap, LoadingSpec};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type C = Complex64;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// dyadic values keep the exact rational checks cheap
fn dyadic(x: f64) -> f64 {
    (x * 1048576.0).round() / 1048576.0
}

fn rand_c(r: &mut impl Rng, scale: f64) -> C {
    c(r.gen_range(-1.0..1.0) * scale, r.gen_range(-1.0..1.0) * scale)
}

/// Random map `w + a₀ + Σ_{k≤K} a_k w^{−k}` with `Σ k|a_k|γ^{−k−1} < 1`,
/// which makes it injective on `|w| ≥ γ`.
pub fn random_map(r: &mut impl Rng, max_depth: usize) -> ConformalMap {
    let depth = r.gen_range(1..=max_depth);
    let gamma = dyadic(r.gen_range(0.8..1.3));
    let mut a = vec![rand_c(r, 0.5)];
    let mut raw: Vec<C> = (1..=depth).map(|_| rand_c(r, 1.0)).collect();
    let sum: f64 = raw
        .iter()
        .enumerate()
        .map(|(i, z)| (i + 1) as f64 * z.norm() * gamma.powi(-(i as i32) - 2))
        .sum();
    let target = r.gen_range(0.2..0.6);
    for z in raw.iter_mut() {
        *z *= target / sum;
    }
    a.extend(raw);
    let a = a.into_iter().map(|z| c(dyadic(z.re), dyadic(z.im))).collect();
    ConformalMap::new(gamma, a).expect("random map is injective")
}

pub fn random_loading(r: &mut impl Rng, max_mode: usize) -> LoadingSpec {
    let m = r.gen_range(1..=max_mode);
    let a = (0..m).map(|_| rand_c(r, 1.0)).collect();
    let b = (0..m).map(|_| rand_c(r, 1.0)).collect();
    LoadingSpec::new(a, b).unwrap()
}

pub fn ellipse(gamma: f64) -> ConformalMap {
    ConformalMap::new(gamma, vec![c(0.5, 0.0), c(0.3, 0.0)]).unwrap()
}

pub fn disk() -> ConformalMap {
    ConformalMap::new(1.0, vec![c(0.5, 0.0)]).unwrap()
}

pub fn angles(count: usize) -> Vec<f64> {
    (0..count).map(|j| std::f64::consts::TAU * j as f64 / count as f64).collect()
}
