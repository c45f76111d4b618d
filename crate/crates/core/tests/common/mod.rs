#![allow(dead_code)]

use lipfree::free_norm::Molecule;
use lipfree::metric::{NormKind, PointedMetricSpace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `n` distinct points of a `1/8`-grid in `[-4, 4]^dim`, base at index 0.
pub fn random_space(n: usize, dim: usize, norm: NormKind, seed: u64) -> PointedMetricSpace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts: Vec<Vec<f64>> = Vec::new();
    while pts.len() < n {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-32i32..=32) as f64 / 8.0).collect();
        if !pts.contains(&v) {
            pts.push(v);
        }
    }
    PointedMetricSpace::build(pts, norm, 1.0, 0).unwrap()
}

pub fn random_molecule(space: &PointedMetricSpace, seed: u64) -> Molecule {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = Vec::new();
    for i in 0..space.len() {
        if i != space.base() && rng.gen_bool(0.6) {
            coeffs.push((i, rng.gen_range(-2.0..2.0)));
        }
    }
    Molecule::from_coeffs(space, &coeffs).unwrap()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}
