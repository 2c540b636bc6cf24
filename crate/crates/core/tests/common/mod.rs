#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use weighted_inner::blaschke::{BlaschkeSpec, PrescribedZero};
use weighted_inner::series::{SeriesFn, Space};
use weighted_inner::weights::{make_weight, WeightDescriptor, WeightSequence};
use weighted_inner::Complex64;

pub const N: usize = 2048;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn space(w: WeightSequence, n: usize) -> Space {
    Space::with_degree(w, n).unwrap()
}

pub fn hardy(n: usize) -> Space {
    space(WeightSequence::hardy(), n)
}

pub fn bergman(n: usize) -> Space {
    space(WeightSequence::bergman(), n)
}

pub fn perturbed_dirichlet() -> WeightSequence {
    make_weight(&WeightDescriptor::Perturbed {
        base: Box::new(WeightDescriptor::Dirichlet),
        overrides: BTreeMap::from([(1, 2f64.sqrt())]),
    })
    .unwrap()
}

/// Hardy, Bergman, Dirichlet, power kernel with γ = 3 and perturbed Dirichlet.
pub fn weight_zoo() -> Vec<(&'static str, WeightSequence)> {
    vec![
        ("hardy", WeightSequence::hardy()),
        ("bergman", WeightSequence::bergman()),
        ("dirichlet", WeightSequence::dirichlet()),
        ("power3", WeightSequence::power(3.0)),
        ("perturbed", perturbed_dirichlet()),
    ]
}

pub fn disk_point(rng: &mut ChaCha8Rng, r_min: f64, r_max: f64) -> Complex64 {
    let r = rng.random_range(r_min..=r_max);
    let t = rng.random_range(0.0..std::f64::consts::TAU);
    Complex64::from_polar(r, t)
}

/// Random prescription of total degree in `1..=max_total` with zeros in
/// `0.05 ≤ |z| ≤ r_max`, pairwise separated by `min_sep`, multiplicities ≤ 3.
pub fn random_spec(rng: &mut ChaCha8Rng, max_total: usize, r_max: f64, min_sep: f64) -> BlaschkeSpec {
    let total = rng.random_range(1..=max_total);
    let d0 = rng.random_range(0..=total.min(2));
    let mut left = total - d0;
    let mut zeros: Vec<PrescribedZero> = Vec::new();
    while left > 0 {
        let mult = rng.random_range(1..=left.min(3));
        let z = loop {
            let z = disk_point(rng, 0.05, r_max);
            if zeros.iter().all(|p| (p.z - z).norm() >= min_sep) && z.norm() >= min_sep / 2.0 {
                break z;
            }
        };
        zeros.push(PrescribedZero { z, mult });
        left -= mult;
    }
    BlaschkeSpec { d0, zeros }
}

/// Polynomial `Π (1 - z/rⱼ)` with `|rⱼ|` in `[1.5, 3]`, degree in `1..=max_degree`.
pub fn outer_poly(rng: &mut ChaCha8Rng, s: &Space, max_degree: usize) -> SeriesFn {
    let d = rng.random_range(1..=max_degree);
    let mut coeffs = vec![c(1.0, 0.0)];
    for _ in 0..d {
        let root = disk_point(rng, 1.5, 3.0);
        let mut next = vec![c(0.0, 0.0); coeffs.len() + 1];
        for (i, a) in coeffs.iter().enumerate() {
            next[i] += a;
            next[i + 1] -= a / root;
        }
        coeffs = next;
    }
    s.series(&coeffs).unwrap()
}

pub fn random_poly(rng: &mut ChaCha8Rng, s: &Space, degree: usize) -> SeriesFn {
    let coeffs: Vec<Complex64> = (0..=degree)
        .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    s.series(&coeffs).unwrap()
}
