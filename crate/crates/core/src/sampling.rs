//! Seeded sampling of admissible points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::confocal::{CartesianPoint, EllipsoidalPoint, FocalTriple, Octant};

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Distance below which a point counts as touching a coordinate plane.
pub fn guard_distance(f: &FocalTriple, guard: f64) -> f64 {
    let s = f.span();
    if s > 0.0 {
        guard * s
    } else {
        guard
    }
}

/// Away from every coordinate plane by at least `distance`. The focal conics
/// lie in coordinate planes, so this also keeps points off them.
pub fn clear_of_planes(c: &CartesianPoint, distance: f64) -> bool {
    c.to_array().iter().all(|v| v.abs() >= distance)
}

/// Inside the guard zone: within `guard_distance` of a coordinate plane.
pub fn is_guarded(c: &CartesianPoint, f: &FocalTriple, guard: f64) -> bool {
    !clear_of_planes(c, guard_distance(f, guard))
}

/// Uniform points in the cube `[-half_width, half_width]³` outside the guard
/// zone and at least `min_radius` from the origin.
pub fn guarded_points(
    rng: &mut SampleRng,
    f: &FocalTriple,
    n: usize,
    half_width: f64,
    guard: f64,
    min_radius: f64,
) -> Vec<CartesianPoint> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let c = CartesianPoint::new(
            rng.random_range(-half_width..half_width),
            rng.random_range(-half_width..half_width),
            rng.random_range(-half_width..half_width),
        );
        if !is_guarded(&c, f, guard) && c.norm() >= min_radius {
            out.push(c);
        }
    }
    out
}

/// Interior ellipsoidal points in random octants. `μ` and `ν` keep a
/// fraction `margin < 1/2` of their interval from its endpoints; `λ` runs
/// from `λ₃ + margin · (λ₃ − λ₁)` to `λ₃ + lambda_extent`.
pub fn interior_points(
    rng: &mut SampleRng,
    f: &FocalTriple,
    n: usize,
    margin: f64,
    lambda_extent: f64,
) -> Vec<EllipsoidalPoint> {
    let [l1, l2, l3] = f.as_array();
    let pad = |lo: f64, hi: f64| margin * (hi - lo);
    let sign = |rng: &mut SampleRng| if rng.random_bool(0.5) { 1 } else { -1 };
    (0..n)
        .map(|_| {
            let lambda = rng.random_range(l3 + pad(l1, l3)..l3 + lambda_extent);
            let mu = rng.random_range(l2 + pad(l2, l3)..l3 - pad(l2, l3));
            let nu = rng.random_range(l1 + pad(l1, l2)..l2 - pad(l1, l2));
            let octant = Octant::new(sign(rng), sign(rng), sign(rng)).expect("unit signs");
            EllipsoidalPoint::new(lambda, mu, nu).with_octant(octant)
        })
        .collect()
}
