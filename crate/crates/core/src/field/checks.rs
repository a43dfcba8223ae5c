//! Finite-difference oracles for harmonicity of `V` and for `curl ω = ± grad V`.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::{connection_cartesian, potential_cartesian};
use crate::confocal::{CartesianPoint, FocalTriple};
use crate::error::Result;
use crate::sampling;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldCheckConfig {
    pub samples: usize,
    pub seed: u64,
    /// Central-difference step (length units).
    pub step: f64,
    /// Points closer than `guard · (λ₃ − λ₁)` to a coordinate plane are rejected.
    pub guard: f64,
    /// Sampling cube half-width in units of `√(λ₃ − λ₁)`.
    pub extent: f64,
    /// Points closer than this (same units) to the origin are rejected.
    pub min_radius: f64,
}

impl Default for FieldCheckConfig {
    fn default() -> Self {
        Self {
            samples: 100,
            seed: 7,
            step: 1e-3,
            guard: 0.05,
            extent: 2.0,
            min_radius: 0.0,
        }
    }
}

impl FieldCheckConfig {
    /// Sampling for the flat triple, whose only scale is the distance to the
    /// origin: a cube of half-width 4 with `r ≥ 2`.
    pub fn flat(samples: usize, seed: u64, step: f64) -> Self {
        Self {
            samples,
            seed,
            step,
            extent: 4.0,
            min_radius: 2.0,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointFailure {
    pub point: CartesianPoint,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldCheckReport {
    pub samples: usize,
    /// max `|∇²V| / (|∇V| / ℓ)` with `ℓ = √(λ₃ − λ₁)`.
    pub max_laplacian: f64,
    /// max `|curl ω − s grad V| / |grad V|`; `None` for degenerate triples.
    pub max_curl: Option<f64>,
    /// The global sign `s`, fixed once per run.
    pub orientation: Option<f64>,
    pub failures: Vec<PointFailure>,
}

/// Fourth-order central-difference gradient and Laplacian (thirteen points).
pub fn fd_gradient_laplacian<F>(v: F, c: &CartesianPoint, h: f64) -> Result<(Vector3<f64>, f64)>
where
    F: Fn(&CartesianPoint) -> Result<f64>,
{
    let v0 = v(c)?;
    let mut grad = Vector3::zeros();
    let mut lap = 0.0;
    for i in 0..3 {
        let p1 = v(&c.shifted(i, h))?;
        let m1 = v(&c.shifted(i, -h))?;
        let p2 = v(&c.shifted(i, 2.0 * h))?;
        let m2 = v(&c.shifted(i, -2.0 * h))?;
        grad[i] = (8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * h);
        lap += (16.0 * (p1 + m1) - (p2 + m2) - 30.0 * v0) / (12.0 * h * h);
    }
    Ok((grad, lap))
}

/// Fourth-order central-difference curl of a covector field.
///
/// Both stencils are fourth order because `V` and `ω` have large high
/// derivatives near the coordinate planes, where a second-order truncation
/// error at `h = 10⁻³` is already of the size of the tolerance.
pub fn fd_curl<F>(w: F, c: &CartesianPoint, h: f64) -> Result<Vector3<f64>>
where
    F: Fn(&CartesianPoint) -> Result<Vector3<f64>>,
{
    let mut d = Matrix3::zeros();
    for j in 0..3 {
        let p1 = w(&c.shifted(j, h))?;
        let m1 = w(&c.shifted(j, -h))?;
        let p2 = w(&c.shifted(j, 2.0 * h))?;
        let m2 = w(&c.shifted(j, -2.0 * h))?;
        d.set_column(j, &((8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * h)));
    }
    // d[(i, j)] = ∂ⱼ ωᵢ
    Ok(Vector3::new(
        d[(2, 1)] - d[(1, 2)],
        d[(0, 2)] - d[(2, 0)],
        d[(1, 0)] - d[(0, 1)],
    ))
}

/// Runs both identities at `samples` guarded random points.
pub fn field_checks(f: &FocalTriple, cfg: &FieldCheckConfig) -> FieldCheckReport {
    let mut rng = sampling::rng(cfg.seed);
    let ell = f.length_scale();
    let min_radius = cfg.min_radius * ell;
    let points = sampling::guarded_points(
        &mut rng,
        f,
        cfg.samples,
        cfg.extent * ell,
        cfg.guard,
        min_radius,
    );

    let mut failures = Vec::new();
    let mut max_laplacian: f64 = 0.0;
    let mut pairs = Vec::with_capacity(points.len());
    for c in &points {
        match fd_gradient_laplacian(|p| potential_cartesian(p, f), c, cfg.step) {
            Ok((grad, lap)) => {
                max_laplacian = max_laplacian.max(lap.abs() * ell / grad.norm());
                if f.is_strict() {
                    match fd_curl(|p| connection_cartesian(p, f), c, cfg.step) {
                        Ok(curl) => pairs.push((curl, grad)),
                        Err(e) => failures.push(PointFailure {
                            point: *c,
                            reason: e.to_string(),
                        }),
                    }
                }
            }
            Err(e) => failures.push(PointFailure {
                point: *c,
                reason: e.to_string(),
            }),
        }
    }

    let (max_curl, orientation) = if f.is_strict() && !pairs.is_empty() {
        let alignment: f64 = pairs.iter().map(|(c, g)| c.dot(g) / g.norm_squared()).sum();
        let s = if alignment >= 0.0 { 1.0 } else { -1.0 };
        let worst = pairs
            .iter()
            .map(|(c, g)| (c - g * s).norm() / g.norm())
            .fold(0.0, f64::max);
        (Some(worst), Some(s))
    } else {
        (None, None)
    };

    FieldCheckReport {
        samples: points.len(),
        max_laplacian,
        max_curl,
        orientation,
        failures,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::CURL_ORIENTATION;

    #[test]
    fn distinct_triple_passes() {
        let f = FocalTriple::new(0.0, 1.0, 4.0).unwrap();
        let cfg = FieldCheckConfig {
            samples: 20,
            ..Default::default()
        };
        let r = field_checks(&f, &cfg);
        assert!(r.failures.is_empty(), "{:?}", r.failures);
        assert_eq!(r.samples, 20);
        assert!(r.max_laplacian <= 1e-4, "{}", r.max_laplacian);
        assert!(r.max_curl.unwrap() <= 1e-4, "{:?}", r.max_curl);
        assert_eq!(r.orientation, Some(CURL_ORIENTATION));
    }

    #[test]
    fn flat_triple_laplacian_of_inverse_radius() {
        let f = FocalTriple::new(0.0, 0.0, 0.0).unwrap();
        let r = field_checks(&f, &FieldCheckConfig::flat(30, 7, 1e-3));
        assert!(r.max_laplacian <= 1e-6, "{}", r.max_laplacian);
        assert!(r.max_curl.is_none());
    }

    #[test]
    fn reproducible_for_fixed_seed() {
        let f = FocalTriple::new(-1.0, 0.5, 3.0).unwrap();
        let cfg = FieldCheckConfig {
            samples: 5,
            seed: 11,
            ..Default::default()
        };
        assert_eq!(field_checks(&f, &cfg), field_checks(&f, &cfg));
    }

    #[test]
    fn fd_operators_on_known_fields() {
        let c = CartesianPoint::new(0.3, -0.2, 0.5);
        // x² − y²: harmonic, gradient (2x, −2y, 0)
        let (g, lap) = fd_gradient_laplacian(|p| Ok(p.x * p.x - p.y * p.y), &c, 1e-3).unwrap();
        assert!(lap.abs() < 1e-8);
        assert!((g - Vector3::new(0.6, 0.4, 0.0)).norm() < 1e-10);
        // ω = (−y, x, 0) has curl (0, 0, 2)
        let curl = fd_curl(|p| Ok(Vector3::new(-p.y, p.x, 0.0)), &c, 1e-3).unwrap();
        assert!((curl - Vector3::new(0.0, 0.0, 2.0)).norm() < 1e-10);
    }
}
