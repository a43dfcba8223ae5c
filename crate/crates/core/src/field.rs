//! The harmonic potential `V` and its connection one-form `ω`.
//!
//! In ellipsoidal coordinates
//!
//! ```text
//! V = R(λ) / ((λ−μ)(λ−ν))
//! ω = ½ (λ−ν)/((μ−λ)(μ−ν)) · S(μ)/T(ν) dν  −  ½ (λ−μ)/((ν−λ)(ν−μ)) · T(ν)/S(μ) dμ
//! ```
//!
//! and `curl ω = grad V` on Cartesian space once the pullback is dressed with
//! the octant parity `s_x s_y s_z`.
//!
//! The Cartesian-side potential `V⁻¹ = R(λ) Σ xᵢ²/(λ−λᵢ)²` only needs the
//! largest confocal root, so it also covers coincident focal constants, where
//! it reduces to `1/r` (flat) or a two-centre potential.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::confocal::{
    branch_radicals, confocal_parameter, cubic, from_cartesian, node_products, normalized_jacobian,
    scale_factors, CartesianPoint, EllipsoidalPoint, FocalKind, FocalTriple,
};
use crate::error::{singular, Error, Result};

pub mod checks;

/// Sign `s` in `curl ω = s · grad V` for the Cartesian connection.
pub const CURL_ORIENTATION: f64 = 1.0;

/// Relative distance (to the family's scale) treated as contact with a focal conic.
const CONIC_TOL: f64 = 1e-12;

fn scale_of(f: &FocalTriple, c: &CartesianPoint) -> f64 {
    let s = f.span();
    if s > 0.0 {
        s
    } else {
        c.norm_squared().max(f64::MIN_POSITIVE)
    }
}

/// `V = R(λ)/((λ−μ)(λ−ν))`.
pub fn potential(p: &EllipsoidalPoint, f: &FocalTriple) -> Result<f64> {
    p.check_interlacing(f)?;
    let gap = p.lambda - p.mu;
    if gap <= CONIC_TOL * f.span() {
        return Err(singular("lambda = mu: point on the focal ellipse"));
    }
    let r = cubic(p.lambda, f).0.max(0.0).sqrt();
    Ok(r / (gap * (p.lambda - p.nu)))
}

/// The pieces shared by the Cartesian potential and its gradient.
struct CartesianParts {
    lambda: f64,
    q: f64,
    dq: f64,
    /// `Σ xᵢ²/(λ−λᵢ)²`
    p2: f64,
    /// `Σ xᵢ²/(λ−λᵢ)³`
    p3: f64,
    gaps: [f64; 3],
}

fn cartesian_parts(c: &CartesianPoint, f: &FocalTriple) -> Result<CartesianParts> {
    if !c.is_finite() {
        return Err(Error::Domain("non-finite Cartesian point".into()));
    }
    let lambda = confocal_parameter(c, f);
    let l3 = f.lambda3();
    if lambda - l3 <= CONIC_TOL * scale_of(f, c) {
        return Err(singular(format!(
            "confocal parameter {lambda} at lambda3: point on the focal disk"
        )));
    }
    let l = f.as_array();
    let gaps = [lambda - l[0], lambda - l[1], lambda - l[2]];
    let xs = c.to_array();
    let mut p2 = 0.0;
    let mut p3 = 0.0;
    for i in 0..3 {
        let w = xs[i] * xs[i] / (gaps[i] * gaps[i]);
        p2 += w;
        p3 += w / gaps[i];
    }
    let (q, dq) = cubic(lambda, f);
    Ok(CartesianParts {
        lambda,
        q,
        dq,
        p2,
        p3,
        gaps,
    })
}

/// `V` from the Cartesian side: `V⁻¹ = √Q(λ) · Σ xᵢ²/(λ−λᵢ)²` with `λ(c)` the
/// largest confocal root. Valid for any ordered triple.
pub fn potential_cartesian(c: &CartesianPoint, f: &FocalTriple) -> Result<f64> {
    let parts = cartesian_parts(c, f)?;
    Ok(1.0 / (parts.q.sqrt() * parts.p2))
}

/// The confocal parameter and `V` together.
pub fn potential_with_parameter(c: &CartesianPoint, f: &FocalTriple) -> Result<(f64, f64)> {
    let parts = cartesian_parts(c, f)?;
    Ok((parts.lambda, 1.0 / (parts.q.sqrt() * parts.p2)))
}

/// `V` and `∇V` on the Cartesian side.
///
/// `λ(c)` is implicit in `F = Σ xᵢ²/(λ−λᵢ) − 1 = 0`, so
/// `∂λ/∂xᵢ = 2xᵢ/((λ−λᵢ) P₂)` with `P₂ = Σ xⱼ²/(λ−λⱼ)²`; the rest is the
/// product rule on `U = V⁻¹ = √Q(λ) P₂`.
pub fn potential_gradient(c: &CartesianPoint, f: &FocalTriple) -> Result<(f64, Vector3<f64>)> {
    let CartesianParts {
        q,
        dq,
        p2,
        p3,
        gaps,
        ..
    } = cartesian_parts(c, f)?;
    let rq = q.sqrt();
    let u = rq * p2;
    let du_dlambda = dq / (2.0 * rq) * p2 - 2.0 * rq * p3;
    let xs = c.to_array();
    let mut grad_u = Vector3::zeros();
    for i in 0..3 {
        let dlambda = 2.0 * xs[i] / (gaps[i] * p2);
        grad_u[i] = du_dlambda * dlambda + 2.0 * rq * xs[i] / (gaps[i] * gaps[i]);
    }
    let v = 1.0 / u;
    Ok((v, -grad_u * (v * v)))
}

/// Components `(ω_μ, ω_ν)` of the connection one-form; `ω_λ ≡ 0`.
pub fn connection(p: &EllipsoidalPoint, f: &FocalTriple) -> Result<(f64, f64)> {
    f.require_strict()?;
    p.check_interlacing(f)?;
    if !p.is_interior(f) {
        return Err(Error::Domain(
            "connection needs an interior point (S and T nonzero)".into(),
        ));
    }
    let (l, m, n) = (p.lambda, p.mu, p.nu);
    let [_, s, t] = branch_radicals(p, f);
    let omega_nu = 0.5 * (l - n) / ((m - l) * (m - n)) * s / t;
    let omega_mu = -0.5 * (l - m) / ((n - l) * (n - m)) * t / s;
    Ok((omega_mu, omega_nu))
}

/// Cartesian components of the connection, `ωᵢ = s_x s_y s_z Σ_ξ Jᵢξ ω_ξ / h_ξ²`.
///
/// Written through the normalized Jacobian so it is finite on coordinate
/// planes (where it may jump); only focal-conic contact (`λ = μ` or `μ = ν`)
/// is singular.
pub fn connection_cartesian(c: &CartesianPoint, f: &FocalTriple) -> Result<Vector3<f64>> {
    let p = from_cartesian(c, f)?;
    connection_at(&p, f)
}

pub(crate) fn connection_at(p: &EllipsoidalPoint, f: &FocalTriple) -> Result<Vector3<f64>> {
    let (l, m, n) = (p.lambda, p.mu, p.nu);
    let tol = CONIC_TOL * f.span();
    if l - m <= tol || m - n <= tol {
        return Err(singular("point on a focal conic"));
    }
    let [_, s, t] = branch_radicals(p, f);
    let mm = normalized_jacobian(p, f)?;
    let mn2 = (m - n) * (m - n);
    let a = -s / ((l - m) * mn2);
    let b = -t / ((l - n) * mn2);
    let parity = p.octant.parity();
    Ok(Vector3::from_fn(|i, _| {
        parity * (a * mm[(i, 2)] + b * mm[(i, 1)])
    }))
}

/// The two closed-form degenerations of the family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpecialKind {
    /// All focal constants equal: `V = 1/r`.
    Flat,
    /// `λ₂ = λ₃ > λ₁`: `V = ½(1/r₁ + 1/r₂)` with centres `(±√(λ₃−λ₁), 0, 0)`.
    EguchiHanson,
}

pub fn special_potential(kind: SpecialKind, c: &CartesianPoint, f: &FocalTriple) -> Result<f64> {
    match kind {
        SpecialKind::Flat => {
            if f.kind() != FocalKind::Flat {
                return Err(Error::Precondition(
                    "flat potential needs lambda1 = lambda2 = lambda3".into(),
                ));
            }
            let r = c.norm();
            if r == 0.0 {
                return Err(singular("origin"));
            }
            Ok(1.0 / r)
        }
        SpecialKind::EguchiHanson => {
            if f.kind() != FocalKind::UpperPair {
                return Err(Error::Precondition(
                    "two-centre potential needs lambda2 = lambda3 > lambda1".into(),
                ));
            }
            let (r1, r2) = centre_distances(c, f);
            if r1 == 0.0 || r2 == 0.0 {
                return Err(singular("centre"));
            }
            Ok(0.5 * (1.0 / r1 + 1.0 / r2))
        }
    }
}

/// Distances to `(±√(λ₃−λ₁), 0, 0)`.
pub fn centre_distances(c: &CartesianPoint, f: &FocalTriple) -> (f64, f64) {
    let d = f.span().sqrt();
    let plus = CartesianPoint::new(d, 0.0, 0.0);
    let minus = CartesianPoint::new(-d, 0.0, 0.0);
    (c.distance(plus), c.distance(minus))
}

/// `V − f_λ/h_λ²` with `f_λ = 1/(4R(λ))` and `f_μ = f_ν = 0`.
///
/// Only the `λ`-branch scale factor enters, so points on the `μ`/`ν`
/// coordinate planes are accepted.
pub fn staeckel_decomposition(p: &EllipsoidalPoint, f: &FocalTriple) -> Result<f64> {
    let v = potential(p, f)?;
    let (q, _) = cubic(p.lambda, f);
    if q <= 0.0 {
        return Err(Error::Domain("lambda must exceed lambda3".into()));
    }
    let r = q.sqrt();
    let h_lambda_sq = match scale_factors(p, f) {
        Ok(h) => h.squared()[0],
        Err(_) => node_products(p)[0] / (4.0 * q),
    };
    Ok(v - 1.0 / (4.0 * r * h_lambda_sq))
}

/// A fully evaluated field sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub point: CartesianPoint,
    pub v: f64,
    pub grad_v: [f64; 3],
    /// `None` when the triple is degenerate or the point is on a focal conic.
    pub omega: Option<[f64; 3]>,
}

pub fn sample(c: &CartesianPoint, f: &FocalTriple) -> Result<FieldSample> {
    let (v, g) = potential_gradient(c, f)?;
    let omega = if f.is_strict() {
        connection_cartesian(c, f).ok().map(|w| [w.x, w.y, w.z])
    } else {
        None
    };
    Ok(FieldSample {
        point: *c,
        v,
        grad_v: [g.x, g.y, g.z],
        omega,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::confocal::{jacobian, to_cartesian, Octant};
    use approx::assert_relative_eq;

    fn f014() -> FocalTriple {
        FocalTriple::new(0.0, 1.0, 4.0).unwrap()
    }

    fn worked() -> EllipsoidalPoint {
        EllipsoidalPoint::new(5.0, 2.0, 0.5)
    }

    #[test]
    fn potential_values() {
        let f = f014();
        assert_relative_eq!(
            potential(&worked(), &f).unwrap(),
            20f64.sqrt() / 13.5,
            epsilon = 1e-15
        );
        assert_relative_eq!(potential(&worked(), &f).unwrap(), 0.331269, epsilon = 1e-6);
        let boundary = EllipsoidalPoint::new(5.0, 4.0, 1.0);
        assert_relative_eq!(
            potential(&boundary, &f).unwrap(),
            5f64.sqrt() / 2.0,
            epsilon = 1e-15
        );
        let far = potential(&EllipsoidalPoint::new(1e8, 2.0, 0.5), &f).unwrap();
        assert!(far < 2e-4);
        let touching = EllipsoidalPoint::new(4.0, 4.0, 0.5);
        assert!(matches!(potential(&touching, &f), Err(Error::Singular(_))));
    }

    #[test]
    fn cartesian_route_matches_worked_point() {
        let f = f014();
        let c = to_cartesian(&worked(), &f).unwrap();
        let v = potential_cartesian(&c, &f).unwrap();
        // √20 · 0.675 = V⁻¹
        assert_relative_eq!(v, 1.0 / (20f64.sqrt() * 0.675), max_relative = 1e-12);
        assert_relative_eq!(v, potential(&worked(), &f).unwrap(), max_relative = 1e-10);
        let axis = CartesianPoint::new(5f64.sqrt(), 0.0, 0.0);
        assert_relative_eq!(
            potential_cartesian(&axis, &f).unwrap(),
            5f64.sqrt() / 2.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn flat_limit_is_inverse_radius() {
        let flat = FocalTriple::new(0.0, 0.0, 0.0).unwrap();
        for c in [
            CartesianPoint::new(1.0, 2.0, -0.5),
            CartesianPoint::new(-0.01, 0.0, 0.3),
            CartesianPoint::new(7.0, -3.0, 2.0),
        ] {
            assert_relative_eq!(
                potential_cartesian(&c, &flat).unwrap() * c.norm(),
                1.0,
                epsilon = 1e-12
            );
        }
        let r2 = CartesianPoint::new(0.0, 2.0, 0.0);
        assert_relative_eq!(
            special_potential(SpecialKind::Flat, &r2, &flat).unwrap(),
            0.5
        );
        assert!(potential_cartesian(&CartesianPoint::ORIGIN, &flat).is_err());
    }

    #[test]
    fn two_centre_degeneration() {
        let eh = FocalTriple::new(0.0, 4.0, 4.0).unwrap();
        let on_y = CartesianPoint::new(0.0, 3.0, 0.0);
        let expected = 1.0 / 13f64.sqrt();
        assert_relative_eq!(
            potential_cartesian(&on_y, &eh).unwrap(),
            expected,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            special_potential(SpecialKind::EguchiHanson, &on_y, &eh).unwrap(),
            expected,
            max_relative = 1e-14
        );
        for x in [2.5, 3.0, 10.0] {
            let c = CartesianPoint::new(x, 0.0, 0.0);
            let closed = x / (x * x - 4.0);
            assert_relative_eq!(
                potential_cartesian(&c, &eh).unwrap(),
                closed,
                max_relative = 1e-12
            );
            assert_relative_eq!(
                special_potential(SpecialKind::EguchiHanson, &c, &eh).unwrap(),
                closed,
                max_relative = 1e-14
            );
        }
        assert!(special_potential(SpecialKind::EguchiHanson, &on_y, &f014()).is_err());
        assert!(special_potential(SpecialKind::Flat, &on_y, &eh).is_err());
    }

    #[test]
    fn lower_pair_axis_closed_form() {
        // λ₁ = λ₂ = 0, λ₃ = c: on the z-axis V = |z|/(z² + c)
        let f = FocalTriple::new(0.0, 0.0, 3.0).unwrap();
        for z in [0.5, 2.0, -1.5] {
            let v = potential_cartesian(&CartesianPoint::new(0.0, 0.0, z), &f).unwrap();
            assert_relative_eq!(v, z.abs() / (z * z + 3.0), max_relative = 1e-12);
        }
    }

    #[test]
    fn connection_values() {
        let (w_mu, w_nu) = connection(&worked(), &f014()).unwrap();
        assert_relative_eq!(w_nu, -1.069045, epsilon = 1e-6);
        assert_relative_eq!(w_mu, -0.103935, epsilon = 1e-6);
        assert_relative_eq!(
            w_mu,
            -0.5 * (3.0 / 6.75) * (0.875f64.sqrt() / 2.0),
            epsilon = 1e-15
        );
        let near = EllipsoidalPoint::new(4.00001, 3.99999, 0.5);
        let far = EllipsoidalPoint::new(4.01, 3.99, 0.5);
        let f = f014();
        // |ω| grows without bound as μ → λ
        let big = connection(&near, &f).unwrap();
        let small = connection(&far, &f).unwrap();
        assert!(big.1.abs() > 10.0 * small.1.abs());
        assert!(connection(&EllipsoidalPoint::new(5.0, 4.0, 0.5), &f).is_err());
    }

    #[test]
    fn cartesian_connection_projects_back() {
        let f = f014();
        let p = worked();
        let c = to_cartesian(&p, &f).unwrap();
        let w = connection_cartesian(&c, &f).unwrap();
        let j = jacobian(&p, &f).unwrap();
        assert!(w.dot(&j.column(0)).abs() < 1e-10);
        assert_relative_eq!(w.dot(&j.column(1)), -0.103935, epsilon = 1e-6);
        assert_relative_eq!(w.dot(&j.column(2)), -1.069045, epsilon = 1e-6);

        // odd-parity octants carry the orientation factor
        let odd = p.with_octant(Octant::new(-1, 1, 1).unwrap());
        let c_odd = to_cartesian(&odd, &f).unwrap();
        let w_odd = connection_cartesian(&c_odd, &f).unwrap();
        let j_odd = jacobian(&odd, &f).unwrap();
        assert_relative_eq!(w_odd.dot(&j_odd.column(2)), 1.069045, epsilon = 1e-6);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        for f in [
            f014(),
            FocalTriple::new(0.0, 4.0, 4.0).unwrap(),
            FocalTriple::new(0.0, 0.0, 0.0).unwrap(),
            FocalTriple::new(-1.0, 0.5, 2.0).unwrap(),
        ] {
            for c in [
                CartesianPoint::new(1.1, 0.7, 0.9),
                CartesianPoint::new(-2.0, 0.3, -1.4),
                CartesianPoint::new(0.0, 1.5, 0.8),
            ] {
                let (v, g) = potential_gradient(&c, &f).unwrap();
                assert_relative_eq!(
                    v,
                    potential_cartesian(&c, &f).unwrap(),
                    max_relative = 1e-14
                );
                let h = 1e-5;
                for i in 0..3 {
                    let fd = (potential_cartesian(&c.shifted(i, h), &f).unwrap()
                        - potential_cartesian(&c.shifted(i, -h), &f).unwrap())
                        / (2.0 * h);
                    assert_relative_eq!(g[i], fd, epsilon = 1e-8);
                }
            }
        }
    }

    #[test]
    fn staeckel_identity() {
        let f = f014();
        assert!(staeckel_decomposition(&worked(), &f).unwrap().abs() < 1e-12);
        assert!(
            staeckel_decomposition(&EllipsoidalPoint::new(5.0, 4.0, 1.0), &f)
                .unwrap()
                .abs()
                < 1e-12
        );
        assert!(
            staeckel_decomposition(&EllipsoidalPoint::new(11.0, 1.5, 0.9), &f)
                .unwrap()
                .abs()
                < 1e-12
        );
    }

    #[test]
    fn printed_dmu_sign_breaks_the_field_equation() {
        // Flip the dμ term back to its printed sign and the curl check fails.
        let f = f014();
        let c = CartesianPoint::new(1.1, 0.7, 0.9);
        let h = 1e-4;
        let printed = |c: &CartesianPoint| -> Vector3<f64> {
            let p = from_cartesian(c, &f).unwrap();
            let (l, m, n) = (p.lambda, p.mu, p.nu);
            let [_, s, t] = branch_radicals(&p, &f);
            let mm = normalized_jacobian(&p, &f).unwrap();
            let mn2 = (m - n) * (m - n);
            let a = -s / ((l - m) * mn2);
            let b = t / ((l - n) * mn2);
            Vector3::from_fn(|i, _| a * mm[(i, 2)] + b * mm[(i, 1)])
        };
        let curl_of = |w: &dyn Fn(&CartesianPoint) -> Vector3<f64>| {
            let d =
                |i: usize, j: usize| (w(&c.shifted(j, h))[i] - w(&c.shifted(j, -h))[i]) / (2.0 * h);
            Vector3::new(d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1))
        };
        let (_, g) = potential_gradient(&c, &f).unwrap();
        let fixed = curl_of(&|c: &CartesianPoint| connection_cartesian(c, &f).unwrap());
        assert!((fixed - g * CURL_ORIENTATION).norm() / g.norm() < 1e-6);
        let bad = curl_of(&printed);
        assert!((bad - g).norm().min((bad + g).norm()) / g.norm() > 0.1);
    }
}
