//! The SU(2) side: group points, the adjoint matrix, the BGPP profile
//! functions and the moment maps onto confocal quadrics.
//!
//! Conventions. A group point is a unit quaternion `g`. With quaternion units
//! `qᵢ`, the Lie algebra basis is `eᵢ = −qᵢ/2`, so `exp(t eᵢ) = cos(t/2) −
//! sin(t/2) qᵢ`. The left-invariant field `Lᵢ` generates `g ↦ g·exp(t eᵢ)` and
//! the right-invariant field `Rᵢ` generates `g ↦ exp(t eᵢ)·g`. With
//! `O = Rot(g)` and `l` its first row these give
//!
//! ```text
//! Lᵢ lⱼ = −εᵢⱼₖ lₖ,    Rᵢ = Oᵢⱼ Lⱼ,    [L₁, L₂] = −L₃,    [R₁, R₂] = R₃.
//! ```

use nalgebra::{Matrix3, Quaternion, RowVector3, UnitQuaternion, Vector3};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::confocal::{cubic, CartesianPoint, FocalTriple};
use crate::error::{domain, Error, Result};
use crate::ode::{dopri5, simpson, AdaptiveConfig, Control};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupPoint {
    q: UnitQuaternion<f64>,
}

impl GroupPoint {
    pub fn identity() -> Self {
        Self {
            q: UnitQuaternion::identity(),
        }
    }

    /// Renormalizes `w + x i + y j + z k`.
    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Result<Self> {
        let raw = Quaternion::new(w, x, y, z);
        let n = raw.norm();
        if !n.is_finite() || n == 0.0 {
            return Err(Error::Precondition(
                "quaternion must be finite and nonzero".into(),
            ));
        }
        Ok(Self {
            q: UnitQuaternion::from_quaternion(raw),
        })
    }

    /// Uniform (Haar) sample: a normalized Gaussian 4-vector.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let c: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
            if let Ok(g) = Self::new(c[0], c[1], c[2], c[3]) {
                return g;
            }
        }
    }

    /// Rotation by `angle` about coordinate axis `axis`.
    pub fn about_axis(axis: usize, angle: f64) -> Self {
        let mut v = Vector3::zeros();
        v[axis] = 1.0;
        Self {
            q: UnitQuaternion::from_axis_angle(&nalgebra::Unit::new_unchecked(v), angle),
        }
    }

    pub fn quaternion(&self) -> &UnitQuaternion<f64> {
        &self.q
    }

    /// `[w, x, y, z]`
    pub fn components(&self) -> [f64; 4] {
        let q = self.q.quaternion();
        [q.w, q.i, q.j, q.k]
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self {
            q: self.q * other.q,
        }
    }
}

/// `exp(t eᵢ)`.
pub fn one_parameter(axis: usize, t: f64) -> GroupPoint {
    GroupPoint::about_axis(axis, -t)
}

/// Flow of the left-invariant field `Lᵢ`: `g·exp(t eᵢ)`.
pub fn left_flow(g: &GroupPoint, axis: usize, t: f64) -> GroupPoint {
    g.compose(&one_parameter(axis, t))
}

/// Flow of the right-invariant field `Rᵢ`: `exp(t eᵢ)·g`.
pub fn right_flow(g: &GroupPoint, axis: usize, t: f64) -> GroupPoint {
    one_parameter(axis, t).compose(g)
}

/// The orthogonal matrix `O` with rows `l, m, n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdjointMatrix(pub Matrix3<f64>);

impl AdjointMatrix {
    pub fn l(&self) -> Vector3<f64> {
        self.0.row(0).transpose()
    }

    pub fn m(&self) -> Vector3<f64> {
        self.0.row(1).transpose()
    }

    pub fn n(&self) -> Vector3<f64> {
        self.0.row(2).transpose()
    }

    pub fn row(&self, i: usize) -> RowVector3<f64> {
        self.0.row(i).into_owned()
    }

    /// `‖OOᵀ − 1‖_max`.
    pub fn orthogonality_defect(&self) -> f64 {
        (self.0 * self.0.transpose() - Matrix3::identity()).amax()
    }

    pub fn determinant(&self) -> f64 {
        self.0.determinant()
    }
}

pub fn adjoint(g: &GroupPoint) -> AdjointMatrix {
    AdjointMatrix(*g.q.to_rotation_matrix().matrix())
}

/// Central-difference derivative of `l` along `Lᵢ` (`left = true`) or `Rᵢ`.
pub fn l_derivative(g: &GroupPoint, axis: usize, h: f64, left: bool) -> Vector3<f64> {
    let flow = if left { left_flow } else { right_flow };
    let lp = adjoint(&flow(g, axis, h)).l();
    let lm = adjoint(&flow(g, axis, -h)).l();
    (lp - lm) / (2.0 * h)
}

/// The right-hand side of `Lᵢ lⱼ = −εᵢⱼₖ lₖ`, as a vector over `j`.
pub fn l_derivative_expected(l: &Vector3<f64>, axis: usize) -> Vector3<f64> {
    let mut e = Vector3::zeros();
    e[axis] = 1.0;
    // (e × l)ⱼ = εⱼᵢₖ lₖ = −εᵢⱼₖ lₖ
    e.cross(l)
}

/// `(A, B, C) = (√(λ−λ₁), √(λ−λ₂), √(λ−λ₃))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileTriple {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl ProfileTriple {
    pub fn as_array(&self) -> [f64; 3] {
        [self.a, self.b, self.c]
    }

    pub fn product(&self) -> f64 {
        self.a * self.b * self.c
    }
}

pub fn profile(lambda: f64, f: &FocalTriple) -> Result<ProfileTriple> {
    if !(lambda >= f.lambda3()) {
        return Err(domain(format!(
            "orbit label {lambda} lies below lambda3 = {}",
            f.lambda3()
        )));
    }
    let [a, b, c] = f.as_array().map(|li| (lambda - li).sqrt());
    Ok(ProfileTriple { a, b, c })
}

/// `(Ȧ, Ḃ, Ċ) = (BC, CA, AB)`.
pub fn euler_rhs(p: &ProfileTriple) -> [f64; 3] {
    [p.b * p.c, p.c * p.a, p.a * p.b]
}

/// Coefficients of the BGPP metric in the `(dλ, σ¹, σ², σ³)` coframe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricNorms {
    /// `1/(4ABC)`
    pub g_lambda: f64,
    /// `BC/A`, `CA/B`, `AB/C`
    pub g: [f64; 3],
}

fn open_profile(lambda: f64, f: &FocalTriple) -> Result<ProfileTriple> {
    if !(lambda > f.lambda3()) {
        return Err(domain(format!(
            "orbit label {lambda} must exceed lambda3 = {}",
            f.lambda3()
        )));
    }
    profile(lambda, f)
}

pub fn bgpp_metric_norms(lambda: f64, f: &FocalTriple) -> Result<MetricNorms> {
    let p = open_profile(lambda, f)?;
    let r = p.product();
    Ok(MetricNorms {
        g_lambda: 1.0 / (4.0 * r),
        g: [p.b * p.c / p.a, p.c * p.a / p.b, p.a * p.b / p.c],
    })
}

/// `g(R₁, R₁) = l₁² BC/A + l₂² CA/B + l₃² AB/C`.
pub fn right_norm(lambda: f64, g: &GroupPoint, f: &FocalTriple) -> Result<f64> {
    let norms = bgpp_metric_norms(lambda, f)?;
    let l = adjoint(g).l();
    Ok((0..3).map(|i| l[i] * l[i] * norms.g[i]).sum())
}

/// `(x, y, z) = (−l₁A, −l₂B, −l₃C)`.
pub fn moment_map(lambda: f64, g: &GroupPoint, f: &FocalTriple) -> Result<CartesianPoint> {
    let p = profile(lambda, f)?;
    let l = adjoint(g).l();
    Ok(CartesianPoint::new(-l[0] * p.a, -l[1] * p.b, -l[2] * p.c))
}

/// `dη/dλ = 1/(2R(λ))`.
pub fn orbit_label_rate(lambda: f64, f: &FocalTriple) -> f64 {
    0.5 / cubic(lambda, f).0.sqrt()
}

/// Integrates `Ȧ = BC` (cyclic) numerically from the profile at `lambda0`
/// across the orbit-label interval `∫ dλ/(2R)` that ends at `lambda1`.
///
/// Both endpoints must exceed `λ₃`.
pub fn integrate_profile(
    lambda0: f64,
    lambda1: f64,
    f: &FocalTriple,
    tol: f64,
) -> Result<ProfileTriple> {
    let start = open_profile(lambda0, f)?;
    open_profile(lambda1, f)?;
    let eta = simpson(|l| orbit_label_rate(l, f), lambda0, lambda1, 1e-3 * tol);
    let out = dopri5(
        |_, y: &[f64; 3]| {
            Ok(euler_rhs(&ProfileTriple {
                a: y[0],
                b: y[1],
                c: y[2],
            }))
        },
        0.0,
        start.as_array(),
        eta,
        &AdaptiveConfig::new(tol),
        |_| Control::Continue,
    )?;
    let [a, b, c] = out.y;
    Ok(ProfileTriple { a, b, c })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::confocal::quadric_residual;
    use crate::field::potential_cartesian;
    use crate::sampling;
    use approx::assert_relative_eq;
    use rand::Rng;

    fn f014() -> FocalTriple {
        FocalTriple::new(0.0, 1.0, 4.0).unwrap()
    }

    #[test]
    fn identity_adjoint() {
        let o = adjoint(&GroupPoint::identity());
        assert_eq!(o.0, Matrix3::identity());
        assert_eq!(o.l(), Vector3::new(1.0, 0.0, 0.0));
    }

    #[test]
    fn rejects_zero_quaternion() {
        assert!(GroupPoint::new(0.0, 0.0, 0.0, 0.0).is_err());
        assert!(GroupPoint::new(f64::NAN, 0.0, 0.0, 1.0).is_err());
        let g = GroupPoint::new(2.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(g, GroupPoint::identity());
    }

    #[test]
    fn orthogonal_rows() {
        let mut rng = sampling::rng(3);
        for _ in 0..200 {
            let o = adjoint(&GroupPoint::random(&mut rng));
            assert!(o.orthogonality_defect() <= 1e-12);
            assert!((o.determinant() - 1.0).abs() <= 1e-12);
            assert!((o.l().norm() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn left_derivative_of_l() {
        let mut rng = sampling::rng(5);
        for _ in 0..50 {
            let g = GroupPoint::random(&mut rng);
            let l = adjoint(&g).l();
            for i in 0..3 {
                let d = l_derivative(&g, i, 1e-4, true);
                assert!((d - l_derivative_expected(&l, i)).amax() <= 1e-6);
            }
        }
    }

    #[test]
    fn right_fields_in_left_basis() {
        let mut rng = sampling::rng(9);
        for _ in 0..50 {
            let g = GroupPoint::random(&mut rng);
            let o = adjoint(&g);
            for i in 0..3 {
                let lhs = l_derivative(&g, i, 1e-4, false);
                let rhs: Vector3<f64> = (0..3)
                    .map(|j| l_derivative(&g, j, 1e-4, true) * o.0[(i, j)])
                    .sum();
                assert!((lhs - rhs).amax() <= 1e-6);
            }
        }
    }

    #[test]
    fn left_bracket_sign() {
        // Lᵢ l = eᵢ × l, so L₁(L₂ l) = e₂ × (e₁ × l) and [L₁, L₂] l = −L₃ l
        let mut rng = sampling::rng(1);
        let g = GroupPoint::random(&mut rng);
        let l = adjoint(&g).l();
        let e = |i: usize| Vector3::from_fn(|k, _| if k == i { 1.0 } else { 0.0 });
        let l12 = e(1).cross(&e(0).cross(&l)) - e(0).cross(&e(1).cross(&l));
        assert!((l12 + e(2).cross(&l)).amax() < 1e-15);
        // and by finite differences of the group flows
        let h = 1e-3;
        let commutator = |g: &GroupPoint| {
            let a = left_flow(&left_flow(g, 0, h), 1, h);
            let b = left_flow(&left_flow(g, 1, h), 0, h);
            (adjoint(&a).l() - adjoint(&b).l()) / (h * h)
        };
        assert!((commutator(&g) + l_derivative_expected(&l, 2)).amax() < 1e-2);
    }

    #[test]
    fn profile_values() {
        let p = profile(5.0, &f014()).unwrap();
        assert_relative_eq!(p.a, 5f64.sqrt());
        assert_eq!((p.b, p.c), (2.0, 1.0));
        assert_relative_eq!(p.product(), 20f64.sqrt(), max_relative = 1e-15);
        assert_eq!(profile(4.0, &f014()).unwrap().c, 0.0);
        assert!(profile(3.9, &f014()).is_err());
        let d = euler_rhs(&p);
        assert_relative_eq!(d[0], 2.0);
        assert_relative_eq!(d[1], 5f64.sqrt());
        assert_relative_eq!(d[2], 2.0 * 5f64.sqrt());
    }

    #[test]
    fn euler_system_reproduces_profile() {
        let f = f014();
        let numeric = integrate_profile(5.0, 9.0, &f, 1e-12).unwrap();
        let exact = profile(9.0, &f).unwrap();
        for (n, e) in numeric.as_array().iter().zip(exact.as_array()) {
            assert!((n - e).abs() <= 1e-8, "{n} vs {e}");
        }
        // and backwards
        let back = integrate_profile(9.0, 5.0, &f, 1e-12).unwrap();
        assert!((back.c - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn metric_norm_values() {
        let m = bgpp_metric_norms(5.0, &f014()).unwrap();
        assert_relative_eq!(m.g[0], 2.0 / 5f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(m.g[1], 5f64.sqrt() / 2.0, max_relative = 1e-15);
        assert_relative_eq!(m.g[2], 2.0 * 5f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(m.g_lambda, 0.0559017, epsilon = 1e-7);
        assert_relative_eq!(
            m.g.iter().product::<f64>(),
            20f64.sqrt(),
            max_relative = 1e-14
        );
        assert!(bgpp_metric_norms(4.0, &f014()).is_err());
    }

    #[test]
    fn moment_map_values() {
        let f = f014();
        let id = GroupPoint::identity();
        let c = moment_map(5.0, &id, &f).unwrap();
        assert_relative_eq!(c.x, -5f64.sqrt());
        assert_eq!((c.y, c.z), (0.0, 0.0));
        let n = right_norm(5.0, &id, &f).unwrap();
        assert_relative_eq!(n, 2.0 / 5f64.sqrt(), max_relative = 1e-15);
        // a quarter turn sending l to (0, 1, 0)
        let g = GroupPoint::about_axis(2, -std::f64::consts::FRAC_PI_2);
        assert!((adjoint(&g).l() - Vector3::new(0.0, 1.0, 0.0)).amax() < 1e-15);
        let c = moment_map(5.0, &g, &f).unwrap();
        assert!((c.to_vector() - Vector3::new(0.0, -2.0, 0.0)).amax() < 1e-15);
    }

    #[test]
    fn stabilizer_invariance() {
        // the flow of R₁ mixes m and n but fixes l
        let f = f014();
        let mut rng = sampling::rng(4);
        for _ in 0..20 {
            let g = GroupPoint::random(&mut rng);
            let t = rng.random_range(-3.0..3.0);
            let h = right_flow(&g, 0, t);
            assert_relative_eq!(
                right_norm(5.0, &g, &f).unwrap(),
                right_norm(5.0, &h, &f).unwrap(),
                max_relative = 1e-13
            );
        }
    }

    #[test]
    fn image_lies_on_the_quadric() {
        let f = f014();
        let mut rng = sampling::rng(12);
        for _ in 0..200 {
            let g = GroupPoint::random(&mut rng);
            let lambda = rng.random_range(4.01..14.0);
            let c = moment_map(lambda, &g, &f).unwrap();
            assert!(quadric_residual(&c, lambda, &f).unwrap().abs() <= 1e-12);
        }
    }

    #[test]
    fn inverse_right_norm_is_the_potential() {
        let f = f014();
        let mut rng = sampling::rng(21);
        for _ in 0..200 {
            let g = GroupPoint::random(&mut rng);
            let lambda = 4.0 + 10.0 * (1.0 - rng.random::<f64>());
            let v = potential_cartesian(&moment_map(lambda, &g, &f).unwrap(), &f).unwrap();
            let w = 1.0 / right_norm(lambda, &g, &f).unwrap();
            assert_relative_eq!(v, w, max_relative = 1e-8);
        }
    }
}
