//! Confocal ellipsoidal coordinates on Euclidean 3-space.
//!
//! The family of quadrics
//!
//! ```text
//! x²/(t−λ₁) + y²/(t−λ₂) + z²/(t−λ₃) = 1
//! ```
//!
//! passes three members through every point. Their parameters are the roots
//! of the monic-in-`−t³` cubic
//!
//! ```text
//! G(t) = x²(t−λ₂)(t−λ₃) + y²(t−λ₁)(t−λ₃) + z²(t−λ₁)(t−λ₂) − Q(t),
//! Q(t) = (t−λ₁)(t−λ₂)(t−λ₃),
//! ```
//!
//! and interlace with the focal constants as `λ₁ ≤ ν ≤ λ₂ ≤ μ ≤ λ₃ ≤ λ`.
//! This is the only labelling for which `R(λ) = √Q(λ)`, `S(μ) = √(−Q(μ))`
//! and `T(ν) = √Q(ν)` are all real.
//!
//! The chart covers a single octant, so [`EllipsoidalPoint`] carries an
//! explicit [`Octant`] and the transforms are total on ℝ³.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Relative (to `λ₃ − λ₁`) distance below which a root counts as sitting on
/// an interval endpoint.
pub const ENDPOINT_TOL: f64 = 1e-10;

/// Bisection stops at this fraction of `λ₃ − λ₁`; Newton finishes the job.
const BISECTION_WIDTH: f64 = 1e-3;

const NEWTON_REL: f64 = 1e-14;

const MAX_NEWTON_ITERS: usize = 200;

/// The three focal constants `λ₁ ≤ λ₂ ≤ λ₃` of a confocal family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FocalTriple {
    lambda: [f64; 3],
}

/// How many of the focal constants coincide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FocalKind {
    /// `λ₁ < λ₂ < λ₃`.
    Distinct,
    /// `λ₁ = λ₂ = λ₃`: flat space.
    Flat,
    /// `λ₁ < λ₂ = λ₃`: two real centres on the x-axis.
    UpperPair,
    /// `λ₁ = λ₂ < λ₃`.
    LowerPair,
}

impl FocalTriple {
    pub fn new(lambda1: f64, lambda2: f64, lambda3: f64) -> Result<Self> {
        if !(lambda1.is_finite() && lambda2.is_finite() && lambda3.is_finite()) {
            return Err(Error::NonFinite);
        }
        if lambda1 > lambda2 || lambda2 > lambda3 {
            return Err(Error::Unordered(lambda1, lambda2, lambda3));
        }
        Ok(Self {
            lambda: [lambda1, lambda2, lambda3],
        })
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda[0]
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda[1]
    }

    pub fn lambda3(&self) -> f64 {
        self.lambda[2]
    }

    pub fn as_array(&self) -> [f64; 3] {
        self.lambda
    }

    /// `λ₃ − λ₁`, the natural (squared-length) scale of the family.
    pub fn span(&self) -> f64 {
        self.lambda[2] - self.lambda[0]
    }

    /// A length scale: `√(λ₃ − λ₁)`, or 1 for the flat triple.
    pub fn length_scale(&self) -> f64 {
        let s = self.span();
        if s > 0.0 {
            s.sqrt()
        } else {
            1.0
        }
    }

    pub fn kind(&self) -> FocalKind {
        let [l1, l2, l3] = self.lambda;
        match (l1 == l2, l2 == l3) {
            (true, true) => FocalKind::Flat,
            (false, true) => FocalKind::UpperPair,
            (true, false) => FocalKind::LowerPair,
            (false, false) => FocalKind::Distinct,
        }
    }

    pub fn is_strict(&self) -> bool {
        self.kind() == FocalKind::Distinct
    }

    pub(crate) fn require_strict(&self) -> Result<()> {
        if self.is_strict() {
            Ok(())
        } else {
            Err(Error::DegenerateTriple)
        }
    }

    /// `Π_{j≠i} (λᵢ − λⱼ)`.
    fn focal_denominator(&self, i: usize) -> f64 {
        let l = self.lambda;
        (l[i] - l[(i + 1) % 3]) * (l[i] - l[(i + 2) % 3])
    }
}

/// A point of Euclidean 3-space, the quotient by the triholomorphic circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartesianPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl CartesianPoint {
    pub const ORIGIN: Self = Self {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn to_vector(self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    pub fn norm(self) -> f64 {
        self.to_vector().norm()
    }

    pub fn norm_squared(self) -> f64 {
        self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Offset along coordinate axis `axis` by `h`.
    pub fn shifted(self, axis: usize, h: f64) -> Self {
        let mut a = self.to_array();
        a[axis] += h;
        a.into()
    }

    pub fn scaled(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn distance(self, other: Self) -> f64 {
        (self.to_vector() - other.to_vector()).norm()
    }
}

impl From<[f64; 3]> for CartesianPoint {
    fn from(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

impl From<Vector3<f64>> for CartesianPoint {
    fn from(v: Vector3<f64>) -> Self {
        Self::new(v.x, v.y, v.z)
    }
}

/// Sign selectors `(s_x, s_y, s_z)` picking the octant of the chart.
///
/// A zero coordinate is assigned the `+` sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Octant([i8; 3]);

impl Octant {
    pub const POSITIVE: Self = Self([1, 1, 1]);

    pub fn new(sx: i8, sy: i8, sz: i8) -> Result<Self> {
        for s in [sx, sy, sz] {
            if s != 1 && s != -1 {
                return Err(domain("octant signs must be +1 or -1"));
            }
        }
        Ok(Self([sx, sy, sz]))
    }

    pub fn of(c: CartesianPoint) -> Self {
        let s = |v: f64| if v < 0.0 { -1 } else { 1 };
        Self([s(c.x), s(c.y), s(c.z)])
    }

    pub fn sign(self, axis: usize) -> f64 {
        f64::from(self.0[axis])
    }

    pub fn signs(self) -> [i8; 3] {
        self.0
    }

    /// `s_x s_y s_z`: `+1` for octants related to the positive one by a rotation.
    pub fn parity(self) -> f64 {
        f64::from(self.0[0] * self.0[1] * self.0[2])
    }
}

impl Default for Octant {
    fn default() -> Self {
        Self::POSITIVE
    }
}

/// Which coordinates of an [`EllipsoidalPoint`] sit on an interval endpoint.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndpointFlags {
    pub lambda: bool,
    pub mu: bool,
    pub nu: bool,
}

impl EndpointFlags {
    pub fn any(self) -> bool {
        self.lambda || self.mu || self.nu
    }
}

/// Ellipsoidal coordinates `(λ, μ, ν)` with `λ₁ ≤ ν ≤ λ₂ ≤ μ ≤ λ₃ ≤ λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipsoidalPoint {
    pub lambda: f64,
    pub mu: f64,
    pub nu: f64,
    pub octant: Octant,
    #[serde(default)]
    pub endpoints: EndpointFlags,
}

impl EllipsoidalPoint {
    /// A point in the positive octant.
    pub fn new(lambda: f64, mu: f64, nu: f64) -> Self {
        Self {
            lambda,
            mu,
            nu,
            octant: Octant::POSITIVE,
            endpoints: EndpointFlags::default(),
        }
    }

    pub fn with_octant(mut self, octant: Octant) -> Self {
        self.octant = octant;
        self
    }

    /// `[λ, μ, ν]`.
    pub fn coords(&self) -> [f64; 3] {
        [self.lambda, self.mu, self.nu]
    }

    /// Checks the interlacing invariant to within [`ENDPOINT_TOL`].
    pub fn check_interlacing(&self, f: &FocalTriple) -> Result<()> {
        let tol = ENDPOINT_TOL * f.span();
        let [l1, l2, l3] = f.as_array();
        let ok = self.nu >= l1 - tol
            && self.nu <= l2 + tol
            && self.mu >= l2 - tol
            && self.mu <= l3 + tol
            && self.lambda >= l3 - tol;
        if ok && self.lambda.is_finite() && self.mu.is_finite() && self.nu.is_finite() {
            Ok(())
        } else {
            Err(domain(format!(
                "ellipsoidal coordinates ({}, {}, {}) violate l1 <= nu <= l2 <= mu <= l3 <= lambda",
                self.lambda, self.mu, self.nu
            )))
        }
    }

    /// True when every coordinate is strictly inside its range.
    pub fn is_interior(&self, f: &FocalTriple) -> bool {
        let tol = ENDPOINT_TOL * f.span();
        let [l1, l2, l3] = f.as_array();
        self.nu > l1 + tol
            && self.nu < l2 - tol
            && self.mu > l2 + tol
            && self.mu < l3 - tol
            && self.lambda > l3 + tol
    }

    fn clamped(&self, f: &FocalTriple) -> [f64; 3] {
        let [l1, l2, l3] = f.as_array();
        [
            self.lambda.max(l3),
            self.mu.clamp(l2, l3),
            self.nu.clamp(l1, l2),
        ]
    }
}

/// Scale factors of the flat metric `h_λ² dλ² + h_μ² dμ² + h_ν² dν²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleFactors {
    pub h_lambda: f64,
    pub h_mu: f64,
    pub h_nu: f64,
}

impl ScaleFactors {
    pub fn squared(&self) -> [f64; 3] {
        [
            self.h_lambda * self.h_lambda,
            self.h_mu * self.h_mu,
            self.h_nu * self.h_nu,
        ]
    }
}

/// `Q(t) = (t−λ₁)(t−λ₂)(t−λ₃)` and `Q′(t)`, in factored form.
pub fn cubic(t: f64, f: &FocalTriple) -> (f64, f64) {
    let [a, b, c] = f.as_array();
    let (da, db, dc) = (t - a, t - b, t - c);
    (da * db * dc, db * dc + da * dc + da * db)
}

/// Maps ellipsoidal coordinates to the Cartesian point of their octant.
pub fn to_cartesian(p: &EllipsoidalPoint, f: &FocalTriple) -> Result<CartesianPoint> {
    f.require_strict()?;
    p.check_interlacing(f)?;
    let coords = p.clamped(f);
    let l = f.as_array();
    let mut out = [0.0; 3];
    for (i, slot) in out.iter_mut().enumerate() {
        let num: f64 = coords.iter().map(|xi| xi - l[i]).product();
        let sq = (num / f.focal_denominator(i)).max(0.0);
        *slot = p.octant.sign(i) * sq.sqrt();
    }
    Ok(out.into())
}

/// `G(t)` and `G′(t)` for the point `c`.
fn confocal_cubic(c: &CartesianPoint, f: &FocalTriple, t: f64) -> (f64, f64) {
    let [l1, l2, l3] = f.as_array();
    let (x2, y2, z2) = (c.x * c.x, c.y * c.y, c.z * c.z);
    let (d1, d2, d3) = (t - l1, t - l2, t - l3);
    let (q, dq) = cubic(t, f);
    let g = x2 * d2 * d3 + y2 * d1 * d3 + z2 * d1 * d2 - q;
    let dg = x2 * (d2 + d3) + y2 * (d1 + d3) + z2 * (d1 + d2) - dq;
    (g, dg)
}

/// Root of `g` in `[lo, hi]`, given that `g ≥ 0` left of the root when
/// `positive_left` (and `≤ 0` otherwise). Bisection down to `width`, then
/// Newton kept inside the bracket.
fn isolate_root<G>(
    g: G,
    mut lo: f64,
    mut hi: f64,
    positive_left: bool,
    width: f64,
    scale: f64,
) -> f64
where
    G: Fn(f64) -> (f64, f64),
{
    let left_side = |v: f64| if positive_left { v > 0.0 } else { v < 0.0 };
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        if left_side(g(mid).0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..MAX_NEWTON_ITERS {
        let (v, d) = g(x);
        if v == 0.0 {
            break;
        }
        if left_side(v) {
            lo = x;
        } else {
            hi = x;
        }
        let mut next = x - v / d;
        if !(next.is_finite() && next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - x).abs();
        x = next;
        if step <= NEWTON_REL * (x.abs() + scale) || hi - lo <= NEWTON_REL * (x.abs() + scale) {
            break;
        }
    }
    x
}

/// The confocal parameter `λ ≥ λ₃` of the quadric through `c`: the largest
/// root of `G`. Works for coincident focal constants too.
pub fn confocal_parameter(c: &CartesianPoint, f: &FocalTriple) -> f64 {
    let l3 = f.lambda3();
    let r2 = c.norm_squared();
    let scale = f.span() + r2;
    let hi = l3 + r2 + 1e-3 * scale + f64::MIN_POSITIVE;
    isolate_root(
        |t| confocal_cubic(c, f, t),
        l3,
        hi,
        true,
        BISECTION_WIDTH * scale,
        scale.max(l3.abs()),
    )
}

/// Recovers `ξ − λᵢ` from `xᵢ² = Π_η(η−λᵢ)/Π_{j≠i}(λᵢ−λⱼ)` when the root `ξ`
/// sits close to `λᵢ`; bisection alone loses the relative precision there.
fn refine_near_focal(coords: &mut [f64; 3], c: &CartesianPoint, f: &FocalTriple) {
    let l = f.as_array();
    let xs = c.to_array();
    let near = BISECTION_WIDTH * f.span();
    // (coordinate slot, focal index) pairs that can meet.
    const PAIRS: [(usize, usize); 5] = [(2, 0), (2, 1), (1, 1), (1, 2), (0, 2)];
    for (slot, i) in PAIRS {
        if (coords[slot] - l[i]).abs() >= near {
            continue;
        }
        let others: f64 = (0..3)
            .filter(|&k| k != slot)
            .map(|k| coords[k] - l[i])
            .product();
        if others.abs() < near * near {
            continue;
        }
        coords[slot] = l[i] + xs[i] * xs[i] * f.focal_denominator(i) / others;
    }
}

/// Inverse transform: the three roots of `G`, one per interval, with the
/// octant of `c` and endpoint flags for points on coordinate planes.
pub fn from_cartesian(c: &CartesianPoint, f: &FocalTriple) -> Result<EllipsoidalPoint> {
    f.require_strict()?;
    if !c.is_finite() {
        return Err(domain("non-finite Cartesian point"));
    }
    let [l1, l2, l3] = f.as_array();
    let span = f.span();
    let width = BISECTION_WIDTH * span;
    let g = |t: f64| confocal_cubic(c, f, t);
    let scale = span.max(l1.abs()).max(l3.abs());

    let nu = isolate_root(g, l1, l2, true, width, scale);
    let mu = isolate_root(g, l2, l3, false, width, scale);
    let lambda = confocal_parameter(c, f);

    let mut coords = [lambda, mu, nu];
    refine_near_focal(&mut coords, c, f);
    let [lambda, mu, nu] = coords;
    let lambda = lambda.max(l3);
    let mu = mu.clamp(l2, l3);
    let nu = nu.clamp(l1, l2);

    let tol = ENDPOINT_TOL * span;
    let endpoints = EndpointFlags {
        lambda: lambda - l3 <= tol,
        mu: mu - l2 <= tol || l3 - mu <= tol,
        nu: nu - l1 <= tol || l2 - nu <= tol,
    };
    Ok(EllipsoidalPoint {
        lambda,
        mu,
        nu,
        octant: Octant::of(*c),
        endpoints,
    })
}

fn require_interior(p: &EllipsoidalPoint, f: &FocalTriple) -> Result<()> {
    f.require_strict()?;
    p.check_interlacing(f)?;
    if p.is_interior(f) && !p.endpoints.any() {
        Ok(())
    } else {
        Err(domain(format!(
            "point ({}, {}, {}) lies on a coordinate plane",
            p.lambda, p.mu, p.nu
        )))
    }
}

/// Products `(λ−μ)(λ−ν)`, `(λ−μ)(μ−ν)`, `(λ−ν)(μ−ν)`; equal to `4|Q(ξ)| h_ξ²`.
pub(crate) fn node_products(p: &EllipsoidalPoint) -> [f64; 3] {
    let (l, m, n) = (p.lambda, p.mu, p.nu);
    [(l - m) * (l - n), (l - m) * (m - n), (l - n) * (m - n)]
}

/// `R(λ)`, `S(μ)`, `T(ν)`, clamped at zero.
pub fn branch_radicals(p: &EllipsoidalPoint, f: &FocalTriple) -> [f64; 3] {
    [
        cubic(p.lambda, f).0.max(0.0).sqrt(),
        (-cubic(p.mu, f).0).max(0.0).sqrt(),
        cubic(p.nu, f).0.max(0.0).sqrt(),
    ]
}

pub fn scale_factors(p: &EllipsoidalPoint, f: &FocalTriple) -> Result<ScaleFactors> {
    require_interior(p, f)?;
    let [r, s, t] = branch_radicals(p, f);
    let [dl, dm, dn] = node_products(p);
    if dl <= 0.0 || dm <= 0.0 || dn <= 0.0 {
        return Err(domain("coincident ellipsoidal coordinates"));
    }
    Ok(ScaleFactors {
        h_lambda: dl.sqrt() / (2.0 * r),
        h_mu: dm.sqrt() / (2.0 * s),
        h_nu: dn.sqrt() / (2.0 * t),
    })
}

/// `M = J · diag(2√|Q(ξ)|)`, columns ordered `(λ, μ, ν)`.
///
/// Each entry is written as a square root of products of coordinate
/// differences, so it stays finite where a Cartesian coordinate vanishes
/// (where `J` itself diverges). `MᵀM = diag((λ−μ)(λ−ν), (λ−μ)(μ−ν), (λ−ν)(μ−ν))`.
pub fn normalized_jacobian(p: &EllipsoidalPoint, f: &FocalTriple) -> Result<Matrix3<f64>> {
    f.require_strict()?;
    p.check_interlacing(f)?;
    let coords = p.clamped(f);
    let l = f.as_array();
    // sign(ξ − λᵢ) is fixed by the interlacing: rows ξ = λ, μ, ν.
    const SIGNS: [[f64; 3]; 3] = [[1.0, 1.0, 1.0], [1.0, 1.0, -1.0], [1.0, -1.0, -1.0]];
    let mut m = Matrix3::zeros();
    for i in 0..3 {
        let d = f.focal_denominator(i).abs();
        for k in 0..3 {
            let xi = coords[k];
            let across: f64 = (0..3)
                .filter(|&j| j != k)
                .map(|j| coords[j] - l[i])
                .product();
            let along: f64 = (0..3).filter(|&j| j != i).map(|j| xi - l[j]).product();
            let mag = (across.abs() * along.abs() / d).sqrt();
            m[(i, k)] = p.octant.sign(i) * SIGNS[k][i] * mag;
        }
    }
    Ok(m)
}

/// `J[i][ξ] = ∂xᵢ/∂ξ`, columns ordered `(λ, μ, ν)`. Requires an interior point.
pub fn jacobian(p: &EllipsoidalPoint, f: &FocalTriple) -> Result<Matrix3<f64>> {
    require_interior(p, f)?;
    let mut j = normalized_jacobian(p, f)?;
    for (k, xi) in p.coords().into_iter().enumerate() {
        let radical = cubic(xi, f).0.abs().sqrt();
        j.column_mut(k).scale_mut(0.5 / radical);
    }
    Ok(j)
}

/// `Σ xᵢ²/(λ−λᵢ) − 1`.
pub fn quadric_residual(c: &CartesianPoint, lambda: f64, f: &FocalTriple) -> Result<f64> {
    if lambda <= f.lambda3() {
        return Err(domain(format!(
            "quadric parameter {lambda} must exceed lambda3 = {}",
            f.lambda3()
        )));
    }
    let l = f.as_array();
    let s: f64 = c
        .to_array()
        .iter()
        .zip(l)
        .map(|(x, li)| x * x / (lambda - li))
        .sum();
    Ok(s - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn f014() -> FocalTriple {
        FocalTriple::new(0.0, 1.0, 4.0).unwrap()
    }

    fn worked() -> EllipsoidalPoint {
        EllipsoidalPoint::new(5.0, 2.0, 0.5)
    }

    #[test]
    fn triple_validation() {
        assert!(matches!(
            FocalTriple::new(4.0, 1.0, 0.0),
            Err(Error::Unordered(..))
        ));
        assert_eq!(
            FocalTriple::new(4.0, 1.0, 0.0).unwrap_err().to_string(),
            "focal constants must be nondecreasing, got (4, 1, 0)"
        );
        assert!(FocalTriple::new(0.0, f64::NAN, 1.0).is_err());
        assert_eq!(
            FocalTriple::new(0.0, 4.0, 4.0).unwrap().kind(),
            FocalKind::UpperPair
        );
        assert_eq!(
            FocalTriple::new(0.0, 0.0, 0.0).unwrap().kind(),
            FocalKind::Flat
        );
        assert_eq!(
            FocalTriple::new(0.0, 0.0, 1.0).unwrap().kind(),
            FocalKind::LowerPair
        );
    }

    #[test]
    fn cubic_values() {
        let f = f014();
        assert_eq!(cubic(5.0, &f), (20.0, 29.0));
        assert_eq!(cubic(0.0, &f).0, 0.0);
        assert_eq!(cubic(2.0, &f).0, -4.0);
        // expanded form t³ − 5t² + 4t
        for t in [-1.5, 0.3, 2.7, 9.0] {
            let (q, dq) = cubic(t, &f);
            assert_relative_eq!(q, t * t * t - 5.0 * t * t + 4.0 * t, epsilon = 1e-12);
            assert_relative_eq!(dq, 3.0 * t * t - 10.0 * t + 4.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn worked_point_to_cartesian() {
        let c = to_cartesian(&worked(), &f014()).unwrap();
        assert_relative_eq!(c.x * c.x, 1.25, epsilon = 1e-14);
        assert_relative_eq!(c.y * c.y, 2.0 / 3.0, epsilon = 1e-14);
        assert_relative_eq!(c.z * c.z, 7.0 / 12.0, epsilon = 1e-14);
        assert_relative_eq!(c.x, 1.118034, epsilon = 1e-6);
        assert_relative_eq!(c.y, 0.816497, epsilon = 1e-6);
        assert_relative_eq!(c.z, 0.763763, epsilon = 1e-6);
    }

    #[test]
    fn plane_and_origin_images() {
        let f = f014();
        let c = to_cartesian(&EllipsoidalPoint::new(5.0, 2.0, 0.0), &f).unwrap();
        assert_eq!(c.x, 0.0);
        let o = to_cartesian(&EllipsoidalPoint::new(4.0, 1.0, 0.0), &f).unwrap();
        assert_eq!(o, CartesianPoint::ORIGIN);
    }

    #[test]
    fn octant_signs_are_applied() {
        let p = worked().with_octant(Octant::new(-1, 1, -1).unwrap());
        let c = to_cartesian(&p, &f014()).unwrap();
        assert!(c.x < 0.0 && c.y > 0.0 && c.z < 0.0);
        let back = from_cartesian(&c, &f014()).unwrap();
        assert_eq!(back.octant, p.octant);
    }

    #[test]
    fn interlacing_violation_is_domain_error() {
        let bad = EllipsoidalPoint::new(5.0, 0.5, 2.0);
        assert!(matches!(to_cartesian(&bad, &f014()), Err(Error::Domain(_))));
    }

    #[test]
    fn degenerate_triple_rejected() {
        let f = FocalTriple::new(0.0, 4.0, 4.0).unwrap();
        assert_eq!(
            from_cartesian(&CartesianPoint::new(1.0, 1.0, 1.0), &f),
            Err(Error::DegenerateTriple)
        );
    }

    #[test]
    fn inverse_of_worked_point() {
        let f = f014();
        let c = CartesianPoint::new(
            1.25f64.sqrt(),
            (2.0f64 / 3.0).sqrt(),
            (7.0f64 / 12.0).sqrt(),
        );
        let p = from_cartesian(&c, &f).unwrap();
        assert_relative_eq!(p.lambda, 5.0, epsilon = 1e-12);
        assert_relative_eq!(p.mu, 2.0, epsilon = 1e-12);
        assert_relative_eq!(p.nu, 0.5, epsilon = 1e-12);
        assert!(!p.endpoints.any());
    }

    #[test]
    fn inverse_of_origin_hits_focal_constants() {
        let p = from_cartesian(&CartesianPoint::ORIGIN, &f014()).unwrap();
        assert_relative_eq!(p.lambda, 4.0, epsilon = 1e-12);
        assert_relative_eq!(p.mu, 1.0, epsilon = 1e-12);
        assert_relative_eq!(p.nu, 0.0, epsilon = 1e-12);
        assert!(p.endpoints.lambda && p.endpoints.mu && p.endpoints.nu);
    }

    #[test]
    fn inverse_on_x_axis() {
        // G factors as (t−1)(t−4)(x²−t)
        let p = from_cartesian(&CartesianPoint::new(5f64.sqrt(), 0.0, 0.0), &f014()).unwrap();
        assert_relative_eq!(p.lambda, 5.0, epsilon = 1e-12);
        assert_relative_eq!(p.mu, 4.0, epsilon = 1e-12);
        assert_relative_eq!(p.nu, 1.0, epsilon = 1e-12);
        assert!(p.endpoints.mu && p.endpoints.nu && !p.endpoints.lambda);
    }

    #[test]
    fn near_plane_coordinate_keeps_relative_precision() {
        let f = f014();
        let p = EllipsoidalPoint::new(6.0, 2.5, 1e-14);
        let c = to_cartesian(&p, &f).unwrap();
        let back = from_cartesian(&c, &f).unwrap();
        assert_relative_eq!(back.nu, 1e-14, max_relative = 1e-10);
    }

    #[test]
    fn scale_factor_values() {
        let h = scale_factors(&worked(), &f014()).unwrap();
        assert_relative_eq!(
            h.h_lambda,
            13.5f64.sqrt() / (2.0 * 20f64.sqrt()),
            epsilon = 1e-14
        );
        assert_relative_eq!(h.h_lambda, 0.410791, epsilon = 1e-6);
        assert_relative_eq!(h.h_mu, 0.530330, epsilon = 1e-6);
        assert_relative_eq!(
            h.h_nu,
            6.75f64.sqrt() / (2.0 * 0.875f64.sqrt()),
            epsilon = 1e-14
        );
        assert_relative_eq!(h.h_nu, 1.388730, epsilon = 1e-6);
        let on_plane = EllipsoidalPoint::new(5.0, 4.0, 1.0);
        assert!(scale_factors(&on_plane, &f014()).is_err());
    }

    #[test]
    fn jacobian_at_worked_point() {
        let f = f014();
        let p = worked();
        let j = jacobian(&p, &f).unwrap();
        let c = to_cartesian(&p, &f).unwrap();
        // direct partial x/(2(λ−λ₁))
        assert_relative_eq!(j[(0, 0)], c.x / 10.0, epsilon = 1e-14);
        assert_relative_eq!(j[(0, 0)], 0.111803, epsilon = 1e-6);
        let jtj = j.transpose() * j;
        assert_relative_eq!(jtj[(0, 0)], 0.168749, epsilon = 1e-6);
        assert_relative_eq!(jtj[(1, 1)], 0.281250, epsilon = 1e-6);
        assert_relative_eq!(jtj[(2, 2)], 27.0 / 14.0, epsilon = 1e-12);
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            assert!(jtj[(a, b)].abs() < 1e-10);
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let f = f014();
        let p = EllipsoidalPoint::new(6.3, 3.1, 0.2).with_octant(Octant::new(1, -1, 1).unwrap());
        let j = jacobian(&p, &f).unwrap();
        let h = 1e-6;
        for k in 0..3 {
            let mut plus = p;
            let mut minus = p;
            match k {
                0 => {
                    plus.lambda += h;
                    minus.lambda -= h;
                }
                1 => {
                    plus.mu += h;
                    minus.mu -= h;
                }
                _ => {
                    plus.nu += h;
                    minus.nu -= h;
                }
            }
            let cp = to_cartesian(&plus, &f).unwrap().to_vector();
            let cm = to_cartesian(&minus, &f).unwrap().to_vector();
            let fd = (cp - cm) / (2.0 * h);
            for i in 0..3 {
                assert_relative_eq!(j[(i, k)], fd[i], epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn normalized_jacobian_is_finite_on_planes() {
        let f = f014();
        let p = from_cartesian(&CartesianPoint::new(0.0, 0.7, 1.3), &f).unwrap();
        assert!(p.endpoints.nu);
        let m = normalized_jacobian(&p, &f).unwrap();
        assert!(m.iter().all(|v| v.is_finite()));
        let mtm = m.transpose() * m;
        let d = node_products(&p);
        for k in 0..3 {
            assert_relative_eq!(mtm[(k, k)], d[k], max_relative = 1e-12);
        }
        assert!(jacobian(&p, &f).is_err());
    }

    #[test]
    fn quadric_residual_cases() {
        let f = f014();
        let c = to_cartesian(&worked(), &f).unwrap();
        assert!(quadric_residual(&c, 5.0, &f).unwrap().abs() < 1e-12);
        let on_axis = CartesianPoint::new(5f64.sqrt(), 0.0, 0.0);
        assert!(quadric_residual(&on_axis, 5.0, &f).unwrap().abs() <= f64::EPSILON);
        assert_relative_eq!(
            quadric_residual(&c.scaled(2.0), 5.0, &f).unwrap(),
            3.0,
            epsilon = 1e-12
        );
        assert!(quadric_residual(&c, 4.0, &f).is_err());
    }

    #[test]
    fn confocal_parameter_degenerate_triples() {
        let flat = FocalTriple::new(0.0, 0.0, 0.0).unwrap();
        let c = CartesianPoint::new(0.3, -1.2, 0.7);
        assert_relative_eq!(
            confocal_parameter(&c, &flat),
            c.norm_squared(),
            max_relative = 1e-15
        );
        let eh = FocalTriple::new(0.0, 4.0, 4.0).unwrap();
        assert_relative_eq!(
            confocal_parameter(&CartesianPoint::new(0.0, 3.0, 0.0), &eh),
            13.0,
            max_relative = 1e-15
        );
    }
}
