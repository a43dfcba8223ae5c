//! The reduced geodesic flow on the Euclidean quotient.
//!
//! With fiber charge `e` the flow is generated by
//!
//! ```text
//! H = ½ ( |p − eω|²/V + e²V ),
//! ```
//!
//! unit-speed geodesics lying on `H = ½`. Integration runs in kinetic
//! variables `(x, π)`, `π = p − eω`, where `curl ω = s ∇V` turns the magnetic
//! term into `e s (ẋ × ∇V)`:
//!
//! ```text
//! ẋ = π/V,    π̇ = ½ (|π|²/V² − e²) ∇V + e s (ẋ × ∇V).
//! ```
//!
//! For `e = 0` the Hamilton–Jacobi equation `|∇W|² = V` separates. In scaled
//! momenta `P_ξ = 2√|Q(ξ)| p_ξ` the three branch values
//!
//! ```text
//! K_λ = P_λ² − √Q(λ),    K_μ = −P_μ²,    K_ν = P_ν²
//! ```
//!
//! lie on one line `K = aξ + b` exactly when `|p|² = V`; its second divided
//! difference is `|p|² − V`.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::confocal::{
    confocal_parameter, cubic, from_cartesian, jacobian, node_products, normalized_jacobian,
    scale_factors, CartesianPoint, EllipsoidalPoint, FocalTriple,
};
use crate::error::{domain, Error, Result};
use crate::field::{
    connection_cartesian, potential_cartesian, potential_gradient, CURL_ORIENTATION,
};
use crate::ode::{dopri5, AdaptiveConfig, Control};
use crate::sampling::guard_distance;

/// Relative step for finite differences of `ω`.
const FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedState {
    pub position: CartesianPoint,
    pub momentum: [f64; 3],
    pub charge: f64,
}

impl ReducedState {
    pub fn new(position: CartesianPoint, momentum: [f64; 3], charge: f64) -> Self {
        Self {
            position,
            momentum,
            charge,
        }
    }

    pub fn momentum_vector(&self) -> Vector3<f64> {
        Vector3::from(self.momentum)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparationLine {
    pub a: f64,
    pub b: f64,
}

impl SeparationLine {
    pub fn at(&self, xi: f64) -> f64 {
        self.a * xi + self.b
    }
}

fn kinetic_momentum(s: &ReducedState, f: &FocalTriple) -> Result<Vector3<f64>> {
    let p = s.momentum_vector();
    if s.charge == 0.0 {
        return Ok(p);
    }
    Ok(p - connection_cartesian(&s.position, f)? * s.charge)
}

fn kinetic_energy(pi: &Vector3<f64>, v: f64, e: f64) -> f64 {
    0.5 * (pi.norm_squared() / v + e * e * v)
}

/// `½ (|p − eω|²/V + e²V)`.
pub fn hamiltonian(s: &ReducedState, f: &FocalTriple) -> Result<f64> {
    let v = potential_cartesian(&s.position, f)?;
    let pi = kinetic_momentum(s, f)?;
    Ok(kinetic_energy(&pi, v, s.charge))
}

/// `(ẋ, ṗ)` for the canonical pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDerivative {
    pub velocity: Vector3<f64>,
    pub force: Vector3<f64>,
}

/// `D[i][j] = ∂ⱼ ωᵢ` by central differences.
fn connection_derivative(c: &CartesianPoint, f: &FocalTriple) -> Result<Matrix3<f64>> {
    let h = FD_STEP * f.length_scale().max(c.norm());
    let mut d = Matrix3::zeros();
    for j in 0..3 {
        let wp = connection_cartesian(&c.shifted(j, h), f)?;
        let wm = connection_cartesian(&c.shifted(j, -h), f)?;
        d.set_column(j, &((wp - wm) / (2.0 * h)));
    }
    Ok(d)
}

/// Hamilton's equations `ẋ = ∂H/∂p`, `ṗ = −∂H/∂x`.
///
/// `∇V` is analytic; for `e ≠ 0` the derivative of `ω` is taken by central
/// differences.
pub fn flow_rhs(s: &ReducedState, f: &FocalTriple) -> Result<StateDerivative> {
    let e = s.charge;
    let (v, grad_v) = potential_gradient(&s.position, f)?;
    let pi = kinetic_momentum(s, f)?;
    let velocity = pi / v;
    let mut force = grad_v * (0.5 * (pi.norm_squared() / (v * v) - e * e));
    if e != 0.0 {
        let d = connection_derivative(&s.position, f)?;
        force += d.transpose() * pi * (e / v);
    }
    Ok(StateDerivative { velocity, force })
}

/// `[x, π]` ↦ `[ẋ, π̇]`.
fn kinetic_rhs(y: &[f64; 6], e: f64, f: &FocalTriple) -> Result<[f64; 6]> {
    let c = CartesianPoint::new(y[0], y[1], y[2]);
    let (v, grad_v) = potential_gradient(&c, f)?;
    let pi = Vector3::new(y[3], y[4], y[5]);
    let xdot = pi / v;
    let mut pidot = grad_v * (0.5 * (pi.norm_squared() / (v * v) - e * e));
    if e != 0.0 {
        pidot += xdot.cross(&grad_v) * (e * CURL_ORIENTATION);
    }
    Ok([xdot[0], xdot[1], xdot[2], pidot[0], pidot[1], pidot[2]])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryStatus {
    Completed,
    /// Stopped on entering the neighbourhood of `λ = λ₃`, where `V → 0`.
    GuardZone,
}

impl TrajectoryStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Completed => "completed",
            Self::GuardZone => "guard_zone",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub state: ReducedState,
    pub hamiltonian: f64,
    /// Separation constants and collinearity residual (`e = 0` only).
    pub separation: Option<(SeparationLine, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub status: TrajectoryStatus,
}

impl Trajectory {
    pub fn last(&self) -> &TrajectorySample {
        self.samples
            .last()
            .expect("a trajectory holds its initial sample")
    }

    pub fn max_energy_drift(&self) -> f64 {
        let h0 = self.samples[0].hamiltonian;
        self.samples
            .iter()
            .map(|s| (s.hamiltonian - h0).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationConfig {
    pub tol: f64,
    /// The run stops once `λ − λ₃` falls below `guard · (λ₃ − λ₁)`.
    pub guard: f64,
}

impl IntegrationConfig {
    pub fn new(tol: f64) -> Self {
        Self { tol, guard: 1e-3 }
    }
}

pub fn in_guard_zone(c: &CartesianPoint, f: &FocalTriple, guard: f64) -> bool {
    confocal_parameter(c, f) - f.lambda3() < guard_distance(f, guard)
}

fn sample_at(t: f64, y: &[f64; 6], e: f64, f: &FocalTriple) -> Result<TrajectorySample> {
    let position = CartesianPoint::new(y[0], y[1], y[2]);
    let pi = Vector3::new(y[3], y[4], y[5]);
    let v = potential_cartesian(&position, f)?;
    let p = if e == 0.0 {
        pi
    } else {
        match connection_cartesian(&position, f) {
            Ok(w) => pi + w * e,
            Err(_) => Vector3::repeat(f64::NAN),
        }
    };
    let state = ReducedState::new(position, [p[0], p[1], p[2]], e);
    let separation = if e == 0.0 {
        separation_line(&position, &state.momentum, f).ok()
    } else {
        None
    };
    Ok(TrajectorySample {
        t,
        state,
        hamiltonian: kinetic_energy(&pi, v, e),
        separation,
    })
}

/// Integrates over `duration` (negative runs backward), recording every
/// accepted step.
pub fn integrate(
    s0: &ReducedState,
    f: &FocalTriple,
    duration: f64,
    cfg: &IntegrationConfig,
) -> Result<Trajectory> {
    if !(cfg.tol > 0.0) || !duration.is_finite() {
        return Err(Error::Precondition(
            "tolerance must be positive and duration finite".into(),
        ));
    }
    let e = s0.charge;
    let pi = kinetic_momentum(s0, f)?;
    let x = s0.position;
    let y0 = [x.x, x.y, x.z, pi[0], pi[1], pi[2]];
    let mut samples = vec![sample_at(0.0, &y0, e, f)?];
    if in_guard_zone(&x, f, cfg.guard) {
        return Ok(Trajectory {
            samples,
            status: TrajectoryStatus::GuardZone,
        });
    }

    let mut failure = None;
    let mut guarded = false;
    let result = dopri5(
        |_, y| kinetic_rhs(y, e, f),
        0.0,
        y0,
        duration,
        &AdaptiveConfig::new(cfg.tol),
        |step| {
            if step.y1.iter().any(|v| !v.is_finite()) {
                failure = Some(Error::NonFiniteState { t: step.t1 });
                return Control::Stop;
            }
            match sample_at(step.t1, &step.y1, e, f) {
                Ok(s) => samples.push(s),
                Err(err) => {
                    failure = Some(err);
                    return Control::Stop;
                }
            }
            let c = CartesianPoint::new(step.y1[0], step.y1[1], step.y1[2]);
            if in_guard_zone(&c, f, cfg.guard) {
                guarded = true;
                return Control::Stop;
            }
            Control::Continue
        },
    );
    if let Some(err) = failure {
        return Err(err);
    }
    let status = match result {
        Ok(_) if guarded => TrajectoryStatus::GuardZone,
        Ok(_) => TrajectoryStatus::Completed,
        // the potential is singular only inside the guard zone
        Err(Error::Singular(_)) | Err(Error::Domain(_)) => TrajectoryStatus::GuardZone,
        Err(err) => return Err(err),
    };
    Ok(Trajectory { samples, status })
}

/// `p_ξ = Σᵢ pᵢ ∂xᵢ/∂ξ`, ordered `(λ, μ, ν)`. Needs an interior point.
pub fn cotangent_to_ellipsoidal(
    x: &CartesianPoint,
    p: &[f64; 3],
    f: &FocalTriple,
) -> Result<(EllipsoidalPoint, [f64; 3])> {
    let q = from_cartesian(x, f)?;
    let j = jacobian(&q, f)?;
    let pe = j.transpose() * Vector3::from(*p);
    Ok((q, [pe[0], pe[1], pe[2]]))
}

/// `Σ_ξ p_ξ²/h_ξ²`, the squared Cartesian norm of the covector.
pub fn ellipsoidal_norm_squared(
    q: &EllipsoidalPoint,
    pe: &[f64; 3],
    f: &FocalTriple,
) -> Result<f64> {
    let h2 = scale_factors(q, f)?.squared();
    Ok((0..3).map(|k| pe[k] * pe[k] / h2[k]).sum())
}

/// The branch points `(ξ, K_ξ)` for a covector at a point.
///
/// Built on the normalized Jacobian, so they stay finite on coordinate
/// planes; only `μ = ν` (the focal hyperbola) leaves the line undefined.
pub fn branch_points(x: &CartesianPoint, p: &[f64; 3], f: &FocalTriple) -> Result<[(f64, f64); 3]> {
    let q = from_cartesian(x, f)?;
    let m = normalized_jacobian(&q, f)?;
    let scaled = m.transpose() * Vector3::from(*p);
    let r = cubic(q.lambda, f).0.max(0.0).sqrt();
    Ok([
        (q.lambda, scaled[0] * scaled[0] - r),
        (q.mu, -scaled[1] * scaled[1]),
        (q.nu, scaled[2] * scaled[2]),
    ])
}

/// Least-squares line through the three branch points, and the vertical
/// distance of the `λ` point from the line through the other two.
///
/// The distance is relative to the largest of 1, `|K|` and the two terms
/// `P_λ²`, `√Q(λ)` whose difference is `K_λ`. It equals
/// `(|p|² − V)(λ−μ)(λ−ν)` and `V(λ−μ)(λ−ν) = √Q(λ)`, so the residual never
/// exceeds the relative shell error `| |p|²/V − 1 |`.
pub fn separation_line(
    x: &CartesianPoint,
    p: &[f64; 3],
    f: &FocalTriple,
) -> Result<(SeparationLine, f64)> {
    let pts = branch_points(x, p, f)?;
    let [(l, kl), (m, km), (n, kn)] = pts;
    if m - n <= f64::EPSILON * f.span() {
        return Err(domain("mu = nu: point on the focal hyperbola"));
    }
    let slope = (km - kn) / (m - n);
    let deviation = kl - (kn + slope * (l - n));
    let root = cubic(l, f).0.max(0.0).sqrt();
    let scale = pts
        .iter()
        .map(|(_, k)| k.abs())
        .fold(1.0, f64::max)
        .max(kl + root)
        .max(root);

    let xm = (l + m + n) / 3.0;
    let km_ = (kl + km + kn) / 3.0;
    let (sxx, sxk) = pts.iter().fold((0.0, 0.0), |(sxx, sxk), (xi, k)| {
        (sxx + (xi - xm).powi(2), sxk + (xi - xm) * (k - km_))
    });
    let a = sxk / sxx;
    let b = km_ - a * xm;
    Ok((SeparationLine { a, b }, deviation.abs() / scale))
}

/// A covector at `x` whose branch points lie exactly on `line`, or `None`
/// when the line's signs do not allow it there. `signs` picks the sign of
/// each scaled momentum.
pub fn separable_momentum(
    x: &CartesianPoint,
    line: &SeparationLine,
    signs: [f64; 3],
    f: &FocalTriple,
) -> Result<Option<[f64; 3]>> {
    let q = from_cartesian(x, f)?;
    let r = cubic(q.lambda, f).0.max(0.0).sqrt();
    let squares = [line.at(q.lambda) + r, -line.at(q.mu), line.at(q.nu)];
    if squares.iter().any(|s| *s < 0.0) {
        return Ok(None);
    }
    let m = normalized_jacobian(&q, f)?;
    let d = node_products(&q);
    // MᵀM = diag(d), so p = M diag(1/d) P
    let scaled = Vector3::from_fn(|k, _| signs[k] * squares[k].sqrt() / d[k]);
    let p = m * scaled;
    Ok(Some([p[0], p[1], p[2]]))
}

/// A state on the unit-speed shell at `x`, with momentum along `direction`.
pub fn shell_state(
    x: &CartesianPoint,
    direction: &Vector3<f64>,
    charge: f64,
    f: &FocalTriple,
) -> Result<ReducedState> {
    let v = potential_cartesian(x, f)?;
    let kinetic = v * (1.0 - charge * charge * v);
    if kinetic < 0.0 {
        return Err(Error::Precondition(format!(
            "no shell state at this point for charge {charge}: e²V exceeds 1"
        )));
    }
    let n = direction.norm();
    if !(n > 0.0) {
        return Err(Error::Precondition("direction must be nonzero".into()));
    }
    let mut p = direction * (kinetic.sqrt() / n);
    if charge != 0.0 {
        p += connection_cartesian(x, f)? * charge;
    }
    Ok(ReducedState::new(*x, [p[0], p[1], p[2]], charge))
}
