//! Self-dual 4-metrics with a triholomorphic SU(2) action, cast in
//! Gibbons–Hawking form over confocal-quadric coordinates.
//!
//! The crate is organised bottom-up:
//!
//! - [`confocal`]: ellipsoidal coordinates, their inverse, Jacobian and scale factors.
//! - [`field`]: the harmonic potential `V`, the connection one-form `ω`, and
//!   finite-difference checks of `∇²V = 0` and `curl ω = grad V`.
//! - [`bgpp`]: the SU(2) side (adjoint rows, profile functions, moment maps).
//! - [`dynamics`]: the reduced geodesic flow and its separation constants.
//! - [`waves`]: separated Schrödinger equation for vanishing charge.
//! - [`ode`]: the Runge–Kutta integrators behind `bgpp`, `dynamics` and `waves`.
//! - [`verify`]: the composed verification suite used by the CLI.

// `!(x < y)` is used on purpose so that NaN fails the comparison
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bgpp;
pub mod confocal;
pub mod dynamics;
pub mod error;
pub mod field;
pub mod ode;
pub mod sampling;
pub mod verify;
pub mod waves;

pub use bgpp::{AdjointMatrix, GroupPoint, MetricNorms, ProfileTriple};
pub use confocal::{
    CartesianPoint, EllipsoidalPoint, EndpointFlags, FocalKind, FocalTriple, Octant, ScaleFactors,
};
pub use dynamics::{ReducedState, SeparationLine, Trajectory, TrajectorySample, TrajectoryStatus};
pub use error::{Error, Result};
pub use field::{FieldSample, SpecialKind, CURL_ORIENTATION};
pub use verify::{Check, VerificationReport, VerifyConfig};
pub use waves::{Branch, BranchOde, BranchSolution, BranchStatus, ProductSolution};

pub use nalgebra;
