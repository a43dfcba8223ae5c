//! Separated Schrödinger equation at vanishing charge.
//!
//! In ellipsoidal coordinates the flat Laplacian is
//!
//! ```text
//! ∇²ψ = Σ_ξ [4Q(ξ) ∂²_ξ ψ + 2Q′(ξ) ∂_ξ ψ] / Π_{η≠ξ}(ξ − η),
//! ```
//!
//! and `V = √Q(λ)/((λ−μ)(λ−ν))` has only a `λ` term, so `∇²ψ + EVψ = 0`
//! separates as `ψ = Λ(λ) M(μ) N(ν)` with
//!
//! ```text
//! 4Q(ξ) u″ + 2Q′(ξ) u′ + (δ_ξλ E √Q(ξ) − aξ − b) u = 0
//! ```
//!
//! on each branch, for the same pair `(a, b)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::confocal::{
    cubic, from_cartesian, to_cartesian, CartesianPoint, EllipsoidalPoint, FocalTriple,
};
use crate::error::{domain, Error, Result};
use crate::field::potential_cartesian;
use crate::ode::{dopri5, rk4, AdaptiveConfig, Control};

/// Magnitude treated as overflow of a branch solution.
pub const OVERFLOW: f64 = 1e150;

/// Distance kept from branch endpoints, relative to `λ₃ − λ₁`.
pub const ENDPOINT_MARGIN: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Lambda,
    Mu,
    Nu,
}

impl Branch {
    pub const ALL: [Branch; 3] = [Branch::Lambda, Branch::Mu, Branch::Nu];

    pub fn index(self) -> usize {
        match self {
            Branch::Lambda => 0,
            Branch::Mu => 1,
            Branch::Nu => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Branch::Lambda => "lambda",
            Branch::Mu => "mu",
            Branch::Nu => "nu",
        }
    }

    /// The open coordinate range; the `λ` branch is unbounded above.
    pub fn range(self, f: &FocalTriple) -> (f64, f64) {
        let [l1, l2, l3] = f.as_array();
        match self {
            Branch::Lambda => (l3, f64::INFINITY),
            Branch::Mu => (l2, l3),
            Branch::Nu => (l1, l2),
        }
    }

    pub fn contains(self, xi: f64, f: &FocalTriple) -> bool {
        let (lo, hi) = self.range(f);
        lo < xi && xi < hi
    }
}

impl std::str::FromStr for Branch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lambda" => Ok(Branch::Lambda),
            "mu" => Ok(Branch::Mu),
            "nu" => Ok(Branch::Nu),
            other => Err(Error::Precondition(format!("unknown branch {other:?}"))),
        }
    }
}

fn coefficients_unchecked(
    branch: Branch,
    xi: f64,
    energy: f64,
    a: f64,
    b: f64,
    f: &FocalTriple,
) -> [f64; 3] {
    let (q, dq) = cubic(xi, f);
    let source = if branch == Branch::Lambda {
        energy * q.max(0.0).sqrt()
    } else {
        0.0
    };
    [4.0 * q, 2.0 * dq, source - a * xi - b]
}

/// `(4Q, 2Q′, δ_ξλ E√Q − aξ − b)` at `xi`.
pub fn ode_coefficients(
    branch: Branch,
    xi: f64,
    energy: f64,
    a: f64,
    b: f64,
    f: &FocalTriple,
) -> Result<(f64, f64, f64)> {
    f.require_strict()?;
    if !branch.contains(xi, f) {
        let (lo, hi) = branch.range(f);
        return Err(domain(format!(
            "{xi} lies outside the open {} range ({lo}, {hi})",
            branch.name()
        )));
    }
    let [c2, c1, c0] = coefficients_unchecked(branch, xi, energy, a, b, f);
    Ok((c2, c1, c0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchOde {
    pub branch: Branch,
    pub lo: f64,
    pub hi: f64,
    pub energy: f64,
    pub a: f64,
    pub b: f64,
}

impl BranchOde {
    /// The branch range shrunk by the endpoint margin; the `λ` interval is
    /// cut at `λ₃ + extent · (λ₃ − λ₁)`.
    pub fn on_branch(
        branch: Branch,
        f: &FocalTriple,
        energy: f64,
        a: f64,
        b: f64,
        extent: f64,
    ) -> Result<Self> {
        f.require_strict()?;
        let eps = ENDPOINT_MARGIN * f.span();
        let (lo, hi) = branch.range(f);
        let hi = if hi.is_finite() {
            hi - eps
        } else {
            lo + extent * f.span()
        };
        let ode = Self {
            branch,
            lo: lo + eps,
            hi,
            energy,
            a,
            b,
        };
        ode.validate(f)?;
        Ok(ode)
    }

    pub fn validate(&self, f: &FocalTriple) -> Result<()> {
        f.require_strict()?;
        if !(self.lo < self.hi)
            || !self.branch.contains(self.lo, f)
            || !self.branch.contains(self.hi, f)
        {
            return Err(domain(format!(
                "interval [{}, {}] must lie strictly inside the {} range",
                self.lo,
                self.hi,
                self.branch.name()
            )));
        }
        Ok(())
    }

    fn rhs(&self, xi: f64, y: &[f64; 2], f: &FocalTriple) -> [f64; 2] {
        let [c2, c1, c0] = coefficients_unchecked(self.branch, xi, self.energy, self.a, self.b, f);
        [y[1], -(c1 * y[1] + c0 * y[0]) / c2]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchStatus {
    Completed,
    Overflow,
}

/// `u` and `u′` sampled at equally spaced abscissae.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchSolution {
    pub xi: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    pub status: BranchStatus,
}

/// Integrates from `(lo, u0, du0)` to `hi`, sampling `n ≥ 2` points.
pub fn integrate_branch(
    ode: &BranchOde,
    f: &FocalTriple,
    u0: f64,
    du0: f64,
    n: usize,
    tol: f64,
) -> Result<BranchSolution> {
    ode.validate(f)?;
    if n < 2 {
        return Err(Error::Precondition(
            "need at least two sample points".into(),
        ));
    }
    let grid: Vec<f64> = (0..n)
        .map(|k| {
            if k + 1 == n {
                ode.hi
            } else {
                ode.lo + (ode.hi - ode.lo) * k as f64 / (n - 1) as f64
            }
        })
        .collect();
    let mut out = BranchSolution {
        xi: vec![grid[0]],
        u: vec![u0],
        du: vec![du0],
        status: BranchStatus::Completed,
    };
    let mut next = 1;
    let mut overflow = false;
    let result = dopri5(
        |xi, y| Ok(ode.rhs(xi, y, f)),
        ode.lo,
        [u0, du0],
        ode.hi,
        &AdaptiveConfig::new(tol),
        |step| {
            while next < n && grid[next] <= step.t1 {
                let y = if grid[next] == step.t1 {
                    step.y1
                } else {
                    step.interpolate(grid[next])
                };
                if y.iter().any(|v| !(v.abs() < OVERFLOW)) {
                    overflow = true;
                    return Control::Stop;
                }
                out.xi.push(grid[next]);
                out.u.push(y[0]);
                out.du.push(y[1]);
                next += 1;
            }
            if step.y1.iter().any(|v| !(v.abs() < OVERFLOW)) {
                overflow = true;
                return Control::Stop;
            }
            Control::Continue
        },
    );
    match result {
        Ok(_) if !overflow => {}
        Ok(_) | Err(Error::StepUnderflow { .. }) | Err(Error::NonFiniteState { .. }) => {
            out.status = BranchStatus::Overflow
        }
        Err(e) => return Err(e),
    }
    Ok(out)
}

/// `ψ = Λ(λ) M(μ) N(ν)` with each factor fixed by initial data at an anchor.
///
/// Factors are evaluated by a fixed number of RK4 steps from the anchor, so
/// `ψ` is a smooth function of position and can be differenced.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductSolution {
    f: FocalTriple,
    anchor: [f64; 3],
    energy: f64,
    /// `(a, b)` per branch; equal for a separable product.
    constants: [(f64, f64); 3],
    initial: [(f64, f64); 3],
    steps: usize,
}

impl ProductSolution {
    pub fn new(
        f: &FocalTriple,
        anchor: &EllipsoidalPoint,
        energy: f64,
        a: f64,
        b: f64,
    ) -> Result<Self> {
        f.require_strict()?;
        let coords = anchor.coords();
        for (k, branch) in Branch::ALL.into_iter().enumerate() {
            if !branch.contains(coords[k], f) {
                return Err(domain("anchor must be an interior point"));
            }
        }
        Ok(Self {
            f: *f,
            anchor: coords,
            energy,
            constants: [(a, b); 3],
            initial: [(1.0, 0.0); 3],
            steps: 64,
        })
    }

    /// Overrides the separation constants used on one branch.
    pub fn with_branch_constants(mut self, branch: Branch, a: f64, b: f64) -> Self {
        self.constants[branch.index()] = (a, b);
        self
    }

    pub fn with_initial(mut self, branch: Branch, u0: f64, du0: f64) -> Self {
        self.initial[branch.index()] = (u0, du0);
        self
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn factor(&self, branch: Branch, xi: f64) -> Result<f64> {
        let k = branch.index();
        if !branch.contains(xi, &self.f) {
            return Err(domain(format!(
                "{xi} lies outside the {} range",
                branch.name()
            )));
        }
        let (u0, du0) = self.initial[k];
        let x0 = self.anchor[k];
        if xi == x0 {
            return Ok(u0);
        }
        let (a, b) = self.constants[k];
        let ode = BranchOde {
            branch,
            lo: x0.min(xi),
            hi: x0.max(xi),
            energy: self.energy,
            a,
            b,
        };
        let path = rk4(|t, y| ode.rhs(t, y, &self.f), x0, [u0, du0], xi, self.steps);
        Ok(path[self.steps - 1][0])
    }

    pub fn value(&self, p: &EllipsoidalPoint) -> Result<f64> {
        let c = p.coords();
        let mut psi = 1.0;
        for (k, branch) in Branch::ALL.into_iter().enumerate() {
            psi *= self.factor(branch, c[k])?;
        }
        Ok(psi)
    }

    pub fn value_cartesian(&self, c: &CartesianPoint) -> Result<f64> {
        self.value(&from_cartesian(c, &self.f)?)
    }
}

/// A box in ellipsoidal coordinates around an interior anchor, narrow enough
/// to keep every corner off the branch endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualBox {
    pub anchor: EllipsoidalPoint,
    pub half_widths: [f64; 3],
}

impl ResidualBox {
    pub fn around_default(f: &FocalTriple) -> Result<Self> {
        f.require_strict()?;
        let [l1, l2, l3] = f.as_array();
        let span = f.span();
        Ok(Self {
            anchor: EllipsoidalPoint::new(l3 + 0.25 * span, l2 + (l3 - l2) / 3.0, 0.5 * (l1 + l2)),
            half_widths: [0.075 * span, 0.1 * (l3 - l2), 0.2 * (l2 - l1)],
        })
    }

    /// `n` uniform points of the box, mapped to the positive octant.
    pub fn points<R: Rng>(&self, rng: &mut R, n: usize, f: &FocalTriple) -> Vec<CartesianPoint> {
        let c = self.anchor.coords();
        let h = self.half_widths;
        (0..n)
            .filter_map(|_| {
                let p = EllipsoidalPoint::new(
                    c[0] + rng.random_range(-h[0]..h[0]),
                    c[1] + rng.random_range(-h[1]..h[1]),
                    c[2] + rng.random_range(-h[2]..h[2]),
                );
                to_cartesian(&p, f).ok()
            })
            .collect()
    }
}

/// Max over `points` of `|∇²ψ + EVψ| / (|ψ| V max(1, |E|))`, with a
/// seven-point Cartesian Laplacian of step `h`.
pub fn pde_residual(sol: &ProductSolution, points: &[CartesianPoint], h: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for c in points {
        let psi = sol.value_cartesian(c)?;
        let mut lap = 0.0;
        for i in 0..3 {
            let p = sol.value_cartesian(&c.shifted(i, h))?;
            let m = sol.value_cartesian(&c.shifted(i, -h))?;
            lap += (p - 2.0 * psi + m) / (h * h);
        }
        let v = potential_cartesian(c, &sol.f)?;
        let scale = psi.abs() * v * sol.energy.abs().max(1.0);
        worst = worst.max((lap + sol.energy * v * psi).abs() / scale);
    }
    Ok(worst)
}
