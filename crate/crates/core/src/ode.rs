//! Explicit Runge–Kutta integrators on fixed-size state arrays.
//!
//! [`dopri5`] is the adaptive Dormand–Prince 5(4) pair with a quartic dense
//! output; [`rk4`] is the classical fixed-step method.

use crate::error::{Error, Result};

const C: [f64; 6] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0];

const A: [[f64; 5]; 6] = [
    [0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
    ],
];

const B: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];

/// Fifth-order minus embedded fourth-order weights (seven stages, FSAL).
const E: [f64; 7] = [
    -71.0 / 57600.0,
    0.0,
    71.0 / 16695.0,
    -71.0 / 1920.0,
    17253.0 / 339200.0,
    -22.0 / 525.0,
    1.0 / 40.0,
];

/// Dense-output polynomial coefficients: `y(t₀ + θh) = y₀ + h Σₖ kₖ Σⱼ P[k][j] θ^(j+1)`.
const P: [[f64; 4]; 7] = [
    [
        1.0,
        -8048581381.0 / 2820520608.0,
        8663915743.0 / 2820520608.0,
        -12715105075.0 / 11282082432.0,
    ],
    [0.0, 0.0, 0.0, 0.0],
    [
        0.0,
        131558114200.0 / 32700410799.0,
        -68118460800.0 / 10900136933.0,
        87487479700.0 / 32700410799.0,
    ],
    [
        0.0,
        -1754552775.0 / 470086768.0,
        14199869525.0 / 1410260304.0,
        -10690763975.0 / 1880347072.0,
    ],
    [
        0.0,
        127303824393.0 / 49829197408.0,
        -318862633887.0 / 49829197408.0,
        701980252875.0 / 199316789632.0,
    ],
    [
        0.0,
        -282668133.0 / 205662961.0,
        2019193451.0 / 616988883.0,
        -1453857185.0 / 822651844.0,
    ],
    [
        0.0,
        40617522.0 / 29380423.0,
        -110615467.0 / 29380423.0,
        69997945.0 / 29380423.0,
    ],
];

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveConfig {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on `|h|`; `None` means the whole interval.
    pub max_step: Option<f64>,
    pub max_steps: usize,
}

impl AdaptiveConfig {
    pub fn new(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            max_step: None,
            max_steps: 1_000_000,
        }
    }
}

/// One accepted step, with everything needed to interpolate inside it.
#[derive(Debug, Clone)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub t1: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    k: [[f64; N]; 7],
}

impl<const N: usize> DenseStep<N> {
    /// The state at `t` between `t0` and `t1` (either time direction).
    pub fn interpolate(&self, t: f64) -> [f64; N] {
        let h = self.t1 - self.t0;
        let theta = (t - self.t0) / h;
        let mut powers = [0.0; 4];
        let mut acc = 1.0;
        for p in &mut powers {
            acc *= theta;
            *p = acc;
        }
        let mut y = self.y0;
        for (s, ks) in self.k.iter().enumerate() {
            let w: f64 = (0..4).map(|j| P[s][j] * powers[j]).sum();
            if w != 0.0 {
                for (yi, ki) in y.iter_mut().zip(ks) {
                    *yi += h * w * ki;
                }
            }
        }
        y
    }

    pub fn contains(&self, t: f64) -> bool {
        let (lo, hi) = if self.t0 <= self.t1 {
            (self.t0, self.t1)
        } else {
            (self.t1, self.t0)
        };
        lo <= t && t <= hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub accepted: usize,
    pub rejected: usize,
    /// True when the observer ended the run before `t_end`.
    pub stopped: bool,
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (w, k) in terms {
        if *w != 0.0 {
            for (o, ki) in out.iter_mut().zip(k.iter()) {
                *o += h * w * ki;
            }
        }
    }
    out
}

fn is_finite<const N: usize>(y: &[f64; N]) -> bool {
    y.iter().all(|v| v.is_finite())
}

fn rms_norm<const N: usize>(
    e: &[f64; N],
    y0: &[f64; N],
    y1: &[f64; N],
    cfg: &AdaptiveConfig,
) -> f64 {
    let s: f64 = (0..N)
        .map(|i| {
            let sc = cfg.atol + cfg.rtol * y0[i].abs().max(y1[i].abs());
            (e[i] / sc).powi(2)
        })
        .sum();
    (s / N as f64).sqrt()
}

fn initial_step<const N: usize, F>(
    rhs: &mut F,
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    dir: f64,
    cfg: &AdaptiveConfig,
) -> Result<f64>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let scale: Vec<f64> = y0.iter().map(|y| cfg.atol + cfg.rtol * y.abs()).collect();
    let norm = |v: &[f64; N]| -> f64 {
        (v.iter()
            .zip(&scale)
            .map(|(a, s)| (a / s).powi(2))
            .sum::<f64>()
            / N as f64)
            .sqrt()
    };
    let d0 = norm(y0);
    let d1 = norm(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let y1 = axpy(y0, dir * h0, &[(1.0, f0)]);
    let f1 = rhs(t0 + dir * h0, &y1)?;
    let mut diff = [0.0; N];
    for i in 0..N {
        diff[i] = f1[i] - f0[i];
    }
    let d2 = norm(&diff) / h0;
    let h1 = if d1 <= 1e-15 && d2 <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 5.0)
    };
    Ok((100.0 * h0).min(h1))
}

/// Integrates `y' = rhs(t, y)` from `t0` to `t_end` (either direction).
///
/// `observe` sees every accepted step and may end the run early. Errors from
/// `rhs` propagate; a non-finite accepted state or a step that shrinks below
/// the floating-point resolution of `t` is an error.
pub fn dopri5<const N: usize, F, O>(
    mut rhs: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    cfg: &AdaptiveConfig,
    mut observe: O,
) -> Result<Outcome<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
    O: FnMut(&DenseStep<N>) -> Control,
{
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut t = t0;
    let mut y = y0;
    let mut outcome = Outcome {
        t,
        y,
        accepted: 0,
        rejected: 0,
        stopped: false,
    };
    if t_end == t0 {
        return Ok(outcome);
    }
    let span = (t_end - t0).abs();
    let max_step = cfg.max_step.unwrap_or(span).min(span);
    let mut f = rhs(t, &y)?;
    let mut h = initial_step(&mut rhs, t, &y, &f, dir, cfg)?.min(max_step);
    let mut just_rejected = false;

    while (t_end - t) * dir > 0.0 {
        if outcome.accepted + outcome.rejected >= cfg.max_steps {
            return Err(Error::StepUnderflow { t });
        }
        let min_step = 16.0 * f64::EPSILON * t.abs().max(span);
        if h < min_step {
            return Err(Error::StepUnderflow { t });
        }
        let mut last = false;
        if (t + dir * h - t_end) * dir >= 0.0 {
            h = (t_end - t).abs();
            last = true;
        }
        let hs = dir * h;

        let mut k = [[0.0; N]; 7];
        k[0] = f;
        for s in 1..6 {
            let terms: Vec<(f64, &[f64; N])> = (0..s).map(|j| (A[s][j], &k[j])).collect();
            let ys = axpy(&y, hs, &terms);
            k[s] = rhs(t + C[s] * hs, &ys)?;
        }
        let terms: Vec<(f64, &[f64; N])> = (0..6).map(|j| (B[j], &k[j])).collect();
        let y_new = axpy(&y, hs, &terms);
        let t_new = if last { t_end } else { t + hs };
        k[6] = match rhs(t_new, &y_new) {
            Ok(v) => v,
            Err(_) if !is_finite(&y_new) => [f64::NAN; N],
            Err(e) => return Err(e),
        };

        let mut err = [0.0; N];
        for (i, e) in err.iter_mut().enumerate() {
            *e = hs * (0..7).map(|s| E[s] * k[s][i]).sum::<f64>();
        }
        let en = rms_norm(&err, &y, &y_new, cfg);

        if en.is_finite() && en <= 1.0 && is_finite(&y_new) && is_finite(&k[6]) {
            let step = DenseStep {
                t0: t,
                t1: t_new,
                y0: y,
                y1: y_new,
                k,
            };
            t = t_new;
            y = y_new;
            f = k[6];
            outcome.accepted += 1;
            outcome.t = t;
            outcome.y = y;
            let factor = if en == 0.0 {
                MAX_FACTOR
            } else {
                (SAFETY * en.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
            };
            h = if just_rejected {
                h * factor.min(1.0)
            } else {
                h * factor
            }
            .min(max_step);
            just_rejected = false;
            if observe(&step) == Control::Stop {
                outcome.stopped = true;
                return Ok(outcome);
            }
        } else {
            outcome.rejected += 1;
            let factor = if en.is_finite() {
                (SAFETY * en.powf(-0.2)).clamp(MIN_FACTOR, 1.0)
            } else {
                MIN_FACTOR
            };
            h *= factor;
            just_rejected = true;
        }
    }
    Ok(outcome)
}

/// One classical fourth-order Runge–Kutta step.
pub fn rk4_step<const N: usize, F>(rhs: &mut F, t: f64, y: &[f64; N], h: f64) -> [f64; N]
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let k1 = rhs(t, y);
    let k2 = rhs(t + 0.5 * h, &axpy(y, 0.5 * h, &[(1.0, &k1)]));
    let k3 = rhs(t + 0.5 * h, &axpy(y, 0.5 * h, &[(1.0, &k2)]));
    let k4 = rhs(t + h, &axpy(y, h, &[(1.0, &k3)]));
    axpy(
        y,
        h / 6.0,
        &[(1.0, &k1), (2.0, &k2), (2.0, &k3), (1.0, &k4)],
    )
}

/// `n` equal RK4 steps from `t0` to `t1`, returning the state after each step.
pub fn rk4<const N: usize, F>(mut rhs: F, t0: f64, y0: [f64; N], t1: f64, n: usize) -> Vec<[f64; N]>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let h = (t1 - t0) / n as f64;
    let mut y = y0;
    (0..n)
        .map(|i| {
            y = rk4_step(&mut rhs, t0 + i as f64 * h, &y, h);
            y
        })
        .collect()
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    fn level<F: Fn(f64) -> f64>(
        f: &F,
        (a, fa): (f64, f64),
        (m, fm): (f64, f64),
        (b, fb): (f64, f64),
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        level(f, (a, fa), (lm, flm), (m, fm), left, 0.5 * tol, depth - 1)
            + level(f, (m, fm), (rm, frm), (b, fb), right, 0.5 * tol, depth - 1)
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    level(&f, (a, fa), (m, fm), (b, fb), whole, tol, 50)
}
