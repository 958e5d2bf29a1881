//! Radial shooting for the positive decaying solution of
//! `-u'' - (N-1)u'/r + λu = g(u)`, `u'(0) = 0`.
//!
//! Every shot is integrated in the variables `x = √λ r`, `w = u/s₀` where
//! `s₀` is the positive root of `F(s) = -λs²/2 + G(s)`. In those variables
//! the linear part is `λ`-independent and the decaying amplitude is O(1), so
//! one set of tolerances serves the whole frequency range.
//!
//! A shot ends at the first of:
//! - `u` reaches zero (`Crossing`): the amplitude was too large;
//! - `u'` turns non-negative while `u > 0` (`Divergence`): the trajectory
//!   falls back towards the positive equilibrium or escapes upwards, so the
//!   amplitude was too small;
//! - `u` is below the decay threshold inside the linearised decay cone
//!   (`Decay`);
//! - the radius limit (`Indeterminate`).
//!
//! Exponential dichotomy makes the exact decaying trajectory unreachable in
//! floating point: even the best amplitude departs once the growing mode,
//! seeded at round-off level, catches up with the decaying one. The profile
//! is therefore cut [`MATCH_MARGIN`] scaled units before the departure point,
//! where the growing-mode contamination is below `e^{-2·MATCH_MARGIN}`
//! relative, and continued by an exponential tail.

use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlinearity::{require_subcritical, NonlinearitySpec};
use crate::ode::{DenseStep, Dopri5, Tolerance};
use crate::profile::{ProfileNode, RadialProfile};

/// Distance (in units of `1/√λ`) between the departure point of the best
/// shot and the radius where the exponential tail takes over.
pub const MATCH_MARGIN: f64 = 6.0;

/// Largest scaled amplitude `u(R)/s₀` accepted at the match radius.
const MAX_MATCH_VALUE: f64 = 1e-2;

const DECAY_CONE_SLACK: f64 = 1e-2;
/// Lower edge of the decay cone: a tail turning back up is not decay.
const DECAY_CONE_FLOOR: f64 = 0.9;
const LAUNCH_FACTOR: f64 = 1e-4;
const LAUNCH_LIMIT: f64 = 0.1;
const BRACKET_CEILING: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootingControls {
    /// Local error tolerance of the integrator (relative and absolute, in
    /// scaled variables).
    pub step_tol: f64,
    /// Radius limit; `None` means `200/√λ`.
    pub r_max: Option<f64>,
    /// Relative width at which amplitude bisection stops.
    pub bisect_tol: f64,
    /// Decay threshold as a fraction of the central amplitude.
    pub decay_eps: f64,
    /// Divergence threshold as a multiple of the central amplitude.
    pub divergence_factor: f64,
}

impl Default for ShootingControls {
    fn default() -> Self {
        Self {
            step_tol: 1e-12,
            r_max: None,
            bisect_tol: 1e-12,
            decay_eps: 1e-8,
            divergence_factor: 1e3,
        }
    }
}

impl ShootingControls {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if !pos(self.step_tol)
            || !pos(self.bisect_tol)
            || !pos(self.decay_eps)
            || !pos(self.divergence_factor)
            || self.r_max.is_some_and(|r| !pos(r))
        {
            return Err(Error::Domain("shooting tolerances must be positive".into()));
        }
        Ok(())
    }

    /// Every tolerance halved.
    pub fn halved(&self) -> Self {
        Self {
            step_tol: self.step_tol / 2.0,
            bisect_tol: self.bisect_tol / 2.0,
            decay_eps: self.decay_eps / 2.0,
            ..*self
        }
    }

    /// Bit pattern of the tolerances, used as a cache key.
    pub fn fingerprint(&self) -> [u64; 5] {
        [
            self.step_tol.to_bits(),
            self.r_max.map_or(0, f64::to_bits),
            self.bisect_tol.to_bits(),
            self.decay_eps.to_bits(),
            self.divergence_factor.to_bits(),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShotStatus {
    Decay { r: f64 },
    Crossing { r: f64 },
    Divergence { r: f64 },
    Indeterminate { r_max: f64 },
}

impl ShotStatus {
    pub fn radius(&self) -> f64 {
        match *self {
            ShotStatus::Decay { r } | ShotStatus::Crossing { r } | ShotStatus::Divergence { r } => r,
            ShotStatus::Indeterminate { r_max } => r_max,
        }
    }

    fn rescaled(&self, f: f64) -> Self {
        match *self {
            ShotStatus::Decay { r } => ShotStatus::Decay { r: r * f },
            ShotStatus::Crossing { r } => ShotStatus::Crossing { r: r * f },
            ShotStatus::Divergence { r } => ShotStatus::Divergence { r: r * f },
            ShotStatus::Indeterminate { r_max } => ShotStatus::Indeterminate { r_max: r_max * f },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub r: f64,
    pub u: f64,
    pub du: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShootingOutcome {
    pub status: ShotStatus,
    pub trajectory: Vec<TrajectorySample>,
}

/// Taylor launch off the axis: `(u(h), u'(h))` to `O(h⁶)` / `O(h⁵)`.
///
/// With `f(u) = λu - g(u)`, `u = ξ + c₂r² + c₄r⁴ + …` where
/// `c₂ = f(ξ)/(2N)` and `c₄ = f'(ξ) f(ξ) / (8N(N+2))`.
pub fn series_start(spec: &NonlinearitySpec, n: u32, lambda: f64, xi: f64, h: f64) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::Domain("dimension N must be at least 1".into()));
    }
    if !(xi > 0.0) || !xi.is_finite() {
        return Err(Error::Domain(format!("central amplitude must be positive, got {xi}")));
    }
    if !(lambda >= 0.0) {
        return Err(Error::NonPositiveFrequency(lambda));
    }
    let limit = LAUNCH_LIMIT / (lambda + spec.g_prime(xi)).sqrt();
    if !(h > 0.0) || h >= limit {
        return Err(Error::StepTooLarge { h, limit });
    }
    Ok(taylor_launch(n, lambda, spec, xi, h))
}

fn taylor_launch(n: u32, lambda: f64, spec: &NonlinearitySpec, xi: f64, h: f64) -> (f64, f64) {
    let nf = n as f64;
    let f = lambda * xi - spec.g(xi);
    let fp = lambda - spec.g_prime(xi);
    let c2 = f / (2.0 * nf);
    let c4 = fp * f / (8.0 * nf * (nf + 2.0));
    let h2 = h * h;
    (xi + c2 * h2 + c4 * h2 * h2, 2.0 * c2 * h + 4.0 * c4 * h2 * h)
}

/// Smallest `s > 0` with `F(s) = -λs²/2 + G(s) = 0`.
///
/// For power sums `G(s)/s²` increases strictly from 0 to ∞, so the root is
/// unique and found by bracketing plus bisection to the last bit.
#[allow(non_snake_case)]
pub fn first_positive_root_F(spec: &NonlinearitySpec, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::NonPositiveFrequency(lambda));
    }
    // G(s)/s² - λ/2, term by term to avoid overflow.
    let phi = |s: f64| {
        spec.terms()
            .iter()
            .map(|t| t.coef * s.powf(t.exponent - 1.0) / (t.exponent + 1.0))
            .sum::<f64>()
            - 0.5 * lambda
    };
    let (mut lo, mut hi) = (1.0f64, 1.0f64);
    if phi(1.0) < 0.0 {
        while phi(hi) < 0.0 {
            hi *= 2.0;
            if !hi.is_finite() || hi > 1e300 {
                return Err(Error::AmplitudeRootNotFound);
            }
        }
        lo = hi / 2.0;
    } else {
        while phi(lo) >= 0.0 {
            lo /= 2.0;
            if lo < 1e-300 {
                return Err(Error::AmplitudeRootNotFound);
            }
        }
        hi = lo * 2.0;
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if phi(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(if phi(hi).abs() < phi(lo).abs() { hi } else { lo })
}

/// The equation in `x = √λ r`, `w = u/amp`:
/// `w'' + (N-1)w'/x = w - ĝ(w)`, `ĝ(w) = g(amp·w)/(λ·amp)`.
#[derive(Debug, Clone)]
pub(crate) struct ScaledProblem {
    pub n: u32,
    pub lambda: f64,
    pub amp: f64,
    pub g_hat: NonlinearitySpec,
}

#[derive(Debug, Clone)]
pub(crate) struct ScaledShot {
    pub status: ShotStatus,
    /// `(x, w, w')`, starting at the axis.
    pub samples: Vec<[f64; 3]>,
}

impl ScaledShot {
    fn is_high(&self) -> bool {
        matches!(self.status, ShotStatus::Crossing { .. })
    }
    fn is_low(&self) -> bool {
        matches!(self.status, ShotStatus::Divergence { .. })
    }
}

impl ScaledProblem {
    pub fn new(spec: &NonlinearitySpec, n: u32, lambda: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("dimension N must be at least 1".into()));
        }
        let amp = first_positive_root_F(spec, lambda)?;
        Ok(Self {
            n,
            lambda,
            amp,
            g_hat: spec.rescaled(amp, lambda),
        })
    }

    fn second_derivative(&self, x: f64, w: f64, dw: f64) -> f64 {
        let src = w - self.g_hat.g(w);
        if x == 0.0 {
            src / self.n as f64
        } else {
            src - (self.n as f64 - 1.0) * dw / x
        }
    }

    pub fn shoot(&self, xi_hat: f64, controls: &ShootingControls) -> Result<ScaledShot> {
        let nm1 = self.n as f64 - 1.0;
        let h0 = LAUNCH_FACTOR / (1.0 + self.g_hat.g_prime(xi_hat)).sqrt();
        let (w0, dw0) = taylor_launch(self.n, 1.0, &self.g_hat, xi_hat, h0);
        let x_max = controls.r_max.map_or(200.0, |r| r * self.lambda.sqrt());
        let mut samples = vec![[0.0, xi_hat, 0.0], [h0, w0, dw0]];

        if dw0 >= 0.0 {
            return Ok(ScaledShot {
                status: ShotStatus::Divergence { r: h0 },
                samples,
            });
        }

        let decay_level = controls.decay_eps * xi_hat;
        let blowup_level = controls.divergence_factor * xi_hat;
        let g_hat = &self.g_hat;
        let rhs = |x: f64, y: &[f64; 2]| [y[1], y[0] - g_hat.g(y[0]) - nm1 * y[1] / x];
        let solver = Dopri5::new(Tolerance {
            rtol: controls.step_tol,
            atol: controls.step_tol,
        });

        let observer = |s: &DenseStep<2>| -> ControlFlow<ShotStatus> {
            let [w, dw] = s.y1;
            if w <= 0.0 {
                let xc = s.find_crossing(0, 0.0);
                let y = s.eval(xc);
                samples.push([xc, 0.0, y[1]]);
                return ControlFlow::Break(ShotStatus::Crossing { r: xc });
            }
            if dw >= 0.0 || w > blowup_level {
                let xt = if dw >= 0.0 { s.find_crossing(1, 0.0) } else { s.t1() };
                return ControlFlow::Break(ShotStatus::Divergence { r: xt });
            }
            samples.push([s.t1(), w, dw]);
            let prefactor = 0.5 * nm1 / s.t1();
            let cone = w * (1.0 + DECAY_CONE_SLACK + prefactor);
            let floor = w * (DECAY_CONE_FLOOR + prefactor);
            if w < decay_level && -dw < cone && -dw > floor {
                return ControlFlow::Break(ShotStatus::Decay { r: s.t1() });
            }
            ControlFlow::Continue(())
        };

        let first_step = (0.01f64).min(x_max - h0);
        let status = solver
            .integrate(rhs, h0, [w0, dw0], x_max, first_step, observer)?
            .unwrap_or(ShotStatus::Indeterminate { r_max: x_max });
        Ok(ScaledShot { status, samples })
    }

    /// Best available trajectory for `N ≥ 2` by bisection on the scaled
    /// amplitude. Crossing means too large, divergence means too small.
    pub fn bisect(&self, controls: &ShootingControls, hint: Option<f64>) -> Result<ScaledShot> {
        let (mut lo, mut hi, mut shot_lo, mut shot_hi) = self.bracket(controls, hint)?;
        for _ in 0..400 {
            if hi - lo <= controls.bisect_tol * hi {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let shot = self.shoot(mid, controls)?;
            if shot.is_high() {
                hi = mid;
                shot_hi = shot;
            } else if shot.is_low() {
                lo = mid;
                shot_lo = shot;
            } else {
                return Ok(shot);
            }
        }
        Ok(if shot_hi.status.radius() >= shot_lo.status.radius() {
            shot_hi
        } else {
            shot_lo
        })
    }

    #[allow(clippy::type_complexity)]
    fn bracket(&self, controls: &ShootingControls, hint: Option<f64>) -> Result<(f64, f64, ScaledShot, ScaledShot)> {
        let fail = |why: &str| Error::ShootFailed(format!("{why} (lambda = {})", self.lambda));
        // F(s₀) = 0: with friction (N ≥ 2) the energy cannot bring u back to zero.
        let floor = 1.0;
        let (mut lo, mut hi) = match hint {
            Some(h) if h.is_finite() && h / self.amp > floor => {
                let c = h / self.amp;
                ((c / 1.02).max(floor), c * 1.02)
            }
            _ => (floor, 2.0),
        };
        let mut shot_lo = self.shoot(lo, controls)?;
        let mut widen = 1.02;
        while !shot_lo.is_low() {
            if shot_lo.is_high() {
                hi = lo;
            } else {
                return Ok((lo, lo, shot_lo.clone(), shot_lo));
            }
            if lo <= floor {
                return Err(fail("lower amplitude bracket does not undershoot"));
            }
            widen *= widen;
            lo = (lo / widen).max(floor);
            shot_lo = self.shoot(lo, controls)?;
        }
        let mut shot_hi = self.shoot(hi, controls)?;
        let mut grow = 1.02f64.max(hi / lo);
        while !shot_hi.is_high() {
            if shot_hi.is_low() {
                lo = hi;
                shot_lo = shot_hi;
            } else {
                return Ok((hi, hi, shot_hi.clone(), shot_hi));
            }
            grow = (grow * grow).clamp(1.02, 2.0);
            hi *= grow;
            if hi > BRACKET_CEILING {
                return Err(fail("no overshooting amplitude below 1e6 s0"));
            }
            shot_hi = self.shoot(hi, controls)?;
        }
        Ok((lo, hi, shot_lo, shot_hi))
    }

    fn to_physical(&self, x: f64, w: f64, dw: f64) -> TrajectorySample {
        let sl = self.lambda.sqrt();
        TrajectorySample {
            r: x / sl,
            u: self.amp * w,
            du: self.amp * sl * dw,
        }
    }

    fn outcome(&self, shot: &ScaledShot) -> ShootingOutcome {
        ShootingOutcome {
            status: shot.status.rescaled(1.0 / self.lambda.sqrt()),
            trajectory: shot
                .samples
                .iter()
                .map(|s| self.to_physical(s[0], s[1], s[2]))
                .collect(),
        }
    }

    /// Cuts the shot before its departure point and converts it into a
    /// physical profile with tail.
    pub fn profile(&self, spec: &NonlinearitySpec, shot: &ScaledShot) -> Result<RadialProfile> {
        let (x_match, mut warnings) = match shot.status {
            ShotStatus::Decay { r } => (r, Vec::new()),
            ShotStatus::Crossing { r } | ShotStatus::Divergence { r } => (r - MATCH_MARGIN, Vec::new()),
            ShotStatus::Indeterminate { r_max } => (
                r_max,
                vec!["indeterminate: radius limit reached without decay or departure".to_string()],
            ),
        };
        let kept: Vec<&[f64; 3]> = shot.samples.iter().filter(|s| s[0] <= x_match && s[1] > 0.0).collect();
        if kept.len() < 3 {
            return Err(Error::ShootFailed(format!(
                "trajectory departs too early (at x = {}) to match a tail",
                shot.status.radius()
            )));
        }
        let last = kept[kept.len() - 1];
        let xi_hat = shot.samples[0][1];
        if last[1] > MAX_MATCH_VALUE * xi_hat.max(1.0) {
            return Err(Error::ShootFailed(format!(
                "no decay before departure: u(R)/s0 = {} at x = {}",
                last[1], last[0]
            )));
        }
        let (sl, lam) = (self.lambda.sqrt(), self.lambda);
        let nodes = kept
            .iter()
            .map(|s| ProfileNode {
                r: s[0] / sl,
                u: self.amp * s[1],
                du: self.amp * sl * s[2],
                d2u: self.amp * lam * self.second_derivative(s[0], s[1], s[2]),
            })
            .collect();
        let prof = RadialProfile::from_nodes(spec.clone(), self.n, self.lambda, nodes)?;
        prof.check_monotone()?;
        let mut prof = prof.attach_exponential_tail()?;
        prof.warnings.append(&mut warnings);
        Ok(prof)
    }
}

/// One shot from central amplitude `xi`.
pub fn integrate_ivp(
    spec: &NonlinearitySpec,
    n: u32,
    lambda: f64,
    xi: f64,
    controls: &ShootingControls,
) -> Result<ShootingOutcome> {
    controls.validate()?;
    if !(lambda > 0.0) {
        return Err(Error::NonPositiveFrequency(lambda));
    }
    if !(xi > 0.0) || !xi.is_finite() {
        return Err(Error::Domain(format!("central amplitude must be positive, got {xi}")));
    }
    let problem = ScaledProblem::new(spec, n, lambda)?;
    let shot = problem.shoot(xi / problem.amp, controls)?;
    Ok(problem.outcome(&shot))
}

/// Positive radial decaying solution at frequency `lambda`.
///
/// In one dimension the central value is exactly `s₀` and a single shot is
/// integrated. In higher dimension the amplitude is bisected on `[s₀, ξ_up]`,
/// where `ξ_up` is the first overshooting amplitude found by doubling from
/// `s₀` (or from around `hint`, when given).
pub fn shoot_ground(
    spec: &NonlinearitySpec,
    n: u32,
    lambda: f64,
    controls: &ShootingControls,
    hint: Option<f64>,
) -> Result<RadialProfile> {
    controls.validate()?;
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::NonPositiveFrequency(lambda));
    }
    require_subcritical(spec, n)?;
    let problem = ScaledProblem::new(spec, n, lambda)?;
    let shot = if n == 1 {
        problem.shoot(1.0, controls)?
    } else {
        problem.bisect(controls, hint)?
    };
    problem.profile(spec, &shot)
}

/// Every decay amplitude detected on a log grid of `points` central values
/// spanning `[s₀/2, 10³ s₀]`, each refined by bisection. Evidence of
/// (non-)uniqueness at fixed `lambda`, not a proof.
pub fn scan_decay_amplitudes(
    spec: &NonlinearitySpec,
    n: u32,
    lambda: f64,
    controls: &ShootingControls,
    points: usize,
) -> Result<Vec<f64>> {
    controls.validate()?;
    if !(lambda > 0.0) {
        return Err(Error::NonPositiveFrequency(lambda));
    }
    if points < 2 {
        return Err(Error::Domain("amplitude scan needs at least two points".into()));
    }
    let problem = ScaledProblem::new(spec, n, lambda)?;
    let (lo, hi) = (0.5f64.ln(), 1e3f64.ln());
    let grid: Vec<f64> = (0..points)
        .map(|i| (lo + (hi - lo) * i as f64 / (points - 1) as f64).exp())
        .collect();
    let mut kinds = Vec::with_capacity(points);
    for &xi in &grid {
        let shot = problem.shoot(xi, controls)?;
        kinds.push(if shot.is_high() {
            1
        } else if shot.is_low() {
            -1
        } else {
            0
        });
    }
    let mut found = Vec::new();
    for i in 0..points - 1 {
        if kinds[i] == 0 {
            found.push(grid[i] * problem.amp);
            continue;
        }
        if kinds[i] * kinds[i + 1] != -1 {
            continue;
        }
        let (mut a, mut b) = (grid[i], grid[i + 1]);
        let a_kind = kinds[i];
        while b - a > controls.bisect_tol * b {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let shot = problem.shoot(m, controls)?;
            let k = if shot.is_high() {
                1
            } else if shot.is_low() {
                -1
            } else {
                0
            };
            if k == 0 {
                a = m;
                b = m;
                break;
            }
            if k == a_kind {
                a = m;
            } else {
                b = m;
            }
        }
        found.push(0.5 * (a + b) * problem.amp);
    }
    if kinds[points - 1] == 0 {
        found.push(grid[points - 1] * problem.amp);
    }
    Ok(found)
}

/// Integrates `-u'' - (N-1)u'/r = g(u)` (zero frequency) from `u(0) = xi`
/// until `u` reaches zero or `r_max`. Only used for Pohozaev-function
/// experiments; the solver itself never runs at `λ ≤ 0`.
pub fn integrate_zero_frequency(
    spec: &NonlinearitySpec,
    n: u32,
    xi: f64,
    r_max: f64,
    step_tol: f64,
) -> Result<Vec<TrajectorySample>> {
    if n == 0 {
        return Err(Error::Domain("dimension N must be at least 1".into()));
    }
    if !(xi > 0.0) || !(r_max > 0.0) {
        return Err(Error::Domain("need xi > 0 and r_max > 0".into()));
    }
    let nm1 = n as f64 - 1.0;
    let h0 = LAUNCH_FACTOR / spec.g_prime(xi).sqrt().max(1e-300);
    let h0 = h0.min(r_max / 10.0);
    let (u0, du0) = taylor_launch(n, 0.0, spec, xi, h0);
    let mut out = vec![
        TrajectorySample { r: 0.0, u: xi, du: 0.0 },
        TrajectorySample { r: h0, u: u0, du: du0 },
    ];
    let rhs = |r: f64, y: &[f64; 2]| [y[1], -spec.g(y[0]) - nm1 * y[1] / r];
    let solver = Dopri5::new(Tolerance {
        rtol: step_tol,
        atol: step_tol * xi,
    });
    solver.integrate(rhs, h0, [u0, du0], r_max, h0, |s| {
        if s.y1[0] <= 0.0 {
            return ControlFlow::Break(());
        }
        out.push(TrajectorySample {
            r: s.t1(),
            u: s.y1[0],
            du: s.y1[1],
        });
        ControlFlow::Continue(())
    })?;
    Ok(out)
}
