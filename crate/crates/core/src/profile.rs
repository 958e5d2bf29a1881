//! Discretised decreasing radial solutions.
//!
//! A [`RadialProfile`] stores `(r, u, u', u'')` at the nodes of the accepted
//! integration steps on `[0, R]`, interpolates between them with quintic
//! Hermite polynomials, and continues past the match radius `R` with an
//! exponential tail `u(r) = u(R) (R/r)^{(N-1)/2} e^{-k (r - R)}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlinearity::NonlinearitySpec;
use crate::special::{exp_power_tail, gauss_legendre, sphere_area};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileNode {
    pub r: f64,
    pub u: f64,
    pub du: f64,
    pub d2u: f64,
}

/// Exponential continuation beyond the match radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentialTail {
    pub radius: f64,
    /// `u(R)`.
    pub value: f64,
    /// Fitted decay rate `k`; close to `√λ` for a genuine solution.
    pub rate: f64,
}

impl ExponentialTail {
    fn algebraic(n: u32) -> f64 {
        0.5 * (n as f64 - 1.0)
    }

    /// `C` in `u(r) = C r^{-(N-1)/2} e^{-k r}`.
    pub fn coefficient(&self, n: u32) -> f64 {
        self.value * self.radius.powf(Self::algebraic(n)) * (self.rate * self.radius).exp()
    }

    pub fn eval(&self, n: u32, r: f64) -> (f64, f64) {
        let m = Self::algebraic(n);
        let u = self.value * (self.radius / r).powf(m) * (-self.rate * (r - self.radius)).exp();
        (u, -u * (self.rate + m / r))
    }

    /// `∫_R^∞ u^q r^{N-1} dr` (without the sphere factor).
    fn power_integral(&self, n: u32, q: f64) -> f64 {
        let m = Self::algebraic(n);
        self.value.powf(q) * self.radius.powf(m * q) * exp_power_tail(n as f64 - m * q, q * self.rate, self.radius)
    }

    /// `∫_R^∞ (u')² r^{N-1} dr` (without the sphere factor).
    fn gradient_integral(&self, n: u32) -> f64 {
        let m = Self::algebraic(n);
        let (k, c, r) = (self.rate, 2.0 * self.rate, self.radius);
        let pre = self.value * self.value * r.powf(2.0 * m);
        let mut acc = k * k * exp_power_tail(1.0, c, r);
        if m != 0.0 {
            acc += 2.0 * k * m * exp_power_tail(0.0, c, r) + m * m * exp_power_tail(-1.0, c, r);
        }
        pre * acc
    }
}

/// Radial integrals over `ℝᴺ` (sphere factor included).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileIntegrals {
    /// `‖u‖₂²`
    pub mass: f64,
    /// `‖∇u‖₂²`
    pub kinetic: f64,
    /// `∫ G(u)`
    pub potential: f64,
    /// `∫ g(u) u`
    pub work: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub spec: NonlinearitySpec,
    pub dimension: u32,
    pub lambda: f64,
    pub nodes: Vec<ProfileNode>,
    pub tail: Option<ExponentialTail>,
    /// Largest ODE residual at interval midpoints, relative to `λ u(0)`.
    pub residual_max: f64,
    pub warnings: Vec<String>,
}

/// Quintic Hermite basis on `[0, 1]` and its first two derivatives.
fn hermite5(t: f64) -> [[f64; 6]; 3] {
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    let t5 = t4 * t;
    [
        [
            1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5,
            t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5,
            0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5,
            10.0 * t3 - 15.0 * t4 + 6.0 * t5,
            -4.0 * t3 + 7.0 * t4 - 3.0 * t5,
            0.5 * t3 - t4 + 0.5 * t5,
        ],
        [
            -30.0 * t2 + 60.0 * t3 - 30.0 * t4,
            1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4,
            t - 4.5 * t2 + 6.0 * t3 - 2.5 * t4,
            30.0 * t2 - 60.0 * t3 + 30.0 * t4,
            -12.0 * t2 + 28.0 * t3 - 15.0 * t4,
            1.5 * t2 - 4.0 * t3 + 2.5 * t4,
        ],
        [
            -60.0 * t + 180.0 * t2 - 120.0 * t3,
            -36.0 * t + 96.0 * t2 - 60.0 * t3,
            1.0 - 9.0 * t + 18.0 * t2 - 10.0 * t3,
            60.0 * t - 180.0 * t2 + 120.0 * t3,
            -24.0 * t + 84.0 * t2 - 60.0 * t3,
            3.0 * t - 12.0 * t2 + 10.0 * t3,
        ],
    ]
}

fn interpolate(a: &ProfileNode, b: &ProfileNode, r: f64) -> (f64, f64, f64) {
    let h = b.r - a.r;
    let t = (r - a.r) / h;
    let basis = hermite5(t);
    let coef = [a.u, h * a.du, h * h * a.d2u, b.u, h * b.du, h * h * b.d2u];
    let dot = |row: &[f64; 6]| row.iter().zip(coef.iter()).map(|(x, y)| x * y).sum::<f64>();
    (dot(&basis[0]), dot(&basis[1]) / h, dot(&basis[2]) / (h * h))
}

impl RadialProfile {
    /// Builds a profile from samples of a smooth radial function. The first
    /// node must sit at `r = 0`. No tail is attached; see
    /// [`RadialProfile::attach_exponential_tail`].
    pub fn from_nodes(spec: NonlinearitySpec, dimension: u32, lambda: f64, nodes: Vec<ProfileNode>) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::Domain("dimension N must be at least 1".into()));
        }
        if nodes.len() < 2 {
            return Err(Error::InvalidProfile("need at least two nodes".into()));
        }
        if nodes[0].r != 0.0 {
            return Err(Error::InvalidProfile("first node must be at r = 0".into()));
        }
        if nodes.windows(2).any(|w| w[1].r <= w[0].r) {
            return Err(Error::InvalidProfile("nodes must be strictly increasing".into()));
        }
        let mut profile = Self {
            spec,
            dimension,
            lambda,
            nodes,
            tail: None,
            residual_max: 0.0,
            warnings: Vec::new(),
        };
        profile.residual_max = profile.midpoint_residual();
        Ok(profile)
    }

    pub fn central_value(&self) -> f64 {
        self.nodes[0].u
    }

    pub fn match_radius(&self) -> f64 {
        self.nodes[self.nodes.len() - 1].r
    }

    /// Checks positivity and strict radial decrease (`u' < 0` for `r > 0`).
    pub fn check_monotone(&self) -> Result<()> {
        if self.nodes[0].du != 0.0 {
            return Err(Error::InvalidProfile("u'(0) must vanish".into()));
        }
        for n in &self.nodes {
            if !(n.u > 0.0) {
                return Err(Error::InvalidProfile(format!("u(r) <= 0 at r = {}", n.r)));
            }
        }
        for n in &self.nodes[1..] {
            if !(n.du < 0.0) {
                return Err(Error::InvalidProfile(format!("u'(r) >= 0 at r = {}", n.r)));
            }
        }
        Ok(())
    }

    /// Fits `u(R)` and the decay rate at the last node so that `u` and `u'`
    /// are continuous there. A rate more than 20% away from `√λ` is recorded
    /// as a warning.
    pub fn attach_exponential_tail(mut self) -> Result<Self> {
        let last = *self.nodes.last().expect("non-empty");
        if !(last.u > 0.0) || !(last.du < 0.0) || last.r <= 0.0 {
            return Err(Error::InvalidProfile(format!(
                "no decay at the match radius r = {} (u = {}, u' = {})",
                last.r, last.u, last.du
            )));
        }
        let m = 0.5 * (self.dimension as f64 - 1.0);
        let rate = -last.du / last.u - m / last.r;
        if !(rate > 0.0) {
            return Err(Error::InvalidProfile(format!(
                "non-positive fitted decay rate {rate} at r = {}",
                last.r
            )));
        }
        let expected = self.lambda.sqrt();
        if (rate - expected).abs() > 0.2 * expected {
            self.warnings.push(format!(
                "tail-mismatch: fitted decay rate {rate} vs sqrt(lambda) = {expected}"
            ));
        }
        self.tail = Some(ExponentialTail {
            radius: last.r,
            value: last.u,
            rate,
        });
        Ok(self)
    }

    /// `(u(r), u'(r))`, using the tail beyond the match radius.
    pub fn eval(&self, r: f64) -> (f64, f64) {
        let r = r.abs();
        let last = self.nodes[self.nodes.len() - 1];
        if r >= last.r {
            return match &self.tail {
                Some(t) if r > last.r => t.eval(self.dimension, r),
                _ if r == last.r => (last.u, last.du),
                _ => (0.0, 0.0),
            };
        }
        let i = self.nodes.partition_point(|n| n.r <= r);
        let (u, du, _) = interpolate(&self.nodes[i - 1], &self.nodes[i], r);
        (u, du)
    }

    /// `-u'' - (N-1)u'/r + λu - g(u)` evaluated on the interpolant at each
    /// interval midpoint, maximum relative to `λ u(0)`.
    fn midpoint_residual(&self) -> f64 {
        let nm1 = self.dimension as f64 - 1.0;
        let scale = self.lambda * self.central_value();
        let mut worst: f64 = 0.0;
        for w in self.nodes.windows(2) {
            let r = 0.5 * (w[0].r + w[1].r);
            let (u, du, d2u) = interpolate(&w[0], &w[1], r);
            let res = -d2u - nm1 * du / r + self.lambda * u - self.spec.g(u);
            worst = worst.max(res.abs() / scale);
        }
        worst
    }

    /// Radial integrals over `ℝᴺ`. `pieces` splits every node interval into
    /// that many Gauss-Legendre panels. The tail is mandatory unless
    /// `with_tail` is false, in which case the integrals stop at `R`.
    pub fn integrals(&self, with_tail: bool, pieces: usize) -> Result<ProfileIntegrals> {
        let tail = match (&self.tail, with_tail) {
            (Some(t), true) => Some(*t),
            (None, true) => return Err(Error::MissingTail),
            (_, false) => None,
        };
        let n = self.dimension;
        let nm1 = n as i32 - 1;
        let pieces = pieces.max(1);
        let (mut mass, mut kinetic, mut potential, mut work) = (0.0, 0.0, 0.0, 0.0);
        for w in self.nodes.windows(2) {
            let h = (w[1].r - w[0].r) / pieces as f64;
            for p in 0..pieces {
                let a = w[0].r + h * p as f64;
                let b = if p + 1 == pieces { w[1].r } else { a + h };
                // One pass of the rule per integrand keeps the reduction order fixed.
                let eval = |r: f64| {
                    let (u, du, _) = interpolate(&w[0], &w[1], r);
                    (u, du, r.powi(nm1))
                };
                mass += gauss_legendre(a, b, |r| {
                    let (u, _, wt) = eval(r);
                    u * u * wt
                });
                kinetic += gauss_legendre(a, b, |r| {
                    let (_, du, wt) = eval(r);
                    du * du * wt
                });
                potential += gauss_legendre(a, b, |r| {
                    let (u, _, wt) = eval(r);
                    self.spec.big_g(u) * wt
                });
                work += gauss_legendre(a, b, |r| {
                    let (u, _, wt) = eval(r);
                    self.spec.g(u) * u * wt
                });
            }
        }
        if let Some(t) = tail {
            mass += t.power_integral(n, 2.0);
            kinetic += t.gradient_integral(n);
            for term in self.spec.terms() {
                let q = term.exponent + 1.0;
                let pw = t.power_integral(n, q);
                potential += term.coef * pw / q;
                work += term.coef * pw;
            }
        }
        let omega = sphere_area(n);
        Ok(ProfileIntegrals {
            mass: omega * mass,
            kinetic: omega * kinetic,
            potential: omega * potential,
            work: omega * work,
        })
    }

    /// Same profile with `u` multiplied by `factor` and the model replaced.
    pub(crate) fn scaled_amplitude(&self, factor: f64, spec: NonlinearitySpec) -> Self {
        let nodes = self
            .nodes
            .iter()
            .map(|n| ProfileNode {
                r: n.r,
                u: n.u * factor,
                du: n.du * factor,
                d2u: n.d2u * factor,
            })
            .collect();
        let tail = self.tail.map(|t| ExponentialTail {
            value: t.value * factor,
            ..t
        });
        let mut out = Self {
            spec,
            dimension: self.dimension,
            lambda: self.lambda,
            nodes,
            tail,
            residual_max: 0.0,
            warnings: self.warnings.clone(),
        };
        out.residual_max = out.midpoint_residual();
        out
    }
}
