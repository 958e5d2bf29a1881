//! Integral observables of a profile and the residuals of the exact
//! identities every decaying solution satisfies:
//!
//! - Pohozaev: `(N-2)/2 ‖∇u‖² + N/2 λ‖u‖² = N ∫G(u)`
//! - Nehari: `‖∇u‖² + λ‖u‖² = ∫g(u)u`
//! - least-action level: `J_λ(u) = ‖∇u‖²/N`
//!
//! Each residual is normalised by the positive side of its identity, so one
//! threshold works across the whole frequency range.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::nonlinearity::NonlinearitySpec;
use crate::profile::{ProfileIntegrals, RadialProfile};
use crate::report::fmt17;
use crate::shooting::TrajectorySample;

/// Threshold applied to every identity residual of an accepted profile.
pub const IDENTITY_GATE: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    #[serde(serialize_with = "crate::report::ser17")]
    pub lambda: f64,
    /// `ρ = ‖u‖₂²`
    #[serde(serialize_with = "crate::report::ser17")]
    pub mass: f64,
    /// `‖∇u‖₂²`
    #[serde(serialize_with = "crate::report::ser17")]
    pub kinetic: f64,
    /// `‖u‖∞ = u(0)`
    #[serde(serialize_with = "crate::report::ser17")]
    pub sup: f64,
    /// `∫ G(u)`
    #[serde(serialize_with = "crate::report::ser17")]
    pub potential: f64,
    /// `J_λ(u)`
    #[serde(serialize_with = "crate::report::ser17")]
    pub action: f64,
    #[serde(serialize_with = "crate::report::ser17")]
    pub pohozaev_residual: f64,
    #[serde(serialize_with = "crate::report::ser17")]
    pub nehari_residual: f64,
    #[serde(serialize_with = "crate::report::ser17")]
    pub mp_gap: f64,
}

impl BranchPoint {
    pub const CSV_HEADER: &'static str = "lambda,rho,K,sup,PG,J,res_poho,res_nehari,mp_gap";

    pub fn from_profile(profile: &RadialProfile) -> Result<Self> {
        let ints = profile.integrals(true, 1)?;
        Ok(Self::from_integrals(profile, &ints))
    }

    fn from_integrals(profile: &RadialProfile, ints: &ProfileIntegrals) -> Self {
        let n = profile.dimension as f64;
        let lam = profile.lambda;
        let action = action_of(lam, ints);
        Self {
            lambda: lam,
            mass: ints.mass,
            kinetic: ints.kinetic,
            sup: profile.central_value(),
            potential: ints.potential,
            action,
            pohozaev_residual: pohozaev_of(n, lam, ints),
            nehari_residual: nehari_of(lam, ints),
            mp_gap: gap_of(n, action, ints.kinetic),
        }
    }

    pub fn max_residual(&self) -> f64 {
        self.pohozaev_residual.max(self.nehari_residual).max(self.mp_gap)
    }

    pub fn passes_gates(&self) -> bool {
        self.mass > 0.0 && self.kinetic > 0.0 && self.max_residual() < IDENTITY_GATE
    }

    pub fn csv_row(&self) -> String {
        [
            self.lambda,
            self.mass,
            self.kinetic,
            self.sup,
            self.potential,
            self.action,
            self.pohozaev_residual,
            self.nehari_residual,
            self.mp_gap,
        ]
        .iter()
        .map(|v| fmt17(*v))
        .collect::<Vec<_>>()
        .join(",")
    }
}

fn action_of(lambda: f64, ints: &ProfileIntegrals) -> f64 {
    0.5 * (ints.kinetic + lambda * ints.mass) - ints.potential
}

fn pohozaev_of(n: f64, lambda: f64, ints: &ProfileIntegrals) -> f64 {
    let lhs = 0.5 * (n - 2.0) * ints.kinetic + 0.5 * n * lambda * ints.mass;
    let rhs = n * ints.potential;
    (lhs - rhs).abs() / rhs
}

fn nehari_of(lambda: f64, ints: &ProfileIntegrals) -> f64 {
    let lhs = ints.kinetic + lambda * ints.mass;
    (lhs - ints.work).abs() / lhs
}

fn gap_of(n: f64, action: f64, kinetic: f64) -> f64 {
    let level = kinetic / n;
    (action - level).abs() / action.max(level)
}

/// `‖u‖₂²`, tail included.
pub fn compute_mass(profile: &RadialProfile) -> Result<f64> {
    Ok(profile.integrals(true, 1)?.mass)
}

/// `‖∇u‖₂²`, tail included.
pub fn compute_kinetic(profile: &RadialProfile) -> Result<f64> {
    Ok(profile.integrals(true, 1)?.kinetic)
}

/// `J_λ(u) = (‖∇u‖² + λ‖u‖²)/2 - ∫G(u)`.
pub fn compute_action(profile: &RadialProfile) -> Result<f64> {
    Ok(action_of(profile.lambda, &profile.integrals(true, 1)?))
}

pub fn pohozaev_residual(profile: &RadialProfile) -> Result<f64> {
    let ints = profile.integrals(true, 1)?;
    Ok(pohozaev_of(profile.dimension as f64, profile.lambda, &ints))
}

pub fn nehari_residual(profile: &RadialProfile) -> Result<f64> {
    Ok(nehari_of(profile.lambda, &profile.integrals(true, 1)?))
}

/// `|J_λ - ‖∇u‖²/N| / max(J_λ, ‖∇u‖²/N)`.
pub fn mp_gap(profile: &RadialProfile) -> Result<f64> {
    let ints = profile.integrals(true, 1)?;
    let action = action_of(profile.lambda, &ints);
    Ok(gap_of(profile.dimension as f64, action, ints.kinetic))
}

/// `P(r) = r^N (u'²/2 + G(u)) + (N-2)/2 · r^{N-1} u u'` along any radial
/// trajectory; `P(0) = 0`.
pub fn pohozaev_function(spec: &NonlinearitySpec, n: u32, sample: &TrajectorySample) -> f64 {
    let TrajectorySample { r, u, du } = *sample;
    if r == 0.0 {
        return 0.0;
    }
    let nf = n as f64;
    r.powi(n as i32) * (0.5 * du * du + spec.big_g(u)) + 0.5 * (nf - 2.0) * r.powi(n as i32 - 1) * u * du
}
