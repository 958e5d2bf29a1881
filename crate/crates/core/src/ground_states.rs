//! Reference ground states of `-ΔU + U = μ U^p` and the thresholds built
//! from them.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use serde::Serialize;

use crate::diagnostics::BranchPoint;
use crate::error::{Error, Result};
use crate::nonlinearity::{sobolev_exponent, NonlinearitySpec};
use crate::profile::RadialProfile;
use crate::shooting::{shoot_ground, ShootingControls};

#[derive(Debug, Clone)]
pub struct GroundState {
    pub dimension: u32,
    pub exponent: f64,
    pub coefficient: f64,
    /// Solution at `λ = 1` with `g = μ s^p`.
    pub profile: RadialProfile,
    pub mass: f64,
    pub central_value: f64,
}

/// JSON summary emitted by the `ground-state` subcommand.
#[derive(Debug, Clone, Serialize)]
pub struct GroundStateSummary {
    #[serde(rename = "N")]
    pub dimension: u32,
    pub p: f64,
    pub mu: f64,
    pub mass: f64,
    pub u0: f64,
}

impl GroundState {
    pub fn summary(&self) -> GroundStateSummary {
        GroundStateSummary {
            dimension: self.dimension,
            p: self.exponent,
            mu: self.coefficient,
            mass: self.mass,
            u0: self.central_value,
        }
    }

    pub fn diagnostics(&self) -> Result<BranchPoint> {
        BranchPoint::from_profile(&self.profile)
    }
}

type CacheKey = (u32, u64, u64, [u64; 5]);

fn cache() -> &'static RwLock<HashMap<CacheKey, Arc<GroundState>>> {
    static CACHE: OnceLock<RwLock<HashMap<CacheKey, Arc<GroundState>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

fn check_exponent(n: u32, p: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain("dimension N must be at least 1".into()));
    }
    let upper = sobolev_exponent(n).map_or(f64::INFINITY, |c| c - 1.0);
    if !(p > 1.0 && p < upper) {
        return Err(Error::Domain(format!(
            "exponent p = {p} outside the subcritical range (1, {upper}) for N = {n}"
        )));
    }
    Ok(())
}

/// Unique positive radial solution of `-ΔU + U = μ U^p`, with default
/// shooting controls.
pub fn kwong_ground_state(n: u32, p: f64, mu: f64) -> Result<Arc<GroundState>> {
    kwong_ground_state_with(n, p, mu, &ShootingControls::default())
}

pub fn kwong_ground_state_with(n: u32, p: f64, mu: f64, controls: &ShootingControls) -> Result<Arc<GroundState>> {
    check_exponent(n, p)?;
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::Domain(format!("coefficient mu = {mu} must be positive")));
    }
    let key = (n, p.to_bits(), mu.to_bits(), controls.fingerprint());
    if let Some(hit) = cache().read().unwrap_or_else(|e| e.into_inner()).get(&key) {
        return Ok(hit.clone());
    }
    let spec = NonlinearitySpec::pure_power(mu, p)?;
    let profile = shoot_ground(&spec, n, 1.0, controls, None)?;
    let state = Arc::new(GroundState {
        dimension: n,
        exponent: p,
        coefficient: mu,
        mass: profile.integrals(true, 1)?.mass,
        central_value: profile.central_value(),
        profile,
    });
    let mut guard = cache().write().unwrap_or_else(|e| e.into_inner());
    Ok(guard.entry(key).or_insert(state).clone())
}

/// `U_p^μ = μ^{1/(1-p)} U_p`, from the state at `μ = 1`.
pub fn scale_by_mu(base: &GroundState, mu: f64) -> Result<GroundState> {
    if base.coefficient != 1.0 {
        return Err(Error::Domain(format!(
            "scale_by_mu expects a base state with mu = 1 (got {})",
            base.coefficient
        )));
    }
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::Domain(format!("coefficient mu = {mu} must be positive")));
    }
    let p = base.exponent;
    let factor = mu.powf(1.0 / (1.0 - p));
    let spec = NonlinearitySpec::pure_power(mu, p)?;
    Ok(GroundState {
        dimension: base.dimension,
        exponent: p,
        coefficient: mu,
        profile: base.profile.scaled_amplitude(factor, spec),
        mass: base.mass * factor * factor,
        central_value: base.central_value * factor,
    })
}

/// `λ^{(4-(p-1)N)/(2(p-1))}`: mass of `U_{λ,p}` relative to `U_p`.
pub fn pure_power_mass_factor(n: u32, p: f64, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::NonPositiveFrequency(lambda));
    }
    let nf = n as f64;
    Ok(lambda.powf((4.0 - (p - 1.0) * nf) / (2.0 * (p - 1.0))))
}

/// `μ^{-N/2} ‖U_{1+4/N}‖₂²`.
pub fn critical_mass_threshold(n: u32, mu: f64) -> Result<f64> {
    critical_mass_threshold_with(n, mu, &ShootingControls::default())
}

pub fn critical_mass_threshold_with(n: u32, mu: f64, controls: &ShootingControls) -> Result<f64> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::Domain(format!("coefficient mu = {mu} must be positive")));
    }
    let base = kwong_ground_state_with(n, 1.0 + 4.0 / n as f64, 1.0, controls)?;
    Ok(mu.powf(-0.5 * n as f64) * base.mass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shooting::scan_decay_amplitudes;

    const SQRT3_PI_2: f64 = 2.720_699_046_351_326_6;

    #[test]
    fn closed_form_states() {
        let cubic = kwong_ground_state(1, 3.0, 1.0).unwrap();
        assert!((cubic.central_value - 2f64.sqrt()).abs() < 1e-8);
        assert!((cubic.mass - 4.0).abs() < 1e-6);
        let quintic = kwong_ground_state(1, 5.0, 1.0).unwrap();
        assert!((quintic.mass - SQRT3_PI_2).abs() < 1e-6);
        assert!((3f64.sqrt() * std::f64::consts::PI / 2.0 - SQRT3_PI_2).abs() < 1e-15);
    }

    #[test]
    fn three_dimensional_cubic_mass_two_resolutions() {
        let coarse = kwong_ground_state(3, 3.0, 1.0).unwrap();
        let fine = kwong_ground_state_with(3, 3.0, 1.0, &ShootingControls::default().halved()).unwrap();
        assert!(((coarse.mass - fine.mass) / fine.mass).abs() < 1e-4);
        assert!(coarse.diagnostics().unwrap().passes_gates());
    }

    #[test]
    fn cache_returns_same_state() {
        let a = kwong_ground_state(2, 3.0, 1.0).unwrap();
        let b = kwong_ground_state(2, 3.0, 1.0).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
    }

    #[test]
    fn exponent_range() {
        assert!(matches!(kwong_ground_state(3, 5.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(kwong_ground_state(3, 1.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(kwong_ground_state(1, 3.0, 0.0), Err(Error::Domain(_))));
        assert!(kwong_ground_state(2, 9.0, 1.0).is_ok());
    }

    #[test]
    fn scale_by_mu_identity_and_closed_form() {
        let base = kwong_ground_state(1, 3.0, 1.0).unwrap();
        let same = scale_by_mu(&base, 1.0).unwrap();
        assert_eq!(same.central_value, base.central_value);
        assert_eq!(same.mass, base.mass);
        let four = scale_by_mu(&base, 4.0).unwrap();
        assert!((four.central_value - 2f64.sqrt() / 2.0).abs() < 1e-8);
        assert!((four.mass - 1.0).abs() < 1e-6);
        assert!((four.profile.integrals(true, 1).unwrap().mass - 1.0).abs() < 1e-6);
        assert!(four.diagnostics().unwrap().passes_gates());
    }

    #[test]
    fn scaled_state_matches_direct_shoot() {
        for (n, p, mu) in [(1u32, 3.0, 4.0), (2, 3.0, 0.5), (3, 2.5, 3.0)] {
            let base = kwong_ground_state(n, p, 1.0).unwrap();
            let scaled = scale_by_mu(&base, mu).unwrap();
            let direct = kwong_ground_state(n, p, mu).unwrap();
            for node in &direct.profile.nodes {
                let (u, _) = scaled.profile.eval(node.r);
                assert!((u - node.u).abs() < 1e-8, "N={n} r={}: {u} vs {}", node.r, node.u);
            }
        }
    }

    #[test]
    fn scale_requires_unit_base() {
        let base = kwong_ground_state(1, 3.0, 2.0).unwrap();
        assert!(scale_by_mu(&base, 3.0).is_err());
    }

    #[test]
    fn mass_factor_values() {
        assert_eq!(pure_power_mass_factor(1, 5.0, 17.0).unwrap(), 1.0);
        assert_eq!(pure_power_mass_factor(2, 3.0, 0.01).unwrap(), 1.0);
        assert!((pure_power_mass_factor(1, 3.0, 4.0).unwrap() - 2.0).abs() < 1e-15);
        assert!((pure_power_mass_factor(3, 3.0, 2.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(pure_power_mass_factor(1, 3.0, 0.0).is_err());
    }

    #[test]
    fn mass_factor_matches_shooting() {
        for (n, p) in [(1u32, 3.0), (3, 3.0), (2, 2.0)] {
            let base = kwong_ground_state(n, p, 1.0).unwrap().mass;
            let spec = NonlinearitySpec::pure_power(1.0, p).unwrap();
            for lam in [0.3, 5.0] {
                let prof = shoot_ground(&spec, n, lam, &ShootingControls::default(), None).unwrap();
                let got = prof.integrals(true, 1).unwrap().mass / base;
                let want = pure_power_mass_factor(n, p, lam).unwrap();
                assert!(
                    ((got - want) / want).abs() < 1e-5,
                    "N={n} p={p} λ={lam}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn critical_thresholds() {
        assert!((critical_mass_threshold(1, 1.0).unwrap() - SQRT3_PI_2).abs() < 1e-6);
        assert!((critical_mass_threshold(1, 4.0).unwrap() - SQRT3_PI_2 / 2.0).abs() < 1e-6);
        let townes = critical_mass_threshold(2, 1.0).unwrap();
        let refined = kwong_ground_state_with(2, 3.0, 1.0, &ShootingControls::default().halved())
            .unwrap()
            .mass;
        assert!(((townes - refined) / refined).abs() < 1e-6);
        assert!((townes - 11.70).abs() < 0.01, "{townes}");
    }

    #[test]
    fn uniqueness_probe() {
        for (n, p) in [(2u32, 3.0), (3, 3.0)] {
            let spec = NonlinearitySpec::pure_power(1.0, p).unwrap();
            let found = scan_decay_amplitudes(&spec, n, 1.0, &ShootingControls::default(), 48).unwrap();
            assert_eq!(found.len(), 1, "N={n} p={p}: {found:?}");
        }
    }
}
