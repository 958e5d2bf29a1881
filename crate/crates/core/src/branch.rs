//! The branch `λ ↦ u_λ` sampled on a log grid, its mass curve `ρ(λ)`, the
//! rescaled profiles that expose the limits `λ → 0⁺` and `λ → +∞`, and
//! fitted asymptotic slopes.

use rayon::prelude::*;
use serde::Serialize;

use crate::diagnostics::BranchPoint;
use crate::error::{Error, Result};
use crate::nonlinearity::NonlinearitySpec;
use crate::profile::RadialProfile;
use crate::report::{fmt17, ser17, ser17_opt};
use crate::shooting::{shoot_ground, ShootingControls};

/// Fraction of failed grid points above which a sweep is rejected.
pub const MAX_FAILURE_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchGrid {
    #[serde(serialize_with = "ser17")]
    pub lambda_min: f64,
    #[serde(serialize_with = "ser17")]
    pub lambda_max: f64,
    pub points_per_decade: u32,
}

impl Default for BranchGrid {
    fn default() -> Self {
        Self {
            lambda_min: 1e-4,
            lambda_max: 1e4,
            points_per_decade: 16,
        }
    }
}

impl BranchGrid {
    pub fn new(lambda_min: f64, lambda_max: f64, points_per_decade: u32) -> Result<Self> {
        let g = Self {
            lambda_min,
            lambda_max,
            points_per_decade,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_min > 0.0) {
            return Err(Error::NonPositiveFrequency(self.lambda_min));
        }
        if !(self.lambda_max >= self.lambda_min) || !self.lambda_max.is_finite() {
            return Err(Error::Domain(format!(
                "need lambda_min <= lambda_max (got {} and {})",
                self.lambda_min, self.lambda_max
            )));
        }
        if self.points_per_decade == 0 {
            return Err(Error::Domain("points per decade must be positive".into()));
        }
        Ok(())
    }

    /// Log-spaced frequencies with exact endpoints and at least
    /// `points_per_decade` intervals per decade.
    pub fn lambdas(&self) -> Result<Vec<f64>> {
        self.validate()?;
        if self.lambda_max == self.lambda_min {
            return Ok(vec![self.lambda_min]);
        }
        let (lo, hi) = (self.lambda_min.log10(), self.lambda_max.log10());
        let m = ((hi - lo) * self.points_per_decade as f64 - 1e-9).ceil().max(1.0) as usize;
        Ok((0..=m)
            .map(|i| match i {
                0 => self.lambda_min,
                i if i == m => self.lambda_max,
                i => 10f64.powf(lo + (hi - lo) * i as f64 / m as f64),
            })
            .collect())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FailedPoint {
    #[serde(serialize_with = "ser17")]
    pub lambda: f64,
    pub reason: String,
    /// Diagnostics of a profile that was computed but missed the identity gates.
    pub point: Option<BranchPoint>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MassCurve {
    pub grid: BranchGrid,
    pub points: Vec<BranchPoint>,
    pub failures: Vec<FailedPoint>,
    #[serde(serialize_with = "ser17_opt")]
    pub e0: Option<f64>,
    #[serde(serialize_with = "ser17_opt")]
    pub einf: Option<f64>,
    pub warnings: Vec<String>,
}

impl MassCurve {
    pub fn lambdas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.lambda).collect()
    }

    pub fn masses(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.mass).collect()
    }

    /// One row per grid point, sorted by `λ`; failures keep their row with a
    /// status other than `ok`.
    pub fn to_csv(&self) -> String {
        let mut rows: Vec<(f64, String)> = self
            .points
            .iter()
            .map(|p| (p.lambda, format!("{},ok", p.csv_row())))
            .collect();
        for f in &self.failures {
            let row = match &f.point {
                Some(p) => format!("{},gate-failed", p.csv_row()),
                None => format!("{}{},shoot-failed", fmt17(f.lambda), ",NaN".repeat(8)),
            };
            rows.push((f.lambda, row));
        }
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out = format!("{},status\n", BranchPoint::CSV_HEADER);
        for (_, r) in rows {
            out.push_str(&r);
            out.push('\n');
        }
        out
    }
}

/// Shoots at `lambda` and accepts the profile only if every identity gate
/// holds, retrying once with halved tolerances.
pub fn solve_point(
    spec: &NonlinearitySpec,
    n: u32,
    lambda: f64,
    controls: &ShootingControls,
    hint: Option<f64>,
) -> Result<(RadialProfile, BranchPoint)> {
    let profile = shoot_ground(spec, n, lambda, controls, hint)?;
    let point = BranchPoint::from_profile(&profile)?;
    if point.passes_gates() {
        return Ok((profile, point));
    }
    let profile = shoot_ground(spec, n, lambda, &controls.halved(), hint)?;
    let retry = BranchPoint::from_profile(&profile)?;
    if retry.passes_gates() {
        Ok((profile, retry))
    } else {
        Err(Error::InvalidProfile(format!(
            "identity residual {:.3e} above gate at lambda = {lambda}",
            retry.max_residual()
        )))
    }
}

/// `ξ_prev (λ/λ_prev)^{1/(α-2)}` below `λ = 1`, `^{1/(β-2)}` above.
fn predict_amplitude(spec: &NonlinearitySpec, prev: (f64, f64), lambda: f64) -> f64 {
    let asym = spec.asymptotic_exponents();
    let growth = if lambda < 1.0 { asym.alpha } else { asym.beta };
    prev.1 * (lambda / prev.0).powf(1.0 / (growth - 2.0))
}

enum GridOutcome {
    Ok(BranchPoint),
    Failed(FailedPoint),
}

fn sweep_chunk(spec: &NonlinearitySpec, n: u32, lambdas: &[f64], controls: &ShootingControls) -> Vec<GridOutcome> {
    let mut prev: Option<(f64, f64)> = None;
    lambdas
        .iter()
        .map(|&lam| {
            let hint = prev.map(|p| predict_amplitude(spec, p, lam));
            match solve_point(spec, n, lam, controls, hint) {
                Ok((_, point)) => {
                    prev = Some((lam, point.sup));
                    GridOutcome::Ok(point)
                }
                Err(e) => {
                    prev = None;
                    let point = match &e {
                        Error::InvalidProfile(_) => shoot_ground(spec, n, lam, controls, hint)
                            .and_then(|p| BranchPoint::from_profile(&p))
                            .ok(),
                        _ => None,
                    };
                    GridOutcome::Failed(FailedPoint {
                        lambda: lam,
                        reason: e.to_string(),
                        point,
                    })
                }
            }
        })
        .collect()
}

/// Sweeps the grid decade by decade. Decades run in parallel on the current
/// rayon pool; inside a decade each shot is warm-started from the previous
/// one. The decomposition does not depend on the pool width, so results are
/// reproducible.
pub fn sweep_branch(
    spec: &NonlinearitySpec,
    n: u32,
    grid: &BranchGrid,
    controls: &ShootingControls,
) -> Result<MassCurve> {
    controls.validate()?;
    crate::nonlinearity::require_subcritical(spec, n)?;
    let lambdas = grid.lambdas()?;
    let chunk = grid.points_per_decade as usize;
    let outcomes: Vec<Vec<GridOutcome>> = lambdas
        .par_chunks(chunk)
        .map(|c| sweep_chunk(spec, n, c, controls))
        .collect();

    let mut points = Vec::new();
    let mut failures = Vec::new();
    for o in outcomes.into_iter().flatten() {
        match o {
            GridOutcome::Ok(p) => points.push(p),
            GridOutcome::Failed(f) => failures.push(f),
        }
    }
    let mut curve = MassCurve {
        grid: *grid,
        points,
        failures,
        e0: None,
        einf: None,
        warnings: Vec::new(),
    };
    let fit = fit_asymptotic_exponents(&curve, spec, n);
    curve.e0 = fit.e0;
    curve.einf = fit.einf;
    if fit.e0.is_none() {
        curve
            .warnings
            .push("asymptotic slopes unavailable: grid spans less than two decades".into());
    }
    let total = lambdas.len();
    let failed = curve.failures.len();
    if failed as f64 > MAX_FAILURE_FRACTION * total as f64 {
        return Err(Error::SweepDegenerate {
            failed,
            total,
            partial: Box::new(curve),
        });
    }
    if failed > 0 {
        curve.warnings.push(format!("{failed} of {total} grid points failed"));
    }
    Ok(curve)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    SmallLambda,
    LargeLambda,
}

/// `v(x) = λ^{1/(2-α)} u(x/√λ)` (small regime) or `λ^{1/(2-β)} u(x/√λ)`
/// (large regime).
#[derive(Debug, Clone)]
pub struct RescaledProfile {
    pub base_lambda: f64,
    pub regime: Regime,
    pub factor: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    source: RadialProfile,
}

impl RescaledProfile {
    pub fn eval(&self, x: f64) -> f64 {
        self.factor * self.source.eval(x / self.base_lambda.sqrt()).0
    }

    /// `max |v - U|` over the nodes of `reference`.
    pub fn sup_distance(&self, reference: &RadialProfile) -> f64 {
        reference
            .nodes
            .iter()
            .map(|node| (self.eval(node.r) - node.u).abs())
            .fold(0.0, f64::max)
    }
}

pub fn rescale_profile(profile: &RadialProfile, regime: Regime) -> Result<RescaledProfile> {
    let asym = profile.spec.asymptotic_exponents();
    let growth = match regime {
        Regime::SmallLambda => asym.alpha,
        Regime::LargeLambda => asym.beta,
    };
    let lam = profile.lambda;
    let factor = lam.powf(1.0 / (2.0 - growth));
    let sl = lam.sqrt();
    Ok(RescaledProfile {
        base_lambda: lam,
        regime,
        factor,
        x: profile.nodes.iter().map(|n| n.r * sl).collect(),
        v: profile.nodes.iter().map(|n| n.u * factor).collect(),
        source: profile.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentFit {
    #[serde(serialize_with = "ser17_opt")]
    pub e0: Option<f64>,
    #[serde(serialize_with = "ser17_opt")]
    pub einf: Option<f64>,
    #[serde(serialize_with = "ser17")]
    pub theory_e0: f64,
    #[serde(serialize_with = "ser17")]
    pub theory_einf: f64,
}

/// `2/(α-2) - N/2` and `2/(β-2) - N/2`.
pub fn theory_exponents(spec: &NonlinearitySpec, n: u32) -> (f64, f64) {
    let asym = spec.asymptotic_exponents();
    let half = 0.5 * n as f64;
    (2.0 / (asym.alpha - 2.0) - half, 2.0 / (asym.beta - 2.0) - half)
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(pairs: &[(f64, f64)]) -> Option<f64> {
    if pairs.len() < 2 {
        return None;
    }
    let k = pairs.len() as f64;
    let (mut sx, mut sy) = (0.0, 0.0);
    for (x, y) in pairs {
        sx += x.ln();
        sy += y.ln();
    }
    let (mx, my) = (sx / k, sy / k);
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in pairs {
        let dx = x.ln() - mx;
        sxx += dx * dx;
        sxy += dx * (y.ln() - my);
    }
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Slopes of `log ρ` over the outermost decade at each end of the curve.
/// Unavailable when the curve spans less than two decades.
pub fn fit_asymptotic_exponents(curve: &MassCurve, spec: &NonlinearitySpec, n: u32) -> ExponentFit {
    let (theory_e0, theory_einf) = theory_exponents(spec, n);
    let mut fit = ExponentFit {
        e0: None,
        einf: None,
        theory_e0,
        theory_einf,
    };
    let (Some(first), Some(last)) = (curve.points.first(), curve.points.last()) else {
        return fit;
    };
    if last.lambda < 100.0 * first.lambda * (1.0 - 1e-9) {
        return fit;
    }
    let low: Vec<(f64, f64)> = curve
        .points
        .iter()
        .filter(|p| p.lambda <= 10.0 * first.lambda * (1.0 + 1e-9))
        .map(|p| (p.lambda, p.mass))
        .collect();
    let high: Vec<(f64, f64)> = curve
        .points
        .iter()
        .filter(|p| p.lambda >= 0.1 * last.lambda * (1.0 - 1e-9))
        .map(|p| (p.lambda, p.mass))
        .collect();
    if low.len() >= 3 {
        fit.e0 = loglog_slope(&low);
    }
    if high.len() >= 3 {
        fit.einf = loglog_slope(&high);
    }
    fit
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtremumKind {
    Maximum,
    Minimum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassExtremum {
    pub kind: ExtremumKind,
    #[serde(serialize_with = "ser17")]
    pub lambda: f64,
    #[serde(serialize_with = "ser17")]
    pub mass: f64,
    /// Vertex of the parabola through the three grid points around the
    /// extremum, in `λ`.
    #[serde(serialize_with = "ser17")]
    pub parabolic_lambda: f64,
}

const GOLDEN_TOL: f64 = 1e-6;

/// Interior maximum (or, failing that, interior minimum) of `ρ` on the grid,
/// refined by a parabolic estimate and golden-section search on `ln λ`
/// with fresh shoots. `None` when the extremum sits on the grid boundary.
pub fn locate_mass_extremum(
    curve: &MassCurve,
    spec: &NonlinearitySpec,
    n: u32,
    controls: &ShootingControls,
) -> Result<Option<MassExtremum>> {
    let pts = &curve.points;
    if pts.len() < 3 {
        return Ok(None);
    }
    let argbest = |sign: f64| {
        let mut best = 0;
        for i in 1..pts.len() {
            if sign * pts[i].mass > sign * pts[best].mass {
                best = i;
            }
        }
        best
    };
    let interior = |i: usize| i > 0 && i + 1 < pts.len();
    let (kind, sign, i) = {
        let imax = argbest(1.0);
        let imin = argbest(-1.0);
        if interior(imax) {
            (ExtremumKind::Maximum, 1.0, imax)
        } else if interior(imin) {
            (ExtremumKind::Minimum, -1.0, imin)
        } else {
            return Ok(None);
        }
    };

    let x = [pts[i - 1].lambda.ln(), pts[i].lambda.ln(), pts[i + 1].lambda.ln()];
    let y = [pts[i - 1].mass, pts[i].mass, pts[i + 1].mass];
    let num = (x[1] - x[0]).powi(2) * (y[1] - y[2]) - (x[1] - x[2]).powi(2) * (y[1] - y[0]);
    let den = (x[1] - x[0]) * (y[1] - y[2]) - (x[1] - x[2]) * (y[1] - y[0]);
    let parabolic = if den != 0.0 { x[1] - 0.5 * num / den } else { x[1] };

    let hint = Some(pts[i].sup);
    let objective = |t: f64| -> Result<f64> {
        let (_, p) = solve_point(spec, n, t.exp(), controls, hint)?;
        Ok(sign * p.mass)
    };
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (x[0], x[2]);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let mut fc = objective(c)?;
    let mut fd = objective(d)?;
    while b - a > GOLDEN_TOL {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = objective(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = objective(d)?;
        }
    }
    let (mut t, mut f) = if fc > fd { (c, fc) } else { (d, fd) };
    if sign * y[1] > f {
        t = x[1];
        f = sign * y[1];
    }
    Ok(Some(MassExtremum {
        kind,
        lambda: t.exp(),
        mass: sign * f,
        parabolic_lambda: parabolic.exp(),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground_states::kwong_ground_state;

    const SQRT3_PI_2: f64 = 2.720_699_046_351_326_6;

    fn spec(text: &str) -> NonlinearitySpec {
        text.parse().unwrap()
    }

    fn sweep(text: &str, n: u32, lo: f64, hi: f64, ppd: u32) -> MassCurve {
        sweep_branch(
            &spec(text),
            n,
            &BranchGrid::new(lo, hi, ppd).unwrap(),
            &ShootingControls::default(),
        )
        .unwrap()
    }

    #[test]
    fn grid_shape() {
        let g = BranchGrid::new(1e-2, 1e2, 4).unwrap().lambdas().unwrap();
        assert_eq!(g.len(), 17);
        assert_eq!(g[0], 1e-2);
        assert_eq!(g[16], 1e2);
        assert!((g[8] - 1.0).abs() < 1e-14);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(BranchGrid::default().lambdas().unwrap().len(), 129);
        assert_eq!(BranchGrid::new(3.0, 3.0, 4).unwrap().lambdas().unwrap(), vec![3.0]);
        assert!(BranchGrid::new(0.0, 1.0, 4).is_err());
        assert!(BranchGrid::new(2.0, 1.0, 4).is_err());
    }

    #[test]
    fn cubic_line_mass_law() {
        let c = sweep("1*s^3", 1, 1e-2, 1e2, 8);
        assert!(c.failures.is_empty());
        for p in &c.points {
            let want = 4.0 * p.lambda.sqrt();
            assert!(((p.mass - want) / want).abs() < 1e-5, "{} {}", p.lambda, p.mass);
        }
        assert!((c.e0.unwrap() - 0.5).abs() < 0.01);
        assert!((c.einf.unwrap() - 0.5).abs() < 0.01);
    }

    #[test]
    fn critical_quintic_is_flat() {
        let c = sweep("1*s^5", 1, 1e-2, 1e2, 8);
        for p in &c.points {
            assert!((p.mass - SQRT3_PI_2).abs() < 1e-5);
        }
    }

    #[test]
    fn single_point_curve() {
        let c = sweep("1*s^3", 1, 2.0, 2.0, 16);
        assert_eq!(c.points.len(), 1);
        assert!(c.e0.is_none() && c.einf.is_none());
        assert!(!c.warnings.is_empty());
    }

    #[test]
    fn warm_and_cold_sweeps_agree() {
        let s = spec("1*s^2 + 1*s^3");
        let c = sweep("1*s^2 + 1*s^3", 2, 1e-2, 1e1, 6);
        for p in &c.points {
            let cold = shoot_ground(&s, 2, p.lambda, &ShootingControls::default(), None).unwrap();
            let m = cold.integrals(true, 1).unwrap().mass;
            assert!(((m - p.mass) / m).abs() < 1e-6, "λ={}: {} vs {m}", p.lambda, p.mass);
        }
    }

    #[test]
    fn pool_width_does_not_change_results() {
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| sweep("1*s^2 + 1*s^5", 2, 1e-1, 1e1, 4))
        };
        assert_eq!(run(1).to_csv(), run(3).to_csv());
    }

    #[test]
    fn theory_exponent_values() {
        assert_eq!(theory_exponents(&spec("1*s^3"), 1), (0.5, 0.5));
        assert_eq!(theory_exponents(&spec("1*s^2 + 1*s^3"), 2), (1.0, 0.0));
        assert_eq!(theory_exponents(&spec("1*s^2 + 1*s^5"), 2), (1.0, -0.5));
    }

    #[test]
    fn slope_of_exact_power() {
        let pts: Vec<(f64, f64)> = (0..5).map(|i| (2f64.powi(i), 3.0 * 2f64.powi(i).powf(-0.7))).collect();
        assert!((loglog_slope(&pts).unwrap() + 0.7).abs() < 1e-12);
        assert!(loglog_slope(&pts[..1]).is_none());
    }

    #[test]
    fn kinetic_slopes_follow_scaling() {
        // log K slope → 1 + 2/(α-2) - N/2 and 1 + 2/(β-2) - N/2.
        let c = sweep("1*s^2 + 1*s^3", 2, 1e-4, 1e4, 4);
        let k: Vec<(f64, f64)> = c.points.iter().map(|p| (p.lambda, p.kinetic)).collect();
        let lo = loglog_slope(&k[..5]).unwrap();
        let hi = loglog_slope(&k[k.len() - 5..]).unwrap();
        assert!((lo - 2.0).abs() < 0.1, "{lo}");
        assert!((hi - 1.0).abs() < 0.05, "{hi}");
    }

    #[test]
    fn sup_norm_scaling_approaches_reference() {
        let s = spec("1*s^2 + 1*s^3");
        let u0 = kwong_ground_state(2, 2.0, 1.0).unwrap().central_value;
        let gaps: Vec<f64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&lam| {
                let p = shoot_ground(&s, 2, lam, &ShootingControls::default(), None).unwrap();
                (p.central_value() / lam - u0).abs()
            })
            .collect();
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
        assert!(gaps[2] < 1e-3 * u0);
    }

    #[test]
    fn rescaling_identity_and_pure_power() {
        let s = spec("1*s^3");
        let p = shoot_ground(&s, 2, 1.0, &ShootingControls::default(), None).unwrap();
        let r = rescale_profile(&p, Regime::SmallLambda).unwrap();
        assert_eq!(r.factor, 1.0);
        assert_eq!(r.v[0], p.nodes[0].u);

        let s = spec("2*s^3");
        let reference = kwong_ground_state(2, 3.0, 2.0).unwrap();
        for lam in [0.05, 20.0] {
            let p = shoot_ground(&s, 2, lam, &ShootingControls::default(), None).unwrap();
            for regime in [Regime::SmallLambda, Regime::LargeLambda] {
                let r = rescale_profile(&p, regime).unwrap();
                assert!(r.sup_distance(&reference.profile) < 1e-6);
            }
        }
    }

    #[test]
    fn rescaled_mixed_profile_near_reference() {
        let s = spec("1*s^2 + 1*s^5");
        let p = shoot_ground(&s, 2, 1e-3, &ShootingControls::default(), None).unwrap();
        let r = rescale_profile(&p, Regime::SmallLambda).unwrap();
        let u = kwong_ground_state(2, 2.0, 1.0).unwrap();
        assert!(r.sup_distance(&u.profile) < 0.05);
    }

    #[test]
    fn monotone_curve_has_no_extremum() {
        let c = sweep("1*s^3", 1, 1e-1, 1e1, 4);
        let e = locate_mass_extremum(&c, &spec("1*s^3"), 1, &ShootingControls::default()).unwrap();
        assert!(e.is_none());
    }

    #[test]
    fn mixed_case_interior_maximum() {
        let s = spec("1*s^2 + 1*s^5");
        let coarse = sweep("1*s^2 + 1*s^5", 2, 1e-2, 1e2, 4);
        let fine = sweep("1*s^2 + 1*s^5", 2, 1e-2, 1e2, 8);
        let ctl = ShootingControls::default();
        let a = locate_mass_extremum(&coarse, &s, 2, &ctl).unwrap().unwrap();
        let b = locate_mass_extremum(&fine, &s, 2, &ctl).unwrap().unwrap();
        assert_eq!(a.kind, ExtremumKind::Maximum);
        assert!(((a.mass - b.mass) / b.mass).abs() < 1e-4);
        assert!(fine.points.iter().all(|p| p.mass <= b.mass * (1.0 + 1e-9)));
        assert!(fine.points.first().unwrap().mass < b.mass);
        assert!(fine.points.last().unwrap().mass < b.mass);
    }

    #[test]
    fn warm_started_tails_do_not_turn_up() {
        // Two warm-started points used to stop on a spurious decay with u' ≈ 0.
        let s = spec("1*s^2 + 1*s^4");
        let curve = sweep_branch(&s, 3, &BranchGrid::default(), &ShootingControls::default()).unwrap();
        assert!(curve.failures.is_empty(), "{:?}", curve.failures);
        assert_eq!(curve.points.len(), 129);
    }

    #[test]
    fn csv_has_status_column() {
        let c = sweep("1*s^3", 1, 1.0, 10.0, 2);
        let csv = c.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 1 + 3);
        assert!(lines[0].ends_with(",status"));
        assert!(lines[1..]
            .iter()
            .all(|l| l.ends_with(",ok") && l.split(',').count() == 10));
    }
}
