//! Normalized solutions: pairs `(λ, u)` with `‖u‖₂² = a`, found as level
//! crossings `ρ(λ) = a` of the mass curve, together with the case
//! classification that predicts how many to expect.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::branch::{
    locate_mass_extremum, solve_point, sweep_branch, BranchGrid, ExtremumKind, MassCurve, MassExtremum,
};
use crate::diagnostics::BranchPoint;
use crate::error::{Error, Result};
use crate::ground_states::critical_mass_threshold_with;
use crate::nonlinearity::{require_subcritical, NonlinearitySpec};
use crate::profile::RadialProfile;
use crate::report::{ser17, ser17_opt};
use crate::shooting::ShootingControls;

/// Relative tolerance of `|ρ(λ) - a|` at an accepted root.
pub const ROOT_TOL: f64 = 1e-6;

/// Most decades added at either end of the grid while looking for a crossing.
pub const MAX_EXTENSION_DECADES: u32 = 2;

/// Relative tolerance under which `α` or `β` counts as equal to `2 + 4/N`.
const CRITICAL_TIE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CaseLabel {
    #[serde(rename = "i")]
    I,
    #[serde(rename = "ii")]
    II,
    #[serde(rename = "iii-1")]
    III1,
    #[serde(rename = "iii-2")]
    III2,
    #[serde(rename = "iv-1")]
    IV1,
    #[serde(rename = "iv-2")]
    IV2,
    #[serde(rename = "v-1")]
    V1,
    #[serde(rename = "v-2")]
    V2,
    #[serde(rename = "vi")]
    VI,
}

impl CaseLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            CaseLabel::I => "i",
            CaseLabel::II => "ii",
            CaseLabel::III1 => "iii-1",
            CaseLabel::III2 => "iii-2",
            CaseLabel::IV1 => "iv-1",
            CaseLabel::IV2 => "iv-2",
            CaseLabel::V1 => "v-1",
            CaseLabel::V2 => "v-2",
            CaseLabel::VI => "vi",
        }
    }

    /// Cases with `α > β`, which a sum of powers cannot produce.
    pub fn is_mirror(self) -> bool {
        matches!(self, CaseLabel::III2 | CaseLabel::IV2 | CaseLabel::V2)
    }
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `2 + 4/N`.
pub fn mass_critical_exponent(n: u32) -> f64 {
    2.0 + 4.0 / n as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Below,
    At,
    Above,
}

fn side(e: f64, crit: f64) -> Side {
    if (e - crit).abs() <= CRITICAL_TIE * crit {
        Side::At
    } else if e < crit {
        Side::Below
    } else {
        Side::Above
    }
}

/// Position of `α`, `β` relative to `2 + 4/N`.
pub fn classify_exponents(alpha: f64, beta: f64, n: u32) -> CaseLabel {
    use Side::*;
    let crit = mass_critical_exponent(n);
    match (side(alpha, crit), side(beta, crit)) {
        (Below, Below) => CaseLabel::I,
        (At, At) => CaseLabel::II,
        (Below, At) => CaseLabel::III1,
        (At, Below) => CaseLabel::III2,
        (Below, Above) => CaseLabel::IV1,
        (Above, Below) => CaseLabel::IV2,
        (At, Above) => CaseLabel::V1,
        (Above, At) => CaseLabel::V2,
        (Above, Above) => CaseLabel::VI,
    }
}

pub fn classify_case(spec: &NonlinearitySpec, n: u32) -> Result<CaseLabel> {
    let asym = require_subcritical(spec, n)?;
    Ok(classify_exponents(asym.alpha, asym.beta, n))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Prediction {
    ExistsAtLeast { count: usize },
    MayNotExist,
    NoSolutionForLargeA,
    NoSolutionForSmallA,
}

impl Prediction {
    pub fn is_met_by(self, roots: usize) -> bool {
        match self {
            Prediction::ExistsAtLeast { count } => roots >= count,
            Prediction::MayNotExist => true,
            Prediction::NoSolutionForLargeA | Prediction::NoSolutionForSmallA => roots == 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Threshold {
    pub name: &'static str,
    #[serde(serialize_with = "ser17")]
    pub value: f64,
}

/// Mass range seen on a computed curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObservedMasses {
    #[serde(serialize_with = "ser17")]
    pub min: f64,
    #[serde(serialize_with = "ser17")]
    pub max: f64,
    pub extremum: Option<MassExtremum>,
}

impl ObservedMasses {
    pub fn from_curve(curve: &MassCurve, extremum: Option<MassExtremum>) -> Option<Self> {
        let masses = curve.masses();
        if masses.is_empty() {
            return None;
        }
        let mut min = masses.iter().copied().fold(f64::INFINITY, f64::min);
        let mut max = masses.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if let Some(e) = extremum {
            min = min.min(e.mass);
            max = max.max(e.mass);
        }
        Some(Self { min, max, extremum })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PredictionRecord {
    pub case: CaseLabel,
    #[serde(serialize_with = "ser17")]
    pub a: f64,
    pub prediction: Prediction,
    pub clause: String,
    pub thresholds: Vec<Threshold>,
}

/// Expected number of normalized solutions at mass `a`. Thresholds with a
/// closed expression are computed from reference ground states; those
/// only known to exist are replaced by what `observed` shows.
pub fn predict_for_mass(
    spec: &NonlinearitySpec,
    n: u32,
    a: f64,
    observed: Option<&ObservedMasses>,
    controls: &ShootingControls,
) -> Result<PredictionRecord> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::NonPositiveMass(a));
    }
    let case = classify_case(spec, n)?;
    let asym = spec.asymptotic_exponents();
    let threshold = |mu: f64| critical_mass_threshold_with(n, mu, controls);
    let obs_max = observed.map(|o| o.max);
    let obs_min = observed.map(|o| o.min);
    let extremum = |kind: ExtremumKind| {
        observed
            .and_then(|o| o.extremum)
            .filter(|e| e.kind == kind)
            .map(|e| e.mass)
    };
    let mut thresholds = Vec::new();
    let mut push = |name: &'static str, value: Option<f64>| {
        if let Some(value) = value {
            thresholds.push(Threshold { name, value });
        }
    };
    use Prediction::*;
    let (prediction, clause) = match case {
        CaseLabel::I | CaseLabel::VI => (
            ExistsAtLeast { count: 1 },
            "at least one solution for every a > 0".to_string(),
        ),
        CaseLabel::II => {
            let lo = threshold(asym.mu1.max(asym.mu2))?;
            let hi = threshold(asym.mu1.min(asym.mu2))?;
            push("lower_critical_mass", Some(lo));
            push("upper_critical_mass", Some(hi));
            push("observed_min", obs_min);
            push("observed_max", obs_max);
            if lo < a && a < hi {
                (
                    ExistsAtLeast { count: 1 },
                    "a inside the open critical-mass interval".into(),
                )
            } else if lo == hi {
                if ((a - lo) / lo).abs() <= ROOT_TOL {
                    (
                        MayNotExist,
                        "pure critical power: the mass is constant along the branch".into(),
                    )
                } else if a < lo {
                    (
                        NoSolutionForSmallA,
                        "pure critical power: only a = critical mass is attained".into(),
                    )
                } else {
                    (
                        NoSolutionForLargeA,
                        "pure critical power: only a = critical mass is attained".into(),
                    )
                }
            } else if obs_min.is_some_and(|m| a < m) {
                (
                    NoSolutionForSmallA,
                    "a below the critical interval and below every observed mass".into(),
                )
            } else if obs_max.is_some_and(|m| a > m) {
                (
                    NoSolutionForLargeA,
                    "a above the critical interval and above every observed mass".into(),
                )
            } else {
                (MayNotExist, "a outside the critical interval".into())
            }
        }
        CaseLabel::III1 | CaseLabel::V1 => {
            let mu = if case == CaseLabel::III1 { asym.mu2 } else { asym.mu1 };
            let t = threshold(mu)?;
            push("critical_mass", Some(t));
            push("observed_max", obs_max);
            if a < t {
                (ExistsAtLeast { count: 1 }, "a below the critical mass".into())
            } else if obs_max.is_some_and(|m| a > m) {
                (NoSolutionForLargeA, "a above every observed mass".into())
            } else {
                (MayNotExist, "a at or above the critical mass".into())
            }
        }
        CaseLabel::III2 | CaseLabel::V2 => {
            let mu = if case == CaseLabel::III2 { asym.mu1 } else { asym.mu2 };
            let t = threshold(mu)?;
            push("critical_mass", Some(t));
            push("observed_min", obs_min);
            if a > t {
                (ExistsAtLeast { count: 1 }, "a above the critical mass".into())
            } else if obs_min.is_some_and(|m| a < m) {
                (NoSolutionForSmallA, "a below every observed mass".into())
            } else {
                (MayNotExist, "a at or below the critical mass".into())
            }
        }
        CaseLabel::IV1 => {
            let star = extremum(ExtremumKind::Maximum);
            push("a_star", star);
            push("observed_max", obs_max);
            match star {
                Some(s) if a < s => (ExistsAtLeast { count: 2 }, "a below the interior maximum a*".into()),
                _ if obs_max.is_some_and(|m| a > m) => (NoSolutionForLargeA, "a above every observed mass".into()),
                _ => (MayNotExist, "a not below the observed maximum".into()),
            }
        }
        CaseLabel::IV2 => {
            let star = extremum(ExtremumKind::Minimum);
            push("a_star", star);
            push("observed_min", obs_min);
            match star {
                Some(s) if a > s => (ExistsAtLeast { count: 2 }, "a above the interior minimum a*".into()),
                _ if obs_min.is_some_and(|m| a < m) => (NoSolutionForSmallA, "a below every observed mass".into()),
                _ => (MayNotExist, "a not above the observed minimum".into()),
            }
        }
    };
    Ok(PredictionRecord {
        case,
        a,
        prediction,
        clause,
        thresholds,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct NormalizedRoot {
    #[serde(serialize_with = "ser17")]
    pub lambda: f64,
    pub point: BranchPoint,
    #[serde(skip)]
    pub profile: RadialProfile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PredictionStatus {
    #[serde(rename = "PREDICTION-MET")]
    Met,
    #[serde(rename = "PREDICTION-UNMET")]
    Unmet,
}

impl fmt::Display for PredictionStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PredictionStatus::Met => "PREDICTION-MET",
            PredictionStatus::Unmet => "PREDICTION-UNMET",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseReport {
    pub case: CaseLabel,
    #[serde(rename = "N")]
    pub dimension: u32,
    #[serde(serialize_with = "ser17")]
    pub p_bar: f64,
    #[serde(serialize_with = "ser17")]
    pub alpha: f64,
    #[serde(serialize_with = "ser17")]
    pub beta: f64,
    pub experimental: bool,
    pub prediction: PredictionRecord,
    pub observed: Option<ObservedMasses>,
    #[serde(serialize_with = "ser17")]
    pub lambda_min: f64,
    #[serde(serialize_with = "ser17")]
    pub lambda_max: f64,
    pub roots: Vec<NormalizedRoot>,
    pub status: PredictionStatus,
    #[serde(serialize_with = "ser17_opt")]
    pub e0: Option<f64>,
    #[serde(serialize_with = "ser17_opt")]
    pub einf: Option<f64>,
    pub warnings: Vec<String>,
}

/// Adds one decade below (`low`) or above the current grid.
fn extend(
    curve: &mut MassCurve,
    spec: &NonlinearitySpec,
    n: u32,
    low: bool,
    controls: &ShootingControls,
) -> Result<()> {
    let ppd = curve.grid.points_per_decade;
    let (lo, hi) = if low {
        (curve.grid.lambda_min / 10.0, curve.grid.lambda_min)
    } else {
        (curve.grid.lambda_max, curve.grid.lambda_max * 10.0)
    };
    let extra = sweep_branch(spec, n, &BranchGrid::new(lo, hi, ppd)?, controls)?;
    let boundary = if low { hi } else { lo };
    curve
        .points
        .extend(extra.points.into_iter().filter(|p| p.lambda != boundary));
    curve
        .failures
        .extend(extra.failures.into_iter().filter(|f| f.lambda != boundary));
    curve.points.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    curve.failures.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    if low {
        curve.grid.lambda_min = lo;
    } else {
        curve.grid.lambda_max = hi;
    }
    Ok(())
}

/// Whether the mass at an end of the curve is on the wrong side of `a`
/// while the asymptotic slope promises that it will cross.
fn should_extend(mass: f64, a: f64, slope: f64, low: bool) -> bool {
    if slope == 0.0 {
        return false;
    }
    // Moving outwards, log ρ changes by -slope (low end) or +slope (high end).
    let grows_outwards = if low { slope < 0.0 } else { slope > 0.0 };
    if grows_outwards {
        mass < a
    } else {
        mass > a
    }
}

/// Bisection on `ln λ` for `ρ(λ) = a`, one fresh shoot per iterate.
fn refine_root(
    spec: &NonlinearitySpec,
    n: u32,
    a: f64,
    lo: &BranchPoint,
    hi: &BranchPoint,
    controls: &ShootingControls,
) -> Result<NormalizedRoot> {
    let (mut x0, mut x1) = (lo.lambda.ln(), hi.lambda.ln());
    let (mut s0, mut sup0) = (lo.mass - a, lo.sup);
    for _ in 0..200 {
        let xm = 0.5 * (x0 + x1);
        let lam = xm.exp();
        let (profile, point) = solve_point(spec, n, lam, controls, Some(sup0))?;
        let sm = point.mass - a;
        if sm.abs() <= ROOT_TOL * a {
            return Ok(NormalizedRoot {
                lambda: lam,
                point,
                profile,
            });
        }
        if (sm < 0.0) == (s0 < 0.0) {
            x0 = xm;
            s0 = sm;
            sup0 = point.sup;
        } else {
            x1 = xm;
        }
        if x1 - x0 < 1e-15 * xm.abs().max(1.0) {
            break;
        }
    }
    Err(Error::ShootFailed(format!(
        "root refinement for a = {a} stalled between lambda = {} and {}",
        x0.exp(),
        x1.exp()
    )))
}

/// Every root of `ρ(λ) = a` bracketed on the grid, refined to
/// `|ρ - a| ≤ 10⁻⁶ a`, with the case classification and the comparison
/// against its prediction. Roots are those found on the grid, not
/// necessarily all solutions.
pub fn solve_normalized(
    spec: &NonlinearitySpec,
    n: u32,
    a: f64,
    grid: &BranchGrid,
    controls: &ShootingControls,
) -> Result<CaseReport> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::NonPositiveMass(a));
    }
    let case = classify_case(spec, n)?;
    let asym = spec.asymptotic_exponents();
    let mut curve = sweep_branch(spec, n, grid, controls)?;
    let mut warnings = std::mem::take(&mut curve.warnings);
    if case.is_mirror() {
        warnings.push(format!(
            "case {case} requires declared asymptotic overrides; experimental"
        ));
    }

    let (theory_e0, theory_einf) = crate::branch::theory_exponents(spec, n);
    for low in [true, false] {
        let slope = if low { theory_e0 } else { theory_einf };
        for _ in 0..MAX_EXTENSION_DECADES {
            let end = if low { curve.points.first() } else { curve.points.last() };
            let Some(end) = end else { break };
            if !should_extend(end.mass, a, slope, low) {
                break;
            }
            extend(&mut curve, spec, n, low, controls)?;
            warnings.push(format!(
                "grid extended to [{:e}, {:e}] to reach a = {a}",
                curve.grid.lambda_min, curve.grid.lambda_max
            ));
        }
    }

    let brackets: Vec<(BranchPoint, BranchPoint)> = curve
        .points
        .windows(2)
        .filter(|w| (w[0].mass - a).signum() != (w[1].mass - a).signum() || w[0].mass == a)
        .map(|w| (w[0], w[1]))
        .collect();
    let refined: Vec<Result<NormalizedRoot>> = brackets
        .par_iter()
        .map(|(lo, hi)| {
            if (lo.mass - a).abs() <= ROOT_TOL * a {
                solve_point(spec, n, lo.lambda, controls, Some(lo.sup)).map(|(profile, point)| NormalizedRoot {
                    lambda: lo.lambda,
                    point,
                    profile,
                })
            } else {
                refine_root(spec, n, a, lo, hi, controls)
            }
        })
        .collect();
    let mut roots = Vec::new();
    for r in refined {
        match r {
            Ok(root) => roots.push(root),
            Err(e) => warnings.push(format!("root refinement failed: {e}")),
        }
    }
    roots.dedup_by(|x, y| (x.lambda - y.lambda).abs() <= 1e-12 * y.lambda);

    let extremum = locate_mass_extremum(&curve, spec, n, controls)?;
    let observed = ObservedMasses::from_curve(&curve, extremum);
    let prediction = predict_for_mass(spec, n, a, observed.as_ref(), controls)?;
    let status = if prediction.prediction.is_met_by(roots.len()) {
        PredictionStatus::Met
    } else {
        warnings.push(format!(
            "found {} root(s) but the prediction is {:?}; try a denser grid (--ppd) or a wider lambda range",
            roots.len(),
            prediction.prediction
        ));
        PredictionStatus::Unmet
    };
    Ok(CaseReport {
        case,
        dimension: n,
        p_bar: mass_critical_exponent(n),
        alpha: asym.alpha,
        beta: asym.beta,
        experimental: case.is_mirror(),
        prediction,
        observed,
        lambda_min: curve.grid.lambda_min,
        lambda_max: curve.grid.lambda_max,
        roots,
        status,
        e0: curve.e0,
        einf: curve.einf,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::AsymptoticData;
    use proptest::prelude::*;

    const SQRT3_PI_2: f64 = 2.720_699_046_351_326_6;

    fn spec(text: &str) -> NonlinearitySpec {
        text.parse().unwrap()
    }

    fn grid(lo: f64, hi: f64, ppd: u32) -> BranchGrid {
        BranchGrid::new(lo, hi, ppd).unwrap()
    }

    #[test]
    fn classification_examples() {
        assert_eq!(classify_case(&spec("1*s^2 + 1*s^2.5"), 2).unwrap(), CaseLabel::I);
        assert_eq!(classify_case(&spec("1*s^3"), 1).unwrap(), CaseLabel::I);
        assert_eq!(classify_case(&spec("1*s^5"), 1).unwrap(), CaseLabel::II);
        assert_eq!(classify_case(&spec("1*s^2 + 1*s^5"), 2).unwrap(), CaseLabel::IV1);
        assert_eq!(classify_case(&spec("1*s^2 + 1*s^3"), 2).unwrap(), CaseLabel::III1);
        assert_eq!(classify_case(&spec("1*s^3 + 1*s^4"), 2).unwrap(), CaseLabel::V1);
        assert_eq!(classify_case(&spec("1*s^4 + 1*s^6"), 2).unwrap(), CaseLabel::VI);
        // 2 + 4/3 is not representable; the tie must still be detected.
        assert_eq!(
            classify_case(&spec("1*s^2.3333333333333335"), 3).unwrap(),
            CaseLabel::II
        );
        assert!(matches!(classify_case(&spec("1*s^5"), 3), Err(Error::OutOfScope(_))));
    }

    #[test]
    fn every_label_reachable_from_exponents() {
        let c = mass_critical_exponent(2);
        let table = [
            (3.0, 3.5, CaseLabel::I),
            (c, c, CaseLabel::II),
            (3.0, c, CaseLabel::III1),
            (c, 3.0, CaseLabel::III2),
            (3.0, 6.0, CaseLabel::IV1),
            (6.0, 3.0, CaseLabel::IV2),
            (c, 6.0, CaseLabel::V1),
            (6.0, c, CaseLabel::V2),
            (5.0, 6.0, CaseLabel::VI),
        ];
        for (a, b, want) in table {
            assert_eq!(classify_exponents(a, b, 2), want);
        }
    }

    #[test]
    fn mirror_case_via_overrides() {
        let s = spec("1*s^2 + 1*s^5")
            .with_overrides(AsymptoticData {
                alpha: 6.0,
                mu1: 1.0,
                beta: 3.0,
                mu2: 1.0,
            })
            .unwrap();
        let case = classify_case(&s, 2).unwrap();
        assert_eq!(case, CaseLabel::IV2);
        assert!(case.is_mirror());
    }

    proptest! {
        #[test]
        fn coefficients_do_not_change_case(
            c1 in 0.01f64..100.0,
            c2 in 0.01f64..100.0,
            p1 in 1.05f64..4.0,
            gap in 0.1f64..3.0,
            n in 1u32..4,
        ) {
            let base = NonlinearitySpec::new([(1.0, p1), (1.0, p1 + gap)]).unwrap();
            let scaled = NonlinearitySpec::new([(c1, p1), (c2, p1 + gap)]).unwrap();
            match (classify_case(&base, n), classify_case(&scaled, n)) {
                (Ok(x), Ok(y)) => prop_assert_eq!(x, y),
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false),
            }
        }
    }

    #[test]
    fn predictions_by_case() {
        let ctl = ShootingControls::default();
        let p = predict_for_mass(&spec("1*s^3"), 1, 0.3, None, &ctl).unwrap();
        assert_eq!(p.prediction, Prediction::ExistsAtLeast { count: 1 });
        let p = predict_for_mass(&spec("1*s^4 + 1*s^6"), 2, 5.0, None, &ctl).unwrap();
        assert_eq!(p.prediction, Prediction::ExistsAtLeast { count: 1 });
        let p = predict_for_mass(&spec("1*s^5"), 1, 1.0, None, &ctl).unwrap();
        assert_eq!(p.prediction, Prediction::NoSolutionForSmallA);
        assert!((p.thresholds[0].value - SQRT3_PI_2).abs() < 1e-6);
        // Critical interval (μ₂^{-1/2}, μ₁^{-1/2}) ‖U₅‖² with overrides μ₁ = 1, μ₂ = 4.
        let s = spec("1*s^5")
            .with_overrides(AsymptoticData {
                alpha: 6.0,
                mu1: 1.0,
                beta: 6.0,
                mu2: 4.0,
            })
            .unwrap();
        let p = predict_for_mass(&s, 1, 2.0, None, &ctl).unwrap();
        assert_eq!(p.prediction, Prediction::ExistsAtLeast { count: 1 });
        assert!((p.thresholds[0].value - SQRT3_PI_2 / 2.0).abs() < 1e-6);
        assert!(predict_for_mass(&spec("1*s^3"), 1, 0.0, None, &ctl).is_err());
    }

    #[test]
    fn at_most_critical_threshold() {
        // α = 3 < β = 4 = 2 + 4/2: existence below μ₂^{-1} ‖U₃‖².
        let ctl = ShootingControls::default();
        let s = spec("1*s^2 + 2*s^3");
        let p = predict_for_mass(&s, 2, 5.0, None, &ctl).unwrap();
        assert_eq!(p.case, CaseLabel::III1);
        assert!((p.thresholds[0].value - 11.70 / 2.0).abs() < 0.01);
        assert_eq!(p.prediction, Prediction::ExistsAtLeast { count: 1 });
        let p = predict_for_mass(&s, 2, 50.0, None, &ctl).unwrap();
        assert_eq!(p.prediction, Prediction::MayNotExist);
    }

    #[test]
    fn cubic_line_single_root() {
        let r = solve_normalized(
            &spec("1*s^3"),
            1,
            8.0,
            &grid(1e-2, 1e2, 8),
            &ShootingControls::default(),
        )
        .unwrap();
        assert_eq!(r.roots.len(), 1);
        assert!((r.roots[0].lambda - 4.0).abs() < 1e-4);
        assert!((r.roots[0].point.mass - 8.0).abs() <= 8e-6);
        assert_eq!(r.status, PredictionStatus::Met);
    }

    #[test]
    fn critical_quintic_below_threshold_has_no_root() {
        let r = solve_normalized(
            &spec("1*s^5"),
            1,
            1.0,
            &grid(1e-2, 1e2, 4),
            &ShootingControls::default(),
        )
        .unwrap();
        assert!(r.roots.is_empty());
        assert_eq!(r.prediction.prediction, Prediction::NoSolutionForSmallA);
        assert_eq!(r.status, PredictionStatus::Met);
    }

    #[test]
    fn auto_extension_reaches_far_root() {
        // ρ = 4√λ; a = 0.05 needs λ ≈ 1.6e-4, one decade below the grid.
        let r = solve_normalized(
            &spec("1*s^3"),
            1,
            0.05,
            &grid(1e-3, 1e1, 4),
            &ShootingControls::default(),
        )
        .unwrap();
        assert_eq!(r.roots.len(), 1);
        assert!((r.roots[0].lambda - (0.05f64 / 4.0).powi(2)).abs() < 1e-8);
        assert!(r.lambda_min < 1e-3);
        // Four decades beyond the grid: out of reach.
        let r = solve_normalized(
            &spec("1*s^3"),
            1,
            4e-4,
            &grid(1e-3, 1e1, 4),
            &ShootingControls::default(),
        )
        .unwrap();
        assert!(r.roots.is_empty());
        assert_eq!(r.status, PredictionStatus::Unmet);
    }

    #[test]
    fn extension_rule() {
        assert!(should_extend(1.0, 0.1, 0.5, true));
        assert!(!should_extend(0.05, 0.1, 0.5, true));
        assert!(should_extend(0.05, 0.1, 0.5, false));
        assert!(should_extend(1.0, 0.1, -0.5, false));
        assert!(!should_extend(1.0, 0.1, 0.0, false));
    }

    #[test]
    fn mixed_case_two_roots_and_none_above() {
        let s = spec("1*s^2 + 1*s^5");
        let ctl = ShootingControls::default();
        let g = grid(1e-3, 1e3, 8);
        let probe = solve_normalized(&s, 2, 1.0, &g, &ctl).unwrap();
        let star = probe.observed.unwrap().extremum.unwrap();
        assert_eq!(star.kind, ExtremumKind::Maximum);
        let half = solve_normalized(&s, 2, 0.5 * star.mass, &g, &ctl).unwrap();
        assert!(half.roots.len() >= 2);
        assert!(half.roots.iter().any(|r| r.lambda < star.lambda));
        assert!(half.roots.iter().any(|r| r.lambda > star.lambda));
        for r in &half.roots {
            assert!((r.point.mass - 0.5 * star.mass).abs() <= ROOT_TOL * 0.5 * star.mass);
            assert!(r.point.passes_gates());
        }
        assert_eq!(half.status, PredictionStatus::Met);
        let double = solve_normalized(&s, 2, 2.0 * star.mass, &g, &ctl).unwrap();
        assert!(double.roots.is_empty());
        assert_eq!(double.prediction.prediction, Prediction::NoSolutionForLargeA);
    }

    #[test]
    fn roots_stable_under_grid_halving() {
        let s = spec("1*s^2 + 1*s^3");
        let ctl = ShootingControls::default();
        let a = solve_normalized(&s, 2, 5.0, &grid(1e-2, 1e2, 8), &ctl).unwrap();
        let b = solve_normalized(&s, 2, 5.0, &grid(1e-2, 1e2, 4), &ctl).unwrap();
        assert_eq!(a.roots.len(), b.roots.len());
        for (x, y) in a.roots.iter().zip(&b.roots) {
            assert!(((x.lambda - y.lambda) / x.lambda).abs() < 1e-4);
        }
    }

    #[test]
    fn subcritical_case_is_onto() {
        let s = spec("1*s^2 + 1*s^2.5");
        let ctl = ShootingControls::default();
        for a in [1e-2, 1.0, 1e2] {
            let r = solve_normalized(&s, 2, a, &BranchGrid::new(1e-4, 1e4, 4).unwrap(), &ctl).unwrap();
            assert!(!r.roots.is_empty(), "a = {a}");
            assert_eq!(r.status, PredictionStatus::Met);
        }
    }

    #[test]
    fn rejects_nonpositive_mass() {
        let ctl = ShootingControls::default();
        for a in [0.0, -1.0, f64::NAN] {
            assert!(matches!(
                solve_normalized(&spec("1*s^3"), 1, a, &grid(1e-1, 1e1, 2), &ctl),
                Err(Error::NonPositiveMass(_))
            ));
        }
    }
}
