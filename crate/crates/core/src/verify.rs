//! The acceptance suite: closed-form oracles, scaling laws and property
//! checks run end to end, one [`CriterionResult`] per criterion.

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::branch::{locate_mass_extremum, rescale_profile, sweep_branch, BranchGrid, ExtremumKind, Regime};
use crate::diagnostics::{BranchPoint, IDENTITY_GATE};
use crate::error::{Error, Result};
use crate::ground_states::{kwong_ground_state_with, pure_power_mass_factor};
use crate::nonlinearity::{check_hypotheses, NonlinearitySpec};
use crate::normalized::{classify_case, solve_normalized, PredictionStatus, ROOT_TOL};
use crate::report::{ser17, ser17_opt};
use crate::shooting::{shoot_ground, ShootingControls};

const SQRT3_PI_2: f64 = 2.720_699_046_351_326_6;

#[derive(Debug, Clone, Serialize)]
pub struct Measurement {
    pub name: String,
    #[serde(serialize_with = "ser17")]
    pub value: f64,
    #[serde(serialize_with = "ser17_opt")]
    pub target: Option<f64>,
    #[serde(serialize_with = "ser17_opt")]
    pub tolerance: Option<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    /// A guaranteed number of normalized solutions was not found.
    pub prediction_unmet: bool,
    pub measurements: Vec<Measurement>,
    pub notes: Vec<String>,
}

impl CriterionResult {
    fn new(id: u32, title: &'static str) -> Self {
        Self {
            id,
            title,
            passed: true,
            prediction_unmet: false,
            measurements: Vec::new(),
            notes: Vec::new(),
        }
    }

    /// `|value - target| <= tol`.
    fn near(&mut self, name: impl Into<String>, value: f64, target: f64, tol: f64) {
        self.record(name, value, Some(target), Some(tol), (value - target).abs() <= tol);
    }

    /// `value < bound`.
    fn below(&mut self, name: impl Into<String>, value: f64, bound: f64) {
        self.record(name, value, None, Some(bound), value < bound);
    }

    /// `value <= bound`.
    fn at_most(&mut self, name: impl Into<String>, value: f64, bound: f64) {
        self.record(name, value, None, Some(bound), value <= bound);
    }

    fn check(&mut self, name: impl Into<String>, value: f64, ok: bool) {
        self.record(name, value, None, None, ok);
    }

    fn record(
        &mut self,
        name: impl Into<String>,
        value: f64,
        target: Option<f64>,
        tolerance: Option<f64>,
        passed: bool,
    ) {
        self.passed &= passed;
        self.measurements.push(Measurement {
            name: name.into(),
            value,
            target,
            tolerance,
            passed,
        });
    }

    fn budget(&mut self, elapsed: Duration, limit: Duration) {
        if elapsed > limit {
            self.passed = false;
            self.notes
                .push(format!("runtime budget of {} s exceeded", limit.as_secs()));
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub prediction_unmet: bool,
    pub criteria: Vec<CriterionResult>,
}

/// Diagnostics of every profile the suite produced.
#[derive(Default)]
struct Ledger {
    points: Vec<BranchPoint>,
}

impl Ledger {
    fn add(&mut self, p: BranchPoint) {
        self.points.push(p);
    }

    fn profile(&mut self, prof: &crate::profile::RadialProfile) -> Result<BranchPoint> {
        let p = BranchPoint::from_profile(prof)?;
        self.add(p);
        Ok(p)
    }
}

fn spec(text: &str) -> NonlinearitySpec {
    text.parse().expect("built-in model strings parse")
}

fn guard(id: u32, title: &'static str, body: impl FnOnce(&mut CriterionResult) -> Result<()>) -> CriterionResult {
    let mut c = CriterionResult::new(id, title);
    if let Err(e) = body(&mut c) {
        c.passed = false;
        c.notes.push(format!("error: {e}"));
    }
    c
}

fn c1(ctl: &ShootingControls, ledger: &mut Ledger) -> CriterionResult {
    guard(1, "one-dimensional cubic soliton", |c| {
        let p = shoot_ground(&spec("1*s^3"), 1, 1.0, ctl, None)?;
        let bp = ledger.profile(&p)?;
        c.near("u0", bp.sup, 2f64.sqrt(), 1e-8);
        c.near("mass", bp.mass, 4.0, 1e-6);
        let worst = (0..=20_000)
            .map(|i| {
                let r = 1e-3 * i as f64;
                (p.eval(r).0 - 2f64.sqrt() / r.cosh()).abs()
            })
            .fold(0.0, f64::max);
        c.below("sup_distance_0_20", worst, 1e-6);
        Ok(())
    })
}

fn c2(ctl: &ShootingControls, ledger: &mut Ledger) -> CriterionResult {
    guard(2, "pure-power mass law", |c| {
        let start = Instant::now();
        for (n, p) in [(1u32, 3.0), (3, 3.0)] {
            let s = NonlinearitySpec::pure_power(1.0, p)?;
            let base = ledger.profile(&shoot_ground(&s, n, 1.0, ctl, None)?)?.mass;
            for lam in [0.25, 4.0] {
                let m = ledger.profile(&shoot_ground(&s, n, lam, ctl, None)?)?.mass;
                let want = pure_power_mass_factor(n, p, lam)?;
                c.near(format!("ratio_N{n}_p{p}_lambda{lam}"), m / base, want, 1e-4 * want);
            }
        }
        c.budget(start.elapsed(), Duration::from_secs(10));
        Ok(())
    })
}

fn c3(ctl: &ShootingControls, ledger: &mut Ledger) -> CriterionResult {
    guard(3, "mass-critical constancy", |c| {
        let curve = sweep_branch(&spec("1*s^5"), 1, &BranchGrid::new(1e-2, 1e2, 16)?, ctl)?;
        c.check("failed_points", curve.failures.len() as f64, curve.failures.is_empty());
        let masses = curve.masses();
        for p in &curve.points {
            ledger.add(*p);
        }
        let max = masses.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = masses.iter().copied().fold(f64::INFINITY, f64::min);
        c.below("relative_variation", (max - min) / SQRT3_PI_2, 1e-4);
        let worst = masses.iter().map(|m| (m - SQRT3_PI_2).abs()).fold(0.0, f64::max);
        c.below("max_deviation_from_closed_form", worst / SQRT3_PI_2, 1e-4);
        Ok(())
    })
}

fn c4(ctl: &ShootingControls, ledger: &mut Ledger) -> CriterionResult {
    guard(4, "asymptotic exponents", |c| {
        let curve = sweep_branch(&spec("1*s^2 + 1*s^3"), 2, &BranchGrid::default(), ctl)?;
        for p in &curve.points {
            ledger.add(*p);
        }
        c.near("e0", curve.e0.unwrap_or(f64::NAN), 1.0, 0.05);
        c.near("einf", curve.einf.unwrap_or(f64::NAN), 0.0, 0.05);
        let last = curve
            .points
            .last()
            .filter(|p| p.lambda == 1e4)
            .ok_or_else(|| Error::ShootFailed("no converged point at lambda = 1e4".into()))?;
        let v = kwong_ground_state_with(2, 3.0, 1.0, ctl)?;
        ledger.profile(&v.profile)?;
        c.near("mass_at_1e4_over_V_mass", last.mass / v.mass, 1.0, 0.02);
        Ok(())
    })
}

fn c5(ctl: &ShootingControls, ledger: &mut Ledger) -> CriterionResult {
    guard(5, "mixed-case multiplicity", |c| {
        let start = Instant::now();
        let s = spec("1*s^2 + 1*s^5");
        let grid = BranchGrid::default();
        let curve = sweep_branch(&s, 2, &grid, ctl)?;
        for p in &curve.points {
            ledger.add(*p);
        }
        let ext = locate_mass_extremum(&curve, &s, 2, ctl)?
            .ok_or_else(|| Error::ShootFailed("no interior extremum on the mass curve".into()))?;
        c.check("interior_maximum", ext.lambda, ext.kind == ExtremumKind::Maximum);
        c.check("a_star", ext.mass, ext.mass > 0.0);

        let half = solve_normalized(&s, 2, 0.5 * ext.mass, &grid, ctl)?;
        c.check("roots_at_half_a_star", half.roots.len() as f64, half.roots.len() >= 2);
        c.check(
            "root_below_lambda_star",
            half.roots.first().map_or(f64::NAN, |r| r.lambda),
            half.roots.iter().any(|r| r.lambda < ext.lambda),
        );
        c.check(
            "root_above_lambda_star",
            half.roots.last().map_or(f64::NAN, |r| r.lambda),
            half.roots.iter().any(|r| r.lambda > ext.lambda),
        );
        for (k, r) in half.roots.iter().enumerate() {
            ledger.add(r.point);
            let a = 0.5 * ext.mass;
            c.at_most(
                format!("root{k}_relative_mass_error"),
                (r.point.mass - a).abs() / a,
                ROOT_TOL,
            );
        }
        let double = solve_normalized(&s, 2, 2.0 * ext.mass, &grid, ctl)?;
        c.check(
            "roots_at_twice_a_star",
            double.roots.len() as f64,
            double.roots.is_empty(),
        );
        c.prediction_unmet = half.status == PredictionStatus::Unmet || double.status == PredictionStatus::Unmet;
        c.budget(start.elapsed(), Duration::from_secs(120));
        Ok(())
    })
}

fn c6(ledger: &Ledger) -> CriterionResult {
    guard(6, "identity residual suite", |c| {
        let worst = |f: fn(&BranchPoint) -> f64| ledger.points.iter().map(f).fold(0.0, f64::max);
        c.check(
            "profiles_checked",
            ledger.points.len() as f64,
            !ledger.points.is_empty(),
        );
        c.below("max_pohozaev_residual", worst(|p| p.pohozaev_residual), IDENTITY_GATE);
        c.below("max_nehari_residual", worst(|p| p.nehari_residual), IDENTITY_GATE);
        c.below("max_mp_gap", worst(|p| p.mp_gap), IDENTITY_GATE);
        Ok(())
    })
}

fn c7(ctl: &ShootingControls, ledger: &mut Ledger) -> CriterionResult {
    guard(7, "coefficient scaling of ground states", |c| {
        let base = kwong_ground_state_with(1, 3.0, 1.0, ctl)?;
        let four = kwong_ground_state_with(1, 3.0, 4.0, ctl)?;
        ledger.profile(&base.profile)?;
        ledger.profile(&four.profile)?;
        let worst = four
            .profile
            .nodes
            .iter()
            .map(|node| (node.u - 0.5 * base.profile.eval(node.r).0).abs())
            .fold(0.0, f64::max);
        c.below("nodewise_distance", worst, 1e-8);
        c.near("mass", four.mass, 1.0, 1e-6);
        Ok(())
    })
}

fn c8(ctl: &ShootingControls, ledger: &mut Ledger) -> CriterionResult {
    guard(8, "rescaled convergence", |c| {
        let s = spec("1*s^2 + 1*s^5");
        let u = kwong_ground_state_with(2, 2.0, 1.0, ctl)?;
        ledger.profile(&u.profile)?;
        let mut prev = f64::INFINITY;
        let mut monotone = true;
        let mut last = f64::NAN;
        for lam in [1e-1, 1e-2, 1e-3] {
            let p = shoot_ground(&s, 2, lam, ctl, None)?;
            ledger.profile(&p)?;
            let d = rescale_profile(&p, Regime::SmallLambda)?.sup_distance(&u.profile);
            c.check(format!("distance_lambda_{lam:e}"), d, true);
            monotone &= d < prev;
            prev = d;
            last = d;
        }
        c.check("decreasing", if monotone { 1.0 } else { 0.0 }, monotone);
        c.below("distance_at_1e-3", last, 0.05);
        Ok(())
    })
}

fn c9(ctl: &ShootingControls) -> CriterionResult {
    guard(9, "input validation", |c| {
        let cubic = spec("1*s^3");
        for lam in [0.0, -1.0] {
            let err = shoot_ground(&cubic, 1, lam, ctl, None).err();
            let ok = matches!(&err, Some(e @ Error::NonPositiveFrequency(_))
                if e.to_string().contains("no positive solutions exist for lambda <= 0"));
            c.check(format!("lambda_{lam}_rejected"), lam, ok);
        }
        for a in [0.0, -1.0] {
            let err = solve_normalized(&cubic, 1, a, &BranchGrid::new(0.1, 10.0, 2)?, ctl).err();
            c.check(
                format!("a_{a}_rejected"),
                a,
                matches!(err, Some(Error::NonPositiveMass(_))),
            );
        }
        let quintic = spec("1*s^5");
        let report = check_hypotheses(&quintic, 3)?;
        let out_of_scope = !report.beta_subcritical
            && matches!(classify_case(&quintic, 3), Err(Error::OutOfScope(_)))
            && matches!(shoot_ground(&quintic, 3, 1.0, ctl, None), Err(Error::OutOfScope(_)));
        c.check("quintic_N3_rejected", report.asymptotics.beta, out_of_scope);
        Ok(())
    })
}

fn criteria_one_to_nine(ctl: &ShootingControls) -> Vec<CriterionResult> {
    let mut ledger = Ledger::default();
    let mut out = vec![
        c1(ctl, &mut ledger),
        c2(ctl, &mut ledger),
        c3(ctl, &mut ledger),
        c4(ctl, &mut ledger),
        c5(ctl, &mut ledger),
    ];
    out.push(c6(&ledger));
    out.push(c7(ctl, &mut ledger));
    out.push(c8(ctl, &mut ledger));
    out.push(c9(ctl));
    out
}

/// Runs the whole suite. Criterion 10 repeats criteria 1-9 and compares the
/// serialized results byte for byte.
pub fn run_verify(ctl: &ShootingControls) -> Result<VerifyReport> {
    let first = criteria_one_to_nine(ctl);
    let second = criteria_one_to_nine(ctl);
    let a = serde_json::to_string(&first)?;
    let b = serde_json::to_string(&second)?;
    let mut criteria = first;
    let mut c10 = CriterionResult::new(10, "determinism");
    c10.check("serialized_bytes", a.len() as f64, a == b);
    criteria.push(c10);
    Ok(VerifyReport {
        passed: criteria.iter().all(|c| c.passed),
        prediction_unmet: criteria.iter().any(|c| c.prediction_unmet),
        criteria,
    })
}

/// `PASS`/`FAIL` line for a criterion.
pub fn summary_line(c: &CriterionResult) -> String {
    let worst = c
        .measurements
        .iter()
        .filter(|m| !m.passed)
        .map(|m| format!("{}={:e}", m.name, m.value))
        .collect::<Vec<_>>();
    let mut line = format!(
        "criterion {:>2} [{}] {}",
        c.id,
        if c.passed { "PASS" } else { "FAIL" },
        c.title
    );
    if !worst.is_empty() {
        line.push_str(&format!(" (failed: {})", worst.join(", ")));
    }
    for n in &c.notes {
        line.push_str(&format!(" ; {n}"));
    }
    line
}
