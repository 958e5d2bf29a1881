//! Command-line front end: flag and config-file parsing, dispatch, and the
//! artifact files each subcommand writes.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::branch::{fit_asymptotic_exponents, locate_mass_extremum, sweep_branch, BranchGrid, MassCurve};
use crate::diagnostics::BranchPoint;
use crate::error::{Error, Result};
use crate::ground_states::{kwong_ground_state_with, GroundStateSummary};
use crate::nonlinearity::{check_hypotheses, HypothesisReport, NonlinearitySpec};
use crate::normalized::{classify_case, solve_normalized, CaseLabel, PredictionStatus};
use crate::report::{profile_csv, profile_file_name, ser17, to_json, write_artifact};
use crate::shooting::ShootingControls;
use crate::verify::{run_verify, summary_line};

/// Environment variable holding the default output directory.
pub const OUT_ENV: &str = "NORMBRANCH_OUT";
pub const DEFAULT_OUT: &str = "normbranch-out";

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_PREDICTION_UNMET: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    /// Check the hypotheses on g and classify the case.
    Check,
    /// Ground state at one frequency.
    Shoot,
    /// Mass curve over a frequency grid.
    Branch,
    /// Reference ground state of -ΔU + U = μ U^p.
    GroundState,
    /// Normalized solutions with prescribed mass.
    Normalize,
    /// Acceptance suite.
    Verify,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Check => "check",
            CommandKind::Shoot => "shoot",
            CommandKind::Branch => "branch",
            CommandKind::GroundState => "ground-state",
            CommandKind::Normalize => "normalize",
            CommandKind::Verify => "verify",
        }
    }
}

#[derive(Debug, Default, Clone, Args)]
struct Options {
    /// Nonlinearity, e.g. "1*s^2 + 1*s^5".
    #[arg(long, global = true)]
    g: Option<String>,
    /// Space dimension.
    #[arg(long = "N", global = true)]
    n: Option<u32>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    lambda: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    lambda_min: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    lambda_max: Option<f64>,
    /// Grid points per decade.
    #[arg(long, global = true)]
    ppd: Option<u32>,
    /// Target mass.
    #[arg(long, global = true, allow_hyphen_values = true)]
    a: Option<f64>,
    /// Exponent of the reference ground state.
    #[arg(long, global = true)]
    p: Option<f64>,
    /// Coefficient of the reference ground state.
    #[arg(long, global = true)]
    mu: Option<f64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    step_tol: Option<f64>,
    #[arg(long, global = true)]
    bisect_tol: Option<f64>,
    #[arg(long, global = true)]
    r_max: Option<f64>,
    #[arg(long, global = true)]
    decay_eps: Option<f64>,
}

#[derive(Debug, Parser)]
#[command(
    name = "normbranch",
    version,
    about = "Positive normalized solutions of -Δu + λu = g(u)"
)]
struct Cli {
    #[command(subcommand)]
    command: CommandKind,
    /// `key = value` file; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    options: Options,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: CommandKind,
    pub spec: Option<NonlinearitySpec>,
    pub dimension: Option<u32>,
    pub lambda: Option<f64>,
    pub grid: BranchGrid,
    pub a: Option<f64>,
    pub p: Option<f64>,
    pub mu: f64,
    pub out: PathBuf,
    pub controls: ShootingControls,
    pub threads: Option<usize>,
}

const FILE_KEYS: &[&str] = &[
    "g",
    "N",
    "lambda",
    "lambda-min",
    "lambda-max",
    "ppd",
    "a",
    "p",
    "mu",
    "out",
    "threads",
    "step-tol",
    "bisect-tol",
    "r-max",
    "decay-eps",
];

/// Parses the `key = value` grammar; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    let mut bad = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bad.push(format!("line {}: expected key = value", lineno + 1));
            continue;
        };
        let key = k.trim().replace('_', "-");
        let key = if key.eq_ignore_ascii_case("n") {
            "N".to_string()
        } else {
            key
        };
        if !FILE_KEYS.contains(&key.as_str()) {
            bad.push(format!("unknown key '{}'", k.trim()));
            continue;
        }
        map.insert(key, v.trim().to_string());
    }
    if !bad.is_empty() {
        return Err(Error::Usage(bad.join("; ")));
    }
    Ok(map)
}

fn merge(opts: &mut Options, file: &BTreeMap<String, String>) -> Result<()> {
    fn num<T: std::str::FromStr>(
        slot: &mut Option<T>,
        key: &str,
        file: &BTreeMap<String, String>,
        bad: &mut Vec<String>,
    ) {
        if slot.is_some() {
            return;
        }
        if let Some(v) = file.get(key) {
            match v.parse() {
                Ok(x) => *slot = Some(x),
                Err(_) => bad.push(format!("{key} = {v}")),
            }
        }
    }
    let mut bad = Vec::new();
    if opts.g.is_none() {
        opts.g = file.get("g").cloned();
    }
    if opts.out.is_none() {
        opts.out = file.get("out").map(PathBuf::from);
    }
    num(&mut opts.n, "N", file, &mut bad);
    num(&mut opts.lambda, "lambda", file, &mut bad);
    num(&mut opts.lambda_min, "lambda-min", file, &mut bad);
    num(&mut opts.lambda_max, "lambda-max", file, &mut bad);
    num(&mut opts.ppd, "ppd", file, &mut bad);
    num(&mut opts.a, "a", file, &mut bad);
    num(&mut opts.p, "p", file, &mut bad);
    num(&mut opts.mu, "mu", file, &mut bad);
    num(&mut opts.threads, "threads", file, &mut bad);
    num(&mut opts.step_tol, "step-tol", file, &mut bad);
    num(&mut opts.bisect_tol, "bisect-tol", file, &mut bad);
    num(&mut opts.r_max, "r-max", file, &mut bad);
    num(&mut opts.decay_eps, "decay-eps", file, &mut bad);
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Error::Usage(format!(
            "malformed values in config file: {}",
            bad.join(", ")
        )))
    }
}

/// Flags, then the optional config file, then defaults.
pub fn parse_config<I, T>(argv: I) -> Result<RunConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| Error::Usage(e.to_string()))?;
    let mut opts = cli.options;
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path)?;
        merge(&mut opts, &parse_config_text(&text)?)?;
    }
    build(cli.command, opts)
}

fn build(command: CommandKind, opts: Options) -> Result<RunConfig> {
    let mut missing = Vec::new();
    let needs = |cond: bool, key: &'static str, missing: &mut Vec<&'static str>| {
        if cond {
            missing.push(key);
        }
    };
    use CommandKind::*;
    let wants_spec = matches!(command, Check | Shoot | Branch | Normalize);
    needs(wants_spec && opts.g.is_none(), "g", &mut missing);
    needs(command != Verify && opts.n.is_none(), "N", &mut missing);
    needs(command == Shoot && opts.lambda.is_none(), "lambda", &mut missing);
    needs(command == Normalize && opts.a.is_none(), "a", &mut missing);
    needs(command == GroundState && opts.p.is_none(), "p", &mut missing);
    if !missing.is_empty() {
        return Err(Error::Usage(format!(
            "{} requires: {}",
            command.name(),
            missing.iter().map(|k| format!("--{k}")).collect::<Vec<_>>().join(", ")
        )));
    }

    let spec = opts.g.as_deref().map(str::parse::<NonlinearitySpec>).transpose()?;
    if let Some(lam) = opts.lambda {
        if !(lam > 0.0) {
            return Err(Error::NonPositiveFrequency(lam));
        }
    }
    if let Some(a) = opts.a {
        if !(a > 0.0) {
            return Err(Error::NonPositiveMass(a));
        }
    }
    if opts.n == Some(0) {
        return Err(Error::Domain("dimension N must be at least 1".into()));
    }
    let defaults = BranchGrid::default();
    let grid = BranchGrid::new(
        opts.lambda_min.unwrap_or(defaults.lambda_min),
        opts.lambda_max.unwrap_or(defaults.lambda_max),
        opts.ppd.unwrap_or(defaults.points_per_decade),
    )?;
    let mut controls = ShootingControls::default();
    if let Some(v) = opts.step_tol {
        controls.step_tol = v;
    }
    if let Some(v) = opts.bisect_tol {
        controls.bisect_tol = v;
    }
    if opts.r_max.is_some() {
        controls.r_max = opts.r_max;
    }
    if let Some(v) = opts.decay_eps {
        controls.decay_eps = v;
    }
    controls.validate()?;
    if opts.threads == Some(0) {
        return Err(Error::Usage("--threads must be positive".into()));
    }
    let out = opts
        .out
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    Ok(RunConfig {
        command,
        spec,
        dimension: opts.n,
        lambda: opts.lambda,
        grid,
        a: opts.a,
        p: opts.p,
        mu: opts.mu.unwrap_or(1.0),
        out,
        controls,
        threads: opts.threads,
    })
}

#[derive(Serialize)]
struct CheckResult<'a> {
    g: String,
    hypotheses: &'a HypothesisReport,
    case: CaseLabel,
    #[serde(serialize_with = "ser17")]
    p_bar: f64,
}

#[derive(Serialize)]
struct ShootResult<'a> {
    g: String,
    #[serde(rename = "N")]
    dimension: u32,
    point: BranchPoint,
    #[serde(serialize_with = "ser17")]
    residual_max: f64,
    #[serde(serialize_with = "ser17")]
    match_radius: f64,
    #[serde(serialize_with = "ser17")]
    tail_rate: f64,
    nodes: usize,
    warnings: &'a [String],
    profile_csv: String,
}

#[derive(Serialize)]
struct BranchResult<'a> {
    g: String,
    #[serde(rename = "N")]
    dimension: u32,
    #[serde(serialize_with = "crate::report::ser17_opt")]
    e0: Option<f64>,
    #[serde(serialize_with = "crate::report::ser17_opt")]
    einf: Option<f64>,
    #[serde(serialize_with = "ser17")]
    theory_e0: f64,
    #[serde(serialize_with = "ser17")]
    theory_einf: f64,
    extremum: Option<crate::branch::MassExtremum>,
    grid: BranchGrid,
    points: usize,
    failures: &'a [crate::branch::FailedPoint],
    warnings: &'a [String],
    degenerate: bool,
}

#[derive(Serialize)]
struct NormalizeResult<'a> {
    g: String,
    report: &'a crate::normalized::CaseReport,
    profiles: Vec<String>,
}

/// Result of one run: exit code plus the paths written.
#[derive(Debug)]
pub struct RunOutcome {
    pub code: i32,
    pub files: Vec<PathBuf>,
    pub messages: Vec<String>,
}

fn exit_code(e: &Error) -> i32 {
    if e.is_domain() {
        EXIT_DOMAIN
    } else {
        EXIT_NUMERICAL
    }
}

pub fn run(config: &RunConfig) -> RunOutcome {
    let mut outcome = RunOutcome {
        code: EXIT_OK,
        files: Vec::new(),
        messages: Vec::new(),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads.unwrap_or(0))
        .build();
    let result = match pool {
        Ok(pool) => pool.install(|| dispatch(config, &mut outcome)),
        Err(e) => Err(Error::Usage(format!("cannot start worker pool: {e}"))),
    };
    if let Err(e) = result {
        outcome.code = exit_code(&e);
        outcome.messages.push(format!("error: {e}"));
    }
    outcome
}

fn emit(outcome: &mut RunOutcome, dir: &Path, name: &str, contents: &str) -> Result<()> {
    outcome.files.push(write_artifact(dir, name, contents)?);
    Ok(())
}

fn dispatch(config: &RunConfig, outcome: &mut RunOutcome) -> Result<()> {
    let out = &config.out;
    let ctl = &config.controls;
    let n = config.dimension.unwrap_or(1);
    let spec = || {
        config
            .spec
            .clone()
            .ok_or_else(|| Error::Usage("--g is required".into()))
    };
    match config.command {
        CommandKind::Check => {
            let s = spec()?;
            let hyp = check_hypotheses(&s, n)?;
            let case = classify_case(&s, n)?;
            let body = CheckResult {
                g: s.to_string(),
                hypotheses: &hyp,
                case,
                p_bar: crate::normalized::mass_critical_exponent(n),
            };
            emit(outcome, out, "report.json", &to_json("check", &body)?)?;
            outcome.messages.push(format!("case {case}"));
        }
        CommandKind::Shoot => {
            let s = spec()?;
            let lam = config
                .lambda
                .ok_or_else(|| Error::Usage("--lambda is required".into()))?;
            let prof = crate::shooting::shoot_ground(&s, n, lam, ctl, None)?;
            let point = BranchPoint::from_profile(&prof)?;
            let csv_name = profile_file_name("shoot", lam);
            emit(outcome, out, &csv_name, &profile_csv(&prof))?;
            let body = ShootResult {
                g: s.to_string(),
                dimension: n,
                point,
                residual_max: prof.residual_max,
                match_radius: prof.match_radius(),
                tail_rate: prof.tail.map_or(f64::NAN, |t| t.rate),
                nodes: prof.nodes.len(),
                warnings: &prof.warnings,
                profile_csv: csv_name,
            };
            emit(outcome, out, "report.json", &to_json("shoot", &body)?)?;
            outcome
                .messages
                .push(format!("u(0) = {:.12e}, mass = {:.12e}", point.sup, point.mass));
        }
        CommandKind::Branch => {
            let s = spec()?;
            let (curve, degenerate) = match sweep_branch(&s, n, &config.grid, ctl) {
                Ok(c) => (c, None),
                Err(Error::SweepDegenerate { failed, total, partial }) => (
                    *partial,
                    Some(Error::SweepDegenerate {
                        failed,
                        total,
                        partial: Box::new(empty_curve(config.grid)),
                    }),
                ),
                Err(e) => return Err(e),
            };
            let fit = fit_asymptotic_exponents(&curve, &s, n);
            let extremum = if degenerate.is_none() {
                locate_mass_extremum(&curve, &s, n, ctl)?
            } else {
                None
            };
            emit(outcome, out, "branch.csv", &curve.to_csv())?;
            let body = BranchResult {
                g: s.to_string(),
                dimension: n,
                e0: fit.e0,
                einf: fit.einf,
                theory_e0: fit.theory_e0,
                theory_einf: fit.theory_einf,
                extremum,
                grid: curve.grid,
                points: curve.points.len(),
                failures: &curve.failures,
                warnings: &curve.warnings,
                degenerate: degenerate.is_some(),
            };
            emit(outcome, out, "report.json", &to_json("branch", &body)?)?;
            if let Some(e) = degenerate {
                return Err(e);
            }
        }
        CommandKind::GroundState => {
            let p = config.p.ok_or_else(|| Error::Usage("--p is required".into()))?;
            let state = kwong_ground_state_with(n, p, config.mu, ctl)?;
            emit(
                outcome,
                out,
                &profile_file_name("ground_state", 1.0),
                &profile_csv(&state.profile),
            )?;
            let summary: GroundStateSummary = state.summary();
            emit(outcome, out, "report.json", &to_json("ground-state", &summary)?)?;
            outcome.messages.push(format!(
                "mass = {:.12e}, U(0) = {:.12e}",
                state.mass, state.central_value
            ));
        }
        CommandKind::Normalize => {
            let s = spec()?;
            let a = config.a.ok_or_else(|| Error::Usage("--a is required".into()))?;
            let report = solve_normalized(&s, n, a, &config.grid, ctl)?;
            let mut profiles = Vec::new();
            for (k, root) in report.roots.iter().enumerate() {
                let name = profile_file_name(&format!("root{k}"), root.lambda);
                emit(outcome, out, &name, &profile_csv(&root.profile))?;
                profiles.push(name);
            }
            let body = NormalizeResult {
                g: s.to_string(),
                report: &report,
                profiles,
            };
            emit(outcome, out, "report.json", &to_json("normalize", &body)?)?;
            outcome.messages.push(format!(
                "case {}: {} root(s), {}",
                report.case,
                report.roots.len(),
                report.status
            ));
            if report.status == PredictionStatus::Unmet {
                outcome.messages.extend(report.warnings.iter().cloned());
            }
        }
        CommandKind::Verify => {
            let report = run_verify(ctl)?;
            emit(outcome, out, "report.json", &to_json("verify", &report)?)?;
            for c in &report.criteria {
                outcome.messages.push(summary_line(c));
            }
            if report.prediction_unmet {
                outcome.code = EXIT_PREDICTION_UNMET;
            } else if !report.passed {
                outcome.code = EXIT_NUMERICAL;
            }
        }
    }
    Ok(())
}

fn empty_curve(grid: BranchGrid) -> MassCurve {
    MassCurve {
        grid,
        points: Vec::new(),
        failures: Vec::new(),
        e0: None,
        einf: None,
        warnings: Vec::new(),
    }
}

/// Entry point shared by the binary: parse, run, print, and return the exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    if let Err(e) = Cli::try_parse_from(&argv) {
        if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
            print!("{e}");
            return EXIT_OK;
        }
    }
    let config = match parse_config(argv) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let outcome = run(&config);
    for m in &outcome.messages {
        if m.starts_with("error:") {
            eprintln!("{m}");
        } else {
            println!("{m}");
        }
    }
    outcome.code
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<RunConfig> {
        parse_config(std::iter::once("normbranch").chain(args.iter().copied()))
    }

    #[test]
    fn shoot_flags() {
        let c = parse(&["shoot", "--g", "1*s^3", "--N", "1", "--lambda", "1"]).unwrap();
        assert_eq!(c.command, CommandKind::Shoot);
        assert_eq!(c.dimension, Some(1));
        assert_eq!(c.lambda, Some(1.0));
        assert_eq!(c.spec.unwrap().to_string(), "1*s^3");
    }

    #[test]
    fn nonpositive_frequency_message() {
        let e = parse(&["shoot", "--g", "1*s^3", "--N", "1", "--lambda", "-1"]).unwrap_err();
        assert!(e.to_string().contains("no positive solutions exist for lambda <= 0"));
        assert!(e.is_domain());
        let e = parse(&["shoot", "--g", "1*s^3", "--N", "1", "--lambda", "0"]).unwrap_err();
        assert!(matches!(e, Error::NonPositiveFrequency(_)));
    }

    #[test]
    fn nonpositive_mass() {
        let e = parse(&["normalize", "--g", "1*s^3", "--N", "1", "--a", "0"]).unwrap_err();
        assert!(matches!(e, Error::NonPositiveMass(_)));
        assert!(e.is_domain());
    }

    #[test]
    fn missing_and_unknown_flags() {
        let e = parse(&["normalize", "--g", "1*s^3"]).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("--N") && msg.contains("--a"), "{msg}");
        assert!(matches!(parse(&["shoot", "--bogus", "1"]), Err(Error::Usage(_))));
        assert!(matches!(
            parse(&["shoot", "--g", "1*x^3", "--N", "1", "--lambda", "1"]),
            Err(Error::InvalidSpec(_))
        ));
    }

    #[test]
    fn config_file_and_precedence() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        fs::write(
            &path,
            "# sample\ng = 1*s^2 + 1*s^5\nN = 2\nlambda_min = 0.01  # low end\nlambda-max = 100\nppd = 4\na = 3\n",
        )
        .unwrap();
        let p = path.to_str().unwrap();
        let c = parse(&["normalize", "--config", p, "--a", "5"]).unwrap();
        assert_eq!(c.a, Some(5.0));
        assert_eq!(c.dimension, Some(2));
        assert_eq!(c.grid, BranchGrid::new(0.01, 100.0, 4).unwrap());
    }

    #[test]
    fn config_file_errors_list_keys() {
        assert!(parse_config_text("g = 1*s^3\nfoo = 1\nbar = 2")
            .unwrap_err()
            .to_string()
            .contains("foo"));
        assert!(parse_config_text("just words").is_err());
        assert_eq!(parse_config_text("  # only comments\n\n").unwrap().len(), 0);
    }

    #[test]
    fn output_directory_sources() {
        let c = parse(&["verify", "--out", "/tmp/x"]).unwrap();
        assert_eq!(c.out, PathBuf::from("/tmp/x"));
    }

    #[test]
    fn supercritical_check_is_domain_error() {
        let dir = tempfile::tempdir().unwrap();
        let c = parse(&[
            "check",
            "--g",
            "1*s^5",
            "--N",
            "3",
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .unwrap();
        assert_eq!(run(&c).code, EXIT_DOMAIN);
    }

    #[test]
    fn shoot_run_writes_one_csv_and_one_json() {
        let dir = tempfile::tempdir().unwrap();
        let c = parse(&[
            "shoot",
            "--g",
            "1*s^3",
            "--N",
            "1",
            "--lambda",
            "1",
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .unwrap();
        let o = run(&c);
        assert_eq!(o.code, EXIT_OK, "{:?}", o.messages);
        let mut names: Vec<String> = fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        names.sort();
        assert_eq!(names.len(), 2);
        assert!(names[0].starts_with("profile_") && names[0].ends_with(".csv"));
        assert_eq!(names[1], "report.json");
    }

    #[test]
    fn degenerate_sweep_exits_two_with_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let c = parse(&[
            "branch",
            "--g",
            "1*s^3",
            "--N",
            "2",
            "--lambda-min",
            "1",
            "--lambda-max",
            "10",
            "--ppd",
            "2",
            "--r-max",
            "1e-3",
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .unwrap();
        let o = run(&c);
        assert_eq!(o.code, EXIT_NUMERICAL, "{:?}", o.messages);
        let csv = fs::read_to_string(dir.path().join("branch.csv")).unwrap();
        assert_eq!(csv.lines().count(), 1 + 3);
        assert!(csv.lines().skip(1).all(|l| !l.ends_with(",ok")));
    }
}
