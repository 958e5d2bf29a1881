//! Power-sum nonlinearities `g(s) = Σ μᵢ s^{pᵢ}` and the growth hypotheses
//! the rest of the solver relies on.
//!
//! `g` is extended by zero to `s ≤ 0`. With every `μᵢ > 0` and `pᵢ > 1`, `g` is
//! positive on `(0, ∞)`, `C¹` at the origin, and its primitive `G` is closed
//! form. The small- and large-`s` behaviour is summarised by the exponents
//! `α = 1 + min pᵢ` and `β = 1 + max pᵢ` (so that `g(s) ~ μ₁ s^{α-1}` near zero
//! and `g(s) ~ μ₂ s^{β-1}` at infinity).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerTerm {
    pub coef: f64,
    pub exponent: f64,
}

/// Exponents and leading coefficients of `g` at zero (`α`, `μ₁`) and at
/// infinity (`β`, `μ₂`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticData {
    pub alpha: f64,
    pub mu1: f64,
    pub beta: f64,
    pub mu2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonlinearitySpec {
    terms: Vec<PowerTerm>,
    overrides: Option<AsymptoticData>,
}

impl NonlinearitySpec {
    /// Builds a spec from `(coefficient, exponent)` pairs. Terms sharing an
    /// exponent are merged; terms are kept sorted by exponent.
    pub fn new(terms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut out: Vec<PowerTerm> = Vec::new();
        for (coef, exponent) in terms {
            if !coef.is_finite() || coef <= 0.0 {
                return Err(Error::InvalidSpec(format!(
                    "coefficient must be finite and positive, got {coef}"
                )));
            }
            if !exponent.is_finite() || exponent <= 1.0 {
                return Err(Error::InvalidSpec(format!(
                    "exponent must be finite and greater than 1, got {exponent}"
                )));
            }
            match out.iter_mut().find(|t| t.exponent == exponent) {
                Some(t) => t.coef += coef,
                None => out.push(PowerTerm { coef, exponent }),
            }
        }
        if out.is_empty() {
            return Err(Error::InvalidSpec("empty term list".into()));
        }
        out.sort_by(|a, b| a.exponent.total_cmp(&b.exponent));
        Ok(Self {
            terms: out,
            overrides: None,
        })
    }

    /// Single-term model `μ s^p`.
    pub fn pure_power(coef: f64, exponent: f64) -> Result<Self> {
        Self::new([(coef, exponent)])
    }

    /// Declares the asymptotic data explicitly instead of reading it off the
    /// power sum. Only classification and the theoretical exponents use the
    /// declared values; `g` itself is still evaluated from the terms.
    pub fn with_overrides(mut self, data: AsymptoticData) -> Result<Self> {
        let ok = [data.alpha, data.mu1, data.beta, data.mu2]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0);
        if !ok || data.alpha <= 2.0 || data.beta <= 2.0 {
            return Err(Error::InvalidSpec(
                "declared asymptotic data need alpha, beta > 2 and mu1, mu2 > 0".into(),
            ));
        }
        self.overrides = Some(data);
        Ok(self)
    }

    pub fn terms(&self) -> &[PowerTerm] {
        &self.terms
    }

    pub fn overrides(&self) -> Option<&AsymptoticData> {
        self.overrides.as_ref()
    }

    pub fn is_pure_power(&self) -> bool {
        self.terms.len() == 1
    }

    /// `g(s)`, zero for `s ≤ 0`.
    #[inline]
    pub fn g(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        self.terms.iter().map(|t| t.coef * s.powf(t.exponent)).sum()
    }

    /// `g'(s)`, zero for `s ≤ 0`.
    #[inline]
    pub fn g_prime(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        self.terms
            .iter()
            .map(|t| t.coef * t.exponent * s.powf(t.exponent - 1.0))
            .sum()
    }

    /// `G(s) = ∫₀ˢ g`, zero for `s ≤ 0`.
    #[inline]
    pub fn big_g(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        self.terms
            .iter()
            .map(|t| t.coef * s.powf(t.exponent + 1.0) / (t.exponent + 1.0))
            .sum()
    }

    pub fn eval_g(&self, s: f64) -> Result<f64> {
        if !s.is_finite() {
            return Err(Error::Domain(format!("g evaluated at non-finite s = {s}")));
        }
        Ok(self.g(s))
    }

    pub fn eval_g_prime(&self, s: f64) -> Result<f64> {
        if !s.is_finite() || s < 0.0 {
            return Err(Error::Domain(format!("g' needs finite s >= 0, got {s}")));
        }
        Ok(self.g_prime(s))
    }

    #[allow(non_snake_case)]
    pub fn eval_G(&self, s: f64) -> Result<f64> {
        if !s.is_finite() || s < 0.0 {
            return Err(Error::Domain(format!("G needs finite s >= 0, got {s}")));
        }
        Ok(self.big_g(s))
    }

    /// `(α, μ₁, β, μ₂)`, taken from the declared overrides when present.
    pub fn asymptotic_exponents(&self) -> AsymptoticData {
        if let Some(d) = self.overrides {
            return d;
        }
        let lo = self.terms[0];
        let hi = self.terms[self.terms.len() - 1];
        AsymptoticData {
            alpha: 1.0 + lo.exponent,
            mu1: lo.coef,
            beta: 1.0 + hi.exponent,
            mu2: hi.coef,
        }
    }

    /// Same model with every coefficient rescaled as `μᵢ ↦ μᵢ·a^{pᵢ-1}/λ`,
    /// i.e. the nonlinearity seen by `w = u/a` after dividing the equation by
    /// `λ a`.
    pub(crate) fn rescaled(&self, amplitude: f64, lambda: f64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| PowerTerm {
                    coef: t.coef * amplitude.powf(t.exponent - 1.0) / lambda,
                    exponent: t.exponent,
                })
                .collect(),
            overrides: None,
        }
    }

    /// Multiplies every coefficient by `factor`.
    pub fn scaled_coefficients(&self, factor: f64) -> Result<Self> {
        let mut out = Self::new(self.terms.iter().map(|t| (t.coef * factor, t.exponent)))?;
        out.overrides = self.overrides.map(|mut d| {
            d.mu1 *= factor;
            d.mu2 *= factor;
            d
        });
        Ok(out)
    }
}

impl fmt::Display for NonlinearitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{}*s^{}", t.coef, t.exponent)?;
        }
        Ok(())
    }
}

impl FromStr for NonlinearitySpec {
    type Err = Error;

    /// Parses `g = 1*s^2 + 0.5*s^3.5`; the leading `g =` is optional.
    fn from_str(text: &str) -> Result<Self> {
        let body = text.trim();
        let body = match body.strip_prefix('g') {
            Some(rest) if rest.trim_start().starts_with('=') => rest.trim_start()[1..].trim_start(),
            _ => body,
        };
        if body.is_empty() {
            return Err(Error::InvalidSpec("empty nonlinearity string".into()));
        }
        let mut terms = Vec::new();
        for raw in body.split('+') {
            let term: String = raw.chars().filter(|c| !c.is_whitespace()).collect();
            let (coef, exponent) = term
                .split_once("*s^")
                .ok_or_else(|| Error::InvalidSpec(format!("malformed term '{}'", raw.trim())))?;
            let coef: f64 = coef
                .parse()
                .map_err(|_| Error::InvalidSpec(format!("bad coefficient in '{}'", raw.trim())))?;
            let exponent: f64 = exponent
                .parse()
                .map_err(|_| Error::InvalidSpec(format!("bad exponent in '{}'", raw.trim())))?;
            terms.push((coef, exponent));
        }
        Self::new(terms)
    }
}

/// How (or whether) the absence of positive radial decreasing solutions of
/// `-Δu = g(u)` is established.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum G3Status {
    ProvedByDimension,
    ProvedByExponent,
    SampledSubcriticalQuotient,
    Unverified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub dimension: u32,
    pub g1_ok: bool,
    pub g2_ok: bool,
    pub asymptotics: AsymptoticData,
    pub g3_status: G3Status,
    /// Sobolev exponent `2N/(N-2)`; `None` stands for `+∞` (`N ≤ 2`).
    pub critical_exponent: Option<f64>,
    pub alpha_subcritical: bool,
    pub beta_subcritical: bool,
}

impl HypothesisReport {
    pub fn all_ok(&self) -> bool {
        self.g1_ok && self.g2_ok && self.g3_status != G3Status::Unverified
    }
}

/// `2* = 2N/(N-2)` for `N ≥ 3`, `None` (infinite) otherwise.
pub fn sobolev_exponent(n: u32) -> Option<f64> {
    (n >= 3).then(|| 2.0 * n as f64 / (n as f64 - 2.0))
}

const G3_SAMPLES: usize = 10_000;
const G3_LOG_MIN: f64 = -8.0;
const G3_LOG_MAX: f64 = 8.0;

pub fn check_hypotheses(spec: &NonlinearitySpec, n: u32) -> Result<HypothesisReport> {
    if n == 0 {
        return Err(Error::Domain("dimension N must be at least 1".into()));
    }
    let asym = spec.asymptotic_exponents();
    let crit = sobolev_exponent(n);
    let below = |e: f64| crit.is_none_or(|c| e < c);
    let alpha_subcritical = below(asym.alpha);
    let beta_subcritical = below(asym.beta);
    // Terms are validated on construction.
    let g1_ok = spec.terms.iter().all(|t| t.coef > 0.0 && t.exponent > 1.0);
    let g2_ok = asym.alpha > 2.0 && asym.beta > 2.0 && alpha_subcritical && beta_subcritical;

    let g3_status = match crit {
        None => G3Status::ProvedByDimension,
        Some(c) => {
            let nf = n as f64;
            if asym.alpha - 1.0 <= nf / (nf - 2.0) {
                G3Status::ProvedByExponent
            } else {
                let step = (G3_LOG_MAX - G3_LOG_MIN) / (G3_SAMPLES - 1) as f64;
                let holds = (0..G3_SAMPLES).all(|i| {
                    let s = 10f64.powf(G3_LOG_MIN + step * i as f64);
                    let lhs = s * spec.g(s);
                    let rhs = c * spec.big_g(s);
                    lhs <= rhs * (1.0 + 1e-12)
                });
                if holds {
                    G3Status::SampledSubcriticalQuotient
                } else {
                    G3Status::Unverified
                }
            }
        }
    };

    Ok(HypothesisReport {
        dimension: n,
        g1_ok,
        g2_ok,
        asymptotics: asym,
        g3_status,
        critical_exponent: crit,
        alpha_subcritical,
        beta_subcritical,
    })
}

/// Rejects models whose growth at infinity reaches the Sobolev exponent.
pub(crate) fn require_subcritical(spec: &NonlinearitySpec, n: u32) -> Result<AsymptoticData> {
    let report = check_hypotheses(spec, n)?;
    if !report.beta_subcritical || !report.alpha_subcritical {
        let c = report.critical_exponent.unwrap_or(f64::INFINITY);
        return Err(Error::OutOfScope(format!(
            "beta = {} must stay below 2* = {} in dimension {}",
            report.asymptotics.beta, c, n
        )));
    }
    Ok(report.asymptotics)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(text: &str) -> NonlinearitySpec {
        text.parse().unwrap()
    }

    /// Adaptive Simpson, used as an independent check of the closed-form `G`.
    fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        #[allow(clippy::too_many_arguments)]
        fn rec(
            f: &dyn Fn(f64) -> f64,
            a: f64,
            b: f64,
            fa: f64,
            fm: f64,
            fb: f64,
            whole: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let m = 0.5 * (a + b);
            let lm = 0.5 * (a + m);
            let rm = 0.5 * (m + b);
            let flm = f(lm);
            let frm = f(rm);
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                return left + right + (left + right - whole) / 15.0;
            }
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
        let fa = f(a);
        let fb = f(b);
        let fm = f(0.5 * (a + b));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        rec(f, a, b, fa, fm, fb, whole, tol, 50)
    }

    #[test]
    fn eval_g_examples() {
        assert_eq!(spec("1*s^2 + 1*s^5").eval_g(1.0).unwrap(), 2.0);
        assert_eq!(spec("1*s^2 + 1*s^5").eval_g(0.0).unwrap(), 0.0);
        assert!((spec("2*s^3").eval_g(0.5).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(spec("1*s^3").eval_g(-3.0).unwrap(), 0.0);
        assert!(matches!(spec("1*s^3").eval_g(f64::NAN), Err(Error::Domain(_))));
        assert!(matches!(spec("1*s^3").eval_g(f64::INFINITY), Err(Error::Domain(_))));
    }

    #[test]
    fn eval_g_prime_examples() {
        assert_eq!(spec("1*s^3").eval_g_prime(2.0).unwrap(), 12.0);
        assert_eq!(spec("1*s^2 + 1*s^5").eval_g_prime(0.0).unwrap(), 0.0);
        let s = 1e-6;
        let q = spec("1*s^2 + 1*s^5").eval_g_prime(s).unwrap() / s;
        assert!((q - 2.0).abs() < 1e-4, "{q}");
        assert!(matches!(spec("1*s^3").eval_g_prime(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn eval_big_g_examples() {
        assert_eq!(spec("1*s^3").eval_G(1.0).unwrap(), 0.25);
        assert_eq!(spec("1*s^2 + 1*s^5").eval_G(0.0).unwrap(), 0.0);
        let v = spec("1*s^2 + 1*s^5").eval_G(2.0).unwrap();
        assert!((v - (8.0 / 3.0 + 64.0 / 6.0)).abs() < 1e-13);
        assert!(spec("1*s^3").eval_G(-1.0).is_err());
    }

    #[test]
    fn asymptotic_exponent_examples() {
        let d = spec("1*s^2 + 1*s^5").asymptotic_exponents();
        assert_eq!((d.alpha, d.mu1, d.beta, d.mu2), (3.0, 1.0, 6.0, 1.0));
        let d = spec("2*s^3").asymptotic_exponents();
        assert_eq!((d.alpha, d.mu1, d.beta, d.mu2), (4.0, 2.0, 4.0, 2.0));
        let d = spec("0.5*s^2.5 + 3*s^4").asymptotic_exponents();
        assert_eq!((d.alpha, d.mu1, d.beta, d.mu2), (3.5, 0.5, 5.0, 3.0));
        assert!(matches!(NonlinearitySpec::new(Vec::new()), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn hypothesis_examples() {
        let r = check_hypotheses(&spec("1*s^3"), 1).unwrap();
        assert_eq!(r.g3_status, G3Status::ProvedByDimension);
        assert!(r.all_ok());
        let r = check_hypotheses(&spec("1*s^3"), 2).unwrap();
        assert_eq!(r.g3_status, G3Status::ProvedByDimension);
        let r = check_hypotheses(&spec("1*s^3"), 3).unwrap();
        assert_eq!(r.g3_status, G3Status::ProvedByExponent);
        let r = check_hypotheses(&spec("1*s^5"), 3).unwrap();
        assert_eq!(r.critical_exponent, Some(6.0));
        assert!(!r.beta_subcritical);
        assert!(!r.g2_ok);
        assert!(matches!(
            require_subcritical(&spec("1*s^5"), 3),
            Err(Error::OutOfScope(_))
        ));
    }

    #[test]
    fn g3_sampling_beyond_exponent_condition() {
        // N = 3: α - 1 = 4 > 3, and s g = 5 G ≤ 6 G everywhere.
        let r = check_hypotheses(&spec("1*s^4"), 3).unwrap();
        assert_eq!(r.g3_status, G3Status::SampledSubcriticalQuotient);
        // N = 4: 2* = 4, α - 1 = 2.5 > 2 and s g = 3.5 G ≤ 4 G.
        let r = check_hypotheses(&spec("1*s^2.5"), 4).unwrap();
        assert_eq!(r.g3_status, G3Status::SampledSubcriticalQuotient);
        // N = 5: 2* = 10/3 and s g = 3.4 G exceeds 2* G.
        let r = check_hypotheses(&spec("1*s^2.4"), 5).unwrap();
        assert_eq!(r.g3_status, G3Status::Unverified);
        assert!(!r.beta_subcritical);
    }

    #[test]
    fn parse_round_trip_and_errors() {
        let s = spec("g = 1*s^2 + 1*s^5");
        assert_eq!(s.to_string(), "1*s^2 + 1*s^5");
        assert_eq!(spec(&s.to_string()), s);
        assert_eq!(spec(" 0.5 * s ^ 2.5+3*s^4 ").terms().len(), 2);
        for bad in ["", "s^3", "1*s^1", "-1*s^3", "1*x^3", "1*s^", "1*s^3 +"] {
            assert!(bad.parse::<NonlinearitySpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn duplicate_exponents_merge() {
        let s = spec("1*s^3 + 2*s^3");
        assert_eq!(
            s.terms(),
            &[PowerTerm {
                coef: 3.0,
                exponent: 3.0
            }]
        );
    }

    #[test]
    fn overrides_drive_asymptotics() {
        let d = AsymptoticData {
            alpha: 5.0,
            mu1: 1.0,
            beta: 3.0,
            mu2: 2.0,
        };
        let s = spec("1*s^2").with_overrides(d).unwrap();
        assert_eq!(s.asymptotic_exponents(), d);
        assert_eq!(s.g(2.0), 4.0);
        assert!(spec("1*s^2")
            .with_overrides(AsymptoticData { alpha: 2.0, ..d })
            .is_err());
    }

    #[test]
    fn growth_envelope_on_bounded_range() {
        // g(s)/s^{α-1} is bounded above and below on [0, M].
        let g = spec("1*s^2 + 1*s^5");
        let a = g.asymptotic_exponents();
        let m = 10.0;
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 1..=2000 {
            let s = m * i as f64 / 2000.0;
            let q = g.g(s) / s.powf(a.alpha - 1.0);
            lo = lo.min(q);
            hi = hi.max(q);
        }
        assert!(lo >= a.mu1 * (1.0 - 1e-12));
        assert!(hi <= a.mu1 + m.powi(3) + 1e-9);
        assert!(lo > 0.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_spec() -> impl Strategy<Value = NonlinearitySpec> {
            prop::collection::vec((0.1f64..5.0, 1.1f64..6.0), 1..4).prop_map(|t| NonlinearitySpec::new(t).unwrap())
        }

        /// Exponents at least one apart, so the subleading terms are below
        /// 1e-4 relative at s = 1e-8 and s = 1e8.
        fn arb_separated_spec() -> impl Strategy<Value = NonlinearitySpec> {
            (1.1f64..2.0, prop::collection::vec((0.1f64..5.0, 1.0f64..2.0), 1..4)).prop_map(|(p0, rest)| {
                let mut p = p0;
                let terms: Vec<(f64, f64)> = rest
                    .into_iter()
                    .enumerate()
                    .map(|(i, (c, gap))| {
                        if i > 0 {
                            p += gap;
                        }
                        (c, p)
                    })
                    .collect();
                NonlinearitySpec::new(terms).unwrap()
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn primitive_matches_quadrature(g in arb_spec(), s in 0.01f64..20.0) {
                let exact = g.big_g(s);
                let f = |t: f64| g.g(t);
                let quad = adaptive_simpson(&f, 0.0, s, exact * 1e-13);
                prop_assert!((quad - exact).abs() <= 1e-10 * exact, "{quad} vs {exact}");
            }

            #[test]
            fn leading_coefficients_at_zero_and_infinity(g in arb_separated_spec()) {
                let d = g.asymptotic_exponents();
                let lo = g.g(1e-8) / 1e-8f64.powf(d.alpha - 1.0);
                let hi = g.g(1e8) / 1e8f64.powf(d.beta - 1.0);
                prop_assert!((lo / d.mu1 - 1.0).abs() < 1e-4);
                prop_assert!((hi / d.mu2 - 1.0).abs() < 1e-4);
            }

            #[test]
            fn text_round_trip(g in arb_spec()) {
                let back: NonlinearitySpec = g.to_string().parse().unwrap();
                prop_assert_eq!(back, g);
            }
        }
    }
}
