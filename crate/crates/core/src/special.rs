//! Small special-function kit: surface area of the unit sphere, the scaled
//! upper incomplete gamma function used for closed-form tail integrals, and
//! a fixed Gauss-Legendre rule.

use std::f64::consts::PI;

/// `|S^{N-1}| = 2π^{N/2}/Γ(N/2)`; `ω₁ = 2`, `ω₂ = 2π`, `ω₃ = 4π`.
pub fn sphere_area(n: u32) -> f64 {
    2.0 * PI.powf(n as f64 / 2.0) / gamma_half_integer(n)
}

/// `Γ(n/2)` for a positive integer `n`.
fn gamma_half_integer(n: u32) -> f64 {
    assert!(n >= 1);
    let (mut value, mut k) = if n.is_multiple_of(2) { (1.0, 2) } else { (PI.sqrt(), 1) };
    // Γ(k/2 + 1) = (k/2) Γ(k/2)
    while k < n {
        value *= k as f64 / 2.0;
        k += 2;
    }
    value
}

/// `∫_R^∞ r^{s-1} e^{-c (r - R)} dr` for `c, R > 0` and any real `s`.
///
/// Equals `c^{-s} e^{cR} Γ(s, cR)`. Evaluated with the Legendre continued
/// fraction for `Γ(s, x)` when `x = cR` is not small, and by Gauss-Legendre
/// quadrature on a truncated interval otherwise.
pub fn exp_power_tail(s: f64, c: f64, r: f64) -> f64 {
    assert!(c > 0.0 && r > 0.0);
    let x = c * r;
    if x >= 2.0 {
        r.powf(s) * upper_gamma_cf(s, x)
    } else {
        // Integrand decays like e^{-c(t-R)}; 60/c past R leaves e^{-60}.
        let len = 60.0 / c;
        let pieces = 400;
        let h = len / pieces as f64;
        let mut sum = 0.0;
        for i in 0..pieces {
            let a = r + h * i as f64;
            sum += gauss_legendre(a, a + h, |t| t.powf(s - 1.0) * (-c * (t - r)).exp());
        }
        sum
    }
}

/// `e^x x^{-s} Γ(s, x)` by modified Lentz on the Legendre continued fraction.
fn upper_gamma_cf(s: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - s;
    let mut c = 1.0 / TINY;
    let mut d = if b.abs() < TINY { 1.0 / TINY } else { 1.0 / b };
    let mut h = d;
    for i in 1..500 {
        let an = -(i as f64) * (i as f64 - s);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

pub const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
pub const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_08,
    0.478_628_670_499_366_47,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_47,
    0.236_926_885_056_189_08,
];

/// Five-point Gauss-Legendre rule on `[a, b]`.
pub fn gauss_legendre(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    GL5_NODES
        .iter()
        .zip(GL5_WEIGHTS.iter())
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}
