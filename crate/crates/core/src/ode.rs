//! Dormand-Prince 5(4) with its fourth-order continuous extension.
//!
//! The driver hands every accepted step to an observer as a [`DenseStep`],
//! which can be evaluated anywhere inside the step. The observer decides
//! whether to continue, which is how the shooting code implements its
//! terminal events.

use std::ops::ControlFlow;

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct DenseStep<const D: usize> {
    pub t0: f64,
    pub h: f64,
    pub y0: [f64; D],
    pub y1: [f64; D],
    /// Derivative at `t0 + h`.
    pub f1: [f64; D],
    rcont: [[f64; D]; 4],
}

impl<const D: usize> DenseStep<D> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    /// Continuous extension at `t` in `[t0, t0 + h]`.
    pub fn eval(&self, t: f64) -> [f64; D] {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        std::array::from_fn(|i| {
            self.y0[i]
                + th * (self.rcont[0][i] + th1 * (self.rcont[1][i] + th * (self.rcont[2][i] + th1 * self.rcont[3][i])))
        })
    }

    /// Locates `t` where component `idx` of the continuous extension crosses
    /// `level`, assuming a sign change over the step.
    pub fn find_crossing(&self, idx: usize, level: f64) -> f64 {
        let (mut a, mut b) = (self.t0, self.t1());
        let fa = self.y0[idx] - level;
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let fm = self.eval(m)[idx] - level;
            if (fm <= 0.0) == (fa <= 0.0) && fm != 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }
}

pub struct Dopri5 {
    pub tol: Tolerance,
    pub safety: f64,
    pub fac_min: f64,
    pub fac_max: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Dopri5 {
    pub fn new(tol: Tolerance) -> Self {
        Self {
            tol,
            safety: 0.9,
            fac_min: 0.2,
            fac_max: 5.0,
            h_max: f64::INFINITY,
            max_steps: 2_000_000,
        }
    }

    /// Integrates from `(t0, y0)` towards `t_end`, handing each accepted step
    /// to `observer`. Returns the observer's break value, or `None` when
    /// `t_end` is reached.
    pub fn integrate<const D: usize, F, O, B>(
        &self,
        rhs: F,
        t0: f64,
        y0: [f64; D],
        t_end: f64,
        h_init: f64,
        mut observer: O,
    ) -> Result<Option<B>>
    where
        F: Fn(f64, &[f64; D]) -> [f64; D],
        O: FnMut(&DenseStep<D>) -> ControlFlow<B>,
    {
        let mut t = t0;
        let mut y = y0;
        let mut k1 = rhs(t, &y);
        let mut h = h_init.min(self.h_max).min(t_end - t0);
        let order_exp = 1.0 / 5.0;

        for _ in 0..self.max_steps {
            if t >= t_end {
                return Ok(None);
            }
            let mut last = false;
            if t + h >= t_end {
                h = t_end - t;
                last = true;
            }
            if h <= 1e-14 * t.abs().max(1.0) {
                return Err(Error::Stiffness {
                    r: t,
                    u: y[0],
                    du: if D > 1 { y[1] } else { 0.0 },
                });
            }

            let stage = |coefs: &[(f64, &[f64; D])]| {
                let mut out = y;
                for i in 0..D {
                    let mut acc = 0.0;
                    for (c, k) in coefs {
                        acc += c * k[i];
                    }
                    out[i] += h * acc;
                }
                out
            };
            let k2 = rhs(t + C2 * h, &stage(&[(A21, &k1)]));
            let k3 = rhs(t + C3 * h, &stage(&[(A31, &k1), (A32, &k2)]));
            let k4 = rhs(t + C4 * h, &stage(&[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = rhs(t + C5 * h, &stage(&[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
            let k6 = rhs(
                t + h,
                &stage(&[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            );
            let y1 = stage(&[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
            let k7 = rhs(t + h, &y1);

            let mut err = 0.0;
            for i in 0..D {
                let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = self.tol.atol + self.tol.rtol * y[i].abs().max(y1[i].abs());
                err += (e / sc) * (e / sc);
            }
            let err = (err / D as f64).sqrt();
            if !err.is_finite() {
                h *= self.fac_min;
                continue;
            }

            if err <= 1.0 {
                let mut rcont = [[0.0; D]; 4];
                for i in 0..D {
                    let ydiff = y1[i] - y[i];
                    let bspl = h * k1[i] - ydiff;
                    rcont[0][i] = ydiff;
                    rcont[1][i] = bspl;
                    rcont[2][i] = ydiff - h * k7[i] - bspl;
                    rcont[3][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
                }
                let step = DenseStep {
                    t0: t,
                    h,
                    y0: y,
                    y1,
                    f1: k7,
                    rcont,
                };
                if let ControlFlow::Break(b) = observer(&step) {
                    return Ok(Some(b));
                }
                t = if last { t_end } else { t + h };
                y = y1;
                k1 = k7;
                let fac = if err == 0.0 {
                    self.fac_max
                } else {
                    (self.safety * err.powf(-order_exp)).clamp(self.fac_min, self.fac_max)
                };
                h = (h * fac).min(self.h_max);
            } else {
                let fac = (self.safety * err.powf(-order_exp)).clamp(self.fac_min, 1.0);
                h *= fac;
            }
        }
        Err(Error::Stiffness {
            r: t,
            u: y[0],
            du: if D > 1 { y[1] } else { 0.0 },
        })
    }
}
