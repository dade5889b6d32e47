//! Self-similar limit of the inflow problem.
//!
//! For boundary level `U0` and initial obstacle level `V0` the front constant
//! `iota` is the unique positive root of
//!
//! ```text
//! iota * ∫_0^iota exp((iota² - s²) / 4) ds = 2 U0 / V0
//! ```
//!
//! and the limit is `U(x, t) = f(x / √t)` with
//! `f(η) = U0 (1 - F(η) / F(iota))` on `[0, iota]`, zero beyond, where
//! `F(η) = ∫_0^η exp(-s² / 4) ds = √π erf(η / 2)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Above this exponent `exp(iota² / 4)` is handled in log form.
const LOG_DOMAIN_EXPONENT: f64 = 700.0;

/// `∫_0^eta exp(-s²/4) ds`, evaluated as `√π erf(eta / 2)`.
pub fn gauss_quarter_integral(eta: f64) -> Result<f64> {
    if eta.is_nan() || eta < 0.0 {
        return Err(Error::Domain(format!("integral bound must be >= 0, got {eta}")));
    }
    Ok(PI.sqrt() * libm::erf(0.5 * eta))
}

/// `ln(iota ∫_0^iota exp((iota² - s²)/4) ds)`, finite for every `iota > 0`.
fn log_front_function(iota: f64) -> f64 {
    iota.ln() + 0.25 * iota * iota + (PI.sqrt() * libm::erf(0.5 * iota)).ln()
}

/// Residual `g(iota) - 2 U0 / V0` of the front equation.
pub fn iota_residual(iota: f64, u0: f64, v0: f64) -> f64 {
    let target = 2.0 * u0 / v0;
    let exponent = 0.25 * iota * iota;
    if exponent <= LOG_DOMAIN_EXPONENT {
        let f = PI.sqrt() * libm::erf(0.5 * iota);
        iota * exponent.exp() * f - target
    } else {
        target * (log_front_function(iota) - target.ln()).exp_m1()
    }
}

/// Root of an increasing function on a bracket with `f(lo) < 0 < f(hi)`.
///
/// Secant steps are taken while they stay inside the bracket and keep
/// shrinking it; otherwise the step falls back to bisection.
pub(crate) fn increasing_root(
    f: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    rel_tol: f64,
) -> Result<f64> {
    let mut f_lo = f(lo);
    let mut f_hi = f(hi);
    if !(f_lo < 0.0 && f_hi > 0.0) {
        return Err(Error::NoConvergence(format!(
            "root not bracketed: f({lo}) = {f_lo}, f({hi}) = {f_hi}"
        )));
    }
    let mut width = hi - lo;
    for _ in 0..400 {
        let secant = hi - f_hi * (hi - lo) / (f_hi - f_lo);
        let interior = secant > lo + 0.01 * (hi - lo) && secant < hi - 0.01 * (hi - lo);
        let x = if interior { secant } else { 0.5 * (lo + hi) };
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
            f_hi = fx;
        }
        if hi - lo <= rel_tol * hi.abs() {
            return Ok(if f_hi.abs() < f_lo.abs() { hi } else { lo });
        }
        // Force a bisection when the bracket stalls.
        if hi - lo > 0.5 * width {
            let mid = 0.5 * (lo + hi);
            let fm = f(mid);
            if fm == 0.0 {
                return Ok(mid);
            }
            if fm < 0.0 {
                lo = mid;
                f_lo = fm;
            } else {
                hi = mid;
                f_hi = fm;
            }
        }
        width = hi - lo;
    }
    Err(Error::NoConvergence(format!(
        "bracket [{lo}, {hi}] did not shrink below relative width {rel_tol}"
    )))
}

/// Unique positive root `iota` of the front equation for `(U0, V0)`.
pub fn solve_iota(u0: f64, v0: f64) -> Result<f64> {
    if !(u0 > 0.0 && v0 > 0.0 && u0.is_finite() && v0.is_finite()) {
        return Err(Error::Domain(format!(
            "front equation needs U0 > 0 and V0 > 0, got U0 = {u0}, V0 = {v0}"
        )));
    }
    let log_target = (2.0 * u0).ln() - v0.ln();
    let h = |iota: f64| log_front_function(iota) - log_target;

    let mut lo = 1e-8;
    let mut hi = 1.0;
    let mut expansions = 0;
    while h(lo) >= 0.0 {
        lo *= 1e-2;
        expansions += 1;
        if expansions > 60 || lo < f64::MIN_POSITIVE {
            return Err(Error::NoConvergence(format!(
                "no lower bracket for 2 U0 / V0 = {}",
                2.0 * u0 / v0
            )));
        }
    }
    expansions = 0;
    while h(hi) <= 0.0 {
        hi *= 2.0;
        expansions += 1;
        if expansions > 60 {
            return Err(Error::NoConvergence(format!(
                "no upper bracket for 2 U0 / V0 = {} (last hi = {hi})",
                2.0 * u0 / v0
            )));
        }
    }
    increasing_root(h, lo, hi, 4.0 * f64::EPSILON)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfSimilarProfile {
    u0: f64,
    v0: f64,
    iota: f64,
    f_iota: f64,
}

impl SelfSimilarProfile {
    pub fn new(u0: f64, v0: f64) -> Result<Self> {
        let iota = solve_iota(u0, v0)?;
        Ok(Self {
            u0,
            v0,
            iota,
            f_iota: gauss_quarter_integral(iota)?,
        })
    }

    pub fn u0(&self) -> f64 {
        self.u0
    }

    pub fn v0(&self) -> f64 {
        self.v0
    }

    pub fn iota(&self) -> f64 {
        self.iota
    }

    /// Profile `f(eta)`.
    pub fn eval(&self, eta: f64) -> Result<f64> {
        if eta.is_nan() || eta < 0.0 {
            return Err(Error::Domain(format!("profile argument must be >= 0, got {eta}")));
        }
        if eta >= self.iota {
            return Ok(0.0);
        }
        Ok(self.u0 * (1.0 - gauss_quarter_integral(eta)? / self.f_iota))
    }

    /// `U(x, t) = f(x / √t)` for `t > 0`.
    pub fn limit_solution(&self, x: f64, t: f64) -> Result<f64> {
        if t.is_nan() || t <= 0.0 {
            return Err(Error::Domain(format!(
                "limit solution needs t > 0, got {t}; U(x, 0) = 0 for x > 0"
            )));
        }
        if x.is_nan() || x < 0.0 {
            return Err(Error::Domain(format!("limit solution needs x >= 0, got {x}")));
        }
        self.eval(x / t.sqrt())
    }

    /// Free-boundary position `iota √t`.
    pub fn front(&self, t: f64) -> f64 {
        self.iota * t.max(0.0).sqrt()
    }
}

/// Free-function form of [`SelfSimilarProfile::eval`].
pub fn profile_eval(p: &SelfSimilarProfile, eta: f64) -> Result<f64> {
    p.eval(eta)
}

/// Free-function form of [`SelfSimilarProfile::limit_solution`].
pub fn limit_solution(p: &SelfSimilarProfile, x: f64, t: f64) -> Result<f64> {
    p.limit_solution(x, t)
}
