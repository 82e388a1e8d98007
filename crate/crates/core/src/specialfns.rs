//! Gamma, the Gelfand-Shilov kernel `omega_alpha(s) = s^(alpha-1) / Gamma(alpha)`
//! and the one-parameter Mittag-Leffler function.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum(xm1: f64) -> f64 {
    let mut acc = LANCZOS_COEFFS[0];
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (xm1 + i as f64);
    }
    acc
}

/// Gamma function for `x > 0`.
pub fn gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain {
            param: "x",
            value: x,
            reason: "gamma is only provided for positive finite arguments",
        });
    }
    Ok(gamma_pos(x))
}

pub(crate) fn gamma_pos(x: f64) -> f64 {
    if x.fract() == 0.0 && x <= 30.0 {
        // exact factorials at small integers
        return (2..x as u32).fold(1.0, |acc, k| acc * k as f64);
    }
    if x < 0.5 {
        // reflection
        PI / ((PI * x).sin() * gamma_pos(1.0 - x))
    } else {
        let xm1 = x - 1.0;
        let t = xm1 + LANCZOS_G + 0.5;
        (2.0 * PI).sqrt() * t.powf(xm1 + 0.5) * (-t).exp() * lanczos_sum(xm1)
    }
}

/// `ln Gamma(x)` for `x >= 0.5`, used where Gamma itself overflows.
pub(crate) fn ln_gamma_large(x: f64) -> f64 {
    debug_assert!(x >= 0.5);
    let xm1 = x - 1.0;
    let t = xm1 + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (xm1 + 0.5) * t.ln() - t + lanczos_sum(xm1).ln()
}

/// Gelfand-Shilov kernel `omega_alpha(s) = s^(alpha-1) / Gamma(alpha)`.
pub fn omega(alpha: f64, s: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::Domain {
            param: "alpha",
            value: alpha,
            reason: "order must be positive",
        });
    }
    if !(s >= 0.0) {
        return Err(Error::Domain {
            param: "s",
            value: s,
            reason: "kernel argument must be nonnegative",
        });
    }
    if alpha == 1.0 {
        return Ok(1.0);
    }
    if s == 0.0 {
        return if alpha < 1.0 {
            Err(Error::Singularity { alpha })
        } else {
            Ok(0.0)
        };
    }
    Ok(omega_pos(alpha, s))
}

/// Unchecked kernel for `s > 0`, `alpha > 0`.
#[inline]
pub(crate) fn omega_pos(alpha: f64, s: f64) -> f64 {
    if alpha == 1.0 {
        1.0
    } else {
        s.powf(alpha - 1.0) / gamma_pos(alpha)
    }
}

/// Parameters for the Mittag-Leffler series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MittagLefflerParams {
    pub alpha: f64,
    /// Relative truncation tolerance.
    pub tol: f64,
    pub max_terms: usize,
}

impl MittagLefflerParams {
    pub const DEFAULT_TOL: f64 = 1e-14;
    pub const DEFAULT_MAX_TERMS: usize = 400;

    pub fn new(alpha: f64) -> Result<Self> {
        let p = MittagLefflerParams {
            alpha,
            tol: Self::DEFAULT_TOL,
            max_terms: Self::DEFAULT_MAX_TERMS,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::Domain {
                param: "alpha",
                value: self.alpha,
                reason: "Mittag-Leffler order must lie in (0, 1]",
            });
        }
        if !(self.tol > 0.0) {
            return Err(Error::Domain {
                param: "tol",
                value: self.tol,
                reason: "tolerance must be positive",
            });
        }
        if self.max_terms == 0 {
            return Err(Error::Domain {
                param: "max_terms",
                value: 0.0,
                reason: "need at least one term",
            });
        }
        Ok(())
    }
}

/// `E_alpha(z) = sum_k z^k / Gamma(alpha k + 1)` for `z >= 0`, by direct series.
///
/// Summation stops at the first term with `term <= tol * sum`.
pub fn mittag_leffler(params: &MittagLefflerParams, z: f64) -> Result<f64> {
    params.validate()?;
    if !(z >= 0.0) || !z.is_finite() {
        return Err(Error::Domain {
            param: "z",
            value: z,
            reason: "argument must be finite and nonnegative",
        });
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    let ln_z = z.ln();
    let mut sum = 1.0;
    let mut last = 1.0;
    for k in 1..params.max_terms {
        let arg = params.alpha * k as f64 + 1.0;
        let term = if arg < 170.0 {
            let pow = z.powi(k as i32);
            if pow.is_finite() {
                pow / gamma_pos(arg)
            } else {
                (k as f64 * ln_z - ln_gamma_large(arg)).exp()
            }
        } else {
            (k as f64 * ln_z - ln_gamma_large(arg)).exp()
        };
        if !term.is_finite() {
            return Err(Error::Range(format!(
                "Mittag-Leffler term {k} overflowed at z = {z}"
            )));
        }
        sum += term;
        last = term;
        if term <= params.tol * sum {
            return Ok(sum);
        }
    }
    Err(Error::Precision {
        terms: params.max_terms,
        last_term: last,
    })
}
