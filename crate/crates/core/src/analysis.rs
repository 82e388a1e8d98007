//! Discrete convolution sums `S^{(n)}_{r,p,q} = sum_{k=1}^{n-1} (n^r - k^r)^p k^q`,
//! their asymptotic classification, and observed convergence orders.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::pow_diff;

/// Width of the band around `min(p, q) = -1` treated as the boundary case.
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DcsCase {
    pub r: f64,
    pub p: f64,
    pub q: f64,
    pub n: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `min(p, q) > -1`: `n^{rp+q+1}`.
    Above,
    /// `min(p, q) = -1`: `n^{rp+q+1} (1 + ln n)`.
    Boundary,
    /// `min(p, q) < -1`: `n^{max(rp, (r-1)p+q)}`.
    Below,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DcsReport {
    pub case: DcsCase,
    pub value: f64,
    pub regime: Regime,
    pub bound: f64,
    pub ratio: f64,
}

/// Neumaier-compensated sum.
fn compensated_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Direct evaluation, summing terms in order of decreasing magnitude.
/// `n = 1` gives the empty sum.
pub fn dcs_sum(case: &DcsCase) -> Result<f64> {
    if !(case.r > 0.0) || !case.r.is_finite() {
        return Err(Error::Domain {
            param: "r",
            value: case.r,
            reason: "grading exponent must be positive",
        });
    }
    if !case.p.is_finite() || !case.q.is_finite() {
        return Err(Error::Domain {
            param: "p/q",
            value: if case.p.is_finite() { case.q } else { case.p },
            reason: "exponents must be finite",
        });
    }
    if case.n == 0 {
        return Err(Error::Domain {
            param: "n",
            value: 0.0,
            reason: "need n >= 1",
        });
    }
    let n = case.n as f64;
    let mut terms: Vec<f64> = (1..case.n)
        .map(|k| {
            let k = k as f64;
            // n^r - k^r without cancellation for k close to n
            pow_diff(k, n - k, case.r).powf(case.p) * k.powf(case.q)
        })
        .collect();
    if let Some(bad) = terms.iter().find(|t| !t.is_finite()) {
        return Err(Error::Range(format!(
            "term {bad} overflows for r={}, p={}, q={}, n={}",
            case.r, case.p, case.q, case.n
        )));
    }
    terms.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    let s = compensated_sum(&terms);
    if !s.is_finite() {
        return Err(Error::Range(format!("sum overflows at n={}", case.n)));
    }
    Ok(s)
}

pub fn regime(p: f64, q: f64) -> Regime {
    let m = p.min(q);
    if (m + 1.0).abs() <= BOUNDARY_TOL {
        Regime::Boundary
    } else if m > -1.0 {
        Regime::Above
    } else {
        Regime::Below
    }
}

/// Evaluates the sum together with the asymptotic `n`-power of its regime.
pub fn dcs_bound(case: &DcsCase) -> Result<DcsReport> {
    let value = dcs_sum(case)?;
    let regime = regime(case.p, case.q);
    let gap = (case.p.min(case.q) + 1.0).abs();
    if gap > BOUNDARY_TOL && gap < 1e-6 {
        log::warn!(
            "min(p, q) = {} is within {gap:e} of -1; using the {regime:?} regime",
            case.p.min(case.q)
        );
    }
    let n = case.n as f64;
    let (r, p, q) = (case.r, case.p, case.q);
    let bound = match regime {
        Regime::Above => n.powf(r * p + q + 1.0),
        Regime::Boundary => n.powf(r * p + q + 1.0) * (1.0 + n.ln()),
        Regime::Below => n.powf((r * p).max((r - 1.0) * p + q)),
    };
    Ok(DcsReport {
        case: *case,
        value,
        regime,
        bound,
        ratio: value / bound,
    })
}

/// Result of [`doubling_scan`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoublingScan {
    pub reports: Vec<DcsReport>,
    /// False when each of the last three ratios grew by more than 2x.
    pub bounded: bool,
}

/// Ratios at `n = 2^j`, `j = 1..=j_max`, with `j_max <= 20`.
pub fn doubling_scan(r: f64, p: f64, q: f64, j_max: u32) -> Result<DoublingScan> {
    if j_max == 0 || j_max > 20 {
        return Err(Error::Domain {
            param: "jmax",
            value: j_max as f64,
            reason: "scan depth must lie in 1..=20",
        });
    }
    use rayon::prelude::*;
    let reports = (1..=j_max)
        .into_par_iter()
        .map(|j| {
            dcs_bound(&DcsCase {
                r,
                p,
                q,
                n: 1u64 << j,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DoublingScan {
        bounded: ratios_bounded(&reports),
        reports,
    })
}

fn ratios_bounded(reports: &[DcsReport]) -> bool {
    let ratios: Vec<f64> = reports.iter().map(|r| r.ratio).collect();
    if ratios.len() < 4 {
        return true;
    }
    let tail = &ratios[ratios.len() - 4..];
    !tail.windows(2).all(|w| w[1] > 2.0 * w[0])
}

/// `log2(e_coarse / e_fine)` for an `N -> 2N` refinement.
pub fn observed_order(e_coarse: f64, e_fine: f64) -> Result<f64> {
    for (param, v) in [("e_coarse", e_coarse), ("e_fine", e_fine)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Domain {
                param,
                value: v,
                reason: "errors must be positive",
            });
        }
    }
    Ok((e_coarse / e_fine).log2())
}
