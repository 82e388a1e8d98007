//! Discrete convolution (DC) kernels `a^{(n)}_{n-k}` of the discrete Caputo
//! operator `D_tau^alpha u^n = sum_{k=1}^n a^{(n)}_{n-k} (u^k - u^{k-1})`.
//!
//! All kernel integrals are evaluated in closed form from the antiderivatives
//! of `omega_{1-alpha}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::meshes::Mesh;
use crate::specialfns::gamma_pos;

/// Time discretization of the Caputo derivative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "lowercase")]
pub enum Scheme {
    /// Piecewise-linear interpolation, collocated at `t_n`.
    L1,
    /// L21-sigma, collocated at `t_{n-sigma} = t_n - sigma * tau_n`.
    L21Sigma { sigma: f64 },
}

impl Scheme {
    /// L21-sigma with `sigma = alpha/2`, i.e. collocation at
    /// `t_{n-1} + (1 - alpha/2) tau_n`.
    pub fn l21sigma_default(alpha: f64) -> Self {
        Scheme::L21Sigma { sigma: 0.5 * alpha }
    }
}

/// Kernel coefficients of one time level.
///
/// `coeffs[j]` holds `a^{(n)}_j`, i.e. the weight of `u^{n-j} - u^{n-j-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelRow {
    pub level: usize,
    pub alpha: f64,
    pub coeffs: Vec<f64>,
}

impl KernelRow {
    /// `a^{(n)}_{n-k}` for `1 <= k <= n`.
    #[inline]
    pub fn a(&self, k: usize) -> f64 {
        self.coeffs[self.level - k]
    }

    /// `a^{(n)}_0`.
    #[inline]
    pub fn leading(&self) -> f64 {
        self.coeffs[0]
    }

    /// Coefficients ordered by `k = 1..=n`, i.e. `a^{(n)}_{n-1}, ..., a^{(n)}_0`.
    pub fn by_k(&self) -> Vec<f64> {
        self.coeffs.iter().rev().copied().collect()
    }
}

/// Result of [`is_monotone`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Monotonicity {
    pub monotone: bool,
    /// Smallest `j` with `coeffs[j] >= coeffs[j-1]`.
    pub first_violation: Option<usize>,
}

/// `x^g - y^g` with `x = y + d`, `y >= 0`, `d > 0`, avoiding cancellation.
#[inline]
pub(crate) fn pow_diff(y: f64, d: f64, g: f64) -> f64 {
    if y <= 0.0 {
        (y + d).powf(g)
    } else {
        y.powf(g) * (g * (d / y).ln_1p()).exp_m1()
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain {
            param: "alpha",
            value: alpha,
            reason: "fractional order must lie in (0, 1)",
        });
    }
    Ok(())
}

fn check_level(mesh: &Mesh, n: usize) -> Result<()> {
    if n == 0 || n > mesh.count() {
        return Err(Error::LevelOutOfRange {
            level: n,
            max: mesh.count(),
        });
    }
    Ok(())
}

/// L1 kernels `a^{(n)}_{n-k} = (1/tau_k) int_{t_{k-1}}^{t_k} omega_{1-alpha}(t_n - s) ds`.
pub fn l1_row(mesh: &Mesh, alpha: f64, n: usize) -> Result<KernelRow> {
    check_alpha(alpha)?;
    check_level(mesh, n)?;
    Ok(l1_row_unchecked(mesh, alpha, n))
}

pub(crate) fn l1_row_unchecked(mesh: &Mesh, alpha: f64, n: usize) -> KernelRow {
    let scale = 1.0 / gamma_pos(2.0 - alpha);
    let tn = mesh.t(n);
    let mut coeffs = vec![0.0; n];
    for k in 1..=n {
        let tau = mesh.tau(k);
        let y = if k == n { 0.0 } else { tn - mesh.t(k) };
        coeffs[n - k] = pow_diff(y, tau, 1.0 - alpha) * scale / tau;
    }
    KernelRow {
        level: n,
        alpha,
        coeffs,
    }
}

/// Components of the L21-sigma kernels, indexed by `k - 1`.
pub(crate) struct L21Parts {
    /// `(1/tau_k) int_{t_{k-1}}^{min(t_k, t_{n-sigma})} omega_{1-alpha}(t_{n-sigma} - s) ds`
    pub a: Vec<f64>,
    /// `2/(tau_k (tau_k + tau_{k+1})) int (s - t_{k-1/2}) omega_{1-alpha}(t_{n-sigma} - s) ds`,
    /// zero for `k = n`.
    pub b: Vec<f64>,
}

/// `int_{-h}^{h} v omega_{1-alpha}(ym - v) dv` for `ym > h`.
fn first_moment(ym: f64, h: f64, alpha: f64) -> f64 {
    if h / ym <= 0.25 {
        first_moment_series(ym, h, alpha)
    } else {
        first_moment_closed(ym, h, alpha)
    }
}

/// Splitting `v = ym - (ym - v)` gives differences of `omega_{2-alpha}` and
/// `(1-alpha) omega_{3-alpha}` across the panel. Loses about `2 log10(ym/h)`
/// digits to cancellation.
fn first_moment_closed(ym: f64, h: f64, alpha: f64) -> f64 {
    let y = ym - h;
    let d = 2.0 * h;
    let g2 = gamma_pos(2.0 - alpha);
    (ym * pow_diff(y, d, 1.0 - alpha) - (1.0 - alpha) / (2.0 - alpha) * pow_diff(y, d, 2.0 - alpha))
        / g2
}

/// Taylor expansion of `omega_{1-alpha}(ym - v)` around `v = 0`; only odd
/// derivatives survive against the odd weight `v`.
/// `f^(i)(ym) = c_i ym^(-alpha-i) / Gamma(1-alpha)`, `c_i = prod_{m<i} (-alpha - m)`.
fn first_moment_series(ym: f64, h: f64, alpha: f64) -> f64 {
    let ratio = h / ym;
    let mut c = -alpha;
    let mut fact = 1.0;
    let mut pow = ratio;
    let mut sum = 0.0;
    let mut i = 1usize;
    loop {
        let term = c / fact * pow / (i as f64 + 2.0);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() || i > 60 {
            break;
        }
        c *= (-alpha - i as f64) * (-alpha - i as f64 - 1.0);
        fact *= (i as f64 + 1.0) * (i as f64 + 2.0);
        pow *= ratio * ratio;
        i += 2;
    }
    -2.0 * h * h * ym.powf(-alpha) * sum / gamma_pos(1.0 - alpha)
}

pub(crate) fn l21sigma_parts(mesh: &Mesh, alpha: f64, sigma: f64, n: usize) -> L21Parts {
    let tn = mesh.t(n);
    let tau_n = mesh.tau(n);
    let c = tn - sigma * tau_n;
    let g2 = gamma_pos(2.0 - alpha);
    let mut a = vec![0.0; n];
    let mut b = vec![0.0; n];
    for k in 1..=n {
        let tau = mesh.tau(k);
        if k < n {
            let y = c - mesh.t(k);
            a[k - 1] = pow_diff(y, tau, 1.0 - alpha) / (tau * g2);
            let h = 0.5 * tau;
            let moment = first_moment(y + h, h, alpha);
            b[k - 1] = 2.0 * moment / (tau * (tau + mesh.tau(k + 1)));
        } else {
            let reach = (1.0 - sigma) * tau_n;
            a[k - 1] = reach.powf(1.0 - alpha) / (tau * g2);
        }
    }
    L21Parts { a, b }
}

/// L21-sigma kernels `a^{(n)}_{n-k} = A_{n-k} + r_{k-1} B_{n-k+1} - B_{n-k}`
/// with `r_{k-1} = tau_k / tau_{k-1}` and `r_0 = 0`.
pub fn l21sigma_row(mesh: &Mesh, alpha: f64, sigma: f64, n: usize) -> Result<KernelRow> {
    check_alpha(alpha)?;
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(Error::Domain {
            param: "sigma",
            value: sigma,
            reason: "offset must lie in (0, 1]",
        });
    }
    check_level(mesh, n)?;
    let parts = l21sigma_parts(mesh, alpha, sigma, n);
    let mut coeffs = vec![0.0; n];
    for k in 1..=n {
        let prev_b = if k >= 2 {
            mesh.tau(k) / mesh.tau(k - 1) * parts.b[k - 2]
        } else {
            0.0
        };
        coeffs[n - k] = parts.a[k - 1] + prev_b - parts.b[k - 1];
    }
    Ok(KernelRow {
        level: n,
        alpha,
        coeffs,
    })
}

/// Kernel row for any scheme.
pub fn row(mesh: &Mesh, scheme: Scheme, alpha: f64, n: usize) -> Result<KernelRow> {
    match scheme {
        Scheme::L1 => l1_row(mesh, alpha, n),
        Scheme::L21Sigma { sigma } => l21sigma_row(mesh, alpha, sigma, n),
    }
}

/// Strict decrease of `coeffs` in `j = n-k` (equivalently increase in `k`).
pub fn is_monotone(row: &KernelRow) -> Monotonicity {
    let first_violation = row
        .coeffs
        .windows(2)
        .position(|w| !(w[1] < w[0]))
        .map(|i| i + 1);
    Monotonicity {
        monotone: first_violation.is_none(),
        first_violation,
    }
}

/// All kernel rows `1..=N` of one mesh, built once and shared by the DCC
/// audit and anything else needing every level.
#[derive(Debug, Clone)]
pub struct KernelTable {
    pub mesh: Mesh,
    pub scheme: Scheme,
    pub alpha: f64,
    rows: Vec<KernelRow>,
}

impl KernelTable {
    pub fn build(mesh: &Mesh, scheme: Scheme, alpha: f64) -> Result<Self> {
        Self::build_to(mesh, scheme, alpha, mesh.count())
    }

    /// Rows for levels `1..=levels` only.
    pub fn build_to(mesh: &Mesh, scheme: Scheme, alpha: f64, levels: usize) -> Result<Self> {
        check_level(mesh, levels)?;
        let rows = (1..=levels)
            .map(|n| row(mesh, scheme, alpha, n))
            .collect::<Result<Vec<_>>>()?;
        Ok(KernelTable {
            mesh: mesh.clone(),
            scheme,
            alpha,
            rows,
        })
    }

    pub fn levels(&self) -> usize {
        self.rows.len()
    }

    /// Row of level `n` (1-based).
    pub fn row(&self, n: usize) -> &KernelRow {
        &self.rows[n - 1]
    }

    /// `a^{(j)}_m`.
    #[inline]
    pub fn a(&self, j: usize, m: usize) -> f64 {
        self.rows[j - 1].coeffs[m]
    }
}
