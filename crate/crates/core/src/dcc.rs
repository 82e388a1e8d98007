//! Discrete complementary convolution (DCC) kernels `p^{(n)}_{n-k}`.
//!
//! The DCC kernels are the rows of `P = (A D)^{-1}`, i.e. they satisfy
//! `sum_{j=k}^n p^{(n)}_{n-j} a^{(j)}_{j-k} = 1` for `1 <= k <= n`. They are
//! compared against the surrogate `p~^{(n)}_{n-k} = int_{t_{k-1}}^{t_k} omega_alpha(t_n - s) ds`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{l1_row, pow_diff, KernelTable};
use crate::meshes::Mesh;
use crate::quad::integrate_singular_ends;
use crate::specialfns::{gamma_pos, omega_pos};

/// DCC kernels of one level. All vectors are indexed by `j - 1`, `j = 1..=n`,
/// and hold the `n-j` coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DccKernels {
    pub level: usize,
    pub p: Vec<f64>,
    pub p_tilde: Vec<f64>,
    pub q: Vec<f64>,
}

/// Outcome of [`dcc_bound_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub holds: bool,
    /// `min_j (p~ - p)`.
    pub min_margin: f64,
    /// `j` attaining the minimum margin.
    pub worst_j: usize,
    pub max_q: f64,
}

/// Absolute slack granted to `p <= p~`.
pub const BOUND_SLACK: f64 = 1e-13;

/// `p~^{(n)}_{n-j}`, `j = 1..=n`, from the closed form
/// `[(t_n - t_{j-1})^alpha - (t_n - t_j)^alpha] / Gamma(1+alpha)`.
pub fn surrogate_row(mesh: &Mesh, alpha: f64, n: usize) -> Vec<f64> {
    let scale = 1.0 / gamma_pos(1.0 + alpha);
    let tn = mesh.t(n);
    (1..=n)
        .map(|j| {
            let y = if j == n { 0.0 } else { tn - mesh.t(j) };
            pow_diff(y, mesh.tau(j), alpha) * scale
        })
        .collect()
}

/// DCC kernels of level `n` by the `(n-k)`-term recurrence
/// `p_{n-k} = (1/a^{(k)}_0) sum_{j=k+1}^n p_{n-j} (a^{(j)}_{j-k-1} - a^{(j)}_{j-k})`,
/// starting from `p_0 = 1/a^{(n)}_0`.
pub fn dcc_row(table: &KernelTable, n: usize) -> Result<DccKernels> {
    if n == 0 || n > table.levels() {
        return Err(Error::LevelOutOfRange {
            level: n,
            max: table.levels(),
        });
    }
    for k in 1..=n {
        let a0 = table.a(k, 0);
        if !(a0 > 0.0) {
            return Err(Error::KernelDegeneracy {
                level: k,
                value: a0,
            });
        }
    }
    let mut p = vec![0.0; n];
    p[n - 1] = 1.0 / table.a(n, 0);
    for k in (1..n).rev() {
        let mut acc = 0.0;
        for j in k + 1..=n {
            acc += p[j - 1] * (table.a(j, j - k - 1) - table.a(j, j - k));
        }
        p[k - 1] = acc / table.a(k, 0);
    }
    let p_tilde = surrogate_row(&table.mesh, table.alpha, n);
    let q = p.iter().zip(&p_tilde).map(|(a, b)| a / b).collect();
    Ok(DccKernels {
        level: n,
        p,
        p_tilde,
        q,
    })
}

/// `max_k |sum_{j=k}^n p_{n-j} a^{(j)}_{j-k} - 1|` for given DCC kernels.
pub fn identity_residual(table: &KernelTable, dcc: &DccKernels) -> f64 {
    let n = dcc.level;
    (1..=n)
        .map(|k| {
            let s: f64 = (k..=n).map(|j| dcc.p[j - 1] * table.a(j, j - k)).sum();
            (s - 1.0).abs()
        })
        .fold(0.0, f64::max)
}

/// Computes the DCC row of level `n` and returns its identity residual.
pub fn verify_matrix_identity(table: &KernelTable, n: usize) -> Result<f64> {
    let dcc = dcc_row(table, n)?;
    Ok(identity_residual(table, &dcc))
}

/// Checks `p <= p~` elementwise with [`BOUND_SLACK`].
pub fn dcc_bound_check(dcc: &DccKernels) -> BoundCheck {
    let mut min_margin = f64::INFINITY;
    let mut worst_j = 1;
    for (i, (p, pt)) in dcc.p.iter().zip(&dcc.p_tilde).enumerate() {
        let margin = pt - p;
        if margin < min_margin {
            min_margin = margin;
            worst_j = i + 1;
        }
    }
    BoundCheck {
        holds: min_margin >= -BOUND_SLACK,
        min_margin,
        worst_j,
        max_q: dcc.q.iter().copied().fold(f64::MIN, f64::max),
    }
}

/// The quotient constant `C_{rho,tau}` for one `(n, k)` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrtBound {
    pub c_r_tau: f64,
    pub rho: f64,
    pub tau: f64,
    /// `(rho + 1) / 2`.
    pub reference: f64,
    /// Quotients for `j = k+1..=n`.
    pub terms: Vec<f64>,
}

/// Quotient of the discrete kernel differences against their continuous
/// counterparts,
///
/// `q_{n-k,j} = p~_{n-j} (a^{(j)}_{j-k-1} - a^{(j)}_{j-k}) /
///   int_{t_{j-1}}^{t_j} omega_alpha(t_n - t) [omega_{1-alpha}(t - t_k) - omega_{1-alpha}(t - t_{k-1})] dt`,
///
/// maximized over `j = k+1..=n`. The inner integral over `s in [t_{k-1}, t_k]`
/// is done in closed form; the outer one by quadrature with the endpoint
/// singularities at `t = t_k` (`j = k+1`) and `t = t_n` (`j = n`) mapped out.
pub fn crt_constant(mesh: &Mesh, alpha: f64, n: usize, k: usize) -> Result<CrtBound> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain {
            param: "alpha",
            value: alpha,
            reason: "fractional order must lie in (0, 1)",
        });
    }
    if n > mesh.count() {
        return Err(Error::LevelOutOfRange {
            level: n,
            max: mesh.count(),
        });
    }
    if !(k >= 1 && k < n) {
        return Err(Error::Domain {
            param: "k",
            value: k as f64,
            reason: "index must satisfy 1 <= k < n",
        });
    }
    let p_tilde = surrogate_row(mesh, alpha, n);
    let tn = mesh.t(n);
    let tk = mesh.t(k);
    let tk1 = mesh.t(k - 1);
    let mut terms = Vec::with_capacity(n - k);
    for j in k + 1..=n {
        let row = l1_row(mesh, alpha, j)?;
        let num = p_tilde[j - 1] * (row.coeffs[j - k - 1] - row.coeffs[j - k]);
        let lo = mesh.t(j - 1);
        let hi = mesh.t(j);
        let gap_right = tn - hi;
        let gap_left = lo - tk;
        let gap_left1 = lo - tk1;
        let left_exp = if j == k + 1 { -alpha } else { 0.0 };
        let right_exp = if j == n { alpha - 1.0 } else { 0.0 };
        // relative target: the quotient is O(1), so the integral is of the
        // numerator's size
        let tol = 1e-10 * num.abs().max(f64::MIN_POSITIVE);
        let den = integrate_singular_ends(
            |pt| {
                let w = omega_pos(alpha, gap_right + pt.from_right);
                let near = omega_pos(1.0 - alpha, gap_left + pt.from_left);
                let far = omega_pos(1.0 - alpha, gap_left1 + pt.from_left);
                w * (near - far)
            },
            lo,
            hi,
            left_exp,
            right_exp,
            tol,
        )?;
        terms.push(num / den);
    }
    let stats = mesh.stats();
    let c_r_tau = terms.iter().copied().fold(f64::MIN, f64::max);
    Ok(CrtBound {
        c_r_tau,
        rho: stats.rho,
        tau: stats.tau_max,
        reference: 0.5 * (stats.rho + 1.0),
        terms,
    })
}
