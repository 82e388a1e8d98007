//! The symmetric matrix `M(d) = L diag(d) + diag(d) L^T - diag(d)`, with
//! `M_ij = d_{min(i,j)}`, and the quadratic form it induces on time increments.
//!
//! `M(d) = L diag(delta) L^T` with `delta_k = d_k - d_{k-1}`, `d_0 = 0`, so
//! `det M = prod delta_k` and `M` is positive definite iff `d` strictly increases.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelRow;

/// Row-major `n x n` matrix `M(d)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadFormMatrix {
    pub d: Vec<f64>,
    pub entries: Vec<f64>,
}

impl QuadFormMatrix {
    pub fn dim(&self) -> usize {
        self.d.len()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim() + j]
    }

    fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// `v^T M v`.
    pub fn quadratic(&self, v: &[f64]) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|i| v[i] * (0..n).map(|j| self.get(i, j) * v[j]).sum::<f64>())
            .sum()
    }
}

fn assemble(d: &[f64]) -> QuadFormMatrix {
    let n = d.len();
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            entries[i * n + j] = d[i.min(j)];
        }
    }
    QuadFormMatrix {
        d: d.to_vec(),
        entries,
    }
}

pub fn build_m(d: &[f64]) -> Result<QuadFormMatrix> {
    if d.is_empty() {
        return Err(Error::Domain {
            param: "d",
            value: 0.0,
            reason: "sequence must be nonempty",
        });
    }
    if let Some(&bad) = d.iter().find(|&&x| !(x > 0.0) || !x.is_finite()) {
        return Err(Error::Domain {
            param: "d",
            value: bad,
            reason: "entries must be positive",
        });
    }
    Ok(assemble(d))
}

/// Determinant by LU with partial pivoting.
pub fn lu_determinant(m: &QuadFormMatrix) -> f64 {
    let n = m.dim();
    let mut a = m.entries.clone();
    let mut det = 1.0;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| a[x * n + col].abs().total_cmp(&a[y * n + col].abs()))
            .unwrap_or(col);
        if a[piv * n + col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            for j in 0..n {
                a.swap(piv * n + j, col * n + j);
            }
            det = -det;
        }
        let p = a[col * n + col];
        det *= p;
        for i in col + 1..n {
            let f = a[i * n + col] / p;
            if f != 0.0 {
                for j in col + 1..n {
                    a[i * n + j] -= f * a[col * n + j];
                }
            }
        }
    }
    det
}

/// Consecutive gaps `d_k - d_{k-1}` with `d_0 = 0`.
pub fn gaps(d: &[f64]) -> Vec<f64> {
    let mut prev = 0.0;
    d.iter()
        .map(|&x| {
            let g = x - prev;
            prev = x;
            g
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetCheck {
    pub det: f64,
    pub product: f64,
    /// `|det - product| / max(1, |product|)`.
    pub residual: f64,
}

pub fn det_identity_check(d: &[f64]) -> Result<DetCheck> {
    let m = build_m(d)?;
    let det = lu_determinant(&m);
    let product: f64 = gaps(d).iter().product();
    Ok(DetCheck {
        det,
        product,
        residual: (det - product).abs() / product.abs().max(1.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Positivity {
    pub positive_definite: bool,
    pub strictly_increasing: bool,
}

/// Decides definiteness by an unpivoted `L D L^T` factorization (pivots must
/// exceed `1e-12 max|M|`) and monotonicity by a direct scan, classifying gaps
/// below `1e-12 max d` as ties.
pub fn positivity_iff_monotone(d: &[f64]) -> Result<Positivity> {
    let m = build_m(d)?;
    let n = m.dim();
    let tol = 1e-12 * m.max_abs();
    let mut l = vec![0.0; n * n];
    let mut piv = vec![0.0; n];
    let mut positive_definite = true;
    'outer: for j in 0..n {
        let mut dj = m.get(j, j);
        for k in 0..j {
            dj -= l[j * n + k] * l[j * n + k] * piv[k];
        }
        if !(dj > tol) {
            positive_definite = false;
            break 'outer;
        }
        piv[j] = dj;
        for i in j + 1..n {
            let mut s = m.get(i, j);
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k] * piv[k];
            }
            l[i * n + j] = s / dj;
        }
    }
    let dmax = d.iter().fold(0.0, |a: f64, &b| a.max(b));
    let strictly_increasing = gaps(d).iter().all(|&g| g > 1e-12 * dmax);
    Ok(Positivity {
        positive_definite,
        strictly_increasing,
    })
}

/// The energy gap `(D u^n, u^n) - D|u^n|^2 / 2` for a scalar sequence with
/// increments `v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyGap {
    /// `v^T M(a_seq) v / 2` with `a_seq_j = a^{(n)}_{n-j}`.
    pub quadratic: f64,
    /// Same quantity from the definitions of `D` applied to `u` and `u^2`.
    pub direct: f64,
}

pub fn energy_residual(row: &KernelRow, v: &[f64]) -> Result<EnergyGap> {
    let n = row.level;
    if v.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: v.len(),
        });
    }
    let a_seq = row.by_k();
    let quadratic = 0.5 * assemble(&a_seq).quadratic(v);

    let mut u = Vec::with_capacity(n + 1);
    u.push(0.0);
    for (i, dv) in v.iter().enumerate() {
        u.push(u[i] + dv);
    }
    let un = u[n];
    let d_u: f64 = (1..=n).map(|k| row.a(k) * (u[k] - u[k - 1])).sum();
    let d_u2: f64 = (1..=n)
        .map(|k| row.a(k) * (u[k] * u[k] - u[k - 1] * u[k - 1]))
        .sum();
    Ok(EnergyGap {
        quadratic,
        direct: d_u * un - 0.5 * d_u2,
    })
}
