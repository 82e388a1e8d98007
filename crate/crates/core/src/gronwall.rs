//! Fractional discrete Gronwall bound
//! `V_n <= E_alpha(kappa t^alpha) (V_0 + max_{nu<=n} sum_{j<=nu} p~^{(n)}_{n-j} F_j)`
//! and the extremal sequences that satisfy the discrete inequality with equality.

use serde::{Deserialize, Serialize};

use crate::dcc::surrogate_row;
use crate::error::{Error, Result};
use crate::kernels::l1_row_unchecked;
use crate::meshes::Mesh;
use crate::specialfns::{mittag_leffler, MittagLefflerParams};

/// Which node enters the Mittag-Leffler argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeChoice {
    /// `t_n`; the larger argument, hence the weaker bound.
    #[default]
    Current,
    /// `t_{n-1}`.
    Previous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GronwallInput {
    pub v0: f64,
    /// `F_1..F_N`.
    pub f: Vec<f64>,
    pub kappa: f64,
    pub alpha: f64,
    pub mesh: Mesh,
    #[serde(default)]
    pub node_choice: NodeChoice,
}

impl GronwallInput {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Domain {
                param: "alpha",
                value: self.alpha,
                reason: "fractional order must lie in (0, 1)",
            });
        }
        if !(self.kappa > 0.0) || !self.kappa.is_finite() {
            return Err(Error::Domain {
                param: "kappa",
                value: self.kappa,
                reason: "growth constant must be positive",
            });
        }
        if !(self.v0 >= 0.0) || !self.v0.is_finite() {
            return Err(Error::Domain {
                param: "v0",
                value: self.v0,
                reason: "initial value must be nonnegative",
            });
        }
        if self.f.len() != self.mesh.count() {
            return Err(Error::LengthMismatch {
                expected: self.mesh.count(),
                got: self.f.len(),
            });
        }
        if let Some(&bad) = self.f.iter().find(|&&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::Domain {
                param: "F",
                value: bad,
                reason: "forcing terms must be nonnegative",
            });
        }
        Ok(())
    }
}

/// Bound at level `n`, with the inner maximum over `nu` taken as a running
/// prefix maximum since the partial sums need not be monotone.
pub fn gronwall_bound(input: &GronwallInput, n: usize) -> Result<f64> {
    input.validate()?;
    if n == 0 || n > input.mesh.count() {
        return Err(Error::LevelOutOfRange {
            level: n,
            max: input.mesh.count(),
        });
    }
    let weights = surrogate_row(&input.mesh, input.alpha, n);
    let mut partial = 0.0;
    let mut best: f64 = 0.0;
    for (w, f) in weights.iter().zip(&input.f) {
        partial += w * f;
        best = best.max(partial);
    }
    let t = match input.node_choice {
        NodeChoice::Current => input.mesh.t(n),
        NodeChoice::Previous => input.mesh.t(n - 1),
    };
    let z = input.kappa * t.powf(input.alpha);
    let mut params = MittagLefflerParams::new(input.alpha)?;
    // series terms peak near alpha k ~ z^(1/alpha); leave room to decay past it
    let peak = z.powf(1.0 / input.alpha) / input.alpha;
    params.max_terms = params.max_terms.max(400 + (4.0 * peak).ceil() as usize);
    let ml = mittag_leffler(&params, z)?;
    Ok(ml * (input.v0 + best))
}

/// Bounds for all levels `1..=N`.
pub fn gronwall_bounds(input: &GronwallInput) -> Result<Vec<f64>> {
    (1..=input.mesh.count())
        .map(|n| gronwall_bound(input, n))
        .collect()
}

/// Solves `D_tau^alpha V_n = kappa V_n + F_n` level by level (L1 kernels):
/// `(a_0 - kappa) V_n = F_n + a_0 V_{n-1} - sum_{k<n} a_{n-k} (V_k - V_{k-1})`.
///
/// Returns `V_0..=V_N`.
pub fn equality_sequence(input: &GronwallInput) -> Result<Vec<f64>> {
    input.validate()?;
    let count = input.mesh.count();
    let mut v = Vec::with_capacity(count + 1);
    v.push(input.v0);
    let mut increments: Vec<f64> = Vec::with_capacity(count);
    for n in 1..=count {
        let row = l1_row_unchecked(&input.mesh, input.alpha, n);
        let a0 = row.leading();
        if !(a0 > input.kappa) {
            return Err(Error::StepSize {
                level: n,
                a0,
                kappa: input.kappa,
            });
        }
        let history: f64 = increments
            .iter()
            .enumerate()
            .map(|(i, d)| row.a(i + 1) * d)
            .sum();
        let prev = v[n - 1];
        let next = (input.f[n - 1] + a0 * prev - history) / (a0 - input.kappa);
        increments.push(next - prev);
        v.push(next);
    }
    Ok(v)
}
