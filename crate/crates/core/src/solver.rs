//! L1 time stepping for `D^alpha u = kappa u + f` (scalar) and
//! `D^alpha u - u_xx = kappa u + f` on `[-pi, pi]` with zero Dirichlet data,
//! both with manufactured solutions `omega_{1+beta}(t)` and `sin(x) omega_{1+beta}(t)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{l1_row_unchecked, pow_diff};
use crate::meshes::Mesh;
use crate::specialfns::{gamma_pos, omega_pos};

/// Default number of spatial intervals, `h = 2 pi / 1024 = 2^-9 pi`.
pub const DEFAULT_SPACE_INTERVALS: usize = 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdeProblem {
    pub alpha: f64,
    pub beta: f64,
    pub kappa: f64,
    pub mesh: Mesh,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdeProblem {
    pub alpha: f64,
    pub beta: f64,
    pub kappa: f64,
    pub mesh: Mesh,
    /// Spatial intervals `M`; the unknowns live on the `M-1` interior nodes.
    pub space_intervals: usize,
}

/// Numerical solution and error per time level `0..=N`.
///
/// `values[n]` has one entry for the ODE and `M-1` interior entries for the PDE.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub errors: Vec<f64>,
}

impl Trajectory {
    pub fn begin_error(&self) -> f64 {
        self.errors[1]
    }

    pub fn end_error(&self) -> f64 {
        self.errors[self.errors.len() - 1]
    }

    pub fn max_error(&self) -> f64 {
        self.errors.iter().copied().fold(0.0, f64::max)
    }
}

fn check_orders(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain {
            param: "alpha",
            value: alpha,
            reason: "fractional order must lie in (0, 1)",
        });
    }
    if !(beta > 0.0 && beta <= 2.0) || beta == 1.0 {
        return Err(Error::Domain {
            param: "beta",
            value: beta,
            reason: "regularity exponent must lie in (0, 1) or (1, 2]",
        });
    }
    Ok(())
}

impl OdeProblem {
    pub fn exact(&self, t: f64) -> f64 {
        omega_pos(1.0 + self.beta, t)
    }

    pub fn source(&self, t: f64) -> f64 {
        omega_pos(1.0 + (self.beta - self.alpha), t) - self.kappa * omega_pos(1.0 + self.beta, t)
    }
}

impl PdeProblem {
    pub fn new(alpha: f64, beta: f64, kappa: f64, mesh: Mesh) -> Self {
        PdeProblem {
            alpha,
            beta,
            kappa,
            mesh,
            space_intervals: DEFAULT_SPACE_INTERVALS,
        }
    }

    pub fn h(&self) -> f64 {
        2.0 * PI / self.space_intervals as f64
    }

    /// Interior nodes `x_i = -pi + i h`, `i = 1..M-1`.
    pub fn interior_nodes(&self) -> Vec<f64> {
        let h = self.h();
        (1..self.space_intervals)
            .map(|i| -PI + i as f64 * h)
            .collect()
    }

    /// Temporal factor of the source, `omega_{1+beta-alpha} + (1-kappa) omega_{1+beta}`.
    pub fn source_amplitude(&self, t: f64) -> f64 {
        omega_pos(1.0 + (self.beta - self.alpha), t)
            + (1.0 - self.kappa) * omega_pos(1.0 + self.beta, t)
    }

    /// Smallest eigenvalue of `-Delta_h`, `4 sin^2(h/2) / h^2`.
    pub fn discrete_eigenvalue(&self) -> f64 {
        let h = self.h();
        let s = (0.5 * h).sin();
        4.0 * s * s / (h * h)
    }
}

/// L1 stepping for `D_tau^alpha U^n = kappa U^n + source(t_n)`, `U^0 = u0`.
///
/// Returns `U^0..=U^N`.
pub fn solve_scalar<F: Fn(f64) -> f64>(
    mesh: &Mesh,
    alpha: f64,
    kappa: f64,
    u0: f64,
    source: F,
) -> Result<Vec<f64>> {
    let count = mesh.count();
    let mut u = Vec::with_capacity(count + 1);
    u.push(u0);
    let mut increments: Vec<f64> = Vec::with_capacity(count);
    for n in 1..=count {
        let row = l1_row_unchecked(mesh, alpha, n);
        let a0 = row.leading();
        if !(a0 > kappa) {
            return Err(Error::StepSize {
                level: n,
                a0,
                kappa,
            });
        }
        let history: f64 = increments
            .iter()
            .enumerate()
            .map(|(i, d)| row.a(i + 1) * d)
            .sum();
        let prev = u[n - 1];
        let next = (source(mesh.t(n)) + a0 * prev - history) / (a0 - kappa);
        increments.push(next - prev);
        u.push(next);
    }
    Ok(u)
}

pub fn solve_ode(problem: &OdeProblem) -> Result<Trajectory> {
    check_orders(problem.alpha, problem.beta)?;
    let mesh = &problem.mesh;
    let u = solve_scalar(mesh, problem.alpha, problem.kappa, 0.0, |t| {
        problem.source(t)
    })?;
    let times = mesh.nodes().to_vec();
    let errors = times
        .iter()
        .zip(&u)
        .map(|(&t, &v)| (problem.exact(t) - v).abs())
        .collect();
    Ok(Trajectory {
        times,
        values: u.into_iter().map(|v| vec![v]).collect(),
        errors,
    })
}

/// Solves `diag * x_i - off * (x_{i-1} + x_{i+1}) = rhs_i` with zero ends.
pub fn solve_tridiagonal_const(diag: f64, off: f64, rhs: &[f64]) -> Result<Vec<f64>> {
    let m = rhs.len();
    let mut c = vec![0.0; m];
    let mut x = vec![0.0; m];
    let mut pivot = diag;
    for i in 0..m {
        if i > 0 {
            pivot = diag - off * c[i - 1];
        }
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::SingularSystem { row: i });
        }
        let prev = if i > 0 { x[i - 1] } else { 0.0 };
        c[i] = off / pivot;
        x[i] = (rhs[i] + off * prev) / pivot;
    }
    for i in (0..m.saturating_sub(1)).rev() {
        x[i] += c[i] * x[i + 1];
    }
    Ok(x)
}

pub fn solve_pde(problem: &PdeProblem) -> Result<Trajectory> {
    check_orders(problem.alpha, problem.beta)?;
    if problem.space_intervals < 2 {
        return Err(Error::Domain {
            param: "M",
            value: problem.space_intervals as f64,
            reason: "need at least two spatial intervals",
        });
    }
    let mesh = &problem.mesh;
    let count = mesh.count();
    let h = problem.h();
    let inv_h2 = 1.0 / (h * h);
    let xs = problem.interior_nodes();
    let sines: Vec<f64> = xs.iter().map(|x| x.sin()).collect();
    let dof = xs.len();

    let mut values: Vec<Vec<f64>> = Vec::with_capacity(count + 1);
    values.push(vec![0.0; dof]);
    let mut increments: Vec<Vec<f64>> = Vec::with_capacity(count);
    let mut rhs = vec![0.0; dof];
    for n in 1..=count {
        let row = l1_row_unchecked(mesh, problem.alpha, n);
        let a0 = row.leading();
        if !(a0 > 0.0) {
            return Err(Error::KernelDegeneracy {
                level: n,
                value: a0,
            });
        }
        let amp = problem.source_amplitude(mesh.t(n));
        let prev = &values[n - 1];
        for i in 0..dof {
            rhs[i] = sines[i] * amp + a0 * prev[i];
        }
        for (k, inc) in increments.iter().enumerate() {
            let w = row.a(k + 1);
            for (r, d) in rhs.iter_mut().zip(inc) {
                *r -= w * d;
            }
        }
        let next = solve_tridiagonal_const(a0 + 2.0 * inv_h2 - problem.kappa, inv_h2, &rhs)?;
        increments.push(next.iter().zip(prev).map(|(a, b)| a - b).collect());
        values.push(next);
    }

    let errors = mesh
        .nodes()
        .iter()
        .zip(&values)
        .map(|(&t, u)| {
            let exact = omega_pos(1.0 + problem.beta, t);
            let sq: f64 = sines
                .iter()
                .zip(u)
                .map(|(s, v)| {
                    let e = s * exact - v;
                    e * e
                })
                .sum();
            (h * sq).sqrt()
        })
        .collect();
    Ok(Trajectory {
        times: mesh.nodes().to_vec(),
        values,
        errors,
    })
}

/// `G^k = 2 int_{t_{k-1}}^{t_k} (t - t_{k-1}) |u''(t)| dt` for `u = omega_{1+beta}`,
/// `|u''(t)| = c t^(beta-2)`, `c = |beta (beta-1)| / Gamma(1+beta)`.
fn local_truncation(mesh: &Mesh, beta: f64, k: usize) -> f64 {
    let c = (beta * (beta - 1.0)).abs() / gamma_pos(1.0 + beta);
    if c == 0.0 {
        return 0.0;
    }
    let a = mesh.t(k - 1);
    let tau = mesh.tau(k);
    if k == 1 {
        return 2.0 * c * tau.powf(beta) / beta;
    }
    // int_a^b (t - a) t^(beta-2) dt = (b^beta - a^beta)/beta - a (b^(beta-1) - a^(beta-1))/(beta-1)
    let first = pow_diff(a, tau, beta) / beta;
    let second = a * pow_diff(a, tau, beta - 1.0) / (beta - 1.0);
    2.0 * c * (first - second)
}

/// Bound on the local consistency error of the L1 formula at level `n`:
/// `a_0 G^n + sum_{k<n} (a_{n-k-1} - a_{n-k}) G^k`.
pub fn truncation_bound(mesh: &Mesh, alpha: f64, beta: f64, n: usize) -> Result<f64> {
    check_orders(alpha, beta)?;
    if n == 0 || n > mesh.count() {
        return Err(Error::LevelOutOfRange {
            level: n,
            max: mesh.count(),
        });
    }
    let row = l1_row_unchecked(mesh, alpha, n);
    let mut bound = row.leading() * local_truncation(mesh, beta, n);
    for k in 1..n {
        bound += (row.coeffs[n - k - 1] - row.coeffs[n - k]) * local_truncation(mesh, beta, k);
    }
    Ok(bound)
}

impl OdeProblem {
    pub fn truncation_bound(&self, n: usize) -> Result<f64> {
        truncation_bound(&self.mesh, self.alpha, self.beta, n)
    }
}

impl PdeProblem {
    pub fn truncation_bound(&self, n: usize) -> Result<f64> {
        truncation_bound(&self.mesh, self.alpha, self.beta, n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gronwall::{gronwall_bound, GronwallInput, NodeChoice};
    use crate::kernels::l1_row;
    use crate::meshes::{graded_mesh, uniform_mesh};
    use crate::quad::integrate_singular_ends;

    fn ode(alpha: f64, beta: f64, r: f64, n: usize) -> OdeProblem {
        OdeProblem {
            alpha,
            beta,
            kappa: 1.0,
            mesh: graded_mesh(1.0, n, r).unwrap(),
        }
    }

    fn order(coarse: f64, fine: f64) -> f64 {
        (coarse / fine).log2()
    }

    #[test]
    fn ode_matches_printed_values() {
        // alpha=0.6, beta=0.3 reproduces the printed ODE tables
        let t = solve_ode(&ode(0.6, 0.3, 1.0, 64)).unwrap();
        assert!((t.begin_error() - 1.335e-1).abs() / 1.335e-1 < 5e-3);
        let coarse = solve_ode(&ode(0.6, 0.3, 3.0, 256)).unwrap();
        let fine = solve_ode(&ode(0.6, 0.3, 3.0, 512)).unwrap();
        assert!((fine.end_error() - 8.466e-4).abs() / 8.466e-4 < 5e-3);
        assert!((order(coarse.end_error(), fine.end_error()) - 1.399).abs() < 0.01);
    }

    #[test]
    fn manufactured_pair_reduces() {
        // kappa=0, beta=alpha: f = omega_1 = 1
        let p = OdeProblem {
            alpha: 0.4,
            beta: 0.4,
            kappa: 0.0,
            mesh: uniform_mesh(1.0, 4).unwrap(),
        };
        assert_eq!(p.source(0.7), 1.0);
        assert!((p.exact(0.7) - 0.7f64.powf(0.4) / gamma_pos(1.4)).abs() < 1e-15);
    }

    #[test]
    fn smooth_solution_converges_at_classical_rate() {
        let p = |n| OdeProblem {
            alpha: 0.5,
            beta: 2.0,
            kappa: 1.0,
            mesh: uniform_mesh(1.0, n).unwrap(),
        };
        let e1 = solve_ode(&p(128)).unwrap().end_error();
        let e2 = solve_ode(&p(256)).unwrap().end_error();
        assert!(order(e1, e2) >= 2.0 - 0.5 - 0.1, "{}", order(e1, e2));
    }

    #[test]
    fn ending_level_regimes() {
        // alpha=0.6, beta=0.3: r* = 2; predicted min(2-alpha, r(1+beta-alpha)),
        // with the log loss at r = r*
        let (alpha, beta) = (0.6, 0.3);
        let rstar = (2.0 - alpha) / (1.0 + beta - alpha);
        let log_loss = ((1.0 + 1024f64.ln()) / (1.0 + 512f64.ln())).log2();
        for (r, predicted) in [
            (1.0, 1.0 + beta - alpha),
            (rstar, rstar * (1.0 + beta - alpha) - log_loss),
            (rstar + 1.0, 2.0 - alpha),
        ] {
            let e1 = solve_ode(&ode(alpha, beta, r, 256)).unwrap().end_error();
            let e2 = solve_ode(&ode(alpha, beta, r, 512)).unwrap().end_error();
            assert!(
                (order(e1, e2) - predicted).abs() < 0.1,
                "r={r}: {}",
                order(e1, e2)
            );
        }
    }

    #[test]
    fn pde_modes_follow_scalar_problem() {
        let mut p = PdeProblem::new(0.6, 0.3, 1.0, graded_mesh(1.0, 32, 2.0).unwrap());
        p.space_intervals = 64;
        let traj = solve_pde(&p).unwrap();
        let kappa_eff = p.kappa - p.discrete_eigenvalue();
        let amp =
            solve_scalar(&p.mesh, p.alpha, kappa_eff, 0.0, |t| p.source_amplitude(t)).unwrap();
        let xs = p.interior_nodes();
        for n in 1..=32 {
            for (i, x) in xs.iter().enumerate() {
                let want = amp[n] * x.sin();
                assert!((traj.values[n][i] - want).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn pde_beginning_level_value() {
        let p = PdeProblem::new(0.6, 0.3, 1.0, uniform_mesh(1.0, 64).unwrap());
        let t = solve_pde(&p).unwrap();
        assert!(
            (t.begin_error() - 2.192e-1).abs() / 2.192e-1 < 5e-3,
            "{}",
            t.begin_error()
        );
        assert_eq!(t.values[5].len(), 1023);
        assert_eq!(t.errors.len(), 65);
    }

    #[test]
    fn tridiagonal_against_dense() {
        let rhs = [1.0, -2.0, 0.5, 3.0];
        let x = solve_tridiagonal_const(3.0, 1.0, &rhs).unwrap();
        for i in 0..4 {
            let left = if i > 0 { x[i - 1] } else { 0.0 };
            let right = if i < 3 { x[i + 1] } else { 0.0 };
            assert!((3.0 * x[i] - left - right - rhs[i]).abs() < 1e-14);
        }
        assert!(matches!(
            solve_tridiagonal_const(0.0, 1.0, &rhs),
            Err(Error::SingularSystem { row: 0 })
        ));
    }

    #[test]
    fn truncation_bound_polynomial_case() {
        let m = graded_mesh(1.0, 8, 2.0).unwrap();
        let row = l1_row(&m, 0.4, 8).unwrap();
        let mut want = row.leading() * m.tau(8).powi(2);
        for k in 1..8 {
            want += (row.coeffs[8 - k - 1] - row.coeffs[8 - k]) * m.tau(k).powi(2);
        }
        let got = truncation_bound(&m, 0.4, 2.0, 8).unwrap();
        assert!((got - want).abs() / want < 1e-12);
    }

    #[test]
    fn truncation_bound_first_level() {
        let m = graded_mesh(1.0, 16, 2.0).unwrap();
        let beta: f64 = 0.6;
        let c = (beta * (beta - 1.0)).abs() / gamma_pos(1.0 + beta);
        let row = l1_row(&m, 0.3, 1).unwrap();
        let want = row.leading() * 2.0 * c * m.tau(1).powf(beta) / beta;
        assert!((truncation_bound(&m, 0.3, beta, 1).unwrap() - want).abs() / want < 1e-14);
    }

    #[test]
    fn truncation_pieces_match_quadrature() {
        let m = graded_mesh(1.0, 32, 2.0).unwrap();
        let beta: f64 = 0.6;
        let c = (beta * (beta - 1.0)).abs() / gamma_pos(1.0 + beta);
        for k in [1, 2, 7, 32] {
            let a = m.t(k - 1);
            let q = integrate_singular_ends(
                |p| 2.0 * c * p.from_left * (a + p.from_left).powf(beta - 2.0),
                a,
                m.t(k),
                if k == 1 { beta - 1.0 } else { 0.0 },
                0.0,
                1e-15,
            )
            .unwrap();
            let got = local_truncation(&m, beta, k);
            assert!((got - q).abs() / q < 1e-9, "k={k}");
        }
    }

    #[test]
    fn truncation_bound_dominates_and_decreases() {
        let (alpha, beta) = (0.3, 0.6);
        let b32 = truncation_bound(&graded_mesh(1.0, 32, 2.0).unwrap(), alpha, beta, 32).unwrap();
        let b64 = truncation_bound(&graded_mesh(1.0, 64, 2.0).unwrap(), alpha, beta, 64).unwrap();
        assert!(b32.is_finite() && b64 < b32);

        // the bound covers the actual consistency error of the exact solution
        let m = graded_mesh(1.0, 32, 2.0).unwrap();
        for n in [1, 5, 32] {
            let row = l1_row(&m, alpha, n).unwrap();
            let u = |t: f64| omega_pos(1.0 + beta, t);
            let d: f64 = (1..=n)
                .map(|k| row.a(k) * (u(m.t(k)) - u(m.t(k - 1))))
                .sum();
            let actual = (d - omega_pos(1.0 + beta - alpha, m.t(n))).abs();
            assert!(actual <= truncation_bound(&m, alpha, beta, n).unwrap());
        }
    }

    #[test]
    fn stability_mirror() {
        let m = uniform_mesh(1.0, 64).unwrap();
        let alpha = 0.5;
        let kappa = 1.0;
        let src = |t: f64| 1.0 + t;
        let u = solve_scalar(&m, alpha, kappa, 0.0, src).unwrap();
        let input = GronwallInput {
            v0: 0.0,
            f: (1..=64).map(|n| src(m.t(n)).abs()).collect(),
            kappa,
            alpha,
            mesh: m.clone(),
            node_choice: NodeChoice::Current,
        };
        for n in 1..=64 {
            assert!(u[n] <= gronwall_bound(&input, n).unwrap());
        }
    }

    #[test]
    fn invalid_parameters() {
        assert!(solve_ode(&ode(1.0, 0.3, 1.0, 8)).is_err());
        assert!(solve_ode(&ode(0.5, 1.0, 1.0, 8)).is_err());
        let mut p = PdeProblem::new(0.5, 0.5, 1.0, uniform_mesh(1.0, 4).unwrap());
        p.space_intervals = 1;
        assert!(solve_pde(&p).is_err());
        let stiff = OdeProblem {
            alpha: 0.5,
            beta: 0.5,
            kappa: 10.0,
            mesh: uniform_mesh(10.0, 2).unwrap(),
        };
        assert!(matches!(
            solve_ode(&stiff),
            Err(Error::StepSize { level: 1, .. })
        ));
    }
}
