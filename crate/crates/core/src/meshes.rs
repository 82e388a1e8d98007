//! Temporal meshes `0 = t_0 < t_1 < ... < t_N = T`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A strictly increasing temporal grid starting at zero.
///
/// Steps are stored as differences of nodes, so `steps[k-1] == nodes[k] - nodes[k-1]`
/// holds bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    nodes: Vec<f64>,
    steps: Vec<f64>,
}

/// Step-size statistics of a mesh.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshStats {
    /// Largest adjacent ratio `tau_{n+1} / tau_n`.
    pub rho: f64,
    pub tau_max: f64,
    pub tau_min: f64,
}

impl Mesh {
    fn from_valid_nodes(nodes: Vec<f64>) -> Self {
        let steps = nodes.windows(2).map(|w| w[1] - w[0]).collect();
        Mesh { nodes, steps }
    }

    /// Nodes `t_0..=t_N`.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Steps `tau_1..=tau_N`, stored at indices `0..N`.
    pub fn steps(&self) -> &[f64] {
        &self.steps
    }

    /// Number of steps `N`.
    pub fn count(&self) -> usize {
        self.steps.len()
    }

    pub fn horizon(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// `t_n`.
    pub fn t(&self, n: usize) -> f64 {
        self.nodes[n]
    }

    /// `tau_k = t_k - t_{k-1}`, for `1 <= k <= N`.
    pub fn tau(&self, k: usize) -> f64 {
        self.steps[k - 1]
    }

    pub fn stats(&self) -> MeshStats {
        mesh_stats(self)
    }
}

/// Graded mesh `t_n = T (n/N)^r`.
pub fn graded_mesh(horizon: f64, count: usize, grading: f64) -> Result<Mesh> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::Domain {
            param: "T",
            value: horizon,
            reason: "horizon must be positive and finite",
        });
    }
    if count == 0 {
        return Err(Error::Domain {
            param: "N",
            value: 0.0,
            reason: "mesh needs at least one step",
        });
    }
    if !(grading >= 1.0) || !grading.is_finite() {
        return Err(Error::Domain {
            param: "r",
            value: grading,
            reason: "grading exponent must be >= 1",
        });
    }
    let n_f = count as f64;
    let mut nodes: Vec<f64> = (0..=count)
        .map(|n| {
            let x = n as f64 / n_f;
            if grading == 1.0 {
                horizon * x
            } else {
                horizon * x.powf(grading)
            }
        })
        .collect();
    nodes[count] = horizon;
    // powf can collapse the first few nodes for huge r and N; reject rather than
    // silently produce zero steps.
    if let Some(index) = first_non_increasing(&nodes) {
        return Err(Error::NonMonotoneMesh {
            index,
            value: nodes[index],
        });
    }
    Ok(Mesh::from_valid_nodes(nodes))
}

/// Uniform mesh with step `T/N`.
pub fn uniform_mesh(horizon: f64, count: usize) -> Result<Mesh> {
    graded_mesh(horizon, count, 1.0)
}

/// Smooth-step mesh with `tau_k = 0.4 sin(3 k pi / n) + 0.41`.
pub fn sin_mesh(count: usize) -> Result<Mesh> {
    if count == 0 {
        return Err(Error::Domain {
            param: "n",
            value: 0.0,
            reason: "mesh needs at least one step",
        });
    }
    let n_f = count as f64;
    let mut nodes = Vec::with_capacity(count + 1);
    nodes.push(0.0);
    let mut t = 0.0;
    for k in 1..=count {
        t += 0.4 * (3.0 * k as f64 * PI / n_f).sin() + 0.41;
        nodes.push(t);
    }
    Ok(Mesh::from_valid_nodes(nodes))
}

/// Mesh from user-supplied nodes; must start at 0 and increase strictly.
pub fn custom_mesh(nodes: &[f64]) -> Result<Mesh> {
    if nodes.len() < 2 {
        return Err(Error::InvalidMesh(format!(
            "need at least two nodes, got {}",
            nodes.len()
        )));
    }
    if nodes[0] != 0.0 {
        return Err(Error::InvalidMesh(format!(
            "first node must be 0, got {}",
            nodes[0]
        )));
    }
    if let Some(bad) = nodes.iter().position(|t| !t.is_finite()) {
        return Err(Error::InvalidMesh(format!("node {bad} is not finite")));
    }
    if let Some(index) = first_non_increasing(nodes) {
        return Err(Error::NonMonotoneMesh {
            index,
            value: nodes[index],
        });
    }
    Ok(Mesh::from_valid_nodes(nodes.to_vec()))
}

fn first_non_increasing(nodes: &[f64]) -> Option<usize> {
    nodes.windows(2).position(|w| !(w[1] > w[0])).map(|i| i + 1)
}

pub fn mesh_stats(mesh: &Mesh) -> MeshStats {
    let steps = mesh.steps();
    let rho = steps
        .windows(2)
        .map(|w| w[1] / w[0])
        .fold(None, |acc: Option<f64>, x| {
            Some(acc.map_or(x, |a| a.max(x)))
        })
        .unwrap_or(1.0);
    let tau_max = steps.iter().copied().fold(f64::MIN, f64::max);
    let tau_min = steps.iter().copied().fold(f64::MAX, f64::min);
    MeshStats {
        rho,
        tau_max,
        tau_min,
    }
}
