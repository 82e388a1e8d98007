//! Nonuniform-mesh discretizations of the Caputo derivative and the tools
//! used to analyze them.
//!
//! * [`meshes`]: graded, uniform, smooth-step and custom temporal meshes.
//! * [`specialfns`]: Gamma, `omega_alpha` and the Mittag-Leffler function.
//! * [`kernels`]: L1 and L21-sigma discrete convolution (DC) kernels.
//! * [`dcc`]: discrete complementary convolution (DCC) kernels, their
//!   continuous surrogate and the quotient constant.
//! * [`gronwall`]: the fractional Gronwall bound and extremal sequences.
//! * [`solver`]: L1 time stepping for a scalar ODE and a 1-D reaction-diffusion
//!   problem with manufactured solutions.
//! * [`analysis`]: discrete convolution sums and observed orders.
//! * [`quadform`]: the `M(d)` quadratic form behind the discrete energy inequality.
//! * [`harness`]: convergence sweeps and table reproduction.

// `!(x > 0.0)` style checks are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// quadrature nodes and Lanczos coefficients are kept as published
#![allow(clippy::excessive_precision)]

pub mod analysis;
pub mod dcc;
pub mod error;
pub mod gronwall;
pub mod harness;
pub mod kernels;
pub mod meshes;
pub mod quad;
pub mod quadform;
pub mod solver;
pub mod specialfns;

pub use error::{Error, Result};
pub use meshes::{custom_mesh, graded_mesh, mesh_stats, sin_mesh, uniform_mesh, Mesh, MeshStats};
