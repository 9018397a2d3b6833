//! Block monotone Jacobi and Gauss-Seidel solvers for coupled two-component
//! reaction-diffusion systems on a rectangle.
//!
//! The numeric core is generic over [`Real`]; the aliases below fix it to `f64`.

// Negated comparisons are deliberate: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod blocksolve;
pub mod discretization;
pub mod error;
pub mod init_solutions;
pub mod mesh;
pub mod models;
pub mod monotone;
pub mod oracle;
pub mod reaction;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Mesh = mesh::Mesh<f64>;
pub type MeshSpec = mesh::MeshSpec<f64>;
pub type Field = mesh::Field<f64>;
pub type Pair = mesh::Pair<f64>;
pub type ProblemSpec = reaction::ProblemSpec<f64>;
