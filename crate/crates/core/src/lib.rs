//! Synchronization over O(d) and the unit sphere on weighted graphs.
//!
//! Given a graph whose edges carry noisy orthogonal transforms, the library
//! estimates one group element (or unit vector) per vertex from the bottom
//! spectrum of the normalized connection Laplacian, rounds the eigenvectors
//! into feasible solutions, and certifies the frustration each solution
//! achieves against eigenvalue bounds. Companion modules provide exact
//! brute-force oracles on tiny instances, named instance families, and a
//! verification suite that re-checks every certified inequality numerically.
//!
//! The numeric core is generic over the scalar type through the
//! [`Scalar`] trait (`f32` or `f64`); the aliases below fix the common
//! double-precision instantiations.

pub mod error;
pub mod fields;
pub mod frustration;
pub mod generators;
pub mod graph;
pub mod laplacian;
pub mod linalg;
pub mod oracle;
pub mod rounding;
pub mod scalar;
pub mod tol;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Double-precision connection graph.
pub type Graph64 = graph::ConnectionGraph<f64>;
/// Single-precision connection graph.
pub type Graph32 = graph::ConnectionGraph<f32>;
/// Double-precision vertex field.
pub type Field64 = fields::VertexField<f64>;
/// Single-precision vertex field.
pub type Field32 = fields::VertexField<f32>;
/// Double-precision group potential.
pub type Potential64 = fields::GroupPotential<f64>;
/// Double-precision synchronization solution.
pub type Solution64 = rounding::SyncSolution<f64>;
/// Double-precision bound report.
pub type BoundReport64 = verify::BoundReport<f64>;
