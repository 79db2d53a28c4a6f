//! Numerical tolerances shared across modules.
//!
//! All values are stated for `f64`; generic code converts them with
//! [`crate::scalar::cast`]. They are part of the library's contracts, so they
//! live in one place instead of appearing as scattered literals.

/// Frobenius defect `‖ρ·ρᵀ − I‖_F` allowed for an edge transform to count as
/// orthogonal.
pub const ORTHOGONALITY: f64 = 1e-10;

/// Orthogonality defect allowed for the matrices of a group potential.
pub const POTENTIAL_ORTHOGONALITY: f64 = 1e-9;

/// Maximum entrywise asymmetry `|a_ij − a_ji|`, relative to `1 + ‖A‖_F`,
/// accepted by the symmetric eigensolver.
pub const SYMMETRY: f64 = 1e-12;

/// Smallest singular value below which a matrix is treated as singular and
/// the polar factor falls back to the identity.
pub const SINGULAR_SVAL: f64 = 1e-12;

/// Block norm below which a vertex block counts as the zero vector.
pub const ZERO_BLOCK: f64 = 1e-14;

/// Spectral gap λ₂ at or below this value makes every bound that divides by
/// it vacuous (reported with an infinite right-hand side).
pub const SPECTRAL_GAP_FLOOR: f64 = 1e-10;

/// Default absolute slack allowed when checking an inequality.
pub const BOUND_SLACK: f64 = 1e-9;

/// Relative tolerance on `|⟨x,y⟩_{D1}|` for inputs that must be
/// D1-orthogonal (paired ill-balance diagnostics).
pub const D1_ORTHO_REL: f64 = 1e-6;

/// Eigenpair residual budget: `‖A·q − λ·q‖ ≤ EIGEN_RESIDUAL · (1 + ‖A‖_F)`.
pub const EIGEN_RESIDUAL: f64 = 1e-8;
