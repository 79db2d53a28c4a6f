//! Assembly of the normalized graph Laplacian and the normalized connection
//! Laplacian, their quadratic forms, and their bottom spectra.
//!
//! The plain Laplacian acts on scalar vertex functions; the connection
//! Laplacian acts on stacked dn-vectors, its off-diagonal d×d block for edge
//! (i, j) being `−w_ij/√(d_i d_j) · ρ_ij`. Both are materialized densely;
//! the block-diagonal degree matrix never is: whitening multiplies blocks by
//! `d_i^{±1/2}` directly.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::fields::VertexField;
use crate::graph::ConnectionGraph;
use crate::linalg::{sym_eig, SymmetricEigenResult};
use crate::scalar::Scalar;

/// The two normalized matrices of a graph plus its degree vector.
///
/// `degrees` also represents the block-diagonal degree matrix of the
/// connection Laplacian (block `i` is `d_i·I_d`), which is applied
/// vertex-blockwise instead of being materialized.
#[derive(Debug, Clone)]
pub struct LaplacianPair<F> {
    pub l0_normalized: Array2<F>,
    pub l1_normalized: Array2<F>,
    pub degrees: Array1<F>,
}

/// Which normalized Laplacian a spectral computation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaplacianKind {
    /// The dn×dn connection Laplacian.
    Connection,
    /// The n×n plain graph Laplacian.
    Plain,
}

/// Bottom spectrum of one of the normalized Laplacians.
///
/// `z_vectors` are the orthonormal eigenvectors (columns paired with
/// `lambdas`); for the connection Laplacian `x_fields` carries the
/// degree-unwhitened fields obtained by scaling block `i` with `d_i^{-1/2}`.
#[derive(Debug, Clone)]
pub struct SpectralResult<F> {
    pub lambdas: Vec<F>,
    pub z_vectors: Array2<F>,
    pub x_fields: Option<Vec<VertexField<F>>>,
}

fn assemble_l0<F: Scalar>(g: &ConnectionGraph<F>, degrees: &Array1<F>) -> Array2<F> {
    let n = g.n();
    let mut m = Array2::<F>::zeros((n, n));
    for i in 0..n {
        m[[i, i]] = F::one();
    }
    for e in g.edges() {
        let coupling = e.weight / (degrees[e.i] * degrees[e.j]).sqrt();
        m[[e.i, e.j]] -= coupling;
        m[[e.j, e.i]] -= coupling;
    }
    m
}

fn assemble_l1<F: Scalar>(g: &ConnectionGraph<F>, degrees: &Array1<F>) -> Array2<F> {
    let n = g.n();
    let d = g.d();
    let mut m = Array2::<F>::zeros((n * d, n * d));
    for i in 0..n * d {
        m[[i, i]] = F::one();
    }
    for e in g.edges() {
        let coupling = e.weight / (degrees[e.i] * degrees[e.j]).sqrt();
        for r in 0..d {
            for c in 0..d {
                let value = coupling * e.transform[[r, c]];
                m[[e.i * d + r, e.j * d + c]] -= value;
                m[[e.j * d + c, e.i * d + r]] -= value;
            }
        }
    }
    m
}

/// Builds both normalized Laplacians of a valid graph.
pub fn build<F: Scalar>(g: &ConnectionGraph<F>) -> Result<LaplacianPair<F>> {
    g.validated()?;
    let degrees = g.degree_vector();
    Ok(LaplacianPair {
        l0_normalized: assemble_l0(g, &degrees),
        l1_normalized: assemble_l1(g, &degrees),
        degrees,
    })
}

/// Quadratic form of the unnormalized connection Laplacian by direct edge
/// summation: `Σ_{(i,j)∈E} w_ij ‖v_i − ρ_ij v_j‖²`.
pub fn quadratic_form_l1<F: Scalar>(g: &ConnectionGraph<F>, v: &VertexField<F>) -> Result<F> {
    if v.n() != g.n() || v.d() != g.d() {
        return Err(Error::ShapeMismatch(format!(
            "field is ({}, {}), graph is ({}, {})",
            v.n(),
            v.d(),
            g.n(),
            g.d()
        )));
    }
    let d = g.d();
    let mut acc = F::zero();
    for e in g.edges() {
        let vi = v.block(e.i);
        let vj = v.block(e.j);
        let mut term = F::zero();
        for r in 0..d {
            let mut transported = F::zero();
            for c in 0..d {
                transported += e.transform[[r, c]] * vj[c];
            }
            let diff = vi[r] - transported;
            term += diff * diff;
        }
        acc += e.weight * term;
    }
    Ok(acc)
}

/// Quadratic form of the unnormalized plain Laplacian:
/// `Σ_{(i,j)∈E} w_ij (f_i − f_j)²`.
pub fn quadratic_form_l0<F: Scalar>(g: &ConnectionGraph<F>, f: &Array1<F>) -> Result<F> {
    if f.len() != g.n() {
        return Err(Error::ShapeMismatch(format!(
            "function has length {}, graph has {} vertices",
            f.len(),
            g.n()
        )));
    }
    let mut acc = F::zero();
    for e in g.edges() {
        let diff = f[e.i] - f[e.j];
        acc += e.weight * diff * diff;
    }
    Ok(acc)
}

/// The `k` smallest eigenpairs of the chosen normalized Laplacian.
pub fn bottom_spectrum<F: Scalar>(
    g: &ConnectionGraph<F>,
    kind: LaplacianKind,
    k: usize,
) -> Result<SpectralResult<F>> {
    g.validated()?;
    let degrees = g.degree_vector();
    let matrix = match kind {
        LaplacianKind::Connection => assemble_l1(g, &degrees),
        LaplacianKind::Plain => assemble_l0(g, &degrees),
    };
    let SymmetricEigenResult { values, vectors } = sym_eig(&matrix, k)?;
    let x_fields = match kind {
        LaplacianKind::Plain => None,
        LaplacianKind::Connection => {
            let d = g.d();
            let mut fields = Vec::with_capacity(k);
            for c in 0..k {
                let mut data = Array1::<F>::zeros(g.n() * d);
                for i in 0..g.n() {
                    let scale = degrees[i].sqrt();
                    for r in 0..d {
                        data[i * d + r] = vectors[[i * d + r, c]] / scale;
                    }
                }
                fields.push(VertexField::new(g.n(), d, data)?);
            }
            Some(fields)
        }
    };
    Ok(SpectralResult { lambdas: values.to_vec(), z_vectors: vectors, x_fields })
}

/// Second-smallest eigenvalue of the normalized plain Laplacian.
pub fn lambda2_l0<F: Scalar>(g: &ConnectionGraph<F>) -> Result<F> {
    if g.n() < 2 {
        return Err(Error::ShapeMismatch("spectral gap needs at least two vertices".into()));
    }
    Ok(bottom_spectrum(g, LaplacianKind::Plain, 2)?.lambdas[1])
}
