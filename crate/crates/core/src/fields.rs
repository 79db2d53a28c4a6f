//! Vertex fields and group potentials: the per-vertex values the
//! synchronization problems assign, plus the pointwise transformations on
//! them (threshold rounding, normalization, column stacking).

use ndarray::{s, Array1, Array2, ArrayView1};

use crate::error::{Error, Result};
use crate::linalg::frobenius;
use crate::scalar::{cast, Scalar};
use crate::tol;

/// An assignment `V → R^d`, stored as a stacked dn-vector; block `i` is the
/// value at vertex `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexField<F> {
    n: usize,
    d: usize,
    data: Array1<F>,
}

impl<F: Scalar> VertexField<F> {
    /// Wraps a stacked dn-vector. Fails when the length does not match or an
    /// entry is non-finite.
    pub fn new(n: usize, d: usize, data: Array1<F>) -> Result<Self> {
        if data.len() != n * d {
            return Err(Error::ShapeMismatch(format!(
                "field data has length {}, expected n·d = {}",
                data.len(),
                n * d
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("vertex field"));
        }
        Ok(VertexField { n, d, data })
    }

    pub fn zeros(n: usize, d: usize) -> Self {
        VertexField { n, d, data: Array1::zeros(n * d) }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn data(&self) -> &Array1<F> {
        &self.data
    }

    pub fn block(&self, i: usize) -> ArrayView1<'_, F> {
        self.data.slice(s![i * self.d..(i + 1) * self.d])
    }

    pub fn set_block(&mut self, i: usize, values: &[F]) {
        assert_eq!(values.len(), self.d);
        for (k, &v) in values.iter().enumerate() {
            self.data[i * self.d + k] = v;
        }
    }

    pub fn block_norm_sq(&self, i: usize) -> F {
        self.block(i).iter().fold(F::zero(), |acc, &x| acc + x * x)
    }

    pub fn block_norm(&self, i: usize) -> F {
        self.block_norm_sq(i).sqrt()
    }

    /// True when the block norm is at or below the zero-block threshold.
    pub fn block_is_zero(&self, i: usize) -> bool {
        self.block_norm(i) <= cast(tol::ZERO_BLOCK)
    }

    /// Vector of block norms `(‖x_1‖, …, ‖x_n‖)`.
    pub fn norm_field(&self) -> Array1<F> {
        Array1::from_iter((0..self.n).map(|i| self.block_norm(i)))
    }

    /// Threshold rounding: block `i` becomes `x_i/‖x_i‖` when `‖x_i‖² ≥ u`,
    /// and zero otherwise. Requires `u > 0`.
    pub fn threshold(&self, u: F) -> VertexField<F> {
        assert!(u > F::zero(), "threshold must be positive");
        let mut out = VertexField::zeros(self.n, self.d);
        for i in 0..self.n {
            let norm_sq = self.block_norm_sq(i);
            if norm_sq >= u {
                let norm = norm_sq.sqrt();
                for k in 0..self.d {
                    out.data[i * self.d + k] = self.data[i * self.d + k] / norm;
                }
            }
        }
        out
    }

    /// Normalizes every nonzero block to unit length and leaves zero blocks
    /// (norm at or below `tol::ZERO_BLOCK`) untouched.
    pub fn normalize_nonzero(&self) -> VertexField<F> {
        let mut out = VertexField::zeros(self.n, self.d);
        for i in 0..self.n {
            let norm = self.block_norm(i);
            if norm > cast(tol::ZERO_BLOCK) {
                for k in 0..self.d {
                    out.data[i * self.d + k] = self.data[i * self.d + k] / norm;
                }
            }
        }
        out
    }

    pub fn scaled(&self, factor: F) -> VertexField<F> {
        VertexField { n: self.n, d: self.d, data: self.data.mapv(|x| x * factor) }
    }

    /// Indices of the blocks with nonzero norm.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| !self.block_is_zero(i)).collect()
    }

    pub fn is_zero(&self) -> bool {
        (0..self.n).all(|i| self.block_is_zero(i))
    }
}

/// An assignment `V → O(d)`: one orthogonal matrix per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupPotential<F> {
    n: usize,
    d: usize,
    matrices: Vec<Array2<F>>,
}

impl<F: Scalar> GroupPotential<F> {
    /// Wraps per-vertex matrices, checking shape and orthogonality within
    /// `tol::POTENTIAL_ORTHOGONALITY`.
    pub fn new(matrices: Vec<Array2<F>>) -> Result<Self> {
        if matrices.is_empty() {
            return Err(Error::ShapeMismatch("potential needs at least one vertex".into()));
        }
        let d = matrices[0].nrows();
        let eye = Array2::<F>::eye(d);
        for (i, m) in matrices.iter().enumerate() {
            if m.dim() != (d, d) {
                return Err(Error::ShapeMismatch(format!(
                    "matrix at vertex {i} is {:?}, expected ({d}, {d})",
                    m.dim()
                )));
            }
            let defect = frobenius(&(&m.dot(&m.t()) - &eye));
            if defect > cast(tol::POTENTIAL_ORTHOGONALITY) {
                return Err(Error::ShapeMismatch(format!(
                    "matrix at vertex {i} is not orthogonal (defect {defect:e})"
                )));
            }
        }
        Ok(GroupPotential { n: matrices.len(), d, matrices })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn matrix(&self, i: usize) -> &Array2<F> {
        &self.matrices[i]
    }

    pub fn matrices(&self) -> &[Array2<F>] {
        &self.matrices
    }

    /// Column `k` of every vertex matrix, as one vertex field.
    pub fn column(&self, k: usize) -> VertexField<F> {
        assert!(k < self.d);
        let mut out = VertexField::zeros(self.n, self.d);
        for i in 0..self.n {
            for r in 0..self.d {
                out.data[i * self.d + r] = self.matrices[i][[r, k]];
            }
        }
        out
    }
}

/// Stacks `d` vertex fields into per-vertex d×d matrices
/// `X_i = [x_i^1 ⋯ x_i^d]`.
pub fn stack_columns<F: Scalar>(fields: &[VertexField<F>]) -> Result<Vec<Array2<F>>> {
    if fields.is_empty() {
        return Err(Error::ShapeMismatch("need at least one field to stack".into()));
    }
    let n = fields[0].n();
    let d = fields[0].d();
    if fields.len() != d {
        return Err(Error::ShapeMismatch(format!(
            "stacking needs exactly d = {d} fields, got {}",
            fields.len()
        )));
    }
    if fields.iter().any(|f| f.n() != n || f.d() != d) {
        return Err(Error::ShapeMismatch("all stacked fields must share (n, d)".into()));
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut m = Array2::<F>::zeros((d, d));
        for (k, field) in fields.iter().enumerate() {
            let block = field.block(i);
            for r in 0..d {
                m[[r, k]] = block[r];
            }
        }
        out.push(m);
    }
    Ok(out)
}

/// Splits a potential into its `d` column fields; the left inverse of
/// [`stack_columns`] on potentials.
pub fn extract_columns<F: Scalar>(potential: &GroupPotential<F>) -> Vec<VertexField<F>> {
    (0..potential.d()).map(|k| potential.column(k)).collect()
}

/// D1-inner product `⟨x, y⟩_{D1} = Σ_i d_i ⟨x_i, y_i⟩`.
pub fn d1_inner<F: Scalar>(
    degrees: &Array1<F>,
    x: &VertexField<F>,
    y: &VertexField<F>,
) -> Result<F> {
    if x.n() != y.n() || x.d() != y.d() || degrees.len() != x.n() {
        return Err(Error::ShapeMismatch("D1 inner product operands disagree".into()));
    }
    let mut acc = F::zero();
    for i in 0..x.n() {
        let mut dot = F::zero();
        for (a, b) in x.block(i).iter().zip(y.block(i).iter()) {
            dot += *a * *b;
        }
        acc += degrees[i] * dot;
    }
    Ok(acc)
}

/// Squared D1-norm `‖x‖²_{D1}`.
pub fn d1_norm_sq<F: Scalar>(degrees: &Array1<F>, x: &VertexField<F>) -> F {
    let mut acc = F::zero();
    for i in 0..x.n() {
        acc += degrees[i] * x.block_norm_sq(i);
    }
    acc
}

/// Gram–Schmidt in the D1 inner product, then rescaling of every field to
/// `‖x‖²_{D1} = target_norm_sq`.
pub fn d1_orthonormalize<F: Scalar>(
    degrees: &Array1<F>,
    fields: &[VertexField<F>],
    target_norm_sq: F,
) -> Result<Vec<VertexField<F>>> {
    let mut out: Vec<VertexField<F>> = Vec::with_capacity(fields.len());
    for field in fields {
        let mut current = field.clone();
        for prev in &out {
            let coeff = d1_inner(degrees, prev, &current)? / d1_norm_sq(degrees, prev);
            let adjusted = current.data() - &prev.data().mapv(|x| x * coeff);
            current = VertexField::new(field.n(), field.d(), adjusted)?;
        }
        let norm_sq = d1_norm_sq(degrees, &current);
        if norm_sq <= F::zero() {
            return Err(Error::Degenerate("linearly dependent fields in Gram-Schmidt".into()));
        }
        let scale = (target_norm_sq / norm_sq).sqrt();
        out.push(current.scaled(scale));
    }
    Ok(out)
}

/// Writes a field as one line per vertex, entries at 17 significant digits.
pub fn write_field<F: Scalar>(field: &VertexField<F>) -> String {
    let mut out = String::new();
    for i in 0..field.n() {
        let row: Vec<String> = field.block(i).iter().map(|x| format!("{x:.16e}")).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Writes a potential as one line per vertex, the d×d matrix row-major.
pub fn write_potential<F: Scalar>(potential: &GroupPotential<F>) -> String {
    let mut out = String::new();
    for i in 0..potential.n() {
        let row: Vec<String> =
            potential.matrix(i).iter().map(|x| format!("{x:.16e}")).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}
