//! Dense numerical kernels: symmetric eigendecomposition, small-matrix SVD,
//! nearest orthogonal matrix, and Haar-uniform orthogonal sampling.
//!
//! Everything here is deterministic for a fixed input (the only randomness is
//! the caller-supplied RNG of [`haar_orthogonal`]) and sized for desk-scale
//! problems: dense matrices up to a few thousand rows, transforms up to 16×16.
//!
//! The eigensolver is the classic two-stage reduction (Householder
//! tridiagonalization followed by implicit-shift QL, as in EISPACK's
//! tred2/tql2), which keeps the whole decomposition reproducible across runs.

use ndarray::{Array1, Array2};
use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::{cast, Scalar};
use crate::tol;

/// Frobenius norm of a dense matrix.
pub fn frobenius<F: Scalar>(a: &Array2<F>) -> F {
    a.iter().fold(F::zero(), |acc, &x| acc + x * x).sqrt()
}

/// Largest transform dimension accepted by [`svd_small`] and [`polar`].
pub const MAX_SMALL_DIM: usize = 16;

const MAX_QL_ITER: usize = 64;
const MAX_JACOBI_SWEEPS: usize = 60;

/// The `k` smallest eigenpairs of a symmetric matrix.
///
/// `values` is non-decreasing; column `c` of `vectors` pairs with
/// `values[c]`, and the columns are orthonormal.
#[derive(Debug, Clone)]
pub struct SymmetricEigenResult<F> {
    pub values: Array1<F>,
    pub vectors: Array2<F>,
}

/// Singular value decomposition `X = U·diag(σ)·Vᵀ` of a small square matrix,
/// singular values in descending order.
#[derive(Debug, Clone)]
pub struct SvdSmall<F> {
    pub u: Array2<F>,
    pub sigma: Array1<F>,
    pub v: Array2<F>,
}

impl<F: Scalar> SvdSmall<F> {
    /// Smallest singular value.
    pub fn sigma_min(&self) -> F {
        self.sigma[self.sigma.len() - 1]
    }
}

/// Computes the `k` smallest eigenpairs of a symmetric matrix.
///
/// The input must be symmetric within `tol::SYMMETRY` relative to
/// `1 + ‖A‖_F`. Eigenvector signs follow a fixed convention (the
/// largest-magnitude entry is positive, ties broken by lowest index) so
/// repeated runs return identical output.
pub fn sym_eig<F: Scalar>(a: &Array2<F>, k: usize) -> Result<SymmetricEigenResult<F>> {
    let (rows, cols) = a.dim();
    if rows != cols {
        return Err(Error::ShapeMismatch(format!("matrix is {rows}x{cols}, expected square")));
    }
    let m = rows;
    if k == 0 || k > m {
        return Err(Error::ShapeMismatch(format!("requested {k} eigenpairs of a {m}x{m} matrix")));
    }
    let scale = F::one() + frobenius(a);
    let mut defect = F::zero();
    for r in 0..m {
        for c in r + 1..m {
            let diff = (a[[r, c]] - a[[c, r]]).abs();
            if diff > defect {
                defect = diff;
            }
        }
    }
    if defect > cast::<F>(tol::SYMMETRY) * scale {
        return Err(Error::NotSymmetric { defect: defect.to_f64().unwrap_or(f64::NAN) });
    }

    // Work on the exactly symmetrized copy.
    let mut v = a.clone();
    for r in 0..m {
        for c in r + 1..m {
            let half = (a[[r, c]] + a[[c, r]]) / cast(2.0);
            v[[r, c]] = half;
            v[[c, r]] = half;
        }
    }

    let mut diag = vec![F::zero(); m];
    let mut off = vec![F::zero(); m];
    tridiagonalize(&mut v, &mut diag, &mut off);
    ql_implicit(&mut v, &mut diag, &mut off)?;

    // Ascending sort with a deterministic permutation.
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&p, &q| diag[p].partial_cmp(&diag[q]).expect("finite eigenvalues"));

    let mut values = Array1::<F>::zeros(k);
    let mut vectors = Array2::<F>::zeros((m, k));
    for (c, &src) in order.iter().take(k).enumerate() {
        values[c] = diag[src];
        for r in 0..m {
            vectors[[r, c]] = v[[r, src]];
        }
        fix_column_sign(&mut vectors, c);
    }
    Ok(SymmetricEigenResult { values, vectors })
}

/// Makes the largest-magnitude entry of column `c` positive (lowest index on
/// ties).
fn fix_column_sign<F: Scalar>(vectors: &mut Array2<F>, c: usize) {
    let m = vectors.nrows();
    let mut best = 0usize;
    let mut best_abs = F::zero();
    for r in 0..m {
        let mag = vectors[[r, c]].abs();
        if mag > best_abs {
            best_abs = mag;
            best = r;
        }
    }
    if vectors[[best, c]] < F::zero() {
        for r in 0..m {
            vectors[[r, c]] = -vectors[[r, c]];
        }
    }
}

/// Householder reduction of a symmetric matrix to tridiagonal form
/// (EISPACK tred2). On return `v` accumulates the orthogonal transform,
/// `diag` holds the diagonal and `off[1..]` the subdiagonal.
fn tridiagonalize<F: Scalar>(v: &mut Array2<F>, diag: &mut [F], off: &mut [F]) {
    let n = diag.len();
    for j in 0..n {
        diag[j] = v[[n - 1, j]];
    }

    for i in (1..n).rev() {
        let mut scale = F::zero();
        let mut h = F::zero();
        for item in diag.iter().take(i) {
            scale += item.abs();
        }
        if scale == F::zero() {
            off[i] = diag[i - 1];
            for j in 0..i {
                diag[j] = v[[i - 1, j]];
                v[[i, j]] = F::zero();
                v[[j, i]] = F::zero();
            }
        } else {
            for item in diag.iter_mut().take(i) {
                *item /= scale;
                h += *item * *item;
            }
            let f = diag[i - 1];
            let mut g = h.sqrt();
            if f > F::zero() {
                g = -g;
            }
            off[i] = scale * g;
            h -= f * g;
            diag[i - 1] = f - g;
            for item in off.iter_mut().take(i) {
                *item = F::zero();
            }

            for j in 0..i {
                let f = diag[j];
                v[[j, i]] = f;
                let mut g = off[j] + v[[j, j]] * f;
                for k in j + 1..i {
                    g += v[[k, j]] * diag[k];
                    off[k] += v[[k, j]] * f;
                }
                off[j] = g;
            }
            let mut f = F::zero();
            for j in 0..i {
                off[j] /= h;
                f += off[j] * diag[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                off[j] -= hh * diag[j];
            }
            for j in 0..i {
                let f = diag[j];
                let g = off[j];
                for k in j..i {
                    let upd = v[[k, j]] - (f * off[k] + g * diag[k]);
                    v[[k, j]] = upd;
                }
                diag[j] = v[[i - 1, j]];
                v[[i, j]] = F::zero();
            }
        }
        diag[i] = h;
    }

    // Accumulate the Householder transformations.
    for i in 0..n.saturating_sub(1) {
        v[[n - 1, i]] = v[[i, i]];
        v[[i, i]] = F::one();
        let h = diag[i + 1];
        if h != F::zero() {
            for (k, item) in diag.iter_mut().enumerate().take(i + 1) {
                *item = v[[k, i + 1]] / h;
            }
            for j in 0..=i {
                let mut g = F::zero();
                for k in 0..=i {
                    g += v[[k, i + 1]] * v[[k, j]];
                }
                for (k, item) in diag.iter().enumerate().take(i + 1) {
                    let upd = v[[k, j]] - g * *item;
                    v[[k, j]] = upd;
                }
            }
        }
        for k in 0..=i {
            v[[k, i + 1]] = F::zero();
        }
    }
    for j in 0..n {
        diag[j] = v[[n - 1, j]];
        v[[n - 1, j]] = F::zero();
    }
    v[[n - 1, n - 1]] = F::one();
    off[0] = F::zero();
}

/// Implicit-shift QL iteration on a symmetric tridiagonal matrix
/// (EISPACK tql2), accumulating eigenvectors into `v`.
fn ql_implicit<F: Scalar>(v: &mut Array2<F>, diag: &mut [F], off: &mut [F]) -> Result<()> {
    let n = diag.len();
    for i in 1..n {
        off[i - 1] = off[i];
    }
    off[n - 1] = F::zero();

    let mut f = F::zero();
    let mut tst1 = F::zero();
    let eps = F::epsilon();
    for l in 0..n {
        let local = diag[l].abs() + off[l].abs();
        if local > tst1 {
            tst1 = local;
        }
        let mut m = l;
        while m < n {
            if off[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m >= n {
            m = n - 1;
        }

        if m > l {
            let mut iter = 0usize;
            loop {
                iter += 1;
                if iter > MAX_QL_ITER {
                    return Err(Error::NoConvergence {
                        residual: off[l].abs().to_f64().unwrap_or(f64::NAN),
                    });
                }

                let g = diag[l];
                let two = cast::<F>(2.0);
                let mut p = (diag[l + 1] - g) / (two * off[l]);
                let mut r = p.hypot(F::one());
                if p < F::zero() {
                    r = -r;
                }
                diag[l] = off[l] / (p + r);
                diag[l + 1] = off[l] * (p + r);
                let dl1 = diag[l + 1];
                let mut h = g - diag[l];
                for item in diag.iter_mut().take(n).skip(l + 2) {
                    *item -= h;
                }
                f += h;

                p = diag[m];
                let mut c = F::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = off[l + 1];
                let mut s = F::zero();
                let mut s2 = F::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * off[i];
                    h = c * p;
                    r = p.hypot(off[i]);
                    off[i + 1] = s * r;
                    s = off[i] / r;
                    c = p / r;
                    p = c * diag[i] - s * g;
                    diag[i + 1] = h + s * (c * g + s * diag[i]);

                    for k in 0..n {
                        h = v[[k, i + 1]];
                        v[[k, i + 1]] = s * v[[k, i]] + c * h;
                        v[[k, i]] = c * v[[k, i]] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * off[l] / dl1;
                off[l] = s * p;
                diag[l] = c * p;

                if off[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        diag[l] += f;
        off[l] = F::zero();
    }
    Ok(())
}

/// One-sided Jacobi SVD of a square matrix with `d ≤ MAX_SMALL_DIM`.
///
/// Returns fully orthogonal `u`, `v` even for rank-deficient input; the
/// missing left singular directions are completed deterministically from
/// standard basis vectors.
pub fn svd_small<F: Scalar>(x: &Array2<F>) -> Result<SvdSmall<F>> {
    let (rows, cols) = x.dim();
    if rows != cols {
        return Err(Error::ShapeMismatch(format!("matrix is {rows}x{cols}, expected square")));
    }
    let d = rows;
    if d == 0 || d > MAX_SMALL_DIM {
        return Err(Error::DimensionCap { dim: d, max: MAX_SMALL_DIM });
    }

    let mut a = x.clone();
    let mut v = Array2::<F>::eye(d);
    let thresh = F::epsilon() * cast::<F>(d as f64);

    for _ in 0..MAX_JACOBI_SWEEPS {
        let mut rotated = false;
        for p in 0..d {
            for q in p + 1..d {
                let mut alpha = F::zero();
                let mut beta = F::zero();
                let mut gamma = F::zero();
                for r in 0..d {
                    alpha += a[[r, p]] * a[[r, p]];
                    beta += a[[r, q]] * a[[r, q]];
                    gamma += a[[r, p]] * a[[r, q]];
                }
                if gamma == F::zero() || gamma.abs() <= thresh * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let two = cast::<F>(2.0);
                let zeta = (beta - alpha) / (two * gamma);
                let t = zeta.signum() / (zeta.abs() + (F::one() + zeta * zeta).sqrt());
                let c = F::one() / (F::one() + t * t).sqrt();
                let s = c * t;
                for r in 0..d {
                    let ap = a[[r, p]];
                    let aq = a[[r, q]];
                    a[[r, p]] = c * ap - s * aq;
                    a[[r, q]] = s * ap + c * aq;
                }
                for r in 0..d {
                    let vp = v[[r, p]];
                    let vq = v[[r, q]];
                    v[[r, p]] = c * vp - s * vq;
                    v[[r, q]] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sigma: Vec<F> = (0..d)
        .map(|c| {
            let mut s = F::zero();
            for r in 0..d {
                s += a[[r, c]] * a[[r, c]];
            }
            s.sqrt()
        })
        .collect();

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&p, &q| sigma[q].partial_cmp(&sigma[p]).expect("finite singular values"));

    let mut u = Array2::<F>::zeros((d, d));
    let mut v_sorted = Array2::<F>::zeros((d, d));
    let mut sigma_sorted = Array1::<F>::zeros(d);
    let tiny = F::epsilon() * cast::<F>(d as f64) * (F::one() + frobenius(x));
    let mut filled = Vec::with_capacity(d);
    for (c, &src) in order.iter().enumerate() {
        sigma_sorted[c] = sigma[src];
        for r in 0..d {
            v_sorted[[r, c]] = v[[r, src]];
        }
        if sigma[src] > tiny {
            for r in 0..d {
                u[[r, c]] = a[[r, src]] / sigma[src];
            }
            filled.push(c);
        } else {
            sigma_sorted[c] = if sigma[src] < F::zero() { F::zero() } else { sigma[src] };
        }
    }
    // Complete zero columns of u to an orthonormal basis: take the basis
    // vector whose residual against the filled columns is largest (lowest
    // index on ties), with one re-orthogonalization pass.
    for c in 0..d {
        if filled.contains(&c) {
            continue;
        }
        let mut best: Option<(F, Array1<F>)> = None;
        for candidate in 0..d {
            let mut col = Array1::<F>::zeros(d);
            col[candidate] = F::one();
            for _ in 0..2 {
                for &fc in &filled {
                    let mut proj = F::zero();
                    for r in 0..d {
                        proj += u[[r, fc]] * col[r];
                    }
                    for r in 0..d {
                        col[r] -= proj * u[[r, fc]];
                    }
                }
            }
            let norm = col.iter().fold(F::zero(), |acc, &x| acc + x * x).sqrt();
            if best.as_ref().is_none_or(|(b, _)| norm > *b) {
                best = Some((norm, col));
            }
        }
        let (norm, col) = best.expect("at least one basis candidate exists");
        for r in 0..d {
            u[[r, c]] = col[r] / norm;
        }
        filled.push(c);
    }
    sigma.clear();

    Ok(SvdSmall { u, sigma: sigma_sorted, v: v_sorted })
}

/// Nearest orthogonal matrix in Frobenius distance.
///
/// Computed as `U·Vᵀ` from the SVD; when the smallest singular value is at or
/// below `tol::SINGULAR_SVAL` the minimizer is not unique and the identity is
/// returned instead.
pub fn polar<F: Scalar>(x: &Array2<F>) -> Result<Array2<F>> {
    let svd = svd_small(x)?;
    if svd.sigma_min() <= cast(tol::SINGULAR_SVAL) {
        return Ok(Array2::eye(x.nrows()));
    }
    Ok(svd.u.dot(&svd.v.t()))
}

/// Draws a Haar-uniform matrix from O(d).
///
/// A Gaussian matrix is orthonormalized column by column (with one
/// re-orthogonalization pass); keeping the triangular factor's diagonal
/// positive makes the result exactly Haar-distributed.
pub fn haar_orthogonal<F: Scalar, R: Rng + ?Sized>(d: usize, rng: &mut R) -> Array2<F> {
    assert!(d >= 1, "dimension must be positive");
    let mut q = Array2::<F>::zeros((d, d));
    for c in 0..d {
        for r in 0..d {
            q[[r, c]] = F::standard_normal(rng);
        }
    }
    for c in 0..d {
        for _ in 0..2 {
            for prev in 0..c {
                let mut proj = F::zero();
                for r in 0..d {
                    proj += q[[r, prev]] * q[[r, c]];
                }
                for r in 0..d {
                    let upd = q[[r, c]] - proj * q[[r, prev]];
                    q[[r, c]] = upd;
                }
            }
        }
        let mut norm = F::zero();
        for r in 0..d {
            norm += q[[r, c]] * q[[r, c]];
        }
        let norm = norm.sqrt();
        if norm > F::zero() {
            for r in 0..d {
                q[[r, c]] /= norm;
            }
        } else {
            // Probability-zero degeneracy; fall back to a basis vector.
            for r in 0..d {
                q[[r, c]] = if r == c { F::one() } else { F::zero() };
            }
        }
    }
    q
}

/// Determinant via LU decomposition with partial pivoting.
pub fn det<F: Scalar>(a: &Array2<F>) -> F {
    let (rows, cols) = a.dim();
    assert_eq!(rows, cols, "determinant of a non-square matrix");
    let n = rows;
    let mut lu = a.clone();
    let mut sign = F::one();
    for col in 0..n {
        let mut pivot = col;
        let mut best = lu[[col, col]].abs();
        for r in col + 1..n {
            let mag = lu[[r, col]].abs();
            if mag > best {
                best = mag;
                pivot = r;
            }
        }
        if best == F::zero() {
            return F::zero();
        }
        if pivot != col {
            for c in 0..n {
                let tmp = lu[[col, c]];
                lu[[col, c]] = lu[[pivot, c]];
                lu[[pivot, c]] = tmp;
            }
            sign = -sign;
        }
        for r in col + 1..n {
            let factor = lu[[r, col]] / lu[[col, col]];
            for c in col..n {
                let upd = lu[[r, c]] - factor * lu[[col, c]];
                lu[[r, c]] = upd;
            }
        }
    }
    let mut out = sign;
    for i in 0..n {
        out *= lu[[i, i]];
    }
    out
}
