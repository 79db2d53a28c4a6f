//! Frustration functionals and balance diagnostics.
//!
//! Frustration measures how badly a vertex field or group potential violates
//! the edge transforms. Every pairwise sum below runs once over the
//! undirected edge list with a factor-2 bookkeeping where the ordered-pair
//! convention demands it.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::fields::{d1_inner, d1_norm_sq, GroupPotential, VertexField};
use crate::graph::ConnectionGraph;
use crate::laplacian::quadratic_form_l1;
use crate::scalar::{cast, Scalar};
use crate::tol;

/// A frustration value with its numerator and denominator kept separately.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrustrationValue<F> {
    pub numerator: F,
    pub denominator: F,
}

impl<F: Scalar> FrustrationValue<F> {
    pub fn value(&self) -> F {
        self.numerator / self.denominator
    }
}

/// Norm-balance diagnostics of a field: the balance level `alpha`, the
/// squared D1-norm of the residual against `alpha·x̃`, and the field of
/// block norms.
#[derive(Debug, Clone)]
pub struct BalanceDiagnostics<F> {
    pub alpha: F,
    pub residual_sq: F,
    pub norm_field: Array1<F>,
}

/// An ill-balanced vertex subset with its weighted volume.
#[derive(Debug, Clone)]
pub struct IllBalancedSet<F> {
    pub vertices: Vec<usize>,
    pub volume: F,
}

fn check_shapes<F: Scalar>(g: &ConnectionGraph<F>, v: &VertexField<F>) -> Result<()> {
    if v.n() != g.n() || v.d() != g.d() {
        return Err(Error::ShapeMismatch(format!(
            "field is ({}, {}), graph is ({}, {})",
            v.n(),
            v.d(),
            g.n(),
            g.d()
        )));
    }
    Ok(())
}

/// Frustration `η(v)`: the edge-violation energy normalized by the weighted
/// field mass, `Σ_E w‖v_i − ρ v_j‖² / Σ_i d_i‖v_i‖²`.
pub fn eta<F: Scalar>(g: &ConnectionGraph<F>, v: &VertexField<F>) -> Result<FrustrationValue<F>> {
    check_shapes(g, v)?;
    let numerator = quadratic_form_l1(g, v)?;
    let denominator = d1_norm_sq(&g.degree_vector(), v);
    if denominator <= F::zero() {
        return Err(Error::ZeroField);
    }
    Ok(FrustrationValue { numerator, denominator })
}

/// Unsquared frustration `η₁(v) = Σ_{ij} w‖v_i − ρ v_j‖ / Σ_i d_i‖v_i‖`,
/// the pair sum counting each edge twice.
pub fn eta_l1<F: Scalar>(g: &ConnectionGraph<F>, v: &VertexField<F>) -> Result<F> {
    check_shapes(g, v)?;
    let d = g.d();
    let mut numerator = F::zero();
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
        numerator += e.weight * term.sqrt();
    }
    numerator *= cast(2.0);
    let degrees = g.degree_vector();
    let mut denominator = F::zero();
    for i in 0..g.n() {
        denominator += degrees[i] * v.block_norm(i);
    }
    if denominator <= F::zero() {
        return Err(Error::ZeroField);
    }
    Ok(numerator / denominator)
}

fn potential_edge_sums<F: Scalar>(
    g: &ConnectionGraph<F>,
    p: &GroupPotential<F>,
) -> Result<(F, F)> {
    if p.n() != g.n() || p.d() != g.d() {
        return Err(Error::ShapeMismatch(format!(
            "potential is ({}, {}), graph is ({}, {})",
            p.n(),
            p.d(),
            g.n(),
            g.d()
        )));
    }
    let mut sum_sq = F::zero();
    let mut sum_norm = F::zero();
    for e in g.edges() {
        let transported: Array2<F> = e.transform.dot(p.matrix(e.j));
        let diff = p.matrix(e.i) - &transported;
        let sq = diff.iter().fold(F::zero(), |acc, &x| acc + x * x);
        sum_sq += e.weight * sq;
        sum_norm += e.weight * sq.sqrt();
    }
    Ok((sum_sq, sum_norm))
}

/// Potential frustration `ν(g) = Σ_{ij} w‖g_i − ρ g_j‖²_F / (2d·vol(G))`.
pub fn nu<F: Scalar>(g: &ConnectionGraph<F>, p: &GroupPotential<F>) -> Result<F> {
    let (sum_sq, _) = potential_edge_sums(g, p)?;
    let volume = g.volume();
    Ok(sum_sq / (cast::<F>(g.d() as f64) * volume))
}

/// Unsquared potential frustration
/// `ν₁(g) = Σ_{ij} w‖g_i − ρ g_j‖_F / (√d·vol(G))`.
pub fn nu_l1<F: Scalar>(g: &ConnectionGraph<F>, p: &GroupPotential<F>) -> Result<F> {
    let (_, sum_norm) = potential_edge_sums(g, p)?;
    let volume = g.volume();
    Ok(cast::<F>(2.0) * sum_norm / (cast::<F>(g.d() as f64).sqrt() * volume))
}

/// Balance diagnostics of a nonzero field: the degree-weighted mean block
/// norm `alpha` and the residual `Σ d_i(‖x_i‖ − alpha)²` over nonzero blocks.
pub fn balance<F: Scalar>(
    g: &ConnectionGraph<F>,
    x: &VertexField<F>,
) -> Result<BalanceDiagnostics<F>> {
    check_shapes(g, x)?;
    if x.is_zero() {
        return Err(Error::ZeroField);
    }
    let degrees = g.degree_vector();
    let norm_field = x.norm_field();
    let volume = degrees.sum();
    let mut weighted = F::zero();
    for i in 0..g.n() {
        weighted += degrees[i] * norm_field[i];
    }
    let alpha = weighted / volume;
    let mut residual_sq = F::zero();
    for i in 0..g.n() {
        if !x.block_is_zero(i) {
            let dev = norm_field[i] - alpha;
            residual_sq += degrees[i] * dev * dev;
        }
    }
    Ok(BalanceDiagnostics { alpha, residual_sq, norm_field })
}

fn rescaled_to_volume<F: Scalar>(
    g: &ConnectionGraph<F>,
    x: &VertexField<F>,
) -> Result<VertexField<F>> {
    let degrees = g.degree_vector();
    let norm_sq = d1_norm_sq(&degrees, x);
    if norm_sq <= F::zero() {
        return Err(Error::ZeroField);
    }
    let volume = degrees.sum();
    Ok(x.scaled((volume / norm_sq).sqrt()))
}

/// Vertices whose block norm deviates from 1 by at least `delta`, after the
/// field is rescaled internally to `‖x‖²_{D1} = vol(G)`.
pub fn ill_balanced_norm<F: Scalar>(
    g: &ConnectionGraph<F>,
    x: &VertexField<F>,
    delta: F,
) -> Result<IllBalancedSet<F>> {
    check_shapes(g, x)?;
    let scaled = rescaled_to_volume(g, x)?;
    let degrees = g.degree_vector();
    let mut vertices = Vec::new();
    let mut volume = F::zero();
    for i in 0..g.n() {
        if (scaled.block_norm(i) - F::one()).abs() >= delta {
            vertices.push(i);
            volume += degrees[i];
        }
    }
    Ok(IllBalancedSet { vertices, volume })
}

/// Vertices where two D1-orthogonal fields have a large blockwise inner
/// product, `|⟨x_i, y_i⟩| ≥ delta`, after both fields are rescaled to
/// `‖·‖²_{D1} = vol(G)`.
pub fn ill_balanced_pair<F: Scalar>(
    g: &ConnectionGraph<F>,
    x: &VertexField<F>,
    y: &VertexField<F>,
    delta: F,
) -> Result<IllBalancedSet<F>> {
    check_shapes(g, x)?;
    check_shapes(g, y)?;
    let degrees = g.degree_vector();
    let nx = d1_norm_sq(&degrees, x);
    let ny = d1_norm_sq(&degrees, y);
    if nx <= F::zero() || ny <= F::zero() {
        return Err(Error::ZeroField);
    }
    let cosine = d1_inner(&degrees, x, y)?.abs() / (nx.sqrt() * ny.sqrt());
    if cosine > cast(tol::D1_ORTHO_REL) {
        return Err(Error::NotD1Orthogonal { cosine: cosine.to_f64().unwrap_or(f64::NAN) });
    }
    let xs = rescaled_to_volume(g, x)?;
    let ys = rescaled_to_volume(g, y)?;
    let mut vertices = Vec::new();
    let mut volume = F::zero();
    for i in 0..g.n() {
        let mut dot = F::zero();
        for (a, b) in xs.block(i).iter().zip(ys.block(i).iter()) {
            dot += *a * *b;
        }
        if dot.abs() >= delta {
            vertices.push(i);
            volume += degrees[i];
        }
    }
    Ok(IllBalancedSet { vertices, volume })
}

/// The balanced set: vertices outside every `IB_{x^k}(1/(8d))` and every
/// pairwise `IB_{x^k x^m}(1/(2d))`, returned as a membership mask.
///
/// The fields must be D1-orthogonal; they are rescaled internally like the
/// ill-balance diagnostics.
pub fn balanced_set<F: Scalar>(
    g: &ConnectionGraph<F>,
    fields: &[VertexField<F>],
) -> Result<Vec<bool>> {
    let d = g.d();
    if fields.len() != d {
        return Err(Error::ShapeMismatch(format!(
            "balanced set needs d = {d} fields, got {}",
            fields.len()
        )));
    }
    let delta_norm = F::one() / cast::<F>(8.0 * d as f64);
    let delta_pair = F::one() / cast::<F>(2.0 * d as f64);
    let mut mask = vec![true; g.n()];
    for (k, field) in fields.iter().enumerate() {
        for &v in &ill_balanced_norm(g, field, delta_norm)?.vertices {
            mask[v] = false;
        }
        for other in fields.iter().skip(k + 1) {
            for &v in &ill_balanced_pair(g, field, other, delta_pair)?.vertices {
                mask[v] = false;
            }
        }
    }
    Ok(mask)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laplacian::{self, LaplacianKind};
    use crate::linalg::haar_orthogonal;
    use ndarray::{array, Array2};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sign_triangle() -> ConnectionGraph<f64> {
        let plus = Array2::eye(1);
        let minus = Array2::from_elem((1, 1), -1.0);
        ConnectionGraph::new(
            3,
            1,
            vec![(0, 1, 1.0, plus.clone()), (1, 2, 1.0, plus), (0, 2, 1.0, minus)],
        )
        .unwrap()
    }

    fn complete_consistent(n: usize, d: usize, seed: u64) -> (ConnectionGraph<f64>, GroupPotential<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mats: Vec<Array2<f64>> = (0..n).map(|_| haar_orthogonal(d, &mut rng)).collect();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                edges.push((i, j, 1.0, mats[i].dot(&mats[j].t())));
            }
        }
        let g = ConnectionGraph::new(n, d, edges).unwrap();
        (g, GroupPotential::new(mats).unwrap())
    }

    fn gaussian_field(n: usize, d: usize, seed: u64) -> VertexField<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = Array1::from_iter((0..n * d).map(|_| f64::standard_normal(&mut rng)));
        VertexField::new(n, d, data).unwrap()
    }

    #[test]
    fn consistent_potential_column_has_zero_frustration() {
        let (g, p) = complete_consistent(5, 3, 1);
        let v = p.column(0);
        assert!(eta(&g, &v).unwrap().value() < 1e-20);
    }

    #[test]
    fn frustrated_triangle_value_is_two_thirds() {
        let g = sign_triangle();
        let v = VertexField::new(3, 1, array![1.0, 1.0, 1.0]).unwrap();
        let value = eta(&g, &v).unwrap();
        assert_eq!(value.numerator, 4.0);
        assert_eq!(value.denominator, 6.0);
        assert!((value.value() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn eta_is_scale_invariant() {
        let g = sign_triangle();
        let v = VertexField::new(3, 1, array![0.5, -1.0, 2.0]).unwrap();
        let a = eta(&g, &v).unwrap().value();
        let b = eta(&g, &v.scaled(3.0)).unwrap().value();
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn eta_errors_on_zero_field() {
        let g = sign_triangle();
        let v = VertexField::zeros(3, 1);
        assert!(matches!(eta(&g, &v), Err(Error::ZeroField)));
    }

    #[test]
    fn consistent_potential_has_zero_nu() {
        let (g, p) = complete_consistent(5, 2, 2);
        assert!(nu(&g, &p).unwrap() < 1e-18);
        assert!(nu_l1(&g, &p).unwrap() < 1e-9);
    }

    #[test]
    fn eta_at_most_eta_l1_on_unit_fields() {
        let g = sign_triangle();
        for seed in 0..50 {
            let v = gaussian_field(3, 1, seed).normalize_nonzero();
            let e = eta(&g, &v).unwrap().value();
            let e1 = eta_l1(&g, &v).unwrap();
            assert!(e <= e1 + 1e-12);
            assert!(e1 * e1 <= 2.0 * e + 1e-9);
        }
    }

    #[test]
    fn nu_sandwich_against_nu_l1() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let (g, _) = complete_consistent(5, 2, 3);
        for _ in 0..30 {
            let mats: Vec<Array2<f64>> = (0..5).map(|_| haar_orthogonal(2, &mut rng)).collect();
            let p = GroupPotential::new(mats).unwrap();
            let v = nu(&g, &p).unwrap();
            let v1 = nu_l1(&g, &p).unwrap();
            assert!(v <= v1 + 1e-12);
            assert!(v1 <= (2.0 * v).sqrt() + 1e-9);
            assert!((0.0..=2.0 + 1e-12).contains(&v));
            assert!(v1 <= 2.0 * (2.0f64).sqrt() + 1e-12);
        }
    }

    #[test]
    fn nu_equals_mean_column_frustration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (g, _) = complete_consistent(6, 3, 4);
        let mats: Vec<Array2<f64>> = (0..6).map(|_| haar_orthogonal(3, &mut rng)).collect();
        let p = GroupPotential::new(mats).unwrap();
        let direct = nu(&g, &p).unwrap();
        let mut by_columns = 0.0;
        for k in 0..3 {
            by_columns += eta(&g, &p.column(k)).unwrap().value();
        }
        by_columns /= 3.0;
        assert!((direct - by_columns).abs() <= 1e-9 * direct.max(1.0));
    }

    #[test]
    fn balance_of_constant_norm_field() {
        let (g, _) = complete_consistent(4, 2, 5);
        let mut x = VertexField::zeros(4, 2);
        for i in 0..4 {
            x.set_block(i, &[0.6 * 2.5, 0.8 * 2.5]);
        }
        let diag = balance(&g, &x).unwrap();
        assert!((diag.alpha - 2.5).abs() < 1e-12);
        assert!(diag.residual_sq < 1e-20);
    }

    #[test]
    fn balance_scales_homogeneously() {
        let (g, _) = complete_consistent(5, 2, 6);
        let x = gaussian_field(5, 2, 30);
        let base = balance(&g, &x).unwrap();
        let scaled = balance(&g, &x.scaled(2.0)).unwrap();
        assert!((scaled.alpha - 2.0 * base.alpha).abs() < 1e-12);
        assert!((scaled.residual_sq - 4.0 * base.residual_sq).abs() < 1e-10);
    }

    #[test]
    fn balance_residual_obeys_gap_bound() {
        let (g, _) = complete_consistent(6, 2, 7);
        let lambda2 = laplacian::lambda2_l0(&g).unwrap();
        let degrees = g.degree_vector();
        for seed in 100..150 {
            let x = gaussian_field(6, 2, seed);
            let diag = balance(&g, &x).unwrap();
            let eta_x = eta(&g, &x).unwrap().value();
            let mass = d1_norm_sq(&degrees, &x);
            assert!(diag.residual_sq <= eta_x / lambda2 * mass + 1e-9);
            // in-proof display: the norm field's Dirichlet energy is at most
            // the frustration times the field mass
            let dirichlet = laplacian::quadratic_form_l0(&g, &diag.norm_field).unwrap();
            assert!(dirichlet <= eta_x * mass + 1e-9);
        }
    }

    #[test]
    fn normalization_does_not_move_constant_norm_fields() {
        // all blocks share one norm, so normalizing is a global rescale and
        // the frustration is unchanged
        let (g, _) = complete_consistent(5, 2, 20);
        let mut x = VertexField::zeros(5, 2);
        for i in 0..5 {
            let angle = 0.7 * (i as f64 + 1.0);
            x.set_block(i, &[3.0 * angle.cos(), 3.0 * angle.sin()]);
        }
        let before = eta(&g, &x).unwrap().value();
        let after = eta(&g, &x.normalize_nonzero()).unwrap().value();
        assert!((before - after).abs() <= 1e-12 * before.max(1.0));
    }

    #[test]
    fn unit_norm_field_has_no_ill_balanced_vertices() {
        let (g, p) = complete_consistent(5, 2, 8);
        let x = p.column(0);
        let set = ill_balanced_norm(&g, &x, 0.1).unwrap();
        assert!(set.vertices.is_empty());
        assert_eq!(set.volume, 0.0);
    }

    #[test]
    fn ill_balanced_volume_obeys_lemma_bound() {
        let (g, _) = complete_consistent(6, 2, 9);
        let lambda2 = laplacian::lambda2_l0(&g).unwrap();
        let vol = g.volume();
        for seed in 200..240 {
            let x = gaussian_field(6, 2, seed);
            let eta_x = eta(&g, &x).unwrap().value();
            for delta in [0.1, 0.25, 0.5] {
                let set = ill_balanced_norm(&g, &x, delta).unwrap();
                assert!(
                    set.volume / vol <= 4.0 / (delta * delta) * eta_x / lambda2 + 1e-9,
                    "volume bound failed at delta {delta}"
                );
            }
        }
    }

    #[test]
    fn pair_diagnostics_require_d1_orthogonality() {
        let (g, _) = complete_consistent(5, 2, 12);
        let x = gaussian_field(5, 2, 300);
        assert!(matches!(
            ill_balanced_pair(&g, &x, &x, 0.1),
            Err(Error::NotD1Orthogonal { .. })
        ));
    }

    #[test]
    fn pair_ill_balance_obeys_lemma_bound() {
        let (g, _) = complete_consistent(6, 2, 13);
        let degrees = g.degree_vector();
        let vol = g.volume();
        let lambda2 = laplacian::lambda2_l0(&g).unwrap();
        let d = 2.0;
        for seed in 400..440 {
            let raw = vec![gaussian_field(6, 2, seed), gaussian_field(6, 2, seed + 5000)];
            let ortho =
                crate::fields::d1_orthonormalize(&degrees, &raw, vol).unwrap();
            let (x, y) = (&ortho[0], &ortho[1]);
            let pair = ill_balanced_pair(&g, x, y, 1.0 / (2.0 * d)).unwrap();
            let ibx = ill_balanced_norm(&g, x, 1.0 / (8.0 * d)).unwrap();
            let iby = ill_balanced_norm(&g, y, 1.0 / (8.0 * d)).unwrap();
            let mut excluded = [false; 6];
            for &v in ibx.vertices.iter().chain(iby.vertices.iter()) {
                excluded[v] = true;
            }
            let mut volume = 0.0;
            for &v in &pair.vertices {
                if !excluded[v] {
                    volume += degrees[v];
                }
            }
            let eta_x = eta(&g, x).unwrap().value();
            let eta_y = eta(&g, y).unwrap().value();
            let bound = 4.0 * (8.0 * d).powi(2) * (eta_x + eta_y) / lambda2;
            assert!(volume / vol <= bound + 1e-9);
        }
    }

    #[test]
    fn balanced_vertices_give_stable_polar_rounding() {
        use crate::fields::{d1_orthonormalize, stack_columns};
        use crate::linalg::frobenius;
        use crate::linalg::{polar, svd_small};
        let (g, _) = complete_consistent(6, 2, 14);
        let degrees = g.degree_vector();
        let vol = g.volume();
        let spectrum = laplacian::bottom_spectrum(&g, LaplacianKind::Connection, 2).unwrap();
        let fields =
            d1_orthonormalize(&degrees, spectrum.x_fields.as_ref().unwrap(), vol).unwrap();
        let mask = balanced_set(&g, &fields).unwrap();
        let stacked = stack_columns(&fields).unwrap();
        let sqrt2 = 2.0f64.sqrt();
        for (i, m) in stacked.iter().enumerate() {
            if mask[i] {
                assert!(svd_small(m).unwrap().sigma_min() >= 1.0 / sqrt2 - 1e-9);
            }
        }
        for e in g.edges() {
            if mask[e.i] && mask[e.j] {
                let ui = polar(&stacked[e.i]).unwrap();
                let uj = polar(&stacked[e.j]).unwrap();
                let lhs = frobenius(&(&ui - &e.transform.dot(&uj)));
                let rhs = frobenius(&(&stacked[e.i] - &e.transform.dot(&stacked[e.j])));
                assert!(lhs <= sqrt2 * rhs + 1e-9);
            }
        }
    }
}
