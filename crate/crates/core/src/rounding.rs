//! The three spectral synchronization algorithms: threshold rounding of the
//! bottom eigenvector (partial sphere), blockwise normalization (full
//! sphere), and polar rounding of the d bottom eigenvectors (orthogonal
//! group). Each output carries the certified upper bound computed from the
//! same eigenvalues the rounding used.

use crate::error::{Error, Result};
use crate::fields::{stack_columns, GroupPotential, VertexField};
use crate::frustration::{eta, eta_l1, nu};
use crate::graph::ConnectionGraph;
use crate::laplacian::{bottom_spectrum, lambda2_l0, LaplacianKind};
use crate::linalg::polar;
use crate::scalar::{cast, Scalar};
use crate::tol;

/// Which synchronization problem an output solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyncMode {
    PartialSphere,
    FullSphere,
    OrthogonalGroup,
}

/// Solution payload: a vertex field for the sphere modes, a group potential
/// for the orthogonal mode.
#[derive(Debug, Clone)]
pub enum SyncOutput<F> {
    Field(VertexField<F>),
    Potential(GroupPotential<F>),
}

impl<F: Scalar> SyncOutput<F> {
    pub fn as_field(&self) -> Option<&VertexField<F>> {
        match self {
            SyncOutput::Field(f) => Some(f),
            SyncOutput::Potential(_) => None,
        }
    }

    pub fn as_potential(&self) -> Option<&GroupPotential<F>> {
        match self {
            SyncOutput::Field(_) => None,
            SyncOutput::Potential(p) => Some(p),
        }
    }
}

/// The certified upper bound and the eigenvalues it was computed from.
///
/// `bound` is infinite when the certificate divides by a spectral gap at or
/// below `tol::SPECTRAL_GAP_FLOOR` (the inequality is then vacuous).
#[derive(Debug, Clone)]
pub struct Certificate<F> {
    pub bound: F,
    pub lambdas: Vec<F>,
    pub lambda2_l0: Option<F>,
}

impl<F: Scalar> Certificate<F> {
    pub fn is_vacuous(&self) -> bool {
        self.bound.is_infinite()
    }
}

/// One synchronization result: the rounded output, the frustration it
/// achieves, and the certificate it is guaranteed to satisfy.
#[derive(Debug, Clone)]
pub struct SyncSolution<F> {
    pub mode: SyncMode,
    pub output: SyncOutput<F>,
    pub achieved: F,
    pub certificate: Certificate<F>,
}

/// One entry of the threshold sweep: the squared-norm breakpoint and the
/// frustrations of the field rounded there.
#[derive(Debug, Clone, Copy)]
pub struct SweepCandidate<F> {
    pub u: F,
    pub eta: F,
    pub eta_l1: F,
}

/// Evaluates the full threshold sweep of a field.
///
/// The sweep runs over the distinct squared block norms of the nonzero
/// blocks; these breakpoints enumerate every distinct rounded field, and the
/// inclusive threshold keeps each candidate nonempty. Candidates are returned
/// in increasing breakpoint order.
pub fn threshold_sweep<F: Scalar>(
    g: &ConnectionGraph<F>,
    x: &VertexField<F>,
) -> Result<Vec<SweepCandidate<F>>> {
    let mut breakpoints: Vec<F> = (0..x.n())
        .filter(|&i| !x.block_is_zero(i))
        .map(|i| x.block_norm_sq(i))
        .collect();
    if breakpoints.is_empty() {
        return Err(Error::Degenerate("all blocks of the sweep input are zero".into()));
    }
    breakpoints.sort_by(|a, b| a.partial_cmp(b).expect("finite norms"));
    breakpoints.dedup();
    let mut out = Vec::with_capacity(breakpoints.len());
    for &u in &breakpoints {
        let candidate = x.threshold(u);
        let value = eta(g, &candidate)?.value();
        let value_l1 = eta_l1(g, &candidate)?;
        out.push(SweepCandidate { u, eta: value, eta_l1: value_l1 });
    }
    Ok(out)
}

/// Minimizer of `η` over the sweep, with the smallest breakpoint winning
/// ties. Returns the breakpoint, the rounded field and its frustration.
pub fn sweep_minimizer<F: Scalar>(
    g: &ConnectionGraph<F>,
    x: &VertexField<F>,
) -> Result<(F, VertexField<F>, F)> {
    let candidates = threshold_sweep(g, x)?;
    let mut best = &candidates[0];
    for candidate in &candidates[1..] {
        if candidate.eta < best.eta {
            best = candidate;
        }
    }
    Ok((best.u, x.threshold(best.u), best.eta))
}

/// Minimizer of `η₁` over the sweep.
pub fn sweep_minimizer_l1<F: Scalar>(
    g: &ConnectionGraph<F>,
    x: &VertexField<F>,
) -> Result<(F, VertexField<F>, F)> {
    let candidates = threshold_sweep(g, x)?;
    let mut best = &candidates[0];
    for candidate in &candidates[1..] {
        if candidate.eta_l1 < best.eta_l1 {
            best = candidate;
        }
    }
    Ok((best.u, x.threshold(best.u), best.eta_l1))
}

fn sqrt_certificate<F: Scalar>(factor: F, lambda1: F) -> F {
    (factor * lambda1.max(F::zero())).sqrt()
}

fn gap_certificate<F: Scalar>(numerator: F, lambda2: F) -> F {
    if lambda2 <= cast(tol::SPECTRAL_GAP_FLOOR) {
        F::infinity()
    } else {
        numerator / lambda2
    }
}

/// Partial-sphere synchronization: threshold sweep of the bottom
/// eigenvector.
///
/// The certificate is `√(10·λ₁)`, strengthened to `√(8·λ₁)` when d = 1.
pub fn sync_partial_sphere<F: Scalar>(g: &ConnectionGraph<F>) -> Result<SyncSolution<F>> {
    let spectrum = bottom_spectrum(g, LaplacianKind::Connection, 1)?;
    let x = &spectrum.x_fields.as_ref().expect("connection spectrum carries fields")[0];
    let (_, rounded, achieved) = sweep_minimizer(g, x)?;
    let lambda1 = spectrum.lambdas[0];
    let factor = if g.d() == 1 { cast(8.0) } else { cast(10.0) };
    Ok(SyncSolution {
        mode: SyncMode::PartialSphere,
        output: SyncOutput::Field(rounded),
        achieved,
        certificate: Certificate {
            bound: sqrt_certificate(factor, lambda1),
            lambdas: vec![lambda1],
            lambda2_l0: None,
        },
    })
}

/// Full-sphere synchronization: blockwise normalization of the bottom
/// eigenvector, with zero blocks sent to the first basis vector so that the
/// output is deterministic.
///
/// The certificate is `44·λ₁/λ₂`, vacuous when the spectral gap vanishes.
pub fn sync_full_sphere<F: Scalar>(g: &ConnectionGraph<F>) -> Result<SyncSolution<F>> {
    let spectrum = bottom_spectrum(g, LaplacianKind::Connection, 1)?;
    let x = &spectrum.x_fields.as_ref().expect("connection spectrum carries fields")[0];
    let mut v = x.normalize_nonzero();
    let mut basis = vec![F::zero(); g.d()];
    basis[0] = F::one();
    for i in 0..g.n() {
        if v.block_is_zero(i) {
            v.set_block(i, &basis);
        }
    }
    let achieved = eta(g, &v)?.value();
    let lambda1 = spectrum.lambdas[0];
    let lambda2 = lambda2_l0(g)?;
    Ok(SyncSolution {
        mode: SyncMode::FullSphere,
        output: SyncOutput::Field(v),
        achieved,
        certificate: Certificate {
            bound: gap_certificate(cast::<F>(44.0) * lambda1.max(F::zero()), lambda2),
            lambdas: vec![lambda1],
            lambda2_l0: Some(lambda2),
        },
    })
}

/// Orthogonal-group synchronization: the d bottom eigenvectors are
/// unwhitened, stacked per vertex and rounded to the nearest orthogonal
/// matrix (identity when the stack is numerically singular).
///
/// The certificate is `1026·d³·Σλᵢ/λ₂`, vacuous when the gap vanishes.
pub fn sync_orthogonal<F: Scalar>(g: &ConnectionGraph<F>) -> Result<SyncSolution<F>> {
    let d = g.d();
    let spectrum = bottom_spectrum(g, LaplacianKind::Connection, d)?;
    let fields = spectrum.x_fields.as_ref().expect("connection spectrum carries fields");
    let stacked = stack_columns(fields)?;
    let mut matrices = Vec::with_capacity(g.n());
    for m in &stacked {
        matrices.push(polar(m)?);
    }
    let potential = GroupPotential::new(matrices)?;
    let achieved = nu(g, &potential)?;
    let lambda2 = lambda2_l0(g)?;
    let lambda_sum =
        spectrum.lambdas.iter().fold(F::zero(), |acc, &l| acc + l.max(F::zero()));
    let d_cubed = cast::<F>((d * d * d) as f64);
    Ok(SyncSolution {
        mode: SyncMode::OrthogonalGroup,
        output: SyncOutput::Potential(potential),
        achieved,
        certificate: Certificate {
            bound: gap_certificate(cast::<F>(1026.0) * d_cubed * lambda_sum, lambda2),
            lambdas: spectrum.lambdas.clone(),
            lambda2_l0: Some(lambda2),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::d1_orthonormalize;
    use crate::generators;
    use crate::linalg::frobenius;
    use crate::linalg::haar_orthogonal;
    use ndarray::{Array1, Array2};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gaussian_field(n: usize, d: usize, seed: u64) -> VertexField<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = Array1::from_iter((0..n * d).map(|_| f64::standard_normal(&mut rng)));
        VertexField::new(n, d, data).unwrap()
    }

    #[test]
    fn partial_sync_recovers_consistent_instance() {
        let instance = generators::consistent_random::<f64>(8, 2, 0.7, 5).unwrap();
        let solution = sync_partial_sphere(&instance.graph).unwrap();
        assert!(solution.achieved.abs() < 1e-9);
        let field = solution.output.as_field().unwrap();
        for i in 0..8 {
            assert!((field.block_norm(i) - 1.0).abs() < 1e-9);
        }
        assert!(solution.achieved <= solution.certificate.bound + 1e-9);
    }

    #[test]
    fn full_sync_recovers_consistent_instance() {
        let instance = generators::consistent_random::<f64>(8, 2, 0.7, 6).unwrap();
        let solution = sync_full_sphere(&instance.graph).unwrap();
        assert!(solution.achieved.abs() < 1e-9);
        assert!(!solution.certificate.is_vacuous());
        assert!(solution.achieved <= solution.certificate.bound + 1e-9);
    }

    #[test]
    fn orthogonal_sync_satisfies_every_edge_of_consistent_instance() {
        for (d, seed) in [(1usize, 7u64), (2, 8), (3, 9)] {
            let instance = generators::consistent_random::<f64>(9, d, 0.6, seed).unwrap();
            let solution = sync_orthogonal(&instance.graph).unwrap();
            assert!(solution.achieved <= 1e-9);
            let p = solution.output.as_potential().unwrap();
            for e in instance.graph.edges() {
                let gap = frobenius(&(p.matrix(e.i) - &e.transform.dot(p.matrix(e.j))));
                assert!(gap <= 1e-6, "edge ({}, {}) off by {gap}", e.i, e.j);
            }
        }
    }

    #[test]
    fn noisy_instances_respect_their_certificates() {
        for seed in 0..10 {
            let instance =
                generators::outlier_noise::<f64>(10, 2, 0.6, 0.25, 100 + seed).unwrap();
            let partial = sync_partial_sphere(&instance.graph).unwrap();
            assert!(partial.achieved <= partial.certificate.bound + 1e-9);
            let full = sync_full_sphere(&instance.graph).unwrap();
            assert!(full.achieved <= full.certificate.bound + 1e-9);
            let od = sync_orthogonal(&instance.graph).unwrap();
            assert!(od.achieved <= od.certificate.bound + 1e-9);
        }
    }

    #[test]
    fn sweep_bound_holds_for_arbitrary_fields() {
        // min over the sweep of η(x^u) is at most √(10·η(x)); √8 when d = 1
        let ring = generators::ring::<f64>(12, 2).unwrap();
        let line = generators::ring::<f64>(12, 1).unwrap();
        for seed in 0..100 {
            let x = gaussian_field(12, 2, seed);
            let eta_x = eta(&ring.graph, &x).unwrap().value();
            let (_, _, best) = sweep_minimizer(&ring.graph, &x).unwrap();
            assert!(best <= (10.0 * eta_x).sqrt() + 1e-9);
            let (_, _, best_l1) = sweep_minimizer_l1(&ring.graph, &x).unwrap();
            assert!(best_l1 <= (10.0 * eta_x).sqrt() + 1e-9);

            let y = gaussian_field(12, 1, 10_000 + seed);
            let eta_y = eta(&line.graph, &y).unwrap().value();
            let (_, _, best_scalar) = sweep_minimizer(&line.graph, &y).unwrap();
            assert!(best_scalar <= (8.0 * eta_y).sqrt() + 1e-9);
        }
    }

    #[test]
    fn normalization_bound_holds_for_arbitrary_fields() {
        // η(x̃) ≤ 44·η(x)/λ₂ on connected graphs
        let instance = generators::consistent_random::<f64>(9, 2, 0.7, 11).unwrap();
        let lambda2 = lambda2_l0(&instance.graph).unwrap();
        for seed in 0..100 {
            let x = gaussian_field(9, 2, 20_000 + seed);
            let eta_x = eta(&instance.graph, &x).unwrap().value();
            let eta_tilde = eta(&instance.graph, &x.normalize_nonzero()).unwrap().value();
            assert!(eta_tilde <= 44.0 / lambda2 * eta_x + 1e-9);
        }
    }

    #[test]
    fn polar_rounding_bound_holds_for_d1_orthogonal_fields() {
        // ν of the polar-rounded potential against (2/d + 2¹⁰·d³)·Ση/λ₂
        let instance = generators::consistent_random::<f64>(8, 2, 0.8, 12).unwrap();
        let g = &instance.graph;
        let d = 2usize;
        let degrees = g.degree_vector();
        let vol = g.volume();
        let lambda2 = lambda2_l0(g).unwrap();
        for seed in 0..50 {
            let raw: Vec<VertexField<f64>> =
                (0..d).map(|k| gaussian_field(8, 2, 30_000 + seed * 10 + k as u64)).collect();
            let fields = d1_orthonormalize(&degrees, &raw, vol).unwrap();
            let stacked = stack_columns(&fields).unwrap();
            let mats: Vec<Array2<f64>> =
                stacked.iter().map(|m| polar(m).unwrap()).collect();
            let p = GroupPotential::new(mats).unwrap();
            let achieved = nu(g, &p).unwrap();
            let eta_sum: f64 =
                fields.iter().map(|f| eta(g, f).unwrap().value()).sum();
            let constant = 2.0 / d as f64 + 1024.0 * (d * d * d) as f64;
            assert!(achieved <= constant * eta_sum / lambda2 + 1e-9);
        }
    }

    #[test]
    fn achieved_values_are_gauge_equivariant() {
        let instance = generators::outlier_noise::<f64>(9, 2, 0.7, 0.3, 21).unwrap();
        let g = &instance.graph;
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let r: Array2<f64> = haar_orthogonal(2, &mut rng);
        let conjugated_edges: Vec<_> = g
            .edges()
            .iter()
            .map(|e| (e.i, e.j, e.weight, r.dot(&e.transform).dot(&r.t())))
            .collect();
        let conjugated = ConnectionGraph::new(g.n(), g.d(), conjugated_edges).unwrap();
        let pairs = [
            (sync_partial_sphere(g).unwrap(), sync_partial_sphere(&conjugated).unwrap()),
            (sync_full_sphere(g).unwrap(), sync_full_sphere(&conjugated).unwrap()),
            (sync_orthogonal(g).unwrap(), sync_orthogonal(&conjugated).unwrap()),
        ];
        for (original, rotated) in pairs {
            assert!((original.achieved - rotated.achieved).abs() < 1e-9);
        }
    }

    #[test]
    fn sweep_rejects_zero_field() {
        let instance = generators::ring::<f64>(6, 1).unwrap();
        let zero = VertexField::zeros(6, 1);
        assert!(matches!(
            threshold_sweep(&instance.graph, &zero),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn sweep_tie_break_prefers_smallest_threshold() {
        // a consistent instance makes every candidate's η equal to zero, so
        // the minimizer must report the smallest breakpoint
        let instance = generators::consistent_random::<f64>(7, 1, 0.8, 31).unwrap();
        let spectrum = bottom_spectrum(&instance.graph, LaplacianKind::Connection, 1).unwrap();
        let x = &spectrum.x_fields.as_ref().unwrap()[0];
        let candidates = threshold_sweep(&instance.graph, x).unwrap();
        let (u, _, _) = sweep_minimizer(&instance.graph, x).unwrap();
        let min_eta = candidates.iter().map(|c| c.eta).fold(f64::INFINITY, f64::min);
        let smallest_u_at_min = candidates
            .iter()
            .filter(|c| c.eta <= min_eta)
            .map(|c| c.u)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(u, smallest_u_at_min);
    }
}
