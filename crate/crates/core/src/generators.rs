//! Named instance families and the random noise model used by tests, the
//! bound suite and the CLI: the sign-flipped ring, the rainbow graph with its
//! crossing chords, the reflection-decorated pair of cliques, and
//! Erdős–Rényi instances with a planted potential and optional Haar outliers.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fields::{GroupPotential, VertexField};
use crate::graph::ConnectionGraph;
use crate::linalg::haar_orthogonal;
use crate::scalar::{cast, Scalar};

const CONNECTIVITY_RETRIES: usize = 100;

/// Parameters of one generated instance family.
#[derive(Debug, Clone, PartialEq)]
pub enum InstanceSpec {
    Ring { n: usize, d: usize },
    Rainbow { n: usize, d: usize },
    TwoCliquesO2 { m: usize },
    ConsistentRandom { n: usize, d: usize, p: f64, seed: u64 },
    OutlierNoise { n: usize, d: usize, p: f64, eps: f64, seed: u64 },
}

/// A generated graph together with whatever ground truth its family defines:
/// a slow test field for the ring families, the planted potential for the
/// random families.
#[derive(Debug, Clone)]
pub struct GeneratedInstance<F> {
    pub graph: ConnectionGraph<F>,
    pub field: Option<VertexField<F>>,
    pub potential: Option<GroupPotential<F>>,
}

fn neg_identity<F: Scalar>(d: usize) -> Array2<F> {
    Array2::from_diag_elem(d, -F::one())
}

/// Builds the test field with first coordinate `2k/n − 1` at vertex `k`
/// (1-based), zero elsewhere.
fn ramp_field<F: Scalar>(n: usize, d: usize) -> VertexField<F> {
    let mut field = VertexField::zeros(n, d);
    let mut block = vec![F::zero(); d];
    for i in 0..n {
        block[0] = cast::<F>(2.0 * (i + 1) as f64 / n as f64) - F::one();
        field.set_block(i, &block);
    }
    field
}

/// Cycle with unit weights and identity transforms except the closing edge,
/// which carries `−I`. Also returns the slowly varying ramp field whose
/// frustration decays quadratically in `n`.
pub fn ring<F: Scalar>(n: usize, d: usize) -> Result<GeneratedInstance<F>> {
    if n < 3 {
        return Err(Error::Construction(format!("ring needs n >= 3, got {n}")));
    }
    let eye = Array2::<F>::eye(d);
    let mut edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, F::one(), eye.clone())).collect();
    edges.push((n - 1, 0, F::one(), neg_identity(d)));
    let graph = ConnectionGraph::new(n, d, edges)?;
    Ok(GeneratedInstance { graph, field: Some(ramp_field(n, d)), potential: None })
}

/// The ring plus a `−I` chord between vertices `k` and `n−k` (1-based) for
/// every integer `1 ≤ k < n/2`; the endpoints are always distinct, so the
/// excluded values of `k` are exactly the degenerate ones.
pub fn rainbow<F: Scalar>(n: usize, d: usize) -> Result<GeneratedInstance<F>> {
    if n < 4 {
        return Err(Error::Construction(format!("rainbow needs n >= 4, got {n}")));
    }
    let base = ring::<F>(n, d)?;
    let mut edges: Vec<_> = base
        .graph
        .edges()
        .iter()
        .map(|e| (e.i, e.j, e.weight, e.transform.clone()))
        .collect();
    let mut k = 1usize;
    while 2 * k < n {
        edges.push((k - 1, n - k - 1, F::one(), neg_identity(d)));
        k += 1;
    }
    let graph = ConnectionGraph::new(n, d, edges)?;
    Ok(GeneratedInstance { graph, field: Some(ramp_field(n, d)), potential: None })
}

/// Two disjoint complete graphs on `m` vertices each, every edge carrying
/// the reflection `diag(−1, 1)` with unit weight.
pub fn two_cliques_o2<F: Scalar>(m: usize) -> Result<ConnectionGraph<F>> {
    if m < 3 {
        return Err(Error::Construction(format!("cliques need m >= 3 vertices, got {m}")));
    }
    let mut reflection = Array2::<F>::eye(2);
    reflection[[0, 0]] = -F::one();
    let mut edges = Vec::new();
    for offset in [0, m] {
        for i in 0..m {
            for j in i + 1..m {
                edges.push((offset + i, offset + j, F::one(), reflection.clone()));
            }
        }
    }
    ConnectionGraph::new(2 * m, 2, edges)
}

/// Edge pairs and the planted per-vertex matrices of a sampled instance.
type SampledSkeleton<F> = (Vec<(usize, usize)>, Vec<Array2<F>>);

/// Samples the shared part of the random families: a connected G(n, p) edge
/// set (with a bounded retry budget) and a Haar potential on the vertices.
fn sample_connected_skeleton<F: Scalar>(
    n: usize,
    d: usize,
    p: f64,
    rng: &mut ChaCha8Rng,
) -> Result<SampledSkeleton<F>> {
    if n < 2 {
        return Err(Error::Construction(format!("random instances need n >= 2, got {n}")));
    }
    if !(0.0..=1.0).contains(&p) || p == 0.0 {
        return Err(Error::Construction(format!("edge probability {p} outside (0, 1]")));
    }
    let mut pairs = Vec::new();
    let mut connected = false;
    for _ in 0..CONNECTIVITY_RETRIES {
        pairs.clear();
        for i in 0..n {
            for j in i + 1..n {
                if rng.random::<f64>() < p {
                    pairs.push((i, j));
                }
            }
        }
        if pairs_connected(n, &pairs) {
            connected = true;
            break;
        }
    }
    if !connected {
        return Err(Error::ConnectivityRetries { attempts: CONNECTIVITY_RETRIES });
    }
    let matrices: Vec<Array2<F>> = (0..n).map(|_| haar_orthogonal(d, rng)).collect();
    Ok((pairs, matrices))
}

fn pairs_connected(n: usize, pairs: &[(usize, usize)]) -> bool {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut v: usize) -> usize {
        while parent[v] != v {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        v
    }
    let mut merged = 0usize;
    for &(i, j) in pairs {
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri != rj {
            parent[ri] = rj;
            merged += 1;
        }
    }
    merged == n - 1
}

/// Connected Erdős–Rényi instance whose transforms are exactly consistent
/// with a planted Haar potential: `ρ_ij = g_i·g_jᵀ`.
pub fn consistent_random<F: Scalar>(
    n: usize,
    d: usize,
    p: f64,
    seed: u64,
) -> Result<GeneratedInstance<F>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (pairs, matrices) = sample_connected_skeleton::<F>(n, d, p, &mut rng)?;
    let edges = pairs
        .iter()
        .map(|&(i, j)| (i, j, F::one(), matrices[i].dot(&matrices[j].t())))
        .collect();
    let graph = ConnectionGraph::new(n, d, edges)?;
    Ok(GeneratedInstance {
        graph,
        field: None,
        potential: Some(GroupPotential::new(matrices)?),
    })
}

/// Consistent instance with an `eps`-fraction of edges (chosen uniformly)
/// replaced by independent Haar transforms. With `eps = 0` this reproduces
/// [`consistent_random`] for the same seed.
pub fn outlier_noise<F: Scalar>(
    n: usize,
    d: usize,
    p: f64,
    eps: f64,
    seed: u64,
) -> Result<GeneratedInstance<F>> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::Construction(format!("outlier fraction {eps} outside [0, 1)")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (pairs, matrices) = sample_connected_skeleton::<F>(n, d, p, &mut rng)?;
    let mut edges: Vec<(usize, usize, F, Array2<F>)> = pairs
        .iter()
        .map(|&(i, j)| (i, j, F::one(), matrices[i].dot(&matrices[j].t())))
        .collect();
    let count = (eps * edges.len() as f64).round() as usize;
    if count > 0 {
        let mut chosen = rand::seq::index::sample(&mut rng, edges.len(), count).into_vec();
        chosen.sort_unstable();
        for idx in chosen {
            edges[idx].3 = haar_orthogonal(d, &mut rng);
        }
    }
    let graph = ConnectionGraph::new(n, d, edges)?;
    Ok(GeneratedInstance {
        graph,
        field: None,
        potential: Some(GroupPotential::new(matrices)?),
    })
}

/// Dispatches on the family tag.
pub fn generate<F: Scalar>(spec: &InstanceSpec) -> Result<GeneratedInstance<F>> {
    match *spec {
        InstanceSpec::Ring { n, d } => ring(n, d),
        InstanceSpec::Rainbow { n, d } => rainbow(n, d),
        InstanceSpec::TwoCliquesO2 { m } => Ok(GeneratedInstance {
            graph: two_cliques_o2(m)?,
            field: None,
            potential: None,
        }),
        InstanceSpec::ConsistentRandom { n, d, p, seed } => consistent_random(n, d, p, seed),
        InstanceSpec::OutlierNoise { n, d, p, eps, seed } => outlier_noise(n, d, p, eps, seed),
    }
}
