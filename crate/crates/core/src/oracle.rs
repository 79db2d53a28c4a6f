//! Independent brute-force computation of the frustration constants on tiny
//! instances. The d = 1 oracle enumerates sign assignments exactly; the
//! d = 2 oracle searches nested angle grids and therefore reports an upper
//! bound on the true constant.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::fields::{GroupPotential, VertexField};
use crate::graph::ConnectionGraph;
use crate::rounding::SyncOutput;
use crate::scalar::{cast, Scalar};

/// Which frustration constant an oracle run minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstantKind {
    /// Full unit-vector synchronization.
    EtaG,
    /// Partial synchronization (zero vectors allowed, not all zero).
    EtaStarG,
    /// Orthogonal-group synchronization.
    NuG,
    /// Unsquared variants of the three above.
    EtaGL1,
    EtaStarGL1,
    NuGL1,
}

impl ConstantKind {
    pub fn is_partial(self) -> bool {
        matches!(self, ConstantKind::EtaStarG | ConstantKind::EtaStarGL1)
    }

    pub fn is_l1(self) -> bool {
        matches!(self, ConstantKind::EtaGL1 | ConstantKind::EtaStarGL1 | ConstantKind::NuGL1)
    }

    pub fn is_potential(self) -> bool {
        matches!(self, ConstantKind::NuG | ConstantKind::NuGL1)
    }

    pub fn parse(token: &str) -> Option<Self> {
        match token {
            "eta_g" => Some(ConstantKind::EtaG),
            "eta_star_g" => Some(ConstantKind::EtaStarG),
            "nu_g" => Some(ConstantKind::NuG),
            "eta_g_l1" => Some(ConstantKind::EtaGL1),
            "eta_star_g_l1" => Some(ConstantKind::EtaStarGL1),
            "nu_g_l1" => Some(ConstantKind::NuGL1),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ConstantKind::EtaG => "eta_g",
            ConstantKind::EtaStarG => "eta_star_g",
            ConstantKind::NuG => "nu_g",
            ConstantKind::EtaGL1 => "eta_g_l1",
            ConstantKind::EtaStarGL1 => "eta_star_g_l1",
            ConstantKind::NuGL1 => "nu_g_l1",
        }
    }
}

/// How an oracle value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMethod {
    /// Exhaustive enumeration of the discrete state space (exact).
    ExactEnumeration,
    /// Angle-grid search; the reported value is an upper bound whose quality
    /// depends on the grid resolution.
    Grid { steps: usize },
}

/// Oracle output: the minimal value found and a witness achieving it.
#[derive(Debug, Clone)]
pub struct OracleResult<F> {
    pub kind: ConstantKind,
    pub value: F,
    pub argmin: SyncOutput<F>,
    pub method: OracleMethod,
}

const FULL_CAP: usize = 14;
const PARTIAL_CAP: usize = 9;
const GRID_FREE_CAP: usize = 5;
const MAX_GRID_STEPS: usize = 64;

/// Exact minimization over sign assignments for d = 1.
///
/// Full kinds enumerate `{−1, +1}^n` in Gray-code order with incremental
/// edge-sum updates (`n ≤ 14`); partial kinds enumerate `{−1, 0, +1}^n`
/// without the all-zero state (`n ≤ 9`). Among minimizers the
/// lexicographically smallest assignment wins.
pub fn brute_force_d1<F: Scalar>(
    g: &ConnectionGraph<F>,
    kind: ConstantKind,
) -> Result<OracleResult<F>> {
    if g.d() != 1 {
        return Err(Error::OracleDomain(format!(
            "sign enumeration needs d = 1, graph has d = {}",
            g.d()
        )));
    }
    g.validated()?;
    let n = g.n();
    let cap = if kind.is_partial() { PARTIAL_CAP } else { FULL_CAP };
    if n > cap {
        return Err(Error::OracleDomain(format!(
            "n = {n} exceeds the enumeration cap {cap} for {}",
            kind.name()
        )));
    }
    let edges: Vec<(usize, usize, F, F)> = g
        .edges()
        .iter()
        .map(|e| (e.i, e.j, e.weight, e.transform[[0, 0]]))
        .collect();
    let degrees = g.degree_vector();

    let (value, signs) = if kind.is_partial() {
        partial_enumeration(n, &edges, &degrees, kind.is_l1())
    } else {
        full_enumeration(n, &edges, &degrees, kind.is_l1())
    };

    let argmin = package_d1(kind, &signs)?;
    Ok(OracleResult { kind, value, argmin, method: OracleMethod::ExactEnumeration })
}

fn edge_numerator<F: Scalar>(edges: &[(usize, usize, F, F)], signs: &[F], l1: bool) -> F {
    let mut acc = F::zero();
    for &(i, j, w, rho) in edges {
        let diff = signs[i] - rho * signs[j];
        if l1 {
            acc += w * diff.abs();
        } else {
            acc += w * diff * diff;
        }
    }
    if l1 {
        acc * cast(2.0)
    } else {
        acc
    }
}

fn lex_smaller<F: Scalar>(a: &[F], b: &[F]) -> bool {
    for (x, y) in a.iter().zip(b.iter()) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

/// Gray-code walk over `{−1, +1}^n`. The running numerator is updated one
/// incident edge at a time; candidates within a small guard of the incumbent
/// are recomputed from scratch before comparing, which removes the float
/// drift of the incremental path.
fn full_enumeration<F: Scalar>(
    n: usize,
    edges: &[(usize, usize, F, F)],
    degrees: &ndarray::Array1<F>,
    l1: bool,
) -> (F, Vec<F>) {
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (idx, &(i, j, _, _)) in edges.iter().enumerate() {
        incident[i].push(idx);
        incident[j].push(idx);
    }
    let volume = degrees.sum();
    let mut signs = vec![-F::one(); n];
    let mut numerator = edge_numerator(edges, &signs, l1);
    let mut best_value = numerator / volume;
    let mut best_signs = signs.clone();
    let guard = cast::<F>(1e-9) * (F::one() + best_value.abs());

    let states: u64 = 1u64 << n;
    for k in 1..states {
        let v = k.trailing_zeros() as usize;
        for &idx in &incident[v] {
            let (i, j, w, rho) = edges[idx];
            let diff = signs[i] - rho * signs[j];
            let term = if l1 { w * diff.abs() * cast(2.0) } else { w * diff * diff };
            numerator -= term;
        }
        signs[v] = -signs[v];
        for &idx in &incident[v] {
            let (i, j, w, rho) = edges[idx];
            let diff = signs[i] - rho * signs[j];
            let term = if l1 { w * diff.abs() * cast(2.0) } else { w * diff * diff };
            numerator += term;
        }
        let value = numerator / volume;
        if value <= best_value + guard {
            let exact = edge_numerator(edges, &signs, l1) / volume;
            if exact < best_value {
                best_value = exact;
                best_signs.copy_from_slice(&signs);
            } else if exact == best_value && lex_smaller(&signs, &best_signs) {
                best_signs.copy_from_slice(&signs);
            }
        }
    }
    (best_value, best_signs)
}

/// Lexicographic walk over `{−1, 0, +1}^n` minus the all-zero state, with a
/// fresh evaluation per state.
fn partial_enumeration<F: Scalar>(
    n: usize,
    edges: &[(usize, usize, F, F)],
    degrees: &ndarray::Array1<F>,
    l1: bool,
) -> (F, Vec<F>) {
    let levels = [-F::one(), F::zero(), F::one()];
    let mut digits = vec![0usize; n];
    let mut best_value = F::infinity();
    let mut best_signs = vec![-F::one(); n];
    loop {
        let signs: Vec<F> = digits.iter().map(|&t| levels[t]).collect();
        let mut denominator = F::zero();
        for i in 0..n {
            denominator += degrees[i] * signs[i].abs();
        }
        if denominator > F::zero() {
            let value = edge_numerator(edges, &signs, l1) / denominator;
            if value < best_value {
                best_value = value;
                best_signs = signs;
            }
        }
        // odometer: least significant digit at the highest vertex keeps the
        // visit order lexicographic in the assignment tuple
        let mut pos = n;
        loop {
            if pos == 0 {
                return (best_value, best_signs);
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < 3 {
                break;
            }
            digits[pos] = 0;
        }
    }
}

fn package_d1<F: Scalar>(kind: ConstantKind, signs: &[F]) -> Result<SyncOutput<F>> {
    if kind.is_potential() {
        let matrices: Vec<Array2<F>> =
            signs.iter().map(|&s| Array2::from_elem((1, 1), s)).collect();
        Ok(SyncOutput::Potential(GroupPotential::new(matrices)?))
    } else {
        let data = ndarray::Array1::from_vec(signs.to_vec());
        Ok(SyncOutput::Field(VertexField::new(signs.len(), 1, data)?))
    }
}

/// Grid search over angles for d = 2.
///
/// Unit vectors live on the `steps`-point circle grid (partial kinds add the
/// zero vector); group elements are the rotations and reflections at those
/// angles. Potential kinds factor over connected components with the first
/// vertex of each component pinned to the identity, a gauge choice that
/// leaves the minimum unchanged while shrinking the state space. The
/// returned value is an upper bound on the true constant at the given grid
/// resolution, and refining `steps` by a factor of two never increases it.
pub fn grid_search_d2<F: Scalar>(
    g: &ConnectionGraph<F>,
    kind: ConstantKind,
    steps: usize,
) -> Result<OracleResult<F>> {
    if g.d() != 2 {
        return Err(Error::OracleDomain(format!(
            "grid search needs d = 2, graph has d = {}",
            g.d()
        )));
    }
    if steps == 0 || steps > MAX_GRID_STEPS {
        return Err(Error::OracleDomain(format!(
            "steps = {steps} outside 1..={MAX_GRID_STEPS}"
        )));
    }
    g.validated()?;
    if kind.is_potential() {
        grid_potentials(g, kind, steps)
    } else {
        grid_sphere(g, kind, steps)
    }
}

fn angle_table<F: Scalar>(steps: usize) -> Vec<(F, F)> {
    (0..steps)
        .map(|t| {
            let angle = 2.0 * std::f64::consts::PI * t as f64 / steps as f64;
            (cast::<F>(angle.cos()), cast::<F>(angle.sin()))
        })
        .collect()
}

fn grid_sphere<F: Scalar>(
    g: &ConnectionGraph<F>,
    kind: ConstantKind,
    steps: usize,
) -> Result<OracleResult<F>> {
    let n = g.n();
    if n > GRID_FREE_CAP {
        return Err(Error::OracleDomain(format!(
            "n = {n} exceeds the sphere grid cap {GRID_FREE_CAP}"
        )));
    }
    let angles = angle_table::<F>(steps);
    let zero_digit = steps; // partial kinds map this digit to the zero vector
    let base = if kind.is_partial() { steps + 1 } else { steps };
    let degrees = g.degree_vector();
    let l1 = kind.is_l1();

    let mut digits = vec![0usize; n];
    let mut blocks = vec![(F::zero(), F::zero()); n];
    let mut best_value = F::infinity();
    let mut best_blocks = blocks.clone();
    loop {
        for (slot, &digit) in digits.iter().enumerate() {
            blocks[slot] = if digit == zero_digit { (F::zero(), F::zero()) } else { angles[digit] };
        }
        let mut denominator = F::zero();
        for i in 0..n {
            let mass = (blocks[i].0 * blocks[i].0 + blocks[i].1 * blocks[i].1).sqrt();
            denominator += degrees[i] * mass;
        }
        if denominator > F::zero() {
            let mut numerator = F::zero();
            for e in g.edges() {
                let (xj, yj) = blocks[e.j];
                let tx = e.transform[[0, 0]] * xj + e.transform[[0, 1]] * yj;
                let ty = e.transform[[1, 0]] * xj + e.transform[[1, 1]] * yj;
                let dx = blocks[e.i].0 - tx;
                let dy = blocks[e.i].1 - ty;
                let sq = dx * dx + dy * dy;
                numerator += if l1 { e.weight * sq.sqrt() } else { e.weight * sq };
            }
            if l1 {
                numerator *= cast(2.0);
            }
            let value = numerator / denominator;
            if value < best_value {
                best_value = value;
                best_blocks.copy_from_slice(&blocks);
            }
        }
        let mut pos = n;
        loop {
            if pos == 0 {
                let mut field = VertexField::zeros(n, 2);
                for (i, &(x, y)) in best_blocks.iter().enumerate() {
                    field.set_block(i, &[x, y]);
                }
                return Ok(OracleResult {
                    kind,
                    value: best_value,
                    argmin: SyncOutput::Field(field),
                    method: OracleMethod::Grid { steps },
                });
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < base {
                break;
            }
            digits[pos] = 0;
        }
    }
}

fn group_table<F: Scalar>(steps: usize) -> Vec<Array2<F>> {
    let mut table = Vec::with_capacity(2 * steps);
    for &(c, s) in &angle_table::<F>(steps) {
        let mut rot = Array2::<F>::zeros((2, 2));
        rot[[0, 0]] = c;
        rot[[0, 1]] = -s;
        rot[[1, 0]] = s;
        rot[[1, 1]] = c;
        table.push(rot);
    }
    for &(c, s) in &angle_table::<F>(steps) {
        let mut refl = Array2::<F>::zeros((2, 2));
        refl[[0, 0]] = c;
        refl[[0, 1]] = s;
        refl[[1, 0]] = s;
        refl[[1, 1]] = -c;
        table.push(refl);
    }
    table
}

fn grid_potentials<F: Scalar>(
    g: &ConnectionGraph<F>,
    kind: ConstantKind,
    steps: usize,
) -> Result<OracleResult<F>> {
    let components = g.components();
    for component in &components {
        if component.len() > GRID_FREE_CAP + 1 {
            return Err(Error::OracleDomain(format!(
                "component with {} vertices exceeds the pinned grid cap {}",
                component.len(),
                GRID_FREE_CAP + 1
            )));
        }
    }
    let table = group_table::<F>(steps);
    let l1 = kind.is_l1();
    let mut assignment: Vec<Array2<F>> = vec![Array2::eye(2); g.n()];

    for component in &components {
        let members: std::collections::HashSet<usize> = component.iter().copied().collect();
        let edges: Vec<_> =
            g.edges().iter().filter(|e| members.contains(&e.i)).collect();
        let free = &component[1..];
        let mut digits = vec![0usize; free.len()];
        let mut local: Vec<Array2<F>> = vec![Array2::eye(2); g.n()];
        let mut best_num = F::infinity();
        let mut best_local: Vec<(usize, Array2<F>)> = Vec::new();
        loop {
            for (slot, &vertex) in free.iter().enumerate() {
                local[vertex] = table[digits[slot]].clone();
            }
            let mut numerator = F::zero();
            for e in &edges {
                let transported = e.transform.dot(&local[e.j]);
                let diff = &local[e.i] - &transported;
                let sq = diff.iter().fold(F::zero(), |acc, &x| acc + x * x);
                numerator += if l1 { e.weight * sq.sqrt() } else { e.weight * sq };
            }
            if numerator < best_num {
                best_num = numerator;
                best_local =
                    component.iter().map(|&v| (v, local[v].clone())).collect();
            }
            let mut pos = digits.len();
            let mut done = false;
            loop {
                if pos == 0 {
                    done = true;
                    break;
                }
                pos -= 1;
                digits[pos] += 1;
                if digits[pos] < table.len() {
                    break;
                }
                digits[pos] = 0;
            }
            if done || free.is_empty() {
                break;
            }
        }
        for (vertex, matrix) in best_local {
            assignment[vertex] = matrix;
        }
    }

    let potential = GroupPotential::new(assignment)?;
    let value = if l1 {
        crate::frustration::nu_l1(g, &potential)?
    } else {
        crate::frustration::nu(g, &potential)?
    };
    Ok(OracleResult {
        kind,
        value,
        argmin: SyncOutput::Potential(potential),
        method: OracleMethod::Grid { steps },
    })
}
