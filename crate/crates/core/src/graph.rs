//! Decorated-graph data model: a weighted undirected graph whose edges carry
//! d×d orthogonal transforms, plus validation and the on-disk text format.
//!
//! Each unordered edge is stored once with `i < j` and the transform oriented
//! i→j; the reverse transform is the transpose, so the symmetry constraint
//! holds by construction. Vertex indices are 0-based in the API and 1-based
//! in the text format.

use std::collections::HashSet;
use std::fmt;

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::linalg::frobenius;
use crate::scalar::{cast, Scalar};
use crate::tol;

/// One undirected edge: endpoints `i < j`, positive weight, and the
/// orthogonal transform mapping data at `j` into the frame of `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge<F> {
    pub i: usize,
    pub j: usize,
    pub weight: F,
    pub transform: Array2<F>,
}

/// Weighted undirected graph with one orthogonal transform per edge.
///
/// Immutable after construction; shared references are safe across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionGraph<F> {
    n: usize,
    d: usize,
    edges: Vec<Edge<F>>,
}

/// Weighted degrees `d_i = Σ_j w_ij` and the total volume `Σ_i d_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeSummary<F> {
    pub degrees: Array1<F>,
    pub volume: F,
}

/// A single failed validation check, naming the edge or vertex involved.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// `‖ρ·ρᵀ − I‖_F` exceeds the orthogonality tolerance.
    NotOrthogonal { i: usize, j: usize, defect: f64 },
    /// An edge connects a vertex to itself.
    SelfLoop { vertex: usize },
    /// The same unordered pair appears more than once.
    DuplicateEdge { i: usize, j: usize },
    /// Edge weight is zero or negative.
    NonPositiveWeight { i: usize, j: usize, weight: f64 },
    /// Vertex has weighted degree zero (no incident edges).
    ZeroDegree { vertex: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotOrthogonal { i, j, defect } => {
                write!(f, "edge ({i}, {j}): transform not orthogonal (defect {defect:e})")
            }
            Violation::SelfLoop { vertex } => write!(f, "vertex {vertex}: self-loop"),
            Violation::DuplicateEdge { i, j } => write!(f, "edge ({i}, {j}): duplicate pair"),
            Violation::NonPositiveWeight { i, j, weight } => {
                write!(f, "edge ({i}, {j}): non-positive weight {weight}")
            }
            Violation::ZeroDegree { vertex } => write!(f, "vertex {vertex}: zero degree"),
        }
    }
}

impl<F: Scalar> ConnectionGraph<F> {
    /// Builds a graph from raw edge tuples `(i, j, weight, transform)`.
    ///
    /// Only representational constraints are enforced here (index ranges and
    /// matrix shape); semantic invariants such as orthogonality or positive
    /// degrees are reported by [`validate`](Self::validate). Edges given with
    /// `i > j` are reoriented by transposing the transform.
    pub fn new(n: usize, d: usize, edges: Vec<(usize, usize, F, Array2<F>)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Construction("vertex count must be positive".into()));
        }
        if d == 0 {
            return Err(Error::Construction("transform dimension must be positive".into()));
        }
        let mut stored = Vec::with_capacity(edges.len());
        for (i, j, weight, transform) in edges {
            if i >= n || j >= n {
                return Err(Error::Construction(format!(
                    "edge ({i}, {j}) out of range for n = {n}"
                )));
            }
            if transform.dim() != (d, d) {
                return Err(Error::Construction(format!(
                    "edge ({i}, {j}) carries a {:?} matrix, expected ({d}, {d})",
                    transform.dim()
                )));
            }
            if !weight.is_finite() || transform.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite("edge data"));
            }
            let edge = if i > j {
                Edge { i: j, j: i, weight, transform: transform.t().to_owned() }
            } else {
                Edge { i, j, weight, transform }
            };
            stored.push(edge);
        }
        Ok(ConnectionGraph { n, d, edges: stored })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn edges(&self) -> &[Edge<F>] {
        &self.edges
    }

    /// Checks every invariant and returns a description of each failure.
    ///
    /// An empty list means the graph is valid: all transforms orthogonal
    /// within `tol::ORTHOGONALITY`, no self-loops or duplicate pairs, strictly
    /// positive weights, and every vertex of positive degree.
    pub fn validate(&self) -> Vec<Violation> {
        let mut violations = Vec::new();
        let mut seen = HashSet::new();
        let eye = Array2::<F>::eye(self.d);
        for e in &self.edges {
            if e.i == e.j {
                violations.push(Violation::SelfLoop { vertex: e.i });
            } else if !seen.insert((e.i, e.j)) {
                violations.push(Violation::DuplicateEdge { i: e.i, j: e.j });
            }
            if e.weight <= F::zero() {
                violations.push(Violation::NonPositiveWeight {
                    i: e.i,
                    j: e.j,
                    weight: e.weight.to_f64().unwrap_or(f64::NAN),
                });
            }
            let gram = e.transform.dot(&e.transform.t());
            let defect = frobenius(&(&gram - &eye));
            if defect > cast(tol::ORTHOGONALITY) {
                violations.push(Violation::NotOrthogonal {
                    i: e.i,
                    j: e.j,
                    defect: defect.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        let degrees = self.degree_vector();
        for (v, &deg) in degrees.iter().enumerate() {
            if deg <= F::zero() {
                violations.push(Violation::ZeroDegree { vertex: v });
            }
        }
        violations
    }

    /// Errors with [`Error::InvalidGraph`] unless [`validate`](Self::validate)
    /// comes back empty.
    pub fn validated(&self) -> Result<()> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidGraph(violations))
        }
    }

    /// Raw weighted degree vector, with no validity check.
    pub fn degree_vector(&self) -> Array1<F> {
        let mut degrees = Array1::<F>::zeros(self.n);
        for e in &self.edges {
            degrees[e.i] += e.weight;
            if e.j != e.i {
                degrees[e.j] += e.weight;
            }
        }
        degrees
    }

    /// Weighted degrees and volume of a valid graph.
    pub fn degrees(&self) -> Result<DegreeSummary<F>> {
        self.validated()?;
        let degrees = self.degree_vector();
        let volume = degrees.sum();
        Ok(DegreeSummary { degrees, volume })
    }

    /// `vol(G) = Σ_i d_i`, computed without validation.
    pub fn volume(&self) -> F {
        self.degree_vector().sum()
    }

    /// True when every vertex is reachable from vertex 0 over the edge set.
    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut adjacency = vec![Vec::new(); self.n];
        for e in &self.edges {
            adjacency[e.i].push(e.j);
            adjacency[e.j].push(e.i);
        }
        let mut visited = vec![false; self.n];
        let mut stack = vec![0usize];
        visited[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &w in &adjacency[v] {
                if !visited[w] {
                    visited[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.n
    }

    /// Connected components as sorted vertex lists, each sorted internally.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut adjacency = vec![Vec::new(); self.n];
        for e in &self.edges {
            adjacency[e.i].push(e.j);
            adjacency[e.j].push(e.i);
        }
        let mut visited = vec![false; self.n];
        let mut components = Vec::new();
        for start in 0..self.n {
            if visited[start] {
                continue;
            }
            let mut stack = vec![start];
            visited[start] = true;
            let mut component = vec![start];
            while let Some(v) = stack.pop() {
                for &w in &adjacency[v] {
                    if !visited[w] {
                        visited[w] = true;
                        component.push(w);
                        stack.push(w);
                    }
                }
            }
            component.sort_unstable();
            components.push(component);
        }
        components
    }
}

/// Serializes a graph in the whitespace text format.
///
/// Line 1 is `n d`; every following line is one edge record
/// `i j w r11 … rdd` with 1-based vertex indices and the transform written
/// row-major at 17 significant digits, so a read reproduces it bit for bit.
pub fn write_graph<F: Scalar>(g: &ConnectionGraph<F>) -> String {
    let mut out = String::new();
    out.push_str(&format!("{} {}\n", g.n(), g.d()));
    for e in g.edges() {
        out.push_str(&format!("{} {} {:.16e}", e.i + 1, e.j + 1, e.weight));
        for x in e.transform.iter() {
            out.push_str(&format!(" {:.16e}", x));
        }
        out.push('\n');
    }
    out
}

struct Token<'a> {
    text: &'a str,
    line: usize,
}

fn tokenize(text: &str) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        for word in line.split_whitespace() {
            tokens.push(Token { text: word, line: idx + 1 });
        }
    }
    tokens
}

fn parse_index(tok: &Token<'_>, what: &str) -> Result<usize> {
    tok.text.parse::<usize>().map_err(|_| Error::Parse {
        line: tok.line,
        message: format!("expected {what}, found `{}`", tok.text),
    })
}

fn parse_number<F: Scalar>(tok: &Token<'_>, what: &str) -> Result<F> {
    tok.text.parse::<F>().map_err(|_| Error::Parse {
        line: tok.line,
        message: format!("expected {what}, found `{}`", tok.text),
    })
}

/// Parses the text format produced by [`write_graph`].
///
/// `#` starts a comment that runs to the end of the line. Matrix entries may
/// continue onto following lines. Malformed headers, truncated records and
/// non-numeric tokens are reported with their line number.
pub fn read_graph<F: Scalar>(text: &str) -> Result<ConnectionGraph<F>> {
    let tokens = tokenize(text);
    let mut cursor = Cursor { tokens: &tokens, pos: 0 };

    let n = parse_index(cursor.next("vertex count in header")?, "vertex count")?;
    let d = parse_index(cursor.next("transform dimension in header")?, "transform dimension")?;
    if n == 0 || d == 0 {
        return Err(Error::Parse {
            line: tokens.first().map_or(1, |t| t.line),
            message: "header counts must be positive".into(),
        });
    }

    let mut edges = Vec::new();
    while !cursor.done() {
        let ti = cursor.next("vertex index")?;
        let line = ti.line;
        let i = parse_index(ti, "vertex index")?;
        let j = parse_index(cursor.next("vertex index")?, "vertex index")?;
        if i == 0 || i > n || j == 0 || j > n {
            return Err(Error::Parse {
                line,
                message: format!("vertex index out of range 1..={n} in edge ({i}, {j})"),
            });
        }
        let weight: F = parse_number(cursor.next("edge weight")?, "edge weight")?;
        let mut entries = Vec::with_capacity(d * d);
        for _ in 0..d * d {
            entries.push(parse_number(cursor.next("matrix entry")?, "matrix entry")?);
        }
        let transform = Array2::from_shape_vec((d, d), entries)
            .expect("entry count matches shape by construction");
        edges.push((i - 1, j - 1, weight, transform));
    }
    ConnectionGraph::new(n, d, edges)
}

struct Cursor<'a> {
    tokens: &'a [Token<'a>],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn next(&mut self, what: &str) -> Result<&'a Token<'a>> {
        let tok = self.tokens.get(self.pos).ok_or_else(|| Error::Parse {
            line: self.tokens.last().map_or(1, |t| t.line),
            message: format!("unexpected end of input, expected {what}"),
        })?;
        self.pos += 1;
        Ok(tok)
    }

    fn done(&self) -> bool {
        self.pos >= self.tokens.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn unit_triangle() -> ConnectionGraph<f64> {
        let eye = Array2::<f64>::eye(2);
        ConnectionGraph::new(
            3,
            2,
            vec![
                (0, 1, 1.0, eye.clone()),
                (1, 2, 1.0, eye.clone()),
                (0, 2, 1.0, eye),
            ],
        )
        .unwrap()
    }

    #[test]
    fn triangle_with_identity_transforms_is_valid() {
        assert!(unit_triangle().validate().is_empty());
    }

    #[test]
    fn shear_transform_is_flagged() {
        let shear = array![[1.0, 1.0], [0.0, 1.0]];
        let g = ConnectionGraph::new(2, 2, vec![(0, 1, 1.0, shear)]).unwrap();
        let violations = g.validate();
        assert_eq!(violations.len(), 1);
        assert!(matches!(violations[0], Violation::NotOrthogonal { i: 0, j: 1, .. }));
    }

    #[test]
    fn isolated_vertex_is_flagged() {
        let g =
            ConnectionGraph::new(3, 1, vec![(0, 1, 1.0, Array2::eye(1))]).unwrap();
        let violations = g.validate();
        assert_eq!(violations.len(), 1);
        assert!(matches!(violations[0], Violation::ZeroDegree { vertex: 2 }));
    }

    #[test]
    fn self_loop_duplicate_and_weight_are_flagged() {
        let eye = Array2::<f64>::eye(1);
        let g = ConnectionGraph::new(
            2,
            1,
            vec![
                (0, 0, 1.0, eye.clone()),
                (0, 1, 1.0, eye.clone()),
                (1, 0, -2.0, eye),
            ],
        )
        .unwrap();
        let violations = g.validate();
        assert!(violations.iter().any(|v| matches!(v, Violation::SelfLoop { vertex: 0 })));
        assert!(violations.iter().any(|v| matches!(v, Violation::DuplicateEdge { i: 0, j: 1 })));
        assert!(violations
            .iter()
            .any(|v| matches!(v, Violation::NonPositiveWeight { i: 0, j: 1, .. })));
    }

    #[test]
    fn degrees_of_unweighted_triangle() {
        let summary = unit_triangle().degrees().unwrap();
        assert_eq!(summary.degrees.to_vec(), vec![2.0, 2.0, 2.0]);
        assert_eq!(summary.volume, 6.0);
    }

    #[test]
    fn degrees_of_weighted_path() {
        let g = ConnectionGraph::new(2, 1, vec![(0, 1, 3.0, Array2::eye(1))]).unwrap();
        let summary = g.degrees().unwrap();
        assert_eq!(summary.degrees.to_vec(), vec![3.0, 3.0]);
        assert_eq!(summary.volume, 6.0);
    }

    #[test]
    fn degrees_of_ring_are_two() {
        let eye = Array2::<f64>::eye(1);
        let mut edges: Vec<_> = (0..7).map(|i| (i, i + 1, 1.0, eye.clone())).collect();
        edges.push((7, 0, 1.0, eye));
        let g = ConnectionGraph::new(8, 1, edges).unwrap();
        let summary = g.degrees().unwrap();
        assert!(summary.degrees.iter().all(|&d| d == 2.0));
        assert_eq!(summary.volume, 16.0);
    }

    #[test]
    fn degrees_error_on_invalid_graph() {
        let g = ConnectionGraph::new(3, 1, vec![(0, 1, 1.0, Array2::eye(1))]).unwrap();
        assert!(matches!(g.degrees(), Err(Error::InvalidGraph(_))));
    }

    #[test]
    fn reversed_edges_are_reoriented_with_transpose() {
        let rot = array![[0.0, -1.0], [1.0, 0.0]];
        let g = ConnectionGraph::new(2, 2, vec![(1, 0, 1.0, rot.clone())]).unwrap();
        let e = &g.edges()[0];
        assert_eq!((e.i, e.j), (0, 1));
        assert_eq!(e.transform, rot.t().to_owned());
    }

    #[test]
    fn write_then_read_round_trips_bit_exactly() {
        let rot = array![
            [0.6, -0.8],
            [0.8, 0.6],
        ];
        let g = ConnectionGraph::new(
            4,
            2,
            vec![
                (0, 1, 1.0 / 3.0, rot.clone()),
                (1, 2, 0.125, rot.clone()),
                (2, 3, 2.5, rot.clone()),
                (0, 3, 1.0, rot),
            ],
        )
        .unwrap();
        let round: ConnectionGraph<f64> = read_graph(&write_graph(&g)).unwrap();
        assert_eq!(g, round);
    }

    #[test]
    fn ring_instance_round_trips_identically() {
        let g = crate::generators::ring::<f64>(4, 2).unwrap().graph;
        let round: ConnectionGraph<f64> = read_graph(&write_graph(&g)).unwrap();
        assert_eq!(g.edges(), round.edges());
    }

    #[test]
    fn truncated_record_reports_line_number() {
        // header says d = 2 but the record carries only 3 matrix entries
        let text = "3 2\n1 2 1.0 1.0 0.0 0.0\n";
        let err = read_graph::<f64>(text).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn bad_header_reports_line_number() {
        let err = read_graph::<f64>("# comment\nx 2\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn empty_edge_section_parses_then_fails_validation() {
        let g: ConnectionGraph<f64> = read_graph("2 1\n").unwrap();
        let violations = g.validate();
        assert_eq!(violations.len(), 2);
        assert!(violations.iter().all(|v| matches!(v, Violation::ZeroDegree { .. })));
    }

    #[test]
    fn comments_and_multiline_records_parse() {
        let text = "# a graph\n2 2\n1 2 1.0\n1.0 0.0\n0.0 1.0 # trailing\n";
        let g: ConnectionGraph<f64> = read_graph(text).unwrap();
        assert_eq!(g.edges().len(), 1);
        assert_eq!(g.edges()[0].transform, Array2::eye(2));
    }

    #[test]
    fn handshake_identity_holds() {
        let g = unit_triangle();
        let twice_edge_weight: f64 = g.edges().iter().map(|e| e.weight).sum::<f64>() * 2.0;
        assert_eq!(g.volume(), twice_edge_weight);
    }

    #[test]
    fn components_of_disjoint_pairs() {
        let eye = Array2::<f64>::eye(1);
        let g = ConnectionGraph::new(
            4,
            1,
            vec![(0, 1, 1.0, eye.clone()), (2, 3, 1.0, eye)],
        )
        .unwrap();
        assert!(!g.is_connected());
        assert_eq!(g.components(), vec![vec![0, 1], vec![2, 3]]);
    }
}
