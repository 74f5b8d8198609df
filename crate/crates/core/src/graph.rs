//! Graph construction and the weight, adjacency, degree and Laplacian matrices.
//!
//! Graphs are immutable once built. Every constructor validates the edge set:
//! indices in range, no self-loops, no duplicate edges, finite nonzero weights.
//! Undirected edges are stored once and expand symmetrically into `W`.

use std::collections::{HashSet, VecDeque};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::matrix::DenseMatrix;

/// Attempts `random_graph` makes before giving up on connectivity.
pub const RANDOM_GRAPH_RETRIES: usize = 1000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("graph must have at least one vertex")]
    Empty,
    #[error("vertex index {index} out of range for {n} vertices")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("edge ({u}, {v}) has invalid weight {w}")]
    InvalidWeight { u: usize, v: usize, w: f64 },
    #[error("ring graph needs at least 3 vertices, got {0}")]
    RingTooSmall(usize),
    #[error("edge probability {0} outside (0, 1]")]
    InvalidProbability(f64),
    #[error("no connected graph after {0} attempts")]
    NotConnected(usize),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    directed: bool,
}

fn edge_key(u: usize, v: usize, directed: bool) -> (usize, usize) {
    if directed || u < v {
        (u, v)
    } else {
        (v, u)
    }
}

impl Graph {
    pub fn new(n: usize, edges: Vec<Edge>, directed: bool) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut seen = HashSet::with_capacity(edges.len());
        for e in &edges {
            for index in [e.u, e.v] {
                if index >= n {
                    return Err(GraphError::IndexOutOfRange { index, n });
                }
            }
            if e.u == e.v {
                return Err(GraphError::SelfLoop(e.u));
            }
            if !e.w.is_finite() || e.w <= 0.0 {
                return Err(GraphError::InvalidWeight {
                    u: e.u,
                    v: e.v,
                    w: e.w,
                });
            }
            if !seen.insert(edge_key(e.u, e.v, directed)) {
                return Err(GraphError::DuplicateEdge(e.u, e.v));
            }
        }
        Ok(Self { n, edges, directed })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        let key = edge_key(u, v, self.directed);
        self.edges
            .iter()
            .any(|e| edge_key(e.u, e.v, self.directed) == key)
    }

    /// Parses the edge-list text format.
    ///
    /// ```text
    /// # comment
    /// 3
    /// 0 1 1.0
    /// 1 2 0.5
    /// ```
    ///
    /// The first nonempty line is the vertex count, an optional `directed`
    /// line may follow, and every other line is `u v w`.
    pub fn from_edge_list(text: &str) -> Result<Self, GraphError> {
        let mut n = None;
        let mut directed = false;
        let mut expect_header = false;
        let mut edges = Vec::new();
        let mut lines = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let parse_err = |message: String| GraphError::Parse {
                line: line_no,
                message,
            };
            if n.is_none() {
                let count: usize = content
                    .parse()
                    .map_err(|_| parse_err(format!("expected vertex count, found {content:?}")))?;
                n = Some(count);
                expect_header = true;
                continue;
            }
            if expect_header {
                expect_header = false;
                if content.eq_ignore_ascii_case("directed") {
                    directed = true;
                    continue;
                }
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(parse_err(format!(
                    "expected \"u v w\", found {} fields",
                    fields.len()
                )));
            }
            let u: usize = fields[0]
                .parse()
                .map_err(|_| parse_err(format!("bad vertex index {:?}", fields[0])))?;
            let v: usize = fields[1]
                .parse()
                .map_err(|_| parse_err(format!("bad vertex index {:?}", fields[1])))?;
            let w: f64 = fields[2]
                .parse()
                .map_err(|_| parse_err(format!("bad weight {:?}", fields[2])))?;
            edges.push(Edge { u, v, w });
            lines.push(line_no);
        }

        let n = n.ok_or(GraphError::Parse {
            line: 0,
            message: "missing vertex count".into(),
        })?;
        // Re-validate edge by edge so that errors carry the offending line.
        let mut accepted = Vec::with_capacity(edges.len());
        for (edge, line) in edges.into_iter().zip(lines) {
            accepted.push(edge);
            if let Err(e) = Graph::validate_last(n, &accepted, directed) {
                return Err(GraphError::Parse {
                    line,
                    message: e.to_string(),
                });
            }
        }
        Graph::new(n, accepted, directed)
    }

    fn validate_last(n: usize, edges: &[Edge], directed: bool) -> Result<(), GraphError> {
        let Some((last, rest)) = edges.split_last() else {
            return Ok(());
        };
        Graph::new(n, vec![*last], directed)?;
        let key = edge_key(last.u, last.v, directed);
        if rest.iter().any(|e| edge_key(e.u, e.v, directed) == key) {
            return Err(GraphError::DuplicateEdge(last.u, last.v));
        }
        Ok(())
    }

    /// Renders the graph in the edge-list format accepted by [`Graph::from_edge_list`].
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.n);
        if self.directed {
            out.push_str("directed\n");
        }
        for e in &self.edges {
            let _ = writeln!(out, "{} {} {:?}", e.u, e.v, e.w);
        }
        out
    }

    /// Returns a copy of the graph with one extra edge.
    pub fn add_chord(&self, u: usize, v: usize, w: f64) -> Result<Self, GraphError> {
        if u < self.n && v < self.n && u != v && self.has_edge(u, v) {
            return Err(GraphError::DuplicateEdge(u, v));
        }
        let mut edges = self.edges.clone();
        edges.push(Edge { u, v, w });
        Graph::new(self.n, edges, self.directed)
    }

    /// Weight matrix `W`; undirected edges fill both `W_uv` and `W_vu`.
    pub fn weight_matrix(&self) -> DenseMatrix {
        let mut w = DenseMatrix::zeros(self.n, self.n);
        for e in &self.edges {
            w[(e.u, e.v)] = e.w;
            if !self.directed {
                w[(e.v, e.u)] = e.w;
            }
        }
        w
    }

    /// 0/1 adjacency indicator. Equals `W` for unweighted graphs.
    pub fn adjacency(&self) -> DenseMatrix {
        let mut a = self.weight_matrix();
        for v in a.as_mut_slice() {
            if *v != 0.0 {
                *v = 1.0;
            }
        }
        a
    }

    /// Diagonal degree matrix; `D_nn` is the row sum of `W` (out-degree for directed graphs).
    pub fn degree(&self) -> DenseMatrix {
        let w = self.weight_matrix();
        let mut d = DenseMatrix::zeros(self.n, self.n);
        for r in 0..self.n {
            d[(r, r)] = w.row(r).iter().sum();
        }
        d
    }

    /// Combinatorial Laplacian `L = D - W`.
    pub fn laplacian(&self) -> DenseMatrix {
        let mut l = self.weight_matrix();
        for r in 0..self.n {
            let deg: f64 = l.row(r).iter().sum();
            for v in l.row_mut(r) {
                *v = -*v;
            }
            l[(r, r)] = deg;
        }
        l
    }

    /// Weak connectivity (edge direction ignored).
    pub fn is_connected(&self) -> bool {
        let mut neighbours = vec![Vec::new(); self.n];
        for e in &self.edges {
            neighbours[e.u].push(e.v);
            neighbours[e.v].push(e.u);
        }
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &next in &neighbours[v] {
                if !seen[next] {
                    seen[next] = true;
                    count += 1;
                    queue.push_back(next);
                }
            }
        }
        count == self.n
    }
}

/// Unit-weight cycle `0 - 1 - ... - (n-1) - 0`.
pub fn ring_graph(n: usize, directed: bool) -> Result<Graph, GraphError> {
    if n < 3 {
        return Err(GraphError::RingTooSmall(n));
    }
    let edges = (0..n)
        .map(|u| Edge {
            u,
            v: (u + 1) % n,
            w: 1.0,
        })
        .collect();
    Graph::new(n, edges, directed)
}

/// Connected Erdős–Rényi graph with unit weights, deterministic per seed.
///
/// Disconnected draws are discarded and redrawn from the same random stream.
pub fn random_graph(n: usize, p: f64, seed: u64) -> Result<Graph, GraphError> {
    if n == 0 {
        return Err(GraphError::Empty);
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(GraphError::InvalidProbability(p));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RANDOM_GRAPH_RETRIES {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                if rng.gen::<f64>() < p {
                    edges.push(Edge { u, v, w: 1.0 });
                }
            }
        }
        let g = Graph::new(n, edges, false)?;
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(GraphError::NotConnected(RANDOM_GRAPH_RETRIES))
}
