//! Patrol graph representation, shortest-path precomputation, and distance
//! queries from arbitrary agent positions (including mid-edge) to vertices.

use serde::Deserialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Vertices are dense integers `0..n`, indexing directly into per-vertex
/// feature vectors and network layers.
pub type VertexId = usize;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("invalid graph JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("graph has no vertices")]
    Empty,
    #[error("edge ({u}, {v}) references a vertex outside 0..{n}")]
    VertexOutOfRange { u: VertexId, v: VertexId, n: usize },
    #[error("self-loop on vertex {0}")]
    SelfLoop(VertexId),
    #[error("duplicate edge ({u}, {v})")]
    DuplicateEdge { u: VertexId, v: VertexId },
    #[error("edge ({u}, {v}) has non-positive weight {weight}")]
    NonPositiveWeight { u: VertexId, v: VertexId, weight: f64 },
    #[error("graph is disconnected: vertex {0} is unreachable from vertex 0")]
    Disconnected(VertexId),
    #[error("coords length {got} does not match vertex count {expected}")]
    CoordsLength { got: usize, expected: usize },
}

/// Undirected weighted patrol graph. Edge weights are travel times in
/// seconds. Immutable after construction.
#[derive(Debug, Clone)]
pub struct PatrolGraph {
    n: usize,
    edges: Vec<(VertexId, VertexId, f64)>,
    adjacency: Vec<Vec<(VertexId, f64)>>,
    coords: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Deserialize)]
struct GraphFile {
    vertices: usize,
    edges: Vec<(usize, usize, f64)>,
    #[serde(default)]
    coords: Option<Vec<[f64; 2]>>,
}

impl PatrolGraph {
    /// Builds and validates a graph. Edges are stored canonically with
    /// `u < v`; adjacency lists are sorted by neighbor id so that seeded
    /// random choices over them are reproducible.
    pub fn new(
        n: usize,
        edges: Vec<(VertexId, VertexId, f64)>,
        coords: Option<Vec<[f64; 2]>>,
    ) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        if let Some(c) = &coords {
            if c.len() != n {
                return Err(GraphError::CoordsLength {
                    got: c.len(),
                    expected: n,
                });
            }
        }
        let mut canonical: Vec<(VertexId, VertexId, f64)> = Vec::with_capacity(edges.len());
        let mut seen = std::collections::HashSet::new();
        for &(u, v, w) in &edges {
            if u >= n || v >= n {
                return Err(GraphError::VertexOutOfRange { u, v, n });
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(GraphError::NonPositiveWeight { u, v, weight: w });
            }
            let (a, b) = if u < v { (u, v) } else { (v, u) };
            if !seen.insert((a, b)) {
                return Err(GraphError::DuplicateEdge { u: a, v: b });
            }
            canonical.push((a, b, w));
        }
        canonical.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));

        let mut adjacency = vec![Vec::new(); n];
        for &(u, v, w) in &canonical {
            adjacency[u].push((v, w));
            adjacency[v].push((u, w));
        }
        for list in &mut adjacency {
            list.sort_by_key(|&(v, _)| v);
        }

        // Connectivity check from vertex 0.
        let mut visited = vec![false; n];
        let mut queue = std::collections::VecDeque::from([0usize]);
        visited[0] = true;
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &adjacency[u] {
                if !visited[v] {
                    visited[v] = true;
                    queue.push_back(v);
                }
            }
        }
        if let Some(unreached) = visited.iter().position(|&r| !r) {
            return Err(GraphError::Disconnected(unreached));
        }

        Ok(Self {
            n,
            edges: canonical,
            adjacency,
            coords,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(VertexId, VertexId, f64)] {
        &self.edges
    }

    /// Neighbors of `v`, sorted by vertex id.
    pub fn neighbors(&self, v: VertexId) -> &[(VertexId, f64)] {
        &self.adjacency[v]
    }

    pub fn edge_weight(&self, u: VertexId, v: VertexId) -> Option<f64> {
        self.adjacency[u]
            .iter()
            .find(|&&(x, _)| x == v)
            .map(|&(_, w)| w)
    }

    pub fn coords(&self) -> Option<&[[f64; 2]]> {
        self.coords.as_deref()
    }

    /// Content hash over the vertex count and canonical edge list (weights
    /// compared bit-exactly). Coordinates are metadata and excluded.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(b"patrol-graph-v1\n");
        hasher.update(self.n.to_le_bytes());
        for &(u, v, w) in &self.edges {
            hasher.update(u.to_le_bytes());
            hasher.update(v.to_le_bytes());
            hasher.update(w.to_bits().to_le_bytes());
        }
        hex::encode(hasher.finalize())
    }
}

/// Parses and validates a graph from its JSON file contents.
pub fn load_graph(text: &str) -> Result<PatrolGraph, GraphError> {
    let file: GraphFile = serde_json::from_str(text)?;
    PatrolGraph::new(file.vertices, file.edges, file.coords)
}

/// An agent location: at a vertex, or partway along an edge. `offset` is the
/// distance traveled from `from` in travel-time seconds, strictly inside
/// `(0, weight(from, to))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphPosition {
    AtVertex(VertexId),
    OnEdge {
        from: VertexId,
        to: VertexId,
        offset: f64,
    },
}

impl GraphPosition {
    pub fn is_valid_on(&self, g: &PatrolGraph) -> bool {
        match *self {
            GraphPosition::AtVertex(v) => v < g.vertex_count(),
            GraphPosition::OnEdge { from, to, offset } => {
                from < g.vertex_count()
                    && to < g.vertex_count()
                    && g.edge_weight(from, to)
                        .is_some_and(|w| offset > 0.0 && offset < w)
            }
        }
    }
}

/// All-pairs shortest-path travel times. Symmetric, zero diagonal, finite
/// everywhere (connectivity is a construction invariant of the graph).
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<f64>,
}

impl DistanceMatrix {
    pub fn get(&self, a: VertexId, b: VertexId) -> f64 {
        self.d[a * self.n + b]
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }
}

/// Floyd–Warshall over the full graph. Precomputed once per graph; every
/// adversary queries agent-to-vertex distances every timestep.
pub fn all_pairs_shortest_paths(g: &PatrolGraph) -> DistanceMatrix {
    let n = g.vertex_count();
    let mut d = vec![f64::INFINITY; n * n];
    for v in 0..n {
        d[v * n + v] = 0.0;
    }
    for &(u, v, w) in g.edges() {
        d[u * n + v] = w;
        d[v * n + u] = w;
    }
    for k in 0..n {
        for i in 0..n {
            let dik = d[i * n + k];
            if !dik.is_finite() {
                continue;
            }
            for j in 0..n {
                let via = dik + d[k * n + j];
                if via < d[i * n + j] {
                    d[i * n + j] = via;
                }
            }
        }
    }
    DistanceMatrix { n, d }
}

/// Travel time from a (possibly mid-edge) position to vertex `x`. A mid-edge
/// agent may exit via either endpoint, whichever is shorter overall.
pub fn position_distance(
    g: &PatrolGraph,
    dm: &DistanceMatrix,
    p: GraphPosition,
    x: VertexId,
) -> f64 {
    match p {
        GraphPosition::AtVertex(v) => dm.get(v, x),
        GraphPosition::OnEdge { from, to, offset } => {
            let w = g
                .edge_weight(from, to)
                .expect("OnEdge position references a real edge");
            (offset + dm.get(from, x)).min((w - offset) + dm.get(to, x))
        }
    }
}

/// Shortest vertex path from `u` to `v` (inclusive of both). Deterministic:
/// ties are resolved toward lower vertex ids.
pub fn shortest_path(g: &PatrolGraph, u: VertexId, v: VertexId) -> Vec<VertexId> {
    let n = g.vertex_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut prev = vec![usize::MAX; n];
    let mut done = vec![false; n];
    dist[u] = 0.0;
    for _ in 0..n {
        let mut best = usize::MAX;
        for i in 0..n {
            if !done[i] && dist[i].is_finite() && (best == usize::MAX || dist[i] < dist[best]) {
                best = i;
            }
        }
        if best == usize::MAX || best == v {
            break;
        }
        done[best] = true;
        for &(nbr, w) in g.neighbors(best) {
            if dist[best] + w < dist[nbr] {
                dist[nbr] = dist[best] + w;
                prev[nbr] = best;
            }
        }
    }
    let mut path = vec![v];
    let mut cur = v;
    while cur != u {
        cur = prev[cur];
        path.push(cur);
    }
    path.reverse();
    path
}
