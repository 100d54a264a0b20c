//! Complete signed graph with implicit negative edges.
//!
//! Only positive edges are stored; every other pair of distinct vertices is
//! negative. Each vertex carries an implicit positive self-loop: the loop is
//! part of the positive neighborhood but is never an edge of the graph, so it
//! cannot be a disagreement and never appears in a clusterable edge set.

use std::fmt::Write as _;

use thiserror::Error;

/// Dense 0-based vertex index, stable across a run.
pub type VertexId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Positive,
    Negative,
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("vertex {0} out of range (n = {1})")]
    VertexOutOfRange(VertexId, u32),
    #[error("edge sign is undefined for a vertex with itself ({0})")]
    SelfEdge(VertexId),
    #[error("duplicate edge {0} {1}")]
    DuplicateEdge(VertexId, VertexId),
}

/// Complete signed graph on n vertices; positive adjacency stored sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedGraph {
    n: u32,
    pos_adj: Vec<Vec<VertexId>>,
}

impl SignedGraph {
    /// Graph with no positive edges (all pairs negative).
    pub fn empty(n: u32) -> Self {
        SignedGraph {
            n,
            pos_adj: vec![Vec::new(); n as usize],
        }
    }

    /// Build from a positive edge list. Edges may be given in either
    /// orientation; duplicates and self-edges are rejected.
    pub fn from_edges(n: u32, edges: &[(VertexId, VertexId)]) -> Result<Self, GraphError> {
        let mut g = SignedGraph::empty(n);
        for &(u, v) in edges {
            g.add_positive_edge(u, v)?;
        }
        for adj in &mut g.pos_adj {
            adj.sort_unstable();
        }
        Ok(g)
    }

    fn add_positive_edge(&mut self, u: VertexId, v: VertexId) -> Result<(), GraphError> {
        if u == v {
            return Err(GraphError::SelfEdge(u));
        }
        for w in [u, v] {
            if w >= self.n {
                return Err(GraphError::VertexOutOfRange(w, self.n));
            }
        }
        if self.pos_adj[u as usize].contains(&v) {
            return Err(GraphError::DuplicateEdge(u.min(v), u.max(v)));
        }
        self.pos_adj[u as usize].push(v);
        self.pos_adj[v as usize].push(u);
        Ok(())
    }

    /// Parse the text format: first line `n m`, then m lines `u v` with
    /// `0 <= u < v < n`, no duplicates. Errors name the offending line.
    pub fn parse(text: &str) -> Result<Self, GraphError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(GraphError::Parse {
            line: 1,
            msg: "empty input, expected header \"n m\"".into(),
        })?;
        let parse_err = |line: usize, msg: String| GraphError::Parse { line, msg };
        let mut parts = header.split_whitespace();
        let n: u32 = parts
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| parse_err(1, format!("bad header {header:?}, expected \"n m\"")))?;
        let m: usize = parts
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| parse_err(1, format!("bad header {header:?}, expected \"n m\"")))?;
        if parts.next().is_some() {
            return Err(parse_err(1, "trailing tokens after \"n m\" header".into()));
        }

        let mut g = SignedGraph::empty(n);
        let mut count = 0usize;
        for (idx, raw) in lines {
            let lineno = idx + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let mut it = raw.split_whitespace();
            let u: VertexId = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| parse_err(lineno, format!("bad edge line {raw:?}")))?;
            let v: VertexId = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| parse_err(lineno, format!("bad edge line {raw:?}")))?;
            if it.next().is_some() {
                return Err(parse_err(lineno, format!("trailing tokens in {raw:?}")));
            }
            if u >= v {
                return Err(parse_err(
                    lineno,
                    format!("edges must satisfy u < v, got {u} {v}"),
                ));
            }
            g.add_positive_edge(u, v)
                .map_err(|e| parse_err(lineno, e.to_string()))?;
            count += 1;
        }
        if count != m {
            return Err(parse_err(
                1,
                format!("header declares {m} edges but {count} were given"),
            ));
        }
        for adj in &mut g.pos_adj {
            adj.sort_unstable();
        }
        Ok(g)
    }

    /// Canonical serialization: header then edges in lexicographic order.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.n, self.positive_edge_count());
        for (u, v) in self.positive_edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn positive_edge_count(&self) -> usize {
        self.pos_adj.iter().map(|a| a.len()).sum::<usize>() / 2
    }

    /// Positive neighbors of u, excluding u itself, sorted.
    pub fn pos_adj(&self, u: VertexId) -> &[VertexId] {
        &self.pos_adj[u as usize]
    }

    pub fn pos_degree(&self, u: VertexId) -> usize {
        self.pos_adj[u as usize].len()
    }

    /// N_u⁺ including the self-loop, sorted.
    pub fn pos_neighborhood(&self, u: VertexId) -> Vec<VertexId> {
        let adj = &self.pos_adj[u as usize];
        let mut out = Vec::with_capacity(adj.len() + 1);
        let mut inserted = false;
        for &v in adj {
            if !inserted && v > u {
                out.push(u);
                inserted = true;
            }
            out.push(v);
        }
        if !inserted {
            out.push(u);
        }
        out
    }

    /// Sign of the pair {u, v}; defined only for distinct vertices.
    pub fn sign(&self, u: VertexId, v: VertexId) -> Result<Sign, GraphError> {
        if u == v {
            return Err(GraphError::SelfEdge(u));
        }
        for w in [u, v] {
            if w >= self.n {
                return Err(GraphError::VertexOutOfRange(w, self.n));
            }
        }
        Ok(if self.is_positive(u, v) {
            Sign::Positive
        } else {
            Sign::Negative
        })
    }

    /// Positive-pair test for distinct vertices (binary search on adjacency).
    pub fn is_positive(&self, u: VertexId, v: VertexId) -> bool {
        debug_assert_ne!(u, v);
        self.pos_adj[u as usize].binary_search(&v).is_ok()
    }

    /// All positive edges as (u, v) with u < v, lexicographic.
    pub fn positive_edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        (0..self.n).flat_map(move |u| {
            self.pos_adj[u as usize]
                .iter()
                .filter(move |&&v| v > u)
                .map(move |&v| (u, v))
        })
    }
}

/// Read-only edge-sign access, the surface the metric and engine code query.
///
/// Implementations may observe or gate queries (see [`crate::audit`]); the
/// pair is always distinct.
pub trait EdgeOracle {
    fn vertex_count(&self) -> u32;
    fn positive(&self, u: VertexId, v: VertexId) -> bool;
}

impl EdgeOracle for SignedGraph {
    fn vertex_count(&self) -> u32 {
        self.n
    }

    fn positive(&self, u: VertexId, v: VertexId) -> bool {
        self.is_positive(u, v)
    }
}

impl<T: EdgeOracle + ?Sized> EdgeOracle for &T {
    fn vertex_count(&self) -> u32 {
        (**self).vertex_count()
    }

    fn positive(&self, u: VertexId, v: VertexId) -> bool {
        (**self).positive(u, v)
    }
}

/// Membership of w in N_u⁺ (self-loop convention: u is always a member).
pub fn in_pos_neighborhood<G: EdgeOracle>(g: &G, u: VertexId, w: VertexId) -> bool {
    u == w || g.positive(u, w)
}
