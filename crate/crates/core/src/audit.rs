//! Access-logged graph wrapper certifying online legality.
//!
//! In the online model an edge {u, v} is revealed only once both endpoints
//! are known: members of the sample S are known upfront, everything else
//! becomes known on arrival. The wrapper records every sign query whose pair
//! has an unknown endpoint, so a test can drive the engine arrival by arrival
//! and assert that the metric, density, and clusterable-edge computations
//! never read an unrevealed edge.

use std::cell::{Cell, RefCell};

use crate::graph::{EdgeOracle, SignedGraph, VertexId};

pub struct AuditGraph<'g> {
    inner: &'g SignedGraph,
    known: RefCell<Vec<bool>>,
    illegal: RefCell<Vec<(VertexId, VertexId)>>,
    queries: Cell<u64>,
}

impl<'g> AuditGraph<'g> {
    /// Wrap a graph with nothing revealed yet.
    pub fn new(inner: &'g SignedGraph) -> Self {
        AuditGraph {
            inner,
            known: RefCell::new(vec![false; inner.n() as usize]),
            illegal: RefCell::new(Vec::new()),
            queries: Cell::new(0),
        }
    }

    /// Reveal a single vertex (on arrival).
    pub fn reveal(&self, v: VertexId) {
        self.known.borrow_mut()[v as usize] = true;
    }

    /// Reveal a set upfront (the sample S).
    pub fn reveal_all(&self, vs: &[VertexId]) {
        let mut known = self.known.borrow_mut();
        for &v in vs {
            known[v as usize] = true;
        }
    }

    pub fn query_count(&self) -> u64 {
        self.queries.get()
    }

    /// Sign queries that touched a pair with an unrevealed endpoint.
    pub fn illegal_accesses(&self) -> Vec<(VertexId, VertexId)> {
        self.illegal.borrow().clone()
    }

    pub fn is_clean(&self) -> bool {
        self.illegal.borrow().is_empty()
    }
}

impl EdgeOracle for AuditGraph<'_> {
    fn vertex_count(&self) -> u32 {
        self.inner.n()
    }

    fn positive(&self, u: VertexId, v: VertexId) -> bool {
        self.queries.set(self.queries.get() + 1);
        {
            let known = self.known.borrow();
            if !known[u as usize] || !known[v as usize] {
                self.illegal.borrow_mut().push((u.min(v), u.max(v)));
            }
        }
        self.inner.is_positive(u, v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_unrevealed_endpoint() {
        let g = SignedGraph::from_edges(3, &[(0, 1)]).unwrap();
        let audit = AuditGraph::new(&g);
        audit.reveal(0);
        audit.reveal(1);
        assert!(audit.positive(0, 1));
        assert!(audit.is_clean());
        let _ = audit.positive(0, 2);
        assert_eq!(audit.illegal_accesses(), vec![(0, 2)]);
        assert_eq!(audit.query_count(), 2);
    }
}
