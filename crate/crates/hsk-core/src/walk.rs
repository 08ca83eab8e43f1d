//! Walks on a graph and the operations that make their reductions a
//! groupoid: backtrack removal, concatenation, inversion, tree paths, and
//! cycle insertion at a chosen position.

use std::ops::Deref;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::{Graph, SpanningTree, VertexId};

/// A walk: a nonempty vertex sequence whose consecutive pairs are edges.
/// Length is the number of edges, so a single vertex is a length-0 walk.
#[derive(Debug, Clone)]
pub struct Walk {
    graph: Arc<Graph>,
    seq: Vec<VertexId>,
}

impl PartialEq for Walk {
    fn eq(&self, other: &Self) -> bool {
        self.seq == other.seq
            && (Arc::ptr_eq(&self.graph, &other.graph) || *self.graph == *other.graph)
    }
}
impl Eq for Walk {}

impl Walk {
    pub fn new(graph: &Arc<Graph>, seq: Vec<VertexId>) -> Result<Walk> {
        if seq.is_empty() {
            return Err(Error::InvalidWalk("empty vertex sequence".into()));
        }
        for &v in &seq {
            if v as usize >= graph.vertex_count() {
                return Err(Error::InvalidWalk(format!("vertex id {v} out of range")));
            }
        }
        for pair in seq.windows(2) {
            if !graph.has_edge(pair[0], pair[1]) {
                return Err(Error::InvalidWalk(format!(
                    "({}, {}) is not an edge",
                    graph.name(pair[0]),
                    graph.name(pair[1])
                )));
            }
        }
        Ok(Walk { graph: Arc::clone(graph), seq })
    }

    pub fn from_names(graph: &Arc<Graph>, names: &[&str]) -> Result<Walk> {
        let seq = names.iter().map(|n| graph.id(n)).collect::<Result<Vec<_>>>()?;
        Walk::new(graph, seq)
    }

    /// The length-0 walk sitting at a vertex.
    pub fn trivial(graph: &Arc<Graph>, at: VertexId) -> Walk {
        Walk { graph: Arc::clone(graph), seq: vec![at] }
    }

    pub fn graph(&self) -> &Arc<Graph> {
        &self.graph
    }

    pub fn seq(&self) -> &[VertexId] {
        &self.seq
    }

    pub fn names(&self) -> Vec<String> {
        self.seq.iter().map(|&v| self.graph.name(v).to_string()).collect()
    }

    /// Number of edges traversed.
    pub fn len(&self) -> usize {
        self.seq.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn start(&self) -> VertexId {
        self.seq[0]
    }

    pub fn end(&self) -> VertexId {
        *self.seq.last().unwrap()
    }

    pub fn is_closed(&self) -> bool {
        self.start() == self.end()
    }

    /// No p[i] == p[i+2] anywhere.
    pub fn is_non_backtracking(&self) -> bool {
        self.seq.windows(3).all(|w| w[0] != w[2])
    }

    /// Removes backtracks (x y x -> x) until none remain, scanning from the
    /// left. The result is independent of removal order.
    pub fn reduce(&self) -> NbWalk {
        let mut s = self.seq.clone();
        let mut i = 0;
        while i + 2 < s.len() {
            if s[i] == s[i + 2] {
                s.drain(i + 1..i + 3);
                i = i.saturating_sub(1);
            } else {
                i += 1;
            }
        }
        NbWalk(Walk { graph: Arc::clone(&self.graph), seq: s })
    }

    /// Concatenation followed by reduction (defined when self ends where
    /// other starts).
    pub fn star(&self, other: &Walk) -> Result<NbWalk> {
        if *self.graph != *other.graph {
            return Err(Error::GraphMismatch);
        }
        if self.end() != other.start() {
            return Err(Error::EndpointMismatch(format!(
                "first walk ends at {}, second starts at {}",
                self.graph.name(self.end()),
                self.graph.name(other.start())
            )));
        }
        let mut seq = self.seq.clone();
        seq.extend_from_slice(&other.seq[1..]);
        Ok(Walk { graph: Arc::clone(&self.graph), seq }.reduce())
    }

    /// The same walk traversed backwards.
    pub fn inverse(&self) -> Walk {
        let mut seq = self.seq.clone();
        seq.reverse();
        Walk { graph: Arc::clone(&self.graph), seq }
    }

    /// Splices a closed walk in at position k (0 <= k <= len): the cycle must
    /// start and end at the k-th vertex of self. Result is not reduced.
    pub fn insert_cycle(&self, k: usize, cycle: &Walk) -> Result<Walk> {
        if *self.graph != *cycle.graph {
            return Err(Error::GraphMismatch);
        }
        if k >= self.seq.len() {
            return Err(Error::AttachmentMismatch(format!(
                "position {k} exceeds walk length {}",
                self.len()
            )));
        }
        if !cycle.is_closed() || cycle.start() != self.seq[k] {
            return Err(Error::AttachmentMismatch(format!(
                "cycle must start and end at {} (position {k})",
                self.graph.name(self.seq[k])
            )));
        }
        let mut seq = self.seq[..=k].to_vec();
        seq.extend_from_slice(&cycle.seq[1..]);
        seq.extend_from_slice(&self.seq[k + 1..]);
        Ok(Walk { graph: Arc::clone(&self.graph), seq })
    }
}

/// A walk certified backtracking-free. Obtained from `Walk::reduce`,
/// `Walk::star`, `tree_path`, or checked construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NbWalk(Walk);

impl NbWalk {
    pub fn new(walk: Walk) -> Result<NbWalk> {
        if !walk.is_non_backtracking() {
            return Err(Error::InvalidWalk("walk backtracks".into()));
        }
        Ok(NbWalk(walk))
    }

    pub fn as_walk(&self) -> &Walk {
        &self.0
    }

    pub fn into_walk(self) -> Walk {
        self.0
    }

    pub fn inverse(&self) -> NbWalk {
        NbWalk(self.0.inverse())
    }
}

impl Deref for NbWalk {
    type Target = Walk;
    fn deref(&self) -> &Walk {
        &self.0
    }
}

/// The unique backtracking-free tree path between two vertices: up from `a`
/// to the deepest common ancestor, then down to `b`.
pub fn tree_path(t: &SpanningTree, a: VertexId, b: VertexId) -> NbWalk {
    let ca = t.chain_from_root(a);
    let cb = t.chain_from_root(b);
    let mut lca = 0;
    while lca + 1 < ca.len() && lca + 1 < cb.len() && ca[lca + 1] == cb[lca + 1] {
        lca += 1;
    }
    let mut seq: Vec<VertexId> = ca[lca..].iter().rev().copied().collect();
    seq.extend_from_slice(&cb[lca + 1..]);
    NbWalk(Walk { graph: Arc::clone(t.graph()), seq })
}
