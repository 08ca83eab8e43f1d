//! Finite undirected graphs with opaque string vertices, plus the handful of
//! structural primitives everything else is built on: connectivity,
//! bipartiteness with witnesses, deterministic spanning trees, and square
//! (non-backtracking 4-cycle) enumeration.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type VertexId = u32;

/// Characters that may not appear in vertex identifiers: both are structural
/// in the presentation text format, whose edge generators embed vertex names
/// as `u>v` tokens with `^-1` exponents. Everything else is opaque; derived
/// artifacts (cover fibers `u#c`, walk vertices `a/b/c`) rely on the
/// uniqueness check at construction to surface any collision.
const FORBIDDEN: &[char] = &['^', '>'];

fn validate_name(name: &str) -> Result<()> {
    if name.is_empty() {
        return Err(Error::InvalidIdentifier(name.into(), "empty".into()));
    }
    if name.chars().any(|c| c.is_whitespace()) {
        return Err(Error::InvalidIdentifier(name.into(), "contains whitespace".into()));
    }
    if let Some(c) = name.chars().find(|c| FORBIDDEN.contains(c)) {
        return Err(Error::InvalidIdentifier(name.into(), format!("contains {c:?}")));
    }
    Ok(())
}

/// Undirected graph. Vertex order is the declaration order and is the
/// tie-break for every deterministic traversal in the crate. Self-loops are
/// allowed and stored once; parallel edges collapse at construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    names: Vec<String>,
    index: HashMap<String, VertexId>,
    /// Sorted neighbor lists; a self-loop contributes the vertex itself once.
    adj: Vec<Vec<VertexId>>,
    /// Normalized undirected edges (u <= v).
    edges: BTreeSet<(VertexId, VertexId)>,
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    vertices: Vec<String>,
    edges: Vec<(String, String)>,
}

impl Graph {
    /// Builds a graph from named vertices and undirected edge pairs.
    /// Returns the graph plus warnings (currently: collapsed parallel edges).
    pub fn new<S: AsRef<str>>(
        vertices: &[S],
        edge_pairs: &[(S, S)],
    ) -> Result<(Graph, Vec<String>)> {
        let mut names = Vec::with_capacity(vertices.len());
        let mut index = HashMap::new();
        for v in vertices {
            let v = v.as_ref();
            validate_name(v)?;
            if index.insert(v.to_string(), names.len() as VertexId).is_some() {
                return Err(Error::DuplicateVertex(v.into()));
            }
            names.push(v.to_string());
        }
        let mut edges = BTreeSet::new();
        let mut warnings = Vec::new();
        for (a, b) in edge_pairs {
            let (a, b) = (a.as_ref(), b.as_ref());
            let ia = *index
                .get(a)
                .ok_or_else(|| Error::DanglingEndpoint(a.into()))?;
            let ib = *index
                .get(b)
                .ok_or_else(|| Error::DanglingEndpoint(b.into()))?;
            let e = (ia.min(ib), ia.max(ib));
            if !edges.insert(e) {
                warnings.push(format!("parallel edge ({a}, {b}) collapsed"));
            }
        }
        let mut adj = vec![Vec::new(); names.len()];
        for &(u, v) in &edges {
            adj[u as usize].push(v);
            if u != v {
                adj[v as usize].push(u);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok((Graph { names, index, adj, edges }, warnings))
    }

    /// Convenience constructor that discards warnings; for internal builders
    /// that never produce parallel edges.
    pub(crate) fn from_parts<S: AsRef<str>>(vertices: &[S], edge_pairs: &[(S, S)]) -> Result<Graph> {
        Ok(Self::new(vertices, edge_pairs)?.0)
    }

    /// Parses the JSON graph format: `{"vertices": [...], "edges": [[u,v], ...]}`.
    pub fn parse(text: &str) -> Result<(Graph, Vec<String>)> {
        let file: GraphFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Graph::new(&file.vertices, &file.edges)
    }

    /// Serializes to the JSON graph format (deterministic byte output).
    pub fn to_json(&self) -> String {
        let file = GraphFile {
            vertices: self.names.clone(),
            edges: self
                .edges
                .iter()
                .map(|&(u, v)| (self.names[u as usize].clone(), self.names[v as usize].clone()))
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("serialize graph");
        s.push('\n');
        s
    }

    /// GraphViz rendering: one line per unordered edge, self-loops included.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph G {\n");
        for name in &self.names {
            out.push_str(&format!("  {:?};\n", name));
        }
        for &(u, v) in &self.edges {
            out.push_str(&format!(
                "  {:?} -- {:?};\n",
                self.names[u as usize], self.names[v as usize]
            ));
        }
        out.push_str("}\n");
        out
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, v: VertexId) -> &str {
        &self.names[v as usize]
    }

    pub fn id(&self, name: &str) -> Result<VertexId> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(name.into()))
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adj[v as usize]
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    /// Normalized undirected edges (u <= v), ascending.
    pub fn undirected_edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn loop_count(&self) -> usize {
        self.edges.iter().filter(|&&(u, v)| u == v).count()
    }

    /// Directed edges in deterministic order: for each vertex u in order, each
    /// neighbor v in order, the pair (u, v). A self-loop appears once.
    pub fn directed_edges(&self) -> Vec<(VertexId, VertexId)> {
        let mut out = Vec::new();
        for u in 0..self.names.len() as VertexId {
            for &v in self.neighbors(u) {
                if u == v {
                    out.push((u, u)); // loop: single directed edge, its own reverse
                } else {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Connected components as sorted vertex lists, in order of least vertex.
    pub fn components(&self) -> Vec<Vec<VertexId>> {
        let n = self.names.len();
        let mut seen = vec![false; n];
        let mut comps = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            let mut comp = vec![s as VertexId];
            seen[s] = true;
            let mut queue = VecDeque::from([s as VertexId]);
            while let Some(u) = queue.pop_front() {
                for &v in self.neighbors(u) {
                    if !seen[v as usize] {
                        seen[v as usize] = true;
                        comp.push(v);
                        queue.push_back(v);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// Two-colorability check. Requires a connected graph; returns either a
    /// coloring (side per vertex) or an odd closed walk as witness.
    pub fn bipartiteness(&self) -> Result<Bipartiteness> {
        if !self.is_connected() {
            return Err(Error::Disconnected);
        }
        if self.names.is_empty() {
            return Ok(Bipartiteness::Bipartite(Vec::new()));
        }
        let n = self.names.len();
        let mut color = vec![u8::MAX; n];
        let mut parent: Vec<Option<VertexId>> = vec![None; n];
        color[0] = 0;
        let mut queue = VecDeque::from([0 as VertexId]);
        while let Some(u) = queue.pop_front() {
            for &v in self.neighbors(u) {
                if color[v as usize] == u8::MAX {
                    color[v as usize] = 1 - color[u as usize];
                    parent[v as usize] = Some(u);
                    queue.push_back(v);
                } else if color[v as usize] == color[u as usize] {
                    // Odd closed walk: root..u, edge (u,v), v..root.
                    let path_to_root = |mut x: VertexId| {
                        let mut p = vec![x];
                        while let Some(y) = parent[x as usize] {
                            p.push(y);
                            x = y;
                        }
                        p
                    };
                    let mut walk = path_to_root(u);
                    walk.reverse(); // root .. u
                    let down = path_to_root(v); // v .. root
                    walk.extend(down);
                    return Ok(Bipartiteness::OddClosedWalk(walk));
                }
            }
        }
        Ok(Bipartiteness::Bipartite(color))
    }

    pub fn is_bipartite(&self) -> Result<bool> {
        Ok(matches!(self.bipartiteness()?, Bipartiteness::Bipartite(_)))
    }

    /// Cycle graph on n vertices v0..v{n-1}.
    pub fn cycle(n: usize) -> Graph {
        assert!(n >= 3, "cycle needs at least 3 vertices");
        let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
        let edges: Vec<(String, String)> = (0..n)
            .map(|i| (names[i].clone(), names[(i + 1) % n].clone()))
            .collect();
        Graph::from_parts(&names, &edges).expect("cycle construction")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Bipartiteness {
    /// Side (0/1) per vertex.
    Bipartite(Vec<u8>),
    /// Closed walk of odd length certifying an odd cycle.
    OddClosedWalk(Vec<VertexId>),
}

/// Deterministic BFS spanning tree: breadth-first from the root, neighbors
/// visited in vertex order. Requires a connected graph.
#[derive(Debug, Clone)]
pub struct SpanningTree {
    graph: Arc<Graph>,
    root: VertexId,
    parent: Vec<Option<VertexId>>,
    depth: Vec<u32>,
    edges: BTreeSet<(VertexId, VertexId)>,
}

pub fn spanning_tree(graph: &Arc<Graph>, root: &str) -> Result<SpanningTree> {
    let root = graph.id(root)?;
    if !graph.is_connected() {
        return Err(Error::Disconnected);
    }
    let n = graph.vertex_count();
    let mut parent = vec![None; n];
    let mut depth = vec![0u32; n];
    let mut seen = vec![false; n];
    let mut edges = BTreeSet::new();
    seen[root as usize] = true;
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for &v in graph.neighbors(u) {
            if !seen[v as usize] {
                seen[v as usize] = true;
                parent[v as usize] = Some(u);
                depth[v as usize] = depth[u as usize] + 1;
                edges.insert((u.min(v), u.max(v)));
                queue.push_back(v);
            }
        }
    }
    Ok(SpanningTree { graph: Arc::clone(graph), root, parent, depth, edges })
}

impl SpanningTree {
    /// An explicitly chosen spanning tree (edge list must form a spanning tree
    /// of the graph). Used when a particular tree matters, e.g. in tests.
    pub fn from_edges(graph: &Arc<Graph>, root: &str, tree_edges: &[(&str, &str)]) -> Result<SpanningTree> {
        let root = graph.id(root)?;
        let n = graph.vertex_count();
        if tree_edges.len() != n.saturating_sub(1) {
            return Err(Error::InvalidArgument(format!(
                "spanning tree of {n} vertices needs {} edges, got {}",
                n.saturating_sub(1),
                tree_edges.len()
            )));
        }
        let mut set = BTreeSet::new();
        for (a, b) in tree_edges {
            let (u, v) = (graph.id(a)?, graph.id(b)?);
            if u == v || !graph.has_edge(u, v) {
                return Err(Error::InvalidArgument(format!(
                    "({a}, {b}) is not a non-loop edge of the graph"
                )));
            }
            set.insert((u.min(v), u.max(v)));
        }
        // Orient by BFS from the root along tree edges only.
        let mut parent = vec![None; n];
        let mut depth = vec![0u32; n];
        let mut seen = vec![false; n];
        seen[root as usize] = true;
        let mut queue = VecDeque::from([root]);
        let mut reached = 1;
        while let Some(u) = queue.pop_front() {
            for &v in graph.neighbors(u) {
                if set.contains(&(u.min(v), u.max(v))) && !seen[v as usize] {
                    seen[v as usize] = true;
                    parent[v as usize] = Some(u);
                    depth[v as usize] = depth[u as usize] + 1;
                    reached += 1;
                    queue.push_back(v);
                }
            }
        }
        if reached != n {
            return Err(Error::InvalidArgument("edge set does not span the graph".into()));
        }
        Ok(SpanningTree { graph: Arc::clone(graph), root, parent, depth, edges: set })
    }

    pub fn graph(&self) -> &Arc<Graph> {
        &self.graph
    }

    pub fn root(&self) -> VertexId {
        self.root
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        self.parent[v as usize]
    }

    pub fn depth(&self, v: VertexId) -> u32 {
        self.depth[v as usize]
    }

    pub fn is_tree_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    pub fn tree_edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.edges.iter().copied()
    }

    /// Vertex sequence root -> v along tree edges.
    pub fn chain_from_root(&self, v: VertexId) -> Vec<VertexId> {
        let mut rev = vec![v];
        let mut x = v;
        while let Some(p) = self.parent[x as usize] {
            rev.push(p);
            x = p;
        }
        rev.reverse();
        rev
    }
}

/// A square: non-backtracking closed walk of length four, stored as the four
/// visited vertices (s0, s1, s2, s3) with s4 = s0 implicit. Opposite corners
/// differ (s0 != s2, s1 != s3); consecutive pairs are edges. Stored in
/// canonical form: the lexicographically least tuple over the four rotations
/// of both traversal directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Square(pub [VertexId; 4]);

impl Square {
    /// Validates and canonicalizes a 4-tuple as a square of `g`.
    pub fn new(g: &Graph, corners: [VertexId; 4]) -> Result<Square> {
        let [s0, s1, s2, s3] = corners;
        for w in [(s0, s1), (s1, s2), (s2, s3), (s3, s0)] {
            if !g.has_edge(w.0, w.1) {
                return Err(Error::InvalidWalk(format!(
                    "({}, {}) is not an edge",
                    g.name(w.0),
                    g.name(w.1)
                )));
            }
        }
        if s0 == s2 || s1 == s3 {
            return Err(Error::InvalidWalk("backtracking 4-cycle is not a square".into()));
        }
        Ok(Square(canonical_square(corners)))
    }

    pub fn corners(&self) -> [VertexId; 4] {
        self.0
    }

    /// The closed walk s0 s1 s2 s3 s0.
    pub fn closed_seq(&self) -> [VertexId; 5] {
        let [a, b, c, d] = self.0;
        [a, b, c, d, a]
    }

    /// All traversals of this square: 4 rotations in both directions, deduped.
    pub fn traversals(&self) -> Vec<[VertexId; 4]> {
        let mut all = variants(self.0);
        all.sort_unstable();
        all.dedup();
        all
    }

    pub fn names(&self, g: &Graph) -> [String; 4] {
        let [a, b, c, d] = self.0;
        [
            g.name(a).to_string(),
            g.name(b).to_string(),
            g.name(c).to_string(),
            g.name(d).to_string(),
        ]
    }
}

fn variants(s: [VertexId; 4]) -> Vec<[VertexId; 4]> {
    let mut out = Vec::with_capacity(8);
    let rev = [s[0], s[3], s[2], s[1]];
    for base in [s, rev] {
        for r in 0..4 {
            out.push([base[r % 4], base[(r + 1) % 4], base[(r + 2) % 4], base[(r + 3) % 4]]);
        }
    }
    out
}

fn canonical_square(s: [VertexId; 4]) -> [VertexId; 4] {
    variants(s).into_iter().min().unwrap()
}

/// All squares of `g`, one canonical representative per rotation/reversal
/// class, in ascending canonical order.
pub fn enumerate_squares(g: &Graph) -> Vec<Square> {
    let mut found = BTreeSet::new();
    for s0 in 0..g.vertex_count() as VertexId {
        for &s1 in g.neighbors(s0) {
            for &s2 in g.neighbors(s1) {
                if s2 == s0 {
                    continue;
                }
                for &s3 in g.neighbors(s2) {
                    if s3 == s1 || !g.has_edge(s3, s0) {
                        continue;
                    }
                    found.insert(canonical_square([s0, s1, s2, s3]));
                }
            }
        }
    }
    found.into_iter().map(Square).collect()
}

/// Glues graphs at a single shared vertex. Every part must contain `shared`,
/// and distinct parts may overlap in nothing else.
pub fn wedge_sum(parts: &[Graph], shared: &str) -> Result<Graph> {
    if parts.is_empty() {
        return Err(Error::InvalidArgument("wedge of zero graphs".into()));
    }
    for (i, p) in parts.iter().enumerate() {
        p.id(shared).map_err(|_| {
            Error::InvalidArgument(format!("part {i} does not contain the shared vertex {shared:?}"))
        })?;
    }
    for i in 0..parts.len() {
        for j in i + 1..parts.len() {
            for name in parts[i].vertex_names() {
                if name != shared && parts[j].id(name).is_ok() {
                    return Err(Error::InvalidArgument(format!(
                        "parts {i} and {j} unexpectedly share vertex {name:?}"
                    )));
                }
            }
        }
    }
    let mut vertices = vec![shared.to_string()];
    for p in parts {
        for name in p.vertex_names() {
            if name != shared {
                vertices.push(name.clone());
            }
        }
    }
    let mut edges = Vec::new();
    for p in parts {
        for (u, v) in p.undirected_edges() {
            edges.push((p.name(u).to_string(), p.name(v).to_string()));
        }
    }
    Graph::from_parts(&vertices, &edges)
}
