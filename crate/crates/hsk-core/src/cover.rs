//! Covering graphs: validation, walk lifting, universal-cover and square
//! cover constructions, square-walk equivalence, and deck transformations.
//!
//! Exact square covers come from a voltage construction: enumerate the
//! square group on the simplified presentation, then build the derived graph
//! whose fiber is the group. When enumeration does not close, a truncated
//! ball of the square cover is built instead by quotienting the tree of
//! non-backtracking walks by bounded square rewrites.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::coset::{enumerate, Enumeration};
use crate::error::{Error, Result};
use crate::graph::{enumerate_squares, Graph, SpanningTree, VertexId};
use crate::presentation::{simplify, square_presentation, SimplifyEffort, Word};
use crate::walk::Walk;

/// How a cover was obtained, which controls how much of it is trustworthy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    /// A genuine covering map, valid everywhere.
    Exact,
    /// A ball of the true cover: only locally correct up to `radius` steps
    /// from `basepoint` (a total-graph vertex).
    TruncatedBall { radius: usize, basepoint: String },
}

/// A graph map `total -> base` claimed to be a covering (or a truncated
/// ball of one). The projection is stored per total vertex.
#[derive(Debug, Clone)]
pub struct Cover {
    total: Arc<Graph>,
    base: Arc<Graph>,
    projection: Vec<VertexId>,
    provenance: Provenance,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum ProvenanceFile {
    Exact,
    TruncatedBall { radius: usize, basepoint: String },
}

#[derive(Serialize, Deserialize)]
struct CoverFile {
    total: serde_json::Value,
    base: serde_json::Value,
    projection: BTreeMap<String, String>,
    provenance: ProvenanceFile,
}

impl Cover {
    /// Wraps a projection as a cover after checking it is a graph
    /// homomorphism onto the base. Covering-map validity is checked
    /// separately by `check_covering_map`.
    pub fn new(
        total: Arc<Graph>,
        base: Arc<Graph>,
        projection: Vec<VertexId>,
        provenance: Provenance,
    ) -> Result<Cover> {
        if projection.len() != total.vertex_count() {
            return Err(Error::InvalidCover(format!(
                "projection covers {} of {} total vertices",
                projection.len(),
                total.vertex_count()
            )));
        }
        for &b in &projection {
            if b as usize >= base.vertex_count() {
                return Err(Error::InvalidCover(format!("projection hits missing base vertex {b}")));
            }
        }
        for (x, y) in total.undirected_edges() {
            let (bx, by) = (projection[x as usize], projection[y as usize]);
            if !base.has_edge(bx, by) {
                return Err(Error::InvalidCover(format!(
                    "edge {}-{} projects to the non-edge {}-{}",
                    total.name(x),
                    total.name(y),
                    base.name(bx),
                    base.name(by)
                )));
            }
        }
        if let Provenance::TruncatedBall { basepoint, .. } = &provenance {
            total.id(basepoint)?;
        }
        Ok(Cover { total, base, projection, provenance })
    }

    pub fn total(&self) -> &Arc<Graph> {
        &self.total
    }

    pub fn base(&self) -> &Arc<Graph> {
        &self.base
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn project(&self, v: VertexId) -> VertexId {
        self.projection[v as usize]
    }

    pub fn fiber(&self, base_vertex: VertexId) -> Vec<VertexId> {
        (0..self.total.vertex_count() as VertexId)
            .filter(|&x| self.projection[x as usize] == base_vertex)
            .collect()
    }

    /// Number of sheets if every fiber has the same size.
    pub fn sheet_count(&self) -> Option<usize> {
        let sizes: BTreeSet<usize> =
            (0..self.base.vertex_count() as VertexId).map(|b| self.fiber(b).len()).collect();
        match sizes.len() {
            1 => sizes.into_iter().next(),
            _ => None,
        }
    }

    pub fn parse(text: &str) -> Result<Cover> {
        let file: CoverFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let (total, _) = Graph::parse(&file.total.to_string())?;
        let (base, _) = Graph::parse(&file.base.to_string())?;
        let total = Arc::new(total);
        let base = Arc::new(base);
        let mut projection = vec![0; total.vertex_count()];
        let mut seen = vec![false; total.vertex_count()];
        for (t, b) in &file.projection {
            let ti = total.id(t)?;
            projection[ti as usize] = base.id(b)?;
            seen[ti as usize] = true;
        }
        if let Some(miss) = seen.iter().position(|&s| !s) {
            return Err(Error::InvalidCover(format!(
                "projection missing for vertex {:?}",
                total.name(miss as VertexId)
            )));
        }
        let provenance = match file.provenance {
            ProvenanceFile::Exact => Provenance::Exact,
            ProvenanceFile::TruncatedBall { radius, basepoint } => {
                Provenance::TruncatedBall { radius, basepoint }
            }
        };
        Cover::new(total, base, projection, provenance)
    }

    pub fn to_json(&self) -> String {
        let projection: BTreeMap<String, String> = (0..self.total.vertex_count() as VertexId)
            .map(|x| {
                (self.total.name(x).to_string(), self.base.name(self.project(x)).to_string())
            })
            .collect();
        let provenance = match &self.provenance {
            Provenance::Exact => ProvenanceFile::Exact,
            Provenance::TruncatedBall { radius, basepoint } => ProvenanceFile::TruncatedBall {
                radius: *radius,
                basepoint: basepoint.clone(),
            },
        };
        let file = CoverFile {
            total: serde_json::from_str(&self.total.to_json()).expect("graph json"),
            base: serde_json::from_str(&self.base.to_json()).expect("graph json"),
            projection,
            provenance,
        };
        let mut s = serde_json::to_string_pretty(&file).expect("serialize cover");
        s.push('\n');
        s
    }

    /// GraphViz rendering with one fill color per base vertex, so fibers
    /// are visually grouped.
    pub fn to_dot(&self) -> String {
        const PALETTE: [&str; 10] = [
            "#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462", "#b3de69",
            "#fccde5", "#d9d9d9", "#bc80bd",
        ];
        let mut out = String::from("graph cover {\n  node [style=filled];\n");
        for x in 0..self.total.vertex_count() as VertexId {
            let b = self.project(x);
            out.push_str(&format!(
                "  {:?} [fillcolor={:?}];\n",
                self.total.name(x),
                PALETTE[b as usize % PALETTE.len()]
            ));
        }
        for (x, y) in self.total.undirected_edges() {
            out.push_str(&format!("  {:?} -- {:?};\n", self.total.name(x), self.total.name(y)));
        }
        out.push_str("}\n");
        out
    }

    /// BFS distances from a total vertex; used for truncation interiors.
    fn distances_from(&self, start: VertexId) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.total.vertex_count()];
        dist[start as usize] = 0;
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for &v in self.total.neighbors(u) {
                if dist[v as usize] == u32::MAX {
                    dist[v as usize] = dist[u as usize] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }
}

/// Verifies the covering property: the projection restricts to a bijection
/// between the neighbors of each total vertex and the neighbors of its
/// image. For a truncated ball, vertices strictly inside the radius must be
/// bijective and boundary vertices merely injective.
pub fn check_covering_map(cover: &Cover) -> Result<()> {
    let boundary: Option<(Vec<u32>, usize)> = match &cover.provenance {
        Provenance::Exact => None,
        Provenance::TruncatedBall { radius, basepoint } => {
            let bp = cover.total.id(basepoint)?;
            Some((cover.distances_from(bp), *radius))
        }
    };
    for x in 0..cover.total.vertex_count() as VertexId {
        let bx = cover.project(x);
        let mut images: BTreeSet<VertexId> = BTreeSet::new();
        for &y in cover.total.neighbors(x) {
            let by = cover.project(y);
            if !images.insert(by) {
                return Err(Error::InvalidCover(format!(
                    "two neighbors of {} project to {}",
                    cover.total.name(x),
                    cover.base.name(by)
                )));
            }
        }
        let base_degree = cover.base.neighbors(bx).len();
        let surjective = images.len() == base_degree;
        match &boundary {
            None => {
                if !surjective {
                    return Err(Error::InvalidCover(format!(
                        "vertex {} is missing lifts of some edges at {}",
                        cover.total.name(x),
                        cover.base.name(bx)
                    )));
                }
            }
            Some((dist, radius)) => {
                let d = dist[x as usize];
                if d != u32::MAX && (d as usize) < *radius && !surjective {
                    return Err(Error::InvalidCover(format!(
                        "interior vertex {} (distance {}) is missing lifts",
                        cover.total.name(x),
                        d
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Lifts a base walk to the total graph starting at a chosen fiber point.
/// Unique by local injectivity; hitting the truncation boundary of a ball
/// reports where the lift stopped being determined.
pub fn lift_walk(cover: &Cover, base_walk: &Walk, start: &str) -> Result<Walk> {
    if **base_walk.graph() != **cover.base() {
        return Err(Error::GraphMismatch);
    }
    let mut cur = cover.total.id(start)?;
    if cover.project(cur) != base_walk.start() {
        return Err(Error::EndpointMismatch(format!(
            "lift start {} sits over {}, walk starts at {}",
            start,
            cover.base.name(cover.project(cur)),
            cover.base.name(base_walk.start())
        )));
    }
    let mut seq = vec![cur];
    for step in base_walk.seq().windows(2) {
        let target = step[1];
        let mut next = None;
        for &y in cover.total.neighbors(cur) {
            if cover.project(y) == target {
                if next.is_some() {
                    return Err(Error::InvalidCover(format!(
                        "ambiguous lift at {}",
                        cover.total.name(cur)
                    )));
                }
                next = Some(y);
            }
        }
        // A loop step u-u lifts along a lifted loop edge; if the fiber point
        // has no loop the candidate search above already failed.
        match next {
            Some(y) => {
                seq.push(y);
                cur = y;
            }
            None => {
                return match &cover.provenance {
                    Provenance::TruncatedBall { radius, .. } => {
                        Err(Error::TruncationBoundary(cover.total.name(cur).to_string(), *radius))
                    }
                    Provenance::Exact => Err(Error::InvalidCover(format!(
                        "no lift of edge {}-{} at {}",
                        cover.base.name(cover.project(cur)),
                        cover.base.name(target),
                        cover.total.name(cur)
                    ))),
                };
            }
        }
    }
    Walk::new(&cover.total, seq)
}

const BALL_VERTEX_CAP: usize = 1_000_000;

fn ball_name(g: &Graph, seq: &[VertexId]) -> String {
    seq.iter().map(|&v| g.name(v)).collect::<Vec<_>>().join("/")
}

/// Ball of the universal cover: vertices are non-backtracking walks from
/// `basepoint` of length at most `radius`, named by their slash-joined
/// vertex sequence; edges join a walk to its one-step extensions. Always a
/// tree.
pub fn universal_cover_ball(g: &Arc<Graph>, basepoint: &str, radius: usize) -> Result<Cover> {
    let root = g.id(basepoint)?;
    let mut walks: Vec<Vec<VertexId>> = vec![vec![root]];
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut frontier: Vec<usize> = vec![0];
    for _ in 0..radius {
        let mut next = Vec::new();
        for &wi in &frontier {
            let w = walks[wi].clone();
            let end = *w.last().unwrap();
            let prev = if w.len() >= 2 { Some(w[w.len() - 2]) } else { None };
            for &v in g.neighbors(end) {
                if prev == Some(v) {
                    continue; // backtrack
                }
                if walks.len() >= BALL_VERTEX_CAP {
                    return Err(Error::BudgetExhausted(format!(
                        "universal cover ball exceeds {BALL_VERTEX_CAP} vertices"
                    )));
                }
                let mut ext = w.clone();
                ext.push(v);
                let id = walks.len();
                walks.push(ext);
                edges.push((wi, id));
                next.push(id);
            }
        }
        frontier = next;
    }
    let names: Vec<String> = walks.iter().map(|w| ball_name(g, w)).collect();
    let edge_names: Vec<(String, String)> =
        edges.iter().map(|&(a, b)| (names[a].clone(), names[b].clone())).collect();
    let total = Arc::new(Graph::from_parts(&names, &edge_names)?);
    let projection: Vec<VertexId> = (0..walks.len())
        .map(|i| {
            let w = &walks[total_order_fix(&total, &names, i)];
            *w.last().unwrap()
        })
        .collect();
    Cover::new(
        total,
        Arc::clone(g),
        projection,
        Provenance::TruncatedBall { radius, basepoint: basepoint.to_string() },
    )
}

// Graph construction preserves the declared vertex order, so index i of the
// name list is vertex id i. This helper documents the assumption and guards
// it in debug builds.
fn total_order_fix(total: &Graph, names: &[String], i: usize) -> usize {
    debug_assert_eq!(total.name(i as VertexId), names[i]);
    i
}

/// Removes backtracks from a raw vertex sequence (leftmost first), same
/// semantics as walk reduction.
fn reduce_seq(mut seq: Vec<VertexId>) -> Vec<VertexId> {
    let mut i = 0;
    while seq.len() >= 3 && i + 2 < seq.len() {
        if seq[i] == seq[i + 2] {
            seq.drain(i + 1..i + 3);
            i = i.saturating_sub(1);
        } else {
            i += 1;
        }
    }
    seq
}

/// One square-rewrite step applied at every interior position: replace the
/// corner s[i] by any other common neighbor of s[i-1] and s[i+1], then
/// reduce. Covers self-loop squares because loops put a vertex in its own
/// neighbor list.
fn rewrite_neighbors(g: &Graph, seq: &[VertexId]) -> Vec<Vec<VertexId>> {
    let mut out = Vec::new();
    for i in 1..seq.len().saturating_sub(1) {
        let (a, m, b) = (seq[i - 1], seq[i], seq[i + 1]);
        for &y in g.neighbors(a) {
            if y != m && g.has_edge(y, b) {
                let mut cand = seq.to_vec();
                cand[i] = y;
                out.push(reduce_seq(cand));
            }
        }
    }
    out
}

/// Canonical representative of the bounded rewrite class of `seq`: breadth
/// first over square rewrites up to `depth` steps, returning the minimum by
/// (length, sequence). Exact on square-free graphs, where the class is a
/// singleton.
fn rewrite_canon(g: &Graph, seq: Vec<VertexId>, depth: usize, cap: usize) -> Vec<VertexId> {
    let mut best = seq.clone();
    let mut visited: BTreeSet<Vec<VertexId>> = BTreeSet::new();
    visited.insert(seq.clone());
    let mut frontier = vec![seq];
    for _ in 0..depth {
        let mut next = Vec::new();
        for w in &frontier {
            for cand in rewrite_neighbors(g, w) {
                if visited.len() >= cap {
                    break;
                }
                if visited.insert(cand.clone()) {
                    if (cand.len(), &cand) < (best.len(), &best) {
                        best = cand.clone();
                    }
                    next.push(cand);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    best
}

const REWRITE_STATE_CAP: usize = 4096;

/// Truncated ball of the square cover: non-backtracking walks from
/// `basepoint` of length at most `radius`, merged when bounded square
/// rewrites identify them. On square-free graphs this is the universal
/// cover ball, which is then exactly the square cover ball.
pub fn square_cover_ball(
    g: &Arc<Graph>,
    basepoint: &str,
    radius: usize,
    rewrite_depth: usize,
) -> Result<Cover> {
    let root = g.id(basepoint)?;
    let mut class_of: HashMap<Vec<VertexId>, usize> = HashMap::new();
    let mut reps: Vec<Vec<VertexId>> = Vec::new();
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();

    let intern = |seq: Vec<VertexId>,
                  class_of: &mut HashMap<Vec<VertexId>, usize>,
                  reps: &mut Vec<Vec<VertexId>>|
     -> Result<usize> {
        if let Some(&id) = class_of.get(&seq) {
            return Ok(id);
        }
        let canon = rewrite_canon(g, seq.clone(), rewrite_depth, REWRITE_STATE_CAP);
        if let Some(&id) = class_of.get(&canon) {
            class_of.insert(seq, id);
            return Ok(id);
        }
        if reps.len() >= BALL_VERTEX_CAP {
            return Err(Error::BudgetExhausted(format!(
                "square cover ball exceeds {BALL_VERTEX_CAP} classes"
            )));
        }
        let id = reps.len();
        reps.push(canon.clone());
        class_of.insert(canon, id);
        class_of.insert(seq, id);
        Ok(id)
    };

    let root_id = intern(vec![root], &mut class_of, &mut reps)?;
    let mut queue = VecDeque::from([root_id]);
    let mut expanded = vec![false; 1];
    while let Some(ci) = queue.pop_front() {
        if expanded[ci] {
            continue;
        }
        expanded[ci] = true;
        let rep = reps[ci].clone();
        if rep.len() - 1 >= radius {
            continue; // boundary class: no extensions
        }
        let end = *rep.last().unwrap();
        let prev = if rep.len() >= 2 { Some(rep[rep.len() - 2]) } else { None };
        for &v in g.neighbors(end) {
            let mut ext = rep.clone();
            if prev == Some(v) {
                // Backtrack: the extension reduces to the parent walk.
                ext.pop();
            } else {
                ext.push(v);
            }
            if ext.len() - 1 > radius {
                continue;
            }
            let cj = intern(ext, &mut class_of, &mut reps)?;
            if cj >= expanded.len() {
                expanded.resize(reps.len(), false);
                queue.push_back(cj);
            }
            if ci != cj {
                edges.insert((ci.min(cj), ci.max(cj)));
            } else {
                // A loop edge in the quotient.
                edges.insert((ci, ci));
            }
        }
    }

    let names: Vec<String> = reps.iter().map(|w| ball_name(g, w)).collect();
    let edge_names: Vec<(String, String)> =
        edges.iter().map(|&(a, b)| (names[a].clone(), names[b].clone())).collect();
    let total = Arc::new(Graph::from_parts(&names, &edge_names)?);
    let projection: Vec<VertexId> =
        (0..reps.len()).map(|i| *reps[total_order_fix(&total, &names, i)].last().unwrap()).collect();
    Cover::new(
        total,
        Arc::clone(g),
        projection,
        Provenance::TruncatedBall { radius, basepoint: basepoint.to_string() },
    )
}

/// Result of attempting the exact square cover.
#[derive(Debug)]
pub enum SquareCover {
    /// The square group is finite; the cover is exact with that many sheets.
    Exact(Cover),
    /// Enumeration did not close within budget.
    Unknown { live_cosets: usize, budget: usize },
}

/// Builds the cover of `g` whose deck group is the square group, via the
/// derived graph of the voltage assignment reading each edge's image in the
/// enumerated quotient. Fiber vertex `u#c` sits over `u` in sheet `c`.
pub fn square_cover(g: &Arc<Graph>, t: &SpanningTree, max_cosets: usize) -> Result<SquareCover> {
    let ep = square_presentation(g, t);
    let simplified = simplify(&ep.presentation, SimplifyEffort::default());
    let table = match enumerate(&simplified.presentation, max_cosets)? {
        Enumeration::Finite(tab) => tab,
        Enumeration::Unknown { live_cosets, budget } => {
            return Ok(SquareCover::Unknown { live_cosets, budget })
        }
    };
    let n = table.coset_count();
    let nv = g.vertex_count();
    if n.saturating_mul(nv) > BALL_VERTEX_CAP {
        return Err(Error::BudgetExhausted(format!(
            "square cover would have {} vertices",
            n * nv
        )));
    }
    // Voltage of a directed edge: the action of its generator's image.
    let voltage: HashMap<(VertexId, VertexId), Word> = ep
        .edge_of_gen
        .iter()
        .enumerate()
        .map(|(i, &e)| (e, simplified.images[i].clone()))
        .collect();

    let mut names = Vec::with_capacity(n * nv);
    for c in 0..n {
        for u in 0..nv as VertexId {
            names.push(format!("{}#{c}", g.name(u)));
        }
    }
    let mut edge_names = Vec::new();
    for c in 0..n as u32 {
        for (u, v) in g.undirected_edges() {
            let d = table.action_of_word(c, &voltage[&(u, v)]);
            edge_names.push((
                names[c as usize * nv + u as usize].clone(),
                names[d as usize * nv + v as usize].clone(),
            ));
        }
    }
    let total = Arc::new(Graph::from_parts(&names, &edge_names)?);
    let projection: Vec<VertexId> = (0..n * nv).map(|i| (i % nv) as VertexId).collect();
    // Vertex ids follow declaration order; keep that tied down.
    debug_assert_eq!(total.name(0), names[0]);
    let cover = Cover::new(total, Arc::clone(g), projection, Provenance::Exact)?;
    check_covering_map(&cover)?;
    Ok(SquareCover::Exact(cover))
}

/// Outcome of a square-walk equivalence query between co-terminal walks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SquareEquivalence {
    /// Equivalent; `chain` holds intermediate reduced walks from the first
    /// walk to the second when the move search found them, and is `None`
    /// when equivalence was certified algebraically instead.
    Equivalent { chain: Option<Vec<Vec<String>>> },
    Inequivalent,
    Unknown,
}

const EQUIV_STATE_CAP: usize = 200_000;
const EQUIV_DEPTH_CAP: usize = 64;

/// Decides whether two walks with the same endpoints are related by square
/// insertions and removals. Search first (yields an explicit chain), then
/// coset enumeration of the square group for an algebraic answer.
pub fn square_equivalent(
    g: &Arc<Graph>,
    t: &SpanningTree,
    p: &Walk,
    q: &Walk,
    max_cosets: usize,
) -> Result<SquareEquivalence> {
    if **p.graph() != **g || **q.graph() != **g {
        return Err(Error::GraphMismatch);
    }
    if p.start() != q.start() || p.end() != q.end() {
        return Err(Error::EndpointMismatch(
            "square equivalence needs co-terminal walks".into(),
        ));
    }
    let start = reduce_seq(p.seq().to_vec());
    let target = reduce_seq(q.seq().to_vec());

    // Traversals of every square, indexed by starting corner.
    let mut cycles_at: HashMap<VertexId, Vec<[VertexId; 4]>> = HashMap::new();
    for sq in enumerate_squares(g) {
        for trav in sq.traversals() {
            cycles_at.entry(trav[0]).or_default().push(trav);
        }
    }
    let max_len = start.len().max(target.len()) + 16;

    let mut parent: HashMap<Vec<VertexId>, Vec<VertexId>> = HashMap::new();
    parent.insert(start.clone(), start.clone());
    let mut frontier = vec![start.clone()];
    let mut found = start == target;
    'bfs: for _ in 0..EQUIV_DEPTH_CAP {
        if found || frontier.is_empty() {
            break;
        }
        let mut next = Vec::new();
        for w in &frontier {
            let mut candidates = rewrite_neighbors(g, w);
            for (k, &at) in w.iter().enumerate() {
                if let Some(cycles) = cycles_at.get(&at) {
                    for cyc in cycles {
                        let mut ext = w[..=k].to_vec();
                        ext.extend_from_slice(&cyc[1..]);
                        ext.push(at);
                        ext.extend_from_slice(&w[k + 1..]);
                        candidates.push(reduce_seq(ext));
                    }
                }
            }
            for cand in candidates {
                if cand.len() > max_len || parent.contains_key(&cand) {
                    continue;
                }
                parent.insert(cand.clone(), w.clone());
                if cand == target {
                    found = true;
                    break 'bfs;
                }
                next.push(cand);
                if parent.len() >= EQUIV_STATE_CAP {
                    break 'bfs;
                }
            }
        }
        frontier = next;
    }
    if found {
        let mut chain = vec![target.clone()];
        let mut cur = target;
        while parent[&cur] != cur {
            cur = parent[&cur].clone();
            chain.push(cur.clone());
        }
        chain.reverse();
        let named = chain
            .into_iter()
            .map(|seq| seq.into_iter().map(|v| g.name(v).to_string()).collect())
            .collect();
        return Ok(SquareEquivalence::Equivalent { chain: Some(named) });
    }

    // Algebraic fallback: the closed walk p then q reversed is trivial in
    // the square group iff the walks are equivalent.
    let ep = square_presentation(g, t);
    let closed = {
        let mut seq = p.seq().to_vec();
        seq.extend(q.seq().iter().rev().skip(1));
        Walk::new(g, seq)?
    };
    let word = ep.word_of_walk(&closed);
    let simplified = simplify(&ep.presentation, SimplifyEffort::default());
    let translated: Word = word
        .iter()
        .flat_map(|l| {
            let img = &simplified.images[l.gen as usize];
            if l.inverse {
                crate::presentation::invert_word(img)
            } else {
                img.clone()
            }
        })
        .collect();
    match enumerate(&simplified.presentation, max_cosets)? {
        Enumeration::Finite(table) => {
            if table.action_of_word(0, &translated) == 0 {
                Ok(SquareEquivalence::Equivalent { chain: None })
            } else {
                Ok(SquareEquivalence::Inequivalent)
            }
        }
        Enumeration::Unknown { .. } => Ok(SquareEquivalence::Unknown),
    }
}

/// One square that failed to lift closed.
#[derive(Debug, Clone)]
pub struct LiftFailure {
    pub square: [String; 4],
    pub start: String,
    pub end: String,
}

#[derive(Debug, Clone)]
pub struct LiftReport {
    pub all_lift: bool,
    pub squares_checked: usize,
    pub starts_checked: usize,
    pub failures: Vec<LiftFailure>,
}

/// Lifts every square of the base from every eligible fiber point and
/// checks the lift closes. For truncated balls only starts at distance at
/// most radius - 4 from the basepoint are eligible, so boundary effects
/// cannot masquerade as failures.
pub fn check_square_lifting(cover: &Cover) -> Result<LiftReport> {
    let squares = enumerate_squares(cover.base());
    let eligible: Vec<bool> = match &cover.provenance {
        Provenance::Exact => vec![true; cover.total.vertex_count()],
        Provenance::TruncatedBall { radius, basepoint } => {
            let bp = cover.total.id(basepoint)?;
            let dist = cover.distances_from(bp);
            let budget = radius.saturating_sub(4) as u32;
            dist.iter().map(|&d| d != u32::MAX && d <= budget).collect()
        }
    };
    let mut report = LiftReport {
        all_lift: true,
        squares_checked: squares.len(),
        starts_checked: 0,
        failures: Vec::new(),
    };
    for sq in &squares {
        let seq = sq.closed_seq();
        let base_walk = Walk::new(cover.base(), seq.to_vec())?;
        let corner = seq[0];
        for x in cover.fiber(corner) {
            if !eligible[x as usize] {
                continue;
            }
            report.starts_checked += 1;
            match lift_walk(cover, &base_walk, cover.total.name(x)) {
                Ok(lift) => {
                    if lift.end() != x {
                        report.all_lift = false;
                        report.failures.push(LiftFailure {
                            square: sq.names(cover.base()),
                            start: cover.total.name(x).to_string(),
                            end: cover.total.name(lift.end()).to_string(),
                        });
                    }
                }
                Err(Error::TruncationBoundary(..)) => {
                    // Start was eligible but the ball is shallow here; skip.
                    report.starts_checked -= 1;
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(report)
}

/// Attempts the deck transformation sending `from` to `to` (both in one
/// fiber). Exact covers only. Propagates along edges by unique lifting,
/// then verifies the result is a projection-preserving automorphism;
/// returns None when propagation conflicts or verification fails, which for
/// a valid cover means no such deck transformation exists.
pub fn deck_transformation(cover: &Cover, from: &str, to: &str) -> Result<Option<Vec<(String, String)>>> {
    if cover.provenance != Provenance::Exact {
        return Err(Error::InvalidCover(
            "deck transformations are only defined for exact covers".into(),
        ));
    }
    let a = cover.total.id(from)?;
    let b = cover.total.id(to)?;
    if cover.project(a) != cover.project(b) {
        return Err(Error::InvalidCover(format!(
            "{from} and {to} lie over different base vertices"
        )));
    }
    if !cover.total.is_connected() {
        return Err(Error::InvalidCover(
            "total graph is disconnected; a deck transformation is not determined by one vertex".into(),
        ));
    }
    let n = cover.total.vertex_count();
    let mut map = vec![u32::MAX; n];
    map[a as usize] = b;
    let mut queue = VecDeque::from([a]);
    while let Some(x) = queue.pop_front() {
        let xm = map[x as usize];
        for &y in cover.total.neighbors(x) {
            let by = cover.project(y);
            let mut image = None;
            for &ym in cover.total.neighbors(xm) {
                if cover.project(ym) == by {
                    image = Some(ym);
                    break;
                }
            }
            let Some(ym) = image else {
                // Unreachable for verified covers; defensive for hand-made
                // projections.
                return Ok(None);
            };
            if map[y as usize] == u32::MAX {
                map[y as usize] = ym;
                queue.push_back(y);
            } else if map[y as usize] != ym {
                return Ok(None);
            }
        }
    }
    if map.iter().any(|&m| m == u32::MAX) {
        return Ok(None);
    }
    // Verify: bijective, edge-preserving, projection-preserving.
    let mut hit = vec![false; n];
    for (x, &m) in map.iter().enumerate() {
        if hit[m as usize] {
            return Ok(None);
        }
        hit[m as usize] = true;
        if cover.project(m) != cover.project(x as VertexId) {
            return Ok(None);
        }
    }
    for (x, y) in cover.total.undirected_edges() {
        if !cover.total.has_edge(map[x as usize], map[y as usize]) {
            return Ok(None);
        }
    }
    Ok(Some(
        (0..n)
            .map(|x| {
                (
                    cover.total.name(x as VertexId).to_string(),
                    cover.total.name(map[x]).to_string(),
                )
            })
            .collect(),
    ))
}
