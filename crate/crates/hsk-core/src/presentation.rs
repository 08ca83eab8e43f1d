//! Group presentations: the text format, free-group word utilities, the two
//! presentations read off a graph-with-spanning-tree (fundamental and square
//! group), Tietze simplification with generator-image tracking, free
//! products, abelianization, and the van Kampen assembly for unions.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::{enumerate_squares, Graph, SpanningTree, VertexId};
use crate::snf::{abelian_invariants, AbelianInvariants};
use crate::walk::Walk;

/// One letter of a word: a generator or its inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub gen: u32,
    pub inverse: bool,
}

impl Letter {
    pub fn pos(gen: u32) -> Letter {
        Letter { gen, inverse: false }
    }

    pub fn neg(gen: u32) -> Letter {
        Letter { gen, inverse: true }
    }

    pub fn inv(self) -> Letter {
        Letter { gen: self.gen, inverse: !self.inverse }
    }
}

pub type Word = Vec<Letter>;

pub fn invert_word(w: &[Letter]) -> Word {
    w.iter().rev().map(|l| l.inv()).collect()
}

/// Cancels adjacent x x^-1 pairs until none remain.
pub fn free_reduce(w: &[Letter]) -> Word {
    let mut out: Word = Vec::with_capacity(w.len());
    for &l in w {
        if out.last().map_or(false, |&t| t == l.inv()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

/// Free reduction plus stripping of conjugating prefixes (x w x^-1 -> w).
pub fn cyclic_reduce(w: &[Letter]) -> Word {
    let mut out = free_reduce(w);
    while out.len() >= 2 && out[0] == out[out.len() - 1].inv() {
        out.pop();
        out.remove(0);
    }
    out
}

fn rotations(w: &[Letter]) -> Vec<Word> {
    if w.is_empty() {
        return vec![Vec::new()];
    }
    (0..w.len())
        .map(|r| {
            let mut rot = w[r..].to_vec();
            rot.extend_from_slice(&w[..r]);
            rot
        })
        .collect()
}

fn validate_generator_name(name: &str) -> Result<()> {
    if name.is_empty() {
        return Err(Error::InvalidIdentifier(name.into(), "empty generator name".into()));
    }
    if name.chars().any(|c| c.is_whitespace()) {
        return Err(Error::InvalidIdentifier(name.into(), "generator contains whitespace".into()));
    }
    if name.contains('^') {
        return Err(Error::InvalidIdentifier(name.into(), "generator contains '^'".into()));
    }
    Ok(())
}

/// A finite presentation: named generators and relator words. Relators are
/// stored as given; simplification and input reduction perform free and
/// cyclic reduction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Presentation {
    generators: Vec<String>,
    relators: Vec<Word>,
}

impl Presentation {
    pub fn new(generators: Vec<String>, relators: Vec<Word>) -> Result<Presentation> {
        let mut seen = HashMap::new();
        for (i, g) in generators.iter().enumerate() {
            validate_generator_name(g)?;
            if seen.insert(g.clone(), i).is_some() {
                return Err(Error::Presentation(format!("duplicate generator {g:?}")));
            }
        }
        for r in &relators {
            for l in r {
                if l.gen as usize >= generators.len() {
                    return Err(Error::Presentation(format!(
                        "letter references generator {} of {}",
                        l.gen,
                        generators.len()
                    )));
                }
            }
        }
        Ok(Presentation { generators, relators })
    }

    pub fn generators(&self) -> &[String] {
        &self.generators
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    pub fn generator_count(&self) -> usize {
        self.generators.len()
    }

    pub fn generator_index(&self, name: &str) -> Option<u32> {
        self.generators.iter().position(|g| g == name).map(|i| i as u32)
    }

    /// Parses the presentation text format:
    /// ```text
    /// generators: a b
    /// relator: a a b^-1
    /// ```
    pub fn parse(text: &str) -> Result<Presentation> {
        let mut generators: Option<Vec<String>> = None;
        let mut relators = Vec::new();
        let mut index: HashMap<String, u32> = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse(format!("line {}: {msg}", lineno + 1));
            if let Some(rest) = line.strip_prefix("generators:") {
                if generators.is_some() {
                    return Err(err("second generators line".into()));
                }
                let names: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
                for (i, n) in names.iter().enumerate() {
                    validate_generator_name(n).map_err(|e| err(e.to_string()))?;
                    if index.insert(n.clone(), i as u32).is_some() {
                        return Err(err(format!("duplicate generator {n:?}")));
                    }
                }
                generators = Some(names);
            } else if let Some(rest) = line.strip_prefix("relator:") {
                if generators.is_none() {
                    return Err(err("relator before generators line".into()));
                }
                let mut word = Vec::new();
                for tok in rest.split_whitespace() {
                    let (name, inverse) = match tok.strip_suffix("^-1") {
                        Some(base) => (base, true),
                        None => (tok, false),
                    };
                    let gen = *index
                        .get(name)
                        .ok_or_else(|| err(format!("unknown generator {name:?}")))?;
                    word.push(Letter { gen, inverse });
                }
                relators.push(word);
            } else {
                return Err(err(format!("expected 'generators:' or 'relator:', got {line:?}")));
            }
        }
        let generators = generators.ok_or_else(|| Error::Parse("missing generators line".into()))?;
        Presentation::new(generators, relators)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("generators:");
        for g in &self.generators {
            out.push(' ');
            out.push_str(g);
        }
        out.push('\n');
        for r in &self.relators {
            out.push_str("relator:");
            for l in r {
                out.push(' ');
                out.push_str(&self.letter_token(*l));
            }
            out.push('\n');
        }
        out
    }

    fn letter_token(&self, l: Letter) -> String {
        let name = &self.generators[l.gen as usize];
        if l.inverse {
            format!("{name}^-1")
        } else {
            name.clone()
        }
    }

    pub fn word_tokens(&self, w: &[Letter]) -> Vec<String> {
        w.iter().map(|&l| self.letter_token(l)).collect()
    }

    /// JSON value for sidecar reports: generators plus tokenized relators.
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::json!({
            "generators": self.generators,
            "relators": self.relators.iter().map(|r| self.word_tokens(r)).collect::<Vec<_>>(),
        })
    }

    /// Exponent-sum abelianization, reported as invariant factors.
    pub fn abelianization(&self) -> AbelianInvariants {
        let rows: Vec<Vec<i128>> = self
            .relators
            .iter()
            .map(|r| {
                let mut row = vec![0i128; self.generators.len()];
                for l in r {
                    row[l.gen as usize] += if l.inverse { -1 } else { 1 };
                }
                row
            })
            .collect();
        abelian_invariants(self.generators.len(), &rows)
    }
}

impl fmt::Display for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// A presentation whose generators are the directed edges of a graph, with
/// the edge <-> generator correspondence kept alongside.
#[derive(Debug, Clone)]
pub struct EdgePresentation {
    pub presentation: Presentation,
    /// Directed edge for each generator, in generator order.
    pub edge_of_gen: Vec<(VertexId, VertexId)>,
    gen_of_edge: HashMap<(VertexId, VertexId), u32>,
}

impl EdgePresentation {
    pub fn gen_of_edge(&self, u: VertexId, v: VertexId) -> Option<u32> {
        self.gen_of_edge.get(&(u, v)).copied()
    }

    /// The word traced by a walk: one positive letter per step. A self-loop
    /// step uses the loop's single generator.
    pub fn word_of_walk(&self, w: &Walk) -> Word {
        w.seq()
            .windows(2)
            .map(|st| {
                let g = self.gen_of_edge[&(st[0], st[1])];
                Letter::pos(g)
            })
            .collect()
    }
}

fn edge_generators(g: &Graph) -> (Vec<(VertexId, VertexId)>, HashMap<(VertexId, VertexId), u32>, Vec<String>) {
    let edges = g.directed_edges();
    let mut map = HashMap::new();
    let mut names = Vec::with_capacity(edges.len());
    for (i, &(u, v)) in edges.iter().enumerate() {
        map.insert((u, v), i as u32);
        names.push(format!("{}>{}", g.name(u), g.name(v)));
    }
    // A loop (u, u) is its own reverse and appears once; map both lookups.
    (edges, map, names)
}

/// Fundamental group presentation with respect to a spanning tree:
/// generators are all directed edges; relators kill the tree edges and glue
/// each directed edge to its reverse (a self-loop squares to the identity).
pub fn fundamental_presentation(g: &Arc<Graph>, t: &SpanningTree) -> EdgePresentation {
    assert!(
        Arc::ptr_eq(g, t.graph()) || **g == **t.graph(),
        "tree belongs to a different graph"
    );
    let (edge_of_gen, gen_of_edge, names) = edge_generators(g);
    let mut relators = Vec::new();
    for (i, &(u, v)) in edge_of_gen.iter().enumerate() {
        if u != v && t.is_tree_edge(u, v) {
            relators.push(vec![Letter::pos(i as u32)]);
        }
    }
    for (u, v) in g.undirected_edges() {
        if u == v {
            let l = gen_of_edge[&(u, u)];
            relators.push(vec![Letter::pos(l), Letter::pos(l)]);
        } else {
            let fwd = gen_of_edge[&(u, v)];
            let bwd = gen_of_edge[&(v, u)];
            relators.push(vec![Letter::pos(fwd), Letter::pos(bwd)]);
        }
    }
    let presentation = Presentation::new(names, relators).expect("edge presentation");
    EdgePresentation { presentation, edge_of_gen, gen_of_edge }
}

/// Square group presentation: the fundamental presentation plus one relator
/// per square, reading the square's four directed edges in order.
pub fn square_presentation(g: &Arc<Graph>, t: &SpanningTree) -> EdgePresentation {
    let mut ep = fundamental_presentation(g, t);
    let mut relators = ep.presentation.relators().to_vec();
    for sq in enumerate_squares(g) {
        let [a, b, c, d] = sq.corners();
        relators.push(vec![
            Letter::pos(ep.gen_of_edge[&(a, b)]),
            Letter::pos(ep.gen_of_edge[&(b, c)]),
            Letter::pos(ep.gen_of_edge[&(c, d)]),
            Letter::pos(ep.gen_of_edge[&(d, a)]),
        ]);
    }
    ep.presentation =
        Presentation::new(ep.presentation.generators().to_vec(), relators).expect("square presentation");
    ep
}

/// Classification data for the fundamental group of a connected graph:
/// free rank k and number of self-loops n, for F_k * (Z/2Z)^(*n).
pub fn classify_fundamental(g: &Graph) -> Result<(usize, usize)> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let n = g.loop_count();
    let k = g.edge_count() + 1 - g.vertex_count() - n;
    Ok((k, n))
}

/// Effort knobs for `simplify`.
#[derive(Debug, Clone, Copy)]
pub struct SimplifyEffort {
    /// Max number of relator multiplications in the redundancy search.
    pub redundancy_depth: usize,
    /// Visited-state cap for the redundancy search.
    pub redundancy_states: usize,
    /// Skip the redundancy search entirely above this many relators; it is
    /// a cosmetic cleanup and gets expensive on edge presentations.
    pub redundancy_relator_limit: usize,
    /// Skip generator eliminations that would grow any relator past this.
    pub max_word_len: usize,
}

impl Default for SimplifyEffort {
    fn default() -> Self {
        SimplifyEffort {
            redundancy_depth: 4,
            redundancy_states: 20_000,
            redundancy_relator_limit: 24,
            max_word_len: 1024,
        }
    }
}

/// Result of simplification: the reduced presentation plus, for each original
/// generator, its image as a word over the surviving generators. The images
/// realize the isomorphism, which is what lets covers evaluate voltages on a
/// coset table enumerated from the small presentation.
#[derive(Debug, Clone)]
pub struct Simplified {
    pub presentation: Presentation,
    pub images: Vec<Word>,
}

/// Tietze simplification: (1) eliminate any generator occurring exactly once
/// in some relator, rewriting its other occurrences; (2) drop relators
/// derivable from the rest within a bounded search; (3) free/cyclic
/// reduction throughout. Preserves the isomorphism class.
pub fn simplify(p: &Presentation, effort: SimplifyEffort) -> Simplified {
    let mut names: Vec<String> = p.generators().to_vec();
    let mut alive: Vec<bool> = vec![true; names.len()];
    let mut relators: Vec<Word> =
        p.relators().iter().map(|r| cyclic_reduce(r)).filter(|r| !r.is_empty()).collect();
    let mut images: Vec<Word> = (0..names.len() as u32).map(|g| vec![Letter::pos(g)]).collect();

    let substitute = |word: &[Letter], gen: u32, replacement: &[Letter]| -> Word {
        if word.iter().all(|l| l.gen != gen) {
            return word.to_vec();
        }
        let mut out = Vec::with_capacity(word.len());
        for &l in word {
            if l.gen == gen {
                if l.inverse {
                    out.extend(invert_word(replacement));
                } else {
                    out.extend_from_slice(replacement);
                }
            } else {
                out.push(l);
            }
        }
        free_reduce(&out)
    };

    loop {
        // Find a generator occurring exactly once in some relator; prefer
        // the shortest relator, then relator order, then position. Stopping
        // at the first hit keeps an elimination pass linear.
        let mut order: Vec<usize> = (0..relators.len()).collect();
        order.sort_by_key(|&i| (relators[i].len(), i));
        let mut candidate: Option<(usize, usize)> = None; // (relator idx, position)
        'search: for &ri in &order {
            let r = &relators[ri];
            for (pos, l) in r.iter().enumerate() {
                if r.iter().filter(|x| x.gen == l.gen).count() != 1 {
                    continue;
                }
                // Blowup guard: substituting len(r)-1 letters for each
                // occurrence elsewhere must stay within bounds.
                let repl_len = r.len() - 1;
                let ok = relators.iter().enumerate().all(|(j, other)| {
                    if j == ri {
                        return true;
                    }
                    let occ = other.iter().filter(|x| x.gen == l.gen).count();
                    other.len() + occ * repl_len <= effort.max_word_len
                });
                if ok {
                    candidate = Some((ri, pos));
                    break 'search;
                }
            }
        }
        let Some((ri, pos)) = candidate else {
            break;
        };
        let r = relators[ri].clone();
        let l = r[pos];
        // r = w l w'  =>  if l positive: gen = w^-1 w'^-1 ; if inverse: gen = w' w.
        let w = &r[..pos];
        let w2 = &r[pos + 1..];
        let replacement = if !l.inverse {
            let mut rep = invert_word(w);
            rep.extend(invert_word(w2));
            free_reduce(&rep)
        } else {
            let mut rep = w2.to_vec();
            rep.extend_from_slice(w);
            free_reduce(&rep)
        };
        relators.remove(ri);
        let mut next = Vec::with_capacity(relators.len());
        for rel in &relators {
            let sub = cyclic_reduce(&substitute(rel, l.gen, &replacement));
            if !sub.is_empty() {
                next.push(sub);
            }
        }
        relators = next;
        for img in &mut images {
            *img = substitute(img, l.gen, &replacement);
        }
        alive[l.gen as usize] = false;
    }

    // Dedupe relators up to rotation and inversion.
    {
        let mut seen: BTreeSet<Word> = BTreeSet::new();
        let mut kept = Vec::new();
        for r in &relators {
            let mut variants: Vec<Word> = rotations(r);
            let inv = invert_word(r);
            variants.extend(rotations(&inv));
            let key = variants.into_iter().min().unwrap_or_default();
            if seen.insert(key) {
                kept.push(r.clone());
            }
        }
        relators = kept;
    }

    // Bounded redundancy removal: drop relators derivable from the others.
    if relators.len() <= effort.redundancy_relator_limit {
        let mut idx = 0;
        while idx < relators.len() {
            let mut others = relators.clone();
            let target = others.remove(idx);
            if derivable(&target, &others, effort) {
                relators.remove(idx);
            } else {
                idx += 1;
            }
        }
    }

    // Reindex surviving generators.
    let mut remap = vec![u32::MAX; names.len()];
    let mut new_names = Vec::new();
    for (i, name) in names.drain(..).enumerate() {
        if alive[i] {
            remap[i] = new_names.len() as u32;
            new_names.push(name);
        }
    }
    let remap_word = |w: &[Letter]| -> Word {
        w.iter()
            .map(|l| Letter { gen: remap[l.gen as usize], inverse: l.inverse })
            .collect()
    };
    let relators: Vec<Word> = relators.iter().map(|r| remap_word(r)).collect();
    let images: Vec<Word> = images.iter().map(|w| remap_word(w)).collect();
    debug_assert!(images.iter().flatten().all(|l| l.gen != u32::MAX));
    let presentation = Presentation::new(new_names, relators).expect("simplified presentation");
    Simplified { presentation, images }
}

/// Bounded check that `target` lies in the normal closure of `others`:
/// breadth-first over cyclically reduced words, multiplying by rotations of
/// the other relators (each move multiplies by a conjugate, so reaching the
/// empty word is a sound certificate; missing one is harmless).
fn derivable(target: &[Letter], others: &[Word], effort: SimplifyEffort) -> bool {
    let start = cyclic_reduce(target);
    if start.is_empty() {
        return true;
    }
    if others.is_empty() {
        return false;
    }
    let mut moves: Vec<Word> = Vec::new();
    for s in others {
        let s = cyclic_reduce(s);
        if s.is_empty() {
            continue;
        }
        let inv = invert_word(&s);
        for rot in rotations(&s).into_iter().chain(rotations(&inv)) {
            moves.push(rot);
        }
    }
    moves.sort();
    moves.dedup();
    let max_len = start.len() + moves.iter().map(|m| m.len()).max().unwrap_or(0) + 4;
    let mut visited: BTreeSet<Word> = BTreeSet::new();
    let mut frontier = vec![start];
    for _ in 0..effort.redundancy_depth {
        let mut next = Vec::new();
        for w in frontier {
            for rot_w in rotations(&w) {
                for m in &moves {
                    let mut prod = rot_w.clone();
                    prod.extend_from_slice(m);
                    let red = cyclic_reduce(&prod);
                    if red.is_empty() {
                        return true;
                    }
                    if red.len() <= max_len && visited.insert(red.clone()) {
                        next.push(red);
                    }
                    if visited.len() > effort.redundancy_states {
                        return false;
                    }
                }
            }
        }
        if next.is_empty() {
            return false;
        }
        frontier = next;
    }
    false
}

/// Disjoint union of presentations; colliding generator names from `q` get a
/// numeric suffix.
pub fn free_product(p: &Presentation, q: &Presentation) -> Presentation {
    let mut names: Vec<String> = p.generators().to_vec();
    let mut taken: BTreeSet<String> = names.iter().cloned().collect();
    let mut q_names = Vec::new();
    for g in q.generators() {
        let fresh = if taken.contains(g) {
            let mut k = 2;
            loop {
                let cand = format!("{g}{k}");
                if !taken.contains(&cand) {
                    break cand;
                }
                k += 1;
            }
        } else {
            g.clone()
        };
        taken.insert(fresh.clone());
        q_names.push(fresh);
    }
    let offset = names.len() as u32;
    names.extend(q_names);
    let mut relators = p.relators().to_vec();
    for r in q.relators() {
        relators.push(r.iter().map(|l| Letter { gen: l.gen + offset, inverse: l.inverse }).collect());
    }
    Presentation::new(names, relators).expect("free product")
}

/// Union of overlapping graphs (vertices and edges by name, order of first
/// appearance).
pub fn union_graph(parts: &[Arc<Graph>]) -> Result<Arc<Graph>> {
    if parts.is_empty() {
        return Err(Error::InvalidArgument("union of zero graphs".into()));
    }
    let mut vertices: Vec<String> = Vec::new();
    let mut seen: BTreeSet<String> = BTreeSet::new();
    for p in parts {
        for name in p.vertex_names() {
            if seen.insert(name.clone()) {
                vertices.push(name.clone());
            }
        }
    }
    let mut edges: Vec<(String, String)> = Vec::new();
    let mut seen_edges: BTreeSet<(String, String)> = BTreeSet::new();
    for p in parts {
        for (u, v) in p.undirected_edges() {
            let (a, b) = (p.name(u).to_string(), p.name(v).to_string());
            let key = if a <= b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
            if seen_edges.insert(key) {
                edges.push((a, b));
            }
        }
    }
    Ok(Arc::new(Graph::from_parts(&vertices, &edges)?))
}

/// Builds a spanning tree of the union that restricts to a spanning tree of
/// every part: start from a tree of the common intersection, then extend
/// inside each part in turn.
pub fn extension_tree(parts: &[Arc<Graph>]) -> Result<SpanningTree> {
    let union = union_graph(parts)?;
    if !union.is_connected() {
        return Err(Error::Disconnected);
    }
    // Common vertex set across all parts.
    let mut common: BTreeSet<String> = parts[0].vertex_names().iter().cloned().collect();
    for p in &parts[1..] {
        let names: BTreeSet<String> = p.vertex_names().iter().cloned().collect();
        common = common.intersection(&names).cloned().collect();
    }
    if parts.len() > 1 && common.is_empty() {
        return Err(Error::InvalidArgument("parts share no common vertex".into()));
    }

    let n = union.vertex_count();
    let mut in_tree = vec![false; n];
    let mut tree_edges: Vec<(String, String)> = Vec::new();
    // Seed: BFS tree over the intersection (edges present in every part).
    let first_common = union
        .vertex_names()
        .iter()
        .find(|v| common.contains(*v))
        .cloned()
        .unwrap_or_else(|| union.vertex_names()[0].clone());
    let root_id = union.id(&first_common)?;
    in_tree[root_id as usize] = true;
    let common_edge = |a: &str, b: &str| {
        parts.iter().all(|p| {
            match (p.id(a), p.id(b)) {
                (Ok(u), Ok(v)) => p.has_edge(u, v),
                _ => false,
            }
        })
    };
    let mut queue = std::collections::VecDeque::from([root_id]);
    while let Some(u) = queue.pop_front() {
        for &v in union.neighbors(u) {
            if !in_tree[v as usize]
                && common.contains(union.name(v))
                && common_edge(union.name(u), union.name(v))
            {
                in_tree[v as usize] = true;
                tree_edges.push((union.name(u).to_string(), union.name(v).to_string()));
                queue.push_back(v);
            }
        }
    }
    // Extend inside each part.
    for p in parts {
        let mut queue: std::collections::VecDeque<VertexId> = union
            .vertex_names()
            .iter()
            .enumerate()
            .filter(|(i, name)| in_tree[*i] && p.id(name).is_ok())
            .map(|(i, _)| i as VertexId)
            .collect();
        while let Some(u) = queue.pop_front() {
            let pu = match p.id(union.name(u)) {
                Ok(x) => x,
                Err(_) => continue,
            };
            for &pv in p.neighbors(pu) {
                if pv == pu {
                    continue;
                }
                let uv = union.id(p.name(pv))?;
                if !in_tree[uv as usize] {
                    in_tree[uv as usize] = true;
                    tree_edges.push((union.name(u).to_string(), p.name(pv).to_string()));
                    queue.push_back(uv);
                }
            }
        }
    }
    if in_tree.iter().any(|x| !x) {
        return Err(Error::InvalidArgument(
            "could not span the union by extending through the parts".into(),
        ));
    }
    let refs: Vec<(&str, &str)> = tree_edges.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    SpanningTree::from_edges(&union, &first_common, &refs)
}

/// Assembles a presentation of the square group of a union from square
/// presentations of the parts plus one relator per square not contained in
/// any single part. The tree must restrict to a spanning tree of each part.
pub fn van_kampen_presentation(
    parts: &[Arc<Graph>],
    t: &SpanningTree,
) -> Result<EdgePresentation> {
    let union = union_graph(parts)?;
    if **t.graph() != *union {
        return Err(Error::InvalidArgument(
            "tree does not belong to the union of the parts".into(),
        ));
    }
    let union = Arc::clone(t.graph());
    // Verify the restriction property.
    for (i, p) in parts.iter().enumerate() {
        let mut restricted: Vec<(VertexId, VertexId)> = Vec::new();
        for (u, v) in t.tree_edges() {
            if let (Ok(pu), Ok(pv)) = (p.id(union.name(u)), p.id(union.name(v))) {
                if p.has_edge(pu, pv) {
                    restricted.push((pu, pv));
                }
            }
        }
        if restricted.len() != p.vertex_count().saturating_sub(1) {
            return Err(Error::InvalidArgument(format!(
                "tree does not restrict to a spanning tree of part {i}"
            )));
        }
        // Connectivity of the restriction.
        let mut reach = vec![false; p.vertex_count()];
        if p.vertex_count() > 0 {
            reach[0] = true;
            let mut queue = std::collections::VecDeque::from([0 as VertexId]);
            while let Some(u) = queue.pop_front() {
                for &(a, b) in &restricted {
                    let next = if a == u { Some(b) } else if b == u { Some(a) } else { None };
                    if let Some(x) = next {
                        if !reach[x as usize] {
                            reach[x as usize] = true;
                            queue.push_back(x);
                        }
                    }
                }
            }
            if reach.iter().any(|x| !x) {
                return Err(Error::InvalidArgument(format!(
                    "tree restriction does not span part {i}"
                )));
            }
        }
    }

    let (edge_of_gen, gen_of_edge, names) = edge_generators(&union);
    let mut relators: Vec<Word> = Vec::new();
    let mut seen: BTreeSet<Word> = BTreeSet::new();
    let mut push = |w: Word, relators: &mut Vec<Word>| {
        if seen.insert(w.clone()) {
            relators.push(w);
        }
    };

    let part_has_edge = |p: &Graph, u: VertexId, v: VertexId| -> bool {
        match (p.id(union.name(u)), p.id(union.name(v))) {
            (Ok(a), Ok(b)) => p.has_edge(a, b),
            _ => false,
        }
    };

    for p in parts {
        // Tree-edge relators restricted to this part.
        for (i, &(u, v)) in edge_of_gen.iter().enumerate() {
            if u != v && t.is_tree_edge(u, v) && part_has_edge(p, u, v) {
                push(vec![Letter::pos(i as u32)], &mut relators);
            }
        }
        // Reverse-pair relators for this part's edges.
        for (u, v) in union.undirected_edges() {
            if !part_has_edge(p, u, v) {
                continue;
            }
            if u == v {
                let l = gen_of_edge[&(u, u)];
                push(vec![Letter::pos(l), Letter::pos(l)], &mut relators);
            } else {
                push(
                    vec![Letter::pos(gen_of_edge[&(u, v)]), Letter::pos(gen_of_edge[&(v, u)])],
                    &mut relators,
                );
            }
        }
        // Squares lying inside this part.
        for sq in enumerate_squares(&union) {
            let [a, b, c, d] = sq.corners();
            let inside = [(a, b), (b, c), (c, d), (d, a)]
                .iter()
                .all(|&(x, y)| part_has_edge(p, x, y));
            if inside {
                push(
                    vec![
                        Letter::pos(gen_of_edge[&(a, b)]),
                        Letter::pos(gen_of_edge[&(b, c)]),
                        Letter::pos(gen_of_edge[&(c, d)]),
                        Letter::pos(gen_of_edge[&(d, a)]),
                    ],
                    &mut relators,
                );
            }
        }
    }
    // Squares of the union not inside any single part.
    for sq in enumerate_squares(&union) {
        let [a, b, c, d] = sq.corners();
        let inside_some = parts.iter().any(|p| {
            [(a, b), (b, c), (c, d), (d, a)]
                .iter()
                .all(|&(x, y)| part_has_edge(p, x, y))
        });
        if !inside_some {
            push(
                vec![
                    Letter::pos(gen_of_edge[&(a, b)]),
                    Letter::pos(gen_of_edge[&(b, c)]),
                    Letter::pos(gen_of_edge[&(c, d)]),
                    Letter::pos(gen_of_edge[&(d, a)]),
                ],
                &mut relators,
            );
        }
    }

    let presentation = Presentation::new(names, relators)?;
    Ok(EdgePresentation { presentation, edge_of_gen, gen_of_edge })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::spanning_tree;

    fn c4() -> Arc<Graph> {
        Arc::new(
            Graph::from_parts(&["a", "b", "c", "d"], &[("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")])
                .unwrap(),
        )
    }

    fn bowtie() -> Arc<Graph> {
        Arc::new(
            Graph::from_parts(
                &["a", "b", "c", "d", "e"],
                &[("a", "b"), ("b", "c"), ("c", "a"), ("a", "d"), ("d", "e"), ("e", "a")],
            )
            .unwrap(),
        )
    }

    fn triangle_with_loop() -> Arc<Graph> {
        Arc::new(
            Graph::new(&["a", "b", "c"], &[("a", "a"), ("a", "b"), ("b", "c"), ("c", "a")])
                .unwrap()
                .0,
        )
    }

    #[test]
    fn text_round_trip() {
        let text = "generators: a b\nrelator: a a\nrelator: a b^-1\n";
        let p = Presentation::parse(text).unwrap();
        assert_eq!(p.generator_count(), 2);
        assert_eq!(p.relators().len(), 2);
        assert_eq!(p.to_text(), text);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = Presentation::parse("generators: a\nrelator: b\n").unwrap_err();
        assert!(err.to_string().contains("line 2"));
        assert!(Presentation::parse("relator: a\n").is_err());
        assert!(Presentation::parse("generators: a\nnonsense\n").is_err());
        assert!(Presentation::parse("generators: a a\n").is_err());
    }

    #[test]
    fn free_reduction_basics() {
        let a = Letter::pos(0);
        let w = vec![a, a.inv(), a];
        assert_eq!(free_reduce(&w), vec![a]);
        let conj = vec![a, Letter::pos(1), a.inv()];
        assert_eq!(cyclic_reduce(&conj), vec![Letter::pos(1)]);
    }

    #[test]
    fn fundamental_presentation_of_c4() {
        let g = c4();
        let t = spanning_tree(&g, "a").unwrap();
        let ep = fundamental_presentation(&g, &t);
        assert_eq!(ep.presentation.generator_count(), 8);
        // 3 tree edges x 2 orientations + 4 reverse pairs.
        assert_eq!(ep.presentation.relators().len(), 10);
        let s = simplify(&ep.presentation, SimplifyEffort::default());
        assert_eq!(s.presentation.generator_count(), 1);
        assert!(s.presentation.relators().is_empty());
    }

    #[test]
    fn fundamental_presentation_of_single_loop() {
        let (g, _) = Graph::new(&["a"], &[("a", "a")]).unwrap();
        let g = Arc::new(g);
        let t = spanning_tree(&g, "a").unwrap();
        let ep = fundamental_presentation(&g, &t);
        assert_eq!(ep.presentation.generator_count(), 1);
        assert_eq!(ep.presentation.relators(), &[vec![Letter::pos(0), Letter::pos(0)]]);
        let s = simplify(&ep.presentation, SimplifyEffort::default());
        assert_eq!(s.presentation.generator_count(), 1);
        assert_eq!(s.presentation.relators().len(), 1);
        assert_eq!(s.presentation.relators()[0].len(), 2);
    }

    #[test]
    fn square_presentation_of_c4_simplifies_to_trivial() {
        let g = c4();
        let t = spanning_tree(&g, "a").unwrap();
        let ep = square_presentation(&g, &t);
        assert_eq!(ep.presentation.relators().len(), 11); // 10 + 1 square
        let s = simplify(&ep.presentation, SimplifyEffort::default());
        assert_eq!(s.presentation.generator_count(), 0);
        assert!(s.presentation.relators().is_empty());
    }

    #[test]
    fn bowtie_square_group_is_free_of_rank_two() {
        let g = bowtie();
        let t = spanning_tree(&g, "a").unwrap();
        let ep = square_presentation(&g, &t);
        let s = simplify(&ep.presentation, SimplifyEffort::default());
        assert_eq!(s.presentation.generator_count(), 2);
        assert!(s.presentation.relators().is_empty());
        let ab = s.presentation.abelianization();
        assert_eq!(ab.free_rank, 2);
        assert!(ab.invariant_factors.is_empty());
    }

    #[test]
    fn triangle_with_loop_simplifies_to_z2_factor() {
        let g = triangle_with_loop();
        let t = spanning_tree(&g, "a").unwrap();
        let ep = fundamental_presentation(&g, &t);
        let s = simplify(&ep.presentation, SimplifyEffort::default());
        // F_1 * Z/2: two generators, one square relator.
        assert_eq!(s.presentation.generator_count(), 2);
        assert_eq!(s.presentation.relators().len(), 1);
        let r = &s.presentation.relators()[0];
        assert_eq!(r.len(), 2);
        assert_eq!(r[0], r[1]);
    }

    #[test]
    fn classify_fundamental_examples() {
        assert_eq!(classify_fundamental(&c4()).unwrap(), (1, 0));
        assert_eq!(classify_fundamental(&bowtie()).unwrap(), (2, 0));
        assert_eq!(classify_fundamental(&triangle_with_loop()).unwrap(), (1, 1));
        let (disc, _) = Graph::new(&["a", "b"], &[]).unwrap();
        assert!(classify_fundamental(&disc).is_err());
    }

    #[test]
    fn simplify_eliminates_lone_generator() {
        let p = Presentation::parse("generators: a b\nrelator: b\n").unwrap();
        let s = simplify(&p, SimplifyEffort::default());
        assert_eq!(s.presentation.generators(), &["a".to_string()]);
        assert!(s.presentation.relators().is_empty());
        // The eliminated generator's image is the empty word.
        assert!(s.images[1].is_empty());
        assert_eq!(s.images[0], vec![Letter::pos(0)]);
    }

    #[test]
    fn simplify_drops_trivial_relator() {
        let p = Presentation::parse("generators: a\nrelator: a a^-1\n").unwrap();
        let s = simplify(&p, SimplifyEffort::default());
        assert_eq!(s.presentation.generator_count(), 1);
        assert!(s.presentation.relators().is_empty());
    }

    #[test]
    fn simplify_removes_derivable_relator() {
        let p = Presentation::parse("generators: a\nrelator: a a\nrelator: a a a a\n").unwrap();
        let s = simplify(&p, SimplifyEffort::default());
        assert_eq!(s.presentation.relators().len(), 1);
        assert_eq!(s.presentation.relators()[0].len(), 2);
    }

    #[test]
    fn simplify_tracks_images_through_elimination() {
        // a is killed via the relator a b (first single occurrence in scan
        // order), so a's image must be the inverse of the survivor b.
        let p = Presentation::parse("generators: a b\nrelator: a b\nrelator: a a\n").unwrap();
        let s = simplify(&p, SimplifyEffort::default());
        assert_eq!(s.presentation.generators(), &["b".to_string()]);
        assert_eq!(s.presentation.relators().len(), 1);
        assert_eq!(s.images[0], vec![Letter::neg(0)]);
        assert_eq!(s.images[1], vec![Letter::pos(0)]);
        // The surviving relator is b^-2 up to cyclic reduction, an order-2
        // constraint either way.
        assert_eq!(s.presentation.relators()[0].len(), 2);
    }

    #[test]
    fn free_product_renames_on_collision() {
        let p = Presentation::parse("generators: a\n").unwrap();
        let q = Presentation::parse("generators: b\nrelator: b b\n").unwrap();
        let pq = free_product(&p, &q);
        assert_eq!(pq.generators(), &["a".to_string(), "b".to_string()]);
        assert_eq!(pq.relators().len(), 1);

        let r = Presentation::parse("generators: a\nrelator: a a a\n").unwrap();
        let pr = free_product(&p, &r);
        assert_eq!(pr.generators(), &["a".to_string(), "a2".to_string()]);
        assert_eq!(pr.relators()[0][0].gen, 1);
    }

    #[test]
    fn abelianization_examples() {
        let p = Presentation::parse("generators: a b\nrelator: a a\nrelator: a b\n").unwrap();
        let ab = p.abelianization();
        assert_eq!(ab.free_rank, 0);
        assert_eq!(ab.invariant_factors, vec![2]);

        let cyclic = Presentation::parse("generators: g\nrelator: g g g\n").unwrap();
        assert_eq!(cyclic.abelianization().invariant_factors, vec![3]);

        let free2 = Presentation::parse("generators: a b\n").unwrap();
        assert_eq!(free2.abelianization().free_rank, 2);
    }

    #[test]
    fn union_and_extension_tree_restrict() {
        // Two 6-cycles sharing the vertex x.
        let g1 = Arc::new(
            Graph::from_parts(
                &["x", "a1", "a2", "a3", "a4", "a5"],
                &[("x", "a1"), ("a1", "a2"), ("a2", "a3"), ("a3", "a4"), ("a4", "a5"), ("a5", "x")],
            )
            .unwrap(),
        );
        let g2 = Arc::new(
            Graph::from_parts(
                &["x", "b1", "b2", "b3", "b4", "b5"],
                &[("x", "b1"), ("b1", "b2"), ("b2", "b3"), ("b3", "b4"), ("b4", "b5"), ("b5", "x")],
            )
            .unwrap(),
        );
        let t = extension_tree(&[Arc::clone(&g1), Arc::clone(&g2)]).unwrap();
        assert_eq!(t.graph().vertex_count(), 11);
        // Restriction to each part must span it: count tree edges inside.
        for p in [&g1, &g2] {
            let count = t
                .tree_edges()
                .filter(|&(u, v)| {
                    let un = t.graph().name(u);
                    let vn = t.graph().name(v);
                    match (p.id(un), p.id(vn)) {
                        (Ok(a), Ok(b)) => p.has_edge(a, b),
                        _ => false,
                    }
                })
                .count();
            assert_eq!(count, p.vertex_count() - 1);
        }
    }

    #[test]
    fn van_kampen_wedge_gives_free_product() {
        let g1 = Arc::new(
            Graph::from_parts(
                &["x", "a1", "a2", "a3", "a4", "a5"],
                &[("x", "a1"), ("a1", "a2"), ("a2", "a3"), ("a3", "a4"), ("a4", "a5"), ("a5", "x")],
            )
            .unwrap(),
        );
        let g2 = Arc::new(
            Graph::from_parts(
                &["x", "b1", "b2", "b3", "b4", "b5"],
                &[("x", "b1"), ("b1", "b2"), ("b2", "b3"), ("b3", "b4"), ("b4", "b5"), ("b5", "x")],
            )
            .unwrap(),
        );
        let parts = [Arc::clone(&g1), Arc::clone(&g2)];
        let t = extension_tree(&parts).unwrap();
        let ep = van_kampen_presentation(&parts, &t).unwrap();
        let s = simplify(&ep.presentation, SimplifyEffort::default());
        // Square group of a wedge of two 6-cycles: free of rank 2.
        assert_eq!(s.presentation.generator_count(), 2);
        assert!(s.presentation.relators().is_empty());
    }

    #[test]
    fn van_kampen_rejects_non_restricting_tree() {
        // Two triangles sharing the edge xy. A union tree containing xy
        // restricts to a spanning tree of both parts; one avoiding xy
        // strands y inside the second triangle.
        let g1 = Arc::new(
            Graph::from_parts(&["x", "y", "p"], &[("x", "y"), ("y", "p"), ("p", "x")]).unwrap(),
        );
        let g2 = Arc::new(
            Graph::from_parts(&["x", "y", "q"], &[("x", "y"), ("y", "q"), ("q", "x")]).unwrap(),
        );
        let parts = [Arc::clone(&g1), Arc::clone(&g2)];
        let union = union_graph(&parts).unwrap();
        let bad = SpanningTree::from_edges(&union, "x", &[("p", "x"), ("y", "p"), ("q", "x")]).unwrap();
        assert!(van_kampen_presentation(&parts, &bad).is_err());
        let good = SpanningTree::from_edges(&union, "x", &[("x", "y"), ("y", "p"), ("q", "x")]).unwrap();
        assert!(van_kampen_presentation(&parts, &good).is_ok());
    }

    #[test]
    fn word_of_walk_uses_directed_generators() {
        let g = c4();
        let t = spanning_tree(&g, "a").unwrap();
        let ep = fundamental_presentation(&g, &t);
        let w = Walk::from_names(&g, &["a", "b", "c"]).unwrap();
        let word = ep.word_of_walk(&w);
        assert_eq!(word.len(), 2);
        let names: Vec<String> = ep.presentation.word_tokens(&word);
        assert_eq!(names, vec!["a>b".to_string(), "b>c".to_string()]);
    }
}
