//! Realizing a finite presentation as a graph whose square group is the
//! presented group: one even petal cycle per generator wedged at a base
//! vertex, one relator cycle per relator tied to the petals by rungs so the
//! annulus between them is squared, and a wheel quadrangulation filling
//! each relator disk.

use std::sync::Arc;

use crate::coset::{group_order, square_group_order, GroupOrder};
use crate::error::{Error, Result};
use crate::graph::{spanning_tree, Bipartiteness, Graph, VertexId};
use crate::presentation::{free_reduce, Presentation, Word};

/// A disk quadrangulation: the graph, its quad faces, and the border cycle.
#[derive(Debug, Clone)]
pub struct FlatQuadrangulation {
    pub graph: Arc<Graph>,
    pub faces: Vec<[VertexId; 4]>,
    /// Closed border walk, first vertex not repeated at the end.
    pub border_cycle: Vec<VertexId>,
}

impl FlatQuadrangulation {
    pub fn border_edges(&self) -> Vec<(VertexId, VertexId)> {
        let n = self.border_cycle.len();
        (0..n).map(|i| (self.border_cycle[i], self.border_cycle[(i + 1) % n])).collect()
    }
}

/// Quad faces of the wheel filling of an even cycle: a parallel inner ring,
/// spokes, and a hub adjacent to the even ring positions. Returns the face
/// list as corner quadruples over the given names.
fn wheel_faces(border: &[String], ring: &[String], hub: &str) -> Vec<[String; 4]> {
    let n = border.len();
    let mut faces = Vec::with_capacity(n + n / 2);
    for k in 0..n {
        faces.push([
            border[k].clone(),
            border[(k + 1) % n].clone(),
            ring[(k + 1) % n].clone(),
            ring[k].clone(),
        ]);
    }
    for j in 0..n / 2 {
        faces.push([
            hub.to_string(),
            ring[2 * j].clone(),
            ring[(2 * j + 1) % n].clone(),
            ring[(2 * j + 2) % n].clone(),
        ]);
    }
    faces
}

/// Edges of the wheel filling (ring cycle, spokes, hub spokes), without the
/// border cycle itself.
fn wheel_edges(border: &[String], ring: &[String], hub: &str) -> Vec<(String, String)> {
    let n = border.len();
    let mut edges = Vec::new();
    for k in 0..n {
        edges.push((ring[k].clone(), ring[(k + 1) % n].clone()));
        edges.push((border[k].clone(), ring[k].clone()));
    }
    for j in 0..n / 2 {
        edges.push((hub.to_string(), ring[2 * j].clone()));
    }
    edges
}

/// Builds the standalone wheel quadrangulation of an even cycle of length
/// `n` (at least 4): border `b{k}`, ring `i{k}`, hub `h`. It has `2n + 1`
/// vertices and `3n/2` quad faces.
pub fn quadrangulate_cycle(n: usize) -> Result<FlatQuadrangulation> {
    if n < 4 || n % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "wheel quadrangulation needs an even cycle of length at least 4, got {n}"
        )));
    }
    let border: Vec<String> = (0..n).map(|k| format!("b{k}")).collect();
    let ring: Vec<String> = (0..n).map(|k| format!("i{k}")).collect();
    let hub = "h".to_string();
    let mut vertices = border.clone();
    vertices.extend(ring.clone());
    vertices.push(hub.clone());
    let mut edges: Vec<(String, String)> =
        (0..n).map(|k| (border[k].clone(), border[(k + 1) % n].clone())).collect();
    edges.extend(wheel_edges(&border, &ring, &hub));
    let graph = Arc::new(Graph::from_parts(&vertices, &edges)?);
    let faces = wheel_faces(&border, &ring, &hub)
        .into_iter()
        .map(|f| {
            let ids = [
                graph.id(&f[0]).unwrap(),
                graph.id(&f[1]).unwrap(),
                graph.id(&f[2]).unwrap(),
                graph.id(&f[3]).unwrap(),
            ];
            ids
        })
        .collect();
    let border_cycle = border.iter().map(|b| graph.id(b).unwrap()).collect();
    Ok(FlatQuadrangulation { graph, faces, border_cycle })
}

/// Removes one border edge lying on exactly one face, exposing the face's
/// far path as new border. Peeling a disk quadrangulation repeatedly
/// removes every face and ends in a spanning tree of what remains.
pub fn peel_boundary_edge(fq: &FlatQuadrangulation) -> Result<FlatQuadrangulation> {
    let n = fq.border_cycle.len();
    let face_has_edge = |f: &[VertexId; 4], u: VertexId, v: VertexId| -> bool {
        (0..4).any(|i| {
            let (a, b) = (f[i], f[(i + 1) % 4]);
            (a, b) == (u, v) || (b, a) == (u, v)
        })
    };
    let mut chosen: Option<(usize, usize)> = None; // (border position, face index)
    for pos in 0..n {
        let (u, v) = (fq.border_cycle[pos], fq.border_cycle[(pos + 1) % n]);
        let hits: Vec<usize> =
            (0..fq.faces.len()).filter(|&fi| face_has_edge(&fq.faces[fi], u, v)).collect();
        if hits.len() == 1 {
            chosen = Some((pos, hits[0]));
            break;
        }
    }
    let Some((pos, fi)) = chosen else {
        return Err(Error::InvalidArgument(
            "no border edge lies on exactly one face; nothing to peel".into(),
        ));
    };
    let (u, v) = (fq.border_cycle[pos], fq.border_cycle[(pos + 1) % n]);
    let face = fq.faces[fi];
    // Orient the face as u, v, w, z so the replacement path is u-z-w-v.
    let i = (0..4)
        .find(|&i| (face[i], face[(i + 1) % 4]) == (u, v) || (face[(i + 1) % 4], face[i]) == (u, v))
        .unwrap();
    let (w, z) = if face[i] == u {
        (face[(i + 2) % 4], face[(i + 3) % 4])
    } else {
        (face[(i + 3) % 4], face[(i + 2) % 4])
    };

    let g = &fq.graph;
    let names: Vec<String> = g.vertex_names().to_vec();
    let edges: Vec<(String, String)> = g
        .undirected_edges()
        .filter(|&(a, b)| {
            !((a, b) == (u.min(v), u.max(v)))
        })
        .map(|(a, b)| (g.name(a).to_string(), g.name(b).to_string()))
        .collect();
    let graph = Arc::new(Graph::from_parts(&names, &edges)?);

    let mut border_cycle = Vec::with_capacity(n + 2);
    for (idx, &b) in fq.border_cycle.iter().enumerate() {
        border_cycle.push(b);
        if idx == pos {
            border_cycle.push(z);
            border_cycle.push(w);
        }
    }
    let faces: Vec<[VertexId; 4]> =
        fq.faces.iter().enumerate().filter(|&(j, _)| j != fi).map(|(_, f)| *f).collect();
    Ok(FlatQuadrangulation { graph, faces, border_cycle })
}

/// Input cleanup before realizing: freely reduce relators, drop empty ones,
/// and eliminate any generator that appears alone as a relator (it is
/// trivial in the group), removing its occurrences everywhere. Runs to a
/// fixpoint and is idempotent.
pub fn reduce_presentation_input(p: &Presentation) -> Presentation {
    let mut gens: Vec<String> = p.generators().to_vec();
    let mut relators: Vec<Word> = p.relators().to_vec();
    loop {
        relators = relators.iter().map(|r| free_reduce(r)).filter(|r| !r.is_empty()).collect();
        let lone = relators.iter().find(|r| r.len() == 1).map(|r| r[0].gen);
        let Some(dead) = lone else { break };
        relators = relators
            .iter()
            .map(|r| r.iter().copied().filter(|l| l.gen != dead).collect())
            .collect();
        gens.remove(dead as usize);
        for r in &mut relators {
            for l in r.iter_mut() {
                if l.gen > dead {
                    l.gen -= 1;
                }
            }
        }
    }
    Presentation::new(gens, relators).expect("reduced input")
}

/// Rung phase: `Zero` places a rung at every ladder position, `Alternating`
/// doubles rungs on even positions so every annulus face is a square.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Nu {
    Zero,
    Alternating,
}

#[derive(Debug, Clone, Copy)]
pub struct RealizationConfig {
    /// Petal cycle length; even, at least 6.
    pub petal: usize,
    pub nu: Nu,
}

impl Default for RealizationConfig {
    fn default() -> Self {
        RealizationConfig { petal: 6, nu: Nu::Alternating }
    }
}

#[derive(Debug, Clone)]
pub struct Realization {
    pub graph: Arc<Graph>,
    /// The wedge vertex every petal passes through.
    pub base_vertex: String,
    /// Generator name paired with its petal prefix `g{j}`.
    pub generator_petals: Vec<(String, String)>,
    /// Relator disk prefixes `r{i}`, in relator order.
    pub relator_disks: Vec<String>,
    pub warnings: Vec<String>,
}

/// Builds the realization graph of a presentation. Petals are indexed
/// cycles `g{j}.k` through the base vertex `w`; each relator of length L
/// becomes a cycle `r{i}.k` of length petal*L, attached by rungs to the
/// path its word traces around the petals, and filled with a wheel
/// (`r{i}.i{k}` ring, `r{i}.h` hub). With alternating rungs the graph is
/// bipartite whenever it contains no loops, which it never does here.
pub fn realize(p: &Presentation, cfg: &RealizationConfig) -> Result<Realization> {
    if cfg.petal < 6 || cfg.petal % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "petal length must be even and at least 6, got {}",
            cfg.petal
        )));
    }
    let n = cfg.petal;
    let p = reduce_presentation_input(p);

    let mut vertices: Vec<String> = vec!["w".to_string()];
    let mut edges: Vec<(String, String)> = Vec::new();

    // Petals: g{j}.0 is the base vertex itself.
    let petal_name = |j: usize, k: usize| -> String {
        if k % n == 0 {
            "w".to_string()
        } else {
            format!("g{j}.{}", k % n)
        }
    };
    for j in 0..p.generator_count() {
        for k in 1..n {
            vertices.push(format!("g{j}.{k}"));
        }
        for k in 0..n {
            edges.push((petal_name(j, k), petal_name(j, k + 1)));
        }
    }

    // The base vertex the k-th relator-cycle position is tied to: w at
    // letter boundaries, otherwise position +-(k mod n) on the letter's
    // petal, signed by the letter.
    let attach = |r: &Word, k: usize| -> String {
        let m = r.len() * n;
        let k = k % m;
        let off = k % n;
        if off == 0 {
            return "w".to_string();
        }
        let letter = r[k / n];
        let pos = if letter.inverse { n - off } else { off };
        petal_name(letter.gen as usize, pos)
    };

    for (i, r) in p.relators().iter().enumerate() {
        let m = r.len() * n;
        let cycle: Vec<String> = (0..m).map(|k| format!("r{i}.{k}")).collect();
        vertices.extend(cycle.iter().cloned());
        for k in 0..m {
            edges.push((cycle[k].clone(), cycle[(k + 1) % m].clone()));
        }
        for k in 0..m {
            let nu_k = match cfg.nu {
                Nu::Zero => 0,
                Nu::Alternating => k % 2,
            };
            edges.push((cycle[(k + nu_k) % m].clone(), attach(r, k - nu_k)));
        }
        let ring: Vec<String> = (0..m).map(|k| format!("r{i}.i{k}")).collect();
        let hub = format!("r{i}.h");
        vertices.extend(ring.iter().cloned());
        vertices.push(hub.clone());
        edges.extend(wheel_edges(&cycle, &ring, &hub));
    }

    let (graph, warnings) = Graph::new(&vertices, &edges)?;
    let realization = Realization {
        graph: Arc::new(graph),
        base_vertex: "w".to_string(),
        generator_petals: p
            .generators()
            .iter()
            .enumerate()
            .map(|(j, g)| (g.clone(), format!("g{j}")))
            .collect(),
        relator_disks: (0..p.relators().len()).map(|i| format!("r{i}")).collect(),
        warnings,
    };
    Ok(realization)
}

/// Adds a self-loop at the first vertex. This is the standard way to break
/// bipartite phase-locking at the cost of multiplying the square group by
/// an order-2 factor; the returned note says which happened.
pub fn add_self_loop(g: &Graph) -> Result<(Graph, Vec<String>)> {
    if g.vertex_count() == 0 {
        return Err(Error::InvalidArgument("cannot add a loop to an empty graph".into()));
    }
    let at = g.name(0).to_string();
    if g.has_edge(0, 0) {
        return Ok((g.clone(), vec![format!("vertex {at:?} already has a loop; unchanged")]));
    }
    let was_bipartite = g.is_connected() && matches!(g.bipartiteness(), Ok(Bipartiteness::Bipartite(_)));
    let names: Vec<String> = g.vertex_names().to_vec();
    let mut edges: Vec<(String, String)> = g
        .undirected_edges()
        .map(|(u, v)| (g.name(u).to_string(), g.name(v).to_string()))
        .collect();
    edges.push((at.clone(), at.clone()));
    let out = Graph::from_parts(&names, &edges)?;
    let mut notes = vec![format!("added a self-loop at {at:?}")];
    if was_bipartite {
        notes.push("graph was bipartite; the loop creates odd closed walks".into());
    }
    Ok((out, notes))
}

#[derive(Debug, Clone)]
pub struct RealizationCheck {
    pub connected: bool,
    pub bipartite: bool,
    pub presented_order: GroupOrder,
    pub realized_order: GroupOrder,
    /// Some(true/false) when both orders were computed; None if either
    /// enumeration hit the budget.
    pub orders_agree: Option<bool>,
}

/// Cross-checks a realization against its source presentation by comparing
/// the presented group's order with the realized square group's order.
pub fn verify_realization(
    p: &Presentation,
    r: &Realization,
    max_cosets: usize,
) -> Result<RealizationCheck> {
    let connected = r.graph.is_connected();
    let bipartite = connected && matches!(r.graph.bipartiteness()?, Bipartiteness::Bipartite(_));
    let reduced = reduce_presentation_input(p);
    let presented_order = group_order(&reduced, max_cosets)?;
    let t = spanning_tree(&r.graph, &r.base_vertex)?;
    let realized_order = square_group_order(&r.graph, &t, max_cosets)?;
    let orders_agree = match (presented_order, realized_order) {
        (GroupOrder::Finite(a), GroupOrder::Finite(b)) => Some(a == b),
        _ => None,
    };
    Ok(RealizationCheck { connected, bipartite, presented_order, realized_order, orders_agree })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Square;

    #[test]
    fn wheel_quadrangulation_of_octagon() {
        let fq = quadrangulate_cycle(8).unwrap();
        assert_eq!(fq.graph.vertex_count(), 17);
        assert_eq!(fq.graph.edge_count(), 28);
        assert_eq!(fq.faces.len(), 12);
        assert!(matches!(fq.graph.bipartiteness().unwrap(), Bipartiteness::Bipartite(_)));
        // Every face is a genuine square of the graph.
        for f in &fq.faces {
            Square::new(&fq.graph, *f).unwrap();
        }
        assert_eq!(fq.border_cycle.len(), 8);
    }

    #[test]
    fn quadrangulate_rejects_odd_and_tiny() {
        assert!(quadrangulate_cycle(7).is_err());
        assert!(quadrangulate_cycle(2).is_err());
        assert!(quadrangulate_cycle(4).is_ok());
    }

    #[test]
    fn peel_removes_one_face_and_edge() {
        let fq = quadrangulate_cycle(8).unwrap();
        let peeled = peel_boundary_edge(&fq).unwrap();
        assert_eq!(peeled.faces.len(), 11);
        assert_eq!(peeled.graph.edge_count(), 27);
        assert_eq!(peeled.border_cycle.len(), 10);
        assert!(peeled.graph.is_connected());
    }

    #[test]
    fn peeling_every_face_leaves_a_tree() {
        let mut fq = quadrangulate_cycle(6).unwrap();
        let total_faces = fq.faces.len();
        for _ in 0..total_faces {
            fq = peel_boundary_edge(&fq).unwrap();
        }
        assert!(fq.faces.is_empty());
        assert_eq!(fq.graph.edge_count(), fq.graph.vertex_count() - 1);
        assert!(fq.graph.is_connected());
        assert!(peel_boundary_edge(&fq).is_err());
    }

    #[test]
    fn input_reduction_is_idempotent_and_kills_lone_generators() {
        let p = Presentation::parse("generators: a b\nrelator: b\nrelator: a b\n").unwrap();
        let r1 = reduce_presentation_input(&p);
        // b dies, leaving relator a, which kills a too.
        assert_eq!(r1.generator_count(), 0);
        assert!(r1.relators().is_empty());
        let r2 = reduce_presentation_input(&r1);
        assert_eq!(r2, r1);

        let q = Presentation::parse("generators: a\nrelator: a a^-1\n").unwrap();
        let rq = reduce_presentation_input(&q);
        assert_eq!(rq.generator_count(), 1);
        assert!(rq.relators().is_empty());
    }

    #[test]
    fn realize_cyclic_three() {
        let p = Presentation::parse("generators: g\nrelator: g g g\n").unwrap();
        let r = realize(&p, &RealizationConfig::default()).unwrap();
        assert_eq!(r.graph.vertex_count(), 43);
        assert_eq!(r.graph.edge_count(), 87);
        assert!(r.warnings.is_empty());
        let check = verify_realization(&p, &r, 100_000).unwrap();
        assert!(check.connected);
        assert!(check.bipartite);
        assert_eq!(check.presented_order, GroupOrder::Finite(3));
        assert_eq!(check.realized_order, GroupOrder::Finite(3));
        assert_eq!(check.orders_agree, Some(true));
    }

    #[test]
    fn realize_free_generator_is_a_petal_cycle() {
        let p = Presentation::parse("generators: a\n").unwrap();
        let r = realize(&p, &RealizationConfig::default()).unwrap();
        assert_eq!(r.graph.vertex_count(), 6);
        assert_eq!(r.graph.edge_count(), 6);
        assert!(r.graph.has_edge(r.graph.id("w").unwrap(), r.graph.id("g0.1").unwrap()));
    }

    #[test]
    fn realize_empty_presentation_is_a_point() {
        let p = Presentation::parse("generators:\n").unwrap();
        let r = realize(&p, &RealizationConfig::default()).unwrap();
        assert_eq!(r.graph.vertex_count(), 1);
        assert_eq!(r.graph.edge_count(), 0);
    }

    #[test]
    fn realize_rejects_bad_petal() {
        let p = Presentation::parse("generators: a\n").unwrap();
        assert!(realize(&p, &RealizationConfig { petal: 5, nu: Nu::Alternating }).is_err());
        assert!(realize(&p, &RealizationConfig { petal: 4, nu: Nu::Alternating }).is_err());
    }

    #[test]
    fn realize_with_zero_nu_keeps_counts() {
        let p = Presentation::parse("generators: g\nrelator: g g g\n").unwrap();
        let r = realize(&p, &RealizationConfig { petal: 6, nu: Nu::Zero }).unwrap();
        assert_eq!(r.graph.vertex_count(), 43);
        assert_eq!(r.graph.edge_count(), 87);
    }

    #[test]
    fn add_self_loop_reports_bipartite_break() {
        let g = Graph::cycle(4);
        let (out, notes) = add_self_loop(&g).unwrap();
        assert!(out.has_edge(0, 0));
        assert_eq!(out.edge_count(), 5);
        assert!(notes.iter().any(|n| n.contains("bipartite")));
        let (again, notes2) = add_self_loop(&out).unwrap();
        assert_eq!(again.edge_count(), 5);
        assert!(notes2.iter().any(|n| n.contains("unchanged")));
    }
}
