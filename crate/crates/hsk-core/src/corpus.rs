//! Named sample graphs shared by tests, benchmarks and the CLI examples.
//!
//! The set deliberately spans the interesting regimes: trivial square group
//! (C4, trees), finite nontrivial (loops and triangles), and certified
//! infinite (C6, bowtie).

use std::sync::Arc;

use crate::graph::Graph;
use crate::realization::add_self_loop;

/// The 4-cycle; one square, trivial square group.
pub fn c4() -> Arc<Graph> {
    Arc::new(Graph::cycle(4))
}

/// The 6-cycle; square-free, square group Z.
pub fn c6() -> Arc<Graph> {
    Arc::new(Graph::cycle(6))
}

/// C4 with a self-loop at v0; square group Z/2, logarithmic gluing.
pub fn s_c4() -> Arc<Graph> {
    Arc::new(add_self_loop(&Graph::cycle(4)).expect("loop on C4").0)
}

/// C6 with a self-loop at v0; square-free, square group Z/2 * Z, linear
/// gluing.
pub fn s_c6() -> Arc<Graph> {
    Arc::new(add_self_loop(&Graph::cycle(6)).expect("loop on C6").0)
}

/// Two triangles sharing a vertex; square-free, square group F2.
pub fn bowtie() -> Arc<Graph> {
    Arc::new(
        Graph::from_parts(
            &["a", "b", "c", "d", "e"],
            &[("a", "b"), ("b", "c"), ("c", "a"), ("a", "d"), ("d", "e"), ("e", "a")],
        )
        .expect("bowtie"),
    )
}

/// A triangle with a loop at one corner; the loop opens the square
/// (a, a, b, c), so the square group is Z/2.
pub fn triangle_with_loop() -> Arc<Graph> {
    Arc::new(
        Graph::from_parts(&["a", "b", "c"], &[("a", "a"), ("a", "b"), ("b", "c"), ("c", "a")])
            .expect("triangle with loop"),
    )
}

/// Two looped vertices joined by an edge; square group Z/2 through the
/// double-loop square (a, a, b, b).
pub fn looped_pair() -> Arc<Graph> {
    Arc::new(
        Graph::from_parts(&["a", "b"], &[("a", "a"), ("a", "b"), ("b", "b")])
            .expect("looped pair"),
    )
}

/// One vertex carrying a loop; no squares, square group Z/2.
pub fn single_loop() -> Arc<Graph> {
    Arc::new(Graph::from_parts(&["a"], &[("a", "a")]).expect("single loop"))
}

/// A path on three vertices; a tree, so every group in sight is trivial.
pub fn path3() -> Arc<Graph> {
    Arc::new(Graph::from_parts(&["a", "b", "c"], &[("a", "b"), ("b", "c")]).expect("path"))
}

/// The whole corpus with stable names, for iteration in property tests.
pub fn all() -> Vec<(&'static str, Arc<Graph>)> {
    vec![
        ("c4", c4()),
        ("c6", c6()),
        ("s_c4", s_c4()),
        ("s_c6", s_c6()),
        ("bowtie", bowtie()),
        ("triangle_with_loop", triangle_with_loop()),
        ("looped_pair", looped_pair()),
        ("single_loop", single_loop()),
        ("path3", path3()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_graphs_are_connected() {
        for (name, g) in all() {
            assert!(g.is_connected(), "{name} must be connected");
        }
    }

    #[test]
    fn loop_placement() {
        assert_eq!(s_c4().loop_count(), 1);
        assert!(s_c4().has_edge(0, 0));
        assert_eq!(c4().loop_count(), 0);
    }
}
