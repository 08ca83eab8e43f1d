//! Randomized property suites shared by the `properties` and `acceptance`
//! test targets. Each suite panics with a descriptive message on the first
//! violated law. The RNG seed comes from HSK_SEED when set, so failures
//! reproduce exactly.

#![allow(dead_code)]

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hsk_core::corpus;
use hsk_core::cover::{check_covering_map, lift_walk, square_cover, universal_cover_ball, Cover, SquareCover};
use hsk_core::coset::{group_order, GroupOrder};
use hsk_core::graph::{spanning_tree, Graph, VertexId};
use hsk_core::presentation::{
    extension_tree, free_product, simplify, square_presentation, union_graph,
    van_kampen_presentation, Presentation, SimplifyEffort,
};
use hsk_core::walk::Walk;

pub fn seed() -> u64 {
    std::env::var("HSK_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(0x48534b31)
}

pub fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed())
}

fn random_walk_from<R: Rng>(g: &Arc<Graph>, start: VertexId, len: usize, rng: &mut R) -> Walk {
    let mut seq = vec![start];
    for _ in 0..len {
        let nb = g.neighbors(*seq.last().unwrap());
        if nb.is_empty() {
            break;
        }
        seq.push(nb[rng.gen_range(0..nb.len())]);
    }
    Walk::new(g, seq).expect("steps follow edges")
}

fn random_walk<R: Rng>(g: &Arc<Graph>, len: usize, rng: &mut R) -> Walk {
    let start = rng.gen_range(0..g.vertex_count() as VertexId);
    random_walk_from(g, start, len, rng)
}

/// Removes backtracks one at a time in random order. A confluence oracle:
/// whatever the removal order, the result must agree with `Walk::reduce`.
fn excise_in_random_order<R: Rng>(w: &Walk, rng: &mut R) -> Vec<VertexId> {
    let mut s = w.seq().to_vec();
    loop {
        let spots: Vec<usize> =
            (1..s.len()).filter(|&i| i + 1 < s.len() && s[i - 1] == s[i + 1]).collect();
        if spots.is_empty() {
            return s;
        }
        let i = spots[rng.gen_range(0..spots.len())];
        s.drain(i..=i + 1);
    }
}

/// Reduce is idempotent and confluent, star is associative with the trivial
/// walk as unit and inversion as inverse.
pub fn walk_algebra_laws(rng: &mut ChaCha8Rng) {
    for (name, g) in corpus::all() {
        for round in 0..40 {
            let w = random_walk(&g, rng.gen_range(0..=12), rng);
            let r = w.reduce();
            assert!(
                r.as_walk().is_non_backtracking(),
                "{name} round {round}: reduce left a backtrack in {:?}",
                r.as_walk().names()
            );
            assert_eq!(
                r.as_walk().reduce().as_walk().seq(),
                r.as_walk().seq(),
                "{name} round {round}: reduce is not idempotent"
            );
            assert_eq!(r.as_walk().start(), w.start(), "{name}: reduce moved the start");
            assert_eq!(r.as_walk().end(), w.end(), "{name}: reduce moved the end");
            assert_eq!(
                excise_in_random_order(&w, rng),
                r.as_walk().seq(),
                "{name} round {round}: backtrack removal order changed the normal form of {:?}",
                w.names()
            );

            let a = random_walk(&g, rng.gen_range(0..=8), rng);
            let b = random_walk_from(&g, a.end(), rng.gen_range(0..=8), rng);
            let c = random_walk_from(&g, b.end(), rng.gen_range(0..=8), rng);
            let left = a
                .star(&b)
                .unwrap()
                .as_walk()
                .star(&c)
                .unwrap();
            let right = a
                .star(b.star(&c).unwrap().as_walk())
                .unwrap();
            assert_eq!(
                left.as_walk().seq(),
                right.as_walk().seq(),
                "{name} round {round}: star is not associative"
            );

            let unit_l = Walk::trivial(&g, a.start()).star(&a).unwrap();
            let unit_r = a.star(&Walk::trivial(&g, a.end())).unwrap();
            assert_eq!(unit_l.as_walk().seq(), a.reduce().as_walk().seq(), "{name}: left unit");
            assert_eq!(unit_r.as_walk().seq(), a.reduce().as_walk().seq(), "{name}: right unit");

            let cancel = a.star(&a.inverse()).unwrap();
            assert!(cancel.as_walk().is_empty(), "{name}: a * a^-1 did not reduce away");
            assert_eq!(cancel.as_walk().start(), a.start(), "{name}: a * a^-1 moved the basepoint");
        }
    }
}

/// Every continuation of a partial lift that stays over the base walk,
/// found by brute-force search in the total graph.
fn all_lifts(cover: &Cover, w: &Walk, start: VertexId) -> Vec<Vec<VertexId>> {
    let total = cover.total();
    let mut done = Vec::new();
    let mut stack = vec![vec![start]];
    while let Some(path) = stack.pop() {
        if path.len() == w.seq().len() {
            done.push(path);
            continue;
        }
        let want = w.seq()[path.len()];
        let cur = *path.last().unwrap();
        for &nb in total.neighbors(cur) {
            if cover.project(nb) == want {
                let mut next = path.clone();
                next.push(nb);
                stack.push(next);
            }
        }
    }
    done
}

/// Walks lift uniquely once the start is lifted: the brute-force search
/// finds exactly one lift per fiber point, it equals `lift_walk`, and it
/// projects back to the base walk.
pub fn covering_lift_uniqueness(rng: &mut ChaCha8Rng) {
    let mut covers: Vec<(String, Cover)> = Vec::new();
    for (name, g) in corpus::all() {
        let t = spanning_tree(&g, g.name(0)).expect("corpus graphs are connected");
        if let Ok(SquareCover::Exact(c)) = square_cover(&g, &t, 10_000) {
            covers.push((format!("square cover of {name}"), c));
        }
    }
    for (name, cover) in &covers {
        check_covering_map(cover).unwrap_or_else(|e| panic!("{name} is not a cover: {e}"));
        let base = cover.base();
        for _ in 0..30 {
            let w = random_walk(&Arc::clone(base), rng.gen_range(0..=8), rng);
            for f in cover.fiber(w.start()) {
                let lifts = all_lifts(cover, &w, f);
                assert_eq!(
                    lifts.len(),
                    1,
                    "{name}: walk {:?} has {} lifts from {}",
                    w.names(),
                    lifts.len(),
                    cover.total().name(f)
                );
                let by_api = lift_walk(cover, &w, cover.total().name(f)).unwrap();
                assert_eq!(by_api.seq(), &lifts[0][..], "{name}: lift_walk disagrees with search");
                let projected: Vec<VertexId> =
                    by_api.seq().iter().map(|&x| cover.project(x)).collect();
                assert_eq!(projected, w.seq(), "{name}: lift does not project back");
            }
        }
    }

    // Truncated ball: walks from the basepoint of length at most the radius
    // stay strictly inside, where the covering condition holds.
    let c4 = corpus::c4();
    let ball = universal_cover_ball(&c4, "v0", 6).unwrap();
    let center = ball.total().id("v0").unwrap();
    for _ in 0..30 {
        let w = random_walk_from(&c4, c4.id("v0").unwrap(), rng.gen_range(0..=6), rng);
        let lifts = all_lifts(&ball, &w, center);
        assert_eq!(lifts.len(), 1, "ball: walk {:?} lifted {} ways", w.names(), lifts.len());
        let by_api = lift_walk(&ball, &w, "v0").unwrap();
        assert_eq!(by_api.seq(), &lifts[0][..], "ball: lift_walk disagrees with search");
    }
}

fn closing_orders_agree(tag: &str, p: &Presentation, q: &Presentation, budget: usize) {
    let po = group_order(p, budget).unwrap();
    let qo = group_order(q, budget).unwrap();
    if let (GroupOrder::Finite(a), GroupOrder::Finite(b)) = (po, qo) {
        assert_eq!(a, b, "{tag}: simplification changed the group order");
    }
    if let (GroupOrder::Finite(a), GroupOrder::Unknown) = (po, qo) {
        panic!("{tag}: original closed at order {a} but the smaller simplified table did not");
    }
}

/// Tietze simplification preserves the isomorphism class: abelianizations
/// match exactly, orders match whenever enumeration closes, and generator
/// counts never grow.
pub fn simplify_preserves_order() {
    let mut cases: Vec<(String, Presentation)> = Vec::new();
    for n in 1..=8 {
        let word = vec!["g"; n].join(" ");
        let text = format!("generators: g\nrelator: {word}\n");
        cases.push((format!("cyclic {n}"), Presentation::parse(&text).unwrap()));
    }
    cases.push((
        "triangle group 2,3,3".into(),
        Presentation::parse("generators: a b\nrelator: a a\nrelator: b b b\nrelator: a b a b a b\n")
            .unwrap(),
    ));
    cases.push((
        "klein four".into(),
        Presentation::parse("generators: a b\nrelator: a a\nrelator: b b\nrelator: a b a b\n")
            .unwrap(),
    ));
    cases.push((
        "symmetric 3".into(),
        Presentation::parse("generators: a b\nrelator: a a a\nrelator: b b\nrelator: a b a b\n")
            .unwrap(),
    ));
    for (name, g) in corpus::all() {
        let t = spanning_tree(&g, g.name(0)).unwrap();
        cases.push((format!("square presentation of {name}"), square_presentation(&g, &t).presentation));
        cases.push((
            format!("fundamental presentation of {name}"),
            hsk_core::presentation::fundamental_presentation(&g, &t).presentation,
        ));
    }

    for (tag, p) in &cases {
        let s = simplify(p, SimplifyEffort::default());
        assert!(
            s.presentation.generator_count() <= p.generator_count(),
            "{tag}: simplification grew the generator count"
        );
        assert_eq!(
            s.presentation.abelianization(),
            p.abelianization(),
            "{tag}: simplification changed the abelianization"
        );
        closing_orders_agree(tag, p, &s.presentation, 20_000);
        if p.abelianization().free_rank > 0 {
            assert_eq!(
                group_order(&s.presentation, 20_000).unwrap(),
                GroupOrder::Unknown,
                "{tag}: enumeration closed on a group with infinite abelianization"
            );
        }
    }
}

fn named_graph(vertices: &[&str], edges: &[(&str, &str)]) -> Arc<Graph> {
    let (g, warnings) = Graph::new(vertices, edges).unwrap();
    assert!(warnings.is_empty());
    Arc::new(g)
}

/// Square groups of one-point unions are free products of the parts'
/// square groups, provided every square of the union sits inside a single
/// part. Checked through abelianization (which turns free products into
/// direct sums) plus exact orders where enumeration closes.
pub fn wedge_abelianization_coherence() {
    let triangle = named_graph(&["w", "x", "y"], &[("w", "x"), ("x", "y"), ("y", "w")]);
    let triangle2 = named_graph(&["w", "x2", "y2"], &[("w", "x2"), ("x2", "y2"), ("y2", "w")]);
    let square = named_graph(&["w", "p", "q", "r"], &[("w", "p"), ("p", "q"), ("q", "r"), ("r", "w")]);
    let square2 =
        named_graph(&["w", "p2", "q2", "r2"], &[("w", "p2"), ("p2", "q2"), ("q2", "r2"), ("r2", "w")]);
    let pentagon = named_graph(
        &["w", "e1", "e2", "e3", "e4"],
        &[("w", "e1"), ("e1", "e2"), ("e2", "e3"), ("e3", "e4"), ("e4", "w")],
    );
    let loop_at_w = named_graph(&["w"], &[("w", "w")]);
    let looped_triangle =
        named_graph(&["w", "s", "t"], &[("w", "w"), ("w", "s"), ("s", "t"), ("t", "w")]);

    // Every square of each union below lies inside one part: the only loop
    // cases glue the loop to a part whose cycles through w are too long to
    // close a square with it.
    let wedges: Vec<(&str, Vec<Arc<Graph>>)> = vec![
        ("square v loop", vec![Arc::clone(&square), Arc::clone(&loop_at_w)]),
        ("triangle v square", vec![Arc::clone(&triangle), Arc::clone(&square)]),
        ("triangle v triangle", vec![Arc::clone(&triangle), Arc::clone(&triangle2)]),
        ("square v looped triangle", vec![Arc::clone(&square), Arc::clone(&looped_triangle)]),
        ("square v square", vec![Arc::clone(&square), Arc::clone(&square2)]),
        (
            "triangle v pentagon v square",
            vec![Arc::clone(&triangle), Arc::clone(&pentagon), Arc::clone(&square)],
        ),
    ];

    for (tag, parts) in &wedges {
        let union = union_graph(parts).unwrap();
        let t = extension_tree(parts).unwrap();
        let vk = van_kampen_presentation(parts, &t).unwrap();
        let direct = square_presentation(&union, &t);

        let mut product: Option<Presentation> = None;
        for part in parts {
            let pt = spanning_tree(part, "w").unwrap();
            let sq = square_presentation(part, &pt).presentation;
            product = Some(match product {
                None => sq,
                Some(acc) => free_product(&acc, &sq),
            });
        }
        let product = product.unwrap();

        assert_eq!(
            vk.presentation.abelianization(),
            product.abelianization(),
            "{tag}: union presentation and free product disagree after abelianizing"
        );
        assert_eq!(
            direct.presentation.abelianization(),
            product.abelianization(),
            "{tag}: direct square presentation disagrees with the free product"
        );
    }

    // Where at most one factor is nontrivial the free product stays finite,
    // so orders are comparable end to end.
    let parts = vec![Arc::clone(&square), Arc::clone(&looped_triangle)];
    let t = extension_tree(&parts).unwrap();
    let vk = van_kampen_presentation(&parts, &t).unwrap();
    let s = simplify(&vk.presentation, SimplifyEffort::default());
    assert_eq!(
        group_order(&s.presentation, 10_000).unwrap(),
        GroupOrder::Finite(2),
        "square v looped triangle: wedge square group should be the loop factor"
    );
    let parts = vec![Arc::clone(&square), Arc::clone(&square2)];
    let t = extension_tree(&parts).unwrap();
    let vk = van_kampen_presentation(&parts, &t).unwrap();
    let s = simplify(&vk.presentation, SimplifyEffort::default());
    assert_eq!(
        group_order(&s.presentation, 10_000).unwrap(),
        GroupOrder::Finite(1),
        "square v square: both factors trivial"
    );

    // The deck-count view of the same fact: fibers of the square cover of a
    // wedge have the size the free product predicts.
    let union = union_graph(&[Arc::clone(&square), Arc::clone(&looped_triangle)]).unwrap();
    let t = spanning_tree(&union, "w").unwrap();
    match square_cover(&union, &t, 10_000).unwrap() {
        SquareCover::Exact(c) => assert_eq!(c.sheet_count(), Some(2)),
        SquareCover::Unknown { .. } => panic!("finite wedge square group failed to enumerate"),
    }

    // The containment hypothesis is not decorative. A loop glued to a
    // triangle's corner opens the crossing square (w, w, x, y), whose extra
    // relator collapses the free product Z * Z/2 down to Z/2. The union
    // presentation must see that square; the blind free product must not.
    let parts = vec![Arc::clone(&triangle), Arc::clone(&loop_at_w)];
    let t = extension_tree(&parts).unwrap();
    let vk = van_kampen_presentation(&parts, &t).unwrap();
    let ab = vk.presentation.abelianization();
    assert_eq!((ab.free_rank, ab.invariant_factors.as_slice()), (0, &[2u128][..]));
    let s = simplify(&vk.presentation, SimplifyEffort::default());
    assert_eq!(group_order(&s.presentation, 10_000).unwrap(), GroupOrder::Finite(2));
    let blind = free_product(
        &square_presentation(&triangle, &spanning_tree(&triangle, "w").unwrap()).presentation,
        &square_presentation(&loop_at_w, &spanning_tree(&loop_at_w, "w").unwrap()).presentation,
    );
    assert_eq!(blind.abelianization().free_rank, 1, "without the crossing square a Z factor survives");
}
