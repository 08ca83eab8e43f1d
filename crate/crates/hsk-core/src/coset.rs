//! Todd-Coxeter coset enumeration over the trivial subgroup. A closed table
//! is the right regular action of a finite quotient, so the coset count is
//! the group order and each generator column is a permutation.
//!
//! The strategy is HLT: scan every relator from every live coset, defining
//! new cosets for missing steps and queueing coincidences when a scan closes
//! onto a different coset than it started from. Coincidences merge through a
//! union-find and transfer row data, following the standard procedure.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::presentation::{invert_word, Letter, Presentation, Word};

const UNDEF: u32 = u32::MAX;

/// Hard ceiling on table cells (cosets times columns) independent of the
/// caller's coset budget, so wide presentations cannot balloon memory.
const CELL_CAP: usize = 120_000_000;

/// Outcome of an enumeration attempt.
#[derive(Debug)]
pub enum Enumeration {
    /// The table closed: the quotient group is finite of order
    /// `table.coset_count()`.
    Finite(CosetTable),
    /// Budget exhausted before closing; says nothing about finiteness.
    Unknown { live_cosets: usize, budget: usize },
}

/// A closed coset table for the trivial subgroup. Column `2g` is the action
/// of generator `g`, column `2g+1` its inverse.
#[derive(Debug, Clone)]
pub struct CosetTable {
    ngens: usize,
    rows: Vec<Vec<u32>>,
}

impl CosetTable {
    pub fn coset_count(&self) -> usize {
        self.rows.len()
    }

    pub fn generator_count(&self) -> usize {
        self.ngens
    }

    pub fn apply(&self, coset: u32, l: Letter) -> u32 {
        self.rows[coset as usize][column(l)]
    }

    pub fn action_of_word(&self, start: u32, w: &[Letter]) -> u32 {
        w.iter().fold(start, |c, &l| self.apply(c, l))
    }

    pub fn is_identity_action(&self, w: &[Letter]) -> bool {
        (0..self.rows.len() as u32).all(|c| self.action_of_word(c, w) == c)
    }

    /// The permutation induced by one generator, as images of 0..n.
    pub fn permutation_of_gen(&self, gen: u32) -> Vec<u32> {
        self.rows.iter().map(|r| r[2 * gen as usize]).collect()
    }

    /// Checks closure, inverse symmetry, column bijectivity, and that every
    /// relator acts trivially. A table returned by `enumerate` always
    /// passes; this guards the algorithm itself.
    fn verify(&self, relators: &[Word]) -> Result<()> {
        let n = self.rows.len();
        for row in &self.rows {
            if row.iter().any(|&x| x == UNDEF || x as usize >= n) {
                return Err(Error::OpenTable);
            }
        }
        for g in 0..self.ngens {
            let mut seen = vec![false; n];
            for c in 0..n as u32 {
                let d = self.rows[c as usize][2 * g];
                if seen[d as usize] {
                    return Err(Error::OpenTable);
                }
                seen[d as usize] = true;
                if self.rows[d as usize][2 * g + 1] != c {
                    return Err(Error::OpenTable);
                }
            }
        }
        for r in relators {
            if !self.is_identity_action(r) {
                return Err(Error::OpenTable);
            }
        }
        Ok(())
    }
}

fn column(l: Letter) -> usize {
    2 * l.gen as usize + l.inverse as usize
}

fn inverse_column(col: usize) -> usize {
    col ^ 1
}

struct Tables {
    ncols: usize,
    rows: Vec<Vec<u32>>,
    parent: Vec<u32>,
    live: usize,
}

impl Tables {
    fn find(&mut self, mut c: u32) -> u32 {
        while self.parent[c as usize] != c {
            let p = self.parent[c as usize];
            self.parent[c as usize] = self.parent[p as usize];
            c = self.parent[c as usize];
        }
        c
    }

    fn alive(&self, c: u32) -> bool {
        self.parent[c as usize] == c
    }

    /// Change detector for the pass loop: coset count, live count, and the
    /// number of defined cells on live rows. set() only adds definitions
    /// and merges only shrink the live count, so an unchanged snapshot
    /// means the pass did nothing.
    fn snapshot(&self) -> (usize, usize, usize) {
        let defined = self
            .rows
            .iter()
            .enumerate()
            .filter(|(i, _)| self.parent[*i] == *i as u32)
            .map(|(_, row)| row.iter().filter(|&&x| x != UNDEF).count())
            .sum();
        (self.rows.len(), self.live, defined)
    }

    fn new_coset(&mut self) -> u32 {
        let id = self.rows.len() as u32;
        self.rows.push(vec![UNDEF; self.ncols]);
        self.parent.push(id);
        self.live += 1;
        id
    }

    fn set(&mut self, c: u32, col: usize, d: u32) {
        self.rows[c as usize][col] = d;
        self.rows[d as usize][inverse_column(col)] = c;
    }

    fn merge(&mut self, a: u32, b: u32, queue: &mut VecDeque<u32>) {
        let a = self.find(a);
        let b = self.find(b);
        if a == b {
            return;
        }
        let (keep, dead) = if a < b { (a, b) } else { (b, a) };
        self.parent[dead as usize] = keep;
        self.live -= 1;
        queue.push_back(dead);
    }

    fn process_coincidence(&mut self, a: u32, b: u32) {
        let mut queue = VecDeque::new();
        self.merge(a, b, &mut queue);
        while let Some(dead) = queue.pop_front() {
            for col in 0..self.ncols {
                let delta = self.rows[dead as usize][col];
                if delta == UNDEF {
                    continue;
                }
                // Remove the back-reference to the dead coset.
                if self.rows[delta as usize][inverse_column(col)] == dead {
                    self.rows[delta as usize][inverse_column(col)] = UNDEF;
                }
                let mu = self.find(dead);
                let nu = self.find(delta);
                let mu_x = self.rows[mu as usize][col];
                if mu_x != UNDEF {
                    self.merge(nu, mu_x, &mut queue);
                } else {
                    let nu_back = self.rows[nu as usize][inverse_column(col)];
                    if nu_back != UNDEF {
                        self.merge(mu, nu_back, &mut queue);
                    } else {
                        self.set(mu, col, nu);
                    }
                }
            }
        }
    }

    /// Scans one relator from `start` per HLT: forward as far as defined,
    /// backward from the closing end as far as defined, then either a
    /// deduction (single-cell gap, both cells undefined by construction), a
    /// coincidence (the scans meet on different cosets), or a fill of one
    /// fresh coset. Returns false if the coset budget was hit.
    fn scan_and_fill(&mut self, start: u32, relator: &[Letter], max_cosets: usize) -> bool {
        if relator.is_empty() {
            return true;
        }
        let mut f = self.find(start);
        let mut b = f;
        let mut i = 0usize; // next letter to apply forward
        let mut j = relator.len(); // letters i..j are still unscanned
        loop {
            while i < j {
                let col = column(relator[i]);
                let next = self.rows[f as usize][col];
                if next == UNDEF {
                    break;
                }
                f = self.find(next);
                i += 1;
            }
            if i == j {
                if f != b {
                    self.process_coincidence(f, b);
                }
                return true;
            }
            while j > i {
                let col = inverse_column(column(relator[j - 1]));
                let prev = self.rows[b as usize][col];
                if prev == UNDEF {
                    break;
                }
                b = self.find(prev);
                j -= 1;
            }
            if i == j {
                if f != b {
                    self.process_coincidence(f, b);
                }
                return true;
            }
            let col = column(relator[i]);
            if i + 1 == j {
                // Deduction: the forward scan stopped at rows[f][col] =
                // UNDEF and the backward scan stopped at the matching
                // inverse cell, so set() overwrites nothing.
                self.set(f, col, b);
            } else {
                if self.rows.len() >= max_cosets || (self.rows.len() + 1) * self.ncols > CELL_CAP {
                    return false;
                }
                let d = self.new_coset();
                self.set(f, col, d);
            }
        }
    }
}

/// Runs HLT Todd-Coxeter for the trivial subgroup of the presented group.
/// Deterministic: cosets are scanned in increasing order, relators in
/// presentation order, then remaining undefined columns in column order.
pub fn enumerate(p: &Presentation, max_cosets: usize) -> Result<Enumeration> {
    if max_cosets == 0 {
        return Err(Error::ZeroBudget);
    }
    let ngens = p.generator_count();
    if ngens == 0 {
        let table = CosetTable { ngens: 0, rows: vec![Vec::new()] };
        return Ok(Enumeration::Finite(table));
    }
    let relators: Vec<Word> = p.relators().to_vec();
    let mut t = Tables { ncols: 2 * ngens, rows: Vec::new(), parent: Vec::new(), live: 0 };
    t.new_coset();

    // Full passes until a pass changes nothing. One pass normally suffices;
    // the repeat guards the corner where a late coincidence touches rows of
    // already-processed cosets.
    loop {
        let before = t.snapshot();
        let mut c: u32 = 0;
        while (c as usize) < t.rows.len() {
            if !t.alive(c) {
                c += 1;
                continue;
            }
            for r in &relators {
                if !t.alive(c) {
                    break;
                }
                if !t.scan_and_fill(c, r, max_cosets) {
                    return Ok(Enumeration::Unknown { live_cosets: t.live, budget: max_cosets });
                }
            }
            if t.alive(c) {
                for col in 0..t.ncols {
                    if !t.alive(c) {
                        break;
                    }
                    if t.rows[c as usize][col] == UNDEF {
                        if t.rows.len() >= max_cosets || (t.rows.len() + 1) * t.ncols > CELL_CAP {
                            return Ok(Enumeration::Unknown {
                                live_cosets: t.live,
                                budget: max_cosets,
                            });
                        }
                        let d = t.new_coset();
                        t.set(c, col, d);
                    }
                }
            }
            c += 1;
        }
        // No new cosets, no merges, no new entries: the table is stable.
        if t.snapshot() == before {
            break;
        }
    }

    // Compress: renumber live cosets in increasing order.
    let mut remap = vec![UNDEF; t.rows.len()];
    let mut order: Vec<u32> = Vec::new();
    for i in 0..t.rows.len() as u32 {
        if t.alive(i) {
            remap[i as usize] = order.len() as u32;
            order.push(i);
        }
    }
    let mut rows = Vec::with_capacity(order.len());
    for &old in &order {
        let row: Vec<u32> = (0..t.ncols)
            .map(|col| {
                let v = t.rows[old as usize][col];
                if v == UNDEF {
                    UNDEF
                } else {
                    remap[t.find(v) as usize]
                }
            })
            .collect();
        rows.push(row);
    }
    let table = CosetTable { ngens, rows };
    table.verify(&relators)?;
    Ok(Enumeration::Finite(table))
}

/// Order of the group presented by `p`, if enumeration closes in budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupOrder {
    Finite(usize),
    Unknown,
}

pub fn group_order(p: &Presentation, max_cosets: usize) -> Result<GroupOrder> {
    match enumerate(p, max_cosets)? {
        Enumeration::Finite(t) => Ok(GroupOrder::Finite(t.coset_count())),
        Enumeration::Unknown { .. } => Ok(GroupOrder::Unknown),
    }
}

/// Order of the square group of a graph: build the square presentation,
/// simplify, then enumerate. Simplifying first keeps the table narrow,
/// which matters because raw edge presentations have two columns per
/// directed edge.
pub fn square_group_order(
    g: &std::sync::Arc<crate::graph::Graph>,
    t: &crate::graph::SpanningTree,
    max_cosets: usize,
) -> Result<GroupOrder> {
    let ep = crate::presentation::square_presentation(g, t);
    let s = crate::presentation::simplify(&ep.presentation, crate::presentation::SimplifyEffort::default());
    group_order(&s.presentation, max_cosets)
}

/// Convenience: does `w` represent the identity in the group presented by
/// `p`? Requires the enumeration to close; `None` when budget runs out.
pub fn is_identity(p: &Presentation, w: &[Letter], max_cosets: usize) -> Result<Option<bool>> {
    match enumerate(p, max_cosets)? {
        Enumeration::Finite(t) => Ok(Some(t.action_of_word(0, w) == 0)),
        Enumeration::Unknown { .. } => Ok(None),
    }
}

/// Sanity helper for tests and reports: the inverse of a word acts as the
/// inverse permutation.
pub fn inverse_word(w: &[Letter]) -> Word {
    invert_word(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Presentation {
        Presentation::parse(text).unwrap()
    }

    #[test]
    fn cyclic_five() {
        let p = parse("generators: g\nrelator: g g g g g\n");
        match enumerate(&p, 1000).unwrap() {
            Enumeration::Finite(t) => {
                assert_eq!(t.coset_count(), 5);
                let perm = t.permutation_of_gen(0);
                // One 5-cycle.
                let mut c = 0u32;
                for _ in 0..5 {
                    c = perm[c as usize];
                }
                assert_eq!(c, 0);
            }
            Enumeration::Unknown { .. } => panic!("C5 should close"),
        }
    }

    #[test]
    fn trivial_and_empty_presentations() {
        let p = parse("generators: a\nrelator: a\n");
        assert_eq!(group_order(&p, 100).unwrap(), GroupOrder::Finite(1));
        let empty = parse("generators:\n");
        assert_eq!(group_order(&empty, 100).unwrap(), GroupOrder::Finite(1));
    }

    #[test]
    fn von_dyck_2_3_3_has_order_twelve() {
        let p = parse("generators: a b\nrelator: a a\nrelator: b b b\nrelator: a b a b a b\n");
        assert_eq!(group_order(&p, 10_000).unwrap(), GroupOrder::Finite(12));
    }

    #[test]
    fn symmetric_group_s3() {
        let p = parse("generators: a b\nrelator: a a\nrelator: b b\nrelator: a b a b a b\n");
        assert_eq!(group_order(&p, 1000).unwrap(), GroupOrder::Finite(6));
    }

    #[test]
    fn quotient_with_coincidences() {
        // Z/2 x Z/2 presented redundantly to force merges.
        let p = parse(
            "generators: a b\nrelator: a a\nrelator: b b\nrelator: a b a^-1 b^-1\nrelator: a b a b\n",
        );
        assert_eq!(group_order(&p, 1000).unwrap(), GroupOrder::Finite(4));
    }

    #[test]
    fn free_group_does_not_close() {
        let p = parse("generators: a\n");
        match enumerate(&p, 50).unwrap() {
            Enumeration::Unknown { live_cosets, budget } => {
                assert_eq!(budget, 50);
                assert!(live_cosets > 0);
            }
            Enumeration::Finite(_) => panic!("free group must not close"),
        }
    }

    #[test]
    fn zero_budget_is_an_error() {
        let p = parse("generators: a\nrelator: a\n");
        assert!(matches!(enumerate(&p, 0), Err(Error::ZeroBudget)));
    }

    #[test]
    fn word_actions_match_group_structure() {
        let p = parse("generators: a b\nrelator: a a\nrelator: b b b\nrelator: a b a b a b\n");
        let Enumeration::Finite(t) = enumerate(&p, 10_000).unwrap() else {
            panic!("should close");
        };
        let a = Letter::pos(0);
        let b = Letter::pos(1);
        assert!(t.is_identity_action(&[a, a]));
        assert!(t.is_identity_action(&[b, b, b]));
        assert!(!t.is_identity_action(&[b]));
        // Inverse word acts inversely from every coset.
        let w = vec![a, b, b.inv(), a, b];
        let wi = inverse_word(&w);
        for c in 0..t.coset_count() as u32 {
            let there = t.action_of_word(c, &w);
            assert_eq!(t.action_of_word(there, &wi), c);
        }
    }

    #[test]
    fn square_group_orders_of_small_graphs() {
        use crate::graph::{spanning_tree, Graph};
        use std::sync::Arc;

        let c4 = Arc::new(Graph::cycle(4));
        let t = spanning_tree(&c4, "v0").unwrap();
        assert_eq!(square_group_order(&c4, &t, 10_000).unwrap(), GroupOrder::Finite(1));

        // Two looped vertices joined by an edge: the loop-loop square forces
        // the two order-2 loop classes to coincide, leaving Z/2.
        let (locked, _) = Graph::new(&["a", "b"], &[("a", "a"), ("b", "b"), ("a", "b")]).unwrap();
        let locked = Arc::new(locked);
        let t = spanning_tree(&locked, "a").unwrap();
        assert_eq!(square_group_order(&locked, &t, 10_000).unwrap(), GroupOrder::Finite(2));

        // C6 is square-free with fundamental group Z: no closing.
        let c6 = Arc::new(Graph::cycle(6));
        let t = spanning_tree(&c6, "v0").unwrap();
        assert_eq!(square_group_order(&c6, &t, 500).unwrap(), GroupOrder::Unknown);
    }

    #[test]
    fn identity_check_distinguishes_elements() {
        let p = parse("generators: g\nrelator: g g g\n");
        assert_eq!(is_identity(&p, &[Letter::pos(0); 3], 100).unwrap(), Some(true));
        assert_eq!(is_identity(&p, &[Letter::pos(0); 2], 100).unwrap(), Some(false));
        let free = parse("generators: g\n");
        assert_eq!(is_identity(&free, &[Letter::pos(0)], 10).unwrap(), None);
    }
}
