//! Integer Smith normal form, the workhorse behind abelianization
//! invariants. Matrices here are tiny (relators x generators), so a plain
//! i128 implementation with smallest-pivot selection is plenty.

/// Returns the diagonal of the Smith normal form of `m`: nonnegative entries
/// d_0 | d_1 | ... with trailing zeros, length min(rows, cols).
pub fn smith_normal_form(mut m: Vec<Vec<i128>>) -> Vec<i128> {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let n = rows.min(cols);
    let mut diag = Vec::with_capacity(n);
    let mut t = 0;
    while t < n {
        // Find the entry of least nonzero magnitude in the trailing block.
        let mut pivot: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if m[i][j] != 0
                    && pivot.map_or(true, |(pi, pj)| m[i][j].abs() < m[pi][pj].abs())
                {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else {
            break; // trailing block is zero
        };
        m.swap(t, pi);
        for row in &mut m {
            row.swap(t, pj);
        }
        // Clear row and column t by repeated division with remainder.
        let mut dirty = true;
        while dirty {
            dirty = false;
            for i in t + 1..rows {
                if m[i][t] != 0 {
                    let q = m[i][t] / m[t][t];
                    for j in t..cols {
                        m[i][j] -= q * m[t][j];
                    }
                    if m[i][t] != 0 {
                        m.swap(t, i); // remainder became the smaller pivot
                        dirty = true;
                    }
                }
            }
            for j in t + 1..cols {
                if m[t][j] != 0 {
                    let q = m[t][j] / m[t][t];
                    for row in m.iter_mut().take(rows).skip(t) {
                        row[j] -= q * row[t];
                    }
                    if m[t][j] != 0 {
                        for row in &mut m {
                            row.swap(t, j);
                        }
                        dirty = true;
                    }
                }
            }
        }
        // Enforce divisibility: the pivot must divide the whole trailing block.
        let mut fixed = true;
        'outer: for i in t + 1..rows {
            for j in t + 1..cols {
                if m[i][j] % m[t][t] != 0 {
                    for jj in t..cols {
                        let add = m[i][jj];
                        m[t][jj] += add;
                    }
                    fixed = false;
                    break 'outer;
                }
            }
        }
        if fixed {
            diag.push(m[t][t].abs());
            t += 1;
        }
    }
    diag.resize(n, 0);
    diag
}

/// Invariant-factor view of a finitely generated abelian group presented by
/// an integer relation matrix over `generators` unknowns.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct AbelianInvariants {
    pub free_rank: usize,
    /// Nontrivial invariant factors (> 1) in divisibility order.
    pub invariant_factors: Vec<u128>,
}

impl AbelianInvariants {
    pub fn is_finite(&self) -> bool {
        self.free_rank == 0
    }

    pub fn order(&self) -> Option<u128> {
        if self.free_rank > 0 {
            return None;
        }
        Some(self.invariant_factors.iter().product())
    }
}

/// Computes invariants of Z^generators / rowspace(relations).
pub fn abelian_invariants(generators: usize, relations: &[Vec<i128>]) -> AbelianInvariants {
    debug_assert!(relations.iter().all(|r| r.len() == generators));
    let diag = smith_normal_form(relations.to_vec());
    let nonzero = diag.iter().filter(|&&d| d != 0).count();
    AbelianInvariants {
        free_rank: generators - nonzero,
        invariant_factors: diag
            .iter()
            .filter(|&&d| d > 1)
            .map(|&d| d as u128)
            .collect(),
    }
}
