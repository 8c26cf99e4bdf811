//! Inverse-CDF common refinement of a family of conditional distributions.
//!
//! Given conditionals `P(D | col)` for a set of positive-mass conditioning
//! columns, partition `[0, 1)` by the cumulative sums of every column and
//! take the sorted union of all boundaries. Each resulting cell has an exact
//! rational length, lies inside exactly one `D`-interval of every column,
//! and therefore induces a deterministic assignment `cell -> d` per column.
//!
//! This is the construction behind both the functional representation
//! witness and the starting point of the strong-variant coupling search.

use crate::prob::Prob;

/// Conditionals of `D` given the retained (positive-mass) columns.
pub(crate) struct RefinementProblem<P: Prob> {
    /// `P(col)`; strictly positive.
    pub col_mass: Vec<P>,
    /// `cond[col][d] = P(d | col)`; rows sum to one.
    pub cond: Vec<Vec<P>>,
    pub n_d: usize,
}

/// Cells of a coupling: shared masses plus one `d` assignment per column.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct RefinementCells<P: Prob> {
    /// Cell masses; strictly positive, sum to one.
    pub mass: Vec<P>,
    /// `assign[cell][col] = d`.
    pub assign: Vec<Vec<usize>>,
}

impl<P: Prob> RefinementCells<P> {
    pub fn len(&self) -> usize {
        self.mass.len()
    }

    /// Exact consistency check: per column, the cells assigned to each `d`
    /// must carry exactly the conditional mass `P(d | col)`.
    pub fn is_consistent(&self, problem: &RefinementProblem<P>) -> bool {
        for col in 0..problem.cond.len() {
            let mut got = vec![P::zero(); problem.n_d];
            for (cell, mass) in self.mass.iter().enumerate() {
                let d = self.assign[cell][col];
                got[d] = got[d].clone() + mass.clone();
            }
            for d in 0..problem.n_d {
                if P::EXACT {
                    if got[d] != problem.cond[col][d] {
                        return false;
                    }
                } else if (got[d].to_f64() - problem.cond[col][d].to_f64()).abs() > 1e-9 {
                    return false;
                }
            }
        }
        true
    }
}

/// Build the common refinement. `order`, when given, stacks each column's
/// `D`-intervals in that per-column order instead of the global one.
pub(crate) fn inverse_cdf_refinement<P: Prob>(
    problem: &RefinementProblem<P>,
    order: Option<&[Vec<usize>]>,
) -> RefinementCells<P> {
    let n_cols = problem.cond.len();
    let identity: Vec<usize> = (0..problem.n_d).collect();
    let col_order = |col: usize| -> &[usize] {
        match order {
            Some(o) => &o[col],
            None => &identity,
        }
    };

    // Per-column cumulative interval ends, in stacking order, zero-length
    // intervals retained (they are skipped during assignment).
    let mut ends: Vec<Vec<(P, usize)>> = Vec::with_capacity(n_cols);
    let mut boundaries: Vec<P> = vec![P::zero(), P::one()];
    for col in 0..n_cols {
        let mut cum = P::zero();
        let mut per_col = Vec::with_capacity(problem.n_d);
        for &d in col_order(col) {
            cum = cum.clone() + problem.cond[col][d].clone();
            per_col.push((cum.clone(), d));
            boundaries.push(cum.clone());
        }
        ends.push(per_col);
    }
    boundaries.sort_by(|a, b| a.partial_cmp(b).expect("finite masses"));
    boundaries.dedup();
    boundaries.retain(|b| *b >= P::zero() && *b <= P::one());

    let mut mass = Vec::new();
    let mut assign = Vec::new();
    // Per-column cursor into its interval list.
    let mut cursor = vec![0usize; n_cols];
    for w in boundaries.windows(2) {
        let (lo, hi) = (&w[0], &w[1]);
        let len = hi.clone() - lo.clone();
        if len.is_zero() || len < P::zero() {
            continue;
        }
        let mut row = Vec::with_capacity(n_cols);
        for col in 0..n_cols {
            let per_col = &ends[col];
            // First interval whose end lies strictly above the cell's lower
            // edge; zero-length intervals are passed over.
            while cursor[col] + 1 < per_col.len() && per_col[cursor[col]].0 <= *lo {
                cursor[col] += 1;
            }
            row.push(per_col[cursor[col]].1);
        }
        mass.push(len);
        assign.push(row);
    }
    // Cursors advance monotonically with the cells, so reset is not needed:
    // each column was walked once. (Cursors are per-construction state.)
    RefinementCells { mass, assign }
}
