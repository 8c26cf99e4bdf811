//! Constructive strong functional representation: produce `Z` independent
//! of the conditioning group (jointly with an optional side group `V`),
//! with the data `D` a deterministic function of `(Z, C, V)` and with small
//! excess leakage `I(C;Z|D,V)`, targeting `log2(I(C;D|V)+1) + 4` bits.
//!
//! A witness lives in the function-coupling polytope: cells with a shared
//! marginal (independence), one `d` assignment per positive-mass `(c,v)`
//! column (determinism), and per-column cell masses reproducing `P(d|c,v)`
//! (consistency). The search starts from the inverse-CDF common refinement,
//! which is always feasible, and improves the excess by mass-preserving
//! swap moves: exchange the assignments of two equal-mass cell slices at a
//! single column. Swaps keep all three invariants, so every visited point
//! is a valid witness and the excess can only go down.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::alphabet::Role;
use crate::error::{Error, Result};
use crate::frl::{witness_from_cells, AxisGroup, FrlWitness, WitnessReport};
use crate::measure::{cond_entropy, cond_mutual_information, mutual_information};
use crate::pmf::JointPmf;
use crate::prob::Prob;
use crate::refinement::{inverse_cdf_refinement, RefinementCells, RefinementProblem};

/// Knobs of the coupling search. `budget` caps the number of candidate-move
/// evaluations across all restarts; the same seed always reproduces the
/// same witness.
#[derive(Debug, Clone, Copy)]
pub struct SearchBudget {
    pub moves: usize,
    pub restarts: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            moves: 10_000,
            restarts: 3,
        }
    }
}

impl SearchBudget {
    pub fn with_moves(moves: usize) -> Self {
        SearchBudget {
            moves,
            ..Default::default()
        }
    }
}

/// Output of the strong construction: an independence/determinism witness
/// plus its measured excess and the bound it was asked to meet.
#[derive(Debug, Clone)]
pub struct SfrlWitness<P: Prob> {
    inner: FrlWitness<P>,
    c_roles: Vec<Role>,
    v_roles: Vec<Role>,
    achieved_excess: f64,
    start_excess: f64,
    target_bound: f64,
}

impl<P: Prob> SfrlWitness<P> {
    pub fn z_axis(&self) -> &crate::alphabet::AxisSpec {
        self.inner.u_axis()
    }

    pub fn cell_count(&self) -> usize {
        self.inner.cell_count()
    }

    pub fn p_z(&self) -> &[P] {
        self.inner.p_u()
    }

    pub fn c_roles(&self) -> &[Role] {
        &self.c_roles
    }

    pub fn v_roles(&self) -> &[Role] {
        &self.v_roles
    }

    pub fn d_roles(&self) -> &[Role] {
        self.inner.d_roles()
    }

    /// `I(C;Z|D,V)` measured on the returned coupling.
    pub fn achieved_excess(&self) -> f64 {
        self.achieved_excess
    }

    /// Excess of the plain refinement the search started from.
    pub fn start_excess(&self) -> f64 {
        self.start_excess
    }

    /// `log2(I(C;D|V)+1) + 4`.
    pub fn target_bound(&self) -> f64 {
        self.target_bound
    }

    pub fn meets_target(&self) -> bool {
        self.achieved_excess <= self.target_bound
    }

    /// The deterministic map `f(z, (c,v)) = d` over flat group indices of
    /// the combined conditioning group.
    pub fn assignment(&self, z: usize, cv_flat: usize) -> usize {
        self.inner.assignment(z, cv_flat)
    }

    /// The coupling row `P(Z | c, v, d)`.
    pub fn coupling_row(&self, cv_flat: usize, d_flat: usize) -> &[P] {
        self.inner.coupling_row(cv_flat, d_flat)
    }

    /// Attach `Z` to a joint containing the witness's axes.
    pub fn extend(&self, joint: &JointPmf<P>) -> Result<JointPmf<P>> {
        self.inner.extend(joint)
    }

    /// Measure the certificates: independence is `I(Z;C,V)`, determinism is
    /// `H(D|Z,C,V)`, excess is `I(C;Z|D,V)`.
    pub fn verify(&self, joint: &JointPmf<P>) -> Result<WitnessReport> {
        let all: Vec<Role> = self
            .c_roles
            .iter()
            .chain(&self.v_roles)
            .chain(self.d_roles())
            .copied()
            .collect();
        let cd = joint.marginal(&all)?;
        let induced = self.inner.extend(&cd)?;
        let z = [self.z_axis().role];
        let cv: Vec<Role> = self.c_roles.iter().chain(&self.v_roles).copied().collect();
        let zcv: Vec<Role> = z.iter().chain(&cv).copied().collect();
        let dv: Vec<Role> = self.d_roles().iter().chain(&self.v_roles).copied().collect();
        Ok(WitnessReport {
            independence_residual: mutual_information(&induced, &z, &cv)?,
            determinism_residual: cond_entropy(&induced, self.d_roles(), &zcv)?,
            data_leakage: mutual_information(&induced, &z, self.d_roles())?,
            leakage_cap: cond_entropy(&induced, self.d_roles(), &cv)?,
            excess: cond_mutual_information(&induced, &self.c_roles, &z, &dv)?,
        })
    }
}

/// `log2(I + 1) + 4` for the requested (conditional) mutual information —
/// the excess-leakage ceiling of the strong construction.
pub fn sfrl_excess_bound<P: Prob>(
    joint: &JointPmf<P>,
    c_roles: &[Role],
    d_roles: &[Role],
    v_roles: &[Role],
) -> Result<f64> {
    let mi = cond_mutual_information(joint, c_roles, d_roles, v_roles)?;
    Ok((mi + 1.0).log2() + 4.0)
}

/// Strong construction without a side group: `Z` independent of `C`,
/// `H(D|Z,C) = 0`, excess `I(C;Z|D)` minimized by local search.
pub fn sfrl_construct<P: Prob>(
    joint: &JointPmf<P>,
    c_roles: &[Role],
    d_roles: &[Role],
    z_role: Role,
    budget: SearchBudget,
    seed: u64,
) -> Result<SfrlWitness<P>> {
    conditional_sfrl_construct(joint, c_roles, d_roles, &[], z_role, budget, seed)
}

/// Conditional strong construction: `Z` independent of `(C,V)` jointly with
/// one shared marginal across all columns, `H(D|Z,C,V) = 0`, and excess
/// `I(C;Z|D,V)` minimized, targeting `log2(I(C;D|V)+1)+4`.
///
/// Returns [`Error::SearchFailed`] when the best coupling found still
/// exceeds the target; the error carries both numbers.
pub fn conditional_sfrl_construct<P: Prob>(
    joint: &JointPmf<P>,
    c_roles: &[Role],
    d_roles: &[Role],
    v_roles: &[Role],
    z_role: Role,
    budget: SearchBudget,
    seed: u64,
) -> Result<SfrlWitness<P>> {
    let cv: Vec<Role> = c_roles.iter().chain(v_roles).copied().collect();
    let target_bound = sfrl_excess_bound(joint, c_roles, d_roles, v_roles)?;

    let all: Vec<Role> = cv.iter().chain(d_roles).copied().collect();
    let cd = joint.marginal(&all)?;
    let cv_group = AxisGroup::new(&cd, &cv)?;
    let d_group = AxisGroup::new(&cd, d_roles)?;
    let v_group = if v_roles.is_empty() {
        None
    } else {
        Some(AxisGroup::new(&cd, v_roles)?)
    };

    // Positive-mass columns and their conditionals, exactly as the plain
    // construction sees them.
    let n_cv = cv_group.product();
    let n_d = d_group.product();
    let mut mass_cd = vec![vec![P::zero(); n_d]; n_cv];
    let mut v_of = vec![0usize; n_cv];
    cd.for_each_cell(|idx, p| {
        if !p.is_zero() {
            let c = cv_group.flat_of_cell(idx);
            let d = d_group.flat_of_cell(idx);
            mass_cd[c][d] = mass_cd[c][d].clone() + p.clone();
            v_of[c] = v_group.as_ref().map_or(0, |g| g.flat_of_cell(idx));
        }
    });
    let mut kept = Vec::new();
    let mut problem = RefinementProblem {
        col_mass: Vec::new(),
        cond: Vec::new(),
        n_d,
    };
    for c in 0..n_cv {
        let mut total = P::zero();
        for d in 0..n_d {
            total = total + mass_cd[c][d].clone();
        }
        if total.is_zero() {
            continue;
        }
        kept.push(c);
        problem
            .cond
            .push((0..n_d).map(|d| mass_cd[c][d].clone() / total.clone()).collect());
        problem.col_mass.push(total);
    }
    if kept.is_empty() {
        return Err(Error::DegenerateConditional(
            "no conditioning symbol has mass".into(),
        ));
    }
    let col_v: Vec<usize> = kept.iter().map(|&c| v_of[c]).collect();

    let searcher = Search::new(&problem, &col_v);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cap = searcher.n_cols * n_d + 2;

    let start = inverse_cdf_refinement(&problem, None);
    while start.len() > cap {
        cap *= 2;
    }
    let start_excess = searcher.excess_of(&start);

    let per_restart = (budget.moves / budget.restarts.max(1)).max(1);
    let mut best = start.clone();
    let mut best_excess = start_excess;
    for restart in 0..budget.restarts.max(1) {
        let cells = if restart == 0 {
            start.clone()
        } else {
            let order: Vec<Vec<usize>> = (0..searcher.n_cols)
                .map(|_| {
                    let mut o: Vec<usize> = (0..n_d).collect();
                    for i in (1..o.len()).rev() {
                        o.swap(i, rng.random_range(0..=i));
                    }
                    o
                })
                .collect();
            inverse_cdf_refinement(&problem, Some(&order))
        };
        if cells.len() > cap {
            continue;
        }
        let (cells, excess) = searcher.descend(cells, cap, per_restart, &mut rng);
        if excess < best_excess - 1e-12 {
            best = cells;
            best_excess = excess;
        }
    }

    // Canonical cell order: lexicographic by assignment row.
    let mut order: Vec<usize> = (0..best.len()).collect();
    order.sort_by(|&a, &b| best.assign[a].cmp(&best.assign[b]));
    let best = RefinementCells {
        mass: order.iter().map(|&i| best.mass[i].clone()).collect(),
        assign: order.iter().map(|&i| best.assign[i].clone()).collect(),
    };
    debug_assert!(best.is_consistent(&problem));

    let inner = witness_from_cells(&cd, &cv, d_roles, z_role, &kept, &problem, &best);
    let mut witness = SfrlWitness {
        inner,
        c_roles: c_roles.to_vec(),
        v_roles: v_roles.to_vec(),
        achieved_excess: 0.0,
        start_excess,
        target_bound,
    };
    witness.achieved_excess = witness.verify(joint)?.excess;
    if witness.meets_target() {
        Ok(witness)
    } else {
        Err(Error::SearchFailed {
            achieved: witness.achieved_excess,
            target: target_bound,
        })
    }
}

/// Local-search machinery over the function-coupling polytope.
///
/// The search objective runs entirely in `f64`: it only ranks candidate
/// moves, while the returned witness's excess is re-measured through the
/// exact pipeline. Cell masses and assignments stay exact throughout.
struct Search {
    n_cols: usize,
    n_v: usize,
    /// `P(c,v)` per column.
    weight: Vec<f64>,
    /// Dense remap of the column's side value.
    v_col: Vec<usize>,
    /// `base[col][d] = P(col) * (log2 P(d,v(col)) - log2 P(d|col))`; the
    /// row-independent part of the excess rate.
    base: Vec<Vec<f64>>,
}

impl Search {
    fn new<P: Prob>(problem: &RefinementProblem<P>, col_v: &[usize]) -> Self {
        let n_cols = problem.cond.len();
        let n_d = problem.n_d;
        let mut v_values: Vec<usize> = col_v.to_vec();
        v_values.sort_unstable();
        v_values.dedup();
        let v_col: Vec<usize> = col_v
            .iter()
            .map(|v| v_values.binary_search(v).expect("present"))
            .collect();
        let n_v = v_values.len();
        let mut p_dv = vec![0.0f64; n_d * n_v];
        for col in 0..n_cols {
            for d in 0..n_d {
                p_dv[d * n_v + v_col[col]] +=
                    problem.col_mass[col].to_f64() * problem.cond[col][d].to_f64();
            }
        }
        let weight: Vec<f64> = problem.col_mass.iter().map(|w| w.to_f64()).collect();
        let base: Vec<Vec<f64>> = (0..n_cols)
            .map(|col| {
                (0..n_d)
                    .map(|d| {
                        let cond = problem.cond[col][d].to_f64();
                        if cond <= 0.0 {
                            // Rows never assign cells to zero-mass symbols.
                            0.0
                        } else {
                            weight[col] * (p_dv[d * n_v + v_col[col]].log2() - cond.log2())
                        }
                    })
                    .collect()
            })
            .collect();
        Search {
            n_cols,
            n_v,
            weight,
            v_col,
            base,
        }
    }

    /// Per-unit-mass excess contribution of a cell with this assignment row:
    /// `g(row) = sum_col P(col) * log2( P(d,v) / (P(d|col) * W(d,v)) )`
    /// where `W(d,v)` sums the weights of the columns this row sends to `d`
    /// at side value `v`. A cell of mass `m` contributes `m * g(row)`, so
    /// merging equal rows never changes the excess. The weighted-log term
    /// over columns groups into `-sum W log2 W` over the row's `(d, v)`
    /// support.
    fn row_rate(&self, row: &[usize]) -> f64 {
        let n_d = self.base[0].len();
        let mut w = vec![0.0f64; n_d * self.n_v];
        let mut acc = 0.0;
        for col in 0..self.n_cols {
            let d = row[col];
            w[d * self.n_v + self.v_col[col]] += self.weight[col];
            acc += self.base[col][d];
        }
        for &mass in &w {
            if mass > 0.0 {
                acc -= mass * mass.log2();
            }
        }
        acc
    }

    fn excess_of<P: Prob>(&self, cells: &RefinementCells<P>) -> f64 {
        cells
            .mass
            .iter()
            .zip(&cells.assign)
            .map(|(m, row)| m.to_f64() * self.row_rate(row))
            .sum()
    }

    /// First-improvement descent with seeded proposals. Returns the final
    /// cells and their excess; consumes at most `budget` move evaluations.
    fn descend<P: Prob>(
        &self,
        mut cells: RefinementCells<P>,
        cap: usize,
        budget: usize,
        rng: &mut ChaCha8Rng,
    ) -> (RefinementCells<P>, f64) {
        let mut rates: Vec<f64> = cells.assign.iter().map(|r| self.row_rate(r)).collect();
        let mut excess: f64 = cells
            .mass
            .iter()
            .zip(&rates)
            .map(|(m, g)| m.to_f64() * g)
            .sum();
        let mut evals = 0usize;
        let mut stall = 0usize;
        let stall_limit = (2 * self.n_cols * cells.len().max(2)).clamp(64, 600);
        while evals < budget && stall < stall_limit && excess > 1e-12 && cells.len() >= 2 {
            let col = rng.random_range(0..self.n_cols);
            let i = rng.random_range(0..cells.len());
            let j = rng.random_range(0..cells.len());
            if i == j || cells.assign[i][col] == cells.assign[j][col] {
                stall += 1;
                continue;
            }
            evals += 1;
            let grows = cells.mass[i] != cells.mass[j];
            if grows && cells.len() + 1 > cap {
                stall += 1;
                continue;
            }
            let mut row_i = cells.assign[i].clone();
            let mut row_j = cells.assign[j].clone();
            row_i[col] = cells.assign[j][col];
            row_j[col] = cells.assign[i][col];
            let g_i = self.row_rate(&row_i);
            let g_j = self.row_rate(&row_j);
            let m = if cells.mass[i] <= cells.mass[j] {
                cells.mass[i].clone()
            } else {
                cells.mass[j].clone()
            };
            let delta =
                m.to_f64() * (g_i + g_j - rates[i] - rates[j]);
            if delta >= -1e-13 {
                stall += 1;
                continue;
            }
            // Apply: the smaller cell swaps entirely, an equal-mass slice
            // of the larger cell swaps with it, and the remainder keeps the
            // larger cell's old row.
            let large = if cells.mass[i] <= cells.mass[j] { j } else { i };
            let leftover = cells.mass[large].clone() - m.clone();
            let leftover_row = cells.assign[large].clone();
            let leftover_rate = rates[large];
            cells.mass[i] = m.clone();
            cells.mass[j] = m;
            cells.assign[i] = row_i;
            cells.assign[j] = row_j;
            rates[i] = g_i;
            rates[j] = g_j;
            if !leftover.is_zero() {
                cells.mass.push(leftover);
                cells.assign.push(leftover_row);
                rates.push(leftover_rate);
            }
            self.merge_duplicates(&mut cells, &mut rates);
            excess = cells
                .mass
                .iter()
                .zip(&rates)
                .map(|(m, g)| m.to_f64() * g)
                .sum();
            stall = 0;
        }
        (cells, excess)
    }

    /// Merge cells with identical assignment rows; excess is linear in the
    /// mass at fixed row, so this is exact.
    fn merge_duplicates<P: Prob>(&self, cells: &mut RefinementCells<P>, rates: &mut Vec<f64>) {
        let mut order: Vec<usize> = (0..cells.len()).collect();
        order.sort_by(|&a, &b| cells.assign[a].cmp(&cells.assign[b]));
        let mut mass = Vec::with_capacity(cells.len());
        let mut assign: Vec<Vec<usize>> = Vec::with_capacity(cells.len());
        let mut new_rates = Vec::with_capacity(cells.len());
        for &k in &order {
            if cells.mass[k].is_zero() {
                continue;
            }
            if let Some(last) = assign.last() {
                if *last == cells.assign[k] {
                    let slot = mass.len() - 1;
                    let merged: P = {
                        let prev: &P = &mass[slot];
                        prev.clone() + cells.mass[k].clone()
                    };
                    mass[slot] = merged;
                    continue;
                }
            }
            assign.push(cells.assign[k].clone());
            mass.push(cells.mass[k].clone());
            new_rates.push(rates[k]);
        }
        cells.mass = mass;
        cells.assign = assign;
        *rates = new_rates;
    }
}
