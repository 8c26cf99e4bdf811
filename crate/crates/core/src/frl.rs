//! Constructive functional representation: given a conditioning group `C`
//! and a data group `D` jointly distributed, produce `U` with
//! `I(U;C) = 0` and `H(D|U,C) = 0`, together with the coupling `P(U|C,D)`
//! and the deterministic table `f(u,c) = d`.
//!
//! The construction partitions `[0,1)` by the conditional CDF of `D` given
//! each `c` (symbols stacked in the fixed alphabet order) and takes the
//! common refinement of all partitions as the alphabet of `U`. Everything is
//! exact in rational arithmetic, so the witness guarantees are equalities,
//! not approximations.

use crate::alphabet::{Alphabet, AxisSpec, Role};
use crate::error::{Error, Result};
use crate::measure::{cond_entropy, cond_mutual_information, mutual_information};
use crate::pmf::JointPmf;
use crate::prob::Prob;
use crate::refinement::{inverse_cdf_refinement, RefinementCells, RefinementProblem};

/// Indexing of a group of axes inside a marginal: flat index over the
/// product of the group's alphabets, in the marginal's axis order.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct AxisGroup {
    /// Positions of the group's axes within the host joint.
    pub positions: Vec<usize>,
    pub sizes: Vec<usize>,
}

impl AxisGroup {
    pub fn new(host: &JointPmf<impl Prob>, roles: &[Role]) -> Result<Self> {
        let positions = host.axis_ids(roles)?;
        let sizes = positions
            .iter()
            .map(|&a| host.axes()[a].alphabet.size())
            .collect();
        Ok(AxisGroup { positions, sizes })
    }

    pub fn product(&self) -> usize {
        self.sizes.iter().product::<usize>().max(1)
    }

    /// Flat group index of a full cell multi-index of the host joint.
    pub fn flat_of_cell(&self, idx: &[usize]) -> usize {
        let mut out = 0usize;
        for (k, &a) in self.positions.iter().enumerate() {
            out = out * self.sizes[k] + idx[a];
        }
        out
    }
}

/// Certificates measured on the coupling a witness induces.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessReport {
    /// `I(U;C)` (or `I(Z;C,V)` for conditional witnesses); zero on a valid
    /// witness, exactly so in exact mode.
    pub independence_residual: f64,
    /// `H(D|U,C)` (or `H(D|Z,C,V)`); zero on a valid witness.
    pub determinism_residual: f64,
    /// `I(U;D)`: how much the auxiliary reveals about the data.
    pub data_leakage: f64,
    /// `H(D|C)`: the ceiling the lemma puts on `data_leakage`.
    pub leakage_cap: f64,
    /// `I(C;U|D)` (resp. `I(C;Z|D,V)`): the excess the strong variant
    /// bounds by `log2(I+1)+4`.
    pub excess: f64,
}

/// Output of the functional representation construction.
#[derive(Debug, Clone, PartialEq)]
pub struct FrlWitness<P: Prob> {
    /// Axes of the `(C, D)` marginal the witness was built from, in the
    /// source joint's order.
    cd_axes: Vec<AxisSpec>,
    c_roles: Vec<Role>,
    d_roles: Vec<Role>,
    u_axis: AxisSpec,
    /// Marginal of `U`: the exact interval length of each refinement cell.
    p_u: Vec<P>,
    /// `map_f[u][c_flat] = d_flat`; rows for zero-mass `c` default to 0.
    map_f: Vec<Vec<usize>>,
    /// `coupling[c_flat * n_d + d_flat]` is the row `P(U | c, d)`.
    coupling: Vec<Vec<P>>,
    n_c: usize,
    n_d: usize,
}

/// Build the functional representation witness for `D` given `C` on the
/// `(C, D)` marginal of `joint`. Zero-mass conditioning symbols are dropped
/// before partitioning; the new variable is labelled with `u_role`.
pub fn frl_construct<P: Prob>(
    joint: &JointPmf<P>,
    c_roles: &[Role],
    d_roles: &[Role],
    u_role: Role,
) -> Result<FrlWitness<P>> {
    build_witness(joint, c_roles, d_roles, u_role, None)
}

/// Shared core: optionally stack each column's intervals in a custom order
/// (used by the strong-variant search restarts; `None` is the fixed
/// alphabet order of the plain construction).
pub(crate) fn build_witness<P: Prob>(
    joint: &JointPmf<P>,
    c_roles: &[Role],
    d_roles: &[Role],
    u_role: Role,
    stack_order: Option<&[Vec<usize>]>,
) -> Result<FrlWitness<P>> {
    if c_roles.is_empty() || d_roles.is_empty() {
        return Err(Error::InvalidQuery(
            "conditioning and data role groups must be nonempty".into(),
        ));
    }
    for c in c_roles {
        if d_roles.contains(c) {
            return Err(Error::InvalidQuery(format!(
                "role {c} is in both the conditioning and data groups"
            )));
        }
    }
    let all: Vec<Role> = c_roles.iter().chain(d_roles).copied().collect();
    let cd = joint.marginal(&all)?;
    let c_group = AxisGroup::new(&cd, c_roles)?;
    let d_group = AxisGroup::new(&cd, d_roles)?;
    let n_c = c_group.product();
    let n_d = d_group.product();

    // P(c, d) over flat group indices.
    let mut mass_cd = vec![vec![P::zero(); n_d]; n_c];
    cd.for_each_cell(|idx, p| {
        if !p.is_zero() {
            let c = c_group.flat_of_cell(idx);
            let d = d_group.flat_of_cell(idx);
            mass_cd[c][d] = mass_cd[c][d].clone() + p.clone();
        }
    });

    let mut kept: Vec<usize> = Vec::new();
    let mut problem = RefinementProblem {
        col_mass: Vec::new(),
        cond: Vec::new(),
        n_d,
    };
    for c in 0..n_c {
        let mut total = P::zero();
        for d in 0..n_d {
            total = total + mass_cd[c][d].clone();
        }
        if total.is_zero() {
            continue;
        }
        let cond: Vec<P> = (0..n_d)
            .map(|d| mass_cd[c][d].clone() / total.clone())
            .collect();
        if cond.iter().all(|p| p.is_zero()) {
            return Err(Error::DegenerateConditional(format!("column {c}")));
        }
        kept.push(c);
        problem.col_mass.push(total);
        problem.cond.push(cond);
    }
    if kept.is_empty() {
        return Err(Error::DegenerateConditional(
            "no conditioning symbol has mass".into(),
        ));
    }

    let cells = inverse_cdf_refinement(&problem, stack_order);
    debug_assert!(cells.is_consistent(&problem));
    Ok(witness_from_cells(
        &cd, c_roles, d_roles, u_role, &kept, &problem, &cells,
    ))
}

/// Assemble a witness from refinement cells (also used by the strong
/// variant after its coupling search).
pub(crate) fn witness_from_cells<P: Prob>(
    cd: &JointPmf<P>,
    c_roles: &[Role],
    d_roles: &[Role],
    u_role: Role,
    kept_cols: &[usize],
    problem: &RefinementProblem<P>,
    cells: &RefinementCells<P>,
) -> FrlWitness<P> {
    let c_group = AxisGroup::new(cd, c_roles).expect("roles validated");
    let d_group = AxisGroup::new(cd, d_roles).expect("roles validated");
    let n_c = c_group.product();
    let n_d = d_group.product();
    let n_u = cells.len();

    let mut map_f = vec![vec![0usize; n_c]; n_u];
    for (u, row) in cells.assign.iter().enumerate() {
        for (k, &c) in kept_cols.iter().enumerate() {
            map_f[u][c] = row[k];
        }
    }

    // P(u | c, d) = mass(u) / P(d|c) on the cells assigned to d; rows for
    // unseen (c, d) pairs default to a point mass so they stay stochastic.
    let mut coupling = vec![Vec::new(); n_c * n_d];
    for c in 0..n_c {
        for d in 0..n_d {
            let mut row = vec![P::zero(); n_u];
            let col = kept_cols.iter().position(|&k| k == c);
            let denom = col.map(|k| problem.cond[k][d].clone());
            match denom {
                Some(p_dc) if !p_dc.is_zero() => {
                    for u in 0..n_u {
                        if cells.assign[u][col.expect("present")] == d {
                            row[u] = cells.mass[u].clone() / p_dc.clone();
                        }
                    }
                }
                _ => {
                    row[0] = P::one();
                }
            }
            coupling[c * n_d + d] = row;
        }
    }

    let u_axis = AxisSpec::new(u_role, Alphabet::indexed("u", n_u));
    FrlWitness {
        cd_axes: cd.axes().to_vec(),
        c_roles: c_roles.to_vec(),
        d_roles: d_roles.to_vec(),
        u_axis,
        p_u: cells.mass.clone(),
        map_f,
        coupling,
        n_c,
        n_d,
    }
}

impl<P: Prob> FrlWitness<P> {
    pub fn u_axis(&self) -> &AxisSpec {
        &self.u_axis
    }

    /// Axes of the `(C, D)` marginal the witness was built from.
    pub fn cd_axes(&self) -> &[AxisSpec] {
        &self.cd_axes
    }

    pub fn cell_count(&self) -> usize {
        self.p_u.len()
    }

    /// Exact marginal of `U` (cell interval lengths).
    pub fn p_u(&self) -> &[P] {
        &self.p_u
    }

    pub fn c_roles(&self) -> &[Role] {
        &self.c_roles
    }

    pub fn d_roles(&self) -> &[Role] {
        &self.d_roles
    }

    /// The deterministic map `f(u, c) = d` over flat group indices.
    pub fn assignment(&self, u: usize, c_flat: usize) -> usize {
        self.map_f[u][c_flat]
    }

    pub fn c_product_size(&self) -> usize {
        self.n_c
    }

    pub fn d_product_size(&self) -> usize {
        self.n_d
    }

    /// The coupling row `P(U | c, d)`.
    pub fn coupling_row(&self, c_flat: usize, d_flat: usize) -> &[P] {
        &self.coupling[c_flat * self.n_d + d_flat]
    }

    /// Attach `U` to a joint containing the witness's `(C, D)` axes:
    /// `P(cells, u) = P(cells) * P(u | c, d)`. `U` is conditionally
    /// independent of all other axes given `(C, D)`.
    pub fn extend(&self, joint: &JointPmf<P>) -> Result<JointPmf<P>> {
        let c_group = self.locate(joint, &self.c_roles)?;
        let d_group = self.locate(joint, &self.d_roles)?;
        joint.compose(self.u_axis.clone(), |idx, u| {
            let c = c_group.flat_of_cell(idx);
            let d = d_group.flat_of_cell(idx);
            self.coupling[c * self.n_d + d][u].clone()
        })
    }

    fn locate(&self, joint: &JointPmf<P>, roles: &[Role]) -> Result<AxisGroup> {
        for spec in &self.cd_axes {
            let pos = joint.axis_position(spec.role)?;
            if joint.axes()[pos].alphabet != spec.alphabet {
                return Err(Error::AlphabetMismatch(format!(
                    "axis {} differs from the witness's alphabet",
                    spec.role
                )));
            }
        }
        AxisGroup::new(joint, roles)
    }

    /// Measure the lemma's certificates on the coupling induced over the
    /// `(C, D)` marginal of `joint`.
    pub fn verify(&self, joint: &JointPmf<P>) -> Result<WitnessReport> {
        let all: Vec<Role> = self.c_roles.iter().chain(&self.d_roles).copied().collect();
        let cd = joint.marginal(&all)?;
        let induced = self.extend(&cd)?;
        let u = [self.u_axis.role];
        let uc: Vec<Role> = u.iter().chain(&self.c_roles).copied().collect();
        Ok(WitnessReport {
            independence_residual: mutual_information(&induced, &u, &self.c_roles)?,
            determinism_residual: cond_entropy(&induced, &self.d_roles, &uc)?,
            data_leakage: mutual_information(&induced, &u, &self.d_roles)?,
            leakage_cap: cond_entropy(&induced, &self.d_roles, &self.c_roles)?,
            excess: cond_mutual_information(&induced, &self.c_roles, &u, &self.d_roles)?,
        })
    }

    /// Replace the coupling rows by a perturbed copy (test support for
    /// exercising nonzero residuals).
    pub fn with_coupling_row(&self, c_flat: usize, d_flat: usize, row: Vec<P>) -> Self {
        let mut out = self.clone();
        out.coupling[c_flat * self.n_d + d_flat] = row;
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::BigRational;

    type R = BigRational;

    fn frac(n: u64, d: u64) -> R {
        R::from_ratio(n, d)
    }

    /// C fair bit; P(D|c0) = (1/2, 1/2), P(D|c1) = (1/4, 3/4).
    fn skewed_pair() -> JointPmf<R> {
        JointPmf::new(
            vec![
                AxisSpec::new(Role::V, Alphabet::indexed("c", 2)),
                AxisSpec::new(Role::W, Alphabet::indexed("d", 2)),
            ],
            vec![frac(1, 4), frac(1, 4), frac(1, 8), frac(3, 8)],
        )
        .unwrap()
    }

    #[test]
    fn skewed_pair_produces_the_three_cell_witness() {
        let j = skewed_pair();
        let w = frl_construct(&j, &[Role::V], &[Role::W], Role::U).unwrap();
        assert_eq!(w.p_u(), &[frac(1, 4), frac(1, 4), frac(1, 2)]);
        // f: (u0,c0)->d0 (u0,c1)->d0 (u1,c0)->d0 (u1,c1)->d1 (u2,c0)->d1 (u2,c1)->d1
        assert_eq!(w.assignment(0, 0), 0);
        assert_eq!(w.assignment(0, 1), 0);
        assert_eq!(w.assignment(1, 0), 0);
        assert_eq!(w.assignment(1, 1), 1);
        assert_eq!(w.assignment(2, 0), 1);
        assert_eq!(w.assignment(2, 1), 1);
        // Direct enumeration of the 12-cell joint (U, C, D): independence of
        // U from C and determinism of D given (U, C), both exactly.
        let report = w.verify(&j).unwrap();
        assert_eq!(report.independence_residual, 0.0);
        assert_eq!(report.determinism_residual, 0.0);
        assert!(report.data_leakage <= report.leakage_cap + 1e-9);
    }

    #[test]
    fn deterministic_data_needs_a_single_cell() {
        // C independent of D, D a point mass.
        let j = JointPmf::new(
            vec![
                AxisSpec::new(Role::V, Alphabet::indexed("c", 2)),
                AxisSpec::new(Role::W, Alphabet::indexed("d", 2)),
            ],
            vec![frac(1, 2), frac(0, 1), frac(1, 2), frac(0, 1)],
        )
        .unwrap();
        let w = frl_construct(&j, &[Role::V], &[Role::W], Role::U).unwrap();
        assert_eq!(w.cell_count(), 1);
        let report = w.verify(&j).unwrap();
        assert_eq!(report.independence_residual, 0.0);
        assert_eq!(report.data_leakage, 0.0);
    }

    #[test]
    fn corrupted_coupling_reports_nonzero_residual() {
        let j = skewed_pair();
        let w = frl_construct(&j, &[Role::V], &[Role::W], Role::U).unwrap();
        // Perturb P(U | c1, d1) by 1/8 and renormalize.
        let row = w.coupling_row(1, 1).to_vec();
        let mut bent: Vec<R> = row;
        bent[1] = bent[1].clone() + frac(1, 8);
        let total: R = bent
            .iter()
            .cloned()
            .fold(<R as Prob>::zero(), |a, b| a + b);
        for v in &mut bent {
            *v = v.clone() / total.clone();
        }
        let corrupted = w.with_coupling_row(1, 1, bent);
        let report = corrupted.verify(&j).unwrap();
        assert!(
            report.independence_residual > 0.0 || report.determinism_residual > 0.0,
            "perturbation must break a certificate"
        );
    }

    #[test]
    fn zero_mass_conditioning_rows_are_dropped() {
        let j = JointPmf::new(
            vec![
                AxisSpec::new(Role::V, Alphabet::indexed("c", 3)),
                AxisSpec::new(Role::W, Alphabet::indexed("d", 2)),
            ],
            vec![
                frac(1, 2),
                frac(0, 1),
                frac(0, 1),
                frac(0, 1),
                frac(1, 4),
                frac(1, 4),
            ],
        )
        .unwrap();
        let w = frl_construct(&j, &[Role::V], &[Role::W], Role::U).unwrap();
        let report = w.verify(&j).unwrap();
        assert_eq!(report.independence_residual, 0.0);
        assert_eq!(report.determinism_residual, 0.0);
    }

    #[test]
    fn rejects_overlapping_groups() {
        let j = skewed_pair();
        assert!(frl_construct(&j, &[Role::V], &[Role::V], Role::U).is_err());
    }
}
