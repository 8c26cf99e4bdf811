//! Shannon information measures in bits (log base 2).
//!
//! Every measure is evaluated as `sum_cells p * log2(ratio)` where the ratio
//! of marginal masses is formed in the joint's own value type before the
//! logarithm is taken. In exact mode a ratio that is mathematically one is
//! exactly one, so independence and determinism facts evaluate to a literal
//! `0.0` rather than to a rounding-noise residual.

use crate::alphabet::Role;
use crate::error::{Error, Result};
use crate::pmf::JointPmf;
use crate::prob::Prob;

/// Values of provably nonnegative measures within this band below zero are
/// rounded up to exactly zero (float-mode summation noise).
const NEG_CLAMP: f64 = 1e-9;

fn clamp_nonneg(v: f64) -> f64 {
    if v < 0.0 && v > -NEG_CLAMP {
        0.0
    } else {
        v
    }
}

struct Projector {
    axis_ids: Vec<usize>,
    strides: Vec<usize>,
}

impl Projector {
    fn index<P: Prob>(&self, joint: &JointPmf<P>, flat: usize) -> usize {
        self.axis_ids
            .iter()
            .zip(&self.strides)
            .map(|(&a, s)| joint.digit(flat, a) * s)
            .sum()
    }
}

/// `sum_cells p(cell) * log2( prod(num marginals) / prod(den marginals) )`.
///
/// Subsets are given as role lists; an empty subset contributes a factor of
/// one. Zero-mass cells are skipped (`0 log 0 := 0`), and marginals of
/// positive cells are positive, so no division by zero can occur.
pub fn shannon_sum<P: Prob>(
    joint: &JointPmf<P>,
    numerators: &[&[Role]],
    denominators: &[&[Role]],
) -> Result<f64> {
    let prepare = |subsets: &[&[Role]]| -> Result<Vec<(JointPmf<P>, Projector)>> {
        subsets
            .iter()
            .filter(|roles| !roles.is_empty())
            .map(|roles| {
                let axis_ids = joint.axis_ids(roles)?;
                let marg = joint.marginal(roles)?;
                let mut strides = vec![1usize; axis_ids.len()];
                for i in (0..axis_ids.len().saturating_sub(1)).rev() {
                    strides[i] =
                        strides[i + 1] * joint.axes()[axis_ids[i + 1]].alphabet.size();
                }
                Ok((marg, Projector { axis_ids, strides }))
            })
            .collect()
    };
    let nums = prepare(numerators)?;
    let dens = prepare(denominators)?;

    let mut acc = 0.0f64;
    for (flat, p) in joint.mass().iter().enumerate() {
        if p.is_zero() {
            continue;
        }
        let mut ratio = P::one();
        for (marg, proj) in &nums {
            ratio = ratio * marg.mass()[proj.index(joint, flat)].clone();
        }
        for (marg, proj) in &dens {
            ratio = ratio / marg.mass()[proj.index(joint, flat)].clone();
        }
        acc += p.to_f64() * ratio.to_f64().log2();
    }
    Ok(acc)
}

/// Joint entropy `H(roles)` in bits.
pub fn entropy<P: Prob>(joint: &JointPmf<P>, roles: &[Role]) -> Result<f64> {
    Ok(clamp_nonneg(shannon_sum(joint, &[], &[roles])?))
}

/// Conditional entropy `H(left | given)` in bits.
pub fn cond_entropy<P: Prob>(joint: &JointPmf<P>, left: &[Role], given: &[Role]) -> Result<f64> {
    if given.is_empty() {
        return entropy(joint, left);
    }
    let lg: Vec<Role> = left.iter().chain(given).copied().collect();
    Ok(clamp_nonneg(shannon_sum(joint, &[given], &[&lg])?))
}

/// Mutual information `I(left; right)` in bits.
pub fn mutual_information<P: Prob>(
    joint: &JointPmf<P>,
    left: &[Role],
    right: &[Role],
) -> Result<f64> {
    cond_mutual_information(joint, left, right, &[])
}

/// Conditional mutual information `I(left; right | given)` in bits.
pub fn cond_mutual_information<P: Prob>(
    joint: &JointPmf<P>,
    left: &[Role],
    right: &[Role],
    given: &[Role],
) -> Result<f64> {
    let lg: Vec<Role> = left.iter().chain(given).copied().collect();
    let rg: Vec<Role> = right.iter().chain(given).copied().collect();
    let lrg: Vec<Role> = left.iter().chain(right).chain(given).copied().collect();
    let value = if given.is_empty() {
        shannon_sum(joint, &[&lrg], &[&lg, &rg])?
    } else {
        shannon_sum(joint, &[&lrg, given], &[&lg, &rg])?
    };
    Ok(clamp_nonneg(value))
}

/// Which Shannon measure a [`MeasureQuery`] requests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureKind {
    Entropy,
    ConditionalEntropy,
    MutualInformation,
    ConditionalMutualInformation,
}

/// Uniform access to every `H(.)`, `I(.;.)`, `I(.;.|.)` used anywhere in the
/// bound formulas. `left`, `right`, `given` are disjoint role sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasureQuery {
    pub kind: MeasureKind,
    pub left: Vec<Role>,
    pub right: Vec<Role>,
    pub given: Vec<Role>,
}

impl MeasureQuery {
    pub fn entropy(left: impl Into<Vec<Role>>) -> Self {
        MeasureQuery {
            kind: MeasureKind::Entropy,
            left: left.into(),
            right: Vec::new(),
            given: Vec::new(),
        }
    }

    pub fn conditional_entropy(left: impl Into<Vec<Role>>, given: impl Into<Vec<Role>>) -> Self {
        MeasureQuery {
            kind: MeasureKind::ConditionalEntropy,
            left: left.into(),
            right: Vec::new(),
            given: given.into(),
        }
    }

    pub fn mutual_information(left: impl Into<Vec<Role>>, right: impl Into<Vec<Role>>) -> Self {
        MeasureQuery {
            kind: MeasureKind::MutualInformation,
            left: left.into(),
            right: right.into(),
            given: Vec::new(),
        }
    }

    pub fn conditional_mutual_information(
        left: impl Into<Vec<Role>>,
        right: impl Into<Vec<Role>>,
        given: impl Into<Vec<Role>>,
    ) -> Self {
        MeasureQuery {
            kind: MeasureKind::ConditionalMutualInformation,
            left: left.into(),
            right: right.into(),
            given: given.into(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.left.is_empty() {
            return Err(Error::InvalidQuery("left role set is empty".into()));
        }
        let needs_right = matches!(
            self.kind,
            MeasureKind::MutualInformation | MeasureKind::ConditionalMutualInformation
        );
        if needs_right && self.right.is_empty() {
            return Err(Error::InvalidQuery("right role set is empty".into()));
        }
        if !needs_right && !self.right.is_empty() {
            return Err(Error::InvalidQuery(
                "entropy queries take no right role set".into(),
            ));
        }
        let allows_given = matches!(
            self.kind,
            MeasureKind::ConditionalEntropy | MeasureKind::ConditionalMutualInformation
        );
        if !allows_given && !self.given.is_empty() {
            return Err(Error::InvalidQuery(
                "unconditional queries take no given set".into(),
            ));
        }
        let mut seen: Vec<Role> = Vec::new();
        for r in self.left.iter().chain(&self.right).chain(&self.given) {
            if seen.contains(r) {
                return Err(Error::InvalidQuery(format!(
                    "role {r} appears in more than one set"
                )));
            }
            seen.push(*r);
        }
        Ok(())
    }
}

/// Evaluate a [`MeasureQuery`] on a joint distribution. Deterministic;
/// returns bits.
pub fn info_measure<P: Prob>(joint: &JointPmf<P>, query: &MeasureQuery) -> Result<f64> {
    query.validate()?;
    match query.kind {
        MeasureKind::Entropy => entropy(joint, &query.left),
        MeasureKind::ConditionalEntropy => cond_entropy(joint, &query.left, &query.given),
        MeasureKind::MutualInformation => mutual_information(joint, &query.left, &query.right),
        MeasureKind::ConditionalMutualInformation => {
            cond_mutual_information(joint, &query.left, &query.right, &query.given)
        }
    }
}

/// Absolute residual of the utility expansion
/// `I(Y;T) = I(X,S;Y) + H(T|X,S) - H(T|Y,X,S) - I(X,S;Y|T)`
/// evaluated on a joint over `(S, X, T, Y)`.
///
/// The five terms are combined cell by cell, so in exact mode the marginal
/// ratios cancel to exactly one and the residual is a literal zero. A nonzero
/// value indicates a defect in the marginalization pipeline, not in the
/// distribution.
pub fn key_identity_residual<P: Prob>(joint: &JointPmf<P>) -> Result<f64> {
    use Role::{S, T, X, Y};
    for role in [S, X, T, Y] {
        joint.axis_position(role)?;
    }
    let numerators: &[&[Role]] = &[
        &[Y, T],
        &[X, S],
        &[Y],
        &[X, S, T],
        &[X, S, Y],
        &[X, S, T, Y],
        &[T],
    ];
    let denominators: &[&[Role]] = &[
        &[Y],
        &[T],
        &[X, S, Y],
        &[X, S],
        &[X, S, T, Y],
        &[X, S, T],
        &[Y, T],
    ];
    Ok(shannon_sum(joint, numerators, denominators)?.abs())
}

/// One signed cell of the information diagram.
#[derive(Debug, Clone, PartialEq)]
pub struct IMeasureAtom {
    /// The variables whose regions contain this atom.
    pub members: Vec<Role>,
    /// Signed measure of the atom in bits.
    pub value: f64,
}

/// Signed information-diagram atoms for a joint over 2..=4 variables,
/// computed by inclusion-exclusion over joint entropies.
///
/// Atoms are returned for every nonempty subset `A` of the axes, ordered by
/// subset size and then by axis order; the atom for `A` is the measure of
/// the region inside every variable of `A` and outside all others.
pub fn i_measure_atoms<P: Prob>(joint: &JointPmf<P>) -> Result<Vec<IMeasureAtom>> {
    let roles = joint.roles();
    let n = roles.len();
    if !(2..=4).contains(&n) {
        return Err(Error::TooManyAxes(n));
    }
    let full = (1usize << n) - 1;
    // Joint entropy of every nonempty subset of the axes.
    let mut h = vec![0.0f64; 1 << n];
    for mask in 1..=full {
        let subset: Vec<Role> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| roles[i]).collect();
        h[mask] = entropy(joint, &subset)?;
    }
    let mut atoms = Vec::with_capacity(full);
    let mut masks: Vec<usize> = (1..=full).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    for mask in masks {
        let outside = full & !mask;
        // mu(inside A, outside rest) = -sum_{B subseteq A} (-1)^{|B|} H(B u A^c)
        let mut value = 0.0f64;
        let mut b = mask;
        loop {
            let sign = if b.count_ones() % 2 == 0 { -1.0 } else { 1.0 };
            let set = b | outside;
            value += sign * if set == 0 { 0.0 } else { h[set] };
            if b == 0 {
                break;
            }
            b = (b - 1) & mask;
        }
        let members: Vec<Role> = (0..n)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| roles[i])
            .collect();
        atoms.push(IMeasureAtom { members, value });
    }
    Ok(atoms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::{Alphabet, AxisSpec};
    use num::BigRational;

    type R = BigRational;

    fn frac(n: u64, d: u64) -> R {
        R::from_ratio(n, d)
    }

    fn fair_bit(role: Role) -> JointPmf<R> {
        JointPmf::new(
            vec![AxisSpec::new(role, Alphabet::indexed("b", 2))],
            vec![frac(1, 2), frac(1, 2)],
        )
        .unwrap()
    }

    fn two_independent_bits() -> JointPmf<R> {
        JointPmf::from_fn(
            vec![
                AxisSpec::new(Role::S, Alphabet::indexed("s", 2)),
                AxisSpec::new(Role::T, Alphabet::indexed("t", 2)),
            ],
            |_| frac(1, 4),
        )
        .unwrap()
    }

    fn copied_bit() -> JointPmf<R> {
        JointPmf::from_fn(
            vec![
                AxisSpec::new(Role::S, Alphabet::indexed("s", 2)),
                AxisSpec::new(Role::T, Alphabet::indexed("t", 2)),
            ],
            |idx| if idx[0] == idx[1] { frac(1, 2) } else { frac(0, 1) },
        )
        .unwrap()
    }

    #[test]
    fn fair_bit_entropy_is_one() {
        let j = fair_bit(Role::S);
        assert_eq!(entropy(&j, &[Role::S]).unwrap(), 1.0);
    }

    #[test]
    fn independence_gives_exact_zero_mi() {
        let j = two_independent_bits();
        assert_eq!(mutual_information(&j, &[Role::S], &[Role::T]).unwrap(), 0.0);
    }

    #[test]
    fn copy_gives_exact_one_bit() {
        let j = copied_bit();
        assert_eq!(mutual_information(&j, &[Role::S], &[Role::T]).unwrap(), 1.0);
        assert_eq!(cond_entropy(&j, &[Role::T], &[Role::S]).unwrap(), 0.0);
    }

    #[test]
    fn query_validation_catches_overlap_and_unknown_axes() {
        let j = two_independent_bits();
        let q = MeasureQuery::mutual_information(vec![Role::S], vec![Role::S]);
        assert!(matches!(info_measure(&j, &q), Err(Error::InvalidQuery(_))));
        let q = MeasureQuery::entropy(vec![Role::X]);
        assert!(matches!(info_measure(&j, &q), Err(Error::UnknownAxis(Role::X))));
    }

    #[test]
    fn atoms_of_independent_bits() {
        let j = two_independent_bits();
        let atoms = i_measure_atoms(&j).unwrap();
        // (H(S|T), H(T|S), I(S;T)) = (1, 1, 0)
        assert_eq!(atoms.len(), 3);
        assert_eq!(atoms[0].value, 1.0);
        assert_eq!(atoms[1].value, 1.0);
        assert_eq!(atoms[2].value, 0.0);
    }

    #[test]
    fn atoms_of_copied_bit() {
        let atoms = i_measure_atoms(&copied_bit()).unwrap();
        assert_eq!(atoms[0].value, 0.0);
        assert_eq!(atoms[1].value, 0.0);
        assert_eq!(atoms[2].value, 1.0);
    }

    #[test]
    fn atom_regions_sum_to_entropies() {
        // Random-ish 3-variable joint with denominator 20.
        let weights = [3u64, 1, 0, 2, 4, 1, 5, 4];
        let j = JointPmf::from_fn(
            vec![
                AxisSpec::new(Role::S, Alphabet::indexed("s", 2)),
                AxisSpec::new(Role::X, Alphabet::indexed("x", 2)),
                AxisSpec::new(Role::T, Alphabet::indexed("t", 2)),
            ],
            |idx| frac(weights[idx[0] * 4 + idx[1] * 2 + idx[2]], 20),
        )
        .unwrap();
        let atoms = i_measure_atoms(&j).unwrap();
        for (i, role) in [Role::S, Role::X, Role::T].into_iter().enumerate() {
            let region: f64 = atoms
                .iter()
                .filter(|a| a.members.contains(&role))
                .map(|a| a.value)
                .sum();
            let h = entropy(&j, &[role]).unwrap();
            assert!((region - h).abs() < 1e-12, "axis {i}: {region} vs {h}");
        }
    }

    #[test]
    fn diagram_rejects_one_and_five_axes() {
        let j = fair_bit(Role::S);
        assert!(matches!(i_measure_atoms(&j), Err(Error::TooManyAxes(1))));
    }

    #[test]
    fn chain_identity_residual_is_exactly_zero() {
        let weights: [u64; 16] = [3, 1, 0, 2, 4, 1, 5, 4, 2, 2, 0, 7, 1, 3, 6, 1];
        let j = JointPmf::from_fn(
            vec![
                AxisSpec::new(Role::S, Alphabet::indexed("s", 2)),
                AxisSpec::new(Role::X, Alphabet::indexed("x", 2)),
                AxisSpec::new(Role::T, Alphabet::indexed("t", 2)),
                AxisSpec::new(Role::Y, Alphabet::indexed("y", 2)),
            ],
            |idx| {
                frac(
                    weights[idx[0] * 8 + idx[1] * 4 + idx[2] * 2 + idx[3]],
                    42,
                )
            },
        )
        .unwrap();
        assert_eq!(key_identity_residual(&j).unwrap(), 0.0);
        assert!(key_identity_residual(&j.to_f64()).unwrap() < 1e-9);
    }

    #[test]
    fn measures_invariant_under_permutation_and_relabeling() {
        let weights = [3u64, 1, 0, 2, 4, 1, 5, 4];
        let j = JointPmf::from_fn(
            vec![
                AxisSpec::new(Role::S, Alphabet::indexed("s", 2)),
                AxisSpec::new(Role::X, Alphabet::indexed("x", 2)),
                AxisSpec::new(Role::T, Alphabet::indexed("t", 2)),
            ],
            |idx| frac(weights[idx[0] * 4 + idx[1] * 2 + idx[2]], 20),
        )
        .unwrap();
        let relabeled = j
            .relabeled(Role::X, Alphabet::new(["left", "right"]).unwrap())
            .unwrap();
        assert_eq!(
            mutual_information(&j, &[Role::X, Role::S], &[Role::T]).unwrap(),
            mutual_information(&relabeled, &[Role::X, Role::S], &[Role::T]).unwrap()
        );
        // Permuting axes reorders the float summation; equality holds to
        // within an ulp-scale tolerance.
        let permuted = j.permuted(&[Role::T, Role::S, Role::X]).unwrap();
        for (a, b) in [
            (
                mutual_information(&j, &[Role::X, Role::S], &[Role::T]).unwrap(),
                mutual_information(&permuted, &[Role::X, Role::S], &[Role::T]).unwrap(),
            ),
            (
                cond_entropy(&j, &[Role::X], &[Role::S]).unwrap(),
                cond_entropy(&permuted, &[Role::X], &[Role::S]).unwrap(),
            ),
        ] {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }
}
