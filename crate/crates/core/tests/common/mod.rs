//! Independent reference evaluator for information measures.
//!
//! Deliberately built on a different representation (symbol-tuple maps and
//! the entropy-sum identities) than the library's marginal-ratio pipeline,
//! so the two can cross-check each other.

use std::collections::HashMap;

use fairmech::{JointPmf, Prob, Role};

/// Cells of a joint as (symbol tuple, probability), zero cells dropped.
pub fn cells_of<P: Prob>(joint: &JointPmf<P>) -> Vec<(Vec<String>, f64)> {
    let mut out = Vec::new();
    joint.for_each_cell(|idx, p| {
        if !p.is_zero() {
            let labels = idx
                .iter()
                .enumerate()
                .map(|(a, &i)| joint.axes()[a].alphabet.symbol(i).to_string())
                .collect();
            out.push((labels, p.to_f64()));
        }
    });
    out
}

fn axis_positions<P: Prob>(joint: &JointPmf<P>, roles: &[Role]) -> Vec<usize> {
    roles
        .iter()
        .map(|&r| joint.axis_position(r).expect("role present"))
        .collect()
}

fn entropy_of_subset(cells: &[(Vec<String>, f64)], positions: &[usize]) -> f64 {
    let mut groups: HashMap<Vec<&str>, f64> = HashMap::new();
    for (labels, p) in cells {
        let key: Vec<&str> = positions.iter().map(|&a| labels[a].as_str()).collect();
        *groups.entry(key).or_insert(0.0) += p;
    }
    groups
        .values()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}

/// `H(roles)` by direct grouping and summation.
pub fn naive_entropy<P: Prob>(joint: &JointPmf<P>, roles: &[Role]) -> f64 {
    entropy_of_subset(&cells_of(joint), &axis_positions(joint, roles))
}

/// `I(left; right)` via `H(L) + H(R) - H(L,R)`.
pub fn naive_mi<P: Prob>(joint: &JointPmf<P>, left: &[Role], right: &[Role]) -> f64 {
    let lr: Vec<Role> = left.iter().chain(right).copied().collect();
    naive_entropy(joint, left) + naive_entropy(joint, right) - naive_entropy(joint, &lr)
}

/// `I(left; right | given)` via the four-entropy identity.
pub fn naive_cmi<P: Prob>(
    joint: &JointPmf<P>,
    left: &[Role],
    right: &[Role],
    given: &[Role],
) -> f64 {
    let lg: Vec<Role> = left.iter().chain(given).copied().collect();
    let rg: Vec<Role> = right.iter().chain(given).copied().collect();
    let lrg: Vec<Role> = left.iter().chain(right).chain(given).copied().collect();
    naive_entropy(joint, &lg) + naive_entropy(joint, &rg)
        - naive_entropy(joint, given)
        - naive_entropy(joint, &lrg)
}
