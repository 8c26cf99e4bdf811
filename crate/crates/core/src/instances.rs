//! Small named sources used across the test suites, plus seeded random
//! generators for property checks. All masses are exact rationals.

use num::BigRational;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::alphabet::{Alphabet, AxisSpec, Role};
use crate::pmf::{JointPmf, Mechanism};
use crate::prob::Prob;

type R = BigRational;

fn frac(n: u64, d: u64) -> R {
    R::from_ratio(n, d)
}

/// `S` and `W` independent fair bits, `X = (S, W)`, `T = W`.
///
/// `H(X|S) = 1`, `H(X) = 2`, `H(T|S) = 1`, `I(X,S;T) = 1`, `H(X,S|T) = 1`,
/// `H(T|X,S) = 0`.
pub fn d1() -> JointPmf<R> {
    let axes = vec![
        AxisSpec::new(Role::S, Alphabet::indexed("s", 2)),
        AxisSpec::new(Role::X, Alphabet::new(["00", "01", "10", "11"]).unwrap()),
        AxisSpec::new(Role::T, Alphabet::indexed("t", 2)),
    ];
    JointPmf::from_fn(axes, |idx| {
        let (s, x, t) = (idx[0], idx[1], idx[2]);
        let (xs, xw) = (x / 2, x % 2);
        if xs == s && xw == t {
            frac(1, 4)
        } else {
            frac(0, 1)
        }
    })
    .expect("d1 is normalized")
}

/// `T` uniform on four symbols, `S = T mod 2`, `X = T`.
///
/// `H(X|S) = 1`, `H(X) = 2`, `H(T|S) = 1`, `I(X,S;T) = 2`, `H(X,S|T) = 0`,
/// `H(T|X,S) = 0`, `H(X|T,S) = 0`. The secret is a function of the task.
pub fn d2() -> JointPmf<R> {
    let axes = vec![
        AxisSpec::new(Role::S, Alphabet::indexed("s", 2)),
        AxisSpec::new(Role::X, Alphabet::indexed("x", 4)),
        AxisSpec::new(Role::T, Alphabet::indexed("t", 4)),
    ];
    JointPmf::from_fn(axes, |idx| {
        let (s, x, t) = (idx[0], idx[1], idx[2]);
        if x == t && s == t % 2 {
            frac(1, 4)
        } else {
            frac(0, 1)
        }
    })
    .expect("d2 is normalized")
}

/// `S = X = T`, a single shared fair bit: perfect parity forces zero
/// utility.
pub fn d3() -> JointPmf<R> {
    let axes = vec![
        AxisSpec::new(Role::S, Alphabet::indexed("s", 2)),
        AxisSpec::new(Role::X, Alphabet::indexed("x", 2)),
        AxisSpec::new(Role::T, Alphabet::indexed("t", 2)),
    ];
    JointPmf::from_fn(axes, |idx| {
        if idx[0] == idx[1] && idx[1] == idx[2] {
            frac(1, 2)
        } else {
            frac(0, 1)
        }
    })
    .expect("d3 is normalized")
}

/// `S`, `T`, `N` independent fair bits, `X = (S, T, N)`.
///
/// `H(X|T,S) = 1`, `I(X;T|S) = 1`, `H(T|S,X) = 0`.
pub fn d4() -> JointPmf<R> {
    let axes = vec![
        AxisSpec::new(Role::S, Alphabet::indexed("s", 2)),
        AxisSpec::new(Role::X, Alphabet::indexed("x", 8)),
        AxisSpec::new(Role::T, Alphabet::indexed("t", 2)),
    ];
    JointPmf::from_fn(axes, |idx| {
        let (s, x, t) = (idx[0], idx[1], idx[2]);
        if x / 4 == s && (x / 2) % 2 == t {
            frac(1, 8)
        } else {
            frac(0, 1)
        }
    })
    .expect("d4 is normalized")
}

/// `S`, `T` fair bits and five independent noise bits, `X = (S, T, N1..N5)`.
///
/// `H(X|T,S) = 5`, `I(X;T|S) = 1`, so the guaranteed window of the
/// irrelevant-information problem is empty below `r = 5`.
pub fn d5() -> JointPmf<R> {
    let axes = vec![
        AxisSpec::new(Role::S, Alphabet::indexed("s", 2)),
        AxisSpec::new(Role::X, Alphabet::indexed("x", 128)),
        AxisSpec::new(Role::T, Alphabet::indexed("t", 2)),
    ];
    JointPmf::from_fn(axes, |idx| {
        let (s, x, t) = (idx[0], idx[1], idx[2]);
        if x / 64 == s && (x / 32) % 2 == t {
            frac(1, 128)
        } else {
            frac(0, 1)
        }
    })
    .expect("d5 is normalized")
}

/// Random exact joint over the given axes: integer weights up to `max_num`
/// normalized by their total. At least one cell is positive.
pub fn random_pmf(rng: &mut ChaCha8Rng, axes: Vec<AxisSpec>, max_num: u64) -> JointPmf<R> {
    let len: usize = axes.iter().map(|a| a.alphabet.size()).product();
    loop {
        let weights: Vec<u64> = (0..len).map(|_| rng.random_range(0..=max_num)).collect();
        let total: u64 = weights.iter().sum();
        if total == 0 {
            continue;
        }
        return JointPmf::new(
            axes.clone(),
            weights.iter().map(|&w| frac(w, total)).collect(),
        )
        .expect("weights normalize");
    }
}

/// Random exact source over `(S, X, T)` with each alphabet size drawn from
/// `1..=max_size`.
pub fn random_source(rng: &mut ChaCha8Rng, max_size: usize) -> JointPmf<R> {
    let s = rng.random_range(1..=max_size);
    let x = rng.random_range(1..=max_size);
    let t = rng.random_range(1..=max_size);
    random_pmf(
        rng,
        vec![
            AxisSpec::new(Role::S, Alphabet::indexed("s", s)),
            AxisSpec::new(Role::X, Alphabet::indexed("x", x)),
            AxisSpec::new(Role::T, Alphabet::indexed("t", t)),
        ],
        9,
    )
}

/// Random exact mechanism for a given source, with `n_y` output symbols.
pub fn random_mechanism(rng: &mut ChaCha8Rng, source: &JointPmf<R>, n_y: usize) -> Mechanism<R> {
    let s = source.alphabet(Role::S).expect("has S").clone();
    let x = source.alphabet(Role::X).expect("has X").clone();
    let t = source.alphabet(Role::T).expect("has T").clone();
    let rows = s.size() * x.size() * t.size();
    let mut kernel = Vec::with_capacity(rows * n_y);
    for _ in 0..rows {
        loop {
            let weights: Vec<u64> = (0..n_y).map(|_| rng.random_range(0..=9)).collect();
            let total: u64 = weights.iter().sum();
            if total == 0 {
                continue;
            }
            kernel.extend(weights.iter().map(|&w| frac(w, total)));
            break;
        }
    }
    Mechanism::new(s, x, t, Alphabet::indexed("y", n_y), kernel).expect("rows normalize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{cond_entropy, cond_mutual_information, entropy, mutual_information};
    use rand::SeedableRng;

    #[test]
    fn canonical_source_measures() {
        use Role::{S, T, X};
        let d1 = d1();
        assert_eq!(cond_entropy(&d1, &[X], &[S]).unwrap(), 1.0);
        assert_eq!(entropy(&d1, &[X]).unwrap(), 2.0);
        assert_eq!(cond_entropy(&d1, &[T], &[S]).unwrap(), 1.0);
        assert_eq!(cond_entropy(&d1, &[X, S], &[T]).unwrap(), 1.0);
        assert_eq!(cond_entropy(&d1, &[T], &[X, S]).unwrap(), 0.0);

        let d2 = d2();
        assert_eq!(cond_entropy(&d2, &[X], &[S]).unwrap(), 1.0);
        assert_eq!(mutual_information(&d2, &[X, S], &[T]).unwrap(), 2.0);
        assert_eq!(cond_entropy(&d2, &[X, S], &[T]).unwrap(), 0.0);
        assert_eq!(cond_entropy(&d2, &[X], &[T, S]).unwrap(), 0.0);

        let d4 = d4();
        assert_eq!(cond_entropy(&d4, &[X], &[T, S]).unwrap(), 1.0);
        assert_eq!(
            cond_mutual_information(&d4, &[X], &[T], &[S]).unwrap(),
            1.0
        );
        assert_eq!(cond_entropy(&d4, &[T], &[S, X]).unwrap(), 0.0);

        let d5 = d5();
        assert_eq!(cond_entropy(&d5, &[X], &[T, S]).unwrap(), 5.0);
        assert_eq!(cond_entropy(&d5, &[T], &[S, X]).unwrap(), 0.0);
        assert_eq!(
            cond_mutual_information(&d5, &[X], &[T], &[S]).unwrap(),
            1.0
        );
    }

    #[test]
    fn random_generators_are_reproducible() {
        let mut a = ChaCha8Rng::seed_from_u64(11);
        let mut b = ChaCha8Rng::seed_from_u64(11);
        assert_eq!(random_source(&mut a, 3), random_source(&mut b, 3));
    }
}
