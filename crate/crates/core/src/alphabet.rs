//! Variable roles and finite symbol alphabets.

use std::fmt;

use crate::error::{Error, Result};

/// Which variable of the system an axis carries.
///
/// The ordering of the enum gives a canonical display order; it has no
/// semantic weight beyond determinism of reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    /// Sensitive attribute or secret.
    S,
    /// Useful data.
    X,
    /// Task / target.
    T,
    /// Disclosed representation.
    Y,
    /// Functional-representation auxiliary.
    U,
    /// Erased auxiliary.
    UPrime,
    /// Second-stage representation component.
    YPrime,
    /// Coupling output of a strong functional representation.
    Z,
    /// Side variable of a conditional construction.
    V,
    /// Generic helper variable.
    W,
    /// Noise component.
    N,
    /// Numbered scratch variable.
    Aux(u8),
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::S => write!(f, "S"),
            Role::X => write!(f, "X"),
            Role::T => write!(f, "T"),
            Role::Y => write!(f, "Y"),
            Role::U => write!(f, "U"),
            Role::UPrime => write!(f, "U'"),
            Role::YPrime => write!(f, "Y'"),
            Role::Z => write!(f, "Z"),
            Role::V => write!(f, "V"),
            Role::W => write!(f, "W"),
            Role::N => write!(f, "N"),
            Role::Aux(k) => write!(f, "A{k}"),
        }
    }
}

/// Ordered set of distinct symbol labels.
///
/// The order is fixed and total; the inverse-CDF constructions depend on it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new<I, S>(symbols: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(Error::Invalid("alphabet must be nonempty".into()));
        }
        for (i, a) in symbols.iter().enumerate() {
            if symbols[..i].contains(a) {
                return Err(Error::Invalid(format!("duplicate symbol {a:?} in alphabet")));
            }
        }
        Ok(Alphabet { symbols })
    }

    /// `"0", "1", ..., `n-1`` with a common prefix, e.g. `Alphabet::indexed("t", 4)`.
    pub fn indexed(prefix: &str, n: usize) -> Self {
        Alphabet::new((0..n).map(|i| format!("{prefix}{i}"))).expect("indexed labels are distinct")
    }

    pub fn size(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn symbol(&self, idx: usize) -> &str {
        &self.symbols[idx]
    }

    pub fn position(&self, symbol: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == symbol)
    }

    pub fn contains(&self, symbol: &str) -> bool {
        self.position(symbol).is_some()
    }
}

/// A named axis of a joint distribution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxisSpec {
    pub role: Role,
    pub alphabet: Alphabet,
}

impl AxisSpec {
    pub fn new(role: Role, alphabet: Alphabet) -> Self {
        AxisSpec { role, alphabet }
    }
}

/// A symbol not present in any of the given alphabets, built by suffixing a
/// reserved marker onto `base` until it is fresh.
pub fn fresh_symbol(base: &str, taken: &[&Alphabet]) -> String {
    let mut candidate = base.to_string();
    while taken.iter().any(|a| a.contains(&candidate)) {
        candidate.push('#');
    }
    candidate
}
