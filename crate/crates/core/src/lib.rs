//! Finite-alphabet toolkit for data representations with perfect demographic
//! parity / perfect privacy (`I(Y;S) = 0`).
//!
//! The crate constructs disclosure mechanisms `P(Y|S,X,T)` from functional
//! representation couplings, evaluates the closed-form utility bounds for
//! the rate-constrained and irrelevant-information-constrained design
//! problems, and brackets the true optima on small instances with a
//! brute-force oracle. All probability mass arithmetic is exact rational by
//! default (`f64` as a fallback mode); information measures are reported in
//! bits.

pub mod alphabet;
pub mod bounds;
pub mod designs;
pub mod error;
pub mod frl;
pub mod instances;
pub mod measure;
pub mod oracle;
pub mod pmf;
pub mod prob;
mod refinement;
pub mod sfrl;

pub use alphabet::{fresh_symbol, Alphabet, AxisSpec, Role};
pub use error::{Error, Result};
pub use bounds::{
    bounds_p1, bounds_p2, dominance, BoundSetP1, BoundSetP2, DominanceReport, IrrelevanceRegime,
    LowerBoundId, RateRegime,
};
pub use designs::{
    applicable_designs, build_p1, build_p2, erase, evaluate, ConstructionLog, DesignId,
    ErasedWitness, MechanismReport,
};
pub use frl::{frl_construct, FrlWitness, WitnessReport};
pub use measure::{
    cond_entropy, cond_mutual_information, entropy, i_measure_atoms, info_measure,
    key_identity_residual, mutual_information, shannon_sum, IMeasureAtom, MeasureKind,
    MeasureQuery,
};
pub use oracle::{
    lp_vertices, oracle_search, sandwich, OracleMethod, OracleOptions, OracleResult, Problem,
    SandwichReport,
};
pub use pmf::{JointPmf, Mechanism};
pub use prob::{dyadic_below, parse_rational, Prob};
pub use sfrl::{
    conditional_sfrl_construct, sfrl_construct, sfrl_excess_bound, SearchBudget, SfrlWitness,
};

/// Exact rational probability value (the default arithmetic mode).
pub type Exact = num::BigRational;

/// Numbers within this tolerance of zero count as zero in float mode.
pub const ZERO_TOL: f64 = 1e-9;
/// Ordering slack used by the four-level sandwich regression.
pub const SANDWICH_TOL: f64 = 1e-6;
/// Feasibility slack the oracle accepts on its constraints.
pub const ORACLE_FEAS_TOL: f64 = 1e-7;
