//! Machine-readable run reports: one JSON document per run plus an
//! aggregate CSV. All numbers pass through a 12-significant-digit
//! canonicalization so reruns with the same config and seed are
//! byte-identical.

use serde::Serialize;

use fairmech::{
    BoundSetP1, BoundSetP2, ConstructionLog, MechanismReport, SandwichReport,
};

/// Round to 12 significant digits; the shortest decimal form of the result
/// is the canonical rendering.
pub fn sig12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        if x == 0.0 {
            0.0
        } else {
            x
        }
    } else {
        format!("{x:.11e}").parse().expect("round-trip")
    }
}

/// Canonical text form of a number for CSV cells.
pub fn fmt_num(x: f64) -> String {
    let v = sig12(x);
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v}")
    }
}

fn opt12(x: Option<f64>) -> Option<f64> {
    x.map(sig12)
}

#[derive(Debug, Serialize)]
pub struct MeasuresOut {
    pub utility_p1: f64,
    pub utility_p2: f64,
    pub secrecy: f64,
    pub rate_p1: f64,
    pub rate_p2: f64,
    pub feasible_p1: bool,
    pub feasible_p2: bool,
}

impl MeasuresOut {
    pub fn from(report: &MechanismReport) -> Self {
        MeasuresOut {
            utility_p1: sig12(report.utility_p1),
            utility_p2: sig12(report.utility_p2),
            secrecy: sig12(report.secrecy),
            rate_p1: sig12(report.rate_p1),
            rate_p2: sig12(report.rate_p2),
            feasible_p1: report.feasible_p1,
            feasible_p2: report.feasible_p2,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct BoundsP1Out {
    pub regime: String,
    pub alpha: Option<f64>,
    pub l1: f64,
    pub l2: f64,
    pub l3: Option<f64>,
    pub l1_prime: Option<f64>,
    pub upper: f64,
    pub best_lower: f64,
    pub usable_lower: f64,
    /// The minus-four constant of the theorem statement is used in `l3`;
    /// the appendix display differs in sign on that term.
    pub l3_sign_note: &'static str,
}

impl BoundsP1Out {
    pub fn from(b: &BoundSetP1) -> Self {
        BoundsP1Out {
            regime: b.regime.as_str().into(),
            alpha: opt12(b.alpha),
            l1: sig12(b.l1),
            l2: sig12(b.l2),
            l3: opt12(b.l3),
            l1_prime: opt12(b.l1_prime),
            upper: sig12(b.upper),
            best_lower: sig12(b.best_lower),
            usable_lower: sig12(b.usable_lower),
            l3_sign_note: "l3 subtracts the 4-bit constant",
        }
    }
}

#[derive(Debug, Serialize)]
pub struct BoundsP2Out {
    pub regime: String,
    pub exact_value: Option<f64>,
    pub l1c: f64,
    pub upper: f64,
    pub threshold: f64,
    pub h_x_given_ts: f64,
}

impl BoundsP2Out {
    pub fn from(b: &BoundSetP2) -> Self {
        BoundsP2Out {
            regime: b.regime.as_str().into(),
            exact_value: opt12(b.exact_value),
            l1c: sig12(b.l1c),
            upper: sig12(b.upper),
            threshold: sig12(b.threshold),
            h_x_given_ts: sig12(b.h_x_ts),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CheckOut {
    pub name: String,
    pub bits: f64,
}

#[derive(Debug, Serialize)]
pub struct ConstructionOut {
    pub design: String,
    pub regime: String,
    pub alpha: Option<f64>,
    pub alpha_exact: Option<String>,
    pub sfrl_achieved: Option<f64>,
    pub sfrl_target: Option<f64>,
    pub lower_bound: f64,
    pub lower_bound_id: String,
    pub measured_utility: f64,
    pub bound_met: bool,
    pub checks: Vec<CheckOut>,
    pub notes: Vec<String>,
}

impl ConstructionOut {
    pub fn from(log: &ConstructionLog) -> Self {
        ConstructionOut {
            design: log.design.clone(),
            regime: log.regime.clone(),
            alpha: opt12(log.alpha),
            alpha_exact: log.alpha_exact.clone(),
            sfrl_achieved: opt12(log.sfrl_achieved),
            sfrl_target: opt12(log.sfrl_target),
            lower_bound: sig12(log.lower_bound),
            lower_bound_id: log.lower_bound_id.clone(),
            measured_utility: sig12(log.measured_utility),
            bound_met: log.bound_met,
            checks: log
                .checks
                .iter()
                .map(|(name, bits)| CheckOut {
                    name: name.clone(),
                    bits: sig12(*bits),
                })
                .collect(),
            notes: log.notes.clone(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SandwichOut {
    pub lower_theory: f64,
    pub lower_constructed: f64,
    pub oracle: f64,
    pub upper_theory: f64,
    pub violations: Vec<String>,
    pub notes: Vec<String>,
}

impl SandwichOut {
    pub fn from(s: &SandwichReport) -> Self {
        SandwichOut {
            lower_theory: sig12(s.lower_theory),
            lower_constructed: sig12(s.lower_constructed),
            oracle: sig12(s.oracle),
            upper_theory: sig12(s.upper_theory),
            violations: s.violations(),
            notes: s.notes.clone(),
        }
    }
}

/// One run = one (problem, rate, design) triple.
#[derive(Debug, Serialize)]
pub struct RunRecord {
    pub schema: &'static str,
    pub problem: String,
    pub design: String,
    pub r: f64,
    pub seed: u64,
    pub arithmetic: String,
    /// `ok`, `regime_error`, or `search_failed`.
    pub status: String,
    pub error: Option<String>,
    pub measures: Option<MeasuresOut>,
    pub bounds_p1: Option<BoundsP1Out>,
    pub bounds_p2: Option<BoundsP2Out>,
    pub construction: Option<ConstructionOut>,
    pub sandwich: Option<SandwichOut>,
}

pub const RUN_SCHEMA: &str = "fairmech.run/1";

/// A row of the aggregate CSV, pre-rendered so sorting and writing are
/// deterministic.
#[derive(Debug, Clone)]
pub struct CsvRow {
    pub r: f64,
    pub design: String,
    pub cells: Vec<String>,
}

pub const CSV_HEADER: &str = "r,design,utility_p1,utility_p2,secrecy,rate_p1,rate_p2,L1,L2,L3,L1_prime,upper,oracle,feasible";

pub fn write_csv(rows: &mut Vec<CsvRow>) -> String {
    rows.sort_by(|a, b| {
        a.r.partial_cmp(&b.r)
            .expect("finite rates")
            .then_with(|| a.design.cmp(&b.design))
    });
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.cells.join(","));
        out.push('\n');
    }
    out
}
