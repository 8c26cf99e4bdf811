//! Experiment configuration: a JSON config file, command-line overrides,
//! and the resolved settings a run executes with.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arithmetic {
    Exact,
    Float,
}

impl Arithmetic {
    pub fn as_str(&self) -> &'static str {
        match self {
            Arithmetic::Exact => "exact",
            Arithmetic::Float => "float",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemChoice {
    P1,
    P2,
    Both,
}

impl ProblemChoice {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        match text.to_ascii_lowercase().as_str() {
            "p1" => Ok(ProblemChoice::P1),
            "p2" => Ok(ProblemChoice::P2),
            "both" => Ok(ProblemChoice::Both),
            other => Err(CliError::Config(format!(
                "problem must be p1, p2, or both, got {other:?}"
            ))),
        }
    }
}

/// Rate list: explicit values or an inclusive grid.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum RatesSpec {
    List(Vec<f64>),
    Grid { min: f64, max: f64, steps: usize },
}

#[derive(Debug, Clone, Deserialize)]
struct OracleSpec {
    #[serde(default = "default_true")]
    enabled: bool,
    #[serde(default = "default_budget")]
    budget: usize,
    #[serde(default)]
    seed: u64,
}

fn default_true() -> bool {
    true
}

fn default_budget() -> usize {
    20_000
}

/// The config file schema.
#[derive(Debug, Clone, Deserialize)]
struct ConfigDoc {
    source: Option<String>,
    problem: Option<String>,
    rates: Option<RatesSpec>,
    designs: Option<Vec<String>>,
    oracle: Option<OracleSpec>,
    arithmetic: Option<String>,
    output: Option<String>,
}

/// Fully resolved settings for one invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub source: PathBuf,
    pub problem: ProblemChoice,
    pub rates: Vec<f64>,
    /// None means: every design applicable in the rate's regime.
    pub designs: Option<Vec<String>>,
    pub oracle_enabled: bool,
    pub oracle_budget: usize,
    pub seed: u64,
    pub arithmetic: Arithmetic,
    pub output: PathBuf,
}

/// Command-line override set (clap fills this).
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub source: Option<PathBuf>,
    pub problem: Option<String>,
    pub rates: Vec<f64>,
    pub rate_grid: Option<String>,
    pub designs: Vec<String>,
    pub oracle: bool,
    pub oracle_budget: Option<usize>,
    pub seed: Option<u64>,
    pub exact: bool,
    pub float: bool,
    pub out: Option<PathBuf>,
}

fn expand_rates(spec: &RatesSpec) -> Result<Vec<f64>, CliError> {
    let rates = match spec {
        RatesSpec::List(v) => v.clone(),
        RatesSpec::Grid { min, max, steps } => {
            if *steps < 1 {
                return Err(CliError::Config("rate grid needs steps >= 1".into()));
            }
            if *steps == 1 {
                vec![*min]
            } else {
                (0..*steps)
                    .map(|i| min + (max - min) * i as f64 / (*steps as f64 - 1.0))
                    .collect()
            }
        }
    };
    if rates.is_empty() {
        return Err(CliError::Config("no rates requested".into()));
    }
    if rates.iter().any(|r| !r.is_finite() || *r < 0.0) {
        return Err(CliError::Config("rates must be finite and nonnegative".into()));
    }
    Ok(rates)
}

fn parse_grid_flag(text: &str) -> Result<RatesSpec, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Config(format!(
            "rate grid must be MIN:MAX:STEPS, got {text:?}"
        )));
    }
    let min: f64 = parts[0]
        .parse()
        .map_err(|_| CliError::Config(format!("bad grid minimum {:?}", parts[0])))?;
    let max: f64 = parts[1]
        .parse()
        .map_err(|_| CliError::Config(format!("bad grid maximum {:?}", parts[1])))?;
    let steps: usize = parts[2]
        .parse()
        .map_err(|_| CliError::Config(format!("bad grid step count {:?}", parts[2])))?;
    Ok(RatesSpec::Grid { min, max, steps })
}

/// Merge the optional config file with command-line overrides.
pub fn resolve(config_path: Option<&Path>, over: &Overrides) -> Result<RunConfig, CliError> {
    let doc: ConfigDoc = match config_path {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("bad config {}: {e}", path.display())))?
        }
        None => ConfigDoc {
            source: None,
            problem: None,
            rates: None,
            designs: None,
            oracle: None,
            arithmetic: None,
            output: None,
        },
    };

    if over.exact && over.float {
        return Err(CliError::Config("--exact and --float are exclusive".into()));
    }
    let arithmetic = if over.exact {
        Arithmetic::Exact
    } else if over.float {
        Arithmetic::Float
    } else {
        match doc.arithmetic.as_deref() {
            None | Some("exact") => Arithmetic::Exact,
            Some("float") => Arithmetic::Float,
            Some(other) => {
                return Err(CliError::Config(format!(
                    "arithmetic must be exact or float, got {other:?}"
                )))
            }
        }
    };

    let source = over
        .source
        .clone()
        .or_else(|| doc.source.as_ref().map(PathBuf::from))
        .ok_or_else(|| CliError::Config("no source file given (--source or config)".into()))?;

    let problem = match (&over.problem, &doc.problem) {
        (Some(p), _) => ProblemChoice::parse(p)?,
        (None, Some(p)) => ProblemChoice::parse(p)?,
        (None, None) => ProblemChoice::P1,
    };

    let rates = if !over.rates.is_empty() {
        expand_rates(&RatesSpec::List(over.rates.clone()))?
    } else if let Some(grid) = &over.rate_grid {
        expand_rates(&parse_grid_flag(grid)?)?
    } else if let Some(spec) = &doc.rates {
        expand_rates(spec)?
    } else {
        return Err(CliError::Config(
            "no rates requested (--rate, --rate-grid, or config rates)".into(),
        ));
    };

    let designs = if !over.designs.is_empty() {
        Some(over.designs.clone())
    } else {
        doc.designs.clone()
    };
    if let Some(list) = &designs {
        for d in list {
            let known = fairmech::DesignId::parse(d).is_some() || d.eq_ignore_ascii_case("p2");
            if !known {
                return Err(CliError::Config(format!(
                    "unknown design {d:?} (expected A, B, C, HIGHRATE, or P2)"
                )));
            }
        }
    }

    let (oracle_enabled, oracle_budget, config_seed) = match &doc.oracle {
        Some(o) => (o.enabled, o.budget, o.seed),
        None => (false, default_budget(), 0),
    };
    let oracle_enabled = oracle_enabled || over.oracle || over.oracle_budget.is_some();
    let oracle_budget = over.oracle_budget.unwrap_or(oracle_budget);
    let seed = over.seed.unwrap_or(config_seed);

    let output = over
        .out
        .clone()
        .or_else(|| doc.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));

    Ok(RunConfig {
        source,
        problem,
        rates,
        designs,
        oracle_enabled,
        oracle_budget,
        seed,
        arithmetic,
        output,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_expansion() {
        let spec = RatesSpec::Grid {
            min: 0.2,
            max: 1.0,
            steps: 5,
        };
        let rates = expand_rates(&spec).unwrap();
        assert_eq!(rates.len(), 5);
        assert!((rates[0] - 0.2).abs() < 1e-12);
        assert!((rates[4] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn overrides_beat_config_defaults() {
        let over = Overrides {
            source: Some(PathBuf::from("x.json")),
            rates: vec![0.5],
            float: true,
            seed: Some(9),
            ..Default::default()
        };
        let cfg = resolve(None, &over).unwrap();
        assert_eq!(cfg.arithmetic, Arithmetic::Float);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.rates, vec![0.5]);
    }

    #[test]
    fn negative_rates_are_rejected() {
        let over = Overrides {
            source: Some(PathBuf::from("x.json")),
            rates: vec![-0.5],
            ..Default::default()
        };
        assert!(resolve(None, &over).is_err());
    }
}
