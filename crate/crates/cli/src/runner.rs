//! Orchestration of the two subcommands: `info` (measure catalog of a
//! source) and `run` (designs, bounds, optional oracle sandwich, reports).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use fairmech::sfrl::SearchBudget;
use fairmech::{
    applicable_designs, bounds_p1, bounds_p2, build_p1, build_p2, cond_entropy,
    cond_mutual_information, entropy, evaluate, i_measure_atoms, mutual_information, sandwich,
    DesignId, Error as CoreError, JointPmf, Prob, Problem, Role, SandwichReport,
};
use num::BigRational;

use crate::config::{Arithmetic, ProblemChoice, RunConfig};
use crate::error::CliError;
use crate::report::{
    fmt_num, sig12, BoundsP1Out, BoundsP2Out, ConstructionOut, CsvRow, MeasuresOut, RunRecord,
    SandwichOut, RUN_SCHEMA,
};
use crate::source_file::parse_source;

/// Produce the measure catalog for `info`.
pub fn cmd_info(source_path: &Path, arithmetic: Arithmetic) -> Result<String, CliError> {
    let text = fs::read_to_string(source_path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", source_path.display())))?;
    match arithmetic {
        Arithmetic::Exact => info_text(&parse_source::<BigRational>(&text)?, arithmetic),
        Arithmetic::Float => info_text(&parse_source::<f64>(&text)?, arithmetic),
    }
}

fn info_text<P: Prob>(source: &JointPmf<P>, arithmetic: Arithmetic) -> Result<String, CliError> {
    use Role::{S, T, X};
    let mut out = String::new();
    let line = |s: String, out: &mut String| {
        out.push_str(&s);
        out.push('\n');
    };
    let axes_desc: Vec<String> = source
        .axes()
        .iter()
        .map(|a| format!("{}({})", a.role, a.alphabet.size()))
        .collect();
    line(format!("axes: {}", axes_desc.join(" ")), &mut out);
    line(format!("arithmetic: {}", arithmetic.as_str()), &mut out);
    line(String::new(), &mut out);

    line("entropies (bits)".into(), &mut out);
    let ent: &[(&str, &[Role])] = &[
        ("H(S)", &[S]),
        ("H(X)", &[X]),
        ("H(T)", &[T]),
        ("H(S,X)", &[S, X]),
        ("H(S,T)", &[S, T]),
        ("H(X,T)", &[X, T]),
        ("H(S,X,T)", &[S, X, T]),
    ];
    for (name, roles) in ent {
        line(format!("  {name} = {}", fmt_num(entropy(source, roles)?)), &mut out);
    }
    let cond: &[(&str, &[Role], &[Role])] = &[
        ("H(X|S)", &[X], &[S]),
        ("H(T|S)", &[T], &[S]),
        ("H(S|T)", &[S], &[T]),
        ("H(T|X,S)", &[T], &[X, S]),
        ("H(X|T,S)", &[X], &[T, S]),
        ("H(X,S|T)", &[X, S], &[T]),
        ("H(X,T|S)", &[X, T], &[S]),
    ];
    for (name, left, given) in cond {
        line(
            format!("  {name} = {}", fmt_num(cond_entropy(source, left, given)?)),
            &mut out,
        );
    }
    line(String::new(), &mut out);

    line("mutual information (bits)".into(), &mut out);
    let mi: &[(&str, &[Role], &[Role])] = &[
        ("I(X;S)", &[X], &[S]),
        ("I(X;T)", &[X], &[T]),
        ("I(S;T)", &[S], &[T]),
        ("I(X,S;T)", &[X, S], &[T]),
    ];
    for (name, left, right) in mi {
        line(
            format!(
                "  {name} = {}",
                fmt_num(mutual_information(source, left, right)?)
            ),
            &mut out,
        );
    }
    let i_xt_s = cond_mutual_information(source, &[X], &[T], &[S])?;
    line(format!("  I(X;T|S) = {}", fmt_num(i_xt_s)), &mut out);
    line(String::new(), &mut out);

    line("information diagram atoms (bits)".into(), &mut out);
    for atom in i_measure_atoms(source)? {
        let members: Vec<String> = atom.members.iter().map(|r| r.to_string()).collect();
        line(
            format!("  [{}] = {}", members.join(","), fmt_num(atom.value)),
            &mut out,
        );
    }
    line(String::new(), &mut out);

    line("regime thresholds (bits)".into(), &mut out);
    line(
        format!("  H(X|S) = {}", fmt_num(cond_entropy(source, &[X], &[S])?)),
        &mut out,
    );
    line(format!("  H(X) = {}", fmt_num(entropy(source, &[X])?)), &mut out);
    line(
        format!("  H(X|T,S) = {}", fmt_num(cond_entropy(source, &[X], &[T, S])?)),
        &mut out,
    );
    line(
        format!("  log2(I(X;T|S)+1)+4 = {}", fmt_num((i_xt_s + 1.0).log2() + 4.0)),
        &mut out,
    );
    Ok(out)
}

/// Execute a sweep; returns the exit code per the contract
/// (0 ok, 3 construction failure, 4 sandwich violation).
pub fn cmd_run(cfg: &RunConfig) -> Result<i32, CliError> {
    let text = fs::read_to_string(&cfg.source)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", cfg.source.display())))?;
    match cfg.arithmetic {
        Arithmetic::Exact => run_sweep(cfg, parse_source::<BigRational>(&text)?),
        Arithmetic::Float => run_sweep(cfg, parse_source::<f64>(&text)?),
    }
}

fn problems(choice: ProblemChoice) -> Vec<Problem> {
    match choice {
        ProblemChoice::P1 => vec![Problem::P1],
        ProblemChoice::P2 => vec![Problem::P2],
        ProblemChoice::Both => vec![Problem::P1, Problem::P2],
    }
}

fn p1_designs<P: Prob>(
    cfg: &RunConfig,
    source: &JointPmf<P>,
    r: f64,
) -> Result<Vec<DesignId>, CliError> {
    match &cfg.designs {
        Some(list) => Ok(list.iter().filter_map(|d| DesignId::parse(d)).collect()),
        None => {
            let bounds = bounds_p1(source, r)?;
            Ok(applicable_designs(bounds.regime))
        }
    }
}

fn run_p2_design(cfg: &RunConfig) -> bool {
    match &cfg.designs {
        Some(list) => list.iter().any(|d| d.eq_ignore_ascii_case("p2")),
        None => true,
    }
}

fn empty_cells(n: usize) -> Vec<String> {
    vec![String::new(); n]
}

fn run_sweep<P: Prob>(cfg: &RunConfig, source: JointPmf<P>) -> Result<i32, CliError> {
    fs::create_dir_all(&cfg.output)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", cfg.output.display())))?;
    let budget = SearchBudget::default();
    let mut rows: Vec<CsvRow> = Vec::new();
    let mut exit = 0i32;
    let mut n_runs = 0usize;

    for &r in &cfg.rates {
        for problem in problems(cfg.problem) {
            let sand: Option<SandwichReport> = if cfg.oracle_enabled {
                let s = sandwich(&source, problem, r, cfg.oracle_budget, cfg.seed)?;
                if !s.violations().is_empty() {
                    exit = exit.max(4);
                    for v in s.violations() {
                        eprintln!("sandwich violation ({} r={}): {v}", problem.as_str(), r);
                    }
                }
                Some(s)
            } else {
                None
            };
            let oracle_cell = sand
                .as_ref()
                .map(|s| fmt_num(s.oracle))
                .unwrap_or_default();

            match problem {
                Problem::P1 => {
                    let bounds = bounds_p1(&source, r)?;
                    let bounds_out = BoundsP1Out::from(&bounds);
                    for design in p1_designs(cfg, &source, r)? {
                        let mut record = RunRecord {
                            schema: RUN_SCHEMA,
                            problem: problem.as_str().into(),
                            design: design.as_str().into(),
                            r: sig12(r),
                            seed: cfg.seed,
                            arithmetic: cfg.arithmetic.as_str().into(),
                            status: "ok".into(),
                            error: None,
                            measures: None,
                            bounds_p1: Some(BoundsP1Out::from(&bounds)),
                            bounds_p2: None,
                            construction: None,
                            sandwich: sand.as_ref().map(SandwichOut::from),
                        };
                        let mut cells = vec![fmt_num(r), design.as_str().into()];
                        match build_p1(&source, r, design, budget, cfg.seed) {
                            Ok((mech, log)) => {
                                let report = evaluate(&source, &mech, r)?;
                                record.measures = Some(MeasuresOut::from(&report));
                                record.construction = Some(ConstructionOut::from(&log));
                                cells.extend([
                                    fmt_num(report.utility_p1),
                                    fmt_num(report.utility_p2),
                                    fmt_num(report.secrecy),
                                    fmt_num(report.rate_p1),
                                    fmt_num(report.rate_p2),
                                ]);
                                cells.extend([
                                    fmt_num(bounds_out.l1),
                                    fmt_num(bounds_out.l2),
                                    bounds_out.l3.map(fmt_num).unwrap_or_default(),
                                    bounds_out.l1_prime.map(fmt_num).unwrap_or_default(),
                                    fmt_num(bounds_out.upper),
                                    oracle_cell.clone(),
                                    report.feasible_p1.to_string(),
                                ]);
                            }
                            Err(e) => {
                                record.status = match e {
                                    CoreError::SearchFailed { .. } => {
                                        exit = exit.max(3);
                                        "search_failed".into()
                                    }
                                    _ => "regime_error".into(),
                                };
                                record.error = Some(e.to_string());
                                cells.extend(empty_cells(5));
                                cells.extend([
                                    fmt_num(bounds_out.l1),
                                    fmt_num(bounds_out.l2),
                                    bounds_out.l3.map(fmt_num).unwrap_or_default(),
                                    bounds_out.l1_prime.map(fmt_num).unwrap_or_default(),
                                    fmt_num(bounds_out.upper),
                                    oracle_cell.clone(),
                                    String::new(),
                                ]);
                            }
                        }
                        write_record(&cfg.output, &record)?;
                        n_runs += 1;
                        rows.push(CsvRow {
                            r,
                            design: design.as_str().into(),
                            cells,
                        });
                    }
                }
                Problem::P2 => {
                    if !run_p2_design(cfg) {
                        continue;
                    }
                    let bounds = bounds_p2(&source, r)?;
                    let bounds_out = BoundsP2Out::from(&bounds);
                    let mut record = RunRecord {
                        schema: RUN_SCHEMA,
                        problem: problem.as_str().into(),
                        design: "P2".into(),
                        r: sig12(r),
                        seed: cfg.seed,
                        arithmetic: cfg.arithmetic.as_str().into(),
                        status: "ok".into(),
                        error: None,
                        measures: None,
                        bounds_p1: None,
                        bounds_p2: Some(BoundsP2Out::from(&bounds)),
                        construction: None,
                        sandwich: sand.as_ref().map(SandwichOut::from),
                    };
                    let mut cells = vec![fmt_num(r), "P2".into()];
                    match build_p2(&source, r, budget, cfg.seed) {
                        Ok((mech, log)) => {
                            let report = evaluate(&source, &mech, r)?;
                            record.measures = Some(MeasuresOut::from(&report));
                            record.construction = Some(ConstructionOut::from(&log));
                            cells.extend([
                                fmt_num(report.utility_p1),
                                fmt_num(report.utility_p2),
                                fmt_num(report.secrecy),
                                fmt_num(report.rate_p1),
                                fmt_num(report.rate_p2),
                                String::new(),
                                String::new(),
                                String::new(),
                                String::new(),
                                fmt_num(bounds_out.upper),
                                oracle_cell.clone(),
                                report.feasible_p2.to_string(),
                            ]);
                        }
                        Err(e) => {
                            record.status = match e {
                                CoreError::SearchFailed { .. } => {
                                    exit = exit.max(3);
                                    "search_failed".into()
                                }
                                _ => "regime_error".into(),
                            };
                            record.error = Some(e.to_string());
                            cells.extend(empty_cells(5));
                            cells.extend([
                                String::new(),
                                String::new(),
                                String::new(),
                                String::new(),
                                fmt_num(bounds_out.upper),
                                oracle_cell.clone(),
                                String::new(),
                            ]);
                        }
                    }
                    write_record(&cfg.output, &record)?;
                    n_runs += 1;
                    rows.push(CsvRow {
                        r,
                        design: "P2".into(),
                        cells,
                    });
                }
            }
        }
    }

    let csv = crate::report::write_csv(&mut rows);
    fs::write(cfg.output.join("summary.csv"), csv)
        .map_err(|e| CliError::Io(format!("cannot write summary.csv: {e}")))?;
    let mut status_line = String::new();
    let _ = write!(
        status_line,
        "wrote {n_runs} runs and summary.csv to {}",
        cfg.output.display()
    );
    println!("{status_line}");
    Ok(exit)
}

fn write_record(dir: &Path, record: &RunRecord) -> Result<(), CliError> {
    let name = format!(
        "run_{}_{}_r{}.json",
        record.problem, record.design, record.r
    );
    let text = serde_json::to_string_pretty(record)
        .map_err(|e| CliError::Internal(format!("serialize: {e}")))?;
    fs::write(dir.join(&name), text + "\n")
        .map_err(|e| CliError::Io(format!("cannot write {name}: {e}")))?;
    Ok(())
}
