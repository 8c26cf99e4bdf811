//! The distribution file format: a JSON document with the three alphabets
//! and the joint mass, nested s-major, then x, then t. Entries are `"a/b"`
//! fraction strings, decimal strings, or plain numbers; exact mode parses
//! all of them into exact rationals (numbers via their shortest decimal
//! form, so `0.125` means exactly 1/8).

use fairmech::{Alphabet, AxisSpec, Error as CoreError, JointPmf, Prob, Role};
use num::BigRational;
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Deserialize)]
struct SourceDoc {
    s_alphabet: Vec<String>,
    x_alphabet: Vec<String>,
    t_alphabet: Vec<String>,
    pmf: Vec<Vec<Vec<serde_json::Value>>>,
}

fn entry_text(value: &serde_json::Value) -> Result<String, CliError> {
    match value {
        serde_json::Value::String(s) => Ok(s.clone()),
        serde_json::Value::Number(n) => Ok(n.to_string()),
        other => Err(CliError::Parse(format!(
            "pmf entries must be fraction strings or numbers, got {other}"
        ))),
    }
}

fn alphabet(name: &str, symbols: &[String]) -> Result<Alphabet, CliError> {
    for (i, s) in symbols.iter().enumerate() {
        if symbols[..i].contains(s) {
            return Err(CliError::DuplicateSymbol(format!(
                "{name} repeats symbol {s:?}"
            )));
        }
    }
    Alphabet::new(symbols.to_vec()).map_err(|e| CliError::Parse(e.to_string()))
}

/// Parse a distribution document into a joint over `(S, X, T)`.
pub fn parse_source<P: Prob>(text: &str) -> Result<JointPmf<P>, CliError> {
    let doc: SourceDoc =
        serde_json::from_str(text).map_err(|e| CliError::Parse(format!("bad source file: {e}")))?;
    let s = alphabet("s_alphabet", &doc.s_alphabet)?;
    let x = alphabet("x_alphabet", &doc.x_alphabet)?;
    let t = alphabet("t_alphabet", &doc.t_alphabet)?;
    if doc.pmf.len() != s.size() {
        return Err(CliError::Parse(format!(
            "pmf has {} s-blocks, s_alphabet has {} symbols",
            doc.pmf.len(),
            s.size()
        )));
    }
    let mut mass: Vec<P> = Vec::with_capacity(s.size() * x.size() * t.size());
    for (si, block) in doc.pmf.iter().enumerate() {
        if block.len() != x.size() {
            return Err(CliError::Parse(format!(
                "pmf[{si}] has {} x-rows, x_alphabet has {} symbols",
                block.len(),
                x.size()
            )));
        }
        for (xi, row) in block.iter().enumerate() {
            if row.len() != t.size() {
                return Err(CliError::Parse(format!(
                    "pmf[{si}][{xi}] has {} entries, t_alphabet has {} symbols",
                    row.len(),
                    t.size()
                )));
            }
            for value in row {
                let text = entry_text(value)?;
                let p = P::parse(&text).map_err(|e| CliError::Parse(e.to_string()))?;
                mass.push(p);
            }
        }
    }
    // Report the exact deficit on a normalization failure.
    let exact: Vec<BigRational> = doc
        .pmf
        .iter()
        .flatten()
        .flatten()
        .map(|v| {
            let text = entry_text(v)?;
            <BigRational as Prob>::parse(&text).map_err(|e| CliError::Parse(e.to_string()))
        })
        .collect::<Result<_, _>>()?;
    let total = exact
        .iter()
        .fold(<BigRational as Prob>::zero(), |a, b| a + b.clone());
    if P::EXACT && total != <BigRational as Prob>::one() {
        let deficit = <BigRational as Prob>::one() - total;
        return Err(CliError::Normalization(format!(
            "pmf sums to {}, deficit {}",
            (<BigRational as Prob>::one() - deficit.clone()).render(),
            deficit.render()
        )));
    }
    let axes = vec![
        AxisSpec::new(Role::S, s),
        AxisSpec::new(Role::X, x),
        AxisSpec::new(Role::T, t),
    ];
    JointPmf::new(axes, mass).map_err(|e| match e {
        CoreError::NonNormalized { total } => {
            CliError::Normalization(format!("pmf sums to {total}"))
        }
        other => CliError::Parse(other.to_string()),
    })
}

/// Render a source back into the document format with exact fractions.
/// `parse_source(&render_source(j))` reproduces `j` bit for bit.
pub fn render_source(joint: &JointPmf<BigRational>) -> Result<String, CliError> {
    let j = joint
        .permuted(&[Role::S, Role::X, Role::T])
        .map_err(|e| CliError::Parse(e.to_string()))?;
    let (s, x, t) = (
        &j.axes()[0].alphabet,
        &j.axes()[1].alphabet,
        &j.axes()[2].alphabet,
    );
    let mut pmf = Vec::with_capacity(s.size());
    for si in 0..s.size() {
        let mut block = Vec::with_capacity(x.size());
        for xi in 0..x.size() {
            let mut row = Vec::with_capacity(t.size());
            for ti in 0..t.size() {
                row.push(serde_json::Value::String(j.value(&[si, xi, ti]).render()));
            }
            block.push(serde_json::Value::Array(row));
        }
        pmf.push(serde_json::Value::Array(block));
    }
    let doc = serde_json::json!({
        "s_alphabet": s.symbols(),
        "x_alphabet": x.symbols(),
        "t_alphabet": t.symbols(),
        "pmf": pmf,
    });
    serde_json::to_string_pretty(&doc).map_err(|e| CliError::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_point_mass() {
        let text = r#"{
            "s_alphabet": ["s0"], "x_alphabet": ["x0"], "t_alphabet": ["t0"],
            "pmf": [[["1"]]]
        }"#;
        let j: JointPmf<BigRational> = parse_source(text).unwrap();
        assert_eq!(fairmech::entropy(&j, &[Role::S]).unwrap(), 0.0);
        assert_eq!(fairmech::entropy(&j, &[Role::T]).unwrap(), 0.0);
    }

    #[test]
    fn normalization_deficit_is_exact() {
        let text = r#"{
            "s_alphabet": ["s0"], "x_alphabet": ["x0", "x1"], "t_alphabet": ["t0"],
            "pmf": [[["1/2"], ["3/8"]]]
        }"#;
        let err = parse_source::<BigRational>(text).unwrap_err();
        match err {
            CliError::Normalization(msg) => assert!(msg.contains("1/8"), "{msg}"),
            other => panic!("wrong error: {other:?}"),
        }
    }

    #[test]
    fn duplicate_symbols_are_rejected() {
        let text = r#"{
            "s_alphabet": ["a", "a"], "x_alphabet": ["x0"], "t_alphabet": ["t0"],
            "pmf": [[["1/2"]], [["1/2"]]]
        }"#;
        assert!(matches!(
            parse_source::<BigRational>(text),
            Err(CliError::DuplicateSymbol(_))
        ));
    }

    #[test]
    fn round_trip_is_exact() {
        let j = fairmech::instances::d1();
        let text = render_source(&j).unwrap();
        let back: JointPmf<BigRational> = parse_source(&text).unwrap();
        assert_eq!(back, j.permuted(&[Role::S, Role::X, Role::T]).unwrap());
        assert_eq!(fairmech::entropy(&back, &[Role::X]).unwrap(), 2.0);
    }

    #[test]
    fn decimals_parse_exactly_in_exact_mode() {
        let text = r#"{
            "s_alphabet": ["s0"], "x_alphabet": ["x0", "x1"], "t_alphabet": ["t0"],
            "pmf": [[[0.125], ["0.875"]]]
        }"#;
        let j: JointPmf<BigRational> = parse_source(text).unwrap();
        assert_eq!(j.value(&[0, 0, 0]), &BigRational::from_ratio(1, 8));
    }
}
