//! Valuation sequences as `s,b` CSV.

use std::fs;
use std::path::Path;

use super::fmt_f64;
use crate::error::{Error, Result};
use crate::trade::{Valuation, ValuationSequence};

pub fn sequence_to_csv(seq: &ValuationSequence) -> String {
    let mut out = String::from("s,b\n");
    for v in seq {
        out.push_str(&fmt_f64(v.seller));
        out.push(',');
        out.push_str(&fmt_f64(v.buyer));
        out.push('\n');
    }
    out
}

/// Parse `s,b` rows; `path` only labels errors. Blank lines are skipped.
pub fn parse_sequence_csv(text: &str, path: &Path) -> Result<ValuationSequence> {
    let err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, header)) if header.trim() == "s,b" => {}
        Some((i, other)) => return Err(err(i + 1, format!("expected header `s,b`, found `{other}`"))),
        None => return Err(err(1, "missing header `s,b`".into())),
    }
    let mut rounds = Vec::new();
    for (i, line) in lines {
        let mut fields = line.split(',').map(str::trim);
        let (Some(s), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(err(i + 1, format!("expected two fields, found `{line}`")));
        };
        let parse = |x: &str| x.parse::<f64>().map_err(|e| err(i + 1, format!("`{x}`: {e}")));
        let v = Valuation::new(parse(s)?, parse(b)?).map_err(|e| err(i + 1, e.to_string()))?;
        rounds.push(v);
    }
    Ok(ValuationSequence::new(rounds))
}

pub fn read_sequence(path: &Path) -> Result<ValuationSequence> {
    parse_sequence_csv(&fs::read_to_string(path)?, path)
}

pub fn write_sequence(seq: &ValuationSequence, path: &Path) -> Result<()> {
    fs::write(path, sequence_to_csv(seq))?;
    Ok(())
}
