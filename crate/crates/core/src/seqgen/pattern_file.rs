//! Plain-text sign-pattern files.
//!
//! ```text
//! m M family seed
//! s_11 s_12 ... s_1M
//! ...
//! ```
//!
//! Entries are `1` or `-1` separated by single spaces, each line ends with
//! `\n`. A matrix without a seed writes `-` in the seed field.

use std::fmt::Write as _;
use std::path::Path;

use super::{BinarySequence, SeqError, SignMatrix};

pub fn write_pattern_file(s: &SignMatrix) -> String {
    let mut out = String::with_capacity(s.channels() * (s.length() * 3 + 1) + 64);
    let seed = s.seed().map_or_else(|| "-".to_string(), |v| v.to_string());
    let _ = writeln!(
        out,
        "{} {} {} {}",
        s.channels(),
        s.length(),
        s.family_tag(),
        seed
    );
    for row in s.rows() {
        let mut first = true;
        for &x in row.as_slice() {
            if !first {
                out.push(' ');
            }
            out.push_str(if x > 0 { "1" } else { "-1" });
            first = false;
        }
        out.push('\n');
    }
    out
}

fn format_err(line: usize, msg: impl std::fmt::Display) -> SeqError {
    SeqError::Format(format!("line {line}: {msg}"))
}

pub fn parse_pattern_file(text: &str) -> Result<SignMatrix, SeqError> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| format_err(1, "missing header"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let [m, len, family, seed] = fields[..] else {
        return Err(format_err(1, "header must read `m M family seed`"));
    };
    let m: usize = m.parse().map_err(|e| format_err(1, format!("m: {e}")))?;
    let len: usize = len.parse().map_err(|e| format_err(1, format!("M: {e}")))?;
    let seed = match seed {
        "-" => None,
        s => Some(
            s.parse::<u64>()
                .map_err(|e| format_err(1, format!("seed: {e}")))?,
        ),
    };
    let mut rows = Vec::with_capacity(m);
    for (idx, line) in lines {
        let entries = line
            .split_whitespace()
            .map(|tok| match tok {
                "1" | "+1" => Ok(1i8),
                "-1" => Ok(-1i8),
                other => Err(format_err(idx + 1, format!("entry '{other}' is not ±1"))),
            })
            .collect::<Result<Vec<i8>, _>>()?;
        if entries.len() != len {
            return Err(format_err(
                idx + 1,
                format!("expected {len} entries, found {}", entries.len()),
            ));
        }
        rows.push(BinarySequence::new(entries)?);
    }
    if rows.len() != m {
        return Err(SeqError::Format(format!(
            "header announces {m} rows, found {}",
            rows.len()
        )));
    }
    SignMatrix::new(rows, family, seed)
}

pub fn read_pattern_file(path: impl AsRef<Path>) -> Result<SignMatrix, SeqError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| SeqError::Format(format!("{}: {e}", path.display())))?;
    parse_pattern_file(&text)
}
