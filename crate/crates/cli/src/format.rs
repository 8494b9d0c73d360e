//! Plain-text instance files.
//!
//! ```text
//! HAP1 <m> <n>
//! <n characters over {+,-,x}>     (m lines, x = unobserved)
//! TRUTH <n characters over {+,-}> (optional)
//! ```
//!
//! Every line, including the last, ends with `\n`.

use std::fmt::Write as _;

use haprtr_core::objective::ReadMatrix;
use haprtr_core::pipeline::Haplotype;

use crate::error::{HarnessError, Result};

/// Parsed contents of an instance file.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceFile {
    pub reads: ReadMatrix,
    pub truth: Option<Haplotype>,
}

pub fn write_instance(reads: &ReadMatrix, truth: Option<&Haplotype>) -> String {
    let (m, n) = (reads.rows(), reads.cols());
    let mut out = String::with_capacity((m + 2) * (n + 1) + 16);
    let _ = writeln!(out, "HAP1 {m} {n}");
    for row in reads.cells().chunks(n) {
        out.extend(row.iter().map(|c| match c {
            Some(1) => '+',
            Some(_) => '-',
            None => 'x',
        }));
        out.push('\n');
    }
    if let Some(h) = truth {
        let _ = writeln!(out, "TRUTH {h}");
    }
    out
}

fn parse_err(line: usize, message: impl Into<String>) -> HarnessError {
    HarnessError::Parse {
        line,
        message: message.into(),
    }
}

pub fn parse_instance(text: &str) -> Result<InstanceFile> {
    if !text.is_empty() && !text.ends_with('\n') {
        let last = text.lines().count();
        return Err(parse_err(last, "missing trailing newline"));
    }
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let fields: Vec<&str> = header.split(' ').collect();
    let (m, n) = match fields.as_slice() {
        ["HAP1", m, n] => {
            let m: usize = m.parse().map_err(|_| parse_err(1, format!("bad row count {m:?}")))?;
            let n: usize = n.parse().map_err(|_| parse_err(1, format!("bad column count {n:?}")))?;
            (m, n)
        }
        _ => return Err(parse_err(1, "expected header `HAP1 <m> <n>`")),
    };
    if m < 1 || n < 2 {
        return Err(parse_err(1, "need m >= 1 and n >= 2"));
    }

    let mut cells = Vec::with_capacity(m * n);
    for row in 0..m {
        let (no, line) = lines
            .next()
            .ok_or_else(|| parse_err(row + 2, format!("expected {m} read rows, found {row}")))?;
        let before = cells.len();
        for (col, ch) in line.chars().enumerate() {
            cells.push(match ch {
                '+' => Some(1),
                '-' => Some(-1),
                'x' => None,
                other => {
                    return Err(parse_err(no, format!("column {}: unexpected character {other:?}", col + 1)))
                }
            });
        }
        if cells.len() - before != n {
            return Err(parse_err(no, format!("expected {n} characters, found {}", cells.len() - before)));
        }
    }

    let truth = match lines.next() {
        None => None,
        Some((no, line)) => {
            let body = line
                .strip_prefix("TRUTH ")
                .ok_or_else(|| parse_err(no, "expected `TRUTH <+/- string>` or end of file"))?;
            let h: Haplotype = body.parse().map_err(|e| parse_err(no, format!("{e}")))?;
            if h.len() != n {
                return Err(parse_err(no, format!("truth has {} sites, expected {n}", h.len())));
            }
            Some(h)
        }
    };
    if let Some((no, _)) = lines.next() {
        return Err(parse_err(no, "unexpected content after instance"));
    }

    let reads = ReadMatrix::new(m, n, cells).map_err(|e| parse_err(1, e.to_string()))?;
    Ok(InstanceFile { reads, truth })
}
