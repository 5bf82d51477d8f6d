//! The `LRECT v1` text interchange format.
//!
//! ```text
//! m n
//! r00 r01 ... r0(n-1)
//! ...
//! ```
//!
//! Line 1 holds the shape, then exactly `m` lines of `n` base-10 symbols.
//! Tokens are separated by spaces or tabs. Only blank lines may follow the
//! grid. The writer always emits single spaces and `\n` line endings.

use std::fmt::Write as _;

use thiserror::Error;

use crate::latin::{LatinError, LatinRectangle};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LrectErrorKind {
    #[error("missing header line \"m n\"")]
    MissingHeader,
    #[error("header must be two integers \"m n\"")]
    BadHeader,
    #[error("expected {expected} rows, found {found}")]
    MissingRows { expected: usize, found: usize },
    #[error("expected {expected} symbols, found {found}")]
    WrongRowLength { expected: usize, found: usize },
    #[error("invalid integer {token:?}")]
    BadInteger { token: String },
    #[error("unexpected trailing content")]
    TrailingGarbage,
    #[error("{0}")]
    NotLatin(LatinError),
}

/// A parse failure located at a 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct LrectError {
    pub line: usize,
    pub column: usize,
    pub kind: LrectErrorKind,
}

fn err(line: usize, column: usize, kind: LrectErrorKind) -> LrectError {
    LrectError { line, column, kind }
}

/// Splits a line into `(1-based column, token)` pairs.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        let sep = ch == ' ' || ch == '\t' || ch == '\r';
        match (sep, start) {
            (true, Some(s)) => {
                out.push((s + 1, &line[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

fn parse_int(line: usize, (column, token): (usize, &str)) -> Result<u64, LrectError> {
    if !token.bytes().all(|b| b.is_ascii_digit()) {
        return Err(err(
            line,
            column,
            LrectErrorKind::BadInteger {
                token: token.into(),
            },
        ));
    }
    token.parse().map_err(|_| {
        err(
            line,
            column,
            LrectErrorKind::BadInteger {
                token: token.into(),
            },
        )
    })
}

/// Parses one LRECT v1 document.
pub fn parse(text: &str) -> Result<LatinRectangle, LrectError> {
    let lines: Vec<&str> = text.split('\n').collect();
    let header = tokens(lines.first().copied().unwrap_or(""));
    if header.is_empty() {
        return Err(err(1, 1, LrectErrorKind::MissingHeader));
    }
    if header.len() != 2 {
        let col = header.get(2).map_or(1, |t| t.0);
        return Err(err(1, col, LrectErrorKind::BadHeader));
    }
    let m = parse_int(1, header[0])? as usize;
    let n = parse_int(1, header[1])? as usize;

    let mut grid = Vec::with_capacity(m);
    for a in 0..m {
        let lineno = a + 2;
        let Some(line) = lines.get(a + 1) else {
            return Err(err(
                lineno,
                1,
                LrectErrorKind::MissingRows {
                    expected: m,
                    found: a,
                },
            ));
        };
        let toks = tokens(line);
        if toks.is_empty() && n > 0 {
            return Err(err(
                lineno,
                1,
                LrectErrorKind::MissingRows {
                    expected: m,
                    found: a,
                },
            ));
        }
        if toks.len() != n {
            let col = toks.get(n).map_or(line.len() + 1, |t| t.0);
            return Err(err(
                lineno,
                col,
                LrectErrorKind::WrongRowLength {
                    expected: n,
                    found: toks.len(),
                },
            ));
        }
        let row = toks
            .into_iter()
            .map(|t| parse_int(lineno, t))
            .collect::<Result<Vec<_>, _>>()?;
        grid.push(row);
    }
    for (k, line) in lines.iter().enumerate().skip(m + 1) {
        if let Some(&(col, _)) = tokens(line).first() {
            return Err(err(k + 1, col, LrectErrorKind::TrailingGarbage));
        }
    }

    LatinRectangle::from_rows(&grid).map_err(|e| {
        let (line, column) = match &e {
            LatinError::NotLatin(rep) => {
                let v = rep.violations[0];
                (v.row + 2, v.column + 1)
            }
            LatinError::Shape(_) => (1, 1),
        };
        err(line, column, LrectErrorKind::NotLatin(e))
    })
}

/// Renders a rectangle as LRECT v1, newline-terminated.
pub fn format(r: &LatinRectangle) -> String {
    let mut out = String::with_capacity(r.cells().len() * 4 + 16);
    let _ = writeln!(out, "{} {}", r.rows(), r.cols());
    for a in 0..r.rows() {
        for (c, x) in r.row(a).iter().enumerate() {
            if c > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{x}");
        }
        out.push('\n');
    }
    out
}

impl std::fmt::Display for LatinRectangle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&format(self))
    }
}

impl std::str::FromStr for LatinRectangle {
    type Err = LrectError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}
