//! Latin rectangles over the canonical alphabet `{0..n-1}`.
//!
//! A [`LatinRectangle`] is immutable once built. Every constructor goes
//! through [`validate`] (or an internal path whose output is Latin by
//! construction), so holding a value is proof that both Latin conditions
//! hold: each row is a permutation of the alphabet and no column repeats a
//! symbol.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One symbol of the canonical alphabet.
pub type Symbol = u16;

/// Largest supported alphabet size.
pub const MAX_SYMBOLS: usize = u16::MAX as usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    RowNotPermutation,
    ColumnRepeat,
    SymbolOutOfRange,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ViolationKind::RowNotPermutation => "row-not-permutation",
            ViolationKind::ColumnRepeat => "column-repeat",
            ViolationKind::SymbolOutOfRange => "symbol-out-of-range",
        })
    }
}

/// A single failed Latin condition, located at the offending cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub row: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    fn from_violations(mut violations: Vec<Violation>) -> Self {
        violations.sort_by_key(|v| (v.row, v.column, v.kind));
        ValidationReport {
            valid: violations.is_empty(),
            violations,
        }
    }
}

/// Structural problems that prevent a grid from being checked at all.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShapeError {
    #[error("grid has no rows or no columns")]
    Empty,
    #[error("row {row} has {found} entries, expected {expected}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("{cols} columns exceeds the supported maximum of {MAX_SYMBOLS} symbols")]
    TooWide { cols: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatinError {
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error("not a Latin rectangle: {} at row {}, column {} ({} violation(s))",
        .0.violations[0].kind, .0.violations[0].row, .0.violations[0].column, .0.violations.len())]
    NotLatin(ValidationReport),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("row count {requested} out of range 1..={rows}")]
    RowCountOutOfRange { requested: usize, rows: usize },
    #[error("{what} permutation is not a permutation of 0..{len}")]
    NotPermutation { what: &'static str, len: usize },
}

/// Checks both Latin conditions on a raw rectangular grid.
///
/// Every cell is examined: out-of-range symbols are reported once and
/// skipped by the other checks, and each later occurrence of a repeated
/// symbol (in its row or its column) is reported at its own position.
pub fn validate(grid: &[Vec<u64>]) -> Result<ValidationReport, ShapeError> {
    let m = grid.len();
    let n = grid.first().map_or(0, Vec::len);
    if m == 0 || n == 0 {
        return Err(ShapeError::Empty);
    }
    if let Some((row, r)) = grid.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(ShapeError::Ragged {
            row,
            expected: n,
            found: r.len(),
        });
    }
    if n > MAX_SYMBOLS {
        return Err(ShapeError::TooWide { cols: n });
    }

    let mut violations = Vec::new();
    let in_range = |x: u64| x < n as u64;

    // stamp[x] == k + 1 marks x as seen in line k
    let mut stamp = vec![0usize; n];
    for (a, row) in grid.iter().enumerate() {
        for (c, &x) in row.iter().enumerate() {
            if !in_range(x) {
                violations.push(Violation {
                    kind: ViolationKind::SymbolOutOfRange,
                    row: a,
                    column: c,
                });
                continue;
            }
            let x = x as usize;
            if stamp[x] == a + 1 {
                violations.push(Violation {
                    kind: ViolationKind::RowNotPermutation,
                    row: a,
                    column: c,
                });
            }
            stamp[x] = a + 1;
        }
    }

    stamp.iter_mut().for_each(|s| *s = 0);
    for c in 0..n {
        for (a, row) in grid.iter().enumerate() {
            let x = row[c];
            if !in_range(x) {
                continue;
            }
            let x = x as usize;
            if stamp[x] == c + 1 {
                violations.push(Violation {
                    kind: ViolationKind::ColumnRepeat,
                    row: a,
                    column: c,
                });
            }
            stamp[x] = c + 1;
        }
    }

    Ok(ValidationReport::from_violations(violations))
}

/// An `m x n` Latin rectangle over `{0..n-1}` with `m <= n`.
///
/// Cells are stored row-major. A per-row inverse index (symbol to column)
/// is kept alongside so that row-pair permutations can be read in O(1) per
/// symbol.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LatinRectangle {
    rows: usize,
    cols: usize,
    cells: Vec<Symbol>,
    inverse: Vec<Symbol>,
}

impl LatinRectangle {
    /// Validates `grid` and builds a rectangle from it.
    pub fn from_rows(grid: &[Vec<u64>]) -> Result<Self, LatinError> {
        let report = validate(grid)?;
        if !report.valid {
            return Err(LatinError::NotLatin(report));
        }
        let rows = grid.len();
        let cols = grid[0].len();
        let cells = grid.iter().flatten().map(|&x| x as Symbol).collect();
        Ok(Self::from_cells_unchecked(rows, cols, cells))
    }

    /// Validates a row-major cell vector of shape `rows x cols`.
    pub fn from_cells(rows: usize, cols: usize, cells: Vec<Symbol>) -> Result<Self, LatinError> {
        if rows == 0 || cols == 0 {
            return Err(ShapeError::Empty.into());
        }
        if cells.len() != rows * cols {
            return Err(ShapeError::Ragged {
                row: cells.len() / cols,
                expected: cols,
                found: cells.len() % cols,
            }
            .into());
        }
        let grid: Vec<Vec<u64>> = cells
            .chunks(cols)
            .map(|r| r.iter().map(|&x| u64::from(x)).collect())
            .collect();
        Self::from_rows(&grid)
    }

    /// Builds a rectangle whose Latin property is guaranteed by the caller.
    pub(crate) fn from_cells_unchecked(rows: usize, cols: usize, cells: Vec<Symbol>) -> Self {
        debug_assert_eq!(cells.len(), rows * cols);
        let mut inverse = vec![0; rows * cols];
        for a in 0..rows {
            for c in 0..cols {
                inverse[a * cols + cells[a * cols + c] as usize] = c as Symbol;
            }
        }
        let r = LatinRectangle {
            rows,
            cols,
            cells,
            inverse,
        };
        debug_assert!(validate(&r.to_rows()).map(|v| v.valid).unwrap_or(false));
        r
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Symbol at row `a`, column `c`.
    #[inline]
    pub fn get(&self, a: usize, c: usize) -> Symbol {
        self.cells[a * self.cols + c]
    }

    /// Column of row `a` holding symbol `x`.
    #[inline]
    pub fn column_of(&self, a: usize, x: Symbol) -> usize {
        self.inverse[a * self.cols + x as usize] as usize
    }

    pub fn row(&self, a: usize) -> &[Symbol] {
        &self.cells[a * self.cols..(a + 1) * self.cols]
    }

    pub fn cells(&self) -> &[Symbol] {
        &self.cells
    }

    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        self.cells
            .chunks(self.cols)
            .map(|r| r.iter().map(|&x| u64::from(x)).collect())
            .collect()
    }

    /// The first `m` rows.
    pub fn truncate_rows(&self, m: usize) -> Result<Self, TransformError> {
        if m == 0 || m > self.rows {
            return Err(TransformError::RowCountOutOfRange {
                requested: m,
                rows: self.rows,
            });
        }
        Ok(LatinRectangle {
            rows: m,
            cols: self.cols,
            cells: self.cells[..m * self.cols].to_vec(),
            inverse: self.inverse[..m * self.cols].to_vec(),
        })
    }

    /// Isotope with `new(a, c) = sym_perm[self(row_perm[a], col_perm[c])]`.
    pub fn permute(
        &self,
        row_perm: &[usize],
        col_perm: &[usize],
        sym_perm: &[usize],
    ) -> Result<Self, TransformError> {
        check_permutation("row", row_perm, self.rows)?;
        check_permutation("column", col_perm, self.cols)?;
        check_permutation("symbol", sym_perm, self.cols)?;
        let mut cells = Vec::with_capacity(self.cells.len());
        for &src_row in row_perm {
            for &src_col in col_perm {
                cells.push(sym_perm[self.get(src_row, src_col) as usize] as Symbol);
            }
        }
        Ok(Self::from_cells_unchecked(self.rows, self.cols, cells))
    }

    /// Isotopic normal form: the first row is relabeled to `0..n-1`, then
    /// rows are ordered so the first column increases.
    pub fn reduce(&self) -> Self {
        let mut sym_perm = vec![0usize; self.cols];
        for (c, &x) in self.row(0).iter().enumerate() {
            sym_perm[x as usize] = c;
        }
        let mut row_perm: Vec<usize> = (0..self.rows).collect();
        row_perm.sort_by_key(|&a| sym_perm[self.get(a, 0) as usize]);
        let col_perm: Vec<usize> = (0..self.cols).collect();
        self.permute(&row_perm, &col_perm, &sym_perm)
            .expect("reduce builds valid permutations")
    }

    /// Whether the first row is `0..n-1` and the first column increases.
    pub fn is_reduced(&self) -> bool {
        self.row(0)
            .iter()
            .enumerate()
            .all(|(c, &x)| x as usize == c)
            && (1..self.rows).all(|a| self.get(a - 1, 0) < self.get(a, 0))
    }
}

fn check_permutation(what: &'static str, perm: &[usize], len: usize) -> Result<(), TransformError> {
    let err = TransformError::NotPermutation { what, len };
    if perm.len() != len {
        return Err(err);
    }
    let mut seen = vec![false; len];
    for &p in perm {
        if p >= len || seen[p] {
            return Err(err);
        }
        seen[p] = true;
    }
    Ok(())
}

impl fmt::Debug for LatinRectangle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LatinRectangle {}x{} ", self.rows, self.cols)?;
        f.debug_list()
            .entries(self.cells.chunks(self.cols))
            .finish()
    }
}

#[derive(Serialize, Deserialize)]
struct GridRepr {
    rows: usize,
    cols: usize,
    grid: Vec<Vec<u64>>,
}

impl Serialize for LatinRectangle {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        GridRepr {
            rows: self.rows,
            cols: self.cols,
            grid: self.to_rows(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for LatinRectangle {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = GridRepr::deserialize(deserializer)?;
        let r = LatinRectangle::from_rows(&repr.grid).map_err(serde::de::Error::custom)?;
        if r.rows != repr.rows || r.cols != repr.cols {
            return Err(serde::de::Error::custom(
                "declared shape does not match grid",
            ));
        }
        Ok(r)
    }
}
