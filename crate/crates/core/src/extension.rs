//! Width extension of perfect Latin rectangles and the chain planner.
//!
//! Given a perfect `m x n` rectangle `R` and a perfect square `S` of order
//! `m` on a disjoint alphabet, [`extend`] deletes column `c` of `R`, writes
//! `R(a, c)` over the symbol `s` in row `a` of `S`, and concatenates the
//! two. The result is a perfect `m x (n + m - 1)` rectangle. Every row-pair
//! permutation of the result is one cycle that walks `n - 1` steps of
//! `R_{a,b}`, crosses into `S` once, walks `m - 2` steps of `S_{a,b}` and
//! crosses back once; [`certify_extension`] replays exactly that walk.
//!
//! Construction happens on [`LabeledRectangle`]s, whose alphabets are
//! arbitrary sets of integers, so outputs can be compared against
//! hand-labelled examples before they are recanonicalized to `{0..w-1}`.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generators::{cyclic, prime_in_progression, GeneratorError};
use crate::latin::{LatinRectangle, Symbol, TransformError, MAX_SYMBOLS};
use crate::perfection::{is_perfect, perfection_report};

/// A symbol of a rectangle whose alphabet is not necessarily `{0..n-1}`.
pub type Label = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtensionError {
    #[error("rectangle has {rect} rows but square has {square}")]
    RowCountMismatch { rect: usize, square: usize },
    #[error("second input must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("column {column} out of range for {cols} columns")]
    ColumnOutOfRange { column: usize, cols: usize },
    #[error("symbol {symbol} not in the relabeled square alphabet {lo}..{hi}")]
    SymbolOutOfRange { symbol: Label, lo: Label, hi: Label },
    #[error("relabel base {base} must exceed the largest rectangle symbol {max}")]
    AlphabetOverlap { base: Label, max: Label },
    #[error("{input} is not perfect (pf {pf} of {total})")]
    NotPerfect {
        input: &'static str,
        pf: usize,
        total: usize,
    },
    #[error("extended width {0} exceeds the supported maximum")]
    TooWide(u64),
    #[error("invalid labeled rectangle: {0}")]
    InvalidLabeled(String),
}

/// A Latin rectangle over an arbitrary alphabet of `n` labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LabeledRectangle {
    rows: usize,
    cols: usize,
    cells: Vec<Label>,
}

impl LabeledRectangle {
    /// Checks that every row permutes the labels of row 0 and that no
    /// column repeats a label.
    pub fn new(rows: usize, cols: usize, cells: Vec<Label>) -> Result<Self, ExtensionError> {
        if rows == 0 || cols == 0 || cells.len() != rows * cols {
            return Err(ExtensionError::InvalidLabeled(format!(
                "{} cells do not form a {rows}x{cols} grid",
                cells.len()
            )));
        }
        let r = LabeledRectangle { rows, cols, cells };
        r.canonicalize()?;
        Ok(r)
    }

    pub fn from_rows(grid: &[Vec<Label>]) -> Result<Self, ExtensionError> {
        let rows = grid.len();
        let cols = grid.first().map_or(0, Vec::len);
        if grid.iter().any(|r| r.len() != cols) {
            return Err(ExtensionError::InvalidLabeled("ragged grid".into()));
        }
        Self::new(rows, cols, grid.concat())
    }

    /// Shifts every symbol of `r` by `offset`.
    pub fn from_latin(r: &LatinRectangle, offset: Label) -> Self {
        LabeledRectangle {
            rows: r.rows(),
            cols: r.cols(),
            cells: r.cells().iter().map(|&x| Label::from(x) + offset).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, a: usize, c: usize) -> Label {
        self.cells[a * self.cols + c]
    }

    pub fn row(&self, a: usize) -> &[Label] {
        &self.cells[a * self.cols..(a + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<Label>> {
        self.cells
            .chunks(self.cols)
            .map(<[Label]>::to_vec)
            .collect()
    }

    /// The alphabet, ascending.
    pub fn alphabet(&self) -> Vec<Label> {
        let mut a = self.row(0).to_vec();
        a.sort_unstable();
        a
    }

    pub fn max_label(&self) -> Label {
        self.row(0).iter().copied().max().unwrap_or(0)
    }

    /// Relabels the alphabet to `{0..n-1}` preserving label order.
    /// Returns the canonical rectangle and `labels`, where `labels[k]` is
    /// the original label of canonical symbol `k`.
    pub fn canonicalize(&self) -> Result<(LatinRectangle, Vec<Label>), ExtensionError> {
        let labels = self.alphabet();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(ExtensionError::InvalidLabeled(
                "row 0 repeats a label".into(),
            ));
        }
        if labels.len() > MAX_SYMBOLS {
            return Err(ExtensionError::TooWide(labels.len() as u64));
        }
        let index: HashMap<Label, u64> = labels
            .iter()
            .enumerate()
            .map(|(k, &l)| (l, k as u64))
            .collect();
        let mut grid = Vec::with_capacity(self.rows);
        for (a, row) in self.cells.chunks(self.cols).enumerate() {
            let mapped = row
                .iter()
                .map(|l| {
                    index.get(l).copied().ok_or_else(|| {
                        ExtensionError::InvalidLabeled(format!(
                            "row {a} uses label {l} missing from row 0"
                        ))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            grid.push(mapped);
        }
        let canonical = LatinRectangle::from_rows(&grid)
            .map_err(|e| ExtensionError::InvalidLabeled(e.to_string()))?;
        Ok((canonical, labels))
    }

    fn pair_map(&self, a: usize, b: usize) -> HashMap<Label, Label> {
        (0..self.cols)
            .map(|c| (self.get(a, c), self.get(b, c)))
            .collect()
    }
}

impl From<&LatinRectangle> for LabeledRectangle {
    fn from(r: &LatinRectangle) -> Self {
        LabeledRectangle::from_latin(r, 0)
    }
}

/// Which column of `R` to delete and which symbol of the relabeled `S` to
/// overwrite. `S` is relabeled to `relabel_base..relabel_base + m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtensionPlan {
    pub column: usize,
    pub symbol: Label,
    pub relabel_base: Label,
}

impl ExtensionPlan {
    /// Last column, smallest relabeled symbol, base `n`.
    pub fn default_for(width: usize) -> Self {
        ExtensionPlan {
            column: width - 1,
            symbol: width as Label,
            relabel_base: width as Label,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypotheses {
    /// Verify that both inputs are perfect before building.
    Checked,
    /// Inputs are already known to be perfect.
    Trusted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionTrace {
    pub plan: ExtensionPlan,
    /// The `m x n` input rectangle.
    pub base: LabeledRectangle,
    /// The input square after relabeling.
    pub square: LabeledRectangle,
    /// `substitution_column[a]` is the column of `square` where row `a`
    /// holds the overwritten symbol.
    pub substitution_column: Vec<usize>,
    /// `deleted_column_symbols[a] = base(a, plan.column)`.
    pub deleted_column_symbols: Vec<Label>,
    /// The extended rectangle before recanonicalization.
    pub raw: LabeledRectangle,
    /// `labels[k]` is the raw label of canonical symbol `k` in `result`.
    pub labels: Vec<Label>,
    pub result: LatinRectangle,
}

fn check_perfect(input: &'static str, r: &LatinRectangle) -> Result<(), ExtensionError> {
    if is_perfect(r) {
        return Ok(());
    }
    let rep = perfection_report(r);
    Err(ExtensionError::NotPerfect {
        input,
        pf: rep.pf,
        total: rep.total_pairs,
    })
}

/// Extends a canonical rectangle, checking both hypotheses.
pub fn extend(
    r: &LatinRectangle,
    s: &LatinRectangle,
    plan: ExtensionPlan,
) -> Result<ExtensionTrace, ExtensionError> {
    extend_labeled(&r.into(), s, plan, Hypotheses::Checked)
}

pub fn extend_labeled(
    r: &LabeledRectangle,
    s: &LatinRectangle,
    plan: ExtensionPlan,
    hypotheses: Hypotheses,
) -> Result<ExtensionTrace, ExtensionError> {
    let (m, n) = (r.rows(), r.cols());
    if !s.is_square() {
        return Err(ExtensionError::NotSquare {
            rows: s.rows(),
            cols: s.cols(),
        });
    }
    if s.rows() != m {
        return Err(ExtensionError::RowCountMismatch {
            rect: m,
            square: s.rows(),
        });
    }
    if plan.column >= n {
        return Err(ExtensionError::ColumnOutOfRange {
            column: plan.column,
            cols: n,
        });
    }
    let max = r.max_label();
    if plan.relabel_base <= max {
        return Err(ExtensionError::AlphabetOverlap {
            base: plan.relabel_base,
            max,
        });
    }
    let hi = plan
        .relabel_base
        .checked_add(m as Label)
        .ok_or(ExtensionError::TooWide(
            u64::from(plan.relabel_base) + m as u64,
        ))?;
    if plan.symbol < plan.relabel_base || plan.symbol >= hi {
        return Err(ExtensionError::SymbolOutOfRange {
            symbol: plan.symbol,
            lo: plan.relabel_base,
            hi,
        });
    }
    let width = n + m - 1;
    if width > MAX_SYMBOLS {
        return Err(ExtensionError::TooWide(width as u64));
    }
    if hypotheses == Hypotheses::Checked {
        check_perfect("rectangle", &r.canonicalize()?.0)?;
        check_perfect("square", s)?;
    }

    let local = (plan.symbol - plan.relabel_base) as Symbol;
    let square = LabeledRectangle::from_latin(s, plan.relabel_base);
    let substitution_column: Vec<usize> = (0..m).map(|a| s.column_of(a, local)).collect();
    let deleted_column_symbols: Vec<Label> = (0..m).map(|a| r.get(a, plan.column)).collect();

    let mut cells = Vec::with_capacity(m * width);
    for a in 0..m {
        cells.extend(
            r.row(a)
                .iter()
                .enumerate()
                .filter(|&(d, _)| d != plan.column)
                .map(|(_, &x)| x),
        );
        cells.extend(square.row(a).iter().enumerate().map(|(d, &x)| {
            if d == substitution_column[a] {
                deleted_column_symbols[a]
            } else {
                x
            }
        }));
    }
    let raw = LabeledRectangle {
        rows: m,
        cols: width,
        cells,
    };
    let (result, labels) = raw.canonicalize()?;

    Ok(ExtensionTrace {
        plan,
        base: r.clone(),
        square,
        substitution_column,
        deleted_column_symbols,
        raw,
        labels,
        result,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("pair ({a}, {b}), step {step}: expected {expected}, found {found} ({phase})")]
pub struct CertificationError {
    pub a: usize,
    pub b: usize,
    pub step: usize,
    pub expected: Label,
    pub found: Label,
    pub phase: &'static str,
}

/// The full cycle of `T_{a,b}` from `R(b, c)`, in raw labels, with the
/// lengths of its four phases.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairWitness {
    pub a: usize,
    pub b: usize,
    pub cycle: Vec<Label>,
    pub phases: [usize; 4],
}

/// Replays the four-phase walk for one ordered pair.
pub fn certify_pair(
    trace: &ExtensionTrace,
    a: usize,
    b: usize,
) -> Result<PairWitness, CertificationError> {
    let (m, n) = (trace.base.rows(), trace.base.cols());
    let c = trace.plan.column;
    let t_map = trace.raw.pair_map(a, b);
    let r_map = trace.base.pair_map(a, b);
    let s_map = trace.square.pair_map(a, b);
    let start = trace.base.get(b, c);

    let mut cycle = vec![start];
    let mut x = start;
    let mut step = 0;
    let mut advance = |x: &mut Label,
                       cycle: &mut Vec<Label>,
                       expected: Label,
                       phase: &'static str|
     -> Result<(), CertificationError> {
        step += 1;
        let found = t_map[&*x];
        if found != expected {
            return Err(CertificationError {
                a,
                b,
                step,
                expected,
                found,
                phase,
            });
        }
        *x = found;
        cycle.push(found);
        Ok(())
    };

    for _ in 0..n - 1 {
        let expected = r_map[&x];
        advance(&mut x, &mut cycle, expected, "rectangle walk")?;
    }
    let arrival = trace.base.get(a, c);
    if x != arrival {
        return Err(CertificationError {
            a,
            b,
            step: n - 1,
            expected: arrival,
            found: x,
            phase: "arrival at deleted symbol",
        });
    }
    let entry = trace.square.get(b, trace.substitution_column[a]);
    advance(&mut x, &mut cycle, entry, "crossing into square")?;
    for _ in 0..m - 2 {
        let expected = s_map[&x];
        advance(&mut x, &mut cycle, expected, "square walk")?;
    }
    let exit = trace.square.get(a, trace.substitution_column[b]);
    if x != exit {
        return Err(CertificationError {
            a,
            b,
            step: n + m - 2,
            expected: exit,
            found: x,
            phase: "arrival at square exit",
        });
    }
    // closing step returns to the start and is not repeated in the cycle
    let found = t_map[&x];
    if found != start {
        return Err(CertificationError {
            a,
            b,
            step: n + m - 1,
            expected: start,
            found,
            phase: "closing",
        });
    }
    let distinct: HashSet<Label> = cycle.iter().copied().collect();
    if distinct.len() != n + m - 1 {
        return Err(CertificationError {
            a,
            b,
            step: n + m - 1,
            expected: (n + m - 1) as Label,
            found: distinct.len() as Label,
            phase: "distinct symbols on cycle",
        });
    }
    Ok(PairWitness {
        a,
        b,
        cycle,
        phases: [n - 1, 1, m - 2, 1],
    })
}

/// Witnesses for every pair `a < b` of the extended rectangle.
pub fn certify_extension(trace: &ExtensionTrace) -> Result<Vec<PairWitness>, CertificationError> {
    let m = trace.base.rows();
    let mut out = Vec::with_capacity(m * m.saturating_sub(1) / 2);
    for a in 0..m {
        for b in a + 1..m {
            out.push(certify_pair(trace, a, b)?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChainError {
    #[error("m must be odd and at least 3, got {0}")]
    BadRowCount(u64),
    #[error("target residue {i} must be odd and in 1..={max}")]
    BadResidue { i: u64, max: u64 },
    #[error(transparent)]
    Prime(#[from] GeneratorError),
    #[error("chain width {0} exceeds the supported maximum")]
    TooWide(u64),
    #[error(transparent)]
    Extension(#[from] ExtensionError),
    #[error(transparent)]
    Truncate(#[from] TransformError),
    #[error("chain output is not a perfect {rows}x{cols} rectangle")]
    VerificationFailed { rows: usize, cols: usize },
}

/// Schedule of extensions reaching width `n_i = r + j(r - 1)` with
/// `n_i = i (mod m - 1)`, starting from `cyclic(r)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainPlan {
    pub m: u64,
    pub r: u64,
    pub target_i: u64,
    pub j: u64,
    pub width: u64,
    pub steps: Vec<ExtensionPlan>,
}

/// Default steps for `j` self-extensions of an order-`r` square.
pub fn default_steps(r: u64, j: u64) -> Result<Vec<ExtensionPlan>, ChainError> {
    (0..j)
        .map(|t| {
            let w = r + t * (r - 1);
            if w > MAX_SYMBOLS as u64 {
                return Err(ChainError::TooWide(w));
            }
            Ok(ExtensionPlan::default_for(w as usize))
        })
        .collect()
}

pub fn plan_chain(m: u64, target_i: u64) -> Result<ChainPlan, ChainError> {
    if m < 3 || m % 2 == 0 {
        return Err(ChainError::BadRowCount(m));
    }
    if target_i % 2 == 0 || target_i < 1 || target_i > m - 2 {
        return Err(ChainError::BadResidue {
            i: target_i,
            max: m - 2,
        });
    }
    let r = prime_in_progression(m)?;
    let j = (m - 2 - target_i) / 2;
    let width = j
        .checked_mul(r - 1)
        .and_then(|x| x.checked_add(r))
        .ok_or(ChainError::TooWide(u64::MAX))?;
    assert_eq!(width % (m - 1), target_i % (m - 1), "chain congruence");
    assert!(width >= m);
    let steps = default_steps(r, j)?;
    Ok(ChainPlan {
        m,
        r,
        target_i,
        j,
        width,
        steps,
    })
}

/// Applies `steps` in order, each extending the running rectangle by
/// `seed` (a perfect square with the same number of rows).
pub fn extend_chain(
    seed: &LatinRectangle,
    steps: &[ExtensionPlan],
) -> Result<LatinRectangle, ExtensionError> {
    let mut current = seed.clone();
    for step in steps {
        current = extend_labeled(&(&current).into(), seed, *step, Hypotheses::Trusted)?.result;
    }
    Ok(current)
}

/// Builds the planned rectangle and verifies it is perfect.
pub fn execute_chain(plan: &ChainPlan) -> Result<LatinRectangle, ChainError> {
    if plan.width > MAX_SYMBOLS as u64 {
        return Err(ChainError::TooWide(plan.width));
    }
    let seed = cyclic(plan.r as usize)?;
    let full = extend_chain(&seed, &plan.steps)?;
    let out = full.truncate_rows(plan.m as usize)?;
    if out.cols() as u64 != plan.width || !is_perfect(&out) {
        return Err(ChainError::VerificationFailed {
            rows: out.rows(),
            cols: out.cols(),
        });
    }
    Ok(out)
}
