//! Backtracking search for (perfect) Latin rectangles at desk scale.
//!
//! Cells are filled row-major with per-row and per-column occupancy
//! bitsets, so widths are limited to 64. Symbols are tried in ascending
//! order, which makes the first witness the lexicographically smallest
//! one. With pair pruning on, each completed row is tested against every
//! earlier row and the branch is cut as soon as a pair is not one cycle.
//!
//! In reduced mode row 0 is fixed to `0..n-1` and the first column must
//! increase; every rectangle is isotopic to exactly such a form, and
//! isotopy preserves perfection, so reduced search decides existence.

mod theta;

pub use theta::{
    Method, ThetaError, ThetaResult, ThetaSolver, ThetaStatus, ThetaTable, WidthAttempt,
    WidthOutcome, KNOWN_THETA_MAX_M,
};

use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::latin::{LatinRectangle, Symbol};

/// Widest rectangle the bitset kernel handles.
pub const MAX_SEARCH_COLS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    First,
    Count,
    All,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchQuery {
    pub rows: usize,
    pub cols: usize,
    pub mode: SearchMode,
    /// Restrict to reduced rectangles.
    pub reduced: bool,
    /// Maximum number of cell assignments.
    pub budget: u64,
    /// Reject a branch as soon as a completed row forms an imperfect pair.
    pub prune_pairs: bool,
    /// Only accept perfect rectangles. When false the search enumerates
    /// Latin rectangles of the shape.
    pub perfect_only: bool,
    /// Worker threads; 1 keeps the search fully deterministic.
    pub threads: usize,
}

impl SearchQuery {
    pub fn new(rows: usize, cols: usize, mode: SearchMode) -> Self {
        SearchQuery {
            rows,
            cols,
            mode,
            reduced: true,
            budget: 1_000_000_000,
            prune_pairs: true,
            perfect_only: true,
            threads: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SearchStats {
    pub nodes: u64,
    pub prunes: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    /// The whole space was explored.
    Exhausted,
    /// First mode stopped at a witness.
    Found,
    /// The node budget ran out; results are partial.
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome {
    pub witnesses: Vec<LatinRectangle>,
    pub count: u64,
    pub stats: SearchStats,
    pub termination: Termination,
}

impl SearchOutcome {
    pub fn is_complete(&self) -> bool {
        self.termination != Termination::BudgetExhausted
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("shape {rows}x{cols} is invalid (need 1 <= rows <= cols)")]
    BadShape { rows: usize, cols: usize },
    #[error("width {0} exceeds the search limit of {MAX_SEARCH_COLS}")]
    TooWide(usize),
    #[error("budget must be positive")]
    ZeroBudget,
    #[error("thread count must be positive")]
    ZeroThreads,
}

/// Bits `lo..=hi` set.
fn mask_range(lo: u32, hi: u32) -> u64 {
    if lo > hi {
        return 0;
    }
    let upper = if hi >= 63 {
        u64::MAX
    } else {
        (1u64 << (hi + 1)) - 1
    };
    let lower = if lo == 0 { 0 } else { (1u64 << lo) - 1 };
    upper & !lower
}

struct Shared<'a> {
    nodes: &'a AtomicU64,
    stop: &'a AtomicBool,
    /// Smallest branch index that found a witness (first mode).
    best_branch: &'a AtomicUsize,
}

#[derive(Default)]
struct Local {
    count: u64,
    prunes: u64,
    witnesses: Vec<LatinRectangle>,
    truncated: bool,
    frontier: Vec<Vec<u8>>,
}

struct Kernel<'a> {
    q: &'a SearchQuery,
    m: usize,
    n: usize,
    full: u64,
    grid: Vec<u8>,
    inv: Vec<u8>,
    row_used: Vec<u64>,
    col_used: Vec<u64>,
    first_cell: usize,
    frontier_at: Option<usize>,
    branch: usize,
    shared: Shared<'a>,
    local: Local,
}

impl<'a> Kernel<'a> {
    fn new(q: &'a SearchQuery, shared: Shared<'a>) -> Self {
        let (m, n) = (q.rows, q.cols);
        let mut k = Kernel {
            q,
            m,
            n,
            full: mask_range(0, n as u32 - 1),
            grid: vec![0; m * n],
            inv: vec![0; m * n],
            row_used: vec![0; m],
            col_used: vec![0; n],
            first_cell: 0,
            frontier_at: None,
            branch: 0,
            shared,
            local: Local::default(),
        };
        if q.reduced {
            for c in 0..n {
                k.place(c, c as u8);
            }
            k.first_cell = n;
        }
        k
    }

    #[inline]
    fn place(&mut self, cell: usize, x: u8) {
        let (a, c) = (cell / self.n, cell % self.n);
        self.grid[cell] = x;
        self.inv[a * self.n + x as usize] = c as u8;
        self.row_used[a] |= 1 << x;
        self.col_used[c] |= 1 << x;
    }

    #[inline]
    fn unplace(&mut self, cell: usize, x: u8) {
        let (a, c) = (cell / self.n, cell % self.n);
        self.row_used[a] &= !(1 << x);
        self.col_used[c] &= !(1 << x);
    }

    /// Row `a` (complete) forms a single cycle with every earlier row.
    fn row_pairs_ok(&self, a: usize) -> bool {
        let n = self.n;
        (0..a).all(|b| {
            let mut x = 0u8;
            let mut len = 0;
            loop {
                let col = self.inv[b * n + x as usize] as usize;
                x = self.grid[a * n + col];
                len += 1;
                if x == 0 {
                    break;
                }
            }
            len == n
        })
    }

    fn candidates(&self, cell: usize) -> u64 {
        let (a, c) = (cell / self.n, cell % self.n);
        let mut cand = self.full & !self.row_used[a] & !self.col_used[c];
        if self.q.reduced && c == 0 && a > 0 {
            let prev = self.grid[(a - 1) * self.n] as u32;
            // leave room for the remaining rows' increasing first column
            let hi = (self.n - (self.m - a)) as u32;
            cand &= mask_range(prev + 1, hi);
        }
        cand
    }

    fn cancelled(&self) -> bool {
        self.shared.stop.load(Ordering::Relaxed)
            || (self.q.mode == SearchMode::First
                && self.shared.best_branch.load(Ordering::Relaxed) < self.branch)
    }

    fn leaf(&mut self) -> bool {
        if self.q.perfect_only && !self.q.prune_pairs && !(1..self.m).all(|a| self.row_pairs_ok(a))
        {
            return false;
        }
        self.local.count += 1;
        if self.q.mode != SearchMode::Count {
            let cells = self.grid.iter().map(|&x| x as Symbol).collect();
            self.local
                .witnesses
                .push(LatinRectangle::from_cells_unchecked(self.m, self.n, cells));
        }
        if self.q.mode == SearchMode::First {
            self.shared
                .best_branch
                .fetch_min(self.branch, Ordering::Relaxed);
            return true;
        }
        false
    }

    /// Returns true when the whole search should stop.
    fn dfs(&mut self, cell: usize) -> bool {
        let total = self.m * self.n;
        if cell == total {
            return self.leaf();
        }
        if self.frontier_at == Some(cell) {
            let prefix = self.grid[self.first_cell..cell].to_vec();
            self.local.frontier.push(prefix);
            return false;
        }
        let row_end = cell % self.n == self.n - 1;
        let mut cand = self.candidates(cell);
        while cand != 0 {
            let x = cand.trailing_zeros() as u8;
            cand &= cand - 1;
            if self.cancelled() {
                return true;
            }
            if self.shared.nodes.fetch_add(1, Ordering::Relaxed) >= self.q.budget {
                self.local.truncated = true;
                self.shared.stop.store(true, Ordering::Relaxed);
                return true;
            }
            self.place(cell, x);
            let ok = if row_end && self.q.perfect_only && self.q.prune_pairs {
                let ok = self.row_pairs_ok(cell / self.n);
                if !ok {
                    self.local.prunes += 1;
                }
                ok
            } else {
                true
            };
            let stop = ok && self.dfs(cell + 1);
            self.unplace(cell, x);
            if stop {
                return true;
            }
        }
        false
    }
}

fn check_query(q: &SearchQuery) -> Result<(), SearchError> {
    if q.rows == 0 || q.rows > q.cols {
        return Err(SearchError::BadShape {
            rows: q.rows,
            cols: q.cols,
        });
    }
    if q.cols > MAX_SEARCH_COLS {
        return Err(SearchError::TooWide(q.cols));
    }
    if q.budget == 0 {
        return Err(SearchError::ZeroBudget);
    }
    if q.threads == 0 {
        return Err(SearchError::ZeroThreads);
    }
    Ok(())
}

/// Runs a search. Exceeding the budget is not an error: the outcome is
/// returned with [`Termination::BudgetExhausted`] and partial contents.
pub fn search(q: &SearchQuery) -> Result<SearchOutcome, SearchError> {
    check_query(q)?;
    let nodes = AtomicU64::new(0);
    let stop = AtomicBool::new(false);
    let best = AtomicUsize::new(usize::MAX);
    let shared = || Shared {
        nodes: &nodes,
        stop: &stop,
        best_branch: &best,
    };

    let mut root = Kernel::new(q, shared());
    let start = root.first_cell;
    let total = q.rows * q.cols;
    let split = q.threads > 1 && total - start > 2;
    if split {
        root.frontier_at = Some(start + 2);
    }
    let stopped = root.dfs(start);
    let mut root_local = root.local;
    let frontier = std::mem::take(&mut root_local.frontier);

    let mut locals = vec![];
    if split && !stopped && !frontier.is_empty() {
        let run = || {
            frontier
                .par_iter()
                .enumerate()
                .map(|(branch, prefix)| {
                    let mut k = Kernel::new(q, shared());
                    k.branch = branch;
                    for (off, &x) in prefix.iter().enumerate() {
                        k.place(start + off, x);
                    }
                    k.dfs(start + prefix.len());
                    k.local
                })
                .collect::<Vec<_>>()
        };
        locals = match rayon::ThreadPoolBuilder::new()
            .num_threads(q.threads)
            .build()
        {
            Ok(pool) => pool.install(run),
            Err(_) => run(),
        };
    }

    let mut witnesses = std::mem::take(&mut root_local.witnesses);
    let mut count = root_local.count;
    let mut prunes = root_local.prunes;
    let mut truncated = root_local.truncated;
    for l in locals {
        count += l.count;
        prunes += l.prunes;
        truncated |= l.truncated;
        witnesses.extend(l.witnesses);
    }
    if q.mode == SearchMode::First {
        // branch order is lexicographic order
        witnesses.truncate(1);
        count = witnesses.len() as u64;
    }
    let termination = if q.mode == SearchMode::First && !witnesses.is_empty() {
        Termination::Found
    } else if truncated {
        Termination::BudgetExhausted
    } else {
        Termination::Exhausted
    };
    Ok(SearchOutcome {
        witnesses,
        count,
        stats: SearchStats {
            nodes: nodes.load(Ordering::Relaxed).min(q.budget),
            prunes,
        },
        termination,
    })
}
