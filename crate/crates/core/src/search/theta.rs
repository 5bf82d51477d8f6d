//! Estimating `θ(m, i)`: the smallest width `k >= m` with
//! `k = i (mod m - 1)` that admits a perfect `m x k` rectangle.
//!
//! Candidate widths are tried in ascending order. Each one is attempted by
//! truncating a known perfect square, then by extending a known square of
//! some order `r` in `m..k` (width `r + j(r - 1)`), then by direct search
//! within a node budget. Only an exhausted search rules a width out, so a
//! success is exact only when every smaller candidate was ruled out.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{search, SearchMode, SearchQuery, Termination, MAX_SEARCH_COLS};
use crate::extension::{default_steps, extend_chain};
use crate::latin::{LatinRectangle, MAX_SYMBOLS};
use crate::perfection::is_perfect;
use crate::registry::Registry;

/// Largest odd `m` for which `θ(m) = m` is the published value.
pub const KNOWN_THETA_MAX_M: u64 = 27;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ThetaError {
    #[error("m must be odd and at least 3, got {0}")]
    BadRowCount(u64),
    #[error("residue {i} must be odd and in 1..={max}")]
    BadResidue { i: u64, max: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThetaStatus {
    /// The value is certified minimal.
    Exact,
    /// A witness exists at the value but a smaller candidate is undecided.
    UpperBound,
    /// No witness found up to the cutoff.
    UnknownAboveCutoff,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Method {
    /// Truncation of a known perfect square of order `k`.
    Registry,
    /// `extensions` self-extensions of a known square of order `seed_order`.
    Chain { seed_order: u64, extensions: u64 },
    /// Direct backtracking search.
    Search { nodes: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum WidthOutcome {
    Found {
        method: Method,
    },
    /// Exhaustive search found no perfect rectangle of this width.
    Excluded {
        nodes: u64,
    },
    /// Search budget ran out, or the width is beyond the search kernel.
    Undetermined {
        nodes: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WidthAttempt {
    pub width: u64,
    pub outcome: WidthOutcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThetaResult {
    pub m: u64,
    pub i: u64,
    pub value: Option<u64>,
    pub status: ThetaStatus,
    pub witness: Option<LatinRectangle>,
    pub attempts: Vec<WidthAttempt>,
}

/// Per-residue table for one `m` and the resulting bound on `θ(m)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThetaTable {
    pub m: u64,
    pub entries: Vec<ThetaResult>,
    /// `max θ(m, i)` over odd `i`, when every residue has a witness.
    pub bound: Option<u64>,
    pub status: ThetaStatus,
    /// Published value of `θ(m)` where one is known (`m` for odd `m <= 27`).
    pub known_value: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct ThetaSolver {
    pub registry: Registry,
    /// Node budget for each direct search.
    pub search_budget: u64,
    pub threads: usize,
}

impl Default for ThetaSolver {
    fn default() -> Self {
        ThetaSolver {
            registry: Registry::new(),
            search_budget: 2_000_000,
            threads: 1,
        }
    }
}

fn check_m(m: u64) -> Result<(), ThetaError> {
    if m < 3 || m % 2 == 0 {
        return Err(ThetaError::BadRowCount(m));
    }
    Ok(())
}

impl ThetaSolver {
    pub fn new(registry: Registry) -> Self {
        ThetaSolver {
            registry,
            ..Default::default()
        }
    }

    fn via_known_square(&self, m: usize, k: usize) -> Option<LatinRectangle> {
        self.registry.square(k)?.truncate_rows(m).ok()
    }

    fn via_chain(&self, m: usize, k: usize) -> Option<(LatinRectangle, Method)> {
        for r in self.registry.orders_in(m.max(3), k - 1) {
            if (k - r) % (r - 1) != 0 {
                continue;
            }
            let j = ((k - r) / (r - 1)) as u64;
            let seed = self.registry.square(r)?;
            let steps = default_steps(r as u64, j).ok()?;
            let full = extend_chain(&seed, &steps).ok()?;
            let out = full.truncate_rows(m).ok()?;
            return Some((
                out,
                Method::Chain {
                    seed_order: r as u64,
                    extensions: j,
                },
            ));
        }
        None
    }

    fn attempt(&mut self, m: usize, k: usize) -> (WidthOutcome, Option<LatinRectangle>) {
        if let Some(r) = self.via_known_square(m, k) {
            return (
                WidthOutcome::Found {
                    method: Method::Registry,
                },
                Some(r),
            );
        }
        if let Some((r, method)) = self.via_chain(m, k) {
            return (WidthOutcome::Found { method }, Some(r));
        }
        if k > MAX_SEARCH_COLS {
            return (WidthOutcome::Undetermined { nodes: 0 }, None);
        }
        let mut q = SearchQuery::new(m, k, SearchMode::First);
        q.budget = self.search_budget;
        q.threads = self.threads;
        let out = search(&q).expect("query shape checked by caller");
        let nodes = out.stats.nodes;
        match out.termination {
            Termination::Found => {
                let w = out
                    .witnesses
                    .into_iter()
                    .next()
                    .expect("found implies witness");
                if w.is_square() {
                    let _ = self.registry.insert(w.clone());
                }
                (
                    WidthOutcome::Found {
                        method: Method::Search { nodes },
                    },
                    Some(w),
                )
            }
            Termination::Exhausted => (WidthOutcome::Excluded { nodes }, None),
            Termination::BudgetExhausted => (WidthOutcome::Undetermined { nodes }, None),
        }
    }

    /// `θ(m, i)` over candidate widths up to `cutoff`.
    pub fn theta(&mut self, m: u64, i: u64, cutoff: u64) -> Result<ThetaResult, ThetaError> {
        check_m(m)?;
        if i % 2 == 0 || i < 1 || i > m - 2 {
            return Err(ThetaError::BadResidue { i, max: m - 2 });
        }
        let cutoff = cutoff.min(MAX_SYMBOLS as u64);
        let mut attempts = Vec::new();
        let mut k = m - 1 + i;
        while k <= cutoff {
            let (outcome, witness) = self.attempt(m as usize, k as usize);
            attempts.push(WidthAttempt { width: k, outcome });
            if let Some(w) = witness {
                assert!(
                    is_perfect(&w) && w.cols() as u64 == k && w.rows() as u64 == m,
                    "theta witness failed verification"
                );
                let exact = attempts[..attempts.len() - 1]
                    .iter()
                    .all(|a| matches!(a.outcome, WidthOutcome::Excluded { .. }));
                return Ok(ThetaResult {
                    m,
                    i,
                    value: Some(k),
                    status: if exact {
                        ThetaStatus::Exact
                    } else {
                        ThetaStatus::UpperBound
                    },
                    witness: Some(w),
                    attempts,
                });
            }
            k += m - 1;
        }
        Ok(ThetaResult {
            m,
            i,
            value: None,
            status: ThetaStatus::UnknownAboveCutoff,
            witness: None,
            attempts,
        })
    }

    /// Every odd residue of `m`, with `max θ(m, i)` as a bound on `θ(m)`.
    pub fn theta_m(&mut self, m: u64, cutoff: u64) -> Result<ThetaTable, ThetaError> {
        check_m(m)?;
        let entries = (1..=m - 2)
            .step_by(2)
            .map(|i| self.theta(m, i, cutoff))
            .collect::<Result<Vec<_>, _>>()?;
        let status = if entries
            .iter()
            .any(|e| e.status == ThetaStatus::UnknownAboveCutoff)
        {
            ThetaStatus::UnknownAboveCutoff
        } else if entries.iter().all(|e| e.status == ThetaStatus::Exact) {
            ThetaStatus::Exact
        } else {
            ThetaStatus::UpperBound
        };
        let bound = if status == ThetaStatus::UnknownAboveCutoff {
            None
        } else {
            entries.iter().filter_map(|e| e.value).max()
        };
        Ok(ThetaTable {
            m,
            entries,
            bound,
            status,
            known_value: (m <= KNOWN_THETA_MAX_M).then_some(m),
        })
    }
}
