//! JSON payloads printed under `--json`. Each command emits one object;
//! bound, theta and theta-m print the library types directly.
//! See `docs/json.md` for the schema.

use perlat::extension::{ChainPlan, ExtensionPlan, PairWitness};
use perlat::search::{SearchMode, SearchStats, Termination};
use perlat::{LatinRectangle, PerfectionReport};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyOutput {
    pub rows: usize,
    pub cols: usize,
    pub report: PerfectionReport,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessSummary {
    pub a: usize,
    pub b: usize,
    pub cycle_length: usize,
    pub phases: [usize; 4],
}

impl From<&PairWitness> for WitnessSummary {
    fn from(w: &PairWitness) -> Self {
        WitnessSummary {
            a: w.a,
            b: w.b,
            cycle_length: w.cycle.len(),
            phases: w.phases,
        }
    }
}

/// Everything the extension did, including the labels before
/// recanonicalization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceOutput {
    pub plan: ExtensionPlan,
    pub substitution_column: Vec<usize>,
    pub deleted_column_symbols: Vec<u32>,
    pub raw: Vec<Vec<u32>>,
    pub labels: Vec<u32>,
    pub result: LatinRectangle,
    pub witnesses: Vec<WitnessSummary>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainOutput {
    pub plan: ChainPlan,
    pub result: LatinRectangle,
    pub perfect: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchOutput {
    pub rows: usize,
    pub cols: usize,
    pub mode: SearchMode,
    pub reduced: bool,
    pub prune_pairs: bool,
    pub perfect_only: bool,
    pub budget: u64,
    pub stats: SearchStats,
    pub count: u64,
    pub termination: Termination,
    pub witnesses: Vec<LatinRectangle>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleOutput {
    pub perfection: PerfectionReport,
    pub oracle: PerfectionReport,
    pub agree: bool,
}
