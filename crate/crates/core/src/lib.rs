//! Perfect Latin rectangles: construction, width extension, search and
//! verification.
//!
//! An `m x n` Latin rectangle is perfect when, for every two rows `a` and
//! `b`, the permutation sending the symbol of row `a` to the symbol of row
//! `b` in the same column is a single `n`-cycle.
//!
//! - [`latin`]: the [`LatinRectangle`] type, validation and isotopies.
//! - [`lrect`]: the `LRECT v1` text format.
//! - [`perfection`]: row-pair permutations and the perfect-pair count.
//! - [`generators`]: cyclic squares, primes and explicit width bounds.
//! - [`extension`]: the width-extension construction and chain planner.
//! - [`search`]: backtracking search and `θ(m, i)` estimation.
//! - [`factorization`]: the one-factorization view used as an oracle.

pub mod extension;
pub mod factorization;
pub mod generators;
pub mod latin;
pub mod lrect;
pub mod perfection;
pub mod registry;
pub mod search;

pub use latin::{LatinRectangle, Symbol};
pub use perfection::{perfection_report, PerfectionReport};
