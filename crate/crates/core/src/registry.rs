//! Known perfect Latin squares, by order.
//!
//! Orders `1`, `2` and every prime are always available through
//! [`cyclic`]. Other orders enter the registry either from a directory of
//! `<order>.lrect` files or by being discovered at run time.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::generators::{cyclic, is_prime};
use crate::latin::LatinRectangle;
use crate::lrect::{self, LrectError};
use crate::perfection::is_perfect;

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: LrectError },
    #[error("{path}: expected a square of order {order}, found {rows}x{cols}")]
    WrongShape {
        path: PathBuf,
        order: usize,
        rows: usize,
        cols: usize,
    },
    #[error("square of order {0} is not perfect")]
    NotPerfect(usize),
}

#[derive(Debug, Clone, Default)]
pub struct Registry {
    extra: BTreeMap<usize, LatinRectangle>,
}

fn always_known(order: usize) -> bool {
    order == 1 || order == 2 || is_prime(order as u64)
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Loads every `<order>.lrect` file in `dir`. Other files are ignored.
    pub fn load_dir(dir: &Path) -> Result<Self, RegistryError> {
        let io = |path: &Path, source| RegistryError::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut reg = Registry::new();
        let mut entries: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(|e| io(dir, e))?
            .map(|e| e.map(|e| e.path()).map_err(|e| io(dir, e)))
            .collect::<Result<_, _>>()?;
        entries.sort();
        for path in entries {
            let Some(order) = path
                .extension()
                .filter(|e| *e == "lrect")
                .and_then(|_| path.file_stem())
                .and_then(|s| s.to_str())
                .and_then(|s| s.parse::<usize>().ok())
            else {
                continue;
            };
            let text = fs::read_to_string(&path).map_err(|e| io(&path, e))?;
            let square = lrect::parse(&text).map_err(|source| RegistryError::Parse {
                path: path.clone(),
                source,
            })?;
            if square.rows() != order || square.cols() != order {
                return Err(RegistryError::WrongShape {
                    path,
                    order,
                    rows: square.rows(),
                    cols: square.cols(),
                });
            }
            reg.insert(square)?;
        }
        Ok(reg)
    }

    /// Adds a perfect square. Rejects anything else.
    pub fn insert(&mut self, square: LatinRectangle) -> Result<(), RegistryError> {
        if !square.is_square() || !is_perfect(&square) {
            return Err(RegistryError::NotPerfect(square.cols()));
        }
        self.extra.entry(square.cols()).or_insert(square);
        Ok(())
    }

    pub fn contains(&self, order: usize) -> bool {
        always_known(order) || self.extra.contains_key(&order)
    }

    /// A perfect square of the given order, if one is known.
    pub fn square(&self, order: usize) -> Option<LatinRectangle> {
        if let Some(s) = self.extra.get(&order) {
            return Some(s.clone());
        }
        if always_known(order) {
            return cyclic(order).ok();
        }
        None
    }

    /// Known orders in `lo..=hi`, ascending.
    pub fn orders_in(&self, lo: usize, hi: usize) -> Vec<usize> {
        (lo..=hi).filter(|&k| self.contains(k)).collect()
    }

    /// Orders loaded or discovered beyond the built-in ones.
    pub fn extra_orders(&self) -> impl Iterator<Item = usize> + '_ {
        self.extra.keys().copied()
    }
}
