//! One-factorizations of `K_{n,n}` read from Latin rectangles.
//!
//! Row `a` is the perfect matching joining left vertex `c` (a column) to
//! right vertex `R(a, c)` (a symbol). Two rows form a perfect pair exactly
//! when the union of their matchings is one Hamiltonian cycle on `2n`
//! vertices. The traversal here walks edges of the bipartite graph and
//! never composes row permutations, so it is an independent check on
//! [`crate::perfection`].

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::latin::{LatinRectangle, Symbol};
use crate::perfection::{ImperfectPair, PerfectionReport};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FactorizationError {
    #[error("factor index {index} out of range for {factors} factors")]
    OutOfRange { index: usize, factors: usize },
    #[error("factors must be distinct (got {0} twice)")]
    SameFactor(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OneFactorization {
    pub n: usize,
    /// `factors[a][column] = symbol`.
    pub factors: Vec<Vec<Symbol>>,
    #[serde(skip)]
    right_to_left: Vec<Vec<Symbol>>,
}

pub fn to_factorization(r: &LatinRectangle) -> OneFactorization {
    let n = r.cols();
    let factors: Vec<Vec<Symbol>> = (0..r.rows()).map(|a| r.row(a).to_vec()).collect();
    let right_to_left = factors
        .iter()
        .map(|f| {
            let mut inv = vec![0; n];
            for (c, &x) in f.iter().enumerate() {
                inv[x as usize] = c as Symbol;
            }
            inv
        })
        .collect();
    OneFactorization {
        n,
        factors,
        right_to_left,
    }
}

impl OneFactorization {
    /// Whether two factors share an edge.
    pub fn share_edge(&self, a: usize, b: usize) -> bool {
        self.factors[a]
            .iter()
            .zip(&self.factors[b])
            .any(|(x, y)| x == y)
    }

    /// Whether every factor is a bijection and no two share an edge.
    pub fn is_edge_disjoint(&self) -> bool {
        let m = self.factors.len();
        (0..m).all(|a| (a + 1..m).all(|b| !self.share_edge(a, b)))
    }

    fn check(&self, a: usize, b: usize) -> Result<(), FactorizationError> {
        let factors = self.factors.len();
        for index in [a, b] {
            if index >= factors {
                return Err(FactorizationError::OutOfRange { index, factors });
            }
        }
        if a == b {
            return Err(FactorizationError::SameFactor(a));
        }
        Ok(())
    }

    /// Vertex counts of the cycles of `f_a ∪ f_b`, in order of their
    /// smallest left vertex.
    pub fn union_cycle_lengths(
        &self,
        a: usize,
        b: usize,
    ) -> Result<Vec<usize>, FactorizationError> {
        self.check(a, b)?;
        let fa = &self.factors[a];
        let fb_inv = &self.right_to_left[b];
        let mut visited = vec![false; self.n];
        let mut lengths = Vec::new();
        for start in 0..self.n {
            if visited[start] {
                continue;
            }
            let mut left = start;
            let mut vertices = 0;
            loop {
                visited[left] = true;
                // left --a--> right --b--> next left
                let right = fa[left] as usize;
                left = fb_inv[right] as usize;
                vertices += 2;
                if left == start {
                    break;
                }
            }
            lengths.push(vertices);
        }
        Ok(lengths)
    }

    pub fn union_is_hamiltonian(&self, a: usize, b: usize) -> Result<bool, FactorizationError> {
        self.check(a, b)?;
        let fa = &self.factors[a];
        let fb_inv = &self.right_to_left[b];
        let mut left = 0usize;
        let mut seen = 0;
        loop {
            seen += 1;
            left = fb_inv[fa[left] as usize] as usize;
            if left == 0 {
                break;
            }
        }
        Ok(seen == self.n)
    }

    /// Edge list `u v factor`, left vertices `0..n`, right `n..2n`.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for (id, f) in self.factors.iter().enumerate() {
            for (c, &x) in f.iter().enumerate() {
                let _ = writeln!(out, "{} {} {}", c, self.n + x as usize, id);
            }
        }
        out
    }
}

pub fn union_is_hamiltonian(
    f: &OneFactorization,
    a: usize,
    b: usize,
) -> Result<bool, FactorizationError> {
    f.union_is_hamiltonian(a, b)
}

/// A perfection report computed only through union-graph traversal.
pub fn oracle_perfection(r: &LatinRectangle) -> PerfectionReport {
    let f = to_factorization(r);
    let m = r.rows();
    let mut imperfect = Vec::new();
    for a in 0..m {
        for b in a + 1..m {
            if f.union_is_hamiltonian(a, b).expect("valid pair") {
                continue;
            }
            let mut cycle_lengths: Vec<usize> = f
                .union_cycle_lengths(a, b)
                .expect("valid pair")
                .into_iter()
                .map(|v| v / 2)
                .collect();
            cycle_lengths.sort_unstable_by(|x, y| y.cmp(x));
            imperfect.push(ImperfectPair {
                a,
                b,
                cycle_lengths,
            });
        }
    }
    PerfectionReport::from_imperfect(m, imperfect)
}
