//! Row-pair permutations and the perfect-pair count.
//!
//! For rows `a` and `b` of a Latin rectangle, `R_{a,b}` sends the symbol in
//! row `a` of each column to the symbol in row `b` of the same column. The
//! pair is perfect when that permutation is a single `n`-cycle, and the
//! rectangle is perfect when every pair is.

use std::fmt::{self, Write as _};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::latin::{LatinRectangle, Symbol};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PairError {
    #[error("row index {index} out of range for {rows} rows")]
    RowOutOfRange { index: usize, rows: usize },
    #[error("rows must be distinct (got {0} twice)")]
    SameRow(usize),
    #[error("symbol {symbol} out of range for {cols} symbols")]
    SymbolOutOfRange { symbol: usize, cols: usize },
    #[error("pair ({a}, {b}) is not perfect: cycle lengths {}", join_lengths(.cycle_lengths))]
    NotPerfect {
        a: usize,
        b: usize,
        cycle_lengths: Vec<usize>,
    },
}

/// `map[x] = y` iff some column holds `x` in row `a` and `y` in row `b`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowPairPermutation {
    pub a: usize,
    pub b: usize,
    pub map: Vec<Symbol>,
}

/// Disjoint cycles covering the alphabet, longest first; ties keep the
/// order of their minimum symbols, and each cycle starts at its minimum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleStructure {
    pub cycles: Vec<Vec<Symbol>>,
}

impl CycleStructure {
    pub fn lengths(&self) -> Vec<usize> {
        self.cycles.iter().map(Vec::len).collect()
    }

    pub fn is_single_cycle(&self) -> bool {
        self.cycles.len() == 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ImperfectPair {
    pub a: usize,
    pub b: usize,
    /// Cycle lengths of `R_{a,b}`, descending.
    pub cycle_lengths: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerfectionReport {
    pub pf: usize,
    pub total_pairs: usize,
    /// Imperfect pairs in lexicographic `(a, b)` order, `a < b`.
    pub imperfect: Vec<ImperfectPair>,
    pub perfect: bool,
}

impl PerfectionReport {
    pub(crate) fn from_imperfect(rows: usize, imperfect: Vec<ImperfectPair>) -> Self {
        let total_pairs = rows * rows.saturating_sub(1) / 2;
        let pf = total_pairs - imperfect.len();
        PerfectionReport {
            pf,
            total_pairs,
            perfect: imperfect.is_empty(),
            imperfect,
        }
    }

    /// The text block printed by `verify`.
    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for PerfectionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "pf {}", self.pf)?;
        writeln!(f, "total {}", self.total_pairs)?;
        writeln!(f, "perfect {}", self.perfect)?;
        for p in &self.imperfect {
            writeln!(f, "{} {} : {}", p.a, p.b, join_lengths(&p.cycle_lengths))?;
        }
        Ok(())
    }
}

pub(crate) fn join_lengths(lengths: &[usize]) -> String {
    let mut s = String::new();
    for (i, l) in lengths.iter().enumerate() {
        if i > 0 {
            s.push('+');
        }
        let _ = write!(s, "{l}");
    }
    s
}

fn check_pair(r: &LatinRectangle, a: usize, b: usize) -> Result<(), PairError> {
    for index in [a, b] {
        if index >= r.rows() {
            return Err(PairError::RowOutOfRange {
                index,
                rows: r.rows(),
            });
        }
    }
    if a == b {
        return Err(PairError::SameRow(a));
    }
    Ok(())
}

#[inline]
fn step(r: &LatinRectangle, a: usize, b: usize, x: Symbol) -> Symbol {
    r.get(b, r.column_of(a, x))
}

pub fn pair_permutation(
    r: &LatinRectangle,
    a: usize,
    b: usize,
) -> Result<RowPairPermutation, PairError> {
    check_pair(r, a, b)?;
    let mut map = vec![0; r.cols()];
    for c in 0..r.cols() {
        map[r.get(a, c) as usize] = r.get(b, c);
    }
    Ok(RowPairPermutation { a, b, map })
}

/// Cycle decomposition of an arbitrary permutation of `0..map.len()`.
pub fn cycles_of(map: &[Symbol]) -> CycleStructure {
    let mut visited = vec![false; map.len()];
    let mut cycles = Vec::new();
    for start in 0..map.len() {
        if visited[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut x = start;
        while !visited[x] {
            visited[x] = true;
            cycle.push(x as Symbol);
            x = map[x] as usize;
        }
        cycles.push(cycle);
    }
    cycles.sort_by_key(|c| std::cmp::Reverse(c.len()));
    CycleStructure { cycles }
}

pub fn cycle_structure(p: &RowPairPermutation) -> CycleStructure {
    cycles_of(&p.map)
}

/// Whether `R_{a,b}` is one `n`-cycle, without allocating.
pub fn is_perfect_pair(r: &LatinRectangle, a: usize, b: usize) -> bool {
    let n = r.cols();
    let mut x = step(r, a, b, 0);
    let mut len = 1;
    while x != 0 {
        x = step(r, a, b, x);
        len += 1;
    }
    len == n
}

fn imperfect_pair(r: &LatinRectangle, a: usize, b: usize) -> Option<ImperfectPair> {
    if is_perfect_pair(r, a, b) {
        return None;
    }
    let p = pair_permutation(r, a, b).expect("indices checked by caller");
    Some(ImperfectPair {
        a,
        b,
        cycle_lengths: cycle_structure(&p).lengths(),
    })
}

fn pairs(rows: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..rows).flat_map(move |a| (a + 1..rows).map(move |b| (a, b)))
}

/// Evaluates all `m(m-1)/2` pairs in `O(m^2 n)`.
pub fn perfection_report(r: &LatinRectangle) -> PerfectionReport {
    let imperfect = pairs(r.rows())
        .filter_map(|(a, b)| imperfect_pair(r, a, b))
        .collect();
    PerfectionReport::from_imperfect(r.rows(), imperfect)
}

/// Same report as [`perfection_report`], with pairs spread over the
/// current rayon pool.
pub fn perfection_report_parallel(r: &LatinRectangle) -> PerfectionReport {
    let all: Vec<(usize, usize)> = pairs(r.rows()).collect();
    let imperfect = all
        .par_iter()
        .filter_map(|&(a, b)| imperfect_pair(r, a, b))
        .collect();
    PerfectionReport::from_imperfect(r.rows(), imperfect)
}

pub fn is_perfect(r: &LatinRectangle) -> bool {
    pairs(r.rows()).all(|(a, b)| is_perfect_pair(r, a, b))
}

/// The orbit of `start` under `R_{a,b}`, as a witness that the pair is
/// perfect. The list has exactly `n` entries and stops one step before
/// returning to `start`.
pub fn certify_pair_cycle(
    r: &LatinRectangle,
    a: usize,
    b: usize,
    start: Symbol,
) -> Result<Vec<Symbol>, PairError> {
    check_pair(r, a, b)?;
    if start as usize >= r.cols() {
        return Err(PairError::SymbolOutOfRange {
            symbol: start as usize,
            cols: r.cols(),
        });
    }
    let mut orbit = vec![start];
    let mut x = step(r, a, b, start);
    while x != start {
        orbit.push(x);
        x = step(r, a, b, x);
    }
    if orbit.len() != r.cols() {
        let p = pair_permutation(r, a, b)?;
        return Err(PairError::NotPerfect {
            a,
            b,
            cycle_lengths: cycle_structure(&p).lengths(),
        });
    }
    Ok(orbit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::cyclic;
    use proptest::prelude::*;

    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }

    /// Pair `(a, b)` of `cyclic(n)` maps `x` to `x - (b - a)`; it is an
    /// `n`-cycle iff `gcd(b - a, n) = 1`, and each shift `d` occurs for
    /// `n - d` pairs.
    fn cyclic_pf_oracle(n: usize) -> usize {
        (1..n).filter(|&d| gcd(d, n) == 1).map(|d| n - d).sum()
    }

    #[test]
    fn cyclic_five_pair_zero_one() {
        let r = cyclic(5).unwrap();
        let p = pair_permutation(&r, 0, 1).unwrap();
        assert_eq!(p.map, vec![4, 0, 1, 2, 3]);
        let cs = cycle_structure(&p);
        assert_eq!(cs.lengths(), vec![5]);
        assert_eq!(
            certify_pair_cycle(&r, 0, 1, 3).unwrap(),
            vec![3, 2, 1, 0, 4]
        );
    }

    #[test]
    fn reversed_pair_is_inverse() {
        let r = cyclic(7).unwrap();
        for a in 0..7 {
            for b in 0..7 {
                if a == b {
                    continue;
                }
                let p = pair_permutation(&r, a, b).unwrap();
                let q = pair_permutation(&r, b, a).unwrap();
                for x in 0..7 {
                    assert_eq!(q.map[p.map[x] as usize] as usize, x);
                }
            }
        }
    }

    #[test]
    fn cyclic_nine_shift_three() {
        let r = cyclic(9).unwrap();
        let p = pair_permutation(&r, 0, 3).unwrap();
        let expected: Vec<Symbol> = (0..9).map(|x| ((x + 9 - 3) % 9) as Symbol).collect();
        assert_eq!(p.map, expected);
        let cs = cycle_structure(&p);
        assert_eq!(cs.lengths(), vec![3, 3, 3]);
        assert_eq!(cs.cycles, vec![vec![0, 6, 3], vec![1, 7, 4], vec![2, 8, 5]]);
    }

    #[test]
    fn identity_is_all_fixed_points() {
        let cs = cycles_of(&[0, 1, 2, 3]);
        assert_eq!(cs.lengths(), vec![1, 1, 1, 1]);
    }

    #[test]
    fn pair_errors() {
        let r = cyclic(3).unwrap();
        assert_eq!(pair_permutation(&r, 1, 1), Err(PairError::SameRow(1)));
        assert!(matches!(
            pair_permutation(&r, 0, 3),
            Err(PairError::RowOutOfRange { index: 3, .. })
        ));
        let r9 = cyclic(9).unwrap();
        assert_eq!(
            certify_pair_cycle(&r9, 0, 3, 0),
            Err(PairError::NotPerfect {
                a: 0,
                b: 3,
                cycle_lengths: vec![3, 3, 3]
            })
        );
    }

    #[test]
    fn order_two_orbit() {
        let r = cyclic(2).unwrap();
        assert_eq!(certify_pair_cycle(&r, 0, 1, 0).unwrap(), vec![0, 1]);
    }

    #[test]
    fn reports() {
        let rep = perfection_report(&cyclic(5).unwrap());
        assert_eq!((rep.pf, rep.total_pairs, rep.perfect), (10, 10, true));

        let single = LatinRectangle::from_rows(&[vec![2, 0, 1]]).unwrap();
        let rep = perfection_report(&single);
        assert_eq!((rep.pf, rep.total_pairs, rep.perfect), (0, 0, true));

        let rep = perfection_report(&cyclic(9).unwrap());
        assert_eq!((rep.pf, rep.total_pairs, rep.perfect), (27, 36, false));
        assert_eq!(rep.imperfect.len(), 9);
        assert_eq!(rep.imperfect[0].a, 0);
        assert_eq!(rep.imperfect[0].b, 3);
        assert!(rep.to_text().contains("0 3 : 3+3+3\n"));
        assert!(rep
            .to_text()
            .starts_with("pf 27\ntotal 36\nperfect false\n"));
    }

    #[test]
    fn cyclic_gcd_oracle() {
        for n in [3, 5, 7, 9, 15, 21] {
            let rep = perfection_report(&cyclic(n).unwrap());
            assert_eq!(rep.pf, cyclic_pf_oracle(n), "n = {n}");
        }
        assert_eq!(cyclic_pf_oracle(9), 27);
        assert_eq!(cyclic_pf_oracle(15), 60);
    }

    #[test]
    fn parallel_matches_sequential() {
        for n in [9, 15, 21, 25, 13] {
            let r = cyclic(n).unwrap();
            assert_eq!(perfection_report(&r), perfection_report_parallel(&r));
        }
    }

    #[test]
    fn truncation_keeps_pair_maps() {
        let r = cyclic(15).unwrap();
        let t = r.truncate_rows(6).unwrap();
        for a in 0..6 {
            for b in 0..6 {
                if a != b {
                    assert_eq!(
                        pair_permutation(&t, a, b).unwrap().map,
                        pair_permutation(&r, a, b).unwrap().map
                    );
                }
            }
        }
        assert!(perfection_report(&cyclic(7).unwrap().truncate_rows(3).unwrap()).perfect);
    }

    proptest! {
        #[test]
        fn cycles_cover_and_no_fixed_points(n in 2usize..30, m in 2usize..30,
                                            rot in 0usize..30, flip in any::<bool>()) {
            let m = m.min(n);
            let cols: Vec<usize> = (0..n).map(|c| (c + rot) % n).collect();
            let syms: Vec<usize> = if flip { (0..n).rev().collect() } else { (0..n).collect() };
            let rows: Vec<usize> = (0..m).collect();
            let r = cyclic(n).unwrap().truncate_rows(m).unwrap().permute(&rows, &cols, &syms).unwrap();
            for a in 0..m {
                for b in 0..m {
                    if a == b { continue; }
                    let cs = cycle_structure(&pair_permutation(&r, a, b).unwrap());
                    prop_assert_eq!(cs.lengths().iter().sum::<usize>(), n);
                    prop_assert!(cs.lengths().iter().all(|&l| l > 1));
                    let mut all: Vec<Symbol> = cs.cycles.concat();
                    all.sort();
                    prop_assert_eq!(all, (0..n as Symbol).collect::<Vec<_>>());
                }
            }
        }

        #[test]
        fn pf_invariant_under_isotopy(seed in any::<u64>(), n in 1usize..14) {
            use rand::{seq::SliceRandom, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let r = cyclic(n).unwrap();
            let mut rp: Vec<usize> = (0..n).collect();
            let mut cp = rp.clone();
            let mut sp = rp.clone();
            rp.shuffle(&mut rng);
            cp.shuffle(&mut rng);
            sp.shuffle(&mut rng);
            let p = r.permute(&rp, &cp, &sp).unwrap();
            prop_assert_eq!(perfection_report(&p).pf, perfection_report(&r).pf);
        }
    }
}
