//! Cyclic squares, prime utilities and the explicit width bounds.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::latin::{LatinRectangle, Symbol, MAX_SYMBOLS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeneratorError {
    #[error("order must be in 1..={MAX_SYMBOLS}, got {0}")]
    BadOrder(usize),
    #[error("m must be odd and at least 3, got {0}")]
    NotOddAtLeastThree(u64),
    #[error("m must be at least 2, got {0}")]
    TooSmall(u64),
    #[error("no prime r >= {m} with r = {residue} mod {modulus} below {limit}")]
    SearchCeiling {
        m: u64,
        residue: u64,
        modulus: u64,
        limit: u64,
    },
    #[error("bound for m = {0} does not fit in 64 bits")]
    Overflow(u64),
}

/// The cyclic square `grid(a, c) = (c - a) mod n`.
///
/// Row pair `(a, b)` acts as `x -> x - (b - a) mod n`, so the square is
/// perfect exactly when `n` is prime or `n <= 2`.
pub fn cyclic(n: usize) -> Result<LatinRectangle, GeneratorError> {
    if n == 0 || n > MAX_SYMBOLS {
        return Err(GeneratorError::BadOrder(n));
    }
    let cells = (0..n)
        .flat_map(|a| (0..n).map(move |c| ((c + n - a) % n) as Symbol))
        .collect();
    Ok(LatinRectangle::from_cells_unchecked(n, n, cells))
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin, exact for every `u64`.
pub fn is_prime(k: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if k < 2 {
        return false;
    }
    for &p in &WITNESSES {
        if k % p == 0 {
            return k == p;
        }
    }
    let s = (k - 1).trailing_zeros();
    let d = (k - 1) >> s;
    'witness: for &w in &WITNESSES {
        let mut x = pow_mod(w, d, k);
        if x == 1 || x == k - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, k);
            if x == k - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Default ceiling on candidates scanned by [`prime_in_progression`].
pub const DEFAULT_PROGRESSION_LIMIT: u64 = 1 << 40;

/// Smallest prime `r >= m` with `r = m - 2 (mod m - 1)`.
pub fn prime_in_progression(m: u64) -> Result<u64, GeneratorError> {
    prime_in_progression_with_limit(m, DEFAULT_PROGRESSION_LIMIT)
}

pub fn prime_in_progression_with_limit(m: u64, limit: u64) -> Result<u64, GeneratorError> {
    if m < 3 || m % 2 == 0 {
        return Err(GeneratorError::NotOddAtLeastThree(m));
    }
    let modulus = m - 1;
    let residue = m - 2;
    let ceiling = GeneratorError::SearchCeiling {
        m,
        residue,
        modulus,
        limit,
    };
    // m - 2 < m, so the class starts at 2m - 3
    let mut r = residue
        .checked_add(modulus)
        .ok_or_else(|| ceiling.clone())?;
    while r <= limit {
        if is_prime(r) {
            return Ok(r);
        }
        r = r.checked_add(modulus).ok_or_else(|| ceiling.clone())?;
    }
    Err(ceiling)
}

/// Smallest prime in `[m, 2m]`.
pub fn chebyshev_prime(m: u64) -> Result<u64, GeneratorError> {
    if m < 2 {
        return Err(GeneratorError::TooSmall(m));
    }
    (m..=m.saturating_mul(2))
        .find(|&k| is_prime(k))
        .ok_or(GeneratorError::Overflow(m))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundReport {
    pub m: u64,
    /// `74 * floor(m^6.2)`.
    pub unconditional: u64,
    /// `ceil(m^3 (ln m)^2)`, informational only.
    pub conditional: u64,
    pub note: String,
}

pub const CONDITIONAL_NOTE: &str =
    "conditional value assumes the Strong Riemann Hypothesis; informational only";

/// `floor(m^(31/5))`, exactly, via the integer fifth root of `m^31`.
pub fn floor_pow_31_5(m: u64) -> BigUint {
    BigUint::from(m).pow(31).nth_root(5)
}

/// Explicit widths beyond which perfect `m`-row rectangles exist for
/// every odd width. `m` is limited to values whose unconditional bound
/// fits in a `u64` (up to `m = 639`).
pub fn bound(m: u64) -> Result<BoundReport, GeneratorError> {
    if m < 2 {
        return Err(GeneratorError::TooSmall(m));
    }
    let floor = floor_pow_31_5(m);
    let unconditional = u64::try_from(floor * 74u32).map_err(|_| GeneratorError::Overflow(m))?;
    let mf = m as f64;
    let conditional = (mf.powi(3) * mf.ln().powi(2)).ceil();
    Ok(BoundReport {
        m,
        unconditional,
        conditional: conditional as u64,
        note: CONDITIONAL_NOTE.to_string(),
    })
}
