//! Exact factorials, binomials, derangement numbers and rencontres numbers.
//!
//! Everything here is arbitrary precision. Factorials and derangement numbers
//! are tabulated once (up to [`DEFAULT_TABLE_SIZE`]) behind a [`OnceLock`], so
//! the hot paths in the evaluators only pay for a table lookup.

use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Non-negative arbitrary-precision integer.
pub type ExactInt = BigUint;

/// Arbitrary-precision rational, always kept in lowest terms with a positive
/// denominator.
pub type ExactRat = BigRational;

/// Largest `k` for which `k!` and `c_k` are memoized.
pub const DEFAULT_TABLE_SIZE: usize = 64;

/// Memoized factorials and derangement numbers for `0..=n_max`.
#[derive(Debug, Clone)]
pub struct Tables {
    factorials: Vec<ExactInt>,
    derangements: Vec<ExactInt>,
    factorials_f64: Vec<f64>,
    derangements_f64: Vec<f64>,
}

impl Tables {
    pub fn build(n_max: usize) -> Self {
        let mut factorials = Vec::with_capacity(n_max + 1);
        let mut acc = ExactInt::one();
        factorials.push(acc.clone());
        for k in 1..=n_max {
            acc *= k;
            factorials.push(acc.clone());
        }

        let mut derangements = Vec::with_capacity(n_max + 1);
        derangements.push(ExactInt::one());
        if n_max >= 1 {
            derangements.push(ExactInt::zero());
        }
        for k in 2..=n_max {
            let next = (k - 1) * (&derangements[k - 1] + &derangements[k - 2]);
            derangements.push(next);
        }

        let to_f64 = |v: &ExactInt| v.to_f64().unwrap_or(f64::INFINITY);
        let factorials_f64 = factorials.iter().map(to_f64).collect();
        let derangements_f64 = derangements.iter().map(to_f64).collect();
        Self {
            factorials,
            derangements,
            factorials_f64,
            derangements_f64,
        }
    }

    pub fn n_max(&self) -> usize {
        self.factorials.len() - 1
    }

    pub fn factorial(&self, k: usize) -> Option<&ExactInt> {
        self.factorials.get(k)
    }

    pub fn derangements(&self, k: usize) -> Option<&ExactInt> {
        self.derangements.get(k)
    }
}

/// Process-wide table, built on first use.
pub fn tables() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(|| Tables::build(DEFAULT_TABLE_SIZE))
}

/// `k!`.
pub fn factorial(k: usize) -> ExactInt {
    match tables().factorial(k) {
        Some(v) => v.clone(),
        None => (1..=k).fold(ExactInt::one(), |acc, i| acc * i),
    }
}

/// `k!` as a float (infinite once it overflows `f64`).
pub fn factorial_f64(k: usize) -> f64 {
    match tables().factorials_f64.get(k) {
        Some(&v) => v,
        None => factorial(k).to_f64().unwrap_or(f64::INFINITY),
    }
}

/// `C(n, k)`, with `C(n, k) = 0` whenever `k > n`.
pub fn binomial(n: usize, k: usize) -> ExactInt {
    if k > n {
        return ExactInt::zero();
    }
    let k = k.min(n - k);
    // Each partial product C(n-k+i, i) is an integer, so the division is exact.
    let mut acc = ExactInt::one();
    for i in 1..=k {
        acc *= n - k + i;
        acc /= i;
    }
    acc
}

/// Number of derangements `c_k` of a `k`-element set.
pub fn derangements(k: usize) -> ExactInt {
    match tables().derangements(k) {
        Some(v) => v.clone(),
        None => derangements_alternating(k),
    }
}

/// `c_k` as a float.
pub fn derangements_f64(k: usize) -> f64 {
    match tables().derangements_f64.get(k) {
        Some(&v) => v,
        None => derangements(k).to_f64().unwrap_or(f64::INFINITY),
    }
}

/// `c_k = k! * sum_{j=0}^{k} (-1)^j / j!`, evaluated as the integer sum
/// `sum_j (-1)^j k!/j!`. Independent of the recurrence used for the table.
pub fn derangements_alternating(k: usize) -> ExactInt {
    // k!/j! = (j+1)(j+2)...k, accumulated from j = k downwards.
    let mut total = BigInt::zero();
    let mut falling = BigInt::one();
    for j in (0..=k).rev() {
        if j % 2 == 0 {
            total += &falling;
        } else {
            total -= &falling;
        }
        falling *= j.max(1);
    }
    total
        .to_biguint()
        .expect("derangement count is non-negative")
}

/// Rencontres number `D(n, k) = C(n, k) * c_{n-k}`: permutations of `n`
/// points with exactly `k` fixed points.
pub fn rencontres(n: usize, k: usize) -> Result<ExactInt> {
    if k > n {
        return Err(Error::KExceedsN { n, k });
    }
    Ok(binomial(n, k) * derangements(n - k))
}

/// `d(n, k) = D(n, k) / n!` in lowest terms.
pub fn rencontres_fraction(n: usize, k: usize) -> Result<ExactRat> {
    let count = rencontres(n, k)?;
    Ok(ExactRat::new(count.into(), factorial(n).into()))
}

/// One row of the combinatorics table printed by the CLI.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct TableRow {
    pub k: usize,
    pub factorial: String,
    pub derangements: String,
    pub binomial: String,
    pub rencontres: String,
    pub rencontres_fraction: String,
}

/// Rows `k = 0..=n` of `k!`, `c_k`, `C(n,k)`, `D(n,k)` and `d(n,k)`.
pub fn table_rows(n: usize) -> Vec<TableRow> {
    (0..=n)
        .map(|k| TableRow {
            k,
            factorial: factorial(k).to_string(),
            derangements: derangements(k).to_string(),
            binomial: binomial(n, k).to_string(),
            rencontres: rencontres(n, k).expect("k <= n").to_string(),
            rencontres_fraction: rencontres_fraction(n, k).expect("k <= n").to_string(),
        })
        .collect()
}

/// Converts an exact rational to the nearest representable `f64`.
pub fn rat_to_f64(r: &ExactRat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
