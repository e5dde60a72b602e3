//! Permanent of `M(a)`: diagonal `a`, every off-diagonal entry one.

use crate::error::{Error, Result};
use crate::sympoly::Point;

/// Largest order accepted by [`permanent`].
pub const PERMANENT_MAX_N: usize = 28;

/// The matrix `M(a)`, stored by its diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct OnesPlusDiag {
    diag: Vec<f64>,
}

impl OnesPlusDiag {
    pub fn new(diag: &Point) -> Self {
        Self {
            diag: diag.to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.dim();
        let mut m = vec![1.0; n * n];
        for (i, &d) in self.diag.iter().enumerate() {
            m[i * n + i] = d;
        }
        m
    }
}

/// Neumaier's compensated sum.
#[derive(Debug, Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.carry
    }
}

/// `per(M(a))` by Ryser's inclusion-exclusion formula.
///
/// Uses the Nijenhuis-Wilf form: row sums start at `a_{i,n} - (1/2) sum_j a_{ij}`,
/// which halves the subset count and keeps the products centered. Subsets of
/// the first `n - 1` columns are visited in Gray-code order so each step
/// adds or removes a single column from the running row sums.
pub fn permanent(m: &OnesPlusDiag) -> Result<f64> {
    let n = m.dim();
    if n > PERMANENT_MAX_N {
        return Err(Error::TooLarge {
            what: "permanent",
            max: PERMANENT_MAX_N,
            got: n,
        });
    }
    Ok(ryser_dense(&m.to_dense(), n))
}

fn ryser_dense(a: &[f64], n: usize) -> f64 {
    debug_assert_eq!(a.len(), n * n);
    if n == 0 {
        return 1.0;
    }
    let mut row_sums: Vec<f64> = (0..n)
        .map(|i| {
            let row = &a[i * n..(i + 1) * n];
            row[n - 1] - 0.5 * row.iter().sum::<f64>()
        })
        .collect();
    let mut in_subset = vec![false; n - 1];
    let mut acc = CompensatedSum::default();
    acc.add(row_sums.iter().product());
    let mut sign = 1.0;
    for gray in 1u64..(1u64 << (n - 1)) {
        let col = gray.trailing_zeros() as usize;
        let delta = if in_subset[col] { -1.0 } else { 1.0 };
        in_subset[col] = !in_subset[col];
        for (i, s) in row_sums.iter_mut().enumerate() {
            *s += delta * a[i * n + col];
        }
        sign = -sign;
        acc.add(sign * row_sums.iter().product::<f64>());
    }
    let outer = if (n - 1).is_multiple_of(2) { 2.0 } else { -2.0 };
    outer * acc.value()
}
