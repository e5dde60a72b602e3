//! The one-variable families that bound `S_k` from below once more than half
//! of the largest coordinates coincide.
//!
//! With `n = 2l` (even) and `k = l - t - 1`, or `n = 2l + 1` (odd) and
//! `k = l - t`, and `y = sqrt(x_k / x_n)`:
//!
//! ```text
//! even: f(y,t) = sum_{i=1}^{n-2} c_{n-i} C(l+t, i-1) - (n-2)! ((l+t)/(y+1) + (l-t-2) y/(y+1))
//! odd:  g(y,t) = sum_{i=1}^{n-2} c_{n-i} C(l+t, i-1) - (n-2)! ((l+t)/(y+1) + (l-t-1) y/(y+1))
//! ```
//!
//! The combinatorial part is always summed in exact integers.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::combinatorics::{binomial, derangements, factorial, rat_to_f64, ExactInt, ExactRat};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AuxKind {
    Even,
    Odd,
}

/// Parameters `(n, l, t, y)` of `f(y,t)` (even `n`) or `g(y,t)` (odd `n`).
#[derive(Debug, Clone, PartialEq)]
pub struct AuxParams<Y = f64> {
    pub kind: AuxKind,
    pub n: usize,
    pub ell: usize,
    pub t: usize,
    pub y: Y,
}

/// Values that can be checked against `[0, 1]`.
pub trait UnitInterval {
    fn in_unit_interval(&self) -> bool;
}

impl UnitInterval for f64 {
    fn in_unit_interval(&self) -> bool {
        (0.0..=1.0).contains(self)
    }
}

impl UnitInterval for ExactRat {
    fn in_unit_interval(&self) -> bool {
        *self >= ExactRat::zero() && *self <= ExactRat::one()
    }
}

impl<Y: UnitInterval> AuxParams<Y> {
    /// Even case: `n = 2l >= 4`, `t in 0..=l-2`.
    pub fn even(n: usize, t: usize, y: Y) -> Result<Self> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(Error::ParameterOutOfRange(format!(
                "even family needs even n >= 4, got {n}"
            )));
        }
        let ell = n / 2;
        if t > ell - 2 {
            return Err(Error::ParameterOutOfRange(format!(
                "even family needs 0 <= t <= {}, got {t}",
                ell - 2
            )));
        }
        Self::with_y(AuxKind::Even, n, ell, t, y)
    }

    /// Odd case: `n = 2l + 1 >= 5`, `t in 1..=l-1`.
    pub fn odd(n: usize, t: usize, y: Y) -> Result<Self> {
        if n < 5 || n % 2 != 1 {
            return Err(Error::ParameterOutOfRange(format!(
                "odd family needs odd n >= 5, got {n}"
            )));
        }
        let ell = n / 2;
        if t < 1 || t > ell - 1 {
            return Err(Error::ParameterOutOfRange(format!(
                "odd family needs 1 <= t <= {}, got {t}",
                ell - 1
            )));
        }
        Self::with_y(AuxKind::Odd, n, ell, t, y)
    }

    fn with_y(kind: AuxKind, n: usize, ell: usize, t: usize, y: Y) -> Result<Self> {
        if !y.in_unit_interval() {
            return Err(Error::ParameterOutOfRange("y must lie in [0, 1]".into()));
        }
        Ok(Self { kind, n, ell, t, y })
    }
}

impl<Y> AuxParams<Y> {
    /// Sorted position (1-based) of the coordinate `x_k` this `t` stands for.
    pub fn k(&self) -> usize {
        match self.kind {
            AuxKind::Even => self.ell - self.t - 1,
            AuxKind::Odd => self.ell - self.t,
        }
    }

    /// Coefficient of `y/(y+1)`: the count of coordinates below `x_k`.
    fn lower_count(&self) -> usize {
        match self.kind {
            AuxKind::Even => self.ell - self.t - 2,
            AuxKind::Odd => self.ell - self.t - 1,
        }
    }

    /// Coefficient of `1/(y+1)`: the count of tail coordinates in `x without k, n`.
    fn upper_count(&self) -> usize {
        self.ell + self.t
    }
}

/// `sum_{i=1}^{n-2} c_{n-i} C(m, i-1)`.
pub fn derangement_binomial_sum(n: usize, m: usize) -> ExactInt {
    (1..=n - 2)
        .map(|i| derangements(n - i) * binomial(m, i - 1))
        .fold(BigUint::zero(), |a, b| a + b)
}

fn combinatorial_part(p: &AuxParams<impl Sized>) -> ExactInt {
    derangement_binomial_sum(p.n, p.upper_count())
}

/// The family value divided by `(n-2)!`, in floats. The exact combinatorial
/// part is divided before rounding, so there is no cancellation against
/// `(n-2)!`-sized terms.
pub fn aux_scaled(p: &AuxParams<f64>) -> f64 {
    let head = ExactRat::new(
        combinatorial_part(p).into(),
        factorial(p.n - 2).into(),
    );
    let y = p.y;
    rat_to_f64(&head) - (p.upper_count() as f64 + p.lower_count() as f64 * y) / (y + 1.0)
}

/// Float value of `f(y,t)` or `g(y,t)` according to `p.kind`.
pub fn aux_value(p: &AuxParams<f64>) -> f64 {
    aux_scaled(p) * crate::combinatorics::factorial_f64(p.n - 2)
}

/// Exact value of `f(y,t)` or `g(y,t)` for rational `y`.
pub fn aux_value_exact(p: &AuxParams<ExactRat>) -> ExactRat {
    let head = ExactRat::from_integer(combinatorial_part(p).into());
    let one = ExactRat::one();
    let y = &p.y;
    let denom = y + &one;
    let upper = ExactRat::from_integer((p.upper_count() as u64).into());
    let lower = ExactRat::from_integer((p.lower_count() as u64).into());
    let tail = (upper + lower * y) / denom;
    head - ExactRat::from_integer(factorial(p.n - 2).into()) * tail
}

fn expect_kind<Y>(p: &AuxParams<Y>, kind: AuxKind) -> Result<()> {
    if p.kind != kind {
        return Err(Error::ParameterOutOfRange(format!(
            "expected {kind:?} parameters, got {:?}",
            p.kind
        )));
    }
    Ok(())
}

/// `f(y,t)` for even `n`.
pub fn aux_even(p: &AuxParams<f64>) -> Result<f64> {
    expect_kind(p, AuxKind::Even)?;
    Ok(aux_value(p))
}

/// `g(y,t)` for odd `n`.
pub fn aux_odd(p: &AuxParams<f64>) -> Result<f64> {
    expect_kind(p, AuxKind::Odd)?;
    Ok(aux_value(p))
}

pub fn aux_even_exact(p: &AuxParams<ExactRat>) -> Result<ExactRat> {
    expect_kind(p, AuxKind::Even)?;
    Ok(aux_value_exact(p))
}

pub fn aux_odd_exact(p: &AuxParams<ExactRat>) -> Result<ExactRat> {
    expect_kind(p, AuxKind::Odd)?;
    Ok(aux_value_exact(p))
}

/// `sum_{j=0}^{m} c_{m-j} C(m, j) = m!` (permutations of `[m]` split by the
/// number of fixed points), checked in exact integers.
pub fn permutation_count_identity(m: usize) -> bool {
    let lhs = (0..=m)
        .map(|j| derangements(m - j) * binomial(m, j))
        .fold(BigUint::zero(), |a, b| a + b);
    lhs == factorial(m)
}

/// Admissible `t` values for a given `n`.
pub fn admissible_t(n: usize) -> Vec<usize> {
    if n < 4 {
        return Vec::new();
    }
    let ell = n / 2;
    if n.is_multiple_of(2) {
        (0..=ell - 2).collect()
    } else if n >= 5 {
        (1..=ell - 1).collect()
    } else {
        Vec::new()
    }
}

/// Exact parameters at `y = 0` for either parity.
pub fn params_at_zero(n: usize, t: usize) -> Result<AuxParams<ExactRat>> {
    if n.is_multiple_of(2) {
        AuxParams::even(n, t, ExactRat::zero())
    } else {
        AuxParams::odd(n, t, ExactRat::zero())
    }
}
