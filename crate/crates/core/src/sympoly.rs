//! Elementary symmetric polynomials `e_k`, their normalized means `s_k`, and
//! leave-out evaluations.
//!
//! All float kernels use the coefficient recurrence for `prod_i (1 + x_i t)`:
//! one linear factor is multiplied in at a time, so on non-negative input
//! every update is a sum of non-negative terms.

use std::ops::Deref;

use num_traits::{One, Zero};

use crate::combinatorics::{binomial, rat_to_f64, ExactRat};
use crate::error::{Error, Result};

/// A point of the closed non-negative orthant.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::EmptyPoint);
        }
        if let Some((index, &value)) = coords
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::InvalidCoordinate { index, value });
        }
        // Normalize -0.0 so that sign-sensitive code never sees it.
        Ok(Self(coords.into_iter().map(|v| v + 0.0).collect()))
    }

    pub fn ones(n: usize) -> Self {
        Self(vec![1.0; n])
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Coordinate-wise square root.
    pub fn sqrt(&self) -> Point {
        Self(self.0.iter().map(|v| v.sqrt()).collect())
    }

    /// The point with the listed coordinates removed.
    pub fn without(&self, removed: &[usize]) -> Result<Point> {
        check_removed(self.dim(), removed)?;
        Ok(Self(
            self.0
                .iter()
                .enumerate()
                .filter(|(i, _)| !removed.contains(i))
                .map(|(_, &v)| v)
                .collect(),
        ))
    }

    pub(crate) fn from_unchecked(coords: Vec<f64>) -> Self {
        debug_assert!(coords.iter().all(|v| v.is_finite() && *v >= 0.0));
        Self(coords)
    }
}

impl Deref for Point {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Point::new(v)
    }
}

/// `(e_0, ..., e_n)` for some point; entry 0 is always 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ElemValues(Vec<f64>);

impl ElemValues {
    pub fn get(&self, k: usize) -> f64 {
        self.0.get(k).copied().unwrap_or(0.0)
    }

    /// Number of variables the values were computed from.
    pub fn degree(&self) -> usize {
        self.0.len() - 1
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for ElemValues {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Coefficients of `prod_i (1 + x_i t)`, truncated after `t^max_degree`.
pub fn elem_up_to(x: &[f64], max_degree: usize) -> Vec<f64> {
    let top = max_degree.min(x.len());
    let mut e = vec![0.0; top + 1];
    e[0] = 1.0;
    for (m, &xi) in x.iter().enumerate() {
        // After m factors only e_0..=e_m are non-zero.
        for k in (1..=(m + 1).min(top)).rev() {
            e[k] += xi * e[k - 1];
        }
    }
    e
}

/// `(e_0(x), ..., e_n(x))`.
pub fn elem_all(x: &[f64]) -> ElemValues {
    ElemValues(elem_up_to(x, x.len()))
}

/// `s_k = e_k / C(n, k)` for `0 <= k <= n`.
pub fn normalized_all(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let binoms = binomials_f64(n);
    elem_all(x)
        .iter()
        .zip(binoms)
        .map(|(e, c)| e / c)
        .collect()
}

/// `C(n, 0), ..., C(n, n)` as floats.
pub(crate) fn binomials_f64(n: usize) -> Vec<f64> {
    (0..=n)
        .map(|k| {
            let c = binomial(n, k);
            num_traits::ToPrimitive::to_f64(&c).unwrap_or(f64::INFINITY)
        })
        .collect()
}

fn check_removed(n: usize, removed: &[usize]) -> Result<()> {
    if removed.len() > 2 {
        return Err(Error::ParameterOutOfRange(format!(
            "at most two coordinates may be removed, got {}",
            removed.len()
        )));
    }
    for (pos, &index) in removed.iter().enumerate() {
        if index >= n {
            return Err(Error::IndexOutOfRange { index, n });
        }
        if removed[..pos].contains(&index) {
            return Err(Error::DuplicateIndex { index });
        }
    }
    Ok(())
}

/// Elementary symmetric values of `x` with up to two coordinates deleted.
///
/// Recomputed from scratch over the remaining coordinates rather than by
/// dividing out the removed factors.
pub fn elem_without(x: &[f64], removed: &[usize]) -> Result<ElemValues> {
    check_removed(x.len(), removed)?;
    let rest: Vec<f64> = x
        .iter()
        .enumerate()
        .filter(|(i, _)| !removed.contains(i))
        .map(|(_, &v)| v)
        .collect();
    Ok(elem_all(&rest))
}

/// Exact `(e_0, ..., e_n)` for rational input.
pub fn elem_all_exact(x: &[ExactRat]) -> Vec<ExactRat> {
    let mut e = vec![ExactRat::zero(); x.len() + 1];
    e[0] = ExactRat::one();
    for (m, xi) in x.iter().enumerate() {
        for k in (1..=m + 1).rev() {
            let add = xi * &e[k - 1];
            e[k] += add;
        }
    }
    e
}

/// Exact `s_k` for rational input.
pub fn normalized_all_exact(x: &[ExactRat]) -> Vec<ExactRat> {
    let n = x.len();
    elem_all_exact(x)
        .into_iter()
        .enumerate()
        .map(|(k, e)| e / ExactRat::from_integer(binomial(n, k).into()))
        .collect()
}

/// Outcome of the Newton (log-concavity) and Maclaurin (monotone means)
/// checks on one point.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct NewtonMaclaurinReport {
    /// Entry `k - 1` holds `s_k^2 >= s_{k-1} s_{k+1}` for `1 <= k <= n-1`.
    pub newton: Vec<bool>,
    /// Entry `k - 1` holds `s_k^{1/k} >= s_{k+1}^{1/(k+1)}` for `1 <= k <= n-1`.
    pub maclaurin: Vec<bool>,
}

impl NewtonMaclaurinReport {
    pub fn all_pass(&self) -> bool {
        self.newton.iter().chain(&self.maclaurin).all(|&b| b)
    }
}

/// Checks both inequality chains with relative slack `tol`.
pub fn newton_maclaurin_check(x: &[f64], tol: f64) -> NewtonMaclaurinReport {
    let s = normalized_all(x);
    let n = x.len();
    let mut newton = Vec::with_capacity(n.saturating_sub(1));
    let mut maclaurin = Vec::with_capacity(n.saturating_sub(1));
    for k in 1..n {
        let lhs = s[k] * s[k];
        let rhs = s[k - 1] * s[k + 1];
        newton.push(lhs - rhs >= -tol * lhs.max(rhs).max(f64::MIN_POSITIVE));
        let a = s[k].powf(1.0 / k as f64);
        let b = s[k + 1].powf(1.0 / (k + 1) as f64);
        maclaurin.push(a - b >= -tol * a.max(b).max(f64::MIN_POSITIVE));
    }
    NewtonMaclaurinReport { newton, maclaurin }
}

/// Exact `s_k` converted to float, for callers that need both views.
pub fn normalized_exact_as_f64(x: &[ExactRat]) -> Vec<f64> {
    normalized_all_exact(x).iter().map(rat_to_f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Subset-enumeration oracle: exponential, test-only.
    fn elem_brute(x: &[f64]) -> Vec<f64> {
        let n = x.len();
        let mut e = vec![0.0; n + 1];
        for mask in 0u32..(1 << n) {
            let prod: f64 = (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| x[i])
                .product();
            e[mask.count_ones() as usize] += prod;
        }
        e
    }

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
    }

    #[test]
    fn point_validation() {
        assert!(matches!(Point::new(vec![]), Err(Error::EmptyPoint)));
        assert!(matches!(
            Point::new(vec![1.0, -0.5]),
            Err(Error::InvalidCoordinate { index: 1, .. })
        ));
        assert!(Point::new(vec![f64::NAN]).is_err());
        assert!(Point::new(vec![f64::INFINITY]).is_err());
        let p = Point::new(vec![-0.0, 2.0]).unwrap();
        assert!(p[0].is_sign_positive());
    }

    #[test]
    fn elem_all_examples() {
        assert_eq!(elem_all(&[1.0; 4]).as_slice(), &[1.0, 4.0, 6.0, 4.0, 1.0]);
        assert_eq!(elem_brute(&[1.0, 2.0, 3.0]), vec![1.0, 6.0, 11.0, 6.0]);
        assert_eq!(elem_all(&[1.0, 2.0, 3.0]).as_slice(), &[1.0, 6.0, 11.0, 6.0]);
        assert_eq!(elem_all(&[0.0; 5]).as_slice(), &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn normalized_examples() {
        assert!(normalized_all(&[1.0; 7]).iter().all(|&s| s == 1.0));
        let s = normalized_all(&[1.0, 2.0, 3.0]);
        assert!((s[2] - 11.0 / 3.0).abs() < 1e-15);
        assert_eq!(normalized_all(&[4.0, 9.0])[2], 36.0);
    }

    #[test]
    fn elem_without_examples() {
        let x = [1.0, 2.0, 3.0];
        // removing the second coordinate (index 1)
        assert_eq!(elem_without(&x, &[1]).unwrap().as_slice(), &[1.0, 4.0, 3.0]);
        assert_eq!(elem_without(&x, &[]).unwrap(), elem_all(&x));
        assert_eq!(
            elem_without(&[1.0; 4], &[0, 3]).unwrap().as_slice(),
            &[1.0, 2.0, 1.0]
        );
        assert!(matches!(
            elem_without(&x, &[3]),
            Err(Error::IndexOutOfRange { index: 3, n: 3 })
        ));
        assert!(matches!(
            elem_without(&x, &[1, 1]),
            Err(Error::DuplicateIndex { index: 1 })
        ));
        assert!(elem_without(&x, &[0, 1, 2]).is_err());
    }

    #[test]
    fn truncated_recurrence_matches_full() {
        let x = [0.5, 3.0, 1.25, 2.0, 0.0, 7.5];
        let full = elem_all(&x);
        let trunc = elem_up_to(&x, 2);
        assert_eq!(&full[..3], trunc.as_slice());
    }

    #[test]
    fn agrees_with_subset_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=12 {
            for _ in 0..20 {
                let x: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..10.0)).collect();
                let fast = elem_all(&x);
                let slow = elem_brute(&x);
                for k in 0..=n {
                    assert!(rel_close(fast[k], slow[k], 1e-12), "n={n} k={k}");
                }
            }
        }
    }

    #[test]
    fn exact_path_matches_float_path() {
        let x: Vec<ExactRat> = [(1, 2), (3, 1), (5, 4), (0, 1)]
            .iter()
            .map(|&(p, q)| ExactRat::new(p.into(), q.into()))
            .collect();
        let xf: Vec<f64> = x.iter().map(rat_to_f64).collect();
        let exact = normalized_exact_as_f64(&x);
        let float = normalized_all(&xf);
        for (a, b) in exact.iter().zip(&float) {
            assert!(rel_close(*a, *b, 1e-15));
        }
    }

    #[test]
    fn newton_maclaurin_examples() {
        let ones = newton_maclaurin_check(&[1.0; 5], 1e-12);
        assert!(ones.all_pass());
        let s = normalized_all(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s[1] * s[1], 6.25);
        assert!((s[0] * s[2] - 35.0 / 6.0).abs() < 1e-14);
        assert!(newton_maclaurin_check(&[1.0, 2.0, 3.0, 4.0], 1e-12).all_pass());
    }

    fn point_strategy() -> impl Strategy<Value = Vec<f64>> {
        (2usize..=10).prop_flat_map(|n| prop::collection::vec(0.0f64..10.0, n))
    }

    proptest! {
        #[test]
        fn newton_maclaurin_hold(x in point_strategy()) {
            prop_assert!(newton_maclaurin_check(&x, 1e-10).all_pass());
        }

        #[test]
        fn permutation_invariant(mut x in point_strategy(), seed in any::<u64>()) {
            let before = elem_all(&x);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for i in (1..x.len()).rev() {
                let j = rng.random_range(0..=i);
                x.swap(i, j);
            }
            let after = elem_all(&x);
            for k in 0..before.len() {
                prop_assert!(rel_close(before[k], after[k], 1e-12));
            }
        }

        #[test]
        fn homogeneous_scaling(x in point_strategy(), c in 0.01f64..5.0) {
            let e = elem_all(&x);
            let scaled: Vec<f64> = x.iter().map(|v| c * v).collect();
            let es = elem_all(&scaled);
            for k in 0..e.len() {
                prop_assert!(rel_close(es[k], c.powi(k as i32) * e[k], 1e-12));
            }
        }

        #[test]
        fn deletion_identity(x in point_strategy(), pick in any::<prop::sample::Index>()) {
            let i = pick.index(x.len());
            let e = elem_all(&x);
            let hat = elem_without(&x, &[i]).unwrap();
            for k in 1..e.len() {
                let rhs = hat.get(k) + x[i] * hat.get(k - 1);
                prop_assert!(rel_close(e[k], rhs, 1e-12));
            }
        }
    }
}
