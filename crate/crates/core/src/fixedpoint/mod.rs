//! The fixed-point-measure expectation `L_n`, the pair mean `R_n`, their
//! difference `f_n = L_n - R_n`, and the first and second partials of `f_n`.
//!
//! `L_n(x) = (1/n!) sum_{pi in S_n} prod_{i in fix(pi)} x_i` has three
//! evaluators here:
//!
//! * [`l_formula`], the canonical one: `(1/n!) sum_i c_{n-i} e_i(x)`;
//! * [`l_enumerate`], a direct average over `S_n` (small `n` only);
//! * [`l_permanent`], `per(M(x)) / n!` via Ryser's formula.

mod enumerate;
mod permanent;

use std::borrow::Cow;
use std::sync::OnceLock;

use num_traits::Zero;

pub use enumerate::{l_enumerate, ENUMERATION_MAX_N};
pub use permanent::{permanent, OnesPlusDiag, PERMANENT_MAX_N};

use crate::combinatorics::{derangements, factorial, factorial_f64, rat_to_f64, ExactRat};
use crate::error::{Error, Result};
use crate::sympoly::{elem_all, elem_all_exact, elem_up_to, Point};

const WEIGHT_CACHE_N: usize = 64;

/// `w_i = c_{n-i} / n!` for `0 <= i <= n`, rounded once from exact values.
pub fn measure_weights(n: usize) -> Cow<'static, [f64]> {
    static CACHE: OnceLock<Vec<Vec<f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| (0..=WEIGHT_CACHE_N).map(exact_weights).collect());
    match cache.get(n) {
        Some(w) => Cow::Borrowed(w.as_slice()),
        None => Cow::Owned(exact_weights(n)),
    }
}

fn exact_weights(n: usize) -> Vec<f64> {
    let n_fact = factorial(n);
    (0..=n)
        .map(|i| {
            let w = ExactRat::new(derangements(n - i).into(), n_fact.clone().into());
            rat_to_f64(&w)
        })
        .collect()
}

pub(crate) fn l_formula_raw(x: &[f64]) -> f64 {
    let w = measure_weights(x.len());
    elem_all(x).iter().zip(w.iter()).map(|(e, w)| e * w).sum()
}

/// `s_2(sqrt(x))`; needs at least two coordinates.
pub(crate) fn r_value_raw(x: &[f64]) -> f64 {
    let n = x.len();
    let roots: Vec<f64> = x.iter().map(|v| v.sqrt()).collect();
    let e2 = elem_up_to(&roots, 2)[2];
    e2 / (n * (n - 1) / 2) as f64
}

pub(crate) fn objective_raw(x: &[f64]) -> f64 {
    l_formula_raw(x) - r_value_raw(x)
}

fn require_pair(what: &'static str, n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::DimensionTooSmall {
            what,
            required: 2,
            got: n,
        });
    }
    Ok(())
}

/// `L_n(x) = (1/n!) sum_{i=0}^{n} c_{n-i} e_i(x)`.
pub fn l_formula(x: &Point) -> f64 {
    l_formula_raw(x)
}

/// `L_n(x)` in exact rational arithmetic.
pub fn l_formula_exact(x: &[ExactRat]) -> ExactRat {
    let n = x.len();
    let e = elem_all_exact(x);
    let numerator = e
        .iter()
        .enumerate()
        .fold(ExactRat::zero(), |acc, (i, ei)| {
            acc + ei * ExactRat::from_integer(derangements(n - i).into())
        });
    numerator / ExactRat::from_integer(factorial(n).into())
}

/// `per(M(x)) / n!`.
pub fn l_permanent(x: &Point) -> Result<f64> {
    Ok(permanent(&OnesPlusDiag::new(x))? / factorial_f64(x.dim()))
}

/// `R_n(x) = (1/C(n,2)) sum_{i<j} sqrt(x_i x_j)`.
pub fn r_value(x: &Point) -> Result<f64> {
    require_pair("R_n", x.dim())?;
    Ok(r_value_raw(x))
}

/// `f_n(x) = L_n(x) - R_n(x)` from the canonical evaluator only.
pub fn objective(x: &Point) -> Result<f64> {
    require_pair("f_n", x.dim())?;
    Ok(objective_raw(x))
}

/// All evaluators of `L_n` that are in range, plus `R_n` and `f_n`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MeasureEval {
    pub l_formula: f64,
    /// Present when `n <= ENUMERATION_MAX_N`.
    pub l_enum: Option<f64>,
    /// Present when `n <= PERMANENT_MAX_N`.
    pub l_permanent: Option<f64>,
    pub r: f64,
    /// `l_formula - r`.
    pub f: f64,
}

impl MeasureEval {
    /// Largest disagreement between the cross-check evaluators and
    /// `l_formula`, relative to `|l_formula|` (which is at least `c_n/n!`).
    pub fn max_disagreement(&self) -> f64 {
        let scale = self.l_formula.abs();
        [self.l_enum, self.l_permanent]
            .into_iter()
            .flatten()
            .map(|v| (v - self.l_formula).abs() / scale)
            .fold(0.0, f64::max)
    }
}

/// Evaluates `f_n` and every in-range evaluator of `L_n`.
pub fn f_value(x: &Point) -> Result<MeasureEval> {
    f_value_with_limits(x, ENUMERATION_MAX_N, PERMANENT_MAX_N)
}

/// Like [`f_value`], but runs the cross-check evaluators only up to the given
/// sizes.
pub fn f_value_with_limits(x: &Point, enum_max: usize, perm_max: usize) -> Result<MeasureEval> {
    require_pair("f_n", x.dim())?;
    let n = x.dim();
    let l = l_formula_raw(x);
    let r = r_value_raw(x);
    let l_enum = if n <= enum_max.min(ENUMERATION_MAX_N) {
        Some(l_enumerate(x)?)
    } else {
        None
    };
    let l_permanent = if n <= perm_max.min(PERMANENT_MAX_N) {
        Some(l_permanent(x)?)
    } else {
        None
    };
    Ok(MeasureEval {
        l_formula: l,
        l_enum,
        l_permanent,
        r,
        f: l - r,
    })
}

/// `grad f_n`. Partials at zero coordinates diverge to `-inf` (unless every
/// other coordinate is zero too); those are flagged in `valid` rather than
/// reported as an error.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Gradient {
    pub partials: Vec<f64>,
    pub valid: Vec<bool>,
}

impl Gradient {
    pub fn all_valid(&self) -> bool {
        self.valid.iter().all(|&v| v)
    }

    /// `<grad f, 1>`.
    pub fn sum(&self) -> f64 {
        self.partials.iter().sum()
    }
}

pub(crate) fn gradient_raw(x: &[f64]) -> Gradient {
    let n = x.len();
    let roots: Vec<f64> = x.iter().map(|v| v.sqrt()).collect();
    let pair_scale = 1.0 / (n * (n - 1)) as f64;
    let mut rest = Vec::with_capacity(n - 1);
    let mut partials = Vec::with_capacity(n);
    let mut valid = Vec::with_capacity(n);
    for i in 0..n {
        rest.clear();
        rest.extend(x.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v));
        let l_part = l_formula_raw(&rest) / n as f64;
        let others: f64 = roots
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, r)| r)
            .sum();
        if x[i] > 0.0 {
            partials.push(l_part - pair_scale * others / roots[i]);
            valid.push(true);
        } else if others == 0.0 {
            // R_n vanishes identically along this axis.
            partials.push(l_part);
            valid.push(true);
        } else {
            partials.push(f64::NEG_INFINITY);
            valid.push(false);
        }
    }
    Gradient { partials, valid }
}

/// `df/dx_i = (1/n) L_{n-1}(x without i) - (1/(n(n-1))) sum_{j != i} sqrt(x_j / x_i)`.
pub fn gradient(x: &Point) -> Result<Gradient> {
    require_pair("gradient", x.dim())?;
    Ok(gradient_raw(x))
}

/// `d^2 f / dx_j dx_i`. All coordinates must be strictly positive.
pub fn hessian_entry(x: &Point, i: usize, j: usize) -> Result<f64> {
    let n = x.dim();
    require_pair("hessian", n)?;
    for index in [i, j] {
        if index >= n {
            return Err(Error::IndexOutOfRange { index, n });
        }
    }
    if let Some(index) = x.iter().position(|&v| v <= 0.0) {
        return Err(Error::ZeroCoordinate { index });
    }
    let scale = 1.0 / (n * (n - 1)) as f64;
    if i == j {
        let xi = x[i];
        let sum: f64 = x
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != i)
            .map(|(_, &v)| (v / (xi * xi * xi)).sqrt())
            .sum();
        Ok(0.5 * scale * sum)
    } else {
        let rest = x.without(&[i, j])?;
        Ok(scale * l_formula_raw(&rest) - 0.5 * scale / (x[i] * x[j]).sqrt())
    }
}

/// Full dense Hessian (row-major), for reporting.
pub fn hessian(x: &Point) -> Result<Vec<f64>> {
    let n = x.dim();
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = hessian_entry(x, i, j)?;
            h[i * n + j] = v;
            h[j * n + i] = v;
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::{derangements_f64, rencontres_fraction};
    use crate::sympoly::normalized_all;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pt(v: &[f64]) -> Point {
        Point::new(v.to_vec()).unwrap()
    }

    fn random_point(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Point {
        pt(&(0..n).map(|_| rng.random_range(lo..hi)).collect::<Vec<_>>())
    }

    #[test]
    fn l_formula_examples() {
        for n in 1..=20 {
            assert!((l_formula(&Point::ones(n)) - 1.0).abs() < 1e-13, "n={n}");
        }
        let (a1, a2) = (2.5, 7.0);
        assert!((l_formula(&pt(&[a1, a2])) - (1.0 + a1 * a2) / 2.0).abs() < 1e-14);
        assert!((l_formula(&Point::zeros(3)) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn l_enumerate_examples() {
        assert!((l_enumerate(&Point::ones(6)).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(l_enumerate(&pt(&[4.0, 9.0])).unwrap(), 18.5);
        let x = pt(&[1.0, 0.0, 0.0]);
        assert!((l_enumerate(&x).unwrap() - 0.5).abs() < 1e-15);
        assert!((l_formula(&x) - 0.5).abs() < 1e-15);
        assert!(matches!(
            l_enumerate(&Point::ones(11)),
            Err(Error::TooLarge { max: 10, got: 11, .. })
        ));
    }

    #[test]
    fn permanent_over_factorial_matches() {
        let x = pt(&[0.5, 2.0, 3.0, 0.0, 1.5]);
        let a = l_permanent(&x).unwrap();
        let b = l_formula(&x);
        assert!((a - b).abs() < 1e-12 * b.max(1.0));
    }

    #[test]
    fn r_value_examples() {
        assert!((r_value(&Point::ones(5)).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(r_value(&pt(&[4.0, 9.0])).unwrap(), 6.0);
        assert_eq!(r_value(&pt(&[0.0, 9.0])).unwrap(), 0.0);
        assert!(r_value(&pt(&[1.0])).is_err());
    }

    #[test]
    fn f_value_examples() {
        let ev = f_value(&Point::ones(4)).unwrap();
        assert!(ev.f.abs() < 1e-15);
        assert!(ev.max_disagreement() < 1e-12);

        // n = 3: six times f equals the two sides of the cubic inequality.
        let (a1, a2, a3) = (1.0f64, 1.0, 4.0);
        let lhs = 2.0 + a1 + a2 + a3 + a1 * a2 * a3;
        let rhs = 2.0 * ((a1 * a2).sqrt() + (a2 * a3).sqrt() + (a1 * a3).sqrt());
        let ev = f_value(&pt(&[a1, a2, a3])).unwrap();
        assert!((6.0 * ev.f - (lhs - rhs)).abs() < 1e-13);
        assert!(ev.f > 0.0);

        let ev = f_value(&pt(&[24.0, 0.0, 0.0, 0.0])).unwrap();
        assert!((ev.f - 57.0 / 24.0).abs() < 1e-14);
        assert!(ev.f >= 5.0 / 6.0);
        assert!(ev.l_enum.is_some());

        let ev = f_value_with_limits(&Point::ones(12), 10, 0).unwrap();
        assert!(ev.l_enum.is_none() && ev.l_permanent.is_none());
    }

    #[test]
    fn rencontres_reformulation_on_diagonal() {
        for n in 2..=12 {
            for &a in &[0.0, 0.3, 1.0, 2.7] {
                let lhs = l_formula(&pt(&vec![a; n]));
                let rhs: f64 = (0..=n)
                    .map(|k| rat_to_f64(&rencontres_fraction(n, k).unwrap()) * a.powi(k as i32))
                    .sum();
                assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0), "n={n} a={a}");
            }
        }
    }

    #[test]
    fn rencontres_reformulation_general() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 2..=12 {
            let x = random_point(&mut rng, n, 0.0, 6.0);
            let s = normalized_all(&x);
            let rhs: f64 = (0..=n)
                .map(|k| rat_to_f64(&rencontres_fraction(n, k).unwrap()) * s[k])
                .sum();
            let lhs = l_formula(&x);
            assert!((lhs - rhs).abs() <= 1e-12 * lhs.max(1.0));
        }
    }

    #[test]
    fn exact_formula_matches_float() {
        let q = |p: i64, d: i64| ExactRat::new(p.into(), d.into());
        let x = vec![q(1, 3), q(5, 2), q(0, 1), q(7, 4), q(2, 1)];
        let xf: Vec<f64> = x.iter().map(rat_to_f64).collect();
        let exact = l_formula_exact(&x);
        assert!((rat_to_f64(&exact) - l_formula(&pt(&xf))).abs() < 1e-14);
        let ones = vec![q(1, 1); 9];
        assert_eq!(l_formula_exact(&ones), q(1, 1));
    }

    #[test]
    fn gradient_vanishes_at_ones() {
        for n in 2..=20 {
            let g = gradient(&Point::ones(n)).unwrap();
            assert!(g.partials.iter().all(|p| p.abs() <= 1e-12), "n={n}");
        }
    }

    #[test]
    fn gradient_flags_zero_coordinates() {
        let g = gradient(&pt(&[0.0, 1.0, 2.0, 3.0])).unwrap();
        assert_eq!(g.valid, vec![false, true, true, true]);
        assert_eq!(g.partials[0], f64::NEG_INFINITY);

        let g = gradient(&Point::zeros(4)).unwrap();
        assert!(g.all_valid());
        let expected = derangements_f64(3) / factorial_f64(3) / 4.0;
        assert!(g.partials.iter().all(|p| (p - expected).abs() < 1e-15));
    }

    fn central_diff(x: &Point, i: usize, h: f64) -> f64 {
        let mut up = x.to_vec();
        let mut dn = x.to_vec();
        up[i] += h;
        dn[i] -= h;
        (objective_raw(&up) - objective_raw(&dn)) / (2.0 * h)
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for n in 3..=10 {
            for _ in 0..10 {
                let x = random_point(&mut rng, n, 0.2, 6.0);
                let g = gradient(&x).unwrap();
                for i in 0..n {
                    let fd = central_diff(&x, i, 1e-5);
                    let err = (g.partials[i] - fd).abs() / g.partials[i].abs().max(1.0);
                    assert!(err < 1e-6, "n={n} i={i} err={err}");
                }
            }
        }
    }

    #[test]
    fn hessian_examples() {
        for n in 2..=10 {
            let ones = Point::ones(n);
            let d = hessian_entry(&ones, 0, 0).unwrap();
            assert!((d - 1.0 / (2.0 * n as f64)).abs() < 1e-15);
            let o = hessian_entry(&ones, 0, n - 1).unwrap();
            assert!((o - 1.0 / (2.0 * (n * (n - 1)) as f64)).abs() < 1e-15);
        }
        assert!(matches!(
            hessian_entry(&pt(&[1.0, 0.0, 2.0]), 0, 2),
            Err(Error::ZeroCoordinate { index: 1 })
        ));
        assert!(hessian_entry(&pt(&[1.0, 2.0]), 0, 2).is_err());
    }

    #[test]
    fn hessian_off_diagonal_bound_above_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for n in 3..=9 {
            let bound = 1.0 / (2.0 * (n * (n - 1)) as f64);
            for _ in 0..20 {
                let x = random_point(&mut rng, n, 1.0, 8.0);
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            assert!(hessian_entry(&x, i, j).unwrap() >= bound - 1e-15);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn hessian_matches_gradient_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let h = 1e-5;
        for n in 4..=8 {
            for _ in 0..5 {
                let x = random_point(&mut rng, n, 0.3, 5.0);
                for j in 0..n {
                    let mut up = x.to_vec();
                    let mut dn = x.to_vec();
                    up[j] += h;
                    dn[j] -= h;
                    let gu = gradient_raw(&up);
                    let gd = gradient_raw(&dn);
                    for i in 0..n {
                        let fd = (gu.partials[i] - gd.partials[i]) / (2.0 * h);
                        let an = hessian_entry(&x, i, j).unwrap();
                        assert!((an - fd).abs() / an.abs().max(1.0) < 1e-4);
                    }
                }
            }
        }
    }

    #[test]
    fn leading_behavior_along_diagonal_near_zero() {
        for n in 4..=10 {
            let f0 = objective_raw(&vec![0.0; n]);
            assert!((f0 - derangements_f64(n) / factorial_f64(n)).abs() < 1e-15);
            let slope = -(1.0 - derangements_f64(n - 1) / factorial_f64(n - 1));
            let t = 1e-6;
            let fd = (objective_raw(&vec![t; n]) - f0) / t;
            assert!((fd - slope).abs() < 1e-5, "n={n}: {fd} vs {slope}");
            assert!(slope < 0.0);
        }
    }
}
