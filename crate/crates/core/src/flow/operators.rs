use crate::combinatorics::{derangements_f64, factorial_f64};
use crate::error::{Error, Result};
use crate::fixedpoint::l_formula_raw;
use crate::sympoly::elem_without;

use super::SortedPoint;

/// Relative agreement required between the two routes to `O_k f_n`.
pub const OPERATOR_ROUTE_TOL: f64 = 1e-8;

pub(crate) fn require_n4(what: &'static str, n: usize) -> Result<()> {
    if n < 4 {
        return Err(Error::DimensionTooSmall {
            what,
            required: 4,
            got: n,
        });
    }
    Ok(())
}

fn check_k(x: &SortedPoint, k: usize) -> Result<usize> {
    let n = x.dim();
    require_n4("S_k", n)?;
    if k + 1 >= n {
        return Err(Error::IndexOutOfRange { index: k, n: n - 1 });
    }
    let last = n - 1;
    if x[k] + x[last] <= 0.0 {
        return Err(Error::DegenerateDenominator);
    }
    Ok(last)
}

/// `S_k(x) = sum_{i=1}^{n-2} c_{n-i} e_{i-1}(x without k, n)
///          - (n-2)! sum_{i != k, n} sqrt(x_i) / (sqrt(x_k) + sqrt(x_n))`,
/// where `n` is the last (largest) sorted position. `k` is a 0-based sorted
/// position below the last one.
pub fn s_k_value(x: &SortedPoint, k: usize) -> Result<f64> {
    let last = check_k(x, k)?;
    let n = x.dim();
    let e = elem_without(x.coords(), &[k, last])?;
    let poly: f64 = (1..=n - 2)
        .map(|i| derangements_f64(n - i) * e.get(i - 1))
        .sum();
    let denom = x[k].sqrt() + x[last].sqrt();
    let roots: f64 = (0..n)
        .filter(|&i| i != k && i != last)
        .map(|i| x[i].sqrt())
        .sum();
    Ok(poly - factorial_f64(n - 2) * roots / denom)
}

/// `x_i * df/dx_i` split into its `L` and `R` contributions.
fn scaled_partial_terms(x: &[f64], i: usize) -> (f64, f64) {
    let n = x.len();
    let rest: Vec<f64> = x
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, &v)| v)
        .collect();
    let l_term = x[i] * l_formula_raw(&rest) / n as f64;
    let r_term = rest.iter().map(|v| (v * x[i]).sqrt()).sum::<f64>() / (n * (n - 1)) as f64;
    (l_term, r_term)
}

/// `O_k f_n = x_k df/dx_k - x_n df/dx_n`, from the closed form
/// `(x_k - x_n) S_k(x) / n!`.
///
/// The same quantity is also assembled from the partial derivatives of
/// `f_n`; the call fails if the two disagree by more than
/// [`OPERATOR_ROUTE_TOL`] relative to the size of the summed terms.
pub fn operator_ok(x: &SortedPoint, k: usize) -> Result<f64> {
    let s = s_k_value(x, k)?;
    let n = x.dim();
    let last = n - 1;
    let closed_form = (x[k] - x[last]) * s / factorial_f64(n);

    let (lk, rk) = scaled_partial_terms(x.coords(), k);
    let (ln, rn) = scaled_partial_terms(x.coords(), last);
    let gradient_route = (lk - rk) - (ln - rn);
    let scale = lk.abs() + rk.abs() + ln.abs() + rn.abs();
    if (closed_form - gradient_route).abs() > OPERATOR_ROUTE_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::RouteDisagreement {
            closed_form,
            gradient_route,
        });
    }
    Ok(closed_form)
}

/// `F_k(v) = c_{n-1}/(n-2) + c_{n-2} v - (n-2)! sqrt(v) / (sqrt(x_k) + sqrt(x_n))`.
pub fn f_k_scalar(v: f64, x_k: f64, x_n: f64, n: usize) -> Result<f64> {
    require_n4("F_k", n)?;
    if !(v >= 0.0 && x_k >= 0.0 && x_n >= 0.0) {
        return Err(Error::ParameterOutOfRange(format!(
            "F_k needs non-negative arguments, got v={v}, x_k={x_k}, x_n={x_n}"
        )));
    }
    let denom = x_k.sqrt() + x_n.sqrt();
    if denom <= 0.0 {
        return Err(Error::DegenerateDenominator);
    }
    Ok(derangements_f64(n - 1) / (n - 2) as f64 + derangements_f64(n - 2) * v
        - factorial_f64(n - 2) * v.sqrt() / denom)
}

/// `1/3 + y^2/3 - y/(y+1)`, the one-variable bound behind `F_{n-1} > 0`.
pub fn unit_lower_bound(y: f64) -> f64 {
    1.0 / 3.0 + y * y / 3.0 - y / (y + 1.0)
}

/// `F_k(x_j) + F_k(x_{partner})` with `partner = n - 2 - j` (0-based), the
/// pairing used when the tail `x_{k+1} = ... = x_n` is longer than one.
///
/// Requires `floor(n/2) - 1 <= k <= n - 3` and `k + 1 <= j <= n - 2`.
pub fn pairing_bound(x: &SortedPoint, k: usize, j: usize) -> Result<f64> {
    let n = x.dim();
    require_n4("pairing", n)?;
    let k_min = n / 2 - 1;
    if k < k_min || k > n - 3 {
        return Err(Error::ParameterOutOfRange(format!(
            "pairing needs {k_min} <= k <= {}, got k = {k}",
            n - 3
        )));
    }
    if j < k + 1 || j > n - 2 {
        return Err(Error::ParameterOutOfRange(format!(
            "pairing needs {} <= j <= {}, got j = {j}",
            k + 1,
            n - 2
        )));
    }
    let last = n - 1;
    let partner = n - 2 - j;
    Ok(f_k_scalar(x[j], x[k], x[last], n)? + f_k_scalar(x[partner], x[k], x[last], n)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixedpoint::objective_raw;
    use crate::sympoly::Point;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sorted(v: &[f64]) -> SortedPoint {
        SortedPoint::new(&Point::new(v.to_vec()).unwrap())
    }

    #[test]
    fn s_k_at_ones() {
        // n = 4: (c_3 * 1 + c_2 * 2) - 2! * 2 / 2 = 4 - 2 = 2
        assert!((s_k_value(&sorted(&[1.0; 4]), 0).unwrap() - 2.0).abs() < 1e-14);
        for n in 4..=10 {
            let s = s_k_value(&sorted(&vec![1.0; n]), 1).unwrap();
            let poly: f64 = (1..=n - 2)
                .map(|i| {
                    derangements_f64(n - i)
                        * crate::sympoly::binomials_f64(n - 2)[i - 1]
                })
                .sum();
            let expected = poly - factorial_f64(n - 2) * (n - 2) as f64 / 2.0;
            assert!((s - expected).abs() < 1e-9 * expected.abs().max(1.0));
            assert!(s > 0.0);
        }
    }

    #[test]
    fn s_1_positive_on_small_first_coordinate() {
        for step in 1..100 {
            let eps = step as f64 / 100.0;
            let s = s_k_value(&sorted(&[eps, 1.0, 1.0, 1.0]), 0).unwrap();
            assert!(s > 0.0, "eps={eps}");
        }
        // limit eps -> 0 approaches 4 - 4 = 0 from above
        let s = s_k_value(&sorted(&[1e-12, 1.0, 1.0, 1.0]), 0).unwrap();
        assert!(s > 0.0 && s < 1e-5);
    }

    #[test]
    fn s_k_errors() {
        assert!(matches!(
            s_k_value(&sorted(&[0.0, 0.0, 0.0, 0.0]), 0),
            Err(Error::DegenerateDenominator)
        ));
        assert!(s_k_value(&sorted(&[1.0, 2.0, 3.0, 4.0]), 3).is_err());
        assert!(s_k_value(&sorted(&[1.0, 2.0, 3.0]), 0).is_err());
    }

    #[test]
    fn operator_matches_directional_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for n in 4..=9 {
            for _ in 0..10 {
                let v: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..5.0)).collect();
                let x = sorted(&v);
                for k in 0..n - 1 {
                    let ok = operator_ok(&x, k).unwrap();
                    let last = n - 1;
                    let h = 1e-6;
                    let mut up = x.coords().to_vec();
                    let mut dn = x.coords().to_vec();
                    up[k] += h * x[k];
                    up[last] -= h * x[last];
                    dn[k] -= h * x[k];
                    dn[last] += h * x[last];
                    let fd = (objective_raw(&up) - objective_raw(&dn)) / (2.0 * h);
                    assert!((ok - fd).abs() < 1e-6 * ok.abs().max(1.0), "n={n} k={k}");
                }
            }
        }
    }

    #[test]
    fn operator_examples() {
        assert_eq!(operator_ok(&sorted(&[1.0; 5]), 2).unwrap(), 0.0);
        let v = operator_ok(&sorted(&[0.25, 1.0, 1.0, 1.0]), 0).unwrap();
        assert!(v < 0.0);
        assert_eq!(operator_ok(&sorted(&[0.5, 2.0, 3.0, 3.0]), 2).unwrap(), 0.0);
        // zero first coordinate still evaluates
        assert!(operator_ok(&sorted(&[0.0, 1.0, 2.0, 2.0]), 0).unwrap() < 0.0);
    }

    #[test]
    fn f_k_examples() {
        for n in 4..=12 {
            let v = f_k_scalar(0.0, 0.5, 2.0, n).unwrap();
            assert!((v - derangements_f64(n - 1) / (n - 2) as f64).abs() < 1e-9);
        }
        assert!(matches!(
            f_k_scalar(1.0, 0.0, 0.0, 5),
            Err(Error::DegenerateDenominator)
        ));
        assert!(f_k_scalar(-1.0, 1.0, 1.0, 5).is_err());
        assert!(f_k_scalar(1.0, 1.0, 1.0, 3).is_err());
    }

    #[test]
    fn f_last_positive_below_penultimate() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for n in 4..=12 {
            for _ in 0..200 {
                let x_n = rng.random_range(1.0..20.0);
                let x_pen = rng.random_range(0.0..x_n);
                let v = rng.random_range(0.0..=x_pen);
                if v == 0.0 {
                    continue;
                }
                assert!(f_k_scalar(v, x_pen, x_n, n).unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn unit_bound_positive_on_grid() {
        for i in 1..=100_000 {
            let y = i as f64 / 100_000.0;
            assert!(unit_lower_bound(y) > 0.0, "y={y}");
        }
    }

    #[test]
    fn pairing_two_tail_case() {
        // n = 4, k = 2 (1-based), x = (y^2, y^2, 1, 1)
        for i in 1..100 {
            let y = i as f64 / 100.0;
            let x = sorted(&[y * y, y * y, 1.0, 1.0]);
            // 0-based: k = 1, j = 2 pairs with partner 0
            let sum = pairing_bound(&x, 1, 2).unwrap();
            assert!(sum >= factorial_f64(2) * y * y / 3.0, "y={y}");
        }
    }

    #[test]
    fn pairing_equal_partners_double() {
        let x = sorted(&[0.5, 0.7, 2.0, 2.0, 2.0, 2.0]);
        // n = 6, k = 2, j = 3 pairs with partner 1
        let y = sorted(&[0.5, 2.0, 2.0, 2.0, 2.0, 2.0]);
        let s = pairing_bound(&y, 2, 3).unwrap();
        let single = f_k_scalar(2.0, 2.0, 2.0, 6).unwrap();
        assert!((s - 2.0 * single).abs() < 1e-12 * single.abs().max(1.0));
        assert!(pairing_bound(&x, 0, 3).is_err());
        assert!(pairing_bound(&x, 2, 5).is_err());
    }
}
