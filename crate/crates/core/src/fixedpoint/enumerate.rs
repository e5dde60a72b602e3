use crate::combinatorics::factorial_f64;
use crate::error::{Error, Result};
use crate::sympoly::Point;

/// Largest `n` for which [`l_enumerate`] will walk all of `S_n`.
pub const ENUMERATION_MAX_N: usize = 10;

/// Average of `prod_{i in fix(pi)} x_i` over every permutation of `S_n`,
/// generated with Heap's algorithm (iterative form).
pub fn l_enumerate(x: &Point) -> Result<f64> {
    let n = x.dim();
    if n > ENUMERATION_MAX_N {
        return Err(Error::TooLarge {
            what: "permutation enumeration",
            max: ENUMERATION_MAX_N,
            got: n,
        });
    }
    let fixed_product = |perm: &[usize]| -> f64 {
        perm.iter()
            .enumerate()
            .filter(|&(i, &p)| i == p)
            .map(|(i, _)| x[i])
            .product()
    };

    let mut perm: Vec<usize> = (0..n).collect();
    let mut counters = vec![0usize; n];
    let mut total = fixed_product(&perm);
    let mut i = 1;
    while i < n {
        if counters[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(counters[i], i);
            }
            total += fixed_product(&perm);
            counters[i] += 1;
            i = 1;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
    Ok(total / factorial_f64(n))
}
