//! `n = 2`: `1 + a_1 a_2 >= 2 sqrt(a_1 a_2)` (AM-GM).
//!
//! `n = 3`: `2 + a + b + c + abc >= 2 (sqrt(ab) + sqrt(bc) + sqrt(ca))`, via
//! `2 + xyz >= 3 (xyz)^(1/3)`, then with `x = a^3` etc. Schur's inequality
//! `a^3 + b^3 + c^3 + 3abc >= ab(a+b) + bc(b+c) + ca(c+a)` and termwise AM-GM
//! `ab(a+b) >= 2 (ab)^(3/2)`.

use rand::Rng;

use super::parallel::{map_seeded, Family};
use super::{CheckOutcome, Checks};

/// Absolute slack allowed in every replayed step.
pub const SLACK_TOL: f64 = 1e-12;

/// Sampling range per coordinate.
const RANGE: f64 = 10.0;

const HYPERBOLA: [f64; 8] = [0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 3.0];

fn n2_slack(a: f64, b: f64) -> f64 {
    1.0 + a * b - 2.0 * (a * b).sqrt()
}

/// Replays the `n = 2` inequality on `samples` pairs in `[0, 10]^2`, checks
/// equality on the hyperbola `a_1 a_2 = 1` and strictness off it.
pub fn check_n2(samples: usize, seed: u64) -> Checks {
    let pairs = map_seeded(seed, Family::Pairs, 0, samples, |rng, _| {
        (rng.random_range(0.0..=RANGE), rng.random_range(0.0..=RANGE))
    });
    let mut checks = Checks::new();
    checks.insert(
        "am_gm".into(),
        CheckOutcome::at_least(
            pairs.iter().map(|&(a, b)| n2_slack(a, b)),
            -SLACK_TOL,
            "1 + a1 a2 - 2 sqrt(a1 a2) >= -1e-12",
        ),
    );
    checks.insert(
        "equality_on_hyperbola".into(),
        CheckOutcome::at_most(
            HYPERBOLA.iter().map(|&t| n2_slack(t, 1.0 / t).abs()),
            SLACK_TOL,
            "|slack(t, 1/t)| <= 1e-12",
        ),
    );
    checks.insert(
        "strict_off_hyperbola".into(),
        CheckOutcome::above(
            [(0.0, 5.0), (2.0, 2.0), (0.1, 0.1), (0.0, 0.0)]
                .iter()
                .map(|&(a, b)| n2_slack(a, b)),
            0.0,
            "slack > 0 when a1 a2 != 1",
        ),
    );
    checks
}

/// `2 + a + b + c + abc - 2 (sqrt(ab) + sqrt(bc) + sqrt(ca))`.
pub(crate) fn n3_slack([a, b, c]: [f64; 3]) -> f64 {
    2.0 + a + b + c + a * b * c - 2.0 * ((a * b).sqrt() + (b * c).sqrt() + (c * a).sqrt())
}

fn am_gm_slack([x, y, z]: [f64; 3]) -> f64 {
    let p = x * y * z;
    2.0 + p - 3.0 * p.cbrt()
}

fn schur_slack([x, y, z]: [f64; 3]) -> f64 {
    x * (x - y) * (x - z) + y * (y - z) * (y - x) + z * (z - x) * (z - y)
}

/// Schur in the expanded form used after substituting cubes.
fn schur_expanded_slack([a, b, c]: [f64; 3]) -> f64 {
    a * a * a + b * b * b + c * c * c + 3.0 * a * b * c
        - (a * b * (a + b) + b * c * (b + c) + c * a * (c + a))
}

fn final_chain_slack([a, b, c]: [f64; 3]) -> f64 {
    let pow = |p: f64| p * p.sqrt();
    a * b * (a + b) + b * c * (b + c) + c * a * (c + a)
        - 2.0 * (pow(a * b) + pow(b * c) + pow(c * a))
}

/// Replays every step of the `n = 3` argument on `samples` triples in
/// `[0, 10]^3`, plus the equality case at `(1, 1, 1)`.
pub fn check_n3(samples: usize, seed: u64) -> Checks {
    let triples = map_seeded(seed, Family::Triples, 0, samples, |rng, _| {
        [
            rng.random_range(0.0..=RANGE),
            rng.random_range(0.0..=RANGE),
            rng.random_range(0.0..=RANGE),
        ]
    });
    let cube_roots = |t: &[f64; 3]| t.map(f64::cbrt);
    let mut checks = Checks::new();
    let mut add = |name: &str, values: Vec<f64>, req: &str| {
        checks.insert(name.into(), CheckOutcome::at_least(values, -SLACK_TOL, req));
    };
    add(
        "inequality",
        triples.iter().map(|&t| n3_slack(t)).collect(),
        "2 + a + b + c + abc >= 2 (sqrt(ab) + sqrt(bc) + sqrt(ca))",
    );
    add(
        "am_gm_step",
        triples.iter().map(|&t| am_gm_slack(t)).collect(),
        "2 + xyz >= 3 (xyz)^(1/3)",
    );
    add(
        "schur",
        triples.iter().map(|&t| schur_slack(t)).collect(),
        "x(x-y)(x-z) + y(y-z)(y-x) + z(z-x)(z-y) >= 0",
    );
    add(
        "schur_after_cubes",
        triples.iter().map(|t| schur_expanded_slack(cube_roots(t))).collect(),
        "a^3 + b^3 + c^3 + 3abc >= ab(a+b) + bc(b+c) + ca(c+a), a = x^(1/3)",
    );
    add(
        "final_am_gm",
        triples.iter().map(|t| final_chain_slack(cube_roots(t))).collect(),
        "ab(a+b) + bc(b+c) + ca(c+a) >= 2 ((ab)^(3/2) + (bc)^(3/2) + (ca)^(3/2))",
    );
    checks.insert(
        "equality_at_ones".into(),
        CheckOutcome::at_most(
            [n3_slack([1.0; 3]).abs()],
            0.0,
            "2 + 3 + 1 = 2 * 3 exactly at (1, 1, 1)",
        ),
    );
    checks.insert(
        "origin".into(),
        CheckOutcome::at_least([n3_slack([0.0; 3])], 2.0, "slack at the origin is 2"),
    );
    checks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixedpoint::objective_raw;

    #[test]
    fn n2_examples() {
        assert!(n2_slack(4.0, 0.25).abs() <= 1e-12);
        assert_eq!(n2_slack(0.0, 5.0), 1.0);
        let checks = check_n2(5000, 3);
        assert!(checks.values().all(|c| c.passed), "{checks:?}");
    }

    #[test]
    fn n3_examples() {
        assert_eq!(n3_slack([1.0; 3]), 0.0);
        assert_eq!(n3_slack([0.0; 3]), 2.0);
        let checks = check_n3(5000, 3);
        assert!(checks.values().all(|c| c.passed), "{checks:?}");
        assert_eq!(checks["schur"].checked, 5000);
    }

    #[test]
    fn slack_is_scaled_objective() {
        // f_3 = slack / 6, f_2 = slack / 2
        for t in [[0.3, 2.0, 5.0], [1.0, 1.0, 4.0], [0.0, 7.0, 0.5]] {
            assert!((objective_raw(&t) - n3_slack(t) / 6.0).abs() < 1e-14);
        }
        assert!((objective_raw(&[3.0, 0.2]) - n2_slack(3.0, 0.2) / 2.0).abs() < 1e-15);
    }
}
