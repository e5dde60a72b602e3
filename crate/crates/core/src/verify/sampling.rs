use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fixedpoint::{f_value_with_limits, objective_raw, ENUMERATION_MAX_N};
use crate::sympoly::Point;

use super::parallel::{map_seeded, with_threads, Family};
use super::small_n::{check_n2, check_n3};
use super::{
    all_passed, CheckOutcome, Checks, RunConfig, VerifyReport, EQUALITY_RADIUS, EVALUATOR_TOL,
};

/// Random samples cross-checked against the slower evaluators (on top of
/// every probe).
pub const CROSS_CHECK_SAMPLES: usize = 32;

/// Largest `n` for which the permanent is part of the cross-check.
const CROSS_CHECK_PERMANENT_MAX: usize = 20;

/// Samples used by the `n = 2, 3` proof replays inside a sampling run.
const SMALL_CASE_SAMPLES: usize = 10_000;

/// `(t, 1/t)` for `t = 1/8, ..., 8`.
const HYPERBOLA: [f64; 7] = [0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0];

/// Deterministic probes: `0`, `1`, each `b_i`, each simplex corner `6n b_i`,
/// the simplex centre `(6, ..., 6)`, and for `n = 2` the hyperbola
/// `a_1 a_2 = 1`.
pub fn probes(n: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; n], vec![1.0; n]];
    for scale in [1.0, 6.0 * n as f64] {
        for i in 0..n {
            let mut p = vec![0.0; n];
            p[i] = scale;
            out.push(p);
        }
    }
    out.push(vec![6.0; n]);
    if n == 2 {
        out.extend(HYPERBOLA.iter().map(|&t| vec![t, 1.0 / t]));
    }
    out
}

/// `cfg.samples` uniform points in `[0, box)^n` plus [`probes`].
pub fn verify_sampling(cfg: &RunConfig) -> Result<VerifyReport> {
    check_cfg(cfg)?;
    with_threads(cfg.threads, || {
        let n = cfg.n;
        let bound = cfg.box_bound;
        let samples = map_seeded(cfg.seed, Family::Sample, 0, cfg.samples, |rng, _| {
            (0..n).map(|_| rng.random::<f64>() * bound).collect()
        });
        summarize(cfg, samples)
    })?
}

/// Points per axis of the grid: the largest `m >= 2` with `m^n <= samples`
/// (or 2 when even `2^n` exceeds it).
pub fn grid_side(n: usize, samples: usize) -> usize {
    let mut m = 2usize;
    while (m + 1)
        .checked_pow(n as u32)
        .is_some_and(|total| total <= samples)
    {
        m += 1;
    }
    m
}

/// The regular grid `{0, box/(m-1), ..., box}^n` plus [`probes`].
pub fn verify_grid(cfg: &RunConfig) -> Result<VerifyReport> {
    check_cfg(cfg)?;
    let n = cfg.n;
    let m = grid_side(n, cfg.samples);
    let total = m
        .checked_pow(n as u32)
        .ok_or(Error::TooLarge {
            what: "grid",
            max: usize::MAX,
            got: n,
        })?;
    with_threads(cfg.threads, || {
        let step = cfg.box_bound / (m - 1) as f64;
        let points = (0..total)
            .into_par_iter()
            .map(|mut idx| {
                (0..n)
                    .map(|_| {
                        let d = idx % m;
                        idx /= m;
                        d as f64 * step
                    })
                    .collect()
            })
            .collect();
        summarize(cfg, points)
    })?
}

fn check_cfg(cfg: &RunConfig) -> Result<()> {
    cfg.validate()?;
    if cfg.n < 2 {
        return Err(Error::DimensionTooSmall {
            what: "verify",
            required: 2,
            got: cfg.n,
        });
    }
    Ok(())
}

fn summarize(cfg: &RunConfig, samples: Vec<Vec<f64>>) -> Result<VerifyReport> {
    let n = cfg.n;
    let probe_set = probes(n);
    let n_probes = probe_set.len();
    let samples_run = samples.len();
    let mut points = probe_set;
    points.extend(samples);

    let values: Vec<f64> = points.par_iter().map(|p| objective_raw(p)).collect();

    // first index wins ties, matching a serial scan
    let (argmin_index, min_f) = values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, v)| if v < best.1 { (i, v) } else { best });
    let violations = values.iter().filter(|&&v| v < -cfg.tolerance).count();

    let mut checks = Checks::new();
    checks.insert(
        "no_violations".into(),
        CheckOutcome::at_least(values.iter().copied(), -cfg.tolerance, "f >= -tolerance"),
    );

    if n >= 3 {
        let near_equality = points
            .iter()
            .zip(&values)
            .filter(|(_, v)| v.abs() <= cfg.tolerance)
            .map(|(p, _)| distance_to_ones(p));
        checks.insert(
            "equality_only_at_ones".into(),
            CheckOutcome::at_most(
                near_equality,
                EQUALITY_RADIUS,
                "|f| <= tolerance only within 1e-6 of all-ones",
            ),
        );
    } else {
        let hyperbola = points
            .iter()
            .zip(&values)
            .filter(|(p, _)| p[0] * p[1] == 1.0)
            .map(|(_, v)| v.abs());
        checks.insert(
            "hyperbola_equality".into(),
            CheckOutcome::at_most(hyperbola, cfg.tolerance, "|f(t, 1/t)| <= tolerance"),
        );
    }

    let (evaluator_max_disagreement, evaluator_points) = if n <= CROSS_CHECK_PERMANENT_MAX {
        let chosen = &points[..(n_probes + CROSS_CHECK_SAMPLES).min(points.len())];
        let gaps: Vec<f64> = chosen
            .par_iter()
            .map(|p| {
                let x = Point::new(p.clone())?;
                let eval = f_value_with_limits(&x, ENUMERATION_MAX_N, CROSS_CHECK_PERMANENT_MAX)?;
                Ok(eval.max_disagreement())
            })
            .collect::<Result<_>>()?;
        let worst = gaps.iter().copied().fold(0.0, f64::max);
        (worst, gaps.len())
    } else {
        (0.0, 0)
    };
    checks.insert(
        "evaluator_agreement".into(),
        CheckOutcome::new(
            evaluator_max_disagreement <= EVALUATOR_TOL,
            evaluator_max_disagreement,
            evaluator_points,
            "relative disagreement between evaluators of L_n <= 1e-9",
        ),
    );

    let small_samples = cfg.samples.min(SMALL_CASE_SAMPLES);
    let replay = match n {
        2 => Some(("n2.", check_n2(small_samples, cfg.seed))),
        3 => Some(("n3.", check_n3(small_samples, cfg.seed))),
        _ => None,
    };
    if let Some((prefix, replay)) = replay {
        for (name, outcome) in replay {
            checks.insert(format!("{prefix}{name}"), outcome);
        }
    }

    let passed = violations == 0 && all_passed(&checks);
    Ok(VerifyReport {
        config: cfg.echo(),
        min_f,
        argmin: points[argmin_index].clone(),
        argmin_index,
        violations,
        samples_run,
        probes: n_probes,
        evaluator_max_disagreement,
        evaluator_points,
        checks,
        passed,
    })
}

pub(crate) fn distance_to_ones(p: &[f64]) -> f64 {
    p.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::Mode;

    fn cfg(n: usize, samples: usize, seed: u64) -> RunConfig {
        RunConfig {
            samples,
            seed,
            ..RunConfig::new(n)
        }
    }

    #[test]
    fn probe_set() {
        let p = probes(4);
        assert_eq!(p.len(), 2 + 8 + 1);
        assert!(p.contains(&vec![24.0, 0.0, 0.0, 0.0]));
        assert_eq!(probes(2).len(), 2 + 4 + 1 + 7);
    }

    #[test]
    fn n3_minimum_near_ones() {
        let r = verify_sampling(&cfg(3, 2000, 4)).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.violations, 0);
        assert!(r.min_f >= -1e-12);
        // the all-ones probe is the exact minimizer
        assert_eq!(r.argmin, vec![1.0; 3]);
        assert!(r.checks.keys().any(|k| k.starts_with("n3.")));
    }

    #[test]
    fn n2_hyperbola() {
        let r = verify_sampling(&cfg(2, 2000, 1)).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(r.min_f.abs() <= 1e-12);
        assert!((r.argmin[0] * r.argmin[1] - 1.0).abs() < 1e-12);
        // the seven hyperbola probes plus the all-ones probe
        assert_eq!(r.checks["hyperbola_equality"].checked, 8);
    }

    #[test]
    fn deterministic_and_thread_independent() {
        let mut c = cfg(5, 3000, 77);
        let a = verify_sampling(&c).unwrap();
        c.threads = Some(1);
        let b = verify_sampling(&c).unwrap();
        c.threads = Some(3);
        let d = verify_sampling(&c).unwrap();
        assert_eq!(a, b);
        assert_eq!(b, d);
    }

    #[test]
    fn grid_mode() {
        assert_eq!(grid_side(3, 1000), 10);
        assert_eq!(grid_side(3, 999), 9);
        assert_eq!(grid_side(12, 10), 2);
        let mut c = cfg(3, 125, 0);
        c.mode = Mode::Grid;
        let r = verify_grid(&c).unwrap();
        assert_eq!(r.samples_run, 125);
        assert!(r.passed);
    }

    #[test]
    fn rejects_n1() {
        assert!(verify_sampling(&cfg(1, 10, 0)).is_err());
    }
}
