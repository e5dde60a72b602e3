use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fixedpoint::{f_value_with_limits, gradient_raw, objective_raw, ENUMERATION_MAX_N};
use crate::linesearch::backtrack;
use crate::sympoly::Point;

use super::parallel::{map_seeded, with_threads, Family};
use super::sampling::distance_to_ones;
use super::{all_passed, CheckOutcome, Checks, RunConfig, VerifyReport, EVALUATOR_TOL};

/// Lower end of the projection box; the partials diverge at 0.
pub const MIN_COORD: f64 = 1e-12;

pub const MINIMIZE_MAX_ITERS: usize = 10_000;

/// Starts are drawn uniformly from `(0, START_RANGE)^n`, inside `sum <= 6n`.
const START_RANGE: f64 = 6.0;

const MAX_STEP: f64 = 1e6;

/// Required distance from `1` and value of the best minimizer.
const ARGMIN_TOL: f64 = 1e-4;
const VALUE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct LocalMin {
    pub point: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
}

/// Projected gradient descent on `[MIN_COORD, upper]^n` with the halving
/// line search used by the flow. Stops when no decreasing step exists above
/// the step floor, or after `max_iters` steps.
pub fn local_minimize(x0: &Point, upper: f64, max_iters: usize) -> Result<LocalMin> {
    if x0.dim() < 2 {
        return Err(Error::DimensionTooSmall {
            what: "local_minimize",
            required: 2,
            got: x0.dim(),
        });
    }
    if !(upper > MIN_COORD && upper.is_finite()) {
        return Err(Error::ParameterOutOfRange(format!(
            "upper bound must exceed {MIN_COORD}, got {upper}"
        )));
    }
    let project = |v: f64| v.clamp(MIN_COORD, upper);
    let mut x: Vec<f64> = x0.iter().map(|&v| project(v)).collect();
    let mut fx = objective_raw(&x);
    let mut step = 1.0;
    let mut iterations = 0;
    while iterations < max_iters {
        let g = gradient_raw(&x).partials;
        let accepted = backtrack(fx, step, |alpha| {
            let trial: Vec<f64> = x
                .iter()
                .zip(&g)
                .map(|(xi, gi)| project(xi - alpha * gi))
                .collect();
            let predicted: f64 = trial
                .iter()
                .zip(&x)
                .zip(&g)
                .map(|((t, xi), gi)| gi * (t - xi))
                .sum();
            if predicted.is_nan() || predicted >= 0.0 {
                return None;
            }
            let value = objective_raw(&trial);
            Some((trial, value, predicted))
        });
        let Some(acc) = accepted else { break };
        x = acc.point;
        fx = acc.value;
        step = (2.0 * acc.step).min(MAX_STEP);
        iterations += 1;
    }
    Ok(LocalMin {
        point: x,
        f: fx,
        iterations,
    })
}

/// Minimizes from `cfg.samples` random starts in `(0, 6)^n` and checks that
/// the best result is `1` with `f = 0`.
pub fn verify_minimize(cfg: &RunConfig) -> Result<VerifyReport> {
    cfg.validate()?;
    if cfg.n < 3 {
        return Err(Error::DimensionTooSmall {
            what: "verify_minimize",
            required: 3,
            got: cfg.n,
        });
    }
    if cfg.samples == 0 {
        return Err(Error::ParameterOutOfRange("need at least one start".into()));
    }
    with_threads(cfg.threads, || minimize_inner(cfg))?
}

fn minimize_inner(cfg: &RunConfig) -> Result<VerifyReport> {
    let n = cfg.n;
    let starts = map_seeded(cfg.seed, Family::Minimize, 0, cfg.samples, |rng, _| {
        (0..n)
            .map(|_| {
                // open interval: redraw the (measure-zero) endpoint
                loop {
                    let v = rng.random::<f64>() * START_RANGE;
                    if v > 0.0 {
                        break v;
                    }
                }
            })
            .collect::<Vec<f64>>()
    });
    let results: Vec<LocalMin> = starts
        .into_par_iter()
        .map(|s| local_minimize(&Point::new(s)?, cfg.box_bound, MINIMIZE_MAX_ITERS))
        .collect::<Result<_>>()?;

    let (best_index, best) = results
        .iter()
        .enumerate()
        .fold(None::<(usize, &LocalMin)>, |acc, (i, r)| match acc {
            Some((_, b)) if b.f <= r.f => acc,
            _ => Some((i, r)),
        })
        .expect("at least one start");
    let violations = results.iter().filter(|r| r.f < -cfg.tolerance).count();

    let eval = f_value_with_limits(&Point::new(best.point.clone())?, ENUMERATION_MAX_N, 20)?;
    let disagreement = eval.max_disagreement();
    let evaluator_points = usize::from(eval.l_enum.is_some() || eval.l_permanent.is_some());

    let mut checks = Checks::new();
    checks.insert(
        "no_violations".into(),
        CheckOutcome::at_least(results.iter().map(|r| r.f), -cfg.tolerance, "f >= -tolerance"),
    );
    checks.insert(
        "argmin_near_ones".into(),
        CheckOutcome::at_most(
            [distance_to_ones(&best.point)],
            ARGMIN_TOL,
            "best minimizer within 1e-4 of all-ones per coordinate",
        ),
    );
    checks.insert(
        "min_near_zero".into(),
        CheckOutcome::at_most([best.f.abs()], VALUE_TOL, "|f| <= 1e-6 at the best minimizer"),
    );
    checks.insert(
        "every_start_reaches_ones".into(),
        CheckOutcome::at_most(
            results.iter().map(|r| distance_to_ones(&r.point)),
            ARGMIN_TOL,
            "every local minimizer within 1e-4 of all-ones",
        ),
    );
    checks.insert(
        "evaluator_agreement".into(),
        CheckOutcome::new(
            disagreement <= EVALUATOR_TOL,
            disagreement,
            evaluator_points,
            "relative disagreement between evaluators of L_n <= 1e-9",
        ),
    );

    let passed = violations == 0 && all_passed(&checks);
    Ok(VerifyReport {
        config: cfg.echo(),
        min_f: best.f,
        argmin: best.point.clone(),
        argmin_index: best_index,
        violations,
        samples_run: results.len(),
        probes: 0,
        evaluator_max_disagreement: disagreement,
        evaluator_points,
        checks,
        passed,
    })
}
