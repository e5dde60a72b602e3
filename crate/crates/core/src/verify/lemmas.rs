use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::combinatorics::{factorial_f64, rat_to_f64};
use crate::error::{Error, Result};
use crate::fixedpoint::{gradient_raw, objective_raw};
use crate::flow::{
    admissible_t, aux_scaled, aux_value_exact, classify, f_k_scalar, operator_ok, pairing_bound,
    params_at_zero, permutation_count_identity, s_k_value, unit_lower_bound, AuxParams, Region,
    SortedPoint,
};
use crate::sympoly::Point;

use super::parallel::{map_seeded, with_threads, Family};
use super::{all_passed, CheckOutcome, Checks, ConfigEcho, RunConfig};

/// Slack allowed in the compact-set bound and the auxiliary lower bound.
const LEMMA_TOL: f64 = 1e-9;
const ABOVE_ONE: (f64, f64) = (1.001, 6.0);
const BELOW_ONE: (f64, f64) = (1e-4, 0.999);
/// Step used to confirm that a reported direction decreases `f`.
const PROBE_STEP: f64 = 1e-6;
const GRID: usize = 1000;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LemmaReport {
    pub config: ConfigEcho,
    pub lemmas: Checks,
    pub passed: bool,
}

/// Audits the region lemmas, the `S_k` bounds and the auxiliary identities
/// for `cfg.n >= 4`, with `cfg.samples` points per sampled lemma
/// (`cfg.samples / 10` per tail position for the `S_k` families).
pub fn check_lemmas(cfg: &RunConfig) -> Result<LemmaReport> {
    cfg.validate()?;
    if cfg.n < 4 {
        return Err(Error::DimensionTooSmall {
            what: "check_lemmas",
            required: 4,
            got: cfg.n,
        });
    }
    let lemmas = with_threads(cfg.threads, || audit(cfg))??;
    Ok(LemmaReport {
        config: cfg.echo(),
        passed: all_passed(&lemmas),
        lemmas,
    })
}

fn uniform_box(rng: &mut ChaCha8Rng, n: usize, (lo, hi): (f64, f64)) -> Vec<f64> {
    (0..n)
        .map(|_| loop {
            let v = lo + rng.random::<f64>() * (hi - lo);
            if v > lo {
                break v;
            }
        })
        .collect()
}

/// Uniform on `{x >= 0 : sum x = total}` (normalized exponentials).
fn simplex_point(rng: &mut ChaCha8Rng, n: usize, total: f64) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|v| v / s * total).collect()
}

/// Sorted `x` with `x_k < x_{k+1} = ... = x_n = a`, `a in [1, 6]`, `x_k` in
/// `(0, a)` and the coordinates below `k` in `(0, x_k]` (0-based `k`).
fn tail_equal(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<f64> {
    let a = rng.random_range(1.0..=6.0);
    let xk = loop {
        let v = rng.random::<f64>() * a;
        if v > 0.0 {
            break v;
        }
    };
    let mut x: Vec<f64> = (0..k).map(|_| xk * (1.0 - rng.random::<f64>())).collect();
    x.sort_by(f64::total_cmp);
    x.push(xk);
    x.resize(n, a);
    x
}

fn audit(cfg: &RunConfig) -> Result<Checks> {
    let n = cfg.n;
    let seed = cfg.seed;
    let samples = cfg.samples;
    let per_k = (samples / 10).max(1);
    let mut checks = Checks::new();

    // f >= 5/6 on the face sum x = 6n
    let bound = 6.0 * n as f64;
    let mut simplex = map_seeded(seed, Family::Simplex, 0, samples, |rng, _| {
        simplex_point(rng, n, bound)
    });
    simplex.extend((0..n).map(|i| {
        let mut p = vec![0.0; n];
        p[i] = bound;
        p
    }));
    let values: Vec<f64> = simplex.par_iter().map(|p| objective_raw(p)).collect();
    checks.insert(
        "compact_boundary".into(),
        CheckOutcome::at_least(values, 5.0 / 6.0 - LEMMA_TOL, "f >= 5/6 - 1e-9 on sum x = 6n"),
    );

    let ones = vec![1.0; n];
    let g = gradient_raw(&ones);
    checks.insert(
        "critical_point_at_ones".into(),
        CheckOutcome::at_most(
            g.partials.iter().map(|p| p.abs()).chain([objective_raw(&ones).abs()]),
            1e-12,
            "|grad f(1)| and |f(1)| <= 1e-12",
        ),
    );

    let above = map_seeded(seed, Family::AboveOne, 0, samples, |rng, _| {
        let x = uniform_box(rng, n, ABOVE_ONE);
        gradient_raw(&x).partials.into_iter().fold(f64::INFINITY, f64::min)
    });
    checks.insert(
        "all_above_one".into(),
        CheckOutcome::above(above, 0.0, "every partial > 0 on (1.001, 6)^n"),
    );

    let below = map_seeded(seed, Family::BelowOne, 0, samples, |rng, _| {
        gradient_raw(&uniform_box(rng, n, BELOW_ONE)).sum()
    });
    checks.insert(
        "all_below_one".into(),
        CheckOutcome::below(below, 0.0, "<grad f, 1> < 0 on (1e-4, 0.999)^n"),
    );

    tail_checks(cfg, per_k, &mut checks)?;
    aux_checks(n, &mut checks);
    classify_checks(cfg, &mut checks)?;

    let last_f = map_seeded(seed, Family::TailEqual, u32::MAX, samples, |rng, _| {
        let a = rng.random_range(1.0..=6.0);
        let xk = rng.random::<f64>() * a;
        let v = xk * (1.0 - rng.random::<f64>());
        f_k_scalar(v, xk, a, n)
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    checks.insert(
        "f_last_positive".into(),
        CheckOutcome::above(last_f, 0.0, "F_{n-1}(v) > 0 for 0 < v <= x_{n-1}, x_n >= 1"),
    );
    checks.insert(
        "unit_bound_grid".into(),
        CheckOutcome::above(
            (1..=GRID * 10).map(|i| unit_lower_bound(i as f64 / (GRID * 10) as f64)),
            0.0,
            "1/3 + y^2/3 - y/(y+1) > 0 on (0, 1]",
        ),
    );
    Ok(checks)
}

struct TailSample {
    s_k: f64,
    o_k: f64,
    /// `S_k / (n-2)! - aux_scaled`, when `k <= l - 1` (1-based).
    aux_gap: Option<f64>,
    /// Minimum pairing sum, when `k >= floor(n/2)` (1-based) and the tail has
    /// at least two coordinates.
    pairing: Option<f64>,
}

fn tail_checks(cfg: &RunConfig, per_k: usize, checks: &mut Checks) -> Result<()> {
    let n = cfg.n;
    let ell = n / 2;
    let scale = factorial_f64(n - 2);
    let mut all: Vec<TailSample> = Vec::new();
    for k in 0..n - 1 {
        let batch = map_seeded(cfg.seed, Family::TailEqual, k as u32, per_k, |rng, _| {
            let x = Point::new(tail_equal(rng, n, k))?;
            let sorted = SortedPoint::from_sorted(&x)?;
            let s_k = s_k_value(&sorted, k)?;
            let o_k = operator_ok(&sorted, k)?;
            // 1-based position k + 1
            let aux_gap = if k + 1 < ell {
                let y = (sorted[k] / sorted[n - 1]).sqrt();
                let params = if n.is_multiple_of(2) {
                    AuxParams::even(n, ell - 1 - (k + 1), y)?
                } else {
                    AuxParams::odd(n, ell - (k + 1), y)?
                };
                Some(s_k / scale - aux_scaled(&params))
            } else {
                None
            };
            let pairing = if k + 1 >= ell && k + 2 < n {
                let mut worst = f64::INFINITY;
                for j in k + 1..=n - 2 {
                    worst = worst.min(pairing_bound(&sorted, k, j)?);
                }
                Some(worst)
            } else {
                None
            };
            Ok::<_, Error>(TailSample {
                s_k,
                o_k,
                aux_gap,
                pairing,
            })
        });
        for item in batch {
            all.push(item?);
        }
    }
    checks.insert(
        "tail_equal_s_k_positive".into(),
        CheckOutcome::above(
            all.iter().map(|t| t.s_k),
            0.0,
            "S_k > 0 when x_k < x_{k+1} = ... = x_n >= 1",
        ),
    );
    checks.insert(
        "tail_equal_operator_negative".into(),
        CheckOutcome::below(all.iter().map(|t| t.o_k), 0.0, "O_k f < 0 when x_k < x_n"),
    );
    checks.insert(
        "aux_lower_bound".into(),
        CheckOutcome::at_least(
            all.iter().filter_map(|t| t.aux_gap),
            -LEMMA_TOL,
            "S_k/(n-2)! >= aux(y, t)/(n-2)! - 1e-9 for k <= l - 1",
        ),
    );
    checks.insert(
        "pairing_positive".into(),
        CheckOutcome::above(
            all.iter().filter_map(|t| t.pairing),
            0.0,
            "F_k(x_j) + F_k(x_{n-j}) > 0 for k >= floor(n/2)",
        ),
    );
    Ok(())
}

fn aux_checks(n: usize, checks: &mut Checks) {
    let ts = admissible_t(n);
    let t_max = *ts.last().expect("n >= 4 has an admissible t");
    let at_zero: Vec<_> = ts
        .iter()
        .map(|&t| aux_value_exact(&params_at_zero(n, t).expect("admissible t")))
        .collect();
    let last = at_zero.last().expect("non-empty");
    checks.insert(
        "aux_zero_at_largest_t".into(),
        CheckOutcome::new(
            num_traits::Zero::is_zero(last),
            rat_to_f64(last),
            1,
            format!("aux(0, {t_max}) = 0 exactly"),
        ),
    );
    let drops: Vec<f64> = at_zero.windows(2).map(|w| rat_to_f64(&(&w[0] - &w[1]))).collect();
    let strictly = at_zero.windows(2).all(|w| w[0] > w[1]);
    let worst = drops.iter().copied().fold(f64::INFINITY, f64::min);
    checks.insert(
        "aux_decreasing_in_t".into(),
        CheckOutcome::new(
            strictly,
            if worst.is_finite() { worst } else { 0.0 },
            drops.len(),
            "aux(0, t-1) > aux(0, t), exact",
        ),
    );
    let mut y_steps = Vec::new();
    for &t in &ts {
        let at = |i: usize| {
            let y = i as f64 / GRID as f64;
            let p = if n.is_multiple_of(2) {
                AuxParams::even(n, t, y)
            } else {
                AuxParams::odd(n, t, y)
            };
            aux_scaled(&p.expect("y in [0, 1]"))
        };
        y_steps.extend((1..=GRID).map(|i| at(i) - at(i - 1)));
    }
    checks.insert(
        "aux_increasing_in_y".into(),
        CheckOutcome::above(y_steps, 0.0, "aux(y, t)/(n-2)! strictly increasing on a 1e-3 grid"),
    );
    checks.insert(
        "permutation_count_identity".into(),
        CheckOutcome::new(
            permutation_count_identity(n - 2),
            0.0,
            1,
            "sum_j c_{n-2-j} C(n-2, j) = (n-2)!",
        ),
    );
}

struct ClassifySample {
    critical: bool,
    /// `f(x + 1e-6 d) - f(x)` for the reported direction.
    probe_change: Option<f64>,
    /// Witness of a descent report.
    descent_witness: Option<f64>,
}

fn classify_checks(cfg: &RunConfig, checks: &mut Checks) -> Result<()> {
    let n = cfg.n;
    let mut points = map_seeded(cfg.seed, Family::Classify, 0, cfg.samples, |rng, _| {
        (0..n).map(|_| rng.random::<f64>() * 6.0).collect::<Vec<f64>>()
    });
    points.push(vec![0.0; n]);
    for i in 0..n {
        let mut face: Vec<f64> = (0..n).map(|j| 0.5 + j as f64).collect();
        face[i] = 0.0;
        points.push(face);
    }
    let results: Vec<ClassifySample> = points
        .par_iter()
        .map(|p| {
            let report = classify(&Point::new(p.clone())?)?;
            let probe_change = report.direction.as_ref().map(|d| {
                let moved: Vec<f64> = p
                    .iter()
                    .zip(&d.vector)
                    .map(|(a, b)| a + PROBE_STEP * b)
                    .collect();
                objective_raw(&moved) - objective_raw(p)
            });
            Ok(ClassifySample {
                critical: report.region == Region::CriticalCandidate,
                probe_change,
                descent_witness: (report.region == Region::Descent).then_some(report.witness),
            })
        })
        .collect::<Result<_>>()?;
    let critical = results.iter().filter(|r| r.critical).count();
    checks.insert(
        "classify_no_spurious_critical".into(),
        CheckOutcome::new(
            critical == 0,
            critical as f64,
            results.len(),
            "no sampled x != 1 is classified critical",
        ),
    );
    checks.insert(
        "descent_witness_negative".into(),
        CheckOutcome::below(
            results.iter().filter_map(|r| r.descent_witness),
            0.0,
            "descent witness < 0",
        ),
    );
    checks.insert(
        "direction_decreases_f".into(),
        CheckOutcome::below(
            results.iter().filter_map(|r| r.probe_change),
            0.0,
            "f(x + 1e-6 d) < f(x) along every reported direction",
        ),
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_equal_shape() {
        let mut rng = super::super::parallel::stream_rng(0, Family::TailEqual, 0, 0);
        for k in 0..5 {
            let x = tail_equal(&mut rng, 6, k);
            assert!(x.windows(2).all(|w| w[0] <= w[1]));
            assert!(x[k] < x[k + 1]);
            assert!(x[k + 1..].iter().all(|&v| v == x[5] && v >= 1.0));
            assert_eq!(SortedPoint::from_sorted(&Point::new(x.clone()).unwrap()).unwrap().last_ascent(), Some(k));
        }
    }

    #[test]
    fn simplex_sums() {
        let mut rng = super::super::parallel::stream_rng(0, Family::Simplex, 0, 0);
        let p = simplex_point(&mut rng, 5, 30.0);
        assert!((p.iter().sum::<f64>() - 30.0).abs() < 1e-12);
    }

    #[test]
    fn all_lemmas_pass_small() {
        for n in 4..=7 {
            let cfg = RunConfig {
                samples: 500,
                seed: 2,
                ..RunConfig::new(n)
            };
            let r = check_lemmas(&cfg).unwrap();
            assert!(r.passed, "n={n}: {:#?}", r.lemmas);
        }
    }

    #[test]
    fn rejects_small_n() {
        assert!(check_lemmas(&RunConfig::new(3)).is_err());
    }
}
