use num_bigint::{BigInt, BigUint};
use num_traits::Zero;

use crate::combinatorics::{factorial, rat_to_f64, rencontres, table_rows, ExactRat, TableRow};
use crate::error::{Error, Result};
use crate::fixedpoint::{f_value, l_formula_exact};
use crate::flow::{classify, descend, in_compact, CompactPosition, DescentOutcome, FlowReport, Region};
use crate::sympoly::Point;

use super::report::join;
use super::{Report, DEFAULT_TOLERANCE, EVALUATOR_TOL};

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TablesReport {
    pub n: usize,
    pub rows: Vec<TableRow>,
    /// `sum_k D(n,k) = n!` and `sum_k k D(n,k) = n!`, exact.
    pub identities_hold: bool,
}

pub fn tables_report(n: usize) -> Result<TablesReport> {
    let rows = table_rows(n);
    let mut total = BigUint::zero();
    let mut weighted = BigUint::zero();
    for k in 0..=n {
        let d = rencontres(n, k)?;
        weighted += &d * BigUint::from(k);
        total += d;
    }
    let n_fact = factorial(n);
    // the first moment is n! only for n >= 1
    let identities_hold = total == n_fact && (n == 0 || weighted == n_fact);
    Ok(TablesReport {
        n,
        rows,
        identities_hold,
    })
}

impl Report for TablesReport {
    fn csv_header(&self) -> Vec<&'static str> {
        vec!["k", "factorial", "derangements", "binomial", "rencontres", "rencontres_fraction"]
    }

    fn csv_records(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.k.to_string(),
                    r.factorial.clone(),
                    r.derangements.clone(),
                    r.binomial.clone(),
                    r.rencontres.clone(),
                    r.rencontres_fraction.clone(),
                ]
            })
            .collect()
    }

    fn passed(&self) -> bool {
        self.identities_hold
    }
}

/// Parses an integer, a decimal (`-1.25`, `3e-2`) or a fraction (`7/3`)
/// into an exact rational.
pub fn parse_exact(s: &str) -> Result<ExactRat> {
    let bad = || Error::ParameterOutOfRange(format!("not an exact number: {s:?}"));
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(ExactRat::new(p, q));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let (sign, int_digits) = match int_part.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, int_part.strip_prefix('+').unwrap_or(int_part)),
    };
    let digits = format!("{int_digits}{frac_part}");
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let mut value = ExactRat::from_integer(digits.parse::<BigInt>().map_err(|_| bad())? * sign);
    let shift = exp - frac_part.len() as i32;
    let ten = ExactRat::from_integer(BigInt::from(10));
    let scale = num_traits::pow(ten, shift.unsigned_abs() as usize);
    if shift >= 0 {
        value *= scale;
    } else {
        value /= scale;
    }
    Ok(value)
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ExactEval {
    /// `L_n` as a reduced fraction.
    pub l: String,
    pub l_rounded: f64,
    /// `|l_formula - l_rounded| / l_rounded`.
    pub float_error: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EvalReport {
    pub n: usize,
    pub point: Vec<f64>,
    pub l_formula: f64,
    pub l_enum: Option<f64>,
    pub l_permanent: Option<f64>,
    pub r: f64,
    pub f: f64,
    pub evaluator_max_disagreement: f64,
    pub exact: Option<ExactEval>,
    pub passed: bool,
}

/// Evaluates `f_n` at `x` with every in-range evaluator, and `L_n` exactly
/// when `exact` coordinates are given.
pub fn eval_report(x: &Point, exact: Option<&[ExactRat]>) -> Result<EvalReport> {
    let eval = f_value(x)?;
    let disagreement = eval.max_disagreement();
    let exact = match exact {
        Some(q) => {
            if q.len() != x.dim() {
                return Err(Error::ParameterOutOfRange(format!(
                    "exact point has {} coordinates, expected {}",
                    q.len(),
                    x.dim()
                )));
            }
            let l = l_formula_exact(q);
            let l_rounded = rat_to_f64(&l);
            Some(ExactEval {
                l: l.to_string(),
                l_rounded,
                float_error: (eval.l_formula - l_rounded).abs() / l_rounded.abs().max(f64::MIN_POSITIVE),
            })
        }
        None => None,
    };
    let exact_ok = exact.as_ref().is_none_or(|e| e.float_error <= 1e-12);
    Ok(EvalReport {
        n: x.dim(),
        point: x.to_vec(),
        l_formula: eval.l_formula,
        l_enum: eval.l_enum,
        l_permanent: eval.l_permanent,
        r: eval.r,
        f: eval.f,
        evaluator_max_disagreement: disagreement,
        passed: eval.f >= -DEFAULT_TOLERANCE && disagreement <= EVALUATOR_TOL && exact_ok,
        exact,
    })
}

impl Report for EvalReport {
    fn csv_header(&self) -> Vec<&'static str> {
        vec!["quantity", "value"]
    }

    fn csv_records(&self) -> Vec<Vec<String>> {
        let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        let mut rows = vec![
            vec!["n".into(), self.n.to_string()],
            vec!["point".into(), join(&self.point)],
            vec!["l_formula".into(), self.l_formula.to_string()],
            vec!["l_enum".into(), opt(self.l_enum)],
            vec!["l_permanent".into(), opt(self.l_permanent)],
            vec!["r".into(), self.r.to_string()],
            vec!["f".into(), self.f.to_string()],
            vec![
                "evaluator_max_disagreement".into(),
                self.evaluator_max_disagreement.to_string(),
            ],
        ];
        if let Some(e) = &self.exact {
            rows.push(vec!["l_exact".into(), e.l.clone()]);
            rows.push(vec!["l_exact_float_error".into(), e.float_error.to_string()]);
        }
        rows.push(vec!["passed".into(), self.passed.to_string()]);
        rows
    }

    fn passed(&self) -> bool {
        self.passed
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrajectorySummary {
    pub outcome: DescentOutcome,
    pub iterations: usize,
    pub start_f: f64,
    pub final_f: f64,
    pub final_point: Vec<f64>,
    pub distance_to_ones: f64,
    pub strictly_decreasing: bool,
    pub f_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FlowRunReport {
    pub start: Vec<f64>,
    pub classification: FlowReport,
    /// Present when the start is strictly positive and inside `sum x < 6n`.
    pub trajectory: Option<TrajectorySummary>,
    pub passed: bool,
}

/// Distance from `1` within which a stalled descent counts as arrived.
const ARRIVAL_TOL: f64 = 1e-4;

fn witness_consistent(r: &FlowReport) -> bool {
    match r.region {
        Region::OutsideCompact => r.witness >= 5.0 / 6.0,
        Region::Boundary => r.witness >= 5.0 / 6.0 - 1e-9,
        Region::AllAboveOne => r.witness > 0.0,
        Region::AllBelowOne | Region::Descent => r.witness < 0.0,
        Region::CriticalCandidate => r.witness <= 1e-6,
    }
}

/// Classifies `start` and, from interior starts, runs [`descend`].
pub fn flow_report(start: &Point, step: f64, max_iters: usize) -> Result<FlowRunReport> {
    let classification = classify(start)?;
    let interior = start.iter().all(|&v| v > 0.0)
        && in_compact(start).position == CompactPosition::Inside;
    let trajectory = if interior {
        let t = descend(start, step, max_iters)?;
        Some(TrajectorySummary {
            outcome: t.outcome,
            iterations: t.iterations(),
            start_f: t.f_values[0],
            final_f: t.final_value(),
            final_point: t.final_point().to_vec(),
            distance_to_ones: t.distance_to_ones(),
            strictly_decreasing: t.strictly_decreasing(),
            f_values: t.f_values.clone(),
        })
    } else {
        None
    };
    let trajectory_ok = trajectory.as_ref().is_none_or(|t| {
        t.strictly_decreasing
            && (t.outcome != DescentOutcome::Stalled || t.distance_to_ones <= ARRIVAL_TOL)
    });
    Ok(FlowRunReport {
        start: start.to_vec(),
        passed: witness_consistent(&classification) && trajectory_ok,
        classification,
        trajectory,
    })
}

impl Report for FlowRunReport {
    fn csv_header(&self) -> Vec<&'static str> {
        vec!["quantity", "value"]
    }

    fn csv_records(&self) -> Vec<Vec<String>> {
        let c = &self.classification;
        let region = serde_json::to_value(c.region)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default();
        let mut rows = vec![
            vec!["start".into(), join(&self.start)],
            vec!["region".into(), region],
            vec!["witness".into(), c.witness.to_string()],
        ];
        if let Some(d) = &c.direction {
            rows.push(vec!["direction".into(), join(&d.vector)]);
        }
        if let Some(t) = &self.trajectory {
            let outcome = serde_json::to_value(t.outcome)
                .ok()
                .and_then(|v| v.as_str().map(str::to_owned))
                .unwrap_or_default();
            rows.push(vec!["outcome".into(), outcome]);
            rows.push(vec!["iterations".into(), t.iterations.to_string()]);
            rows.push(vec!["start_f".into(), t.start_f.to_string()]);
            rows.push(vec!["final_f".into(), t.final_f.to_string()]);
            rows.push(vec!["final_point".into(), join(&t.final_point)]);
            rows.push(vec!["distance_to_ones".into(), t.distance_to_ones.to_string()]);
            rows.push(vec!["strictly_decreasing".into(), t.strictly_decreasing.to_string()]);
        }
        rows.push(vec!["passed".into(), self.passed.to_string()]);
        rows
    }

    fn passed(&self) -> bool {
        self.passed
    }
}
