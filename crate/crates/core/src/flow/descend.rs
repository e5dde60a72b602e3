use crate::error::{Error, Result};
use crate::fixedpoint::objective_raw;
use crate::linesearch::backtrack;
use crate::sympoly::Point;

use super::classify::{classify, DirectionKind, Region};
use super::operators::require_n4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DescentOutcome {
    /// Reached the critical candidate `1`.
    Converged,
    /// Ran out of iterations while still decreasing.
    MaxIters,
    /// No decreasing step above the step-size floor. Near `1` this is the
    /// normal stop: `f` is then below its own rounding error.
    Stalled,
}

/// An `f`-monotone path produced by [`descend`].
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Trajectory {
    pub points: Vec<Vec<f64>>,
    pub f_values: Vec<f64>,
    pub regions: Vec<Region>,
    pub steps: Vec<f64>,
    pub outcome: DescentOutcome,
}

impl Trajectory {
    pub fn iterations(&self) -> usize {
        self.steps.len()
    }

    pub fn final_point(&self) -> &[f64] {
        self.points.last().expect("trajectory has a start point")
    }

    pub fn final_value(&self) -> f64 {
        *self.f_values.last().expect("trajectory has a start value")
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.f_values.windows(2).all(|w| w[1] < w[0])
    }

    /// `max_i |x_i - 1|` at the final point.
    pub fn distance_to_ones(&self) -> f64 {
        self.final_point()
            .iter()
            .map(|v| (v - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Follows the certified decrease direction from [`classify`] with a halving
/// line search until the point is classified as critical, no decreasing step
/// exists, or `max_iters` steps have been taken. Operator steps share the
/// `x_n` part across the whole tie at the top (see [`GroupStep`]) and land
/// exactly on the tie when `x_k` reaches it.
///
/// `x0` must be strictly positive and strictly inside `sum x_i < 6n`; every
/// accepted step stays there.
pub fn descend(x0: &Point, step: f64, max_iters: usize) -> Result<Trajectory> {
    let n = x0.dim();
    require_n4("descend", n)?;
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::ParameterOutOfRange(format!(
            "initial step must be positive, got {step}"
        )));
    }
    let bound = 6.0 * n as f64;
    let interior = |v: &[f64]| v.iter().all(|&c| c > 0.0) && v.iter().sum::<f64>() < bound;
    if !interior(x0) {
        return Err(Error::ParameterOutOfRange(
            "start point must be strictly positive with sum below 6n".into(),
        ));
    }

    let mut x = x0.to_vec();
    let mut fx = objective_raw(&x);
    let mut traj = Trajectory {
        points: vec![x.clone()],
        f_values: vec![fx],
        regions: Vec::new(),
        steps: Vec::new(),
        outcome: DescentOutcome::MaxIters,
    };

    for _ in 0..max_iters {
        let report = classify(&Point::from_unchecked(x.clone()))?;
        traj.regions.push(report.region);
        let Some(direction) = report.direction else {
            traj.outcome = match report.region {
                Region::CriticalCandidate => DescentOutcome::Converged,
                _ => DescentOutcome::Stalled,
            };
            return Ok(traj);
        };
        let group = match direction.kind {
            DirectionKind::Operator { k, last, .. } => Some(GroupStep::new(&x, k, last)),
            _ => None,
        };
        let initial = match &group {
            Some(g) if g.meet < step => g.meet,
            _ => step,
        };
        let accepted = backtrack(fx, initial, |alpha| {
            let mut trial = match &group {
                Some(g) => g.trial(&x, alpha),
                None => x
                    .iter()
                    .zip(&direction.vector)
                    .map(|(a, d)| a + alpha * d)
                    .collect(),
            };
            snap_ties(&mut trial);
            if !interior(&trial) {
                return None;
            }
            let value = objective_raw(&trial);
            Some((trial, value, alpha * direction.slope))
        });
        match accepted {
            Some(acc) => {
                x = acc.point;
                fx = acc.value;
                traj.points.push(x.clone());
                traj.f_values.push(fx);
                traj.steps.push(acc.step);
            }
            None => {
                traj.outcome = DescentOutcome::Stalled;
                return Ok(traj);
            }
        }
    }
    Ok(traj)
}

/// Relative gap below which two coordinates count as the same value.
const TIE_REL_TOL: f64 = 1e-13;

/// Sets each run of sorted coordinates whose consecutive gaps are within
/// rounding noise to the run's largest value. Gradient steps split exact ties
/// by an ulp or two, which would otherwise leave `k` on a spurious ascent.
fn snap_ties(x: &mut [f64]) {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut start = 0;
    for end in 1..=order.len() {
        let split = end == order.len() || {
            let (lo, hi) = (x[order[end - 1]], x[order[end]]);
            hi - lo > TIE_REL_TOL * hi
        };
        if split {
            let top = x[order[end - 1]];
            for &i in &order[start..end] {
                x[i] = top;
            }
            start = end;
        }
    }
}

/// Operator step with the `-x_n b_n` part shared evenly by every coordinate
/// tied with `x_n`. Since `f` is symmetric, each choice of `n` within the
/// tie gives the same `O_k f`, so the averaged direction has the same slope;
/// the tied group then moves down together and stays tied.
struct GroupStep {
    vector: Vec<f64>,
    /// Step at which `x_k` reaches the group.
    meet: f64,
    k: usize,
    group: Vec<usize>,
}

impl GroupStep {
    fn new(x: &[f64], k: usize, last: usize) -> Self {
        let top = x[last];
        let group: Vec<usize> = (0..x.len()).filter(|&i| x[i] == top).collect();
        let m = group.len() as f64;
        let mut vector = vec![0.0; x.len()];
        vector[k] = x[k];
        for &g in &group {
            vector[g] = -top / m;
        }
        let meet = (top - x[k]) / (x[k] + top / m);
        Self {
            vector,
            meet,
            k,
            group,
        }
    }

    fn trial(&self, x: &[f64], alpha: f64) -> Vec<f64> {
        let mut out: Vec<f64> = x
            .iter()
            .zip(&self.vector)
            .map(|(a, d)| a + alpha * d)
            .collect();
        if alpha == self.meet {
            out[self.k] = out[self.group[0]];
        }
        out
    }
}
