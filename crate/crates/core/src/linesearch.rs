//! Backtracking (halving) line search shared by the flow and the minimizer.

/// Sufficient-decrease constant.
pub const ARMIJO_C: f64 = 1e-4;

/// Steps below this are treated as "no decreasing step exists".
pub const STEP_FLOOR: f64 = 1e-12;

/// Result of a successful search.
#[derive(Debug, Clone)]
pub(crate) struct Accepted {
    pub step: f64,
    pub point: Vec<f64>,
    pub value: f64,
}

/// Halves `step` from `initial` until `trial(step)` yields a feasible point
/// whose value is strictly below `f0` and satisfies the Armijo condition
/// `f <= f0 + ARMIJO_C * predicted`, where `predicted` (negative) is the
/// first-order change reported by `trial`.
///
/// `trial` returns `None` for infeasible steps, otherwise
/// `(point, value, predicted)`.
pub(crate) fn backtrack<F>(f0: f64, initial: f64, mut trial: F) -> Option<Accepted>
where
    F: FnMut(f64) -> Option<(Vec<f64>, f64, f64)>,
{
    let mut step = initial;
    while step >= STEP_FLOOR {
        if let Some((point, value, predicted)) = trial(step) {
            if value < f0 && value <= f0 + ARMIJO_C * predicted {
                return Some(Accepted { step, point, value });
            }
        }
        step *= 0.5;
    }
    None
}
