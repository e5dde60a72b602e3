//! Monotone-flow machinery for `f_n`, `n >= 4`.
//!
//! Inside the compact set `C = {x >= 0 : sum x_i <= 6n}` every point other
//! than `1` comes with a direction along which `f_n` strictly decreases:
//!
//! * `(1, inf)^n`: every partial is positive, so `-grad f` works;
//! * `(0, 1)^n`: `<grad f, 1> < 0`;
//! * otherwise, sorted so that `x_1 <= ... <= x_n`, take the largest `k`
//!   with `x_k < x_{k+1}`; then `O_k f_n < 0` and `x_k b_k - x_n b_n` works;
//! * on the faces `x_i = 0` the partial in `x_i` diverges to `-inf`, so
//!   `+b_i` works, and at the origin `+1` does.
//!
//! Sorted positions and `k` are 0-based throughout this module.

mod aux;
mod classify;
mod descend;
mod operators;

use std::ops::Deref;

pub use aux::{
    admissible_t, aux_even, aux_even_exact, aux_odd, aux_odd_exact, aux_scaled, aux_value,
    aux_value_exact, derangement_binomial_sum, params_at_zero, permutation_count_identity,
    AuxKind, AuxParams, UnitInterval,
};
pub use classify::{
    classify, Direction, DirectionKind, FlowReport, Region, CRITICAL_TOL, ZERO_FACE_STEP,
};
pub use descend::{descend, DescentOutcome, Trajectory};
pub use operators::{
    f_k_scalar, operator_ok, pairing_bound, s_k_value, unit_lower_bound, OPERATOR_ROUTE_TOL,
};

use crate::error::{Error, Result};
use crate::sympoly::Point;

/// A point sorted non-decreasingly, remembering where each coordinate came
/// from.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedPoint {
    coords: Vec<f64>,
    /// `order[p]` is the original index of the coordinate at sorted position `p`.
    order: Vec<usize>,
}

impl SortedPoint {
    pub fn new(x: &Point) -> Self {
        let mut order: Vec<usize> = (0..x.dim()).collect();
        // Stable, so equal coordinates keep their original relative order.
        order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
        let coords = order.iter().map(|&i| x[i]).collect();
        Self { coords, order }
    }

    /// Wraps coordinates that are already sorted.
    pub fn from_sorted(x: &Point) -> Result<Self> {
        if x.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::ParameterOutOfRange(
                "coordinates are not sorted non-decreasingly".into(),
            ));
        }
        Ok(Self {
            coords: x.to_vec(),
            order: (0..x.dim()).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Original index of sorted position `pos`.
    pub fn original_index(&self, pos: usize) -> usize {
        self.order[pos]
    }

    /// Sorted position of every original index.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.order.len()];
        for (p, &orig) in self.order.iter().enumerate() {
            pos[orig] = p;
        }
        pos
    }

    /// Largest sorted position `k` with `x_k < x_{k+1}` (strict, no tolerance).
    pub fn last_ascent(&self) -> Option<usize> {
        (0..self.dim().saturating_sub(1))
            .rev()
            .find(|&k| self.coords[k] < self.coords[k + 1])
    }
}

impl Deref for SortedPoint {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.coords
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompactPosition {
    Inside,
    Boundary,
    Outside,
}

/// Where a point sits relative to `C = {x >= 0 : sum x_i <= 6n}`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CompactStatus {
    pub position: CompactPosition,
    /// `6n - sum x_i`.
    pub margin: f64,
}

impl CompactStatus {
    pub fn inside(&self) -> bool {
        self.position != CompactPosition::Outside
    }
}

/// Relative tolerance on `sum x_i = 6n` for the boundary classification.
pub const BOUNDARY_REL_TOL: f64 = 1e-12;

pub fn in_compact(x: &Point) -> CompactStatus {
    let bound = 6.0 * x.dim() as f64;
    let margin = bound - x.iter().sum::<f64>();
    let position = if margin.abs() <= BOUNDARY_REL_TOL * bound {
        CompactPosition::Boundary
    } else if margin > 0.0 {
        CompactPosition::Inside
    } else {
        CompactPosition::Outside
    };
    CompactStatus { position, margin }
}
