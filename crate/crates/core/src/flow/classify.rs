use crate::combinatorics::{derangements_f64, factorial_f64};
use crate::error::Result;
use crate::fixedpoint::{gradient_raw, objective_raw};
use crate::sympoly::Point;

use super::operators::{operator_ok, require_n4};
use super::{in_compact, CompactPosition, SortedPoint};

/// Per-coordinate distance from 1 below which a point counts as `1`.
pub const CRITICAL_TOL: f64 = 1e-9;

/// Step of the one-sided difference quotient used on the faces `x_i = 0`.
pub const ZERO_FACE_STEP: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    /// `sum x_i > 6n`; witness is `f_n(x)`.
    OutsideCompact,
    /// `sum x_i = 6n`; witness is `f_n(x)`.
    Boundary,
    /// `x in (1, inf)^n`; witness is `min_i df/dx_i`.
    AllAboveOne,
    /// `x in (0, 1)^n`; witness is `<grad f, 1>`.
    AllBelowOne,
    /// `x = 1` to within [`CRITICAL_TOL`]; witness is `max_i |df/dx_i|`.
    CriticalCandidate,
    /// A certified decrease direction; witness is the directional slope.
    Descent,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DirectionKind {
    NegativeGradient,
    /// The all-ones direction.
    Diagonal,
    /// `+b_index` off a face `x_index = 0`.
    Basis { index: usize },
    /// `x_k b_k - x_n b_n`; `k` and `last` are original indices,
    /// `sorted_k` the sorted position of `k`.
    Operator { k: usize, last: usize, sorted_k: usize },
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Direction {
    pub kind: DirectionKind,
    /// In the caller's coordinate order.
    pub vector: Vec<f64>,
    /// First-order change of `f_n` along `vector` (negative).
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FlowReport {
    pub region: Region,
    pub witness: f64,
    pub direction: Option<Direction>,
}

/// Classifies `x` by which part of the flow argument applies to it.
pub fn classify(x: &Point) -> Result<FlowReport> {
    let n = x.dim();
    require_n4("classify", n)?;

    match in_compact(x).position {
        CompactPosition::Outside => {
            return Ok(FlowReport {
                region: Region::OutsideCompact,
                witness: objective_raw(x),
                direction: None,
            })
        }
        CompactPosition::Boundary => {
            return Ok(FlowReport {
                region: Region::Boundary,
                witness: objective_raw(x),
                direction: None,
            })
        }
        CompactPosition::Inside => {}
    }

    if x.iter().all(|&v| v == 0.0) {
        // f(t 1) = c_n/n! - (1 - c_{n-1}/(n-1)!) t + O(t^2)
        let slope = derangements_f64(n - 1) / factorial_f64(n - 1) - 1.0;
        return Ok(descent(DirectionKind::Diagonal, vec![1.0; n], slope));
    }

    if let Some(index) = x.iter().position(|&v| v == 0.0) {
        let mut moved = x.to_vec();
        moved[index] += ZERO_FACE_STEP;
        let quotient = (objective_raw(&moved) - objective_raw(x)) / ZERO_FACE_STEP;
        let mut vector = vec![0.0; n];
        vector[index] = 1.0;
        return Ok(descent(DirectionKind::Basis { index }, vector, quotient));
    }

    let grad = gradient_raw(x);
    if x.iter().all(|&v| (v - 1.0).abs() <= CRITICAL_TOL) {
        let witness = grad.partials.iter().map(|p| p.abs()).fold(0.0, f64::max);
        return Ok(FlowReport {
            region: Region::CriticalCandidate,
            witness,
            direction: None,
        });
    }

    if x.iter().all(|&v| v > 1.0) {
        let witness = grad.partials.iter().copied().fold(f64::INFINITY, f64::min);
        let vector: Vec<f64> = grad.partials.iter().map(|p| -p).collect();
        let slope = -grad.partials.iter().map(|p| p * p).sum::<f64>();
        return Ok(FlowReport {
            region: Region::AllAboveOne,
            witness,
            direction: Some(Direction {
                kind: DirectionKind::NegativeGradient,
                vector,
                slope,
            }),
        });
    }

    if x.iter().all(|&v| v < 1.0) {
        let witness = grad.sum();
        return Ok(FlowReport {
            region: Region::AllBelowOne,
            witness,
            direction: Some(Direction {
                kind: DirectionKind::Diagonal,
                vector: vec![1.0; n],
                slope: witness,
            }),
        });
    }

    let sorted = SortedPoint::new(x);
    let sorted_k = sorted
        .last_ascent()
        .expect("mixed point has two distinct coordinates");
    let last_pos = n - 1;
    let witness = operator_ok(&sorted, sorted_k)?;
    let k = sorted.original_index(sorted_k);
    let last = sorted.original_index(last_pos);
    let mut vector = vec![0.0; n];
    vector[k] = sorted[sorted_k];
    vector[last] = -sorted[last_pos];
    Ok(descent(
        DirectionKind::Operator { k, last, sorted_k },
        vector,
        witness,
    ))
}

fn descent(kind: DirectionKind, vector: Vec<f64>, slope: f64) -> FlowReport {
    FlowReport {
        region: Region::Descent,
        witness: slope,
        direction: Some(Direction {
            kind,
            vector,
            slope,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pt(v: &[f64]) -> Point {
        Point::new(v.to_vec()).unwrap()
    }

    #[test]
    fn ones_is_critical() {
        for n in 4..=12 {
            let r = classify(&Point::ones(n)).unwrap();
            assert_eq!(r.region, Region::CriticalCandidate);
            assert!(r.witness <= 1e-12);
        }
        let mut near = vec![1.0; 5];
        near[2] += 5e-10;
        assert_eq!(classify(&pt(&near)).unwrap().region, Region::CriticalCandidate);
    }

    #[test]
    fn above_one() {
        let r = classify(&pt(&[2.0, 3.0, 4.0, 5.0])).unwrap();
        assert_eq!(r.region, Region::AllAboveOne);
        assert!(r.witness > 0.0);
    }

    #[test]
    fn below_one() {
        let r = classify(&pt(&[0.2, 0.9, 0.5, 0.7])).unwrap();
        assert_eq!(r.region, Region::AllBelowOne);
        assert!(r.witness < 0.0);
    }

    #[test]
    fn mixed_point_uses_operator() {
        let r = classify(&pt(&[2.0, 0.5, 2.0, 2.0])).unwrap();
        assert_eq!(r.region, Region::Descent);
        assert!(r.witness < 0.0);
        let d = r.direction.unwrap();
        // sorted (0.5, 2, 2, 2): k is sorted position 0 = original index 1,
        // the last sorted position is the final original 2.0 (index 3).
        assert_eq!(
            d.kind,
            DirectionKind::Operator {
                k: 1,
                last: 3,
                sorted_k: 0
            }
        );
        assert_eq!(d.vector, vec![0.0, 0.5, 0.0, -2.0]);
    }

    #[test]
    fn faces_and_origin() {
        let r = classify(&pt(&[0.0, 1.0, 2.0, 3.0])).unwrap();
        assert_eq!(r.region, Region::Descent);
        assert_eq!(r.direction.as_ref().unwrap().kind, DirectionKind::Basis { index: 0 });
        assert!(r.witness < 0.0);

        let r = classify(&Point::zeros(5)).unwrap();
        assert_eq!(r.region, Region::Descent);
        assert_eq!(r.direction.as_ref().unwrap().kind, DirectionKind::Diagonal);
        assert!(r.witness < 0.0);
    }

    #[test]
    fn compact_regions() {
        let r = classify(&pt(&[7.0; 4])).unwrap();
        assert_eq!(r.region, Region::OutsideCompact);
        assert!(r.witness >= 5.0 / 6.0);
        let r = classify(&pt(&[24.0, 0.0, 0.0, 0.0])).unwrap();
        assert_eq!(r.region, Region::Boundary);
        assert!((r.witness - 57.0 / 24.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_small_n() {
        assert!(matches!(
            classify(&Point::ones(3)),
            Err(Error::DimensionTooSmall { required: 4, .. })
        ));
    }

    #[test]
    fn descent_directions_decrease_f() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 4..=8 {
            for _ in 0..300 {
                let v: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..6.0)).collect();
                let x = pt(&v);
                let r = classify(&x).unwrap();
                assert_ne!(r.region, Region::CriticalCandidate);
                if let Some(d) = r.direction {
                    assert!(d.slope < 0.0);
                    let moved: Vec<f64> =
                        v.iter().zip(&d.vector).map(|(a, b)| a + 1e-6 * b).collect();
                    assert!(objective_raw(&moved) < objective_raw(&v));
                }
            }
        }
    }
}
