//! The Fröhlich cone in the occupation basis: the nonnegative orthant.
//!
//! With the orthant as cone, `A ⊵ B` is the entrywise comparison
//! `A_ij >= B_ij`, and `S ⊳ 0` means every entry of `S` is strictly positive.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::operator::FockOperator;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeVerdict {
    pub preserving: bool,
    pub improving: bool,
    pub min_entry: f64,
    /// `max(0, -min_entry)`.
    pub max_negative_violation: f64,
    pub witness: Option<(usize, usize)>,
}

/// Jordan decomposition `v = v₊ - v₋` with disjoint supports.
pub fn cone_decompose(v: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
    (v.map(|x| x.max(0.0)), v.map(|x| (-x).max(0.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VectorPositivity {
    pub positive: bool,
    pub strictly_positive: bool,
    pub min_entry: f64,
    pub witness: Option<usize>,
}

/// Positivity relative to `‖v‖_∞`: positive iff `min >= -τ‖v‖_∞`, strictly
/// positive iff `min > τ‖v‖_∞`. The witness is the argmin whenever either
/// flag is false.
pub fn vector_positivity(v: &DVector<f64>, tau_pos: f64) -> VectorPositivity {
    let scale = v.amax();
    let (arg, min) = v.argmin();
    let positive = min >= -tau_pos * scale;
    let strictly_positive = min > tau_pos * scale;
    VectorPositivity {
        positive,
        strictly_positive,
        min_entry: min,
        witness: if positive && strictly_positive { None } else { Some(arg) },
    }
}

fn argmin(op: &FockOperator) -> ((usize, usize), f64) {
    let m = op.matrix();
    let mut best = ((0, 0), f64::INFINITY);
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if m[(i, j)] < best.1 {
                best = ((i, j), m[(i, j)]);
            }
        }
    }
    best
}

/// `A ⊵ B` tested as `min(A - B) >= -τ · scale` with
/// `scale = max(max|A|, max|B|, 1)`.
pub fn order_check(a: &FockOperator, b: &FockOperator, tau: f64) -> ConeVerdict {
    let diff = a - b;
    let scale = a.max_abs().max(b.max_abs()).max(1.0);
    let (at, min) = argmin(&diff);
    let preserving = min >= -tau * scale;
    let improving = min > tau * scale;
    ConeVerdict {
        preserving,
        improving,
        min_entry: min,
        max_negative_violation: (-min).max(0.0),
        witness: if preserving && improving { None } else { Some(at) },
    }
}

/// `S ⊳ 0` tested as `min S > τ_pos · max S`.
pub fn improving_check(s: &FockOperator, tau_pos: f64) -> ConeVerdict {
    let (at, min) = argmin(s);
    let max = s.max_entry();
    let improving = min > tau_pos * max && max > 0.0;
    let preserving = min >= -tau_pos * max.abs().max(s.max_abs());
    ConeVerdict {
        preserving: preserving || improving,
        improving,
        min_entry: min,
        max_negative_violation: (-min).max(0.0),
        witness: if improving { None } else { Some(at) },
    }
}
