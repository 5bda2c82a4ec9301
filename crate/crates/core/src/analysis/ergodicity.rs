use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::basis::OccupationBasis;
use crate::error::{Error, Result};
use crate::ladder::{annihilation_operator, field_operator};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErgodicityReport {
    /// Smallest `n` with `<x, φ(f)^n y> > 0`.
    pub first_power: usize,
    pub pairing: f64,
    /// Lowest occupied sectors of `x` and `y`.
    pub p: usize,
    pub q: usize,
    /// `<x, φ^{p+q} y>`.
    pub pairing_at_bound: f64,
    /// `sqrt(p! q!) <f^{⊗p}|x_p> <f^{⊗q}|y_q>`.
    pub lower_bound: f64,
    pub bound_holds: bool,
}

fn lowest_sector(basis: &OccupationBasis, v: &DVector<f64>) -> Option<usize> {
    (0..=basis.n_max()).find(|&n| basis.sector(n).any(|i| v[i] != 0.0))
}

fn sector_part(basis: &OccupationBasis, v: &DVector<f64>, n: usize) -> DVector<f64> {
    let range = basis.sector(n);
    DVector::from_fn(v.len(), |i, _| if range.contains(&i) { v[i] } else { 0.0 })
}

/// Searches for a positive pairing `<x, φ(f)^n y>` and checks the explicit
/// lower bound obtained by routing through the vacuum.
pub fn ergodicity_probe(
    basis: &OccupationBasis,
    f: &[f64],
    x: &DVector<f64>,
    y: &DVector<f64>,
    n_cap: usize,
) -> Result<ErgodicityReport> {
    let dim = basis.dim();
    if x.len() != dim || y.len() != dim {
        return Err(Error::LengthMismatch { expected: dim, found: x.len().min(y.len()) });
    }
    if x.min() < 0.0 || y.min() < 0.0 {
        return Err(Error::InvalidArgument("probe vectors must lie in the cone".into()));
    }
    let (Some(p), Some(q)) = (lowest_sector(basis, x), lowest_sector(basis, y)) else {
        return Err(Error::InvalidArgument("probe vectors must be nonzero".into()));
    };
    let phi = field_operator(basis, f)?.sparse();
    let a = annihilation_operator(basis, f)?.sparse();

    let mut v = nalgebra::DMatrix::from_column_slice(dim, 1, y.as_slice());
    let mut first = None;
    let mut at_bound = None;
    for n in 0..=n_cap.max(p + q) {
        let pairing = x.dot(&v.column(0));
        if first.is_none() && pairing > 0.0 && n <= n_cap {
            first = Some((n, pairing));
        }
        if n == p + q {
            at_bound = Some(pairing);
        }
        if first.is_some() && at_bound.is_some() {
            break;
        }
        v = phi.mul_dense(&v);
    }
    let Some((first_power, pairing)) = first else {
        return Err(Error::NotErgodic { cap: n_cap, context: format!("lowest sectors p = {p}, q = {q}") });
    };

    // a(f)^p x_p = sqrt(p!) <f^{⊗p}|x_p> Ω
    let lower = |v: &DVector<f64>, k: usize| {
        let mut w = nalgebra::DMatrix::from_column_slice(dim, 1, v.as_slice());
        for _ in 0..k {
            w = a.mul_dense(&w);
        }
        w[(basis.vacuum(), 0)]
    };
    let lower_bound = lower(&sector_part(basis, x, p), p) * lower(&sector_part(basis, y, q), q);
    let pairing_at_bound = at_bound.unwrap_or(0.0);
    let slack = 1e-12 * pairing_at_bound.abs().max(lower_bound.abs());
    Ok(ErgodicityReport {
        first_power,
        pairing,
        p,
        q,
        pairing_at_bound,
        lower_bound,
        bound_holds: lower_bound > 0.0 && pairing_at_bound >= lower_bound - slack && first_power <= p + q,
    })
}
