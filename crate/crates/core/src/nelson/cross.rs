//! The cross term `C_κ = -(P - P_f^{≤κ})·P_f^{>κ}` and its clamped
//! regularizations `C^±_{κ,n}`.
//!
//! Both factors are diagonal in the occupation basis, so every spectral
//! projection `E_A[a, b]` reduces to an indicator on the diagonal entry.

use serde::{Deserialize, Serialize};

use crate::basis::OccupationBasis;
use crate::error::{Error, Result};
use crate::grid::ModeGrid;
use crate::operator::FockOperator;
use crate::split::FactorizationMap;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrossTerm {
    /// `P_j - P_{f,j}^{≤κ}` per component, per state.
    low: Vec<Vec<f64>>,
    /// `P_{f,j}^{>κ}` per component, per state.
    high: Vec<Vec<f64>>,
}

pub fn cross_term(basis: &OccupationBasis, grid: &ModeGrid, split: &FactorizationMap, p: &[f64]) -> Result<CrossTerm> {
    let dim = grid.dimension();
    if p.len() != dim {
        return Err(Error::LengthMismatch { expected: dim, found: p.len() });
    }
    if basis.mode_count() != grid.len() {
        return Err(Error::LengthMismatch { expected: grid.len(), found: basis.mode_count() });
    }
    let modes = grid.modes();
    let mut low = vec![Vec::with_capacity(basis.dim()); dim];
    let mut high = vec![Vec::with_capacity(basis.dim()); dim];
    for n in basis.states() {
        for j in 0..dim {
            let lo: f64 = split.low_modes().iter().map(|&m| n[m] as f64 * modes[m].k[j]).sum();
            let hi: f64 = split.high_modes().iter().map(|&m| n[m] as f64 * modes[m].k[j]).sum();
            low[j].push(p[j] - lo);
            high[j].push(hi);
        }
    }
    Ok(CrossTerm { low, high })
}

fn pos(x: f64) -> f64 {
    x.max(0.0)
}

fn neg(x: f64) -> f64 {
    (-x).max(0.0)
}

fn within(x: f64, lo: f64, hi: f64) -> bool {
    lo <= x && x <= hi
}

/// `(AB)_{[n]}` for commuting diagonal `A`, `B` with entries `a`, `b`.
pub fn lower_clamp(a: f64, b: f64, n: f64) -> f64 {
    let mut v = pos(a) * pos(b) + neg(a) * neg(b);
    if within(a, 0.0, n) && within(b, -n, 0.0) {
        v -= pos(a) * neg(b);
    }
    if within(a, -n, 0.0) && within(b, 0.0, n) {
        v -= neg(a) * pos(b);
    }
    v
}

/// `(AB)^{[n]}` for commuting diagonal `A`, `B` with entries `a`, `b`.
pub fn upper_clamp(a: f64, b: f64, n: f64) -> f64 {
    let mut v = -(pos(a) * neg(b) + neg(a) * pos(b));
    if within(a, 0.0, n) && within(b, 0.0, n) {
        v += pos(a) * pos(b);
    }
    if within(a, -n, 0.0) && within(b, -n, 0.0) {
        v += neg(a) * neg(b);
    }
    v
}

impl CrossTerm {
    pub fn dimension(&self) -> usize {
        self.low.len()
    }

    pub fn len(&self) -> usize {
        self.low.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn diagonal_with(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        (0..self.len())
            .map(|s| -(0..self.dimension()).map(|j| f(self.low[j][s], self.high[j][s])).sum::<f64>())
            .collect()
    }

    pub fn exact_diagonal(&self) -> Vec<f64> {
        self.diagonal_with(|a, b| a * b)
    }

    pub fn exact(&self) -> FockOperator {
        FockOperator::from_diagonal(&self.exact_diagonal())
    }

    /// Diagonal of `C^+_{κ,n} = -Σ_j (A_j B_j)_{[n]}`.
    pub fn plus_diagonal(&self, n: f64) -> Vec<f64> {
        self.diagonal_with(|a, b| lower_clamp(a, b, n))
    }

    /// Diagonal of `C^-_{κ,n} = -Σ_j (A_j B_j)^{[n]}`.
    pub fn minus_diagonal(&self, n: f64) -> Vec<f64> {
        self.diagonal_with(|a, b| upper_clamp(a, b, n))
    }

    pub fn plus(&self, n: f64) -> FockOperator {
        FockOperator::from_diagonal(&self.plus_diagonal(n))
    }

    pub fn minus(&self, n: f64) -> FockOperator {
        FockOperator::from_diagonal(&self.minus_diagonal(n))
    }

    /// Smallest `n` at which both clamps are inactive: `max_j,s max(|a|, |b|)`.
    pub fn saturation(&self) -> f64 {
        self.low
            .iter()
            .chain(&self.high)
            .flat_map(|v| v.iter().map(|x| x.abs()))
            .fold(0.0, f64::max)
    }

    /// `2 n² · dimension`, the uniform bound on `C^+` from above and on `C^-` from below.
    pub fn clamp_bound(&self, n: f64) -> f64 {
        2.0 * n * n * self.dimension() as f64
    }

    /// Entrywise audit of `C^+_n <= bound`, `C^+_n <= C^+_{n+1}`,
    /// `C^-_n >= -bound`, `C^-_n >= C^-_{n+1}` over `n = 1..=n_max`.
    pub fn audit(&self, n_max: usize) -> ClampAudit {
        let mut audit = ClampAudit { checked_up_to: n_max, ..Default::default() };
        for n in 1..=n_max {
            let nf = n as f64;
            let bound = self.clamp_bound(nf);
            let (p, p1) = (self.plus_diagonal(nf), self.plus_diagonal(nf + 1.0));
            let (m, m1) = (self.minus_diagonal(nf), self.minus_diagonal(nf + 1.0));
            for s in 0..self.len() {
                audit.plus_bound_violation = audit.plus_bound_violation.max(p[s] - bound);
                audit.plus_monotone_violation = audit.plus_monotone_violation.max(p[s] - p1[s]);
                audit.minus_bound_violation = audit.minus_bound_violation.max(-bound - m[s]);
                audit.minus_monotone_violation = audit.minus_monotone_violation.max(m1[s] - m[s]);
            }
        }
        audit
    }
}

/// Largest violations found by [`CrossTerm::audit`]; all nonpositive when the
/// bounds and monotonicity hold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClampAudit {
    pub checked_up_to: usize,
    pub plus_bound_violation: f64,
    pub plus_monotone_violation: f64,
    pub minus_bound_violation: f64,
    pub minus_monotone_violation: f64,
}

impl Default for ClampAudit {
    fn default() -> Self {
        Self {
            checked_up_to: 0,
            plus_bound_violation: f64::NEG_INFINITY,
            plus_monotone_violation: f64::NEG_INFINITY,
            minus_bound_violation: f64::NEG_INFINITY,
            minus_monotone_violation: f64::NEG_INFINITY,
        }
    }
}

impl ClampAudit {
    pub fn holds(&self) -> bool {
        self.plus_bound_violation <= 0.0
            && self.plus_monotone_violation <= 0.0
            && self.minus_bound_violation <= 0.0
            && self.minus_monotone_violation <= 0.0
    }
}
