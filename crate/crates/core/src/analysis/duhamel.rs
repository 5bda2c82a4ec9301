//! Iterated Duhamel expansion of `e^{-β(A+B)}` around `e^{-βA}`.
//!
//! The terms satisfy `D_0(t) = e^{-tA}` and
//! `D_n(t) = ∫_0^t e^{-(t-s)A} (-B) D_{n-1}(s) ds`, which unrolls to the
//! simplex integral. Each `D_n` is evaluated on a uniform time grid with the
//! trapezoid rule, once with `quad_points` intervals and once with half as
//! many, and the two are combined by Richardson extrapolation.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::spectral::Spectrum;
use crate::error::{Error, Result};
use crate::operator::{FockOperator, SparseOperator};

/// Refuse to store more than this many matrix entries across the time grid.
const ENTRY_BUDGET: usize = 400_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DuhamelReport {
    pub order: usize,
    pub beta: f64,
    /// Entrywise minimum of each extrapolated `D_n(β)`, `n = 0..=order`.
    pub term_min_entries: Vec<f64>,
    /// `max |Σ_{m≤n} D_m(β) - e^{-β(A+B)}|` for `n = 0..=order`.
    pub partial_sum_residuals: Vec<f64>,
    pub quadrature_points: usize,
    /// Largest `|D_n^{fine} - D_n^{coarse}| / 3` over all terms.
    pub quadrature_error: f64,
    /// `(‖B‖β)^{N+1}/(N+1)! · e^{β(‖A‖+‖B‖)}`.
    pub remainder_bound: f64,
    /// Floating-point slack added to the remainder bound, `64 ε max|e^{-β(A+B)}|`.
    pub roundoff: f64,
    /// Whether `-B` and `e^{-tA}` are entrywise nonnegative.
    pub positivity_hypotheses: bool,
}

impl DuhamelReport {
    pub fn terms_nonnegative(&self, quad_tol: f64) -> bool {
        self.term_min_entries.iter().all(|&m| m >= -quad_tol)
    }

    pub fn residuals_decrease(&self) -> bool {
        self.partial_sum_residuals.windows(2).all(|w| w[1] <= w[0])
    }

    pub fn final_residual(&self) -> f64 {
        *self.partial_sum_residuals.last().expect("at least the zeroth term")
    }

    pub fn within_remainder_bound(&self) -> bool {
        self.final_residual() <= self.remainder_bound + self.roundoff
    }
}

fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    let sym = 0.5 * (m + m.transpose());
    sym.symmetric_eigenvalues().iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

enum Propagator {
    Diagonal(Vec<Vec<f64>>),
    Dense(Vec<DMatrix<f64>>),
}

impl Propagator {
    fn new(a: &FockOperator, times: &[f64]) -> Result<Self> {
        if a.is_diagonal() {
            let d = a.diagonal();
            return Ok(Self::Diagonal(times.iter().map(|&t| d.iter().map(|x| (-t * x).exp()).collect()).collect()));
        }
        let spec = Spectrum::of(a)?;
        Ok(Self::Dense(times.iter().map(|&t| spec.semigroup(t).into_matrix()).collect()))
    }

    /// `e^{-t_k A} · y`
    fn apply(&self, k: usize, y: &DMatrix<f64>) -> DMatrix<f64> {
        match self {
            Self::Diagonal(d) => {
                let mut out = y.clone();
                for (r, &s) in d[k].iter().enumerate() {
                    out.row_mut(r).scale_mut(s);
                }
                out
            }
            Self::Dense(e) => &e[k] * y,
        }
    }

    fn matrix(&self, k: usize) -> DMatrix<f64> {
        match self {
            Self::Diagonal(d) => DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d[k].clone())),
            Self::Dense(e) => e[k].clone(),
        }
    }

    fn nonnegative(&self) -> bool {
        match self {
            Self::Diagonal(_) => true,
            Self::Dense(e) => e.iter().all(|m| m.min() >= -1e-14 * m.amax().max(1.0)),
        }
    }
}

/// `D_0(β), …, D_order(β)` with `intervals` trapezoid intervals on `[0, β]`.
fn terms(a: &FockOperator, minus_b: &SparseOperator, beta: f64, order: usize, intervals: usize) -> Result<(Vec<DMatrix<f64>>, bool)> {
    let h = beta / intervals as f64;
    let times: Vec<f64> = (0..=intervals).map(|k| k as f64 * h).collect();
    let prop = Propagator::new(a, &times)?;
    let weight = |j: usize, k: usize| if j == 0 || j == k { 0.5 } else { 1.0 };

    let mut current: Vec<DMatrix<f64>> = (0..=intervals).map(|k| prop.matrix(k)).collect();
    let mut out = vec![current[intervals].clone()];
    for _ in 0..order {
        let y: Vec<DMatrix<f64>> = current.par_iter().map(|d| minus_b.mul_dense(d)).collect();
        current = (0..=intervals)
            .into_par_iter()
            .map(|k| {
                let mut acc = DMatrix::zeros(a.dim(), a.dim());
                if k > 0 {
                    for (j, yj) in y.iter().enumerate().take(k + 1) {
                        acc += prop.apply(k - j, yj) * (h * weight(j, k));
                    }
                }
                acc
            })
            .collect();
        out.push(current[intervals].clone());
    }
    Ok((out, prop.nonnegative()))
}

/// Evaluates the Duhamel terms up to `order` and compares their partial sums
/// against the exact semigroup.
pub fn duhamel(a: &FockOperator, b: &FockOperator, beta: f64, order: usize, quad_points: usize) -> Result<DuhamelReport> {
    a.require_hermitian()?;
    b.require_hermitian()?;
    if a.dim() != b.dim() {
        return Err(Error::LengthMismatch { expected: a.dim(), found: b.dim() });
    }
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::InvalidArgument(format!("β must be finite and nonnegative, got {beta}")));
    }
    if quad_points < 2 || !quad_points.is_multiple_of(2) {
        return Err(Error::QuadratureBudget(format!("quad_points must be even and at least 2, got {quad_points}")));
    }
    let stored = a.dim() * a.dim() * (quad_points + 1) * 3;
    if stored > ENTRY_BUDGET {
        return Err(Error::QuadratureBudget(format!(
            "{quad_points} time points at dimension {} need {stored} stored entries (budget {ENTRY_BUDGET})",
            a.dim()
        )));
    }

    let minus_b = b.scale(-1.0);
    let sparse = minus_b.sparse();
    let (fine, e_nonneg) = terms(a, &sparse, beta, order, quad_points)?;
    let (coarse, _) = terms(a, &sparse, beta, order, quad_points / 2)?;

    let exact = Spectrum::of(&(a + b))?.semigroup(beta).into_matrix();
    let mut partial = DMatrix::zeros(a.dim(), a.dim());
    let mut term_min_entries = Vec::with_capacity(order + 1);
    let mut partial_sum_residuals = Vec::with_capacity(order + 1);
    let mut quadrature_error = 0.0f64;
    for (f, c) in fine.iter().zip(&coarse) {
        let extrapolated = (f * 4.0 - c) / 3.0;
        quadrature_error = quadrature_error.max((f - c).amax() / 3.0);
        term_min_entries.push(extrapolated.min());
        partial += &extrapolated;
        partial_sum_residuals.push((&partial - &exact).amax());
    }

    let norm_a = spectral_norm(a.matrix());
    let norm_b = spectral_norm(b.matrix());
    let n1 = (order + 1) as f64;
    let factorial: f64 = (1..=order + 1).map(|i| i as f64).product();
    let remainder_bound = (norm_b * beta).powf(n1) / factorial * (beta * (norm_a + norm_b)).exp();

    Ok(DuhamelReport {
        order,
        beta,
        term_min_entries,
        partial_sum_residuals,
        quadrature_points: quad_points,
        quadrature_error,
        remainder_bound,
        roundoff: 64.0 * f64::EPSILON * exact.amax().max(1.0),
        positivity_hypotheses: e_nonneg && minus_b.min_entry() >= 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_perturbation() {
        let a = FockOperator::from_diagonal(&[0.0, 0.7, 2.0]);
        let b = FockOperator::zeros(3);
        let r = duhamel(&a, &b, 1.0, 3, 8).unwrap();
        assert!(r.partial_sum_residuals.iter().all(|&x| x < 1e-14));
        assert_eq!(&r.term_min_entries[1..], &[0.0, 0.0, 0.0]);
        assert_eq!(r.remainder_bound, 0.0);
    }

    #[test]
    fn two_level_oracle() {
        let a = FockOperator::from_diagonal(&[0.0, 1.0]);
        let b = FockOperator::new(DMatrix::from_row_slice(2, 2, &[0.0, -1.0, -1.0, 0.0]), true, false);
        let r = duhamel(&a, &b, 1.0, 8, 32).unwrap();
        assert!(r.positivity_hypotheses);
        assert!(r.terms_nonnegative(1e-8));
        assert!(r.residuals_decrease());
        assert!(r.within_remainder_bound(), "{} vs {}", r.final_residual(), r.remainder_bound);
    }

    #[test]
    fn dense_unperturbed_part() {
        let a = FockOperator::new(DMatrix::from_row_slice(2, 2, &[1.0, -0.3, -0.3, 0.5]), true, false);
        let b = FockOperator::new(DMatrix::from_row_slice(2, 2, &[0.0, -0.4, -0.4, 0.0]), true, false);
        let r = duhamel(&a, &b, 0.8, 6, 16).unwrap();
        assert!(r.positivity_hypotheses);
        assert!(r.final_residual() < 1e-5);
    }

    #[test]
    fn rejects_odd_grid() {
        let a = FockOperator::identity(2);
        assert!(matches!(duhamel(&a, &a, 1.0, 1, 5), Err(Error::QuadratureBudget(_))));
    }
}
