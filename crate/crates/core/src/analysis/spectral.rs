//! Semigroups `e^{-βH}` and Perron–Frobenius diagnostics from dense
//! symmetric eigendecompositions.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::cone::{improving_check, vector_positivity};
use crate::error::Result;
use crate::operator::FockOperator;

/// Eigenpairs of a hermitian operator, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl Spectrum {
    pub fn of(h: &FockOperator) -> Result<Self> {
        h.require_hermitian()?;
        let sym = 0.5 * (h.matrix() + h.matrix().transpose());
        let eig = SymmetricEigen::new(sym);
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
        Ok(Self { values, vectors })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn lambda_min(&self) -> f64 {
        self.values[0]
    }

    /// `V f(Λ) Vᵀ`.
    pub fn apply_function(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let mut scaled = self.vectors.clone();
        for (c, &v) in self.values.iter().enumerate() {
            let fv = f(v);
            scaled.column_mut(c).scale_mut(fv);
        }
        let m = scaled * self.vectors.transpose();
        0.5 * (&m + m.transpose())
    }

    pub fn semigroup(&self, beta: f64) -> FockOperator {
        if beta == 0.0 {
            return FockOperator::identity(self.dim());
        }
        FockOperator::new(self.apply_function(|x| (-beta * x).exp()), true, false)
    }
}

/// `e^{-βH}` by full spectral decomposition.
pub fn semigroup(h: &FockOperator, beta: f64) -> Result<FockOperator> {
    if !(beta >= 0.0) {
        return Err(crate::error::Error::InvalidArgument(format!("β must be nonnegative, got {beta}")));
    }
    Ok(Spectrum::of(h)?.semigroup(beta))
}

pub fn lambda_min(h: &FockOperator) -> Result<f64> {
    Ok(Spectrum::of(h)?.lambda_min())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralTolerances {
    /// Relative threshold for strict positivity of vectors and matrices.
    pub tau_pos: f64,
    /// A ground state is simple when `gap > gap_rel · spectral radius`.
    pub gap_rel: f64,
}

impl Default for SpectralTolerances {
    fn default() -> Self {
        Self { tau_pos: 1e-12, gap_rel: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceEntry {
    pub beta: f64,
    pub improving: bool,
    pub min_entry: f64,
    pub agrees: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub lambda_min: f64,
    pub gap: f64,
    pub spectral_radius: f64,
    pub ground_vector: Vec<f64>,
    pub strictly_positive_ground: bool,
    pub degenerate: bool,
    pub equivalence: Vec<EquivalenceEntry>,
}

impl SpectralReport {
    /// Simple ground eigenvalue with a strictly positive eigenvector.
    pub fn perron_frobenius_side(&self) -> bool {
        !self.degenerate && self.strictly_positive_ground
    }

    pub fn equivalence_holds(&self) -> bool {
        self.equivalence.iter().all(|e| e.agrees)
    }
}

/// Ground-state report plus the check that `e^{-βH} ⊳ 0` for each β agrees
/// with "simple ground state with strictly positive eigenvector".
pub fn perron_frobenius(h: &FockOperator, betas: &[f64], tol: &SpectralTolerances) -> Result<SpectralReport> {
    let spec = Spectrum::of(h)?;
    let n = spec.dim();
    let lambda_min = spec.lambda_min();
    let gap = if n > 1 { spec.values[1] - spec.values[0] } else { f64::INFINITY };
    let spectral_radius = spec.values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let degenerate = !(gap > tol.gap_rel * spectral_radius.max(f64::MIN_POSITIVE));

    let mut v: DVector<f64> = spec.vectors.column(0).into_owned();
    let imax = v.iamax();
    if v[imax] < 0.0 {
        v.neg_mut();
    }
    v.normalize_mut();
    let strictly_positive_ground = vector_positivity(&v, tol.tau_pos).strictly_positive;
    let pf_side = !degenerate && strictly_positive_ground;

    let equivalence = betas
        .iter()
        .map(|&beta| {
            let s = spec.semigroup(beta);
            let verdict = improving_check(&s, tol.tau_pos);
            EquivalenceEntry {
                beta,
                improving: verdict.improving,
                min_entry: verdict.min_entry,
                agrees: verdict.improving == pf_side,
            }
        })
        .collect();
    Ok(SpectralReport {
        lambda_min,
        gap,
        spectral_radius,
        ground_vector: v.iter().copied().collect(),
        strictly_positive_ground,
        degenerate,
        equivalence,
    })
}
