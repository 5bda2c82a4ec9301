//! Splitting the mode set at `|k| = κ` into a low and a high factor.
//!
//! Two realizations of the tensor product are provided. The joint-cap space
//! is the full truncated basis itself, where every state is a pair
//! `(low, high)` with `total(low) + total(high) <= n_max`; embedded operators
//! are compressions to it and the decomposition identities hold exactly. The
//! product space pairs a low basis and a high basis with independent caps,
//! where `A ⊗ 1` and `1 ⊗ B` commute exactly.

use nalgebra::{DMatrix, DVector};

use crate::basis::{enumerate_basis, OccupationBasis};
use crate::error::{Error, Result};
use crate::grid::{cutoff_mask, ModeGrid};
use crate::operator::FockOperator;

#[derive(Debug, Clone)]
pub struct FactorizationMap {
    kappa: f64,
    low_modes: Vec<usize>,
    high_modes: Vec<usize>,
    low_basis: OccupationBasis,
    high_basis: OccupationBasis,
    /// full index -> (low index, high index)
    pairs: Vec<(usize, usize)>,
    /// (low, high) -> full index, row-major over `low_dim x high_dim`
    inverse: Vec<Option<usize>>,
    q_projection: FockOperator,
}

pub fn kappa_split(basis: &OccupationBasis, grid: &ModeGrid, kappa: f64) -> Result<FactorizationMap> {
    if !(kappa >= 0.0) {
        return Err(Error::InvalidArgument(format!("κ must be nonnegative, got {kappa}")));
    }
    if basis.mode_count() != grid.len() {
        return Err(Error::LengthMismatch { expected: grid.len(), found: basis.mode_count() });
    }
    let low_mask = cutoff_mask(grid, kappa);
    let low_modes: Vec<usize> = (0..grid.len()).filter(|&i| low_mask[i]).collect();
    let high_modes: Vec<usize> = (0..grid.len()).filter(|&i| !low_mask[i]).collect();
    let low_basis = enumerate_basis(low_modes.len(), basis.n_max())?;
    let high_basis = enumerate_basis(high_modes.len(), basis.n_max())?;

    let high_dim = high_basis.dim();
    let mut inverse = vec![None; low_basis.dim() * high_dim];
    let mut pairs = Vec::with_capacity(basis.dim());
    let mut q = vec![0.0; basis.dim()];
    for i in 0..basis.dim() {
        let n = basis.state(i);
        let lo: Vec<u8> = low_modes.iter().map(|&m| n[m]).collect();
        let hi: Vec<u8> = high_modes.iter().map(|&m| n[m]).collect();
        let l = low_basis.index_of(&lo).expect("low occupation within cap");
        let h = high_basis.index_of(&hi).expect("high occupation within cap");
        pairs.push((l, h));
        inverse[l * high_dim + h] = Some(i);
        if h == high_basis.vacuum() {
            q[i] = 1.0;
        }
    }
    Ok(FactorizationMap {
        kappa,
        low_modes,
        high_modes,
        low_basis,
        high_basis,
        pairs,
        inverse,
        q_projection: FockOperator::from_diagonal(&q),
    })
}

impl FactorizationMap {
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn low_modes(&self) -> &[usize] {
        &self.low_modes
    }

    pub fn high_modes(&self) -> &[usize] {
        &self.high_modes
    }

    pub fn low_basis(&self) -> &OccupationBasis {
        &self.low_basis
    }

    pub fn high_basis(&self) -> &OccupationBasis {
        &self.high_basis
    }

    pub fn full_dim(&self) -> usize {
        self.pairs.len()
    }

    pub fn pair(&self, full: usize) -> (usize, usize) {
        self.pairs[full]
    }

    pub fn full_index(&self, low: usize, high: usize) -> Option<usize> {
        self.inverse.get(low * self.high_basis.dim() + high).copied().flatten()
    }

    /// `Q_κ = Γ(χ_κ)`: keeps states without high-mode bosons.
    pub fn q_projection(&self) -> &FockOperator {
        &self.q_projection
    }

    /// Index of the high-factor vacuum `Ω^{>κ}`.
    pub fn tail_vacuum(&self) -> usize {
        self.high_basis.vacuum()
    }

    /// Restriction of a full-grid mode vector to the low modes.
    pub fn restrict_low<T: Copy>(&self, v: &[T]) -> Vec<T> {
        self.low_modes.iter().map(|&i| v[i]).collect()
    }

    pub fn restrict_high<T: Copy>(&self, v: &[T]) -> Vec<T> {
        self.high_modes.iter().map(|&i| v[i]).collect()
    }

    fn check_dim(&self, op: &FockOperator, expected: usize, which: &str) -> Result<()> {
        if op.dim() != expected {
            return Err(Error::Shape(format!("{which} operator has dimension {}, expected {expected}", op.dim())));
        }
        Ok(())
    }

    /// `A ⊗ 1` compressed to the joint-cap space.
    pub fn embed_low(&self, a: &FockOperator) -> Result<FockOperator> {
        self.check_dim(a, self.low_basis.dim(), "low")?;
        let n = self.full_dim();
        let mut m = DMatrix::zeros(n, n);
        for col in 0..n {
            let (lc, hc) = self.pairs[col];
            for row in 0..n {
                let (lr, hr) = self.pairs[row];
                if hr == hc {
                    m[(row, col)] = a.get(lr, lc);
                }
            }
        }
        Ok(FockOperator::new(m, a.is_hermitian(), a.is_number_conserving()))
    }

    /// `1 ⊗ B` compressed to the joint-cap space.
    pub fn embed_high(&self, b: &FockOperator) -> Result<FockOperator> {
        self.check_dim(b, self.high_basis.dim(), "high")?;
        let n = self.full_dim();
        let mut m = DMatrix::zeros(n, n);
        for col in 0..n {
            let (lc, hc) = self.pairs[col];
            for row in 0..n {
                let (lr, hr) = self.pairs[row];
                if lr == lc {
                    m[(row, col)] = b.get(hr, hc);
                }
            }
        }
        Ok(FockOperator::new(m, b.is_hermitian(), b.is_number_conserving()))
    }

    pub fn product_dim(&self) -> usize {
        self.low_basis.dim() * self.high_basis.dim()
    }

    /// `A ⊗ B` on the product space, index `low * high_dim + high`.
    pub fn kron(&self, a: &FockOperator, b: &FockOperator) -> Result<FockOperator> {
        self.check_dim(a, self.low_basis.dim(), "low")?;
        self.check_dim(b, self.high_basis.dim(), "high")?;
        Ok(FockOperator::new(
            a.matrix().kronecker(b.matrix()),
            a.is_hermitian() && b.is_hermitian(),
            a.is_number_conserving() && b.is_number_conserving(),
        ))
    }

    /// `1 ⊗ |Ω><Ω|` on the product space.
    pub fn q_product(&self) -> FockOperator {
        let hd = self.high_basis.dim();
        let diag: Vec<f64> = (0..self.product_dim()).map(|i| if i % hd == self.tail_vacuum() { 1.0 } else { 0.0 }).collect();
        FockOperator::from_diagonal(&diag)
    }

    /// The product-space vector `ψ ⊗ Ω^{>κ}`.
    pub fn with_tail_vacuum(&self, low: &DVector<f64>) -> DVector<f64> {
        let hd = self.high_basis.dim();
        let mut v = DVector::zeros(self.product_dim());
        for (l, &x) in low.iter().enumerate() {
            v[l * hd + self.tail_vacuum()] = x;
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, GridSpec, Layout};

    fn setup() -> (ModeGrid, OccupationBasis) {
        let spec = GridSpec { dimension: 1, extent: 1.5, points_per_axis: 4, mass: 1.0, layout: Layout::Cartesian };
        let grid = build_grid(&spec).unwrap();
        let basis = enumerate_basis(grid.len(), 3).unwrap();
        (grid, basis)
    }

    #[test]
    fn bijection() {
        let (grid, basis) = setup();
        let s = kappa_split(&basis, &grid, 1.0).unwrap();
        assert_eq!(s.low_modes(), &[0, 1]);
        assert_eq!(s.high_modes(), &[2, 3]);
        let mut hits = 0;
        for l in 0..s.low_basis().dim() {
            for h in 0..s.high_basis().dim() {
                let fits = s.low_basis().total(l) + s.high_basis().total(h) <= 3;
                match s.full_index(l, h) {
                    Some(i) => {
                        assert!(fits);
                        assert_eq!(s.pair(i), (l, h));
                        hits += 1;
                    }
                    None => assert!(!fits),
                }
            }
        }
        assert_eq!(hits, basis.dim());
    }

    #[test]
    fn trivial_high_part() {
        let (grid, basis) = setup();
        let s = kappa_split(&basis, &grid, 10.0).unwrap();
        assert_eq!(s.high_basis().dim(), 1);
        assert_eq!(s.q_projection(), &FockOperator::identity(basis.dim()));
    }

    #[test]
    fn projection_kills_high_bosons() {
        let (grid, basis) = setup();
        let s = kappa_split(&basis, &grid, 1.0).unwrap();
        let q = s.q_projection();
        assert_eq!((q * q).matrix(), q.matrix());
        assert!(q.min_entry() >= 0.0);
        let perp = &FockOperator::identity(basis.dim()) - q;
        assert!(perp.min_entry() >= 0.0);
        for i in 0..basis.dim() {
            let has_high = basis.state(i)[2] + basis.state(i)[3] > 0;
            assert_eq!(q.get(i, i), if has_high { 0.0 } else { 1.0 });
        }
    }
}
