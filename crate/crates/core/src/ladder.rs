//! Second-quantized operators on the truncated occupation basis.

use nalgebra::DMatrix;

use crate::basis::OccupationBasis;
use crate::error::{Error, Result};
use crate::grid::ModeGrid;
use crate::operator::FockOperator;

fn check_len(basis: &OccupationBasis, v: &[f64]) -> Result<()> {
    if v.len() != basis.mode_count() {
        return Err(Error::LengthMismatch { expected: basis.mode_count(), found: v.len() });
    }
    Ok(())
}

/// `a†(f) = Σ_i f_i a_i†` with `<n + e_i| a_i† |n> = sqrt(n_i + 1)`.
/// Columns in the top sector map to zero.
pub fn creation_operator(basis: &OccupationBasis, f: &[f64]) -> Result<FockOperator> {
    check_len(basis, f)?;
    let dim = basis.dim();
    let mut m = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let n = basis.state(col);
        for (mode, &fi) in f.iter().enumerate() {
            if fi == 0.0 {
                continue;
            }
            if let Some(row) = basis.raised(col, mode) {
                m[(row, col)] += fi * ((n[mode] as f64) + 1.0).sqrt();
            }
        }
    }
    Ok(FockOperator::new(m, false, false))
}

/// `a(f)`, the transpose of [`creation_operator`].
pub fn annihilation_operator(basis: &OccupationBasis, f: &[f64]) -> Result<FockOperator> {
    Ok(creation_operator(basis, f)?.transpose())
}

/// `φ(f) = a(f) + a†(f)`.
pub fn field_operator(basis: &OccupationBasis, f: &[f64]) -> Result<FockOperator> {
    let c = creation_operator(basis, f)?;
    let m = c.matrix() + c.matrix().transpose();
    Ok(FockOperator::new(m, true, false))
}

/// `dΓ(F)`: diagonal with entry `Σ_i n_i F_i`.
pub fn dgamma(basis: &OccupationBasis, f: &[f64]) -> Result<FockOperator> {
    check_len(basis, f)?;
    let diag: Vec<f64> = basis
        .states()
        .map(|n| n.iter().zip(f).map(|(&ni, &fi)| ni as f64 * fi).sum())
        .collect();
    Ok(FockOperator::from_diagonal(&diag))
}

pub fn number_operator(basis: &OccupationBasis) -> FockOperator {
    let diag: Vec<f64> = (0..basis.dim()).map(|i| basis.total(i) as f64).collect();
    FockOperator::from_diagonal(&diag)
}

/// `Γ(c)` for a mode-diagonal contraction: diagonal with entry `Π_i c_i^{n_i}`.
pub fn gamma_diagonal(basis: &OccupationBasis, c: &[f64]) -> Result<FockOperator> {
    check_len(basis, c)?;
    if let Some((i, ci)) = c.iter().enumerate().find(|(_, ci)| ci.abs() > 1.0 || ci.is_nan()) {
        return Err(Error::InvalidArgument(format!("Γ requires a contraction, |c_{i}| = {} > 1", ci.abs())));
    }
    let diag: Vec<f64> = basis
        .states()
        .map(|n| n.iter().zip(c).map(|(&ni, &ci)| ci.powi(ni as i32)).product())
        .collect();
    Ok(FockOperator::from_diagonal(&diag))
}

/// Component `j` of the field momentum restricted to `mask`:
/// `dΓ(k_j · mask)`.
pub fn field_momentum(basis: &OccupationBasis, grid: &ModeGrid, j: usize, mask: &[bool]) -> Result<FockOperator> {
    if j >= grid.dimension() {
        return Err(Error::InvalidArgument(format!(
            "momentum component {j} out of range for dimension {}",
            grid.dimension()
        )));
    }
    if mask.len() != grid.len() {
        return Err(Error::LengthMismatch { expected: grid.len(), found: mask.len() });
    }
    let kj: Vec<f64> = grid.modes().iter().zip(mask).map(|(m, &on)| if on { m.k[j] } else { 0.0 }).collect();
    dgamma(basis, &kj)
}

/// Diagonal of `dΓ(k_j · mask)` for every component, evaluated per state.
pub fn momentum_diagonals(basis: &OccupationBasis, grid: &ModeGrid, mask: &[bool]) -> Result<Vec<Vec<f64>>> {
    (0..grid.dimension()).map(|j| Ok(field_momentum(basis, grid, j, mask)?.diagonal())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::enumerate_basis;

    #[test]
    fn single_mode_ladder() {
        let b = enumerate_basis(1, 3).unwrap();
        let a = creation_operator(&b, &[1.0]).unwrap();
        assert_eq!(a.get(1, 0), 1.0);
        assert!((a.get(2, 1) - 2f64.sqrt()).abs() < 1e-15);
        assert!((a.get(3, 2) - 3f64.sqrt()).abs() < 1e-15);
        // top sector is truncated
        assert!(a.matrix().column(3).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_profile_is_zero() {
        let b = enumerate_basis(3, 2).unwrap();
        assert_eq!(creation_operator(&b, &[0.0; 3]).unwrap().max_abs(), 0.0);
        assert!(creation_operator(&b, &[0.0; 2]).is_err());
    }

    #[test]
    fn field_two_by_two() {
        let b = enumerate_basis(1, 1).unwrap();
        let phi = field_operator(&b, &[1.0]).unwrap();
        assert_eq!(phi.matrix(), &DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
    }

    #[test]
    fn vacuum_second_moment() {
        let b = enumerate_basis(4, 1).unwrap();
        let f = [0.3, 1.2, 0.0, 2.5];
        let phi = field_operator(&b, &f).unwrap();
        let sq = phi.matrix() * phi.matrix();
        let ff: f64 = f.iter().map(|x| x * x).sum();
        assert!((sq[(0, 0)] - ff).abs() < 1e-14);
        assert!(phi.hermiticity_residual() < 1e-14);
    }

    #[test]
    fn dgamma_entries() {
        let b = enumerate_basis(3, 2).unwrap();
        let d = dgamma(&b, &[1.5, 0.0, 2.0]).unwrap();
        let i = b.index_of(&[2, 0, 0]).unwrap();
        assert_eq!(d.get(i, i), 3.0);
        let n = dgamma(&b, &[1.0; 3]).unwrap();
        assert_eq!(n, number_operator(&b));
    }

    #[test]
    fn gamma_identity_and_rejection() {
        let b = enumerate_basis(3, 2).unwrap();
        assert_eq!(gamma_diagonal(&b, &[1.0; 3]).unwrap(), FockOperator::identity(b.dim()));
        assert!(gamma_diagonal(&b, &[1.0, 1.5, 0.0]).is_err());
        let q = gamma_diagonal(&b, &[1.0, 0.0, 1.0]).unwrap();
        assert_eq!((&q * &q).matrix(), q.matrix());
    }
}
