//! Relative bounds of `a†(f)a(f)`, `a(f)a†(f)` and `φ(f)` against `dΓ(ω)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::basis::OccupationBasis;
use crate::error::{Error, Result};
use crate::grid::ModeGrid;
use crate::ladder::{annihilation_operator, creation_operator, dgamma, field_operator};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundEntry {
    pub name: String,
    /// Smallest eigenvalue of `rhs - lhs`.
    pub lambda_min: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    /// `‖ω^{-1/2} f‖²`
    pub c: f64,
    /// `‖f‖²`
    pub f_norm_squared: f64,
    pub tolerance: f64,
    pub entries: Vec<BoundEntry>,
}

impl BoundsReport {
    pub fn entry(&self, name: &str) -> Option<&BoundEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn all_hold(&self) -> bool {
        self.entries.iter().all(|e| e.holds)
    }
}

pub const CREATION_ANNIHILATION: &str = "adag_a";
pub const ANNIHILATION_CREATION: &str = "a_adag";
pub const ANNIHILATION_CREATION_CORRECTED: &str = "a_adag_corrected";
pub const VAN_HOVE_MINUS: &str = "van_hove_minus";
pub const VAN_HOVE_PLUS: &str = "van_hove_plus";

fn lambda_min(m: DMatrix<f64>) -> f64 {
    let sym = 0.5 * (&m + m.transpose());
    if sym.nrows() == 0 {
        return f64::INFINITY;
    }
    sym.symmetric_eigenvalues().min()
}

/// The block on states with at most `cap` bosons.
fn guarded(m: &DMatrix<f64>, basis: &OccupationBasis, cap: usize) -> DMatrix<f64> {
    let end = basis.sector_offsets()[cap + 1];
    m.view((0, 0), (end, end)).into_owned()
}

/// Checks, with `c = ‖ω^{-1/2}f‖²`:
///
/// * `a†(f)a(f) <= c (dΓ(ω) + 1)` on the whole truncated space,
/// * `a(f)a†(f) <= c (dΓ(ω) + 1)` and the corrected
///   `a(f)a†(f) <= c dΓ(ω) + ‖f‖²`, both below the top sector,
/// * `dΓ(ω) ∓ φ(f) >= -c`.
pub fn operator_bounds_suite(basis: &OccupationBasis, grid: &ModeGrid, f: &[f64], tolerance: f64) -> Result<BoundsReport> {
    if f.len() != grid.len() {
        return Err(Error::LengthMismatch { expected: grid.len(), found: f.len() });
    }
    if f.iter().any(|&x| x < 0.0) {
        return Err(Error::InvalidArgument("bound suite expects f >= 0".into()));
    }
    let omega = grid.omegas();
    let c: f64 = f.iter().zip(&omega).map(|(x, w)| x * x / w).sum();
    let f2: f64 = f.iter().map(|x| x * x).sum();
    let a = annihilation_operator(basis, f)?;
    let ad = creation_operator(basis, f)?;
    let dg = dgamma(basis, &omega)?;
    let phi = field_operator(basis, f)?;
    let one = DMatrix::<f64>::identity(basis.dim(), basis.dim());

    let adag_a = ad.matrix() * a.matrix();
    let a_adag = a.matrix() * ad.matrix();
    let dg_plus_one = dg.matrix() + &one;

    let mut entries = Vec::new();
    let mut push = |name: &str, lm: f64, floor: f64| {
        entries.push(BoundEntry { name: name.to_string(), lambda_min: lm, holds: lm >= floor - tolerance });
    };
    push(CREATION_ANNIHILATION, lambda_min(&dg_plus_one * c - &adag_a), 0.0);
    if basis.n_max() >= 1 {
        let cap = basis.n_max() - 1;
        push(ANNIHILATION_CREATION, lambda_min(guarded(&(&dg_plus_one * c - &a_adag), basis, cap)), 0.0);
        push(
            ANNIHILATION_CREATION_CORRECTED,
            lambda_min(guarded(&(dg.matrix() * c + &one * f2 - &a_adag), basis, cap)),
            0.0,
        );
    }
    push(VAN_HOVE_MINUS, lambda_min(dg.matrix() - phi.matrix()), -c);
    push(VAN_HOVE_PLUS, lambda_min(dg.matrix() + phi.matrix()), -c);
    Ok(BoundsReport { c, f_norm_squared: f2, tolerance, entries })
}
