use serde::{Deserialize, Serialize};

use crate::basis::OccupationBasis;
use crate::error::{Error, Result};
use crate::grid::{
    cutoff_mask, energy_grid_sum, renormalization_constant, window_mask, CutoffWindow, EnergyScheme, ModeGrid,
};
use crate::ladder::field_operator;
use crate::nelson::cross::{cross_term, CrossTerm};
use crate::operator::FockOperator;
use crate::split::FactorizationMap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NelsonParams {
    pub g: f64,
    pub m: f64,
    #[serde(rename = "P")]
    pub p: Vec<f64>,
    pub window: CutoffWindow,
    #[serde(default = "default_scheme")]
    pub e_scheme: EnergyScheme,
}

fn default_scheme() -> EnergyScheme {
    EnergyScheme::GridSum
}

impl NelsonParams {
    /// `g = 0` is accepted: it is the free field used as a negative control.
    pub fn validate(&self, grid: &ModeGrid) -> Result<()> {
        if !(self.g >= 0.0) || !self.g.is_finite() {
            return Err(Error::InvalidArgument(format!("coupling g must be nonnegative, got {}", self.g)));
        }
        if !(self.m > 0.0) {
            return Err(Error::InvalidArgument(format!("mass must be positive, got {}", self.m)));
        }
        if (self.m - grid.mass()).abs() > 1e-12 * self.m {
            return Err(Error::InvalidArgument(format!(
                "parameter mass {} differs from grid mass {}",
                self.m,
                grid.mass()
            )));
        }
        if self.p.len() != grid.dimension() {
            return Err(Error::LengthMismatch { expected: grid.dimension(), found: self.p.len() });
        }
        self.window.validate(Some(grid.spec().extent))
    }
}

/// One piece of the fiber Hamiltonian on a sub-collection of modes:
/// `½ |P - P_f|² - φ(g χ / √ω) + dΓ(ω) - energy`.
fn assemble_piece(
    basis: &OccupationBasis,
    grid: &ModeGrid,
    modes: &[usize],
    p: &[f64],
    coupled: &[bool],
    g: f64,
    energy: f64,
) -> Result<FockOperator> {
    if basis.mode_count() != modes.len() {
        return Err(Error::LengthMismatch { expected: modes.len(), found: basis.mode_count() });
    }
    let dim = grid.dimension();
    let all = grid.modes();
    let diag: Vec<f64> = basis
        .states()
        .map(|n| {
            let mut kinetic = 0.0;
            for j in 0..dim {
                let pf: f64 = n.iter().zip(modes).map(|(&ni, &m)| ni as f64 * all[m].k[j]).sum();
                kinetic += (p[j] - pf).powi(2);
            }
            let field: f64 = n.iter().zip(modes).map(|(&ni, &m)| ni as f64 * all[m].omega).sum();
            0.5 * kinetic + field - energy
        })
        .collect();
    let f: Vec<f64> = modes
        .iter()
        .map(|&m| if coupled[m] { g * all[m].weight.sqrt() / all[m].omega.sqrt() } else { 0.0 })
        .collect();
    let phi = field_operator(basis, &f)?;
    let mut h = FockOperator::from_diagonal(&diag).into_matrix();
    h -= phi.matrix();
    Ok(FockOperator::new(h, true, g == 0.0 || f.iter().all(|&x| x == 0.0)))
}

fn check_basis(basis: &OccupationBasis, grid: &ModeGrid) -> Result<()> {
    if basis.mode_count() != grid.len() {
        return Err(Error::Shape(format!(
            "basis has {} modes but the grid has {}",
            basis.mode_count(),
            grid.len()
        )));
    }
    Ok(())
}

/// `H_Λ(P) = ½(P - P_f)² - φ(f_Λ) + dΓ(ω)`.
pub fn assemble_fiber_hamiltonian(basis: &OccupationBasis, grid: &ModeGrid, params: &NelsonParams) -> Result<FockOperator> {
    check_basis(basis, grid)?;
    if params.p.len() != grid.dimension() {
        return Err(Error::LengthMismatch { expected: grid.dimension(), found: params.p.len() });
    }
    let modes: Vec<usize> = (0..grid.len()).collect();
    let mask = cutoff_mask(grid, params.window.lambda);
    assemble_piece(basis, grid, &modes, &params.p, &mask, params.g, 0.0)
}

/// `H_ren,Λ(P) = H_Λ(P) - E_Λ`.
pub fn renormalized_hamiltonian(h_full: &FockOperator, e_lambda: f64) -> FockOperator {
    h_full.shift(-e_lambda)
}

/// Counterterms `E_Λ`, `E_κ`, and `E_κ^Λ = E_Λ - E_κ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Energies {
    pub e_lambda: f64,
    pub e_kappa: f64,
    pub e_window: f64,
}

pub fn grid_energies(grid: &ModeGrid, g: f64, window: &CutoffWindow) -> Result<Energies> {
    let e_lambda = energy_grid_sum(grid, g, &cutoff_mask(grid, window.lambda))?;
    let e_kappa = energy_grid_sum(grid, g, &cutoff_mask(grid, window.kappa))?;
    Ok(Energies { e_lambda, e_kappa, e_window: e_lambda - e_kappa })
}

/// `H^{≤κ}(P) = ½(P - P_f^{≤κ})² - φ(f_κ) + dΓ(ω^{≤κ}) - E_κ` on the low factor.
pub fn assemble_local(split: &FactorizationMap, grid: &ModeGrid, params: &NelsonParams) -> Result<FockOperator> {
    let (kappa, lambda) = (params.window.kappa, params.window.lambda);
    if !(kappa < lambda) {
        return Err(Error::CutoffOrder(format!("κ < Λ is required, got κ = {kappa} and Λ = {lambda}")));
    }
    let e = grid_energies(grid, params.g, &params.window)?;
    let mask = cutoff_mask(grid, kappa);
    assemble_piece(split.low_basis(), grid, split.low_modes(), &params.p, &mask, params.g, e.e_kappa)
}

/// `K_{κ,Λ} = ½(P_f^{>κ})² - φ(f_κ^Λ) + dΓ(ω^{>κ}) - E_κ^Λ` on the high factor.
pub fn assemble_tail(split: &FactorizationMap, grid: &ModeGrid, params: &NelsonParams) -> Result<FockOperator> {
    tail_operator(split, grid, params.g, params.window.kappa, params.window.lambda)
}

/// [`assemble_tail`] for explicit cutoffs; `κ = Λ` gives the free tail.
pub fn tail_operator(split: &FactorizationMap, grid: &ModeGrid, g: f64, kappa: f64, lambda: f64) -> Result<FockOperator> {
    if !(kappa <= lambda) {
        return Err(Error::CutoffOrder(format!("κ ≤ Λ is required for the tail, got κ = {kappa} and Λ = {lambda}")));
    }
    let mask = window_mask(grid, kappa, lambda);
    let e_window = energy_grid_sum(grid, g, &mask)?;
    let zero = vec![0.0; grid.dimension()];
    assemble_piece(split.high_basis(), grid, split.high_modes(), &zero, &mask, g, e_window)
}

#[derive(Debug, Clone)]
pub struct HamiltonianBundle {
    pub h_full: FockOperator,
    pub h_ren: FockOperator,
    pub h_local: FockOperator,
    pub k_tail: FockOperator,
    pub cross: FockOperator,
    /// `H^{≤κ} ⊗ 1 + 1 ⊗ K_{κ,Λ}` compressed to the joint-cap space.
    pub l_kappa: FockOperator,
    pub regularization: CrossTerm,
    pub e_lambda: f64,
    pub e_kappa: f64,
    pub e_window: f64,
    /// `E_Λ` in the scheme that was subtracted from `h_ren`.
    pub e_subtracted: f64,
    pub scheme: EnergyScheme,
}

impl HamiltonianBundle {
    pub fn assemble(basis: &OccupationBasis, grid: &ModeGrid, params: &NelsonParams, split: &FactorizationMap) -> Result<Self> {
        params.validate(grid)?;
        if (split.kappa() - params.window.kappa).abs() > 0.0 {
            return Err(Error::InvalidArgument(format!(
                "split at κ = {} does not match parameter κ = {}",
                split.kappa(),
                params.window.kappa
            )));
        }
        let e = grid_energies(grid, params.g, &params.window)?;
        let e_subtracted = renormalization_constant(grid, params.g, params.window.lambda, params.e_scheme)?;
        let h_full = assemble_fiber_hamiltonian(basis, grid, params)?;
        let h_ren = renormalized_hamiltonian(&h_full, e_subtracted);
        let h_local = assemble_local(split, grid, params)?;
        let k_tail = assemble_tail(split, grid, params)?;
        let regularization = cross_term(basis, grid, split, &params.p)?;
        let cross = regularization.exact();
        let l_kappa = &split.embed_low(&h_local)? + &split.embed_high(&k_tail)?;
        Ok(Self {
            h_full,
            h_ren,
            h_local,
            k_tail,
            cross,
            l_kappa,
            regularization,
            e_lambda: e.e_lambda,
            e_kappa: e.e_kappa,
            e_window: e.e_window,
            e_subtracted,
            scheme: params.e_scheme,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    /// `max |H_ren - (H^{≤κ}⊗1 + 1⊗K + C_κ)|`.
    pub residual: f64,
    pub scheme: EnergyScheme,
    /// `|E_Λ(scheme) - E_Λ(grid)|`, the part of the residual owed to the scheme.
    pub scheme_offset: f64,
}

impl DecompositionReport {
    /// The residual, or a scheme-mismatch error when the subtracted counterterm
    /// was not the grid sum (the identity is then not exact).
    pub fn exact(&self) -> Result<f64> {
        match self.scheme {
            EnergyScheme::GridSum => Ok(self.residual),
            EnergyScheme::RadialQuadrature => Err(Error::SchemeMismatch(format!(
                "decomposition uses the radial counterterm; residual {:e} includes an offset of {:e}",
                self.residual, self.scheme_offset
            ))),
        }
    }
}

pub fn decomposition_residual(bundle: &HamiltonianBundle, split: &FactorizationMap) -> Result<DecompositionReport> {
    let rebuilt = &(&split.embed_low(&bundle.h_local)? + &split.embed_high(&bundle.k_tail)?) + &bundle.cross;
    Ok(DecompositionReport {
        residual: bundle.h_ren.distance(&rebuilt),
        scheme: bundle.scheme,
        scheme_offset: (bundle.e_subtracted - bundle.e_lambda).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::enumerate_basis;
    use crate::grid::{build_grid, GridSpec, Layout};
    use crate::split::kappa_split;
    use nalgebra::DMatrix;

    fn line(extent: f64, n: usize) -> ModeGrid {
        build_grid(&GridSpec { dimension: 1, extent, points_per_axis: n, mass: 1.0, layout: Layout::Cartesian }).unwrap()
    }

    fn params(g: f64, p: f64, kappa: f64, k: f64, lambda: f64) -> NelsonParams {
        NelsonParams {
            g,
            m: 1.0,
            p: vec![p],
            window: CutoffWindow { kappa, k_gross: k, lambda },
            e_scheme: EnergyScheme::GridSum,
        }
    }

    #[test]
    fn two_by_two() {
        // one mode at k = 0 with unit weight
        let grid = line(0.5, 1);
        let basis = enumerate_basis(1, 1).unwrap();
        let h = assemble_fiber_hamiltonian(&basis, &grid, &params(1.0, 0.0, 0.0, 0.1, 0.5)).unwrap();
        assert_eq!(h.matrix(), &DMatrix::from_row_slice(2, 2, &[0.0, -1.0, -1.0, 1.0]));
        let eig = h.matrix().clone().symmetric_eigenvalues();
        let min = eig.min();
        assert!((min - (1.0 - 5f64.sqrt()) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn free_spectrum_is_diagonal() {
        let grid = line(1.5, 4);
        let basis = enumerate_basis(4, 2).unwrap();
        let prm = params(0.0, 0.3, 1.0, 1.25, 1.5);
        let h = assemble_fiber_hamiltonian(&basis, &grid, &prm).unwrap();
        assert!(h.is_diagonal());
        for (i, n) in basis.states().enumerate() {
            let ptot: f64 = n.iter().zip(grid.modes()).map(|(&c, m)| c as f64 * m.k[0]).sum();
            let ef: f64 = n.iter().zip(grid.modes()).map(|(&c, m)| c as f64 * m.omega).sum();
            assert!((h.get(i, i) - (0.5 * (0.3 - ptot).powi(2) + ef)).abs() < 1e-14);
        }
    }

    #[test]
    fn vacuum_expectation() {
        let grid = line(1.5, 4);
        let basis = enumerate_basis(4, 3).unwrap();
        let h = assemble_fiber_hamiltonian(&basis, &grid, &params(1.3, 0.7, 1.0, 1.25, 1.5)).unwrap();
        assert!((h.get(0, 0) - 0.245).abs() < 1e-15);
        assert!(h.hermiticity_residual() < 1e-14);
    }

    #[test]
    fn renormalized_shift() {
        let grid = line(1.5, 4);
        let basis = enumerate_basis(4, 2).unwrap();
        let h = assemble_fiber_hamiltonian(&basis, &grid, &params(1.0, 0.0, 1.0, 1.25, 1.5)).unwrap();
        let e = renormalization_constant(&grid, 1.0, 1.5, EnergyScheme::GridSum).unwrap();
        assert!(e < 0.0);
        let hr = renormalized_hamiltonian(&h, e);
        let a = h.matrix().clone().symmetric_eigenvalues();
        let b = hr.matrix().clone().symmetric_eigenvalues();
        let mut a: Vec<f64> = a.iter().copied().collect();
        let mut b: Vec<f64> = b.iter().copied().collect();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        for (x, y) in a.iter().zip(&b) {
            assert!((y - x + e).abs() < 1e-12);
        }
        assert!(b[0] >= a[0]);
    }

    #[test]
    fn local_rejects_inverted_cutoffs() {
        let grid = line(1.5, 4);
        let basis = enumerate_basis(4, 2).unwrap();
        let split = kappa_split(&basis, &grid, 1.0).unwrap();
        let mut prm = params(1.0, 0.0, 1.0, 1.25, 1.5);
        prm.window.lambda = 0.8;
        let err = assemble_local(&split, &grid, &prm).unwrap_err();
        assert!(err.to_string().contains("κ < Λ"));
    }

    #[test]
    fn local_coupling_signs() {
        let grid = line(1.5, 4);
        let basis = enumerate_basis(4, 3).unwrap();
        let split = kappa_split(&basis, &grid, 1.0).unwrap();
        let h = assemble_local(&split, &grid, &params(1.0, 0.3, 1.0, 1.25, 1.5)).unwrap();
        let m = h.matrix();
        let mut saw_coupling = false;
        for j in 0..h.dim() {
            for i in 0..h.dim() {
                if i != j {
                    assert!(m[(i, j)] <= 0.0);
                    saw_coupling |= m[(i, j)] < 0.0;
                }
            }
        }
        assert!(saw_coupling);
    }

    #[test]
    fn empty_window_tail_is_free() {
        let grid = line(1.5, 4);
        let basis = enumerate_basis(4, 3).unwrap();
        let split = kappa_split(&basis, &grid, 1.0).unwrap();
        let k = tail_operator(&split, &grid, 1.0, 1.0, 1.0).unwrap();
        assert!(k.is_diagonal());
        assert_eq!(k.get(0, 0), 0.0);
        assert!(k.diagonal().iter().all(|&d| d >= 0.0));
    }

    #[test]
    fn tail_vacuum_energy() {
        let grid = line(1.5, 4);
        let basis = enumerate_basis(4, 3).unwrap();
        let split = kappa_split(&basis, &grid, 1.0).unwrap();
        let prm = params(1.0, 0.3, 1.0, 1.25, 1.5);
        let k = assemble_tail(&split, &grid, &prm).unwrap();
        let e = grid_energies(&grid, 1.0, &prm.window).unwrap();
        assert!((k.get(0, 0) + e.e_window).abs() < 1e-15);
        assert!(k.get(0, 0) >= 0.0);
    }

    #[test]
    fn full_window_local_matches_renormalized() {
        // radial-shell grid: every |k| is below the extent, so κ can cover all modes
        let spec = GridSpec { dimension: 1, extent: 2.0, points_per_axis: 2, mass: 1.0, layout: Layout::RadialShell };
        let grid = build_grid(&spec).unwrap();
        let basis = enumerate_basis(grid.len(), 2).unwrap();
        let prm = params(0.8, 0.4, 1.5, 1.75, 2.0);
        let split = kappa_split(&basis, &grid, 1.5).unwrap();
        assert_eq!(split.high_modes().len(), 0);
        let local = assemble_local(&split, &grid, &prm).unwrap();
        let h = assemble_fiber_hamiltonian(&basis, &grid, &prm).unwrap();
        let e = renormalization_constant(&grid, 0.8, 2.0, EnergyScheme::GridSum).unwrap();
        assert!(local.distance(&renormalized_hamiltonian(&h, e)) < 1e-14);
    }

    #[test]
    fn decomposition_is_exact() {
        let grid = line(1.5, 4);
        let basis = enumerate_basis(4, 2).unwrap();
        let prm = params(1.0, 0.3, 1.0, 1.25, 1.5);
        let split = kappa_split(&basis, &grid, 1.0).unwrap();
        let bundle = HamiltonianBundle::assemble(&basis, &grid, &prm, &split).unwrap();
        let r = decomposition_residual(&bundle, &split).unwrap();
        assert!(r.exact().unwrap() < 1e-10);
        assert!((bundle.e_window - (bundle.e_lambda - bundle.e_kappa)).abs() == 0.0);
        assert!(bundle.cross.is_diagonal());
    }

    #[test]
    fn mismatched_scheme_offsets_diagonal() {
        let grid = line(1.5, 4);
        let basis = enumerate_basis(4, 2).unwrap();
        let mut prm = params(1.0, 0.3, 1.0, 1.25, 1.5);
        prm.e_scheme = EnergyScheme::RadialQuadrature;
        let split = kappa_split(&basis, &grid, 1.0).unwrap();
        let bundle = HamiltonianBundle::assemble(&basis, &grid, &prm, &split).unwrap();
        let r = decomposition_residual(&bundle, &split).unwrap();
        let grid_e = renormalization_constant(&grid, 1.0, 1.5, EnergyScheme::GridSum).unwrap();
        let radial_e = renormalization_constant(&grid, 1.0, 1.5, EnergyScheme::RadialQuadrature).unwrap();
        assert!((r.residual - (radial_e - grid_e).abs()).abs() < 1e-12);
        assert!(matches!(r.exact(), Err(Error::SchemeMismatch(_))));
    }
}
