//! Gross transformation of the tail Hamiltonian and the quadratic-form bounds
//! that make the high-momentum limit controllable.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::basis::OccupationBasis;
use crate::error::{Error, Result};
use crate::grid::{gross_amplitudes, window_constant, window_constant_grid_squared, window_mask, ModeGrid, WindowConstant};
use crate::ladder::{annihilation_operator, creation_operator, dgamma, field_operator};
use crate::nelson::hamiltonian::{assemble_tail, NelsonParams};
use crate::operator::FockOperator;
use crate::split::FactorizationMap;

const UNITARITY_ABORT: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct GrossBundle {
    /// `G` restricted to the high modes.
    pub amplitudes: Vec<f64>,
    pub t_generator: FockOperator,
    pub u: FockOperator,
    pub k_tail: FockOperator,
    pub k_transformed: FockOperator,
    pub window: WindowConstant,
    pub unitarity_deviation: f64,
    pub spectral_deviation: f64,
    pub commutator_residual: f64,
}

fn sorted_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Largest entry of `[T, a(e_i)] - <G, e_i>·1` over every high mode, restricted
/// to columns with fewer than `n_max` bosons.
pub fn guarded_commutator_residual(basis: &OccupationBasis, t: &FockOperator, g: &[f64]) -> Result<f64> {
    let guarded: Vec<usize> = (0..basis.dim()).filter(|&c| basis.total(c) < basis.n_max()).collect();
    let mut worst: f64 = 0.0;
    for mode in 0..basis.mode_count() {
        let mut e = vec![0.0; basis.mode_count()];
        e[mode] = 1.0;
        let a = annihilation_operator(basis, &e)?;
        let comm = t.matrix() * a.matrix() - a.matrix() * t.matrix();
        for &c in &guarded {
            for r in 0..basis.dim() {
                let expected = if r == c { g[mode] } else { 0.0 };
                worst = worst.max((comm[(r, c)] - expected).abs());
            }
        }
    }
    Ok(worst)
}

pub fn gross_transform(split: &FactorizationMap, grid: &ModeGrid, params: &NelsonParams) -> Result<GrossBundle> {
    params.window.validate(Some(grid.spec().extent))?;
    let basis = split.high_basis();
    let amplitudes = split.restrict_high(&gross_amplitudes(grid, params.g, &params.window));
    let a = annihilation_operator(basis, &amplitudes)?;
    let t = FockOperator::new(a.matrix() - a.matrix().transpose(), false, false);
    let u = t.matrix().clone().exp();
    let unitarity_deviation = (&u * u.transpose() - DMatrix::identity(u.nrows(), u.ncols())).amax();
    if unitarity_deviation > UNITARITY_ABORT {
        return Err(Error::Unitarity { deviation: unitarity_deviation });
    }
    let k_tail = assemble_tail(split, grid, params)?;
    let kt = &u * k_tail.matrix() * u.transpose();
    let kt = 0.5 * (&kt + kt.transpose());
    let spectral_deviation = sorted_eigenvalues(k_tail.matrix())
        .iter()
        .zip(sorted_eigenvalues(&kt))
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let commutator_residual = guarded_commutator_residual(basis, &t, &amplitudes)?;
    Ok(GrossBundle {
        amplitudes,
        t_generator: t,
        u: FockOperator::new(u, false, false),
        k_tail,
        k_transformed: FockOperator::new(kt, true, false),
        window: window_constant(grid.dimension(), params.window.k_gross, params.m)?,
        unitarity_deviation,
        spectral_deviation,
        commutator_residual,
    })
}

/// `J = ½ (P_f^{>κ})² + dΓ(ω^{>κ})` on the high factor.
pub fn reference_operator(split: &FactorizationMap, grid: &ModeGrid) -> Result<FockOperator> {
    let basis = split.high_basis();
    let omega = split.restrict_high(&grid.omegas());
    let mut j = dgamma(basis, &omega)?.into_matrix();
    for c in 0..grid.dimension() {
        let p = dgamma(basis, &split.restrict_high(&grid.momentum_component(c)))?;
        j += 0.5 * p.matrix() * p.matrix();
    }
    Ok(FockOperator::new(j, true, true))
}

/// Matrix of the form `B_Λ`:
/// `Σ_j {P_j A_j + A_j* P_j + ½A_j² + ½A_j*² + A_j* A_j} + H_I` with
/// `A_j = a(k_j G)` and `H_I = -φ(f_κ^K)`.
pub fn form_matrix(split: &FactorizationMap, grid: &ModeGrid, params: &NelsonParams) -> Result<FockOperator> {
    form_matrix_for(split, grid, params.g, &params.window.clone())
}

fn form_matrix_for(
    split: &FactorizationMap,
    grid: &ModeGrid,
    g: f64,
    window: &crate::grid::CutoffWindow,
) -> Result<FockOperator> {
    let basis = split.high_basis();
    let gvec = split.restrict_high(&gross_amplitudes(grid, g, window));
    let n = basis.dim();
    let mut b = DMatrix::zeros(n, n);
    for c in 0..grid.dimension() {
        let kc = split.restrict_high(&grid.momentum_component(c));
        let profile: Vec<f64> = kc.iter().zip(&gvec).map(|(k, g)| k * g).collect();
        let a = annihilation_operator(basis, &profile)?.into_matrix();
        let ad = a.transpose();
        let p = dgamma(basis, &kc)?.into_matrix();
        b += &p * &a + &ad * &p + 0.5 * (&a * &a) + 0.5 * (&ad * &ad) + &ad * &a;
    }
    let inner = window_mask(grid, window.kappa, window.k_gross);
    let f: Vec<f64> = grid
        .modes()
        .iter()
        .zip(&inner)
        .map(|(m, &on)| if on { g * m.weight.sqrt() / m.omega.sqrt() } else { 0.0 })
        .collect();
    b -= field_operator(basis, &split.restrict_high(&f))?.matrix();
    Ok(FockOperator::new(b, true, false))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FormBoundReport {
    pub epsilon: f64,
    pub samples: usize,
    /// Continuum `C(K)` and its smallness flag.
    pub window: WindowConstant,
    /// `g · C_grid(K)`, the grid analogue bounding `‖ω^{-1/2} k_j G‖`.
    pub c_grid: f64,
    /// `dim·(2c + 2c²) + ε`.
    pub form_coefficient: f64,
    /// `D = 2g (Σ w χ_κ^K / ω²)^{1/2}`.
    pub d: f64,
    /// `D² / (4ε)`.
    pub d_constant: f64,
    pub worst_ratio: f64,
    pub violations: usize,
}

impl FormBoundReport {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

/// Samples random `φ` and compares `|<φ, B_Λ φ>|` against
/// `(dim·(2c + 2c²) + ε) <φ, (J + 1) φ> + D²/(4ε) ‖φ‖²`.
pub fn form_bound_check(
    split: &FactorizationMap,
    grid: &ModeGrid,
    params: &NelsonParams,
    epsilon: f64,
    samples: usize,
    seed: u64,
) -> Result<FormBoundReport> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("ε must be positive, got {epsilon}")));
    }
    if samples == 0 {
        return Err(Error::InvalidArgument("at least one sample is required".into()));
    }
    let w = &params.window;
    let b = form_matrix(split, grid, params)?;
    let j1 = reference_operator(split, grid)?.shift(1.0);
    let c_grid = params.g * window_constant_grid_squared(grid, w.k_gross).sqrt();
    let dimension = grid.dimension() as f64;
    let form_coefficient = dimension * 2.0 * (c_grid + c_grid * c_grid) + epsilon;
    let inner = window_mask(grid, w.kappa, w.k_gross);
    let s: f64 = grid
        .modes()
        .iter()
        .zip(&inner)
        .filter(|(_, &on)| on)
        .map(|(m, _)| m.weight / (m.omega * m.omega))
        .sum();
    let d = 2.0 * params.g * s.sqrt();
    let d_constant = d * d / (4.0 * epsilon);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = b.dim();
    let mut worst_ratio: f64 = 0.0;
    let mut violations = 0;
    for _ in 0..samples {
        let phi = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let lhs = phi.dot(&b.apply(&phi)).abs();
        let rhs = form_coefficient * phi.dot(&j1.apply(&phi)) + d_constant * phi.norm_squared();
        let ratio = lhs / rhs;
        worst_ratio = worst_ratio.max(ratio);
        if ratio > 1.0 {
            violations += 1;
        }
    }
    Ok(FormBoundReport {
        epsilon,
        samples,
        window: window_constant(grid.dimension(), w.k_gross, params.m)?,
        c_grid,
        form_coefficient,
        d,
        d_constant,
        worst_ratio,
        violations,
    })
}

/// `max |B_{Λ₁} - B_{Λ₂}|` at fixed κ and K.
pub fn form_difference(split: &FactorizationMap, grid: &ModeGrid, params: &NelsonParams, lambda1: f64, lambda2: f64) -> Result<f64> {
    let mut w1 = params.window;
    w1.lambda = lambda1;
    let mut w2 = params.window;
    w2.lambda = lambda2;
    w1.validate(Some(grid.spec().extent))?;
    w2.validate(Some(grid.spec().extent))?;
    let b1 = form_matrix_for(split, grid, params.g, &w1)?;
    let b2 = form_matrix_for(split, grid, params.g, &w2)?;
    Ok(b1.distance(&b2))
}

/// `a†(f)` on the high factor; exposed for the commutator fixtures.
pub fn high_creation(split: &FactorizationMap, f: &[f64]) -> Result<FockOperator> {
    creation_operator(split.high_basis(), f)
}
