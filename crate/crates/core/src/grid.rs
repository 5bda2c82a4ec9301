//! Momentum grids, dispersion and the scalar constants built from them.
//!
//! A continuum profile `f(k)` is embedded as the vector `sqrt(w_i) f(k_i)`
//! so that Euclidean inner products approximate `L^2` pairings.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::CompositeGauss;

/// Relative slack used when comparing `|k|` against a cutoff radius, so that
/// nodes placed exactly on a radius are counted inside it.
const RADIUS_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layout {
    Cartesian,
    RadialShell,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dimension: usize,
    pub extent: f64,
    pub points_per_axis: usize,
    pub mass: f64,
    #[serde(default = "default_layout")]
    pub layout: Layout,
}

fn default_layout() -> Layout {
    Layout::Cartesian
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dimension != 1 && self.dimension != 3 {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 1 or 3, got {}",
                self.dimension
            )));
        }
        if self.points_per_axis == 0 {
            return Err(Error::InvalidGrid("points_per_axis must be at least 1".into()));
        }
        if !(self.extent > 0.0) || !self.extent.is_finite() {
            return Err(Error::InvalidGrid(format!("extent must be positive, got {}", self.extent)));
        }
        if !(self.mass > 0.0) || !self.mass.is_finite() {
            return Err(Error::InvalidGrid(format!("mass must be positive, got {}", self.mass)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub index: usize,
    pub k: Vec<f64>,
    pub weight: f64,
    pub omega: f64,
}

impl Mode {
    pub fn norm(&self) -> f64 {
        norm(&self.k)
    }
}

#[derive(Debug, Clone)]
pub struct ModeGrid {
    spec: GridSpec,
    modes: Vec<Mode>,
}

impl ModeGrid {
    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.spec.dimension
    }

    pub fn mass(&self) -> f64 {
        self.spec.mass
    }

    pub fn omegas(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.omega).collect()
    }

    /// Component `j` of every wave vector.
    pub fn momentum_component(&self, j: usize) -> Vec<f64> {
        self.modes.iter().map(|m| m.k[j]).collect()
    }

    /// Distinct values of `|k|`, ascending. Useful for placing cutoffs between shells.
    pub fn shells(&self) -> Vec<f64> {
        let mut radii: Vec<f64> = Vec::new();
        for m in &self.modes {
            let r = m.norm();
            match radii.last() {
                Some(&last) if (r - last).abs() <= RADIUS_SLACK * r.max(1.0) => {}
                _ => radii.push(r),
            }
        }
        radii
    }
}

fn norm(k: &[f64]) -> f64 {
    k.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn inside(r: f64, radius: f64) -> bool {
    r <= radius + RADIUS_SLACK * radius.max(1.0)
}

/// Symmetric nodes `extent * (2i - (n-1)) / (n-1)`, exact at both endpoints.
fn axis_nodes(extent: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    let d = (n - 1) as f64;
    (0..n).map(|i| extent * (2.0 * i as f64 - d) / d).collect()
}

pub fn build_grid(spec: &GridSpec) -> Result<ModeGrid> {
    spec.validate()?;
    let (dim, extent, n) = (spec.dimension, spec.extent, spec.points_per_axis);
    let mut raw: Vec<(Vec<f64>, f64)> = Vec::new();
    match spec.layout {
        Layout::Cartesian => {
            let nodes = axis_nodes(extent, n);
            let cell = (2.0 * extent / n as f64).powi(dim as i32);
            if dim == 1 {
                raw.extend(nodes.iter().map(|&x| (vec![x], cell)));
            } else {
                for &x in &nodes {
                    for &y in &nodes {
                        for &z in &nodes {
                            let k = vec![x, y, z];
                            if inside(norm(&k), extent) {
                                raw.push((k, cell));
                            }
                        }
                    }
                }
            }
        }
        Layout::RadialShell => {
            let dr = extent / n as f64;
            for s in 0..n {
                let r = (s as f64 + 0.5) * dr;
                if dim == 1 {
                    raw.push((vec![-r], dr));
                    raw.push((vec![r], dr));
                } else {
                    let (lo, hi) = (s as f64 * dr, (s + 1) as f64 * dr);
                    let shell = 4.0 * PI / 3.0 * (hi.powi(3) - lo.powi(3));
                    for axis in 0..3 {
                        for sign in [-1.0, 1.0] {
                            let mut k = vec![0.0; 3];
                            k[axis] = sign * r;
                            raw.push((k, shell / 6.0));
                        }
                    }
                }
            }
        }
    }
    raw.sort_by(|(a, _), (b, _)| {
        norm(a)
            .total_cmp(&norm(b))
            .then_with(|| a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal))
    });
    let modes = raw
        .into_iter()
        .enumerate()
        .map(|(index, (k, weight))| {
            let omega = omega_unchecked(&k, spec.mass);
            Mode { index, k, weight, omega }
        })
        .collect();
    Ok(ModeGrid { spec: spec.clone(), modes })
}

fn omega_unchecked(k: &[f64], m: f64) -> f64 {
    (k.iter().map(|x| x * x).sum::<f64>() + m * m).sqrt()
}

/// `ω(k) = sqrt(|k|² + m²)`.
pub fn dispersion(k: &[f64], m: f64) -> Result<f64> {
    if !(m > 0.0) {
        return Err(Error::InvalidArgument(format!("mass must be positive, got {m}")));
    }
    Ok(omega_unchecked(k, m))
}

/// Indicator of `|k_i| <= radius`.
pub fn cutoff_mask(grid: &ModeGrid, radius: f64) -> Vec<bool> {
    grid.modes.iter().map(|m| inside(m.norm(), radius)).collect()
}

/// Indicator of `lower < |k_i| <= upper`.
pub fn window_mask(grid: &ModeGrid, lower: f64, upper: f64) -> Vec<bool> {
    cutoff_mask(grid, upper)
        .into_iter()
        .zip(cutoff_mask(grid, lower))
        .map(|(u, l)| u && !l)
        .collect()
}

/// Discretized `g χ / sqrt(ω)` in the quadrature embedding.
pub fn coupling_amplitudes(grid: &ModeGrid, g: f64, mask: &[bool]) -> Result<Vec<f64>> {
    check_mask(grid, mask)?;
    if g < 0.0 {
        return Err(Error::InvalidArgument(format!("coupling must be nonnegative, got {g}")));
    }
    Ok(grid
        .modes
        .iter()
        .zip(mask)
        .map(|(m, &on)| if on { g * m.weight.sqrt() / m.omega.sqrt() } else { 0.0 })
        .collect())
}

fn check_mask(grid: &ModeGrid, mask: &[bool]) -> Result<()> {
    if mask.len() != grid.len() {
        return Err(Error::LengthMismatch { expected: grid.len(), found: mask.len() });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnergyScheme {
    GridSum,
    RadialQuadrature,
}

fn recoil_denominator(r2: f64, m: f64) -> f64 {
    let w = (r2 + m * m).sqrt();
    w * (w + 0.5 * r2)
}

/// `-g² Σ w_i χ_i / (ω_i (ω_i + |k_i|²/2))` over an arbitrary mode mask.
pub fn energy_grid_sum(grid: &ModeGrid, g: f64, mask: &[bool]) -> Result<f64> {
    check_mask(grid, mask)?;
    let s: f64 = grid
        .modes
        .iter()
        .zip(mask)
        .filter(|(_, &on)| on)
        .map(|(m, _)| {
            let r2 = m.k.iter().map(|x| x * x).sum::<f64>();
            m.weight / (m.omega * (m.omega + 0.5 * r2))
        })
        .sum();
    Ok(-g * g * s)
}

/// Continuum value of the energy counterterm over `|k| <= lambda`.
pub fn energy_radial(dimension: usize, g: f64, m: f64, lambda: f64) -> Result<f64> {
    if lambda < 0.0 {
        return Err(Error::InvalidArgument(format!("cutoff must be nonnegative, got {lambda}")));
    }
    if !(m > 0.0) {
        return Err(Error::InvalidArgument(format!("mass must be positive, got {m}")));
    }
    let rule = CompositeGauss::default();
    let integral = match dimension {
        1 => 2.0 * rule.integrate(0.0, lambda, |r| 1.0 / recoil_denominator(r * r, m)),
        3 => 4.0 * PI * rule.integrate(0.0, lambda, |r| r * r / recoil_denominator(r * r, m)),
        d => return Err(Error::InvalidGrid(format!("dimension must be 1 or 3, got {d}"))),
    };
    Ok(-g * g * integral)
}

/// `E_Λ` in the requested scheme. The grid-sum scheme is the one used inside
/// Hamiltonians; the radial scheme is the continuum reference.
pub fn renormalization_constant(grid: &ModeGrid, g: f64, lambda: f64, scheme: EnergyScheme) -> Result<f64> {
    if lambda < 0.0 {
        return Err(Error::InvalidArgument(format!("cutoff must be nonnegative, got {lambda}")));
    }
    match scheme {
        EnergyScheme::GridSum => energy_grid_sum(grid, g, &cutoff_mask(grid, lambda)),
        EnergyScheme::RadialQuadrature => energy_radial(grid.dimension(), g, grid.mass(), lambda),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowConstant {
    pub k_split: f64,
    pub c: f64,
    pub c_squared: f64,
    /// `6C + 6C² < 1` in dimension 3 (`2C + 2C²` per component in general).
    pub small: bool,
}

/// Smallness coefficient `dim * (2C + 2C²)`; equals `6C + 6C²` in dimension 3.
pub fn smallness_coefficient(dimension: usize, c: f64) -> f64 {
    dimension as f64 * 2.0 * (c + c * c)
}

/// `C(K)² = ∫_{|k|>K} dk / (ω + k²/2)²`.
///
/// The improper integral is mapped onto `u = 1/r ∈ (0, 1/K]`, where the
/// integrand is bounded and smooth, so no truncation radius is needed.
pub fn window_constant(dimension: usize, k_split: f64, m: f64) -> Result<WindowConstant> {
    if !(k_split > 0.0) {
        return Err(Error::InvalidArgument(format!("split radius K must be positive, got {k_split}")));
    }
    if !(m > 0.0) {
        return Err(Error::InvalidArgument(format!("mass must be positive, got {m}")));
    }
    let rule = CompositeGauss::default();
    let upper = 1.0 / k_split;
    // ω + r²/2 = (1 + 2u s) / (2u²) with s = sqrt(1 + m²u²)
    let c_squared = match dimension {
        3 => rule.integrate(0.0, upper, |u| {
            let s = (1.0 + m * m * u * u).sqrt();
            16.0 * PI / (1.0 + 2.0 * u * s).powi(2)
        }),
        1 => rule.integrate(0.0, upper, |u| {
            let s = (1.0 + m * m * u * u).sqrt();
            8.0 * u * u / (1.0 + 2.0 * u * s).powi(2)
        }),
        d => return Err(Error::InvalidGrid(format!("dimension must be 1 or 3, got {d}"))),
    };
    let c = c_squared.sqrt();
    Ok(WindowConstant { k_split, c, c_squared, small: smallness_coefficient(dimension, c) < 1.0 })
}

/// Grid analogue of `C(K)²`: `Σ_{|k_i| > K} w_i / (ω_i + |k_i|²/2)²`.
pub fn window_constant_grid_squared(grid: &ModeGrid, k_split: f64) -> f64 {
    grid.modes
        .iter()
        .filter(|m| !inside(m.norm(), k_split))
        .map(|m| {
            let r2 = m.norm().powi(2);
            m.weight / (m.omega + 0.5 * r2).powi(2)
        })
        .sum()
}

/// Ordered cutoffs `0 <= κ < K < Λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffWindow {
    pub kappa: f64,
    #[serde(rename = "Lambda", alias = "lambda")]
    pub lambda: f64,
    #[serde(rename = "K_gross", alias = "k_gross")]
    pub k_gross: f64,
}

impl CutoffWindow {
    pub fn new(kappa: f64, k_gross: f64, lambda: f64) -> Result<Self> {
        let w = Self { kappa, lambda, k_gross };
        w.validate(None)?;
        Ok(w)
    }

    /// Checks `0 <= κ < K < Λ` and, when given, `Λ <= extent`.
    pub fn validate(&self, extent: Option<f64>) -> Result<()> {
        if !(self.kappa >= 0.0) {
            return Err(Error::CutoffOrder(format!("κ must be nonnegative, got {}", self.kappa)));
        }
        if !(self.kappa < self.lambda) {
            return Err(Error::CutoffOrder(format!(
                "κ < Λ is required, got κ = {} and Λ = {}",
                self.kappa, self.lambda
            )));
        }
        if !(self.kappa < self.k_gross && self.k_gross < self.lambda) {
            return Err(Error::CutoffOrder(format!(
                "κ < K < Λ is required, got κ = {}, K = {}, Λ = {}",
                self.kappa, self.k_gross, self.lambda
            )));
        }
        if let Some(e) = extent {
            if self.lambda > e * (1.0 + RADIUS_SLACK) {
                return Err(Error::CutoffOrder(format!("Λ = {} exceeds the grid extent {e}", self.lambda)));
            }
        }
        Ok(())
    }
}

/// Discretized Gross kernel `G = β χ_κ^Λ` with
/// `β(k) = g (1 - χ_K) / (ω^{1/2} (ω + k²/2))`.
pub fn gross_amplitudes(grid: &ModeGrid, g: f64, window: &CutoffWindow) -> Vec<f64> {
    grid.modes
        .iter()
        .map(|m| {
            let r = m.norm();
            let in_window = !inside(r, window.kappa) && inside(r, window.lambda);
            if in_window && !inside(r, window.k_gross) {
                g * m.weight.sqrt() / (m.omega.sqrt() * (m.omega + 0.5 * r * r))
            } else {
                0.0
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec1(extent: f64, n: usize) -> GridSpec {
        GridSpec { dimension: 1, extent, points_per_axis: n, mass: 1.0, layout: Layout::Cartesian }
    }

    #[test]
    fn three_point_line() {
        let g = build_grid(&spec1(1.0, 3)).unwrap();
        let ks: Vec<f64> = g.modes().iter().map(|m| m.k[0]).collect();
        assert_eq!(ks, vec![0.0, -1.0, 1.0]);
        for m in g.modes() {
            assert!((m.weight - 2.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn single_point_cube() {
        let spec = GridSpec { dimension: 3, extent: 1.0, points_per_axis: 1, mass: 1.0, layout: Layout::Cartesian };
        let g = build_grid(&spec).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g.modes()[0].k, vec![0.0; 3]);
        assert!((g.modes()[0].weight - 8.0).abs() < 1e-15);
    }

    #[test]
    fn weights_partition_interval() {
        let g = build_grid(&spec1(2.0, 5)).unwrap();
        let s: f64 = g.modes().iter().map(|m| m.weight).sum();
        assert!((s - 4.0).abs() < 1e-12);
    }

    #[test]
    fn seven_point_star() {
        let spec = GridSpec { dimension: 3, extent: 1.0, points_per_axis: 3, mass: 1.0, layout: Layout::Cartesian };
        let g = build_grid(&spec).unwrap();
        assert_eq!(g.len(), 7);
        assert_eq!(g.modes()[0].k, vec![0.0; 3]);
        assert_eq!(g.shells().len(), 2);
    }

    #[test]
    fn radial_shell_weights_sum_to_volume() {
        let spec = GridSpec { dimension: 3, extent: 2.0, points_per_axis: 4, mass: 1.0, layout: Layout::RadialShell };
        let g = build_grid(&spec).unwrap();
        let s: f64 = g.modes().iter().map(|m| m.weight).sum();
        assert!((s - 4.0 / 3.0 * PI * 8.0).abs() < 1e-10);
        let spec = GridSpec { dimension: 1, ..spec };
        let g = build_grid(&spec).unwrap();
        let s: f64 = g.modes().iter().map(|m| m.weight).sum();
        assert!((s - 4.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(build_grid(&GridSpec { dimension: 2, ..spec1(1.0, 3) }).is_err());
        assert!(build_grid(&spec1(1.0, 0)).is_err());
        assert!(build_grid(&GridSpec { mass: 0.0, ..spec1(1.0, 3) }).is_err());
    }

    #[test]
    fn dispersion_values() {
        assert_eq!(dispersion(&[0.0], 1.0).unwrap(), 1.0);
        assert!((dispersion(&[1.0, 1.0, 1.0], 1.0).unwrap() - 2.0).abs() < 1e-15);
        assert!((dispersion(&[3.0, 0.0, 0.0], 4.0).unwrap() - 5.0).abs() < 1e-15);
        assert!(dispersion(&[1.0], 0.0).is_err());
        assert!(dispersion(&[1.0], -1.0).is_err());
    }

    #[test]
    fn masks() {
        let g = build_grid(&spec1(2.0, 5)).unwrap();
        let m0 = cutoff_mask(&g, 0.0);
        assert_eq!(m0.iter().filter(|&&b| b).count(), 1);
        assert!(m0[0]);
        assert!(cutoff_mask(&g, 2.0).iter().all(|&b| b));
        assert!(cutoff_mask(&g, 5.0).iter().all(|&b| b));
        assert_eq!(cutoff_mask(&g, 1.5).iter().filter(|&&b| b).count(), 3);
        let w = window_mask(&g, 0.5, 2.0);
        assert_eq!(w, vec![false, true, true, true, true]);
    }

    #[test]
    fn coupling_single_mode() {
        let spec = GridSpec { dimension: 1, extent: 0.5, points_per_axis: 1, mass: 1.0, layout: Layout::Cartesian };
        let g = build_grid(&spec).unwrap();
        assert_eq!(g.modes()[0].weight, 1.0);
        let f = coupling_amplitudes(&g, 2.0, &[true]).unwrap();
        assert_eq!(f, vec![2.0]);
        assert_eq!(coupling_amplitudes(&g, 2.0, &[false]).unwrap(), vec![0.0]);
        assert!(coupling_amplitudes(&g, 2.0, &[true, false]).is_err());
    }

    #[test]
    fn energy_zero_cutoff_and_monotone() {
        assert_eq!(energy_radial(3, 1.0, 1.0, 0.0).unwrap(), 0.0);
        assert!(energy_radial(3, 1.0, 1.0, -1.0).is_err());
        let mut prev = 0.0;
        for l in [0.5, 1.0, 2.0, 4.0, 8.0] {
            let e = energy_radial(3, 1.0, 1.0, l).unwrap();
            assert!(e < prev);
            assert!(energy_radial(3, 1.0, 1.0, 2.0 * l).unwrap() <= e);
            prev = e;
        }
    }

    #[test]
    fn window_constant_decreases() {
        let mut prev = f64::INFINITY;
        for k in [0.5, 1.0, 2.0, 5.0, 10.0, 50.0] {
            let w = window_constant(3, k, 1.0).unwrap();
            assert!(w.c < prev);
            prev = w.c;
        }
        assert!(window_constant(3, 0.0, 1.0).is_err());
    }

    #[test]
    fn gross_single_mode() {
        let spec = GridSpec { dimension: 1, extent: 3.0, points_per_axis: 4, mass: 1.0, layout: Layout::Cartesian };
        let grid = build_grid(&spec).unwrap();
        // modes at ±1, ±3; pick window so only |k| = 3 survives
        let win = CutoffWindow::new(0.5, 2.0, 3.0).unwrap();
        let gvec = gross_amplitudes(&grid, 1.0, &win);
        for (m, gi) in grid.modes().iter().zip(&gvec) {
            if m.norm() <= 2.0 {
                assert_eq!(*gi, 0.0);
            } else {
                let w: f64 = 10f64.sqrt();
                let expected = m.weight.sqrt() / (w.sqrt() * (w + 4.5));
                assert!((gi - expected).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn window_ordering() {
        assert!(CutoffWindow::new(0.5, 1.0, 2.0).is_ok());
        let err = CutoffWindow::new(2.0, 2.5, 1.0).unwrap_err();
        assert!(err.to_string().contains("κ < Λ"));
        assert!(CutoffWindow::new(0.5, 3.0, 2.0).is_err());
        let w = CutoffWindow::new(0.5, 1.0, 2.0).unwrap();
        assert!(w.validate(Some(1.5)).is_err());
    }
}
