//! Counterterm and window-constant values against an independent adaptive
//! Simpson integrator.

use std::f64::consts::PI;

use nelson_fiber::grid::{
    build_grid, coupling_amplitudes, cutoff_mask, energy_radial, gross_amplitudes, renormalization_constant,
    smallness_coefficient, window_constant, window_constant_grid_squared, CutoffWindow, EnergyScheme, GridSpec, Layout,
};

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(&f, a, b, fa, fm, fb, whole, tol, 50)
}

fn omega(r: f64, m: f64) -> f64 {
    (r * r + m * m).sqrt()
}

fn e_lambda_oracle_3d(g: f64, m: f64, lambda: f64) -> f64 {
    -4.0 * PI * g * g * simpson(|r| r * r / (omega(r, m) * (omega(r, m) + 0.5 * r * r)), 0.0, lambda, 1e-10)
}

/// `C(K)²` in dimension 3, cut at radius `R` with `16π/R` below `1e-8 C²`.
fn c_squared_oracle(k: f64, m: f64) -> f64 {
    let integrand = |r: f64| 4.0 * PI * r * r / (omega(r, m) + 0.5 * r * r).powi(2);
    let mut upper = 10.0 * k.max(1.0);
    let mut value = simpson(integrand, k, upper, 1e-12);
    while 16.0 * PI / upper > 1e-8 * value {
        let next = upper * 4.0;
        value += simpson(integrand, upper, next, 1e-12);
        upper = next;
    }
    value
}

fn smallness_oracle(k: f64) -> f64 {
    smallness_coefficient(3, c_squared_oracle(k, 1.0).sqrt())
}

fn cube(extent: f64, n: usize) -> GridSpec {
    GridSpec { dimension: 3, extent, points_per_axis: n, mass: 1.0, layout: Layout::Cartesian }
}

#[test]
fn radial_energy_matches_oracle_3d() {
    for lambda in [0.5, 1.0, 3.0] {
        let oracle = e_lambda_oracle_3d(1.0, 1.0, lambda);
        let got = energy_radial(3, 1.0, 1.0, lambda).unwrap();
        assert!(((got - oracle) / oracle).abs() < 1e-9, "Λ = {lambda}: {got} vs {oracle}");
    }
}

#[test]
fn radial_energy_matches_oracle_1d() {
    let oracle = -2.0 * simpson(|r| 1.0 / (omega(r, 1.0) * (omega(r, 1.0) + 0.5 * r * r)), 0.0, 2.0, 1e-12);
    let got = energy_radial(1, 1.0, 1.0, 2.0).unwrap();
    assert!(((got - oracle) / oracle).abs() < 1e-9);
}

#[test]
fn window_constant_matches_oracle() {
    for k in [0.5, 2.0, 10.0] {
        let oracle = c_squared_oracle(k, 1.0);
        let got = window_constant(3, k, 1.0).unwrap().c_squared;
        assert!(((got - oracle) / oracle).abs() < 1e-7, "K = {k}: {got} vs {oracle}");
    }
}

#[test]
fn window_constant_fixture_at_ten() {
    // oracle value recorded on first run
    let c2 = window_constant(3, 10.0, 1.0).unwrap().c_squared;
    assert!((c2 - c_squared_oracle(10.0, 1.0)).abs() < 1e-8 * c2);
    assert!((c2 - 4.187_175_691_588_5).abs() < 1e-9, "{c2}");
}

#[test]
fn smallness_threshold() {
    let (mut lo, mut hi) = (1.0, 1.0);
    while smallness_oracle(hi) >= 1.0 {
        hi *= 2.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if smallness_oracle(mid) >= 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let k_star = hi;
    for factor in [1.0001, 1.1, 2.0, 10.0] {
        assert!(window_constant(3, k_star * factor, 1.0).unwrap().small, "K = {}", k_star * factor);
    }
    assert!(!window_constant(3, k_star * 0.99, 1.0).unwrap().small);
}

#[test]
fn grid_energy_agrees_at_21_cubed() {
    let grid = build_grid(&cube(1.0, 21)).unwrap();
    let grid_sum = renormalization_constant(&grid, 1.0, 1.0, EnergyScheme::GridSum).unwrap();
    let oracle = e_lambda_oracle_3d(1.0, 1.0, 1.0);
    let rel = ((grid_sum - oracle) / oracle).abs();
    assert!(rel < 0.02, "grid {grid_sum} vs oracle {oracle}: relative {rel}");
}

#[test]
fn coupling_norm_at_21_cubed() {
    let grid = build_grid(&cube(1.0, 21)).unwrap();
    let f = coupling_amplitudes(&grid, 1.0, &cutoff_mask(&grid, 1.0)).unwrap();
    let norm2: f64 = f.iter().map(|x| x * x).sum();
    let oracle = 4.0 * PI * simpson(|r| r * r / omega(r, 1.0), 0.0, 1.0, 1e-12);
    let rel = ((norm2 - oracle) / oracle).abs();
    assert!(rel < 0.05, "⟨f,f⟩ {norm2} vs oracle {oracle}: relative {rel}");
}

#[test]
fn energy_monotone_in_cutoff() {
    let grid = build_grid(&cube(2.0, 9)).unwrap();
    let mut prev = 0.0;
    for lambda in [0.0, 0.5, 1.0, 1.5, 2.0] {
        for scheme in [EnergyScheme::GridSum, EnergyScheme::RadialQuadrature] {
            assert!(renormalization_constant(&grid, 1.0, lambda, scheme).unwrap() <= 0.0);
        }
        let e = renormalization_constant(&grid, 1.0, lambda, EnergyScheme::RadialQuadrature).unwrap();
        assert!(e <= prev);
        prev = e;
        let doubled = energy_radial(3, 1.0, 1.0, 2.0 * lambda).unwrap();
        assert!(doubled <= e);
    }
}

#[test]
fn gross_kernel_below_window_constant() {
    for n in [3, 5, 9] {
        let grid = build_grid(&cube(3.0, n)).unwrap();
        let w = CutoffWindow::new(0.5, 1.0, 3.0).unwrap();
        let g = gross_amplitudes(&grid, 1.0, &w);
        let norm2: f64 = g.iter().map(|x| x * x).sum();
        // G_i² = w_i / (ω_i (ω_i + k²/2)²) and ω_i ≥ m = 1
        assert!(norm2 <= window_constant_grid_squared(&grid, 1.0) + 1e-15);
        assert!(g.iter().zip(grid.modes()).all(|(&x, m)| x >= 0.0 && (m.norm() > 1.0 || x == 0.0)));
    }
}
