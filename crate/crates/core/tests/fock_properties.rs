use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use nelson_fiber::analysis::Spectrum;
use nelson_fiber::basis::{enumerate_basis, state_count};
use nelson_fiber::cone::{cone_decompose, order_check};
use nelson_fiber::grid::{build_grid, GridSpec, Layout};
use nelson_fiber::ladder::{annihilation_operator, creation_operator, dgamma, field_operator, gamma_diagonal};
use nelson_fiber::nelson::{lower_clamp, upper_clamp};
use nelson_fiber::operator::FockOperator;
use nelson_fiber::split::kappa_split;

fn profile(m: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.0..2.0f64, m)
}

fn guarded_identity(dim: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(dim, cols, |r, c| if r == c { 1.0 } else { 0.0 })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ccr_below_top_sector(m in 1usize..4, n_max in 1usize..4, seed in profile(3), other in profile(3)) {
        let basis = enumerate_basis(m, n_max).unwrap();
        let (f, g) = (&seed[..m], &other[..m]);
        let a = annihilation_operator(&basis, f).unwrap();
        let ad = creation_operator(&basis, g).unwrap();
        let cols = guarded_identity(basis.dim(), basis.sector_offsets()[n_max]);
        let comm = a.matrix() * (ad.matrix() * &cols) - ad.matrix() * (a.matrix() * &cols);
        let inner: f64 = f.iter().zip(g).map(|(x, y)| x * y).sum();
        prop_assert!((comm - &cols * inner).amax() < 1e-12);
    }

    #[test]
    fn creation_is_linear(seed in profile(3), other in profile(3), c in -2.0..2.0f64) {
        let basis = enumerate_basis(3, 3).unwrap();
        let sum: Vec<f64> = seed.iter().zip(&other).map(|(x, y)| x + c * y).collect();
        let lhs = creation_operator(&basis, &sum).unwrap();
        let rhs = &creation_operator(&basis, &seed).unwrap() + &creation_operator(&basis, &other).unwrap().scale(c);
        prop_assert!(lhs.distance(&rhs) < 1e-13);
    }

    #[test]
    fn field_is_symmetric(seed in profile(3)) {
        let basis = enumerate_basis(3, 3).unwrap();
        let phi = field_operator(&basis, &seed).unwrap();
        prop_assert!(phi.hermiticity_residual() < 1e-15);
        prop_assert!(phi.min_entry() >= 0.0);
    }

    #[test]
    fn gamma_of_semigroup(omega in proptest::collection::vec(0.5..3.0f64, 3), t in 0.0..2.0f64) {
        let basis = enumerate_basis(3, 3).unwrap();
        let c: Vec<f64> = omega.iter().map(|w| (-t * w).exp()).collect();
        let lhs = gamma_diagonal(&basis, &c).unwrap();
        let rhs = Spectrum::of(&dgamma(&basis, &omega).unwrap()).unwrap().semigroup(t);
        prop_assert!(lhs.distance(&rhs) < 1e-12);
    }

    #[test]
    fn factorization_splits_creation(seed in profile(5), kappa in 0.0..1.5f64, n_max in 1usize..4) {
        let spec = GridSpec { dimension: 1, extent: 2.0, points_per_axis: 5, mass: 1.0, layout: Layout::Cartesian };
        let grid = build_grid(&spec).unwrap();
        let basis = enumerate_basis(grid.len(), n_max).unwrap();
        let split = kappa_split(&basis, &grid, kappa).unwrap();
        let full = creation_operator(&basis, &seed).unwrap();
        let low = creation_operator(split.low_basis(), &split.restrict_low(&seed)).unwrap();
        let high = creation_operator(split.high_basis(), &split.restrict_high(&seed)).unwrap();
        let sum = &split.embed_low(&low).unwrap() + &split.embed_high(&high).unwrap();
        prop_assert!(full.distance(&sum) < 1e-14);
        prop_assert_eq!(split.low_modes().len() + split.high_modes().len(), grid.len());
    }

    #[test]
    fn cone_decomposition(v in proptest::collection::vec(-3.0..3.0f64, 1..12)) {
        let v = DVector::from_vec(v);
        let (p, n) = cone_decompose(&v);
        prop_assert!(p.min() >= 0.0 && n.min() >= 0.0);
        prop_assert_eq!(p.dot(&n), 0.0);
        prop_assert!((&p - &n - &v).amax() == 0.0);
    }

    #[test]
    fn clamps_bracket_product(a in -4.0..4.0f64, b in -4.0..4.0f64, n in 0.0..6.0f64, step in 0.0..2.0f64) {
        let (lo, hi) = (lower_clamp(a, b, n), upper_clamp(a, b, n));
        prop_assert!(hi <= a * b + 1e-14 && a * b <= lo + 1e-14);
        prop_assert!(lower_clamp(a, b, n + step) <= lo + 1e-14);
        prop_assert!(upper_clamp(a, b, n + step) >= hi - 1e-14);
        if n >= a.abs().max(b.abs()) {
            prop_assert!((lo - a * b).abs() < 1e-14 && (hi - a * b).abs() < 1e-14);
        }
    }

    #[test]
    fn nonnegative_kron_stays_nonnegative(x in proptest::collection::vec(0.0..1.0f64, 16), y in proptest::collection::vec(0.0..1.0f64, 9)) {
        let spec = GridSpec { dimension: 1, extent: 1.0, points_per_axis: 3, mass: 1.0, layout: Layout::Cartesian };
        let grid = build_grid(&spec).unwrap();
        let basis = enumerate_basis(grid.len(), 2).unwrap();
        let split = kappa_split(&basis, &grid, 0.5).unwrap();
        let (dl, dh) = (split.low_basis().dim(), split.high_basis().dim());
        let a = FockOperator::new(DMatrix::from_fn(dl, dl, |r, c| x[(r * dl + c) % x.len()]), false, false);
        let b = FockOperator::new(DMatrix::from_fn(dh, dh, |r, c| y[(r * dh + c) % y.len()]), false, false);
        let k = split.kron(&a, &b).unwrap();
        prop_assert!(order_check(&k, &FockOperator::zeros(k.dim()), 0.0).preserving);
    }
}

#[test]
fn basis_counts() {
    assert_eq!(state_count(6, 4), 210);
    for (m, n) in [(1, 5), (3, 3), (7, 3), (4, 0)] {
        assert_eq!(enumerate_basis(m, n).unwrap().dim() as u128, state_count(m, n));
    }
}
