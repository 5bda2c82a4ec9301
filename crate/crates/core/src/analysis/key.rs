//! The vacuum-projected semigroup identity for `L_κ` and the regularized
//! cross-term limit.

use serde::{Deserialize, Serialize};

use crate::analysis::spectral::Spectrum;
use crate::error::{Error, Result};
use crate::nelson::HamiltonianBundle;
use crate::operator::FockOperator;
use crate::split::FactorizationMap;

/// Product spaces larger than this are not diagonalized densely.
pub const PRODUCT_DIM_LIMIT: usize = 6000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyReport {
    pub beta: f64,
    /// `max |Q e^{-βL} Q - <Ω|e^{-βK}Ω> (e^{-βH^{≤κ}} ⊗ 1) Q|`.
    pub residual: f64,
    /// `<Ω^{>κ}|e^{-βK} Ω^{>κ}>`
    pub scalar: f64,
    pub product_dim: usize,
}

impl KeyReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.residual < tol && self.scalar > 0.0
    }
}

/// Checks the identity for an arbitrary operator `l` on the product space.
/// With `l = H^{≤κ}⊗1 + 1⊗K` the identity is exact; any coupling between
/// the factors shows up in the residual.
pub fn key_identity(split: &FactorizationMap, l: &FockOperator, h_local: &FockOperator, k_tail: &FockOperator, beta: f64) -> Result<KeyReport> {
    let product_dim = split.product_dim();
    if l.dim() != product_dim {
        return Err(Error::Shape(format!("L has dimension {}, product space has {product_dim}", l.dim())));
    }
    if product_dim > PRODUCT_DIM_LIMIT {
        return Err(Error::Shape(format!("product space dimension {product_dim} exceeds {PRODUCT_DIM_LIMIT}")));
    }
    let q = split.q_product();
    let lhs = &(&q * &Spectrum::of(l)?.semigroup(beta)) * &q;

    let tail = Spectrum::of(k_tail)?.semigroup(beta);
    let vac = split.tail_vacuum();
    let scalar = tail.get(vac, vac);
    let low = Spectrum::of(h_local)?.semigroup(beta);
    let id_high = FockOperator::identity(split.high_basis().dim());
    let rhs = (&split.kron(&low, &id_high)? * &q).scale(scalar);
    Ok(KeyReport { beta, residual: lhs.distance(&rhs), scalar, product_dim })
}

/// `L_κ` assembled on the product space.
pub fn product_l_kappa(split: &FactorizationMap, bundle: &HamiltonianBundle) -> Result<FockOperator> {
    let id_low = FockOperator::identity(split.low_basis().dim());
    let id_high = FockOperator::identity(split.high_basis().dim());
    Ok(&split.kron(&bundle.h_local, &id_high)? + &split.kron(&id_low, &bundle.k_tail)?)
}

pub fn key_inequality(bundle: &HamiltonianBundle, split: &FactorizationMap, beta: f64) -> Result<KeyReport> {
    let l = product_l_kappa(split, bundle)?;
    key_identity(split, &l, &bundle.h_local, &bundle.k_tail, beta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitEntry {
    pub n: f64,
    pub distance: f64,
    pub saturated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrotterCheck {
    pub n: f64,
    pub error_64: f64,
    pub error_128: f64,
}

impl TrotterCheck {
    /// Halving the step must shrink the error, by no more than a factor ten.
    pub fn first_order(&self) -> bool {
        if self.error_64 < 1e-12 {
            return self.error_128 < 1e-12;
        }
        self.error_128 < self.error_64 && self.error_64 < 10.0 * self.error_128
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitReport {
    pub beta: f64,
    pub saturation: f64,
    pub entries: Vec<LimitEntry>,
    pub trotter: TrotterCheck,
}

impl LimitReport {
    pub fn nonincreasing(&self) -> bool {
        self.entries.windows(2).all(|w| w[1].distance <= w[0].distance)
    }

    /// Largest distance among saturated clamps; `None` if no tested `n` saturates.
    pub fn saturated_distance(&self) -> Option<f64> {
        self.entries.iter().filter(|e| e.saturated).map(|e| e.distance).reduce(f64::max)
    }
}

fn power(m: &FockOperator, mut exp: usize) -> FockOperator {
    let mut base = m.clone();
    let mut acc = FockOperator::identity(m.dim());
    while exp > 0 {
        if exp & 1 == 1 {
            acc = &acc * &base;
        }
        base = &base * &base;
        exp >>= 1;
    }
    acc
}

fn diag_semigroup(d: &[f64], t: f64) -> FockOperator {
    FockOperator::from_diagonal(&d.iter().map(|x| (-t * x).exp()).collect::<Vec<_>>())
}

/// `‖e^{-β(L_κ + C^-_{κ,n})} - e^{-βH_ren}‖_max` for each `n`, plus a Trotter
/// product check at the largest `n`.
pub fn regularized_limit_probe(bundle: &HamiltonianBundle, split: &FactorizationMap, beta: f64, n_list: &[f64]) -> Result<LimitReport> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("n_list must be nonempty and strictly increasing".into()));
    }
    if n_list[0] < 1.0 {
        return Err(Error::InvalidArgument("clamp levels start at n = 1".into()));
    }
    if bundle.l_kappa.dim() != split.full_dim() {
        return Err(Error::Shape("bundle and split disagree on the basis".into()));
    }
    let target = Spectrum::of(&bundle.h_ren)?.semigroup(beta);
    let saturation = bundle.regularization.saturation();
    let mut entries = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let c = bundle.regularization.minus(n);
        let s = Spectrum::of(&(&bundle.l_kappa + &c))?.semigroup(beta);
        entries.push(LimitEntry { n, distance: s.distance(&target), saturated: n >= saturation });
    }

    let n = *n_list.last().expect("nonempty");
    let c_diag = bundle.regularization.minus_diagonal(n);
    let exact = Spectrum::of(&(&bundle.l_kappa + &FockOperator::from_diagonal(&c_diag)))?.semigroup(beta);
    let l_spec = Spectrum::of(&bundle.l_kappa)?;
    let trotter_error = |ell: usize| {
        let t = beta / ell as f64;
        let step = &l_spec.semigroup(t) * &diag_semigroup(&c_diag, t);
        power(&step, ell).distance(&exact)
    };
    let trotter = TrotterCheck { n, error_64: trotter_error(64), error_128: trotter_error(128) };
    Ok(LimitReport { beta, saturation, entries, trotter })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::enumerate_basis;
    use crate::grid::{build_grid, CutoffWindow, EnergyScheme, GridSpec, Layout};
    use crate::nelson::NelsonParams;
    use crate::split::kappa_split;

    fn setup(g: f64) -> (HamiltonianBundle, FactorizationMap) {
        let grid = build_grid(&GridSpec { dimension: 1, extent: 1.5, points_per_axis: 4, mass: 1.0, layout: Layout::Cartesian }).unwrap();
        let basis = enumerate_basis(4, 3).unwrap();
        let params = NelsonParams {
            g,
            m: 1.0,
            p: vec![0.3],
            window: CutoffWindow { kappa: 1.0, k_gross: 1.25, lambda: 1.5 },
            e_scheme: EnergyScheme::GridSum,
        };
        let split = kappa_split(&basis, &grid, 1.0).unwrap();
        (HamiltonianBundle::assemble(&basis, &grid, &params, &split).unwrap(), split)
    }

    #[test]
    fn zero_time() {
        let (b, s) = setup(1.0);
        let r = key_inequality(&b, &s, 0.0).unwrap();
        assert_eq!(r.scalar, 1.0);
        assert!(r.residual < 1e-15);
    }

    #[test]
    fn exact_on_product_space() {
        let (b, s) = setup(1.0);
        let r = key_inequality(&b, &s, 1.0).unwrap();
        assert!(r.holds(1e-8), "{r:?}");
        assert_eq!(r.product_dim, 100);
    }

    #[test]
    fn free_tail_scalar() {
        let (b, s) = setup(0.0);
        let r = key_inequality(&b, &s, 1.3).unwrap();
        assert!((r.scalar - (1.3 * b.e_window).exp()).abs() < 1e-14);
    }

    #[test]
    fn coupled_l_is_detected() {
        let (b, s) = setup(1.0);
        let l = product_l_kappa(&s, &b).unwrap();
        // a diagonal coupling between the factors: (N_low) ⊗ (N_high)
        let nl: Vec<f64> = (0..s.low_basis().dim()).map(|i| s.low_basis().total(i) as f64).collect();
        let nh: Vec<f64> = (0..s.high_basis().dim()).map(|i| s.high_basis().total(i) as f64).collect();
        let coupling = s.kron(&FockOperator::from_diagonal(&nl), &FockOperator::from_diagonal(&nh)).unwrap();
        let bad = &l + &coupling;
        let r = key_identity(&s, &bad, &b.h_local, &b.k_tail, 1.0).unwrap();
        assert!(r.residual > 1e-4);
    }

    #[test]
    fn limit_saturates() {
        let (b, s) = setup(1.0);
        let r = regularized_limit_probe(&b, &s, 1.0, &[1.0, 2.0, 4.0, 8.0, 16.0]).unwrap();
        assert!(r.saturated_distance().unwrap() < 1e-9);
        assert!(r.nonincreasing(), "{:?}", r.entries);
        assert!(r.trotter.first_order(), "{:?}", r.trotter);
    }
}
