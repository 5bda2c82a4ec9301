//! Semigroups, cone checks and the inequality probes built on them.

pub mod bounds;
pub mod duhamel;
pub mod ergodicity;
pub mod key;
pub mod spectral;

pub use bounds::{operator_bounds_suite, BoundEntry, BoundsReport};
pub use duhamel::{duhamel, DuhamelReport};
pub use ergodicity::{ergodicity_probe, ErgodicityReport};
pub use key::{key_identity, key_inequality, regularized_limit_probe, KeyReport, LimitReport, TrotterCheck};
pub use spectral::{lambda_min, perron_frobenius, semigroup, SpectralReport, SpectralTolerances, Spectrum};
