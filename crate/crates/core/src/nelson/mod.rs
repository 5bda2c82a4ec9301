//! Fiber Hamiltonians at fixed total momentum and their pieces.

pub mod cross;
pub mod gross;
pub mod hamiltonian;

pub use cross::{cross_term, lower_clamp, upper_clamp, ClampAudit, CrossTerm};
pub use gross::{
    form_bound_check, form_difference, form_matrix, gross_transform, guarded_commutator_residual, reference_operator,
    FormBoundReport, GrossBundle,
};
pub use hamiltonian::{
    assemble_fiber_hamiltonian, assemble_local, assemble_tail, decomposition_residual, grid_energies,
    renormalized_hamiltonian, tail_operator, DecompositionReport, Energies, HamiltonianBundle, NelsonParams,
};
