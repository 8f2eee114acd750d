//! Molecular parameters and the quantities derived from the equilibrium frame.

mod frame;
mod model;

pub use frame::{
    a_matrices, coriolis_coefficients, equilibrium_inertia, mu_expansion, DerivedFrame,
    InertiaFrame, MuPolynomial, MAX_MU_ORDER, MU_SERIES,
};
pub use model::{project_normal_modes, Atom, ForceConstant, MoleculeModel};
