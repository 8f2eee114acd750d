//! Conversion constants. Everything inside the crate is in Hartree atomic
//! units except Hamiltonian coefficients, which are carried in cm^-1.

/// E_h per cm^-1.
pub const HARTREE_PER_WAVENUMBER: f64 = 4.556_335_252_912e-6;

/// Electron masses per unified atomic mass unit.
pub const ELECTRON_MASS_PER_DALTON: f64 = 1_822.888_486_209;

/// Femtoseconds per atomic unit of time.
pub const FEMTOSECONDS_PER_AU_TIME: f64 = 0.024_188_843_265_857_47;

pub fn wavenumber_to_hartree(x: f64) -> f64 {
    x * HARTREE_PER_WAVENUMBER
}

pub fn hartree_to_wavenumber(x: f64) -> f64 {
    x / HARTREE_PER_WAVENUMBER
}

pub fn femtoseconds_to_au(t: f64) -> f64 {
    t / FEMTOSECONDS_PER_AU_TIME
}

pub fn au_to_femtoseconds(t: f64) -> f64 {
    t * FEMTOSECONDS_PER_AU_TIME
}
