//! First-order Trotterized time evolution of basis states on a statevector
//! and the measurement distributions derived from it.

mod distribution;
mod statevector;

use std::fmt;
use std::str::FromStr;

pub use distribution::{exact_distribution, parity_postselect, sample_shots, Distribution, Provenance, PADDED_MASS_TOL};
pub use statevector::{apply_pauli_rotation, prepare_basis_state, Statevector};

use crate::error::{Error, Result};
use crate::pauli::{PauliString, PauliSum};
use crate::units::HARTREE_PER_WAVENUMBER;

/// Order of the exponentials inside one Trotter step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub enum TermOrder {
    /// Largest |h| first, ties in canonical string order.
    #[serde(rename = "descending")]
    DescendingMagnitude,
    #[serde(rename = "ascending")]
    AscendingMagnitude,
    /// Canonical string order.
    #[default]
    #[serde(rename = "lexicographic")]
    Lexicographic,
}

impl TermOrder {
    pub fn tag(self) -> &'static str {
        match self {
            TermOrder::DescendingMagnitude => "descending",
            TermOrder::AscendingMagnitude => "ascending",
            TermOrder::Lexicographic => "lexicographic",
        }
    }
}

impl fmt::Display for TermOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for TermOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [TermOrder::DescendingMagnitude, TermOrder::AscendingMagnitude, TermOrder::Lexicographic]
            .into_iter()
            .find(|o| o.tag() == s)
            .ok_or_else(|| Error::invalid(format!("unknown term order {s:?}")))
    }
}

/// The ordered rotations of one Trotter step: every non-identity term with
/// |h| > lambda. The identity only contributes a global phase.
#[derive(Debug, Clone, PartialEq)]
pub struct TrotterStep {
    n_qubits: usize,
    lambda_cm1: f64,
    order: TermOrder,
    terms: Vec<(f64, PauliString)>,
}

impl TrotterStep {
    pub fn new(sum: &PauliSum, lambda_cm1: f64, order: TermOrder) -> Result<Self> {
        if lambda_cm1.is_nan() || lambda_cm1 < 0.0 {
            return Err(Error::invalid(format!("cutoff must be non-negative, got {lambda_cm1}")));
        }
        // Terms arrive in canonical order, so a stable sort keeps it as the tie-break.
        let mut terms: Vec<(f64, PauliString)> = sum.iter().copied().filter(|(h, p)| h.abs() > lambda_cm1 && !p.is_identity()).collect();
        match order {
            TermOrder::DescendingMagnitude => terms.sort_by(|a, b| b.0.abs().total_cmp(&a.0.abs())),
            TermOrder::AscendingMagnitude => terms.sort_by(|a, b| a.0.abs().total_cmp(&b.0.abs())),
            TermOrder::Lexicographic => {}
        }
        Ok(TrotterStep {
            n_qubits: sum.n_qubits(),
            lambda_cm1,
            order,
            terms,
        })
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn order(&self) -> TermOrder {
        self.order
    }

    pub fn lambda_cm1(&self) -> f64 {
        self.lambda_cm1
    }

    /// The applied sequence as "h string" lines, for run manifests.
    pub fn order_log(&self) -> Vec<String> {
        self.terms.iter().map(|(h, p)| format!("{h} {p}")).collect()
    }

    /// U^n_steps |s0> with U the product of exp(-i tau h_k P_k), tau in a.u.
    pub fn evolve(&self, s0: &Statevector, tau_au: f64, n_steps: usize) -> Result<Statevector> {
        if tau_au.is_nan() || tau_au < 0.0 {
            return Err(Error::invalid(format!("time step must be non-negative, got {tau_au}")));
        }
        if s0.n_qubits() != self.n_qubits {
            return Err(Error::invalid(format!("statevector has {} qubits, Hamiltonian {}", s0.n_qubits(), self.n_qubits)));
        }
        let mut s = s0.clone();
        for _ in 0..n_steps {
            for (h, p) in &self.terms {
                apply_pauli_rotation(&mut s, p, tau_au * h * HARTREE_PER_WAVENUMBER);
            }
        }
        Ok(s)
    }
}

pub fn trotter_evolve(s0: &Statevector, sum: &PauliSum, tau_au: f64, n_steps: usize, lambda_cm1: f64, order: TermOrder) -> Result<Statevector> {
    TrotterStep::new(sum, lambda_cm1, order)?.evolve(s0, tau_au, n_steps)
}
