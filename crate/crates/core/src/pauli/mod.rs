//! Binary qubit encoding of the rovibrational basis and Pauli expansion of
//! the Hamiltonian.

mod decompose;
mod encoding;
mod stats;
mod string;
mod sum;

pub use decompose::{
    factored_decomposition, factored_decomposition_on, pauli_decompose_factored, pauli_decompose_trace, pauli_decompose_trace_with, Decomposition,
    DEFAULT_DROP_CM1, MAX_TRACE_QUBITS,
};
pub use encoding::{QubitLayout, RotationMapping};
pub use stats::{
    fit_lq_vs_j, linear_fit, power_law_fit, q_power_term_count, register_filling_js, rotational_qubits, scaling_study,
    term_counts_vs_j, term_statistics, ScalingStudy, TermStatistics,
};
pub use string::PauliString;
pub use sum::{CutoffDirection, PauliHeader, PauliSum};

/// Header describing a qubit Hamiltonian built on `layout`.
pub fn header_for(layout: &QubitLayout) -> PauliHeader {
    PauliHeader {
        n_qubits: layout.n_qubits(),
        vmax: layout.vmax,
        j: layout.j,
        mapping: layout.mapping.tag().into(),
    }
}
