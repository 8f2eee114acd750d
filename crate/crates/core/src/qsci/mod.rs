//! Sampling-based subspace diagonalization: basis selection from Trotter
//! distributions, per-reference subspace solves and their combination.

mod basis_set;
mod labels;
mod pipeline;
mod subspace;

pub use basis_set::{extend_to_j, select_basis, union_basis, BasisSet};
pub use labels::{assign_labels, rotor_label_for, LevelLabel, LABEL_AMBIGUITY};
pub use pipeline::{
    default_references, run_pipeline, sample_bases, solve_bases, solve_shared_basis, ExactLevels, LevelResult, PipelineConfig, PipelineRun, PointResult, PointSolution,
    Schedule, ScheduleKind, SchedulePoint, DEFAULT_REFERENCES,
};
pub use subspace::{
    assign_levels, combine_references, pick_by_manifold, pick_by_overlap, solve_subspace, subspace_hamiltonian, Combination, PickedState,
    CANONICAL_CUTOFF, DENSE_SUBSPACE_LIMIT,
};
