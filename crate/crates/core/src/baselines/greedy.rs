use rayon::prelude::*;

use crate::basis::RovibBasisState;
use crate::error::{Error, Result};
use crate::linalg::hermitian_eigen;
use crate::molecule::{DerivedFrame, MoleculeModel};
use crate::operators::asymmetric_top_solve;
use crate::qsci::{pick_by_overlap, solve_bases, BasisSet, PointSolution};
use crate::watson::{GroupMask, SparseHamiltonian, WatsonHamiltonian};

/// Energy improvements this close count as a tie, broken by basis index.
pub const GREEDY_TIE_CM1: f64 = 1e-10;

/// Basis grown one state at a time, each time taking the state that lowers
/// the tracked level the most.
#[derive(Debug, Clone)]
pub struct GreedyCurve {
    pub reference: RovibBasisState,
    /// In order of addition, the reference first.
    pub added: Vec<RovibBasisState>,
    /// Tracked level at basis size 1, 2, ...
    pub energies_cm1: Vec<f64>,
    /// Sizes at which a tie was broken by index.
    pub ties: Vec<usize>,
}

impl GreedyCurve {
    pub fn basis(&self, size: usize) -> BasisSet {
        BasisSet::from_states(self.added.iter().take(size).cloned())
    }
}

/// Level with the largest overlap with the first basis state.
fn tracked_energy(h: &SparseHamiltonian, indices: &[usize]) -> f64 {
    let eig = hermitian_eigen(&h.submatrix(indices));
    eig.values[pick_by_overlap(&eig, 0)]
}

fn grow(h: &SparseHamiltonian, reference: &RovibBasisState, max_size: usize) -> Result<GreedyCurve> {
    let space = &h.space;
    space.check(reference)?;
    let start = space.index(reference);
    let block = space.parity_block(space.parity(reference));
    if max_size == 0 || max_size > block.len() {
        return Err(Error::invalid(format!("greedy size {max_size} outside 1..={}", block.len())));
    }
    let mut chosen = vec![start];
    let mut energies = vec![h.get(start, start).re];
    let mut ties = Vec::new();
    while chosen.len() < max_size {
        let trials: Vec<(usize, f64)> = block
            .par_iter()
            .filter(|i| !chosen.contains(i))
            .map(|&i| {
                let mut trial = chosen.clone();
                trial.push(i);
                (i, tracked_energy(h, &trial))
            })
            .collect();
        // Candidates arrive in ascending index, so the first near-minimum wins.
        let lowest = trials.iter().map(|t| t.1).fold(f64::INFINITY, f64::min);
        let mut near = trials.iter().filter(|t| t.1 - lowest <= GREEDY_TIE_CM1);
        let &(best, energy) = near.next().expect("at least one candidate");
        if near.next().is_some() {
            ties.push(chosen.len() + 1);
        }
        chosen.push(best);
        energies.push(energy);
    }
    Ok(GreedyCurve {
        reference: reference.clone(),
        added: chosen.iter().map(|&i| space.state(i)).collect(),
        energies_cm1: energies,
        ties,
    })
}

/// Greedy curve within the J = 0 parity block of `reference`.
pub fn optimal_greedy(model: &MoleculeModel, frame: &DerivedFrame, vmax: usize, reference: &RovibBasisState, max_size: usize) -> Result<GreedyCurve> {
    let w = WatsonHamiltonian::new(model, frame, vmax, 0)?;
    grow(&w.build(GroupMask::FULL)?, reference, max_size)
}

/// Greedy bases for every reference at one size, combined as in the
/// sampling pipeline.
pub fn greedy_combined(model: &MoleculeModel, frame: &DerivedFrame, vmax: usize, references: &[RovibBasisState], size: usize) -> Result<PointSolution> {
    let w = WatsonHamiltonian::new(model, frame, vmax, 0)?;
    let h = w.build(GroupMask::FULL)?;
    let bases = references
        .iter()
        .map(|r| Ok(grow(&h, r, size)?.basis(size)))
        .collect::<Result<Vec<_>>>()?;
    solve_bases(&w, &asymmetric_top_solve(frame, 0), references, &bases, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsci::default_references;
    use crate::watson::dense_spectrum;

    fn setup() -> (MoleculeModel, DerivedFrame) {
        let model = MoleculeModel::h2o();
        let frame = DerivedFrame::new(&model).unwrap();
        (model, frame)
    }

    #[test]
    fn curve_starts_at_the_diagonal_and_never_rises() {
        let (model, frame) = setup();
        let w = WatsonHamiltonian::new(&model, &frame, 3, 0).unwrap();
        let h = w.build(GroupMask::FULL).unwrap();
        for r in default_references() {
            let curve = grow(&h, &r, 12).unwrap();
            let i = w.space().index(&r);
            assert_eq!(curve.energies_cm1[0], h.get(i, i).re);
            assert!(curve.energies_cm1.windows(2).all(|p| p[1] <= p[0] + 1e-9), "{r}");
            assert_eq!(curve.added.len(), 12);
        }
    }

    #[test]
    fn full_block_gives_exact_energy() {
        let (model, frame) = setup();
        let ground = RovibBasisState::vibrational(&[0, 0, 0]);
        let curve = optimal_greedy(&model, &frame, 3, &ground, 32).unwrap();
        let w = WatsonHamiltonian::new(&model, &frame, 3, 0).unwrap();
        let exact = dense_spectrum(&w.build(GroupMask::FULL).unwrap(), 1).unwrap().values[0];
        assert!((curve.energies_cm1[31] - exact).abs() < 1e-8);
        assert!(optimal_greedy(&model, &frame, 3, &ground, 33).is_err());
    }

    #[test]
    fn size_one_combination_equals_bare_reference_combination() {
        let (model, frame) = setup();
        let greedy = greedy_combined(&model, &frame, 3, &default_references(), 1).unwrap();
        let w = WatsonHamiltonian::new(&model, &frame, 3, 0).unwrap();
        let block = crate::qsci::subspace_hamiltonian(&w, &BasisSet::from_states(default_references())).unwrap();
        let direct = hermitian_eigen(&block);
        for (a, b) in greedy.combination.energies_cm1.iter().zip(&direct.values) {
            assert!((a - b).abs() < 1e-8);
        }
    }
}
