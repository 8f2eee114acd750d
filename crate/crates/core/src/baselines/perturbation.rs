use crate::basis::{BasisSpace, RovibBasisState};
use crate::error::{Error, Result};
use crate::molecule::{DerivedFrame, MoleculeModel};
use crate::pauli::QubitLayout;
use crate::trotter::Distribution;
use crate::watson::{GroupMask, SparseHamiltonian, TermGroup, WatsonHamiltonian};

/// Zeroth-order gaps below this (cm^-1) with a nonzero coupling are resonances.
pub const RESONANCE_LIMIT_CM1: f64 = 1.0;

/// Couplings at or below this (cm^-1) are roundoff.
const COUPLING_FLOOR_CM1: f64 = 1e-10;

/// Rayleigh-Schroedinger setup at J = 0 with the harmonic oscillator as H0.
#[derive(Debug, Clone)]
pub struct PerturbationProblem {
    space: BasisSpace,
    full: SparseHamiltonian,
    zeroth: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pt2Level {
    pub reference: RovibBasisState,
    pub zeroth_cm1: f64,
    pub first_cm1: f64,
    pub second_cm1: f64,
}

impl Pt2Level {
    pub fn energy_cm1(&self) -> f64 {
        self.zeroth_cm1 + self.first_cm1 + self.second_cm1
    }
}

impl PerturbationProblem {
    pub fn new(model: &MoleculeModel, frame: &DerivedFrame, vmax: usize) -> Result<Self> {
        let w = WatsonHamiltonian::new(model, frame, vmax, 0)?;
        let full = w.build(GroupMask::FULL)?;
        let zeroth = w.build(GroupMask::only(TermGroup::Harmonic))?.diagonal();
        PerturbationProblem::from_parts(full, zeroth)
    }

    /// H and the diagonal of H0 over the same space; H' = H - H0.
    pub fn from_parts(full: SparseHamiltonian, zeroth: Vec<f64>) -> Result<Self> {
        if zeroth.len() != full.dim() {
            return Err(Error::invalid(format!("H0 has {} entries for a space of {}", zeroth.len(), full.dim())));
        }
        Ok(PerturbationProblem {
            space: full.space.clone(),
            full,
            zeroth,
        })
    }

    pub fn space(&self) -> &BasisSpace {
        &self.space
    }

    fn index_of(&self, reference: &RovibBasisState) -> Result<usize> {
        self.space.check(reference)?;
        Ok(self.space.index(reference))
    }

    /// (i, H'_{ir}, E0_r - E0_i) for every coupled i != r.
    fn couplings(&self, r: usize) -> Result<Vec<(usize, f64, f64)>> {
        let row = self.full.triplets().partition_point(|t| t.0 < r);
        let mut out = Vec::new();
        for &(_, i, h) in self.full.triplets()[row..].iter().take_while(|t| t.0 == r) {
            if i == r || h.norm() <= COUPLING_FLOOR_CM1 {
                continue;
            }
            let gap = self.zeroth[r] - self.zeroth[i];
            if gap.abs() < RESONANCE_LIMIT_CM1 {
                return Err(Error::Resonance {
                    state: self.space.state(r).to_string(),
                    other: self.space.state(i).to_string(),
                    denominator: gap,
                });
            }
            out.push((i, h.norm(), gap));
        }
        Ok(out)
    }

    pub fn pt2(&self, reference: &RovibBasisState) -> Result<Pt2Level> {
        let r = self.index_of(reference)?;
        let second = self.couplings(r)?.iter().map(|&(_, h, gap)| h * h / gap).sum();
        Ok(Pt2Level {
            reference: reference.clone(),
            zeroth_cm1: self.zeroth[r],
            first_cm1: self.full.get(r, r).re - self.zeroth[r],
            second_cm1: second,
        })
    }

    /// |<i|psi1>|^2 for the first-order wavefunction with coefficient 1 on
    /// the reference; the reference itself carries weight 1.
    pub fn first_order_weights(&self, reference: &RovibBasisState) -> Result<Vec<(usize, f64)>> {
        let r = self.index_of(reference)?;
        let mut out = vec![(r, 1.0)];
        out.extend(self.couplings(r)?.into_iter().map(|(i, h, gap)| (i, (h / gap).powi(2))));
        Ok(out)
    }
}

pub fn pt2_energies(model: &MoleculeModel, frame: &DerivedFrame, vmax: usize, references: &[RovibBasisState]) -> Result<Vec<Pt2Level>> {
    let problem = PerturbationProblem::new(model, frame, vmax)?;
    references.iter().map(|r| problem.pt2(r)).collect()
}

/// Unnormalized first-order distribution over the J = 0 qubit register.
pub fn pt1_distribution(model: &MoleculeModel, frame: &DerivedFrame, vmax: usize, reference: &RovibBasisState) -> Result<Distribution> {
    let problem = PerturbationProblem::new(model, frame, vmax)?;
    let layout = QubitLayout::new(model.n_modes(), vmax, 0)?;
    let weights = problem
        .first_order_weights(reference)?
        .into_iter()
        .map(|(i, p)| Ok((layout.encode(&problem.space.state(i))?, p)))
        .collect::<Result<Vec<_>>>()?;
    Distribution::from_weights(&layout, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::BasisSpace;
    use crate::qsci::default_references;
    use crate::C64;
    use nalgebra::DMatrix;

    fn setup() -> (MoleculeModel, DerivedFrame) {
        let model = MoleculeModel::h2o();
        let frame = DerivedFrame::new(&model).unwrap();
        (model, frame)
    }

    #[test]
    fn pt2_matches_dense_resolvent() {
        let (model, frame) = setup();
        let w = WatsonHamiltonian::new(&model, &frame, 3, 0).unwrap();
        let h = w.build(GroupMask::FULL).unwrap().to_dense();
        let h0 = w.build(GroupMask::only(TermGroup::Harmonic)).unwrap().to_dense();
        let perturbation = &h - &h0;
        let problem = PerturbationProblem::new(&model, &frame, 3).unwrap();
        for reference in default_references() {
            let r = w.space().index(&reference);
            let e0 = h0[(r, r)].re;
            let resolvent = DMatrix::from_fn(h.nrows(), h.nrows(), |i, j| {
                if i == j && i != r {
                    C64::new(1.0 / (e0 - h0[(i, i)].re), 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            });
            let second = (perturbation.row(r) * resolvent * perturbation.column(r))[(0, 0)].re;
            let want = e0 + perturbation[(r, r)].re + second;
            let got = problem.pt2(&reference).unwrap();
            assert!((got.energy_cm1() - want).abs() < 1e-8, "{reference}: {} vs {want}", got.energy_cm1());
        }
    }

    #[test]
    fn zero_perturbation_gives_zeroth_order() {
        let space = BasisSpace::new(3, 2, 0, &[2]);
        let zeroth: Vec<f64> = space.states().map(|s| s.v.iter().map(|&v| 1000.0 * (v as f64 + 0.5)).sum::<f64>() + s.v[1] as f64 * 7.0).collect();
        let triplets = zeroth.iter().enumerate().map(|(i, &e)| (i, i, C64::new(e, 0.0))).collect();
        let full = SparseHamiltonian::from_triplets(space.clone(), GroupMask::FULL, triplets);
        let problem = PerturbationProblem::from_parts(full, zeroth.clone()).unwrap();
        let reference = RovibBasisState::vibrational(&[1, 0, 1]);
        let level = problem.pt2(&reference).unwrap();
        assert_eq!(level.energy_cm1(), zeroth[space.index(&reference)]);
        assert_eq!(problem.first_order_weights(&reference).unwrap(), [(space.index(&reference), 1.0)]);
    }

    #[test]
    fn ground_state_second_order_is_negative() {
        let (model, frame) = setup();
        let levels = pt2_energies(&model, &frame, 3, &default_references()).unwrap();
        assert!(levels[0].second_cm1 < 0.0);
    }

    #[test]
    fn resonant_coupling_is_rejected() {
        let space = BasisSpace::new(3, 1, 0, &[2]);
        let zeroth = vec![100.0; space.dim()];
        let triplets = vec![(0, 0, C64::new(100.0, 0.0)), (0, 1, C64::new(5.0, 0.0)), (1, 0, C64::new(5.0, 0.0))];
        let full = SparseHamiltonian::from_triplets(space.clone(), GroupMask::FULL, triplets);
        let problem = PerturbationProblem::from_parts(full, zeroth).unwrap();
        assert!(matches!(problem.pt2(&space.state(0)), Err(Error::Resonance { .. })));
    }

    #[test]
    fn first_order_distribution_is_unnormalized() {
        let (model, frame) = setup();
        let reference = RovibBasisState::vibrational(&[0, 1, 0]);
        let d = pt1_distribution(&model, &frame, 3, &reference).unwrap();
        let layout = QubitLayout::new(3, 3, 0).unwrap();
        assert_eq!(d.probability(layout.encode(&reference).unwrap()), 1.0);
        assert!(d.total() > 1.0);
        assert!(d.iter().all(|(i, _)| d.state(i).parity(&[2]) == 1));
    }
}
