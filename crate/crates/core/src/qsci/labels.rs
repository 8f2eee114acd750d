use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DVector;

use crate::basis::RovibBasisState;
use crate::operators::{RotorLabel, RotorLevel};
use crate::C64;

/// Overlaps closer than this make a label ambiguous.
pub const LABEL_AMBIGUITY: f64 = 1e-6;

/// Spectroscopic label v1v2v3 J_{KaKc} of a rovibrational level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelLabel {
    pub vib: Vec<u8>,
    pub rot: RotorLabel,
    /// |<v|<Phi_rot| phi>|^2 of the winning product state.
    pub overlap: f64,
    pub ambiguous: bool,
}

impl LevelLabel {
    pub fn vib_label(&self) -> String {
        self.vib.iter().map(|v| v.to_string()).collect()
    }
}

impl fmt::Display for LevelLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rot.j == 0 {
            write!(f, "{}", self.vib_label())
        } else {
            write!(f, "{} {}", self.vib_label(), self.rot)
        }
    }
}

/// <v|<Phi|phi> for every vibrational part v in `basis` and every rotor level.
fn product_overlaps(vector: &DVector<C64>, basis: &[RovibBasisState], rotor: &[RotorLevel]) -> Vec<(Vec<u8>, usize, f64)> {
    let mut by_vib: BTreeMap<&[u8], Vec<(usize, usize)>> = BTreeMap::new();
    for (pos, s) in basis.iter().enumerate() {
        by_vib.entry(&s.v).or_default().push(((s.k + s.j as i32) as usize, pos));
    }
    let mut out = Vec::new();
    for (vib, entries) in by_vib {
        for (l, level) in rotor.iter().enumerate() {
            let amp: C64 = entries.iter().map(|&(m, pos)| level.vector[m].conj() * vector[pos]).sum();
            out.push((vib.to_vec(), l, amp.norm_sqr()));
        }
    }
    out
}

fn best(candidates: Vec<(Vec<u8>, usize, f64)>, rotor: &[RotorLevel]) -> LevelLabel {
    let mut sorted = candidates;
    // Stable: equal overlaps keep basis order, which makes the choice deterministic.
    sorted.sort_by(|a, b| b.2.total_cmp(&a.2));
    let ambiguous = sorted.len() > 1 && sorted[0].2 - sorted[1].2 < LABEL_AMBIGUITY;
    let (vib, l, overlap) = sorted.swap_remove(0);
    LevelLabel {
        vib,
        rot: rotor[l].label,
        overlap,
        ambiguous,
    }
}

/// Label from the product state |v>|Phi_{J KaKc}> with the largest overlap.
/// `rotor` must be the rigid-rotor levels of the basis' J.
pub fn assign_labels(vector: &DVector<C64>, basis: &[RovibBasisState], rotor: &[RotorLevel]) -> LevelLabel {
    best(product_overlaps(vector, basis, rotor), rotor)
}

/// As `assign_labels` with the vibrational part fixed to `vib`.
pub fn rotor_label_for(vector: &DVector<C64>, basis: &[RovibBasisState], rotor: &[RotorLevel], vib: &[u8]) -> LevelLabel {
    let candidates: Vec<_> = product_overlaps(vector, basis, rotor).into_iter().filter(|c| c.0 == vib).collect();
    if candidates.is_empty() {
        return LevelLabel {
            vib: vib.to_vec(),
            rot: rotor[0].label,
            overlap: 0.0,
            ambiguous: true,
        };
    }
    best(candidates, rotor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::BasisSpace;
    use crate::molecule::{DerivedFrame, MoleculeModel};
    use crate::operators::asymmetric_top_solve;
    use crate::watson::{dense_spectrum, GroupMask, WatsonHamiltonian};

    fn frame() -> (MoleculeModel, DerivedFrame) {
        let model = MoleculeModel::h2o();
        let frame = DerivedFrame::new(&model).unwrap();
        (model, frame)
    }

    #[test]
    fn product_state_gets_its_own_label() {
        let (_, frame) = frame();
        let rotor = asymmetric_top_solve(&frame, 2);
        let space = BasisSpace::new(3, 1, 2, &[2]);
        let basis: Vec<RovibBasisState> = space.states().collect();
        for (l, level) in rotor.iter().enumerate() {
            let mut v = DVector::zeros(basis.len());
            for k in -2..=2i32 {
                let b = RovibBasisState::new(vec![1, 0, 1], 2, k).unwrap();
                v[space.index(&b)] = level.vector[(k + 2) as usize];
            }
            let label = assign_labels(&v, &basis, &rotor);
            assert_eq!(label.vib, [1, 0, 1]);
            assert_eq!(label.rot, rotor[l].label);
            assert!((label.overlap - 1.0).abs() < 1e-12 && !label.ambiguous);
        }
    }

    #[test]
    fn j0_ground_state_is_000() {
        let (model, frame) = frame();
        let w = WatsonHamiltonian::new(&model, &frame, 3, 0).unwrap();
        let eig = dense_spectrum(&w.build(GroupMask::FULL).unwrap(), 1).unwrap();
        let basis: Vec<RovibBasisState> = w.space().states().collect();
        let label = assign_labels(&eig.vector(0), &basis, &asymmetric_top_solve(&frame, 0));
        assert_eq!(label.to_string(), "000");
    }

    #[test]
    fn j1_levels_carry_each_rotor_label_once_per_band() {
        let (model, frame) = frame();
        let w = WatsonHamiltonian::new(&model, &frame, 3, 1).unwrap();
        let eig = dense_spectrum(&w.build(GroupMask::FULL).unwrap(), 15).unwrap();
        let basis: Vec<RovibBasisState> = w.space().states().collect();
        let rotor = asymmetric_top_solve(&frame, 1);
        let labels: Vec<String> = (0..15).map(|i| assign_labels(&eig.vector(i), &basis, &rotor).to_string()).collect();
        assert_eq!(labels[0], "000 1_01");
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for l in &labels {
            *counts.entry(l.as_str()).or_insert(0) += 1;
        }
        for band in ["000", "010", "020", "100", "001"] {
            for rot in ["1_01", "1_11", "1_10"] {
                assert_eq!(counts.get(format!("{band} {rot}").as_str()), Some(&1), "{labels:?}");
            }
        }
    }
}
