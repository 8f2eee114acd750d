use std::collections::HashMap;

use crate::basis::RovibBasisState;
use crate::trotter::Distribution;

/// Ordered, duplicate-free set of basis states sharing one J.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BasisSet {
    states: Vec<RovibBasisState>,
    members: HashMap<RovibBasisState, usize>,
}

impl BasisSet {
    pub fn new() -> Self {
        BasisSet::default()
    }

    /// Keeps the first occurrence of each state.
    pub fn from_states(states: impl IntoIterator<Item = RovibBasisState>) -> Self {
        let mut set = BasisSet::new();
        for s in states {
            set.insert(s);
        }
        set
    }

    /// Returns false if the state was already present.
    pub fn insert(&mut self, s: RovibBasisState) -> bool {
        if self.members.contains_key(&s) {
            return false;
        }
        self.members.insert(s.clone(), self.states.len());
        self.states.push(s);
        true
    }

    pub fn contains(&self, s: &RovibBasisState) -> bool {
        self.members.contains_key(s)
    }

    pub fn position(&self, s: &RovibBasisState) -> Option<usize> {
        self.members.get(s).copied()
    }

    pub fn states(&self) -> &[RovibBasisState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn j(&self) -> Option<u32> {
        self.states.first().map(|s| s.j)
    }

    pub fn is_subset_of(&self, other: &BasisSet) -> bool {
        self.states.iter().all(|s| other.contains(s))
    }
}

/// `carry` followed by the states of `d` with p > epsilon, most probable
/// first and ties by qubit index.
pub fn select_basis(d: &Distribution, epsilon: f64, carry: &BasisSet) -> BasisSet {
    let mut picked: Vec<(u64, f64)> = d.iter().filter(|&(_, p)| p > epsilon).collect();
    picked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut out = carry.clone();
    for (i, _) in picked {
        out.insert(d.state(i));
    }
    out
}

pub fn union_basis<'a>(sets: impl IntoIterator<Item = &'a BasisSet>) -> BasisSet {
    BasisSet::from_states(sets.into_iter().flat_map(|s| s.states().iter().cloned()))
}

/// Every vibrational part of a J = 0 set combined with K = -J..J.
pub fn extend_to_j(omega: &BasisSet, j: u32) -> BasisSet {
    let ks = -(j as i32)..=j as i32;
    BasisSet::from_states(omega.states().iter().flat_map(|s| ks.clone().map(move |k| s.with_k(j, k))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::QubitLayout;

    fn vib(v: [u8; 3]) -> RovibBasisState {
        RovibBasisState::vibrational(&v)
    }

    fn dist(entries: &[([u8; 3], f64)]) -> Distribution {
        let layout = QubitLayout::new(3, 3, 0).unwrap();
        Distribution::from_probabilities(&layout, entries.iter().map(|(v, p)| (layout.encode(&vib(*v)).unwrap(), *p))).unwrap()
    }

    #[test]
    fn delta_gives_singleton() {
        let omega = select_basis(&dist(&[([0, 0, 0], 1.0)]), 1e-4, &BasisSet::new());
        assert_eq!(omega.states(), &[vib([0, 0, 0])]);
    }

    #[test]
    fn threshold_and_order() {
        let d = dist(&[([0, 0, 0], 0.6), ([0, 1, 0], 0.2), ([2, 0, 0], 0.2 - 5e-5), ([0, 2, 0], 5e-5)]);
        let omega = select_basis(&d, 1e-4, &BasisSet::new());
        assert_eq!(omega.states(), &[vib([0, 0, 0]), vib([0, 1, 0]), vib([2, 0, 0])]);
        let carry = BasisSet::from_states([vib([1, 0, 0]), vib([0, 1, 0])]);
        let omega = select_basis(&d, 1e-4, &carry);
        assert_eq!(omega.states(), &[vib([1, 0, 0]), vib([0, 1, 0]), vib([0, 0, 0]), vib([2, 0, 0])]);
    }

    #[test]
    fn superset_carry_is_unchanged() {
        let d = dist(&[([0, 0, 0], 0.5), ([0, 1, 0], 0.5)]);
        let carry = BasisSet::from_states([vib([0, 1, 0]), vib([3, 3, 3]), vib([0, 0, 0])]);
        assert_eq!(select_basis(&d, 1e-4, &carry), carry);
    }

    #[test]
    fn unions() {
        let a = BasisSet::from_states([vib([0, 0, 0]), vib([0, 1, 0])]);
        let b = BasisSet::from_states([vib([1, 0, 0]), vib([2, 0, 0]), vib([0, 0, 2])]);
        assert_eq!(union_basis([&a, &b]).len(), 5);
        assert_eq!(union_basis([&a, &a]), a);
        assert!(a.is_subset_of(&union_basis([&b, &a])));
    }

    #[test]
    fn extension_to_higher_j() {
        let omega = BasisSet::from_states((0..10).map(|i| vib([i % 4, i / 4, 0])));
        let ext = extend_to_j(&omega, 1);
        assert_eq!(ext.len(), 30);
        assert_eq!(ext.j(), Some(1));
        assert_eq!(extend_to_j(&omega, 0), omega);
        let parities: Vec<i8> = (-1..=1).map(|k| ext.states()[(k + 1) as usize].parity(&[2])).collect();
        assert_eq!(parities, [-1, 1, -1]);
    }
}
