use std::collections::BTreeMap;
use std::fmt;

use crate::molecule::{DerivedFrame, MoleculeModel, MuPolynomial};
use crate::operators::{Axis, ModeOp};
use crate::units::HARTREE_PER_WAVENUMBER;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TermGroup {
    RigidRotor,
    Harmonic,
    Anharmonic,
    VibCoriolis,
    Rovib,
}

impl TermGroup {
    pub const ALL: [TermGroup; 5] = [
        TermGroup::RigidRotor,
        TermGroup::Harmonic,
        TermGroup::Anharmonic,
        TermGroup::VibCoriolis,
        TermGroup::Rovib,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            TermGroup::RigidRotor => "RR",
            TermGroup::Harmonic => "HO",
            TermGroup::Anharmonic => "ANHARM",
            TermGroup::VibCoriolis => "VIBCOR",
            TermGroup::Rovib => "ROVIB",
        }
    }

    pub fn from_tag(tag: &str) -> Option<TermGroup> {
        let upper = tag.trim().to_ascii_uppercase();
        TermGroup::ALL.into_iter().find(|g| g.tag() == upper)
    }

    fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

impl fmt::Display for TermGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Subset of term groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GroupMask(u8);

impl GroupMask {
    pub const NONE: GroupMask = GroupMask(0);
    pub const FULL: GroupMask = GroupMask(0b11111);

    pub fn only(group: TermGroup) -> Self {
        GroupMask(group.bit())
    }

    pub fn with(self, group: TermGroup) -> Self {
        GroupMask(self.0 | group.bit())
    }

    pub fn without(self, group: TermGroup) -> Self {
        GroupMask(self.0 & !group.bit())
    }

    pub fn contains(self, group: TermGroup) -> bool {
        self.0 & group.bit() != 0
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn from_bits(bits: u8) -> Option<Self> {
        (bits <= Self::FULL.0).then_some(GroupMask(bits))
    }

    /// "RR+HO+ANHARM", "FULL" or "ALL".
    pub fn parse(text: &str) -> Option<Self> {
        let t = text.trim();
        if t.eq_ignore_ascii_case("full") || t.eq_ignore_ascii_case("all") {
            return Some(Self::FULL);
        }
        t.split(['+', ',']).try_fold(Self::NONE, |m, part| Some(m.with(TermGroup::from_tag(part)?)))
    }
}

impl fmt::Display for GroupMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == Self::FULL {
            return f.write_str("FULL");
        }
        let tags: Vec<&str> = TermGroup::ALL
            .into_iter()
            .filter(|g| self.contains(*g))
            .map(TermGroup::tag)
            .collect();
        if tags.is_empty() {
            f.write_str("NONE")
        } else {
            f.write_str(&tags.join("+"))
        }
    }
}

/// coefficient_cm1 * (rotation word) * prod_k (word on mode k).
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorTerm {
    pub group: TermGroup,
    pub coefficient_cm1: f64,
    pub rotation: Vec<Axis>,
    pub modes: Vec<Vec<ModeOp>>,
}

type TermKey = (TermGroup, Vec<Axis>, Vec<Vec<ModeOp>>);

/// A product of single-mode factors, written left to right.
#[derive(Debug, Clone)]
struct VibWord {
    coeff: f64,
    factors: Vec<(usize, ModeOp)>,
}

struct TermCollector {
    n_modes: usize,
    terms: BTreeMap<TermKey, f64>,
}

impl TermCollector {
    fn add(&mut self, group: TermGroup, coeff_cm1: f64, rotation: Vec<Axis>, factors: &[(usize, ModeOp)]) {
        if coeff_cm1 == 0.0 {
            return;
        }
        let mut modes = vec![Vec::new(); self.n_modes];
        for &(k, op) in factors {
            modes[k].push(op);
        }
        *self.terms.entry((group, rotation, modes)).or_insert(0.0) += coeff_cm1;
    }
}

/// Hartree coefficients of pi_alpha = sum_{k != l} zeta^a_kl sqrt(w_l/w_k) q_k p_l.
fn vibrational_angular_momentum(frame: &DerivedFrame, omega_au: &[f64], alpha: usize) -> Vec<VibWord> {
    let n = omega_au.len();
    let mut out = Vec::new();
    for k in 0..n {
        for l in 0..n {
            let z = frame.zeta[alpha][(k, l)];
            if k != l && z != 0.0 {
                out.push(VibWord {
                    coeff: z * (omega_au[l] / omega_au[k]).sqrt(),
                    factors: vec![(k, ModeOp::Q), (l, ModeOp::P)],
                });
            }
        }
    }
    out
}

/// mu_{alpha beta} as words in q_k = sqrt(w_k) Q_k.
fn mu_words(mu: &MuPolynomial, omega_au: &[f64], alpha: usize, beta: usize) -> Vec<VibWord> {
    mu.terms
        .iter()
        .filter_map(|(modes, c)| {
            let v = c[(alpha, beta)];
            (v != 0.0).then(|| VibWord {
                coeff: v / modes.iter().map(|&m| omega_au[m].sqrt()).product::<f64>(),
                factors: modes.iter().map(|&m| (m, ModeOp::Q)).collect(),
            })
        })
        .collect()
}

fn concat(words: &[&VibWord]) -> VibWord {
    VibWord {
        coeff: words.iter().map(|w| w.coeff).product(),
        factors: words.iter().flat_map(|w| w.factors.iter().copied()).collect(),
    }
}

/// Symbolic Watson Hamiltonian: every operator product kept in its written order.
pub fn watson_terms(model: &MoleculeModel, frame: &DerivedFrame) -> Vec<OperatorTerm> {
    let n = model.n_modes();
    let to_cm1 = 1.0 / HARTREE_PER_WAVENUMBER;
    let omega_au: Vec<f64> = model.omega_cm1.iter().map(|w| w * HARTREE_PER_WAVENUMBER).collect();
    let mut c = TermCollector {
        n_modes: n,
        terms: BTreeMap::new(),
    };

    let axes = |i: usize| Axis::from_index(i);
    let pi: Vec<Vec<VibWord>> = (0..3).map(|a| vibrational_angular_momentum(frame, &omega_au, a)).collect();

    for alpha in 0..3 {
        for beta in 0..3 {
            // 1/2 J mu_0 J
            for w in mu_words(&frame.mu[0], &omega_au, alpha, beta) {
                c.add(TermGroup::RigidRotor, 0.5 * w.coeff * to_cm1, vec![axes(alpha), axes(beta)], &w.factors);
            }
            // 1/2 J mu_l J, l = 1..4
            for mu in &frame.mu[1..=4] {
                for w in mu_words(mu, &omega_au, alpha, beta) {
                    c.add(TermGroup::Rovib, 0.5 * w.coeff * to_cm1, vec![axes(alpha), axes(beta)], &w.factors);
                }
            }
            // -J mu_l pi, l = 0..3
            for mu in &frame.mu[0..=3] {
                for m in mu_words(mu, &omega_au, alpha, beta) {
                    for p in &pi[beta] {
                        let w = concat(&[&m, p]);
                        c.add(TermGroup::Rovib, -w.coeff * to_cm1, vec![axes(alpha)], &w.factors);
                    }
                }
            }
            // 1/2 pi mu_l pi, l = 0..2
            for mu in &frame.mu[0..=2] {
                for m in mu_words(mu, &omega_au, alpha, beta) {
                    for pa in &pi[alpha] {
                        for pb in &pi[beta] {
                            let w = concat(&[pa, &m, pb]);
                            c.add(TermGroup::VibCoriolis, 0.5 * w.coeff * to_cm1, Vec::new(), &w.factors);
                        }
                    }
                }
            }
        }
    }
    // -1/8 sum_l tr mu_l
    for mu in &frame.mu {
        for alpha in 0..3 {
            for w in mu_words(mu, &omega_au, alpha, alpha) {
                c.add(TermGroup::VibCoriolis, -0.125 * w.coeff * to_cm1, Vec::new(), &w.factors);
            }
        }
    }

    for (k, w) in model.omega_cm1.iter().enumerate() {
        c.add(TermGroup::Harmonic, 0.5 * w, Vec::new(), &[(k, ModeOp::P), (k, ModeOp::P)]);
        c.add(TermGroup::Harmonic, 0.5 * w, Vec::new(), &[(k, ModeOp::Q), (k, ModeOp::Q)]);
    }
    for (fcs, norm) in [(&model.cubic, 6.0), (&model.quartic, 24.0)] {
        for fc in fcs {
            let factors: Vec<(usize, ModeOp)> = fc.modes.iter().map(|&m| (m, ModeOp::Q)).collect();
            c.add(TermGroup::Anharmonic, fc.multiplicity() / norm * fc.value_cm1, Vec::new(), &factors);
        }
    }

    c.terms
        .into_iter()
        .filter(|(_, v)| *v != 0.0)
        .map(|((group, rotation, modes), coefficient_cm1)| OperatorTerm {
            group,
            coefficient_cm1,
            rotation,
            modes,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn terms() -> Vec<OperatorTerm> {
        let m = MoleculeModel::h2o();
        let f = DerivedFrame::new(&m).unwrap();
        watson_terms(&m, &f)
    }

    #[test]
    fn mask_parsing() {
        let m = GroupMask::parse("RR+HO").unwrap();
        assert!(m.contains(TermGroup::RigidRotor) && m.contains(TermGroup::Harmonic));
        assert!(!m.contains(TermGroup::Rovib));
        assert_eq!(m.to_string(), "RR+HO");
        assert_eq!(GroupMask::parse("full"), Some(GroupMask::FULL));
        assert_eq!(GroupMask::parse("RR+XX"), None);
        assert_eq!(GroupMask::FULL.without(TermGroup::Rovib).to_string(), "RR+HO+ANHARM+VIBCOR");
    }

    #[test]
    fn harmonic_terms() {
        let ho: Vec<_> = terms().into_iter().filter(|t| t.group == TermGroup::Harmonic).collect();
        assert_eq!(ho.len(), 6);
        assert!(ho.iter().all(|t| t.rotation.is_empty()));
    }

    #[test]
    fn anharmonic_multiplicities() {
        let t = terms();
        let g133 = t
            .iter()
            .find(|t| t.group == TermGroup::Anharmonic && t.modes == vec![vec![ModeOp::Q], vec![], vec![ModeOp::Q; 2]])
            .unwrap();
        assert!((g133.coefficient_cm1 - 3.0 / 6.0 * -1822.17).abs() < 1e-12);
        let f1133 = t
            .iter()
            .find(|t| t.group == TermGroup::Anharmonic && t.modes == vec![vec![ModeOp::Q; 2], vec![], vec![ModeOp::Q; 2]])
            .unwrap();
        assert!((f1133.coefficient_cm1 - 6.0 / 24.0 * 764.90).abs() < 1e-12);
    }
}
