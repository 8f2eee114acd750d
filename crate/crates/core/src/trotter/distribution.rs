use std::collections::BTreeMap;
use std::io::Write;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution as _;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::statevector::Statevector;
use crate::basis::RovibBasisState;
use crate::error::{Error, Result};
use crate::pauli::QubitLayout;

/// Probability mass this far from one counts as lost rather than roundoff.
pub const PADDED_MASS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Exact,
    Shots { n_shot: u64, seed: u64 },
    /// Unnormalized first-order perturbative weights.
    Perturbative,
}

/// Probabilities over physical basis states, keyed by qubit index.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    layout: QubitLayout,
    probs: BTreeMap<u64, f64>,
    counts: Option<BTreeMap<u64, u64>>,
    provenance: Provenance,
    parity_filtered: bool,
    padded_mass: f64,
}

impl Distribution {
    /// Builds an exact distribution from explicit probabilities; they must
    /// sit on physical states and sum to one.
    pub fn from_probabilities(layout: &QubitLayout, probs: impl IntoIterator<Item = (u64, f64)>) -> Result<Self> {
        let d = Distribution::collect(layout, probs, Provenance::Exact)?;
        let total = d.total();
        if (total - 1.0).abs() > PADDED_MASS_TOL {
            return Err(Error::invalid(format!("probabilities sum to {total}")));
        }
        Ok(d)
    }

    /// Nonnegative weights with no normalization, e.g. |c|^2 of a
    /// first-order wavefunction with coefficient 1 on the reference.
    pub fn from_weights(layout: &QubitLayout, weights: impl IntoIterator<Item = (u64, f64)>) -> Result<Self> {
        Distribution::collect(layout, weights, Provenance::Perturbative)
    }

    fn collect(layout: &QubitLayout, probs: impl IntoIterator<Item = (u64, f64)>, provenance: Provenance) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, p) in probs {
            if layout.decode(i).is_none() {
                return Err(Error::invalid(format!("index {i} is not a physical basis state")));
            }
            if !(p >= 0.0 && p.is_finite()) {
                return Err(Error::invalid(format!("probability {p} at index {i}")));
            }
            if p > 0.0 {
                *map.entry(i).or_insert(0.0) += p;
            }
        }
        Ok(Distribution {
            layout: layout.clone(),
            probs: map,
            counts: None,
            provenance,
            parity_filtered: false,
            padded_mass: 0.0,
        })
    }

    pub fn layout(&self) -> &QubitLayout {
        &self.layout
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn parity_filtered(&self) -> bool {
        self.parity_filtered
    }

    /// Mass found on padding indices before it was dropped.
    pub fn padded_mass(&self) -> f64 {
        self.padded_mass
    }

    pub fn probability(&self, index: u64) -> f64 {
        self.probs.get(&index).copied().unwrap_or(0.0)
    }

    /// Nonzero entries in ascending index order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.probs.iter().map(|(&i, &p)| (i, p))
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }

    pub fn counts(&self) -> Option<&BTreeMap<u64, u64>> {
        self.counts.as_ref()
    }

    pub fn state(&self, index: u64) -> RovibBasisState {
        self.layout.decode(index).expect("distribution holds physical indices only")
    }

    /// Lines "index v1 v2 v3 K probability".
    pub fn write_dump<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (i, p) in self.iter() {
            let b = self.state(i);
            write!(w, "{i}")?;
            for v in &b.v {
                write!(w, " {v}")?;
            }
            writeln!(w, " {} {p:.12e}", b.k)?;
        }
        Ok(())
    }
}

/// |amplitude|^2 over physical states. Fails if more than roundoff sits on
/// padding indices.
pub fn exact_distribution(s: &Statevector, layout: &QubitLayout) -> Result<Distribution> {
    if s.n_qubits() != layout.n_qubits() {
        return Err(Error::invalid(format!("statevector has {} qubits, layout {}", s.n_qubits(), layout.n_qubits())));
    }
    let mut probs = BTreeMap::new();
    let mut padded_mass = 0.0;
    for (i, a) in s.amplitudes().iter().enumerate() {
        let p = a.norm_sqr();
        if p == 0.0 {
            continue;
        }
        if layout.decode(i as u64).is_some() {
            probs.insert(i as u64, p);
        } else {
            padded_mass += p;
        }
    }
    if padded_mass > PADDED_MASS_TOL {
        return Err(Error::invalid(format!(
            "{padded_mass:.3e} probability on padding states; a truncated qubit Hamiltonian only keeps the padding decoupled when every register is full (vmax + 1 a power of two)"
        )));
    }
    Ok(Distribution {
        layout: layout.clone(),
        probs,
        counts: None,
        provenance: Provenance::Exact,
        parity_filtered: false,
        padded_mass,
    })
}

/// Multinomial draw of `n_shot` outcomes, normalized to frequencies.
pub fn sample_shots(d: &Distribution, n_shot: u64, seed: u64) -> Result<Distribution> {
    if n_shot == 0 {
        return Err(Error::invalid("at least one shot is required"));
    }
    if d.provenance != Provenance::Exact {
        return Err(Error::invalid("shots are drawn from an exact distribution"));
    }
    let (indices, weights): (Vec<u64>, Vec<f64>) = d.iter().unzip();
    let sampler = WeightedIndex::new(&weights).map_err(|e| Error::invalid(format!("cannot sample: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    for _ in 0..n_shot {
        *counts.entry(indices[sampler.sample(&mut rng)]).or_insert(0) += 1;
    }
    Ok(Distribution {
        layout: d.layout.clone(),
        probs: counts.iter().map(|(&i, &c)| (i, c as f64 / n_shot as f64)).collect(),
        counts: Some(counts),
        provenance: Provenance::Shots { n_shot, seed },
        parity_filtered: d.parity_filtered,
        padded_mass: d.padded_mass,
    })
}

/// Drops states whose parity differs from `reference_parity` and renormalizes.
pub fn parity_postselect(d: &Distribution, reference_parity: i8, exchange_odd_modes: &[usize]) -> Result<Distribution> {
    let kept: BTreeMap<u64, f64> = d
        .probs
        .iter()
        .filter(|(&i, _)| d.state(i).parity(exchange_odd_modes) == reference_parity)
        .map(|(&i, &p)| (i, p))
        .collect();
    let p_tilde: f64 = kept.values().sum();
    if p_tilde == 0.0 {
        return Err(Error::EmptyParitySector);
    }
    let counts = d.counts.as_ref().map(|c| c.iter().filter(|(i, _)| kept.contains_key(i)).map(|(&i, &n)| (i, n)).collect());
    Ok(Distribution {
        layout: d.layout.clone(),
        probs: kept.into_iter().map(|(i, p)| (i, p / p_tilde)).collect(),
        counts,
        provenance: d.provenance,
        parity_filtered: true,
        padded_mass: d.padded_mass,
    })
}
