use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::basis::RovibBasisState;
use crate::error::{Error, Result};
use crate::molecule::{DerivedFrame, MoleculeModel};
use crate::qsci::{solve_shared_basis, BasisSet};
use crate::watson::WatsonHamiltonian;

/// Energies over random shared bases: the references plus size - n_ref
/// states drawn uniformly without replacement from the rest of the J = 0
/// space.
#[derive(Debug, Clone)]
pub struct RandomStats {
    pub references: Vec<RovibBasisState>,
    pub size: usize,
    pub trials: usize,
    pub seed: u64,
    pub mean_cm1: Vec<f64>,
    /// Sample standard deviation over trials.
    pub std_cm1: Vec<f64>,
}

/// Trial t draws from stream t of a ChaCha8 generator seeded with `seed`, so
/// results do not depend on thread scheduling.
fn trial_basis(references: &[RovibBasisState], pool: &[RovibBasisState], extra: usize, seed: u64, trial: usize) -> BasisSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    let mut picks = rand::seq::index::sample(&mut rng, pool.len(), extra).into_vec();
    picks.sort_unstable();
    BasisSet::from_states(references.iter().cloned().chain(picks.into_iter().map(|i| pool[i].clone())))
}

pub fn random_baseline(
    model: &MoleculeModel,
    frame: &DerivedFrame,
    vmax: usize,
    references: &[RovibBasisState],
    size: usize,
    trials: usize,
    seed: u64,
) -> Result<RandomStats> {
    let w = WatsonHamiltonian::new(model, frame, vmax, 0)?;
    let fixed = BasisSet::from_states(references.iter().cloned());
    if fixed.len() != references.len() {
        return Err(Error::invalid("references must be distinct"));
    }
    for r in references {
        w.space().check(r)?;
    }
    let pool: Vec<RovibBasisState> = w.space().states().filter(|s| !fixed.contains(s)).collect();
    if size < references.len() || size > w.space().dim() {
        return Err(Error::invalid(format!("random basis size {size} outside {}..={}", references.len(), w.space().dim())));
    }
    if trials == 0 {
        return Err(Error::invalid("at least one trial is required"));
    }
    let extra = size - references.len();
    let samples: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let omega = trial_basis(references, &pool, extra, seed, t);
            Ok(solve_shared_basis(&w, references, &omega)?.into_iter().map(|e| e[0]).collect())
        })
        .collect::<Result<_>>()?;
    let n = trials as f64;
    let mean_cm1: Vec<f64> = (0..references.len()).map(|r| samples.iter().map(|s| s[r]).sum::<f64>() / n).collect();
    let std_cm1 = (0..references.len())
        .map(|r| {
            if trials < 2 {
                return 0.0;
            }
            let ss: f64 = samples.iter().map(|s| (s[r] - mean_cm1[r]).powi(2)).sum();
            (ss / (n - 1.0)).sqrt()
        })
        .collect();
    Ok(RandomStats {
        references: references.to_vec(),
        size,
        trials,
        seed,
        mean_cm1,
        std_cm1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsci::default_references;
    use crate::watson::{dense_spectrum, GroupMask};

    fn setup() -> (MoleculeModel, DerivedFrame) {
        let model = MoleculeModel::h2o();
        let frame = DerivedFrame::new(&model).unwrap();
        (model, frame)
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let (model, frame) = setup();
        let a = random_baseline(&model, &frame, 3, &default_references(), 12, 40, 7).unwrap();
        let b = random_baseline(&model, &frame, 3, &default_references(), 12, 40, 7).unwrap();
        let c = random_baseline(&model, &frame, 3, &default_references(), 12, 40, 8).unwrap();
        assert_eq!(a.mean_cm1, b.mean_cm1);
        assert_eq!(a.std_cm1, b.std_cm1);
        assert_ne!(a.mean_cm1, c.mean_cm1);
        assert!(a.std_cm1.iter().all(|&s| s >= 0.0));
    }

    #[test]
    fn full_space_has_no_spread() {
        let (model, frame) = setup();
        let refs = default_references();
        let stats = random_baseline(&model, &frame, 2, &refs, 27, 5, 1).unwrap();
        let w = WatsonHamiltonian::new(&model, &frame, 2, 0).unwrap();
        let exact = dense_spectrum(&w.build(GroupMask::FULL).unwrap(), 1).unwrap().values[0];
        assert!(stats.std_cm1.iter().all(|&s| s < 1e-9));
        assert!((stats.mean_cm1[0] - exact).abs() < 1e-8);
        assert!(random_baseline(&model, &frame, 2, &refs, 28, 5, 1).is_err());
        assert!(random_baseline(&model, &frame, 2, &refs, 4, 5, 1).is_err());
    }

    #[test]
    fn trial_bases_hold_the_references() {
        let refs = default_references();
        let pool: Vec<RovibBasisState> = (0..20u8).map(|i| RovibBasisState::vibrational(&[i % 4, i / 4, 3])).collect();
        let omega = trial_basis(&refs, &pool, 6, 3, 11);
        assert_eq!(omega.len(), 11);
        assert_eq!(&omega.states()[..5], &refs[..]);
    }
}
