use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::basis_set::{extend_to_j, select_basis, union_basis, BasisSet};
use super::labels::{rotor_label_for, LevelLabel};
use super::subspace::{assign_levels, combine_references, pick_by_manifold, solve_subspace, subspace_hamiltonian, Combination, PickedState};
use crate::basis::RovibBasisState;
use crate::error::{Error, Result};
use crate::linalg::EigenPairs;
use crate::molecule::{DerivedFrame, MoleculeModel};
use crate::operators::{asymmetric_top_solve, RotorLevel};
use crate::pauli::{pauli_decompose_factored, QubitLayout};
use crate::trotter::{exact_distribution, parity_postselect, prepare_basis_state, sample_shots, Distribution, TermOrder, TrotterStep};
use crate::watson::{dense_spectrum, GroupMask, WatsonHamiltonian, DEFAULT_DENSE_LIMIT};

/// The five lowest vibrational states used as references.
pub const DEFAULT_REFERENCES: [&str; 5] = ["000", "010", "020", "100", "001"];

pub fn default_references() -> Vec<RovibBasisState> {
    DEFAULT_REFERENCES.iter().map(|l| RovibBasisState::from_label(l).expect("valid label")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum ScheduleKind {
    /// Fixed tau, growing number of Trotter steps.
    FixedTau { tau_au: f64, steps: Vec<usize> },
    /// Fixed number of steps, growing tau.
    FixedSteps { n_steps: usize, taus_au: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    #[serde(flatten)]
    pub kind: ScheduleKind,
    pub epsilon: f64,
    /// 0 samples the exact distribution.
    pub n_shot: u64,
    pub seed: u64,
    pub lambda_cm1: f64,
    pub order: TermOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchedulePoint {
    pub tau_au: f64,
    pub n_steps: usize,
}

impl Schedule {
    /// tau = 10 a.u., N_ST = 0..=max_steps, lambda = 110 cm^-1.
    pub fn fixed_tau(max_steps: usize) -> Self {
        Schedule {
            kind: ScheduleKind::FixedTau {
                tau_au: 10.0,
                steps: (0..=max_steps).collect(),
            },
            epsilon: 1e-4,
            n_shot: 0,
            seed: 0,
            lambda_cm1: 110.0,
            order: TermOrder::default(),
        }
    }

    /// N_ST = 1, tau = n * 20 a.u. for n = 0..=max_n, lambda = 219 cm^-1.
    pub fn fixed_steps(max_n: usize) -> Self {
        Schedule {
            kind: ScheduleKind::FixedSteps {
                n_steps: 1,
                taus_au: (0..=max_n).map(|n| 20.0 * n as f64).collect(),
            },
            epsilon: 1e-4,
            n_shot: 0,
            seed: 0,
            lambda_cm1: 219.0,
            order: TermOrder::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::invalid(format!("threshold must be positive, got {}", self.epsilon)));
        }
        if self.lambda_cm1.is_nan() || self.lambda_cm1 < 0.0 {
            return Err(Error::invalid(format!("cutoff must be non-negative, got {}", self.lambda_cm1)));
        }
        let increasing = match &self.kind {
            ScheduleKind::FixedTau { tau_au, steps } => {
                if !(*tau_au >= 0.0) {
                    return Err(Error::invalid(format!("time step must be non-negative, got {tau_au}")));
                }
                !steps.is_empty() && steps.windows(2).all(|w| w[0] < w[1])
            }
            ScheduleKind::FixedSteps { taus_au, .. } => {
                if taus_au.iter().any(|t| !(*t >= 0.0)) {
                    return Err(Error::invalid("time steps must be non-negative"));
                }
                !taus_au.is_empty() && taus_au.windows(2).all(|w| w[0] < w[1])
            }
        };
        if !increasing {
            return Err(Error::invalid("schedule points must be non-empty and strictly increasing"));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<SchedulePoint> {
        match &self.kind {
            ScheduleKind::FixedTau { tau_au, steps } => steps.iter().map(|&n| SchedulePoint { tau_au: *tau_au, n_steps: n }).collect(),
            ScheduleKind::FixedSteps { n_steps, taus_au } => taus_au.iter().map(|&t| SchedulePoint { tau_au: t, n_steps: *n_steps }).collect(),
        }
    }

    /// Shot seed for one reference at one schedule point.
    pub fn shot_seed(&self, reference: usize, point: usize) -> u64 {
        self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ ((reference as u64) << 32 | point as u64)
    }
}

#[derive(Debug, Clone)]
pub struct LevelResult {
    pub reference: RovibBasisState,
    pub label: LevelLabel,
    /// Size of the reference's own basis set.
    pub omega_size: usize,
    /// Eigenvalue of the reference's subspace problem feeding this level.
    pub raw_energy_cm1: f64,
    pub combined_energy_cm1: f64,
    pub exact_energy_cm1: Option<f64>,
}

impl LevelResult {
    pub fn error_cm1(&self) -> Option<f64> {
        self.exact_energy_cm1.map(|e| self.combined_energy_cm1 - e)
    }
}

/// Subspace solutions for one set of per-reference bases.
#[derive(Debug, Clone)]
pub struct PointSolution {
    pub bases: Vec<BasisSet>,
    pub picked: Vec<PickedState>,
    pub combination: Combination,
    /// One per combined level, ascending in energy.
    pub levels: Vec<LevelResult>,
}

impl PointSolution {
    /// Combined energy of the lowest level assigned to each reference.
    pub fn energy_of(&self, reference: &RovibBasisState) -> Option<f64> {
        self.levels.iter().find(|l| l.reference.v == reference.v).map(|l| l.combined_energy_cm1)
    }
}

/// Exact spectrum of the full space, for reference energies and labels.
#[derive(Debug, Clone)]
pub struct ExactLevels {
    pub eig: EigenPairs,
    pub basis: Vec<RovibBasisState>,
}

impl ExactLevels {
    pub fn compute(w: &WatsonHamiltonian) -> Result<Self> {
        let h = w.build(GroupMask::FULL)?;
        let eig = dense_spectrum(&h, h.dim())?;
        Ok(ExactLevels {
            eig,
            basis: w.space().states().collect(),
        })
    }

    /// Energy of the exact level with the largest overlap with |vib>|Phi_rot>.
    pub fn energy_for(&self, vib: &[u8], rot: &RotorLevel) -> f64 {
        let positions: Vec<(usize, usize)> = self
            .basis
            .iter()
            .enumerate()
            .filter(|(_, s)| s.v == vib)
            .map(|(p, s)| (p, (s.k + s.j as i32) as usize))
            .collect();
        let mut best = (0usize, -1.0f64);
        for c in 0..self.eig.len() {
            let amp: crate::C64 = positions.iter().map(|&(p, m)| rot.vector[m].conj() * self.eig.vectors[(p, c)]).sum();
            if amp.norm_sqr() > best.1 + 1e-12 {
                best = (c, amp.norm_sqr());
            }
        }
        self.eig.values[best.0]
    }
}

/// Solves each reference's subspace, picks 2J+1 states per reference by
/// weight on |reference>|K>, and combines them.
pub fn solve_bases(
    w: &WatsonHamiltonian,
    rotor: &[RotorLevel],
    references: &[RovibBasisState],
    bases: &[BasisSet],
    exact: Option<&ExactLevels>,
) -> Result<PointSolution> {
    if references.len() != bases.len() {
        return Err(Error::invalid("one basis set per reference is required"));
    }
    let j = w.space().j;
    let per_ref = 2 * j as usize + 1;
    let picked: Vec<Vec<PickedState>> = references
        .par_iter()
        .zip(bases.par_iter())
        .map(|(r, omega)| {
            let positions: Vec<usize> = (-(j as i32)..=j as i32)
                .filter_map(|k| omega.position(&r.with_k(j, k)))
                .collect();
            if positions.is_empty() {
                return Err(Error::invalid(format!("basis set for {r} does not contain it")));
            }
            let h = subspace_hamiltonian(w, omega)?;
            let eig = solve_subspace(&h, (4 * per_ref).max(12))?;
            Ok(pick_by_manifold(&eig, &positions, per_ref.min(eig.len()))
                .into_iter()
                .map(|c| PickedState {
                    reference: r.clone(),
                    energy_cm1: eig.values[c],
                    basis: omega.clone(),
                    coefficients: eig.vector(c),
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let group_of: Vec<usize> = picked.iter().enumerate().flat_map(|(g, p)| std::iter::repeat_n(g, p.len())).collect();
    let picked: Vec<PickedState> = picked.into_iter().flatten().collect();
    let combination = combine_references(&picked, w)?;
    let owner = assign_levels(&combination.weights, &group_of);
    let levels = (0..combination.energies_cm1.len())
        .map(|level| {
            let g = owner[level];
            let reference = &references[g];
            let vector = combination.vectors.column(level).into_owned();
            let label = rotor_label_for(&vector, combination.basis.states(), rotor, &reference.v);
            let rot_level = rotor.iter().find(|r| r.label == label.rot).expect("label from this rotor set");
            let (raw, _) = (0..picked.len())
                .filter(|&a| group_of[a] == g)
                .map(|a| (picked[a].energy_cm1, combination.weights[(level, a)]))
                .fold((f64::NAN, f64::NEG_INFINITY), |best, x| if x.1 > best.1 { x } else { best });
            LevelResult {
                reference: reference.clone(),
                omega_size: bases[g].len(),
                raw_energy_cm1: raw,
                combined_energy_cm1: combination.energies_cm1[level],
                exact_energy_cm1: exact.map(|e| e.energy_for(&reference.v, rot_level)),
                label,
            }
        })
        .collect();
    Ok(PointSolution {
        bases: bases.to_vec(),
        picked,
        combination,
        levels,
    })
}

/// Diagonalizes H once on a basis shared by all references and assigns
/// 2J+1 eigenstates to each reference, one-to-one, by weight on
/// |reference>|K>. Energies per reference come out ascending.
pub fn solve_shared_basis(w: &WatsonHamiltonian, references: &[RovibBasisState], omega: &BasisSet) -> Result<Vec<Vec<f64>>> {
    let j = w.space().j;
    let mut positions = Vec::new();
    let mut group_of = Vec::new();
    for (g, r) in references.iter().enumerate() {
        for k in -(j as i32)..=j as i32 {
            let pos = omega
                .position(&r.with_k(j, k))
                .ok_or_else(|| Error::invalid(format!("shared basis does not contain {r} with K = {k}")))?;
            positions.push(pos);
            group_of.push(g);
        }
    }
    let h = subspace_hamiltonian(w, omega)?;
    let eig = solve_subspace(&h, (2 * positions.len()).max(12))?;
    let weights = nalgebra::DMatrix::from_fn(eig.len(), positions.len(), |c, a| eig.vectors[(positions[a], c)].norm_sqr());
    let owner = assign_levels(&weights, &group_of);
    let mut out = vec![Vec::new(); references.len()];
    for (c, &g) in owner.iter().enumerate() {
        if g < references.len() {
            out[g].push(eig.values[c]);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub vmax: usize,
    pub j: u32,
    /// Vibrational references (J = 0 form).
    pub references: Vec<RovibBasisState>,
    pub schedule: Schedule,
    /// Compute the full spectrum for reference energies when it fits densely.
    pub exact: bool,
}

#[derive(Debug, Clone)]
pub struct PointResult {
    pub point: SchedulePoint,
    /// Parity-filtered distribution per reference.
    pub distributions: Vec<Distribution>,
    /// Accumulated J = 0 basis per reference.
    pub sampled: Vec<BasisSet>,
    pub solution: PointSolution,
}

#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub config: PipelineConfig,
    pub points: Vec<PointResult>,
    /// The rotations of one Trotter step, in applied order.
    pub order_log: Vec<String>,
    /// Lowest exact J = 0 eigenvalue, the zero of delta-E.
    pub exact_ground_cm1: Option<f64>,
}

impl PipelineRun {
    /// Union of the sampled J = 0 bases at one schedule point.
    pub fn omega_big(&self, point: usize) -> BasisSet {
        union_basis(&self.points[point].sampled)
    }
}

/// Sampled J = 0 bases per schedule point (outer) and reference (inner),
/// with the distributions they came from.
pub fn sample_bases(
    model: &MoleculeModel,
    frame: &DerivedFrame,
    vmax: usize,
    references: &[RovibBasisState],
    schedule: &Schedule,
) -> Result<(Vec<Vec<(Distribution, BasisSet)>>, TrotterStep)> {
    schedule.validate()?;
    let layout = QubitLayout::new(model.n_modes(), vmax, 0)?;
    let sum = pauli_decompose_factored(model, frame, vmax, 0)?;
    let step = TrotterStep::new(&sum, schedule.lambda_cm1, schedule.order)?;
    let points = schedule.points();
    let per_reference: Vec<Vec<(Distribution, BasisSet)>> = references
        .par_iter()
        .enumerate()
        .map(|(ri, r)| {
            let s0 = prepare_basis_state(&layout, r)?;
            let parity = r.parity(&model.exchange_odd_modes);
            let mut carry = BasisSet::from_states([r.clone()]);
            let mut out = Vec::with_capacity(points.len());
            for (pi, p) in points.iter().enumerate() {
                let s = step.evolve(&s0, p.tau_au, p.n_steps)?;
                let mut d = exact_distribution(&s, &layout)?;
                if schedule.n_shot > 0 {
                    d = sample_shots(&d, schedule.n_shot, schedule.shot_seed(ri, pi))?;
                }
                let d = parity_postselect(&d, parity, &model.exchange_odd_modes)?;
                carry = select_basis(&d, schedule.epsilon, &carry);
                out.push((d, carry.clone()));
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut by_point: Vec<Vec<(Distribution, BasisSet)>> = (0..points.len()).map(|_| Vec::new()).collect();
    for series in per_reference {
        for (pi, entry) in series.into_iter().enumerate() {
            by_point[pi].push(entry);
        }
    }
    Ok((by_point, step))
}

pub fn run_pipeline(model: &MoleculeModel, frame: &DerivedFrame, config: &PipelineConfig) -> Result<PipelineRun> {
    if config.references.is_empty() {
        return Err(Error::invalid("at least one reference state is required"));
    }
    for r in &config.references {
        if r.j != 0 || r.v.len() != model.n_modes() || r.v.iter().any(|&v| v as usize > config.vmax) {
            return Err(Error::invalid(format!("reference {r} is not a J = 0 state within vmax = {}", config.vmax)));
        }
    }
    let (sampled, step) = sample_bases(model, frame, config.vmax, &config.references, &config.schedule)?;
    let w = WatsonHamiltonian::new(model, frame, config.vmax, config.j)?;
    let rotor = asymmetric_top_solve(frame, config.j);
    let fits = |w: &WatsonHamiltonian| w.space().dim() <= DEFAULT_DENSE_LIMIT;
    let exact = if config.exact && fits(&w) { Some(ExactLevels::compute(&w)?) } else { None };
    let exact_ground_cm1 = if config.exact {
        let w0 = WatsonHamiltonian::new(model, frame, config.vmax, 0)?;
        if fits(&w0) {
            Some(dense_spectrum(&w0.build(GroupMask::FULL)?, 1)?.values[0])
        } else {
            None
        }
    } else {
        None
    };
    let points = config
        .schedule
        .points()
        .into_par_iter()
        .zip(sampled.into_par_iter())
        .map(|(point, entries)| {
            let (distributions, sampled): (Vec<Distribution>, Vec<BasisSet>) = entries.into_iter().unzip();
            let bases: Vec<BasisSet> = sampled.iter().map(|b| extend_to_j(b, config.j)).collect();
            let solution = solve_bases(&w, &rotor, &config.references, &bases, exact.as_ref())?;
            Ok(PointResult {
                point,
                distributions,
                sampled,
                solution,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PipelineRun {
        config: config.clone(),
        points,
        order_log: step.order_log(),
        exact_ground_cm1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (MoleculeModel, DerivedFrame) {
        let model = MoleculeModel::h2o();
        let frame = DerivedFrame::new(&model).unwrap();
        (model, frame)
    }

    #[test]
    fn schedule_validation_and_points() {
        let s = Schedule::fixed_tau(3);
        s.validate().unwrap();
        assert_eq!(s.points().len(), 4);
        assert_eq!(s.points()[2], SchedulePoint { tau_au: 10.0, n_steps: 2 });
        let mut bad = s.clone();
        bad.epsilon = 0.0;
        assert!(bad.validate().is_err());
        let mut bad = Schedule::fixed_steps(2);
        bad.kind = ScheduleKind::FixedSteps {
            n_steps: 1,
            taus_au: vec![20.0, 20.0],
        };
        assert!(bad.validate().is_err());
        let text = toml::to_string(&Schedule::fixed_steps(5)).unwrap();
        assert_eq!(toml::from_str::<Schedule>(&text).unwrap(), Schedule::fixed_steps(5));
    }

    #[test]
    fn full_parity_blocks_reproduce_the_dense_spectrum() {
        let (model, frame) = setup();
        for j in [0u32, 1] {
            let w = WatsonHamiltonian::new(&model, &frame, 2, j).unwrap();
            let refs = ["000", "010", "001"].map(|l| RovibBasisState::from_label(l).unwrap());
            // At J = 0 the reference's parity block is closed under H; at J > 0
            // the K extension mixes v3 parities, so the whole space is used.
            let bases: Vec<BasisSet> = refs
                .iter()
                .map(|r| {
                    let j0 = crate::basis::BasisSpace::new(3, 2, 0, &model.exchange_odd_modes);
                    let p = r.parity(&model.exchange_odd_modes);
                    extend_to_j(&BasisSet::from_states(j0.states().filter(|s| j > 0 || s.parity(&model.exchange_odd_modes) == p)), j)
                })
                .collect();
            let exact = ExactLevels::compute(&w).unwrap();
            let sol = solve_bases(&w, &asymmetric_top_solve(&frame, j), &refs, &bases, Some(&exact)).unwrap();
            for l in &sol.levels {
                assert!(l.error_cm1().unwrap().abs() < 1e-8, "J={j} {}: {:?}", l.label, l.error_cm1());
                assert!((l.raw_energy_cm1 - l.combined_energy_cm1).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn zero_steps_give_singleton_bases() {
        let (model, frame) = setup();
        let config = PipelineConfig {
            vmax: 3,
            j: 0,
            references: default_references(),
            schedule: Schedule::fixed_tau(1),
            exact: true,
        };
        let run = run_pipeline(&model, &frame, &config).unwrap();
        assert!(run.points[0].sampled.iter().all(|b| b.len() == 1));
        assert_eq!(run.order_log.len(), 40);
        for l in &run.points[1].solution.levels {
            assert!(l.error_cm1().unwrap() > -1e-8, "{}", l.label);
        }
        for (a, b) in run.points[0].sampled.iter().zip(&run.points[1].sampled) {
            assert!(a.is_subset_of(b));
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let (model, frame) = setup();
        let mut schedule = Schedule::fixed_tau(2);
        schedule.n_shot = 1000;
        schedule.seed = 17;
        let config = PipelineConfig {
            vmax: 3,
            j: 0,
            references: default_references(),
            schedule,
            exact: false,
        };
        let a = run_pipeline(&model, &frame, &config).unwrap();
        let b = run_pipeline(&model, &frame, &config).unwrap();
        for (pa, pb) in a.points.iter().zip(&b.points) {
            assert_eq!(pa.sampled, pb.sampled);
            let ea: Vec<f64> = pa.solution.levels.iter().map(|l| l.combined_energy_cm1).collect();
            let eb: Vec<f64> = pb.solution.levels.iter().map(|l| l.combined_energy_cm1).collect();
            assert_eq!(ea, eb);
        }
    }
}
